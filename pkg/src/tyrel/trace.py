"""Structured search traces: recording, text/JSON/DOT rendering, pruning."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

KINDS = ("goal", "unify", "diseq", "branch", "delay", "force", "success", "failure")

# returned by record() for events dropped because a limit was hit
DROPPED = -1


@dataclass(frozen=True, slots=True)
class TraceNode:
    id: int
    parent: Optional[int]
    step: int
    kind: str
    label: str
    detail: str = ""


@dataclass(frozen=True)
class TraceTree:
    nodes: tuple[TraceNode, ...] = ()
    truncated: bool = False

    def children(self) -> dict[Optional[int], list[int]]:
        out: dict[Optional[int], list[int]] = {}
        for n in self.nodes:
            out.setdefault(n.parent, []).append(n.id)
        return out

    def depths(self) -> list[int]:
        depth: list[int] = []
        for n in self.nodes:
            depth.append(0 if n.parent is None else depth[n.parent] + 1)
        return depth

    def count(self, kind: str) -> int:
        return sum(1 for n in self.nodes if n.kind == kind)


class TraceSink:
    """Append-only, bounded trace recorder owned by one run."""

    def __init__(self, enabled: bool = True, max_depth: Optional[int] = None, max_nodes: Optional[int] = None):
        self.enabled = enabled
        self.max_depth = max_depth
        self.max_nodes = max_nodes
        self.nodes: list[TraceNode] = []
        self.truncated = False
        self._depth: list[int] = []
        self._step = 0

    def record(self, parent: Optional[int], kind: str, label: str, detail: str = "") -> Optional[int]:
        if not self.enabled:
            return None
        step = self._step
        self._step += 1
        if parent == DROPPED:
            self.truncated = True
            return DROPPED
        depth = 0 if parent is None else self._depth[parent] + 1
        if (self.max_nodes is not None and len(self.nodes) >= self.max_nodes) or (
            self.max_depth is not None and depth > self.max_depth
        ):
            self.truncated = True
            return DROPPED
        node_id = len(self.nodes)
        self.nodes.append(TraceNode(node_id, parent, step, kind, label, detail))
        self._depth.append(depth)
        return node_id

    def path(self, node_id: Optional[int]) -> list[str]:
        """Labels from the root down to ``node_id``."""
        out = []
        while node_id is not None and node_id != DROPPED:
            n = self.nodes[node_id]
            out.append(f"[{n.kind}] {n.label}")
            node_id = n.parent
        out.reverse()
        return out

    def tree(self) -> TraceTree:
        return TraceTree(tuple(self.nodes), self.truncated)


def _all_failure_leaves(tree: TraceTree) -> list[bool]:
    kids = tree.children()
    dead = [False] * len(tree.nodes)
    for n in reversed(tree.nodes):
        ks = kids.get(n.id)
        dead[n.id] = n.kind == "failure" if not ks else all(dead[k] for k in ks)
    return dead


def render_text(t: TraceTree, max_depth: Optional[int] = None, hide_failures: bool = False) -> str:
    dead = _all_failure_leaves(t) if hide_failures else None
    kids = t.children()
    lines: list[str] = []
    stack = [(r, 0) for r in reversed(kids.get(None, []))]
    while stack:
        nid, depth = stack.pop()
        if dead is not None and dead[nid]:
            continue
        n = t.nodes[nid]
        line = f"{'  ' * depth}[{n.kind}] {n.label}"
        if n.detail:
            line += f" \u2014 {n.detail}"
        lines.append(line)
        if max_depth is None or depth < max_depth:
            stack.extend((k, depth + 1) for k in reversed(kids.get(nid, [])))
    return "".join(line + "\n" for line in lines)


def export_json(t: TraceTree) -> bytes:
    doc = {
        "version": 1,
        "truncated": t.truncated,
        "nodes": [
            {"id": n.id, "parent": n.parent, "step": n.step, "kind": n.kind, "label": n.label, "detail": n.detail}
            for n in t.nodes
        ],
    }
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def import_json(data: bytes) -> TraceTree:
    doc = json.loads(data)
    nodes = tuple(TraceNode(n["id"], n["parent"], n["step"], n["kind"], n["label"], n["detail"]) for n in doc["nodes"])
    return TraceTree(nodes, doc["truncated"])


_SHAPES = {"failure": "box", "success": "doublecircle"}


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def export_dot(t: TraceTree) -> str:
    out = ["digraph trace {\n"]
    for n in t.nodes:
        label = f"{n.kind}: {n.label}"
        if n.detail:
            label += f"\n{n.detail}"
        out.append(f'  n{n.id} [label="{_dot_escape(label)}", shape={_SHAPES.get(n.kind, "ellipse")}];\n')
    for n in t.nodes:
        if n.parent is not None:
            out.append(f"  n{n.parent} -> n{n.id};\n")
    out.append("}\n")
    return "".join(out)


def prune(t: TraceTree, max_depth: int) -> TraceTree:
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    depth = t.depths()
    remap: dict[int, int] = {}
    nodes = []
    for n in t.nodes:
        if depth[n.id] > max_depth:
            continue
        remap[n.id] = len(nodes)
        parent = None if n.parent is None else remap[n.parent]
        nodes.append(TraceNode(len(nodes), parent, n.step, n.kind, n.label, n.detail))
    removed = len(nodes) < len(t.nodes)
    return TraceTree(tuple(nodes), t.truncated or removed)


def write_trace(t: TraceTree, path: str, fmt: str) -> None:
    if fmt == "json":
        with open(path, "wb") as f:
            f.write(export_json(t))
        return
    text = {"text": render_text, "dot": export_dot}[fmt](t)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
