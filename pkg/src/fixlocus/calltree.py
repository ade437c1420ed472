"""Failure call tree: caller/callee paths of the failing run with SIBs attached."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .anomaly import Sib
from .errors import AnchorNotInTrace, InvariantViolation, NoSibs
from .model import MethodRef, Trace

Path = tuple[MethodRef, ...]


@dataclass(eq=False)
class TreeNode:
    method: MethodRef
    path: Path
    depth: int
    first_seq: int
    children: dict[MethodRef, "TreeNode"] = field(default_factory=dict)
    attached_sibs: list[int] = field(default_factory=list)

    def __repr__(self) -> str:
        return f"TreeNode({self.method.short}, depth={self.depth}, sibs={self.attached_sibs})"


@dataclass(eq=False)
class FailureCallTree:
    root: TreeNode
    sibs: dict[int, Sib]
    nodes: dict[Path, TreeNode]

    @property
    def total_sib_weight(self) -> int:
        return sum(s.weight for s in self.sibs.values())

    @property
    def max_depth(self) -> int:
        return max(n.depth for n in self.nodes.values())

    def walk(self) -> Iterator[TreeNode]:
        """Pre-order traversal, children in first-occurrence order."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children.values()))

    def parent(self, node: TreeNode) -> TreeNode | None:
        return self.nodes.get(node.path[:-1]) if node.depth else None


def _insert(nodes: dict[Path, TreeNode], path: Path, seq: int) -> None:
    for depth in range(1, len(path)):
        prefix = path[: depth + 1]
        if prefix not in nodes:
            parent = nodes[path[:depth]]
            node = TreeNode(path[depth], prefix, depth, seq)
            parent.children[path[depth]] = node
            nodes[prefix] = node


def build_failure_tree(failure: Trace, sibs: Sequence[Sib]) -> FailureCallTree:
    if not sibs:
        raise NoSibs("no suspicious invocation blocks: nothing to localize")
    entry = failure.events[0].stack[0] if failure.events else sibs[0].anchor_stack[0]
    root = TreeNode(entry, (entry,), 0, failure.events[0].seq if failure.events else 0)
    nodes: dict[Path, TreeNode] = {root.path: root}
    for ev in failure.events:
        if ev.stack[0] != entry:
            raise InvariantViolation([f"seq {ev.seq}: stack rooted at {ev.stack[0]}, not {entry}"])
        _insert(nodes, ev.path, ev.seq)
    for sib in sibs:
        node = nodes.get(tuple(sib.anchor_stack))
        if node is None:
            anchor = " > ".join(str(m) for m in sib.anchor_stack)
            raise AnchorNotInTrace(f"SIB {sib.id} anchor {anchor} does not occur in the failure trace")
        node.attached_sibs.append(sib.id)
    return FailureCallTree(root, {s.id: s for s in sibs}, nodes)


def reachable_sibs(tree: FailureCallTree, node: TreeNode) -> set[int]:
    """SIB ids attached to ``node`` or any of its descendants."""
    found: set[int] = set()
    stack = [node]
    while stack:
        n = stack.pop()
        found.update(n.attached_sibs)
        stack.extend(n.children.values())
    return found


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_dot(tree: FailureCallTree) -> str:
    ids = {}
    lines = ["digraph failure_call_tree {", "  node [shape=box, fontname=monospace];"]
    for i, node in enumerate(tree.walk()):
        ids[node.path] = f"n{i}"
        label = _quote(str(node.method))
        attrs = f"label={label}"
        if node.attached_sibs:
            sib_list = ",".join(str(s) for s in sorted(node.attached_sibs))
            attrs = f'label={label[:-1]}\\nsibs={sib_list}", color=red'
        lines.append(f"  n{i} [{attrs}];")
    for node in tree.walk():
        for child in node.children.values():
            lines.append(f"  {ids[node.path]} -> {ids[child.path]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
