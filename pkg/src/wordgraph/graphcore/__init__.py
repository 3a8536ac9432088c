"""Word-recurrence graphs over a single token window.

Nodes are the distinct words of the window; every pair of adjacent tokens
not separated by a line boundary adds one directed transition. The graph is
a multigraph: repeated transitions are kept, self-loops are allowed.

This module is the readable reference implementation. The corpus pipeline
uses the batched kernel in :mod:`wordgraph.graphcore.kernel`, which is
checked against this one in the test-suite.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from wordgraph.errors import DataError

ATTRIBUTES: tuple[str, ...] = ("N", "E", "RE", "PE", "LCC", "LSC", "ASP")


@dataclass(frozen=True)
class WindowGraph:
    node_labels: tuple[str, ...]
    transitions: tuple[tuple[int, int], ...]
    window_len: int

    @property
    def node_count(self) -> int:
        return len(self.node_labels)

    def successors(self) -> list[list[int]]:
        """Distinct out-neighbours of every node, in first-seen order."""
        out: list[list[int]] = [[] for _ in self.node_labels]
        seen: set[tuple[int, int]] = set()
        for edge in self.transitions:
            if edge not in seen:
                seen.add(edge)
                out[edge[0]].append(edge[1])
        return out

    def to_edge_list(self) -> str:
        """Debug export: ``source<TAB>target<TAB>multiplicity`` per line."""
        counts = Counter(self.transitions)
        lines = [
            f"{self.node_labels[u]}\t{self.node_labels[v]}\t{m}"
            for (u, v), m in sorted(counts.items())
        ]
        return "".join(line + "\n" for line in lines)


@dataclass(frozen=True)
class AttributeVector:
    """The seven window metrics. Integer-valued per window, real-valued when averaged."""

    N: float
    E: float
    RE: float
    PE: float
    LCC: float
    LSC: float
    ASP: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.N, self.E, self.RE, self.PE, self.LCC, self.LSC, self.ASP)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(ATTRIBUTES, self.as_tuple()))

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> AttributeVector:
        return cls(*(float(v) for v in values))


def build_window_graph(
    tokens: Sequence[str], boundaries: Iterable[int] = ()
) -> WindowGraph:
    """Build the graph of one window.

    ``boundaries`` holds window-relative token indices that start a new
    line; the transition into such a token is suppressed. A boundary at
    index 0 has no effect.
    """
    if not tokens:
        raise DataError("cannot build a graph from an empty window")
    index: dict[str, int] = {}
    nodes = [index.setdefault(tok, len(index)) for tok in tokens]
    cut = set(boundaries)
    transitions = tuple(
        (nodes[i], nodes[i + 1]) for i in range(len(nodes) - 1) if i + 1 not in cut
    )
    return WindowGraph(tuple(index), transitions, len(tokens))


def strongly_connected_components(g: WindowGraph) -> list[list[int]]:
    """Tarjan's algorithm, iterative. Components come out in reverse topological order."""
    return _tarjan(g.successors())


def _tarjan(succ: list[list[int]]) -> list[list[int]]:
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            for j in range(i, len(succ[v])):
                w = succ[v][j]
                if index[w] == -1:
                    work.append((v, j + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return components


def weakly_connected_components(g: WindowGraph) -> list[list[int]]:
    parent = list(range(g.node_count))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in g.transitions:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)

    groups: dict[int, list[int]] = {}
    for x in range(g.node_count):
        groups.setdefault(find(x), []).append(x)
    return list(groups.values())


def _bfs_distances(succ: list[list[int]], source: int) -> list[int]:
    dist = [-1] * len(succ)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in succ[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def average_shortest_path(g: WindowGraph) -> float:
    """Mean directed hop distance over ordered pairs (u != v) with a path; 0 if none."""
    return _mean_distance(g.successors())


def _mean_distance(succ: list[list[int]]) -> float:
    total = pairs = 0
    for s in range(len(succ)):
        for t, d in enumerate(_bfs_distances(succ, s)):
            if d > 0 and t != s:
                total += d
                pairs += 1
    return total / pairs if pairs else 0.0


def compute_attributes(g: WindowGraph) -> AttributeVector:
    counts = Counter(g.transitions)
    succ = g.successors()
    distinct = len(counts)
    anti_parallel = sum(
        1 for (u, v) in counts if u < v and (v, u) in counts
    )
    return AttributeVector(
        N=g.node_count,
        E=distinct,
        RE=len(g.transitions) - distinct,
        PE=anti_parallel,
        LCC=max(map(len, weakly_connected_components(g))),
        LSC=max(map(len, _tarjan(succ))),
        ASP=_mean_distance(succ),
    )


def window_attributes(tokens: Sequence[str], boundaries: Iterable[int] = ()) -> AttributeVector:
    return compute_attributes(build_window_graph(tokens, boundaries))


__all__ = [
    "ATTRIBUTES",
    "AttributeVector",
    "WindowGraph",
    "average_shortest_path",
    "build_window_graph",
    "compute_attributes",
    "strongly_connected_components",
    "weakly_connected_components",
    "window_attributes",
]
