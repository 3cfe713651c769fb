"""Finite graphs, edge paths and markings by the rose.

Edges carry positive integer ids; the reversed edge is the negated id, so an
edge path is a tuple of signed ints and free reduction is path tightening.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

from .free_group import (
    EMPTY, Word, default_names, inverse, letter_key, reduce,
    word_key,
)
from .stallings import FoldedGraph

Path = tuple[int, ...]


class PathError(ValueError):
    pass


class Graph:
    def __init__(self, vertices: Iterable[str], edges: Mapping[int, tuple[str, str]],
                 names: Mapping[int, str] | None = None):
        self.vertices: tuple[str, ...] = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex")
        vs = set(self.vertices)
        self._ends: dict[int, tuple[str, str]] = {}
        for e, (a, b) in sorted(edges.items()):
            if e <= 0:
                raise ValueError("edge ids must be positive")
            if a not in vs or b not in vs:
                raise ValueError(f"edge {e} has an unknown endpoint")
            self._ends[e] = (a, b)
        self.names: dict[int, str] = dict(names) if names else {e: f"e{e}" for e in self._ends}
        if set(self.names) != set(self._ends):
            raise ValueError("every edge needs a name")
        if len(set(self.names.values())) != len(self.names):
            raise ValueError("duplicate edge name")
        self._by_name = {n: e for e, n in self.names.items()}
        self._dirs: dict[str, list[int]] = {v: [] for v in self.vertices}
        for e, (a, b) in self._ends.items():
            self._dirs[a].append(e)
            self._dirs[b].append(-e)
        for v in self._dirs:
            self._dirs[v].sort(key=letter_key)

    # basic incidence

    @property
    def edges(self) -> tuple[int, ...]:
        return tuple(self._ends)

    def endpoints(self) -> dict[int, tuple[str, str]]:
        return dict(self._ends)

    def origin(self, e: int) -> str:
        a, b = self._ends[abs(e)]
        return a if e > 0 else b

    def terminus(self, e: int) -> str:
        a, b = self._ends[abs(e)]
        return b if e > 0 else a

    def name(self, e: int) -> str:
        return self.names[abs(e)] + ("'" if e < 0 else "")

    def edge(self, name: str) -> int:
        sign = 1
        while name.endswith("'"):
            name = name[:-1]
            sign = -sign
        if name not in self._by_name:
            raise KeyError(f"unknown edge {name!r}")
        return sign * self._by_name[name]

    def directions(self, v: str) -> list[int]:
        return list(self._dirs[v])

    def all_directions(self) -> list[int]:
        return sorted((d for e in self._ends for d in (e, -e)), key=letter_key)

    def valence(self, v: str) -> int:
        return len(self._dirs[v])

    def is_loop(self, e: int) -> bool:
        a, b = self._ends[abs(e)]
        return a == b

    def betti(self) -> int:
        return len(self._ends) - len(self.vertices) + self.component_count()

    def component_count(self, edges: Iterable[int] | None = None,
                        vertices: Iterable[str] | None = None) -> int:
        return len(self.components(edges, vertices))

    def components(self, edges: Iterable[int] | None = None,
                   vertices: Iterable[str] | None = None) -> list[tuple[frozenset[str], frozenset[int]]]:
        """Connected components of the subgraph spanned by ``edges`` (default all)."""
        es = set(self._ends) if edges is None else {abs(e) for e in edges}
        vs = set(self.vertices) if vertices is None and edges is None else set(vertices or ())
        for e in es:
            vs.update(self._ends[e])
        parent = {v: v for v in vs}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in es:
            a, b = self._ends[e]
            parent[find(a)] = find(b)
        groups: dict[str, tuple[set, set]] = {}
        for v in vs:
            groups.setdefault(find(v), (set(), set()))[0].add(v)
        for e in es:
            groups[find(self._ends[e][0])][1].add(e)
        out = [(frozenset(a), frozenset(b)) for a, b in groups.values()]
        out.sort(key=lambda c: min(c[0]))
        return out

    def is_connected(self) -> bool:
        return self.component_count() == 1

    # paths

    def check_path(self, p: Sequence[int], start: str | None = None) -> None:
        for i, e in enumerate(p):
            if abs(e) not in self._ends:
                raise PathError(f"unknown edge id {e}")
            if i and self.terminus(p[i - 1]) != self.origin(e):
                raise PathError(f"steps {i - 1} and {i} are not incident")
        if start is not None and p and self.origin(p[0]) != start:
            raise PathError("path does not start at the given vertex")

    def path_origin(self, p: Sequence[int], default: str | None = None) -> str | None:
        return self.origin(p[0]) if p else default

    def path_terminus(self, p: Sequence[int], default: str | None = None) -> str | None:
        return self.terminus(p[-1]) if p else default

    def format_path(self, p: Sequence[int]) -> str:
        return " ".join(self.name(e) for e in p) if p else "1"

    def parse_path(self, text: str) -> Path:
        return tuple(self.edge(tok) for tok in text.split() if tok != "1")

    def __repr__(self) -> str:
        es = ", ".join(f"{self.names[e]}:{a}->{b}" for e, (a, b) in self._ends.items())
        return f"Graph(vertices={list(self.vertices)}, edges=[{es}])"


def tighten_path(G: Graph, p: Sequence[int]) -> Path:
    G.check_path(p)
    return reduce(p)


def tighten_circuit(G: Graph, p: Sequence[int]) -> Path:
    G.check_path(p)
    if p and G.terminus(p[-1]) != G.origin(p[0]):
        raise PathError("not a closed path")
    w = list(reduce(p))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    if not w:
        raise PathError("trivial circuit")
    w = tuple(w)
    return min((w[i:] + w[:i] for i in range(len(w))), key=word_key)


def core_subgraph(G: Graph, edges: Iterable[int] | None = None) -> frozenset[int]:
    es = set(G.edges if edges is None else (abs(e) for e in edges))
    while True:
        deg: dict[str, int] = {}
        for e in es:
            a, b = G.endpoints()[e]
            deg[a] = deg.get(a, 0) + 1
            deg[b] = deg.get(b, 0) + 1
        leaves = {v for v, d in deg.items() if d == 1}
        if not leaves:
            return frozenset(es)
        es = {e for e in es if not (set(G.endpoints()[e]) & leaves)}


def spanning_tree(G: Graph, root: str, edges: Iterable[int] | None = None) -> dict[str, Path]:
    """Path from ``root`` to every reachable vertex inside a BFS spanning tree."""
    allowed = set(G.edges if edges is None else (abs(e) for e in edges))
    paths: dict[str, Path] = {root: ()}
    queue = [root]
    i = 0
    while i < len(queue):
        v = queue[i]
        i += 1
        for d in G.directions(v):
            if abs(d) not in allowed:
                continue
            w = G.terminus(d)
            if w not in paths:
                paths[w] = paths[v] + (d,)
                queue.append(w)
    return paths


def is_forest(G: Graph, edges: Iterable[int]) -> bool:
    es = {abs(e) for e in edges}
    comps = G.components(es)
    return all(len(c_e) == len(c_v) - 1 for c_v, c_e in comps)


# markings


@dataclass(frozen=True)
class Marking:
    base: str
    forward: tuple[Path, ...]
    backward: Mapping[int, Word]

    @cached_property
    def _signed(self) -> dict[int, Word]:
        out = {}
        for e, w in self.backward.items():
            out[e], out[-e] = tuple(w), inverse(w)
        return out

    def read(self, p: Sequence[int]) -> Word:
        """Translate an edge path to F_n through the backward map."""
        out: list[int] = []
        table = self._signed
        for e in p:
            for a in table[e]:
                if out and out[-1] == -a:
                    out.pop()
                else:
                    out.append(a)
        return tuple(out)


class MarkedGraph:
    def __init__(self, graph: Graph, marking: Marking, generator_names: Sequence[str] | None = None):
        self.graph = graph
        self.marking = marking
        self.rank = len(marking.forward)
        self.generator_names = list(generator_names) if generator_names else default_names(self.rank)
        if len(self.generator_names) != self.rank:
            raise ValueError("one name per generator")
        if marking.base not in graph.vertices:
            raise ValueError("base vertex not in graph")
        if set(marking.backward) != set(graph.edges):
            raise ValueError("backward marking must cover every edge")
        for p in marking.forward:
            graph.check_path(p, marking.base)
            if graph.path_terminus(p, marking.base) != marking.base:
                raise ValueError("forward marking paths must be loops at the base")
        if graph.betti() != self.rank or not graph.is_connected():
            raise ValueError("graph rank does not match marking rank")

    def read(self, p: Sequence[int]) -> Word:
        return self.marking.read(p)

    def __repr__(self) -> str:
        return f"MarkedGraph({self.graph!r}, base={self.marking.base})"


def verify_marking(mg: MarkedGraph) -> bool:
    return all(mg.read(p) == (i,) for i, p in enumerate(mg.marking.forward, start=1))


def rose(n: int, names: Sequence[str] | None = None, vertex: str = "v") -> MarkedGraph:
    names = list(names) if names else default_names(n)
    g = Graph([vertex], {i: (vertex, vertex) for i in range(1, n + 1)},
              {i: names[i - 1] for i in range(1, n + 1)})
    m = Marking(vertex, tuple((i,) for i in range(1, n + 1)),
                {i: (i,) for i in range(1, n + 1)})
    return MarkedGraph(g, m, names)


def backward_from_forward(graph: Graph, base: str, forward: Sequence[Path]) -> dict[int, Word]:
    """Homotopy inverse of a marking given only its forward paths.

    The forward loops are folded; each edge is read as the loop
    tree-path . edge . tree-path in the folded graph.
    """
    folded = FoldedGraph([reduce(p) for p in forward])
    tree = spanning_tree(graph, base)
    tree_edges = {abs(p[-1]) for p in tree.values() if p}
    back: dict[int, Word] = {}
    for e in graph.edges:
        if e in tree_edges:
            back[e] = EMPTY
            continue
        loop = reduce(tree[graph.origin(e)] + (e,) + inverse(tree[graph.terminus(e)]))
        w = folded.read(loop)
        if w is None:
            raise ValueError("forward marking is not a homotopy equivalence")
        back[e] = w
    return back


def remark(mg: MarkedGraph, graph: Graph, base: str, forward: Sequence[Path],
           backward: Mapping[int, Word] | None = None) -> MarkedGraph:
    if backward is None:
        backward = backward_from_forward(graph, base, forward)
    out = MarkedGraph(graph, Marking(base, tuple(reduce(p) for p in forward), dict(backward)),
                      mg.generator_names)
    if not verify_marking(out):
        raise AssertionError("transported marking does not verify")
    return out


class Correspondence:
    """Translation of tight paths between two graphs."""

    def __init__(self, forward: Callable[[Path], Path], backward: Callable[[Path], Path]):
        self._forward = forward
        self._backward = backward

    def forward(self, p: Sequence[int]) -> Path:
        return reduce(self._forward(tuple(p)))

    def backward(self, p: Sequence[int]) -> Path:
        return reduce(self._backward(tuple(p)))

    @staticmethod
    def identity() -> "Correspondence":
        return Correspondence(lambda p: p, lambda p: p)

    def then(self, other: "Correspondence") -> "Correspondence":
        return Correspondence(lambda p: other.forward(self.forward(p)),
                              lambda p: self.backward(other.backward(p)))


def substitute(p: Sequence[int], table: Mapping[int, Sequence[int]]) -> Path:
    """Replace each edge by its table entry (reversed edges by the inverse), tightened."""
    out: list[int] = []
    for e in p:
        img = table[e] if e > 0 else inverse(table[-e])
        for a in img:
            if out and out[-1] == -a:
                out.pop()
            else:
                out.append(a)
    return tuple(out)


def collapse_forest(mg: MarkedGraph, forest: Iterable[int]) -> tuple[MarkedGraph, Correspondence]:
    G = mg.graph
    F = {abs(e) for e in forest}
    if not F <= set(G.edges):
        raise ValueError("unknown edge in forest")
    if not is_forest(G, F):
        raise ValueError("edge set contains a circuit")
    rep: dict[str, str] = {v: v for v in G.vertices}
    to_rep: dict[str, Path] = {v: () for v in G.vertices}
    for verts, _ in G.components(F):
        if len(verts) == 1:
            continue
        r = mg.marking.base if mg.marking.base in verts else min(verts)
        paths = spanning_tree(G, r, F)
        for v in verts:
            rep[v] = r
            to_rep[v] = inverse(paths[v])
    vertices = [v for v in G.vertices if rep[v] == v]
    edges = {e: (rep[a], rep[b]) for e, (a, b) in G.endpoints().items() if e not in F}
    names = {e: G.names[e] for e in edges}
    H = Graph(vertices, edges, names)

    pi = {e: (() if e in F else (e,)) for e in G.edges}
    sigma = {e: reduce(inverse(to_rep[G.origin(e)]) + (e,) + to_rep[G.terminus(e)]) for e in edges}
    forward = [substitute(p, pi) for p in mg.marking.forward]
    backward = {e: mg.read(sigma[e]) for e in edges}
    new = remark(mg, H, rep[mg.marking.base], forward, backward)
    corr = Correspondence(lambda p: substitute(p, pi), lambda p: substitute(p, sigma))
    return new, corr
