"""Stallings folding with witness words.

Used for two jobs: transporting a marking inverse after a move that has no
cheap homotopy inverse, and comparing finitely generated subgroups up to
conjugacy through their core graphs.
"""
from __future__ import annotations

from typing import Sequence

from .free_group import EMPTY, Word, inverse, multiply


class NotInjective(ValueError):
    pass


class FoldedGraph:
    """Folded graph of the subgroup generated by ``generators``.

    Edge labels are letters of the ambient alphabet.  Each edge also carries
    a witness word over the generator indices, so reading a loop at the base
    returns the element as a word in the generators.
    """

    def __init__(self, generators: Sequence[Sequence[int]], witness: bool = True):
        self.generators = [tuple(g) for g in generators if g or witness]
        self.witness = witness
        self.base = 0
        edges: list[list] = []
        fresh = 1
        for i, g in enumerate(self.generators, start=1):
            if not g:
                raise NotInjective(f"generator {i} is trivial")
            prev = self.base
            for k, a in enumerate(g):
                if k == len(g) - 1:
                    nxt = self.base
                else:
                    nxt, fresh = fresh, fresh + 1
                edges.append([prev, a, nxt, (i,) if k == 0 and witness else EMPTY])
                prev = nxt
        self._fold(edges)
        self.adj: dict[int, dict[int, tuple[int, Word]]] = {self.base: {}}
        for u, a, v, w in edges:
            self.adj.setdefault(u, {})[a] = (v, w)
            self.adj.setdefault(v, {})[-a] = (u, inverse(w))

    def _fold(self, edges: list[list]) -> None:
        while True:
            conflict = self._find_conflict(edges)
            if conflict is None:
                return
            (i, x, wx), (j, y, wy) = conflict
            if x == y:
                if wx != wy:
                    raise NotInjective("generators are not a free basis")
                edges.pop(j)
                continue
            if y == self.base:
                (i, x, wx), (j, y, wy) = (j, y, wy), (i, x, wx)
            # drop edge j, send vertex y to x; paths through y gain the offset
            delta = multiply(inverse(wx), wy)
            di = inverse(delta)
            edges.pop(j)
            for e in edges:
                if e[0] == y and e[2] == y:
                    e[0] = e[2] = x
                    e[3] = multiply(delta, e[3], di)
                elif e[0] == y:
                    e[0] = x
                    e[3] = multiply(delta, e[3])
                elif e[2] == y:
                    e[2] = x
                    e[3] = multiply(e[3], di)

    @staticmethod
    def _find_conflict(edges):
        seen: dict[tuple[int, int], tuple[int, int, Word]] = {}
        for idx, (u, a, v, w) in enumerate(edges):
            for key, item in (((u, a), (idx, v, w)), ((v, -a), (idx, u, inverse(w)))):
                if key in seen and seen[key][0] != idx:
                    return seen[key], item
                seen[key] = item
        return None

    # reading

    def read(self, word: Sequence[int], start: int | None = None) -> Word | None:
        """Witness word in generator letters for a loop at the base, or None."""
        v = self.base if start is None else start
        out: list[Word] = []
        for a in word:
            step = self.adj[v].get(a)
            if step is None:
                return None
            v, w = step
            out.append(w)
        if v != (self.base if start is None else start):
            return None
        return multiply(*out)

    def contains(self, word: Sequence[int]) -> bool:
        return self.read(word) is not None

    def edges(self):
        for u, nbrs in self.adj.items():
            for a, (v, _) in nbrs.items():
                if a > 0:
                    yield u, a, v

    def rank(self) -> int:
        e = sum(1 for _ in self.edges())
        return e - len(self.adj) + 1

    def core_edges(self) -> set[tuple[int, int, int]]:
        edges = set(self.edges())
        while True:
            deg: dict[int, int] = {}
            for u, _, v in edges:
                deg[u] = deg.get(u, 0) + 1
                deg[v] = deg.get(v, 0) + 1
            leaves = {x for x, d in deg.items() if d == 1}
            if not leaves:
                return edges
            edges = {e for e in edges if e[0] not in leaves and e[2] not in leaves}

    def core_canonical(self) -> tuple:
        return canonical_labelled_graph(self.core_edges())


def canonical_labelled_graph(edges) -> tuple:
    """Canonical form of a labelled graph with deterministic labels per vertex."""
    edges = list(edges)
    if not edges:
        return ()
    out: dict[int, list[tuple[int, int]]] = {}
    for u, a, v in edges:
        out.setdefault(u, []).append((a, v))
        out.setdefault(v, []).append((-a, u))
    for lst in out.values():
        lst.sort(key=lambda p: (abs(p[0]), p[0] < 0))
    best = None
    for start in sorted(out):
        number = {start: 0}
        order = [start]
        i = 0
        while i < len(order):
            x = order[i]
            i += 1
            for _, y in out[x]:
                if y not in number:
                    number[y] = len(order)
                    order.append(y)
        form = tuple(sorted((number[u], a, number[v]) for u, a, v in edges if u in number))
        if len(number) < len(out):
            form = form + (("disconnected", len(out)),)
        if best is None or form < best:
            best = form
    return best


def subgroup_core_form(generators: Sequence[Sequence[int]]) -> tuple:
    """Canonical core graph: equal forms iff the subgroups are conjugate."""
    gens = [g for g in generators if g]
    if not gens:
        return ()
    return FoldedGraph(gens, witness=False).core_canonical()


def subgroup_rank(generators: Sequence[Sequence[int]]) -> int:
    gens = [g for g in generators if g]
    return FoldedGraph(gens, witness=False).rank() if gens else 0


def _adjacency(edges) -> dict[int, dict[int, int]]:
    adj: dict[int, dict[int, int]] = {}
    for u, lab, v in edges:
        adj.setdefault(u, {})[lab] = v
        adj.setdefault(v, {})[-lab] = u
    return adj


def conjugate_into(small: Sequence[Sequence[int]], big: Sequence[Sequence[int]]) -> bool:
    """Is some conjugate of <small> contained in <big>?  Decided on core graphs."""
    small = [g for g in small if g]
    big = [g for g in big if g]
    if not small:
        return True
    if not big:
        return False
    aadj = _adjacency(FoldedGraph(small, witness=False).core_edges())
    badj = _adjacency(FoldedGraph(big, witness=False).core_edges())
    if not aadj:
        return True
    start = next(iter(aadj))
    for target in badj:
        image = {start: target}
        stack = [start]
        ok = True
        while stack and ok:
            x = stack.pop()
            for lab, y in aadj[x].items():
                t = badj[image[x]].get(lab)
                if t is None:
                    ok = False
                    break
                if y not in image:
                    image[y] = t
                    stack.append(y)
                elif image[y] != t:
                    ok = False
                    break
        if ok:
            return True
    return False


def free_basis(generators: Sequence[Sequence[int]]) -> list[Word]:
    """A free basis of the subgroup, read off a spanning tree of its folded graph."""
    gens = [g for g in generators if g]
    if not gens:
        return []
    fg = FoldedGraph(gens, witness=False)
    tree: dict[int, Word] = {fg.base: EMPTY}
    queue = [fg.base]
    used: set[tuple[int, int]] = set()
    i = 0
    while i < len(queue):
        u = queue[i]
        i += 1
        for a, (v, _) in sorted(fg.adj[u].items(), key=lambda kv: (abs(kv[0]), kv[0] < 0)):
            if v not in tree:
                tree[v] = tree[u] + (a,)
                used.add((u, a))
                used.add((v, -a))
                queue.append(v)
    basis = []
    for u, a, v in sorted(fg.edges(), key=lambda t: (t[0], abs(t[1]), t[2])):
        if (u, a) in used:
            continue
        basis.append(multiply(tree[u], (a,), inverse(tree[v])))
    return basis
