"""Topological representatives: edge images, filtrations, strata, gates, RTT checks."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import networkx as nx

from .free_group import BasisAutomorphism, ConjClass, Word, conj_class, inverse, multiply, root
from .marked_graph import MarkedGraph, Path, PathError, spanning_tree
from .perron import PFData, is_irreducible, is_permutation, pf_data


class MapError(ValueError):
    pass


class GraphMap:
    """A self-map of a marked graph, given by tight edge images and a filtration.

    ``strata`` lists the edge sets H_1, ..., H_N from the bottom up; when
    omitted the maximal invariant filtration is computed.
    """

    def __init__(self, domain: MarkedGraph, images: Mapping[int, Sequence[int]],
                 vertex_images: Mapping[str, str] | None = None,
                 strata: Sequence[Iterable[int]] | None = None, strict: bool = True):
        self.domain = domain
        G = self.graph = domain.graph
        self._img: dict[int, Path] = {}
        if set(images) != set(G.edges):
            missing = set(G.edges) - set(images)
            raise MapError(f"missing images for {sorted(G.names[e] for e in missing)}")
        vimg: dict[str, str] = dict(vertex_images or {})
        for e in G.edges:
            p = tuple(images[e])
            try:
                G.check_path(p)
            except PathError as exc:
                raise MapError(f"image of {G.names[e]}: {exc}") from None
            if any(p[i] == -p[i + 1] for i in range(len(p) - 1)):
                raise MapError(f"image of {G.names[e]} is not tight")
            if not p and strict:
                raise MapError(f"image of {G.names[e]} is trivial")
            self._img[e] = p
            if p:
                for v, w in ((G.origin(e), G.origin(p[0])), (G.terminus(e), G.terminus(p[-1]))):
                    if vimg.setdefault(v, w) != w:
                        raise MapError(f"edge images disagree on the image of vertex {v}")
        for e in G.edges:
            if not self._img[e]:
                a, b = G.origin(e), G.terminus(e)
                if a in vimg and b in vimg and vimg[a] != vimg[b]:
                    raise MapError(f"trivial image of {G.names[e]} joins distinct vertices")
                if a in vimg:
                    vimg.setdefault(b, vimg[a])
                elif b in vimg:
                    vimg[a] = vimg[b]
        if set(vimg) != set(G.vertices):
            raise MapError("some vertex images are undetermined")
        self.vertex_images = vimg
        self.strict = strict
        self._signed = {**self._img, **{-e: inverse(q) for e, q in self._img.items()}}
        self.memo: dict = {}    # per-instance cache for derived searches
        if strata is None:
            self.strata = _scc_strata(self, [list(G.edges)])
        else:
            self.strata = tuple(frozenset(abs(e) for e in s) for s in strata)
            self._check_filtration()

    def _check_filtration(self):
        seen: set[int] = set()
        for s in self.strata:
            if not s or s & seen:
                raise MapError("strata must be nonempty and disjoint")
            seen |= s
        if seen != set(self.graph.edges):
            raise MapError("strata must cover every edge")
        below: set[int] = set()
        for s in self.strata:
            below |= s
            for e in s:
                if any(abs(a) not in below for a in self._img[e]):
                    raise MapError(f"filtration not invariant at edge {self.graph.names[e]}")

    # basic access

    @property
    def rank(self) -> int:
        return self.domain.rank

    def image(self, e: int) -> Path:
        return self._signed[e]

    def images(self) -> dict[int, Path]:
        return dict(self._img)

    def vertex_image(self, v: str) -> str:
        return self.vertex_images[v]

    def name(self, e: int) -> str:
        return self.graph.name(e)

    def fmt(self, p: Sequence[int]) -> str:
        return self.graph.format_path(p)

    def path(self, text: str) -> Path:
        return self.graph.parse_path(text)

    @cached_property
    def stratum_index(self) -> dict[int, int]:
        return {e: r for r, s in enumerate(self.strata, start=1) for e in s}

    def stratum_of(self, e: int) -> int:
        return self.stratum_index[abs(e)]

    def filtration_element(self, r: int) -> frozenset[int]:
        out: set[int] = set()
        for s in self.strata[:r]:
            out |= s
        return frozenset(out)

    def with_strata(self, strata) -> "GraphMap":
        return GraphMap(self.domain, self._img, self.vertex_images, strata, self.strict)

    # images of paths

    def image_of_path(self, p: Sequence[int]) -> Path:
        out: list[int] = []
        img = self._signed
        for e in p:
            for a in img[e]:
                if out and out[-1] == -a:
                    out.pop()
                else:
                    out.append(a)
        return tuple(out)

    def iterate_image(self, p: Sequence[int], k: int) -> Path:
        p = tuple(p)
        for _ in range(k):
            p = self.image_of_path(p)
        return p

    def iterate_vertex(self, v: str, k: int) -> str:
        for _ in range(k):
            v = self.vertex_images[v]
        return v

    def path_image_endpoint(self, p: Sequence[int], start: str) -> str:
        return self.vertex_images[self.graph.path_terminus(p, start)]

    # derivative

    @cached_property
    def _df(self) -> dict[int, int | None]:
        out = {}
        for d in self.graph.all_directions():
            img = self.image(d)
            out[d] = img[0] if img else None
        return out

    def derivative(self, d: int) -> int | None:
        return self._df[d]

    @cached_property
    def direction_orbits(self) -> dict[int, tuple[int, int | None]]:
        """direction -> (preperiod, period or None if the orbit dies)."""
        out = {}
        for d in self._df:
            seen: dict[int, int] = {}
            x, i = d, 0
            while x is not None and x not in seen:
                seen[x] = i
                x = self._df[x]
                i += 1
            if x is None:
                out[d] = (i, None)
            else:
                out[d] = (seen[x], i - seen[x])
        return out

    def direction_period(self, d: int) -> int | None:
        pre, per = self.direction_orbits[d]
        return per if pre == 0 else None

    def _df_iter(self, d: int, k: int) -> int | None:
        for _ in range(k):
            if d is None:
                return None
            d = self._df[d]
        return d

    def same_gate(self, d1: int, d2: int) -> bool:
        if d1 == d2:
            return True
        a, b = d1, d2
        for _ in range(len(self._df) + 1):
            a, b = self._df[a], self._df[b]
            if a is None or b is None:
                return True
            if a == b:
                return True
        return False

    def gates(self, v: str) -> list[list[int]]:
        blocks: list[list[int]] = []
        for d in self.graph.directions(v):
            for blk in blocks:
                if self.same_gate(blk[0], d):
                    blk.append(d)
                    break
            else:
                blocks.append([d])
        return blocks

    def turn_is_legal(self, d1: int, d2: int) -> bool:
        return not self.same_gate(d1, d2)

    def turns(self, p: Sequence[int]) -> list[tuple[int, int, int]]:
        """(index, d1, d2): the turn between steps index-1 and index."""
        return [(i, -p[i - 1], p[i]) for i in range(1, len(p))]

    def illegal_turns(self, p: Sequence[int], r: int | None = None) -> list[int]:
        out = []
        for i, d1, d2 in self.turns(p):
            if r is not None and not (self.stratum_of(d1) == r and self.stratum_of(d2) == r):
                continue
            if self.same_gate(d1, d2):
                out.append(i)
        return out

    def is_r_legal(self, p: Sequence[int], r: int) -> bool:
        Gr = self.filtration_element(r)
        return all(abs(e) in Gr for e in p) and not self.illegal_turns(p, r)

    # dynamics on vertices

    @cached_property
    def vertex_periods(self) -> dict[str, int | None]:
        out: dict[str, int | None] = {}
        for v in self.graph.vertices:
            x, k = self.vertex_images[v], 1
            while x != v and k <= len(self.graph.vertices):
                x, k = self.vertex_images[x], k + 1
            out[v] = k if x == v else None
        return out

    def fixed_vertices(self) -> list[str]:
        return [v for v in self.graph.vertices if self.vertex_images[v] == v]

    # strata

    def transition_matrix(self, r: int) -> list[list[int]]:
        edges = sorted(self.strata[r - 1])
        pos = {e: i for i, e in enumerate(edges)}
        M = [[0] * len(edges) for _ in edges]
        for e in edges:
            for a in self._img[e]:
                if abs(a) in pos:
                    M[pos[e]][pos[abs(a)]] += 1
        return M

    @cached_property
    def strata_info(self) -> tuple["StratumInfo", ...]:
        return tuple(_classify(self, r) for r in range(1, len(self.strata) + 1))

    def is_eg(self, r: int) -> bool:
        return self.strata_info[r - 1].kind == "EG"

    def eg_strata(self) -> list[int]:
        return [s.index for s in self.strata_info if s.kind == "EG"]

    # marking

    @cached_property
    def automorphism(self) -> BasisAutomorphism:
        m = self.domain.marking
        imgs = tuple(self.domain.read(self.image_of_path(p)) for p in m.forward)
        return BasisAutomorphism(self.rank, imgs)

    def normalized_automorphism(self, u: str) -> tuple[BasisAutomorphism, Path]:
        """Automorphism determined by the lift fixing a lift of the fixed vertex u.

        Returns it together with the tree path from the base to u that fixes
        the identification of pi_1(G, u) with F_n.
        """
        if self.vertex_images[u] != u:
            raise MapError(f"{u} is not fixed")
        gamma = spanning_tree(self.graph, self.domain.marking.base)[u]
        c = multiply(self.domain.read(gamma), inverse(self.domain.read(self.image_of_path(gamma))))
        return self.automorphism.conjugate_by(c), gamma

    def read_loop(self, gamma: Path, loop: Path) -> Word:
        """The element of F_n given by gamma . loop . gamma^-1."""
        return self.domain.read(gamma + tuple(loop) + inverse(gamma))

    def __repr__(self) -> str:
        rows = "; ".join(f"{self.graph.names[e]} -> {self.fmt(self._img[e])}" for e in self.graph.edges)
        return f"GraphMap({rows})"


@dataclass(frozen=True)
class StratumInfo:
    index: int
    edges: tuple[int, ...]
    kind: str
    matrix: tuple[tuple[int, ...], ...]
    pf: PFData | None = None
    normal_form: bool = False
    oriented: Mapping[int, int] = field(default_factory=dict)
    suffix: Mapping[int, Path] = field(default_factory=dict)
    period: int = 1
    axis: ConjClass | None = None
    root_path: Path | None = None
    exponent: int | None = None

    @property
    def is_neg(self) -> bool:
        return self.kind.startswith("NEG")


def _scc_strata(f: GraphMap, layers: Sequence[Sequence[int]]) -> tuple[frozenset[int], ...]:
    """Maximal filtration: SCCs of the crossing digraph, lower strata first."""
    D = nx.DiGraph()
    D.add_nodes_from(f.graph.edges)
    for e in f.graph.edges:
        for a in f._img[e]:
            D.add_edge(e, abs(a))
    layer = {e: i for i, lay in enumerate(layers) for e in lay}
    comps = [frozenset(c) for c in nx.strongly_connected_components(D)]
    cid = {e: i for i, c in enumerate(comps) for e in c}
    C = nx.condensation(D, comps)
    # Kahn's algorithm, lowest strata first: a component is ready when everything
    # its edges map over is already placed
    need = {i: {j for j in C.successors(i)} for i in C.nodes}
    users: dict[int, set[int]] = {i: set() for i in C.nodes}
    for i, js in need.items():
        for j in js:
            users[j].add(i)

    def key(i):
        return (max(layer[e] for e in comps[i]), min(comps[i]))

    heap = [(key(i), i) for i in C.nodes if not need[i]]
    heapq.heapify(heap)
    order = []
    while heap:
        _, i = heapq.heappop(heap)
        order.append(comps[i])
        for u in users[i]:
            need[u].discard(i)
            if not need[u]:
                heapq.heappush(heap, (key(u), u))
    del cid
    return tuple(order)


def build_filtration(f: GraphMap) -> GraphMap:
    layers = [sorted(s) for s in f.strata]
    return f.with_strata(_scc_strata(f, layers))


def _orient_cycle(f: GraphMap, edges: Sequence[int]) -> tuple[dict[int, int], dict[int, Path], int] | None:
    """Orient a permutation stratum so that f(E_i) = E_{i+1} u_i; None if impossible."""
    es = set(edges)
    for first in (edges[0], -edges[0]):
        orient = {abs(first): first}
        suffix: dict[int, Path] = {}
        x = first
        ok = True
        for _ in range(len(edges)):
            img = f.image(x)
            if not img or abs(img[0]) not in es:
                ok = False
                break
            nxt = img[0]
            if abs(nxt) in orient and orient[abs(nxt)] != nxt:
                ok = False
                break
            suffix[abs(x)] = img[1:]
            orient[abs(nxt)] = nxt
            x = nxt
        if ok and x == first and len(orient) == len(edges):
            return orient, suffix, len(edges)
    return None


def _classify(f: GraphMap, r: int) -> StratumInfo:
    edges = tuple(sorted(f.strata[r - 1]))
    M = f.transition_matrix(r)
    Mt = tuple(tuple(row) for row in M)
    if all(a == 0 for row in M for a in row):
        return StratumInfo(r, edges, "zero", Mt)
    if not is_irreducible(M):
        raise MapError(f"stratum {r} is reducible; run build_filtration")
    if not is_permutation(M):
        return StratumInfo(r, edges, "EG", Mt, pf=pf_data(M))
    oriented = _orient_cycle(f, list(edges))
    if oriented is None:
        return StratumInfo(r, edges, "NEG-general", Mt, normal_form=False, period=len(edges))
    orient, suffix, period = oriented
    if all(not u for u in suffix.values()):
        kind = "NEG-fixed" if period == 1 and all(f.image(e) == (e,) for e in edges) else "NEG-periodic"
        return StratumInfo(r, edges, kind, Mt, normal_form=True, oriented=orient,
                           suffix=suffix, period=period)
    if period == 1:
        (e,) = edges
        u = suffix[e]
        if u and f.graph.path_origin(u) == f.graph.path_terminus(u) and f.image_of_path(u) == u:
            w, d = root(u)
            return StratumInfo(r, edges, "NEG-linear", Mt, normal_form=True, oriented=orient,
                               suffix=suffix, axis=conj_class(f.domain.read(w), oriented=False),
                               root_path=w, exponent=d)
    return StratumInfo(r, edges, "NEG-general", Mt, normal_form=True, oriented=orient,
                       suffix=suffix, period=period)


def classify_strata(f: GraphMap) -> list[StratumInfo]:
    return list(f.strata_info)


def image_of_path(f: GraphMap, p: Sequence[int]) -> Path:
    f.graph.check_path(p)
    return f.image_of_path(p)


def iterate_image(f: GraphMap, p: Sequence[int], k: int) -> Path:
    f.graph.check_path(p)
    return f.iterate_image(p, k)


def derivative(f: GraphMap, d: int) -> int | None:
    return f.derivative(d)


def gate_partition(f: GraphMap, v: str) -> list[list[int]]:
    return f.gates(v)


def turn_legality(f: GraphMap, d1: int, d2: int) -> str:
    if f.graph.origin(d1) != f.graph.origin(d2):
        raise ValueError("a turn needs a common base vertex")
    return "legal" if f.turn_is_legal(d1, d2) else "illegal"


def transition_matrix(f: GraphMap, r: int) -> list[list[int]]:
    return f.transition_matrix(r)


@dataclass
class PeriodicData:
    vertices: dict[str, int]
    directions: dict[int, int]


def periodic_orbit_data(f: GraphMap) -> PeriodicData:
    verts = {v: p for v, p in f.vertex_periods.items() if p is not None}
    dirs = {}
    for d in f.graph.all_directions():
        per = f.direction_period(d)
        if per is not None and f.vertex_periods[f.graph.origin(d)] is not None:
            dirs[d] = per
    return PeriodicData(verts, dirs)


def power_map(f: GraphMap, k: int) -> GraphMap:
    if k < 1:
        raise ValueError("power must be positive")
    if k == 1:
        return f
    imgs = {e: f.iterate_image((e,), k) for e in f.graph.edges}
    vimg = {v: f.iterate_vertex(v, k) for v in f.graph.vertices}
    g = GraphMap(f.domain, imgs, vimg, strict=f.strict)
    # a permutation stratum of period > 1 splits under powers
    return g.with_strata(_scc_strata(g, [sorted(s) for s in f.strata]))


# RTT verification


@dataclass
class RTTReport:
    strata: dict[int, dict[str, tuple[bool, str]]]

    @property
    def passed(self) -> bool:
        return all(ok for s in self.strata.values() for ok, _ in s.values())

    def failures(self) -> list[tuple[int, str, str]]:
        return [(r, name, why) for r, s in self.strata.items() for name, (ok, why) in s.items() if not ok]

    def lines(self) -> list[str]:
        out = []
        for r, s in sorted(self.strata.items()):
            for name, (ok, why) in s.items():
                out.append(f"stratum {r} {name}: {'pass' if ok else 'fail'}" + (f" ({why})" if why else ""))
        return out


def _component_map(f: GraphMap, comps) -> dict[int, int | None]:
    where = {v: i for i, (vs, _) in enumerate(comps) for v in vs}
    return {i: where.get(f.vertex_images[min(vs)]) for i, (vs, _) in enumerate(comps)}


def check_rtt(f: GraphMap) -> RTTReport:
    G = f.graph
    out: dict[int, dict[str, tuple[bool, str]]] = {}
    for r in f.eg_strata():
        H = f.strata[r - 1]
        res: dict[str, tuple[bool, str]] = {}
        bad = []
        for e in sorted(H):
            for d in (e, -e):
                img = f.derivative(d)
                if img is None or abs(img) not in H:
                    bad.append(f"D f({G.name(d)}) = {G.name(img) if img else 'none'}")
        res["RTT-i"] = (not bad, "; ".join(bad))

        lower = f.filtration_element(r - 1)
        Hverts = {v for e in H for v in G.endpoints()[e]}
        comps = G.components(lower) if lower else []
        cmap = _component_map(f, comps)
        bad = []
        for i, (vs, es) in enumerate(comps):
            j, steps = cmap[i], 1
            while j is not None and j != i and steps <= len(comps):
                j, steps = cmap[j], steps + 1
            if j != i:
                # wandering component: connecting paths through a tree must not die
                if len(es) == len(vs) - 1:
                    touch = sorted(vs & Hverts)
                    tree = {}
                    if touch:
                        tree = spanning_tree(G, touch[0], es)
                    for a in touch:
                        for b in touch:
                            if a < b:
                                alpha = _tree_between(tree, a, b)
                                if alpha and not f.image_of_path(alpha):
                                    bad.append(f"connecting path {G.format_path(alpha)} is pretrivial")
                continue
            for v in sorted(vs & Hverts):
                if f.vertex_periods[v] is None:
                    bad.append(f"vertex {v} of H_{r} in a non-wandering component is not periodic")
        for s in f.strata_info[: r - 1]:
            if s.kind == "zero":
                for e in s.edges:
                    if not f.image((e,)[0]):
                        bad.append(f"zero-stratum edge {G.names[e]} has trivial image")
        res["RTT-ii"] = (not bad, "; ".join(bad))

        bad = []
        for e in sorted(H):
            for i in f.illegal_turns(f.image(e), r):
                img = f.image(e)
                bad.append(f"f({G.names[e]}) = {f.fmt(img)} has an illegal turn at step {i}")
        res["RTT-iii"] = (not bad, "; ".join(bad))
        out[r] = res
    return RTTReport(out)


def _tree_between(tree: dict[str, Path], a: str, b: str) -> Path:
    return multiply(inverse(tree[a]), tree[b])


def rose_map(rules: Mapping[str, str] | Sequence[tuple[str, str]], strata=None) -> GraphMap:
    """Map on the rose from generator rules such as {"A": "A", "B": "B A"}."""
    from .marked_graph import rose

    items = list(rules.items()) if isinstance(rules, Mapping) else list(rules)
    names = [k for k, _ in items]
    mg = rose(len(names), names)
    imgs = {mg.graph.edge(k): mg.graph.parse_path(v) for k, v in items}
    return GraphMap(mg, imgs, strata=strata)
