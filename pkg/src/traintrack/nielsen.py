"""Nielsen paths, Nielsen classes, principal points and rotationless detection."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce as _fold
from math import lcm
from typing import Sequence

from .free_group import inverse, word_key
from .graph_map import GraphMap, power_map
from .marked_graph import Path


@dataclass(frozen=True)
class NielsenPath:
    path: Path
    period: int
    height: int
    indivisible: bool = True
    eg_decomposition: int | None = None   # index of the illegal turn: alpha-bar = path[:i]

    @property
    def halves(self) -> tuple[Path, Path] | None:
        if self.eg_decomposition is None:
            return None
        i = self.eg_decomposition
        return inverse(self.path[:i]), self.path[i:]


@dataclass(frozen=True)
class NEGFamily:
    """The Nielsen paths E w^k E-bar (k != 0) of a linear edge."""
    edge: int            # oriented so that f(E) = E w^d
    root: Path
    exponent: int
    height: int

    def member(self, k: int) -> Path:
        if k == 0:
            raise ValueError("k must be nonzero")
        w = self.root if k > 0 else inverse(self.root)
        return (self.edge,) + w * abs(k) + (-self.edge,)


@dataclass
class NEGReport:
    families: list[NEGFamily]
    suffix_checks: dict[int, str]


def find_neg_nielsen_paths(f: GraphMap) -> NEGReport:
    fams = []
    checks: dict[int, str] = {}
    for info in f.strata_info:
        if not info.is_neg:
            continue
        for e in info.edges:
            if info.kind == "NEG-linear":
                E = info.oriented[e]
                fams.append(NEGFamily(E, info.root_path, info.exponent, info.index))
                checks[e] = f"linear: u = w^{info.exponent}, w a closed Nielsen path"
            elif info.kind in ("NEG-fixed", "NEG-periodic"):
                checks[e] = "periodic edge"
            elif info.normal_form:
                checks[e] = "suffix is not a power of a closed Nielsen path"
            else:
                checks[e] = "not in normal form"
    return NEGReport(fams, checks)


# EG indivisible Nielsen paths


@dataclass
class INPSearch:
    paths: list[NielsenPath]
    complete: bool
    nodes: int = 0


def _lcp(a: Sequence[int], b: Sequence[int]) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def _compatible(a: Sequence[int], b: Sequence[int]) -> bool:
    n = min(len(a), len(b))
    return tuple(a[:n]) == tuple(b[:n])


def _direction_period_bound(f: GraphMap, r: int) -> int:
    pers = [f.direction_orbits[d][1] for e in f.strata[r - 1] for d in (e, -e)]
    return _fold(lcm, [p for p in pers if p], 1)


def _search_turn(f: GraphMap, r: int, d1: int, d2: int, p: int, bound: int,
                 node_cap: int, found: dict, state: dict) -> None:
    H = f.strata[r - 1]
    Gr = f.filtration_element(r)
    G = f.graph

    edge_img: dict[int, Path] = {}
    cache: dict = {(): ()}

    def fp(path):
        # f^p_# built one edge at a time from the cached image of the shorter prefix
        if path not in cache:
            out = list(fp(path[:-1]))
            e = path[-1]
            if e not in edge_img:
                edge_img[e] = f.iterate_image((e,), p)
            for x in edge_img[e]:
                if out and out[-1] == -x:
                    out.pop()
                else:
                    out.append(x)
            cache[path] = tuple(out)
        return cache[path]

    def stable(path):
        last = len(path)
        while last and abs(path[last - 1]) not in H:
            last -= 1
        return fp(path[:last])

    def extensions(path):
        out = []
        last = path[-1]
        for x in G.directions(G.terminus(last)):
            if x == -last or abs(x) not in Gr:
                continue
            if abs(last) in H and abs(x) in H and f.same_gate(-last, x):
                continue
            out.append(path + (x,))
        return out

    stack = [((d1,), (d2,))]
    seen = set()
    while stack:
        a, b = stack.pop()
        if (a, b) in seen:
            continue
        seen.add((a, b))
        state["nodes"] += 1
        if state["nodes"] > node_cap:
            state["complete"] = False
            return
        if len(a) + len(b) > bound:
            state["complete"] = False
            continue
        if abs(a[-1]) in H and abs(b[-1]) in H and _fixed_pair(fp(a), fp(b), a, b):
            rho = inverse(a) + b
            key = min(rho, inverse(rho), key=word_key)
            if key not in found:
                i = len(a) if key == rho else len(b)
                found[key] = NielsenPath(key, p, r, True, i)
            continue
        sa, sb = stable(a), stable(b)
        c = _lcp(sa, sb)
        if c == 0:
            continue
        if c < len(sa) and c < len(sb):
            # the cancelled prefix tau = sa[:c] is known; each half must be what follows it
            ra, rb = sa[c:], sb[c:]
            if not (_compatible(a, ra) and _compatible(b, rb)):
                continue
            if len(ra) > len(a) or len(rb) > len(b):
                na = ra if len(ra) > len(a) else a
                nb = rb if len(rb) > len(b) else b
                if _legal_path(f, r, na) and _legal_path(f, r, nb):
                    stack.append((na, nb))
                continue
            grow_a = not (abs(a[-1]) in H and ra == a)
            grow_b = not (abs(b[-1]) in H and rb == b)
        else:
            # one stable image is a prefix of the other: that half cannot be complete
            grow_a = len(sa) <= len(sb)
            grow_b = not grow_a
        if grow_a:
            stack.extend((na, b) for na in extensions(a))
        if grow_b:
            stack.extend((a, nb) for nb in extensions(b))


def _fixed_pair(fa: Path, fb: Path, a: Path, b: Path) -> bool:
    """Whether the tightened image of a-bar b, given the images fa and fb of its halves, is a-bar b again."""
    c = _lcp(fa, fb)
    if len(fa) + len(fb) - 2 * c != len(a) + len(b):
        return False
    return inverse(fa[c:]) + fb[c:] == inverse(a) + b


def _legal_path(f: GraphMap, r: int, path: Path) -> bool:
    G = f.graph
    try:
        G.check_path(path)
    except ValueError:
        return False
    if any(path[i] == -path[i + 1] for i in range(len(path) - 1)):
        return False
    return f.is_r_legal(path, r)


def eg_inp_search(f: GraphMap, r: int, length_bound: int = 200, periods: Sequence[int] | None = None,
                  node_cap: int = 20000) -> INPSearch:
    """iNps of EG height r with vertex endpoints and at most ``length_bound`` edges."""
    if not f.is_eg(r):
        return INPSearch([], True)
    if periods is None:
        P = _direction_period_bound(f, r)
        periods = [k for k in range(1, P + 1) if P % k == 0]
    key = ("eg_inp_search", r, length_bound, tuple(periods), node_cap)
    if key not in f.memo:
        # the search ignores the marking, so maps that differ only there share results
        shared = key + (_structure_key(f),)
        if shared not in _SEARCHES:
            if len(_SEARCHES) >= 512:
                _SEARCHES.pop(next(iter(_SEARCHES)))
            _SEARCHES[shared] = _eg_inp_search(f, r, length_bound, periods, node_cap)
        f.memo[key] = _SEARCHES[shared]
    return f.memo[key]


_SEARCHES: dict = {}


def _structure_key(f: GraphMap) -> tuple:
    G = f.graph
    return (tuple(sorted(G.endpoints().items())), tuple(sorted(f.images().items())),
            tuple(sorted(f.vertex_images.items())), tuple(tuple(sorted(s)) for s in f.strata))


def _eg_inp_search(f: GraphMap, r: int, length_bound: int, periods: Sequence[int], node_cap: int) -> INPSearch:
    H = f.strata[r - 1]
    found: dict = {}
    state = {"nodes": 0, "complete": True}
    turns = []
    for v in f.graph.vertices:
        dirs = [d for d in f.graph.directions(v) if abs(d) in H]
        for i, d1 in enumerate(dirs):
            for d2 in dirs[i + 1:]:
                if f.same_gate(d1, d2):
                    turns.append((d1, d2))
    for p in sorted(periods):
        for d1, d2 in turns:
            _search_turn(f, r, d1, d2, p, length_bound, node_cap, found, state)
    # keep the least period for each path
    out: dict = {}
    for key, np_ in found.items():
        if key not in out or np_.period < out[key].period:
            out[key] = np_
    paths = sorted(out.values(), key=lambda x: (x.period, len(x.path), word_key(x.path)))
    return INPSearch(paths, state["complete"], state["nodes"])


def find_eg_inps(f: GraphMap, r: int, length_bound: int = 200) -> list[NielsenPath]:
    return eg_inp_search(f, r, length_bound).paths


def all_eg_inps(f: GraphMap, length_bound: int = 200) -> dict[int, INPSearch]:
    return {r: eg_inp_search(f, r, length_bound) for r in f.eg_strata()}


# Nielsen classes


def neg_connectors(f: GraphMap, rounds: int = 24, max_len: int = 400) -> list[Path]:
    """Nielsen paths E.gamma for non-periodic NEG edges, found as fixed points of gamma -> [u f(gamma)]."""
    out = []
    for info in f.strata_info:
        if not info.is_neg or not info.normal_form or info.kind in ("NEG-fixed", "NEG-periodic"):
            continue
        if info.period != 1:
            continue
        for e in info.edges:
            E = info.oriented[e]
            u = info.suffix[e]
            gamma: Path = ()
            for _ in range(rounds):
                nxt = f.image_of_path(tuple(u) + f.image_of_path(gamma)) if gamma else tuple(u)
                if nxt == gamma:
                    break
                if len(nxt) > max_len:
                    gamma = None
                    break
                gamma = nxt
            else:
                gamma = None
            if gamma is None:
                continue
            path = _tight((E,) + gamma)
            if f.image_of_path(path) == path:
                out.append(path)
    return out


def _tight(p: Sequence[int]) -> Path:
    out: list[int] = []
    for a in p:
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


@dataclass
class NielsenClass:
    id: int
    vertices: tuple[str, ...]
    connectors: list[tuple[str, str, Path]] = field(default_factory=list)


class _UF:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def nielsen_paths(f: GraphMap, k: int = 1, length_bound: int = 200) -> list[NielsenPath]:
    """Inventory of Nielsen paths of f^k used to join fixed points: fixed edges, NEG connectors and EG iNps."""
    key = ("nielsen_paths", k, length_bound)
    if key not in f.memo:
        f.memo[key] = _nielsen_paths(f, k, length_bound)
    return list(f.memo[key])


def _nielsen_paths(f: GraphMap, k: int, length_bound: int) -> list[NielsenPath]:
    g = power_map(f, k)
    divisors = [d for d in range(1, k + 1) if k % d == 0]

    def period(p):
        # periods are reported for f, not for f^k
        return next(d for d in divisors if f.iterate_image(p, d) == p)

    out = []
    for e in g.graph.edges:
        if g.image(e) == (e,):
            out.append(NielsenPath((e,), period((e,)), g.stratum_of(e), True))
    for p in neg_connectors(g):
        out.append(NielsenPath(p, period(p), max(g.stratum_of(e) for e in p), True))
    for r in f.eg_strata():
        for np_ in eg_inp_search(f, r, length_bound, periods=divisors).paths:
            out.append(NielsenPath(np_.path, np_.period, np_.height, True, np_.eg_decomposition))
    return out


def nielsen_classes(f: GraphMap, k: int = 1, length_bound: int = 200) -> list[NielsenClass]:
    g = power_map(f, k)
    G = g.graph
    fixed = g.fixed_vertices()
    uf = _UF(fixed)
    used: list[tuple[str, str, Path]] = []
    for np_ in nielsen_paths(f, k, length_bound):
        a, b = G.path_origin(np_.path), G.path_terminus(np_.path)
        if a in uf.parent and b in uf.parent and uf.union(a, b):
            used.append((a, b, np_.path))
    groups: dict[str, list[str]] = {}
    for v in fixed:
        groups.setdefault(uf.find(v), []).append(v)
    classes = []
    for i, rep in enumerate(sorted(groups, key=lambda r: min(groups[r]))):
        vs = tuple(sorted(groups[rep]))
        classes.append(NielsenClass(i, vs, [c for c in used if c[0] in vs]))
    return classes


# principal points and rotationless maps


@dataclass
class VertexPrincipality:
    vertex: str
    period: int
    principal: bool
    clause: str | None
    periodic_directions: dict[int, int]


@dataclass
class PrincipalityReport:
    vertices: dict[str, VertexPrincipality]
    exponent: int

    def principal(self) -> list[str]:
        return [v for v, x in self.vertices.items() if x.principal]

    def lines(self, f: GraphMap) -> list[str]:
        out = []
        for v, x in self.vertices.items():
            dirs = " ".join(f"{f.name(d)}:{p}" for d, p in x.periodic_directions.items())
            tag = "principal" if x.principal else f"not principal ({x.clause})"
            out.append(f"{v} period {x.period} {tag}; periodic directions {dirs or '-'}")
        return out


def periodic_exponent(f: GraphMap) -> int:
    pers = [p for p in f.vertex_periods.values() if p]
    for d in f.graph.all_directions():
        per = f.direction_period(d)
        if per and f.vertex_periods[f.graph.origin(d)]:
            pers.append(per)
    for e in f.graph.edges:
        x: int = e
        for k in range(1, len(f.graph.edges) + 1):
            img = f.image(x)
            if len(img) != 1:
                break
            x = img[0]
            if x == e:
                pers.append(k)
                break
    return _fold(lcm, pers, 1)


def principal_points(f: GraphMap, length_bound: int = 200) -> PrincipalityReport:
    key = ("principal_points", length_bound)
    if key not in f.memo:
        f.memo[key] = _principal_points(f, length_bound)
    return f.memo[key]


def _principal_points(f: GraphMap, length_bound: int) -> PrincipalityReport:
    K = periodic_exponent(f)
    g = power_map(f, K)
    G = f.graph
    per_vertices = {v: p for v, p in f.vertex_periods.items() if p}
    per_edges = {e for e in G.edges if g.image(e) == (e,)}
    classes = nielsen_classes(f, K, length_bound)
    class_of = {v: c for c in classes for v in c.vertices}
    comps = G.components(per_edges, per_vertices)
    comp_of = {v: (vs, es) for vs, es in comps for v in vs}
    pdirs = {v: {d: f.direction_period(d) for d in G.directions(v) if f.direction_period(d)}
             for v in per_vertices}
    report = {}
    for v, p in sorted(per_vertices.items()):
        dirs = pdirs[v]
        clause = None
        vs, es = comp_of[v]
        if len(dirs) == 2:
            cls = class_of[v]
            strata = {f.stratum_of(d) for d in dirs}
            if len(cls.vertices) == 1 and not any(abs(d) in per_edges for d in G.directions(v)) \
                    and len(strata) == 1 and f.is_eg(strata.pop()):
                clause = "only periodic point in its Nielsen class with two periodic directions in one EG stratum"
        if clause is None and es and len(es) == len(vs) and all(len(pdirs[w]) == 2 for w in vs) \
                and all(all(abs(d) in es for d in pdirs[w]) for w in vs):
            clause = "lies in a circle component of Per(f) with two periodic directions at each point"
        report[v] = VertexPrincipality(v, p, clause is None, clause, dirs)
    return PrincipalityReport(report, K)


@dataclass
class RotationlessVerdict:
    rotationless: bool
    witness: str | None

    def __bool__(self) -> bool:
        return self.rotationless


def is_rotationless(f: GraphMap, report: PrincipalityReport | None = None) -> RotationlessVerdict:
    report = report or principal_points(f)
    for v, x in report.vertices.items():
        if not x.principal:
            continue
        if x.period != 1:
            return RotationlessVerdict(False, f"principal vertex {v} has period {x.period}")
        for d, p in x.periodic_directions.items():
            if p != 1:
                return RotationlessVerdict(False, f"direction {f.name(d)} at {v} has period {p}")
    return RotationlessVerdict(True, None)


def min_rotationless_exponent(f: GraphMap) -> int:
    report = principal_points(f)
    pers = []
    for x in report.vertices.values():
        if x.principal:
            pers.append(x.period)
            pers.extend(x.periodic_directions.values())
    k = _fold(lcm, pers, 1)
    for m in range(1, 65):
        if is_rotationless(power_map(f, k * m)):
            return k * m
    raise AssertionError("no rotationless power found")
