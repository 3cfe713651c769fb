"""Graph-rewriting moves on topological representatives.

Each move returns a :class:`MoveResult` holding the new map, a path
correspondence and a certificate.  Every move checks that the outer class
read through the markings is unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .free_group import inner_difference, inverse, multiply
from .graph_map import GraphMap, MapError, _scc_strata
from .marked_graph import (
    Correspondence, Graph, Path, is_forest, remark,
    spanning_tree, substitute,
)


class MoveError(ValueError):
    pass


@dataclass
class MoveResult:
    new_map: GraphMap
    correspondence: Correspondence
    certificate: list[str] = field(default_factory=list)
    log: list[str] = field(default_factory=list)

    def forward(self, p: Sequence[int]) -> Path:
        return self.correspondence.forward(p)

    def backward(self, p: Sequence[int]) -> Path:
        return self.correspondence.backward(p)

    def then(self, other: "MoveResult") -> "MoveResult":
        return MoveResult(other.new_map, self.correspondence.then(other.correspondence),
                          self.certificate + other.certificate, self.log + other.log)


def identity_move(f: GraphMap, note: str = "identity") -> MoveResult:
    return MoveResult(f, Correspondence.identity(), ["no change"], [note])


def check_outer_class(f: GraphMap, g: GraphMap) -> tuple:
    c = inner_difference(f.automorphism.images, g.automorphism.images)
    if c is None:
        raise AssertionError("move changed the outer automorphism class")
    return c


def _finish(f: GraphMap, new: GraphMap, corr: Correspondence, what: str, log: str) -> MoveResult:
    c = check_outer_class(f, new)
    cert = [what, f"outer class preserved (conjugator of length {len(c)})",
            f"rank {new.domain.graph.betti()}"]
    return MoveResult(new, corr, cert, [log])


def _fresh(base: str, used: set[str]) -> str:
    if base not in used:
        used.add(base)
        return base
    i = 2
    while f"{base}{i}" in used:
        i += 1
    used.add(f"{base}{i}")
    return f"{base}{i}"


def _conjugated_map(f: GraphMap, H: Graph, p: Mapping[int, Path], p_inv: Mapping[int, Path],
                    pv: Mapping[str, str], pv_inv: Mapping[str, str], hint: Sequence[Iterable[int]],
                    base_safe: bool = True) -> tuple[GraphMap, Correspondence]:
    """New map [p f p'] for a homotopy equivalence p: G -> H with homotopy inverse p'.

    ``p`` and ``p_inv`` give edge images, ``pv``/``pv_inv`` vertex images.
    When p'p is homotopic to the identity rel the base vertex the backward
    marking is h o p'; otherwise it is recomputed by folding.
    """
    mg = f.domain
    imgs = {e: substitute(f.image_of_path(p_inv[e]), p) for e in H.edges}
    vimg = {w: pv[f.vertex_images[pv_inv[w]]] for w in H.vertices}
    forward = [substitute(q, p) for q in mg.marking.forward]
    base = pv[mg.marking.base]
    backward = {e: mg.read(p_inv[e]) for e in H.edges} if base_safe else None
    new_mg = remark(mg, H, base, forward, backward)
    try:
        g = GraphMap(new_mg, imgs, vimg, strict=f.strict)
    except MapError as exc:
        raise MoveError(f"move produced an invalid map: {exc}") from None
    layers = [[e for e in s if e in imgs] for s in hint]
    layers = [s for s in layers if s]
    covered = {e for s in layers for e in s}
    extra = [e for e in H.edges if e not in covered]
    if extra:
        layers.append(extra)
    g = g.with_strata(_scc_strata(g, layers))
    corr = Correspondence(lambda q: substitute(q, p), lambda q: substitute(q, p_inv))
    return g, corr


# subdivision


Point = tuple[int, Fraction]


def point_image(f: GraphMap, e: int, t: Fraction) -> tuple[str | None, Point | None]:
    """Image of the point at parameter t on edge e: (vertex, None) or (None, (edge, t'))."""
    G = f.graph
    if t == 0:
        return f.vertex_images[G.origin(e)], None
    if t == 1:
        return f.vertex_images[G.terminus(e)], None
    img = f.image(e)
    if not img:
        return f.vertex_images[G.origin(e)], None
    pos = len(img) * Fraction(t)
    k = int(pos)
    s = pos - k
    if s == 0:
        return (G.origin(img[k]) if k < len(img) else G.terminus(img[-1])), None
    d = img[k]
    return None, ((d, s) if d > 0 else (-d, 1 - s))


def periodic_points(f: GraphMap, period: int = 1, limit: int = 200000) -> list[Point]:
    """Interior points of non-periodic edges fixed by f^period.

    Each edge is followed through the piecewise linear iterate: a piece
    [a, b] of the edge that maps onto the edge itself contributes the
    solution of the affine fixed-point equation.
    """
    out: list[Point] = []
    for e in f.graph.edges:
        if f.iterate_image((e,), period) == (e,):
            continue
        pieces = [(Fraction(0), Fraction(1), e)]
        for _ in range(period):
            nxt = []
            for a, b, d in pieces:
                img = f.image(d)
                L = len(img)
                for k, x in enumerate(img):
                    nxt.append((a + (b - a) * k / L, a + (b - a) * (k + 1) / L, x))
            pieces = nxt
            if len(pieces) > limit:
                raise MoveError("periodic point search exceeded its piece limit")
        for a, b, d in pieces:
            if abs(d) != e or b - a == 1:
                continue
            t = a / (1 - (b - a)) if d > 0 else b / (1 + b - a)
            if 0 < t < 1 and a <= t <= b:
                out.append((e, t))
    out = sorted(set(out))
    return [pt for pt in out if _orbit_returns(f, pt, period)]


def _orbit_returns(f: GraphMap, pt: Point, period: int) -> bool:
    x: Point | None = pt
    for _ in range(period):
        _, x = point_image(f, *x)
        if x is None:
            return False
    return x == pt


def point_orbit(f: GraphMap, pt: Point, cap: int = 10000) -> list[Point]:
    orbit = [pt]
    x = pt
    for _ in range(cap):
        v, x = point_image(f, *x)
        if x is None or x == pt:
            return orbit
        if x in orbit:
            return orbit
        orbit.append(x)
    raise MoveError("orbit did not close")


def subdivide(f: GraphMap, points: Iterable[tuple[int, Fraction]], names: Mapping | None = None) -> MoveResult:
    G = f.graph
    cuts: dict[int, list[Fraction]] = {}
    for e, t in points:
        t = Fraction(t)
        if e < 0:
            e, t = -e, 1 - t
        if e not in G.edges or not 0 < t < 1:
            raise MoveError(f"bad subdivision point ({e}, {t})")
        cuts.setdefault(e, [])
        if t not in cuts[e]:
            cuts[e].append(t)
    if not cuts:
        return identity_move(f, "subdivide (nothing)")
    for e in cuts:
        cuts[e].sort()
    used_v = set(G.vertices)
    used_n = set(G.names.values())
    vname: dict[Point, str] = {}
    for e in sorted(cuts):
        for t in cuts[e]:
            want = names.get((e, t)) if names else None
            vname[(e, t)] = _fresh(want or "x", used_v)
    next_id = max(G.edges) + 1
    pieces: dict[int, list[int]] = {}
    ends: dict[int, tuple[str, str]] = {}
    pname: dict[int, str] = {}
    for e in G.edges:
        a, b = G.endpoints()[e]
        if e not in cuts:
            pieces[e] = [e]
            ends[e] = (a, b)
            pname[e] = G.names[e]
            continue
        stops = [a] + [vname[(e, t)] for t in cuts[e]] + [b]
        ids = [e] + list(range(next_id, next_id + len(cuts[e])))
        next_id += len(cuts[e])
        pieces[e] = ids
        for i, pid in enumerate(ids):
            ends[pid] = (stops[i], stops[i + 1])
            pname[pid] = _fresh(f"{G.names[e]}_{i + 1}", used_n)
    H = Graph(list(G.vertices) + [vname[k] for k in sorted(vname)], ends, pname)

    def stops_of(e):
        return [Fraction(0)] + cuts.get(e, []) + [Fraction(1)]

    def piece_range(d: int, s0: Fraction, s1: Fraction) -> list[int]:
        e = abs(d)
        ts = stops_of(e)
        lo, hi = (s0, s1) if d > 0 else (1 - s1, 1 - s0)
        if lo not in ts or hi not in ts:
            raise MoveError("point set is not closed under the map")
        seg = pieces[e][ts.index(lo):ts.index(hi)]
        return seg if d > 0 else [-x for x in reversed(seg)]

    imgs: dict[int, Path] = {}
    owner: dict[int, tuple[int, Fraction, Fraction]] = {}
    for e in G.edges:
        ts = stops_of(e)
        for i, pid in enumerate(pieces[e]):
            owner[pid] = (e, ts[i], ts[i + 1])
    for pid, (e, a, b) in owner.items():
        img = f.image(e)
        L = len(img)
        p0, p1 = L * a, L * b
        out: list[int] = []
        for k, d in enumerate(img):
            lo, hi = max(p0, Fraction(k)), min(p1, Fraction(k + 1))
            if lo < hi:
                out.extend(piece_range(d, lo - k, hi - k))
        imgs[pid] = tuple(out)
    vimg = dict(f.vertex_images)
    for (e, t), name in vname.items():
        v, pt = point_image(f, e, t)
        if pt is not None:
            if pt not in vname:
                raise MoveError("point set is not closed under the map")
            v = vname[pt]
        vimg[name] = v
    split = {e: tuple(pieces[e]) for e in G.edges}
    merge = {pid: ((e,) if pid == pieces[e][0] else ()) for e in G.edges for pid in pieces[e]}
    mg = f.domain
    forward = [substitute(q, split) for q in mg.marking.forward]
    backward = {pid: (mg.marking.backward[e] if pid == pieces[e][0] else ()) for e in G.edges for pid in pieces[e]}
    new_mg = remark(mg, H, mg.marking.base, forward, backward)
    hint = [[pid for e in s for pid in pieces[e]] for s in f.strata]
    g = GraphMap(new_mg, imgs, vimg, strict=f.strict, strata=None)
    g = g.with_strata(_scc_strata(g, hint))
    corr = Correspondence(lambda q: substitute(q, split), lambda q: substitute(q, merge))
    desc = ", ".join(f"{G.names[e]}@{t}" for e in sorted(cuts) for t in cuts[e])
    res = _finish(f, g, corr, f"subdivided at {len(vname)} point(s)", f"subdivide {desc}")
    res.certificate.append("new vertices: " + " ".join(vname[k] for k in sorted(vname)))
    return res


def subdivide_periodic(f: GraphMap, period: int = 1) -> MoveResult:
    pts = periodic_points(f, period)
    orbit_closed: set[Point] = set()
    for pt in pts:
        orbit_closed.update(point_orbit(f, pt))
    return subdivide(f, sorted(orbit_closed))


# valence two homotopy


def valence_two_homotopy(f: GraphMap, v: str, keep: int | None = None, name: str | None = None) -> MoveResult:
    G = f.graph
    dirs = G.directions(v)
    if len(dirs) != 2 or abs(dirs[0]) == abs(dirs[1]):
        raise MoveError(f"vertex {v} does not have valence two")
    if v == f.domain.marking.base and len(G.vertices) == 1:
        raise MoveError("cannot remove the only vertex")
    d1, d2 = dirs
    if keep is None:
        s1, s2 = f.stratum_of(d1), f.stratum_of(d2)
        keep = abs(d1) if (s1, -abs(d1)) >= (s2, -abs(d2)) else abs(d2)
    if keep not in (abs(d1), abs(d2)):
        raise MoveError("kept edge is not incident to the vertex")
    kd, ad = (d1, d2) if abs(d1) == keep else (d2, d1)
    if f.is_eg(f.stratum_of(ad)) and f.stratum_of(ad) != f.stratum_of(kd):
        raise MoveError("the absorbed edge lies in an EG stratum")
    X, Y = -kd, ad      # X ends at v, Y starts at v
    a, b = G.origin(X), G.terminus(Y)
    ends = {e: G.endpoints()[e] for e in G.edges if e not in (abs(X), abs(Y))}
    nid = abs(X)
    ends[nid] = (a, b) if X > 0 else (b, a)
    names = {e: G.names[e] for e in ends}
    if name:
        names[nid] = name
    H = Graph([w for w in G.vertices if w != v], ends, names)
    Z = nid if X > 0 else -nid
    p: dict[int, Path] = {e: (e,) for e in ends if e != nid}
    p[abs(X)] = (Z,) if X > 0 else (-Z,)
    p[abs(Y)] = ()
    pi: dict[int, Path] = {e: (e,) for e in ends if e != nid}
    pi[nid] = (X, Y) if Z > 0 else (-Y, -X)
    pv = {w: w for w in G.vertices}
    pv[v] = b
    pvi = {w: w for w in H.vertices}
    hint = [[(nid if e in (abs(X), abs(Y)) and e == abs(X) else e) for e in s if e != abs(Y)] for s in f.strata]
    g, corr = _conjugated_map(f, H, p, pi, pv, pvi, hint, base_safe=(v != f.domain.marking.base))
    return _finish(f, g, corr, "valence-two homotopy", f"valence_two {v} keep={G.names[keep]}")


# sliding


def slide(f: GraphMap, E: int, tau: Sequence[int]) -> MoveResult:
    G = f.graph
    tau = tuple(tau)
    r = f.stratum_of(E)
    info = f.strata_info[r - 1]
    if not info.is_neg or info.kind in ("NEG-fixed", "NEG-periodic"):
        raise MoveError("slides need a non-periodic NEG edge")
    if not info.normal_form:
        raise MoveError("NEG stratum is not in normal form")
    if info.oriented.get(abs(E)) != E:
        raise MoveError("E must be oriented so that f(E) = E' u")
    lower = f.filtration_element(r - 1)
    if any(abs(e) not in lower for e in tau):
        raise MoveError("tau must lie in lower strata")
    G.check_path(tau, G.terminus(E))
    if not tau:
        return identity_move(f, f"slide {G.name(E)} along 1")
    end = G.path_terminus(tau)
    ends = G.endpoints()
    ends[abs(E)] = (G.origin(E), end) if E > 0 else (end, G.origin(E))
    H = Graph(G.vertices, ends, G.names)
    p = {e: (e,) for e in G.edges}
    pi = {e: (e,) for e in G.edges}
    if E > 0:
        p[E] = (E,) + inverse(tau)
        pi[E] = (E,) + tau
    else:
        p[-E] = tau + (-E,)
        pi[-E] = inverse(tau) + (-E,)
    pv = {w: w for w in G.vertices}
    g, corr = _conjugated_map(f, H, p, pi, pv, pv, f.strata)
    return _finish(f, g, corr, "slide", f"slide {G.name(E)} along {G.format_path(tau)}")


# tree replacement


def tree_replacement(f: GraphMap, r: int, new_tree: Sequence[tuple[str, str, str]]) -> MoveResult:
    G = f.graph
    info = f.strata_info[r - 1]
    if info.kind != "zero":
        raise MoveError(f"stratum {r} is not a zero stratum")
    Hi = set(f.strata[r - 1])
    if not is_forest(G, Hi):
        raise MoveError("zero stratum is not a forest")
    outside = {v for e in G.edges if e not in Hi for v in G.endpoints()[e]}
    outside.add(f.domain.marking.base)
    comps = G.components(Hi)
    required = set()
    for vs, _ in comps:
        required |= vs & outside
    tree_vertices = {v for _, a, b in new_tree for v in (a, b)}
    if tree_vertices - required or (len(new_tree) and required - tree_vertices and any(len(vs & outside) > 1 for vs, _ in comps)):
        raise MoveError("new tree must span exactly the attaching vertices")
    used = set(G.names.values()) - {G.names[e] for e in Hi}
    next_id = max(G.edges) + 1
    ends = {e: G.endpoints()[e] for e in G.edges if e not in Hi}
    names = {e: G.names[e] for e in ends}
    new_ids = []
    for nm, a, b in new_tree:
        if nm in used:
            raise MoveError(f"edge name {nm} already used")
        used.add(nm)
        ends[next_id] = (a, b)
        names[next_id] = nm
        new_ids.append(next_id)
        next_id += 1
    if not is_forest(Graph(sorted(tree_vertices) or [], {i: ends[i] for i in new_ids}, {i: names[i] for i in new_ids}) if new_ids else Graph([], {}, {}), new_ids):
        raise MoveError("new tree contains a cycle")
    kept_vertices = [v for v in G.vertices if not (any(v in vs for vs, _ in comps) and v not in required)]
    H = Graph(kept_vertices, ends, names)
    new_comps = H.components(new_ids) if new_ids else []
    for vs, _ in comps:
        att = vs & required
        if len(att) > 1 and not any(att == nv for nv, _ in new_comps):
            raise MoveError("new tree does not connect the attaching vertices of a component")
    pv = {v: v for v in G.vertices}
    for vs, es in comps:
        att = sorted(vs & required)
        for v in vs:
            if v not in required:
                pv[v] = att[0] if att else v
    new_paths = {}
    for nv, nes in new_comps:
        root_v = min(nv)
        new_paths.update({k: (root_v, path) for k, path in spanning_tree(H, root_v, nes).items()})
    old_paths = {}
    for vs, es in comps:
        root_v = min(vs)
        old_paths.update({k: (root_v, path) for k, path in spanning_tree(G, root_v, es).items()})

    def tree_between(paths, a, b):
        if a == b:
            return ()
        ra, pa = paths[a]
        rb, pb = paths[b]
        if ra != rb:
            raise MoveError("vertices are in different tree components")
        return multiply(inverse(pa), pb)

    p = {e: (e,) for e in ends if e not in new_ids}
    for e in Hi:
        a, b = G.endpoints()[e]
        p[e] = tree_between(new_paths, pv[a], pv[b])
    pi = {e: (e,) for e in ends if e not in new_ids}
    for e in new_ids:
        a, b = ends[e]
        pi[e] = tree_between(old_paths, a, b)
    pvi = {w: w for w in H.vertices}
    hint = [(new_ids if s == f.strata[r - 1] else list(s)) for s in f.strata]
    hint = [s for s in hint if s]
    g, corr = _conjugated_map(f, H, p, pi, pv, pvi, hint)
    return _finish(f, g, corr, "tree replacement", f"tree_replacement {r} " +
                   " ".join(f"{nm}:{a}-{b}" for nm, a, b in new_tree))


# collapse


def collapse(f: GraphMap, forest: Iterable[int]) -> MoveResult:
    G = f.graph
    F = {abs(e) for e in forest}
    if not F:
        return identity_move(f, "collapse (nothing)")
    if not is_forest(G, F):
        raise MoveError("edge set contains a circuit")
    base = f.domain.marking.base
    rep = {v: v for v in G.vertices}
    to_rep: dict[str, Path] = {v: () for v in G.vertices}
    for verts, _ in G.components(F):
        r = base if base in verts else min(verts)
        paths = spanning_tree(G, r, F)
        for v in verts:
            rep[v] = r
            to_rep[v] = inverse(paths[v])
    ends = {e: (rep[a], rep[b]) for e, (a, b) in G.endpoints().items() if e not in F}
    H = Graph([v for v in G.vertices if rep[v] == v], ends, {e: G.names[e] for e in ends})
    p = {e: (() if e in F else (e,)) for e in G.edges}
    pi = {e: multiply(inverse(to_rep[G.origin(e)]), (e,), to_rep[G.terminus(e)]) for e in ends}
    pvi = {w: w for w in H.vertices}
    hint = [[e for e in s if e not in F] for s in f.strata]
    g, corr = _conjugated_map(f, H, p, pi, rep, pvi, [s for s in hint if s])
    return _finish(f, g, corr, "forest collapse", "collapse " + " ".join(G.names[e] for e in sorted(F)))


# marking change


def change_marking_via_restriction(f: GraphMap, j: int) -> MoveResult:
    """Change the marking on G_j via f: g = f on G_j and the identity elsewhere."""
    if j == 0:
        return identity_move(f, "change_marking 0")
    G = f.graph
    Gj = f.filtration_element(j)
    for vs, es in G.components(Gj):
        if len(es) < len(vs):
            raise MoveError("every component of G_j must be non-contractible")
    for v in {v for e in Gj for v in G.endpoints()[e]}:
        if any(abs(d) not in Gj for d in G.directions(v)) and f.vertex_images[v] != v:
            raise MoveError(f"f must fix the attaching vertex {v}")
    gtab = {e: (f.image(e) if e in Gj else (e,)) for e in G.edges}
    imgs = {e: (f.image(e) if e in Gj else substitute(f.image(e), gtab)) for e in G.edges}
    mg = f.domain
    base = mg.marking.base
    gbase = f.vertex_images[base] if base in {v for e in Gj for v in G.endpoints()[e]} else base
    forward = [substitute(q, gtab) for q in mg.marking.forward]
    if gbase != base:
        raise MoveError("base vertex would move")
    new_mg = remark(mg, G, base, forward, None)
    g = GraphMap(new_mg, imgs, f.vertex_images, f.strata, strict=f.strict)
    corr = Correspondence(lambda q: substitute(q, gtab), lambda q: q)
    res = _finish(f, g, corr, "marking changed on G_j via f", f"change_marking {j}")
    res.certificate.append("backward correspondence is only defined up to f on G_j")
    return res


# folds


FOLD_TYPES = ("partial", "proper-full", "improper-full")


def _lcp(a: Sequence[int], b: Sequence[int]) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def _full_fold(f: GraphMap, d1: int, d2: int) -> MoveResult:
    """Identify oriented edges d1, d2 (same origin, equal images)."""
    G = f.graph
    if f.image(d1) != f.image(d2):
        raise MoveError("edges do not have equal images")
    t1, t2 = G.terminus(d1), G.terminus(d2)
    if t1 == t2:
        raise MoveError("fold would drop the rank")
    base = f.domain.marking.base
    if t2 == base:
        d1, d2, t1, t2 = d2, d1, t2, t1
    ends = {}
    for e, (a, b) in G.endpoints().items():
        if e == abs(d2):
            continue
        ends[e] = (t1 if a == t2 else a, t1 if b == t2 else b)
    H = Graph([v for v in G.vertices if v != t2], ends, {e: G.names[e] for e in ends})
    p: dict[int, Path] = {e: (e,) for e in ends}
    p[abs(d2)] = (d1,) if d2 > 0 else (-d1,)
    bridge = (-d1, d2)   # from t1 to t2 in G
    pi: dict[int, Path] = {}
    for e in ends:
        a, b = G.endpoints()[e]
        pre = bridge if a == t2 else ()
        post = inverse(bridge) if b == t2 else ()
        pi[e] = multiply(pre, (e,), post)
    pv = {v: (t1 if v == t2 else v) for v in G.vertices}
    pvi = {v: v for v in H.vertices}
    hint = [[e for e in s if e != abs(d2)] for s in f.strata]
    g, corr = _conjugated_map(f, H, p, pi, pv, pvi, [s for s in hint if s])
    return _finish(f, g, corr, "full fold", f"fold {G.name(d1)} {G.name(d2)}")


def elementary_fold(f: GraphMap, d1: int, d2: int) -> MoveResult:
    G = f.graph
    if d1 == d2:
        raise MoveError("cannot fold a degenerate turn")
    if G.origin(d1) != G.origin(d2):
        raise MoveError("directions have different base vertices")
    i1, i2 = f.image(d1), f.image(d2)
    c = _lcp(i1, i2)
    if c == 0:
        raise MoveError("images of the two directions do not agree initially")
    if c == len(i1) == len(i2):
        return _full_fold(f, d1, d2)
    pts = []
    if c < len(i1):
        pts.append((d1, Fraction(c, len(i1))))
    if c < len(i2):
        pts.append((d2, Fraction(c, len(i2))))
    sub = subdivide(f, pts)
    h = sub.new_map
    n1 = sub.forward((d1,))[0]
    n2 = sub.forward((d2,))[0]
    res = sub.then(_full_fold(h, n1, n2))
    res.certificate.append("partial fold" if len(pts) == 2 else "fold after subdividing one edge")
    return res


def fold_type(f: GraphMap, E1: int, E2: int) -> str:
    a, b = f.image(E1), f.image(E2)
    if a == b:
        return "improper-full"
    c = _lcp(a, b)
    if c == len(a) or c == len(b):
        return "proper-full"
    return "partial"


def extended_fold(f: GraphMap, rho) -> tuple[MoveResult | None, str, object]:
    """Extended fold determined by an EG iNp ``rho`` (a NielsenPath).

    Returns (move or None, fold type, image iNp or None).
    """
    from .nielsen import NielsenPath

    path = tuple(rho.path)
    r = rho.height
    if rho.eg_decomposition is None:
        raise MoveError("rho has no EG decomposition")
    i = rho.eg_decomposition
    if f.illegal_turns(path, r) != [i]:
        raise MoveError("rho does not have a single illegal turn in H_r")
    if f.iterate_image(path, rho.period) != path:
        raise MoveError("rho is not a Nielsen path")
    P, Q = inverse(path[:i]), path[i:]
    E1, E2 = P[0], Q[0]
    kind = fold_type(f, E1, E2)
    if kind != "proper-full":
        return None, kind, None
    if len(f.image(E1)) > len(f.image(E2)):
        P, Q, E1, E2 = Q, P, E2, E1
    lower = f.filtration_element(r - 1)
    k = 1
    while k < len(P) and abs(P[k]) in lower:
        k += 1
    E1b = P[:k]
    img = f.image_of_path(E1b)
    full = f.image(E2)
    if full[:len(img)] != img or len(img) >= len(full):
        raise MoveError("extended fold data inconsistent")
    sub = subdivide(f, [(E2, Fraction(len(img), len(full)))])
    h = sub.new_map
    HG = h.graph
    E2pp, E2p = sub.forward((E2,))
    y = HG.terminus(E2pp)
    target = HG.terminus(E1b[-1])
    ends = {}
    for e, (a, b) in HG.endpoints().items():
        if e == abs(E2pp):
            continue
        ends[e] = (target if a == y else a, target if b == y else b)
    newG = Graph([v for v in HG.vertices if v != y], ends, {e: HG.names[e] for e in ends})
    p: dict[int, Path] = {e: (e,) for e in ends}
    p[abs(E2pp)] = E1b if E2pp > 0 else inverse(E1b)
    detour = multiply(inverse(E1b), (E2pp,))   # from target to y in the subdivided graph
    pi: dict[int, Path] = {}
    for e in ends:
        a, b = HG.endpoints()[e]
        pi[e] = multiply(detour if a == y else (), (e,), inverse(detour) if b == y else ())
    pv = {v: (target if v == y else v) for v in HG.vertices}
    pvi = {v: v for v in newG.vertices}
    hint = [[e for e in s if e != abs(E2pp)] for s in h.strata]
    g, corr = _conjugated_map(h, newG, p, pi, pv, pvi, [s for s in hint if s])
    step = _finish(h, g, corr, "proper extended fold", f"extended_fold {f.fmt(path)}")
    res = sub.then(step)
    new_path = res.forward(path)
    j = g.illegal_turns(new_path, g.stratum_of(new_path[0]) if new_path else r)
    height = max(g.stratum_of(e) for e in new_path)
    new_rho = NielsenPath(new_path, rho.period, height, True, j[0] if len(j) == 1 else None)
    if g.iterate_image(new_path, rho.period) != new_path:
        raise AssertionError("image of the iNp is not a Nielsen path")
    return res, kind, new_rho


def make_rtt(f: GraphMap, budget: int = 10_000):
    from .pipeline import make_rtt as run
    return run(f, budget)


def make_ct(f: GraphMap, budget: int = 10_000):
    from .pipeline import make_ct as run
    return run(f, budget)
