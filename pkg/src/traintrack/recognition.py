"""The invariant bundle of a rotationless representative and its comparison.

The bundle holds expansion factors of the attracting laminations, one
descriptor per principal Nielsen class (fixed subgroup and attracting rays)
and the twist coordinates of each axis.  Boundary points are never built;
rays are handled through finite word prefixes.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .free_group import (
    Word, conj_class, format_word, inverse, parse_word, reduce, word_key,
)
from .graph_map import GraphMap
from .marked_graph import Path
from .nielsen import (
    find_neg_nielsen_paths, is_rotationless, nielsen_classes, nielsen_paths, principal_points,
)
from .perron import PFData, max_real_root
from .stallings import free_basis, subgroup_core_form

LEAF_WORD = 3
RAY_DEPTH = 64


class NotRotationless(ValueError):
    pass


@dataclass(frozen=True)
class LaminationDatum:
    stratum: int
    charpoly: tuple[int, ...]
    factor: tuple[int, ...]
    pf: float
    leaf_words: frozenset[Word]
    tiles: tuple[int, ...] = field(default=(), compare=False)  # f^k_#(E) for these edges are the tiles

    @property
    def expansion(self) -> float:
        return self.pf


@dataclass(frozen=True)
class AxisDatum:
    axis: Word                       # canonical unoriented representative
    twists: tuple[tuple[str, int], ...]
    base_class: int = 0

    @property
    def twist_multiset(self) -> tuple[int, ...]:
        return tuple(sorted(d for _, d in self.twists))


@dataclass(frozen=True)
class RayDescriptor:
    vertex: str
    direction: str
    prefix: Word
    truncated: bool


@dataclass(frozen=True)
class PrincipalClassDescriptor:
    id: int
    vertex: str
    fixed_basis: tuple[Word, ...]
    rays: tuple[RayDescriptor, ...]

    @property
    def rank(self) -> int:
        return len(self.fixed_basis)

    @property
    def core_form(self) -> tuple:
        return subgroup_core_form(self.fixed_basis)

    def fingerprint(self) -> tuple:
        return (self.core_form, len(self.rays))


@dataclass
class InvariantBundle:
    rank: int
    names: tuple[str, ...]
    laminations: list[LaminationDatum] = field(default_factory=list)
    classes: list[PrincipalClassDescriptor] = field(default_factory=list)
    axes: list[AxisDatum] = field(default_factory=list)

    def summary(self) -> str:
        return (f"bundle(rank {self.rank}, {len(self.laminations)} lamination(s), "
                f"{len(self.classes)} principal class(es), {len(self.axes)} axis/axes)")


# laminations


def _leaf_words(f: GraphMap, edges, L: int = LEAF_WORD, target: int = 3000) -> frozenset[Word]:
    """Length-L subwords of the lamination, read from the middle of long tiles."""
    bw = max(len(w) for w in f.domain.marking.backward.values())
    margin = 8 * bw + 2 * L
    span = target // max(bw, 1) + 1           # edges in the sampled window
    words: set[Word] = set()
    for e in edges:
        p: Path = (e,)
        for _ in range(64):
            if len(p) >= span:
                break
            p = f.image_of_path(p)
        if len(p) > span:
            mid = len(p) // 2
            p = p[mid - span // 2: mid + span // 2]
        w = f.domain.read(p)
        mid_w = w[margin:len(w) - margin]
        for i in range(len(mid_w) - L + 1):
            s = mid_w[i:i + L]
            t = inverse(s)
            words.add(s if s <= t else t)
    return frozenset(words)


def lamination_data(f: GraphMap) -> list[LaminationDatum]:
    out = []
    for r in f.eg_strata():
        info = f.strata_info[r - 1]
        pf: PFData = info.pf
        out.append(LaminationDatum(r, pf.charpoly, pf.factor, pf.value,
                                   _leaf_words(f, info.edges), info.edges))
    return out


# axes


def axes_and_twists(f: GraphMap) -> list[AxisDatum]:
    groups: dict[Word, list[tuple[str, int]]] = {}
    for fam in find_neg_nielsen_paths(f).families:
        w = f.domain.read(fam.root)
        cls = conj_class(w, oriented=False)
        same = conj_class(w, oriented=True).representative == conj_class(cls.representative, True).representative
        d = fam.exponent if same else -fam.exponent
        groups.setdefault(cls.representative, []).append((f.name(abs(fam.edge)), d))
    out = []
    for axis, tw in groups.items():
        # orient the axis so that the twist of least absolute value is positive
        least = min(tw, key=lambda t: (abs(t[1]), t[1] < 0))
        if least[1] < 0:
            tw = [(n, -d) for n, d in tw]
        out.append(AxisDatum(axis, tuple(sorted(tw, key=lambda t: (t[1], t[0])))))
    return sorted(out, key=lambda a: word_key(a.axis))


# principal classes


def _ray(f: GraphMap, gamma: Path, d: int, depth: int) -> tuple[Word, bool]:
    hg = f.domain.read(gamma)
    p: Path = (d,)
    prev: Word | None = None
    for _ in range(80):
        w = reduce(hg + f.domain.read(p))
        if len(w) >= 2 * depth + 8:
            cur = w[:depth]
            if cur == prev:
                return cur, False
            prev = cur
        if len(p) > 200000:
            break
        nxt = f.image_of_path(p)
        if nxt == p:
            return w[:depth], False
        p = nxt
    w = reduce(hg + f.domain.read(p))
    return w[:depth], True


def _class_loops(f: GraphMap, vertices: tuple[str, ...], u: str, length_bound: int) -> list[Path]:
    G = f.graph
    conn = [np_.path for np_ in nielsen_paths(f, 1, length_bound)]
    conn += [fam.member(1) for fam in find_neg_nielsen_paths(f).families]
    vs = set(vertices)
    conn = [p for p in conn if G.path_origin(p) in vs and G.path_terminus(p) in vs]
    tree: dict[str, Path] = {u: ()}
    pending = list(conn)
    extra = []
    changed = True
    while changed:
        changed = False
        rest = []
        for p in pending:
            a, b = G.path_origin(p), G.path_terminus(p)
            if a in tree and b not in tree:
                tree[b] = tree[a] + p
                changed = True
            elif b in tree and a not in tree:
                tree[a] = tree[b] + inverse(p)
                changed = True
            elif a in tree and b in tree:
                extra.append(p)
            else:
                rest.append(p)
        pending = rest
    loops = []
    for p in extra:
        a, b = G.path_origin(p), G.path_terminus(p)
        loops.append(tree[a] + p + inverse(tree[b]))
    return loops


def principal_class_descriptors(f: GraphMap, depth: int = RAY_DEPTH,
                                length_bound: int = 200) -> list[PrincipalClassDescriptor]:
    report = principal_points(f, length_bound)
    principal = set(report.principal())
    lin_dirs = {fam.edge for fam in find_neg_nielsen_paths(f).families}
    out = []
    for cls in nielsen_classes(f, 1, length_bound):
        if not principal & set(cls.vertices):
            continue
        u = min(cls.vertices)
        _, gamma = f.normalized_automorphism(u)
        loops = _class_loops(f, cls.vertices, u, length_bound)
        gens = [f.read_loop(gamma, lp) for lp in loops]
        basis = tuple(free_basis([g for g in gens if g]))
        rays = []
        for v in cls.vertices:
            path_to_v = _tree_path(f, cls, u, v, length_bound)
            for d in f.graph.directions(v):
                if f.derivative(d) != d or f.image(d) == (d,) or d in lin_dirs:
                    continue
                prefix, truncated = _ray(f, gamma + path_to_v, d, depth)
                rays.append(RayDescriptor(v, f.name(d), prefix, truncated))
        rays.sort(key=lambda r: word_key(r.prefix))
        out.append(PrincipalClassDescriptor(0, u, basis, tuple(rays)))
    out.sort(key=lambda c: (c.rank, sorted(word_key(b) for b in c.fixed_basis),
                            [word_key(r.prefix) for r in c.rays]))
    return [PrincipalClassDescriptor(i, c.vertex, c.fixed_basis, c.rays) for i, c in enumerate(out)]


def _tree_path(f: GraphMap, cls, u: str, v: str, length_bound: int) -> Path:
    if v == u:
        return ()
    G = f.graph
    conn = [np_.path for np_ in nielsen_paths(f, 1, length_bound)]
    tree: dict[str, Path] = {u: ()}
    changed = True
    while changed and v not in tree:
        changed = False
        for p in conn:
            a, b = G.path_origin(p), G.path_terminus(p)
            if a in tree and b not in tree:
                tree[b] = tree[a] + p
                changed = True
            elif b in tree and a not in tree:
                tree[a] = tree[b] + inverse(p)
                changed = True
    return tree.get(v, ())


def remove_valence_two(f: GraphMap) -> GraphMap:
    """Undo subdivisions: amalgamate valence-two vertices while RTT status and rotationlessness survive."""
    from .graph_map import check_rtt
    from .moves import MoveError, valence_two_homotopy

    was_rtt = check_rtt(f).passed
    changed = True
    while changed:
        changed = False
        for v in sorted(f.graph.vertices):
            if f.graph.valence(v) != 2 or len(f.graph.vertices) == 1:
                continue
            for keep in sorted({abs(d) for d in f.graph.directions(v)}):
                try:
                    g = valence_two_homotopy(f, v, keep=keep).new_map
                except MoveError:
                    continue
                if is_rotationless(g) and (check_rtt(g).passed or not was_rtt):
                    f, changed = g, True
                    break
            if changed:
                break
    return f


def extract_bundle(f: GraphMap, depth: int = RAY_DEPTH, length_bound: int = 200) -> InvariantBundle:
    """Bundle of a rotationless map.

    The map is first reduced by valence-two homotopies and then subdivided
    at its fixed interior points, so that every principal fixed point is a
    vertex and subdivisions of the input do not change the result.
    """
    from .moves import subdivide_periodic

    if not is_rotationless(f):
        raise NotRotationless("extract_bundle needs a rotationless representative")
    g = subdivide_periodic(remove_valence_two(f)).new_map
    return InvariantBundle(
        f.rank, tuple(f.domain.generator_names), lamination_data(g),
        principal_class_descriptors(g, depth, length_bound), axes_and_twists(g))


# comparison


@dataclass
class Comparison:
    verdict: str           # equal | equal-at-depth | distinct | inconclusive
    witness: str = ""

    @property
    def same(self) -> bool:
        return self.verdict in ("equal", "equal-at-depth")


def _ray_match(a: RayDescriptor, b: RayDescriptor) -> str | None:
    """'exact' for equal stable prefixes, 'window' for a shared tail window."""
    if a.prefix == b.prefix and not (a.truncated or b.truncated):
        return "exact"
    for x, y in ((a.prefix, b.prefix), (b.prefix, a.prefix)):
        n = len(x)
        win = x[n // 2: n // 2 + max(4, n // 4)]
        if len(win) >= 4 and _contains(y, win):
            return "window"
    return None


def _contains(w: Word, sub: Word) -> bool:
    m = len(sub)
    return any(w[i:i + m] == sub for i in range(len(w) - m + 1))


def compare_bundles(X: InvariantBundle, Y: InvariantBundle, depth: int = RAY_DEPTH) -> Comparison:
    if X.rank != Y.rank:
        raise ValueError("bundles have different ranks")
    fx = Counter(l.factor for l in X.laminations)
    fy = Counter(l.factor for l in Y.laminations)
    if fx != fy:
        return Comparison("distinct", f"expansion factors differ: {sorted(fx)} vs {sorted(fy)}")
    leaves_x = sorted((l.factor, sorted(l.leaf_words)) for l in X.laminations)
    leaves_y = sorted((l.factor, sorted(l.leaf_words)) for l in Y.laminations)
    if leaves_x != leaves_y:
        return Comparison("distinct", "lamination leaf words differ")
    ax = {a.axis: a.twist_multiset for a in X.axes}
    ay = {a.axis: a.twist_multiset for a in Y.axes}
    if set(ax) != set(ay):
        return Comparison("distinct", "axes differ: " + _axes_text(X, ax) + " vs " + _axes_text(Y, ay))
    for axis in sorted(ax, key=word_key):
        if ax[axis] != ay[axis]:
            a = " ".join(map(str, ax[axis]))
            b = " ".join(map(str, ay[axis]))
            return Comparison("distinct", f"twist {a} != {b} on axis [{format_word(axis, X.names)}]")
    cx = Counter(c.fingerprint() for c in X.classes)
    cy = Counter(c.fingerprint() for c in Y.classes)
    if cx != cy:
        return Comparison("distinct", "principal classes differ: fixed subgroup ranks/classes or ray counts "
                          f"{sorted((c.rank, len(c.rays)) for c in X.classes)} vs "
                          f"{sorted((c.rank, len(c.rays)) for c in Y.classes)}")
    truncated = False
    unmatched = []
    for key in cx:
        xs = [c for c in X.classes if c.fingerprint() == key]
        pool = [c for c in Y.classes if c.fingerprint() == key]
        for c in xs:
            kinds = None
            for d in pool:
                kinds = _rays_match(c, d)
                if kinds is not None:
                    pool.remove(d)
                    break
            if kinds is None:
                unmatched.append(c.id)
            else:
                truncated |= "window" in kinds
    if unmatched:
        return Comparison("inconclusive", f"ray prefixes of class(es) {unmatched} not matched at depth {depth}")
    return Comparison("equal-at-depth" if truncated else "equal")


def _rays_match(c: PrincipalClassDescriptor, d: PrincipalClassDescriptor) -> set[str] | None:
    pool = list(d.rays)
    kinds = set()
    for r in c.rays:
        for s in pool:
            k = _ray_match(r, s)
            if k:
                kinds.add(k)
                pool.remove(s)
                break
        else:
            return None
    return kinds


def _axes_text(B: InvariantBundle, ax) -> str:
    return "{" + ", ".join(f"[{format_word(a, B.names)}]" for a in sorted(ax, key=word_key)) + "}"


# serialization


def serialize_bundle(B: InvariantBundle) -> str:
    fw = lambda w: format_word(w, B.names)  # noqa: E731
    lines = ["format 1", f"bundle rank {B.rank}", "generators " + " ".join(B.names), "LAMINATIONS"]
    for l in B.laminations:
        lines.append(f"lamination {l.stratum} pf {l.pf!r}")
        lines.append("  charpoly " + " ".join(map(str, l.charpoly)))
        lines.append("  factor " + " ".join(map(str, l.factor)))
        lines.append("  leaves " + " , ".join(fw(w) for w in sorted(l.leaf_words, key=word_key)))
    lines.append("CLASSES")
    for c in B.classes:
        lines.append(f"class {c.id} vertex {c.vertex}")
        lines.append("  fix " + " , ".join(fw(w) for w in c.fixed_basis))
        for r in c.rays:
            lines.append(f"  ray {r.vertex} {r.direction} {'truncated' if r.truncated else 'stable'} : {fw(r.prefix)}")
    lines.append("AXES")
    for a in B.axes:
        lines.append(f"axis {fw(a.axis)} : " + " ".join(f"{n}={d}" for n, d in a.twists))
    return "\n".join(lines) + "\n"


def parse_bundle(text: str) -> InvariantBundle:
    lines = [ln.rstrip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0].strip() != "format 1":
        raise ValueError("bundle text must start with 'format 1'")
    rank = int(lines[1].split()[2])
    names = tuple(lines[2].split()[1:])
    pw = lambda s: parse_word(s.strip(), names) if s.strip() not in ("", "1") else ()  # noqa: E731
    B = InvariantBundle(rank, names)
    section = None
    cur: dict = {}
    for ln in lines[3:]:
        tok = ln.split()
        if ln in ("LAMINATIONS", "CLASSES", "AXES"):
            section = ln
            continue
        if section == "LAMINATIONS":
            if tok[0] == "lamination":
                cur = {"stratum": int(tok[1]), "pf": float(tok[3])}
            elif tok[0] == "charpoly":
                cur["charpoly"] = tuple(int(x) for x in tok[1:])
            elif tok[0] == "factor":
                cur["factor"] = tuple(int(x) for x in tok[1:])
            elif tok[0] == "leaves":
                body = ln.split("leaves", 1)[1]
                cur["leaf_words"] = frozenset(pw(s) for s in body.split(",") if s.strip())
                B.laminations.append(LaminationDatum(cur["stratum"], cur["charpoly"], cur["factor"],
                                                     cur["pf"], cur["leaf_words"]))
        elif section == "CLASSES":
            if tok[0] == "class":
                cur = {"id": int(tok[1]), "vertex": tok[3], "fix": (), "rays": []}
                B.classes.append(None)
            elif tok[0] == "fix":
                body = ln.split("fix", 1)[1]
                cur["fix"] = tuple(pw(s) for s in body.split(",") if s.strip())
            elif tok[0] == "ray":
                head, body = ln.split(":", 1)
                h = head.split()
                cur["rays"].append(RayDescriptor(h[1], h[2], pw(body), h[3] == "truncated"))
            B.classes[-1] = PrincipalClassDescriptor(cur["id"], cur["vertex"], cur["fix"], tuple(cur["rays"]))
        elif section == "AXES":
            head, body = ln.split(":", 1)
            axis = pw(head.split(None, 1)[1])
            tw = tuple((n, int(d)) for n, d in (t.split("=") for t in body.split()))
            B.axes.append(AxisDatum(axis, tw))
    return B


def exact_pf_value(l: LaminationDatum) -> float:
    return max_real_root(l.factor)
