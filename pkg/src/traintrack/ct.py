"""Complete splittings and the CT property checker."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .free_group import inverse, word_key
from .graph_map import GraphMap, check_rtt
from .marked_graph import Path, core_subgraph, spanning_tree
from .nielsen import (
    NielsenPath, all_eg_inps, find_neg_nielsen_paths, is_rotationless, neg_connectors,
    principal_points,
)
from .stallings import subgroup_core_form

UNIT_KINDS = ("edge", "inp", "exceptional", "taken")


@dataclass(frozen=True)
class SplittingUnit:
    kind: str
    start: int
    path: Path
    data: tuple = ()

    @property
    def end(self) -> int:
        return self.start + len(self.path)

    def fmt(self, f: GraphMap) -> str:
        body = f.fmt(self.path)
        return body if self.kind == "edge" else f"{self.kind}({body})"


@dataclass(frozen=True)
class CompleteSplitting:
    units: tuple[SplittingUnit, ...]

    @property
    def path(self) -> Path:
        return tuple(e for u in self.units for e in u.path)

    def fmt(self, f: GraphMap) -> str:
        return "[" + " | ".join(u.fmt(f) for u in self.units) + "]"


class NotCompletelySplit(ValueError):
    pass


@dataclass
class UnitInventory:
    """Precomputed unit data for one map: iNps, linear edges and taken paths."""
    inps: list[Path]
    linear: list[tuple[int, Path, int]]       # (E oriented, root w, d)
    taken: set[Path]
    taken_complete: bool
    inp_complete: bool


def taken_paths(f: GraphMap, depth: int = 32, max_len: int = 20000) -> tuple[set[Path], bool]:
    """Maximal zero-stratum subpaths of f^k_#(E) for E in irreducible strata, k <= depth."""
    zero = {e for s in f.strata_info if s.kind == "zero" for e in s.edges}
    if not zero:
        return set(), True
    out: set[Path] = set()
    complete = True
    for info in f.strata_info:
        if info.kind == "zero":
            continue
        for e in info.edges:
            p: Path = (e,)
            quiet = 0
            for _ in range(depth):
                p = f.image_of_path(p)
                if len(p) > max_len:
                    complete = False
                    break
                new = False
                for run in _zero_runs(p, zero):
                    key = min(run, inverse(run), key=word_key)
                    if key not in out:
                        out.add(key)
                        new = True
                quiet = 0 if new else quiet + 1
                if quiet >= 3:
                    break
            else:
                complete = False
    return out, complete


def _zero_runs(p: Sequence[int], zero: set[int]) -> list[Path]:
    runs, cur = [], []
    for e in p:
        if abs(e) in zero:
            cur.append(e)
        elif cur:
            runs.append(tuple(cur))
            cur = []
    if cur:
        runs.append(tuple(cur))
    return runs


def build_inventory(f: GraphMap, inp_bound: int = 200, taken_depth: int = 32) -> UnitInventory:
    inps: list[Path] = []
    complete = True
    for r, res in all_eg_inps(f, inp_bound).items():
        complete &= res.complete
        for np_ in res.paths:
            if np_.period == 1:
                inps.extend({np_.path, inverse(np_.path)})
    linear = [(fam.edge, fam.root, fam.exponent) for fam in find_neg_nielsen_paths(f).families]
    taken, tc = taken_paths(f, taken_depth)
    return UnitInventory(sorted(set(inps), key=word_key), linear, taken, tc, complete)


def _powers(w: Path, limit: int):
    """(k, tightened w^k) for k = 1, -1, 2, -2, ... while the length stays under limit."""
    k = 1
    while True:
        grew = False
        for s in (k, -k):
            base = w if s > 0 else inverse(w)
            q = _tight(base * k)
            if len(q) <= limit:
                grew = True
                yield s, q
        if not grew:
            return
        k += 1


def _tight(p: Sequence[int]) -> Path:
    out: list[int] = []
    for a in p:
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def match_units(f: GraphMap, p: Sequence[int], at: int, inv: UnitInventory | None = None) -> list[SplittingUnit]:
    inv = inv or build_inventory(f)
    p = tuple(p)
    out: list[SplittingUnit] = []
    e = p[at]
    info = f.strata_info[f.stratum_of(e) - 1]
    if info.kind != "zero":
        out.append(SplittingUnit("edge", at, (e,)))
    for q in inv.inps:
        if p[at:at + len(q)] == q:
            out.append(SplittingUnit("inp", at, q))
    rest = len(p) - at
    for Ei, w, di in inv.linear:
        if e != Ei:
            continue
        for Ej, wj, dj in inv.linear:
            if wj != w or (di > 0) != (dj > 0):
                continue
            for k, wk in _powers(w, rest):
                q = _tight((Ei,) + wk + (-Ej,))
                if p[at:at + len(q)] == q:
                    kind = "inp" if Ei == Ej else "exceptional"
                    out.append(SplittingUnit(kind, at, q, (Ei, w, k, Ej)))
    if info.kind == "zero" and (at == 0 or f.strata_info[f.stratum_of(p[at - 1]) - 1].kind != "zero"):
        j = at
        while j < len(p) and f.strata_info[f.stratum_of(p[j]) - 1].kind == "zero":
            j += 1
        run = p[at:j]
        if min(run, inverse(run), key=word_key) in inv.taken:
            out.append(SplittingUnit("taken", at, run))
    uniq = {}
    for u in out:
        uniq.setdefault((u.kind, u.path), u)
    return list(uniq.values())


def _junction_ok(f: GraphMap, left: SplittingUnit, right: SplittingUnit) -> bool:
    return f.turn_is_legal(-left.path[-1], right.path[0])


def all_splittings(f: GraphMap, p: Sequence[int], inv: UnitInventory | None = None,
                   cap: int = 64) -> list[CompleteSplitting]:
    """Every parse of p into units with legal junction turns (dynamic programming, right to left)."""
    inv = inv or build_inventory(f)
    p = tuple(p)
    n = len(p)
    if n == 0:
        return []
    cands = [match_units(f, p, i, inv) for i in range(n)]
    tails: list[list[tuple[SplittingUnit, ...]]] = [[] for _ in range(n + 1)]
    tails[n] = [()]
    for i in range(n - 1, -1, -1):
        acc = []
        for u in cands[i]:
            for rest in tails[u.end]:
                if not rest or _junction_ok(f, u, rest[0]):
                    acc.append((u,) + rest)
                    if len(acc) >= cap:
                        break
        tails[i] = acc
    return [CompleteSplitting(t) for t in tails[0]]


def greedy_split(f: GraphMap, p: Sequence[int], inv: UnitInventory | None = None) -> CompleteSplitting | None:
    """Left-to-right depth-first parse trying longer units first."""
    inv = inv or build_inventory(f)
    p = tuple(p)

    def go(i, prev):
        if i == len(p):
            return ()
        for u in sorted(match_units(f, p, i, inv), key=lambda u: -len(u.path)):
            if prev is not None and not _junction_ok(f, prev, u):
                continue
            rest = go(u.end, u)
            if rest is not None:
                return (u,) + rest
        return None

    units = go(0, None) if p else None
    return CompleteSplitting(units) if units else None


def complete_split(f: GraphMap, p: Sequence[int], inv: UnitInventory | None = None) -> CompleteSplitting:
    inv = inv or build_inventory(f)
    parses = all_splittings(f, p, inv)
    if not parses:
        raise NotCompletelySplit(f"{f.fmt(p)} has no complete splitting")
    if len(parses) > 1:
        raise NotCompletelySplit(f"{f.fmt(p)} has {len(parses)} competing splittings")
    return parses[0]


@dataclass
class Verdict:
    status: str                  # pass | fail | partially-checked
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "fail"


def check_completely_split_map(f: GraphMap, inv: UnitInventory | None = None) -> Verdict:
    inv = inv or build_inventory(f)
    bad = []
    for info in f.strata_info:
        if info.kind == "zero":
            continue
        for e in info.edges:
            try:
                complete_split(f, f.image(e), inv)
            except NotCompletelySplit as exc:
                bad.append(f"f({f.name(e)}): {exc}")
    for sigma in sorted(inv.taken, key=word_key):
        img = f.image_of_path(sigma)
        if not img:
            bad.append(f"taken path {f.fmt(sigma)} has trivial image")
            continue
        try:
            complete_split(f, img, inv)
        except NotCompletelySplit as exc:
            bad.append(f"f_#({f.fmt(sigma)}): {exc}")
    if bad:
        return Verdict("fail", "; ".join(bad))
    if not (inv.taken_complete and inv.inp_complete):
        return Verdict("partially-checked", "unit inventory limited by search bounds")
    return Verdict("pass")


# hard splittings


def verify_hard_splitting(f: GraphMap, p: Sequence[int], cut: int, depth: int = 64,
                          max_len: int = 50000) -> str:
    p = tuple(p)
    left, right = p[:cut], p[cut:]
    if not left or not right:
        return "inconclusive"
    seen = set()
    for _ in range(depth + 1):
        if not left or not right:
            return "inconclusive"
        if left[-1] == -right[0]:
            return "refuted"
        turn = (-left[-1], right[0])
        if turn in seen:
            return "certified"
        seen.add(turn)
        if len(left) + len(right) > max_len:
            return "inconclusive"
        left, right = f.image_of_path(left), f.image_of_path(right)
    return "inconclusive"


# folding iNps


@dataclass
class FoldRecord:
    kinds: list[str]
    periodic: bool
    steps: int


def _state_key(f: GraphMap, rho: NielsenPath) -> tuple:
    """Relabelling-invariant key of (f restricted to G_r, rho)."""
    Gr = f.filtration_element(rho.height)
    label: dict[int, int] = {}
    order: list[int] = []

    def visit(path):
        for e in path:
            if abs(e) not in label:
                label[abs(e)] = len(order) + 1 if e > 0 else -(len(order) + 1)
                order.append(abs(e))

    visit(rho.path)
    i = 0
    while i < len(order):
        visit(f.image(order[i]))
        i += 1

    def rl(path):
        return tuple((1 if e > 0 else -1) * label[abs(e)] for e in path)

    imgs = tuple(rl(f.image(e if label[e] > 0 else -e)) for e in order if e in Gr)
    return (rl(rho.path), imgs, len(Gr) - len([e for e in order if e in Gr]))


def iterate_extended_folds(f: GraphMap, rho: NielsenPath, budget: int = 200) -> FoldRecord:
    from .moves import MoveError, extended_fold

    kinds: list[str] = []
    seen = {_state_key(f, rho): 0}
    g, r = f, rho
    for step in range(1, budget + 1):
        try:
            res, kind, r2 = extended_fold(g, r)
        except MoveError as exc:
            kinds.append(f"error: {exc}")
            return FoldRecord(kinds, False, step)
        kinds.append(kind)
        if res is None:
            return FoldRecord(kinds, False, step)
        g, r = res.new_map, r2
        key = _state_key(g, r)
        if key in seen:
            return FoldRecord(kinds, True, step)
        seen[key] = step
    return FoldRecord(kinds, False, budget)


# filtration data


def free_factor_system(f: GraphMap, edges) -> tuple:
    """Conjugacy data of the free factor system of a subgraph (core forms of its components)."""
    G = f.graph
    forms = []
    for vs, es in G.components(edges, set()):
        if len(es) < len(vs):
            continue
        root_v = min(vs)
        tree = spanning_tree(G, root_v, es)
        tree_edges = {abs(e) for path in tree.values() for e in path}
        gens = []
        for e in sorted(es):
            if e in tree_edges:
                continue
            loop = tree[G.origin(e)] + (e,) + inverse(tree[G.terminus(e)])
            gens.append(f.domain.read(_tight(loop)))
        forms.append(subgroup_core_form(gens))
    return tuple(sorted(forms))


@dataclass
class CTReport:
    properties: dict[str, Verdict]
    notes: list[str] = field(default_factory=list)

    ORDER = ("Rotationless", "Completely Split", "Filtration", "Vertices", "Periodic Edges",
             "Zero Strata", "Linear Edges", "NEG Nielsen Paths", "EG Nielsen Paths")

    @property
    def passed(self) -> bool:
        return all(v.status == "pass" for v in self.properties.values())

    @property
    def failed(self) -> bool:
        return any(v.status == "fail" for v in self.properties.values())

    def lines(self) -> list[str]:
        out = []
        for name in self.ORDER:
            v = self.properties[name]
            out.append(f"({name}) {v.status}" + (f": {v.detail}" if v.detail else ""))
        return out


def _filtration_verdict(f: GraphMap, ffs_candidates=None) -> Verdict:
    G = f.graph
    elems = [f.filtration_element(r) for r in range(len(f.strata) + 1)]
    bad = []
    for r in range(1, len(elems)):
        core = core_subgraph(G, elems[r])
        if core not in elems:
            bad.append(f"core of G_{r} is not a filtration element")
    if bad:
        return Verdict("fail", "; ".join(bad))
    note = "core clause checked; reduced clause "
    if ffs_candidates:
        systems = [free_factor_system(f, e) for e in elems]
        for i, cand in enumerate(ffs_candidates):
            form = tuple(sorted(subgroup_core_form(c) for c in cand))
            for r in range(1, len(systems)):
                if _ffs_between(systems[r - 1], form, systems[r]) and form not in (systems[r - 1], systems[r]):
                    return Verdict("fail", f"candidate {i + 1} sits strictly between F(G_{r - 1}) and F(G_{r})")
        note += f"checked against {len(ffs_candidates)} candidate(s) only"
    else:
        note += "not checked (no candidates supplied)"
    return Verdict("partially-checked", note)


def _ffs_between(lo, mid, hi) -> bool:
    # crude containment on core forms: only equal components are recognized
    return set(lo) <= set(mid) <= set(hi) and len(mid) >= len(lo)


def _vertices_verdict(f: GraphMap, inps: list[NielsenPath], principal: set[str], inp_bound: int) -> Verdict:
    from .moves import MoveError, subdivide_periodic

    G = f.graph
    bad = []
    for np_ in inps:
        for v in (G.path_origin(np_.path), G.path_terminus(np_.path)):
            if v not in principal:
                bad.append(f"iNp {f.fmt(np_.path)} ends at non-principal {v}")
    for info in f.strata_info:
        if info.is_neg and not info.normal_form:
            bad.append(f"NEG stratum {info.index} is not in the normal form f(E) = E u")
        elif info.is_neg and info.kind not in ("NEG-fixed", "NEG-periodic"):
            for e in info.edges:
                E = info.oriented[e]
                t = G.terminus(E)
                if t not in principal or f.vertex_images[t] != t:
                    bad.append(f"terminal vertex {t} of NEG edge {f.name(E)} is not principal")
    # interior fixed points that are iNp endpoints
    try:
        sub = subdivide_periodic(f)
    except MoveError as exc:
        return Verdict("partially-checked", f"interior fixed points not examined: {exc}")
    g = sub.new_map
    new_vertices = set(g.graph.vertices) - set(G.vertices)
    if new_vertices:
        from .nielsen import nielsen_paths
        for np_ in nielsen_paths(g, 1, inp_bound):
            if len(np_.path) == 1 and g.image(np_.path[0]) == np_.path:
                continue
            ends = {g.graph.path_origin(np_.path), g.graph.path_terminus(np_.path)}
            if ends & new_vertices:
                bad.append(f"Nielsen path {g.fmt(np_.path)} ends at an interior point of an edge")
    return Verdict("fail", "; ".join(bad)) if bad else Verdict("pass")


def _periodic_edges_verdict(f: GraphMap, principal: set[str]) -> Verdict:
    G = f.graph
    bad = []
    for info in f.strata_info:
        if info.kind == "NEG-periodic":
            bad.append(f"stratum {info.index} is periodic but not fixed")
        if info.kind != "NEG-fixed":
            continue
        for e in info.edges:
            for v in G.endpoints()[e]:
                if v not in principal:
                    bad.append(f"fixed edge {f.name(e)} has non-principal endpoint {v}")
            if len(info.edges) == 1 and not G.is_loop(e):
                lower = f.filtration_element(info.index - 1)
                if core_subgraph(G, lower) != lower:
                    bad.append(f"G_{info.index - 1} is not a core graph")
                lv = {v for x in lower for v in G.endpoints()[x]}
                if not set(G.endpoints()[e]) <= lv:
                    bad.append(f"fixed edge {f.name(e)} has an end outside G_{info.index - 1}")
    return Verdict("fail", "; ".join(bad)) if bad else Verdict("pass")


def _zero_strata_verdict(f: GraphMap, inv: UnitInventory) -> Verdict:
    G = f.graph
    bad = []
    infos = f.strata_info
    for info in infos:
        if info.kind != "zero":
            continue
        i = info.index
        r = next((s.index for s in infos[i:] if s.kind == "EG"), None)
        if r is None:
            bad.append(f"zero stratum {i} lies below no EG stratum")
            continue
        between = infos[i - 1:r - 1]
        lower = f.filtration_element(r - 1)
        comps = {frozenset(es) for _, es in G.components(lower, set())}
        Gr = f.filtration_element(r)
        for s in between:
            if s.kind != "zero" or frozenset(s.edges) not in comps:
                bad.append(f"stratum {s.index} breaks the envelope of H_{r}")
        for vs, es in G.components(Gr, set()):
            if len(es) < len(vs):
                bad.append(f"G_{r} has a contractible component")
        Hr = f.strata[r - 1]
        Hr_verts = {v for e in Hr for v in G.endpoints()[e]}
        Hi_verts = {v for e in info.edges for v in G.endpoints()[e]}
        for v in sorted(Hi_verts):
            if v not in Hr_verts:
                bad.append(f"vertex {v} of H_{i} is not in H_{r}")
            if any(abs(d) not in Hr and abs(d) not in info.edges for d in G.directions(v)):
                bad.append(f"link of {v} leaves H_{i} and H_{r}")
            if sum(1 for d in G.directions(v) if abs(d) in Gr) < 2:
                bad.append(f"vertex {v} has valence one in G_{r}")
        taken_edges = {abs(e) for path in inv.taken for e in path}
        for e in info.edges:
            if e not in taken_edges:
                bad.append(f"edge {f.name(e)} is not taken")
    if bad:
        return Verdict("fail", "; ".join(sorted(set(bad))))
    if not inv.taken_complete:
        return Verdict("partially-checked", "taken-path inventory truncated")
    return Verdict("pass")


def _linear_verdict(f: GraphMap) -> Verdict:
    bad = []
    lin = [s for s in f.strata_info if s.kind == "NEG-linear"]
    for i, a in enumerate(lin):
        for b in lin[i + 1:]:
            if a.axis == b.axis:
                # reversing an edge inverts its root and negates its exponent
                eb = b.exponent if b.root_path == a.root_path else -b.exponent
                if b.root_path not in (a.root_path, inverse(a.root_path)):
                    bad.append(f"linear edges {f.name(a.edges[0])}, {f.name(b.edges[0])} have different roots for one axis")
                elif a.exponent == eb:
                    bad.append(f"linear edges {f.name(a.edges[0])}, {f.name(b.edges[0])} share exponent {a.exponent}")
    return Verdict("fail", "; ".join(bad)) if bad else Verdict("pass")


def _neg_nielsen_verdict(f: GraphMap) -> Verdict:
    bad = []
    for p in neg_connectors(f):
        bad.append(f"Nielsen path {f.fmt(p)} of NEG height is not of the form E w^k E-bar")
    if bad:
        return Verdict("fail", "; ".join(bad))
    return Verdict("pass", "NEG Nielsen paths searched through suffix fixed points")


def eg_nielsen_verdict(f: GraphMap, inp_bound: int = 200, fold_budget: int = 200) -> tuple[Verdict, dict]:
    records = {}
    bad = []
    partial = []
    for r, res in all_eg_inps(f, inp_bound).items():
        if not res.complete:
            partial.append(f"iNp search for H_{r} hit its bound")
        for np_ in res.paths:
            if np_.period != 1:
                continue
            rec = iterate_extended_folds(f, np_, fold_budget)
            records[np_.path] = rec
            if any(k != "proper-full" for k in rec.kinds):
                bad.append(f"iNp {f.fmt(np_.path)}: fold sequence {rec.kinds}")
            elif not rec.periodic:
                partial.append(f"iNp {f.fmt(np_.path)}: fold budget exhausted before a repeat")
    if bad:
        return Verdict("fail", "; ".join(bad)), records
    if partial:
        return Verdict("partially-checked", "; ".join(partial)), records
    return Verdict("pass"), records


def check_ct(f: GraphMap, ffs_candidates=None, inp_bound: int = 200) -> CTReport:
    props: dict[str, Verdict] = {}
    notes = []
    rtt = check_rtt(f)
    if not rtt.passed:
        notes.append("not a relative train track map: " + "; ".join(w for _, _, w in rtt.failures()))
    report = principal_points(f, inp_bound)
    rot = is_rotationless(f, report)
    props["Rotationless"] = Verdict("pass") if rot else Verdict("fail", rot.witness or "")
    inv = build_inventory(f, inp_bound)
    props["Completely Split"] = check_completely_split_map(f, inv)
    props["Filtration"] = _filtration_verdict(f, ffs_candidates)
    principal = set(report.principal())
    inps = [np_ for res in all_eg_inps(f, inp_bound).values() for np_ in res.paths]
    props["Vertices"] = _vertices_verdict(f, inps, principal, inp_bound)
    props["Periodic Edges"] = _periodic_edges_verdict(f, principal)
    props["Zero Strata"] = _zero_strata_verdict(f, inv)
    props["Linear Edges"] = _linear_verdict(f)
    props["NEG Nielsen Paths"] = _neg_nielsen_verdict(f)
    props["EG Nielsen Paths"], _ = eg_nielsen_verdict(f, inp_bound)
    return CTReport(props, notes)
