"""Budgeted pipelines toward relative train track and CT form.

Both pipelines apply moves from ``moves`` one at a time, re-checking the
target properties after every step.  Success is declared only by the
independent checkers (``check_rtt``, the property checks below and
``check_ct``), never by the pipeline itself.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .ct import CTReport, Verdict, check_ct, free_factor_system
from .graph_map import GraphMap, check_rtt
from .marked_graph import Path, core_subgraph
from .moves import (
    MoveError, MoveResult, collapse, elementary_fold, identity_move, periodic_points, point_orbit,
    slide, subdivide, subdivide_periodic, tree_replacement, valence_two_homotopy,
)
from .nielsen import is_rotationless, nielsen_paths, periodic_exponent, principal_points

RTT_PROPERTIES = ("RTT", "(V)", "(P)", "(Z)", "(NEG)", "(F)")


class NotRotationlessError(MoveError):
    pass


@dataclass
class PipelineResult:
    success: bool
    new_map: GraphMap
    move: MoveResult
    certificate: dict[str, Verdict]
    blocked: str | None = None
    steps: int = 0
    ct_report: CTReport | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def log(self) -> list[str]:
        return self.move.log

    def lines(self) -> list[str]:
        out = [f"{name} {v.status}" + (f": {v.detail}" if v.detail else "") for name, v in self.certificate.items()]
        if self.ct_report is not None:
            out += self.ct_report.lines()
        out.append(f"steps {self.steps}")
        if self.blocked:
            out.append(f"blocked: {self.blocked}")
        return out


# property checks


def _verdict(bad: list[str], partial: str | None = None) -> Verdict:
    if bad:
        return Verdict("fail", "; ".join(bad))
    if partial:
        return Verdict("partially-checked", partial)
    return Verdict("pass")


def check_V(f: GraphMap, inp_bound: int = 200, max_period: int = 6) -> Verdict:
    """Endpoints of periodic iNps are vertices (searched after subdividing at periodic points)."""
    K = periodic_exponent(f)
    if K > max_period:
        return Verdict("partially-checked", f"periodic exponent {K} exceeds {max_period}")
    try:
        h = subdivide_periodic(f, K).new_map
    except MoveError as exc:
        return Verdict("partially-checked", str(exc))
    new = set(h.graph.vertices) - set(f.graph.vertices)
    if not new:
        return Verdict("pass")
    bad = []
    for np_ in nielsen_paths(h, K, inp_bound):
        if len(np_.path) == 1 and h.iterate_image(np_.path, K) == np_.path:
            continue
        if {h.graph.path_origin(np_.path), h.graph.path_terminus(np_.path)} & new:
            bad.append(f"Nielsen path {h.fmt(np_.path)} ends inside an edge")
    return _verdict(bad)


def _periodic_edges(f: GraphMap) -> set[int]:
    out = set()
    for e in f.graph.edges:
        x = e
        for _ in range(len(f.graph.edges)):
            img = f.image(x)
            if len(img) != 1:
                break
            x = img[0]
            if x == e:
                out.add(e)
                break
    return out


def check_P(f: GraphMap) -> Verdict:
    G = f.graph
    per = _periodic_edges(f)
    N = len(f.strata)
    elems = [f.filtration_element(j) for j in range(N + 1)]
    systems = [free_factor_system(f, e) for e in elems]
    bad = []
    for m, H in enumerate(f.strata, start=1):
        if not H <= per or not _is_forest(G, H):
            continue
        unions = {free_factor_system(f, elems[l] | H) for l in range(N + 1)}
        if all(systems[j] in unions for j in range(N + 1)):
            bad.append(f"periodic forest stratum {m} is invisible to every filtration element")
    return _verdict(bad)


def _is_forest(G, edges) -> bool:
    from .marked_graph import is_forest
    return is_forest(G, edges)


def check_Z(f: GraphMap) -> Verdict:
    G = f.graph
    infos = f.strata_info
    bad = []
    for info in infos:
        if info.kind != "zero":
            continue
        i = info.index
        r = next((s.index for s in infos[i:] if s.kind != "zero"), None)
        if r is None or infos[r - 1].kind != "EG":
            bad.append(f"zero stratum {i} is not enveloped by an EG stratum")
            continue
        Hr = f.strata[r - 1]
        Hr_verts = {v for e in Hr for v in G.endpoints()[e]}
        for v in sorted({v for e in info.edges for v in G.endpoints()[e]}):
            if v not in Hr_verts:
                bad.append(f"vertex {v} of zero stratum {i} is not in H_{r}")
            elif any(abs(d) not in Hr and abs(d) not in info.edges for d in G.directions(v)):
                bad.append(f"link of {v} leaves H_{i} and H_{r}")
    return _verdict(bad)


def check_NEG(f: GraphMap) -> Verdict:
    G = f.graph
    bad = []
    for info in f.strata_info:
        if not info.is_neg or info.kind in ("NEG-fixed", "NEG-periodic"):
            continue
        if not info.normal_form:
            bad.append(f"NEG stratum {info.index} is not of the form f(E_i) = E_(i+1) u_i")
            continue
        for e in info.edges:
            t = G.terminus(info.oriented[e])
            if f.vertex_periods[t] is None:
                bad.append(f"terminal vertex {t} of {f.name(info.oriented[e])} is not periodic")
                continue
            ok = False
            for j in range(1, info.index):
                Gj = f.filtration_element(j)
                if t in {v for x in Gj for v in G.endpoints()[x]} and core_subgraph(G, Gj) == Gj:
                    ok = True
                    break
            if not ok:
                bad.append(f"terminal vertex {t} of {f.name(info.oriented[e])} lies in no lower core filtration element")
    return _verdict(bad)


def check_F(f: GraphMap) -> Verdict:
    elems = [f.filtration_element(j) for j in range(len(f.strata) + 1)]
    bad = [f"core of G_{r} is not a filtration element"
           for r in range(1, len(elems)) if core_subgraph(f.graph, elems[r]) not in elems]
    return _verdict(bad)


def rtt_certificate(f: GraphMap, inp_bound: int = 200) -> dict[str, Verdict]:
    rep = check_rtt(f)
    cert = {"RTT": Verdict("pass") if rep.passed else Verdict("fail", "; ".join(
        f"stratum {r} {n}: {w}" for r, n, w in rep.failures()))}
    cert["(V)"] = check_V(f, inp_bound)
    cert["(P)"] = check_P(f)
    cert["(Z)"] = check_Z(f)
    cert["(NEG)"] = check_NEG(f)
    cert["(F)"] = check_F(f)
    return cert


def _quick_failures(f: GraphMap, inp_bound: int) -> list[str]:
    """Failing properties, cheapest checks first; (V) runs only when the rest pass."""
    out = [] if check_rtt(f).passed else ["RTT"]
    for name, check in (("(P)", check_P), ("(Z)", check_Z), ("(NEG)", check_NEG), ("(F)", check_F)):
        if check(f).status == "fail":
            out.append(name)
    if not out and check_V(f, inp_bound).status == "fail":
        out.append("(V)")
    return out


# repairs; each returns a MoveResult or None when it does not apply


def _split_neg(f: GraphMap) -> MoveResult | None:
    for info in f.strata_info:
        if info.is_neg and not info.normal_form:
            pts = [pt for pt in periodic_points(f, info.period) if pt[0] in info.edges]
            closed = set()
            for pt in pts:
                closed.update(point_orbit(f, pt))
            if closed:
                return subdivide(f, sorted(closed))
    return None


def _valence_one(f: GraphMap) -> MoveResult | None:
    G = f.graph
    for v in sorted(G.vertices):
        dirs = G.directions(v)
        if len(dirs) == 1 and len(G.vertices) > 1:
            return collapse(f, [abs(dirs[0])])
    return None


def _fold_illegal(f: GraphMap) -> MoveResult | None:
    for r in f.eg_strata():
        for e in sorted(f.strata[r - 1]):
            img = f.image(e)
            for i in f.illegal_turns(img, r):
                d1, d2 = -img[i - 1], img[i]
                a, b = d1, d2
                # fold where Df first identifies the two directions
                for _ in range(len(f.graph.edges) * 2 + 2):
                    na, nb = f.derivative(a), f.derivative(b)
                    if na == nb:
                        break
                    a, b = na, nb
                else:
                    continue
                if a == b:
                    continue
                try:
                    return elementary_fold(f, a, b)
                except MoveError:
                    continue
    return None


def _fix_rtt_i(f: GraphMap) -> MoveResult | None:
    from fractions import Fraction
    for r in f.eg_strata():
        H = f.strata[r - 1]
        for e in sorted(H):
            for d in (e, -e):
                img = f.image(d)
                if img and abs(img[0]) not in H:
                    c = next((k for k, x in enumerate(img) if abs(x) in H), None)
                    if c:
                        return subdivide(f, [(d, Fraction(c, len(img)))])
    return None


def _bfs_path(f: GraphMap, start: str, edges, targets) -> Path | None:
    G = f.graph
    prev: dict[str, tuple[str, int] | None] = {start: None}
    q = deque([start])
    while q:
        v = q.popleft()
        if v in targets and v != start:
            out = []
            while prev[v] is not None:
                u, d = prev[v]
                out.append(d)
                v = u
            return tuple(reversed(out))
        for d in G.directions(v):
            if abs(d) in edges and G.terminus(d) not in prev:
                prev[G.terminus(d)] = (v, d)
                q.append(G.terminus(d))
    return None


def _weak_neg(f: GraphMap) -> MoveResult | None:
    G = f.graph
    for info in f.strata_info:
        if not info.is_neg or not info.normal_form or info.kind in ("NEG-fixed", "NEG-periodic"):
            continue
        for e in info.edges:
            E = info.oriented[e]
            v = G.terminus(E)
            if f.vertex_periods[v] is not None:
                continue
            if G.valence(v) == 2 and v != f.domain.marking.base:
                try:
                    return valence_two_homotopy(f, v, keep=abs(E))
                except MoveError:
                    pass
            lower = f.filtration_element(info.index - 1)
            targets = {w for w, p in f.vertex_periods.items() if p is not None}
            tau = _bfs_path(f, v, lower, targets)
            if tau:
                try:
                    return slide(f, E, tau)
                except MoveError:
                    pass
    return None


def _tree_replace(f: GraphMap) -> MoveResult | None:
    G = f.graph
    infos = f.strata_info
    for info in infos:
        if info.kind != "zero":
            continue
        i = info.index
        r = next((s.index for s in infos[i:] if s.kind == "EG"), None)
        if r is None:
            continue
        Hr_verts = {v for e in f.strata[r - 1] for v in G.endpoints()[e]}
        Hi_verts = {v for e in info.edges for v in G.endpoints()[e]}
        if Hi_verts <= Hr_verts:
            continue
        tree = []
        n = 0
        for vs, _ in G.components(info.edges):
            att = sorted(vs & Hr_verts)
            for a, b in zip(att, att[1:]):
                n += 1
                tree.append((f"{G.names[min(info.edges)]}_t{n}", a, b))
        try:
            return tree_replacement(f, i, tree)
        except MoveError:
            continue
    return None


def _collapse_p(f: GraphMap) -> MoveResult | None:
    if check_P(f).status != "fail":
        return None
    G = f.graph
    per = _periodic_edges(f)
    for H in f.strata:
        if H <= per and _is_forest(G, H):
            Y = set()
            changed = True
            while changed:
                changed = False
                for e in G.edges:
                    if e in H or e in Y:
                        continue
                    if all(abs(a) in H or abs(a) in Y for a in f.image(e)):
                        Y.add(e)
                        changed = True
            forest = set(H) | Y
            if _is_forest(G, forest):
                try:
                    return collapse(f, forest)
                except MoveError:
                    continue
    return None


def _reorder_f(f: GraphMap) -> GraphMap | None:
    """Move strata up (respecting invariance) until cores of filtration elements are filtration elements."""
    if check_F(f).status != "fail":
        return None
    strata = list(f.strata)

    def crosses(hi, lo):
        return any(abs(a) in lo for e in hi for a in f.image(e))

    def bad_count(order):
        g = f.with_strata(order)
        return len(check_F(g).detail.split(";")) if check_F(g).status == "fail" else 0

    best = bad_count(strata)
    for k in range(len(strata) - 1):
        for m in range(k + 1, len(strata)):
            if any(crosses(strata[j], strata[k]) for j in range(k + 1, m + 1)):
                break
            order = strata[:k] + strata[k + 1:m + 1] + [strata[k]] + strata[m + 1:]
            c = bad_count(order)
            if c < best:
                return f.with_strata(order)
    return None


def _subdivide_v(f: GraphMap) -> MoveResult | None:
    if check_V(f).status != "fail":
        return None
    K = periodic_exponent(f)
    return subdivide_periodic(f, K)


REPAIRS = (
    ("NEG normal form", _split_neg),
    ("valence one", _valence_one),
    ("RTT-i", _fix_rtt_i),
    ("fold", _fold_illegal),
    ("weak NEG", _weak_neg),
    ("tree replacement", _tree_replace),
    ("(P)", _collapse_p),
    ("(V)", _subdivide_v),
)


def make_rtt(f: GraphMap, budget: int = 10_000, inp_bound: int = 200) -> PipelineResult:
    """Best-effort relative train track with properties (V), (P), (Z), (NEG), (F)."""
    total = identity_move(f, "start")
    total.log.clear()
    steps = 0
    seen = set()
    # repairs can subdivide without end (RTT-i cuts spawning new zero strata); stop instead
    size_cap = max(3 * f.rank, len(f.graph.edges)) + 4
    while True:
        failing = _quick_failures(f, inp_bound)
        cert = rtt_certificate(f, inp_bound) if not failing or steps >= budget else {}
        failing = failing or [k for k, v in cert.items() if v.status == "fail"]
        if not failing:
            return PipelineResult(True, f, total, cert, None, steps)
        if steps >= budget:
            return PipelineResult(False, f, total, cert, f"budget exhausted with {', '.join(failing)} failing", steps)
        key = _map_key(f)
        if key in seen:
            return PipelineResult(False, f, total, rtt_certificate(f, inp_bound),
                                  f"repairs cycle; {', '.join(failing)} failing", steps)
        if len(f.graph.edges) > size_cap:
            return PipelineResult(False, f, total, rtt_certificate(f, inp_bound),
                                  f"graph grew past {size_cap} edges; {', '.join(failing)} failing", steps)
        seen.add(key)
        reordered = _reorder_f(f) if "(F)" in failing else None
        if reordered is not None:
            f = reordered
            total.log.append("reorder strata")
            steps += 1
            continue
        for _, repair in REPAIRS:
            try:
                res = repair(f)
            except MoveError:
                res = None
            if res is not None and res.new_map is not f:
                total = total.then(res)
                f = res.new_map
                steps += 1
                break
        else:
            return PipelineResult(False, f, total, rtt_certificate(f, inp_bound), "no repair applies; failing: " + ", ".join(failing), steps)


def _map_key(f: GraphMap) -> tuple:
    G = f.graph
    return (tuple(sorted(G.vertices)), tuple(sorted(G.endpoints().items())),
            tuple(sorted(f.images().items())), tuple(tuple(sorted(s)) for s in f.strata))


# CT pipeline


def _principal_slide(f: GraphMap, report: CTReport) -> MoveResult | None:
    """Slide a NEG edge whose terminal vertex is not principal to a principal vertex."""
    G = f.graph
    principal = set(principal_points(f).principal())
    for info in f.strata_info:
        if not info.is_neg or not info.normal_form or info.kind in ("NEG-fixed", "NEG-periodic"):
            continue
        for e in info.edges:
            E = info.oriented[e]
            t = G.terminus(E)
            if t in principal and f.vertex_images[t] == t:
                continue
            tau = _bfs_path(f, t, f.filtration_element(info.index - 1), principal)
            if tau:
                try:
                    return slide(f, E, tau)
                except MoveError:
                    continue
    return None


def _interior_endpoints(f: GraphMap, report: CTReport) -> MoveResult | None:
    v = report.properties["Vertices"]
    if v.status == "fail" and "interior point" in v.detail:
        return subdivide_periodic(f)
    return None


def _neg_split(f: GraphMap, report: CTReport) -> MoveResult | None:
    return _split_neg(f)


def _drop_valence_two(f: GraphMap, report: CTReport) -> MoveResult | None:
    principal = set(principal_points(f).principal())
    for v in sorted(f.graph.vertices):
        if f.graph.valence(v) == 2 and v not in principal and len(f.graph.vertices) > 1:
            for keep in sorted({abs(d) for d in f.graph.directions(v)}):
                try:
                    return valence_two_homotopy(f, v, keep=keep)
                except MoveError:
                    continue
    return None


def _linear_slide(f: GraphMap, report: CTReport) -> MoveResult | None:
    """Two linear edges with one root and one exponent: slide one along the other, making it fixed."""
    if report.properties["Linear Edges"].status != "fail":
        return None
    G = f.graph
    lin = [s for s in f.strata_info if s.kind == "NEG-linear"]
    for i, a in enumerate(lin):
        for b in lin[i + 1:]:
            if a.axis != b.axis or a.exponent != b.exponent or a.root_path != b.root_path:
                continue
            Ea, Eb = a.oriented[a.edges[0]], b.oriented[b.edges[0]]
            if G.terminus(Ea) != G.terminus(Eb):
                continue
            try:
                return slide(f, Eb, (-Ea,))
            except MoveError:
                continue
    return None


CT_REPAIRS = (
    ("NEG normal form", _neg_split),
    ("interior Nielsen endpoints", _interior_endpoints),
    ("principal slide", _principal_slide),
    ("valence two", _drop_valence_two),
    ("linear slide", _linear_slide),
)


def make_ct(f: GraphMap, budget: int = 10_000, inp_bound: int = 200, ffs_candidates=None) -> PipelineResult:
    """Best-effort CT.  Acceptance is by ``check_ct`` on the output, reported alongside."""
    rot = is_rotationless(f)
    if not rot:
        raise NotRotationlessError(f"not rotationless: {rot.witness}")
    res = make_rtt(f, budget, inp_bound)
    g, total, steps = res.new_map, res.move, res.steps
    seen = set()
    while True:
        if not res.success:
            # a CT is in particular an RTT with (V), (P), (Z), (NEG), (F); CT repairs cannot rescue that stage
            return PipelineResult(False, g, total, res.certificate, f"RTT stage: {res.blocked}", steps,
                                  check_ct(g, ffs_candidates, inp_bound))
        report = check_ct(g, ffs_candidates, inp_bound)
        if not report.failed:
            return PipelineResult(True, g, total, res.certificate, None, steps, report)
        failing = [k for k, v in report.properties.items() if v.status == "fail"]
        if steps >= budget:
            return PipelineResult(False, g, total, res.certificate, "budget exhausted; failing: " + ", ".join(failing),
                                  steps, report)
        key = _map_key(g)
        if key in seen or len(g.graph.edges) > max(3 * g.rank, len(f.graph.edges)) + 4:
            break
        seen.add(key)
        for _, repair in CT_REPAIRS:
            try:
                mv = repair(g, report)
            except MoveError:
                mv = None
            if mv is not None and mv.new_map is not g and is_rotationless(mv.new_map):
                total = total.then(mv)
                g = mv.new_map
                steps += 1
                break
        else:
            break
        res = make_rtt(g, budget - steps, inp_bound)
        g, total, steps = res.new_map, total.then(res.move), steps + res.steps
    return PipelineResult(False, g, total, res.certificate, "no CT repair applies; failing: " + ", ".join(failing),
                          steps, report)
