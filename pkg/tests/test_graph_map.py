import random

import numpy as np
from hypothesis import given, settings, strategies as st

from traintrack.free_group import inner_difference
from traintrack.graph_map import (
    build_filtration, check_rtt, gate_partition, periodic_orbit_data, rose_map, transition_matrix,
    turn_legality,
)
from traintrack.perron import charpoly, max_real_root

A, B, C = 1, 2, 3
M3 = [[2, 1, 1], [1, 1, 0], [1, 1, 1]]


def test_iterate_image(F):
    f1 = F("F1")
    assert f1.iterate_image((C,), 0) == (C,)
    # f_#(B C B B) without cancellation on a positive map
    assert f1.iterate_image((C,), 2) == f1.path("B A B C B B B A B A")
    assert F("F4").iterate_image((A,), 2) == (A,)


def test_gates(F):
    f3 = F("F3")
    gates = sorted(sorted(g) for g in gate_partition(f3, "v"))
    assert gates == sorted([[A], [B], [C], sorted([-A, -B, -C])])
    ident = rose_map({"A": "A", "B": "B"})
    assert all(len(g) == 1 for g in gate_partition(ident, "v"))
    f1 = F("F1")
    # f(B') = A' B', so Df(B') = A' and the two share a gate
    assert f1.derivative(-B) == -A and f1.derivative(-A) == -A
    assert f1.same_gate(-A, -B)
    assert not f1.same_gate(A, B)


def test_turn_legality(F):
    f3 = F("F3")
    assert turn_legality(f3, -B, -B) == "illegal"
    assert turn_legality(f3, -B, -C) == "illegal"
    assert turn_legality(f3, -A, B) == "legal"


def test_transition_matrices(F):
    f3 = F("F3")
    assert transition_matrix(f3, 1) == M3
    f1 = F("F1")
    assert transition_matrix(f1, 1) == [[1]]
    z = F("Z")
    zero = next(s for s in z.strata_info if s.kind == "zero")
    assert all(x == 0 for row in zero.matrix for x in row)


def test_classify_strata(F):
    (s,) = F("F3").strata_info
    assert s.kind == "EG"
    assert abs(s.pf.value - max_real_root(charpoly(M3))) < 1e-9
    assert abs(s.pf.value - max(abs(np.linalg.eigvals(np.array(M3))))) < 1e-9
    kinds = [(s.kind, s.edges) for s in F("F1").strata_info]
    assert kinds == [("NEG-fixed", (A,)), ("NEG-linear", (B,)), ("NEG-general", (C,))]
    lin = F("F1").strata_info[1]
    assert lin.root_path == (A,) and lin.exponent == 1
    f5 = F("F5").strata_info
    assert [(s.kind, s.exponent) for s in f5[1:]] == [("NEG-linear", 1), ("NEG-linear", 2)]
    assert f5[1].axis == f5[2].axis


def test_build_filtration(F):
    f1 = F("F1")
    g = build_filtration(f1.with_strata([frozenset(f1.graph.edges)]))
    assert [set(s) for s in g.strata] == [{A}, {B}, {C}]
    assert len(build_filtration(F("F3")).strata) == 1
    ident = rose_map({"A": "A", "B": "B", "C": "C"})
    assert sorted(len(s) for s in build_filtration(ident).strata) == [1, 1, 1]


def test_check_rtt(F):
    assert check_rtt(F("F1")).passed
    rep = check_rtt(F("F3"))
    assert rep.passed and set(rep.strata[1]) == {"RTT-i", "RTT-ii", "RTT-iii"}


def test_periodic_orbit_data(F):
    d4 = periodic_orbit_data(F("F4"))
    assert d4.vertices == {"v": 1}
    assert d4.directions == {A: 2, -A: 2, B: 2, -B: 2}
    d1 = periodic_orbit_data(F("F1"))
    assert d1.directions[A] == d1.directions[-A] == d1.directions[B] == 1
    assert C not in d1.directions
    ident = periodic_orbit_data(rose_map({"A": "A", "B": "B"}))
    assert set(ident.directions.values()) == {1}


def test_df_orbits_cycle_within_bound(maps):
    for f in maps.values():
        n = len(f.graph.all_directions())
        for d, (pre, per) in f.direction_orbits.items():
            assert pre + (per or 0) <= n + 1


def test_eg_vertices_have_two_gates(maps):
    for f in maps.values():
        if not check_rtt(f).passed:
            continue
        for r in f.eg_strata():
            H = f.strata[r - 1]
            Gr = f.filtration_element(r)
            for v in {x for e in H for x in f.graph.endpoints()[e]}:
                dirs = [d for d in f.graph.directions(v) if abs(d) in Gr]
                assert len({min(g) for g in f.gates(v) if set(g) & set(dirs)}) >= 2


def test_eg_iff_irreducible_non_permutation(maps):
    from traintrack.perron import is_irreducible, is_permutation
    for f in maps.values():
        for s in f.strata_info:
            M = [list(r) for r in s.matrix]
            if s.kind == "zero":
                continue
            eg = is_irreducible(M) and not is_permutation(M)
            assert (s.kind == "EG") == eg
            if eg:
                assert max_real_root(charpoly(M)) > 1


@settings(max_examples=60)
@given(st.integers(0, 10**6))
def test_legal_paths_stay_legal_in_F3(seed):
    from traintrack.fixtures import fixture
    f = fixture("F3")
    rng = random.Random(seed)
    dirs = [A, -A, B, -B, C, -C]
    p = [rng.choice(dirs)]
    while len(p) < rng.randint(1, 12):
        options = [d for d in dirs if d != -p[-1] and f.turn_is_legal(-p[-1], d)]
        p.append(rng.choice(options))
    p = tuple(p)
    assert f.is_r_legal(p, 1)
    assert f.is_r_legal(f.image_of_path(p), 1)


def test_iterates_preserve_outer_class(maps):
    for f in maps.values():
        phi = f.automorphism
        fw = f.domain.marking.forward
        for k in (1, 2, 3):
            read = [f.domain.read(f.iterate_image(p, k)) for p in fw]
            assert inner_difference(phi.power(k).images, tuple(read)) is not None
