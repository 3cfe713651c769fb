import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from traintrack.fixtures import fixture, random_positive_map
from traintrack.free_group import inner_difference
from traintrack.mapfile import parse_map_file
from traintrack.moves import (
    MoveError, change_marking_via_restriction, elementary_fold, extended_fold, fold_type,
    periodic_points, slide, subdivide, subdivide_periodic, tree_replacement, valence_two_homotopy,
)
from traintrack.nielsen import find_eg_inps

from movesuite import applicable_moves

A, B, C = 1, 2, 3


def named(f):
    return {f.graph.names[e]: f.fmt(f.image(e)) for e in f.graph.edges}


def same_class(f, g):
    return inner_difference(f.automorphism.images, g.automorphism.images) is not None


def test_subdivide_F1_at_fixed_point():
    f = fixture("F1")
    assert periodic_points(f) == [(C, Fraction(1, 3))]
    g = subdivide(f, [(C, Fraction(1, 3))]).new_map
    (x,) = set(g.graph.vertices) - set(f.graph.vertices)
    assert g.graph.valence(x) == 2
    assert g.vertex_images[x] == x
    assert same_class(f, g)


def test_subdivide_nothing_is_identity():
    f = fixture("F3")
    g = subdivide(f, []).new_map
    assert g.images() == f.images()


def test_fold_guards():
    f = fixture("F3")
    with pytest.raises(MoveError):
        elementary_fold(f, B, B)
    with pytest.raises(MoveError):
        elementary_fold(f, A, -A)   # images start with A and A', no common prefix


def test_fold_preserves_class_and_rank():
    f = fixture("F3")
    res = elementary_fold(f, -B, -C)   # f(B') = A' B', f(C') = A' B' C'
    g = res.new_map
    assert same_class(f, g)
    assert g.graph.betti() == 3


def test_slide_examples():
    f5 = fixture("F5")
    assert slide(f5, C, ()).new_map.images() == f5.images()
    g = slide(f5, C, (A,)).new_map
    assert g.fmt(g.image(C)) == "C A A"
    f1 = slide(fixture("F1"), B, (A,)).new_map
    assert f1.fmt(f1.image(B)) == "B A"
    with pytest.raises(MoveError):
        slide(f5, A, (B,))


def test_valence_two_round_trip():
    f = fixture("F1")
    sub = subdivide_periodic(f)
    g = sub.new_map
    (x,) = set(g.graph.vertices) - set(f.graph.vertices)
    back = valence_two_homotopy(g, x, name="C").new_map
    assert back.fmt(back.image(back.graph.edge("C"))) == "B C B B"
    assert named(back) == named(f)
    with pytest.raises(MoveError):
        valence_two_homotopy(f, "v")


def test_tree_replacement_examples():
    z = fixture("Z")
    r = next(s.index for s in z.strata_info if s.kind == "zero")
    same = tree_replacement(z, r, [("Z1", "v", "u"), ("Z2", "u", "w")]).new_map
    assert named(same) == named(z)
    other = tree_replacement(z, r, [("Y1", "v", "w"), ("Y2", "w", "u")]).new_map
    assert same_class(z, other)
    assert other.graph.betti() == 3
    with pytest.raises(MoveError):
        tree_replacement(z, r, [("Y1", "v", "w"), ("Y2", "w", "u"), ("Y3", "u", "v")])


def test_change_marking_examples():
    f1 = fixture("F1")
    assert change_marking_via_restriction(f1, 0).new_map.images() == f1.images()
    assert change_marking_via_restriction(f1, 1).new_map.images() == f1.images()
    f5 = fixture("F5")
    assert change_marking_via_restriction(f5, 1).new_map.images() == f5.images()


LOWER = parse_map_file("auto { A -> A B ; B -> B A B ; C -> C A }")


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_change_marking_intertwines(seed):
    rng = random.Random(seed)
    f = LOWER
    j = 1
    res = change_marking_via_restriction(f, j)
    g = res.new_map
    p = []
    while len(p) < rng.randint(1, 6):
        d = rng.choice([A, -A, B, -B, C, -C])
        if not p or d != -p[-1]:
            p.append(d)
    p = tuple(p)
    for k in (1, 2, 3):
        assert res.forward(f.iterate_image(p, k)) == g.iterate_image(res.forward(p), k)


def test_extended_fold_typing():
    f3 = fixture("F3")
    assert fold_type(f3, B, C) == "partial"          # B A vs C B A
    assert fold_type(f3, -B, -C) == "proper-full"    # A' B' is a prefix of A' B' C'


def _proper_instances(limit=40):
    found = []
    for s in range(limit):
        f = random_positive_map(s, max_rank=3)
        for r in f.eg_strata():
            for rho in find_eg_inps(f, r, 60):
                if rho.period == 1:
                    found.append((f, rho))
    return found


def test_extended_fold_proper_instance():
    seen = set()
    for f, rho in _proper_instances():
        res, kind, rho2 = extended_fold(f, rho)
        seen.add(kind)
        if kind == "proper-full":
            g = res.new_map
            assert g.iterate_image(rho2.path, rho2.period) == rho2.path
            assert same_class(f, g)
    assert "proper-full" in seen


def test_slide_keeps_eg_inp_counts():
    f = parse_map_file("auto { A -> A B ; B -> B A B ; C -> C A B A' B' }")
    info = f.strata_info[-1]
    assert info.kind.startswith("NEG") and info.normal_form
    before = {r: len(find_eg_inps(f, r, 60)) for r in f.eg_strata()}
    g = slide(f, C, (A,)).new_map
    after = {r: len(find_eg_inps(g, r, 60)) for r in g.eg_strata()}
    assert before == after
    assert [len(s) for s in f.strata] == [len(s) for s in g.strata]


@pytest.mark.parametrize("seed", range(25))
def test_random_moves_preserve_class_and_rank(seed):
    f = random_positive_map(seed)
    rng = random.Random(seed)
    for name, res in applicable_moves(f, rng):
        g = res.new_map
        assert same_class(f, g), name
        assert g.graph.betti() == f.graph.betti(), name
