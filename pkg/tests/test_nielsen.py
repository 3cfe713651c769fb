import pytest

from traintrack.fixtures import fixture, random_positive_map
from traintrack.graph_map import power_map, rose_map
from traintrack.nielsen import (
    all_eg_inps, find_eg_inps, find_neg_nielsen_paths, is_rotationless, min_rotationless_exponent,
    nielsen_classes, nielsen_paths, periodic_exponent, principal_points,
)

A, B, C = 1, 2, 3


def test_neg_families():
    f1 = fixture("F1")
    (fam,) = find_neg_nielsen_paths(f1).families
    assert fam.member(1) == (B, A, -B)
    for k in (-2, -1, 1, 3):
        p = fam.member(k)
        assert f1.image_of_path(p) == p
    f5 = fixture("F5")
    fams = find_neg_nielsen_paths(f5).families
    assert sorted(f5.fmt(x.member(1)) for x in fams) == ["B A B'", "C A C'"]
    assert find_neg_nielsen_paths(fixture("F3")).families == []


def test_eg_inps():
    assert all_eg_inps(fixture("F1")) == {}
    f3 = fixture("F3")
    for rho in find_eg_inps(f3, 1, 50):
        assert f3.iterate_image(rho.path, rho.period) == rho.path
        assert len(f3.illegal_turns(rho.path, 1)) == 1
    # F7 carries the commutator as its iNp
    f7 = fixture("F7")
    paths = [f7.fmt(r.path) for r in find_eg_inps(f7, 1, 50)]
    assert len(paths) == 1
    assert sorted(paths[0].split()) == ["A", "A'", "B", "B'"]


def test_nielsen_classes():
    ident = rose_map({"A": "A", "B": "B"})
    assert len(nielsen_classes(ident)) == 1
    cls = nielsen_classes(fixture("F3"))
    assert [c.vertices for c in cls] == [("v",)]


def test_principal_points_rotation_circle():
    # a 3-cycle of edges permuted: a circle component of Per(f) rotated
    from traintrack.mapfile import parse_map_file
    f = parse_map_file("""\
rank 2
generators a b
graph
  vertices p q r
  edge X p q
  edge Y q r
  edge Z r p
  edge L p p
marking
  base p
  forward a : X Y Z
  forward b : L
  backward X : a
  backward Y : 1
  backward Z : 1
  backward L : b
map
  vertex p -> q
  vertex q -> r
  vertex r -> p
  X -> Y
  Y -> Z
  Z -> X
  L -> Y Z L Z' Y'
""")
    rep = principal_points(f)
    assert periodic_exponent(f) == 3
    assert set(rep.vertices) == {"p", "q", "r"}
    assert rep.principal() == []
    assert all("circle" in x.clause for x in rep.vertices.values())


def test_rotationless_verdicts():
    assert is_rotationless(fixture("F1"))
    assert is_rotationless(fixture("F3"))
    v = is_rotationless(fixture("F4"))
    assert not v and "period 2" in v.witness


@pytest.mark.parametrize("name,k", [("F4", 2), ("F1", 1), ("F3", 1), ("F5", 1)])
def test_min_rotationless_exponent(name, k):
    f = fixture(name)
    assert min_rotationless_exponent(f) == k
    assert is_rotationless(power_map(f, k))
    for d in range(1, k):
        if k % d == 0:
            assert not is_rotationless(power_map(f, d))


def test_nielsen_paths_are_fixed(maps):
    for f in maps.values():
        k = periodic_exponent(f)
        ends = set()
        for np_ in nielsen_paths(f, k):
            assert f.iterate_image(np_.path, np_.period) == np_.path
            ends |= {f.graph.path_origin(np_.path), f.graph.path_terminus(np_.path)}
        assert ends <= set(f.graph.vertices)


def test_eg_inp_halves_are_legal():
    for s in range(30):
        f = random_positive_map(s, max_rank=3)
        for r in f.eg_strata():
            for rho in find_eg_inps(f, r, 60):
                assert len(f.illegal_turns(rho.path, r)) == 1
                alpha, beta = rho.halves
                assert not f.illegal_turns(alpha, r) and not f.illegal_turns(beta, r)
