import pytest

from traintrack.ct import (
    NotCompletelySplit, all_splittings, build_inventory, check_completely_split_map, check_ct,
    complete_split, greedy_split, match_units, verify_hard_splitting,
)
from traintrack.fixtures import fixture
from traintrack.mapfile import parse_map_file
from traintrack.moves import subdivide_periodic
from traintrack.nielsen import find_eg_inps

A, B, C = 1, 2, 3


def kinds(units):
    return sorted((u.kind, len(u.path)) for u in units)


def test_match_units_examples():
    f1 = fixture("F1")
    assert kinds(match_units(f1, (B, A, -B), 0)) == [("edge", 1), ("inp", 3)]
    f5 = fixture("F5")
    units = match_units(f5, (B, A, A, -C), 0)
    assert kinds(units) == [("edge", 1), ("exceptional", 4)]
    (exc,) = [u for u in units if u.kind == "exceptional"]
    assert exc.data[2] == 2
    z = fixture("Z")
    z1, z2 = z.graph.edge("Z1"), z.graph.edge("Z2")
    # Z1 alone occurs in f(D) and is taken; Z2 alone occurs in no iterated image
    assert any(u.kind == "taken" for u in match_units(z, (z1,), 0))
    assert all(u.kind != "taken" for u in match_units(z, (z2,), 0))


def test_complete_split_examples():
    f1 = fixture("F1")
    s = complete_split(f1, f1.image(C))
    assert [u.kind for u in s.units] == ["edge"] * 4
    f5 = fixture("F5")
    s = complete_split(f5, (B, A, A, -C))
    assert [u.kind for u in s.units] == ["exceptional"]
    # C B' joins at the turn (C', B'), and Df sends both to A'
    assert not f1.turn_is_legal(-C, -B)
    with pytest.raises(NotCompletelySplit):
        complete_split(f1, (C, -B))


def test_check_completely_split_map():
    assert check_completely_split_map(fixture("F3")).status == "pass"
    g = subdivide_periodic(fixture("F1")).new_map
    assert check_completely_split_map(g).status == "pass"
    bad = parse_map_file("auto { A -> A ; B -> B A ; C -> C B' A }")
    v = check_completely_split_map(bad)
    assert v.status == "fail" and "f(C)" in v.detail


def test_check_ct_examples():
    rep = check_ct(fixture("F3"))
    assert not rep.failed
    assert rep.properties["Filtration"].status == "partially-checked"
    rep4 = check_ct(fixture("F4"))
    assert rep4.properties["Rotationless"].status == "fail"
    raw = check_ct(fixture("F1"))
    assert "normal form" in raw.properties["Vertices"].detail
    assert not check_ct(subdivide_periodic(fixture("F1")).new_map).failed


def test_verify_hard_splitting():
    f1 = fixture("F1")
    assert verify_hard_splitting(f1, (B, A), 1) == "certified"
    f7 = fixture("F7")
    (rho,) = find_eg_inps(f7, 1, 50)
    assert verify_hard_splitting(f7, rho.path, rho.eg_decomposition) == "refuted"
    # depth 0 on a junction whose turn orbit has not cycled yet
    assert verify_hard_splitting(fixture("F3"), (A, C), 1, depth=0) == "inconclusive"


def test_splitting_unique_across_strategies(maps):
    for f in maps.values():
        inv = build_inventory(f)
        for e in f.graph.edges:
            parses = all_splittings(f, f.image(e), inv)
            greedy = greedy_split(f, f.image(e), inv)
            if len(parses) == 1:
                assert greedy == parses[0]


def test_splitting_is_functorial():
    for name in ("F3", "F5", "F7"):
        f = fixture(name)
        inv = build_inventory(f)
        for e in f.graph.edges:
            p = f.image(e)
            for _ in range(3):
                s = complete_split(f, p, inv)
                img = f.image_of_path(p)
                t = complete_split(f, img, inv)
                # the image of each unit is a union of consecutive units of the image splitting
                cuts, pos = {0}, 0
                for u in s.units:
                    pos += len(f.image_of_path(u.path))
                    cuts.add(pos)
                assert cuts <= {0} | {u.end for u in t.units}
                p = img


def test_nielsen_prefix_forces_nielsen_units():
    f1 = fixture("F1")
    # B A B' is a Nielsen path; as a prefix of a completely split path it must be one unit
    p = (B, A, -B, A)
    s = complete_split(f1, p)
    assert s.units[0].kind == "inp" and s.units[0].path == (B, A, -B)
