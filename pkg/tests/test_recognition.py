import pytest

from traintrack.fixtures import corpus, fixture
from traintrack.free_group import conj_class, parse_word
from traintrack.mapfile import parse_map_file, serialize_map
from traintrack.moves import slide, subdivide_periodic
from traintrack.nielsen import is_rotationless
from traintrack.perron import charpoly, max_real_root
from traintrack.recognition import (
    NotRotationless, axes_and_twists, compare_bundles, extract_bundle, lamination_data, parse_bundle,
    principal_class_descriptors, remove_valence_two, serialize_bundle,
)

NAMES = ["A", "B", "C"]
M3 = [[2, 1, 1], [1, 1, 0], [1, 1, 1]]


def classes_of(basis):
    return sorted((conj_class(w) for w in basis), key=repr)


def test_lamination_data():
    (lam,) = lamination_data(fixture("F3"))
    assert lam.factor == tuple(charpoly(M3)) or abs(lam.pf - max_real_root(charpoly(M3))) < 1e-9
    assert abs(lam.pf - max_real_root(charpoly(M3))) < 1e-9
    assert lamination_data(fixture("F1")) == []
    assert lamination_data(fixture("F5")) == []


def test_axes_and_twists():
    (ax,) = axes_and_twists(fixture("F5"))
    assert ax.axis == (1,) and dict(ax.twists) == {"B": 1, "C": 2}
    (ax,) = axes_and_twists(fixture("F1"))
    assert ax.axis == (1,) and dict(ax.twists) == {"B": 1}
    assert axes_and_twists(fixture("F3")) == []


def test_principal_classes_F1():
    g = subdivide_periodic(fixture("F1")).new_map
    cls = {c.vertex: c for c in principal_class_descriptors(g)}
    v, x = cls["v"], cls["x"]
    assert v.rank == 2 and v.rays == ()
    assert classes_of(v.fixed_basis) == classes_of([parse_word("A", NAMES), parse_word("B A B'", NAMES)])
    assert x.rank == 0 and len(x.rays) == 2


def test_principal_classes_F3():
    (c,) = principal_class_descriptors(fixture("F3"))
    assert c.rank == 0
    assert sorted(r.direction for r in c.rays) == ["A", "A'", "B", "C"]


def test_extract_bundle_shapes():
    b1 = extract_bundle(fixture("F1"))
    assert (len(b1.laminations), len(b1.classes), len(b1.axes)) == (0, 2, 1)
    b3 = extract_bundle(fixture("F3"))
    assert (len(b3.laminations), len(b3.classes), len(b3.axes)) == (1, 1, 0)
    b6 = extract_bundle(fixture("F6(3)"))
    assert len(b6.laminations) == 0
    (ax,) = b6.axes
    assert ax.twist_multiset == (3,)
    with pytest.raises(NotRotationless):
        extract_bundle(fixture("F4"))


def test_compare_bundles_examples():
    X = extract_bundle(fixture("F1"))
    assert compare_bundles(X, extract_bundle(fixture("F1"))).verdict == "equal"
    d = compare_bundles(extract_bundle(fixture("F6(3)")), extract_bundle(fixture("F6(5)")))
    assert d.verdict == "distinct" and "3 != 5" in d.witness
    d = compare_bundles(extract_bundle(fixture("F5")), X)
    assert d.verdict == "distinct"


def test_fixed_bases_are_fixed():
    for name, f in corpus().items():
        if not is_rotationless(f):
            continue
        B = extract_bundle(f)
        g = subdivide_periodic(remove_valence_two(f)).new_map
        for c in B.classes:
            phi, _ = g.normalized_automorphism(c.vertex)
            assert all(phi(b) == b for b in c.fixed_basis), (name, c.vertex)


def test_ray_prefixes_nest():
    for name in ("F1", "F2", "F3", "F7"):
        short = extract_bundle(fixture(name), depth=16)
        long = extract_bundle(fixture(name), depth=64)
        for c, d in zip(short.classes, long.classes):
            for r, s in zip(c.rays, d.rays):
                assert (r.vertex, r.direction) == (s.vertex, s.direction)
                assert s.prefix[:len(r.prefix)] == r.prefix
                assert len(r.prefix) <= len(s.prefix)


def test_eg_rays_have_expanding_lamination():
    B = extract_bundle(fixture("F3"))
    assert B.classes[0].rays
    assert all(lam.pf > 1 for lam in B.laminations)


def test_isomorphic_copy_compares_equal():
    text = serialize_map(fixture("F3"), rose_shorthand=False)
    renamed = text.replace("vertices v", "vertices hub").replace(" v v", " hub hub").replace("base v", "base hub")
    g = parse_map_file(renamed)
    assert g.graph.vertices == ("hub",)
    assert compare_bundles(extract_bundle(fixture("F3")), extract_bundle(g)).verdict == "equal"


def test_disguised_copies_are_not_distinct():
    f = fixture("F5")
    g = slide(f, 3, (1,)).new_map
    assert compare_bundles(extract_bundle(f), extract_bundle(g)).verdict != "distinct"


def test_serialization_round_trip(maps):
    for f in maps.values():
        if not is_rotationless(f):
            continue
        B = extract_bundle(f)
        text = serialize_bundle(B)
        assert text.startswith("format 1\n")
        again = parse_bundle(text)
        assert serialize_bundle(again) == text
        assert compare_bundles(B, again).verdict == "equal"
