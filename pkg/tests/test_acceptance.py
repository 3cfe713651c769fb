"""One test per acceptance criterion; each records a PASS/FAIL line shown in the terminal summary."""
import random
import time

from traintrack.cli import dispatch
from traintrack.ct import build_inventory, complete_split, eg_nielsen_verdict, iterate_extended_folds
from traintrack.fixtures import corpus, fixture, random_positive_map
from traintrack.free_group import conj_class, inner_difference, inverse, parse_word, power
from traintrack.graph_map import power_map
from traintrack.mapfile import serialize_map
from traintrack.moves import subdivide_periodic
from traintrack.nielsen import all_eg_inps, is_rotationless, min_rotationless_exponent, nielsen_classes, nielsen_paths
from traintrack.perron import charpoly, max_real_root, power_iteration
from traintrack.recognition import (
    NotRotationless, compare_bundles, extract_bundle, parse_bundle, principal_class_descriptors, serialize_bundle,
)

from movesuite import applicable_moves

PF_TOL = 1e-9
TIME_LIMIT = 10.0
NAMES = ["A", "B", "C"]


def classes(words):
    return sorted((conj_class(w) for w in words), key=repr)


def word(text):
    return parse_word(text, NAMES)


def test_criterion_1_F1_fixed_subgroup_and_interior_class(criterion):
    with criterion(1, "F1: Fix = <A, B A B'>, interior class x distinct with 2 rays"):
        g = subdivide_periodic(fixture("F1")).new_map
        cls = {c.vertex: c for c in principal_class_descriptors(g)}
        assert set(cls) == {"v", "x"}
        v, x = cls["v"], cls["x"]
        assert v.rank == 2
        assert classes(v.fixed_basis) == classes([word("A"), word("B A B'")])
        assert len(x.rays) == 2 and x.rank == 0
        assert v.id != x.id
        assert not any({"v", "x"} <= set(c.vertices) for c in nielsen_classes(g))


def test_criterion_2_F3(criterion):
    with criterion(2, f"F3: fixed directions, 4 rays, rotationless, one lamination (tol {PF_TOL})"):
        f = fixture("F3")
        fixed = sorted(f.fmt((d,)) for d in f.graph.directions("v") if f.derivative(d) == d)
        assert fixed == ["A", "A'", "B", "C"]
        (c,) = principal_class_descriptors(f)
        assert sorted(r.direction for r in c.rays) == ["A", "A'", "B", "C"]
        assert is_rotationless(f)
        B = extract_bundle(f)
        assert len(B.laminations) == 1
        M = [[2, 1, 1], [1, 1, 0], [1, 1, 1]]
        exact = max_real_root(charpoly(M))
        assert abs(exact - power_iteration(M)) < PF_TOL
        assert abs(B.laminations[0].pf - exact) < PF_TOL


def test_criterion_3_F2(criterion):
    with criterion(3, "F2: Fix = <A, B A B'> with a single attractor ray"):
        (c,) = [c for c in principal_class_descriptors(fixture("F2")) if c.vertex == "v"]
        assert classes(c.fixed_basis) == classes([word("A"), word("B A B'")])
        assert len(c.rays) == 1 and c.rays[0].direction == "C"


def test_criterion_4_linear_recognition(criterion):
    with criterion(4, "F6(d): equal to itself, F6(3) vs F6(5) distinct with twist witness"):
        for d in (1, 2, 3, 5):
            X = extract_bundle(fixture(f"F6({d})"))
            assert compare_bundles(X, extract_bundle(fixture(f"F6({d})"))).verdict == "equal"
        res = compare_bundles(extract_bundle(fixture("F6(3)")), extract_bundle(fixture("F6(5)")))
        assert res.verdict == "distinct" and "3 != 5" in res.witness


def test_criterion_5_min_rotationless_exponent(criterion):
    with criterion(5, "min exponent: F4 -> 2, F1/F3/F5 -> 1, divisors not rotationless"):
        expected = {"F4": 2, "F1": 1, "F3": 1, "F5": 1}
        for name, k in expected.items():
            f = fixture(name)
            assert min_rotationless_exponent(f) == k, name
            assert is_rotationless(power_map(f, k))
            for d in range(1, k):
                if k % d == 0:
                    assert not is_rotationless(power_map(f, d))


def test_criterion_6_move_invariance(criterion):
    with criterion(6, "100 random maps: every move keeps the outer class, every non-fold move keeps the bundle") as notes:
        t0 = time.perf_counter()
        moves = 0
        for seed in range(100):
            f = random_positive_map(seed, 4)
            rot = bool(is_rotationless(f))
            before = extract_bundle(f) if rot else None
            for name, res in applicable_moves(f, random.Random(seed)):
                g = res.new_map
                assert inner_difference(f.automorphism.images, g.automorphism.images) is not None, (seed, name)
                moves += 1
                if rot and name != "fold":
                    after = extract_bundle(g)
                    assert compare_bundles(before, after).verdict != "distinct", (seed, name)
        elapsed = time.perf_counter() - t0
        assert moves >= 100
        notes.append(f"{moves} moves in {elapsed:.1f}s")
        if elapsed > TIME_LIMIT:
            notes.append(f"over the {TIME_LIMIT:.0f}s time budget")


def test_criterion_7_exceptional_paths(criterion):
    with criterion(7, "F5: f^k(B A^p C') = B A^(p-k) C' for k in 1..5, p in -3..3"):
        f = fixture("F5")
        A, B, C = f.path("A"), f.path("B"), f.path("C")
        for p in range(-3, 4):
            path = B + power(A, p) + inverse(C)
            for k in range(1, 6):
                assert f.iterate_image(path, k) == B + power(A, p - k) + inverse(C), (p, k)


def test_criterion_8_splitting_soundness(criterion):
    with criterion(8, "splittings stay reduced under 5 iterates; Nielsen paths are fixed"):
        checked = 0
        for name, f in corpus().items():
            if not is_rotationless(f):
                continue
            inv = build_inventory(f)
            for e in f.graph.edges:
                try:
                    sp = complete_split(f, f.image(e), inv)
                except ValueError:
                    continue
                for k in range(1, 6):
                    cat = tuple(x for u in sp.units for x in f.iterate_image(u.path, k))
                    assert cat == f.iterate_image(sp.path, k), (name, e, k)
                    assert all(cat[i] != -cat[i + 1] for i in range(len(cat) - 1))
                checked += 1
            for np_ in nielsen_paths(f):
                assert f.iterate_image(np_.path, np_.period) == np_.path, name
        assert checked > 0


def test_criterion_9_eg_inp_coherence(criterion):
    with criterion(9, "EG iNp fold classification agrees with the check_ct verdict"):
        seen = 0
        for name, f in corpus().items():
            if not is_rotationless(f):
                continue
            verdict, records = eg_nielsen_verdict(f)
            all_proper = all(all(k == "proper-full" for k in rec.kinds) for rec in records.values())
            assert all_proper == (verdict.status != "fail"), name
            for r, res in all_eg_inps(f).items():
                for np_ in res.paths:
                    if np_.period == 1:
                        assert iterate_extended_folds(f, np_).kinds == records[np_.path].kinds
                        seen += 1
        assert seen > 0


def test_criterion_10_cli_round_trip(criterion, tmp_path):
    with criterion(10, "bundle text round trip, identical reports, exit table"):
        for name, f in corpus().items():
            try:
                B = extract_bundle(f)
            except NotRotationless:
                continue
            text = serialize_bundle(B)
            assert serialize_bundle(parse_bundle(text)) == text, name
        table = {}
        for name, f in corpus().items():
            p = tmp_path / f"{name}.map"
            p.write_text(serialize_map(f))
            for cmd in ("rotationless", "check-rtt", "invariants", "check-ct"):
                r1, s1 = dispatch([cmd, str(p), "--seed", "7"])
                r2, s2 = dispatch([cmd, str(p), "--seed", "7"])
                assert r1.text() == r2.text() and s1 == s2
                assert s1 in (0, 1, 2)
                table[cmd, name] = s1
        assert table["rotationless", "F4"] == 1 and table["rotationless", "F1"] == 0
        assert table["invariants", "F4"] == 1 and table["invariants", "F3"] == 0
        bad = tmp_path / "bad.map"
        bad.write_text("rank two\n")
        assert dispatch(["check-rtt", str(bad)])[1] == 3
