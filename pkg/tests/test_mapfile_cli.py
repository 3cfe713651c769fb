import re
from fractions import Fraction

import pytest

from traintrack.cli import dispatch, main
from traintrack.fixtures import TEXTS, corpus, fixture
from traintrack.mapfile import MapFileError, export_dot, parse_map_file, serialize_map
from traintrack.moves import subdivide
from traintrack.recognition import compare_bundles, extract_bundle

GOOD = TEXTS["Z"]


def test_missing_image():
    bad = GOOD.replace("  D -> Z1 Z2 D Z1 C\n", "")
    with pytest.raises(MapFileError, match="missing image for D"):
        parse_map_file(bad)


def test_duplicate_image():
    bad = GOOD.replace("  A -> A\n", "  A -> A\n  A -> A\n")
    with pytest.raises(MapFileError, match="two images"):
        parse_map_file(bad)


def test_marking_error():
    bad = GOOD.replace("forward d : Z1 Z2 D", "forward d : A")
    with pytest.raises(MapFileError):
        parse_map_file(bad)


def test_error_carries_line_number():
    with pytest.raises(MapFileError) as exc:
        parse_map_file("format 1\nauto { A -> A ; B -> B A }\nbogus\n")
    assert exc.value.line is not None


def test_dot_counts():
    f = fixture("F1")
    dot = export_dot(f, {})
    assert dot.count("->") == 3
    assert len(re.findall(r'^\s*"[^"]+";', dot, re.M)) == 1
    assert len(set(re.findall(r'class="(stratum\d+)"', dot))) == 3
    g = subdivide(f, [(3, Fraction(1, 3))]).new_map
    dot2 = export_dot(g, {})
    assert len(re.findall(r'^\s*"[^"]+";', dot2, re.M)) == 2
    assert dot2.count("->") == 4


def test_serialize_round_trip(maps):
    for name, f in maps.items():
        for shorthand in (True, False):
            text = serialize_map(f, rose_shorthand=shorthand)
            g = parse_map_file(text)
            assert serialize_map(g, rose_shorthand=shorthand) == text, name
            assert [g.image(e) for e in g.graph.edges] == [f.image(e) for e in f.graph.edges]


def test_round_trip_keeps_bundle():
    for name in ("F1", "F3", "F5", "F7"):
        f = fixture(name)
        g = parse_map_file(serialize_map(f, rose_shorthand=False))
        assert compare_bundles(extract_bundle(f), extract_bundle(g)).verdict == "equal"


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, f in corpus().items():
        p = tmp_path / f"{name}.map"
        p.write_text(serialize_map(f))
        out[name] = str(p)
    return out


EXPECTED = [
    ("rotationless", "F1", 0), ("rotationless", "F4", 1), ("min-power", "F4", 0),
    ("check-rtt", "F1", 0), ("check-rtt", "F3", 0), ("make-ct", "F1", 0), ("make-ct", "F4", 1),
    ("check-ct", "F3", 0), ("invariants", "F3", 0), ("invariants", "F4", 1),
    ("nielsen", "F7", 0), ("split", "F3", 0), ("strata", "Z", 0), ("export-dot", "F1", 0),
]


@pytest.mark.parametrize("cmd,name,code", EXPECTED)
def test_exit_codes(files, cmd, name, code):
    rep, status = dispatch([cmd, files[name]])
    assert status == code, rep.text()
    assert rep.text().endswith(f"exit {code}\n")


def test_compare_exit_codes(files):
    assert dispatch(["compare", files["F1"], files["F1"]])[1] == 0
    rep, status = dispatch(["compare", files["F6(3)"], files["F6(5)"]])
    assert status == 1 and any("3 != 5" in w for w in rep.witnesses)


def test_budget_exhaustion_is_inconclusive(files):
    assert dispatch(["make-rtt", files["F1"], "--budget", "0"])[1] == 2


def test_input_errors(tmp_path, files):
    bad = tmp_path / "bad.map"
    bad.write_text("format 1\nnonsense\n")
    assert dispatch(["check-rtt", str(bad)])[1] == 3
    assert dispatch(["check-rtt", str(tmp_path / "missing.map")])[1] == 3
    assert dispatch(["frobnicate", files["F1"]])[1] == 3
    assert dispatch(["compare", files["F1"]])[1] == 3


def test_min_power_value(files, capsys):
    assert main(["min-power", files["F4"]]) == 0
    assert "\n2\n" in capsys.readouterr().out


def test_outputs_written(files, tmp_path):
    log, out = tmp_path / "run.log", tmp_path / "out.map"
    assert dispatch(["make-ct", files["F1"], "--log", str(log), "--out", str(out)])[1] == 0
    assert log.read_text().startswith("format 1\n")
    g = parse_map_file(out.read_text())
    assert dispatch(["check-ct", str(out)])[1] == 0
    assert len(g.graph.edges) == 4


def test_deterministic_reports(files):
    for cmd, name, _ in EXPECTED:
        assert dispatch([cmd, files[name]])[0].text() == dispatch([cmd, files[name]])[0].text()


def test_stdin(monkeypatch, capsys):
    import io
    monkeypatch.setattr("sys.stdin", io.StringIO(TEXTS["F4"]))
    assert main(["rotationless", "-"]) == 1
    assert "period 2" in capsys.readouterr().out
