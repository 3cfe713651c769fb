"""Command line front end: ``traintrack COMMAND MAP [MAP] [flags]``.

Exit status: 0 pass/equal, 1 fail/distinct, 2 inconclusive or budget exhausted, 3 input error.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path as FSPath

from .ct import check_ct, complete_split, NotCompletelySplit
from .graph_map import check_rtt
from .mapfile import MapFileError, export_dot, parse_map_with_extras, serialize_map
from .nielsen import is_rotationless, min_rotationless_exponent, nielsen_classes, periodic_exponent
from .pipeline import NotRotationlessError, make_ct, make_rtt
from .recognition import NotRotationless, compare_bundles, extract_bundle, serialize_bundle

PASS, FAIL, INCONCLUSIVE, INPUT_ERROR = 0, 1, 2, 3

COMMANDS = ("check-rtt", "strata", "rotationless", "min-power", "make-rtt", "make-ct", "nielsen",
            "split", "check-ct", "invariants", "compare", "export-dot")


@dataclass
class Report:
    command: str
    status: int = PASS
    verdicts: list[str] = field(default_factory=list)
    witnesses: list[str] = field(default_factory=list)
    timing: float | None = None

    def text(self) -> str:
        out = [f"command {self.command}"]
        out += self.verdicts
        out += [f"witness: {w}" for w in self.witnesses]
        out.append(f"exit {self.status}")
        if self.timing is not None:
            out.append(f"time {self.timing:.3f}s")
        return "\n".join(out) + "\n"


def _load(path: str):
    text = sys.stdin.read() if path == "-" else FSPath(path).read_text(encoding="utf-8")
    return parse_map_with_extras(text)


def _write(path: str | None, text: str) -> None:
    if path:
        tmp = FSPath(path + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(path)


# commands


def cmd_check_rtt(f, ffs, a, rep: Report):
    res = check_rtt(f)
    rep.verdicts += res.lines() or ["no EG strata"]
    if not res.passed:
        rep.status = FAIL
        rep.witnesses += [w for _, _, w in res.failures()]


def cmd_strata(f, ffs, a, rep: Report):
    for info in f.strata_info:
        names = " ".join(f.name(e) for e in info.edges)
        line = f"stratum {info.index} {info.kind}: {names}"
        if info.pf is not None:
            line += f" pf {info.pf.value:.12g}"
        if info.kind == "NEG-linear":
            line += f" axis {f.fmt(info.root_path)} exponent {info.exponent}"
        rep.verdicts.append(line)


def cmd_rotationless(f, ffs, a, rep: Report):
    rot = is_rotationless(f)
    rep.verdicts.append(f"rotationless {'yes' if rot else 'no'}")
    if not rot:
        rep.status = FAIL
        rep.witnesses.append(rot.witness)


def cmd_min_power(f, ffs, a, rep: Report):
    k = min_rotationless_exponent(f)
    rep.verdicts.append(str(k))


def _pipeline(res, a, rep: Report):
    rep.verdicts += res.lines()
    if a.log:
        _write(a.log, "format 1\n" + "".join(line + "\n" for line in res.log))
    if a.out:
        _write(a.out, serialize_map(res.new_map))
    if not res.success:
        rep.witnesses.append(res.blocked or "")
        rep.status = INCONCLUSIVE if res.blocked and res.blocked.startswith("budget") else FAIL


def cmd_make_rtt(f, ffs, a, rep: Report):
    _pipeline(make_rtt(f, a.budget, a.inp_bound), a, rep)


def cmd_make_ct(f, ffs, a, rep: Report):
    _pipeline(make_ct(f, a.budget, a.inp_bound, ffs or None), a, rep)


def cmd_nielsen(f, ffs, a, rep: Report):
    k = periodic_exponent(f)
    for c in nielsen_classes(f, k, a.inp_bound):
        paths = ", ".join(f"{a_}-{b_} {f.fmt(p)}" for a_, b_, p in c.connectors) or "-"
        rep.verdicts.append(f"class {c.id} {' '.join(c.vertices)} : {paths}")


def cmd_split(f, ffs, a, rep: Report):
    targets = [f.path(a.path)] if a.path else [f.image(e) for e in f.graph.edges]
    for p in targets:
        try:
            rep.verdicts.append(f"{f.fmt(p)} = {complete_split(f, p).fmt(f)}")
        except NotCompletelySplit as exc:
            rep.status = FAIL
            rep.witnesses.append(f"{f.fmt(p)}: {exc}")


def cmd_check_ct(f, ffs, a, rep: Report):
    res = check_ct(f, ffs or None, a.inp_bound)
    rep.verdicts += res.lines()
    rep.witnesses += res.notes
    if res.failed:
        rep.status = FAIL


def cmd_invariants(f, ffs, a, rep: Report):
    text = serialize_bundle(extract_bundle(f, a.depth, a.inp_bound))
    if a.out:
        _write(a.out, text)
    rep.verdicts += text.rstrip("\n").split("\n")


def cmd_compare(f, ffs, a, rep: Report):
    if not a.other:
        raise MapFileError("compare needs two map files")
    g, _ = _load(a.other)
    res = compare_bundles(extract_bundle(f, a.depth, a.inp_bound), extract_bundle(g, a.depth, a.inp_bound), a.depth)
    rep.verdicts.append(f"verdict {res.verdict}")
    if res.witness:
        rep.witnesses.append(res.witness)
    rep.status = {"equal": PASS, "equal-at-depth": PASS, "distinct": FAIL}.get(res.verdict, INCONCLUSIVE)


def cmd_export_dot(f, ffs, a, rep: Report):
    text = export_dot(f, {})
    if a.out:
        _write(a.out, text)
        rep.verdicts.append(f"wrote {a.out}")
    else:
        rep.verdicts += text.rstrip("\n").split("\n")


HANDLERS = {
    "check-rtt": cmd_check_rtt, "strata": cmd_strata, "rotationless": cmd_rotationless,
    "min-power": cmd_min_power, "make-rtt": cmd_make_rtt, "make-ct": cmd_make_ct,
    "nielsen": cmd_nielsen, "split": cmd_split, "check-ct": cmd_check_ct,
    "invariants": cmd_invariants, "compare": cmd_compare, "export-dot": cmd_export_dot,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="traintrack", description="Train track and CT tools for free group automorphisms.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("map", help="map file, or - for stdin")
    p.add_argument("other", nargs="?", help="second map file (compare)")
    p.add_argument("--path", help="path to split (split); default: every edge image")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--depth", type=int, default=64)
    p.add_argument("--inp-bound", type=int, default=200)
    p.add_argument("--log", help="write the move log here (make-rtt, make-ct)")
    p.add_argument("--out", help="write the resulting map, bundle or DOT text here")
    p.add_argument("--timing", action="store_true", help="append wall-clock time to the report")
    return p


def dispatch(argv: list[str] | None = None) -> tuple[Report, int]:
    try:
        a = build_parser().parse_args(argv)
    except SystemExit as exc:
        return Report("usage", INPUT_ERROR), INPUT_ERROR if exc.code else PASS
    rep = Report(a.command)
    t0 = time.perf_counter()
    try:
        f, ffs = _load(a.map)
        HANDLERS[a.command](f, ffs, a, rep)
    except (MapFileError, OSError, UnicodeDecodeError) as exc:
        rep.status = INPUT_ERROR
        rep.witnesses.append(str(exc))
    except (NotRotationlessError, NotRotationless) as exc:
        rep.status = FAIL
        rep.witnesses.append(str(exc))
    if a.timing:
        rep.timing = time.perf_counter() - t0
    return rep, rep.status


def main(argv: list[str] | None = None) -> int:
    rep, status = dispatch(argv)
    sys.stdout.write(rep.text())
    return status


if __name__ == "__main__":
    sys.exit(main())
