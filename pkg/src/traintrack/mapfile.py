"""Text format for graph maps.

Example of the general form::

    format 1
    rank 2
    generators a b
    graph
      vertices v x
      edge A v v
      edge B1 v x
      edge B2 x v
    marking
      base v
      forward a : A
      forward b : B1 B2
      backward A : a
      backward B1 : b
      backward B2 : 1
    map
      A -> A
      B1 -> B1
      B2 -> B2 A
    filtration
      stratum A
      stratum B1 B2
    ffs
      candidate a | b

Words are whitespace separated names with a trailing apostrophe for
inverses; ``1`` is the empty word.  The rose shorthand
``auto { A -> A ; B -> B A }`` replaces every section but ``ffs``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .free_group import Word, format_word, parse_word
from .graph_map import GraphMap, MapError
from .marked_graph import Graph, MarkedGraph, Marking, PathError, rose, verify_marking


class MapFileError(ValueError):
    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f"line {line}" + (f", column {column}" if column else "") + ": " if line else ""
        super().__init__(where + msg)


class MarkingError(MapFileError):
    pass


SECTIONS = ("rank", "generators", "graph", "marking", "auto", "map", "filtration", "ffs", "format")


@dataclass
class MapFile:
    rank: int
    generators: list[str]
    graph: Graph
    marking: Marking
    images: dict[int, tuple[int, ...]]
    vertex_images: dict[str, str] = field(default_factory=dict)
    filtration: list[list[int]] | None = None
    ffs: list[list[list[Word]]] = field(default_factory=list)

    def to_map(self) -> GraphMap:
        mg = MarkedGraph(self.graph, self.marking, self.generators)
        return GraphMap(mg, self.images, self.vertex_images or None, self.filtration)


def _strip(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def _word(text: str, names, lineno: int) -> Word:
    text = text.strip()
    if text in ("", "1"):
        return ()
    try:
        return parse_word(text, names)
    except (ValueError, KeyError) as exc:
        raise MapFileError(str(exc), lineno) from None


def _path(G: Graph, text: str, lineno: int):
    text = text.strip()
    if text in ("", "1"):
        return ()
    try:
        return G.parse_path(text)
    except (ValueError, KeyError, PathError) as exc:
        raise MapFileError(f"bad edge path '{text}': {exc}", lineno) from None


_AUTO = re.compile(r"auto\s*\{(.*)\}", re.S)


def _parse_auto(body: str, lineno: int) -> tuple[list[str], list[tuple[str, str]]]:
    rules = []
    for part in body.split(";"):
        if not part.strip():
            continue
        if "->" not in part:
            raise MapFileError(f"expected 'X -> word' in auto block, got '{part.strip()}'", lineno)
        lhs, rhs = part.split("->", 1)
        rules.append((lhs.strip(), rhs.strip()))
    return [k for k, _ in rules], rules


def parse_map_text(text: str) -> MapFile:
    lines = [(i + 1, _strip(ln)) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln.strip()]
    if not lines:
        raise MapFileError("empty map file")
    if lines[0][1].strip().startswith("format"):
        tok = lines[0][1].split()
        if tok != ["format", "1"]:
            raise MapFileError("unsupported format version", lines[0][0])
        lines = lines[1:]
    body = "\n".join(ln for _, ln in lines)
    blocks: dict[str, list[tuple[int, str]]] = {}
    rank = None
    gens: list[str] | None = None
    auto = None
    section = None
    auto_end = 0
    for lineno, ln in lines:
        head = ln.split()[0]
        if not ln[0].isspace() and head in SECTIONS:
            section = head
            rest = ln.split(None, 1)[1] if len(ln.split(None, 1)) > 1 else ""
            if section == "rank":
                try:
                    rank = int(rest)
                except ValueError:
                    raise MapFileError("rank must be an integer", lineno, len(head) + 2) from None
            elif section == "generators":
                gens = rest.split()
            elif section == "auto":
                m = _AUTO.search(body[body.index(ln.strip()):])
                if not m:
                    raise MapFileError("unterminated auto block", lineno)
                auto = (m.group(1), lineno)
                auto_end = next(i for i, t in lines if i >= lineno and "}" in t)
            elif section == "format":
                raise MapFileError("format line must come first", lineno)
            elif section in blocks:
                raise MapFileError(f"duplicate section '{section}'", lineno)
            else:
                blocks[section] = []
            continue
        if section in blocks:
            blocks[section].append((lineno, ln.strip()))
        elif section != "auto" or lineno > auto_end:
            raise MapFileError(f"unexpected text '{ln.strip()}'", lineno, 1)

    if auto is not None:
        names, rules = _parse_auto(*auto)
        if gens is not None and gens != names:
            raise MapFileError("auto block must list the generators in order", auto[1])
        if rank is not None and rank != len(names):
            raise MapFileError("rank does not match the auto block", auto[1])
        if len(set(names)) != len(names):
            raise MapFileError("a generator has two images", auto[1])
        mg = rose(len(names), names)
        G = mg.graph
        images = {G.edge(k): _path(G, v, auto[1]) for k, v in rules}
        mf = MapFile(len(names), names, G, mg.marking, images)
    else:
        mf = _parse_general(rank, gens, blocks)
    if "filtration" in blocks:
        mf.filtration = [[mf.graph.edge(n) for n in ln.split()[1:]]
                         for _, ln in blocks["filtration"] if ln.split()[0] == "stratum"]
    for lineno, ln in blocks.get("ffs", []):
        tok = ln.split(None, 1)
        if tok[0] != "candidate" or len(tok) < 2:
            raise MapFileError("expected 'candidate w1 , w2 | w3'", lineno)
        mf.ffs.append([[_word(w, mf.generators, lineno) for w in comp.split(",")]
                       for comp in tok[1].split("|")])
    return mf


def _parse_general(rank, gens, blocks) -> MapFile:
    if rank is None or gens is None:
        raise MapFileError("need 'rank' and 'generators' (or an auto block)")
    if len(gens) != rank:
        raise MapFileError("generator count differs from rank")
    for sec in ("graph", "marking", "map"):
        if sec not in blocks:
            raise MapFileError(f"missing section '{sec}'")
    vertices: list[str] = []
    ends: dict[int, tuple[str, str]] = {}
    names: dict[int, str] = {}
    for lineno, ln in blocks["graph"]:
        tok = ln.split()
        if tok[0] == "vertices":
            vertices.extend(tok[1:])
        elif tok[0] == "edge" and len(tok) == 4:
            eid = len(ends) + 1
            ends[eid] = (tok[2], tok[3])
            names[eid] = tok[1]
        else:
            raise MapFileError(f"bad graph line '{ln}'", lineno)
    try:
        G = Graph(vertices, ends, names)
    except ValueError as exc:
        raise MapFileError(f"bad graph: {exc}") from None
    base = None
    fwd: dict[str, tuple] = {}
    bwd: dict[int, Word] = {}
    for lineno, ln in blocks["marking"]:
        tok = ln.split()
        if tok[0] == "base":
            base = tok[1]
            continue
        if tok[0] not in ("forward", "backward") or ":" not in ln:
            raise MapFileError(f"bad marking line '{ln}'", lineno)
        lhs, rhs = ln.split(":", 1)
        key = lhs.split()[1]
        if tok[0] == "forward":
            if key not in gens:
                raise MapFileError(f"unknown generator '{key}'", lineno)
            fwd[key] = _path(G, rhs, lineno)
        else:
            try:
                bwd[G.edge(key)] = _word(rhs, gens, lineno)
            except KeyError:
                raise MapFileError(f"unknown edge '{key}'", lineno) from None
    if base is None:
        base = vertices[0] if vertices else None
    missing = [g for g in gens if g not in fwd]
    if missing:
        raise MarkingError(f"no forward path for generator(s) {' '.join(missing)}")
    if set(bwd) != set(G.edges):
        raise MarkingError("backward marking must give a word for every edge")
    marking = Marking(base, tuple(fwd[g] for g in gens), bwd)
    try:
        mg = MarkedGraph(G, marking, gens)
    except (ValueError, PathError) as exc:
        raise MarkingError(str(exc)) from None
    if not verify_marking(mg):
        raise MarkingError("backward marking composed with forward marking is not the identity")
    images: dict[int, tuple] = {}
    vimg: dict[str, str] = {}
    for lineno, ln in blocks["map"]:
        if "->" not in ln:
            raise MapFileError(f"expected 'X -> path', got '{ln}'", lineno)
        lhs, rhs = (s.strip() for s in ln.split("->", 1))
        if lhs.startswith("vertex "):
            vimg[lhs.split()[1]] = rhs
            continue
        try:
            e = G.edge(lhs)
        except KeyError:
            raise MapFileError(f"unknown edge '{lhs}'", lineno) from None
        if e in images:
            raise MapFileError(f"edge '{lhs}' has two images", lineno)
        images[e] = _path(G, rhs, lineno)
    missing = [G.names[e] for e in G.edges if e not in images]
    if missing:
        raise MapFileError(f"missing image for {' '.join(missing)}")
    return MapFile(rank, list(gens), G, marking, images, vimg)


def parse_map_file(text: str) -> GraphMap:
    mf = parse_map_text(text)
    try:
        return mf.to_map()
    except MapError as exc:
        raise MapFileError(str(exc)) from None


def parse_map_with_extras(text: str) -> tuple[GraphMap, list]:
    mf = parse_map_text(text)
    try:
        return mf.to_map(), mf.ffs
    except MapError as exc:
        raise MapFileError(str(exc)) from None


def _is_plain_rose(f: GraphMap) -> bool:
    G = f.graph
    m = f.domain.marking
    return (len(G.vertices) == 1 and len(G.edges) == f.rank
            and all(m.backward.get(i) == (i,) and m.forward[i - 1] == (i,) for i in range(1, f.rank + 1))
            and [G.names[i] for i in range(1, f.rank + 1)] == list(f.domain.generator_names))


def serialize_map(f: GraphMap, rose_shorthand: bool = True) -> str:
    G = f.graph
    names = f.domain.generator_names
    out = ["format 1"]
    if rose_shorthand and _is_plain_rose(f):
        rules = " ; ".join(f"{G.names[e]} -> {G.format_path(f.image(e)) or '1'}" for e in G.edges)
        out.append(f"auto {{ {rules} }}")
    else:
        m = f.domain.marking
        out += [f"rank {f.rank}", "generators " + " ".join(names), "graph",
                "  vertices " + " ".join(G.vertices)]
        out += [f"  edge {G.names[e]} {G.origin(e)} {G.terminus(e)}" for e in G.edges]
        out += ["marking", f"  base {m.base}"]
        out += [f"  forward {g} : {G.format_path(p) or '1'}" for g, p in zip(names, m.forward)]
        out += [f"  backward {G.names[e]} : {format_word(m.backward[e], names) or '1'}" for e in G.edges]
        out.append("map")
        out += [f"  {G.names[e]} -> {G.format_path(f.image(e)) or '1'}" for e in G.edges]
        out += [f"  vertex {v} -> {f.vertex_images[v]}" for v in G.vertices if not G.directions(v)]
    out.append("filtration")
    out += ["  stratum " + " ".join(G.names[e] for e in sorted(s)) for s in f.strata]
    return "\n".join(out) + "\n"


PALETTE = ("black", "red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "teal", "gray")


def export_dot(f: GraphMap, options: dict | None = None) -> str:
    """DOT digraph: one node per vertex, one arc per edge, colour = stratum."""
    opts = {"name": "G", "labels": True, "palette": PALETTE}
    opts.update(options or {})
    G = f.graph
    pal = opts["palette"]
    lines = [f"digraph {opts['name']} {{"]
    for v in sorted(G.vertices):
        lines.append(f'  "{v}";')
    for e in G.edges:
        r = f.stratum_of(e)
        attrs = [f'color="{pal[(r - 1) % len(pal)]}"', f'class="stratum{r}"']
        if opts["labels"]:
            attrs.append(f'label="{G.names[e]}: {G.format_path(f.image(e))}"')
        if f.image(e) == (e,):
            attrs.append('penwidth=2, style="bold"')
            attrs[0] = f'color="{pal[(r - 1) % len(pal)]}:invis:{pal[(r - 1) % len(pal)]}"'
        lines.append(f'  "{G.origin(e)}" -> "{G.terminus(e)}" [{", ".join(attrs)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
