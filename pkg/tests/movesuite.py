"""Random applicable moves, shared by the move tests and the acceptance suite."""
from __future__ import annotations

import random
from fractions import Fraction

from traintrack.moves import (
    MoveError, change_marking_via_restriction, collapse, elementary_fold, slide,
    subdivide, tree_replacement, valence_two_homotopy,
)

MOVES = ("subdivide", "valence-two", "collapse", "slide", "marking-change", "tree-replacement", "fold")


def _subdivided(f, rng):
    G = f.graph
    long = [e for e in G.edges if len(f.image(e)) >= 2]
    if not long:
        return None
    e = rng.choice(long)
    i = rng.randrange(1, len(f.image(e)))
    return subdivide(f, [(e, Fraction(i, len(f.image(e))))]), e


def applicable_moves(f, rng: random.Random):
    """Yield (name, MoveResult) for every move that applies to f."""
    G = f.graph
    sub = _subdivided(f, rng)
    if sub:
        res, e = sub
        yield "subdivide", res
        g = res.new_map
        new_v = sorted(set(g.graph.vertices) - set(G.vertices))[0]
        halves = g.graph.directions(new_v)
        for keep in {abs(d) for d in halves}:
            try:
                yield "valence-two", valence_two_homotopy(g, new_v, keep=keep, name=G.names[e])
                break
            except MoveError:
                pass
        non_loop = [abs(d) for d in halves if not g.graph.is_loop(abs(d))]
        yield "collapse", collapse(g, [rng.choice(non_loop)])
    for info in f.strata_info:
        if info.is_neg and info.normal_form and info.kind not in ("NEG-fixed", "NEG-periodic"):
            for e in info.edges:
                E = info.oriented.get(e, e)
                lower = f.filtration_element(info.index - 1)
                loops = [d for d in G.directions(G.terminus(E)) if abs(d) in lower and G.is_loop(abs(d))]
                if loops:
                    yield "slide", slide(f, E, (rng.choice(loops),))
    for j in range(1, len(f.strata)):
        try:
            yield "marking-change", change_marking_via_restriction(f, j)
        except MoveError:
            pass
    for info in f.strata_info:
        if info.kind == "zero":
            verts = sorted({v for e in info.edges for v in G.endpoints()[e]})
            rng.shuffle(verts)
            tree = [(f"T{i}", verts[i], verts[i + 1]) for i in range(len(verts) - 1)]
            try:
                yield "tree-replacement", tree_replacement(f, info.index, tree)
            except MoveError:
                pass
    for v in G.vertices:
        dirs = G.directions(v)
        for i, d1 in enumerate(dirs):
            for d2 in dirs[i + 1:]:
                if abs(d1) != abs(d2) and f.image(d1)[:1] == f.image(d2)[:1]:
                    try:
                        yield "fold", elementary_fold(f, d1, d2)
                    except MoveError:
                        pass
                    return
