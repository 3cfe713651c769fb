"""Named example maps and a seeded generator of random positive automorphisms."""
from __future__ import annotations

import random

from .free_group import default_names
from .graph_map import GraphMap
from .mapfile import parse_map_file

TEXTS = {
    "F1": "auto { A -> A ; B -> B A ; C -> B C B B }",
    "F2": "auto { A -> A ; B -> B A ; C -> C B B }",
    "F3": "auto { A -> A C B A ; B -> B A ; C -> C B A }",
    "F4": "auto { A -> B ; B -> A }",
    "F5": "auto { A -> A ; B -> B A ; C -> C A A }",
    "F7": "auto { A -> A B ; B -> B A B }",
    "Fib": "auto { A -> A B ; B -> A }",
    # a zero stratum {Z1, Z2} between a fixed loop and an EG stratum
    "Z": """\
rank 3
generators a c d
graph
  vertices v u w
  edge A v v
  edge Z1 v u
  edge Z2 u w
  edge C u v
  edge D w v
marking
  base v
  forward a : A
  forward c : Z1 C
  forward d : Z1 Z2 D
  backward A : a
  backward Z1 : 1
  backward Z2 : 1
  backward C : c
  backward D : d
map
  A -> A
  Z1 -> A
  Z2 -> A
  C -> Z1 Z2 D
  D -> Z1 Z2 D Z1 C
filtration
  stratum A
  stratum Z1 Z2
  stratum C D
""",
}


def f6_text(d: int, n: int = 3, a: str = "A B") -> str:
    """x_i -> x_i for i < n and x_n -> x_n a^d."""
    if n < 3:
        raise ValueError("need n >= 3 so that a can be a root-free word in the other generators")
    names = default_names(n)
    rules = [f"{x} -> {x}" for x in names[:-1]]
    tail = " ".join([a] * d) if d >= 0 else " ".join([_inv(a)] * -d)
    rules.append(f"{names[-1]} -> {names[-1]} {tail}".rstrip())
    return "auto { " + " ; ".join(rules) + " }"


def _inv(word: str) -> str:
    return " ".join(t[:-1] if t.endswith("'") else t + "'" for t in reversed(word.split()))


def fixture(name: str) -> GraphMap:
    if name.startswith("F6"):
        return parse_map_file(f6_text(int(name[3:].strip("()") or 1)))
    return parse_map_file(TEXTS[name])


def corpus() -> dict[str, GraphMap]:
    out = {k: parse_map_file(t) for k, t in TEXTS.items()}
    for d in (1, 2, 3, 5):
        out[f"F6({d})"] = parse_map_file(f6_text(d))
    return out


def random_positive_rules(rank: int, rng: random.Random, steps: int | None = None) -> dict[str, str]:
    """Compose random positive elementary moves x_i -> x_i x_j / x_j x_i (i != j).

    Every such composite is an automorphism whose images are positive words.
    """
    names = default_names(rank)
    imgs = [[i] for i in range(rank)]
    for _ in range(steps if steps is not None else rng.randint(1, 2 * rank + 1)):
        i, j = rng.sample(range(rank), 2)
        imgs[i] = imgs[i] + imgs[j] if rng.random() < 0.5 else imgs[j] + imgs[i]
    if rng.random() < 0.5:
        perm = list(range(rank))
        rng.shuffle(perm)
        imgs = [imgs[perm[i]] for i in range(rank)]
    return {names[i]: " ".join(names[k] for k in imgs[i]) for i in range(rank)}


def random_positive_map(seed: int, max_rank: int = 4) -> GraphMap:
    rng = random.Random(seed)
    rank = rng.randint(2, max_rank)
    rules = random_positive_rules(rank, rng)
    return parse_map_file("auto { " + " ; ".join(f"{k} -> {v}" for k, v in rules.items()) + " }")
