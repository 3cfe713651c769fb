"""Reduced words, cyclic words, roots and basis automorphisms of F_n.

Letters are nonzero ints: ``i`` is the generator x_i and ``-i`` its inverse.
Words are tuples of letters and are always kept freely reduced.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

Word = tuple[int, ...]

EMPTY: Word = ()


def letter(index: int, sign: int = 1) -> int:
    if index < 1 or sign not in (1, -1):
        raise ValueError(f"bad letter ({index}, {sign})")
    return index * sign


def reduce(letters: Iterable[int]) -> Word:
    stack: list[int] = []
    for a in letters:
        if a == 0:
            raise ValueError("0 is not a letter")
        if stack and stack[-1] == -a:
            stack.pop()
        else:
            stack.append(a)
    return tuple(stack)


def is_reduced(w: Sequence[int]) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def inverse(w: Sequence[int]) -> Word:
    return tuple(-a for a in reversed(w))


def multiply(*words: Sequence[int]) -> Word:
    out: list[int] = []
    for w in words:
        for a in w:
            if out and out[-1] == -a:
                out.pop()
            else:
                out.append(a)
    return tuple(out)


def power(w: Sequence[int], k: int) -> Word:
    if k < 0:
        return power(inverse(w), -k)
    core, conj = cyclic_reduce(tuple(w))
    return multiply(conj, core * k, inverse(conj))


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    return is_reduced(w) and (len(w) < 2 or w[0] != -w[-1])


def cyclic_reduce(w: Sequence[int]) -> tuple[Word, Word]:
    """Return (core, conjugator) with w = conjugator * core * conjugator^-1."""
    w = reduce(w)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return w[i:j + 1], w[:i]


def root_decomposition(w: Sequence[int]) -> tuple[Word, int]:
    w = tuple(w)
    if not w:
        raise ValueError("root of the empty word")
    if not is_cyclically_reduced(w):
        raise ValueError("root_decomposition needs a cyclically reduced word")
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and w[:d] * (n // d) == w:
            return w[:d], n // d
    raise AssertionError("unreachable")


def root(w: Sequence[int]) -> tuple[Word, int]:
    """Root of an arbitrary nontrivial word: w = r^k with r root-free, k >= 1."""
    core, conj = cyclic_reduce(w)
    r, k = root_decomposition(core)
    return multiply(conj, r, inverse(conj)), k


def letter_key(a: int) -> tuple[int, int]:
    # A < A' < B < B' < ...
    return (abs(a), 1 if a < 0 else 0)


def word_key(w: Sequence[int]) -> tuple:
    return tuple(letter_key(a) for a in w)


def least_rotation(w: Sequence[int]) -> Word:
    w = tuple(w)
    if not w:
        return w
    return min((w[i:] + w[:i] for i in range(len(w))), key=word_key)


@dataclass(frozen=True)
class ConjClass:
    representative: Word
    oriented: bool = True

    def __str__(self) -> str:
        return f"[{format_word(self.representative)}]" + ("" if self.oriented else "_u")


def conj_class(w: Sequence[int], oriented: bool = True) -> ConjClass:
    core, _ = cyclic_reduce(w)
    rep = least_rotation(core)
    if not oriented:
        other = least_rotation(inverse(core))
        if word_key(other) < word_key(rep):
            rep = other
    return ConjClass(rep, oriented)


def are_conjugate(u: Sequence[int], v: Sequence[int]) -> bool:
    return conj_class(u) == conj_class(v)


def find_conjugator(u: Sequence[int], v: Sequence[int]) -> Word | None:
    """Some c with c u c^-1 = v, or None."""
    cu, au = cyclic_reduce(u)
    cv, av = cyclic_reduce(v)
    if len(cu) != len(cv):
        return None
    if not cu:
        return EMPTY
    for i in range(len(cu)):
        if cu[i:] + cu[:i] == cv:
            # cv = s^-1 cu s with s = cu[:i]
            s = cu[:i]
            return multiply(av, inverse(s), inverse(au))
    return None


def format_word(w: Sequence[int], names: Sequence[str] | None = None) -> str:
    if not w:
        return "1"
    out = []
    for a in w:
        base = names[abs(a) - 1] if names else _default_name(abs(a))
        out.append(base + ("'" if a < 0 else ""))
    return " ".join(out)


def _default_name(i: int) -> str:
    return chr(ord("A") + i - 1) if i <= 26 else f"x{i}"


def default_names(n: int) -> list[str]:
    if n <= 26:
        return [_default_name(i) for i in range(1, n + 1)]
    return [f"x{i}" for i in range(1, n + 1)]


def parse_word(text: str, names: Sequence[str]) -> Word:
    index = {name: i + 1 for i, name in enumerate(names)}
    out = []
    for tok in text.split():
        if tok == "1":
            continue
        sign = 1
        while tok.endswith("'"):
            tok = tok[:-1]
            sign = -sign
        if tok not in index:
            raise ValueError(f"unknown generator {tok!r}")
        out.append(sign * index[tok])
    return reduce(out)


@dataclass(frozen=True)
class BasisAutomorphism:
    rank: int
    images: tuple[Word, ...]
    declared_inverse: tuple[Word, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.rank < 1 or len(self.images) != self.rank:
            raise ValueError("need one image per generator")
        imgs = tuple(reduce(w) for w in self.images)
        object.__setattr__(self, "images", imgs)
        for w in imgs:
            if any(abs(a) > self.rank for a in w):
                raise ValueError("image uses a letter outside the rank")

    def __call__(self, w: Sequence[int]) -> Word:
        return apply_automorphism(self, w)

    def compose(self, other: "BasisAutomorphism") -> "BasisAutomorphism":
        """self after other."""
        return BasisAutomorphism(self.rank, tuple(self(w) for w in other.images))

    def power(self, k: int) -> "BasisAutomorphism":
        if k < 0:
            raise ValueError("negative powers need a declared inverse")
        out = identity_automorphism(self.rank)
        for _ in range(k):
            out = self.compose(out)
        return out

    def inverse_automorphism(self) -> "BasisAutomorphism":
        if self.declared_inverse is None:
            raise ValueError("no declared inverse")
        inv = BasisAutomorphism(self.rank, self.declared_inverse, self.images)
        if not verify_inverse_pair(self, inv):
            raise ValueError("declared inverse does not verify")
        return inv

    def conjugate_by(self, c: Sequence[int]) -> "BasisAutomorphism":
        """i_c o self, where i_c(w) = c w c^-1."""
        ci = inverse(c)
        return BasisAutomorphism(self.rank, tuple(multiply(c, w, ci) for w in self.images))


def identity_automorphism(n: int) -> BasisAutomorphism:
    return BasisAutomorphism(n, tuple((i,) for i in range(1, n + 1)))


def apply_automorphism(phi: BasisAutomorphism, w: Sequence[int]) -> Word:
    out: list[int] = []
    for a in w:
        if abs(a) > phi.rank:
            raise ValueError("rank mismatch")
        img = phi.images[a - 1] if a > 0 else inverse(phi.images[-a - 1])
        for b in img:
            if out and out[-1] == -b:
                out.pop()
            else:
                out.append(b)
    return tuple(out)


def verify_inverse_pair(phi: BasisAutomorphism, psi: BasisAutomorphism) -> bool:
    if phi.rank != psi.rank:
        raise ValueError("rank mismatch")
    return all(psi(phi((i,))) == (i,) for i in range(1, phi.rank + 1))


def inner_difference(phi: Sequence[Word], psi: Sequence[Word]) -> Word | None:
    """A single c with psi[i] = c phi[i] c^-1 for all i, or None."""
    if len(phi) != len(psi):
        raise ValueError("rank mismatch")
    pivot = next((i for i, a in enumerate(phi) if a), None)
    if pivot is None:
        return EMPTY if all(not b for b in psi) else None
    c0 = find_conjugator(phi[pivot], psi[pivot])
    if c0 is None:
        return None
    # every conjugator taking phi[pivot] to psi[pivot] is c0 r^k, r the root of phi[pivot]
    r, _ = root(phi[pivot])
    t, s = cyclic_reduce(r)
    ks: set[int] | None = None
    for a, b in zip(phi, psi):
        target = multiply(inverse(c0), b, c0)
        if multiply(r, a, inverse(r)) == a:
            if a != target:
                return None
            continue
        bound = (len(a) + len(target) + 4 * len(s)) // (2 * len(t)) + 2
        good = {k for k in range(-bound, bound + 1)
                if multiply(power(r, k), a, power(r, -k)) == target}
        ks = good if ks is None else ks & good
        if not ks:
            return None
    k = 0 if ks is None else min(ks, key=lambda k: (abs(k), k))
    return multiply(c0, power(r, k))


def same_outer_class(phi: BasisAutomorphism, psi: BasisAutomorphism) -> Word | None:
    """Conjugator c with psi = i_c o phi, or None when no single conjugator exists."""
    return inner_difference(phi.images, psi.images)
