import pytest
from hypothesis import given, strategies as st

from traintrack.free_group import (
    BasisAutomorphism, are_conjugate, conj_class, cyclic_reduce, find_conjugator,
    format_word, identity_automorphism, inner_difference, inverse, multiply, parse_word, reduce,
    root_decomposition, verify_inverse_pair,
)

N = ["A", "B", "C"]
A, B, C = 1, 2, 3


def w(text):
    return parse_word(text, N)


def test_reduce_examples():
    assert reduce([A, -A, B]) == (B,)
    assert reduce([]) == ()
    assert reduce([B, A, -A, -B, C]) == (C,)


def test_cyclic_reduce_examples():
    assert cyclic_reduce(w("B A B'")) == ((A,), (B,))
    assert cyclic_reduce((A,)) == ((A,), ())
    assert cyclic_reduce(w("C B A B' C'")) == ((A,), (C, B))


def test_root_decomposition_examples():
    assert root_decomposition((A, A, A)) == ((A,), 3)
    assert root_decomposition((A, B)) == ((A, B), 1)
    assert root_decomposition((A, B, A, B)) == ((A, B), 2)


F1 = BasisAutomorphism(3, (w("A"), w("B A"), w("B C B B")))
F3 = BasisAutomorphism(3, (w("A C B A"), w("B A"), w("C B A")))
SWAP = BasisAutomorphism(2, ((2,), (1,)))


def test_apply_automorphism_examples():
    assert F1((B,)) == w("B A")
    assert F1(()) == ()
    assert F3((-C,)) == w("A' B' C'")


def test_verify_inverse_pair():
    assert verify_inverse_pair(SWAP, SWAP)
    assert not verify_inverse_pair(F1, identity_automorphism(3))


def test_parse_and_format_round_trip():
    assert format_word(w("A B' C"), N) == "A B' C"
    assert format_word((), N) == "1"
    with pytest.raises(ValueError):
        parse_word("D", N)


def test_conjugacy():
    assert are_conjugate(w("A B"), w("B A"))
    assert not are_conjugate(w("A B"), w("A B'"))
    c = find_conjugator(w("A B"), w("B A"))
    assert multiply(c, w("A B"), inverse(c)) == w("B A")
    assert conj_class(w("A B"), oriented=False) == conj_class(w("B' A'"), oriented=False)


def test_inner_difference_finds_single_conjugator():
    c = w("B C'")
    psi = F3.conjugate_by(c)
    d = inner_difference(F3.images, psi.images)
    assert d is not None
    assert all(multiply(d, a, inverse(d)) == b for a, b in zip(F3.images, psi.images))
    assert inner_difference(F1.images, F3.images) is None


letters = st.integers(1, 3).flatmap(lambda i: st.sampled_from([i, -i]))
seqs = st.lists(letters, max_size=30)


@given(seqs)
def test_reduce_idempotent(s):
    assert reduce(reduce(s)) == reduce(s)


@given(seqs, seqs)
def test_product_length_and_parity(u, v):
    n = len(reduce(list(u) + list(v)))
    assert n <= len(u) + len(v)
    assert n % 2 == (len(u) + len(v)) % 2


@given(seqs, seqs)
def test_automorphism_is_multiplicative(u, v):
    for phi in (F1, F3):
        assert phi(multiply(u, v)) == multiply(phi(reduce(u)), phi(reduce(v)))


@given(seqs)
def test_root_is_root_free(s):
    core, _ = cyclic_reduce(reduce(s))
    if core:
        r, k = root_decomposition(core)
        assert root_decomposition(r) == (r, 1)
        assert multiply(*([r] * k)) == core
