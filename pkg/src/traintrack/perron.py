"""Perron-Frobenius data of nonnegative integer matrices.

Floats come from power iteration; exact comparisons go through the integer
characteristic polynomial and its irreducible factor carrying the PF root.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy

_x = sympy.Symbol("x")


def is_irreducible(M) -> bool:
    A = np.asarray(M) > 0
    n = A.shape[0]
    if n == 0:
        return False
    reach = A.copy()
    # transitive closure by repeated squaring
    for _ in range(max(1, int(np.ceil(np.log2(n))) + 1)):
        reach = reach | ((reach.astype(np.int64) @ reach.astype(np.int64)) > 0)
    return bool(reach.all())


def is_permutation(M) -> bool:
    A = np.asarray(M)
    return bool(A.size and ((A == 0) | (A == 1)).all()
                and (A.sum(axis=0) == 1).all() and (A.sum(axis=1) == 1).all())


def power_iteration(M, tol: float = 1e-12, max_iter: int = 10**6) -> float:
    """PF eigenvalue of an irreducible nonnegative matrix.

    Iterates on M + I, which is primitive, so periodic matrices converge too.
    """
    A = np.asarray(M, dtype=float)
    n = A.shape[0]
    B = A + np.eye(n)
    v = np.ones(n) / n
    lam = 0.0
    for _ in range(max_iter):
        w = B @ v
        s = w.sum()
        w = w / s
        if np.abs(w - v).max() < tol and abs(s - lam) < tol:
            lam = s
            break
        v, lam = w, s
    return float(lam - 1.0)


def charpoly(M) -> tuple[int, ...]:
    """Integer coefficients of det(xI - M), leading coefficient first."""
    return _charpoly(tuple(tuple(int(a) for a in row) for row in np.asarray(M)))


@lru_cache(maxsize=256)
def _charpoly(rows) -> tuple[int, ...]:
    p = sympy.Matrix(rows).charpoly(_x)
    return tuple(int(c) for c in p.all_coeffs())


@lru_cache(maxsize=1024)
def _top_root(coeffs: tuple[int, ...]):
    roots = sympy.Poly(list(coeffs), _x).real_roots()
    return max(roots) if roots else None


def max_real_root(coeffs) -> float:
    top = _top_root(tuple(int(c) for c in coeffs))
    return float(top.evalf(30)) if top is not None else float("nan")


@lru_cache(maxsize=1024)
def _pf_factor(coeffs: tuple[int, ...]) -> tuple[int, ...]:
    best, best_val = None, None
    # distinct irreducible factors share no roots, so the top root picks one factor
    for fac, _ in sympy.factor_list(sympy.Poly(list(coeffs), _x).as_expr(), _x)[1]:
        c = [int(a) for a in sympy.Poly(fac, _x).all_coeffs()]
        if c[0] < 0:
            c = [-a for a in c]
        top = _top_root(tuple(c))
        if top is not None and (best_val is None or top > best_val):
            best, best_val = tuple(c), top
    if best is None:
        raise AssertionError("polynomial has no real root")
    return best


def pf_factor(coeffs) -> tuple[int, ...]:
    """The irreducible factor of the polynomial that carries its largest real root."""
    return _pf_factor(tuple(int(c) for c in coeffs))


@dataclass(frozen=True)
class PFData:
    value: float
    charpoly: tuple[int, ...]
    factor: tuple[int, ...]
    exact_value: float

    def same_as(self, other: "PFData") -> bool:
        return self.factor == other.factor


def pf_data(M) -> PFData:
    cp = charpoly(M)
    return PFData(power_iteration(M), cp, pf_factor(cp), max_real_root(cp))
