"""Row reduction and projections over the rationals with ``Fraction``."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import DomainError

Matrix = list  # list[list[Fraction]]


def to_fractions(A) -> Matrix:
    return [[Fraction(x) for x in row] for row in A]


def rref(A, ncols: int | None = None) -> tuple[Matrix, list[int]]:
    R = to_fractions(A)
    m = len(R)
    if m == 0:
        return R, []
    n = len(R[0])
    ncols = n if ncols is None else ncols
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        k = next((i for i in range(r, m) if R[i][c] != 0), None)
        if k is None:
            continue
        R[r], R[k] = R[k], R[r]
        piv = R[r][c]
        if piv != 1:
            R[r] = [x / piv for x in R[r]]
        row_r = R[r]
        nz = [j for j in range(c, n) if row_r[j] != 0]
        for i in range(m):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                Ri = R[i]
                for j in nz:
                    Ri[j] -= f * row_r[j]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(A) -> int:
    return len(rref(A)[1])


def solve(A, b) -> list[Fraction] | None:
    """One solution of A x = b (free variables zero) or None if inconsistent."""
    m = len(A)
    if m == 0:
        return None
    n = len(A[0])
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    R, piv = rref(aug, ncols=n)
    if any(R[i][n] != 0 for i in range(len(piv), m)):
        return None
    x = [Fraction(0)] * n
    for row, c in enumerate(piv):
        x[c] = R[row][n]
    return x


def independent_rows(A) -> list[int]:
    """Indices of a maximal linearly independent set of rows of A."""
    if not A:
        return []
    T = [list(col) for col in zip(*A)]
    return rref(T)[1]


def project_affine(A, b, x: Sequence) -> list[Fraction]:
    """Orthogonal projection of x onto {y : A y = b}, exactly."""
    x = [Fraction(v) for v in x]
    full, full_b = to_fractions(A), [Fraction(v) for v in b]
    keep = independent_rows(full)
    A = [full[i] for i in keep]
    b = [full_b[i] for i in keep]
    resid = [sum(a * v for a, v in zip(row, x)) - bi for row, bi in zip(A, b)]
    G = [[sum(a * c for a, c in zip(ri, rj)) for rj in A] for ri in A]
    y = solve(G, resid)
    if y is None:
        raise DomainError("affine constraint system is inconsistent")
    out = list(x)
    for yi, row in zip(y, A):
        if yi:
            for j, a in enumerate(row):
                if a:
                    out[j] -= yi * a
    if any(sum(a * v for a, v in zip(row, out)) != bi for row, bi in zip(full, full_b)):
        raise DomainError("affine constraint system is inconsistent")
    return out
