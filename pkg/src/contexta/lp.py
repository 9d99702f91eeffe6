"""Exact feasibility of {A x = b, x >= 0} over Q.

Phase one of the simplex method on a dense ``Fraction`` tableau with Bland's
rule.  An infeasible system comes back with a Farkas certificate y satisfying
y^T A >= 0 and y^T b < 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InputError, NumericalIntegrityError
from .gfp import rref_mod
from .rational import independent_rows

PRESOLVE_PRIME = 2147483647


@dataclass(frozen=True)
class RationalLP:
    A: tuple  # tuple of rows of Fractions
    b: tuple

    @classmethod
    def from_rows(cls, A, b) -> "RationalLP":
        A = tuple(tuple(Fraction(a) for a in row) for row in A)
        b = tuple(Fraction(x) for x in b)
        if len(A) != len(b):
            raise InputError(f"{len(A)} rows but {len(b)} right-hand sides")
        widths = {len(row) for row in A}
        if len(widths) > 1:
            raise InputError("ragged constraint matrix")
        return cls(A, b)

    @property
    def nvars(self) -> int:
        return len(self.A[0]) if self.A else 0

    def satisfied_by(self, x) -> bool:
        if any(v < 0 for v in x):
            return False
        return all(sum(a * v for a, v in zip(row, x)) == bi for row, bi in zip(self.A, self.b))

    def certifies_infeasible(self, y) -> bool:
        n = self.nvars
        for j in range(n):
            if sum(y[i] * self.A[i][j] for i in range(len(y))) < 0:
                return False
        return sum(yi * bi for yi, bi in zip(y, self.b)) < 0


@dataclass(frozen=True)
class LPResult:
    feasible: bool
    witness: tuple | None = None
    certificate: tuple | None = None
    pivots: int = 0


def presolve(lp: RationalLP) -> tuple[RationalLP, list[int]]:
    """Keep a set of rows of A that is independent modulo a large prime.

    Rows independent modulo a prime are independent over Q, so nothing is
    lost when the reduced problem is infeasible; a feasible answer is
    re-verified against every row by the caller.
    """
    if all(a.denominator == 1 for row in lp.A for a in row):
        M = np.array([[int(a) for a in row] for row in lp.A], dtype=np.int64)
        keep = rref_mod(M.T, PRESOLVE_PRIME)[1]
    else:
        keep = independent_rows([list(row) for row in lp.A])
    return RationalLP(tuple(lp.A[i] for i in keep), tuple(lp.b[i] for i in keep)), keep


def lp_feasible(lp: RationalLP, reduce: bool = True) -> LPResult:
    if reduce and lp.A:
        small, keep = presolve(lp)
        res = lp_feasible(small, reduce=False)
        if res.feasible:
            if lp.satisfied_by(res.witness):
                return res
            # a dropped row is inconsistent with the kept ones
            return lp_feasible(lp, reduce=False)
        y = [Fraction(0)] * len(lp.A)
        for i, yi in zip(keep, res.certificate):
            y[i] = yi
        if not lp.certifies_infeasible(y):
            raise NumericalIntegrityError("Farkas certificate failed exact verification")
        return LPResult(False, None, tuple(y), res.pivots)
    m, n = len(lp.A), lp.nvars
    if m == 0:
        return LPResult(True, tuple(Fraction(0) for _ in range(n)))
    sign = [(-1 if bi < 0 else 1) for bi in lp.b]
    # tableau columns: x_0..x_{n-1}, a_0..a_{m-1}, rhs
    T = []
    for i in range(m):
        row = [sign[i] * a for a in lp.A[i]]
        row += [Fraction(int(k == i)) for k in range(m)]
        row.append(sign[i] * lp.b[i])
        T.append(row)
    basis = [n + i for i in range(m)]
    width = n + m
    # reduced costs of min sum(a): c_j - c_B B^-1 A_j
    cost = [Fraction(0)] * (width + 1)
    for row in T:
        for j in range(width + 1):
            cost[j] -= row[j]
    for i in range(m):
        cost[n + i] += 1
    pivots = 0
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][width] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # phase one is bounded below by 0
            raise NumericalIntegrityError("unbounded phase-one problem")
        r = best[1]
        piv = T[r][enter]
        T[r] = [v / piv for v in T[r]]
        pr = T[r]
        nz = [j for j in range(width + 1) if pr[j] != 0]
        for i in range(m):
            if i != r and T[i][enter] != 0:
                f = T[i][enter]
                Ti = T[i]
                for j in nz:
                    Ti[j] -= f * pr[j]
        f = cost[enter]
        for j in nz:
            cost[j] -= f * pr[j]
        basis[r] = enter
        pivots += 1
    objective = -cost[width]
    if objective == 0:
        x = [Fraction(0)] * n
        for i, bv in enumerate(basis):
            if bv < n:
                x[bv] = T[i][width]
        if not lp.satisfied_by(x):
            raise NumericalIntegrityError("simplex witness failed exact verification")
        return LPResult(True, tuple(x), None, pivots)
    # duals of the sign-normalized rows: y_i = 1 - reduced cost of a_i
    y = [-(1 - cost[n + i]) * sign[i] for i in range(m)]
    if not lp.certifies_infeasible(y):
        raise NumericalIntegrityError("Farkas certificate failed exact verification")
    return LPResult(False, None, tuple(y), pivots)
