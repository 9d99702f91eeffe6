"""Exact linear algebra over Z/p and subspaces of V = (Z/p)^{2n}.

Vectors are plain tuples of residues in (z|x) order: the first n entries are
the Z-exponents, the last n the X-exponents.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapacityError, DomainError, InputError

SUPPORTED_PRIMES = (2, 3, 5, 7)
ENUMERATION_LIMIT = 4096
ISOTROPIC_COUNT_LIMIT = 200_000

Vec = tuple  # tuple[int, ...] of residues mod p


@dataclass(frozen=True)
class PrimeConfig:
    p: int
    n: int

    def __post_init__(self):
        if self.p not in SUPPORTED_PRIMES:
            raise InputError(f"p={self.p} is not a supported prime {SUPPORTED_PRIMES}")
        if not isinstance(self.n, int) or self.n < 1:
            raise InputError(f"n must be a positive integer, got {self.n!r}")

    @property
    def d(self) -> int:
        return self.p**self.n

    @property
    def vcard(self) -> int:
        return self.p ** (2 * self.n)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def zero(self) -> Vec:
        return (0,) * (2 * self.n)

    def vectors(self) -> Iterator[Vec]:
        """All of V in lexicographic order."""
        return itertools.product(range(self.p), repeat=2 * self.n)

    def z(self, i: int) -> Vec:
        """Basis vector z_i (1-based)."""
        v = [0] * (2 * self.n)
        v[i - 1] = 1
        return tuple(v)

    def x(self, i: int) -> Vec:
        v = [0] * (2 * self.n)
        v[self.n + i - 1] = 1
        return tuple(v)

    def y(self, i: int) -> Vec:
        return vadd(self.x(i), self.z(i), self.p)

    def check(self, v: Sequence[int]) -> Vec:
        if len(v) != 2 * self.n:
            raise InputError(f"vector {list(v)} has length {len(v)}, expected {2 * self.n}")
        return tuple(int(c) % self.p for c in v)


def vadd(v: Vec, w: Vec, p: int) -> Vec:
    return tuple((a + b) % p for a, b in zip(v, w))


def vsub(v: Vec, w: Vec, p: int) -> Vec:
    return tuple((a - b) % p for a, b in zip(v, w))


def vscale(c: int, v: Vec, p: int) -> Vec:
    return tuple((c * a) % p for a in v)


def vneg(v: Vec, p: int) -> Vec:
    return tuple((-a) % p for a in v)


def vsum(vs: Iterable[Vec], p: int, length: int) -> Vec:
    acc = [0] * length
    for v in vs:
        for i, a in enumerate(v):
            acc[i] += a
    return tuple(a % p for a in acc)


def symplectic_form(v: Vec, w: Vec, p: int) -> int:
    """b(v, w) = v_x . w_z - w_x . v_z  (mod p)."""
    n = len(v) // 2
    s = 0
    for i in range(n):
        s += v[n + i] * w[i] - w[n + i] * v[i]
    return s % p


# --------------------------------------------------------------------------
# row reduction


def rref_mod(A, p: int, ncols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over Z/p.

    Pivots are only searched in the first ``ncols`` columns (default: all),
    which lets callers reduce an augmented matrix.
    """
    R = np.array(A, dtype=np.int64, copy=True) % p
    if R.ndim != 2:
        raise InputError("rref_mod expects a 2-d matrix")
    m, n = R.shape
    ncols = n if ncols is None else ncols
    chunk = max(2 * n, 256)
    if m > 2 * chunk:
        # tall systems: reduce block by block, carrying only the nonzero rows
        carry = R[:0]
        for start in range(0, m, chunk):
            block, _ = _rref_dense(np.concatenate([carry, R[start:start + chunk]]), p, ncols)
            carry = block[block.any(axis=1)]
        out, pivots = _rref_dense(carry, p, ncols)
        R = np.zeros((m, n), dtype=np.int64)
        R[:out.shape[0]] = out
        return R, pivots
    return _rref_dense(R, p, ncols)


def _rref_dense(R: np.ndarray, p: int, ncols: int) -> tuple[np.ndarray, list[int]]:
    """In-place row reduction of an int64 matrix already reduced mod p."""
    m, n = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            R[[r, k]] = R[[k, r]]
        inv = pow(int(R[r, c]), -1, p)
        R[r] = (R[r] * inv) % p
        col = R[:, c].copy()
        col[r] = 0
        rows = np.nonzero(col)[0]
        if rows.size:
            R[rows] = (R[rows] - np.outer(col[rows], R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rank_mod(A, p: int) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    if A.shape[1] > A.shape[0]:
        A = A.T  # same rank; tall matrices take the blockwise path
    return len(rref_mod(A, p)[1])


def nullspace_mod(A, p: int) -> list[Vec]:
    """Basis of {x : A x = 0} over Z/p."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[1]
    if A.shape[0] == 0:
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]
    R, piv = rref_mod(A, p)
    free = [j for j in range(n) if j not in set(piv)]
    basis = []
    for f in free:
        x = [0] * n
        x[f] = 1
        for row, c in enumerate(piv):
            x[c] = int(-R[row, f]) % p
        basis.append(tuple(x))
    return basis


# --------------------------------------------------------------------------
# subspaces


@dataclass(frozen=True)
class Subspace:
    """A subspace of V stored by its reduced row echelon basis.

    Two subspaces are equal iff their echelon bases coincide.
    """

    cfg: PrimeConfig
    basis: tuple[Vec, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def order(self) -> int:
        return self.cfg.p**self.dim

    @cached_property
    def elements(self) -> tuple[Vec, ...]:
        """Elements ordered by their coefficient tuples in the echelon basis."""
        p, L = self.cfg.p, 2 * self.cfg.n
        out = []
        for coeffs in itertools.product(range(p), repeat=self.dim):
            out.append(vsum((vscale(c, b, p) for c, b in zip(coeffs, self.basis)), p, L))
        return tuple(out)

    @cached_property
    def _element_set(self) -> frozenset:
        return frozenset(self.elements)

    @cached_property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.elements)}

    @cached_property
    def nonzero(self) -> tuple[Vec, ...]:
        return self.elements[1:]

    def __contains__(self, v) -> bool:
        return tuple(v) in self._element_set

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return self.order

    def issubspace(self, other: "Subspace") -> bool:
        return all(b in other for b in self.basis)

    def is_isotropic(self) -> bool:
        p = self.cfg.p
        return all(
            symplectic_form(a, b, p) == 0
            for a, b in itertools.combinations(self.basis, 2)
        )

    def sort_key(self):
        return (self.dim, self.basis)

    def __repr__(self):
        return f"Subspace(p={self.cfg.p}, n={self.cfg.n}, basis={list(self.basis)})"


def span(generators: Iterable[Sequence[int]], cfg: PrimeConfig) -> Subspace:
    gens = [cfg.check(g) for g in generators]
    if not gens:
        return Subspace(cfg, ())
    R, piv = rref_mod(gens, cfg.p)
    basis = tuple(tuple(int(a) for a in R[i]) for i in range(len(piv)))
    return Subspace(cfg, basis)


def zero_subspace(cfg: PrimeConfig) -> Subspace:
    return Subspace(cfg, ())


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    _same_cfg(a, b)
    return span(a.basis + b.basis, a.cfg)


def intersect(a: Subspace, b: Subspace) -> Subspace:
    _same_cfg(a, b)
    cfg = a.cfg
    if a.dim == 0 or b.dim == 0:
        return zero_subspace(cfg)
    p = cfg.p
    # columns: a_1..a_k, -b_1..-b_m ; null vectors give common elements
    cols = list(a.basis) + [vneg(v, p) for v in b.basis]
    M = np.array(cols, dtype=np.int64).T
    gens = []
    for null in nullspace_mod(M, p):
        gens.append(vsum((vscale(c, v, p) for c, v in zip(null[: a.dim], a.basis)), p, cfg.dim))
    return span(gens, cfg)


def _same_cfg(a: Subspace, b: Subspace):
    if a.cfg != b.cfg:
        raise InputError(f"subspaces live in different spaces: {a.cfg} vs {b.cfg}")


# --------------------------------------------------------------------------
# affine systems


@dataclass(frozen=True)
class AffineSolutionSet:
    """Solutions of A x = b over Z/p: ``particular + span(kernel_basis)``.

    ``particular`` is None when the system is inconsistent.
    """

    p: int
    nvars: int
    particular: Vec | None
    kernel_basis: tuple[Vec, ...]

    @property
    def empty(self) -> bool:
        return self.particular is None

    @property
    def count(self) -> int:
        return 0 if self.empty else self.p ** len(self.kernel_basis)

    def __iter__(self) -> Iterator[Vec]:
        if self.empty:
            return
        p = self.p
        for coeffs in itertools.product(range(p), repeat=len(self.kernel_basis)):
            x = list(self.particular)
            for c, k in zip(coeffs, self.kernel_basis):
                if c:
                    for i, a in enumerate(k):
                        x[i] += c * a
            yield tuple(a % p for a in x)


def solve_affine(equations, rhs, p: int, nvars: int | None = None) -> AffineSolutionSet:
    A = np.array(equations, dtype=np.int64)
    b = np.array(rhs, dtype=np.int64).reshape(-1)
    if A.ndim != 2:
        if A.size == 0 and nvars is not None:
            A = A.reshape(0, nvars)
        else:
            raise InputError("equations must be a 2-d matrix")
    m, n = A.shape
    if b.shape[0] != m:
        raise InputError(f"rhs has length {b.shape[0]}, expected {m}")
    if m == 0:
        return AffineSolutionSet(p, n, (0,) * n, tuple(nullspace_mod(A, p)))
    aug = np.concatenate([A % p, (b % p).reshape(-1, 1)], axis=1)
    R, piv = rref_mod(aug, p, ncols=n)
    r = len(piv)
    if np.any(R[r:, n] != 0):
        return AffineSolutionSet(p, n, None, ())
    x = [0] * n
    for row, c in enumerate(piv):
        x[c] = int(R[row, n])
    pivset = set(piv)
    kernel = []
    for f in (j for j in range(n) if j not in pivset):
        k = [0] * n
        k[f] = 1
        for row, c in enumerate(piv):
            k[c] = int(-R[row, f]) % p
        kernel.append(tuple(k))
    return AffineSolutionSet(p, n, tuple(x), tuple(kernel))


# --------------------------------------------------------------------------
# isotropic subspaces


def count_isotropic(cfg: PrimeConfig, k: int) -> int:
    """Number of k-dimensional isotropic subspaces of V."""
    p, n = cfg.p, cfg.n
    if k > n:
        return 0
    num, den = 1, 1
    for i in range(k):
        num *= p ** (2 * (n - i)) - 1
        den *= p ** (i + 1) - 1
    return num // den


def enumerate_isotropic(cfg: PrimeConfig, exactly_dim: int | None = None) -> list[Subspace]:
    """Every isotropic subspace of V (optionally of one dimension), sorted."""
    if cfg.vcard > ENUMERATION_LIMIT:
        raise CapacityError(f"|V| = {cfg.vcard} exceeds enumeration limit {ENUMERATION_LIMIT}")
    dims = range(cfg.n + 1) if exactly_dim is None else [exactly_dim]
    if exactly_dim is not None and not 0 <= exactly_dim <= cfg.dim:
        raise DomainError(f"dimension {exactly_dim} out of range")
    total = sum(count_isotropic(cfg, k) for k in range(max(dims, default=0) + 1))
    if total > ISOTROPIC_COUNT_LIMIT:
        raise CapacityError(f"{total} isotropic subspaces exceed limit {ISOTROPIC_COUNT_LIMIT}")
    top = max(dims, default=0)
    if top > cfg.n:
        return []
    p = cfg.p
    allv = list(cfg.vectors())[1:]
    layers = [[zero_subspace(cfg)]]
    for k in range(top):
        seen: dict[tuple, Subspace] = {}
        for sub in layers[-1]:
            for v in allv:
                if v in sub or any(symplectic_form(v, b, p) for b in sub.basis):
                    continue
                new = span(sub.basis + (v,), cfg)
                seen.setdefault(new.basis, new)
        layers.append(sorted(seen.values(), key=Subspace.sort_key))
    out = [s for k in dims for s in layers[k]]
    return out
