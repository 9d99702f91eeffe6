"""Pauli operators, the canonical extension cocycle and the group V x_b Z/p.

The section used throughout is ``eta(v) = mu^{qbar(v)} Z(v_z) X(v_x)`` with
``Z|a> = omega^a |a>`` and ``X|a> = |a - 1>`` (so that ``XZ = omega ZX``), and
``mu = i`` for p = 2 and ``mu = omega`` for odd p.  For p = 2, ``qbar(v)`` is
the mod-2 value of ``v_x . v_z`` regarded as 0 or 1 in Z/4; for odd p it is
``(v_x . v_z) / 2`` in Z/p.  All cocycle values are exact integers; the
matrices only serve as an oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError, DomainError
from .gfp import PrimeConfig, Subspace, Vec, symplectic_form, vadd

__all__ = [
    "symplectic_form",
    "cocycle_modulus",
    "q_form",
    "qbar",
    "beta",
    "beta0",
    "restricted_beta_value",
    "RestrictedCocycle",
    "restricted_beta",
    "eta_matrix",
    "PiGroup",
    "build_pi",
    "quadratic_form_Q",
]

MATRIX_DIM_LIMIT = 128
PI_ORDER_LIMIT = 8192


def cocycle_modulus(p: int) -> int:
    return 4 if p == 2 else p


def _dot_xz(v: Vec, w: Vec) -> int:
    """Integer v_x . w_z."""
    n = len(v) // 2
    return sum(v[n + i] * w[i] for i in range(n))


def q_form(v: Vec, p: int = 2) -> int:
    """The quadratic function q(v) = v_x . v_z mod p."""
    return _dot_xz(v, v) % p


def qbar(v: Vec, p: int) -> int:
    if p == 2:
        return _dot_xz(v, v) % 2
    return (_dot_xz(v, v) * pow(2, -1, p)) % p


def beta0(v: Vec, w: Vec, p: int) -> int:
    if p == 2:
        return (2 * _dot_xz(v, w)) % 4
    return _dot_xz(v, w) % p


def beta(v: Vec, w: Vec, p: int) -> int:
    """Canonical extension cocycle beta = beta0 + d(qbar), valued mod 4 or mod p."""
    m = cocycle_modulus(p)
    s = vadd(v, w, p)
    return (beta0(v, w, p) + qbar(v, p) - qbar(s, p) + qbar(w, p)) % m


def restricted_beta_value(v: Vec, w: Vec, p: int) -> int:
    """beta on a commuting pair as an element of Z/p (halved when p = 2)."""
    b = beta(v, w, p)
    if p == 2:
        if b % 2:
            raise DomainError(f"beta({v}, {w}) = {b} is odd; the pair does not commute")
        return b // 2
    if b:
        raise DomainError(f"beta({v}, {w}) = {b} is nonzero; the pair does not commute")
    return 0


@dataclass(frozen=True)
class RestrictedCocycle:
    context: Subspace
    table: dict

    def __call__(self, v: Vec, w: Vec) -> int:
        return self.table[(tuple(v), tuple(w))]

    def is_zero(self) -> bool:
        return not any(self.table.values())


def restricted_beta(I: Subspace) -> RestrictedCocycle:
    if not I.is_isotropic():
        raise DomainError(f"{I} is not isotropic")
    p = I.cfg.p
    table = {(v, w): restricted_beta_value(v, w, p) for v in I for w in I}
    return RestrictedCocycle(I, table)


# --------------------------------------------------------------------------
# matrices


def omega(p: int) -> complex:
    return np.exp(2j * np.pi / p)


def mu(p: int) -> complex:
    return 1j if p == 2 else omega(p)


@lru_cache(maxsize=None)
def _basis_digits(p: int, n: int) -> np.ndarray:
    # row k: the base-p digits of k, qudit 1 most significant
    return np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64)


def eta_matrix(v: Vec, cfg: PrimeConfig) -> np.ndarray:
    """mu^{qbar(v)} Z(v_z) X(v_x) as a dense d x d matrix."""
    d = cfg.d
    if d > MATRIX_DIM_LIMIT:
        raise CapacityError(f"d = {d} exceeds matrix limit {MATRIX_DIM_LIMIT}")
    p, n = cfg.p, cfg.n
    v = cfg.check(v)
    vz = np.array(v[:n], dtype=np.int64)
    vx = np.array(v[n:], dtype=np.int64)
    digits = _basis_digits(p, n)
    # X acts as the transpose of the shift on bras: X(v_x)|a> = |a - v_x>
    targets = (digits - vx) % p
    weights = p ** np.arange(n - 1, -1, -1)
    rows = targets @ weights
    phases = omega(p) ** ((targets @ vz) % p) * mu(p) ** qbar(v, p)
    M = np.zeros((d, d), dtype=complex)
    M[rows, np.arange(d)] = phases
    return M


# --------------------------------------------------------------------------
# the group pi = V x_b Z/p


@dataclass(frozen=True)
class PiGroup:
    """Central extension of V by Z/p with cocycle b.

    Elements are pairs (v, t); (v,t)(w,s) = (v+w, t+s+b(v,w)).
    """

    cfg: PrimeConfig

    @property
    def order(self) -> int:
        return self.cfg.vcard * self.cfg.p

    @property
    def elements(self) -> list[tuple[Vec, int]]:
        return [(v, t) for v in self.cfg.vectors() for t in range(self.cfg.p)]

    @property
    def identity(self):
        return (self.cfg.zero(), 0)

    def mul(self, a, b):
        p = self.cfg.p
        (v, t), (w, s) = a, b
        return (vadd(v, w, p), (t + s + symplectic_form(v, w, p)) % p)

    def inverse(self, a):
        p = self.cfg.p
        v, t = a
        # (v,t)(-v,-t) = (0, b(v,-v)) = (0, 0)
        return (tuple((-c) % p for c in v), (-t) % p)

    def embed(self, v: Vec):
        return (tuple(v), 0)

    def project(self, a) -> Vec:
        return a[0]


def build_pi(cfg: PrimeConfig) -> PiGroup:
    if cfg.vcard * cfg.p > PI_ORDER_LIMIT:
        raise CapacityError(f"|pi| = {cfg.vcard * cfg.p} exceeds limit {PI_ORDER_LIMIT}")
    return PiGroup(cfg)


def q_map(v: Vec, t: int) -> tuple[Vec, int]:
    """The isomorphism pi -> V x Z/2, (v, t) -> (v, t + q(v)); p = 2 only."""
    return (tuple(v), (t + q_form(v)) % 2)


def quadratic_form_Q(v: Vec, t: int, p: int = 2) -> int:
    """Q(v, t) = t + q(v) mod 2 on V x Z/2."""
    if p != 2:
        raise DomainError("the quadratic form Q is only defined for p = 2")
    return (t + q_form(v)) % 2
