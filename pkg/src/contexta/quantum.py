"""Dense states, context projectors, point operators and Wigner functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .errors import DomainError, InputError, NumericalIntegrityError
from .gfp import PrimeConfig, Subspace, Vec, symplectic_form
from .pauli import eta_matrix, restricted_beta_value

MATRIX_TOL = 1e-10
PROB_TOL = 1e-9


@lru_cache(maxsize=65536)
def _eta(v: Vec, cfg: PrimeConfig) -> np.ndarray:
    M = eta_matrix(v, cfg)
    M.setflags(write=False)
    return M


@lru_cache(maxsize=None)
def _form_matrix(cfg: PrimeConfig) -> np.ndarray:
    V = list(cfg.vectors())
    B = np.array([[symplectic_form(v, u, cfg.p) for u in V] for v in V], dtype=np.int64)
    B.setflags(write=False)
    return B


def _roots(p: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(p) / p)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray
    cfg: PrimeConfig
    label: str | None = None
    # set for states built from stabilizer projectors; enables exact probabilities
    stabilizer: bool = False

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        d = self.cfg.d
        if rho.shape != (d, d):
            raise InputError(f"density matrix has shape {rho.shape}, expected {(d, d)}")
        if not np.allclose(rho, rho.conj().T, atol=MATRIX_TOL):
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > MATRIX_TOL:
            raise DomainError(f"density matrix has trace {np.trace(rho).real:.12g}")
        if np.linalg.eigvalsh(rho).min() < -PROB_TOL:
            raise DomainError("density matrix is not positive semi-definite")
        rho = rho.copy()
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @classmethod
    def from_ket(cls, psi, cfg: PrimeConfig, **kw) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), cfg, **kw)

    def expectation(self, v: Vec) -> complex:
        return complex(np.trace(self.entries @ _eta(tuple(v), self.cfg)))


def named_state(name: str, cfg: PrimeConfig, **params) -> DensityMatrix:
    """ghz, bell, basis (k=...), maximally_mixed, random (seed=..., mix=...)."""
    d = cfg.d
    key = name.lower().replace("-", "_")
    if key == "maximally_mixed":
        return DensityMatrix(np.eye(d) / d, cfg, label=key, stabilizer=True)
    if key == "basis":
        k = int(params.get("k", 0))
        if not 0 <= k < d:
            raise InputError(f"basis index {k} out of range for d={d}")
        psi = np.zeros(d)
        psi[k] = 1
        return DensityMatrix.from_ket(psi, cfg, label=f"basis({k})", stabilizer=True)
    if key in ("ghz", "bell"):
        need = (2, 3) if key == "ghz" else (2, 2)
        if (cfg.p, cfg.n) != need:
            raise InputError(f"state {key!r} needs p={need[0]}, n={need[1]}, got p={cfg.p}, n={cfg.n}")
        psi = np.zeros(d)
        psi[0] = psi[d - 1] = 1
        return DensityMatrix.from_ket(psi, cfg, label=key, stabilizer=True)
    if key == "random":
        seed = int(params.get("seed", 0))
        mix = float(params.get("mix", 0.0))
        if not 0 <= mix <= 1:
            raise InputError(f"mix must lie in [0, 1], got {mix}")
        rng = np.random.default_rng(seed)
        psi = rng.normal(size=d) + 1j * rng.normal(size=d)
        pure = DensityMatrix.from_ket(psi, cfg).entries
        rho = (1 - mix) * pure + mix * np.eye(d) / d
        return DensityMatrix(rho, cfg, label=f"random({seed},{mix:g})")
    raise InputError(f"unknown state {name!r}")


def _check_event(I: Subspace, s) -> None:
    p = I.cfg.p
    if s[I.cfg.zero()] % p:
        raise DomainError("outcome function must vanish at 0")
    for v in I.nonzero:
        for w in I.nonzero:
            lhs = (s[v] + s[w] - s[tuple((a + b) % p for a, b in zip(v, w))]) % p
            if lhs != restricted_beta_value(v, w, p):
                raise DomainError(f"outcome function violates ds = beta at ({v}, {w})")


def projector(I: Subspace, s, check: bool = True) -> np.ndarray:
    """P_s = |I|^-1 sum_u conj(chi_s(u)) eta(u)."""
    if check:
        _check_event(I, s)
    cfg = I.cfg
    roots = _roots(cfg.p)
    P = np.zeros((cfg.d, cfg.d), dtype=complex)
    for u in I:
        P += roots[(-s[u]) % cfg.p] * _eta(u, cfg)
    return P / I.order


def eigenstate(I: Subspace, s) -> DensityMatrix:
    """The normalized projector P_s / Tr P_s (a pure state when I is Lagrangian)."""
    P = projector(I, s)
    return DensityMatrix(P / np.trace(P).real, I.cfg, label="eigenstate", stabilizer=True)


def point_operator(v: Vec, cfg: PrimeConfig) -> np.ndarray:
    """A_v = |V|^{-1/2} sum_u omega^{b(v,u)} eta(u)."""
    v = cfg.check(v)
    roots = _roots(cfg.p)
    A = np.zeros((cfg.d, cfg.d), dtype=complex)
    for u in cfg.vectors():
        A += roots[symplectic_form(v, u, cfg.p)] * _eta(u, cfg)
    return A / np.sqrt(cfg.vcard)


@dataclass(frozen=True, eq=False)
class WignerFunction:
    cfg: PrimeConfig
    values: np.ndarray  # aligned with cfg.vectors()
    vectors: tuple = field(repr=False, default=())

    def __getitem__(self, v: Vec) -> float:
        return float(self.values[self._index[tuple(v)]])

    @cached_property
    def _index(self):
        return {v: i for i, v in enumerate(self.vectors)}

    def as_dict(self) -> dict:
        return {v: float(w) for v, w in zip(self.vectors, self.values)}

    def min(self) -> float:
        return float(self.values.min())

    def reconstruct(self) -> np.ndarray:
        rho = np.zeros((self.cfg.d, self.cfg.d), dtype=complex)
        for v, w in zip(self.vectors, self.values):
            rho += w * point_operator(v, self.cfg)
        return rho


def pauli_expectations(rho: DensityMatrix) -> np.ndarray:
    """Tr(rho eta(u)) for u in cfg.vectors() order."""
    cfg = rho.cfg
    return np.array([np.trace(rho.entries @ _eta(u, cfg)) for u in cfg.vectors()])


def wigner(rho: DensityMatrix) -> WignerFunction:
    cfg = rho.cfg
    V = tuple(cfg.vectors())
    # W(v) = |V|^-1 sum_u omega^{b(v,u)} Tr(rho eta(u))
    phases = _roots(cfg.p)[_form_matrix(cfg)]
    W = phases @ pauli_expectations(rho) / cfg.vcard
    if np.abs(W.imag).max() > MATRIX_TOL:
        raise NumericalIntegrityError(f"Wigner function has imaginary residue {np.abs(W.imag).max():.3g}")
    return WignerFunction(cfg, W.real.copy(), V)


def born(rho: DensityMatrix, I: Subspace, s) -> float:
    val = np.trace(rho.entries @ projector(I, s)).real
    if not -PROB_TOL <= val <= 1 + PROB_TOL:
        raise NumericalIntegrityError(f"Born probability {val:.12g} outside [0, 1]")
    return float(min(max(val, 0.0), 1.0))


def eigenvalue_function(rho: DensityMatrix, J: Subspace, tol: float = PROB_TOL) -> dict:
    """Values s(u) with Tr(rho eta(u)) = omega^{s(u)} for every u in J.

    Raises DomainError unless rho is a common eigenstate of eta(J).
    """
    p = J.cfg.p
    roots = _roots(p)
    out = {}
    for u in J:
        e = rho.expectation(u)
        k = int(np.argmin(np.abs(roots - e)))
        if abs(roots[k] - e) > tol:
            raise DomainError(f"state is not an eigenstate of eta({u}): <eta> = {e:.6g}")
        out[u] = k
    return out
