"""Context covers, the event presheaf E_beta, global sections and empirical models."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import rational
from .errors import (
    CapacityError,
    DomainError,
    IncompatibleModelError,
    InputPrecisionError,
)
from .gfp import (
    AffineSolutionSet,
    PrimeConfig,
    Subspace,
    Vec,
    count_isotropic,
    enumerate_isotropic,
    intersect,
    solve_affine,
    span,
    symplectic_form,
    vadd,
    vscale,
    zero_subspace,
)
from .pauli import restricted_beta_value
from .quantum import DensityMatrix, PROB_TOL, born

SECTION_LIMIT = 10**6


# --------------------------------------------------------------------------
# covers


@dataclass(frozen=True)
class ContextCover:
    """An intersection-closed family of isotropic subspaces."""

    cfg: PrimeConfig
    contexts: tuple[Subspace, ...]
    generators: tuple = field(default=(), compare=False, repr=False)
    name: str | None = field(default=None, compare=False)

    @cached_property
    def support(self) -> tuple[Vec, ...]:
        return tuple(sorted({v for I in self.contexts for v in I}))

    @cached_property
    def support_nonzero(self) -> tuple[Vec, ...]:
        z = self.cfg.zero()
        return tuple(v for v in self.support if v != z)

    @cached_property
    def maximal(self) -> tuple[Subspace, ...]:
        return tuple(
            I for I in self.contexts
            if not any(I != J and I.issubspace(J) for J in self.contexts)
        )

    @cached_property
    def below(self) -> dict:
        """For each context, the contexts strictly contained in it."""
        return {
            I: tuple(K for K in self.contexts if K != I and K.dim < I.dim and K.issubspace(I))
            for I in self.contexts
        }

    def __contains__(self, I: Subspace) -> bool:
        return I in set(self.contexts)

    def __iter__(self):
        return iter(self.contexts)

    def __len__(self):
        return len(self.contexts)

    def is_full(self) -> bool:
        """True when the cover is every isotropic subspace of V."""
        if len(self.contexts) != sum(count_isotropic(self.cfg, k) for k in range(self.cfg.n + 1)):
            return False
        try:
            full = enumerate_isotropic(self.cfg)
        except CapacityError:
            return False
        return len(full) == len(self.contexts) and set(full) == set(self.contexts)

    def longest_chain(self) -> int:
        """Length (number of strict inclusions) of the longest chain of contexts."""
        depth = {}
        for I in sorted(self.contexts, key=Subspace.sort_key):
            depth[I] = max((depth[K] + 1 for K in self.below[I]), default=0)
        return max(depth.values(), default=0)


def close_under_intersection(subspaces: Iterable[Subspace], cfg: PrimeConfig) -> list[Subspace]:
    found = {zero_subspace(cfg)}
    found.update(subspaces)
    frontier = list(found)
    while frontier:
        new = set()
        current = list(found)
        for a in frontier:
            for b in current:
                c = intersect(a, b)
                if c not in found:
                    new.add(c)
        found |= new
        frontier = list(new)
    return sorted(found, key=Subspace.sort_key)


def cover_from_subspaces(subspaces: Iterable[Subspace], cfg: PrimeConfig, **kw) -> ContextCover:
    subs = list(subspaces)
    for I in subs:
        if I.cfg != cfg:
            raise DomainError(f"{I} does not live in {cfg}")
        _require_isotropic(I.basis, cfg)
    return ContextCover(cfg, tuple(close_under_intersection(subs, cfg)), **kw)


def _require_isotropic(gens: Sequence[Vec], cfg: PrimeConfig):
    for a, b in itertools.combinations(gens, 2):
        f = symplectic_form(a, b, cfg.p)
        if f:
            raise DomainError(
                f"generators {list(a)} and {list(b)} do not commute: b = {f} (mod {cfg.p})"
            )


def make_cover(generator_lists: Sequence[Sequence[Sequence[int]]], cfg: PrimeConfig,
               name: str | None = None) -> ContextCover:
    subs = []
    for gens in generator_lists:
        gens = [cfg.check(g) for g in gens]
        _require_isotropic(gens, cfg)
        subs.append(span(gens, cfg))
    frozen = tuple(tuple(tuple(g) for g in gl) for gl in generator_lists)
    return cover_from_subspaces(subs, cfg, generators=frozen, name=name)


def full_cover(cfg: PrimeConfig) -> ContextCover:
    return ContextCover(cfg, tuple(enumerate_isotropic(cfg)), name=f"full:{cfg.p}:{cfg.n}")


# --------------------------------------------------------------------------
# outcome functions


@dataclass(frozen=True)
class OutcomeFunction:
    """s: I -> Z/p, values aligned with ``context.elements``."""

    context: Subspace
    values: tuple[int, ...]

    def __getitem__(self, v) -> int:
        return self.values[self.context.index[tuple(v)]]

    def __call__(self, v) -> int:
        return self[v]

    def restrict(self, K: Subspace) -> "OutcomeFunction":
        return OutcomeFunction(K, tuple(self[v] for v in K.elements))

    def on_basis(self) -> tuple[int, ...]:
        return tuple(self[b] for b in self.context.basis)

    def as_dict(self) -> dict:
        return dict(zip(self.context.elements, self.values))


def is_event(I: Subspace, values: dict) -> bool:
    p = I.cfg.p
    if values[I.cfg.zero()] % p:
        return False
    for v in I.nonzero:
        for w in I.nonzero:
            if (values[v] + values[w] - values[vadd(v, w, p)]) % p != restricted_beta_value(v, w, p):
                return False
    return True


def outcome_from_basis(I: Subspace, basis_values: Sequence[int]) -> OutcomeFunction:
    """Extend basis values by s(u + w) = s(u) + s(w) - beta(u, w)."""
    p = I.cfg.p
    vals = {I.cfg.zero(): 0}
    for b, sb in zip(I.basis, basis_values):
        prefix = list(vals.items())
        multiples = [(I.cfg.zero(), 0)]
        for c in range(1, p):
            prev, sprev = multiples[-1]
            cur = vscale(c, b, p)
            multiples.append((cur, (sprev + sb - restricted_beta_value(prev, b, p)) % p))
        for u, su in prefix:
            for m, sm in multiples[1:]:
                vals[vadd(u, m, p)] = (su + sm - restricted_beta_value(u, m, p)) % p
    if not is_event(I, vals):
        raise DomainError(f"basis values {list(basis_values)} do not extend to an event of {I}")
    return OutcomeFunction(I, tuple(vals[v] for v in I.elements))


@lru_cache(maxsize=None)
def events(I: Subspace) -> tuple[OutcomeFunction, ...]:
    """E_beta(I): every s with ds = beta|_I; there are p^dim(I) of them."""
    if not I.is_isotropic():
        raise DomainError(f"{I} is not isotropic")
    p = I.cfg.p
    return tuple(outcome_from_basis(I, bv) for bv in itertools.product(range(p), repeat=I.dim))


# --------------------------------------------------------------------------
# global sections


@dataclass(frozen=True)
class GlobalSection:
    support: tuple[Vec, ...]
    values: tuple[int, ...]

    def __getitem__(self, v) -> int:
        return self.values[self.support.index(tuple(v))]

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.values))

    def restrict(self, I: Subspace) -> OutcomeFunction:
        d = self.as_dict()
        return OutcomeFunction(I, tuple(d[v] for v in I.elements))


def section_system(cover: ContextCover):
    """Equations s(v) + s(w) - s(v+w) = beta(v, w), one per pair in a context."""
    p = cover.cfg.p
    unknowns = cover.support_nonzero
    col = {v: i for i, v in enumerate(unknowns)}
    zero = cover.cfg.zero()
    rows, rhs, seen = [], [], set()
    for I in cover.maximal:
        for v in I.nonzero:
            for w in I.nonzero:
                if (v, w) in seen:
                    continue
                seen.add((v, w))
                row = [0] * len(unknowns)
                row[col[v]] += 1
                row[col[w]] += 1
                s = vadd(v, w, p)
                if s != zero:
                    row[col[s]] -= 1
                rows.append([a % p for a in row])
                rhs.append(restricted_beta_value(v, w, p))
    return unknowns, rows, rhs


def section_space(cover: ContextCover) -> tuple[tuple[Vec, ...], AffineSolutionSet]:
    unknowns, rows, rhs = section_system(cover)
    return unknowns, solve_affine(rows, rhs, cover.cfg.p, nvars=len(unknowns))


def global_sections(cover: ContextCover, limit: int = SECTION_LIMIT):
    """All global sections as a list, or the affine solution set if there are more than ``limit``."""
    unknowns, sol = section_space(cover)
    if sol.count > limit:
        return sol
    zero = cover.cfg.zero()
    support = cover.support
    out = []
    for x in sol:
        d = dict(zip(unknowns, x))
        d[zero] = 0
        out.append(GlobalSection(support, tuple(d[v] for v in support)))
    return out


# --------------------------------------------------------------------------
# empirical models


@dataclass
class EmpiricalModel:
    cover: ContextCover
    tables: dict  # Subspace -> {OutcomeFunction: probability}
    exact: bool = False

    def table(self, I: Subspace) -> dict:
        return self.tables[I]

    def marginal(self, I: Subspace, K: Subspace) -> dict:
        out = {t: 0 for t in events(K)}
        for s, prob in self.tables[I].items():
            out[s.restrict(K)] += prob
        return out

    def entries(self):
        for I in self.cover.contexts:
            for s, prob in self.tables[I].items():
                yield I, s, prob


def snap_denominator(cfg: PrimeConfig) -> int:
    return cfg.p ** (2 * cfg.n + 4)


def snap(x: float, denominator: int, tol: float = PROB_TOL) -> Fraction:
    q = Fraction(round(x * denominator), denominator)
    if abs(float(q) - x) > tol:
        raise InputPrecisionError(f"{x!r} is not within {tol} of a multiple of 1/{denominator}")
    return q


def empirical_model(rho: DensityMatrix, cover: ContextCover, exact: bool | None = None) -> EmpiricalModel:
    """Born-rule probabilities Tr(rho P_s) on every context of the cover.

    With ``exact`` (default: whether rho came from stabilizer projectors) the
    probabilities are snapped to fractions with denominator p^(2n+4).
    """
    if rho.cfg != cover.cfg:
        raise DomainError(f"state lives in {rho.cfg}, cover in {cover.cfg}")
    exact = rho.stabilizer if exact is None else exact
    D = snap_denominator(cover.cfg)
    tables = {}
    for I in cover.contexts:
        row = {}
        for s in events(I):
            prob = born(rho, I, s)
            row[s] = snap(prob, D) if exact else prob
        tables[I] = row
    return EmpiricalModel(cover, tables, exact)


@dataclass
class CompatibilityReport:
    ok: bool
    normalization: list = field(default_factory=list)  # (I, total)
    mismatches: list = field(default_factory=list)  # (I, I', max deviation)


def compatibility_check(model: EmpiricalModel, tol: float = PROB_TOL) -> CompatibilityReport:
    tol = 0 if model.exact else tol
    cover = model.cover
    report = CompatibilityReport(True)
    for I in cover.contexts:
        total = sum(model.tables[I].values())
        if abs(total - 1) > tol or any(v < -tol for v in model.tables[I].values()):
            report.normalization.append((I, total))
    cache = {}

    def marg(I, K):
        if (I, K) not in cache:
            cache[(I, K)] = model.marginal(I, K)
        return cache[(I, K)]

    for I, J in itertools.combinations(cover.contexts, 2):
        K = intersect(I, J)
        a, b = marg(I, K), marg(J, K)
        dev = max(abs(a[t] - b[t]) for t in a)
        if dev > tol:
            report.mismatches.append((I, J, dev))
    report.ok = not report.normalization and not report.mismatches
    return report


def _variable_index(cover: ContextCover):
    idx = {}
    for I in cover.contexts:
        for s in events(I):
            idx[(I, s)] = len(idx)
    return idx


def nosignaling_constraints(cover: ContextCover):
    """Rows of the homogeneous marginal-agreement system, one per (K < I, t)."""
    idx = _variable_index(cover)
    rows = []
    for I in cover.contexts:
        for K in cover.below[I]:
            for t in events(K):
                row = [0] * len(idx)
                row[idx[(K, t)]] = -1
                for s in events(I):
                    if s.restrict(K) == t:
                        row[idx[(I, s)]] += 1
                rows.append(row)
    return idx, rows


def nosignaling_dimension(cover: ContextCover) -> int:
    idx, rows = nosignaling_constraints(cover)
    return len(idx) - rational.rank(rows)


def _inner_products(cover: ContextCover) -> tuple[list, np.ndarray]:
    """Matrix of (b_t|_I, chi_s) for rows (I, s) and columns t in V."""
    cfg = cover.cfg
    p = cfg.p
    V = list(cfg.vectors())
    roots = np.exp(2j * np.pi * np.arange(p) / p)
    keys, rows = [], []
    for I in cover.contexts:
        B = np.array([[symplectic_form(u, t, p) for t in V] for u in I.elements])
        for s in events(I):
            chi_conj = roots[(-np.array(s.values)) % p]
            rows.append((chi_conj[:, None] * roots[B]).sum(axis=0) / I.order)
            keys.append((I, s))
    return keys, np.array(rows)


def wigner_of_model(model: EmpiricalModel, tol: float = PROB_TOL) -> dict:
    """The unique c: V -> R with sum_t (b_t|_I, chi_s) c_t = model_I(s) on the full cover."""
    cover = model.cover
    if not cover.is_full():
        raise DomainError("wigner_of_model needs the full cover of isotropic subspaces")
    keys, M = _inner_products(cover)
    rhs = np.array([float(model.tables[I][s]) for I, s in keys])
    A = np.vstack([M.real, M.imag])
    b = np.concatenate([rhs, np.zeros_like(rhs)])
    c, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = np.abs(A @ c - b).max()
    if resid > tol:
        raise IncompatibleModelError(f"model has no preimage (residual {resid:.3g})")
    return dict(zip(cover.cfg.vectors(), c.tolist()))
