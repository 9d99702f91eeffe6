"""Contextuality verdicts: exact LP over global sections, Wigner negativity,
extended covers and eigenvalue-function inequalities."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import rational
from .errors import CapacityError, DomainError, IncompatibleModelError, InputPrecisionError
from .gfp import Subspace, symplectic_form
from .lp import LPResult, RationalLP, lp_feasible
from .presheaf import (
    ContextCover,
    EmpiricalModel,
    GlobalSection,
    OutcomeFunction,
    compatibility_check,
    cover_from_subspaces,
    events,
    global_sections,
    is_event,
    nosignaling_constraints,
    snap,
    snap_denominator,
)
from .quantum import DensityMatrix, PROB_TOL, _roots, born, eigenvalue_function, wigner

NEGATIVITY_TOL = 1e-9
MARGINAL_BAND = 1e-6
SECTION_GUARD = 20000
BRIDGE_DENOMINATOR = 10**8

NONCONTEXTUAL = "noncontextual"
CONTEXTUAL = "contextual"
STRONGLY_CONTEXTUAL = "strongly_contextual"


@dataclass(frozen=True)
class Verdict:
    kind: str
    witness: dict | None = None  # GlobalSection -> Fraction
    certificate: tuple | None = None  # Farkas vector, one entry per (I, s)
    sections: int = 0

    @property
    def contextual(self) -> bool:
        return self.kind != NONCONTEXTUAL


# --------------------------------------------------------------------------
# rationalization


@lru_cache(maxsize=16)
def _bridge_system(cover: ContextCover):
    """Reduced row echelon form of the normalization and marginal-agreement system."""
    idx, rows = nosignaling_constraints(cover)
    rhs = [0] * len(rows)
    for I in cover.contexts:
        rows.append([int(I2 == I) for (I2, _s) in idx])
        rhs.append(1)
    R, pivots = rational.rref([r + [b] for r, b in zip(rows, rhs)], ncols=len(idx))
    pivset = set(pivots)
    free = [j for j in range(len(idx)) if j not in pivset]
    return list(idx), pivots, free, R[:len(pivots)]


def rationalize_model(model: EmpiricalModel, mode: str = "strict") -> EmpiricalModel:
    """Exact copy of a float model.

    ``strict`` snaps every entry to a multiple of 1/p^(2n+4).  ``bridge``
    rounds the free coordinates of the normalized, marginal-compatible affine
    space to nearby fractions and solves exactly for the rest.  Both refuse
    if any entry moves by more than 1e-9.
    """
    if model.exact:
        return model
    cover = model.cover
    if mode == "strict":
        D = snap_denominator(cover.cfg)
        tables = {I: {s: snap(float(x), D) for s, x in row.items()} for I, row in model.tables.items()}
    elif mode == "bridge":
        idx, pivots, free, R = _bridge_system(cover)
        flat = [float(model.tables[I][s]) for I, s in idx]
        x = [None] * len(idx)
        for j in free:
            x[j] = Fraction(flat[j]).limit_denominator(BRIDGE_DENOMINATOR)
        for row, j in zip(R, pivots):
            x[j] = row[-1] - sum(row[f] * x[f] for f in free if row[f])
        tables = {I: {} for I in cover.contexts}
        for (I, s), q, v in zip(idx, x, flat):
            if abs(float(q) - v) > PROB_TOL:
                raise InputPrecisionError(f"rationalization moved an entry of {I} by more than {PROB_TOL}")
            tables[I][s] = q
    else:
        raise ValueError(f"unknown rationalization mode {mode!r}")
    out = EmpiricalModel(cover, tables, exact=True)
    report = compatibility_check(out)
    if report.mismatches:
        raise InputPrecisionError("rationalized model is not marginal-compatible; use mode='bridge'")
    return out


# --------------------------------------------------------------------------
# LP over global sections


def _section_lp(model: EmpiricalModel, sections: list[GlobalSection]):
    keys = [(I, s) for I in model.cover.contexts for s in events(I)]
    row_of = {k: i for i, k in enumerate(keys)}
    A = [[0] * len(sections) for _ in keys]
    for j, g in enumerate(sections):
        for I in model.cover.contexts:
            A[row_of[(I, g.restrict(I))]][j] = 1
    b = [model.tables[I][s] for I, s in keys]
    return keys, RationalLP.from_rows(A, b)


def _point_lp(model: EmpiricalModel):
    """Variables t in V, where t is the character u -> b(u, t); p odd only."""
    cfg = model.cover.cfg
    if cfg.p == 2:
        raise DomainError("hidden='points' needs an odd prime (characters are not events for p=2)")
    V = list(cfg.vectors())
    A, b = [], []
    for I in model.cover.contexts:
        for s in events(I):
            A.append([int(all(s[u] == symplectic_form(u, t, cfg.p) for u in I.basis)) for t in V])
            b.append(model.tables[I][s])
    return V, RationalLP.from_rows(A, b)


def is_noncontextual(model: EmpiricalModel, mode: str = "strict", hidden: str = "sections") -> Verdict:
    """Exact verdict for a compatible model.

    ``hidden='sections'`` uses distributions on the glued sections of the
    cover; ``hidden='points'`` (odd p) uses distributions on the events of
    the whole space V, i.e. on its |V| characters.  The two agree whenever
    every glued section is linear on V, which fails for n = 1.
    """
    if hidden == "points":
        report = compatibility_check(model)
        if not report.ok:
            raise IncompatibleModelError(f"model fails compatibility: {len(report.mismatches)} mismatched pairs")
        V, lp = _point_lp(rationalize_model(model, mode))
        res = lp_feasible(lp)
        if res.feasible:
            return Verdict(NONCONTEXTUAL, witness={t: x for t, x in zip(V, res.witness) if x}, sections=len(V))
        return Verdict(CONTEXTUAL, certificate=res.certificate, sections=len(V))
    if hidden != "sections":
        raise ValueError(f"unknown hidden-variable space {hidden!r}")
    report = compatibility_check(model)
    if not report.ok:
        raise IncompatibleModelError(f"model fails compatibility: {len(report.mismatches)} mismatched pairs")
    sections = global_sections(model.cover, limit=SECTION_GUARD)
    if not isinstance(sections, list):
        raise CapacityError(f"{sections.count} global sections exceed the LP guard {SECTION_GUARD}")
    if not sections:
        return Verdict(STRONGLY_CONTEXTUAL)
    exact = rationalize_model(model, mode)
    _keys, lp = _section_lp(exact, sections)
    res: LPResult = lp_feasible(lp)
    if res.feasible:
        witness = {g: x for g, x in zip(sections, res.witness) if x}
        return Verdict(NONCONTEXTUAL, witness=witness, sections=len(sections))
    return Verdict(CONTEXTUAL, certificate=res.certificate, sections=len(sections))


def pushforward(witness: dict, cover: ContextCover) -> dict:
    """theta: a distribution on global sections -> its marginal on every context."""
    out = {I: {s: Fraction(0) for s in events(I)} for I in cover.contexts}
    for g, x in witness.items():
        for I in cover.contexts:
            out[I][g.restrict(I)] += x
    return out


# --------------------------------------------------------------------------
# Wigner negativity


@dataclass(frozen=True)
class NegativityResult:
    minimum: float
    negative: bool
    marginal: bool

    @property
    def verdict(self) -> str:
        return "negative" if self.negative else "nonnegative"


def wigner_negativity(rho: DensityMatrix) -> NegativityResult:
    m = wigner(rho).min()
    return NegativityResult(m, m < -NEGATIVITY_TOL, abs(m) <= MARGINAL_BAND)


# --------------------------------------------------------------------------
# extended covers and inequalities


def extend_cover(cover: ContextCover, J: Subspace) -> ContextCover:
    """The cover I together with J and every I ∩ J."""
    if not J.is_isotropic():
        raise DomainError(f"{J} is not isotropic")
    if J in cover:
        return cover
    gens = cover.generators + (tuple(J.basis),) if cover.generators else ()
    return cover_from_subspaces(list(cover.contexts) + [J], cover.cfg, generators=gens,
                                name=f"{cover.name}+J" if cover.name else None)


def outcome_function(J: Subspace, values) -> OutcomeFunction:
    """Wrap a dict or full value tuple as an event of J, checking ds = beta."""
    if isinstance(values, OutcomeFunction):
        values = values.as_dict()
    if not isinstance(values, dict):
        values = dict(zip(J.elements, values))
    if set(values) != set(J.elements) or not is_event(J, values):
        raise DomainError(f"values do not define an event of {J}")
    return OutcomeFunction(J, tuple(values[u] % J.cfg.p for u in J.elements))


def eigen_outcome(rho: DensityMatrix, J: Subspace, tol: float = PROB_TOL) -> OutcomeFunction:
    """The eigenvalue function of a common eigenstate of eta(J)."""
    return outcome_function(J, eigenvalue_function(rho, J, tol))


def eigenvalue_functional(rho: DensityMatrix, J: Subspace, s0) -> float:
    """ev_{s0}: the weight of s0 in the state's distribution on J."""
    return born(rho, J, outcome_function(J, s0))


def _inequality_support(cover: ContextCover, J: Subspace) -> tuple:
    support = set(cover.support)
    A = tuple(a for a in J.nonzero if a in support)
    if not A:
        raise DomainError("J meets the cover's support only in 0")
    return A


def correlator_value(rho: DensityMatrix, cover: ContextCover, J: Subspace, s0) -> float:
    """|A|^-1 sum_{a in A} Re(omega^-s0(a) Tr(rho eta(a))), A = (J ∩ support) minus 0."""
    s0 = outcome_function(J, s0)
    roots = _roots(J.cfg.p)
    A = _inequality_support(cover, J)
    return float(np.mean([(roots[(-s0[a]) % J.cfg.p] * rho.expectation(a)).real for a in A]))


def correlator_terms(rho: DensityMatrix, cover: ContextCover, J: Subspace, s0) -> list:
    """(a, s0(a), Tr(rho eta(a))) for each term of the correlator."""
    s0 = outcome_function(J, s0)
    return [(a, s0[a], rho.expectation(a)) for a in _inequality_support(cover, J)]


def noncontextual_bound(cover: ContextCover, J: Subspace, s0) -> Fraction:
    """Largest correlator value attained by a deterministic global section of the cover.

    Exact for p in {2, 3}, where the real parts of roots of unity are rational.
    """
    p = J.cfg.p
    if p not in (2, 3):
        raise DomainError("exact bounds are available for p = 2 and p = 3")
    s0 = outcome_function(J, s0)
    A = _inequality_support(cover, J)
    sections = global_sections(cover, limit=SECTION_GUARD)
    if not isinstance(sections, list):
        raise CapacityError(f"{sections.count} global sections exceed the guard {SECTION_GUARD}")
    if not sections:
        raise DomainError("the cover has no global sections; no classical bound exists")
    re = [Fraction(1)] + [Fraction(-1) if p == 2 else Fraction(-1, 2)] * (p - 1)
    best = None
    for g in sections:
        d = g.as_dict()
        val = sum(re[(d[a] - s0[a]) % p] for a in A) / len(A)
        best = val if best is None or val > best else best
    return best


@dataclass(frozen=True)
class InequalityReport:
    ev: float
    correlator: float
    bound: Fraction
    violated: bool
    s0: OutcomeFunction
    terms: list = field(default_factory=list)


def inequality(rho: DensityMatrix, cover: ContextCover, J: Subspace, s0=None,
               tol: float = PROB_TOL) -> InequalityReport:
    s0 = eigen_outcome(rho, J, tol) if s0 is None else outcome_function(J, s0)
    ev = eigenvalue_functional(rho, J, s0)
    corr = correlator_value(rho, cover, J, s0)
    bound = noncontextual_bound(cover, J, s0)
    return InequalityReport(ev, corr, bound, corr > float(bound) + PROB_TOL, s0,
                            correlator_terms(rho, cover, J, s0))
