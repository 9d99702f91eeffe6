from fractions import Fraction

import numpy as np
import pytest

from contexta.covers import named_context, named_cover
from contexta.decision import (
    CONTEXTUAL,
    NONCONTEXTUAL,
    STRONGLY_CONTEXTUAL,
    _section_lp,
    eigen_outcome,
    eigenvalue_functional,
    extend_cover,
    inequality,
    is_noncontextual,
    noncontextual_bound,
    outcome_function,
    pushforward,
    rationalize_model,
    wigner_negativity,
)
from contexta.errors import DomainError, InputPrecisionError
from contexta.gfp import PrimeConfig, span, zero_subspace
from contexta.presheaf import empirical_model, events, full_cover, global_sections, make_cover
from contexta.quantum import DensityMatrix, named_state, projector

STAR_J = named_context("star:5")


def _eigenstate(J, s):
    return DensityMatrix(projector(J, s), J.cfg)


def _check_verdict(model, verdict):
    """Witnesses push forward exactly; certificates verify exactly."""
    exact = rationalize_model(model, "bridge")
    if verdict.kind == NONCONTEXTUAL:
        assert all(x >= 0 for x in verdict.witness.values())
        assert sum(verdict.witness.values()) == 1
        assert pushforward(verdict.witness, model.cover) == exact.tables
    elif verdict.kind == CONTEXTUAL:
        _keys, lp = _section_lp(exact, global_sections(model.cover))
        assert lp.certifies_infeasible(verdict.certificate)


# --- verdicts ---------------------------------------------------------------


@pytest.mark.parametrize("cover,state", [
    ("square", "maximally_mixed"), ("square", "random"), ("square", "bell"),
    ("star", "maximally_mixed"), ("star", "random"), ("star", "ghz"),
])
def test_mermin_covers_strongly_contextual(state, cover):
    c = named_cover(cover)
    rho = named_state(state, c.cfg, seed=0) if state == "random" else named_state(state, c.cfg)
    assert is_noncontextual(empirical_model(rho, c), mode="bridge").kind == STRONGLY_CONTEXTUAL


def test_maximally_mixed_full_p3_noncontextual():
    c = full_cover(PrimeConfig(3, 1))
    m = empirical_model(named_state("maximally_mixed", c.cfg), c)
    v = is_noncontextual(m)
    assert v.kind == NONCONTEXTUAL and v.sections == 81
    _check_verdict(m, v)


def test_basis_state_full_p2_noncontextual():
    c = full_cover(PrimeConfig(2, 1))
    m = empirical_model(named_state("basis", c.cfg), c)
    v = is_noncontextual(m)
    assert v.kind == NONCONTEXTUAL
    _check_verdict(m, v)


def test_ghz_on_extended_star_open_contextual():
    c = extend_cover(named_cover("star-open"), STAR_J)
    m = empirical_model(named_state("ghz", c.cfg), c)
    v = is_noncontextual(m)
    assert v.contextual
    _check_verdict(m, v)


@pytest.mark.parametrize("k", range(8))
def test_every_common_eigenstate_of_J_is_contextual(k):
    s = events(STAR_J)[k]
    c = extend_cover(named_cover("star-open"), STAR_J)
    rho = _eigenstate(STAR_J, s)
    v = is_noncontextual(empirical_model(rho, c))
    assert v.contextual
    assert eigenvalue_functional(rho, STAR_J, s) == pytest.approx(1, abs=1e-12)
    assert inequality(rho, named_cover("star-open"), STAR_J, s).violated


def test_ghz_on_star_open_already_contextual():
    c = named_cover("star-open")
    m = empirical_model(named_state("ghz", c.cfg), c)
    v = is_noncontextual(m)
    assert v.kind == CONTEXTUAL
    _check_verdict(m, v)


def test_contextual_witnesses_and_certificates_on_random_states():
    c = named_cover("star-open")
    kinds = set()
    for seed in range(6):
        m = empirical_model(named_state("random", c.cfg, seed=seed), c)
        v = is_noncontextual(m, mode="bridge")
        kinds.add(v.kind)
        _check_verdict(m, v)
    assert kinds <= {NONCONTEXTUAL, CONTEXTUAL}


@pytest.mark.parametrize("seed", range(4))
def test_monotonicity_under_refinement(seed):
    base = named_cover("star-open")
    rho = named_state("random", base.cfg, seed=seed)
    coarse = is_noncontextual(empirical_model(rho, base), mode="bridge")
    fine = is_noncontextual(empirical_model(rho, extend_cover(base, STAR_J)), mode="bridge")
    if coarse.contextual:
        assert fine.contextual
    # the refinement here is the full star, which has no global sections
    assert fine.kind == STRONGLY_CONTEXTUAL


def test_strict_rationalization_rejects_random_state():
    c = full_cover(PrimeConfig(3, 1))
    m = empirical_model(named_state("random", c.cfg, seed=4), c)
    with pytest.raises(InputPrecisionError):
        is_noncontextual(m, mode="strict")
    assert rationalize_model(m, "bridge").exact


def test_bridge_rationalization_is_close_and_compatible():
    c = full_cover(PrimeConfig(3, 1))
    m = empirical_model(named_state("random", c.cfg, seed=9, mix=0.5), c)
    r = rationalize_model(m, "bridge")
    for I, s, q in r.entries():
        assert abs(float(q) - m.tables[I][s]) <= 1e-9
        assert isinstance(q, Fraction)
    for I in c.contexts:
        assert sum(r.tables[I].values()) == 1


def test_points_hidden_rejects_p2():
    c = full_cover(PrimeConfig(2, 1))
    with pytest.raises(DomainError):
        is_noncontextual(empirical_model(named_state("maximally_mixed", c.cfg), c), hidden="points")


# --- Wigner negativity and its equivalence with contextuality ----------------


def test_wigner_negativity_examples():
    cfg = PrimeConfig(3, 1)
    r = wigner_negativity(named_state("maximally_mixed", cfg))
    assert r.minimum == pytest.approx(1 / 9) and r.verdict == "nonnegative" and not r.marginal
    r = wigner_negativity(named_state("basis", cfg))
    assert r.minimum == pytest.approx(0, abs=1e-12) and r.verdict == "nonnegative" and r.marginal


def _states_p3(count, n=1):
    cfg = PrimeConfig(3, n)
    out, seed = [], 0
    while len(out) < count:
        mix = 0.0 if seed % 5 == 0 else min(0.9, (seed % 5) / 5 + 0.1)
        rho = named_state("random", cfg, seed=seed, mix=mix)
        seed += 1
        if not wigner_negativity(rho).marginal:
            out.append(rho)
    return out


def test_negativity_matches_point_lp_p3_n1():
    c = full_cover(PrimeConfig(3, 1))
    seen = set()
    for rho in _states_p3(40):
        neg = wigner_negativity(rho)
        v = is_noncontextual(empirical_model(rho, c), mode="bridge", hidden="points")
        assert (v.kind == NONCONTEXTUAL) == (not neg.negative)
        seen.add(neg.verdict)
    assert seen == {"negative", "nonnegative"}


def test_section_lp_is_weaker_at_n1():
    """At n = 1 the glued sections are not all characters of V, so a Wigner-negative
    qutrit state still has a distribution on glued sections."""
    c = full_cover(PrimeConfig(3, 1))
    rho = next(r for r in _states_p3(10) if wigner_negativity(r).negative)
    m = empirical_model(rho, c)
    assert is_noncontextual(m, mode="bridge", hidden="points").kind == CONTEXTUAL
    v = is_noncontextual(m, mode="bridge", hidden="sections")
    assert v.kind == NONCONTEXTUAL
    _check_verdict(m, v)


def test_section_and_point_lp_agree_p3_n2():
    c = full_cover(PrimeConfig(3, 2))
    cfg = c.cfg
    states = [named_state("random", cfg, seed=1), named_state("random", cfg, seed=2, mix=0.95)]
    verdicts = set()
    for rho in states:
        m = empirical_model(rho, c)
        a = is_noncontextual(m, mode="bridge", hidden="sections").kind
        b = is_noncontextual(m, mode="bridge", hidden="points").kind
        assert a == b == (NONCONTEXTUAL if not wigner_negativity(rho).negative else CONTEXTUAL)
        verdicts.add(a)
    assert verdicts == {NONCONTEXTUAL, CONTEXTUAL}


# --- extended covers ---------------------------------------------------------


def test_extend_star_open_gives_star():
    assert extend_cover(named_cover("star-open"), STAR_J) == named_cover("star")


def test_extend_cover_trivial_cases():
    sq = named_cover("square")
    I = sq.maximal[0]
    assert extend_cover(sq, I) == sq
    cfg = PrimeConfig(2, 2)
    J = span([cfg.x(1), cfg.x(2)], cfg)
    zero = make_cover([], cfg)
    assert set(extend_cover(zero, J).contexts) == {zero_subspace(cfg), J}


def test_extend_cover_rejects_non_isotropic():
    cfg = PrimeConfig(2, 1)
    with pytest.raises(DomainError):
        extend_cover(make_cover([], cfg), span([cfg.x(1), cfg.z(1)], cfg))


# --- inequalities ------------------------------------------------------------


def test_ghz_inequality():
    c = named_cover("star-open")
    ghz = named_state("ghz", c.cfg)
    rep = inequality(ghz, c, STAR_J)
    assert rep.ev == pytest.approx(1, abs=1e-12)
    assert rep.correlator == pytest.approx(1, abs=1e-12)
    assert rep.bound == Fraction(1, 2)
    assert rep.violated
    assert len(rep.terms) == 4


def test_maximally_mixed_star_not_violated():
    c = named_cover("star-open")
    mm = named_state("maximally_mixed", c.cfg)
    s0 = eigen_outcome(named_state("ghz", c.cfg), STAR_J)
    assert eigenvalue_functional(mm, STAR_J, s0) == pytest.approx(1 / 8)
    rep = inequality(mm, c, STAR_J, s0)
    assert not rep.violated and rep.correlator == pytest.approx(0, abs=1e-12)


def test_bell_square_inequality():
    c = named_cover("square-open")
    J = named_context("square:2")
    cfg = c.cfg
    assert J == span([tuple((a + b) % 2 for a, b in zip(cfg.x(1), cfg.x(2))),
                      tuple((a + b) % 2 for a, b in zip(cfg.z(1), cfg.z(2)))], cfg)
    rep = inequality(named_state("bell", cfg), c, J)
    assert rep.ev == pytest.approx(1, abs=1e-12)
    assert rep.bound < 1 and rep.bound == Fraction(1, 3)
    assert rep.violated


def test_single_context_bound_is_one():
    c = named_cover("star")
    single = make_cover([list(STAR_J.basis)], c.cfg)
    s0 = eigen_outcome(named_state("ghz", c.cfg), STAR_J)
    assert noncontextual_bound(single, STAR_J, s0) == 1


def test_bound_errors():
    with pytest.raises(DomainError):  # the full star has no global sections
        noncontextual_bound(named_cover("star"), STAR_J, events(STAR_J)[0])
    cfg = PrimeConfig(5, 1)
    J = span([cfg.z(1)], cfg)
    with pytest.raises(DomainError):
        noncontextual_bound(full_cover(cfg), J, events(J)[0])


def test_eigen_outcome_requires_eigenstate():
    c = named_cover("star-open")
    with pytest.raises(DomainError):
        eigen_outcome(named_state("maximally_mixed", c.cfg), STAR_J)


def test_outcome_function_validation():
    s = events(STAR_J)[3]
    bad = s.as_dict()
    u = next(v for v in STAR_J.nonzero if v not in STAR_J.basis)
    bad[u] = (bad[u] + 1) % 2
    with pytest.raises(DomainError):
        outcome_function(STAR_J, bad)
    assert outcome_function(STAR_J, s.as_dict()) == s
    assert outcome_function(STAR_J, s.values) == s


def test_eigenvalue_functional_is_born_weight():
    rho = named_state("random", PrimeConfig(2, 3), seed=2)
    total = sum(eigenvalue_functional(rho, STAR_J, s) for s in events(STAR_J))
    assert total == pytest.approx(1, abs=1e-10)
    assert all(eigenvalue_functional(rho, STAR_J, s) >= -1e-12 for s in events(STAR_J))
    assert np.isfinite(total)
