from __future__ import annotations

import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inls.errors import Infeasible
from inls.exponents import (INF, LEMMAS, ExponentPair, LwpBranch, MassClass, ProblemParams,
                            admissible_p, alpha_thresholds, as_exponent, critical_sobolev,
                            decay_exponent, evaluate_construction, fmt_exponent, is_admissible,
                            lemma_local_pairs, lemma_scattering_pairs, lemma_weighted_pairs,
                            lwp_regime, singularity_integrability, strauss_bracket,
                            strauss_exponent, strauss_polynomial)

from oracle_exponents import rational_grid, verdict


def P(d, b, a, mu=-1):
    return ProblemParams(d, F(b), F(a), mu)


# ------------------------------------------------------------ parameters

@pytest.mark.parametrize("d,b,a", [(0, "1/2", 1), (7, "1/2", 1), (1, 1, 1), (2, 2, 1), (3, "1/2", 0),
                                   (3, "-1/2", 1)])
def test_params_reject_out_of_range(d, b, a):
    with pytest.raises(ValueError):
        ProblemParams(d, F(b), F(a))


def test_params_reject_bad_sign():
    with pytest.raises(ValueError):
        ProblemParams(3, F(1, 2), F(1), mu=2)


def test_exponent_parsing_and_format():
    assert as_exponent("3/2") == F(3, 2)
    assert as_exponent("inf") == INF
    assert fmt_exponent(F(10, 3)) == "10/3"
    assert fmt_exponent(INF) == "inf"
    assert fmt_exponent(F(4)) == "4/1"


# ------------------------------------------------------------ thresholds

def test_critical_sobolev_frozen():
    assert critical_sobolev(P(3, 1, 2)) == 1
    assert critical_sobolev(P(4, "1/2", 1)) == F(1, 2)
    for b in (F(1, 3), F(1, 2), F(3, 2)):
        assert critical_sobolev(P(2, b, (4 - 2 * b) / 2)) == 0


def test_alpha_thresholds_frozen():
    assert alpha_thresholds(3, 0) == (F(4, 3), F(4))
    assert alpha_thresholds(P(1, "1/2", 1)) == (F(3), INF)
    assert alpha_thresholds(P(4, 1, 1)) == (F(1, 2), F(1))


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
def test_critical_sobolev_identities(d):
    for k in range(1, 16):
        b = F(k, 8)
        if b >= min(2, d):
            continue
        lo, hi = alpha_thresholds(d, b)
        assert critical_sobolev(ProblemParams(d, b, lo)) == 0
        if hi != INF:
            assert critical_sobolev(ProblemParams(d, b, hi)) == 1
        # s_c vanishes only at alpha_*
        for a in (lo / 2, lo * 2, lo + F(1, 97)):
            assert critical_sobolev(ProblemParams(d, b, a)) != 0


def test_strauss_frozen():
    assert abs(strauss_exponent(3, 0) - 1.0) < 1e-14
    assert abs(strauss_exponent(2, 0) - math.sqrt(2)) < 1e-14


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
def test_strauss_below_mass_critical(d):
    for k in range(1, 32):
        b = F(k, 16)
        if b >= min(2, d):
            continue
        lo, hi = strauss_bracket(d, b)
        assert hi - lo <= F(1, 2**48)
        assert strauss_polynomial(d, b, lo) <= 0 < strauss_polynomial(d, b, hi)
        assert hi < alpha_thresholds(d, b)[0]
        # closed form of the positive root
        c = d - 2 + 2 * float(b)
        root = (-c + math.sqrt(c * c - 4 * d * (2 * float(b) - 4))) / (2 * d)
        assert abs(strauss_exponent(d, b) - root) < 1e-12


def test_is_admissible_frozen():
    for d in range(1, 7):
        assert is_admissible(ExponentPair(INF, F(2)), d)
    assert not is_admissible(ExponentPair(F(2), INF), 2)
    assert is_admissible(ExponentPair(F(2), F(6)), 3)
    assert not is_admissible(ExponentPair(F(3), F(3)), 3)


def test_exponent_pair_range():
    with pytest.raises(ValueError):
        ExponentPair(F(1), F(2))


def test_admissible_p_consistent():
    for d in (1, 2, 3, 4):
        for q in (F(2), F(3), F(10, 3), F(4)):
            p = admissible_p(d, q)
            if p == INF or p >= 2:
                assert is_admissible(ExponentPair(p, q), d)


def test_singularity_integrability_frozen():
    assert singularity_integrability(3, 2, 1, "unit_ball")
    assert singularity_integrability(2, "inf", F(1, 2), "complement")
    assert not singularity_integrability(3, 3, 1, "unit_ball")
    with pytest.raises(ValueError):
        singularity_integrability(3, 2, 1, "annulus")


def test_lwp_regime_frozen():
    assert lwp_regime(P(3, "5/4", 1)).lwp_branch is LwpBranch.OUT_OF_THEOREM
    r = lwp_regime(P(4, 1, "1/2"))
    assert r.lwp_branch is LwpBranch.D4PLUS and r.mass_class is MassClass.CRITICAL
    assert lwp_regime(P(1, "1/2", 2)).lwp_branch is LwpBranch.OUT_OF_THEOREM
    assert lwp_regime(P(3, "1/2", 1)).lwp_branch is LwpBranch.D3_SMALL_B
    assert lwp_regime(P(3, "5/4", "1/2")).lwp_branch is LwpBranch.D3_MID_B
    assert lwp_regime(P(2, "1/2", 5)).lwp_branch is LwpBranch.D2


def test_mass_class_ordering():
    assert lwp_regime(P(3, "1/2", 1)).mass_class is MassClass.CRITICAL
    assert lwp_regime(P(3, "1/2", "1/2")).mass_class is MassClass.SUBCRITICAL
    assert lwp_regime(P(3, "1/2", 2)).mass_class is MassClass.INTERCRITICAL
    assert lwp_regime(P(3, "1/2", 3)).mass_class is MassClass.ENERGY_CRITICAL
    assert lwp_regime(P(3, "1/2", 4)).mass_class is MassClass.SUPERCRITICAL


# ---------------------------------------------------------------- decay

def test_decay_exponent_frozen():
    assert decay_exponent(P(1, "1/2", 3), INF) == F(1, 2)
    assert decay_exponent(P(2, "1/2", 1), F(4)) == F(3, 8)
    for prm in (P(1, "1/2", 3), P(2, "1/2", 1), P(3, "1/2", 2)):
        assert decay_exponent(prm, F(2)) == 0


@pytest.mark.parametrize("prm", [P(1, "1/2", 3), P(1, "1/2", 1), P(2, "1/2", 1), P(2, "1/2", 2),
                                 P(3, "1/2", 1), P(3, "1/2", "1/2")])
def test_decay_exponent_monotone(prm):
    qs = [F(2) + F(j, 4) for j in range(0, 40)]
    if prm.d >= 3:
        qs = [q for q in qs if q <= F(2 * prm.d, prm.d - 2)]
    vals = [decay_exponent(prm, q) for q in qs]
    assert all(x <= y for x, y in zip(vals, vals[1:]))
    if prm.d == 1:
        assert decay_exponent(prm, INF) >= vals[-1]


def test_decay_exponent_out_of_range():
    with pytest.raises(Exception):
        decay_exponent(P(3, "1/2", 2), INF)


# -------------------------------------------------------------- lemmas

def test_local_frozen():
    rep = lemma_local_pairs(P(4, 1, "3/4"))
    assert rep.feasible and rep.branch == "D4plus"
    assert rep.exponents["q1"] == F(44, 15) + rep.witness_epsilon
    assert not lemma_local_pairs(P(3, "1/2", 4)).feasible
    rep = lemma_local_pairs(P(2, "1/2", 1))
    assert rep.feasible
    conds = {c.cid: c for c in evaluate_construction("local", P(2, "1/2", 1), F(1, 2**10), F(1, 64))}
    assert conds["denominator_b_positive"].margin == F(15, 32)
    assert all(c.passed for c in conds.values())


def test_scattering_frozen():
    rep = lemma_scattering_pairs(P(4, 1, "3/4"))
    assert rep.feasible
    q = rep.exponents["q1"] - rep.witness_epsilon
    assert q == F(11, 3) and admissible_p(4, q) == F(11, 5)
    assert lemma_scattering_pairs(P(3, "1/2", 1)).feasible
    assert not lemma_scattering_pairs(P(2, "1/2", "1/2")).feasible


def test_weighted_frozen():
    assert not lemma_weighted_pairs(P(3, "1/2", "4/3")).feasible
    assert lemma_weighted_pairs(P(3, "1/2", "3/2")).feasible
    assert lemma_weighted_pairs(P(3, "1/2", F(4, 3) + F(1, 1000))).feasible
    rep = lemma_weighted_pairs(P(2, "1/2", "3/2"))
    assert not rep.feasible
    assert rep.notes, "the two-dimensional root discrepancy is flagged in the report"
    quad = {c.cid: c for c in rep.conditions}["window_quadratic"]
    assert quad.margin == 0 and not quad.passed


def test_boundary_quadratics_infeasible():
    # zeros of the window quadratics are exact rationals here
    cases = [("weighted", P(3, "1/2", "4/3")), ("weighted", P(2, "1/2", "3/2")),
             ("weighted", P(2, "1/3", "5/3"))]
    for lemma, prm in cases:
        assert not LEMMAS[lemma](prm).feasible


def test_strict_mode_raises():
    with pytest.raises(Infeasible):
        lemma_weighted_pairs(P(2, "1/2", "3/2"), strict=True)
    lemma_local_pairs(P(4, 1, "3/4"), strict=True)


def test_report_invariants_and_serialisation():
    for d, b, a in rational_grid()[::7]:
        for lemma, fn in LEMMAS.items():
            rep = fn(ProblemParams(d, b, a))
            assert rep.feasible == (all(c.passed for c in rep.conditions) and bool(rep.conditions))
            if rep.feasible:
                assert rep.pairs
                for pr in rep.pairs:
                    assert is_admissible(pr, d)
                for c in rep.conditions:
                    if c.relation in (">", "<") and c.margin is not None:
                        assert c.margin > 0
            doc = rep.to_dict()
            assert doc["feasible"] == rep.feasible
            assert isinstance(doc["witness_epsilon"], str)


def test_one_dimension_infeasible():
    for lemma in LEMMAS:
        assert not LEMMAS[lemma](P(1, "1/2", 2)).feasible


# -------------------------------------------------------------- oracle

def test_oracle_agreement_on_rational_grid():
    grid = rational_grid()
    assert len(grid) >= 500
    mismatches = []
    for d, b, a in grid:
        prm = ProblemParams(d, b, a)
        for lemma, fn in LEMMAS.items():
            if fn(prm).feasible != verdict(lemma, d, b, a):
                mismatches.append((lemma, d, b, a))
    assert not mismatches


def test_oracle_agreement_near_boundaries():
    # a witness exists but needs epsilon far below 2^-20: compare at full depth
    pts = []
    for d in (2, 3, 4):
        for b in (F(1, 4), F(1, 2), F(3, 4)):
            lo, hi = alpha_thresholds(d, b)
            near = [lo + F(1, 10**6), lo - F(1, 10**6), 2 - b + F(1, 10**6), 3 - 2 * b - F(1, 10**6),
                    (5 - 2 * b) / 3 + F(1, 10**6)]
            if hi != INF:
                near.append(hi - F(1, 10**6))
            pts += [(d, b, a) for a in near if a > 0]
    for d, b, a in pts:
        prm = ProblemParams(d, b, a)
        for lemma, fn in LEMMAS.items():
            assert fn(prm).feasible == verdict(lemma, d, b, a, depth=40), (lemma, d, b, a)


@settings(max_examples=60, deadline=None)
@given(d=st.sampled_from([2, 3, 4]), bn=st.integers(1, 23), an=st.integers(1, 80))
def test_oracle_agreement_random(d, bn, an):
    b, a = F(bn, 12), F(an, 16)
    if b >= min(2, d):
        return
    prm = ProblemParams(d, b, a)
    for lemma, fn in LEMMAS.items():
        assert fn(prm).feasible == verdict(lemma, d, b, a)
