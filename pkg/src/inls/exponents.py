"""Exact rational exponent calculus for the weighted-power Schroedinger equation

    i u_t + Lap u + mu |x|^{-b} |u|^alpha u = 0.

Every threshold, admissibility relation and feasibility inequality is
evaluated with ``fractions.Fraction`` so that boundary cases are decided
exactly.  Infinity is represented by ``math.inf`` with the convention
1/inf = 0.

The three ``lemma_*`` functions build the Strichartz exponent pairs used to
bound the nonlinearity (local theory, global bounds for scattering, and the
weighted-solution bounds).  Each construction depends on small parameters
epsilon and tau; a witness is searched over epsilon, tau in {2^-k}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Union

from .errors import Infeasible, QOutOfRange

INF = math.inf
Exponent = Union[Fraction, float]

SEARCH_DEPTH = 40
STRAUSS_WIDTH = Fraction(1, 2**48)


# ---------------------------------------------------------------- rationals

def as_rational(x) -> Fraction:
    """Exact rational from int, Fraction, decimal/"num/den" string or float.

    Floats go through their shortest repr, so 0.1 becomes 1/10.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"not a finite rational: {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        s = x.strip()
        if s.lower() in ("inf", "infinity", "+inf"):
            raise ValueError("infinity is not a rational")
        return Fraction(s)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def as_exponent(x) -> Exponent:
    """Like ``as_rational`` but accepts infinity ("inf", math.inf)."""
    if isinstance(x, float) and math.isinf(x) and x > 0:
        return INF
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity", "+inf"):
        return INF
    return as_rational(x)


def recip(x: Exponent) -> Fraction:
    """1/x with 1/inf = 0."""
    if x == INF:
        return Fraction(0)
    return 1 / Fraction(x)


def fmt_exponent(x) -> str | None:
    """Serialise a rational as "num/den" and infinity as "inf"."""
    if x is None:
        return None
    if isinstance(x, float):
        if x == INF:
            return "inf"
        if x == -INF:
            return "-inf"
        x = Fraction(repr(x))
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_exponent(s) -> Exponent:
    return as_exponent(s)


# -------------------------------------------------------------- parameters

@dataclass(frozen=True)
class ProblemParams:
    """Dimension d, singularity power b, nonlinearity power alpha, sign mu.

    mu = -1 is defocusing, +1 focusing and 0 switches the nonlinearity off
    (free evolution, used by the diagnostics as a control).
    """

    d: int
    b: Fraction
    alpha: Fraction
    mu: int = -1

    def __post_init__(self):
        d = self.d
        if isinstance(d, bool) or not isinstance(d, int):
            raise ValueError(f"dimension must be an integer, got {d!r}")
        object.__setattr__(self, "b", as_rational(self.b))
        object.__setattr__(self, "alpha", as_rational(self.alpha))
        if not 1 <= d <= 6:
            raise ValueError(f"dimension must lie in 1..6, got {d}")
        if not (0 < self.b < min(2, d)):
            raise ValueError(f"need 0 < b < min(2, d); got b={self.b}, d={d}")
        if not self.alpha > 0:
            raise ValueError(f"need alpha > 0, got {self.alpha}")
        if self.mu not in (-1, 0, 1):
            raise ValueError(f"mu must be -1, 0 or +1, got {self.mu!r}")


@dataclass(frozen=True)
class ExponentPair:
    p: Exponent
    q: Exponent

    def __post_init__(self):
        p, q = as_exponent(self.p), as_exponent(self.q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        for name, v in (("p", p), ("q", q)):
            if not (v == INF or v >= 2):
                raise ValueError(f"{name}={v} outside [2, inf]")

    def to_dict(self) -> dict:
        return {"p": fmt_exponent(self.p), "q": fmt_exponent(self.q)}


def _split_params(params_or_d, b=None) -> tuple[int, Fraction]:
    if isinstance(params_or_d, ProblemParams):
        return params_or_d.d, params_or_d.b
    if b is None:
        raise TypeError("pass ProblemParams or (d, b)")
    d = int(params_or_d)
    b = as_rational(b)
    if d < 1 or b < 0 or b >= min(2, d):
        raise ValueError(f"need d >= 1 and 0 <= b < min(2, d); got d={d}, b={b}")
    return d, b


# -------------------------------------------------------------- thresholds

def critical_sobolev(params: ProblemParams) -> Fraction:
    """Scaling-critical regularity s_c = d/2 - (2 - b)/alpha."""
    return Fraction(params.d, 2) - (2 - params.b) / params.alpha


def alpha_thresholds(params_or_d, b=None) -> tuple[Fraction, Exponent]:
    """Mass-critical and energy-critical powers (alpha_*, alpha^*).

    Accepts ``ProblemParams`` or a raw ``(d, b)`` pair; the raw form also
    admits b = 0 (the classical equation).
    """
    d, b = _split_params(params_or_d, b)
    lower = (4 - 2 * b) / d
    upper = (4 - 2 * b) / (d - 2) if d >= 3 else INF
    return lower, upper


def strauss_polynomial(d: int, b: Fraction, alpha: Fraction) -> Fraction:
    return d * alpha * alpha + (d - 2 + 2 * b) * alpha + 2 * b - 4


def strauss_bracket(d: int, b) -> tuple[Fraction, Fraction]:
    """Exact rational bracket [lo, hi] of width <= 2^-48 around the Strauss root."""
    d, b = _split_params(d, b)
    lo, hi = Fraction(0), (4 - 2 * b) / d
    # f(0) = 2b - 4 < 0 and f(alpha_*) = 2(4 - 2b)/d > 0
    while hi - lo > STRAUSS_WIDTH:
        mid = (lo + hi) / 2
        if strauss_polynomial(d, b, mid) > 0:
            hi = mid
        else:
            lo = mid
    return lo, hi


def strauss_exponent(d: int, b) -> float:
    """Positive root of d a^2 + (d - 2 + 2b) a + 2b - 4 by exact bisection."""
    lo, hi = strauss_bracket(d, b)
    return float((lo + hi) / 2)


def is_admissible(pair: ExponentPair, d: int) -> bool:
    p, q = pair.p, pair.q
    for v in (p, q):
        if not (v == INF or v >= 2):
            return False
    if d == 2 and p == 2 and q == INF:
        return False
    return 2 * recip(p) + d * recip(q) == Fraction(d, 2)


def admissible_p(d: int, q: Exponent) -> Exponent:
    """Time exponent paired with q by 2/p + d/q = d/2 (may fall below 2)."""
    s = Fraction(d, 2) - d * recip(q)
    if s == 0:
        return INF
    return 2 / s


def singularity_integrability(d: int, gamma, b, region: str) -> bool:
    """Is |x|^-b in L^gamma of the unit ball (d/gamma > b) or of its complement (d/gamma < b)?"""
    g = as_exponent(gamma)
    if not (g == INF or g >= 1):
        raise ValueError("gamma must lie in [1, inf]")
    s = d * recip(g)
    b = as_rational(b)
    if region == "unit_ball":
        return s > b
    if region == "complement":
        return s < b
    raise ValueError(f"unknown region {region!r}")


# ------------------------------------------------------------------ regimes

class LwpBranch(str, Enum):
    D4PLUS = "D4plus"
    D3_SMALL_B = "D3smallB"
    D3_MID_B = "D3midB"
    D2 = "D2"
    OUT_OF_THEOREM = "OutOfTheorem"


class MassClass(str, Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    INTERCRITICAL = "intercritical"
    ENERGY_CRITICAL = "energy_critical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class Regime:
    lwp_branch: LwpBranch
    mass_class: MassClass
    critical_sobolev: Fraction

    def to_dict(self) -> dict:
        return {
            "lwp_branch": self.lwp_branch.value,
            "mass_class": self.mass_class.value,
            "critical_sobolev": fmt_exponent(self.critical_sobolev),
        }


def mass_class(params: ProblemParams) -> MassClass:
    lo, hi = alpha_thresholds(params)
    a = params.alpha
    if a < lo:
        return MassClass.SUBCRITICAL
    if a == lo:
        return MassClass.CRITICAL
    if a < hi:
        return MassClass.INTERCRITICAL
    if a == hi:
        return MassClass.ENERGY_CRITICAL
    return MassClass.SUPERCRITICAL


def _lwp_branch(params: ProblemParams) -> LwpBranch:
    d, b, a = params.d, params.b, params.alpha
    _, hi = alpha_thresholds(params)
    if d >= 4 and b < 2 and a < hi:
        return LwpBranch.D4PLUS
    if d == 3 and b < 1 and a < hi:
        return LwpBranch.D3_SMALL_B
    if d == 3 and 1 <= b < Fraction(3, 2) and a < (6 - 4 * b) / (2 * b - 1):
        return LwpBranch.D3_MID_B
    if d == 2 and b < 1:
        return LwpBranch.D2
    return LwpBranch.OUT_OF_THEOREM


def lwp_regime(params: ProblemParams) -> Regime:
    """Local well-posedness branch in H^1 plus mass class and s_c."""
    return Regime(_lwp_branch(params), mass_class(params), critical_sobolev(params))


def q_in_decay_range(d: int, q: Exponent) -> bool:
    if not (q == INF or q >= 2):
        return False
    if d >= 3:
        return q != INF and q <= Fraction(2 * d, d - 2)
    if d == 2:
        return q != INF
    return True


def decay_exponent(params: ProblemParams, q) -> Fraction:
    """Rate r with ||u(t)||_q <~ t^-r for defocusing solutions with Sigma data."""
    q = as_exponent(q)
    if not q_in_decay_range(params.d, q):
        raise QOutOfRange(f"q={fmt_exponent(q)} outside the decay range for d={params.d}")
    d, b, a = params.d, params.b, params.alpha
    gap = Fraction(1, 2) - recip(q)
    lo, _ = alpha_thresholds(params)
    if a >= lo:
        return d * gap
    return Fraction(d) * (2 * b + d * a) / 4 * gap


# ---------------------------------------------------------- condition trace

@dataclass(frozen=True)
class Condition:
    """One inequality of a construction with its signed slack.

    ``margin`` is positive when a strict condition holds, zero on the
    boundary; ``None`` for purely logical checks.
    """

    cid: str
    passed: bool
    margin: Exponent | None
    relation: str

    def to_dict(self) -> dict:
        return {
            "id": self.cid,
            "passed": self.passed,
            "margin": fmt_exponent(self.margin),
            "relation": self.relation,
        }


def _slack(big: Exponent, small: Exponent) -> Exponent:
    if big == INF and small == INF:
        return Fraction(0)
    if big == INF:
        return INF
    if small == INF:
        return -INF
    return Fraction(big) - Fraction(small)


class _Checks:
    def __init__(self):
        self.items: list[Condition] = []

    def gt(self, cid, lhs, rhs):
        self.items.append(Condition(cid, lhs > rhs, _slack(lhs, rhs), ">"))

    def ge(self, cid, lhs, rhs):
        self.items.append(Condition(cid, lhs >= rhs, _slack(lhs, rhs), ">="))

    def lt(self, cid, lhs, rhs):
        self.items.append(Condition(cid, lhs < rhs, _slack(rhs, lhs), "<"))

    def flag(self, cid, value: bool):
        self.items.append(Condition(cid, bool(value), None, "holds"))

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.items)


@dataclass
class FeasibilityReport:
    lemma: str
    params: ProblemParams
    branch: str
    feasible: bool
    witness_epsilon: Fraction
    witness_tau: Fraction
    pairs: list[ExponentPair]
    conditions: list[Condition]
    exponents: dict[str, Exponent] = field(default_factory=dict)
    auxiliary: list[Condition] = field(default_factory=list)
    reason: str = ""
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        p = self.params
        return {
            "lemma": self.lemma,
            "params": {"d": p.d, "b": fmt_exponent(p.b), "alpha": fmt_exponent(p.alpha), "mu": p.mu},
            "branch": self.branch,
            "feasible": self.feasible,
            "witness_epsilon": fmt_exponent(self.witness_epsilon),
            "witness_tau": fmt_exponent(self.witness_tau),
            "pairs": [pr.to_dict() for pr in self.pairs],
            "exponents": {k: fmt_exponent(v) for k, v in self.exponents.items()},
            "conditions": [c.to_dict() for c in self.conditions],
            "auxiliary": [c.to_dict() for c in self.auxiliary],
            "reason": self.reason,
            "notes": list(self.notes),
        }


# ------------------------------------------------------------ constructions
#
# A construction is described by hypothesis checks, limit checks (the
# persistent inequalities that must hold strictly as epsilon, tau -> 0) and
# a builder evaluating every inequality at a concrete (epsilon, tau).

Builder = Callable[[Fraction, Fraction], tuple[_Checks, list[tuple[Exponent, Exponent]], dict]]


@dataclass
class _Construction:
    branch: str
    hypothesis: _Checks
    limit: _Checks
    build: Builder | None
    uses_tau: bool
    notes: list[str] = field(default_factory=list)
    auxiliary: list[Condition] = field(default_factory=list)


def _m_of(alpha, p):
    # alpha/m = 1 - 2/p
    if p == INF:
        return alpha
    if p == 2:
        return INF
    return alpha * p / (p - 2)


def _local_construction(params: ProblemParams) -> _Construction:
    d, b, a = params.d, params.b, params.alpha
    _, a_hi = alpha_thresholds(params)
    hyp, lim = _Checks(), _Checks()

    if d >= 4 or (d == 3 and b < 1):
        hyp.lt("b_below_2" if d >= 4 else "b_below_1", b, 2 if d >= 4 else 1)
        hyp.lt("alpha_below_energy_critical", a, a_hi)
        base = d * (a + 2) / (d + a - b)
        lim.lt("q1_limit_below_d", base, d)
        lim.lt("q1_limit_below_sobolev", base, Fraction(2 * d, d - 2))
        lim.gt("theta1_limit_polynomial", d * (a + 2) * (4 - 2 * b - (d - 2) * a), 0)

        def build(eps, tau):
            c = _Checks()
            q1 = base + eps
            dg1 = d - d * (a + 2) / q1 + a  # d / gamma_1
            c.gt("ball_weight_integrable", dg1, b)
            c.lt("q1_below_d", q1, d)
            c.gt("q1_above_2", q1, 2)
            c.lt("q1_below_sobolev", q1, Fraction(2 * d, d - 2))
            p1 = admissible_p(d, q1)
            c.gt("p1_above_alpha_plus_2", p1, a + 2)
            c.gt("theta1_polynomial",
                 d * (a + 2) * (4 - 2 * b - (d - 2) * a) + eps * (d + a - b) * (4 - d * (a + 2)), 0)
            p2 = 4 * (a + 2) / ((d - 2) * a)
            q2 = d * (a + 2) / (d + a)
            c.gt("theta2_positive", 1 - (d - 2) * a / 4, 0)
            c.lt("q2_below_d", q2, d)
            ex = {"q1": q1, "p1": p1, "q2": q2, "p2": p2,
                  "theta1": 1 - (a + 2) * recip(p1), "theta2": 1 - (d - 2) * a / 4,
                  "gamma1": d / dg1 if dg1 > 0 else INF,
                  "n1": 1 / (1 / q1 - Fraction(1, d)) if q1 < d else INF,
                  "n2": 1 / (1 / q2 - Fraction(1, d)),
                  "m1": _m_of(a, p1), "m2": _m_of(a, p2)}
            return c, [(p1, q1), (p2, q2)], ex

        name = LwpBranch.D4PLUS.value if d >= 4 else LwpBranch.D3_SMALL_B.value
        return _Construction(name, hyp, lim, build, uses_tau=False)

    if d == 3:
        hyp.ge("b_at_least_1", b, 1)
        hyp.lt("b_below_3_2", b, Fraction(3, 2))
        if 2 * b - 1 > 0:
            hyp.lt("alpha_below_mid_b_bound", a, (6 - 4 * b) / (2 * b - 1))
        lim.gt("f_limit_positive", 8 - 4 * b - 2 * b * a, 0)
        lim.gt("g_limit_positive", 6 - 4 * b + a * (1 - 2 * b), 0)

        def build(eps, tau):
            c = _Checks()
            c.gt("tau_positive", tau, 0)
            c.lt("tau_below_1", tau, 1)
            qa = 3 * (2 + a * tau) / (3 - b) + eps
            c.gt("ball_weight_integrable_a", 3 - 3 * (2 + a * tau) / qa, b)
            c.ge("q1a_at_least_3", qa, 3)
            c.lt("q1a_below_6", qa, 6)
            pa = admissible_p(3, qa)
            c.gt("p1a_above_alpha_plus_2", pa, a + 2)
            c.gt("f_polynomial", 3 * (8 - 4 * b - 2 * b * a - a * tau * (2 + 3 * a))
                 - eps * (3 - b) * (2 + 3 * a), 0)
            qb = 3 * (1 + (a + 1) * tau) / (2 - b) + eps
            c.gt("ball_weight_integrable_b", 3 - 3 * (1 + (a + 1) * tau) / qb, b + 1)
            c.ge("q1b_at_least_3", qb, 3)
            c.lt("q1b_below_6", qb, 6)
            pb = admissible_p(3, qb)
            c.gt("p1b_above_alpha_plus_2", pb, a + 2)
            c.gt("g_polynomial", 3 * (6 - 4 * b + a * (1 - 2 * b) - (a + 1) * tau * (2 + 3 * a))
                 - eps * (2 - b) * (2 + 3 * a), 0)
            p2 = 4 * (a + 2) / a
            q2 = 3 * (a + 2) / (3 + a)
            c.gt("theta2_positive", 1 - a / 4, 0)
            c.lt("q2_below_3", q2, 3)
            ex = {"q1a": qa, "p1a": pa, "q1b": qb, "p1b": pb, "q2": q2, "p2": p2,
                  "n1a": qa / tau if tau else INF, "n1b": qb / tau if tau else INF,
                  "theta2": 1 - a / 4}
            return c, [(pa, qa), (pb, qb), (p2, q2)], ex

        return _Construction(LwpBranch.D3_MID_B.value, hyp, lim, build, uses_tau=True)

    if d == 2:
        hyp.lt("b_below_1", b, 1)
        lim.gt("denominator_limit_positive", 1 - b, 0)

        def build(eps, tau):
            c = _Checks()
            c.gt("tau_positive", tau, 0)
            c.lt("tau_below_1", tau, 1)
            da = 1 - b - a * tau
            db = 1 - b - (a + 1) * tau
            c.gt("denominator_a_positive", da, 0)
            c.gt("denominator_b_positive", db, 0)
            pairs, ex = [], {}
            if da > 0 and db > 0:
                qa = 2 / da + eps
                qb = 2 / db + eps
                c.gt("ball_weight_integrable_a", 1 - 2 / qa - a * tau, b)
                c.gt("ball_weight_integrable_b", 2 - 2 / qb - (a + 1) * tau, b + 1)
                c.gt("q1a_above_2", qa, 2)
                c.gt("q1b_above_2", qb, 2)
                pa, pb = admissible_p(2, qa), admissible_p(2, qb)
                c.gt("theta1a_positive", 1 - recip(pa), 0)
                c.gt("theta1b_positive", 1 - recip(pb), 0)
                pairs = [(pa, qa), (pb, qb)]
                ex = {"q1a": qa, "p1a": pa, "q1b": qb, "p1b": pb}
            p2, q2 = 2 * (a + 2) / a, a + 2
            c.gt("theta2_positive", Fraction(2) / (a + 2), 0)
            pairs.append((p2, q2))
            ex.update({"q2": q2, "p2": p2, "theta2": Fraction(2) / (a + 2)})
            return c, pairs, ex

        return _Construction(LwpBranch.D2.value, hyp, lim, build, uses_tau=True)

    hyp.flag("dimension_at_least_2", False)
    return _Construction(LwpBranch.OUT_OF_THEOREM.value, hyp, lim, None, uses_tau=False,
                         notes=["the weight |x|^(-b-1) is not locally integrable in any L^gamma when d = 1"])


def _global_construction(params: ProblemParams, weighted: bool) -> _Construction:
    """Pairs for the global bounds: window p < 2 alpha + 2, or p < alpha + 1 when ``weighted``."""
    d, b, a = params.d, params.b, params.alpha
    a_lo, a_hi = alpha_thresholds(params)
    hyp, lim = _Checks(), _Checks()
    # p < cap  <=>  d/2 - d/q > 2/cap
    cap = a + 1 if weighted else 2 * a + 2
    aux: list[Condition] = []
    notes: list[str] = []

    if weighted and d not in (2, 3):
        hyp.flag("weighted_construction_needs_d_2_or_3", False)
        return _Construction(f"d={d}", hyp, lim, None, uses_tau=False)
    if d == 1:
        hyp.flag("dimension_at_least_2", False)
        return _Construction("d=1", hyp, lim, None, uses_tau=False)

    if d >= 4:
        hyp.ge("alpha_at_least_mass_critical", a, a_lo)
        hyp.lt("alpha_below_energy_critical", a, a_hi)
        base = d * (a + 2) / (d - b)
        lim.gt("strauss_quadratic", strauss_polynomial(d, b, a), 0)
        lim.gt("q_limit_above_2", base, 2)
        lim.lt("q_limit_below_sobolev", base, Fraction(2 * d, d - 2))
        lim.lt("q_limit_below_d", base, d)
        cubic = d * d * a ** 3 + 4 * b * d * a * a + (4 * d - 8 + 4 * b * b) * a + 8 * b - 16
        aux.append(Condition("closing_cubic", cubic > 0, cubic, ">"))

        def build(eps, tau):
            c = _Checks()
            pairs, ex = [], {}
            for i, sgn in ((1, 1), (2, -1)):
                q = base + sgn * eps
                dg = d - d * (a + 2) / q
                if sgn > 0:
                    c.gt(f"q{i}_ball_weight_integrable", dg, b)
                else:
                    c.lt(f"q{i}_complement_weight_integrable", dg, b)
                c.gt(f"q{i}_above_2", q, 2)
                c.lt(f"q{i}_below_sobolev", q, Fraction(2 * d, d - 2))
                c.lt(f"q{i}_below_d", q, d)
                p = admissible_p(d, q)
                c.lt(f"p{i}_below_2alpha_plus_2", p, cap)
                c.gt(f"p{i}_polynomial", d * strauss_polynomial(d, b, a)
                     + sgn * eps * (d - b) * (d * (a + 1) - 2), 0)
                pairs.append((p, q))
                ex.update({f"q{i}": q, f"p{i}": p, f"m{i}": _m_of(a, p),
                           f"n{i}": 1 / (1 / q - Fraction(1, d)) if q < d else INF})
            return c, pairs, ex

        return _Construction("d>=4", hyp, lim, build, uses_tau=False, auxiliary=aux)

    # d = 2 or 3: q = d(alpha + 1 + tau)/(d - 1 - b) + a eps, exponent window (d, 2d/(d-2))
    lower_q = Fraction(d)
    upper_q: Exponent = Fraction(6) if d == 3 else INF
    if d == 3:
        if weighted:
            hyp.lt("b_below_1", b, 1)
            hyp.gt("alpha_above_weighted_bound", a, (5 - 2 * b) / 3)
        else:
            hyp.lt("b_below_5_4", b, Fraction(5, 4))
            hyp.ge("alpha_at_least_mass_critical", a, a_lo)
        hyp.lt("alpha_below_3_minus_2b", a, 3 - 2 * b)
    else:
        hyp.lt("b_below_1", b, 1)
        hyp.ge("alpha_at_least_mass_critical", a, a_lo)
    if not hyp.ok:
        return _Construction(f"d={d}", hyp, lim, None, uses_tau=True)

    denom = d - 1 - b  # 2 - b for d = 3, 1 - b for d = 2
    if d == 3:
        if weighted:
            quad = 3 * a * a + 2 * (b - 1) * a + 2 * b - 5
            tau_coef, eps_coef = 3 * a - 1, (2 - b) * (3 * a - 1)
        else:
            quad = 3 * a * a + 2 * b * a + 2 * b - 3
            tau_coef, eps_coef = 3 * a + 1, (2 - b) * (3 * a + 1)
        scale = 3
    else:
        if weighted:
            quad = a * a + (b - 1) * a + b - 2
            tau_coef, eps_coef = a - 1, (1 - b) * (a - 1)
            notes.append(
                "the quadratic a^2 + (b-1)a + b - 2 has exact positive root 2 - b, which equals the "
                "mass-critical power (4-2b)/2; the weaker statement a > 1 - b does not follow from it, "
                "so a = (4-2b)/2 is a boundary case and is reported infeasible")
        else:
            quad = a * a + b * a + b - 1
            tau_coef, eps_coef = a, a * (1 - b)
        scale = 2
    lim.gt("window_quadratic", quad, 0)
    base0 = d * (a + 1) / denom
    lim.gt("q_limit_above_lower", base0, lower_q)
    if upper_q != INF:
        lim.lt("q_limit_below_upper", base0, upper_q)

    def build(eps, tau):
        c = _Checks()
        c.gt("tau_positive", tau, 0)
        c.lt("tau_below_1", tau, 1)
        pairs, ex = [], {}
        base = d * (a + 1 + tau) / denom
        for i, sgn in ((1, 1), (2, -1)):
            q = base + sgn * eps
            dg = d - d * (a + 1 + tau) / q  # d / gamma for the |x|^(-b-1) factor
            if sgn > 0:
                c.gt(f"q{i}_ball_weight_integrable", dg, b + 1)
            else:
                c.lt(f"q{i}_complement_weight_integrable", dg, b + 1)
            c.gt(f"q{i}_above_{d}", q, lower_q)
            if upper_q != INF:
                c.lt(f"q{i}_below_6", q, upper_q)
            p = admissible_p(d, q)
            c.lt(f"p{i}_below_{'alpha_plus_1' if weighted else '2alpha_plus_2'}", p, cap)
            c.gt(f"p{i}_polynomial", scale * (quad + tau * tau_coef) + sgn * eps * eps_coef, 0)
            pairs.append((p, q))
            ex.update({f"q{i}": q, f"p{i}": p, f"m{i}": _m_of(a, p),
                       f"n{i}": q / tau if tau else INF})
        return c, pairs, ex

    return _Construction(f"d={d}", hyp, lim, build, uses_tau=True, notes=notes, auxiliary=aux)


def _powers(depth: int) -> Iterable[Fraction]:
    for k in range(1, depth + 1):
        yield Fraction(1, 2**k)


def _strip_tau(checks: _Checks) -> list[Condition]:
    out = []
    for c in checks.items:
        if c.cid.startswith("tau_"):
            continue
        out.append(Condition(c.cid + "@tau=0", c.passed, c.margin, c.relation))
    return out


def _solve(lemma: str, params: ProblemParams, cons: _Construction, strict: bool,
           depth: int = SEARCH_DEPTH) -> FeasibilityReport:
    head = cons.hypothesis.items + cons.limit.items

    def report(feasible, eps, tau, pairs, conds, ex, reason):
        rep = FeasibilityReport(
            lemma=lemma, params=params, branch=cons.branch, feasible=feasible,
            witness_epsilon=eps, witness_tau=tau,
            pairs=[ExponentPair(p, q) for p, q in pairs] if feasible else [],
            conditions=head + conds, exponents=ex if feasible else {},
            auxiliary=list(cons.auxiliary), reason=reason, notes=list(cons.notes))
        if strict and not feasible:
            raise Infeasible(f"{lemma} infeasible for {params}: {reason}")
        return rep

    if not cons.hypothesis.ok:
        bad = [c.cid for c in cons.hypothesis.items if not c.passed]
        return report(False, Fraction(0), Fraction(0), [], [], {},
                      "parameters outside the hypothesis: " + ", ".join(bad))
    if not cons.limit.ok:
        bad = [c.cid for c in cons.limit.items if not c.passed]
        return report(False, Fraction(0), Fraction(0), [], [], {},
                      "limit inequality fails as epsilon, tau -> 0: " + ", ".join(bad))

    taus = list(_powers(depth)) if cons.uses_tau else [Fraction(0)]
    for eps in _powers(depth):
        persist: list[Condition] = []
        if cons.uses_tau:
            # conditions must survive tau -> 0 at this epsilon
            chk0, _, _ = cons.build(eps, Fraction(0))
            persist = _strip_tau(chk0)
            if not all(c.passed for c in persist):
                continue
        for tau in taus:
            chk, pairs, ex = cons.build(eps, tau)
            if chk.ok:
                # admissibility of every emitted pair is part of the verdict
                adm = _Checks()
                for i, (p, q) in enumerate(pairs, 1):
                    good = (p == INF or p >= 2) and (q == INF or q >= 2)
                    adm.flag(f"pair{i}_admissible", good and is_admissible(ExponentPair(p, q), params.d))
                if adm.ok:
                    return report(True, eps, tau, pairs, chk.items + persist + adm.items, ex, "")
    last = Fraction(1, 2**depth)
    chk, _, _ = cons.build(last, last if cons.uses_tau else Fraction(0))
    return report(False, Fraction(0), Fraction(0), [], chk.items, {},
                  f"no witness with epsilon, tau in {{2^-k : k <= {depth}}}")


def lemma_local_pairs(params: ProblemParams, strict: bool = False) -> FeasibilityReport:
    """Exponent pairs bounding the nonlinearity on short intervals (local theory)."""
    return _solve("local", params, _local_construction(params), strict)


def lemma_scattering_pairs(params: ProblemParams, strict: bool = False) -> FeasibilityReport:
    """Pairs with p < 2 alpha + 2 giving global H^1 Strichartz bounds."""
    return _solve("scattering", params, _global_construction(params, weighted=False), strict)


def lemma_weighted_pairs(params: ProblemParams, strict: bool = False) -> FeasibilityReport:
    """Pairs with p < alpha + 1 giving bounds for the weighted solution (x + 2it grad) u."""
    return _solve("weighted", params, _global_construction(params, weighted=True), strict)


LEMMAS = {
    "local": lemma_local_pairs,
    "scattering": lemma_scattering_pairs,
    "weighted": lemma_weighted_pairs,
}


def evaluate_construction(lemma: str, params: ProblemParams, eps, tau=0) -> list[Condition]:
    """Evaluate one construction at a fixed (epsilon, tau) without searching."""
    if lemma == "local":
        cons = _local_construction(params)
    elif lemma in ("scattering", "weighted"):
        cons = _global_construction(params, weighted=lemma == "weighted")
    else:
        raise ValueError(f"unknown lemma {lemma!r}")
    if cons.build is None:
        return cons.hypothesis.items
    chk, _, _ = cons.build(as_rational(eps), as_rational(tau))
    return chk.items
