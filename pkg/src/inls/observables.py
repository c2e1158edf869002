"""Conserved quantities, weighted norms, residual identities and decay fits.

All integrals are discrete sums with cell volume h^d.  Gradients are
spectral.  Formulas are written for general mu; for the defocusing case
mu = -1 they reduce to the familiar forms (energy = kinetic/2 + G,
pc_quantity = ||(x + 2it grad) u||^2 + 8 t^2 G).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from scipy import fft as sfft
from scipy import stats
from scipy.integrate import cumulative_trapezoid

from .errors import NonUniform, NotAdmissible, SchemaError, WindowTooShort, WrongRegime, ZeroTime
from .exponents import (INF, Exponent, ExponentPair, ProblemParams, alpha_thresholds, as_exponent,
                        decay_exponent, fmt_exponent, is_admissible)
from .grid import ComplexField, SingularWeight

SPACING_TOL = 1e-12
MIN_FIT_SAMPLES = 8
FIT_START = 1.0  # decay fits ignore t < 1

CSV_BASE_COLUMNS = ("t", "mass", "kinetic", "G", "energy", "variance",
                    "weighted_norm_sq", "pc_quantity")


def q_label(q) -> str:
    s = fmt_exponent(as_exponent(q))
    return s[:-2] if s.endswith("/1") else s


def q_column(q) -> str:
    return f"lq_{q_label(q)}"


# ------------------------------------------------------------- field-level

def mass(field: ComplexField) -> float:
    return float(field.grid.cell_volume * np.sum(np.abs(field.values) ** 2))


def kinetic(field: ComplexField) -> float:
    """||grad u||^2 computed through Parseval from the spectral coefficients."""
    g = field.grid
    uh = sfft.fftn(field.values)
    return float(g.cell_volume / g.n ** g.d * np.sum(g.k2 * np.abs(uh) ** 2))


def potential_G(field: ComplexField, weight: SingularWeight, alpha) -> float:
    a = float(alpha)
    dens = weight.values * np.abs(field.values) ** (a + 2)
    return float(field.grid.cell_volume * np.sum(dens) / (a + 2))


def energy(field: ComplexField, weight: SingularWeight, params: ProblemParams) -> float:
    return 0.5 * kinetic(field) - params.mu * potential_G(field, weight, params.alpha)


def variance(field: ComplexField) -> float:
    return float(field.grid.cell_volume * np.sum(field.grid.r2 * np.abs(field.values) ** 2))


def weighted_field(field: ComplexField, t: float) -> list[ComplexField]:
    """Components x_j u + 2 i t d_j u, j = 1..d."""
    g = field.grid
    u = field.values
    uh = sfft.fftn(u) if t != 0 else None
    out = []
    for xj, kj in zip(g.axis_coords(), g.axis_wavenumbers()):
        comp = xj * u
        if t != 0:
            comp = comp + 2j * t * sfft.ifftn(1j * kj * uh)
        out.append(ComplexField(g, comp))
    return out


def weighted_norm_sq(field: ComplexField, t: float) -> float:
    g = field.grid
    return float(g.cell_volume * sum(np.sum(np.abs(c.values) ** 2) for c in weighted_field(field, t)))


def v_transform(field: ComplexField, t: float) -> ComplexField:
    """exp(-i |x|^2 / (4t)) u."""
    if t == 0:
        raise ZeroTime("the pseudo-conformal phase is undefined at t = 0")
    return ComplexField(field.grid, np.exp(-1j * field.grid.r2 / (4 * t)) * field.values)


def _modulus(obj) -> tuple[np.ndarray, float]:
    if isinstance(obj, ComplexField):
        return np.abs(obj.values), obj.grid.cell_volume
    comps = list(obj)
    sq = sum(np.abs(c.values) ** 2 for c in comps)
    return np.sqrt(sq), comps[0].grid.cell_volume


def lq_norm(field, q) -> float:
    """Discrete L^q norm; a list of components is normed by its pointwise Euclidean length."""
    q = as_exponent(q)
    if not (q == INF or q >= 2):
        raise ValueError(f"q must lie in [2, inf], got {q}")
    mod, vol = _modulus(field)
    if q == INF:
        return float(np.max(mod))
    qf = float(q)
    top = float(np.max(mod))
    if top == 0:
        return 0.0
    # scale out the maximum to keep large q finite
    return float(top * (vol * np.sum((mod / top) ** qf)) ** (1 / qf))


# ------------------------------------------------------------- time series

@dataclass
class ObservableSample:
    t: float
    mass: float
    kinetic: float
    G: float
    energy: float
    variance: float
    weighted_norm_sq: float
    pc_quantity: float
    lq_norms: dict = dc_field(default_factory=dict)
    h1_norm: float = math.nan

    def __post_init__(self):
        if math.isnan(self.h1_norm):
            self.h1_norm = math.sqrt(max(self.mass + self.kinetic, 0.0))


def sample_observables(field: ComplexField, weight: SingularWeight, params: ProblemParams,
                       t: float, q_list: Iterable = (2, 4, INF)) -> ObservableSample:
    m = mass(field)
    k = kinetic(field)
    G = potential_G(field, weight, params.alpha)
    wn = weighted_norm_sq(field, t)
    return ObservableSample(
        t=float(t), mass=m, kinetic=k, G=G,
        energy=0.5 * k - params.mu * G,
        variance=variance(field),
        weighted_norm_sq=wn,
        pc_quantity=wn - 8 * params.mu * t * t * G,
        lq_norms={as_exponent(q): lq_norm(field, q) for q in q_list},
    )


@dataclass
class TimeSeries:
    params: ProblemParams
    samples: list[ObservableSample]
    initial_weighted: float = math.nan

    def __post_init__(self):
        ts = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("sample times must be strictly increasing")
        if math.isnan(self.initial_weighted) and self.samples and self.samples[0].t == 0:
            self.initial_weighted = self.samples[0].variance

    def __len__(self):
        return len(self.samples)

    @property
    def t(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples])

    def lq(self, q) -> np.ndarray:
        q = as_exponent(q)
        try:
            return np.array([s.lq_norms[q] for s in self.samples])
        except KeyError:
            raise KeyError(f"q={q_label(q)} was not sampled") from None


def _uniform_step(t: np.ndarray) -> float:
    steps = np.diff(t)
    if len(steps) == 0:
        raise NonUniform("need at least two samples to define a spacing")
    dt = float(np.mean(steps))
    if np.max(np.abs(steps - dt)) > SPACING_TOL * max(1.0, abs(dt)):
        raise NonUniform(f"sample spacing varies by {np.ptp(steps):.3e}")
    return dt


@dataclass
class ResidualSeries:
    """Residual of an identity at each sample time, plus the scale used to make it relative."""

    times: np.ndarray
    values: np.ndarray
    scale: float

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(zip(self.times.tolist(), self.values.tolist()))

    def __len__(self):
        return len(self.times)

    @property
    def relative(self) -> np.ndarray:
        return self.values / self.scale

    def max_relative(self, t_a: float = -math.inf, t_b: float = math.inf) -> float:
        sel = (self.times >= t_a - 1e-12) & (self.times <= t_b + 1e-12)
        if not np.any(sel):
            raise WindowTooShort(f"no residual samples in [{t_a}, {t_b}]")
        return float(np.max(np.abs(self.values[sel])) / self.scale)


def virial_residual(series: TimeSeries) -> ResidualSeries:
    """V'' - 16 E0 + 4 mu (d alpha + 2b - 4) G at interior samples, with V'' by central differences.

    The relative scale is 16 |E0|.
    """
    if len(series) < 3:
        raise WindowTooShort("the second difference needs three samples")
    t = series.t
    D = _uniform_step(t)
    p = series.params
    V = series.column("variance")
    G = series.column("G")
    E0 = series.samples[0].energy
    coef = 4 * p.mu * (p.d * float(p.alpha) + 2 * float(p.b) - 4)
    vdd = (V[2:] - 2 * V[1:-1] + V[:-2]) / (D * D)
    res = vdd - 16 * E0 + coef * G[1:-1]
    return ResidualSeries(t[1:-1], res, 16 * abs(E0))


def pseudoconformal_residual(series: TimeSeries) -> ResidualSeries:
    """f(t) - [f(0) - 4 mu (4 - 2b - d alpha) int_0^t s G(s) ds] with trapezoid quadrature.

    Relative scale is ||x u0||^2.
    """
    t = series.t
    if len(t) == 0 or t[0] != 0:
        raise ValueError("pseudo-conformal residual needs samples starting at t = 0")
    p = series.params
    G = series.column("G")
    f = series.column("pc_quantity")
    integral = cumulative_trapezoid(t * G, t, initial=0.0)
    coef = -4 * p.mu * (4 - 2 * float(p.b) - p.d * float(p.alpha))
    res = f - (series.initial_weighted + coef * integral)
    return ResidualSeries(t, res, series.initial_weighted)


def pc_variation(series: TimeSeries, t_b: float = math.inf) -> float:
    """max |f(t) - f(0)| / f(0) over t <= t_b."""
    t = series.t
    f = series.column("pc_quantity")
    sel = t <= t_b + 1e-12
    return float(np.max(np.abs(f[sel] - f[0])) / abs(f[0]))


# ------------------------------------------------------------------ fits

@dataclass(frozen=True)
class DecayFit:
    q: Exponent
    slope: float
    stderr: float
    target: float
    samples: int


def _window(series: TimeSeries, window) -> np.ndarray:
    t_a, t_b = window
    t = series.t
    sel = (t >= max(t_a, FIT_START) - 1e-12) & (t <= t_b + 1e-12) & (t > 0)
    if np.count_nonzero(sel) < MIN_FIT_SAMPLES:
        raise WindowTooShort(f"{np.count_nonzero(sel)} samples in window {list(window)}, "
                             f"need {MIN_FIT_SAMPLES}")
    return sel


def decay_fit(series: TimeSeries, q, window=(2.0, 16.0)) -> DecayFit:
    """Least-squares slope of log ||u(t)||_q against log t; target is minus the proven rate."""
    q = as_exponent(q)
    sel = _window(series, window)
    y = series.lq(q)[sel]
    fit = stats.linregress(np.log(series.t[sel]), np.log(y))
    target = -float(decay_exponent(series.params, q))
    return DecayFit(q, float(fit.slope), float(fit.stderr), target, int(np.count_nonzero(sel)))


@dataclass(frozen=True)
class GDecayFit:
    slope: float
    target: float
    grad_v_slope: float
    grad_v_target: float
    samples: int


def g_decay_fit(series: TimeSeries, window=(2.0, 16.0)) -> GDecayFit:
    """Slopes of log G and log ||grad v|| against log t below the mass-critical power.

    ||grad v(t)|| is recovered as ||(x + 2it grad) u|| / (2t).
    """
    p = series.params
    lo, _ = alpha_thresholds(p)
    if p.alpha >= lo:
        raise WrongRegime(f"G decay bound applies for alpha < {lo}, got alpha = {p.alpha}")
    sel = _window(series, window)
    t = series.t[sel]
    lt = np.log(t)
    G = series.column("G")[sel]
    gv = np.sqrt(series.column("weighted_norm_sq")[sel]) / (2 * t)
    rate = (2 * float(p.b) + p.d * float(p.alpha)) / 2
    return GDecayFit(
        slope=float(stats.linregress(lt, np.log(G)).slope),
        target=-rate,
        grad_v_slope=float(stats.linregress(lt, np.log(gv)).slope),
        grad_v_target=-rate / 2,
        samples=int(sel.sum()),
    )


# -------------------------------------------------------------- Strichartz

def _check_pair(p, q, d: int) -> tuple[Exponent, Exponent]:
    p, q = as_exponent(p), as_exponent(q)
    try:
        ok = is_admissible(ExponentPair(p, q), d)
    except ValueError:
        ok = False
    if not ok:
        raise NotAdmissible(f"(p, q) = ({q_label(p)}, {q_label(q)}) is not admissible in d = {d}")
    return p, q


def mixed_norm(times: Sequence[float], norms: Sequence[float], p, window) -> float:
    """(sum over samples in the closed window of norm^p dt)^(1/p); sup for p = inf."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(norms, dtype=float)
    t_a, t_b = window
    sel = (t >= t_a - 1e-12) & (t <= t_b + 1e-12)
    if not np.any(sel):
        raise WindowTooShort(f"no samples in window [{t_a}, {t_b}]")
    p = as_exponent(p)
    if p == INF:
        return float(np.max(v[sel]))
    dt = _uniform_step(t) if len(t) > 1 else 1.0
    pf = float(p)
    return float((np.sum(v[sel] ** pf) * dt) ** (1 / pf))


def strichartz_window_norm(snapshots: Sequence[tuple[float, ComplexField]], p, q, window,
                           which: str = "u") -> float:
    """Discrete L^p_t L^q_x norm of u (``which="u"``) or of w = (x + 2it grad) u over a window.

    ``snapshots`` are (t, field) pairs at uniform cadence.
    """
    if not snapshots:
        raise WindowTooShort("no snapshots")
    d = snapshots[0][1].grid.d
    p, q = _check_pair(p, q, d)
    if which not in ("u", "w"):
        raise ValueError("which must be 'u' or 'w'")
    t_a, t_b = window
    times, norms = [], []
    for t, f in snapshots:
        times.append(t)
        if t_a - 1e-12 <= t <= t_b + 1e-12:
            norms.append(lq_norm(f if which == "u" else weighted_field(f, t), q))
        else:
            norms.append(0.0)
    return mixed_norm(times, norms, p, window)


def series_strichartz_norm(series: TimeSeries, p, q, window) -> float:
    """Mixed norm of u from the L^q columns already stored in a series."""
    p, q = _check_pair(p, q, series.params.d)
    return mixed_norm(series.t, series.lq(q), p, window)


# ------------------------------------------------------------------- CSV

def write_series_csv(path, series: TimeSeries, q_list: Iterable | None = None) -> None:
    qs = [as_exponent(q) for q in (q_list if q_list is not None else
                                   (series.samples[0].lq_norms.keys() if series.samples else []))]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(CSV_BASE_COLUMNS) + [q_column(q) for q in qs])
        for s in series.samples:
            row = [getattr(s, c) for c in CSV_BASE_COLUMNS] + [s.lq_norms[q] for q in qs]
            w.writerow([format(float(v), ".17g") for v in row])


def read_series_csv(path, params: ProblemParams) -> TimeSeries:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header = rows[0]
    if tuple(header[:len(CSV_BASE_COLUMNS)]) != CSV_BASE_COLUMNS:
        raise SchemaError(f"{path}: header must start with {','.join(CSV_BASE_COLUMNS)}")
    qs = []
    for name in header[len(CSV_BASE_COLUMNS):]:
        if not name.startswith("lq_"):
            raise SchemaError(f"{path}: unexpected column {name!r}")
        try:
            qs.append(as_exponent(name[3:] if name[3:] != "inf" else INF))
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"{path}: bad q column {name!r}") from exc
    samples = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise SchemaError(f"{path}: line {i} has {len(row)} fields, header has {len(header)}")
        try:
            vals = [float(v) for v in row]
        except ValueError as exc:
            raise SchemaError(f"{path}: line {i}: {exc}") from exc
        base = dict(zip(CSV_BASE_COLUMNS, vals))
        samples.append(ObservableSample(**base, lq_norms=dict(zip(qs, vals[len(CSV_BASE_COLUMNS):]))))
    try:
        return TimeSeries(params, samples)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
