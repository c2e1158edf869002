"""Strang split-step Fourier integration with an exact nonlinear phase rotation.

One step is N(dt/2) L(dt) N(dt/2) where

* L(tau) multiplies the spectrum by exp(-i |k|^2 tau), the exact free flow;
* N(tau) multiplies u pointwise by exp(i mu W |u|^alpha tau), the exact flow
  of i u_t + mu W |u|^alpha u = 0, which leaves |u| unchanged.

Both factors are unitary in the discrete L^2 norm.  With
``fft_precision="extended"`` the linear substep runs its transforms in long
double and rounds back, so FFT round-off no longer accumulates as a mass
drift over thousands of steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import fft as sfft

from .errors import BoundaryContamination, Overflow, SpectralTail
from .exponents import INF, ProblemParams
from .grid import ComplexField, Grid, SingularWeight
from .observables import ObservableSample, sample_observables

FFT_PRECISIONS = ("double", "extended")


@dataclass(frozen=True)
class GuardConfig:
    """Thresholds for the run monitors, evaluated at every sampled step.

    boundary_tol: largest allowed fraction of mass with some |x_i| > L/4.
    spectral_tol: largest allowed fraction of spectral power in the top
        octave, modes with max_i |m_i| > n/4.
    overflow_factor: largest allowed growth of max |u| over its initial value.
    """

    boundary_tol: float = 1e-1
    spectral_tol: float = 1e-2
    overflow_factor: float = 1e6
    enabled: bool = True

    def to_dict(self) -> dict:
        return {"boundary_tol": self.boundary_tol, "spectral_tol": self.spectral_tol,
                "overflow_factor": self.overflow_factor, "enabled": self.enabled}


@dataclass(frozen=True)
class SolverState:
    t: float
    field: ComplexField
    params: ProblemParams
    weight: SingularWeight
    dt: float
    fft_precision: str = "extended"

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError(f"t must be nonnegative, got {self.t}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.fft_precision not in FFT_PRECISIONS:
            raise ValueError(f"fft_precision must be one of {FFT_PRECISIONS}")
        if self.weight.grid != self.field.grid:
            raise ValueError("weight and field live on different grids")
        if self.params.d != self.field.grid.d:
            raise ValueError("problem dimension differs from grid dimension")

    @property
    def grid(self) -> Grid:
        return self.field.grid


# --------------------------------------------------------------- kernels

class _Kernels:
    """Precomputed multipliers for one (grid, weight, params, precision)."""

    def __init__(self, grid: Grid, weight: SingularWeight, params: ProblemParams, precision: str):
        self.grid = grid
        self.mu = float(params.mu)
        self.alpha = float(params.alpha)
        self.W = weight.values
        self.extended = precision == "extended"
        self._lin: dict[float, np.ndarray] = {}

    def linear_multiplier(self, tau: float) -> np.ndarray:
        m = self._lin.get(tau)
        if m is None:
            if self.extended:
                k2 = self.grid.k2.astype(np.longdouble)
                m = np.exp(-1j * k2 * np.longdouble(tau)).astype(np.clongdouble)
            else:
                m = np.exp(-1j * self.grid.k2 * tau)
            self._lin[tau] = m
        return m

    def linear(self, u: np.ndarray, tau: float) -> np.ndarray:
        if tau == 0:
            return u
        mult = self.linear_multiplier(tau)
        if self.extended:
            v = sfft.ifftn(mult * sfft.fftn(u.astype(np.clongdouble)))
            return v.astype(np.complex128)
        return sfft.ifftn(mult * sfft.fftn(u))

    def nonlinear(self, u: np.ndarray, tau: float) -> np.ndarray:
        if tau == 0 or self.mu == 0:
            return u
        with np.errstate(over="ignore", invalid="ignore"):
            amp = np.abs(u) ** self.alpha
        if not np.all(np.isfinite(amp)):
            raise Overflow("|u|^alpha is not finite")
        return u * np.exp(1j * (self.mu * tau) * self.W * amp)

    def step(self, u: np.ndarray, dt: float) -> np.ndarray:
        u = self.nonlinear(u, dt / 2)
        u = self.linear(u, dt)
        return self.nonlinear(u, dt / 2)


def _kernels(state: SolverState) -> _Kernels:
    return _Kernels(state.grid, state.weight, state.params, state.fft_precision)


def linear_substep(state: SolverState, tau: float) -> SolverState:
    """Exact free flow over ``tau``; time is not advanced (substeps are building blocks)."""
    u = _kernels(state).linear(state.field.values, tau)
    return replace(state, field=state.field.with_values(u))


def nonlinear_substep(state: SolverState, tau: float) -> SolverState:
    u = _kernels(state).nonlinear(state.field.values, tau)
    return replace(state, field=state.field.with_values(u))


def strang_step(state: SolverState, dt: Optional[float] = None) -> SolverState:
    """One Strang step of length ``dt`` (default ``state.dt``); a negative dt runs backwards."""
    dt = state.dt if dt is None else float(dt)
    u = _kernels(state).step(state.field.values, dt)
    return replace(state, field=state.field.with_values(u), t=max(state.t + dt, 0.0))


# ---------------------------------------------------------------- monitors

def boundary_mass_fraction(grid: Grid, u: np.ndarray) -> float:
    band = np.zeros(grid.shape, dtype=bool)
    for xj in grid.axis_coords():
        band = band | (np.abs(xj) > grid.L / 4)
    dens = np.abs(u) ** 2
    total = dens.sum()
    return float(dens[band].sum() / total) if total > 0 else 0.0


def spectral_tail_fraction(grid: Grid, u: np.ndarray) -> float:
    top = np.zeros(grid.shape, dtype=bool)
    for mj in grid._open(grid.mode_index):
        top = top | (np.abs(mj) > grid.n // 4)
    power = np.abs(sfft.fftn(u)) ** 2
    total = power.sum()
    return float(power[top].sum() / total) if total > 0 else 0.0


def check_guards(grid: Grid, u: np.ndarray, t: float, guards: GuardConfig, initial_max: float) -> None:
    if not guards.enabled:
        return
    if not np.all(np.isfinite(u)):
        raise Overflow(f"field became non-finite at t={t:.6g}")
    top = float(np.max(np.abs(u)))
    if initial_max > 0 and top > guards.overflow_factor * initial_max:
        raise Overflow(f"max|u| = {top:.3e} exceeds {guards.overflow_factor:g} x initial at t={t:.6g}")
    frac = boundary_mass_fraction(grid, u)
    if frac > guards.boundary_tol:
        raise BoundaryContamination(
            f"mass fraction {frac:.3e} beyond L/4 of the centre exceeds {guards.boundary_tol:g} at t={t:.6g}")
    tail = spectral_tail_fraction(grid, u)
    if tail > guards.spectral_tol:
        raise SpectralTail(f"top-octave power fraction {tail:.3e} exceeds {guards.spectral_tol:g} at t={t:.6g}")


Observer = Callable[[float, ComplexField], None]


def evolve(state: SolverState, t_final: float, sample_every: int = 10,
           q_list: Iterable = (2, 4, INF), guards: GuardConfig | None = None,
           observer: Observer | None = None,
           sink: list | None = None) -> list[ObservableSample]:
    """Advance to ``t_final`` with fixed steps, sampling every ``sample_every`` steps.

    The start and the final time are always sampled.  If t_final - t is not
    a whole number of steps the last step is shortened.  ``observer`` is
    called with (t, field) at each sample, which lets callers keep
    snapshots without storing every field here.  Guards run at every sample
    (including the initial one) and raise subclasses of NumericalGuard.
    Samples are appended to ``sink`` when given, so a caller still holds the
    partial series if a guard fires.
    """
    if t_final < state.t:
        raise ValueError(f"t_final={t_final} precedes the current time {state.t}")
    if sample_every < 1:
        raise ValueError("sample_every must be a positive integer")
    guards = guards or GuardConfig()
    q_list = list(q_list)
    grid, params, weight = state.grid, state.params, state.weight
    ker = _kernels(state)
    u = state.field.values.copy()
    t0, dt = state.t, state.dt
    span = t_final - t0
    nfull = int(math.floor(span / dt + 1e-9))
    rest = span - nfull * dt
    if rest <= 1e-9 * dt:
        rest = 0.0
    nsteps = nfull + (1 if rest > 0 else 0)

    initial_max = float(np.max(np.abs(u)))
    samples: list[ObservableSample] = sink if sink is not None else []

    def take(t: float) -> None:
        check_guards(grid, u, t, guards, initial_max)
        f = ComplexField(grid, u)
        samples.append(sample_observables(f, weight, params, t, q_list))
        if observer is not None:
            observer(t, f)

    take(t0)
    for s in range(1, nsteps + 1):
        if s <= nfull:
            u = ker.step(u, dt)
            t = t0 + s * dt
        else:
            u = ker.step(u, rest)
            t = t_final
        if s % sample_every == 0 or s == nsteps:
            take(t_final if s == nsteps else t)
    return samples


def run_to(state: SolverState, t_final: float) -> SolverState:
    """Advance without sampling or guards; returns the final state."""
    samples_field: list = []
    evolve(state, t_final, sample_every=max(1, 10**9), q_list=(),
           guards=GuardConfig(enabled=False),
           observer=lambda t, f: samples_field.append((t, f)))
    t, f = samples_field[-1]
    return replace(state, t=t, field=f)
