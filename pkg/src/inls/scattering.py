"""Backward free propagation and the Cauchy test for scattering states.

psi(t) = exp(-it Laplacian) u(t) converges in Sigma = H^1 with finite
variance when the solution scatters; the defect matrices record
||psi(t_i) - psi(t_j)|| at a set of checkpoints.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import fft as sfft

from .errors import HorizonExceeded
from .grid import ComplexField, write_field
from .observables import kinetic, mass, variance


def free_propagate_back(field: ComplexField, t: float) -> ComplexField:
    """Apply the spectral multiplier exp(+i |k|^2 t)."""
    if t == 0:
        return field.copy()
    g = field.grid
    return ComplexField(g, sfft.ifftn(np.exp(1j * g.k2 * t) * sfft.fftn(field.values)))


def h1_norm(field: ComplexField) -> float:
    return math.sqrt(mass(field) + kinetic(field))


def sigma_norm(field: ComplexField) -> float:
    """sqrt(||u||^2 + ||grad u||^2) + ||x u||."""
    return h1_norm(field) + math.sqrt(variance(field))


@dataclass
class ScatterReport:
    checkpoints: list[float]
    h1_defects: np.ndarray
    sigma_defects: np.ndarray
    state_estimate: ComplexField

    def consecutive(self, which: str = "h1") -> list[float]:
        """Defects between neighbouring checkpoints, in order."""
        m = self.h1_defects if which == "h1" else self.sigma_defects
        return [float(m[i, i + 1]) for i in range(len(self.checkpoints) - 1)]

    def to_dict(self) -> dict:
        return {
            "checkpoints": [float(t) for t in self.checkpoints],
            "h1_defects": self.h1_defects.tolist(),
            "sigma_defects": self.sigma_defects.tolist(),
            "consecutive_h1": self.consecutive("h1"),
            "consecutive_sigma": self.consecutive("sigma"),
        }

    def write(self, json_path, state_path=None) -> None:
        doc = self.to_dict()
        if state_path is not None:
            write_field(state_path, self.state_estimate)
            doc["state_estimate"] = Path(state_path).name
        Path(json_path).write_text(json.dumps(doc, indent=2) + "\n")


def cauchy_defect(run: Mapping[float, ComplexField] | Sequence[tuple[float, ComplexField]],
                  checkpoints: Sequence[float], horizon: float | None = None,
                  time_tol: float = 1e-9) -> ScatterReport:
    """Defect matrices of psi at the checkpoints.

    ``run`` maps times to stored fields (a dict or (t, field) pairs).  Each
    checkpoint must match a stored time to ``time_tol`` and lie within the
    simulated horizon (default: the largest stored time).
    """
    items = sorted((run.items() if isinstance(run, Mapping) else run), key=lambda p: p[0])
    if not items:
        raise HorizonExceeded("no fields were stored")
    times = np.array([t for t, _ in items])
    horizon = float(times[-1]) if horizon is None else float(horizon)
    cps = [float(c) for c in checkpoints]
    if len(cps) < 2:
        raise ValueError("need at least two checkpoints")
    if any(b < a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be nondecreasing")
    psis = []
    for c in cps:
        if c > horizon + time_tol or c < times[0] - time_tol:
            raise HorizonExceeded(f"checkpoint {c} outside the simulated range [{times[0]}, {horizon}]")
        j = int(np.argmin(np.abs(times - c)))
        if abs(times[j] - c) > time_tol:
            raise HorizonExceeded(f"no stored field at checkpoint {c}")
        psis.append(free_propagate_back(items[j][1], c))
    n = len(cps)
    h1 = np.zeros((n, n))
    sg = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            diff = ComplexField(psis[i].grid, psis[i].values - psis[j].values)
            a = h1_norm(diff)
            h1[i, j] = h1[j, i] = a
            sg[i, j] = sg[j, i] = a + math.sqrt(variance(diff))
    return ScatterReport(cps, h1, sg, psis[-1])
