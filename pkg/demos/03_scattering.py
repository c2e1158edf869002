"""Pull a defocusing solution back along the free flow and watch it settle.

psi(t) = e^{-it Laplacian} u(t) should converge as t grows; the defects
between consecutive dyadic checkpoints measure how fast.
"""
from __future__ import annotations

from fractions import Fraction as F

from inls.exponents import ProblemParams
from inls.grid import gaussian_data, make_grid, sample_weight
from inls.scattering import cauchy_defect, sigma_norm
from inls.solver import SolverState, evolve

grid = make_grid(1, 128.0, 1024)
params = ProblemParams(1, F(1, 2), F(3), -1)
state = SolverState(0.0, gaussian_data(grid, 1.0, 1.0), params, sample_weight(grid, params.b), 5e-3)
stored = {}
evolve(state, 8.0, sample_every=200, observer=lambda t, f: stored.__setitem__(round(t, 9), f.copy()))

checkpoints = [1.0, 2.0, 4.0, 8.0]
rep = cauchy_defect(stored, checkpoints)
for (a, b), h1, sg in zip(zip(checkpoints, checkpoints[1:]), rep.consecutive("h1"), rep.consecutive("sigma")):
    print(f"||psi({b:g}) - psi({a:g})||: H1 {h1:.4f}   Sigma {sg:.4f}")
print(f"Sigma norm of the scattering-state estimate: {sigma_norm(rep.state_estimate):.4f}")
