"""Walk through the exact-rational exponent engine for a few parameter points.

For each (d, b, alpha) print the critical Sobolev index, the two thresholds,
the regime classification and whether each exponent construction admits a
witness, with the admissible pairs it produced.
"""
from __future__ import annotations

from fractions import Fraction as F

from inls.exponents import (LEMMAS, ProblemParams, alpha_thresholds, critical_sobolev, fmt_exponent,
                            lwp_regime, mass_class, strauss_exponent)

POINTS = [(3, F(1, 2), F(3, 2)), (2, F(1, 2), F(3, 2)), (4, F(1), F(3, 4)), (3, F(1), F(1, 2))]

for d, b, a in POINTS:
    prm = ProblemParams(d, b, a)
    lo, hi = alpha_thresholds(prm)
    print(f"d={d} b={b} alpha={a}")
    print(f"  s_c = {critical_sobolev(prm)}   alpha_* = {lo}   alpha^* = {fmt_exponent(hi)}"
          f"   Strauss = {strauss_exponent(d, b):.6f}")
    print(f"  class: {mass_class(prm).value}   local theory branch: {lwp_regime(prm).lwp_branch.value}")
    for name, fn in LEMMAS.items():
        rep = fn(prm)
        if rep.feasible:
            pairs = ", ".join(f"({fmt_exponent(p.p)}, {fmt_exponent(p.q)})" for p in rep.pairs)
            print(f"  {name:<10} feasible with eps = {rep.witness_epsilon}: {pairs}")
        else:
            failed = [c.cid for c in rep.conditions if not c.passed]
            print(f"  {name:<10} infeasible; failing conditions: {failed}")
            for note in rep.notes:
                print(f"             note: {note}")
    print()
