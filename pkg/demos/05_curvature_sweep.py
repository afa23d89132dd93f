"""Decay-rate bookkeeping across field curvatures.

The averaged loops are integrated for curvatures spanning two decades and an
exponential rate is fitted to the position envelope. The gradient rows track
alpha*H/4 (the curvature leaks into the pace); the curvature-inverting rows
stay at alpha/4 regardless of H once the Riccati filter has settled.
"""

from sourceseek import DEFAULT_PARAMS, HessianSweepConfig, run_hessian_invariance

report = run_hessian_invariance(HessianSweepConfig(hessians=(0.01, 0.1, 1.0)))
print(report.report())

alpha = DEFAULT_PARAMS.alpha
print(f"predicted gradient rates alpha*H/4: "
      f"{', '.join(f'{0.25 * alpha * row.hessian:g}' for row in report.rows)}")
print(f"predicted curvature-inverting rate alpha/4 = {0.25 * alpha:g}")
