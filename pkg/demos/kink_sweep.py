"""S2 along the delta axis near delta = 1, with its discrete curvature."""
from z2renyi.acceptance import FIG6_DELTAS, fig6_curve, kink_ratios

for gamma in (0.0, 1.0):
    S = fig6_curve(gamma)
    at_one, spread = kink_ratios(FIG6_DELTAS, S)
    print(f"gamma={gamma}: |d2(1)|/median={at_one:.3g}  max/median={spread:.3g}")
    for d, s in list(zip(FIG6_DELTAS, S))[::10]:
        print(f"  delta={d:.3f}  S2={s:.10f}")
