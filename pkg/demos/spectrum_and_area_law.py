"""Row spectra at a reference point and the area-law scaling of S2.

Run with ``python demos/spectrum_and_area_law.py``.
"""
import numpy as np

from z2renyi import PepsParams, renyi_finite, renyi_thermodynamic
from z2renyi.entropy import LatticeGeometry

params = PepsParams(1.0, 0.5, 0.3, 0.2)
N1, N2 = 4, 100

print("# closed-form entropy per subsystem width")
for R1 in (1, 2, 3):
    res = renyi_thermodynamic(params, R1=R1, R2=20, N1=N1, n=2)
    c = res.components
    print(f"R1={R1}  rho1={c['rho1']:.12f}  rho1'={c['rho1_prime']:.12f}  S2={res.value:.10f}")

# S2 grows linearly in the perimeter once R2 is well above the correlation length
print("\n# finite lattice, R1=2")
R2s = np.arange(10, 31, 5)
S = [renyi_finite(params, LatticeGeometry(N1, N2, 2, R2), n=2).value for R2 in R2s]
slope, icpt = np.polyfit(R2s, S, 1)
for R2, s in zip(R2s, S):
    print(f"R2={R2:3d}  S2={s:.12f}  residual={s - (slope * R2 + icpt):+.1e}")
print(f"slope per unit R2 = {slope:.10f}")
