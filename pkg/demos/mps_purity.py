"""The same replica-boundary construction for a one-dimensional MPS."""
from z2renyi.entropy import mps_purity_demo

for chi, N, interval in [(2, 8, (0, 3)), (3, 10, (2, 5)), (4, 12, (4, 4))]:
    transfer, direct = mps_purity_demo(chi, N, subsystem_interval=interval, seed=11)
    print(f"chi={chi} N={N} A={interval}  transfer={transfer:.15f}  "
          f"direct={direct:.15f}  diff={abs(transfer - direct):.1e}")
