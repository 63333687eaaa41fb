"""One long run under max-weight scheduling, checked against its bounds.

The workload is admissible (row sums 0.8, margin c1 = 0.2), so the backlog
should hover far below the analytic bound and the conditional drift at the
largest observed backlogs should be negative.
"""

import numpy as np

from swapqueue import RepeaterConfig, estimate_drift, run, verify_bounds

cfg = RepeaterConfig.uniform(4, 0.2, horizon=100_000, seed=1)
traj = run(cfg)

report = verify_bounds(traj)
print(f"set kind          : {report.set_type.value}")
print(f"backlog bound     : {report.z_bound:.2f}")
print(f"mean backlog      : {report.empirical_mean_z:.2f}"
      f"  (satisfied: {report.z_satisfied})")
print(f"delay bound       : {report.delay_bound:.2f} periods")
print(f"mean delay        : {report.empirical_delay:.2f} periods"
      f"  (satisfied: {report.delay_satisfied})")

est = estimate_drift(traj)
print()
print("conditional drift by backlog bin")
for b in est.bins:
    if b.count == 0:
        continue
    print(f"  z in [{b.z_lo:6.1f}, {b.z_hi:6.1f}]: "
          f"mean drift {b.mean_drift:8.3f} over {b.count:6d} samples")
print(f"fitted decay rate : {est.epsilon_hat:.3f}  (consistent: {est.consistent})")

half = traj.horizon // 2
print()
print(f"mean backlog, first half : {np.mean(traj.z_totals[:half]):.2f}")
print(f"mean backlog, second half: {np.mean(traj.z_totals[half:]):.2f}")
