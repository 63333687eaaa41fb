"""Max-weight against the random and delayed baselines, paired by seed.

All three policies see the same arrival and loss draws within a replication,
so differences are down to scheduling alone.  Max-weight should carry the
smallest backlog; acting on a stale schedule costs something but far less
than scheduling at random.
"""

import numpy as np

from swapqueue import Policy, RepeaterConfig, run

POLICIES = (Policy.MAXWEIGHT, Policy.RANDOM, Policy.DELAYED)

print(f"{'rep':>3}  " + "".join(f"{p.value:>12}" for p in POLICIES))
means = {p: [] for p in POLICIES}
for rep in range(5):
    cfg = RepeaterConfig.uniform(4, 0.2, horizon=20_000, seed=100 + rep)
    burn = cfg.horizon // 10
    row = []
    for policy in POLICIES:
        mean_z = float(np.mean(run(cfg, policy).z_totals[burn:]))
        means[policy].append(mean_z)
        row.append(f"{mean_z:12.2f}")
    print(f"{rep:>3}  " + "".join(row))

print()
for policy in POLICIES:
    print(f"mean backlog under {policy.value:<10}: {np.mean(means[policy]):8.2f}")
