"""Closed-form delay and rate-ratio curves for the three swapping-set kinds.

The shared operating point is five connections with one lost output under
noise, dispersion beta and admissibility margin c1 as below.  Delay is the
backlog bound spread over the incoming rate, so it falls as traffic grows;
the outgoing/incoming ratio climbs toward 1 (or toward 1 - L/n with loss).
"""

from swapqueue import SetKind, analytic_delay, analytic_rate_ratio

KW = {
    SetKind.PERFECT: {},
    SetKind.COMPLETE: dict(beta=0.78, c1=0.7),
    SetKind.NONCOMPLETE: dict(losses=1, beta=0.64, c1=0.7, f=12.0),
}

print(f"{'b_total':>10}  {'kind':<12} {'delay':>12}  {'ratio':>10}")
for b in [1.0, 10.0, 100.0, 1e4, 1e6, 1e8]:
    for kind, kw in KW.items():
        d = analytic_delay(kind, b, 5, **kw)
        r = analytic_rate_ratio(kind, b, 5, **kw)
        print(f"{b:10.0e}  {kind.value:<12} {d:12.6g}  {r:10.6f}")
    print()

print("note the non-complete ratio saturates at 0.8: one of five outputs")
print("is lost each period, so a fifth of the traffic never leaves")
