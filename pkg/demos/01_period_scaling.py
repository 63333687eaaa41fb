"""How the swapping period stretches under classical processing overhead.

A period of m cycles of length tau gives pi_s = m * tau.  Waiting for the
classical message adds a fraction h, extending it to pi_s* = (1 + h) * pi_s.
Once any loss is possible the per-period backlog penalty f = 2 * pi_s* * n
applies, no matter how small the loss probability is.
"""

from swapqueue import extended_period, f_gamma, period_length

print("base period for m cycles of length tau")
for m, tau in [(1, 1.0), (4, 0.5), (10, 0.25)]:
    print(f"  m={m:2d} tau={tau:4.2f} -> pi_s = {period_length(m, tau):g}")

print()
print("extension under overhead fraction h (pi_s = 1)")
for h in [0.0, 0.1, 0.2, 0.5, 1.0]:
    print(f"  h={h:4.2f} -> pi_s* = {extended_period(1.0, h):g}")

print()
print("noise penalty f for n connections at pi_s* = 1.2")
for n in [1, 2, 5, 10]:
    noisy = f_gamma(0.2, 1.2, n)
    clean = f_gamma(0.0, 1.2, n)
    print(f"  n={n:2d} -> f = {noisy:5.1f} with noise, {clean:g} without")
