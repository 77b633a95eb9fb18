"""How the energy of the bubble maps g_k behaves as the cap shrinks.

For t^p the energy goes like k^(p - 2) on S^2: it vanishes for p < 2, stays
put at p = 2 and blows up for p > 2.  The log-damped gauge sits just below
the critical exponent and decays, but only like 1 / log k.
"""

from degree_lab.energy import decay_experiment
from degree_lab.young import PowerLog

KS = [4, 8, 16, 32, 64, 128]

for gauge in (1, 1.5, 2, 3, PowerLog(2, 1)):
    report = decay_experiment("bubble", gauge, KS)
    energies = "  ".join(f"{e:9.4f}" for e in report.energies)
    rate = "" if report.reference_rate is None else f" (expected {report.reference_rate:+.2f})"
    print(f"{report.gauge:>24}: {energies}   slope {report.slope:+.3f}{rate}  {report.verdict}")

# the log gauge against its reference bound P(k) k^-2
report = decay_experiment("bubble", PowerLog(2, 1), KS)
print("\nk, energy, P(k)k^-2, ratio")
for r in report.rows:
    print(f"{r.k:4d}  {r.energy:8.4f}  {r.reference:8.5f}  {r.bound_ratio:7.3f}")
