"""Degree and energy side by side for the map T^2 -> S^2 that bubbles twice.

The degree column never moves while the energy column shrinks: the maps
converge in energy to something of a different degree.  Under the
log-damped gauge the decay is real but slow (about 1 / log k), so over this
range of k the verdict stays Inconclusive.
"""

from degree_lab.energy import decay_experiment
from degree_lab.young import PowerLog

for gauge in (1.5, PowerLog(2, 1)):
    report = decay_experiment("torus:d=2", gauge, [4, 8, 16, 32, 64], with_degree=True)
    print(f"gauge {report.gauge}, slope {report.slope:+.3f}, verdict {report.verdict}")
    print("   k  degree  residual     energy")
    for r in report.rows:
        print(f"{r.k:4d}  {r.degree:6d}  {r.degree_residual:8.1e}  {r.energy:9.4f}")
    print()
