"""Sobolev and Orlicz energies of map differentials, and decay experiments.

``|Df|`` is always the Hilbert-Schmidt norm.  A decay experiment runs a map
family over a list of bubble parameters ``k`` and records, per ``k``, the
energy, the measure of the support of ``Df``, ``sup |Df|`` and the one-line
bound ``energy <= P(sup |Df|) |support|`` as a certificate.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ._parse import as_float, as_int, parse_params, split_descriptor
from .degree import degree_by_jacobian
from .errors import ConfigurationError, DomainError, ResolutionError
from .maps import CELLS_PER_CAP, Bubble, Collapse, Compose, PowerMap, check_resolution, differential
from .mesh import cap_edges, graded_edges, integrate, sphere_mesh, torus_mesh
from .young import Power, YoungFunction, luxemburg_norm

__all__ = [
    "p_energy", "orlicz_energy", "Family", "parse_family", "EnergyRow", "EnergyReport",
    "decay_experiment", "decay_verdict", "fit_slope", "threads",
]


def threads():
    """Worker count for per-k parallelism, capped by ``DEGREE_LAB_THREADS``."""
    raw = os.environ.get("DEGREE_LAB_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigurationError(f"DEGREE_LAB_THREADS={raw!r} is not an integer") from None


def orlicz_energy(f, mesh, P):
    """``int P(|Df|) dmu`` over the domain mesh."""
    check_resolution(f, mesh)
    hs = differential(f, mesh.coords).hs_norm
    return integrate(mesh, P(hs))


def p_energy(f, mesh, p):
    """``int |Df|^p dmu``; the same summation as ``orlicz_energy`` with ``t^p``."""
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return orlicz_energy(f, mesh, Power(p))


@dataclass(frozen=True)
class Family:
    """A one-parameter map family ``k -> map`` together with its mesh rule.

    ``bubble`` is ``g_k`` on S^n, ``sphere`` is ``PowerMap(d) o g_k`` on S^2 and
    ``torus`` is ``PowerMap(d) o g_k o Collapse`` from T^2 to S^2.
    """

    name: str
    n: int = 2
    d: int = 2
    rho: float = 0.25
    coarse: int = 64

    def __post_init__(self):
        if self.name not in ("bubble", "sphere", "torus"):
            raise ConfigurationError(f"unknown family {self.name!r}")

    @property
    def dim(self):
        return self.n if self.name == "bubble" else 2

    def map(self, k):
        if self.name == "bubble":
            return Bubble(k, self.n)
        if self.name == "sphere":
            return Compose(PowerMap(self.d), Bubble(k))
        return Compose(PowerMap(self.d), Bubble(k), Collapse(self.rho))

    def mesh(self, k):
        """Mesh satisfying the resolution rule for parameter ``k``.

        Spheres get 64 theta cells across the cap, with a cap-aligned edge.
        The torus gets cells of width ``rho / (64 k)`` over the preimage disk.
        """
        if self.name == "torus":
            support = self.rho / (math.pi * k)
            edges = graded_edges(self.coarse * 2, 0.5, 1.25 * support,
                                 self.rho / (CELLS_PER_CAP * k))
            return torus_mesh(None, x_edges=edges, y_edges=edges)
        edges = cap_edges(1.0 / k, CELLS_PER_CAP, self.coarse)
        n_mid = 32 if self.dim == 3 else None
        return sphere_mesh(self.dim, theta_edges=edges, n_phi=16, n_mid=n_mid)

    def describe(self):
        if self.name == "bubble":
            return f"bubble:n={self.n}"
        if self.name == "sphere":
            return f"sphere:d={self.d}"
        return f"torus:d={self.d},rho={self.rho:g}"


def parse_family(text):
    """Parse ``bubble``, ``bubble:n=3``, ``sphere:d=2`` or ``torus:d=2,rho=0.25``."""
    name, rest = split_descriptor(text)
    params = parse_params(rest, {"n", "d", "rho"})
    return Family(name, n=as_int(params, "n", 2), d=as_int(params, "d", 2),
                  rho=as_float(params, "rho", 0.25))


@dataclass
class EnergyRow:
    k: int
    energy: float
    cap_measure: float
    sup_df: float
    bound_certificate: bool
    reference: float
    bound_ratio: float
    luxemburg: float
    degree: int = None
    degree_residual: float = None


@dataclass
class EnergyReport:
    family: str
    gauge: str
    rows: list
    slope: float
    reference_rate: float
    verdict: str
    parameters: dict = field(default_factory=dict)

    @property
    def ks(self):
        return [r.k for r in self.rows]

    @property
    def energies(self):
        return np.array([r.energy for r in self.rows])

    def columns(self):
        names = ["k", "energy", "cap_measure", "sup_df", "bound_certificate",
                 "reference", "bound_ratio", "luxemburg"]
        if self.rows and self.rows[0].degree is not None:
            names += ["degree", "degree_residual"]
        return names

    def to_dict(self):
        return {
            "family": self.family, "gauge": self.gauge, "slope": self.slope,
            "reference_rate": self.reference_rate, "verdict": self.verdict,
            "parameters": self.parameters, "rows": [asdict(r) for r in self.rows],
        }


def fit_slope(ks, values):
    """Least-squares slope of ``log value`` against ``log k``."""
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0):
        return float("nan")
    return float(np.polyfit(np.log(ks), np.log(values), 1)[0])


def decay_verdict(energies, slope):
    e = np.asarray(energies, dtype=float)
    if not np.isfinite(slope):
        return "Inconclusive"
    if slope <= -0.2 and e[-1] < 0.5 * e[0]:
        return "DecaysToZero"
    if abs(slope) < 0.1 and e.min() >= 0.5 * e.max():
        return "BoundedAway"
    return "Inconclusive"


def _gauge(gauge):
    if isinstance(gauge, YoungFunction):
        return gauge
    return Power(float(gauge))


def _row(family, P, k, with_degree):
    f = family.map(k)
    mesh = family.mesh(k)
    check_resolution(f, mesh)
    hs = differential(f, mesh.coords).hs_norm
    energy = integrate(mesh, P(hs))
    support = hs > 0
    cap = float(np.sum(mesh.weights[support]))
    sup = float(hs.max())
    certificate = bool(energy <= P(sup) * cap * (1 + 1e-6))
    n = family.dim
    reference = P(float(k)) * float(k) ** -n
    row = EnergyRow(
        k=k, energy=energy, cap_measure=cap, sup_df=sup, bound_certificate=certificate,
        reference=reference, bound_ratio=energy / reference,
        luxemburg=luxemburg_norm(hs, mesh.weights, P),
    )
    if with_degree:
        est = degree_by_jacobian(f, mesh)
        row.degree, row.degree_residual = est.rounded, est.residual
    return row


def decay_experiment(family, gauge, k_list, with_degree=False, workers=None):
    """Energies of ``family`` along ``k_list`` with a fitted log-log slope and verdict.

    ``gauge`` is an exponent ``p`` or a :class:`~degree_lab.young.YoungFunction`.
    A resolution failure aborts the run; the raised error carries the rows
    computed before it as ``partial_report``.
    """
    if isinstance(family, str):
        family = parse_family(family)
    ks = [int(k) for k in k_list]
    if len(ks) < 4:
        raise ConfigurationError("a decay experiment needs at least four k values")
    if any(b <= a for a, b in zip(ks, ks[1:])) or ks[0] < 1:
        raise ConfigurationError("k values must be positive and strictly increasing")
    P = _gauge(gauge)
    workers = workers or threads()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_row, family, P, k, with_degree) for k in ks]
    rows = []
    for fut in futures:
        try:
            rows.append(fut.result())
        except ResolutionError as exc:
            exc.partial_report = _report(family, P, gauge, rows)
            raise
    return _report(family, P, gauge, rows)


def _report(family, P, gauge, rows):
    energies = [r.energy for r in rows]
    ks = [r.k for r in rows]
    slope = fit_slope(ks, energies) if len(rows) >= 2 else float("nan")
    rate = (P.p - family.dim) if isinstance(P, Power) else None
    verdict = decay_verdict(energies, slope) if rows else "Inconclusive"
    return EnergyReport(
        family=family.describe(), gauge=P.description, rows=rows, slope=slope,
        reference_rate=rate, verdict=verdict,
        parameters={"k": ks, "cells_per_cap": CELLS_PER_CAP},
    )
