"""Mapping degree two ways: Jacobian quadrature and signed preimage counts."""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    NonIntegralDegreeError,
    RegularValueError,
    UnderResolutionError,
)
from .maps import chart_jacobian, check_resolution, differential
from .mesh import integrate, kind_dim, kind_volume

__all__ = ["DegreeEstimate", "degree_by_jacobian", "degree_by_preimage", "INTEGRALITY_TOL"]

INTEGRALITY_TOL = 0.05
# preimage search keeps this far (in latitude) from the south pole and the north chart pole
POLE_MARGIN = 0.1


@dataclass(frozen=True)
class DegreeEstimate:
    raw: float
    rounded: int
    residual: float
    method: str
    preimages: tuple = field(default=(), repr=False, compare=False)

    def to_dict(self):
        return {"raw": self.raw, "rounded": self.rounded,
                "residual": self.residual, "method": self.method}


def _estimate(raw, method, tol):
    rounded = int(round(raw))
    residual = abs(raw - rounded)
    if residual >= tol:
        raise NonIntegralDegreeError(
            raw, f"{method} degree {raw:.6f} is {residual:.3g} from an integer "
                 f"(tolerance {tol}); refine the mesh")
    return DegreeEstimate(float(raw), rounded, float(residual), method)


def degree_by_jacobian(f, mesh, target_volume=None, tol=INTEGRALITY_TOL):
    """``|N|^-1 int_M J_f dmu`` by midpoint quadrature, rounded to an integer."""
    if mesh.kind != f.domain:
        raise ConfigurationError(f"mesh is {mesh.kind} but the map is defined on {f.domain}")
    if kind_dim(f.target) != mesh.dim:
        raise ConfigurationError("degree needs equal dimensions")
    check_resolution(f, mesh)
    if target_volume is None:
        target_volume = kind_volume(f.target)
    raw = integrate(mesh, differential(f, mesh.coords).jacobian) / target_volume
    return _estimate(raw, "jacobian", tol)


def _wrap(delta, period):
    return np.mod(delta + 0.5 * period, period) - 0.5 * period


def _residual(f, coords, value):
    r = f.evaluate(coords) - value
    # every target is a sphere; the last chart coordinate is the periodic longitude
    r[:, -1] = _wrap(r[:, -1], 2 * math.pi)
    return r


def _cells(mesh):
    """Corner node indices of every grid cell, wrapping periodic axes."""
    shape = mesh.shape
    per_axis = []
    for n, period in zip(shape, mesh.periods):
        lo = np.arange(n - 1)
        hi = lo + 1
        if period is not None:
            lo = np.append(lo, n - 1)
            hi = np.append(hi, 0)
        per_axis.append((lo, hi))
    grids = np.meshgrid(*[np.arange(len(lo)) for lo, _ in per_axis], indexing="ij")
    cell = [g.ravel() for g in grids]
    corners = []
    for choice in itertools.product((0, 1), repeat=len(shape)):
        idx = [per_axis[a][c][cell[a]] for a, c in enumerate(choice)]
        corners.append(np.ravel_multi_index(idx, shape))
    return np.stack(corners, axis=1)


def _cell_centers(mesh, corners):
    pts = mesh.coords[corners]  # (cells, 2^d, d)
    base = pts[:, 0, :]
    delta = pts - base[:, None, :]
    for a, period in enumerate(mesh.periods):
        if period is not None:
            delta[:, :, a] = _wrap(delta[:, :, a], period)
    return base + delta.mean(axis=1)


def _same_point(a, b, periods, tol):
    d = np.asarray(a) - np.asarray(b)
    for i, period in enumerate(periods):
        if period is not None:
            d[i] = _wrap(d[i], period)
    return float(np.max(np.abs(d))) < tol


def degree_by_preimage(f, value, mesh, steps=20, tol=1e-10):
    """Signed count of preimages of the regular value ``value`` (target chart coords).

    Cells whose corner residuals change sign in every component are refined
    by Newton's method with the analytic chart Jacobian; each root counts
    ``sign(J)``.
    """
    if mesh.kind != f.domain:
        raise ConfigurationError(f"mesh is {mesh.kind} but the map is defined on {f.domain}")
    value = np.asarray(value, dtype=float).ravel()
    if value.shape != (mesh.dim,):
        raise ConfigurationError(f"value needs {mesh.dim} chart coordinates")
    if not POLE_MARGIN <= value[0] <= math.pi - POLE_MARGIN:
        raise RegularValueError(
            f"latitude {value[0]:.4g} is within {POLE_MARGIN} of a pole; the non-smooth "
            "loci of the built-in maps all land on the south pole")

    res = _residual(f, mesh.coords, value)
    corners = _cells(mesh)
    cr = res[corners]  # (cells, 2^d, d)
    lo, hi = cr.min(axis=1), cr.max(axis=1)
    # longitude residuals jumping across the branch cut span about 2 pi
    candidate = np.all((lo <= 0) & (hi >= 0), axis=1) & np.all(hi - lo < math.pi, axis=1)
    starts = _cell_centers(mesh, corners[candidate])
    periods = mesh.periods
    scale = max(float(np.max(np.diff(e))) for e in mesh.edges)

    roots, signs = [], []
    for x in starts:
        x = x.copy()
        ok = False
        for _ in range(steps):
            r = _residual(f, x[None], value)[0]
            if np.max(np.abs(r)) < tol:
                ok = True
                break
            jac = chart_jacobian(f, x[None])[0]
            try:
                x = x - np.linalg.solve(jac, r)
            except np.linalg.LinAlgError:
                break
        if not ok:
            r = _residual(f, x[None], value)[0]
            ok = bool(np.max(np.abs(r)) < tol)
        if not ok:
            raise UnderResolutionError(
                f"Newton refinement did not converge from cell centre {x}; refine the mesh")
        for a, period in enumerate(periods):
            if period is not None:
                x[a] = np.mod(x[a], period)
        if any(_same_point(x, y, periods, 1e-7 * max(scale, 1e-3)) for y in roots):
            continue
        if f.singular_mask(x[None], tol=1e-9)[0]:
            raise RegularValueError(f"preimage {x} lies on the non-smooth locus")
        jac = differential(f, x[None]).jacobian[0]
        if abs(jac) < 1e-9:
            raise RegularValueError(f"value is critical: J = {jac:.3g} at preimage {x}")
        roots.append(x)
        signs.append(int(np.sign(jac)))
    total = sum(signs)
    return DegreeEstimate(float(total), total, 0.0, "preimage",
                          preimages=tuple(tuple(map(float, x)) for x in roots))
