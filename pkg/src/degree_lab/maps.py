"""Explicit map families with analytic differentials.

Points are chart coordinates (see :mod:`degree_lab.mesh`), stacked as rows.
Differentials are returned as matrices in the orthonormal coordinate
frames of domain and target, so the Hilbert-Schmidt norm is the Frobenius
norm and the Jacobian relative to the volume forms is the determinant.

Families:

* ``Bubble(k)`` on S^n: stretches the cap ``theta < 1/k`` over the sphere,
  ``(z, theta) -> (z, k pi theta)``, and sends the rest to the south pole.
* ``PowerMap(d)`` on S^2: ``(theta, phi) -> (theta, d phi)``.
* ``Collapse(center, rho)`` from T^2 to S^2: the disk of radius ``rho`` is
  opened radially onto the sphere minus the south pole, ``theta = pi r / rho``;
  its complement goes to the south pole.
* ``Identity``, ``Constant`` and ``Compose`` (applied right to left).

``Bubble`` and ``Collapse`` are Lipschitz, not smooth, across the cap
boundary ``theta = 1/k`` and the circle ``r = rho``.  Those loci have
measure zero and midpoint meshes never hit them.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._parse import as_float, as_int, parse_params, split_descriptor
from .errors import ConfigurationError, ResolutionError, SingularLocusError
from .mesh import frame_scales, kind_dim

__all__ = [
    "MapExpr", "Bubble", "PowerMap", "Collapse", "Identity", "Constant", "Compose",
    "DifferentialSample", "differential", "evaluate", "cap_measure", "cap_measure_exact",
    "chart_jacobian", "parse_map", "check_resolution", "CELLS_PER_CAP",
]

SOUTH = math.pi
LOCUS_TOL = 1e-14
# theta cells per cap width 1/k are counted in units of pi/(64 k), i.e. N_theta >= 64 k
CELLS_PER_CAP = 64


def _rows(coords, dim):
    c = np.atleast_2d(np.asarray(coords, dtype=float))
    if c.shape[1] != dim:
        raise TypeError(f"expected chart coordinates of dimension {dim}, got {c.shape[1]}")
    return c


class MapExpr:
    domain = None
    target = None

    def evaluate(self, coords):
        raise NotImplementedError

    def frame_matrix(self, coords):
        """Differential as ``(N, dim target, dim domain)`` matrices in orthonormal frames."""
        raise NotImplementedError

    def singular_mask(self, coords, tol=LOCUS_TOL):
        return np.zeros(len(np.atleast_2d(coords)), dtype=bool)

    def factors(self):
        return [self]


@dataclass(frozen=True)
class Bubble(MapExpr):
    k: int
    n: int = 2

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ConfigurationError(f"bubble parameter k must be a positive integer, got {self.k}")
        if self.n not in (2, 3):
            raise ConfigurationError("bubble maps are implemented on S^2 and S^3")

    @property
    def domain(self):
        return f"S{self.n}"

    target = domain

    @property
    def cap(self):
        return 1.0 / self.k

    def evaluate(self, coords):
        c = _rows(coords, self.n).copy()
        th = c[:, 0]
        c[:, 0] = np.where(th < self.cap, self.k * math.pi * th, SOUTH)
        return c

    def frame_matrix(self, coords):
        c = _rows(coords, self.n)
        th = c[:, 0]
        inside = th < self.cap
        stretch = self.k * math.pi
        s = np.where(inside, np.sin(stretch * th) / np.sin(np.where(inside, th, 1.0)), 0.0)
        out = np.zeros((len(c), self.n, self.n))
        out[:, 0, 0] = np.where(inside, stretch, 0.0)
        for i in range(1, self.n):
            out[:, i, i] = s
        return out

    def singular_mask(self, coords, tol=LOCUS_TOL):
        return np.abs(_rows(coords, self.n)[:, 0] - self.cap) <= tol


@dataclass(frozen=True)
class PowerMap(MapExpr):
    d: int
    domain = "S2"
    target = "S2"

    def evaluate(self, coords):
        c = _rows(coords, 2).copy()
        c[:, 1] = np.mod(self.d * c[:, 1], 2 * math.pi)
        return c

    def frame_matrix(self, coords):
        c = _rows(coords, 2)
        out = np.zeros((len(c), 2, 2))
        out[:, 0, 0] = 1.0
        out[:, 1, 1] = self.d
        return out


@dataclass(frozen=True)
class Collapse(MapExpr):
    rho: float = 0.25
    center: tuple = (0.5, 0.5)
    domain = "T2"
    target = "S2"

    def __post_init__(self):
        if not 0 < self.rho < 0.5:
            raise ConfigurationError(f"collapse radius must lie in (0, 1/2), got {self.rho}")

    def _polar(self, coords):
        c = _rows(coords, 2)
        d = np.mod(c - np.asarray(self.center) + 0.5, 1.0) - 0.5
        r = np.hypot(d[:, 0], d[:, 1])
        psi = np.arctan2(d[:, 1], d[:, 0])
        return r, psi

    def evaluate(self, coords):
        r, psi = self._polar(coords)
        inside = r < self.rho
        theta = np.where(inside, math.pi * r / self.rho, SOUTH)
        return np.stack([theta, np.mod(psi, 2 * math.pi)], axis=1)

    def frame_matrix(self, coords):
        r, psi = self._polar(coords)
        inside = r < self.rho
        radial = math.pi / self.rho
        safe_r = np.where(r > 0, r, 1.0)
        tangential = np.where(r > 0, np.sin(radial * r) / safe_r, radial)
        radial = np.where(inside, radial, 0.0)
        tangential = np.where(inside, tangential, 0.0)
        cos, sin = np.cos(psi), np.sin(psi)
        out = np.empty((len(r), 2, 2))
        # diag(radial, tangential) composed with the rotation (e_x, e_y) -> (e_r, e_psi)
        out[:, 0, 0] = radial * cos
        out[:, 0, 1] = radial * sin
        out[:, 1, 0] = -tangential * sin
        out[:, 1, 1] = tangential * cos
        return out

    def singular_mask(self, coords, tol=LOCUS_TOL):
        r, _ = self._polar(coords)
        return np.abs(r - self.rho) <= tol


@dataclass(frozen=True)
class Identity(MapExpr):
    kind: str = "S2"

    @property
    def domain(self):
        return self.kind

    target = domain

    def evaluate(self, coords):
        return _rows(coords, kind_dim(self.kind)).copy()

    def frame_matrix(self, coords):
        n = kind_dim(self.kind)
        c = _rows(coords, n)
        return np.broadcast_to(np.eye(n), (len(c), n, n)).copy()


@dataclass(frozen=True)
class Constant(MapExpr):
    point: tuple = (math.pi, 0.0)
    domain: str = "S2"
    target: str = "S2"

    def evaluate(self, coords):
        c = _rows(coords, kind_dim(self.domain))
        return np.broadcast_to(np.asarray(self.point, dtype=float), (len(c), len(self.point))).copy()

    def frame_matrix(self, coords):
        c = _rows(coords, kind_dim(self.domain))
        return np.zeros((len(c), kind_dim(self.target), kind_dim(self.domain)))


class Compose(MapExpr):
    """``Compose(f, g, h)`` is ``f o g o h``."""

    def __init__(self, *maps):
        if len(maps) == 1 and isinstance(maps[0], (list, tuple)):
            maps = tuple(maps[0])
        if not maps:
            raise ConfigurationError("compose needs at least one map")
        flat = []
        for m in maps:
            flat.extend(m.factors())
        for outer, inner in zip(flat, flat[1:]):
            if outer.domain != inner.target:
                raise TypeError(f"cannot compose {outer!r} after {inner!r}: "
                                f"{inner.target} is not {outer.domain}")
        self.maps = tuple(flat)

    @property
    def domain(self):
        return self.maps[-1].domain

    @property
    def target(self):
        return self.maps[0].target

    def factors(self):
        return list(self.maps)

    def _stages(self, coords):
        pts = [_rows(coords, kind_dim(self.domain))]
        for m in reversed(self.maps):
            pts.append(m.evaluate(pts[-1]))
        return pts

    def evaluate(self, coords):
        return self._stages(coords)[-1]

    def frame_matrix(self, coords):
        pts = self._stages(coords)
        out = None
        for m, p in zip(reversed(self.maps), pts):
            d = m.frame_matrix(p)
            out = d if out is None else d @ out
        return out

    def singular_mask(self, coords, tol=LOCUS_TOL):
        pts = self._stages(coords)
        mask = np.zeros(len(pts[0]), dtype=bool)
        for m, p in zip(reversed(self.maps), pts):
            mask |= m.singular_mask(p, tol)
        return mask

    def __eq__(self, other):
        return isinstance(other, Compose) and self.maps == other.maps

    def __hash__(self):
        return hash(self.maps)

    def __repr__(self):
        return "Compose(" + ", ".join(map(repr, self.maps)) + ")"


class DifferentialSample:
    """Differentials at a batch of points, in orthonormal frames."""

    def __init__(self, matrices):
        self.matrices = matrices

    @cached_property
    def hs_norm(self):
        return np.sqrt(np.sum(self.matrices ** 2, axis=(1, 2)))

    @cached_property
    def jacobian(self):
        m = self.matrices
        if m.shape[1] != m.shape[2]:
            raise TypeError("Jacobian determinant needs equal dimensions")
        return np.linalg.det(m)

    @cached_property
    def singular_values(self):
        return np.linalg.svd(self.matrices, compute_uv=False)

    def __len__(self):
        return len(self.matrices)


def evaluate(f, coords):
    return f.evaluate(coords)


def differential(f, coords):
    """Analytic differential at each point; raises on the non-smooth locus."""
    coords = _rows(coords, kind_dim(f.domain))
    hit = f.singular_mask(coords)
    if np.any(hit):
        i = int(np.argmax(hit))
        raise SingularLocusError(f"{f!r} is not differentiable at {coords[i]}")
    return DifferentialSample(f.frame_matrix(coords))


def chart_jacobian(f, coords):
    """Differential in chart coordinates (for Newton steps)."""
    coords = _rows(coords, kind_dim(f.domain))
    d = f.frame_matrix(coords)
    s_dom = frame_scales(f.domain, coords)
    s_tgt = frame_scales(f.target, f.evaluate(coords))
    return d * s_dom[:, None, :] / s_tgt[:, :, None]


def cap_measure_exact(k, n=2):
    """Volume of ``{theta <= 1/k}`` on S^n from its 1-D integral."""
    from scipy.integrate import quad

    from .young import sphere_area
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    if n == 2:
        return 2 * math.pi * (1 - math.cos(1.0 / k))
    val, _ = quad(lambda t: math.sin(t) ** (n - 1), 0.0, 1.0 / k, epsabs=0, epsrel=1e-13)
    return sphere_area(n - 1) * val


def cap_measure(k, n=2, mesh=None):
    """Quadrature volume of the cap ``{theta <= 1/k}`` on S^n.

    Each latitude band of cells contributes its weight times the fraction of
    its theta interval inside the cap, so the cut through the boundary cell
    is not rounded to a whole cell.  Without a mesh, a uniform mesh with
    ``64 k`` theta cells is used.
    """
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    if mesh is None:
        from .mesh import sphere_mesh
        mesh = sphere_mesh(n, CELLS_PER_CAP * k, 8)
    if mesh.kind != f"S{n}":
        raise ConfigurationError(f"cap measure on S^{n} needs an S{n} mesh")
    edges = mesh.edges[0]
    inside = np.clip((1.0 / k - edges[:-1]) / np.diff(edges), 0.0, 1.0)
    bands = mesh.weights.reshape(mesh.shape).sum(axis=tuple(range(1, mesh.dim)))
    return float(np.dot(bands, inside))


# -- resolution rule ---------------------------------------------------------

def _theta_width(chain, mesh, cap):
    """Widest mesh cell meeting the preimage of ``{theta <= cap}``, in theta units.

    ``chain`` lists the maps applied before the cap is tested, innermost first.
    """
    if not chain:
        if mesh.kind not in ("S2", "S3"):
            raise ConfigurationError(f"cannot locate a polar cap on a {mesh.kind} mesh")
        return mesh.max_width(0, 0.0, cap)
    f, rest = chain[-1], chain[:-1]
    if isinstance(f, (PowerMap, Identity)):
        return _theta_width(rest, mesh, cap)
    if isinstance(f, Constant):
        return 0.0
    if isinstance(f, Bubble):
        stretch = f.k * math.pi
        return stretch * _theta_width(rest, mesh, cap / stretch)
    if isinstance(f, Collapse) and not rest and mesh.kind == "T2":
        radius = f.rho * cap / math.pi
        h = max(mesh.max_width(i, f.center[i] - radius, f.center[i] + radius) for i in range(2))
        return math.pi * h / f.rho
    raise ConfigurationError(f"no resolution rule for {f!r} on a {mesh.kind} mesh")


def check_resolution(f, mesh, cells=CELLS_PER_CAP):
    """Require theta cells no wider than ``pi / (cells k)`` over every bubble cap.

    For a uniform sphere mesh this is ``N_theta >= 64 k``; through ``Collapse``
    it bounds the torus cell size near the center by ``rho / (64 k)``.
    """
    chain = list(reversed(f.factors()))
    for i, g in enumerate(chain):
        if isinstance(g, Bubble):
            need = math.pi / (cells * g.k)
            width = _theta_width(chain[:i], mesh, g.cap)
            if width > need * (1 + 1e-9):
                raise ResolutionError(
                    f"{g!r}: cap cells are {width:.3g} wide in theta, need <= {need:.3g} "
                    f"(uniform sphere meshes need N_theta >= {cells * g.k})")


# -- descriptors ---------------------------------------------------------------

def parse_map(text):
    """Parse ``bubble:k=16``, ``power:d=3``, ``collapse:rho=0.25``,
    ``identity:s2`` or ``compose:power:d=2|bubble:k=8|collapse``."""
    text = text.strip()
    if text.lower().startswith("compose:"):
        parts = text.split(":", 1)[1].split("|")
        return Compose(*(parse_map(p) for p in parts))
    kind, rest = split_descriptor(text)
    if kind == "bubble":
        params = parse_params(rest, {"k", "n"})
        return Bubble(as_int(params, "k"), as_int(params, "n", 2))
    if kind == "power":
        return PowerMap(as_int(parse_params(rest, {"d"}), "d"))
    if kind == "collapse":
        params = parse_params(rest, {"rho", "cx", "cy"})
        return Collapse(as_float(params, "rho", 0.25),
                        (as_float(params, "cx", 0.5), as_float(params, "cy", 0.5)))
    if kind == "identity":
        return Identity((rest or "s2").upper())
    if kind == "constant":
        params = parse_params(rest, {"on"})
        domain = params.get("on", "s2").upper()
        if domain not in ("S2", "T2"):
            raise ConfigurationError("constant maps are defined on s2 or t2")
        return Constant(domain=domain)
    raise ConfigurationError(f"unknown map kind {kind!r}")
