"""Midpoint-rule product meshes on S^2, S^3 and the flat torus T^2.

Charts:

* ``S2`` -- ``(theta, phi)``, point ``(sin t cos p, sin t sin p, cos t)``
* ``S3`` -- ``(theta, theta2, phi)``, point ``(z sin theta, cos theta)`` with
  ``z`` the S^2 point of ``(theta2, phi)``
* ``T2`` -- ``(x, y)`` in the unit square, periodic

``theta`` is the latitude measured from the north pole.  Nodes sit at
cell midpoints, so no node ever lands on a pole.  Cells may be
non-uniform: :func:`cap_edges` aligns a theta edge with a polar cap
boundary and :func:`graded_edges` refines a torus axis around a point.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from ._parse import split_descriptor
from .errors import ConfigurationError, EvaluationError

__all__ = [
    "KINDS", "ManifoldMesh", "build_mesh", "sphere_mesh", "torus_mesh",
    "parse_mesh", "cap_edges", "graded_edges", "integrate", "embed",
    "frame_scales", "kind_dim", "kind_volume", "export_csv",
]

MIN_CELLS = 8

KINDS = {
    "S2": (2, 4 * math.pi),
    "S3": (3, 2 * math.pi ** 2),
    "T2": (2, 1.0),
}


def kind_dim(kind):
    return KINDS[kind][0]


def kind_volume(kind):
    return KINDS[kind][1]


def _periods(kind):
    if kind == "S2":
        return (None, 2 * math.pi)
    if kind == "S3":
        return (None, None, 2 * math.pi)
    return (1.0, 1.0)


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ManifoldMesh:
    """Tensor-product midpoint quadrature on one chart.

    ``coords`` has one row per node in C order over ``axes``; ``weights``
    are the volume of each cell under the round or flat metric.
    """

    kind: str
    edges: tuple
    axes: tuple
    coords: np.ndarray
    weights: np.ndarray

    @property
    def dim(self):
        return kind_dim(self.kind)

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)

    @property
    def periods(self):
        return _periods(self.kind)

    @property
    def total_volume(self):
        """Exact volume of the manifold (the quadrature volume is ``weights.sum()``)."""
        return kind_volume(self.kind)

    @property
    def volume(self):
        return float(np.sum(self.weights))

    def __len__(self):
        return len(self.weights)

    def points(self):
        return embed(self.kind, self.coords)

    def max_width(self, axis, lo=-np.inf, hi=np.inf):
        """Largest width along ``axis`` among cells overlapping ``(lo, hi)``.

        A cell that only touches the interval at an endpoint does not count.
        """
        e = self.edges[axis]
        sel = (e[1:] > lo) & (e[:-1] < hi)
        if not np.any(sel):
            return 0.0
        return float(np.max(np.diff(e)[sel]))

    def __repr__(self):
        return f"<ManifoldMesh {self.kind} {'x'.join(map(str, self.shape))}>"


def _product_mesh(kind, edges):
    edges = tuple(_frozen(e) for e in edges)
    for e in edges:
        if len(e) - 1 < MIN_CELLS:
            raise ConfigurationError(f"need >= {MIN_CELLS} cells per coordinate, got {len(e) - 1}")
        if np.any(np.diff(e) <= 0):
            raise ConfigurationError("cell edges must be strictly increasing")
    axes = tuple(_frozen(0.5 * (e[1:] + e[:-1])) for e in edges)
    widths = [np.diff(e) for e in edges]
    grids = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*widths, indexing="ij")
    w = np.prod(np.stack([g.ravel() for g in wgrids]), axis=0)
    # volume density of the round metric in these coordinates
    if kind == "S2":
        w = w * np.sin(coords[:, 0])
    elif kind == "S3":
        w = w * np.sin(coords[:, 0]) ** 2 * np.sin(coords[:, 1])
    return ManifoldMesh(kind, edges, axes, _frozen(coords), _frozen(w))


def cap_edges(cap, n_cap, n_rest):
    """Theta edges with ``n_cap`` uniform cells on ``[0, cap]`` and ``n_rest`` on ``[cap, pi]``."""
    if not 0 < cap < math.pi:
        raise ConfigurationError("cap angle must lie in (0, pi)")
    inner = np.linspace(0.0, cap, n_cap + 1)
    outer = np.linspace(cap, math.pi, n_rest + 1)
    return np.concatenate([inner, outer[1:]])


def graded_edges(n, center=0.5, half_width=0.0, fine=None, growth=1.1):
    """Edges on ``[0, 1]`` with ``n`` coarse cells, refined around ``center``.

    Cells of width ``fine`` cover ``[center - half_width, center + half_width]``
    (``center`` itself is an edge), then grow geometrically by ``growth`` up
    to the coarse width ``1/n``.
    """
    coarse = 1.0 / n
    if fine is None or fine >= coarse:
        return np.linspace(0.0, 1.0, n + 1)
    m = max(1, math.ceil(half_width / fine))
    if not (0 < center - m * fine and center + m * fine < 1):
        raise ConfigurationError("refined region leaves the unit interval")
    right = _grow(1.0 - center, m, fine, coarse, growth)
    left = _grow(center, m, fine, coarse, growth)
    edges = np.concatenate([center - left[:0:-1], center + right])
    edges[0], edges[-1] = 0.0, 1.0
    return edges


def _grow(length, m, fine, coarse, growth):
    """Offsets from ``center``: ``m`` cells of width ``fine``, geometric growth, then a uniform fill."""
    off = [i * fine for i in range(m + 1)]
    h = fine
    while True:
        h = min(h * growth, coarse)
        if h >= coarse or off[-1] + h >= length:
            break
        off.append(off[-1] + h)
    rest = length - off[-1]
    cells = max(1, math.ceil(rest / coarse - 1e-12))
    off.extend(off[-1] + rest * np.arange(1, cells + 1) / cells)
    off[-1] = length
    return np.array(off)


def sphere_mesh(n, n_theta=None, n_phi=None, theta_edges=None, n_mid=None):
    """Midpoint mesh of ``S^n`` (``n`` in {2, 3}).

    ``n_phi`` defaults to ``2 * n_theta`` on S^2 and to ``n_theta`` on S^3.
    On S^3 the middle angle gets ``n_mid`` cells, by default ``n_phi // 2``.
    """
    if theta_edges is None:
        if n_theta is None:
            raise ConfigurationError("give n_theta or theta_edges")
        theta_edges = np.linspace(0.0, math.pi, int(n_theta) + 1)
    theta_edges = np.asarray(theta_edges, dtype=float)
    if theta_edges[0] != 0.0 or theta_edges[-1] != math.pi:
        raise ConfigurationError("theta edges must span [0, pi]")
    n_theta = len(theta_edges) - 1
    if n == 2:
        n_phi = 2 * n_theta if n_phi is None else int(n_phi)
        return _product_mesh("S2", (theta_edges, np.linspace(0.0, 2 * math.pi, n_phi + 1)))
    if n == 3:
        n_phi = n_theta if n_phi is None else int(n_phi)
        n_mid = max(MIN_CELLS, n_phi // 2) if n_mid is None else int(n_mid)
        mid = np.linspace(0.0, math.pi, n_mid + 1)
        return _product_mesh("S3", (theta_edges, mid, np.linspace(0.0, 2 * math.pi, n_phi + 1)))
    raise ConfigurationError(f"sphere meshes exist for n in {{2, 3}}, got {n}")


def torus_mesh(nx, ny=None, x_edges=None, y_edges=None):
    ny = nx if ny is None else ny
    if x_edges is None:
        x_edges = np.linspace(0.0, 1.0, int(nx) + 1)
    if y_edges is None:
        y_edges = np.linspace(0.0, 1.0, int(ny) + 1)
    return _product_mesh("T2", (x_edges, y_edges))


def build_mesh(kind, resolution):
    """Build a uniform mesh; ``resolution`` is an int or a tuple of cell counts."""
    res = (resolution,) if np.isscalar(resolution) else tuple(resolution)
    res = tuple(int(r) for r in res)
    if any(r < MIN_CELLS for r in res):
        raise ConfigurationError(f"resolution must be >= {MIN_CELLS} per coordinate, got {res}")
    if kind == "S2":
        return sphere_mesh(2, res[0], res[1] if len(res) > 1 else None)
    if kind == "S3":
        if len(res) == 1:
            res = res * 3
        edges = (np.linspace(0, math.pi, res[0] + 1), np.linspace(0, math.pi, res[1] + 1),
                 np.linspace(0, 2 * math.pi, res[2] + 1))
        return _product_mesh("S3", edges)
    if kind == "T2":
        return torus_mesh(res[0], res[1] if len(res) > 1 else None)
    raise ConfigurationError(f"unknown mesh kind {kind!r}")


def parse_mesh(text):
    """Parse ``s2:256x512``, ``s3:64`` or ``t2:128``."""
    head, rest = split_descriptor(text)
    kind = head.upper()
    if kind not in KINDS:
        raise ConfigurationError(f"unknown mesh kind {head!r}")
    try:
        res = tuple(int(part) for part in rest.split("x"))
    except ValueError:
        raise ConfigurationError(f"bad mesh resolution {rest!r}") from None
    return build_mesh(kind, res)


def integrate(mesh, values):
    """``sum_i w_i f_i`` with numpy's pairwise summation."""
    f = np.asarray(values, dtype=float)
    if f.shape != mesh.weights.shape:
        raise ConfigurationError(f"field has shape {f.shape}, mesh has {len(mesh)} nodes")
    bad = np.flatnonzero(np.isnan(f))
    if bad.size:
        raise EvaluationError(f"NaN in field at node {int(bad[0])} (coords {mesh.coords[bad[0]]})")
    return float(np.sum(mesh.weights * f))


def embed(kind, coords):
    """Ambient points; the torus uses the isometric Clifford embedding in R^4."""
    c = np.atleast_2d(np.asarray(coords, dtype=float))
    if kind == "S2":
        t, p = c[:, 0], c[:, 1]
        return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=1)
    if kind == "S3":
        t, t2, p = c[:, 0], c[:, 1], c[:, 2]
        z = np.stack([np.sin(t2) * np.cos(p), np.sin(t2) * np.sin(p), np.cos(t2)], axis=1)
        return np.concatenate([z * np.sin(t)[:, None], np.cos(t)[:, None]], axis=1)
    if kind == "T2":
        a, b = 2 * math.pi * c[:, 0], 2 * math.pi * c[:, 1]
        return np.stack([np.cos(a), np.sin(a), np.cos(b), np.sin(b)], axis=1) / (2 * math.pi)
    raise ConfigurationError(f"unknown kind {kind!r}")


def frame_scales(kind, coords):
    """Lengths of the coordinate vectors; ``e_i = d/dc_i / scale_i`` is orthonormal."""
    c = np.atleast_2d(np.asarray(coords, dtype=float))
    ones = np.ones(len(c))
    if kind == "S2":
        return np.stack([ones, np.sin(c[:, 0])], axis=1)
    if kind == "S3":
        s = np.sin(c[:, 0])
        return np.stack([ones, s, s * np.sin(c[:, 1])], axis=1)
    if kind == "T2":
        return np.stack([ones, ones], axis=1)
    raise ConfigurationError(f"unknown kind {kind!r}")


def export_csv(mesh, path):
    """Write one row per node: chart coordinates, ambient point, weight."""
    pts = mesh.points()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"c{i}" for i in range(mesh.dim)]
                        + [f"x{i}" for i in range(pts.shape[1])] + ["weight"])
        for c, x, w in zip(mesh.coords, pts, mesh.weights):
            writer.writerow([repr(float(v)) for v in (*c, *x, w)])
