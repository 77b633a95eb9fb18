"""Exact cellular homology over the integers and the rationals.

Matrices are lists of rows of Python ints, so entries never overflow.  The
integer route goes through :func:`smith_normal_form`; the rational route is
an independent Gaussian elimination over :class:`fractions.Fraction`.

A :class:`ChainComplex` stores ``boundaries[i - 1] = d_i : C_i -> C_{i-1}``
as a ``ranks[i-1] x ranks[i]`` matrix.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from ._parse import as_int, parse_params, split_descriptor
from .errors import ConfigurationError, InternalConsistencyError, InvariantViolation

__all__ = [
    "SNFResult", "smith_normal_form", "rational_rank", "ChainComplex", "HomologyGroup",
    "homology", "betti_numbers", "is_rational_homology_sphere", "EulerCharacteristic",
    "euler_characteristic", "covering_chi_check", "sphere_complex", "lens_complex",
    "rp_complex", "torus2_complex", "torus_complex", "cpn_complex", "product_complex",
    "parse_space",
]


# -- linear algebra -------------------------------------------------------------

class SNFResult(NamedTuple):
    factors: tuple
    rank: int


def _as_rows(matrix):
    rows = [[int(v) for v in row] for row in matrix]
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ConfigurationError("ragged matrix")
    return rows


def _min_pivot(a, t):
    best = None
    for i in range(t, len(a)):
        for j in range(t, len(a[0])):
            v = a[i][j]
            if v and (best is None or abs(v) < best[0]):
                best = (abs(v), i, j)
                if best[0] == 1:
                    return best
    return best


def smith_normal_form(matrix):
    """Invariant factors ``d_1 | d_2 | ...`` of an integer matrix.

    Row and column operations pivot on the entry of least magnitude in the
    remaining block until the pivot divides everything in its row, column
    and block.  Zero diagonal entries are not reported.
    """
    a = _as_rows(matrix)
    if not a or not a[0]:
        return SNFResult((), 0)
    m, n = len(a), len(a[0])
    factors = []
    for t in range(min(m, n)):
        piv = _min_pivot(a, t)
        if piv is None:
            break
        while True:
            _, i, j = piv
            a[t], a[i] = a[i], a[t]
            for row in a:
                row[t], row[j] = row[j], row[t]
            p = a[t][t]
            clean = True
            for i in range(t + 1, m):
                q = a[i][t] // p
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                clean = clean and a[i][t] == 0
            for j in range(t + 1, n):
                q = a[t][j] // p
                if q:
                    for row in a:
                        row[j] -= q * row[t]
                clean = clean and a[t][j] == 0
            if clean:
                # the pivot must also divide the rest of the block
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                            if a[i][j] % p), None)
                if bad is None:
                    break
                a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
            piv = _min_pivot(a, t)
        factors.append(abs(a[t][t]))
    return SNFResult(tuple(factors), len(factors))


def rational_rank(matrix):
    """Rank over Q by exact fraction elimination."""
    a = [[Fraction(v) for v in row] for row in _as_rows(matrix)]
    if not a or not a[0]:
        return 0
    rank, cols = 0, len(a[0])
    for c in range(cols):
        pivot = next((r for r in range(rank, len(a)) if a[r][c] != 0), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        for r in range(rank + 1, len(a)):
            if a[r][c]:
                q = a[r][c] / a[rank][c]
                a[r] = [x - q * y for x, y in zip(a[r], a[rank])]
        rank += 1
    return rank


def _matmul(a, b, inner):
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(len(b[0]) if b else 0)]
            for i in range(len(a))]


# -- complexes ---------------------------------------------------------------------

@dataclass(frozen=True)
class ChainComplex:
    """Finite free chain complex ``C_n -> ... -> C_0`` with exact integer boundaries."""

    ranks: tuple
    boundaries: tuple
    name: str = field(default="", compare=False)

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        if not ranks or any(r < 0 for r in ranks):
            raise ConfigurationError("ranks must be a non-empty list of non-negative counts")
        if len(self.boundaries) != len(ranks) - 1:
            raise ConfigurationError(
                f"{len(ranks)} chain groups need {len(ranks) - 1} boundary maps, "
                f"got {len(self.boundaries)}")
        bds = []
        for i, d in enumerate(self.boundaries, start=1):
            rows = tuple(tuple(int(v) for v in row) for row in d)
            if len(rows) != ranks[i - 1] or any(len(r) != ranks[i] for r in rows):
                raise ConfigurationError(f"boundary d_{i} must be {ranks[i - 1]} x {ranks[i]}")
            bds.append(rows)
        for i in range(1, len(bds)):
            prod = _matmul(bds[i - 1], bds[i], ranks[i])
            if any(v for row in prod for v in row):
                raise InvariantViolation(f"d_{i} o d_{i + 1} is not zero")
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "boundaries", tuple(bds))

    @property
    def dim(self):
        return len(self.ranks) - 1

    def boundary(self, i):
        """``d_i``; zero maps outside ``1..dim``."""
        if 1 <= i <= self.dim:
            return self.boundaries[i - 1]
        rows = self.ranks[i - 1] if 0 <= i - 1 <= self.dim else 0
        cols = self.ranks[i] if 0 <= i <= self.dim else 0
        return tuple((0,) * cols for _ in range(rows))

    def to_dict(self):
        return {"ranks": list(self.ranks),
                "boundaries": [[v for row in d for v in row] for d in self.boundaries]}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data, name=""):
        try:
            ranks = [int(r) for r in data["ranks"]]
            flat = data["boundaries"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad chain complex document: {exc}") from None
        if len(flat) != len(ranks) - 1:
            raise ConfigurationError("boundaries must hold one matrix per positive degree")
        mats = []
        for i, entries in enumerate(flat, start=1):
            r, c = ranks[i - 1], ranks[i]
            if len(entries) != r * c:
                raise ConfigurationError(f"d_{i} needs {r * c} row-major entries, got {len(entries)}")
            mats.append([entries[k * c:(k + 1) * c] for k in range(r)])
        return cls(tuple(ranks), tuple(mats), name or data.get("name", ""))

    @classmethod
    def from_json(cls, text, name=""):
        return cls.from_dict(json.loads(text), name)


@dataclass(frozen=True)
class HomologyGroup:
    betti: int
    torsion: tuple = ()
    coefficients: str = "Z"

    def __post_init__(self):
        if self.betti < 0 or any(d <= 1 for d in self.torsion):
            raise InvariantViolation("betti must be >= 0 and torsion factors > 1")
        if any(b % a for a, b in zip(self.torsion, self.torsion[1:])):
            raise InvariantViolation(f"torsion {self.torsion} is not a divisibility chain")

    def __str__(self):
        ring = "Q" if self.coefficients == "Q" else "Z"
        parts = []
        if self.betti:
            parts.append(ring if self.betti == 1 else f"{ring}^{self.betti}")
        parts += [f"Z_{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"

    def to_dict(self):
        return {"betti": self.betti, "torsion": list(self.torsion), "group": str(self)}


def homology(complex_, coefficients="Z"):
    """Homology groups ``H_0 .. H_dim`` with integer or rational coefficients."""
    coeff = {"Z": "Z", "INTEGERS": "Z", "Q": "Q", "RATIONALS": "Q"}.get(str(coefficients).upper())
    if coeff == "Z":
        snf = [smith_normal_form(complex_.boundary(i)) for i in range(complex_.dim + 2)]
        ranks = [s.rank for s in snf]
    elif coeff == "Q":
        ranks = [rational_rank(complex_.boundary(i)) for i in range(complex_.dim + 2)]
    else:
        raise ConfigurationError(f"coefficients must be Z or Q, got {coefficients!r}")
    groups = []
    for i, r in enumerate(complex_.ranks):
        betti = r - ranks[i] - ranks[i + 1]
        torsion = tuple(d for d in snf[i + 1].factors if d > 1) if coeff == "Z" else ()
        groups.append(HomologyGroup(betti, torsion, coeff))
    return groups


def betti_numbers(complex_):
    """Rational betti numbers, computed over Q."""
    return tuple(g.betti for g in homology(complex_, "Q"))


def is_rational_homology_sphere(complex_):
    """``(answer, betti)`` with answer true iff betti is ``(1, 0, ..., 0, 1)``."""
    if complex_.dim < 1 or complex_.ranks[-1] == 0:
        raise ConfigurationError("need a complex of dimension >= 1 with top cells")
    betti = betti_numbers(complex_)
    target = (1,) + (0,) * (complex_.dim - 1) + (1,)
    return betti == target, betti


class EulerCharacteristic(NamedTuple):
    by_cells: int
    by_betti: int

    @property
    def value(self):
        return self.by_cells

    def __int__(self):
        return self.by_cells


def euler_characteristic(complex_):
    """Alternating sums of cell counts and of betti numbers; these must agree."""
    cells = sum((-1) ** i * r for i, r in enumerate(complex_.ranks))
    betti = sum((-1) ** i * b for i, b in enumerate(betti_numbers(complex_)))
    if cells != betti:
        raise InternalConsistencyError(
            f"Euler characteristic disagrees: {cells} from cells, {betti} from betti numbers")
    return EulerCharacteristic(cells, betti)


def covering_chi_check(base, cover, sheets):
    """Whether ``chi(cover) == sheets * chi(base)``."""
    if int(sheets) < 1:
        raise ConfigurationError("sheet count must be a positive integer")
    return euler_characteristic(cover).value == int(sheets) * euler_characteristic(base).value


# -- builders ------------------------------------------------------------------------

def _one_cell_per_dim(dim, factor, name):
    """One cell in each degree; ``d_i`` is ``factor(i)`` as a 1 x 1 matrix."""
    return ChainComplex((1,) * (dim + 1), tuple([[factor(i)]] for i in range(1, dim + 1)), name)


def _zero_boundaries(ranks):
    return tuple([[0] * ranks[i] for _ in range(ranks[i - 1])] for i in range(1, len(ranks)))


def sphere_complex(n):
    """Minimal CW structure: a 0-cell and an n-cell."""
    if int(n) < 1:
        raise ConfigurationError("sphere dimension must be >= 1")
    ranks = (1,) + (0,) * (n - 1) + (1,)
    return ChainComplex(ranks, _zero_boundaries(ranks), f"S^{n}")


def lens_complex(m, dim=3):
    """Lens space ``L_m(1, ..., 1)``: ``d_i = m`` in even degrees, 0 in odd ones."""
    if int(m) < 2:
        raise ConfigurationError("lens spaces need m >= 2")
    if dim < 1 or dim % 2 == 0:
        raise ConfigurationError("lens spaces have odd dimension 2n - 1")
    return _one_cell_per_dim(dim, lambda i: m if i % 2 == 0 else 0, f"L_{m}^{dim}")


def rp_complex(n):
    """Real projective space: ``d_i = 2`` in even degrees, 0 in odd ones."""
    if int(n) < 1:
        raise ConfigurationError("projective space dimension must be >= 1")
    return _one_cell_per_dim(n, lambda i: 2 if i % 2 == 0 else 0, f"RP^{n}")


def torus2_complex():
    """The square with sides identified as ``a b a^-1 b^-1``; all boundaries vanish."""
    ranks = (1, 2, 1)
    return ChainComplex(ranks, _zero_boundaries(ranks), "T^2")


def cpn_complex(n):
    """Complex projective space: one cell in each even degree up to ``2n``."""
    if int(n) < 1:
        raise ConfigurationError("CP^n needs n >= 1")
    ranks = tuple(1 if i % 2 == 0 else 0 for i in range(2 * n + 1))
    return ChainComplex(ranks, _zero_boundaries(ranks), f"CP^{n}")


def product_complex(a, b):
    """Cellular chains of ``A x B`` as the tensor product complex.

    ``d(x (x) y) = dx (x) y + (-1)^|x| x (x) dy``; basis cells are ordered by
    ``(i, cell of A_i, cell of B_{k-i})`` with ``i`` increasing.
    """
    dim = a.dim + b.dim
    blocks = []  # per degree k: list of (i, offset) for A_i (x) B_{k-i}
    ranks = []
    for k in range(dim + 1):
        off, entry = 0, []
        for i in range(max(0, k - b.dim), min(k, a.dim) + 1):
            entry.append((i, off))
            off += a.ranks[i] * b.ranks[k - i]
        blocks.append(entry)
        ranks.append(off)
    bds = []
    for k in range(1, dim + 1):
        d = [[0] * ranks[k] for _ in range(ranks[k - 1])]
        tgt = {i: off for i, off in blocks[k - 1]}
        for i, off in blocks[k]:
            j = k - i
            nb = b.ranks[j]
            da, db = a.boundary(i), b.boundary(j)
            sign = -1 if i % 2 else 1
            for x in range(a.ranks[i]):
                for y in range(nb):
                    col = off + x * nb + y
                    if i >= 1:  # dx (x) y lands in A_{i-1} (x) B_j
                        base = tgt[i - 1]
                        for x2 in range(a.ranks[i - 1]):
                            if da[x2][x]:
                                d[base + x2 * nb + y][col] += da[x2][x]
                    if j >= 1:  # x (x) dy lands in A_i (x) B_{j-1}
                        base, nb2 = tgt[i], b.ranks[j - 1]
                        for y2 in range(nb2):
                            if db[y2][y]:
                                d[base + x * nb2 + y2][col] += sign * db[y2][y]
        bds.append(d)
    name = f"{a.name}x{b.name}" if a.name and b.name else ""
    return ChainComplex(tuple(ranks), tuple(bds), name)


def torus_complex(n):
    """``T^n`` as the product of ``n`` circles."""
    if int(n) < 1:
        raise ConfigurationError("torus dimension must be >= 1")
    out = sphere_complex(1)
    for _ in range(n - 1):
        out = product_complex(out, sphere_complex(1))
    return ChainComplex(out.ranks, out.boundaries, f"T^{n}")


def parse_space(text):
    """Build a complex from a descriptor.

    ``sphere:n=3``, ``lens:m=5,dim=3``, ``rp:n=2``, ``torus2``, ``torus:n=3``,
    ``cp:n=2``; factors joined by ``*`` give a product, e.g.
    ``sphere:n=2*sphere:n=2``.
    """
    if "*" in text:
        parts = [parse_space(p.strip()) for p in text.split("*")]
        out = parts[0]
        for p in parts[1:]:
            out = product_complex(out, p)
        return out
    kind, rest = split_descriptor(text)
    if kind == "sphere":
        return sphere_complex(as_int(parse_params(rest, {"n"}), "n", 2))
    if kind == "lens":
        params = parse_params(rest, {"m", "dim"})
        return lens_complex(as_int(params, "m", None), as_int(params, "dim", 3))
    if kind == "rp":
        return rp_complex(as_int(parse_params(rest, {"n"}), "n", 2))
    if kind == "torus2":
        parse_params(rest, set())
        return torus2_complex()
    if kind == "torus":
        return torus_complex(as_int(parse_params(rest, {"n"}), "n", 2))
    if kind == "cp":
        return cpn_complex(as_int(parse_params(rest, {"n"}), "n", 1))
    raise ConfigurationError(f"unknown space {text!r}")
