"""Young functions, numerical checks of their growth conditions, Orlicz norms.

A Young function here is a convex, strictly increasing gauge ``P`` on
``[0, inf)`` with ``P(0) = 0``.  Three families are provided:

* :class:`Power` -- ``t**p``
* :class:`PowerLog` -- ``t**n / log(e + t)**a``
* :class:`Tabulated` -- a monotone table interpolated linearly in log-log
  coordinates and extrapolated with the end slopes

Every gauge exposes :meth:`YoungFunction.log_value`, the logarithm of ``P``
as a function of ``log t``.  The asymptotic checks work entirely in log
space, so they can probe ``t`` far beyond the double-precision range.
"""

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from ._parse import as_float, parse_params, split_descriptor
from .errors import (
    ConfigurationError,
    DomainError,
    EvaluationError,
    InvariantViolation,
)

__all__ = [
    "YoungFunction", "Power", "PowerLog", "Tabulated", "parse_young",
    "Status", "ConditionVerdict", "RadialEnergy",
    "check_young_invariants", "check_divergence", "check_small_o",
    "check_doubling", "check_growth_alpha", "radial_projection_energy",
    "luxemburg_norm", "orlicz_mean", "sphere_area",
]

LOG2 = math.log(2.0)


class YoungFunction:
    """Base class. Subclasses implement ``_value`` and ``log_value``."""

    description = "young function"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("Young functions are defined for t >= 0 only")
        out = self._value(t)
        if np.ndim(out) == 0:
            return float(out)
        return out

    def _value(self, t):
        with np.errstate(divide="ignore", over="ignore"):  # overflow to inf is reported by the checks
            return np.where(t > 0, np.exp(self.log_value(np.log(t))), 0.0)

    def log_value(self, log_t):
        """Return ``log P(exp(log_t))``."""
        raise NotImplementedError

    def extrapolated(self, t):
        """Mask of arguments that lie outside tabulated data (never, by default)."""
        return np.zeros(np.shape(t), dtype=bool)

    def __repr__(self):
        return f"<{type(self).__name__} {self.description}>"


@dataclass(frozen=True, repr=False)
class Power(YoungFunction):
    p: float

    def __post_init__(self):
        if not self.p >= 1:
            raise ConfigurationError(f"t**p is convex only for p >= 1, got p={self.p}")

    @property
    def description(self):
        return f"t^{self.p:g}"

    def _value(self, t):
        return t ** self.p

    def log_value(self, log_t):
        return self.p * np.asarray(log_t, dtype=float)


@dataclass(frozen=True, repr=False)
class PowerLog(YoungFunction):
    """``t**n / log(e + t)**a``; for ``a = 1`` the fundamental gauge just below ``t**n``."""

    n: float
    a: float = 1.0

    def __post_init__(self):
        if not self.n >= 1 or self.a < 0:
            raise ConfigurationError(f"need n >= 1 and a >= 0, got n={self.n}, a={self.a}")

    @property
    def description(self):
        return f"t^{self.n:g}/log^{self.a:g}(e+t)"

    def _value(self, t):
        return t ** self.n / np.log(np.e + t) ** self.a

    def log_value(self, log_t):
        u = np.asarray(log_t, dtype=float)
        # log(e + e^u) without overflow
        return self.n * u - self.a * np.log(np.logaddexp(1.0, u))


@dataclass(frozen=True, repr=False)
class Tabulated(YoungFunction):
    t: tuple
    values: tuple
    label: str = "table"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or len(t) < 2:
            raise ConfigurationError("table needs two equal-length columns with >= 2 rows")
        if np.any(t <= 0) or np.any(v <= 0):
            raise ConfigurationError("table entries must be positive (P(0)=0 is implicit)")
        if np.any(np.diff(t) <= 0) or np.any(np.diff(v) <= 0):
            raise ConfigurationError("table must be strictly increasing in both columns")
        object.__setattr__(self, "t", tuple(t.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))

    @property
    def description(self):
        return f"tabulated({self.label}, {len(self.t)} rows)"

    @classmethod
    def from_csv(cls, path):
        rows = []
        with open(path, newline="") as fh:
            for record in csv.reader(fh):
                if not record or record[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append((float(record[0]), float(record[1])))
                except (ValueError, IndexError):
                    if rows:
                        raise ConfigurationError(f"bad row {record!r} in {path}") from None
                    continue  # header
        if not rows:
            raise ConfigurationError(f"no data rows in {path}")
        t, v = zip(*rows)
        return cls(t, v, label=str(path))

    def log_value(self, log_t):
        u = np.asarray(log_t, dtype=float)
        lt = np.log(np.asarray(self.t))
        lv = np.log(np.asarray(self.values))
        out = np.interp(u, lt, lv)
        lo_slope = (lv[1] - lv[0]) / (lt[1] - lt[0])
        hi_slope = (lv[-1] - lv[-2]) / (lt[-1] - lt[-2])
        out = np.where(u < lt[0], lv[0] + lo_slope * (u - lt[0]), out)
        out = np.where(u > lt[-1], lv[-1] + hi_slope * (u - lt[-1]), out)
        return out

    def extrapolated(self, t):
        t = np.asarray(t, dtype=float)
        return (t < self.t[0]) | (t > self.t[-1])


def parse_young(text):
    """Build a gauge from ``power:p=1.5``, ``powlog:n=2,a=1`` or ``table:path.csv``."""
    kind, rest = split_descriptor(text)
    if kind == "power":
        return Power(as_float(parse_params(rest, {"p"}), "p"))
    if kind == "powlog":
        params = parse_params(rest, {"n", "a"})
        return PowerLog(as_float(params, "n"), as_float(params, "a", 1.0))
    if kind == "table":
        if not rest:
            raise ConfigurationError("table descriptor needs a path")
        try:
            return Tabulated.from_csv(rest)
        except OSError as exc:
            raise ConfigurationError(f"cannot read {rest}: {exc}") from None
    raise ConfigurationError(f"unknown Young function kind {kind!r}")


class Status(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class ConditionVerdict:
    condition: str
    status: Status
    witness: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    diagnostic: str = ""

    def __post_init__(self):
        if self.status is Status.INCONCLUSIVE and not self.diagnostic:
            raise ValueError("an Inconclusive verdict needs a diagnostic")

    @property
    def holds(self):
        return self.status is Status.HOLDS

    def to_dict(self):
        return {
            "condition": self.condition,
            "status": self.status.value,
            "diagnostic": self.diagnostic,
            "parameters": self.parameters,
            "witness": _jsonable(self.witness),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _geometric_grid(t_range, samples):
    lo, hi = t_range
    if not (0 < lo < hi):
        raise DomainError(f"t_range must satisfy 0 < lo < hi, got {t_range}")
    return np.geomspace(lo, hi, int(samples))


def _extrapolation_note(P, t):
    mask = P.extrapolated(t)
    if np.any(mask):
        return f"{int(mask.sum())} of {mask.size} sample points use table extrapolation"
    return ""


def check_young_invariants(P, t_range=(1e-6, 1e6), samples=1000, rtol=1e-12):
    """Check ``P(0) = 0``, strict monotonicity and midpoint convexity on a grid."""
    t = _geometric_grid(t_range, samples)
    values = P(t)
    problems = []
    if P(0.0) != 0:
        problems.append("P(0) != 0")
    if np.any(np.diff(values) <= 0):
        i = int(np.argmin(np.diff(values)))
        problems.append(f"not strictly increasing near t={t[i]:.6g}")
    mid = P(0.5 * (t[:, None] + t[None, :]))
    chord = 0.5 * (values[:, None] + values[None, :])
    excess = mid - chord * (1 + rtol)
    if np.any(excess > 0):
        i, j = np.unravel_index(np.argmax(excess), excess.shape)
        problems.append(f"midpoint convexity fails at s={t[i]:.6g}, t={t[j]:.6g}")
    status = Status.FAILS if problems else Status.HOLDS
    return ConditionVerdict(
        "young_invariants", status,
        witness={"problems": problems},
        parameters={"t_range": list(t_range), "samples": int(samples)},
        diagnostic=_extrapolation_note(P, t),
    )


# -- divergence --------------------------------------------------------------

RATIO_DIVERGE = 0.98
RATIO_CONVERGE = 0.9
RAABE_DIVERGE = 1.1
RAABE_CONVERGE = 1.25


def _window_integrals(log_integrand, log_edges, nodes):
    """Gauss-Legendre integrals of ``exp(log_integrand(u))`` over each ``[u_j, u_j+1]``."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    lo = log_edges[:-1, None]
    hi = log_edges[1:, None]
    u = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.exp(log_integrand(u))
    if not np.all(np.isfinite(vals)):
        bad = int(np.argmax(~np.all(np.isfinite(vals), axis=1)))
        raise EvaluationError(f"non-finite integrand in window {bad}")
    return 0.5 * (hi[:, 0] - lo[:, 0]) * (vals @ w)


def _classify_tail(integrals, log2_left, tail_start):
    """Decide divergence of ``sum(integrals)`` from its tail.

    A ratio test first; when the ratios sit between the two thresholds the
    series is regularly varying with ratio close to 1 and Raabe's test
    ``R_j = j (I_j / I_{j+1} - 1)`` decides (``R -> a`` for ``I_j ~ j^-a``).
    """
    tail = integrals[tail_start:]
    idx = log2_left[tail_start:len(integrals) - 1]
    if np.any(tail <= 0):
        raise EvaluationError("window integral is not positive")
    ratios = tail[1:] / tail[:-1]
    raabe = idx * (tail[:-1] / tail[1:] - 1.0)
    witness = {
        "tail_ratios": ratios,
        "raabe": raabe,
        "partial_sums": np.cumsum(integrals),
    }
    if np.all(ratios >= RATIO_DIVERGE):
        return Status.HOLDS, "ratio", witness, ""
    if np.all(ratios <= RATIO_CONVERGE):
        return Status.FAILS, "ratio", witness, ""
    if np.all(raabe <= RAABE_DIVERGE):
        return Status.HOLDS, "raabe", witness, ""
    if np.all(raabe >= RAABE_CONVERGE):
        return Status.FAILS, "raabe", witness, ""
    return Status.INCONCLUSIVE, "none", witness, (
        f"tail ratios in [{ratios.min():.4f}, {ratios.max():.4f}] and Raabe numbers "
        f"in [{raabe.min():.4f}, {raabe.max():.4f}] meet neither the divergence "
        f"(ratio >= {RATIO_DIVERGE} or Raabe <= {RAABE_DIVERGE}) nor the convergence "
        f"(ratio <= {RATIO_CONVERGE} or Raabe >= {RAABE_CONVERGE}) bounds"
    )


def check_divergence(P, n, windows=41, tail_start=30, nodes=32):
    """Decide whether ``int_1^inf P(t) / t**(n+1) dt`` diverges.

    The integral is split into dyadic windows ``[2**j, 2**(j+1)]`` and the
    sequence of window integrals is classified from ``tail_start`` on.
    ``Holds`` means the integral diverges.
    """
    if n < 2:
        raise DomainError("dimension n must be >= 2")
    if not 0 < tail_start < windows - 2:
        raise ConfigurationError("tail_start must leave at least two tail windows")
    j = np.arange(windows + 1, dtype=float)
    integrals = _window_integrals(lambda u: P.log_value(u) - n * u, j * LOG2, nodes)
    status, rule, witness, diag = _classify_tail(integrals, j, tail_start)
    witness["window_integrals"] = integrals
    note = _extrapolation_note(P, np.exp2(j))
    return ConditionVerdict(
        "divergence", status, witness=witness,
        parameters={"n": n, "windows": windows, "tail_start": tail_start, "rule": rule},
        diagnostic="; ".join(s for s in (diag, note) if s),
    )


def check_small_o(P, n, j_max=4096, threshold=1e-3):
    """Decide ``P(t) = o(t**n)`` from ``P(2**j) / 2**(j n)``, ``j = 0..j_max``.

    The default ``j_max`` reaches ``t = 2**4096``; logarithmic gauges need
    that range before the ratio falls by three orders of magnitude.
    """
    if n < 2:
        raise DomainError("dimension n must be >= 2")
    u = np.arange(j_max + 1) * LOG2
    log_ratio = P.log_value(u) - n * u
    if not np.all(np.isfinite(log_ratio)):
        raise EvaluationError("non-finite P(t)/t^n on the grid")
    tail = log_ratio[j_max // 2:]
    steps = np.diff(tail)
    drop = log_ratio[-1] - log_ratio.max()
    witness = {
        "j": [0, j_max // 2, j_max],
        "ratio_at": np.exp(log_ratio[[0, j_max // 2, j_max]]),
        "final_over_max": math.exp(drop),
    }
    params = {"n": n, "j_max": j_max, "threshold": threshold}
    if np.all(steps <= 1e-12) and tail[-1] < tail[0] and drop < math.log(threshold):
        return ConditionVerdict("small_o", Status.HOLDS, witness, params)
    if tail[-1] >= tail[0] - 1e-12:
        return ConditionVerdict(
            "small_o", Status.FAILS, witness, params,
            diagnostic="P(t)/t^n does not decrease over the second half of the grid",
        )
    return ConditionVerdict(
        "small_o", Status.INCONCLUSIVE, witness, params,
        diagnostic=(f"P(t)/t^n decreases but reaches only {math.exp(drop):.3g} of its "
                    f"maximum (need < {threshold:g}) or is not monotone by j={j_max}"),
    )


def check_doubling(P, t_range=(1e-6, 1e6), samples=2001):
    """Estimate the doubling constant ``K = sup P(2t) / P(t)`` on a grid."""
    t = _geometric_grid(t_range, samples)
    lo, hi = P(t), P(2 * t)
    if np.any(lo <= 0):
        raise InvariantViolation(f"P(t) = 0 at t={t[np.argmin(lo)]:.6g} > 0")
    ratio = hi / lo
    params = {"t_range": list(t_range), "samples": int(samples)}
    note = _extrapolation_note(P, np.concatenate([t, 2 * t]))
    if not np.all(np.isfinite(ratio)) or ratio.max() > 1e12:
        i = int(np.nanargmax(np.where(np.isfinite(ratio), ratio, np.inf)))
        return ConditionVerdict(
            "doubling", Status.FAILS,
            witness={"K": float("inf"), "t": float(t[i]), "ratio": float(ratio[i])},
            parameters=params,
            diagnostic="; ".join(s for s in ("P(2t)/P(t) is effectively unbounded", note) if s),
        )
    K = float(ratio.max())
    witness = {"K": K, "argmax_t": float(t[int(np.argmax(ratio))]), "K_min": float(ratio.min())}
    decade = t >= t[-1] / 10
    growth = ratio[-1] / ratio[decade][0]
    if growth > 1.05:
        witness["last_decade_growth"] = float(growth)
        return ConditionVerdict(
            "doubling", Status.INCONCLUSIVE, witness, params,
            diagnostic=(f"P(2t)/P(t) still grows by a factor {growth:.3g} over the last "
                        f"decade; the supremum may lie beyond t={t[-1]:.3g}"),
        )
    return ConditionVerdict("doubling", Status.HOLDS, witness, params, diagnostic=note)


def check_growth_alpha(P, alpha, t_range=(1.0, 1e6), samples=2001, rtol=1e-12):
    """Check that ``t**-alpha P(t)`` is non-decreasing on the sampled range."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    t = _geometric_grid(t_range, samples)
    q = P.log_value(np.log(t)) - alpha * np.log(t)
    if not np.all(np.isfinite(q)):
        raise EvaluationError("non-finite t^-alpha P(t) on the grid")
    steps = np.diff(q)
    params = {"alpha": alpha, "t_range": list(t_range), "samples": int(samples)}
    if np.all(steps >= math.log1p(-rtol)):
        return ConditionVerdict("growth_alpha", Status.HOLDS, {"min_log_step": float(steps.min())},
                                params, diagnostic=_extrapolation_note(P, t))
    i = int(np.argmin(steps))
    return ConditionVerdict(
        "growth_alpha", Status.FAILS,
        witness={"t": float(t[i]), "t_next": float(t[i + 1]),
                 "relative_drop": float(-math.expm1(steps[i]))},
        parameters=params,
    )


# -- radial projection x/|x| ---------------------------------------------------

def sphere_area(k):
    """Surface area of the unit sphere ``S^k`` in ``R^(k+1)``."""
    return 2 * math.pi ** ((k + 1) / 2) / gamma_fn((k + 1) / 2)


@dataclass
class RadialEnergy:
    verdict: str  # "Finite", "Infinite" or "Inconclusive"
    value: float  # inf unless Finite
    partials: np.ndarray
    classification: ConditionVerdict


def radial_projection_energy(P, n, windows=61, tail_start=30, nodes=32):
    """``int_{B^n} P(|Du0|)`` for ``u0(x) = x/|x|``, with ``|Du0| = sqrt(n-1)/|x|``.

    Reduces to ``area(S^(n-1)) int_0^1 P(sqrt(n-1)/r) r^(n-1) dr``, integrated over
    geometric windows ``r in [2**-(j+1), 2**-j]`` and classified like
    :func:`check_divergence`.
    """
    if n < 2:
        raise DomainError("dimension n must be >= 2")
    c = math.sqrt(n - 1)
    omega = sphere_area(n - 1)
    j = np.arange(windows + 1, dtype=float)
    # s = -log r, so P(c/r) r^(n-1) dr = P(c e^s) e^(-n s) ds
    integrals = omega * _window_integrals(
        lambda s: P.log_value(math.log(c) + s) - n * s, j * LOG2, nodes)
    status, rule, witness, diag = _classify_tail(integrals, j + math.log2(c), tail_start)
    partials = np.cumsum(integrals)
    witness["window_integrals"] = integrals
    cls = ConditionVerdict(
        "radial_divergence", status, witness=witness,
        parameters={"n": n, "windows": windows, "tail_start": tail_start, "rule": rule},
        diagnostic=diag,
    )
    if status is Status.HOLDS:
        return RadialEnergy("Infinite", math.inf, partials, cls)
    if status is Status.INCONCLUSIVE:
        return RadialEnergy("Inconclusive", math.inf, partials, cls)
    last = integrals[-1]
    if rule == "ratio":
        r = float(np.mean(witness["tail_ratios"][-5:]))
        tail = last * r / (1 - r)
    else:
        a = float(np.mean(witness["raabe"][-5:]))
        tail = last * (windows - 1 + math.log2(c)) / (a - 1)
    return RadialEnergy("Finite", float(partials[-1] + tail), partials, cls)


# -- Orlicz norms ----------------------------------------------------------------

def _field(values, weights):
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.shape != w.shape:
        raise ConfigurationError("values and weights must have the same shape")
    if np.any(v < 0) or np.any(w < 0):
        raise DomainError("field values and weights must be nonnegative")
    if not w.sum() > 0:
        raise DomainError("field needs positive total weight")
    return v, w


def orlicz_mean(values, weights, P):
    """``sum w_i P(v_i)``, the Orlicz modular of a weighted sample set."""
    v, w = _field(values, weights)
    return float(np.sum(w * P(v)))


def luxemburg_norm(values, weights, P, rtol=1e-8):
    """``inf {k > 0 : sum w_i P(v_i / k) <= 1}`` by bracketing and bisection."""
    v, w = _field(values, weights)
    if not np.any(v > 0):
        return 0.0

    def feasible(k):
        return np.sum(w * P(v / k)) <= 1.0

    hi = float(v.max())
    while not feasible(hi):
        hi *= 2.0
    lo = hi / 2.0
    while feasible(lo):
        hi, lo = lo, lo / 2.0
        if lo == 0.0:
            raise EvaluationError("Luxemburg bracketing underflowed")
    while hi - lo > rtol * hi:
        mid = math.sqrt(lo * hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    if hi > 1.0 and feasible(1.0):
        return 1.0
    return hi
