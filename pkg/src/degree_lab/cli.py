"""Command-line entry point ``degree-lab``.

Every subcommand parses all of its descriptors before computing anything.
Output is JSON (``{"meta": ..., "result": ...}``) or CSV whose first line is
``# `` followed by the same metadata, so a file always records the
configuration and package version that produced it.

Exit codes: 0 success, 2 configuration error, 3 resolution or convergence
error, 4 internal consistency error.
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .catalog import (
    default_catalog, degree_well_defined, degree_well_defined_dim4,
    homotopy_classes_defined, load_catalog,
)
from .degree import degree_by_jacobian, degree_by_preimage
from .energy import decay_experiment, parse_family
from .errors import (
    ConfigurationError, DegreeLabError, EvaluationError, InternalConsistencyError,
    RegularValueError, ResolutionError, SingularLocusError,
)
from .homology import ChainComplex, euler_characteristic, homology, is_rational_homology_sphere, parse_space
from .maps import parse_map
from .mesh import parse_mesh
from .young import (
    Power, check_divergence, check_doubling, check_growth_alpha, check_small_o,
    check_young_invariants, parse_young, radial_projection_energy,
)

EXIT_OK, EXIT_CONFIG, EXIT_RESOLUTION, EXIT_CONSISTENCY = 0, 2, 3, 4


@dataclass
class ExperimentConfig:
    subcommand: str
    descriptors: dict = field(default_factory=dict)
    k: list = None
    out: str = None
    format: str = "json"
    seed: int = 0
    options: dict = field(default_factory=dict)

    def to_dict(self):
        return {key: value for key, value in asdict(self).items() if key != "out"}


# -- argument parsing ---------------------------------------------------------------

def _k_list(text):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"k list must be comma-separated integers, got {text!r}")


def _gauge(text):
    """A Young function descriptor or a bare exponent ``p``."""
    try:
        return Power(float(text))
    except ValueError:
        return parse_young(text)


def build_parser():
    parser = argparse.ArgumentParser(prog="degree-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized choices")
    common.add_argument("--dry-run", action="store_true", help="echo the parsed config and exit")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("young-check", parents=[common], help="check the growth conditions on a gauge")
    p.add_argument("gauge")
    p.add_argument("--n", type=int, default=2, help="domain dimension")
    p.add_argument("--alpha", type=float, help="growth exponent (default n - 0.5)")

    p = sub.add_parser("degree", parents=[common], help="degree of a map on a mesh")
    p.add_argument("--map", required=True)
    p.add_argument("--mesh", required=True)
    p.add_argument("--method", choices=("jacobian", "preimage"), default="jacobian")
    p.add_argument("--value", default="1.0,1.5707963267948966",
                   help="regular value as 'phi,theta', or 'random' (uses --seed)")

    for name, helptext in (("energy", "energy decay along a map family"),
                           ("paradox", "degree and energy side by side along a family")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--family", required=True)
        p.add_argument("--gauge", required=True)
        p.add_argument("--k", type=_k_list, default=[4, 8, 16, 32, 64])
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if name == "energy":
            p.add_argument("--with-degree", action="store_true")

    p = sub.add_parser("homology", parents=[common], help="cellular homology of a space")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--space")
    src.add_argument("--complex", help="path of a chain complex JSON document")
    p.add_argument("--coeff", choices=("Z", "Q"), default="Z")

    p = sub.add_parser("verdict", parents=[common], help="evaluate a theorem predicate")
    p.add_argument("--target", required=True)
    p.add_argument("--predicate", choices=("degree", "degree4", "homotopy"), default="degree")
    p.add_argument("--n", type=int, help="domain dimension for the homotopy predicate")
    p.add_argument("--domain", help="domain entry for the homotopy predicate (default S^n)")
    p.add_argument("--catalog", help="extra catalog entries (JSON)")

    p = sub.add_parser("catalog-list", parents=[common], help="list the catalog")
    p.add_argument("--catalog", help="extra catalog entries (JSON)")
    return parser


# -- preparation: parse every descriptor before any computation -----------------------

def _parse_value(text, seed):
    if text == "random":
        rng = np.random.default_rng(seed)
        return (float(rng.uniform(0.5, math.pi - 0.5)), float(rng.uniform(0.0, 2 * math.pi)))
    try:
        phi, theta = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigurationError(f"--value needs 'phi,theta', got {text!r}") from None
    return (theta, phi)


def prepare(args):
    """Return ``(config, objects)``; raises ConfigurationError on any bad input."""
    cmd = args.subcommand
    cfg = ExperimentConfig(cmd, out=args.out, seed=args.seed)
    obj = {}
    if cmd == "young-check":
        obj["gauge"] = parse_young(args.gauge)
        if args.n < 2:
            raise ConfigurationError("--n must be >= 2")
        alpha = args.n - 0.5 if args.alpha is None else args.alpha
        cfg.descriptors = {"gauge": args.gauge}
        cfg.options = {"n": args.n, "alpha": alpha}
    elif cmd == "degree":
        obj["map"], obj["mesh"] = parse_map(args.map), parse_mesh(args.mesh)
        obj["value"] = _parse_value(args.value, args.seed)
        cfg.descriptors = {"map": args.map, "mesh": args.mesh}
        cfg.options = {"method": args.method}
        if args.method == "preimage":
            cfg.options["value_theta_phi"] = list(obj["value"])
    elif cmd in ("energy", "paradox"):
        obj["family"], obj["gauge"] = parse_family(args.family), _gauge(args.gauge)
        ks = args.k
        if len(ks) < 4 or any(b <= a for a, b in zip(ks, ks[1:])) or ks[0] < 1:
            raise ConfigurationError("--k needs at least four positive, strictly increasing values")
        cfg.descriptors = {"family": args.family, "gauge": args.gauge}
        cfg.k, cfg.format = ks, args.format
        if cmd == "energy":
            cfg.options = {"with_degree": args.with_degree}
    elif cmd == "homology":
        if args.space:
            obj["complex"] = parse_space(args.space)
            cfg.descriptors = {"space": args.space}
        else:
            try:
                with open(args.complex) as fh:
                    obj["complex"] = ChainComplex.from_json(fh.read())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigurationError(f"cannot load {args.complex}: {exc}") from None
            cfg.descriptors = {"complex": args.complex}
        cfg.options = {"coeff": args.coeff}
    elif cmd in ("verdict", "catalog-list"):
        catalog = default_catalog()
        if args.catalog:
            catalog = catalog.extend(load_catalog(args.catalog))
            cfg.descriptors["catalog"] = args.catalog
        obj["catalog"] = catalog
        if cmd == "verdict":
            obj["target"] = catalog.get(args.target)
            cfg.descriptors["target"] = args.target
            cfg.options = {"predicate": args.predicate}
            if args.predicate == "homotopy":
                cfg.options["n"] = obj["target"].dimension if args.n is None else args.n
                cfg.options["domain"] = args.domain
    return cfg, obj


# -- runners ------------------------------------------------------------------------------

def _young_check(cfg, obj):
    P, n, alpha = obj["gauge"], cfg.options["n"], cfg.options["alpha"]
    conditions = [check_divergence(P, n), check_small_o(P, n), check_doubling(P),
                  check_growth_alpha(P, alpha)]
    radial = radial_projection_energy(P, n)
    return {
        "gauge": P.description,
        "invariants": check_young_invariants(P).to_dict(),
        "conditions": [v.to_dict() for v in conditions],
        "all_hold": all(v.holds for v in conditions),
        "radial_projection": {"verdict": radial.verdict, "value": radial.value},
    }


def _degree(cfg, obj):
    if cfg.options["method"] == "jacobian":
        return degree_by_jacobian(obj["map"], obj["mesh"]).to_dict()
    est = degree_by_preimage(obj["map"], obj["value"], obj["mesh"])
    out = est.to_dict()
    out["preimages"] = [list(p) for p in est.preimages]
    return out


def _degree_verdict(degrees):
    if len(set(degrees)) == 1:
        return f"Constant({degrees[0]})"
    return "Varies"


def _energy(cfg, obj, paradox=False):
    report = decay_experiment(obj["family"], obj["gauge"], cfg.k,
                              with_degree=paradox or cfg.options.get("with_degree", False))
    summary = {"family": report.family, "gauge": report.gauge, "slope": report.slope,
               "reference_rate": report.reference_rate, "energy_verdict": report.verdict}
    if paradox:
        degrees = [r.degree for r in report.rows]
        summary["degree_verdict"] = _degree_verdict(degrees)
        summary["paradox_holds"] = (len(set(degrees)) == 1 and degrees[0] != 0
                                    and report.verdict == "DecaysToZero")
        columns = ["k", "degree", "degree_residual", "energy", "cap_measure", "sup_df",
                   "bound_certificate", "bound_ratio", "luxemburg"]
    else:
        columns = report.columns()
    rows = [[getattr(r, c) for c in columns] for r in report.rows]
    return summary, columns, rows


def _homology(cfg, obj):
    c = obj["complex"]
    groups = homology(c, cfg.options["coeff"])
    rhs, betti = is_rational_homology_sphere(c) if c.dim >= 1 and c.ranks[-1] else (False, None)
    return {
        "groups": [str(g) for g in groups],
        "betti": [g.betti for g in groups],
        "torsion": [list(g.torsion) for g in groups],
        "euler_characteristic": euler_characteristic(c).value,
        "rational_homology_sphere": rhs,
    }


def _verdict(cfg, obj):
    pred, target, catalog = cfg.options["predicate"], obj["target"], obj["catalog"]
    if pred == "degree":
        v = degree_well_defined(target, catalog)
    elif pred == "degree4":
        v = degree_well_defined_dim4(target, catalog)
    else:
        v = homotopy_classes_defined(target, cfg.options["n"], cfg.options["domain"], catalog)
    return v.to_dict()


# -- output ------------------------------------------------------------------------------------

def _meta(cfg):
    return {"version": __version__, "config": cfg.to_dict()}


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _to_json(obj):
    def default(o):
        if isinstance(o, np.generic):
            return o.item()
        raise TypeError(f"cannot serialise {type(o).__name__}")

    def clean(o):
        if isinstance(o, float) and not math.isfinite(o):
            return "inf" if o > 0 else ("-inf" if o < 0 else "nan")
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        if isinstance(o, np.generic):
            return clean(o.item())
        return o

    return json.dumps(clean(obj), indent=2, sort_keys=True, default=default) + "\n"


def render(cfg, result):
    if isinstance(result, tuple):  # (summary, columns, rows)
        summary, columns, rows = result
        if cfg.format == "json":
            body = {"summary": summary, "rows": [dict(zip(columns, r)) for r in rows]}
            return _to_json({"meta": _meta(cfg), "result": body})
        buf = io.StringIO()
        buf.write("# " + json.dumps(_meta(cfg), sort_keys=True) + "\n")
        buf.write("# " + json.dumps(json.loads(_to_json(summary)), sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_cell(v) for v in r])
        return buf.getvalue()
    return _to_json({"meta": _meta(cfg), "result": result})


RUNNERS = {
    "young-check": _young_check,
    "degree": _degree,
    "energy": _energy,
    "paradox": lambda cfg, obj: _energy(cfg, obj, paradox=True),
    "homology": _homology,
    "verdict": _verdict,
    "catalog-list": lambda cfg, obj: [e.to_dict() for e in obj["catalog"]],
}


def exit_code(exc):
    if isinstance(exc, (ResolutionError,)):
        return EXIT_RESOLUTION
    if isinstance(exc, (InternalConsistencyError, EvaluationError, SingularLocusError)):
        return EXIT_CONSISTENCY
    if isinstance(exc, (ConfigurationError, RegularValueError)):
        return EXIT_CONFIG
    return EXIT_CONSISTENCY


def run(argv=None, stdout=None):
    """Run the CLI and return its exit code."""
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg, obj = prepare(args)
    except DegreeLabError as exc:
        print(f"degree-lab: configuration error: {exc}", file=sys.stderr)
        return exit_code(exc)
    if args.dry_run:
        stdout.write(_to_json({"meta": _meta(cfg), "dry_run": True}))
        return EXIT_OK
    try:
        text = render(cfg, RUNNERS[cfg.subcommand](cfg, obj))
    except DegreeLabError as exc:
        print(f"degree-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code(exc)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
