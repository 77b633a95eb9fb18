"""Named manifolds with universal-cover data, and the theorem predicates.

Homology is computed from a chain complex whenever the entry names one,
and taken from a curated table otherwise.  Homotopy groups and the
"homeomorphic to a sphere" flag are always curated facts, never computed.

Each verdict carries a justification chain.  Every step is tagged
``[catalog]`` (a stored fact), ``[computed]`` (output of
:mod:`degree_lab.homology`) or ``[rule]`` (the implication being applied).
"""

import json
import math
from dataclasses import dataclass, field
from importlib import resources

from .errors import ConfigurationError, InvariantViolation
from .homology import betti_numbers, covering_chi_check, parse_space

__all__ = [
    "CatalogEntry", "Catalog", "TheoremVerdict", "load_catalog", "default_catalog",
    "degree_well_defined", "degree_well_defined_dim4", "homotopy_classes_defined",
    "consistency_report",
]

YES, NO, UNKNOWN = "Yes", "No", "Unknown"


def _key(name):
    return "".join(str(name).lower().split())


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    dimension: int
    orientable: bool
    homology: dict
    universal_cover: dict
    sheets: float
    pi: dict = field(default_factory=dict)
    pi_source: str = ""
    aspherical: bool = False
    homeomorphic_to_sphere: bool = False
    aliases: tuple = ()
    caveats: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = self.cover_kind
        if kind not in ("self", "named", "noncompact"):
            raise InvariantViolation(f"{self.name}: unknown universal cover kind {kind!r}")
        if kind == "self" and self.sheets != 1:
            raise InvariantViolation(f"{self.name}: a self cover has one sheet")
        if kind == "noncompact" and self.sheets != math.inf:
            raise InvariantViolation(f"{self.name}: a noncompact cover has infinitely many sheets")
        if kind == "named" and not (isinstance(self.sheets, int) and self.sheets >= 1):
            raise InvariantViolation(f"{self.name}: a compact cover has a finite sheet count")
        if "complex" in self.homology:
            top = parse_space(self.homology["complex"]).dim
            if top != self.dimension:
                raise InvariantViolation(
                    f"{self.name}: complex has top dimension {top}, entry says {self.dimension}")
        elif len(self.homology.get("betti", ())) != self.dimension + 1:
            raise InvariantViolation(f"{self.name}: betti table must have dimension + 1 entries")

    @classmethod
    def from_dict(cls, d):
        try:
            sheets = d["sheets"]
            sheets = math.inf if sheets in ("infinite", "inf", None) else int(sheets)
            return cls(
                name=d["name"], dimension=int(d["dimension"]), orientable=bool(d["orientable"]),
                homology=dict(d["homology"]), universal_cover=dict(d["universal_cover"]),
                sheets=sheets, pi=dict(d.get("pi", {})), pi_source=d.get("pi_source", ""),
                aspherical=bool(d.get("aspherical", False)),
                homeomorphic_to_sphere=bool(d.get("homeomorphic_to_sphere", False)),
                aliases=tuple(d.get("aliases", ())), caveats=dict(d.get("caveats", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad catalog entry {d.get('name', '?')!r}: {exc}") from None

    @property
    def cover_kind(self):
        return self.universal_cover.get("kind")

    def betti(self):
        """Rational betti numbers and a note on where they came from."""
        if "complex" in self.homology:
            desc = self.homology["complex"]
            return betti_numbers(parse_space(desc)), f"computed from the chain complex {desc}"
        return tuple(self.homology["betti"]), f"catalog table ({self.homology.get('source', 'curated')})"

    def is_rhs(self):
        b, _ = self.betti()
        return b == (1,) + (0,) * (self.dimension - 1) + (1,)

    def pi_group(self, n):
        """``pi_n`` as a string (``"0"`` for trivial), or None when not recorded."""
        if str(n) in self.pi:
            return self.pi[str(n)]
        if self.aspherical and n >= 2:
            return "0"
        return None

    def to_dict(self):
        return {
            "name": self.name, "dimension": self.dimension, "orientable": self.orientable,
            "universal_cover": self.universal_cover,
            "sheets": "infinite" if self.sheets == math.inf else self.sheets,
            "homology": self.homology, "homeomorphic_to_sphere": self.homeomorphic_to_sphere,
        }


class Catalog:
    """Immutable lookup of entries by name or alias (case and spaces ignored)."""

    def __init__(self, entries):
        self._entries = tuple(entries)
        self._index = {}
        for e in self._entries:
            for key in (e.name, *e.aliases):
                k = _key(key)
                if k in self._index and self._index[k] is not e:
                    raise ConfigurationError(f"catalog name {key!r} is used twice")
                self._index[k] = e

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __contains__(self, name):
        return _key(name) in self._index

    def get(self, name):
        try:
            return self._index[_key(name)]
        except KeyError:
            raise ConfigurationError(f"no catalog entry named {name!r}") from None

    def extend(self, other):
        return Catalog(list(self) + list(other))


def _parse_document(doc):
    if not isinstance(doc, dict) or "entries" not in doc:
        raise ConfigurationError("a catalog document needs an 'entries' list")
    return Catalog(CatalogEntry.from_dict(d) for d in doc["entries"])


def load_catalog(path=None):
    """The shipped catalog, or the one stored at ``path``."""
    if path is None:
        text = resources.files("degree_lab").joinpath("data/catalog.json").read_text()
    else:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigurationError(f"cannot read catalog {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"catalog is not valid JSON: {exc}") from None
    return _parse_document(doc)


_DEFAULT = None


def default_catalog():
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_catalog()
    return _DEFAULT


@dataclass(frozen=True)
class TheoremVerdict:
    predicate: str
    target: str
    answer: str
    justification: tuple
    note: str = ""

    def __post_init__(self):
        if self.answer not in (YES, NO, UNKNOWN):
            raise InvariantViolation(f"answer must be Yes, No or Unknown, got {self.answer!r}")
        if self.answer != UNKNOWN and not self.justification:
            raise InvariantViolation("a Yes/No verdict needs a justification")

    def to_dict(self):
        out = {"predicate": self.predicate, "target": self.target, "answer": self.answer,
               "justification": list(self.justification)}
        if self.note:
            out["note"] = self.note
        return out


def _resolve(target, catalog):
    catalog = catalog or default_catalog()
    entry = target if isinstance(target, CatalogEntry) else catalog.get(target)
    return entry, catalog


def _cover_is_rhs(entry, catalog, steps):
    """Decide whether the universal cover is a rational homology sphere, recording why."""
    kind = entry.cover_kind
    if kind == "noncompact":
        steps.append(f"[catalog] universal cover of {entry.name} is {entry.universal_cover['description']}, "
                     "which is not compact")
        steps.append("[rule] a noncompact manifold has vanishing top cohomology, so it is not a "
                     "rational homology sphere")
        return False
    if kind == "self":
        cover = entry
        steps.append(f"[catalog] {entry.name} is simply connected, so it is its own universal cover")
    else:
        cover = catalog.get(entry.universal_cover["name"])
        steps.append(f"[catalog] universal cover of {entry.name} is {cover.name} "
                     f"({entry.sheets} sheets)")
    betti, source = cover.betti()
    steps.append(f"[computed] betti numbers of {cover.name} are {betti}, {source}"
                 if source.startswith("computed")
                 else f"[catalog] betti numbers of {cover.name} are {betti}, {source}")
    rhs = cover.is_rhs()
    steps.append(f"[rule] {cover.name} {'is' if rhs else 'is not'} a rational homology sphere "
                 f"(betti {'equals' if rhs else 'differs from'} (1, 0, ..., 0, 1))")
    return rhs


def degree_well_defined(target, catalog=None):
    """Whether degree is well defined for maps into ``target``.

    Yes exactly when the universal cover of the target is not a rational
    homology sphere.
    """
    entry, catalog = _resolve(target, catalog)
    name = "degree_well_defined"
    if not entry.orientable:
        return TheoremVerdict(name, entry.name, UNKNOWN, (),
                              f"{entry.name} is not orientable, so degree is not defined with integer values")
    if entry.dimension < 2:
        return TheoremVerdict(name, entry.name, UNKNOWN, (),
                              "the criterion applies to targets of dimension >= 2")
    if entry.cover_kind == "named" and entry.universal_cover.get("name") not in catalog:
        return TheoremVerdict(name, entry.name, UNKNOWN, (),
                              f"universal cover {entry.universal_cover.get('name')!r} is not in the catalog")
    steps = []
    rhs = _cover_is_rhs(entry, catalog, steps)
    steps.append("[rule] degree is well defined iff the universal cover is not a rational homology sphere")
    return TheoremVerdict(name, entry.name, NO if rhs else YES, tuple(steps))


def degree_well_defined_dim4(target, catalog=None):
    """The four-dimensional form: degree fails to be well defined iff the target is a 4-sphere."""
    entry, catalog = _resolve(target, catalog)
    name = "degree_well_defined_dim4"
    if entry.dimension != 4:
        raise ConfigurationError(f"{entry.name} has dimension {entry.dimension}, not 4")
    if not entry.orientable:
        return TheoremVerdict(name, entry.name, UNKNOWN, (), f"{entry.name} is not orientable")
    flag = entry.homeomorphic_to_sphere
    steps = (
        f"[catalog] {entry.name} {'is' if flag else 'is not'} homeomorphic to S^4",
        "[rule] for a closed orientable 4-manifold the universal cover is a rational homology "
        "sphere iff the manifold is homeomorphic to S^4",
    )
    return TheoremVerdict(name, entry.name, NO if flag else YES, steps)


def homotopy_classes_defined(target, n, domain=None, catalog=None):
    """Whether homotopy classes of maps from an ``n``-dimensional domain are well defined.

    Yes when ``pi_n(target)`` is trivial, No when it is not and the domain is
    ``S^n``, Unknown otherwise.  ``domain`` defaults to ``S^n``.
    """
    entry, catalog = _resolve(target, catalog)
    name = "homotopy_classes_defined"
    n = int(n)
    if n < 1:
        raise ConfigurationError("domain dimension must be >= 1")
    dom = domain or f"S^{n}"
    dom_entry = catalog.get(dom) if dom in catalog else None
    dom_name = dom_entry.name if dom_entry else dom
    if dom_entry is not None and dom_entry.dimension != n:
        raise ConfigurationError(f"domain {dom_name} has dimension {dom_entry.dimension}, not {n}")
    group = entry.pi_group(n)
    if group is None:
        return TheoremVerdict(name, entry.name, UNKNOWN, (),
                              f"pi_{n}({entry.name}) is not recorded in the catalog")
    source = f" ({entry.pi_source})" if entry.pi_source else ""
    if group == "0":
        steps = (f"[catalog] pi_{n}({entry.name}) = 0{source}",
                 "[rule] trivial pi_n makes homotopy classes well defined")
        return TheoremVerdict(name, entry.name, YES, steps)
    fact = f"[catalog] pi_{n}({entry.name}) = {group}{source}"
    is_sphere = dom_entry is not None and dom_entry.homeomorphic_to_sphere
    if is_sphere:
        steps = (fact, f"[catalog] domain {dom_name} is the sphere S^{n}",
                 "[rule] nontrivial pi_n gives a sequence of maps from S^n that leaves its class "
                 "yet converges in energy, so classes are not well defined")
        return TheoremVerdict(name, entry.name, NO, steps)
    caveat = entry.caveats.get(str(n), {}).get(dom_name, "")
    note = (f"pi_{n}({entry.name}) = {group} is nontrivial but the domain {dom_name} is not S^{n}; "
            "nontrivial pi_n is not a proof of failure here")
    if caveat:
        note += f". {caveat}"
    return TheoremVerdict(name, entry.name, UNKNOWN, (fact,), note)


def consistency_report(catalog=None):
    """Data checks across a catalog; returns a list of problems (empty when clean).

    * an orientable entry whose universal cover is a rational homology
      sphere is itself one
    * no orientable entry of even dimension has a finite cover with more
      than one sheet that is a rational homology sphere
    * Euler characteristics multiply by the sheet count for finite covers
    * both degree predicates agree on every 4-dimensional entry
    """
    catalog = catalog or default_catalog()
    problems = []
    for e in catalog:
        if e.orientable and e.cover_kind in ("self", "named"):
            cover = e if e.cover_kind == "self" else catalog.get(e.universal_cover["name"])
            if cover.is_rhs():
                if not e.is_rhs():
                    problems.append(f"{e.name}: cover {cover.name} is a rational homology sphere "
                                    "but the entry is not")
                if e.dimension % 2 == 0 and e.sheets > 1:
                    problems.append(f"{e.name}: even dimension with a {e.sheets}-sheeted "
                                    "rational homology sphere cover")
        if (e.cover_kind == "named" and "complex" in e.homology):
            cover = catalog.get(e.universal_cover["name"])
            if "complex" in cover.homology and not covering_chi_check(
                    parse_space(e.homology["complex"]), parse_space(cover.homology["complex"]), e.sheets):
                problems.append(f"{e.name}: Euler characteristic does not scale by {e.sheets}")
        if e.dimension == 4:
            a = degree_well_defined(e, catalog).answer
            b = degree_well_defined_dim4(e, catalog).answer
            if a != b:
                problems.append(f"{e.name}: general predicate says {a}, four-dimensional form says {b}")
    return problems
