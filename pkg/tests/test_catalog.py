import json
import re

import pytest

from degree_lab.catalog import (
    Catalog,
    CatalogEntry,
    TheoremVerdict,
    consistency_report,
    default_catalog,
    degree_well_defined,
    degree_well_defined_dim4,
    homotopy_classes_defined,
    load_catalog,
)
from degree_lab.errors import ConfigurationError, InvariantViolation

NO_DEGREE = ["S^4", "S^2", "S^3", "poincare", "RP^3"] + [f"L({m},1)" for m in range(2, 8)]
YES_DEGREE = ["CP^2", "T^2", "T^3", "S^2xS^2", "R^3/G6"]


@pytest.mark.parametrize("target", NO_DEGREE)
def test_degree_not_defined(target):
    v = degree_well_defined(target)
    assert v.answer == "No", v.justification


@pytest.mark.parametrize("target", YES_DEGREE)
def test_degree_defined(target):
    v = degree_well_defined(target)
    assert v.answer == "Yes", v.justification


@pytest.mark.parametrize("target", ["RP^2", "RP^4"])
def test_non_orientable_targets_are_unknown(target):
    v = degree_well_defined(target)
    assert v.answer == "Unknown"
    assert "orientable" in v.note


def test_circle_is_outside_the_criterion():
    assert degree_well_defined("RP^1").answer == "Unknown"


@pytest.mark.parametrize("alias, name", [
    ("lens:m=5", "L(5,1)"), ("rp:n=3", "L(2,1)"), ("  s2 X s2 ", "S^2xS^2"), ("Poincare", "Sigma(2,3,5)"),
    ("g6", "R^3/G6"), ("sphere:n=4", "S^4"),
])
def test_aliases(alias, name):
    assert default_catalog().get(alias).name == name


def test_dim4_agrees_with_the_general_predicate():
    entries = [e for e in default_catalog() if e.dimension == 4 and e.orientable]
    assert {e.name for e in entries} >= {"S^4", "CP^2", "S^2xS^2"}
    for e in entries:
        assert degree_well_defined(e).answer == degree_well_defined_dim4(e).answer


def test_dim4_rejects_other_dimensions():
    with pytest.raises(ConfigurationError):
        degree_well_defined_dim4("T^2")


def test_shipped_catalog_is_consistent():
    assert consistency_report() == []


TAG = re.compile(r"^\[(catalog|computed|rule)\] ")


@pytest.mark.parametrize("target", NO_DEGREE + YES_DEGREE)
def test_justification_steps_are_tagged_and_cite_facts(target):
    v = degree_well_defined(target)
    assert all(TAG.match(step) for step in v.justification)
    tags = [TAG.match(step).group(1) for step in v.justification]
    assert tags[-1] == "rule"
    assert "catalog" in tags


def test_lens_justification_uses_computed_homology_of_s3():
    steps = degree_well_defined("L(5,1)").justification
    assert any("S^3" in s and "5 sheets" in s for s in steps)
    assert any(s.startswith("[computed]") and "(1, 0, 0, 1)" in s for s in steps)


def test_curated_and_computed_homology_sources():
    cat = default_catalog()
    betti, source = cat.get("Sigma(2,3,5)").betti()
    assert betti == (1, 0, 0, 1) and source.startswith("catalog table")
    betti, source = cat.get("S^2xS^2").betti()
    assert betti == (1, 0, 2, 0, 1) and source.startswith("computed")
    assert cat.get("Sigma(2,3,5)").is_rhs()


def test_noncompact_cover_step():
    steps = degree_well_defined("T^3").justification
    assert any("not compact" in s for s in steps)


@pytest.mark.parametrize("target, n, answer", [
    ("S^2", 3, "No"),
    ("S^2", 4, "No"),
    ("S^3", 3, "No"),
    ("T^2", 3, "Yes"),
    ("CP^2", 3, "Yes"),
    ("RP^1", 2, "Yes"),
    ("L(3,1)", 3, "No"),
    ("S^4", 7, "Unknown"),
])
def test_homotopy_classes(target, n, answer):
    assert homotopy_classes_defined(target, n).answer == answer


@pytest.mark.parametrize("target", ["S^2", "CP^1"])
def test_nonsphere_domain_is_unknown_with_caveat(target):
    v = homotopy_classes_defined(target, 4, domain="CP^2")
    assert v.answer == "Unknown"
    assert "homotopic to a constant" in v.note


def test_domain_dimension_must_match():
    with pytest.raises(ConfigurationError):
        homotopy_classes_defined("S^2", 3, domain="CP^2")


def test_unknown_name():
    with pytest.raises(ConfigurationError):
        degree_well_defined("Klein bottle")


def test_verdict_invariants():
    with pytest.raises(InvariantViolation):
        TheoremVerdict("p", "X", "Maybe", ())
    with pytest.raises(InvariantViolation):
        TheoremVerdict("p", "X", "Yes", ())


BASE = {"name": "X", "dimension": 2, "orientable": True, "homology": {"complex": "sphere:n=2"},
        "universal_cover": {"kind": "self"}, "sheets": 1}


@pytest.mark.parametrize("patch", [
    {"sheets": 2},
    {"universal_cover": {"kind": "noncompact", "description": "R^2"}, "sheets": 3},
    {"universal_cover": {"kind": "named", "name": "S^2"}, "sheets": "infinite"},
    {"homology": {"complex": "sphere:n=3"}},
    {"homology": {"betti": [1, 0]}},
    {"universal_cover": {"kind": "branched"}},
])
def test_entry_invariants(patch):
    with pytest.raises((InvariantViolation, ConfigurationError)):
        CatalogEntry.from_dict({**BASE, **patch})


def test_duplicate_names_are_rejected():
    e = CatalogEntry.from_dict(BASE)
    with pytest.raises(ConfigurationError):
        Catalog([e, CatalogEntry.from_dict({**BASE, "aliases": []})])


def test_user_catalog_from_a_file(tmp_path):
    doc = {"format": 1, "entries": [
        {**BASE, "name": "Q^3", "dimension": 3, "homology": {"betti": [1, 0, 0, 1], "source": "user"},
         "universal_cover": {"kind": "named", "name": "S^3"}, "sheets": 8},
    ]}
    path = tmp_path / "extra.json"
    path.write_text(json.dumps(doc))
    merged = default_catalog().extend(load_catalog(path))
    v = degree_well_defined("Q^3", catalog=merged)
    assert v.answer == "No"
    assert consistency_report(merged) == []
    # without the shipped entries the cover cannot be resolved
    assert degree_well_defined("Q^3", catalog=load_catalog(path)).answer == "Unknown"


def test_bad_catalog_files(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigurationError):
        load_catalog(path)
    with pytest.raises(ConfigurationError):
        load_catalog(tmp_path / "missing.json")


def test_consistency_report_flags_bad_data():
    bad = CatalogEntry.from_dict({**BASE, "name": "Fake^2", "homology": {"betti": [1, 2, 1]},
                                  "universal_cover": {"kind": "named", "name": "S^2"}, "sheets": 2})
    problems = consistency_report(default_catalog().extend([bad]))
    assert any(p.startswith("Fake^2") for p in problems)


def test_entry_serialises():
    d = default_catalog().get("RP^2").to_dict()
    assert d["sheets"] == 2 and d["orientable"] is False
    assert default_catalog().get("T^3").to_dict()["sheets"] == "infinite"
