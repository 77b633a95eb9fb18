"""Integral homology of a few spaces, then the degree predicate on the catalog."""

from degree_lab.catalog import default_catalog, degree_well_defined
from degree_lab.homology import homology, parse_space

for text in ("lens:m=5", "rp:n=4", "cp:n=2", "torus:n=3", "sphere:n=2*sphere:n=2", "lens:m=3*rp:n=2"):
    groups = ", ".join(str(g) for g in homology(parse_space(text)))
    print(f"{text:>24}: {groups}")

print()
for name in ("S^4", "L(5,1)", "Sigma(2,3,5)", "CP^2", "T^3", "RP^2"):
    v = degree_well_defined(name)
    print(f"{name:>14}: {v.answer}")
    for step in v.justification:
        print(f"{'':16}{step}")
    if v.note:
        print(f"{'':16}{v.note}")
