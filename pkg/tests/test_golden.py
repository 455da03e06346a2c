"""Regression against the recorded results in tests/golden (regenerate with scripts/make_goldens.py)."""
import csv
import json
from pathlib import Path

from gzsums.gross import distribution_survey
from gzsums.gzsum import TABLE_HEADER, coset_representatives, gz_sum, primitive_characters, valuation_table

GOLDEN = Path(__file__).parent / "golden"


def load(name):
    return json.loads((GOLDEN / name).read_text())


def test_level_one_values(flagship):
    rec = load("gz_values_n1.json")
    got = []
    for chi in primitive_characters(1, flagship):
        for x in flagship.orbit(1).points:
            v = gz_sum(x, chi, flagship)
            got.append({"chi": v.chi, "x": v.x, "coeffs": list(v.value.coeffs), "ord_lambda": v.valuation})
    assert rec["M"] == flagship.M and got == rec["rows"]


def test_survey(flagship_n3):
    inst = flagship_n3
    got = []
    for n in (1, 2, 3):
        G = inst.tower.G(n)
        subs = inst.subgroups(n)
        got.append(distribution_survey(inst.orbit(n), coset_representatives(G, subs.G0, subs.G1), 2))
    assert got == load("survey.json")["surveys"]
    assert got[-1]["surjective"]


def test_valuation_table(flagship):
    with open(GOLDEN / "valuation_table.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == TABLE_HEADER
    got = [[str(c) for c in r] for r in valuation_table(flagship, [1, 2])]
    assert got == rows[1:]
