#!/usr/bin/env python3
"""Regenerate the recorded results under tests/golden by exhaustive enumeration.

Run once after a deliberate change; the regression and acceptance tests
compare against these files.
"""
import argparse
import csv
from pathlib import Path

from gzsums.brandt import CURVE_11A
from gzsums.cli import canonical_json
from gzsums.gross import distribution_survey
from gzsums.gzsum import (
    TABLE_HEADER, base_field_degree, build_instance, chi0_characters, coset_representatives,
    decompose, gz_sum, main_theorem_scan, primitive_characters, trace_identity_check, valuation_table,
)
from gzsums.numerics import valuation


def scan_golden(inst):
    out = []
    for n in (1, 2):
        for chi0 in chi0_characters(n, inst):
            r = main_theorem_scan(chi0, n, inst)
            out.append({"n": n, "chi0": r["chi0"], "exists_y": r["exists_y"], "min": r["min"],
                        "max": r["max"], "k_exponent": r["params"]["k_exponent"],
                        "per_chi1": [{k: row[k] for k in ("chi1", "min", "exists_y", "values")}
                                     for row in r["per_chi1"]]})
    return {"instance": inst.summary(), "scans": out}


def trace_golden(inst, n=2):
    rows = []
    for chi in primitive_characters(n, inst):
        for x in inst.orbit(n).points:
            r = trace_identity_check(x, chi, inst)
            rows.append({"x": r.x, "chi0": r.chi0, "chi1": r.chi1, "m": r.m, "equal": r.equal})
    return {"instance": inst.summary(), "n": n, "rows": rows}


def values_golden(inst, n=1):
    rows = []
    for chi in primitive_characters(n, inst):
        for x in inst.orbit(n).points:
            v = gz_sum(x, chi, inst)
            rows.append({"chi": v.chi, "x": v.x, "coeffs": list(v.value.coeffs), "ord_lambda": v.valuation})
    return {"n": n, "M": inst.M, "rows": rows}


def survey_golden(inst):
    out = []
    for n in range(1, inst.n_max + 1):
        G = inst.tower.G(n)
        subs = inst.subgroups(n)
        reps = coset_representatives(G, subs.G0, subs.G1)
        out.append(distribution_survey(inst.orbit(n), reps, len(inst.classes)))
    return {"surveys": out}


def finding_l19(classes):
    """Trace identity at l = 19, n = 3, with the default depth m = r and with m = v_p(q - 1)."""
    inst = build_instance(CURVE_11A, -67, 3, 19, 3, classes=classes)
    n = 3
    G = inst.tower.G(n)
    subs = inst.subgroups(n)
    rows = []
    for chi in primitive_characters(n, inst):
        chi0, _ = decompose(chi, G, subs)
        q = inst.l ** base_field_degree(chi0, inst)
        depth = valuation(q - 1, inst.p)
        for x in inst.orbit(n).points:
            default = trace_identity_check(x, chi, inst)
            deeper = trace_identity_check(x, chi, inst, m=depth)
            rows.append({"x": default.x, "chi0": default.chi0, "chi1": default.chi1, "q": q,
                         "m_default": default.m, "equal_default": default.equal,
                         "m_residue_depth": depth, "equal_residue_depth": deeper.equal})
    return {
        "instance": inst.summary(), "n": n,
        "summary": {
            "rows": len(rows),
            "unequal_default": sum(not r["equal_default"] for r in rows),
            "unequal_residue_depth": sum(not r["equal_residue_depth"] for r in rows),
        },
        "rows": rows,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "golden")
    ap.add_argument("--skip-finding", action="store_true")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    inst = build_instance(CURVE_11A, -67, 3, 5, 2)
    deep = build_instance(CURVE_11A, -67, 3, 5, 3, classes=inst.classes)
    files = {
        "main_scan.json": scan_golden(inst),
        "trace_check_n2.json": trace_golden(inst),
        "gz_values_n1.json": values_golden(inst),
        "survey.json": survey_golden(deep),
    }
    if not args.skip_finding:
        files["finding_trace_identity_l19.json"] = finding_l19(inst.classes)
    for name, payload in files.items():
        (args.out / name).write_text(canonical_json(payload))
        print(args.out / name)
    path = args.out / "valuation_table.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_HEADER)
        w.writerows(valuation_table(inst, [1, 2]))
    print(path)


if __name__ == "__main__":
    main()
