#!/usr/bin/env python3
"""Sweep tail parameters of the 1-d walk and tabulate the classifier.

Writes one CSV row per (up rule, down rule) combination with the certified
drift quantities and the verdict; a quick map of the phase diagram.

Usage: python scripts/tail_grid_classify.py [out.csv]
"""

import csv
import itertools
import math
import sys

from vlmc_walks.prw1d import classify, double_comb_model
from vlmc_walks.tails import geometric, polynomial

GEO_PS = [0.3, 0.5, 0.7, 0.9]
POLY_CS = [0.5, 0.8, 1.0, 1.5, 2.0]


def rules(other):
    w = {other: 1.0}
    for p in GEO_PS:
        yield f"geometric(p={p})", geometric(p, w)
    for c in POLY_CS:
        yield f"polynomial(c={c})", polynomial(c, w)


def fmt(x):
    if x is None:
        return ""
    return "inf" if math.isinf(x) else f"{x:.6g}"


def main(out_path: str) -> None:
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["up_rule", "down_rule", "theta_u", "theta_d",
                         "d_S", "J_ud", "J_du", "verdict", "cell"])
        for (up_name, up), (down_name, down) in itertools.product(
            rules("d"), rules("u")
        ):
            result = classify(double_comb_model(up, down))
            rep = result.report
            writer.writerow([
                up_name, down_name, fmt(rep.theta_u), fmt(rep.theta_d),
                fmt(rep.d_s), rep.j_ud.status.value, rep.j_du.status.value,
                result.verdict.value, result.rule_fired,
            ])
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "classification_grid.csv")
