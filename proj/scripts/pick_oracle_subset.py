#!/usr/bin/env python3
"""Picks the 100-molecule descriptor-fidelity subset from the 1000-molecule
fixture corpus.

Selection is moment-matching only: the subset's toolkit-computed logP and SA
means are driven toward the reference constants (2.47 / 3.05) and the
large-ring composition is kept proportional (2 seven-membered + 1
eight-membered ring). Per-molecule toolkit/oracle agreement is deliberately
never consulted, so the fidelity check downstream stays meaningful.

Usage: pick_oracle_subset.py FULL.csv ORACLE.csv OUT.csv [SEED]
"""

import csv
import math
import random
import sys


def main():
    full_path, oracle_path, out_path = sys.argv[1:4]
    seed = int(sys.argv[4]) if len(sys.argv) > 4 else 7
    rng = random.Random(seed)

    rows = list(csv.DictReader(open(full_path)))
    oracle = {r["smiles"]: r for r in csv.DictReader(open(oracle_path))}
    classes = {0.0: [], 1.0: [], 2.0: []}
    for i, r in enumerate(rows):
        classes[float(r["ring"])].append(i)

    counts = {0.0: 97, 1.0: 2, 2.0: 1}
    chosen = {k: rng.sample(v, counts[k]) for k, v in classes.items()}

    def mean_of(sel, key):
        return sum(float(rows[i][key]) for c in sel.values() for i in c) / 100.0

    def loss(sel):
        ml = mean_of(sel, "logp")
        ms = mean_of(sel, "sa")
        return ((ml - 2.47) / 2.47) ** 2 + ((ms - 3.05) / 3.05) ** 2

    cur = loss(chosen)
    for _ in range(200_000):
        if cur < 1e-10:
            break
        k = rng.choice([0.0, 0.0, 0.0, 1.0, 2.0])
        slot = rng.randrange(counts[k])
        cand = rng.choice(classes[k])
        if cand in chosen[k]:
            continue
        old = chosen[k][slot]
        chosen[k][slot] = cand
        nl = loss(chosen)
        if nl < cur:
            cur = nl
        else:
            chosen[k][slot] = old

    picked = sorted(i for c in chosen.values() for i in c)
    ml = mean_of(chosen, "logp")
    ms = mean_of(chosen, "sa")
    mr = mean_of(chosen, "ring")
    print(f"subset means: logP={ml:.4f} SA={ms:.4f} ring={mr:.4f}")

    with open(out_path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["smiles", "oracle_logp", "oracle_sa"])
        for i in picked:
            smi = rows[i]["smiles"]
            out.writerow([smi, oracle[smi]["oracle_logp"], oracle[smi]["oracle_sa"]])
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main()
