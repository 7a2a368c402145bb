#!/usr/bin/env python3
"""Synthesizes the 1000-molecule descriptor fixture corpus.

Generates a pool of neutral, connected, drug-like molecules over the
C/N/O/F/Cl/Br element set (expressible in the default genome alphabet and
hydrogen-saturated identically under standard and maximum-valence
conventions), then picks a 1000-molecule subset whose logP moments match
the reference-corpus normalization constants (mean 2.47, std 1.42) and
whose large-ring composition (24 seven-membered + 7 eight-membered rings)
yields ring-penalty moments of 0.038 / 0.224.

Usage: make_fixture.py OUT.smi [SEED]
"""

import math
import random
import sys

sys.path.insert(0, __file__.rsplit("/", 1)[0])
from oracle_descriptors import Atom, Mol, crippen_logp, parse_smiles, write_smiles

MAX_HEAVY_ATOMS = 30


def add_aromatic_ring(mol, pattern):
    """pattern: string of ring atoms, e.g. 'CCCCCC', 'NCCCCC', 'oCCCC', 'hCCCC'
    where 'h' is a pyrrole-type NH. Returns substitutable carbon indices."""
    idxs = []
    for ch in pattern:
        if ch == "h":
            idxs.append(mol.add_atom(Atom("N", aromatic=True, explicit_h=1)))
        else:
            idxs.append(mol.add_atom(Atom(ch.upper(), aromatic=True)))
    n = len(idxs)
    for k in range(n):
        mol.add_bond(idxs[k], idxs[(k + 1) % n], 1, aromatic=True)
    return [i for i, ch in zip(idxs, pattern) if ch == "C"]


def add_naphthalene(mol):
    idxs = [mol.add_atom(Atom("C", aromatic=True)) for _ in range(10)]
    ring1 = [0, 1, 2, 3, 4, 5]
    for k in range(6):
        mol.add_bond(idxs[ring1[k]], idxs[ring1[(k + 1) % 6]], 1, aromatic=True)
    second = [idxs[4], idxs[6], idxs[7], idxs[8], idxs[9], idxs[3]]
    for k in range(5):
        mol.add_bond(second[k], second[k + 1], 1, aromatic=True)
    return [idxs[i] for i in (0, 1, 2, 5, 6, 7, 8, 9)]


def add_aliphatic_ring(mol, size):
    idxs = [mol.add_atom(Atom("C")) for _ in range(size)]
    for k in range(size):
        mol.add_bond(idxs[k], idxs[(k + 1) % size], 1)
    return idxs


RING_BUILDERS = {
    "benzene": lambda m: add_aromatic_ring(m, "CCCCCC"),
    "pyridine": lambda m: add_aromatic_ring(m, "NCCCCC"),
    "furan": lambda m: add_aromatic_ring(m, "oCCCC"),
    "pyrrole": lambda m: add_aromatic_ring(m, "hCCCC"),
    "naphthalene": add_naphthalene,
    "cyclopentane": lambda m: add_aliphatic_ring(m, 5),
    "cyclohexane": lambda m: add_aliphatic_ring(m, 6),
    "cycloheptane": lambda m: add_aliphatic_ring(m, 7),
    "cyclooctane": lambda m: add_aliphatic_ring(m, 8),
}

NORMAL_RINGS = [
    ("benzene", 0.34), ("pyridine", 0.12), ("furan", 0.07), ("pyrrole", 0.07),
    ("cyclohexane", 0.18), ("cyclopentane", 0.12), ("naphthalene", 0.10),
]


def attach_group(mol, site, name):
    def grow(parent, element, order=1, aromatic=False, explicit_h=None):
        idx = mol.add_atom(Atom(element, explicit_h=explicit_h))
        mol.add_bond(parent, idx, order, aromatic)
        return idx

    if name in ("F", "Cl", "Br"):
        grow(site, name)
    elif name == "methyl":
        grow(site, "C")
    elif name == "ethyl":
        grow(grow(site, "C"), "C")
    elif name == "propyl":
        grow(grow(grow(site, "C"), "C"), "C")
    elif name == "isopropyl":
        c = grow(site, "C")
        grow(c, "C")
        grow(c, "C")
    elif name == "hydroxyl":
        grow(site, "O")
    elif name == "methoxy":
        grow(grow(site, "O"), "C")
    elif name == "amino":
        grow(site, "N")
    elif name == "dimethylamino":
        n = grow(site, "N")
        grow(n, "C")
        grow(n, "C")
    elif name == "cyano":
        grow(grow(site, "C"), "N", order=3)
    elif name == "trifluoromethyl":
        c = grow(site, "C")
        for _ in range(3):
            grow(c, "F")
    elif name == "aldehyde":
        grow(grow(site, "C"), "O", order=2)
    elif name == "acid":
        c = grow(site, "C")
        grow(c, "O", order=2)
        grow(c, "O")
    elif name == "amide":
        c = grow(site, "C")
        grow(c, "O", order=2)
        grow(c, "N")
    elif name == "acetyl":
        c = grow(site, "C")
        grow(c, "O", order=2)
        grow(c, "C")
    elif name == "hydroxyethyl":
        grow(grow(grow(site, "C"), "C"), "O")
    else:
        raise ValueError(name)


# (group, polar-pack weight, lipophilic-pack weight)
GROUPS = [
    ("methyl", 0.06, 0.16), ("ethyl", 0.03, 0.12), ("propyl", 0.02, 0.10),
    ("isopropyl", 0.02, 0.06), ("F", 0.04, 0.09), ("Cl", 0.03, 0.14),
    ("Br", 0.01, 0.08), ("trifluoromethyl", 0.01, 0.08),
    ("hydroxyl", 0.15, 0.02), ("methoxy", 0.09, 0.04), ("amino", 0.11, 0.01),
    ("dimethylamino", 0.04, 0.02), ("cyano", 0.08, 0.02),
    ("aldehyde", 0.05, 0.01), ("acid", 0.10, 0.01), ("amide", 0.11, 0.005),
    ("acetyl", 0.06, 0.015), ("hydroxyethyl", 0.05, 0.01),
]


def weighted_choice(rng, pairs):
    total = sum(w for _, w in pairs)
    x = rng.random() * total
    for item, w in pairs:
        x -= w
        if x <= 0:
            return item
    return pairs[-1][0]


def build_molecule(rng, ring_class):
    mol = Mol()
    sites = []

    if ring_class == "seven":
        ring_kinds = ["cycloheptane"]
    elif ring_class == "eight":
        ring_kinds = ["cyclooctane"]
    elif rng.random() < 0.12:
        ring_kinds = []  # open-chain molecule
    else:
        ring_kinds = [weighted_choice(rng, NORMAL_RINGS)]
    extra = rng.random()
    if ring_kinds and extra < 0.30:
        ring_kinds.append(weighted_choice(rng, NORMAL_RINGS))
        if extra < 0.05:
            ring_kinds.append(weighted_choice(rng, NORMAL_RINGS))

    if not ring_kinds:
        length = rng.randint(5, 10)
        chain = [mol.add_atom(Atom("C")) for _ in range(length)]
        for a, b in zip(chain, chain[1:]):
            mol.add_bond(a, b, 1)
        sites = list(chain)
    else:
        for k, kind in enumerate(ring_kinds):
            ring_sites = RING_BUILDERS[kind](mol)
            rng.shuffle(ring_sites)
            if k == 0:
                sites = ring_sites
            else:
                # join to the existing scaffold through a short alkyl linker
                if not sites:
                    return None
                a = sites.pop(rng.randrange(len(sites)))
                b = ring_sites.pop(rng.randrange(len(ring_sites)))
                prev = a
                for _ in range(rng.randint(1, 3)):
                    c = mol.add_atom(Atom("C"))
                    mol.add_bond(prev, c, 1)
                    prev = c
                mol.add_bond(prev, b, 1)
                sites.extend(ring_sites)

    bias = rng.random()  # 0 = polar pack, 1 = lipophilic pack
    weights = [(g, (1.0 - bias) * wp + bias * wl) for g, wp, wl in GROUPS]
    n_dec = rng.randint(0, min(5, len(sites)))
    for _ in range(n_dec):
        site = sites.pop(rng.randrange(len(sites)))
        attach_group(mol, site, weighted_choice(rng, weights))

    if not 5 <= len(mol.atoms) <= MAX_HEAVY_ATOMS:
        return None
    mol.finalize_hydrogens()
    return mol


def generate_pool(rng, ring_class, count):
    pool = {}
    attempts = 0
    while len(pool) < count and attempts < count * 60:
        attempts += 1
        mol = build_molecule(rng, ring_class)
        if mol is None:
            continue
        smi = write_smiles(mol)
        if smi in pool:
            continue
        # writer/parser self-consistency: same composition and hydrogens
        back = parse_smiles(smi)
        assert sorted((a.element, a.h) for a in back.atoms) == sorted(
            (a.element, a.h) for a in mol.atoms
        ), smi
        pool[smi] = crippen_logp(mol)
    return list(pool.items())


def moment_match(rng, pools, counts, mean_target, std_target, iters=500_000):
    """Select counts[k] entries from pools[k] minimizing logP moment error."""
    chosen = [rng.sample(range(len(pool)), k) for pool, k in zip(pools, counts)]
    values = [[pools[c][i][1] for i in idxs] for c, idxs in enumerate(chosen)]
    n = sum(counts)
    s = sum(sum(v) for v in values)
    s2 = sum(sum(x * x for x in v) for v in values)

    def loss(s_, s2_):
        mean = s_ / n
        var = max(0.0, s2_ / n - mean * mean)
        std = math.sqrt(var)
        return ((mean - mean_target) / mean_target) ** 2 + (
            (std - std_target) / std_target
        ) ** 2

    cur = loss(s, s2)
    class_pick = [c for c, k in enumerate(counts) for _ in range(k)]
    for _ in range(iters):
        if cur < 1e-10:
            break
        c = class_pick[rng.randrange(n)]
        pool = pools[c]
        slot = rng.randrange(counts[c])
        cand = rng.randrange(len(pool))
        if cand in chosen[c]:
            continue
        old = values[c][slot]
        new = pool[cand][1]
        ns, ns2 = s - old + new, s2 - old * old + new * new
        nl = loss(ns, ns2)
        if nl < cur:
            in_set = set(chosen[c])
            in_set.discard(chosen[c][slot])
            if cand in in_set:
                continue
            chosen[c][slot] = cand
            values[c][slot] = new
            s, s2, cur = ns, ns2, nl
    return chosen, s / n, math.sqrt(max(0.0, s2 / n - (s / n) ** 2))


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else "data/zinc1k.smi"
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 20260815
    rng = random.Random(seed)

    print("generating candidate pools ...", flush=True)
    pool_normal = generate_pool(rng, "normal", 16000)
    pool_seven = generate_pool(rng, "seven", 600)
    pool_eight = generate_pool(rng, "eight", 250)
    print(
        f"pool sizes: normal={len(pool_normal)} seven={len(pool_seven)} "
        f"eight={len(pool_eight)}"
    )

    chosen, mean, std = moment_match(
        rng,
        [pool_normal, pool_seven, pool_eight],
        [969, 24, 7],
        mean_target=2.47,
        std_target=1.42,
    )
    print(f"selected logP mean={mean:.4f} std={std:.4f}")

    lines = []
    for pool, idxs in zip([pool_normal, pool_seven, pool_eight], chosen):
        lines.extend(pool[i][0] for i in idxs)
    order = rng.sample(range(len(lines)), len(lines))
    lines = [lines[i] for i in order]
    assert len(lines) == 1000 and len(set(lines)) == 1000

    with open(out_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main()
