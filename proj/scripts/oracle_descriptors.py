#!/usr/bin/env python3
"""Reference descriptor oracle, independent of the C++ toolkit.

Implements the Wildman-Crippen logP atom-contribution method and an
Ertl-style synthetic-accessibility score over a deliberately small SMILES
dialect (neutral C/N/O/F/Cl/Br molecules, aromatic rings written in
lowercase, no stereo, no charges). Used to precompute oracle values for the
descriptor-fidelity fixture; shares no code with the C++ implementation.

Usage:
    oracle_descriptors.py INPUT.smi OUTPUT.csv
"""

import csv
import hashlib
import math
import sys

STD_VALENCE = {"C": 4, "N": 3, "O": 2, "F": 1, "Cl": 1, "Br": 1}


class Atom:
    __slots__ = ("element", "aromatic", "h", "explicit_h")

    def __init__(self, element, aromatic=False, explicit_h=None):
        self.element = element
        self.aromatic = aromatic
        self.h = 0
        self.explicit_h = explicit_h  # from [nH]; None means derive


class Mol:
    def __init__(self):
        self.atoms = []
        self.bonds = []  # (a, b, order, aromatic)
        self.adj = []

    def add_atom(self, atom):
        self.atoms.append(atom)
        self.adj.append([])
        return len(self.atoms) - 1

    def add_bond(self, a, b, order=1, aromatic=False):
        idx = len(self.bonds)
        self.bonds.append((a, b, order, aromatic))
        self.adj[a].append((b, idx))
        self.adj[b].append((a, idx))

    def neighbors(self, i):
        for j, bidx in self.adj[i]:
            a, b, order, arom = self.bonds[bidx]
            yield j, order, arom

    def finalize_hydrogens(self):
        for i, atom in enumerate(self.atoms):
            if atom.explicit_h is not None:
                atom.h = atom.explicit_h
                continue
            if atom.aromatic:
                if atom.element == "C":
                    atom.h = 1 if len(self.adj[i]) == 2 else 0
                else:
                    atom.h = 0  # bare aromatic n/o carry no hydrogen
                continue
            used = sum(order for _, order, _ in self.neighbors(i))
            atom.h = max(0, STD_VALENCE[atom.element] - used)

    def ring_flags(self):
        """Atom/bond in-ring flags via bridge detection (Tarjan)."""
        n = len(self.atoms)
        disc = [0] * n
        low = [0] * n
        in_ring_bond = [True] * len(self.bonds)
        timer = [1]

        def dfs(u, parent_edge):
            disc[u] = low[u] = timer[0]
            timer[0] += 1
            for v, bidx in self.adj[u]:
                if bidx == parent_edge:
                    continue
                if disc[v]:
                    low[u] = min(low[u], disc[v])
                else:
                    dfs(v, bidx)
                    low[u] = min(low[u], low[v])
                    if low[v] > disc[u]:
                        in_ring_bond[bidx] = False

        for s in range(n):
            if not disc[s]:
                dfs(s, -1)
        in_ring_atom = [False] * n
        for bidx, (a, b, _, _) in enumerate(self.bonds):
            if in_ring_bond[bidx]:
                in_ring_atom[a] = True
                in_ring_atom[b] = True
        return in_ring_atom, in_ring_bond

    def smallest_ring_through_edges(self):
        """Smallest cycle length through each ring bond (BFS)."""
        sizes = []
        _, ring_bond = self.ring_flags()
        for bidx, (a, b, _, _) in enumerate(self.bonds):
            if not ring_bond[bidx]:
                continue
            # shortest a..b path avoiding this bond
            import collections

            q = collections.deque([(a, 0)])
            seen = {a}
            dist = None
            while q:
                u, d = q.popleft()
                if u == b:
                    dist = d
                    break
                for v, eidx in self.adj[u]:
                    if eidx == bidx or v in seen:
                        continue
                    seen.add(v)
                    q.append((v, d + 1))
            if dist is not None:
                sizes.append(dist + 1)
        return sizes


def parse_smiles(text):
    mol = Mol()
    prev = None
    pending_order = 1
    pending_aromatic = False
    stack = []
    ring_open = {}
    i = 0

    def attach(idx):
        nonlocal prev, pending_order, pending_aromatic
        if prev is not None:
            a_arom = mol.atoms[prev].aromatic and mol.atoms[idx].aromatic
            aromatic = pending_aromatic or (a_arom and pending_order == 1 and not explicit_single[0])
            mol.add_bond(prev, idx, 1 if aromatic else pending_order, aromatic)
        prev = idx
        pending_order = 1
        pending_aromatic = False
        explicit_single[0] = False

    explicit_single = [False]

    while i < len(text):
        ch = text[i]
        if ch == "(":
            stack.append(prev)
            i += 1
        elif ch == ")":
            prev = stack.pop()
            i += 1
        elif ch == "-":
            pending_order = 1
            explicit_single[0] = True
            i += 1
        elif ch == "=":
            pending_order = 2
            i += 1
        elif ch == "#":
            pending_order = 3
            i += 1
        elif ch == ":":
            pending_aromatic = True
            i += 1
        elif ch.isdigit():
            ring = int(ch)
            if ring in ring_open:
                other, order, arom_flag = ring_open.pop(ring)
                both_arom = mol.atoms[other].aromatic and mol.atoms[prev].aromatic
                use_arom = arom_flag or pending_aromatic or (both_arom and order == 1 and pending_order == 1)
                use_order = max(order, pending_order)
                mol.add_bond(other, prev, 1 if use_arom else use_order, use_arom)
            else:
                ring_open[ring] = (prev, pending_order, pending_aromatic)
            pending_order = 1
            pending_aromatic = False
            i += 1
        elif ch == "[":
            j = text.index("]", i)
            token = text[i + 1 : j]
            if token == "nH":
                idx = mol.add_atom(Atom("N", aromatic=True, explicit_h=1))
            else:
                raise ValueError(f"unsupported bracket atom [{token}]")
            attach(idx)
            i = j + 1
        elif text[i : i + 2] in ("Cl", "Br"):
            idx = mol.add_atom(Atom(text[i : i + 2]))
            attach(idx)
            i += 2
        elif ch in "CNOF":
            idx = mol.add_atom(Atom(ch))
            attach(idx)
            i += 1
        elif ch in "cno":
            idx = mol.add_atom(Atom(ch.upper(), aromatic=True))
            attach(idx)
            i += 1
        else:
            raise ValueError(f"unsupported SMILES character {ch!r} in {text}")
    if ring_open:
        raise ValueError(f"unclosed ring bond in {text}")
    mol.finalize_hydrogens()
    return mol


def write_smiles(mol):
    """Canonical-enough writer for molecules built by the fixture generator."""
    n = len(mol.atoms)
    visited = [False] * n
    ring_digit = {}
    closures = {i: [] for i in range(n)}
    tree = [[] for _ in range(n)]
    used_bond = [False] * len(mol.bonds)
    next_digit = [1]

    order = []

    def dfs(u):
        visited[u] = True
        order.append(u)
        for v, bidx in mol.adj[u]:
            if used_bond[bidx]:
                continue
            used_bond[bidx] = True
            if visited[v]:
                d = next_digit[0]
                next_digit[0] += 1
                if d > 9:
                    raise ValueError("writer supports at most 9 ring closures")
                closures[u].append((d, bidx))
                closures[v].append((d, bidx))
                ring_digit[bidx] = d
            else:
                tree[u].append((v, bidx))
                dfs(v)

    def atom_text(i):
        a = mol.atoms[i]
        if a.aromatic:
            if a.element == "N" and a.explicit_h == 1:
                return "[nH]"
            return a.element.lower()
        return a.element

    def bond_text(bidx):
        a, b, order_, arom = mol.bonds[bidx]
        if arom:
            return ""
        return {1: "", 2: "=", 3: "#"}[order_]

    def emit(u):
        out = [atom_text(u)]
        for d, bidx in closures[u]:
            out.append(bond_text(bidx) + str(d))
        kids = tree[u]
        for k, (v, bidx) in enumerate(kids):
            inner = bond_text(bidx) + emit(v)
            if k + 1 < len(kids):
                out.append("(" + inner + ")")
            else:
                out.append(inner)
        return "".join(out)

    if n == 0:
        raise ValueError("empty molecule")
    dfs(0)
    if not all(visited):
        raise ValueError("disconnected molecule")
    return emit(0)


# --- Wildman-Crippen logP ----------------------------------------------------

CRIPPEN = {
    "C1": 0.1441, "C2": 0.0, "C3": -0.2035, "C4": -0.2051, "C5": -0.2783,
    "C6": 0.1551, "C7": 0.0017, "C8": 0.08452, "C9": -0.1444, "C10": -0.0516,
    "C11": 0.1193, "C12": -0.0967, "C13": -0.5443, "C14": 0.0, "C15": 0.2450,
    "C16": 0.1980, "C18": 0.1581, "C19": 0.2955, "C20": 0.2713, "C21": 0.1360,
    "C22": 0.4619, "C23": 0.5437, "C24": 0.1893, "C25": -0.8186, "C26": 0.2640,
    "C27": 0.2148, "CS": 0.08129,
    "H1": 0.1230, "H2": -0.2677, "H3": 0.2142, "H4": 0.2980, "HS": 0.1125,
    "N1": -1.0190, "N2": -0.7096, "N3": -1.0270, "N4": -0.5188, "N5": 0.08387,
    "N6": 0.1836, "N7": -0.3187, "N8": -0.4458, "N9": 0.01508, "N10": -1.95,
    "N11": -0.3239, "N12": -1.119, "N13": -0.3396, "N14": 0.2887, "NS": -0.4806,
    "O1": 0.1552, "O2": -0.2893, "O3": -0.0684, "O4": -0.4195, "O5": 0.0335,
    "O6": -0.3339, "O7": -1.189, "O8": 0.1788, "O9": -0.1526, "O10": 0.1129,
    "O11": 0.4833, "O12": -1.326, "OS": -0.1188,
    "F": 0.4202, "Cl": 0.6895, "Br": 0.8456,
}


def _classify_carbon(mol, i, in_ring):
    a = mol.atoms[i]
    nbrs = list(mol.neighbors(i))
    elems = [mol.atoms[j].element for j, _, _ in nbrs]
    aroms = [mol.atoms[j].aromatic for j, _, _ in nbrs]

    if a.aromatic:
        # aromatic carbon classes, in published order
        exo_double = any(o == 2 and not arom for _, o, arom in nbrs)
        if exo_double:
            return "C25"
        halogen = {"F": "C14", "Cl": "C15", "Br": "C16"}
        for j, o, arom in nbrs:
            if not mol.atoms[j].aromatic and mol.atoms[j].element in halogen:
                return halogen[mol.atoms[j].element]
        if a.h >= 1:
            return "C18"
        arom_bonds = sum(1 for _, _, arom in nbrs if arom)
        if arom_bonds >= 3:
            return "C19"
        for j, o, arom in nbrs:
            if arom:
                continue
            nb = mol.atoms[j]
            if nb.aromatic:
                return "C20"
            if nb.element == "C":
                return "C21"
            if nb.element == "N":
                return "C22"
            if nb.element == "O":
                return "C23"
        return "CS"

    orders = [o for _, o, _ in nbrs]
    if 3 in orders:
        return "C7"
    if 2 in orders:
        partners = [mol.atoms[j] for j, o, _ in nbrs if o == 2]
        if any(p.element != "C" for p in partners):
            return "C5"
        if any(p.aromatic for p in partners) or any(aroms):
            return "C26"
        return "C6"
    # sp3
    hetero = any(e in ("N", "O", "F", "Cl", "Br") and not ar
                 for e, ar in zip(elems, aroms))
    if hetero:
        return "C3" if a.h >= 2 else "C4"
    if any(aroms):
        if a.h >= 3:
            first = next(j for j, _, _ in nbrs)
            return "C8" if mol.atoms[first].element == "C" else "C9"
        if a.h == 2:
            return "C10"
        if a.h == 1:
            return "C11"
        return "C12"
    return "C1" if a.h >= 2 else "C2"


def _classify_nitrogen(mol, i):
    a = mol.atoms[i]
    nbrs = list(mol.neighbors(i))
    if a.aromatic:
        return "N11"
    orders = [o for _, o, _ in nbrs]
    if 3 in orders:
        return "N9"
    if 2 in orders:
        return "N5" if a.h >= 1 else "N6"
    arom_nb = any(mol.atoms[j].aromatic for j, _, _ in nbrs)
    if a.h >= 2:
        return "N3" if arom_nb else "N1"
    if a.h == 1:
        return "N4" if arom_nb else "N2"
    return "N8" if arom_nb else "N7"


def _classify_oxygen(mol, i):
    a = mol.atoms[i]
    nbrs = list(mol.neighbors(i))
    if a.aromatic:
        return "O1"
    if a.h >= 1:
        return "O2"
    doubles = [(j, o, ar) for j, o, ar in nbrs if o == 2]
    if doubles:
        j = doubles[0][0]
        c = mol.atoms[j]
        if c.element != "C":
            return "O5"
        if c.aromatic:
            return "O8"
        # carbonyl: inspect the carbon's other substituents
        subs = [mol.atoms[k] for k, o, _ in mol.neighbors(j) if k != i]
        carbonyl_h = c.h
        if carbonyl_h >= 2:
            return "O9"
        if carbonyl_h == 1:
            if any(s.aromatic for s in subs):
                return "O10"
            return "O9"
        if any(s.aromatic for s in subs):
            return "O10"
        non_c = [s for s in subs if s.element != "C"]
        if len(subs) >= 2 and len(non_c) == len(subs):
            return "O11"
        return "O9"
    if len(nbrs) == 2:
        if any(mol.atoms[j].aromatic for j, _, _ in nbrs):
            return "O4"
        return "O3"
    return "OS"


def _classify_hydrogen(mol, parent):
    p = mol.atoms[parent]
    if p.element == "C":
        return "H1"
    if p.element == "N":
        return "H3"
    if p.element == "O":
        nbrs = [(j, o, ar) for j, o, ar in mol.neighbors(parent)]
        if not nbrs:
            return "HS"
        j = nbrs[0][0]
        x = mol.atoms[j]
        if x.element == "N":
            return "H3"
        if x.element == "O":
            return "H4"
        if x.element == "C":
            if x.aromatic:
                return "H2"
            if any(o == 2 for _, o, _ in mol.neighbors(j)):
                return "H4"
            return "H2"
        return "H2"
    return "H2"


def crippen_logp(mol):
    total = 0.0
    for i, atom in enumerate(mol.atoms):
        if atom.element == "C":
            cls = _classify_carbon(mol, i, None)
        elif atom.element == "N":
            cls = _classify_nitrogen(mol, i)
        elif atom.element == "O":
            cls = _classify_oxygen(mol, i)
        elif atom.element in ("F", "Cl", "Br"):
            cls = atom.element
        else:
            raise ValueError(f"unsupported element {atom.element}")
        total += CRIPPEN[cls]
        if atom.h:
            total += atom.h * CRIPPEN[_classify_hydrogen(mol, i)]
    return total


# --- Ertl-style synthetic accessibility --------------------------------------

def environment_ids(mol, radius=2):
    in_ring, _ = mol.ring_flags()
    ids = []
    for i, a in enumerate(mol.atoms):
        seed = (a.element, len(mol.adj[i]), a.h, a.aromatic, in_ring[i])
        digest = hashlib.md5(repr(seed).encode()).hexdigest()[:16]
        ids.append(digest)
    for _ in range(radius):
        nxt = []
        for i in range(len(mol.atoms)):
            ring = sorted(
                ("a" if ar else str(o), ids[j]) for j, o, ar in mol.neighbors(i)
            )
            digest = hashlib.md5(repr((ids[i], ring)).encode()).hexdigest()[:16]
            nxt.append(digest)
        ids = nxt
    return ids


def build_frequency_table(mols, radius=2):
    counts = {}
    total = 0
    for mol in mols:
        for env in environment_ids(mol, radius):
            counts[env] = counts.get(env, 0) + 1
            total += 1
    return {env: math.log10(c / total) for env, c in counts.items()}


def sa_score(mol, table):
    floor = min(table.values()) - 1.0
    envs = environment_ids(mol)
    frag = sum(table.get(e, floor) for e in envs) / len(envs)
    n = len(mol.atoms)
    size_penalty = n ** 1.005 - n
    ring_sizes = mol.smallest_ring_through_edges()
    macro = math.log10(2.0) if any(s > 8 for s in ring_sizes) else 0.0
    raw = frag - size_penalty - macro  # fixture corpus has no bridges/spiro
    lo, hi = -4.0, 2.5
    score = 11.0 - (raw - lo + 1.0) * 9.0 / (hi - lo)
    if score > 8.0:
        score = 8.0 + math.log(score - 8.0 + 1.0)
    return min(10.0, max(1.0, score))


def spearman(xs, ys):
    def ranks(v):
        order = sorted(range(len(v)), key=lambda i: v[i])
        r = [0.0] * len(v)
        i = 0
        while i < len(order):
            j = i
            while j + 1 < len(order) and v[order[j + 1]] == v[order[i]]:
                j += 1
            mean_rank = (i + j) / 2.0 + 1.0
            for k in range(i, j + 1):
                r[order[k]] = mean_rank
            i = j + 1
        return r

    rx, ry = ranks(xs), ranks(ys)
    mx = sum(rx) / len(rx)
    my = sum(ry) / len(ry)
    num = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    den = math.sqrt(sum((a - mx) ** 2 for a in rx) * sum((b - my) ** 2 for b in ry))
    return num / den


def main():
    if len(sys.argv) != 3:
        raise SystemExit(__doc__)
    smiles = [line.strip() for line in open(sys.argv[1]) if line.strip()]
    mols = [parse_smiles(s) for s in smiles]
    table = build_frequency_table(mols)
    with open(sys.argv[2], "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["smiles", "oracle_logp", "oracle_sa"])
        for s, mol in zip(smiles, mols):
            out.writerow([s, f"{crippen_logp(mol):.6f}", f"{sa_score(mol, table):.6f}"])


if __name__ == "__main__":
    main()
