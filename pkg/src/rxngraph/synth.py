"""Synthetic, fully atom-mapped reaction corpora.

Reactions are generated from building blocks whose reactive atoms sit at
fixed positions at the start of their SMILES (for instance atom 0 of an amine
``N...`` is the nitrogen).  A reaction family is a set of edits over those
positions.  Products are computed by applying the edits, so every record is
balanced on its mapped atoms and carries a correct mapping by construction.

Corpora:

* ``load_fixture``: the small illustrative fixtures shipped in ``data/``.
* ``desk_records``: about 60 reactions spanning ten reaction families.
* ``crossed_records``: a corpus whose test reactions cross amine and acyl
  types seen only separately in training, plus template distractors.
* ``throughput_records``: a large sparse graph for latency measurements.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from importlib import resources
from typing import Iterable, Iterator, Sequence

from .chem.molecule import Molecule, check_valence, split_fragments
from .chem.reaction import ReactionRecord
from .chem.smiles import parse_molecule, parse_smiles
from .kgraph import read_records

A, B = 0, 1


@dataclass(frozen=True)
class Family:
    """Edits over reactive positions; ``(side, atom)`` addresses a block atom."""

    name: str
    first: str
    second: str
    form: tuple[tuple[tuple[int, int], tuple[int, int], int], ...] = ()
    change: tuple[tuple[tuple[int, int], tuple[int, int], int], ...] = ()
    hydrogens: tuple[tuple[tuple[int, int], int], ...] = ()
    lost: tuple[tuple[int, int], ...] = ()
    agents: tuple[tuple[str, str], ...] = ()


FAMILIES = {
    f.name: f
    for f in (
        Family("n_alkylation", "amine", "alkyl_bromide", form=(((A, 0), (B, 1), 1),),
               hydrogens=(((A, 0), -1),), lost=((B, 0),),
               agents=(("CCN(CC)CC", "reagent"), ("CN(C)C=O", "solvent"))),
        Family("williamson", "alcohol", "alkyl_bromide", form=(((A, 0), (B, 1), 1),),
               hydrogens=(((A, 0), -1),), lost=((B, 0),),
               agents=(("[NaH]", "reagent"), ("C1CCOC1", "solvent"))),
        Family("amide", "amine", "acyl_chloride", form=(((A, 0), (B, 1), 1),),
               hydrogens=(((A, 0), -1),), lost=((B, 0),),
               agents=(("CCN(CC)CC", "reagent"), ("ClCCl", "solvent"))),
        Family("esterification", "alcohol", "acid", form=(((A, 0), (B, 1), 1),),
               hydrogens=(((A, 0), -1),), lost=((B, 0),),
               agents=(("OS(=O)(=O)O", "catalyst"), ("Cc1ccccc1", "solvent"))),
        Family("suzuki", "aryl_bromide", "boronic_acid", form=(((A, 1), (B, 3), 1),),
               lost=((A, 0), (B, 1)),
               agents=(("[Pd]", "catalyst"), ("C1COCCO1", "solvent"))),
        Family("imine", "primary_amine", "aldehyde", form=(((A, 0), (B, 1), 2),),
               hydrogens=(((A, 0), -2),), lost=((B, 0),),
               agents=(("CO", "solvent"),)),
        Family("hx_addition", "alkene", "hydrogen_halide", form=(((A, 1), (B, 0), 1),),
               change=(((A, 0), (A, 1), 1),), hydrogens=(((A, 0), 1), ((B, 0), -1))),
        Family("buchwald", "amine", "aryl_bromide", form=(((A, 0), (B, 1), 1),),
               hydrogens=(((A, 0), -1),), lost=((B, 0),),
               agents=(("[Pd]", "catalyst"), ("Cc1ccccc1", "solvent"))),
        Family("sonogashira", "alkyne", "aryl_bromide", form=(((A, 0), (B, 1), 1),),
               hydrogens=(((A, 0), -1),), lost=((B, 0),),
               agents=(("[Pd]", "catalyst"), ("[Cu]I", "catalyst"), ("CCN(CC)CC", "solvent"))),
        Family("aza_michael", "amine", "acceptor", form=(((A, 0), (B, 0), 1),),
               change=(((B, 0), (B, 1), 1),), hydrogens=(((A, 0), -1), ((B, 1), 1))),
    )
}


def _mapped(mol: Molecule, offset: int) -> Molecule:
    return Molecule(tuple(replace(a, map_index=offset + i + 1) for i, a in enumerate(mol.atoms)), mol.bonds)


def combine(first: Molecule, second: Molecule, family: Family) -> tuple[Molecule, Molecule, Molecule]:
    """Mapped reactants and the principal product of applying ``family``."""
    ra = _mapped(first, 0)
    rb = _mapped(second, len(first.atoms))
    off = (0, len(first.atoms))
    idx = lambda ref: off[ref[0]] + ref[1]
    atoms = list(ra.atoms) + list(rb.atoms)
    bonds = {(a, b): o for a, b, o in ra.bonds}
    bonds.update({(a + off[1], b + off[1]): o for a, b, o in rb.bonds})
    for p, q, order in family.form + family.change:
        i, j = sorted((idx(p), idx(q)))
        bonds[(i, j)] = order
    for ref, delta in family.hydrogens:
        i = idx(ref)
        atoms[i] = replace(atoms[i], explicit_h=atoms[i].explicit_h + delta)
    lost = {idx(ref) for ref in family.lost}
    keep = [i for i in range(len(atoms)) if i not in lost]
    where = {old: new for new, old in enumerate(keep)}
    new_bonds = [(where[a], where[b], o) for (a, b), o in bonds.items() if a in where and b in where]
    frags = split_fragments([atoms[i] for i in keep], new_bonds)
    product = min(frags, key=lambda m: (-len(m.atoms), tuple(a.map_index for a in m.atoms)))
    for i, atom in enumerate(product.atoms):
        check_valence(atom, [o for _, o in product.adjacency[i]])
    return ra, rb, product


def make_record(rid: str, year: int, first: Molecule, second: Molecule, family: Family,
                agents: Sequence[tuple[Molecule, str]] | None = None) -> ReactionRecord:
    ra, rb, product = combine(first, second, family)
    if agents is None:
        agents = [(m, role) for smi, role in family.agents for m in parse_smiles(smi)]
    return ReactionRecord(rid, year, (ra, rb), (product,), tuple(agents))


# -- building blocks ---------------------------------------------------------

ALKYL = ("C", "CC", "CCC", "C(C)C", "CCCC", "CC(C)C", "CCCCC", "C2CCCC2", "C2CCCCC2",
         "CC2CC2", "CCOC", "CCc2ccccc2", "CC(F)(F)F", "CCC#N")
ARYL = ("c2ccccc2", "c2ccc(C)cc2", "c2ccc(OC)cc2", "c2ccc(F)cc2", "c2ccc(Cl)cc2", "c2cccc(C)c2",
        "c2ccccc2C", "c2ccc(C(F)(F)F)cc2", "c2ccc(C#N)cc2", "c2ccncc2", "c2cccnc2",
        "c2ccc3ccccc3c2", "c2ccc(C(=O)OC)cc2", "c2cccs2")


def block_smiles(kind: str, r: str) -> str:
    """SMILES of a building block with its reactive atoms first."""
    heads = {
        "amine": "N", "primary_amine": "N", "alcohol": "O", "alkyl_bromide": "BrC",
        "acyl_chloride": "ClC(=O)", "acid": "OC(=O)", "aryl_bromide": "Br",
        "boronic_acid": "OB(O)", "aldehyde": "O=C", "alkene": "C=C", "alkyne": "C#C",
    }
    return heads[kind] + r


ACCEPTORS = ("C=CC(=O)OC", "C=CC(=O)OCC", "C=CC#N", "C=CC(=O)C", "C=CC(=O)N(C)C")
SECONDARY_AMINES = ("N2CCCCC2", "N2CCOCC2", "N2CCCC2", "N(C)C", "N(C)CC", "N(C)Cc2ccccc2")
HYDROGEN_HALIDES = ("Br", "Cl")


def desk_blocks() -> dict[str, list[str]]:
    """Building blocks of the desk corpus, per kind."""
    return {
        "amine": [block_smiles("amine", r) for r in ALKYL[:6] + ARYL[:4]] + list(SECONDARY_AMINES),
        "primary_amine": [block_smiles("amine", r) for r in ALKYL[:6] + ARYL[:4]],
        "alcohol": [block_smiles("alcohol", r) for r in ALKYL[:6] + ARYL[:4]],
        "alkyl_bromide": [block_smiles("alkyl_bromide", r) for r in ALKYL[:5] + ARYL[:3]],
        "acyl_chloride": [block_smiles("acyl_chloride", r) for r in ALKYL[:5] + ARYL[:5]],
        "acid": [block_smiles("acid", r) for r in ALKYL[:5] + ARYL[:5]],
        "aryl_bromide": [block_smiles("aryl_bromide", r) for r in ARYL],
        "boronic_acid": [block_smiles("boronic_acid", r) for r in ARYL],
        "aldehyde": [block_smiles("aldehyde", r) for r in ALKYL[:4] + ARYL[:6]],
        "alkene": [block_smiles("alkene", r) for r in ALKYL[:4] + ARYL[:6]],
        "alkyne": [block_smiles("alkyne", r) for r in ALKYL[:4] + ARYL[:6]],
        "acceptor": list(ACCEPTORS),
        "hydrogen_halide": list(HYDROGEN_HALIDES),
    }


def _pick_pairs(rng: random.Random, firsts: Sequence[str], seconds: Sequence[str], n: int,
                exclude: set | None = None) -> list[tuple[str, str]]:
    pairs = [(a, b) for a in firsts for b in seconds if a != b]
    rng.shuffle(pairs)
    out = []
    for p in pairs:
        if exclude is not None and p in exclude:
            continue
        out.append(p)
        if len(out) == n:
            break
    return out


def desk_records(seed: int = 7, per_family: int = 6) -> list[ReactionRecord]:
    """Deterministic mapped corpus of ``10 * per_family`` reactions."""
    rng = random.Random(seed)
    blocks = desk_blocks()
    cache: dict[str, Molecule] = {}
    mol = lambda s: cache.setdefault(s, parse_molecule(s))
    records = []
    for name in sorted(FAMILIES):
        fam = FAMILIES[name]
        for n, (a, b) in enumerate(_pick_pairs(rng, blocks[fam.first], blocks[fam.second], per_family)):
            year = 2000 + rng.randrange(21)
            records.append(make_record(f"{name}-{n + 1:02d}", year, mol(a), mol(b), fam))
    return records


# -- crossed-type corpus -------------------------------------------------

ARYL_AMINES = ("Nc2ccccc2", "Nc2ccc(C)cc2", "Nc2ccc(OC)cc2", "Nc2ccc(F)cc2", "Nc2ccc(Cl)cc2",
               "Nc2cccc(C)c2")
ALIPHATIC_AMINES = ("NC", "NCC", "NCCC", "NC(C)C", "NCc2ccccc2", "NC2CCCCC2")
ALIPHATIC_ACYL = ("ClC(=O)C", "ClC(=O)CC", "ClC(=O)C(C)C", "ClC(=O)CCC")
AROYL = ("ClC(=O)c2ccccc2", "ClC(=O)c2ccc(OC)cc2", "ClC(=O)c2ccc(Cl)cc2", "ClC(=O)c2ccc(C)cc2")
# aroyl chlorides that also carry a benzylic bromide: a second, distractor site
BROMOMETHYL_AROYL = ("ClC(=O)c2ccc(CBr)cc2",)
BENZYL_BROMIDES = ("BrCc2ccccc2", "BrCc2ccc(C)cc2")


def crossed_records(seed: int = 11) -> tuple[list[ReactionRecord], int]:
    """(records, cutoff year).

    Training (before the cutoff) pairs aromatic amines with aliphatic acyl
    chlorides, and aliphatic amines with both acyl types, plus N-benzylation of
    aromatic amines.  Test records (at or after the cutoff) include aromatic
    amine plus aroyl chloride amides, which no template with radius 1
    explains, and easy amides of known type.
    """
    rng = random.Random(seed)
    cache: dict[str, Molecule] = {}
    mol = lambda s: cache.setdefault(s, parse_molecule(s))
    amide = FAMILIES["amide"]
    alkyl = FAMILIES["n_alkylation"]
    train, test = [], []
    n = 0

    def add(bucket, a, b, fam, year):
        nonlocal n
        n += 1
        bucket.append(make_record(f"X{n:03d}", year, mol(a), mol(b), fam))

    for a in ARYL_AMINES[:4]:
        for b in ALIPHATIC_ACYL[:3]:
            add(train, a, b, amide, 2005 + rng.randrange(8))
    for a in ALIPHATIC_AMINES:
        for b in ALIPHATIC_ACYL[:3]:
            add(train, a, b, amide, 2005 + rng.randrange(8))
        for b in AROYL + BROMOMETHYL_AROYL:
            add(train, a, b, amide, 2005 + rng.randrange(8))
    for a in ARYL_AMINES[:4]:
        for b in BENZYL_BROMIDES:
            add(train, a, b, alkyl, 2005 + rng.randrange(8))
    # novel type: aromatic amine + aroyl chloride
    for a in ARYL_AMINES[:4]:
        for b in AROYL + BROMOMETHYL_AROYL:
            add(test, a, b, amide, 2014 + rng.randrange(4))
    # easy: new aromatic amines with known aliphatic acyl chlorides
    for a in ARYL_AMINES[4:]:
        for b in ALIPHATIC_ACYL[:2]:
            add(test, a, b, amide, 2014 + rng.randrange(4))
    return train + test, 2014


# -- throughput corpus ----------------------------------------------------

_SUBS = ("C", "CC", "OC", "F", "Cl", "C(F)(F)F", "C#N", "OCC", "C(C)C", "N(C)C", "SC", "C(=O)C",
         "C(=O)OC", "OC(F)(F)F", "C3CC3", "CCC", "OCCC", "C(C)(C)C", "S(C)(=O)=O", "c3ccccc3")
_ARYL_MONO = ("c2ccc({0})cc2", "c2cc({0})ccc2", "c2c({0})cccc2", "c2ccc({0})nc2")
_ARYL_DI = ("c2cc({0})c({1})cc2", "c2cc({0})cc({1})c2")
_CHAINS = ("C", "CC", "CCC", "CCCC", "CC(C)", "CCC(C)")
_TAILS = ("", "OC", "F", "C#N", "c3ccccc3", "C3CC3", "OCC", "N(C)C", "SC", "C(F)(F)F",
          "c3ccc(F)cc3", "c3ccccn3", "C(=O)OC", "OC(C)C", "C3CCCC3")


def throughput_r_groups() -> tuple[list[str], list[str]]:
    aryl = [p.format(s) for p in _ARYL_MONO for s in _SUBS]
    aryl += [p.format(s, t) for p in _ARYL_DI for s in _SUBS for t in _SUBS]
    alkyl = [c + t for c in _CHAINS for t in _TAILS]
    return sorted(set(aryl)), sorted(set(alkyl))


def throughput_records(n_reactions: int = 50_000, seed: int = 3) -> Iterator[ReactionRecord]:
    """Binary reactions with a heavy-tailed reactant degree distribution.

    Every record has two reactants, so ``n_reactions`` records give
    ``2 * n_reactions`` reactant edges.
    """
    rng = random.Random(seed)
    aryl, alkyl = throughput_r_groups()
    rng.shuffle(aryl)
    rng.shuffle(alkyl)
    kinds = {
        "amine": alkyl + aryl, "primary_amine": alkyl + aryl, "alcohol": alkyl + aryl,
        "alkyl_bromide": alkyl + aryl, "acyl_chloride": alkyl + aryl, "acid": alkyl + aryl,
        "aryl_bromide": aryl, "boronic_acid": aryl, "aldehyde": alkyl + aryl,
        "alkene": alkyl + aryl, "alkyne": alkyl + aryl,
    }
    pools = {}
    for kind, rs in kinds.items():
        order = list(rs)
        rng.shuffle(order)
        pools[kind] = [block_smiles(kind, r) for r in order]
    pools["amine"] = list(SECONDARY_AMINES) + pools["amine"]
    pools["acceptor"] = list(ACCEPTORS)
    pools["hydrogen_halide"] = list(HYDROGEN_HALIDES)
    cum = {}
    for kind, items in pools.items():
        w, total = [], 0.0
        for i in range(len(items)):
            total += 1.0 / (i + 20) ** 1.1
            w.append(total)
        cum[kind] = w
    mols: dict[str, Molecule] = {}
    mapped: dict[tuple[str, int], Molecule] = {}
    seen = set()
    names = sorted(FAMILIES)
    count = 0
    while count < n_reactions:
        fam = FAMILIES[names[rng.randrange(len(names))]]
        a = rng.choices(pools[fam.first], cum_weights=cum[fam.first])[0]
        b = rng.choices(pools[fam.second], cum_weights=cum[fam.second])[0]
        if a == b or (fam.name, a, b) in seen:
            continue
        seen.add((fam.name, a, b))
        ma = mols.get(a) or mols.setdefault(a, parse_molecule(a))
        mb = mols.get(b) or mols.setdefault(b, parse_molecule(b))
        count += 1
        rec = make_record(f"T{count:06d}", 1990 + rng.randrange(30), ma, mb, fam, agents=())
        # share mapped reactant objects so their cached invariants are reused
        ra = mapped.setdefault((a, 0), rec.reactants[0])
        rb = mapped.setdefault((b, len(ma.atoms)), rec.reactants[1])
        yield ReactionRecord(rec.id, rec.year, (ra, rb), rec.products, rec.agents)


# -- shipped fixtures ------------------------------------------------------

def data_path(name: str):
    return resources.files("rxngraph") / "data" / name


def load_fixture(name: str) -> list[ReactionRecord]:
    """Records of a shipped TSV fixture such as ``amide_chain.tsv`` or ``desk_corpus.tsv``."""
    text = data_path(name).read_text(encoding="utf-8")
    out = []
    for no, item in read_records(text.splitlines()):
        if isinstance(item, Exception):
            raise item
        out.append(item)
    return out


def write_records(records: Iterable[ReactionRecord], header: str = "") -> str:
    lines = [f"# {line}" for line in header.splitlines()]
    lines.extend(r.to_line() for r in records)
    return "\n".join(lines) + "\n"


__all__ = [
    "FAMILIES", "Family", "combine", "crossed_records", "data_path", "desk_blocks", "desk_records",
    "load_fixture", "make_record", "throughput_r_groups", "throughput_records", "write_records",
]
