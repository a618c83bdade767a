"""Molecular and reaction data model."""

from .molecule import (
    AROMATIC,
    DOUBLE,
    ELEMENTS,
    SINGLE,
    TRIPLE,
    Atom,
    Molecule,
    check_valence,
    split_fragments,
)
from .reaction import (
    AGENT_ROLES,
    ROLES,
    ReactionCenter,
    ReactionRecord,
    changed_map_indices,
    parse_reaction,
    reaction_center,
)
from .smiles import parse_molecule, parse_smiles, write_smiles


def canonical_key(mol: Molecule) -> str:
    return mol.canonical_key


__all__ = [
    "AGENT_ROLES", "AROMATIC", "DOUBLE", "ELEMENTS", "ROLES", "SINGLE", "TRIPLE",
    "Atom", "Molecule", "ReactionCenter", "ReactionRecord", "canonical_key",
    "changed_map_indices", "check_valence", "parse_molecule", "parse_reaction",
    "parse_smiles", "reaction_center", "split_fragments", "write_smiles",
]
