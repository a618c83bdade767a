"""Circular counted fingerprints, reaction-difference fingerprints and the
continuous Tanimoto score.

Feature identifiers are CRC-32 values (``zlib.crc32``) of little-endian
packed 32-bit integer tuples, so they are identical across runs and
platforms.  Collisions are accepted silently.
"""

from __future__ import annotations

import struct
import zlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .chem.molecule import ELEMENT_INDEX, HALOGENS, Molecule
from .chem.reaction import ReactionRecord
from .errors import RadiusTooLarge, VariantMismatch

STRUCTURAL, FUNCTIONAL = "structural", "functional"
VARIANTS = (STRUCTURAL, FUNCTIONAL)
MAX_RADIUS = 5


def _hash(values: Iterable[int]) -> int:
    vals = tuple(values)
    return zlib.crc32(struct.pack(f"<{len(vals)}i", *vals))


@dataclass(frozen=True)
class CountedFingerprint:
    """Sparse feature-id -> count vector; zero counts are never stored."""

    entries: Mapping[int, int] = field(default_factory=dict)
    variant: str = STRUCTURAL
    radius: int = 2

    def __post_init__(self):
        object.__setattr__(
            self, "entries", {k: v for k, v in sorted(self.entries.items()) if v != 0}
        )

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __getitem__(self, feature: int) -> int:
        return self.entries.get(feature, 0)

    def items(self):
        return self.entries.items()

    def __hash__(self):
        return hash((tuple(self.entries.items()), self.variant, self.radius))

    def _check(self, other: "CountedFingerprint") -> None:
        if (self.variant, self.radius) != (other.variant, other.radius):
            raise VariantMismatch(
                f"{self.variant}/r{self.radius} vs {other.variant}/r{other.radius}"
            )

    def __add__(self, other: "CountedFingerprint") -> "CountedFingerprint":
        self._check(other)
        out = Counter(self.entries)
        for k, v in other.entries.items():
            out[k] += v
        return CountedFingerprint(out, self.variant, self.radius)

    def __sub__(self, other: "CountedFingerprint") -> "CountedFingerprint":
        self._check(other)
        out = Counter(self.entries)
        for k, v in other.entries.items():
            out[k] -= v
        return CountedFingerprint(out, self.variant, self.radius)

    def to_golden(self) -> str:
        return "".join(f"{k}\t{v}\n" for k, v in self.entries.items())

    @classmethod
    def from_golden(cls, text: str, variant: str = STRUCTURAL, radius: int = 2):
        entries = {}
        for line in text.splitlines():
            if line.strip():
                k, v = line.split("\t")
                entries[int(k)] = int(v)
        return cls(entries, variant, radius)


def _structural_invariants(mol: Molecule) -> list[tuple[int, ...]]:
    ring = mol.ring_atoms
    return [
        (ELEMENT_INDEX[a.element], a.charge, a.explicit_h, mol.degree(i), int(i in ring))
        for i, a in enumerate(mol.atoms)
    ]


def _functional_invariants(mol: Molecule) -> list[tuple[int, ...]]:
    out = []
    for a in mol.atoms:
        donor = a.element in ("N", "O", "S") and a.explicit_h > 0
        acceptor = a.element in ("N", "O") and a.charge <= 0
        sign = (a.charge > 0) - (a.charge < 0)
        out.append((int(donor), int(acceptor), sign, int(a.aromatic), int(a.element in HALOGENS)))
    return out


def atom_environments(mol: Molecule, radius: int = 2, variant: str = STRUCTURAL) -> list[list[int]]:
    """Feature ids per iteration: ``result[r][atom]`` for r in 0..radius."""
    if radius > MAX_RADIUS:
        raise RadiusTooLarge(f"radius {radius} exceeds {MAX_RADIUS}")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if variant == STRUCTURAL:
        inv = _structural_invariants(mol)
    elif variant == FUNCTIONAL:
        inv = _functional_invariants(mol)
    else:
        raise ValueError(f"unknown fingerprint variant {variant!r}")
    ids = [_hash((0,) + t) for t in inv]
    layers = [ids]
    adj = mol.adjacency
    for r in range(1, radius + 1):
        prev = layers[-1]
        nxt = []
        for i in range(len(mol.atoms)):
            vals = [r, prev[i]]
            for order, fid in sorted((o, prev[j]) for j, o in adj[i]):
                vals.append(order)
                vals.append(fid)
            # crc32 output is unsigned; fold into the signed pack range
            nxt.append(_hash(v - (1 << 32) if v >= 1 << 31 else v for v in vals))
        layers.append(nxt)
    return layers


def molecule_fingerprint(
    mol: Molecule, radius: int = 2, variant: str = STRUCTURAL
) -> CountedFingerprint:
    counts = Counter()
    for layer in atom_environments(mol, radius, variant):
        counts.update(layer)
    return CountedFingerprint(counts, variant, radius)


def reaction_fingerprint(
    record: ReactionRecord, radius: int = 2, variant: str = STRUCTURAL, cache: dict | None = None
) -> CountedFingerprint:
    """Sum of product fingerprints minus sum of reactant fingerprints.

    ``cache`` optionally memoises molecule fingerprints by canonical key.
    """

    def fp(mol):
        if cache is None:
            return molecule_fingerprint(mol, radius, variant)
        key = (mol.canonical_key, radius, variant)
        if key not in cache:
            cache[key] = molecule_fingerprint(mol, radius, variant)
        return cache[key]

    counts = Counter()
    for mol in record.products:
        counts.update(fp(mol).entries)
    for mol in record.reactants:
        counts.subtract(fp(mol).entries)
    return CountedFingerprint(counts, variant, radius)


def tanimoto_continuous(a: CountedFingerprint, b: CountedFingerprint) -> float:
    """Continuous Tanimoto: sum(ab) / (sum(a^2) + sum(b^2) - sum(ab)).

    Two empty vectors score 0.  The result is clamped to [-1, 1]; with
    negative counts the raw value can fall below 0.
    """
    a._check(b)
    if not a.entries and not b.entries:
        return 0.0
    small, large = (a.entries, b.entries) if len(a) <= len(b) else (b.entries, a.entries)
    dot = sum(v * large.get(k, 0) for k, v in small.items())
    na = sum(v * v for v in a.entries.values())
    nb = sum(v * v for v in b.entries.values())
    score = dot / (na + nb - dot)
    return max(-1.0, min(1.0, score))
