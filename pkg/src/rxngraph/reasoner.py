"""Bidirectional filtered path search between two molecules.

Paths run along reactant edges only and alternate molecule and reaction
nodes.  Every interior molecule must react at the same site in both of its
flanking reactions (Filter 1), and every consecutive pair of reactions must
have similar reaction fingerprints (Filter 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _backend
from .errors import NotAReactant, OddLength, UnknownMolecule
from .fingerprint import STRUCTURAL, CountedFingerprint, tanimoto_continuous
from .kgraph import KnowledgeGraph

COMPLEMENTARY, ANALOGOUS = "complementary", "analogous"
EQUAL, INTERSECT = "equal", "intersect"
_MODE_CODES = {EQUAL: _backend.EQUAL, INTERSECT: _backend.INTERSECT}


@dataclass(frozen=True)
class SearchParams:
    tanimoto_threshold: float = 0.2
    max_paths: int = 1000
    max_length: int = 10
    fp_variant: str = STRUCTURAL
    fp_radius: int = 2
    common_atoms: str = EQUAL

    def __post_init__(self):
        if not 0.0 <= self.tanimoto_threshold <= 1.0:
            raise ValueError("tanimoto_threshold must lie in [0, 1]")
        if self.max_paths < 1:
            raise ValueError("max_paths must be at least 1")
        if self.max_length < 2 or self.max_length % 2:
            raise ValueError("max_length must be an even integer >= 2")
        if self.common_atoms not in _MODE_CODES:
            raise ValueError(f"common_atoms must be {EQUAL!r} or {INTERSECT!r}")


def classify_length(length: int) -> str:
    if length <= 0 or length % 2:
        raise OddLength(f"path length {length} is not a positive even number")
    return COMPLEMENTARY if length % 4 == 2 else ANALOGOUS


@dataclass(frozen=True)
class Path:
    """Alternating ``(m1, rA, m2, ..., mL)`` node ids; length counts edges."""

    nodes: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.nodes) - 1

    @property
    def molecules(self) -> tuple[int, ...]:
        return self.nodes[0::2]

    @property
    def reactions(self) -> tuple[int, ...]:
        return self.nodes[1::2]

    @property
    def classification(self) -> str:
        return classify_path(self)

    def reversed(self) -> "Path":
        return Path(self.nodes[::-1])


def classify_path(path: Path | Sequence[int]) -> str:
    nodes = path.nodes if isinstance(path, Path) else tuple(path)
    return classify_length(len(nodes) - 1)


# -- filters over a knowledge graph --------------------------------------

def _sites(g: KnowledgeGraph, m: int, r: int) -> tuple[int, ...]:
    if m not in g.reactant_nodes[r]:
        raise NotAReactant(f"molecule {m} is not a reactant of reaction {r}")
    return g.sites[r].get(m, ())


def filter_common_atoms(g: KnowledgeGraph, m: int, r_prev: int, r_next: int, mode: str = EQUAL) -> bool:
    """Does ``m`` react at the same (non-empty) set of atoms in both reactions?

    Atoms are compared through the molecule's symmetry classes, so equivalent
    atoms of a symmetric molecule count as the same site.
    """
    a, b = _sites(g, m, r_prev), _sites(g, m, r_next)
    if not a or not b:
        return False
    if mode == EQUAL:
        return a == b
    return not set(a).isdisjoint(b)


def center_similarity(g: KnowledgeGraph, r1: int, r2: int, params: SearchParams = SearchParams()) -> float:
    fps = g.reaction_fps(params.fp_variant, params.fp_radius)
    return tanimoto_continuous(fps[r1], fps[r2])


def filter_center_similarity(g: KnowledgeGraph, r_prev: int, r_next: int, params: SearchParams = SearchParams()) -> bool:
    return center_similarity(g, r_prev, r_next, params) > params.tanimoto_threshold


# -- search index ---------------------------------------------------------

class SearchIndex:
    """Flat arrays over the reactant-edge subgraph, wrapped by a kernel ``Index``."""

    def __init__(self, n_molecules: int, reactants: Sequence[Sequence[int]],
                 sites: Sequence[Mapping[int, Sequence[int]]],
                 fingerprints: Sequence[Mapping[int, int]], use_cache: bool = True,
                 backend=None):
        n_rxn = len(reactants)
        per_mol: list[list[int]] = [[] for _ in range(n_molecules)]
        rxn_ptr, rxn_mol, site_ptr, site_val = [0], [], [0], []
        for r, mols in enumerate(reactants):
            for m in sorted(set(mols)):
                if not 0 <= m < n_molecules:
                    raise ValueError(f"reaction {r} references unknown molecule {m}")
                per_mol[m].append(r)
                rxn_mol.append(m)
                site_val.extend(sorted(set(sites[r].get(m, ()))))
                site_ptr.append(len(site_val))
            rxn_ptr.append(len(rxn_mol))
        mol_ptr, mol_rxn = [0], []
        for rs in per_mol:
            mol_rxn.extend(rs)
            mol_ptr.append(len(mol_rxn))
        fp_ptr, fp_id, fp_cnt, fp_norm = [0], [], [], []
        for fp in fingerprints:
            items = sorted((int(k), int(v)) for k, v in fp.items() if v)
            fp_id.extend(k for k, _ in items)
            fp_cnt.extend(v for _, v in items)
            fp_norm.append(sum(v * v for _, v in items))
            fp_ptr.append(len(fp_id))
        if len(fp_norm) != n_rxn or len(sites) != n_rxn:
            raise ValueError("sites and fingerprints must align with reactions")
        arr = lambda xs: np.asarray(xs, dtype=np.int64)
        self.n_molecules = n_molecules
        self.n_reactions = n_rxn
        module = backend if backend is not None else _backend
        self.kernel = module.Index(
            arr(mol_ptr), arr(mol_rxn), arr(rxn_ptr), arr(rxn_mol), arr(site_ptr), arr(site_val),
            arr(fp_ptr), arr(fp_id), arr(fp_cnt), arr(fp_norm), 0.2, module.EQUAL, use_cache,
        )

    @classmethod
    def from_graph(cls, g: KnowledgeGraph, fp_variant: str = STRUCTURAL, fp_radius: int = 2, **kw) -> "SearchIndex":
        fps: list[CountedFingerprint] = g.reaction_fps(fp_variant, fp_radius)
        return cls(g.n_molecules, g.reactant_nodes, g.sites, [f.entries for f in fps], **kw)

    @classmethod
    def for_graph(cls, g: KnowledgeGraph, params: SearchParams) -> "SearchIndex":
        """Cached index for ``g``; rebuilt automatically after the graph grows."""
        return g.cached(("search-index", params.fp_variant, params.fp_radius),
                        lambda: cls.from_graph(g, params.fp_variant, params.fp_radius))

    def search(self, source: int, target: int, params: SearchParams = SearchParams()) -> list[Path]:
        for m in (source, target):
            if not 0 <= m < self.n_molecules:
                raise UnknownMolecule(f"molecule id {m}")
        if source == target:
            return []
        k = self.kernel
        k.configure(params.tanimoto_threshold, _MODE_CODES[params.common_atoms])
        fwd = [np.array([[source]], dtype=np.int64)]
        bwd = [np.array([[target]], dtype=np.int64)]
        found: list[np.ndarray] = []
        total = 0
        for _ in range(params.max_length // 2):
            # grow the smaller frontier; joining the new level with the other
            # side's current level yields exactly the paths one reaction longer
            if len(fwd[-1]) <= len(bwd[-1]):
                fwd.append(k.expand(fwd[-1], target))
                if not len(fwd[-1]):
                    break
            else:
                bwd.append(k.expand(bwd[-1], source))
                if not len(bwd[-1]):
                    break
            joined = k.join(fwd[-1], bwd[-1])
            if len(joined):
                found.append(joined)
                total += len(joined)
            if total >= params.max_paths:
                break
        paths: list[tuple[int, ...]] = []
        for block in found:
            paths.extend(sorted(map(tuple, block.tolist())))
        return [Path(p) for p in paths[: params.max_paths]]


def find_paths(g: KnowledgeGraph, m_i: int, m_j: int, params: SearchParams = SearchParams()) -> list[Path]:
    """All filtered reactant-edge paths from ``m_i`` to ``m_j``.

    Ordered by length, then lexicographically by node ids, truncated to
    ``params.max_paths`` (shorter paths are kept first).
    """
    return SearchIndex.for_graph(g, params).search(m_i, m_j, params)


# -- presentation ---------------------------------------------------------

def path_scores(g: KnowledgeGraph, path: Path, params: SearchParams = SearchParams()) -> list[float]:
    """Tanimoto score of each consecutive reaction pair along ``path``."""
    rs = path.reactions
    return [center_similarity(g, a, b, params) for a, b in zip(rs, rs[1:])]


def explain(g: KnowledgeGraph, path: Path, params: SearchParams = SearchParams()) -> str:
    """Render ``m1 -[reactant]-> rA <-[reactant]- m2 ...`` with per-step scores."""
    mol = lambda i: f"m{i}:{g.molecules[i].canonical_key}"
    rxn = lambda i: f"r{i}:{g.reactions[i].id}"
    nodes = path.nodes
    parts = [mol(nodes[0])]
    for pos in range(1, len(nodes), 2):
        parts.append(f"-[reactant]-> {rxn(nodes[pos])} <-[reactant]- {mol(nodes[pos + 1])}")
    lines = [" ".join(parts), f"length={path.length} {path.classification}"]
    for (a, b), score in zip(zip(path.reactions, path.reactions[1:]), path_scores(g, path, params)):
        lines.append(f"  T({g.reactions[a].id}, {g.reactions[b].id}) = {score:.4f}")
    return "\n".join(lines)


__all__ = [
    "ANALOGOUS", "COMPLEMENTARY", "EQUAL", "INTERSECT", "Path", "SearchIndex", "SearchParams",
    "center_similarity", "classify_length", "classify_path", "explain", "filter_center_similarity",
    "filter_common_atoms", "find_paths", "path_scores",
]
