"""Pure-Python implementation of the path-search kernels.

Mirrors the compiled ``_kernels`` extension exactly; it is selected when the
extension is unavailable or when ``RXNGRAPH_PURE_PYTHON=1``.

Half paths are int64 arrays of shape ``(n, 2k + 1)`` holding alternating
molecule and reaction ids ``m0, r1, m1, ..., rk, mk`` that start at a query
molecule.
"""

from __future__ import annotations

from bisect import bisect_left

import numpy as np

EQUAL, INTERSECT = 0, 1


class Index:
    """CSR adjacency over reactant edges plus per-reaction sites and fingerprints."""

    def __init__(self, mol_ptr, mol_rxn, rxn_ptr, rxn_mol, site_ptr, site_val,
                 fp_ptr, fp_id, fp_cnt, fp_norm, threshold=0.2, mode=EQUAL, use_cache=True):
        self.mol_ptr = [int(x) for x in mol_ptr]
        self.mol_rxn = [int(x) for x in mol_rxn]
        self.rxn_ptr = [int(x) for x in rxn_ptr]
        self.rxn_mol = [int(x) for x in rxn_mol]
        self.site_ptr = [int(x) for x in site_ptr]
        self.site_val = [int(x) for x in site_val]
        self.fp_ptr = [int(x) for x in fp_ptr]
        self.fp_id = [int(x) for x in fp_id]
        self.fp_cnt = [int(x) for x in fp_cnt]
        self.fp_norm = [int(x) for x in fp_norm]
        self.threshold = float(threshold)
        self.mode = int(mode)
        self.use_cache = bool(use_cache)
        self._cache: dict[tuple[int, int], float] = {}
        self.n_mol = len(self.mol_ptr) - 1
        self.n_rxn = len(self.rxn_ptr) - 1

    def configure(self, threshold: float, mode: int) -> None:
        self.threshold = float(threshold)
        self.mode = int(mode)

    # -- primitives -----------------------------------------------------
    def sites(self, m: int, r: int):
        lo, hi = self.rxn_ptr[r], self.rxn_ptr[r + 1]
        pos = bisect_left(self.rxn_mol, m, lo, hi)
        if pos == hi or self.rxn_mol[pos] != m:
            return None
        return self.site_val[self.site_ptr[pos]:self.site_ptr[pos + 1]]

    def common_atoms(self, m: int, r1: int, r2: int) -> bool:
        a, b = self.sites(m, r1), self.sites(m, r2)
        if not a or not b:
            return False
        if self.mode == EQUAL:
            return a == b
        return not set(a).isdisjoint(b)

    def tanimoto(self, r1: int, r2: int) -> float:
        key = (r1, r2) if r1 <= r2 else (r2, r1)
        if self.use_cache and key in self._cache:
            return self._cache[key]
        i, iend = self.fp_ptr[r1], self.fp_ptr[r1 + 1]
        j, jend = self.fp_ptr[r2], self.fp_ptr[r2 + 1]
        if i == iend and j == jend:
            score = 0.0
        else:
            ids, cnt = self.fp_id, self.fp_cnt
            dot = 0
            while i < iend and j < jend:
                if ids[i] == ids[j]:
                    dot += cnt[i] * cnt[j]
                    i += 1
                    j += 1
                elif ids[i] < ids[j]:
                    i += 1
                else:
                    j += 1
            score = dot / (self.fp_norm[r1] + self.fp_norm[r2] - dot)
            score = max(-1.0, min(1.0, score))
        if self.use_cache:
            self._cache[key] = score
        return score

    def similar(self, r1: int, r2: int) -> bool:
        return self.tanimoto(r1, r2) > self.threshold

    def step_ok(self, m: int, r_prev: int, r_next: int) -> bool:
        return self.common_atoms(m, r_prev, r_next) and self.similar(r_prev, r_next)

    # -- search -----------------------------------------------------------
    def expand(self, level, stop: int):
        """Extend every half path by one reaction and one molecule.

        Rows ending at ``stop`` are not extended.  New nodes must not already
        occur in the row, and the junction at the row's last molecule must
        pass both filters.
        """
        level = np.asarray(level, dtype=np.int64)
        width = level.shape[1]
        out = []
        for row in level.tolist():
            m = row[-1]
            if m == stop:
                continue
            mols = set(row[0::2])
            rxns = set(row[1::2])
            r_prev = row[-2] if width > 1 else -1
            for p in range(self.mol_ptr[m], self.mol_ptr[m + 1]):
                r = self.mol_rxn[p]
                if r in rxns:
                    continue
                if r_prev >= 0 and not self.step_ok(m, r_prev, r):
                    continue
                for q in range(self.rxn_ptr[r], self.rxn_ptr[r + 1]):
                    m2 = self.rxn_mol[q]
                    if m2 in mols:
                        continue
                    out.append(row + [r, m2])
        if not out:
            return np.zeros((0, width + 2), dtype=np.int64)
        return np.array(out, dtype=np.int64)

    def join(self, fwd, bwd):
        """All full paths ``fwd_row + reversed(bwd_row)[1:]`` meeting at one molecule."""
        fwd = np.asarray(fwd, dtype=np.int64)
        bwd = np.asarray(bwd, dtype=np.int64)
        wf, wb = fwd.shape[1], bwd.shape[1]
        by_end: dict[int, list[list[int]]] = {}
        for row in bwd.tolist():
            by_end.setdefault(row[-1], []).append(row)
        out = []
        for frow in fwd.tolist():
            meet = frow[-1]
            partners = by_end.get(meet)
            if not partners:
                continue
            fnodes_m = set(frow[0::2])
            fnodes_r = set(frow[1::2])
            for brow in partners:
                if wf > 1 and wb > 1 and not self.step_ok(meet, frow[-2], brow[-2]):
                    continue
                tail = brow[-2::-1]
                if any(x in fnodes_m for x in tail[1::2]) or any(x in fnodes_r for x in tail[0::2]):
                    continue
                out.append(frow + tail)
        if not out:
            return np.zeros((0, wf + wb - 1), dtype=np.int64)
        return np.array(out, dtype=np.int64)
