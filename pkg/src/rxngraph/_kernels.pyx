# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled path-search kernels; behaviour matches ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t
from libcpp.vector cimport vector
from libcpp.unordered_map cimport unordered_map
from cython.operator cimport dereference as deref

cnp.import_array()

EQUAL, INTERSECT = 0, 1


cdef vector[int64_t] _vec(arr):
    cdef int64_t[::1] view = np.ascontiguousarray(arr, dtype=np.int64)
    cdef vector[int64_t] out
    cdef Py_ssize_t i
    out.resize(view.shape[0])
    for i in range(view.shape[0]):
        out[i] = view[i]
    return out


cdef class Index:
    cdef vector[int64_t] mol_ptr, mol_rxn, rxn_ptr, rxn_mol
    cdef vector[int64_t] site_ptr, site_val, fp_ptr, fp_id, fp_cnt, fp_norm
    cdef unordered_map[int64_t, double] cache
    cdef public double threshold
    cdef public int mode
    cdef public bint use_cache
    cdef public int64_t n_mol, n_rxn

    def __init__(self, mol_ptr, mol_rxn, rxn_ptr, rxn_mol, site_ptr, site_val,
                 fp_ptr, fp_id, fp_cnt, fp_norm, threshold=0.2, mode=EQUAL, use_cache=True):
        self.mol_ptr = _vec(mol_ptr)
        self.mol_rxn = _vec(mol_rxn)
        self.rxn_ptr = _vec(rxn_ptr)
        self.rxn_mol = _vec(rxn_mol)
        self.site_ptr = _vec(site_ptr)
        self.site_val = _vec(site_val)
        self.fp_ptr = _vec(fp_ptr)
        self.fp_id = _vec(fp_id)
        self.fp_cnt = _vec(fp_cnt)
        self.fp_norm = _vec(fp_norm)
        self.threshold = threshold
        self.mode = mode
        self.use_cache = use_cache
        self.n_mol = self.mol_ptr.size() - 1
        self.n_rxn = self.rxn_ptr.size() - 1

    def configure(self, double threshold, int mode):
        self.threshold = threshold
        self.mode = mode

    cdef int64_t _slot(self, int64_t m, int64_t r) noexcept nogil:
        cdef int64_t lo = self.rxn_ptr[r], hi = self.rxn_ptr[r + 1], mid
        while lo < hi:
            mid = (lo + hi) >> 1
            if self.rxn_mol[mid] < m:
                lo = mid + 1
            else:
                hi = mid
        if lo < self.rxn_ptr[r + 1] and self.rxn_mol[lo] == m:
            return lo
        return -1

    cdef bint _common(self, int64_t m, int64_t r1, int64_t r2) noexcept nogil:
        cdef int64_t s1 = self._slot(m, r1), s2 = self._slot(m, r2)
        if s1 < 0 or s2 < 0:
            return False
        cdef int64_t a = self.site_ptr[s1], ae = self.site_ptr[s1 + 1]
        cdef int64_t b = self.site_ptr[s2], be = self.site_ptr[s2 + 1]
        if a == ae or b == be:
            return False
        if self.mode == 0:
            if ae - a != be - b:
                return False
            while a < ae:
                if self.site_val[a] != self.site_val[b]:
                    return False
                a += 1
                b += 1
            return True
        while a < ae and b < be:
            if self.site_val[a] == self.site_val[b]:
                return True
            if self.site_val[a] < self.site_val[b]:
                a += 1
            else:
                b += 1
        return False

    cdef double _tanimoto(self, int64_t r1, int64_t r2):
        cdef int64_t lo = r1 if r1 <= r2 else r2
        cdef int64_t hi = r2 if r1 <= r2 else r1
        cdef int64_t key = lo * (self.n_rxn + 1) + hi
        if self.use_cache:
            it = self.cache.find(key)
            if it != self.cache.end():
                return deref(it).second
        cdef int64_t i = self.fp_ptr[r1], iend = self.fp_ptr[r1 + 1]
        cdef int64_t j = self.fp_ptr[r2], jend = self.fp_ptr[r2 + 1]
        cdef int64_t dot = 0
        cdef double score
        if i == iend and j == jend:
            score = 0.0
        else:
            while i < iend and j < jend:
                if self.fp_id[i] == self.fp_id[j]:
                    dot += self.fp_cnt[i] * self.fp_cnt[j]
                    i += 1
                    j += 1
                elif self.fp_id[i] < self.fp_id[j]:
                    i += 1
                else:
                    j += 1
            score = <double>dot / <double>(self.fp_norm[r1] + self.fp_norm[r2] - dot)
            if score > 1.0:
                score = 1.0
            elif score < -1.0:
                score = -1.0
        if self.use_cache:
            self.cache[key] = score
        return score

    cdef bint _step_ok(self, int64_t m, int64_t r_prev, int64_t r_next):
        return self._common(m, r_prev, r_next) and self._tanimoto(r_prev, r_next) > self.threshold

    # Python-visible primitives, used by tests and the pure reasoner helpers
    def sites(self, int64_t m, int64_t r):
        cdef int64_t s = self._slot(m, r)
        if s < 0:
            return None
        return [self.site_val[k] for k in range(self.site_ptr[s], self.site_ptr[s + 1])]

    def common_atoms(self, int64_t m, int64_t r1, int64_t r2):
        return bool(self._common(m, r1, r2))

    def tanimoto(self, int64_t r1, int64_t r2):
        return self._tanimoto(r1, r2)

    def similar(self, int64_t r1, int64_t r2):
        return self._tanimoto(r1, r2) > self.threshold

    def step_ok(self, int64_t m, int64_t r_prev, int64_t r_next):
        return bool(self._step_ok(m, r_prev, r_next))

    def expand(self, level, int64_t stop):
        cdef int64_t[:, ::1] lv = np.ascontiguousarray(level, dtype=np.int64)
        cdef Py_ssize_t n = lv.shape[0], width = lv.shape[1]
        cdef Py_ssize_t i, c, p, q
        cdef int64_t m, r, r_prev, m2
        cdef bint seen
        cdef vector[int64_t] out
        for i in range(n):
            m = lv[i, width - 1]
            if m == stop:
                continue
            r_prev = lv[i, width - 2] if width > 1 else -1
            for p in range(self.mol_ptr[m], self.mol_ptr[m + 1]):
                r = self.mol_rxn[p]
                seen = False
                for c in range(1, width, 2):
                    if lv[i, c] == r:
                        seen = True
                        break
                if seen:
                    continue
                if r_prev >= 0 and not self._step_ok(m, r_prev, r):
                    continue
                for q in range(self.rxn_ptr[r], self.rxn_ptr[r + 1]):
                    m2 = self.rxn_mol[q]
                    seen = False
                    for c in range(0, width, 2):
                        if lv[i, c] == m2:
                            seen = True
                            break
                    if seen:
                        continue
                    for c in range(width):
                        out.push_back(lv[i, c])
                    out.push_back(r)
                    out.push_back(m2)
        return _to_array(out, width + 2)

    def join(self, fwd, bwd):
        cdef int64_t[:, ::1] fv = np.ascontiguousarray(fwd, dtype=np.int64)
        cdef int64_t[:, ::1] bv = np.ascontiguousarray(bwd, dtype=np.int64)
        cdef Py_ssize_t nf = fv.shape[0], wf = fv.shape[1]
        cdef Py_ssize_t nb = bv.shape[0], wb = bv.shape[1]
        cdef Py_ssize_t i, j, k, c, c2
        cdef int64_t meet, x
        cdef bint clash
        cdef unordered_map[int64_t, vector[Py_ssize_t]] by_end
        cdef vector[int64_t] out
        for j in range(nb):
            by_end[bv[j, wb - 1]].push_back(j)
        for i in range(nf):
            meet = fv[i, wf - 1]
            it = by_end.find(meet)
            if it == by_end.end():
                continue
            for k in range(<Py_ssize_t>deref(it).second.size()):
                j = deref(it).second[k]
                if wf > 1 and wb > 1 and not self._step_ok(meet, fv[i, wf - 2], bv[j, wb - 2]):
                    continue
                clash = False
                # columns of equal parity hold the same node kind in both rows
                for c2 in range(wb - 1):
                    x = bv[j, c2]
                    for c in range(c2 % 2, wf, 2):
                        if fv[i, c] == x:
                            clash = True
                            break
                    if clash:
                        break
                if clash:
                    continue
                for c in range(wf):
                    out.push_back(fv[i, c])
                for c2 in range(wb - 2, -1, -1):
                    out.push_back(bv[j, c2])
        return _to_array(out, wf + wb - 1)


cdef object _to_array(vector[int64_t]& data, Py_ssize_t width):
    cdef Py_ssize_t n = data.size() // width
    arr = np.empty((n, width), dtype=np.int64)
    cdef int64_t[:, ::1] view = arr
    cdef Py_ssize_t i, c
    for i in range(n):
        for c in range(width):
            view[i, c] = data[i * width + c]
    return arr
