# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel for the per-sub-array combining recursion.

Same rank-K reduction as the pure backend: factor Qinv = L L^H, build
M = H_n L, take the dominant pair of the K x K gram M^H M (cyclic complex
Jacobi, which is exact to machine precision at these sizes), recover the
length-m eigenvector as M v / sqrt(lam), quantize, and carry Qinv forward
with the rank-one inverse identity.  The batch entry point evaluates a whole
candidate list without touching Python between candidates.
"""

import numpy as np

from ..errors import NumericalBreakdownError

from libc.math cimport atan2, cos, floor, log2, sin, sqrt

name = "compiled"

cdef double TWO_PI = 6.283185307179586476925286766559


cdef inline double _cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef int _cholesky(const double complex[:, ::1] a, double complex[:, ::1] l, Py_ssize_t k) nogil:
    """Lower Cholesky factor of a Hermitian positive-definite matrix."""
    cdef Py_ssize_t i, j, t
    cdef double d
    cdef double complex z
    for j in range(k):
        for i in range(k):
            l[i, j] = 0
    for j in range(k):
        d = a[j, j].real
        for t in range(j):
            d -= _cabs2(l[j, t])
        if d <= 0.0:
            return 1
        d = sqrt(d)
        l[j, j] = d
        for i in range(j + 1, k):
            z = a[i, j]
            for t in range(j):
                z -= l[i, t] * l[j, t].conjugate()
            l[i, j] = z / d
    return 0


cdef void _jacobi_herm(double complex[:, ::1] a, double complex[:, ::1] v, Py_ssize_t k) nogil:
    """In-place eigendecomposition of a Hermitian matrix by cyclic Jacobi.

    On return the eigenvalues sit on the (real) diagonal of ``a`` and the
    columns of ``v`` are the eigenvectors.
    """
    cdef Py_ssize_t i, p, q, sweep
    cdef double ab, app, aqq, theta, t, c, s, off, fro2
    cdef double complex apq, phase, zp, zq
    for p in range(k):
        for q in range(k):
            v[p, q] = 0
        v[p, p] = 1
    if k == 1:
        return
    for sweep in range(60):
        off = 0.0
        fro2 = 0.0
        for p in range(k):
            fro2 += _cabs2(a[p, p])
            for q in range(p + 1, k):
                off += _cabs2(a[p, q])
        fro2 += 2.0 * off
        if off <= 1e-28 * fro2 or fro2 == 0.0:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[p, q]
                ab = sqrt(_cabs2(apq))
                if ab == 0.0:
                    continue
                phase = apq / ab
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * ab)
                if theta >= 0.0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for i in range(k):
                    if i == p or i == q:
                        continue
                    zp = a[i, p]
                    zq = a[i, q]
                    a[i, p] = c * zp - s * phase.conjugate() * zq
                    a[i, q] = s * phase * zp + c * zq
                    a[p, i] = a[i, p].conjugate()
                    a[q, i] = a[i, q].conjugate()
                a[p, p] = c * c * app - 2.0 * c * s * ab + s * s * aqq
                a[q, q] = s * s * app + 2.0 * c * s * ab + c * c * aqq
                a[p, q] = 0
                a[q, p] = 0
                for i in range(k):
                    zp = v[i, p]
                    zq = v[i, q]
                    v[i, p] = c * zp - s * phase.conjugate() * zq
                    v[i, q] = s * phase * zp + c * zq


cdef int _combine_core(
    const double complex[:, ::1] h,
    const long long[:, ::1] parts_all,
    Py_ssize_t cand,
    double rho,
    long long qlev,
    bint quantize,
    double complex[:, ::1] qinv,
    double complex[:, ::1] lmat,
    double complex[:, ::1] mb,
    double complex[:, ::1] gram,
    double complex[:, ::1] jvecs,
    double complex[::1] vg,
    double complex[::1] yv,
    double[::1] mu1,
    double[::1] rates,
    double complex[::1] w_flat,
    double complex[::1] u_flat,
    long long[::1] idx_flat,
    double[::1] traces,
) nogil:
    cdef Py_ssize_t n_r = h.shape[0]
    cdef Py_ssize_t k = h.shape[1]
    cdef Py_ssize_t n = parts_all.shape[1]
    cdef Py_ssize_t i, j, c, r, t, blk, m, offset, imax
    cdef double lam, best, nrm, s, denom, factor, step, ang, qf, frac, tr
    cdef double complex z, rot
    cdef long long low, qa, qb, idx

    step = TWO_PI / qlev
    for i in range(k):
        for j in range(k):
            qinv[i, j] = 0
        qinv[i, i] = 1
    traces[0] = <double> k

    offset = 0
    for blk in range(n):
        m = <Py_ssize_t> parts_all[cand, blk]

        if _cholesky(qinv, lmat, k) != 0:
            return 1
        # mb = H_blk @ L (L lower triangular)
        for i in range(m):
            for c in range(k):
                z = 0
                for t in range(c, k):
                    z += h[offset + i, t] * lmat[t, c]
                mb[i, c] = z
        for r in range(k):
            for c in range(r, k):
                z = 0
                for i in range(m):
                    z += mb[i, r].conjugate() * mb[i, c]
                gram[r, c] = z
                gram[c, r] = z.conjugate()
            gram[r, r] = gram[r, r].real

        _jacobi_herm(gram, jvecs, k)
        imax = 0
        best = gram[0, 0].real
        for r in range(1, k):
            if gram[r, r].real > best:
                best = gram[r, r].real
                imax = r
        lam = best

        if lam <= 0.0:
            mu1[blk] = 0.0
            for i in range(m):
                u_flat[offset + i] = 0
            u_flat[offset] = 1
        else:
            mu1[blk] = lam
            nrm = 0.0
            for i in range(m):
                z = 0
                for c in range(k):
                    z += mb[i, c] * jvecs[c, imax]
                u_flat[offset + i] = z
                nrm += _cabs2(z)
            nrm = sqrt(nrm)
            # phase fix: first largest-modulus entry made real nonnegative
            imax = 0
            best = _cabs2(u_flat[offset])
            for i in range(1, m):
                s = _cabs2(u_flat[offset + i])
                if s > best:
                    best = s
                    imax = i
            z = u_flat[offset + imax]
            rot = z.conjugate() / sqrt(_cabs2(z))
            for i in range(m):
                u_flat[offset + i] = u_flat[offset + i] * rot / nrm

        if quantize:
            nrm = 1.0 / sqrt(<double> m)
            for i in range(m):
                z = u_flat[offset + i]
                ang = atan2(z.imag, z.real)
                qf = ang / step
                frac = qf - floor(qf)
                low = <long long> floor(qf)
                if frac < 0.5:
                    idx = low
                elif frac > 0.5:
                    idx = low + 1
                else:
                    qa = ((low % qlev) + qlev) % qlev
                    qb = ((qa + 1) % qlev)
                    idx = qa if qa < qb else qb
                idx = ((idx % qlev) + qlev) % qlev
                idx_flat[offset + i] = idx
                ang = step * idx
                w_flat[offset + i] = (cos(ang) * nrm) + 1j * (sin(ang) * nrm)
        else:
            for i in range(m):
                w_flat[offset + i] = u_flat[offset + i]

        # vg = H_blk^H w ; s = vg^H Qinv vg is the achieved quadratic form
        for c in range(k):
            z = 0
            for i in range(m):
                z += h[offset + i, c].conjugate() * w_flat[offset + i]
            vg[c] = z
        s = 0.0
        for r in range(k):
            z = 0
            for c in range(k):
                z += qinv[r, c] * vg[c]
            yv[r] = z
            s += (vg[r].conjugate() * z).real
        if s < 0.0:
            s = 0.0
        rates[blk] = log2(1.0 + rho * s)

        denom = 1.0 + rho * s
        factor = rho / denom
        for r in range(k):
            for c in range(k):
                qinv[r, c] = qinv[r, c] - factor * yv[r] * yv[c].conjugate()
        tr = 0.0
        for r in range(k):
            qinv[r, r] = qinv[r, r].real
            tr += qinv[r, r].real
            for c in range(r + 1, k):
                z = 0.5 * (qinv[r, c] + qinv[c, r].conjugate())
                qinv[r, c] = z
                qinv[c, r] = z.conjugate()
        traces[blk + 1] = tr

        offset += m
    return 0


def _workspaces(Py_ssize_t n_r, Py_ssize_t k):
    return (
        np.empty((k, k), dtype=np.complex128),
        np.empty((k, k), dtype=np.complex128),
        np.empty((n_r, k), dtype=np.complex128),
        np.empty((k, k), dtype=np.complex128),
        np.empty((k, k), dtype=np.complex128),
        np.empty(k, dtype=np.complex128),
        np.empty(k, dtype=np.complex128),
    )


def combine(h, parts, double rho, long long q_levels, bint quantize):
    """Single-allocation entry point; see the pure backend for the contract."""
    h = np.ascontiguousarray(h, dtype=np.complex128)
    cdef const double complex[:, ::1] hv = h
    parts_mat = np.ascontiguousarray(np.asarray(parts, dtype=np.int64).reshape(1, -1))
    cdef const long long[:, ::1] pv = parts_mat
    cdef Py_ssize_t n_r = hv.shape[0]
    cdef Py_ssize_t k = hv.shape[1]
    cdef Py_ssize_t n = pv.shape[1]

    mu1 = np.empty(n)
    rates = np.empty(n)
    traces = np.empty(n + 1)
    w_flat = np.empty(n_r, dtype=np.complex128)
    u_flat = np.empty(n_r, dtype=np.complex128)
    idx_flat = np.full(n_r, -1, dtype=np.int64)
    qinv, lmat, mb, gram, jvecs, vg, yv = _workspaces(n_r, k)

    cdef int rc = _combine_core(
        hv, pv, 0, rho, q_levels, quantize,
        qinv, lmat, mb, gram, jvecs, vg, yv,
        mu1, rates, w_flat, u_flat, idx_flat, traces,
    )
    if rc != 0:
        raise NumericalBreakdownError("inverse factor lost positive definiteness")
    return mu1, rates, float(np.sum(rates)), w_flat, u_flat, idx_flat, traces


def batch_totals(h, parts_matrix, double rho, long long q_levels, bint quantize):
    """Total rate for each candidate row, evaluated entirely in C."""
    h = np.ascontiguousarray(h, dtype=np.complex128)
    cdef const double complex[:, ::1] hv = h
    parts_matrix = np.ascontiguousarray(np.asarray(parts_matrix, dtype=np.int64))
    cdef const long long[:, ::1] pv = parts_matrix
    cdef Py_ssize_t n_r = hv.shape[0]
    cdef Py_ssize_t k = hv.shape[1]
    cdef Py_ssize_t n = pv.shape[1]
    cdef Py_ssize_t n_cand = pv.shape[0]

    totals = np.empty(n_cand)
    cdef double[::1] tv = totals
    mu1 = np.empty(n)
    rates = np.empty(n)
    traces = np.empty(n + 1)
    w_flat = np.empty(n_r, dtype=np.complex128)
    u_flat = np.empty(n_r, dtype=np.complex128)
    idx_flat = np.empty(n_r, dtype=np.int64)
    qinv, lmat, mb, gram, jvecs, vg, yv = _workspaces(n_r, k)

    cdef double[::1] mu1v = mu1
    cdef double[::1] ratesv = rates
    cdef double[::1] tracesv = traces
    cdef double complex[::1] wv = w_flat
    cdef double complex[::1] uv = u_flat
    cdef long long[::1] idxv = idx_flat
    cdef double complex[:, ::1] qinvv = qinv, lmatv = lmat, mbv = mb, gramv = gram, jvecsv = jvecs
    cdef double complex[::1] vgv = vg, yvv = yv

    cdef Py_ssize_t c, i
    cdef double acc
    cdef int rc = 0
    with nogil:
        for c in range(n_cand):
            rc = _combine_core(
                hv, pv, c, rho, q_levels, quantize,
                qinvv, lmatv, mbv, gramv, jvecsv, vgv, yvv,
                mu1v, ratesv, wv, uv, idxv, tracesv,
            )
            if rc != 0:
                break
            acc = 0.0
            for i in range(n):
                acc += ratesv[i]
            tv[c] = acc
    if rc != 0:
        raise NumericalBreakdownError("inverse factor lost positive definiteness")
    return totals
