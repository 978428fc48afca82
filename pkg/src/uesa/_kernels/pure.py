"""NumPy kernel for the per-sub-array combining recursion.

T_n = H_n Qinv_{n-1} H_n^H has rank at most K, so with the Cholesky factor
Qinv = L L^H and M = H_n L the nonzero spectrum of T_n equals that of the
K x K gram M^H M, and the dominant eigenvector of T_n is M v / sqrt(lam)
for the gram's dominant pair (lam, v).  That keeps every eigenproblem K x K
regardless of sub-array size.  Qinv is carried forward with the rank-one
inverse identity; the quadratic form w^H T_n w doubles as the update
denominator.
"""

from __future__ import annotations

import numpy as np

from .. import combiner as _comb
from ..errors import NumericalBreakdownError

name = "pure"


def combine(h, parts, rho, q_levels, quantize):
    """One allocation: returns (mu1, sub_rates, total, w, u, phase_idx, traces).

    ``w``, ``u`` and ``phase_idx`` are flat length-N_r arrays holding the
    per-sub-array vectors back to back; phase indices are -1 when
    quantization is off.
    """
    h = np.ascontiguousarray(h, dtype=np.complex128)
    parts = np.asarray(parts, dtype=np.int64)
    n_r, k = h.shape
    n = parts.shape[0]

    mu1 = np.empty(n)
    rates = np.empty(n)
    traces = np.empty(n + 1)
    traces[0] = float(k)
    w_flat = np.empty(n_r, dtype=np.complex128)
    u_flat = np.empty(n_r, dtype=np.complex128)
    idx_flat = np.full(n_r, -1, dtype=np.int64)

    qinv = np.eye(k, dtype=np.complex128)
    offset = 0
    for i in range(n):
        m = int(parts[i])
        blk = h[offset : offset + m]

        try:
            low = np.linalg.cholesky(qinv)
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdownError("inverse factor lost positive definiteness") from exc
        mb = blk @ low
        gram = mb.conj().T @ mb
        vals, vecs = np.linalg.eigh(0.5 * (gram + gram.conj().T))
        lam = float(vals[-1])

        if lam <= 0.0:
            mu1[i] = 0.0
            u = np.zeros(m, dtype=np.complex128)
            u[0] = 1.0
        else:
            mu1[i] = lam
            u = mb @ vecs[:, -1]
            u /= np.linalg.norm(u)
            u = _comb.fix_phase(u)

        if quantize:
            idx = _comb.quantize_phase_indices(u, q_levels)
            w = _comb.weights_from_indices(idx, q_levels)
            idx_flat[offset : offset + m] = idx
        else:
            w = u

        vg = blk.conj().T @ w
        y = qinv @ vg
        s = float(np.vdot(vg, y).real)
        if s < 0.0:
            s = 0.0
        rates[i] = np.log2(1.0 + rho * s)

        qinv -= (rho / (1.0 + rho * s)) * np.outer(y, y.conj())
        qinv = 0.5 * (qinv + qinv.conj().T)
        traces[i + 1] = float(np.trace(qinv).real)

        w_flat[offset : offset + m] = w
        u_flat[offset : offset + m] = u
        offset += m

    return mu1, rates, float(np.sum(rates)), w_flat, u_flat, idx_flat, traces


def batch_totals(h, parts_matrix, rho, q_levels, quantize):
    """Total rate for each row of ``parts_matrix`` (C x N allocations)."""
    parts_matrix = np.asarray(parts_matrix, dtype=np.int64)
    totals = np.empty(parts_matrix.shape[0])
    for c in range(parts_matrix.shape[0]):
        totals[c] = combine(h, parts_matrix[c], rho, q_levels, quantize)[2]
    return totals
