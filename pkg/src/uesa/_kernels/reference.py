"""Direct-solve reference kernel, kept as a cross-check path.

Materializes each T_n in full, eigendecomposes it at size m_n, carries the
recursion matrix Q_n itself (re-solving instead of updating the inverse),
and recomputes tr(Q_n^{-1}) by explicit inversion.  Slow but transparent;
the optimized kernels are validated against it.
"""

from __future__ import annotations

import numpy as np

from .. import combiner as _comb
from ..errors import NumericalBreakdownError

name = "reference"


def combine(h, parts, rho, q_levels, quantize):
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

    q_mat = np.eye(k, dtype=np.complex128)
    offset = 0
    for i in range(n):
        m = int(parts[i])
        blk = h[offset : offset + m]

        try:
            t = blk @ np.linalg.solve(q_mat, blk.conj().T)
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdownError("recursion matrix became singular") from exc
        lam, u = _comb.dominant_eigenpair(t)

        if lam <= 0.0:
            mu1[i] = 0.0
            u = np.zeros(m, dtype=np.complex128)
            u[0] = 1.0
        else:
            mu1[i] = lam

        if quantize:
            idx = _comb.quantize_phase_indices(u, q_levels)
            w = _comb.weights_from_indices(idx, q_levels)
            idx_flat[offset : offset + m] = idx
        else:
            w = u

        ts = 0.5 * (t + t.conj().T)
        s = float(np.vdot(w, ts @ w).real)
        if s < 0.0:
            s = 0.0
        rates[i] = np.log2(1.0 + rho * s)

        v = blk.conj().T @ w
        q_mat = q_mat + rho * np.outer(v, v.conj())
        traces[i + 1] = float(np.trace(np.linalg.inv(q_mat)).real)

        w_flat[offset : offset + m] = w
        u_flat[offset : offset + m] = u
        offset += m

    return mu1, rates, float(np.sum(rates)), w_flat, u_flat, idx_flat, traces


def batch_totals(h, parts_matrix, rho, q_levels, quantize):
    parts_matrix = np.asarray(parts_matrix, dtype=np.int64)
    totals = np.empty(parts_matrix.shape[0])
    for c in range(parts_matrix.shape[0]):
        totals[c] = combine(h, parts_matrix[c], rho, q_levels, quantize)[2]
    return totals
