"""Factorization-aided analog combining for sub-connected receive arrays.

The combiner is block diagonal: sub-array n applies a constant-modulus
weight vector of length m_n ahead of its RF chain.  Weights are built one
sub-array at a time: the effective matrix for sub-array n is

    T_n = H_n Qinv_{n-1} H_n^H,    Q_0 = I_K,    Q_n = Q_{n-1} + rho G_n,

where H_n holds that sub-array's channel rows and G_n = H_n^H w_n w_n^H H_n
is rank one.  The best unit-norm weight is the dominant eigenvector of T_n,
optionally quantized onto a finite phase grid, and the resulting per-sub-array
rates sum exactly to the log-det rate of the full combiner.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import TWO_PI, as_channel_array
from .errors import NumericalBreakdownError


@dataclass(frozen=True)
class Allocation:
    """Antennas per sub-array; parts are positive and sum to the array size."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(int(m) for m in self.parts)
        if len(parts) < 1:
            raise ValueError("allocation needs at least one sub-array")
        if any(m < 1 for m in parts):
            raise ValueError("every sub-array needs at least one antenna")
        object.__setattr__(self, "parts", parts)

    @property
    def num_subarrays(self) -> int:
        return len(self.parts)

    @property
    def num_antennas(self) -> int:
        return sum(self.parts)

    def is_nondecreasing(self) -> bool:
        return all(a <= b for a, b in zip(self.parts, self.parts[1:]))


def as_allocation(alloc, num_antennas: int | None = None) -> Allocation:
    if not isinstance(alloc, Allocation):
        alloc = Allocation(tuple(alloc))
    if num_antennas is not None and alloc.num_antennas != num_antennas:
        raise ValueError(
            f"allocation sums to {alloc.num_antennas}, channel has {num_antennas} rows"
        )
    return alloc


@dataclass(frozen=True)
class PhaseSet:
    """Feasible phase grid {0, 2*pi/Q, ..., 2*(Q-1)*pi/Q}."""

    num_levels: int = 16

    def __post_init__(self):
        if self.num_levels < 2:
            raise ValueError("need at least two phase levels")

    @property
    def step(self) -> float:
        return TWO_PI / self.num_levels

    def phases(self) -> np.ndarray:
        return self.step * np.arange(self.num_levels)


def _num_levels(phase_set) -> int:
    if isinstance(phase_set, PhaseSet):
        return phase_set.num_levels
    return PhaseSet(int(phase_set)).num_levels


@dataclass
class AnalogCombiner:
    """Block-diagonal analog combiner.

    ``weights[n]`` is sub-array n's weight vector (length m_n).  For a
    quantized combiner every entry has modulus 1/sqrt(m_n) and
    ``phase_indices[n]`` holds the grid indices that generated it; an
    unquantized combiner stores the raw unit-norm eigenvectors and has
    ``phase_indices is None``.
    """

    allocation: Allocation
    weights: list
    phase_indices: list | None = None
    num_phase_levels: int | None = None

    def __post_init__(self):
        if len(self.weights) != self.allocation.num_subarrays:
            raise ValueError("one weight vector per sub-array required")
        for m, w in zip(self.allocation.parts, self.weights):
            if len(w) != m:
                raise ValueError("weight vector length must match sub-array size")

    @property
    def quantized(self) -> bool:
        return self.phase_indices is not None

    def to_matrix(self) -> np.ndarray:
        """Materialize the (N_r x N) block-diagonal combining matrix."""
        parts = self.allocation.parts
        mat = np.zeros((sum(parts), len(parts)), dtype=np.complex128)
        offset = 0
        for n, m in enumerate(parts):
            mat[offset : offset + m, n] = self.weights[n]
            offset += m
        return mat


@dataclass
class CombiningResult:
    """Everything produced by one factorized-combining run.

    total_rate is the exact sum of sub_rates; qinv_traces[n] = tr(Q_n^{-1})
    for n = 0..N (starting at K); unquantized_vectors are the dominant
    eigenvectors kept for upper-bound computation.
    """

    combiner: AnalogCombiner
    mu1: np.ndarray
    sub_rates: np.ndarray
    total_rate: float
    unquantized_vectors: list = field(default_factory=list)
    qinv_traces: np.ndarray | None = None


# ---------------------------------------------------------------------------
# elementary operations
# ---------------------------------------------------------------------------

def fix_phase(u: np.ndarray) -> np.ndarray:
    """Rotate a complex vector so its first largest-modulus entry is real >= 0.

    Eigenvectors are only defined up to a unit phase; this picks one
    deterministically.
    """
    u = np.asarray(u, dtype=np.complex128)
    i = int(np.argmax(np.abs(u)))
    a = u[i]
    mag = abs(a)
    if mag == 0.0:
        return u.copy()
    return u * (a.conjugate() / mag)


def dominant_eigenpair(t: np.ndarray) -> tuple:
    """Largest eigenvalue and a deterministic unit eigenvector of a Hermitian
    positive semidefinite matrix.

    The input is symmetrized before the solve; asymmetry beyond 1e-10
    (relative to the largest entry) is rejected.  The returned vector has its
    first largest-modulus component made real and nonnegative.
    """
    t = np.asarray(t, dtype=np.complex128)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(t))) if t.size else 0.0)
    if float(np.max(np.abs(t - t.conj().T))) > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    ts = 0.5 * (t + t.conj().T)
    vals, vecs = np.linalg.eigh(ts)
    return float(vals[-1]), fix_phase(vecs[:, -1])


def quantize_phase_indices(u: np.ndarray, phase_set) -> np.ndarray:
    """Nearest grid index (angular distance) for each entry's phase.

    Exact midpoints break toward the smaller grid index; zero entries map to
    index 0 (their angle is 0 by convention).
    """
    q = _num_levels(phase_set)
    step = TWO_PI / q
    qf = np.angle(np.asarray(u, dtype=np.complex128)) / step
    low = np.floor(qf).astype(np.int64)
    frac = qf - low
    idx = np.where(frac < 0.5, low, low + 1)
    tie = frac == 0.5
    if np.any(tie):
        idx[tie] = np.minimum(low[tie] % q, (low[tie] + 1) % q)
    return np.asarray(idx % q, dtype=np.int64)


def weights_from_indices(indices: np.ndarray, phase_set) -> np.ndarray:
    """Constant-modulus weight vector from phase-grid indices."""
    q = _num_levels(phase_set)
    indices = np.asarray(indices, dtype=np.int64)
    m = indices.shape[0]
    return np.exp(1j * (TWO_PI / q) * indices) / np.sqrt(m)


def quantize_phases(u: np.ndarray, phase_set) -> np.ndarray:
    """Project a complex vector onto the feasible constant-modulus set.

    Each output entry has modulus 1/sqrt(len(u)) and the grid phase closest
    to the input entry's phase.
    """
    return weights_from_indices(quantize_phase_indices(u, phase_set), phase_set)


def rank_one_inverse_update(qinv_prev: np.ndarray, g: np.ndarray, rho: float) -> np.ndarray:
    """Inverse of (Q_prev + rho*G) from Qinv_prev, for rank-one PSD G.

    Uses the rank-one identity
        (Q + rho G)^{-1} = Qinv - rho Qinv G Qinv / (1 + rho tr(G Qinv)).
    A non-positive denominator means the PSD preconditions were violated.
    """
    qinv_prev = np.asarray(qinv_prev, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    denom = 1.0 + rho * float(np.trace(g @ qinv_prev).real)
    if denom <= 0.0:
        raise NumericalBreakdownError(
            f"rank-one update denominator {denom:.3e} <= 0; PSD precondition violated"
        )
    out = qinv_prev - (rho / denom) * (qinv_prev @ g @ qinv_prev)
    return 0.5 * (out + out.conj().T)


# ---------------------------------------------------------------------------
# full factorized combining
# ---------------------------------------------------------------------------

def factorized_combining(
    h,
    alloc,
    rho: float,
    phase_set=PhaseSet(),
    quantize: bool = True,
    backend: str | None = None,
) -> CombiningResult:
    """Build the analog combiner for one antenna allocation.

    Runs the per-sub-array recursion on the channel as given (callers that
    want norm-ordered rows must order first).  With ``quantize`` off the raw
    dominant eigenvectors are used as weights, which attains the
    per-sub-array rate bound with equality.

    ``backend`` selects the computational kernel ("compiled", "pure",
    "reference"); None picks the default chosen at import time.
    """
    from ._kernels import get_backend

    entries = as_channel_array(h)
    alloc = as_allocation(alloc, entries.shape[0])
    if not rho > 0:
        raise ValueError("rho must be positive")
    q = _num_levels(phase_set)

    parts = np.asarray(alloc.parts, dtype=np.int64)
    kernel = get_backend(backend)
    mu1, rates, total, w_flat, u_flat, idx_flat, traces = kernel.combine(
        entries, parts, float(rho), q, bool(quantize)
    )

    weights = []
    indices = [] if quantize else None
    unquant = []
    offset = 0
    for m in alloc.parts:
        weights.append(w_flat[offset : offset + m].copy())
        unquant.append(u_flat[offset : offset + m].copy())
        if quantize:
            indices.append(idx_flat[offset : offset + m].copy())
        offset += m

    combiner = AnalogCombiner(
        allocation=alloc,
        weights=weights,
        phase_indices=indices,
        num_phase_levels=q if quantize else None,
    )
    return CombiningResult(
        combiner=combiner,
        mu1=mu1,
        sub_rates=rates,
        total_rate=float(total),
        unquantized_vectors=unquant,
        qinv_traces=traces,
    )
