"""Antenna-allocation search over sub-array size candidates.

The candidate space for N sub-arrays on N_r antennas is the set of
compositions of N_r into N positive parts; restricting to non-decreasing
parts keeps one representative per partition and shrinks the space sharply.
Four searches are provided: exhaustive over all compositions, reduced over
non-decreasing candidates, the reduced search walked in descending spread
order with early termination, and a greedy updater that grows the smallest
sub-arrays until the per-sub-array dominant eigenvalues even out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .channel import as_channel_array, order_rows_desc_norm
from .combiner import (
    Allocation,
    AnalogCombiner,
    CombiningResult,
    PhaseSet,
    _num_levels,
    factorized_combining,
)
from .errors import UnsupportedConfigurationError

_CHUNK = 4096

_VARIANTS = ("compositions", "nondecreasing", "pi-ordered")


@dataclass(frozen=True)
class SearchSpace:
    """A named candidate space for (num_antennas, num_subarrays)."""

    num_antennas: int
    num_subarrays: int
    variant: str = "compositions"

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"variant must be one of {_VARIANTS}")
        if self.num_subarrays > self.num_antennas:
            raise ValueError("more sub-arrays than antennas: empty search space")

    def __iter__(self):
        if self.variant == "compositions":
            return enumerate_compositions(self.num_antennas, self.num_subarrays)
        if self.variant == "nondecreasing":
            return enumerate_partitions_nondecreasing(self.num_antennas, self.num_subarrays)
        return iter(
            order_by_pi_desc(
                enumerate_partitions_nondecreasing(self.num_antennas, self.num_subarrays)
            )
        )

    def size(self) -> int:
        if self.variant == "compositions":
            return math.comb(self.num_antennas - 1, self.num_subarrays - 1)
        return sum(1 for _ in self)


@dataclass
class SearchOutcome:
    """Best allocation found by a search, with its combiner and bookkeeping."""

    best_allocation: Allocation
    best_combiner: AnalogCombiner
    best_rate: float
    candidates_examined: int
    best_result: CombiningResult = field(repr=False, default=None)


def enumerate_compositions(num_antennas: int, num_subarrays: int):
    """Yield every composition of num_antennas into num_subarrays positive
    parts, in lexicographic order.  Count is C(num_antennas-1, num_subarrays-1).
    """
    _check_space(num_antennas, num_subarrays)
    n, k = num_antennas, num_subarrays
    for cuts in combinations(range(1, n), k - 1):
        prev = 0
        parts = []
        for c in cuts:
            parts.append(c - prev)
            prev = c
        parts.append(n - prev)
        yield tuple(parts)


def enumerate_partitions_nondecreasing(num_antennas: int, num_subarrays: int):
    """Yield every non-decreasing composition (one per partition into exactly
    num_subarrays parts), in lexicographic order."""
    _check_space(num_antennas, num_subarrays)
    yield from _partitions(num_antennas, num_subarrays, 1)


def _check_space(num_antennas: int, num_subarrays: int) -> None:
    if num_subarrays < 1:
        raise ValueError("need at least one sub-array")
    if num_subarrays > num_antennas:
        raise ValueError(
            f"no allocations of {num_antennas} antennas into {num_subarrays} sub-arrays"
        )


def _partitions(remaining: int, k: int, minimum: int):
    if k == 1:
        if remaining >= minimum:
            yield (remaining,)
        return
    for first in range(minimum, remaining // k + 1):
        for rest in _partitions(remaining - first, k - 1, first):
            yield (first,) + rest


def pi_metric(alloc) -> int:
    """Spread score of an allocation: product of (|m_{n+1} - m_n| + 1)."""
    parts = alloc.parts if isinstance(alloc, Allocation) else tuple(alloc)
    out = 1
    for a, b in zip(parts, parts[1:]):
        out *= abs(b - a) + 1
    return out


def order_by_pi_desc(space) -> list:
    """Candidates sorted by non-increasing spread score; ties keep the
    original enumeration order."""
    return sorted(space, key=lambda parts: -pi_metric(parts))


# ---------------------------------------------------------------------------
# searches
# ---------------------------------------------------------------------------

def _resolve_inputs(h, num_subarrays):
    entries = as_channel_array(h)
    n = entries.shape[1] if num_subarrays is None else int(num_subarrays)
    if n < 1 or n > entries.shape[0]:
        raise ValueError("num_subarrays must be in 1..num_rx_antennas")
    return entries, n


def _evaluate(h_ord, parts, rho, phase_set, backend) -> CombiningResult:
    return factorized_combining(h_ord, Allocation(parts), rho, phase_set, True, backend)


def _scan_argmax(h_ord, candidates, rho, phase_set, backend):
    """Chunked argmax of the total rate over a candidate stream.

    Ties go to the first candidate encountered, matching a sequential
    strictly-greater update.
    """
    from ._kernels import get_backend

    kernel = get_backend(backend)
    q = _num_levels(phase_set)
    best_total = -np.inf
    best_parts = None
    examined = 0
    buf = []

    def flush():
        nonlocal best_total, best_parts, examined
        if not buf:
            return
        mat = np.asarray(buf, dtype=np.int64)
        totals = kernel.batch_totals(h_ord, mat, float(rho), q, True)
        i = int(np.argmax(totals))
        if totals[i] > best_total:
            best_total = float(totals[i])
            best_parts = tuple(int(v) for v in mat[i])
        examined += mat.shape[0]
        buf.clear()

    for parts in candidates:
        buf.append(parts)
        if len(buf) >= _CHUNK:
            flush()
    flush()
    if best_parts is None:
        raise ValueError("empty candidate stream")
    return best_parts, examined


def _outcome(h_ord, parts, rho, phase_set, backend, examined) -> SearchOutcome:
    res = _evaluate(h_ord, parts, rho, phase_set, backend)
    return SearchOutcome(
        best_allocation=res.combiner.allocation,
        best_combiner=res.combiner,
        best_rate=res.total_rate,
        candidates_examined=examined,
        best_result=res,
    )


def uesa_es(h, rho, phase_set=PhaseSet(), num_subarrays=None, backend=None) -> SearchOutcome:
    """Exhaustive search over all compositions.

    Channel rows are norm-ordered internally before the scan, as for every
    unequal-sub-array search.
    """
    entries, n = _resolve_inputs(h, num_subarrays)
    h_ord = order_rows_desc_norm(entries).entries
    cands = enumerate_compositions(entries.shape[0], n)
    parts, examined = _scan_argmax(h_ord, cands, rho, phase_set, backend)
    return _outcome(h_ord, parts, rho, phase_set, backend, examined)


def uesa_res(h, rho, phase_set=PhaseSet(), num_subarrays=None, backend=None) -> SearchOutcome:
    """Reduced exhaustive search over non-decreasing candidates only."""
    entries, n = _resolve_inputs(h, num_subarrays)
    h_ord = order_rows_desc_norm(entries).entries
    cands = enumerate_partitions_nondecreasing(entries.shape[0], n)
    parts, examined = _scan_argmax(h_ord, cands, rho, phase_set, backend)
    return _outcome(h_ord, parts, rho, phase_set, backend, examined)


def uesa_res_et(
    h, rho, phase_set=PhaseSet(), count_max: int = 30, num_subarrays=None, backend=None
) -> SearchOutcome:
    """Reduced search in descending spread order with early termination.

    A counter tracks consecutive non-improving candidates; the walk stops
    once it reaches ``count_max`` (strict improvement resets it).
    """
    if count_max < 1:
        raise ValueError("count_max must be >= 1")
    entries, n = _resolve_inputs(h, num_subarrays)
    h_ord = order_rows_desc_norm(entries).entries
    ordered = order_by_pi_desc(enumerate_partitions_nondecreasing(entries.shape[0], n))

    tau = 0.0
    count = 0
    examined = 0
    best_parts = None
    best_res = None
    for parts in ordered:
        if count >= count_max:
            break
        res = _evaluate(h_ord, parts, rho, phase_set, backend)
        examined += 1
        if res.total_rate > tau:
            tau = res.total_rate
            best_parts = parts
            best_res = res
            count = 0
        else:
            count += 1
    if best_res is None:
        # All candidates rated zero (possible only for an all-zero channel);
        # keep the first candidate walked.
        best_parts = ordered[0]
        best_res = _evaluate(h_ord, best_parts, rho, phase_set, backend)
    return SearchOutcome(
        best_allocation=best_res.combiner.allocation,
        best_combiner=best_res.combiner,
        best_rate=best_res.total_rate,
        candidates_examined=examined,
        best_result=best_res,
    )


def fast_uesa(
    h,
    rho,
    phase_set=PhaseSet(),
    max_outer_iters: int = 20,
    gamma: float = 2.0,
    num_subarrays=None,
    backend=None,
) -> SearchOutcome:
    """Greedy allocation update seeded with the maximal-spread candidate.

    Each outer iteration compares every sub-array's dominant eigenvalue
    against the current mean; sub-arrays falling more than ``gamma`` below
    get one more antenna, the last sub-array absorbs the difference, and a
    candidate is accepted when it raises the eigenvalue sum.  The update
    stops once the last sub-array is no longer the largest.
    """
    if max_outer_iters < 1:
        raise ValueError("max_outer_iters must be >= 1")
    entries, n = _resolve_inputs(h, num_subarrays)
    n_r = entries.shape[0]
    h_ord = order_rows_desc_norm(entries).entries
    head = order_by_pi_desc(enumerate_partitions_nondecreasing(n_r, n))[0]

    best_res = _evaluate(h_ord, head, rho, phase_set, backend)
    examined = 1
    best_parts = head
    tau = float(np.sum(best_res.mu1))
    if n == 1:
        return SearchOutcome(
            best_allocation=best_res.combiner.allocation,
            best_combiner=best_res.combiner,
            best_rate=best_res.total_rate,
            candidates_examined=examined,
            best_result=best_res,
        )

    mu_latest = best_res.mu1
    m = list(head)
    stopped = False
    for _ in range(max_outer_iters):
        if stopped:
            break
        delta = mu_latest - float(np.mean(mu_latest))
        for idx in range(n):
            if idx < n - 1 and delta[idx] < gamma:
                m[idx] += 1
            m[n - 1] = n_r - sum(m[: n - 1])
            if m[n - 1] <= m[n - 2]:
                stopped = True
                break
            parts = tuple(m)
            if all(a <= b for a, b in zip(parts, parts[1:])) and parts[0] >= 1:
                res = _evaluate(h_ord, parts, rho, phase_set, backend)
                examined += 1
                mu_latest = res.mu1
                total_mu = float(np.sum(res.mu1))
                if total_mu > tau:
                    tau = total_mu
                    best_parts = parts
                    best_res = res

    return SearchOutcome(
        best_allocation=best_res.combiner.allocation,
        best_combiner=best_res.combiner,
        best_rate=best_res.total_rate,
        candidates_examined=examined,
        best_result=best_res,
    )


def esa_baseline(h, rho, phase_set=PhaseSet(), num_subarrays=None, backend=None) -> CombiningResult:
    """Equal sub-arrays on the channel as generated (no row reordering).

    The equal architecture has no switching network, so it can neither
    reorder rows nor serve a chain count that does not divide the array.
    """
    entries, n = _resolve_inputs(h, num_subarrays)
    n_r = entries.shape[0]
    if n_r % n != 0:
        raise UnsupportedConfigurationError(
            f"equal sub-arrays need num_subarrays | num_antennas, got {n_r} antennas, {n} chains"
        )
    parts = (n_r // n,) * n
    return factorized_combining(entries, Allocation(parts), rho, phase_set, True, backend)
