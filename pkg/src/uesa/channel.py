"""Geometric Saleh-Valenzuela channel generation for a ULA receiver.

Channels are narrowband, azimuth-only, and fully determined by an explicit
random generator, so every draw is reproducible from (params, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ChannelParams:
    """Geometry and path-count parameters for channel generation.

    num_rx_antennas : receive ULA size (rows of the channel matrix)
    num_users       : single-antenna transmitters (columns)
    paths_per_user  : effective scattering paths per user
    spacing_ratio   : element spacing over wavelength (d/lambda)
    """

    num_rx_antennas: int
    num_users: int
    paths_per_user: int = 10
    spacing_ratio: float = 0.5

    def __post_init__(self):
        if self.num_users < 1:
            raise ValueError("num_users must be >= 1")
        if self.num_rx_antennas < self.num_users:
            raise ValueError("need num_rx_antennas >= num_users")
        if self.paths_per_user < 1:
            raise ValueError("paths_per_user must be >= 1")
        if not self.spacing_ratio > 0:
            raise ValueError("spacing_ratio must be positive")


@dataclass
class ChannelMatrix:
    """Complex gain matrix (num_rx_antennas x num_users) plus row-order metadata.

    ``row_permutation``, when present, records the reordering that produced
    ``entries`` from the generation-order matrix: ``entries == original[perm]``.
    """

    entries: np.ndarray
    row_permutation: np.ndarray | None = None

    def __post_init__(self):
        e = np.ascontiguousarray(np.asarray(self.entries, dtype=np.complex128))
        if e.ndim != 2 or e.shape[0] < 1 or e.shape[1] < 1:
            raise ValueError("channel entries must be a 2-D complex matrix")
        self.entries = e
        if self.row_permutation is not None:
            p = np.asarray(self.row_permutation, dtype=np.int64)
            if sorted(p.tolist()) != list(range(e.shape[0])):
                raise ValueError("row_permutation must be a permutation of the row indices")
            self.row_permutation = p

    @property
    def num_rx_antennas(self) -> int:
        return self.entries.shape[0]

    @property
    def num_users(self) -> int:
        return self.entries.shape[1]


def as_channel_array(h) -> np.ndarray:
    """Coerce a ChannelMatrix or array-like to a C-contiguous complex matrix."""
    if isinstance(h, ChannelMatrix):
        return h.entries
    arr = np.ascontiguousarray(np.asarray(h, dtype=np.complex128))
    if arr.ndim != 2:
        raise ValueError("channel must be a 2-D matrix")
    return arr


def array_response(phi: float, num_antennas: int, spacing_ratio: float = 0.5) -> np.ndarray:
    """Normalized ULA response vector for azimuth angle ``phi`` (radians).

    Entry m is exp(j*2*pi*spacing_ratio*m*sin(phi)) / sqrt(num_antennas),
    so the result has unit Euclidean norm.
    """
    if num_antennas < 1:
        raise ValueError("num_antennas must be >= 1")
    m = np.arange(num_antennas)
    phase = TWO_PI * spacing_ratio * np.sin(phi)
    return np.exp(1j * phase * m) / np.sqrt(num_antennas)


def generate_channel(params: ChannelParams, rng: np.random.Generator) -> ChannelMatrix:
    """Draw one channel realization.

    Column k is sqrt(N_r/L) * sum_l alpha[k,l] * a(phi[k,l]) with path gains
    alpha ~ CN(0,1) (drawn as (x+jy)/sqrt(2)) and angles phi uniform on
    [0, 2*pi).  Draw order is fixed (gain real parts, gain imaginary parts,
    then angles, each user-major) so that identical (params, seed) give
    bit-identical output.
    """
    n_r = params.num_rx_antennas
    k = params.num_users
    paths = params.paths_per_user

    x = rng.standard_normal((k, paths))
    y = rng.standard_normal((k, paths))
    alpha = (x + 1j * y) / np.sqrt(2.0)
    aoa = rng.uniform(0.0, TWO_PI, size=(k, paths))

    # Response vectors for all (user, path) pairs at once: (N_r, K, L).
    m = np.arange(n_r)[:, None, None]
    steer = np.exp(1j * TWO_PI * params.spacing_ratio * m * np.sin(aoa)[None, :, :])
    steer /= np.sqrt(n_r)

    entries = np.sqrt(n_r / paths) * np.sum(steer * alpha[None, :, :], axis=2)
    return ChannelMatrix(np.ascontiguousarray(entries))


def order_rows_desc_norm(h) -> ChannelMatrix:
    """Sort channel rows by non-increasing Euclidean norm (stable on ties).

    The applied permutation is recorded on the result so the original row
    order can be recovered.
    """
    entries = as_channel_array(h)
    norms = np.linalg.norm(entries, axis=1)
    perm = np.argsort(-norms, kind="stable")
    return ChannelMatrix(entries[perm], row_permutation=perm)


def write_channel_txt(h, path) -> None:
    """Write a channel matrix as plain text.

    Format: header line ``N_r K``, then N_r lines of K ``re im`` pairs at
    full precision.  Row-order metadata is not serialized.
    """
    entries = as_channel_array(h)
    n_r, k = entries.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{n_r} {k}\n")
        for row in entries:
            fields = []
            for v in row:
                fields.append(f"{v.real:.17g} {v.imag:.17g}")
            fh.write(" ".join(fields) + "\n")


def read_channel_txt(path) -> ChannelMatrix:
    """Read a channel matrix written by :func:`write_channel_txt`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError("malformed channel file header")
        n_r, k = int(header[0]), int(header[1])
        entries = np.empty((n_r, k), dtype=np.complex128)
        for i in range(n_r):
            vals = [float(t) for t in fh.readline().split()]
            if len(vals) != 2 * k:
                raise ValueError(f"row {i}: expected {2 * k} values, got {len(vals)}")
            entries[i] = np.asarray(vals[0::2]) + 1j * np.asarray(vals[1::2])
    return ChannelMatrix(entries)
