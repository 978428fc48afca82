"""Achievable rate, rate upper bounds, power draw, and energy efficiency."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import as_channel_array
from .combiner import AnalogCombiner, CombiningResult
from .errors import NumericalBreakdownError

ARCHITECTURES = ("esa", "uesa")


@dataclass(frozen=True)
class PowerModel:
    """Per-component power as multiples of a reference power (milliwatts).

    Every antenna carries an LNA and a phase shifter; every chain carries an
    RF front end and an ADC; the unequal architecture adds one switch per
    antenna.  Defaults give 50*N_r + 240*N mW for equal sub-arrays and
    54*N_r + 240*N mW with the switching network.
    """

    reference_power_mw: float = 20.0
    lna: float = 1.0
    adc: float = 10.0
    rf: float = 2.0
    ps: float = 1.5
    sw: float = 0.2

    def __post_init__(self):
        if self.reference_power_mw <= 0:
            raise ValueError("reference power must be positive")
        for name in ("lna", "adc", "rf", "ps", "sw"):
            if getattr(self, name) <= 0:
                raise ValueError(f"multiplier {name} must be positive")


@dataclass(frozen=True)
class RateReport:
    """Rate, its two upper bounds, and the energy cost of one configuration."""

    total_rate: float
    ub1: float
    ub: float
    power_mw: float
    energy_efficiency: float


def snr_db_to_rho(snr_db: float) -> float:
    """Linear SNR for unit symbol power: rho = 1/N0 = 10^(SNR_dB/10)."""
    return float(10.0 ** (snr_db / 10.0))


def achievable_rate(h, w, rho: float) -> float:
    """log2 det(I_K + rho * H^H W W^H H) in bits/s/Hz.

    Valid for combiners with orthonormal columns (checked); evaluated through
    a Cholesky factorization of the K x K Gram matrix.
    """
    entries = as_channel_array(h)
    wmat = w.to_matrix() if isinstance(w, AnalogCombiner) else np.asarray(w, dtype=np.complex128)
    if wmat.shape[0] != entries.shape[0]:
        raise ValueError("combiner rows must match channel rows")
    gram = wmat.conj().T @ wmat
    if float(np.max(np.abs(gram - np.eye(wmat.shape[1])))) > 1e-8:
        raise ValueError("combiner columns are not orthonormal")

    m = entries.conj().T @ wmat
    a = np.eye(entries.shape[1], dtype=np.complex128) + rho * (m @ m.conj().T)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdownError("rate Gram matrix is not positive definite") from exc
    return float(2.0 * np.sum(np.log2(np.real(np.diag(chol)))))


def upper_bound_ub1(mu1, rho: float) -> float:
    """Sum of per-sub-array rate ceilings: sum_n log2(1 + rho*mu1(n))."""
    mu1 = np.asarray(mu1, dtype=float)
    if np.any(mu1 < 0):
        raise ValueError("eigenvalues must be nonnegative")
    return float(np.sum(np.log2(1.0 + rho * mu1)))


def upper_bound_ub(mu1, rho: float) -> float:
    """Jensen relaxation: N*log2(1 + (rho/N)*sum mu1).  Always >= ub1, with
    equality when all eigenvalues coincide."""
    mu1 = np.asarray(mu1, dtype=float)
    if np.any(mu1 < 0):
        raise ValueError("eigenvalues must be nonnegative")
    n = mu1.shape[0]
    return float(n * np.log2(1.0 + (rho / n) * np.sum(mu1)))


def power_consumption(
    num_antennas: int, num_chains: int, model: PowerModel = PowerModel(), architecture: str = "esa"
) -> float:
    """Total consumed power in milliwatts for one receive architecture."""
    if num_antennas < 1 or num_chains < 1:
        raise ValueError("counts must be >= 1")
    if architecture not in ARCHITECTURES:
        raise ValueError(f"architecture must be one of {ARCHITECTURES}")
    p = model.reference_power_mw
    total = num_antennas * p * (model.lna + model.ps) + num_chains * p * (model.rf + model.adc)
    if architecture == "uesa":
        total += num_antennas * p * model.sw
    return float(total)


def energy_efficiency(rate: float, power_mw: float) -> float:
    """Rate per consumed watt (bits/s/Hz per W)."""
    if power_mw <= 0:
        raise ValueError("power must be positive")
    return float(rate / (power_mw / 1000.0))


def rate_report(
    result: CombiningResult,
    num_antennas: int,
    num_chains: int,
    rho: float,
    architecture: str,
    model: PowerModel = PowerModel(),
) -> RateReport:
    """Bundle a combining result with its bounds and energy metrics."""
    power = power_consumption(num_antennas, num_chains, model, architecture)
    rate = result.total_rate
    return RateReport(
        total_rate=rate,
        ub1=upper_bound_ub1(result.mu1, rho),
        ub=upper_bound_ub(result.mu1, rho),
        power_mw=power,
        energy_efficiency=energy_efficiency(rate, power),
    )
