"""Monte Carlo experiment driver and invariant validation suite.

Sweeps run seeded, independent channel trials over a (N_r, N, SNR) grid,
aggregate per-cell means, and emit diff-stable CSV.  Per-trial generators
derive from (seed, cell index, trial index), so any cell or trial can be
reproduced in isolation and results do not depend on execution order.
"""

from __future__ import annotations

import io
import math
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import allocation as alloc_mod
from . import combiner as comb_mod
from . import metrics
from .channel import (
    ChannelParams,
    array_response,
    generate_channel,
    order_rows_desc_norm,
    read_channel_txt,
    write_channel_txt,
)
from .errors import UnsupportedConfigurationError

ALGORITHMS = ("esa", "uesa-es", "uesa-res", "uesa-res-et", "fast-uesa")

# uesa-es candidate counts beyond this require an explicit heavy opt-in
HEAVY_CANDIDATE_LIMIT = 10_000


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved inputs for one sweep.

    ``count_max`` is required for uesa-res-et; ``fast_iters`` and ``gamma``
    for fast-uesa.  ``heavy`` unlocks exhaustive-search cells whose candidate
    count exceeds HEAVY_CANDIDATE_LIMIT.
    """

    nr_list: tuple
    n_list: tuple
    k: int
    snr_db_list: tuple
    trials: int
    seed: int
    algorithm: str
    q_levels: int = 16
    paths: int = 10
    count_max: int | None = None
    fast_iters: int | None = None
    gamma: float | None = None
    out: str | None = None
    heavy: bool = False

    def __post_init__(self):
        object.__setattr__(self, "nr_list", tuple(int(v) for v in self.nr_list))
        object.__setattr__(self, "n_list", tuple(int(v) for v in self.n_list))
        object.__setattr__(self, "snr_db_list", tuple(float(v) for v in self.snr_db_list))
        if not self.nr_list or not self.n_list or not self.snr_db_list:
            raise ValueError("nr, n, and snr_db lists must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.q_levels < 2:
            raise ValueError("q_levels must be >= 2")
        if self.paths < 1:
            raise ValueError("paths must be >= 1")
        if self.algorithm == "uesa-res-et" and self.count_max is None:
            raise ValueError("uesa-res-et requires count_max")
        if self.algorithm == "fast-uesa" and (self.fast_iters is None or self.gamma is None):
            raise ValueError("fast-uesa requires fast_iters and gamma")


@dataclass(frozen=True)
class SweepRecord:
    """One CSV row: per-cell means over the configured trials."""

    nr: int
    n: int
    k: int
    snr_db: float
    algorithm: str
    trial_count: int
    mean_rate: float
    mean_ub1: float
    mean_ub: float
    power_mw: float
    mean_ee: float
    mean_candidates_examined: float
    seed: int


def trial_rng(seed: int, cell_index: int, trial: int) -> np.random.Generator:
    """Independent generator for one (cell, trial) pair."""
    ss = np.random.SeedSequence([seed, cell_index, trial])
    return np.random.Generator(np.random.PCG64(ss))


def _check_cell(config: ExperimentConfig, nr: int, n: int, snr_db: float) -> None:
    cell = f"cell (nr={nr}, n={n}, snr_db={snr_db:g})"
    if nr < n:
        raise UnsupportedConfigurationError(f"{cell}: more chains than antennas")
    if nr < config.k:
        raise UnsupportedConfigurationError(f"{cell}: fewer antennas than users")
    if config.algorithm == "esa" and nr % n != 0:
        raise UnsupportedConfigurationError(
            f"{cell}: equal sub-arrays need n | nr"
        )
    if config.algorithm == "uesa-es" and not config.heavy:
        count = math.comb(nr - 1, n - 1)
        if count > HEAVY_CANDIDATE_LIMIT:
            raise UnsupportedConfigurationError(
                f"{cell}: exhaustive search over {count} candidates needs the heavy flag"
            )


def _run_trial(config: ExperimentConfig, h, rho: float, phase_set, n: int):
    """Returns (rate, mu1, candidates_examined) for one realization."""
    alg = config.algorithm
    if alg == "esa":
        res = alloc_mod.esa_baseline(h, rho, phase_set, num_subarrays=n)
        return res.total_rate, res.mu1, 1
    if alg == "uesa-es":
        out = alloc_mod.uesa_es(h, rho, phase_set, num_subarrays=n)
    elif alg == "uesa-res":
        out = alloc_mod.uesa_res(h, rho, phase_set, num_subarrays=n)
    elif alg == "uesa-res-et":
        out = alloc_mod.uesa_res_et(h, rho, phase_set, config.count_max, num_subarrays=n)
    else:
        out = alloc_mod.fast_uesa(
            h, rho, phase_set, config.fast_iters, config.gamma, num_subarrays=n
        )
    return out.best_rate, out.best_result.mu1, out.candidates_examined


def run_sweep(config: ExperimentConfig) -> list:
    """Run the full grid; rows come out nr-major, then n, then snr."""
    records = []
    phase_set = comb_mod.PhaseSet(config.q_levels)
    architecture = "esa" if config.algorithm == "esa" else "uesa"
    cell_index = 0
    for nr in config.nr_list:
        for n in config.n_list:
            for snr_db in config.snr_db_list:
                _check_cell(config, nr, n, snr_db)
                rho = metrics.snr_db_to_rho(snr_db)
                params = ChannelParams(nr, config.k, config.paths)
                power = metrics.power_consumption(nr, n, architecture=architecture)

                rates = np.empty(config.trials)
                ub1s = np.empty(config.trials)
                ubs = np.empty(config.trials)
                ees = np.empty(config.trials)
                cands = np.empty(config.trials)
                for t in range(config.trials):
                    rng = trial_rng(config.seed, cell_index, t)
                    h = generate_channel(params, rng)
                    rate, mu1, examined = _run_trial(config, h, rho, phase_set, n)
                    rates[t] = rate
                    ub1s[t] = metrics.upper_bound_ub1(mu1, rho)
                    ubs[t] = metrics.upper_bound_ub(mu1, rho)
                    ees[t] = metrics.energy_efficiency(rate, power)
                    cands[t] = examined

                records.append(
                    SweepRecord(
                        nr=nr,
                        n=n,
                        k=config.k,
                        snr_db=snr_db,
                        algorithm=config.algorithm,
                        trial_count=config.trials,
                        mean_rate=float(np.mean(rates)),
                        mean_ub1=float(np.mean(ub1s)),
                        mean_ub=float(np.mean(ubs)),
                        power_mw=power,
                        mean_ee=float(np.mean(ees)),
                        mean_candidates_examined=float(np.mean(cands)),
                        seed=config.seed,
                    )
                )
                cell_index += 1
    return records


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def emit_csv(records, config: ExperimentConfig) -> str:
    """Render records as CSV with the resolved config in comment lines."""
    buf = io.StringIO()
    buf.write("# uesa sweep\n")
    for f in fields(ExperimentConfig):
        if f.name == "out":  # where the file lives, not what was computed
            continue
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = ",".join(_fmt(v) for v in value)
        elif value is None:
            value = ""
        elif isinstance(value, bool):
            value = "true" if value else "false"
        else:
            value = _fmt(value)
        buf.write(f"# {f.name}={value}\n")
    cols = [f.name for f in fields(SweepRecord)]
    buf.write(",".join(cols) + "\n")
    for rec in records:
        buf.write(",".join(_fmt(getattr(rec, c)) for c in cols) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# configuration files
# ---------------------------------------------------------------------------

_LIST_KEYS = ("nr", "n", "snr_db")
_INT_KEYS = ("k", "trials", "seed", "q_levels", "paths", "count_max", "fast_iters")
_FLOAT_KEYS = ("gamma",)


def parse_config_text(text: str) -> dict:
    """Parse flat key=value configuration text (# starts a comment)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key in _LIST_KEYS:
            items = [v for v in value.split(",") if v]
            out[key] = [float(v) for v in items] if key == "snr_db" else [int(v) for v in items]
        elif key in _INT_KEYS:
            out[key] = int(value)
        elif key in _FLOAT_KEYS:
            out[key] = float(value)
        elif key == "heavy":
            out[key] = value.lower() in ("1", "true", "yes")
        elif key in ("algorithm", "out"):
            out[key] = value
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    return out


def config_from_options(options: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from flag-style option names."""
    defaults = {"q_levels": 16, "paths": 10, "heavy": False}
    merged = {**defaults, **{k: v for k, v in options.items() if v is not None}}
    try:
        return ExperimentConfig(
            nr_list=tuple(merged["nr"]),
            n_list=tuple(merged["n"]),
            k=merged["k"],
            snr_db_list=tuple(merged["snr_db"]),
            trials=merged["trials"],
            seed=merged["seed"],
            algorithm=merged["algorithm"],
            q_levels=merged["q_levels"],
            paths=merged["paths"],
            count_max=merged.get("count_max"),
            fast_iters=merged.get("fast_iters"),
            gamma=merged.get("gamma"),
            out=merged.get("out"),
            heavy=merged["heavy"],
        )
    except KeyError as exc:
        raise ValueError(f"missing required option: {exc.args[0]}") from None


# ---------------------------------------------------------------------------
# invariant validation
# ---------------------------------------------------------------------------

@dataclass
class InvariantCheck:
    name: str
    passed: bool
    max_violation: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{self.name:<26s} {status}  max violation = {self.max_violation:.3e}{extra}"


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __str__(self) -> str:
        return "\n".join(c.line() for c in self.checks)


def _random_composition(rng: np.random.Generator, total: int, parts: int) -> tuple:
    if parts == 1:
        return (total,)
    cuts = np.sort(rng.choice(np.arange(1, total), size=parts - 1, replace=False))
    bounds = np.concatenate(([0], cuts, [total]))
    return tuple(int(v) for v in np.diff(bounds))


def validate(instances: int = 50, seed: int = 2026, backend=None, stream=None) -> ValidationReport:
    """Run the invariant suite on seeded random instances and print one line
    per invariant with the largest observed violation.

    Failures are reported (not raised); ``backend`` selects the combining
    kernel under test.
    """
    if stream is None:
        stream = sys.stdout
    report = ValidationReport()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    phase_set = comb_mod.PhaseSet()

    # Shared instance pool: random channels, allocations, SNRs.
    pool = []
    for i in range(instances):
        k = int(rng.choice([2, 4]))
        n_r = int(rng.choice([8, 16, 32, 64]))
        n = int(rng.integers(1, min(6, n_r) + 1))
        snr_db = float(rng.uniform(-5.0, 15.0))
        params = ChannelParams(n_r, k)
        h = generate_channel(params, trial_rng(seed, 0, i))
        parts = _random_composition(rng, n_r, n)
        quantize = bool(i % 2)
        pool.append((h, parts, metrics.snr_db_to_rho(snr_db), quantize))

    results = [
        (
            h,
            rho,
            quantize,
            comb_mod.factorized_combining(h, parts, rho, phase_set, quantize, backend),
        )
        for (h, parts, rho, quantize) in pool
    ]

    # 1. factorized sum equals the log-det rate
    viol = 0.0
    for h, rho, _, res in results:
        det_rate = metrics.achievable_rate(h, res.combiner, rho)
        viol = max(viol, abs(res.total_rate - det_rate))
    report.checks.append(InvariantCheck("lemma1_equivalence", viol <= 1e-9, viol))

    # 2. tr(Q_n^{-1}) never increases
    viol = 0.0
    for _, _, _, res in results:
        viol = max(viol, float(np.max(np.diff(res.qinv_traces))))
    report.checks.append(InvariantCheck("trace_monotone", viol <= 1e-12, viol))

    # 3. each trace decrement stays below one, so tr(Q_{N-1}^{-1}) stays
    #    above K - (N - 1)
    worst = 0.0
    floor_ok = True
    for h, _, _, res in results:
        steps = -np.diff(res.qinv_traces)
        worst = max(worst, float(np.max(steps)))
        k = h.entries.shape[1]
        n = res.mu1.shape[0]
        if res.qinv_traces[-2] <= k - (n - 1) - 1e-9:
            floor_ok = False
    report.checks.append(
        InvariantCheck("trace_step_below_one", worst < 1.0 and floor_ok, worst, "step size")
    )

    # 4. rate <= ub1 <= ub
    viol = 0.0
    for _, rho, _, res in results:
        ub1 = metrics.upper_bound_ub1(res.mu1, rho)
        ub = metrics.upper_bound_ub(res.mu1, rho)
        viol = max(viol, res.total_rate - ub1, ub1 - ub)
    report.checks.append(InvariantCheck("sandwich_bounds", viol <= 1e-9, viol))

    # 5. enumeration counts against closed forms and the composition filter
    mism = 0
    for n_r, n in ((32, 4), (16, 4), (12, 3), (9, 2)):
        count = sum(1 for _ in alloc_mod.enumerate_compositions(n_r, n))
        if count != math.comb(n_r - 1, n - 1):
            mism += 1
        filtered = [
            p
            for p in alloc_mod.enumerate_compositions(n_r, n)
            if all(a <= b for a, b in zip(p, p[1:]))
        ]
        if filtered != list(alloc_mod.enumerate_partitions_nondecreasing(n_r, n)):
            mism += 1
    if sum(1 for _ in alloc_mod.enumerate_partitions_nondecreasing(32, 4)) != 249:
        mism += 1
    report.checks.append(InvariantCheck("enumeration_counts", mism == 0, float(mism), "mismatches"))

    # 6. quantized combiners stay on the feasible set, near the unquantized
    #    phases, and keep orthonormal columns
    viol = 0.0
    for _, _, quantize, res in results:
        if not quantize:
            continue
        combiner = res.combiner
        for m, w, u in zip(
            combiner.allocation.parts, combiner.weights, res.unquantized_vectors
        ):
            viol = max(viol, float(np.max(np.abs(np.abs(w) * np.sqrt(m) - 1.0))))
            dphi = np.angle(w * np.conj(u))
            mask = np.abs(u) > 0
            if np.any(mask):
                excess = np.abs(dphi[mask]) - (np.pi / phase_set.num_levels + 1e-12)
                viol = max(viol, float(np.max(excess)))
        wmat = combiner.to_matrix()
        gram = wmat.conj().T @ wmat
        viol = max(viol, float(np.max(np.abs(gram - np.eye(gram.shape[0])))))
    report.checks.append(InvariantCheck("quantization_feasible", viol <= 1e-12, viol))

    # 7. row ordering and response normalization
    viol = 0.0
    for h, _, _, _ in results[: min(10, len(results))]:
        ordered = order_rows_desc_norm(h)
        norms = np.linalg.norm(ordered.entries, axis=1)
        viol = max(viol, float(np.max(np.diff(norms), initial=-np.inf)))
        if not np.array_equal(h.entries[ordered.row_permutation], ordered.entries):
            viol = max(viol, 1.0)
    for phi in rng.uniform(0.0, 2 * np.pi, size=8):
        a = array_response(float(phi), 16)
        viol = max(viol, abs(float(np.linalg.norm(a)) - 1.0))
    report.checks.append(InvariantCheck("ordering_properties", viol <= 1e-12, viol))

    # 8. plain-text channel round trip is exact
    import os
    import tempfile

    viol = 0.0
    h = results[0][0]
    fd, path = tempfile.mkstemp(suffix=".txt")
    os.close(fd)
    try:
        write_channel_txt(h, path)
        back = read_channel_txt(path)
        viol = float(np.max(np.abs(back.entries - h.entries)))
    finally:
        os.unlink(path)
    report.checks.append(InvariantCheck("channel_text_roundtrip", viol == 0.0, viol))

    for check in report.checks:
        print(check.line(), file=stream)
    return report
