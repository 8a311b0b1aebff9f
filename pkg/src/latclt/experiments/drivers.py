"""Monte Carlo experiment drivers.

Every driver is a pure function of its configuration: trial i draws from the
counter-based stream ``trial_rng(seed, i)`` and the report folds the trials in
index order, so serial and parallel runs agree.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import partial
from typing import Any, NamedTuple

import numpy as np

from latclt import __version__
from latclt.analysis.cumulants import MomentTable, joint_cumulant
from latclt.analysis.distribution import variance_series
from latclt.counting.counter import count_in_domain, count_spiraling, domain_points
from latclt.dynamics.diophantine import (
    CounterMismatchError,
    FlowedTorusLattice,
    dioph_count_direct,
    dioph_level_counts,
)
from latclt.dynamics.flows import FlowElement, separation
from latclt.dynamics.sampling import haar_sample_approx, haar_sample_exact_2d, trial_rng
from latclt.dynamics.siegel import BallIndicator, BoxIndicator, siegel_transform
from latclt.experiments.runner import TrialRecord, flatten, run_trials
from latclt.experiments.schema import ConfigError, ExperimentConfig, config_to_mapping
from latclt.experiments.summary import (
    NAN,
    ProbeTable,
    Report,
    mean_with_stderr,
    schedule_statistics,
    trend_flags,
)
from latclt.geometry.angular import angular_volume, parse_target
from latclt.geometry.domains import ProductDomain, domain_mask, domain_volume
from latclt.lattice.core import UnimodularLattice
from latclt.lattice.enumeration import DEFAULT_MAX_POINTS, shortest_vector_length
from latclt.lattice.reduction import reduce_basis

logger = logging.getLogger(__name__)

# Direct re-counts are limited to T <= 2^12.
AUDIT_MAX_LEVEL = 12
# Smallest dimension covered by the counting and spiraling limit theorems.
COUNTING_THEORY_DIM = 4
# Smallest dimension covered by the Diophantine limit theorem.
DIOPHANTINE_THEORY_DIM = 2


@dataclass(frozen=True)
class RunOptions:
    """Execution settings that do not change the results.

    Attributes:
        workers: Worker processes.
        progress: Show progress bars.
        max_points: Enumeration cap per call.
    """

    workers: int = 1
    progress: bool = False
    max_points: int = DEFAULT_MAX_POINTS


class Normalization(NamedTuple):
    """Affine map ``raw -> (raw - center) / scale``."""

    center: float
    scale: float

    def apply(self, raw: float) -> float:
        return (raw - self.center) / self.scale

    def invert(self, value: float) -> float:
        """Raw count reconstructed from a normalized value."""
        return self.center + self.scale * value


def dioph_normalization(config: ExperimentConfig, T: float) -> Normalization:
    """Centering ``2^d c_1...c_d log T`` and scale ``sqrt(log T)``.

    For d = 1 (``fuchs1d``) the scale is ``sqrt(log T log log T)``.
    """
    log_T = math.log(T)
    center = config.problem.mean_coefficient * log_T
    if config.kind == "fuchs1d":
        return Normalization(center, math.sqrt(log_T * math.log(log_T)))
    return Normalization(center, math.sqrt(log_T))


def domain_normalization(config: ExperimentConfig, T: float) -> Normalization:
    """Centering ``vol(D) vol(Omega_T)`` and scale ``sqrt(vol(Omega_T))``."""
    domain = ProductDomain(config.block_system, config.a, config.b, T)
    volume = domain_volume(domain, config.volume_method)  # type: ignore[arg-type]
    if not volume > 0:
        raise ConfigError(f"domain at T={T:g} has zero volume", "T", "vol > 0")
    fraction = 1.0
    if config.target:
        fraction = angular_volume(parse_target(config.target))  # type: ignore[arg-type]
    return Normalization(fraction * volume, math.sqrt(volume))


def _new_report(config: ExperimentConfig) -> Report:
    return Report(
        kind=config.kind,
        config=config_to_mapping(config),
        version=__version__,
        seed=config.seed,
    )


def _sample_lattice(config: ExperimentConfig, rng: np.random.Generator) -> UnimodularLattice:
    if config.sampler == "exact":
        return haar_sample_exact_2d(rng)
    return haar_sample_approx(config.d, config.t0, rng)


# Diophantine counting


def _dioph_trial(
    config: ExperimentConfig,
    normalizations: Sequence[Normalization],
    max_points: int,
    index: int,
) -> list[TrialRecord]:
    rng = trial_rng(config.seed, index)
    x = rng.random(config.d)
    audited = bool(rng.random() < config.audit_rate)
    problem = config.problem
    levels = config.levels
    cumulative = np.cumsum([0, *dioph_level_counts(problem, x, levels[-1], max_points)])
    records = []
    for T, N, norm in zip(config.T, levels, normalizations, strict=True):
        raw = int(cumulative[N])
        audit = audited and N <= AUDIT_MAX_LEVEL
        if audit:
            direct = dioph_count_direct(problem, x, T)
            if direct != raw:
                raise CounterMismatchError(
                    f"Trial {index}: dynamical count {raw} != direct count {direct} at T={T:g}"
                )
        records.append(TrialRecord(index, T, raw, norm.apply(raw), audited=audit))
    return records


def _dioph_report(config: ExperimentConfig, records: list[TrialRecord]) -> Report:
    report = _new_report(config)
    report.statistics = schedule_statistics(records, config.T)
    report.flags = trend_flags(report.statistics)
    expected = config.problem.mean_coefficient
    mean_law = []
    for T in config.T:
        ratio, stderr = mean_with_stderr([r.raw_count / math.log(T) for r in records if r.T == T])
        mean_law.append({"T": T, "count_over_log_T": ratio, "stderr": stderr, "expected": expected})
    report.summary["mean_law"] = mean_law
    report.summary["audited_trials"] = len({r.trial for r in records if r.audited})
    covered = config.d >= DIOPHANTINE_THEORY_DIM
    report.flags["theory_covers_dimension"] = covered
    if not covered:
        report.notes.append(
            "d = 1 lies outside the square-integrable regime: the count has variance of "
            "order log T log log T, normalized accordingly."
        )
        logger.warning(f"d={config.d} is outside the dimension range of the limit theorem")
    return report


def _run_dioph(
    config: ExperimentConfig, options: RunOptions
) -> tuple[Report, list[TrialRecord]]:
    normalizations = tuple(dioph_normalization(config, T) for T in config.T)
    trial = partial(_dioph_trial, config, normalizations, options.max_points)
    records = flatten(run_trials(trial, config.M, options.workers, options.progress, config.kind))
    return _dioph_report(config, records), records


def run_dioph_clt(
    config: ExperimentConfig, options: RunOptions | None = None
) -> tuple[Report, list[TrialRecord]]:
    """Distribution of the normalized approximant count over random points.

    Each trial draws x uniformly from ``[0, 1]^d`` and counts along the dyadic
    flow up to the largest T; the smaller T of the schedule are read off the
    cumulative level counts. A random fraction ``audit_rate`` of trials is
    re-counted with the direct counter for every ``T <= 2^12``.

    Raises:
        ConfigError: If the configuration is not a ``dioph-clt`` one.
        CounterMismatchError: If an audited trial disagrees.
    """
    if config.kind not in ("dioph-clt", "fuchs1d"):
        raise ConfigError(f"expected kind 'dioph-clt', got {config.kind!r}", "kind", "kind")
    return _run_dioph(config, options or RunOptions())


def run_fuchs_d1(
    config: ExperimentConfig, options: RunOptions | None = None
) -> tuple[Report, list[TrialRecord]]:
    """One-dimensional approximant counts, normalized by ``sqrt(log T log log T)``.

    Raises:
        ConfigError: Unless ``kind`` is ``fuchs1d`` and ``d = 1``.
    """
    if config.kind != "fuchs1d" or config.d != 1:
        raise ConfigError("fuchs1d requires kind 'fuchs1d' and d = 1", "d", "d = 1")
    return _run_dioph(config, options or RunOptions())


# Lattice point counting and spiraling


def _domain_trial(
    config: ExperimentConfig,
    normalizations: Sequence[Normalization],
    max_points: int,
    index: int,
) -> list[TrialRecord]:
    rng = trial_rng(config.seed, index)
    lattice = _sample_lattice(config, rng)
    system = config.block_system
    domain = ProductDomain(system, config.a, config.b, config.T[-1])
    points = domain_points(lattice, domain, max_points)
    spiral = config.kind == "spiral-clt"
    if len(points) and spiral:
        in_target = parse_target(config.target).contains(system, points.vectors)  # type: ignore[arg-type]
    else:
        in_target = np.ones(len(points), dtype=bool)
    records = []
    for T, norm in zip(config.T, normalizations, strict=True):
        if len(points):
            inside = domain_mask(domain.with_T(T), points.vectors)
        else:
            inside = np.zeros(0, dtype=bool)
        total = int(np.count_nonzero(inside))
        raw = int(np.count_nonzero(inside & in_target))
        records.append(
            TrialRecord(index, T, raw, norm.apply(raw), reference_count=total if spiral else None)
        )
    return records


def _domain_report(
    config: ExperimentConfig,
    records: list[TrialRecord],
    normalizations: Sequence[Normalization],
) -> Report:
    report = _new_report(config)
    report.statistics = schedule_statistics(records, config.T)
    report.flags = trend_flags(report.statistics)
    report.summary["mean_law"] = [
        {
            "T": T,
            "count_mean": stats.raw_mean,
            "stderr": stats.raw_mean_stderr,
            "expected": norm.center,
        }
        for T, stats, norm in zip(config.T, report.statistics, normalizations, strict=True)
    ]
    covered = config.d >= COUNTING_THEORY_DIM
    report.flags["theory_covers_dimension"] = covered
    if not covered:
        report.notes.append(
            f"d = {config.d}: the counting limit theorems cover d >= {COUNTING_THEORY_DIM}."
        )
        logger.warning(f"d={config.d} is below the dimension range of the limit theorems")
    system = config.block_system
    if system.variant == "signed" and system.dim % 2 == 1:
        report.notes.append("Points with a negative product of linear forms are not counted.")
    if config.kind == "spiral-clt":
        report.summary["angular_volume"] = angular_volume(parse_target(config.target))  # type: ignore[arg-type]
        report.summary["pooled_ratio"] = [
            {"T": T, **_pooled_ratio([r for r in records if r.T == T])} for T in config.T
        ]
    return report


def _pooled_ratio(records: Sequence[TrialRecord]) -> dict[str, float]:
    """Ratio estimator ``sum |S_T| / sum |Lambda cap Omega_T|`` with its standard error."""
    y = np.array([r.raw_count for r in records], dtype=np.float64)
    x = np.array([r.reference_count or 0 for r in records], dtype=np.float64)
    total = float(np.sum(x))
    if total == 0:
        return {"ratio": NAN, "stderr": NAN}
    ratio = float(np.sum(y)) / total
    m = y.size
    if m < 2:
        return {"ratio": ratio, "stderr": NAN}
    residual = y - ratio * x
    stderr = math.sqrt(float(np.sum(residual**2)) / (m * (m - 1))) / float(np.mean(x))
    return {"ratio": ratio, "stderr": stderr}


def _run_domain(
    config: ExperimentConfig, options: RunOptions
) -> tuple[Report, list[TrialRecord]]:
    normalizations = tuple(domain_normalization(config, T) for T in config.T)
    trial = partial(_domain_trial, config, normalizations, options.max_points)
    records = flatten(run_trials(trial, config.M, options.workers, options.progress, config.kind))
    return _domain_report(config, records, normalizations), records


def run_lattice_clt(
    config: ExperimentConfig, options: RunOptions | None = None
) -> tuple[Report, list[TrialRecord]]:
    """Distribution of the normalized count ``|Lambda cap Omega_T|`` over random lattices.

    Each trial enumerates the domain once at the largest T and filters the
    points for the smaller T with the same membership test.

    Raises:
        ConfigError: If the configuration is not a ``lattice-clt`` one.
    """
    if config.kind != "lattice-clt":
        raise ConfigError(f"expected kind 'lattice-clt', got {config.kind!r}", "kind", "kind")
    return _run_domain(config, options or RunOptions())


def run_spiral_clt(
    config: ExperimentConfig, options: RunOptions | None = None
) -> tuple[Report, list[TrialRecord]]:
    """Distribution of the normalized spiraling count ``|S_T(Lambda, D)|``.

    The report also carries the pooled ratio of spiraling to domain counts,
    which tends to the angular volume of D.

    Raises:
        ConfigError: If the configuration is not a ``spiral-clt`` one.
    """
    if config.kind != "spiral-clt":
        raise ConfigError(f"expected kind 'spiral-clt', got {config.kind!r}", "kind", "kind")
    return _run_domain(config, options or RunOptions())


# Probes


def _flowed(lattice: UnimodularLattice, flow: FlowElement) -> UnimodularLattice:
    reduced, _ = reduce_basis(flow.matrix @ lattice.basis, max_condition=None)
    return UnimodularLattice(reduced)


def _mixing_trial(
    config: ExperimentConfig, times: Sequence[float], max_points: int, index: int
) -> list[float]:
    rng = trial_rng(config.seed, index)
    lattice = _sample_lattice(config, rng)
    f = BoxIndicator(np.asarray(config.box, dtype=np.float64))
    values = []
    for t in times:
        flowed = _flowed(lattice, FlowElement.equal(config.d - 1, t)) if t else lattice
        values.append(min(siegel_transform(f, flowed, max_points), config.cap))
    return values


def run_mixing_probe(config: ExperimentConfig, options: RunOptions | None = None) -> Report:
    """Decay of correlations of a capped Siegel transform along the flow.

    For each separation s the covariance of ``phi(Lambda)`` and
    ``phi(g_s Lambda)`` is estimated, with ``phi = min(f_hat, cap)`` for a box
    indicator f and ``g_s`` the equal-weight flow. The summary also carries the
    empirical third joint cumulant of ``phi`` at times 0, s and 2s.

    Returns:
        Report with table ``s, estimate, stderr`` where estimate is the
        absolute covariance.
    """
    if config.kind != "mixing-probe":
        raise ConfigError(f"expected kind 'mixing-probe', got {config.kind!r}", "kind", "kind")
    options = options or RunOptions()
    times = sorted({0.0, *config.s, *(2.0 * s for s in config.s)})
    trial = partial(_mixing_trial, config, tuple(times), options.max_points)
    phi = np.array(
        run_trials(trial, config.M, options.workers, options.progress, config.kind),
        dtype=np.float64,
    ).reshape(config.M, len(times))
    column = {t: phi[:, i] for i, t in enumerate(times)}
    base = column[0.0]
    identity = FlowElement.identity(config.d)

    rows = []
    details = []
    for s in config.s:
        estimate, stderr = _covariance(base, column[s])
        triple = np.column_stack([base, column[s], column[2 * s]])
        third = joint_cumulant(MomentTable.from_samples(triple))
        distance = separation(identity, FlowElement.equal(config.d - 1, s))
        rows.append((s, abs(estimate), stderr))
        details.append(
            {"s": s, "covariance": estimate, "stderr": stderr, "separation": distance, "cum3": third}
        )
        logger.info(f"s={s:g}: covariance {estimate:.4g} +- {stderr:.2g}, cum3 {third:.4g}")

    report = _new_report(config)
    report.table = ProbeTable("mixing", ("s", "estimate", "stderr"), tuple(rows))
    report.summary["correlations"] = details
    report.summary["mean"] = float(np.mean(base))
    largest = max(rows, key=lambda row: row[0]) if rows else None
    report.flags["largest_separation_decayed"] = (
        bool(largest[1] <= 3.0 * largest[2]) if largest else None
    )
    by_s = {row[0]: row for row in rows}
    report.flags["decay_monotone"] = all(
        by_s[2 * s][1] <= by_s[s][1] + 2.0 * by_s[2 * s][2]
        for s in config.s
        if s > 0 and 2 * s in by_s
    )
    return report


def _covariance(first: np.ndarray, second: np.ndarray) -> tuple[float, float]:
    """Plug-in covariance and the standard error of the mean of centered products."""
    products = (first - np.mean(first)) * (second - np.mean(second))
    estimate, stderr = mean_with_stderr(products)
    return estimate, stderr


def _tail_trial(config: ExperimentConfig, max_points: int, index: int) -> float:
    rng = trial_rng(config.seed, index)
    x = rng.random(config.d)
    flow = FlowedTorusLattice(config.problem, x, config.delta)
    assert config.n is not None
    reduced = np.eye(config.d + 1)
    for level in range(config.n + 1):
        reduced, _ = flow.level(level)
    return siegel_transform(BallIndicator(config.radius), UnimodularLattice(reduced), max_points)


def run_tail_probe(config: ExperimentConfig, options: RunOptions | None = None) -> Report:
    """Exceedance probabilities ``P(f_hat(a^n Lambda_x) > L)`` and their log-log slope.

    f is the indicator of the ball of radius ``config.radius`` and a the dyadic
    flow with weights w. Thresholds with no exceedance are left out of the
    least-squares fit and listed in the summary.

    Returns:
        Report with table ``L, exceedance, stderr``.
    """
    if config.kind != "tail-probe":
        raise ConfigError(f"expected kind 'tail-probe', got {config.kind!r}", "kind", "kind")
    options = options or RunOptions()
    assert config.n is not None
    trial = partial(_tail_trial, config, options.max_points)
    values = np.array(
        run_trials(trial, config.M, options.workers, options.progress, config.kind),
        dtype=np.float64,
    )
    rows = []
    for L in config.L:
        p = float(np.mean(values > L))
        rows.append((L, p, math.sqrt(p * (1.0 - p) / values.size)))
    used = [(L, p) for L, p, _ in rows if p > 0]
    dropped = [L for L, p, _ in rows if p == 0]
    if dropped:
        logger.warning(f"No exceedances at L={dropped}; dropped from the fit")
    slope = NAN
    if len(used) >= 2:
        slope = float(np.polyfit(np.log([L for L, _ in used]), np.log([p for _, p in used]), 1)[0])
    else:
        logger.warning("Fewer than two thresholds with exceedances; slope undefined")

    report = _new_report(config)
    report.table = ProbeTable("tail", ("L", "exceedance", "stderr"), tuple(rows))
    report.summary.update(
        {
            "slope": slope,
            "expected_slope": -(config.d + 1.0),
            "dropped_L": dropped,
            "max_value": float(np.max(values)),
            "mean_value": float(np.mean(values)),
            "expected_mean": BallIndicator(config.radius).integral(config.d + 1),
        }
    )
    sufficient = config.n >= 2.0 * math.log2(max(config.L))
    report.flags["level_sufficient"] = sufficient
    if not sufficient:
        report.notes.append(f"Flow level n = {config.n} is below 2 log2(max L).")
        logger.warning(f"Flow level n={config.n} is below 2 log2(max L)")
    return report


def _variance_trial(config: ExperimentConfig, max_points: int, index: int) -> list[int]:
    rng = trial_rng(config.seed, index)
    x = rng.random(config.d)
    return dioph_level_counts(config.problem, x, config.levels[-1], max_points)


def run_variance_probe(
    config: ExperimentConfig, options: RunOptions | None = None
) -> tuple[Report, list[TrialRecord]]:
    """Compare the correlation series of the level counts with the variance of their sum.

    With ``phi_n`` the count of level n, the levels ``burn_in <= n < log2 T``
    give ``C_k = E[phi_n phi_{n+k}]`` (averaged over n and trials) and
    ``Z = J^{-1/2} sum_n (phi_n - m)`` over the J levels. The series
    ``(C_0 - m^2) + 2 sum_{k=1}^K (C_k - m^2)`` approximates ``Var(Z)``.

    Returns:
        The report, with table ``k, correlation, stderr``, and one record per
        trial at the largest T.
    """
    if config.kind != "variance-probe":
        raise ConfigError(f"expected kind 'variance-probe', got {config.kind!r}", "kind", "kind")
    options = options or RunOptions()
    trial = partial(_variance_trial, config, options.max_points)
    levels = np.array(
        run_trials(trial, config.M, options.workers, options.progress, config.kind),
        dtype=np.float64,
    ).reshape(config.M, config.levels[-1])
    series = levels[:, config.burn_in :]
    span = series.shape[1]
    m = float(np.mean(series))
    lags = range(min(config.K, span - 1) + 1)

    rows = []
    correlations = []
    for k in lags:
        per_trial = np.mean(series[:, : span - k] * series[:, k:], axis=1)
        c_k, stderr = mean_with_stderr(per_trial)
        correlations.append(c_k)
        rows.append((float(k), c_k - m * m, stderr))
    predicted = variance_series(correlations, m * m)
    z = np.sum(series - m, axis=1) / math.sqrt(span)
    centered = z - np.mean(z)
    observed = float(np.mean(centered**2))
    observed_stderr = math.sqrt(
        max(float(np.mean(centered**4)) - observed**2, 0.0) / config.M
    )

    T = config.T[-1]
    norm = dioph_normalization(config, T)
    totals = np.sum(levels, axis=1)
    records = [
        TrialRecord(i, T, int(total), norm.apply(int(total))) for i, total in enumerate(totals)
    ]

    report = _new_report(config)
    report.table = ProbeTable("variance", ("k", "correlation", "stderr"), tuple(rows))
    report.statistics = schedule_statistics(records, [T])
    report.summary.update(
        {
            "level_mean": m,
            "series_variance": predicted,
            "empirical_variance": observed,
            "empirical_variance_stderr": observed_stderr,
            "levels_used": span,
        }
    )
    logger.info(
        f"Variance series {predicted:.4g} vs empirical {observed:.4g} +- {observed_stderr:.2g}"
    )
    return report, records


# One-off commands


def run_count(config: ExperimentConfig, options: RunOptions | None = None) -> dict[str, Any]:
    """Count lattice points of one lattice in one domain.

    The lattice is ``config.basis`` rescaled to covolume one, or a sample of
    ``config.sampler`` with trial index 0 when no basis is given.
    """
    options = options or RunOptions()
    if config.basis is not None:
        lattice = UnimodularLattice.from_basis(np.array(config.basis, dtype=np.float64))
    else:
        lattice = _sample_lattice(config, trial_rng(config.seed, 0))
    T = config.T[-1]
    domain = ProductDomain(config.block_system, config.a, config.b, T)
    result: dict[str, Any] = {
        "T": T,
        "count": count_in_domain(lattice, domain, options.max_points),
        "volume": domain_volume(domain, config.volume_method),  # type: ignore[arg-type]
        "basis": lattice.basis.tolist(),
    }
    if config.target is not None:
        target = parse_target(config.target)  # type: ignore[arg-type]
        result["spiral_count"] = count_spiraling(lattice, domain, target, options.max_points)
        result["angular_volume"] = angular_volume(target)
    return result


def run_volume(config: ExperimentConfig) -> dict[str, Any]:
    """Volume of the configured domain for every T of the schedule."""
    return {
        "method": config.volume_method,
        "volumes": [
            {
                "T": T,
                "volume": domain_volume(
                    ProductDomain(config.block_system, config.a, config.b, T),
                    config.volume_method,  # type: ignore[arg-type]
                ),
            }
            for T in config.T
        ],
    }


def run_sample_lattice(config: ExperimentConfig) -> dict[str, Any]:
    """Draw ``M`` lattices from the configured sampler (trial indices 0..M-1)."""
    lattices = [_sample_lattice(config, trial_rng(config.seed, i)) for i in range(config.M)]
    return {
        "sampler": config.sampler,
        "lattices": [
            {"basis": lattice.basis.tolist(), "shortest_vector": shortest_vector_length(lattice)}
            for lattice in lattices
        ],
    }


def run_experiment(
    config: ExperimentConfig, options: RunOptions | None = None
) -> tuple[Report, list[TrialRecord]]:
    """Dispatch a configuration to its driver.

    Probes without trial records return an empty record list.
    """
    kind = config.kind
    if kind == "dioph-clt":
        return run_dioph_clt(config, options)
    if kind == "fuchs1d":
        return run_fuchs_d1(config, options)
    if kind == "lattice-clt":
        return run_lattice_clt(config, options)
    if kind == "spiral-clt":
        return run_spiral_clt(config, options)
    if kind == "variance-probe":
        return run_variance_probe(config, options)
    if kind == "mixing-probe":
        return run_mixing_probe(config, options), []
    if kind == "tail-probe":
        return run_tail_probe(config, options), []
    raise ConfigError(f"{kind!r} is not an experiment", "kind", "experiment kind")
