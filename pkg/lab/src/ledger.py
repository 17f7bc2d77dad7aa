"""Sweeps over N and t: the I_1 ... I_6 ledger and the inflation demonstration.

Every row is a pure function of the experiment configuration. Sweep points
run in a process pool; rows are collected in sweep order.
"""

import hashlib
import json
import logging
import math
import time
from collections import defaultdict
from multiprocessing import Pool

import numpy as np
from scipy.optimize import brentq
from scipy.stats import linregress

from . import config as env
from .besov_norm import besov_norm, comparison_sum
from .errors import CapacityError
from .schemas import (
    ExperimentConfig,
    InflationDemo,
    InflationReport,
    LedgerRow,
)
from .second_iterate import (
    assemble_component,
    high_frequency_sum,
    linear_sum,
    measure_component_norms,
)
from .sequences import (
    SequenceFamily,
    build_initial_data,
    condition_b_sides,
    family_hash,
    generate_family,
    last_index,
)
from .spline_profiles import semigroup_apply
from .version import get_version

logger = logging.getLogger(__name__)

# largest N tried when extrapolating
_EXTRAPOLATION_CAP = 2.0**62


def _block_sum(N: int, delta: float, exponent: float) -> float:
    """sum_{j=N}^{floor((1+delta) N)} j^-exponent, summed smallest term first."""
    return math.fsum(j**-exponent for j in range(last_index(N, delta), N - 1, -1))


def _approximate_block_sum(N: float, delta: float, exponent: float) -> float:
    """Integral plus trapezoid end correction of the block sum, for real N."""
    top = (1.0 + delta) * N
    if exponent == 1.0:
        integral = math.log(top / N)
    else:
        power = 1.0 - exponent
        integral = (top**power - N**power) / power
    return integral + 0.5 * (N**-exponent + top**-exponent)


def i1_exponent(cfg: ExperimentConfig) -> float:
    return (1.0 + cfg.epsilon) * (2 * cfg.ell + 1) / cfg.q


def config_hash(cfg: ExperimentConfig) -> str:
    """sha256 prefix of the canonical configuration; the output path is ignored."""
    payload = cfg.model_dump(mode="json", exclude={"output_dir"})
    canonical = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def analytic_columns(cfg: ExperimentConfig, N: int) -> dict[str, float]:
    """I_1 and I_6, which depend on N only."""
    return {
        "I1": _block_sum(N, cfg.delta, i1_exponent(cfg)),
        "I6": _block_sum(N, cfg.delta, 1.0 + cfg.epsilon),
    }


def family_columns(family: SequenceFamily, t: float) -> dict[str, float]:
    """I_2 ... I_5 with unit constants and the condition (b) margin.

    I_2 and I_3 carry 1/(t^(m+2) k_N); I_4 carries 1/t^2. The sums over
    k < ell are empty for ell = 1.
    """
    ell, m = family.ell, family.m
    scale = 1.0 / (t ** (m + 2.0) * float(family.k_N))
    b_lhs, b_rhs = condition_b_sides(family)
    exponent = (1.0 + family.epsilon) * (2 * ell + 1) / family.q
    i1 = _block_sum(family.N, family.delta, exponent)
    lower = range(1, ell)
    return {
        "I2": scale * i1,
        "I3": scale * b_lhs ** (2 * ell + 1),
        "I4": math.fsum(high_frequency_sum(family, k) for k in lower) / t**2,
        "I5": scale * math.fsum(linear_sum(family, k) ** (2 * k + 1) for k in lower),
        "margin_b": b_rhs - b_lhs,
    }


def time_grid(cfg: ExperimentConfig, k_N: int) -> list[tuple[float, float]]:
    """(t, t k_N) pairs: the configured times, else c / k_N for each factor c."""
    if cfg.times:
        return [(t, t * k_N) for t in cfg.times]
    return [(c / k_N, c) for c in cfg.time_factors]


def _measure_row(cfg: ExperimentConfig, family: SequenceFamily, row: LedgerRow) -> None:
    """Fill the measured columns of an OK row in place."""
    params = cfg.norm_params()
    quad = cfg.quadrature
    phi = build_initial_data(family)
    row.norm_phi = besov_norm(phi, params, quad)
    row.norm_phi_t = besov_norm(semigroup_apply(phi, row.t), params, quad)
    row.phi_ratio = row.norm_phi / comparison_sum(family)
    for k in range(1, family.ell + 1):
        component = assemble_component(
            family,
            k,
            row.t,
            quad,
            cfg.time_nodes,
            exact_time=cfg.exact_time,
            prefactor_mode=cfg.prefactor_mode,
            max_tuples=cfg.max_tuples,
        )
        summary = measure_component_norms(component, params, family, quad)
        row.components.append(summary)
        row.norm_EJ.append(summary.J_norm)
        row.norm_HF.append(summary.HF_norm)

    top = row.components[-1]
    weight = abs(top.prefactor)
    row.norm_HF1 = top.HF1_norm
    row.norm_HF2 = top.HF2_norm
    row.norm_f_ell = top.f_norm
    row.f_lower = top.f_lower
    row.J_ratio = top.J_ratio
    row.I1_measured = weight * top.J_norm
    row.I2_measured = weight * top.HF1_norm
    row.I3_measured = weight * top.HF2_norm
    lower = row.components[:-1]
    row.I4_measured = math.fsum(abs(c.prefactor) * c.J_norm for c in lower)
    row.I5_measured = math.fsum(abs(c.prefactor) * c.HF_norm for c in lower)
    row.I6_measured = row.norm_phi_t


def ledger_point(cfg: ExperimentConfig, N: int) -> tuple[list[LedgerRow], float]:
    """All rows of one N, with the elapsed wall-clock time in seconds.

    A point whose family or tuple budget exceeds its capacity keeps its
    analytic columns and is marked CAPACITY.
    """
    started = time.perf_counter()
    analytic = analytic_columns(cfg, N)
    try:
        family = generate_family(
            cfg.ell,
            cfg.p,
            cfg.q,
            cfg.epsilon,
            cfg.delta,
            cfg.M,
            N,
            cfg.strict_separation,
        )
    except CapacityError as e:
        logger.warning(f"N={N}: {e}")
        row = LedgerRow(
            N=N, t=math.nan, t_factor=math.nan, k_N=0, status="CAPACITY", **analytic
        )
        return [row], time.perf_counter() - started

    rows = []
    digest = family_hash(family)
    for t, factor in time_grid(cfg, family.k_N):
        row = LedgerRow(
            N=N,
            t=t,
            t_factor=factor,
            k_N=family.k_N,
            family_hash=digest,
            **analytic,
            **family_columns(family, t),
        )
        try:
            _measure_row(cfg, family, row)
        except CapacityError as e:
            logger.warning(f"N={N}, t={t}: {e}")
            row = _clear_measured(row)
            row.status = "CAPACITY"
        rows.append(row)
        logger.info(f"Ledger row N={N} t={t:.3e} ({row.status})")
    return rows, time.perf_counter() - started


def _clear_measured(row: LedgerRow) -> LedgerRow:
    """Reset every measured column of a row to its empty default."""
    keep = {
        "N",
        "t",
        "t_factor",
        "k_N",
        "status",
        "I1",
        "I2",
        "I3",
        "I4",
        "I5",
        "I6",
        "margin_b",
        "family_hash",
    }
    return LedgerRow(**row.model_dump(include=keep))


def _point_job(args: tuple[ExperimentConfig, int]) -> tuple[list[LedgerRow], float]:
    cfg, N = args
    return ledger_point(cfg, N)


def _strictly_monotone(values: list[float], increasing: bool) -> bool:
    pairs = zip(values, values[1:])
    return all(b > a if increasing else b < a for a, b in pairs)


def check_trends(
    cfg: ExperimentConfig, rows: list[LedgerRow]
) -> tuple[list[str], list[str]]:
    """Trend contracts over the sweep.

    I_1 increases and I_6 decreases in N, and the condition (b) margin is
    positive on every row with a family. I_4 and I_5 must decrease at a fixed
    time, so they are checked only when explicit times are configured and
    ell > 1. The measured J ratio must stay positive and within a factor 4 at
    each fixed t k_N.

    Returns:
        (failures, notes)
    """
    failures: list[str] = []
    notes: list[str] = []
    by_n = {}
    for row in rows:
        by_n.setdefault(row.N, row)
    sweep = sorted(by_n)
    if len(sweep) < 2:
        notes.append("single N in sweep: trend checks skipped")
    else:
        ordered = [by_n[N] for N in sweep]
        if not _strictly_monotone([r.I1 for r in ordered], increasing=True):
            failures.append(f"I1 not strictly increasing over N={sweep}")
        if not _strictly_monotone([r.I6 for r in ordered], increasing=False):
            failures.append(f"I6 not strictly decreasing over N={sweep}")

    for row in rows:
        if row.k_N and not row.margin_b > 0:
            failures.append(f"condition (b) margin {row.margin_b!r} at N={row.N}")

    groups: dict[float, list[LedgerRow]] = defaultdict(list)
    for row in rows:
        if row.k_N:
            groups[row.t if cfg.times else row.t_factor].append(row)
    for key, group in sorted(groups.items()):
        group.sort(key=lambda r: r.N)
        if cfg.times and cfg.ell > 1 and len(group) > 1:
            for column in ("I4", "I5"):
                values = [getattr(r, column) for r in group]
                if not _strictly_monotone(values, increasing=False):
                    failures.append(f"{column} not strictly decreasing at t={key}")
        ratios = [r.J_ratio for r in group if r.status == "OK"]
        if not ratios:
            continue
        if min(ratios) <= 0 or max(ratios) > 4 * min(ratios):
            where = "t" if cfg.times else "t k_N"
            failures.append(
                f"J ratio outside a factor 4 at {where}={key}: "
                f"{min(ratios)!r} .. {max(ratios)!r}"
            )
    if cfg.ell == 1:
        notes.append("ell = 1: I4 and I5 are empty sums")
    elif not cfg.times:
        notes.append("I4 and I5 trends need explicit times; skipped on the t k_N grid")
    return failures, notes


def run_ledger(cfg: ExperimentConfig, threads: int | None = None) -> InflationReport:
    """Run the sweep and evaluate the trend contracts.

    Args:
        cfg: Experiment configuration
        threads: Worker processes; defaults to ``LAB_THREADS``

    Returns:
        Report with one row per (N, t); status FAILED lists the violated trends

    Raises:
        CapacityError: If every row of the sweep is a capacity row
    """
    threads = threads or env.threads()
    jobs = [(cfg, N) for N in cfg.sweep]
    logger.info(f"Running ledger over N={cfg.sweep} with {threads} worker(s)")
    if threads > 1 and len(jobs) > 1:
        with Pool(min(threads, len(jobs))) as pool:
            results = pool.map(_point_job, jobs)
    else:
        results = [_point_job(job) for job in jobs]

    rows = [row for point_rows, _ in results for row in point_rows]
    timings = {f"N={N}": seconds for N, (_, seconds) in zip(cfg.sweep, results)}
    if all(row.status == "CAPACITY" for row in rows):
        raise CapacityError(f"every sweep point exceeded its capacity (N={cfg.sweep})")

    failures, notes = check_trends(cfg, rows)
    for row in rows:
        for summary in row.components:
            if not summary.triangle_ok:
                failures.append(f"triangle bound violated at N={row.N}, t={row.t}")
    report = InflationReport(
        version=get_version(),
        ell=cfg.ell,
        config_hash=config_hash(cfg),
        status="FAILED" if failures else "OK",
        rows=rows,
        failures=failures,
        notes=notes,
        timings=timings,
    )
    for failure in failures:
        logger.warning(f"Trend failure: {failure}")
    logger.info(f"Ledger finished: {len(rows)} rows, status {report.status}")
    return report


def _extrapolate_N(cfg: ExperimentConfig, i1_target: float) -> int | None:
    """Smallest N whose approximate I_1 reaches ``i1_target``, or None."""
    exponent = i1_exponent(cfg)

    def gap(N: float) -> float:
        return _approximate_block_sum(N, cfg.delta, exponent) - i1_target

    lo = float(max(cfg.sweep))
    if gap(lo) >= 0:
        return int(lo)
    hi = lo
    while gap(hi) < 0:
        hi *= 2.0
        if hi > _EXTRAPOLATION_CAP:
            return None
    return math.ceil(brentq(gap, hi / 2.0, hi))


def run_inflation_demo(
    cfg: ExperimentConfig, R_target: float, threads: int | None = None
) -> InflationReport:
    """Measure ||f_ell lower surrogate(t)|| / ||phi^(N)|| and extrapolate in N.

    The target ratio is R_target^2. A row reaching it is reported as the
    ACHIEVED witness. Otherwise log(ratio) is fitted against log(I_1) on the
    t k_N group of the best row and the fitted line is solved for the N whose
    I_1 reaches the target (EXTRAPOLATED). Fewer than two usable points or a
    non-positive slope give NOT_EXTRAPOLABLE.
    """
    report = run_ledger(cfg, threads)
    target = R_target**2
    usable = [
        r for r in report.rows if r.status == "OK" and r.f_lower > 0 and r.norm_phi > 0
    ]
    demo = InflationDemo(R_target=R_target, label="NOT_EXTRAPOLABLE")
    if not usable:
        report.notes.append("no row with a positive lower surrogate")
        report.demo = demo
        return report

    ratio = {id(r): r.f_lower / r.norm_phi for r in usable}
    best = max(usable, key=lambda r: ratio[id(r)])
    demo.best_ratio = ratio[id(best)]
    demo.witness_N, demo.witness_t = best.N, best.t
    if demo.best_ratio >= target:
        demo.label = "ACHIEVED"
        logger.info(f"Inflation ratio {demo.best_ratio:.3e} reached at N={best.N}")
        report.demo = demo
        return report

    group = [r for r in usable if r.t_factor == best.t_factor]
    if len({r.N for r in group}) >= 2:
        x = np.log([r.I1 for r in group])
        y = np.log([ratio[id(r)] for r in group])
        fit = linregress(x, y)
        demo.slope = float(fit.slope)
        demo.intercept = float(fit.intercept)
        demo.r_squared = float(fit.rvalue**2)
        if demo.slope > 0:
            i1_target = math.exp((math.log(target) - demo.intercept) / demo.slope)
            demo.extrapolated_N = _extrapolate_N(cfg, i1_target)
            if demo.extrapolated_N is not None:
                demo.label = "EXTRAPOLATED"
    if demo.label == "NOT_EXTRAPOLABLE":
        report.notes.append("ratio trend does not support an extrapolation")
    logger.info(
        f"Inflation demo R={R_target}: {demo.label}, best ratio {demo.best_ratio:.3e}"
    )
    report.demo = demo
    return report
