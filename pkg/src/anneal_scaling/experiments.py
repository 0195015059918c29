"""Experiment runners: map a validated config to tables + fit summaries.

Each runner is deterministic for a fixed config (identical CSV payloads on
every run, regardless of worker count) and produces everything the figure
renderer needs, so that rendering never recomputes physics.
"""

import math
from multiprocessing import Pool

import numpy as np

from . import __version__
from .analysis import (
    adiabatic_condition_estimate,
    adiabatic_runtime_threshold,
    critical_time,
    envelope_sweep,
    find_extrema,
    fit_envelope,
    fit_power_law,
    measured_spike_half_width,
    optimal_expected_runtime,
    precision_width,
    runtime_bounds_from_envelopes,
    sample_success_curve,
    _grid_extrema,
    _leak_task,
    _refine_spike,
)
from .config import ExperimentConfig, validate
from .errors import SearchError
from .hamiltonians import BarrierProblem, SlopeProblem
from .records import (
    ResultRecord,
    Table,
    cache_lookup,
    cache_store,
    config_as_dict,
    now_iso,
    publish,
)


def _mu_key(mu) -> str:
    return f"{float(mu):g}"


def _make_record(config, tables, fits) -> ResultRecord:
    return ResultRecord(
        experiment=config.experiment,
        config=config_as_dict(config),
        timestamp=now_iso(),
        version=__version__,
        tables=tables,
        fits=fits,
    )


def _run_fig1(config: ExperimentConfig, mapper):
    """Success probability vs runtime for several slopes, on a shared tau grid."""
    curves = {}
    for mu in config.mu_values:
        curves[mu] = sample_success_curve(
            SlopeProblem(mu=mu), config.tau_min, config.tau_max,
            config.delta_tau, config.accuracy, mapper,
        )
    taus = curves[config.mu_values[0]].tau_values
    columns = ("tau",) + tuple(f"p_mu{_mu_key(mu)}" for mu in config.mu_values)
    rows = [
        (taus[i],) + tuple(float(curves[mu].p_values[i]) for mu in config.mu_values)
        for i in range(len(taus))
    ]
    fits = {}
    for mu in config.mu_values:
        ps = curves[mu].p_values
        imax = int(np.argmax(ps))
        fits[_mu_key(mu)] = {
            "max_p": float(ps[imax]),
            "tau_at_max": float(taus[imax]),
            "p_at_tau_min": float(ps[0]),
        }
    return {"p1_vs_tau": Table(columns, rows)}, fits


def _run_fig2(config: ExperimentConfig, mapper):
    """Optimal expected runtime vs n, with power-law fits of tau_n and tau_n/p_n."""
    tables, fits = {}, {}
    for mu_key in sorted(config.n_grids, key=float):
        mu = float(mu_key)
        ns = sorted(int(n) for n in config.n_grids[mu_key])
        rows = []
        for n in ns:
            r = optimal_expected_runtime(
                mu, n, accuracy=config.accuracy, mapper=mapper,
                window_factor=config.window_factor,
            )
            rows.append((float(n), r.tau_opt, r.p_opt, r.expected_runtime,
                         float(r.perfect_success)))
        table = Table(("n", "tau_opt", "p_opt", "expected_runtime", "perfect"), rows)
        tables[f"scaling_mu{_mu_key(mu)}"] = table
        tau_fit = fit_power_law([r[0] for r in rows], [r[1] for r in rows])
        exp_fit = fit_power_law([r[0] for r in rows], [r[3] for r in rows])
        fits[_mu_key(mu)] = {
            "tau_n": {"amplitude": tau_fit.amplitude, "exponent": tau_fit.exponent,
                      "residual": tau_fit.residual},
            "expected_runtime": {"amplitude": exp_fit.amplitude,
                                 "exponent": exp_fit.exponent,
                                 "residual": exp_fit.residual},
            "any_perfect": bool(any(r[4] for r in rows)),
        }
    return tables, fits


def _run_fig3(config: ExperimentConfig, mapper):
    """One slope's curve with refined extrema and both envelope fits."""
    mu = config.mu_values[0]
    curve = sample_success_curve(
        SlopeProblem(mu=mu), config.tau_min, config.tau_max,
        config.delta_tau, config.accuracy, mapper,
    )
    extrema = find_extrema(curve, config.refine_accuracy)
    upper = fit_envelope(extrema, "upper")
    lower = fit_envelope(extrema, "lower")
    tables = {
        "p1_vs_tau": Table(("tau", "p"), list(zip(curve.tau_values, curve.p_values))),
        "extrema": Table(
            ("tau", "p", "is_max"),
            [(e.tau, e.p, 1.0 if e.kind == "max" else 0.0) for e in extrema],
        ),
    }
    fits = {"mu": mu}
    for fit in (upper, lower):
        used_tau = [e.tau for e in fit.extrema_used]
        fits[fit.side] = {
            "c": fit.c, "q": fit.q, "residual": fit.residual,
            "perfect_success": fit.perfect_success,
            "tau_range": [min(used_tau), max(used_tau)],
        }
    return tables, fits


def _run_fig4(config: ExperimentConfig, mapper):
    """Envelope coefficients c_u, c_l as a function of mu."""
    summaries = envelope_sweep(
        config.mu_values, (config.tau_min, config.tau_max), config.delta_tau,
        config.accuracy, config.refine_accuracy, mapper,
    )
    rows = [
        (s.mu, s.c_upper, s.c_lower, s.q_upper, s.q_lower,
         s.residual_upper, s.residual_lower, float(s.perfect_upper))
        for s in summaries
    ]
    table = Table(
        ("mu", "c_upper", "c_lower", "q_upper", "q_lower",
         "residual_upper", "residual_lower", "perfect_upper"),
        rows,
    )
    fits = {}
    for s in summaries:
        # runtime window for a reference target: n = 100 at 75% total success
        lo, hi = runtime_bounds_from_envelopes(
            s.c_upper, s.c_lower, 0.5 * (s.q_upper + s.q_lower), 100, 0.75
        )
        fits[_mu_key(s.mu)] = {
            "c_upper": s.c_upper, "c_lower": s.c_lower,
            "q_upper": s.q_upper, "q_lower": s.q_lower,
            "perfect_upper": bool(s.perfect_upper),
            "runtime_bounds_n100_p75": [lo, hi],
        }
    return {"c_vs_mu": table}, fits


def _run_fig5(config: ExperimentConfig, mapper):
    """Runtime needed to hold the ground-state population above the cutoff."""
    tables, fits = {}, {}
    ns = sorted(int(n) for n in config.n_values)
    for mu in config.mu_values:
        rows = []
        for n in ns:
            tau = adiabatic_runtime_threshold(
                mu, n, cutoff=config.cutoff, s_grid_points=config.s_grid_points,
                evolve_accuracy=config.accuracy, mapper=mapper,
            )
            rows.append((float(n), tau))
        tables[f"threshold_mu{_mu_key(mu)}"] = Table(("n", "tau_threshold"), rows)
        fit = fit_power_law([r[0] for r in rows], [r[1] for r in rows])
        condition = [adiabatic_condition_estimate(mu, n) for n in ns]
        cond_fit = fit_power_law(ns, condition)
        fits[_mu_key(mu)] = {
            "threshold": {"amplitude": fit.amplitude, "exponent": fit.exponent,
                          "residual": fit.residual},
            "sufficient_condition": {"amplitude": cond_fit.amplitude,
                                     "exponent": cond_fit.exponent},
            "exponent_gap": cond_fit.exponent - fit.exponent,
        }
    fits["cutoff"] = config.cutoff
    return tables, fits


def _run_precision(config: ExperimentConfig, mapper):
    """Perfect-success spike: tau_c, curvature, and stopping-precision widths."""
    mu = config.mu_values[0]
    problem = SlopeProblem(mu=mu)
    fit = critical_time(problem, tau_max=config.scan_tau_max, mapper=mapper)
    rows = []
    for n in sorted(int(n) for n in config.n_values):
        formula = precision_width(fit, n, config.epsilon)
        left, right = measured_spike_half_width(problem, fit.tau_c, n, config.epsilon)
        rows.append((float(n), formula, left,
                     math.nan if right is None else right))
    table = Table(("n", "width_formula", "width_left", "width_right"), rows)
    width_fit = fit_power_law([r[0] for r in rows], [r[2] for r in rows])
    fits = {
        "mu": mu,
        "tau_c": fit.tau_c,
        "k": fit.k,
        "quadratic_residual": fit.residual,
        "fit_half_width": fit.fit_half_width,
        "epsilon": config.epsilon,
        "width_exponent": width_fit.exponent,
        "width_amplitude": width_fit.amplitude,
        "width_residual": width_fit.residual,
        "formula_agreement": [
            {"n": r[0], "measured_over_formula": r[2] / r[1]} for r in rows
        ],
    }
    return {"spike_width": table}, fits


def _barrier_problem(config: ExperimentConfig, n: int) -> BarrierProblem:
    if config.barrier_height < 0 and config.barrier_width < 0:
        return BarrierProblem.with_default_barrier(n, mu=config.mu_values[0])
    height = config.barrier_height if config.barrier_height >= 0 else float(math.ceil(n ** 0.25))
    width = config.barrier_width if config.barrier_width > 0 else math.ceil(n ** 0.25)
    center = math.ceil(n / 2)
    lo = max(0, center - (width - 1) // 2)
    hi = min(n, lo + width - 1)
    return BarrierProblem(n=n, mu=config.mu_values[0], barrier_height=height,
                          barrier_lo=lo, barrier_hi=hi)


def _run_barrier(config: ExperimentConfig, mapper):
    """Spike location and stopping-precision widths for the square-barrier model.

    The barrier breaks the exact perfect-success touch, so the spike is the
    first failure dip below spike_gate; widths are measured where the
    system's own success probability crosses 1 - epsilon.
    """
    scan_step = 0.2
    rows = []
    for n in sorted(int(n) for n in config.n_values):
        problem = _barrier_problem(config, n)
        taus = scan_step * np.arange(1, int(config.scan_tau_max / scan_step) + 1)
        jobs = [(problem, float(t), 1e-2, 1e-10) for t in taus]
        leaks = np.fromiter(mapper(_leak_task, jobs), dtype=float, count=len(taus))
        dip = None
        for kind, j in _grid_extrema(leaks):
            if kind == "min" and leaks[j] <= config.spike_gate:
                dip = j
                break
        if dip is None:
            raise SearchError(
                f"no spike dip below {config.spike_gate} found for n={n} "
                f"(deepest {leaks.min():.2e}); raise scan_tau_max or spike_gate"
            )
        tau_spike, leak_min = _refine_spike(problem, taus[dip - 1], taus[dip + 1])
        # the system's own success probability plays the role of p_n here;
        # the left crossing always exists (success -> 2^-n as tau -> 0)
        left, right = measured_spike_half_width(
            problem, tau_spike, 1, config.epsilon,
            search_cap=tau_spike - 0.25, walk_step=scan_step,
        )
        if left is None:
            raise SearchError(
                f"no left 1-epsilon crossing below the spike at n={n} "
                f"(tau_spike={tau_spike:.3f}, epsilon={config.epsilon})"
            )
        rows.append((
            float(n), problem.barrier_height, float(problem.barrier_lo),
            float(problem.barrier_hi), tau_spike, leak_min, left,
            math.nan if right is None else right,
        ))
    table = Table(
        ("n", "barrier_height", "barrier_lo", "barrier_hi",
         "tau_spike", "leak_min", "width_left", "width_right"),
        rows,
    )
    width_fit = fit_power_law([r[0] for r in rows], [r[6] for r in rows])
    fits = {
        "mu": config.mu_values[0],
        "epsilon": config.epsilon,
        "width_exponent": width_fit.exponent,
        "width_amplitude": width_fit.amplitude,
        "width_residual": width_fit.residual,
        "spikes": [{"n": r[0], "tau_spike": r[4], "leak_min": r[5]} for r in rows],
    }
    return {"barrier_spike": table}, fits


_RUNNERS = {
    "fig1": _run_fig1,
    "fig2": _run_fig2,
    "fig3": _run_fig3,
    "fig4": _run_fig4,
    "fig5": _run_fig5,
    "precision": _run_precision,
    "barrier": _run_barrier,
}


def run_experiment(config: ExperimentConfig, use_cache: bool = True):
    """Execute the configured experiment and persist its outputs.

    Returns (record, output_directory).  A cache hit replays the stored
    files without recomputation; payload rows are byte-identical either way.
    """
    from pathlib import Path

    violations = validate(config)
    if violations:
        raise ValueError("invalid config: " + "; ".join(violations))
    out_dir = Path(config.out_dir)
    config_dict = config_as_dict(config)
    if use_cache:
        cached = cache_lookup(out_dir, config.experiment, config_dict)
        if cached is not None:
            return cached, publish(cached, out_dir)

    runner = _RUNNERS[config.experiment]
    if config.workers > 1:
        with Pool(config.workers) as pool:
            tables, fits = runner(config, pool.map)
    else:
        tables, fits = runner(config, map)
    record = _make_record(config, tables, fits)
    cache_store(record, out_dir)
    return record, publish(record, out_dir)
