"""Monte Carlo orchestration: run a scenario over an ensemble of paths,
aggregate term-by-term statistics, write CSV / JSON reports, and drive
convergence studies.

Everything here is deterministic given the config: per-path seeds are a
stable hash of (master seed, path index), aggregation runs in path-index
order, and no wall-clock data enters the outputs.
"""

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError
from .formulas import coupled_eps, coupled_mollifier_n
from .localtime import (local_time_mollifier, local_time_occupation,
                        local_time_tanaka_residual)
from .paths import simulate_jump_diffusion
from .scenarios import SURFACES, build_parts, evaluate_variant, list_scenarios
from .surfaces import moreau_envelope

CODE_VERSION = "0.1.0"


@dataclass
class ScenarioConfig:
    """Everything needed to reproduce one ensemble run."""

    scenario: str
    params: dict = field(default_factory=dict)
    t_end: float = 1.0
    dt: float = 1e-3
    n_paths: int = 1
    seed: int = 0
    variant: Optional[str] = None  # None -> scenario default
    bandwidth_rule: object = "coupled"  # "coupled" | positive float
    qv_mode: str = "analytic"
    output: Optional[str] = None  # directory for csv/json, or None
    workers: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.t_end <= 0:
            raise ConfigError("t_end must be positive")
        if self.n_paths < 1:
            raise ConfigError("n_paths must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.qv_mode not in ("analytic", "realized"):
            raise ConfigError(f"unknown qv_mode: {self.qv_mode!r}")
        if self.bandwidth_rule != "coupled":
            bw = float(self.bandwidth_rule)
            if bw <= 0:
                raise ConfigError("fixed bandwidth must be positive")
            self.bandwidth_rule = bw

    @property
    def n_steps(self):
        return max(1, int(round(self.t_end / self.dt)))

    def bandwidths(self):
        """(eps, mollifier n) implied by the bandwidth rule."""
        if self.bandwidth_rule == "coupled":
            return coupled_eps(self.dt), coupled_mollifier_n(self.dt)
        eps = float(self.bandwidth_rule)
        return eps, max(1, int(round(1.0 / eps)))


@dataclass
class EnsembleSummary:
    config: dict
    variant: str
    n_paths: int
    term_names: list
    term_stats: dict  # name -> {mean, median, se}
    lhs_stats: dict
    rhs_stats: dict
    residual_stats: dict  # mean, median, se, quantiles, abs_median, abs_mean
    provenance: dict
    reports: Optional[list] = None

    def to_json(self):
        payload = {
            "config": self.config,
            "variant": self.variant,
            "n_paths": self.n_paths,
            "term_names": self.term_names,
            "term_stats": self.term_stats,
            "lhs_stats": self.lhs_stats,
            "rhs_stats": self.rhs_stats,
            "residual_stats": self.residual_stats,
            "provenance": self.provenance,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def derive_path_seed(master_seed, path_index):
    """Stable per-path seed: hash of (master seed, path index)."""
    ss = np.random.SeedSequence([int(master_seed), int(path_index)])
    return int(ss.generate_state(1, np.uint64)[0])


def _evaluate_one(args):
    (name, params, t_end, n_steps, seed, variant, eps, n, qv_mode) = args
    _, parts = build_parts(name, params)
    bundle = simulate_jump_diffusion(parts.spec, t_end, n_steps, seed)
    report = evaluate_variant(parts, variant, bundle, eps=eps, n=n, qv_mode=qv_mode)
    return report.lhs, dict(report.terms), report.rhs, report.residual


def _column_stats(values, n):
    arr = np.asarray(values, dtype=float)
    se = float(np.std(arr, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return {"mean": float(np.mean(arr)), "median": float(np.median(arr)), "se": se}


def run_scenario(config, keep_reports=False):
    """Simulate n_paths bundles, evaluate the configured variant per path,
    aggregate in path order and (optionally) write csv + json outputs."""
    scen, parts = build_parts(config.scenario, config.params)
    variant = config.variant or scen.default_variant
    if variant not in parts.variants:
        # raise the dedicated incompatibility error with context
        evaluate_variant(parts, variant, None)
    eps, n = config.bandwidths()

    jobs = [
        (config.scenario, config.params, config.t_end, config.n_steps,
         derive_path_seed(config.seed, i), variant, eps, n, config.qv_mode)
        for i in range(config.n_paths)
    ]
    if config.workers > 1 and config.n_paths > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_evaluate_one, jobs, chunksize=8))
    else:
        results = [_evaluate_one(j) for j in jobs]

    term_names = list(results[0][1].keys())
    lhs = [r[0] for r in results]
    rhs = [r[2] for r in results]
    residual = np.array([r[3] for r in results])
    n_paths = config.n_paths

    term_stats = {
        name: _column_stats([r[1][name] for r in results], n_paths)
        for name in term_names
    }
    qs = [0.05, 0.25, 0.5, 0.75, 0.95]
    residual_stats = _column_stats(residual, n_paths)
    residual_stats["quantiles"] = {
        str(q): float(np.quantile(residual, q)) for q in qs
    }
    residual_stats["abs_mean"] = float(np.mean(np.abs(residual)))
    residual_stats["abs_median"] = float(np.median(np.abs(residual)))

    config_echo = {
        "scenario": config.scenario,
        "params": {k: float(v) for k, v in config.params.items()},
        "t_end": config.t_end,
        "dt": config.dt,
        "n_steps": config.n_steps,
        "n_paths": config.n_paths,
        "seed": config.seed,
        "variant": variant,
        "bandwidth_rule": config.bandwidth_rule,
        "qv_mode": config.qv_mode,
    }
    summary = EnsembleSummary(
        config=config_echo,
        variant=variant,
        n_paths=n_paths,
        term_names=term_names,
        term_stats=term_stats,
        lhs_stats=_column_stats(lhs, n_paths),
        rhs_stats=_column_stats(rhs, n_paths),
        residual_stats=residual_stats,
        provenance={
            "code_version": CODE_VERSION,
            "eps": eps,
            "mollifier_n": n,
            "seed_derivation": "SeedSequence([master_seed, path_index])",
        },
        reports=results if keep_reports else None,
    )
    if config.output is not None:
        write_outputs(summary, results, term_names, config.output)
    return summary


def _fmt(x):
    return format(float(x), ".17g")


def write_outputs(summary, results, term_names, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "verify.csv")
    header = ["path_id", "lhs"] + [f"term_{t}" for t in term_names] + ["rhs", "residual"]
    lines = [",".join(header)]
    for i, (lhs, terms, rhs, residual) in enumerate(results):
        row = [str(i), _fmt(lhs)]
        row += [_fmt(terms[t]) for t in term_names]
        row += [_fmt(rhs), _fmt(residual)]
        lines.append(",".join(row))
    with open(csv_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        fh.write(summary.to_json() + "\n")


def convergence_study(config, dt_list, out_dir=None):
    """One ensemble row per dt with coupled bandwidth, plus a monotonicity
    verdict on the ensemble median of |residual|."""
    dts = [float(d) for d in dt_list]
    if len(dts) < 2:
        raise ConfigError("convergence study needs at least two dt values")
    if not all(b < a for a, b in zip(dts, dts[1:])):
        raise ConfigError("dt_list must be strictly decreasing")
    rows = []
    for dt in dts:
        cfg = ScenarioConfig(
            scenario=config.scenario, params=dict(config.params),
            t_end=config.t_end, dt=dt, n_paths=config.n_paths,
            seed=config.seed, variant=config.variant,
            bandwidth_rule="coupled", qv_mode=config.qv_mode,
            workers=config.workers,
        )
        summary = run_scenario(cfg)
        eps, n = cfg.bandwidths()
        rows.append({
            "dt": dt,
            "eps": eps,
            "mollifier_n": n,
            "median_abs_residual": summary.residual_stats["abs_median"],
            "mean_abs_residual": summary.residual_stats["abs_mean"],
            "median_residual": summary.residual_stats["median"],
        })
    medians = [r["median_abs_residual"] for r in rows]
    verdict = all(b <= a for a, b in zip(medians, medians[1:]))
    table = {"rows": rows, "monotone_nonincreasing": verdict}
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        cols = ["dt", "eps", "mollifier_n", "median_abs_residual",
                "mean_abs_residual", "median_residual"]
        lines = [",".join(cols)]
        for r in rows:
            lines.append(",".join(
                _fmt(r[c]) if c != "mollifier_n" else str(r[c]) for c in cols))
        with open(os.path.join(out_dir, "converge.csv"), "w") as fh:
            fh.write("\n".join(lines) + "\n")
        with open(os.path.join(out_dir, "converge.json"), "w") as fh:
            fh.write(json.dumps(table, indent=2, sort_keys=True) + "\n")
    return table


def _localtime_one(args):
    (name, params, t_end, n_steps, seed, eps, n, qv_mode) = args
    _, parts = build_parts(name, params)
    bundle = simulate_jump_diffusion(parts.spec, t_end, n_steps, seed)
    level = parts.level
    occ = local_time_occupation(bundle, level, eps, side="right", qv_mode=qv_mode)
    mol = local_time_mollifier(bundle, level, n, qv_mode=qv_mode)
    tan = local_time_tanaka_residual(bundle, level)
    return occ.final, mol.final, tan.final


def compare_estimators(config):
    """Final-time local time at the scenario level under all three
    estimators, aggregated over the ensemble."""
    scen, parts = build_parts(config.scenario, config.params)
    eps, n = config.bandwidths()
    jobs = [
        (config.scenario, config.params, config.t_end, config.n_steps,
         derive_path_seed(config.seed, i), eps, n, config.qv_mode)
        for i in range(config.n_paths)
    ]
    if config.workers > 1 and config.n_paths > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_localtime_one, jobs, chunksize=8))
    else:
        results = [_localtime_one(j) for j in jobs]
    arr = np.asarray(results, dtype=float)
    names = ["occupation", "mollifier", "tanaka"]
    out = {
        name: _column_stats(arr[:, k], config.n_paths)
        for k, name in enumerate(names)
    }
    out["meta"] = {"level": parts.level, "eps": eps, "mollifier_n": n}
    return out


def emit_bundles(config, out_dir):
    """Raw path dump: one long CSV with the aligned driver and state paths."""
    _, parts = build_parts(config.scenario, config.params)
    os.makedirs(out_dir, exist_ok=True)
    cols = ["path_id", "t", "jump", "brownian", "y", "z", "a", "x", "a_pre", "x_pre"]
    lines = [",".join(cols)]
    for i in range(config.n_paths):
        seed = derive_path_seed(config.seed, i)
        b = simulate_jump_diffusion(parts.spec, config.t_end, config.n_steps, seed)
        for k in range(len(b.times)):
            lines.append(",".join([
                str(i), _fmt(b.times[k]), str(int(b.grid.jump_flags[k])),
                _fmt(b.b_path[k]), _fmt(b.y_path[k]), _fmt(b.z_path[k]),
                _fmt(b.a_path[k]), _fmt(b.x_path[k]),
                _fmt(b.a_pre[k]), _fmt(b.x_pre[k]),
            ]))
    path = os.path.join(out_dir, "paths.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def envelope_table(surface_name, m_values, t_range=(0.0, 1.0), a_range=(-1.0, 1.0),
                   grid_n=20, out_dir=None):
    """Moreau envelope of a registry surface tabulated over a (t, a) grid."""
    if surface_name not in SURFACES:
        raise ConfigError(f"unknown surface: {surface_name!r} "
                          f"(registry: {', '.join(sorted(SURFACES))})")
    surface = SURFACES[surface_name]
    ts = np.linspace(t_range[0], t_range[1], grid_n)
    as_ = np.linspace(a_range[0], a_range[1], grid_n)
    pad = 1.0 + (a_range[1] - a_range[0])
    box = ((t_range[0] - pad, t_range[1] + pad), (a_range[0] - pad, a_range[1] + pad))
    rows = []
    for m in m_values:
        for t in ts:
            for a in as_:
                env = moreau_envelope(surface, float(m), (float(t), float(a)), box)
                rows.append((float(m), float(t), float(a), env,
                             float(surface.b(np.asarray(t), np.asarray(a)))))
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        lines = ["m,t,a,envelope,b"]
        for r in rows:
            lines.append(",".join(_fmt(v) for v in r))
        with open(os.path.join(out_dir, "envelope.csv"), "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return rows


__all__ = [
    "ScenarioConfig", "EnsembleSummary", "run_scenario", "convergence_study",
    "compare_estimators", "emit_bundles", "envelope_table", "derive_path_seed",
    "list_scenarios",
]
