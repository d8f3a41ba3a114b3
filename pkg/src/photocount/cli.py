"""Command-line frontend: JSON scenarios in, CSV/JSON data out.

A scenario file bundles a source covariance, a scatterer, a counting window
and one task.  Outputs are data only (full-precision CSV plus a JSON
summary); plotting is left to external tools, e.g.

    python -m photocount --scenario fig.json --out out/
    python -c "import pandas as p, matplotlib.pyplot as m; \
d=p.read_csv('out/pmf.csv'); m.semilogy(d.n, d.p_exact); m.show()"

Exit codes: 0 success, 2 validation/config failure, 3 when --strict
escalates a regime warning.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import core, ensembles, genfn, montecarlo, pmf
from .core import (CountingWindow, ModeCovariance, RegimeWarning, TransmissionSpec,
                   mode_covariance_from_json, mode_covariance_to_json,
                   transmission_from_json, transmission_to_json,
                   window_from_json, window_to_json)

SPEC_VERSION = "1.0"

TASKS = ("fano-sweep", "pmf", "gf-trace", "mc", "tail")

_PARAM_KEYS = {
    "fano-sweep": {"f_grid", "gamma", "include_diffusive"},
    "pmf": {"methods", "n_max", "closed_form", "seed"},
    "gf-trace": {"xi_min", "xi_points", "theta_points", "xi_max_fraction", "seed"},
    "mc": {"trials", "cells", "seed"},
    "tail": {"n_max", "decades", "seed"},
}

PMF_METHODS = ("exact", "saddle", "k_closed", "poisson", "gaussian")


class ConfigError(ValueError):
    """Scenario file is malformed or inconsistent with its task."""


@dataclass(frozen=True)
class Scenario:
    source: ModeCovariance
    scatterer: TransmissionSpec
    window: CountingWindow
    task: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}; expected one of {TASKS}")
        extra = set(self.params) - _PARAM_KEYS[self.task]
        if extra:
            raise ConfigError(f"unknown params {sorted(extra)} for task {self.task!r}")

    @classmethod
    def from_json(cls, obj: dict) -> "Scenario":
        core._require_keys(obj, {"source", "scatterer", "window", "task", "params"},
                           "scenario")
        for key in ("source", "scatterer", "window", "task"):
            if key not in obj:
                raise ConfigError(f"scenario is missing {key!r}")
        return cls(source=mode_covariance_from_json(obj["source"]),
                   scatterer=transmission_from_json(obj["scatterer"]),
                   window=window_from_json(obj["window"]),
                   task=str(obj["task"]),
                   params=dict(obj.get("params", {})))

    def to_json(self) -> dict:
        return {"source": mode_covariance_to_json(self.source),
                "scatterer": transmission_to_json(self.scatterer),
                "window": window_to_json(self.window),
                "task": self.task,
                "params": self.params}


# ---------------------------------------------------------------------------
# Deterministic output formatting
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.16e}"


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = ["," .join(header)]
    for i in range(len(columns[0])):
        rows.append(",".join(_fmt(col[i]) for col in columns))
    path.write_text("\n".join(rows) + "\n")


def write_summary(path: Path, payload: dict) -> None:
    payload = {"spec_version": SPEC_VERSION, **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _ensemble_rng(seed: int) -> np.random.Generator:
    # distinct root from the MC block streams spawned off SeedSequence(seed)
    return np.random.default_rng(np.random.SeedSequence([int(seed), 0x0E75]))


def _resolve_spectrum(scenario: Scenario, seed: int):
    """Spectrum of t mu t^dag, sampling the ensemble scatterer if needed."""
    t = scenario.scatterer
    if t.kind == "ensemble":
        density = ensembles.EigenvalueDensity.from_spec(t)
        values = ensembles.sample_eigenvalues(density, _ensemble_rng(seed))
        t = TransmissionSpec.from_eigenvalues(values)
    return core.reduce_to_spectrum(scenario.source, t), t


# ---------------------------------------------------------------------------
# Tasks
# ---------------------------------------------------------------------------

def cmd_fano_sweep(scenario: Scenario, out: Path) -> None:
    """Fano factor vs occupation for single/double barrier (and diffusive)."""
    params = scenario.params
    f_grid = np.asarray(params.get("f_grid", np.linspace(0.0, 10.0, 51)), dtype=float)
    if f_grid.size == 0:
        raise ConfigError("f_grid is empty")
    t = scenario.scatterer
    gamma = params.get("gamma", t.gamma if t.kind == "ensemble" else None)
    if gamma is None:
        raise ConfigError("fano-sweep needs a gamma (ensemble scatterer or params)")
    n = t.n if t.kind == "ensemble" else scenario.source.n

    single = ensembles.EigenvalueDensity(core.EnsembleName.SINGLE_BARRIER, n, gamma)
    double = ensembles.EigenvalueDensity(core.EnsembleName.DOUBLE_BARRIER, n, gamma)
    header = ["f", "fano_single", "fano_double"]
    cols = [f_grid,
            np.array([ensembles.fano_bose(single, f) for f in f_grid]),
            np.array([ensembles.fano_bose(double, f) for f in f_grid])]
    if params.get("include_diffusive", False):
        diffusive = ensembles.EigenvalueDensity(core.EnsembleName.DIFFUSIVE, n, gamma)
        header.append("fano_diffusive")
        cols.append(np.array([ensembles.fano_bose(diffusive, f) for f in f_grid]))

    write_csv(out / "fano_sweep.csv", header, cols)
    write_summary(out / "summary.json", {
        "task": "fano-sweep", "gamma": gamma, "rows": int(f_grid.size),
        "scenario": scenario.to_json()})


def _generating_function(scenario: Scenario, seed: int):
    """GF for pmf-like tasks, honoring the closed_form switch."""
    if scenario.params.get("closed_form", False):
        t = scenario.scatterer
        if t.kind != "ensemble" or t.ensemble_name is not core.EnsembleName.DOUBLE_BARRIER:
            raise ConfigError("closed_form requires a double-barrier ensemble scatterer")
        if not scenario.source.is_scalar:
            raise ConfigError("closed_form requires a scalar source")
        strength = scenario.window.nu * t.n * t.gamma
        return pmf.DoubleBarrierGF(occupation=scenario.source.f, strength=strength), None
    spectrum, resolved = _resolve_spectrum(scenario, seed)
    return genfn.GeneratingFunction(spectrum=spectrum, nu=scenario.window.nu), resolved


def cmd_pmf(scenario: Scenario, out: Path) -> None:
    """Aligned pmf columns for the requested methods."""
    params = scenario.params
    methods = list(params.get("methods", PMF_METHODS))
    if not methods:
        raise ConfigError("method list is empty")
    unknown = set(methods) - set(PMF_METHODS)
    if unknown:
        raise ConfigError(f"unknown pmf methods {sorted(unknown)}")
    if "k_closed" in methods and not scenario.source.is_scalar:
        raise ConfigError("k_closed needs a scalar source occupation")

    seed = int(params.get("seed", 0))
    gf, _ = _generating_function(scenario, seed)
    dist = pmf.invert_fourier(gf, n_max=params.get("n_max"))
    n_max = params.get("n_max", dist.n_max)
    ns = np.arange(n_max + 1)
    summary = gf.cumulants()

    header = ["n"]
    cols: list[np.ndarray] = [ns]

    def add(name, log_values):
        log_values = np.asarray(log_values, dtype=float)
        header.extend([f"p_{name}", f"log_p_{name}"])
        with np.errstate(over="ignore"):
            cols.extend([np.exp(log_values), log_values])

    for method in methods:
        if method == "exact":
            add("exact", dist.log_p[:n_max + 1])
        elif method == "saddle":
            vals = np.full(ns.size, np.nan)
            for i in ns[1:]:
                vals[i] = pmf.log_saddle_point(gf, int(i))
            add("saddle", vals)
        elif method == "k_closed":
            add("k_closed", pmf.k_distribution_log(scenario.source.f, summary.mean, ns))
        elif method == "poisson":
            add("poisson", pmf.poisson_log_pmf(summary.mean, ns))
        elif method == "gaussian":
            add("gaussian", pmf.gaussian_log_pmf(summary.mean, summary.variance, ns))

    write_csv(out / "pmf.csv", header, cols)
    write_summary(out / "summary.json", {
        "task": "pmf", "methods": methods,
        "mean": summary.mean, "variance": summary.variance,
        "fano": summary.fano, "c3": summary.third_cumulant,
        "diagnostics": {"normalization_defect": dist.diagnostics.normalization_defect,
                        "truncated_tail_mass_bound": dist.diagnostics.truncated_tail_mass_bound},
        "scenario": scenario.to_json()})


def cmd_gf_trace(scenario: Scenario, out: Path) -> None:
    """F on a real grid and on the imaginary axis, plus cumulants."""
    params = scenario.params
    seed = int(params.get("seed", 0))
    spectrum, _ = _resolve_spectrum(scenario, seed)
    gf = genfn.GeneratingFunction(spectrum=spectrum, nu=scenario.window.nu)

    xi_min = float(params.get("xi_min", -5.0))
    points = int(params.get("xi_points", 201))
    frac = float(params.get("xi_max_fraction", 0.9))
    hi = frac * gf.xi_max if np.isfinite(gf.xi_max) else 1.0
    xi = np.linspace(xi_min, hi, points)
    write_csv(out / "gf_real.csv", ["xi", "F"], [xi, gf.eval_real(xi)])

    theta = np.linspace(0.0, 2 * np.pi, int(params.get("theta_points", 256)))
    fi = gf.eval_imag(theta)
    write_csv(out / "gf_imag.csv", ["theta", "re_F", "im_F", "abs_char"],
              [theta, fi.real, fi.imag, np.abs(np.exp(fi))])

    c = gf.cumulants()
    write_summary(out / "summary.json", {
        "task": "gf-trace", "mean": c.mean, "variance": c.variance,
        "fano": c.fano, "c3": c.third_cumulant, "xi_max": gf.xi_max,
        "scenario": scenario.to_json()})


def cmd_mc(scenario: Scenario, out: Path) -> None:
    """Sampled counts plus empirical and analytic summaries."""
    params = scenario.params
    trials = int(params.get("trials", 10000))
    cells = int(params.get("cells", round(scenario.window.nu)))
    seed = int(params.get("seed", 0))
    if cells < 1:
        raise ConfigError("mc needs at least one coherence cell")

    t = scenario.scatterer
    if t.kind == "ensemble":
        density = ensembles.EigenvalueDensity.from_spec(t)
        t = TransmissionSpec.from_eigenvalues(
            ensembles.sample_eigenvalues(density, _ensemble_rng(seed)))

    cfg = montecarlo.McConfig(cells=cells, trials=trials, seed=seed)
    counts = montecarlo.sample_counts(scenario.source, t, cfg)
    summary = montecarlo.empirical_summary(counts)
    _, gf = montecarlo.analytic_reference(scenario.source, t, cells)
    analytic = gf.cumulants()

    write_csv(out / "counts.csv", ["trial", "count"],
              [np.arange(counts.size), counts])
    write_summary(out / "summary.json", {
        "task": "mc", "trials": trials, "cells": cells, "seed": seed,
        "empirical": {"mean": summary.mean, "variance": summary.variance,
                      "fano": summary.fano, "se_mean": summary.se_mean,
                      "se_variance": summary.se_variance, "se_fano": summary.se_fano},
        "analytic": {"mean": analytic.mean, "variance": analytic.variance,
                     "fano": analytic.fano, "c3": analytic.third_cumulant},
        "scenario": scenario.to_json()})


def cmd_tail(scenario: Scenario, out: Path) -> None:
    """Exact pmf with its fitted tail slope against the branch-point rate."""
    params = scenario.params
    seed = int(params.get("seed", 0))
    spectrum, _ = _resolve_spectrum(scenario, seed)
    gf = genfn.GeneratingFunction(spectrum=spectrum, nu=scenario.window.nu)
    dist = pmf.invert_fourier(gf, n_max=params.get("n_max"))
    rate = pmf.tail_rate(spectrum)
    fitted = pmf.fitted_tail_decay(dist, decades=float(params.get("decades", 1.0)))

    write_csv(out / "pmf.csv", ["n", "p", "log_p"], [dist.n, dist.p, dist.log_p])
    write_summary(out / "summary.json", {
        "task": "tail", "tail_rate": rate, "fitted_decay": fitted,
        "relative_gap": abs(fitted - rate) / rate,
        "lambda_max": spectrum.lambda_max,
        "diagnostics": {"normalization_defect": dist.diagnostics.normalization_defect,
                        "truncated_tail_mass_bound": dist.diagnostics.truncated_tail_mass_bound},
        "scenario": scenario.to_json()})


_RUNNERS = {"fano-sweep": cmd_fano_sweep, "pmf": cmd_pmf, "gf-trace": cmd_gf_trace,
            "mc": cmd_mc, "tail": cmd_tail}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="photocount",
        description="Counting statistics of Gaussian light behind a linear scatterer")
    parser.add_argument("--scenario", required=True, help="scenario JSON file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed")
    parser.add_argument("--strict", action="store_true",
                        help="escalate regime warnings to exit code 3")
    args = parser.parse_args(argv)

    try:
        obj = json.loads(Path(args.scenario).read_text())
        scenario = Scenario.from_json(obj)
        if args.seed is not None:
            params = dict(scenario.params)
            params["seed"] = args.seed
            scenario = Scenario(source=scenario.source, scatterer=scenario.scatterer,
                                window=scenario.window, task=scenario.task,
                                params=params)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    report = core.validate(scenario.source, scenario.scatterer, scenario.window)
    if not report.ok:
        print(f"validation failed: {report}", file=sys.stderr)
        return 2

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RegimeWarning)
        try:
            _RUNNERS[scenario.task](scenario, out)
        except (ConfigError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    regime = [w for w in caught if issubclass(w.category, RegimeWarning)]
    for w in regime:
        print(f"warning: {w.message}", file=sys.stderr)
    if regime and args.strict:
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
