"""Configuration-driven command line: single runs, sweeps, acceptance.

Subcommands
-----------
single  one cloud realization: decay curves, rates, directivity
sweep   ensembles over (N, k0 R0) points with scaling-exponent fits
accept  the numbered verification battery (criteria 1-10)

All physical inputs live in one TOML file; lengths are given in units of
1/k0 (key ``r0_k0``), rates in units of gamma1, times in units of
1/gamma1.  Machine-readable outputs (results.json, records.jsonl, *.csv)
are byte-identical across reruns with the same config and seed; the
human summary (summary.txt) additionally carries wall-clock timings.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .acceptance import DEFAULT_SEED, run_acceptance
from .cloud import cloud_params_from_dict, sample_cloud, write_positions_csv
from .dicke import build_basis, project
from .dynamics import (
    afterglow_state,
    evolve,
    gamma_r,
    initial_state,
    pair_kernel_rates,
)
from .errors import ConfigError, NumericalDecompositionError, ParameterError
from .kernel import build_decay_matrix
from .observables import SweepSpec, angular_pattern, fit_rate, scaling_sweep, survival_probability

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc


def _time_grid(cfg: dict, params) -> np.ndarray:
    """Grid in absolute time; defaults span both decay regimes."""
    tg = cfg.get("time_grid", {})
    gamma1 = params.gamma1
    k0r0 = params.k0r0
    gamma_col_an = gamma1 * params.n_atoms / k0r0**2
    gamma_r_an = gamma1 * params.n_atoms / (2.0 * k0r0**4)
    start = float(tg.get("t_start_gamma1", 1e-2 * gamma1 / gamma_col_an)) / gamma1
    stop = float(tg.get("t_stop_gamma1", 10.0 * gamma1 / gamma_r_an)) / gamma1
    points = int(tg.get("points", 64))
    spacing = tg.get("spacing", "log")
    if points < 2 or stop <= start or start <= 0 and spacing == "log":
        raise ConfigError(f"bad time grid: start={start}, stop={stop}, points={points}")
    if spacing == "log":
        return np.geomspace(start, stop, points)
    if spacing == "linear":
        return np.linspace(start, stop, points)
    raise ConfigError(f"spacing must be 'log' or 'linear', got {spacing!r}")


def _validity_warnings(params) -> list:
    warnings = []
    if params.k0r0 < 5.0:
        warnings.append(
            f"k0*R0 = {params.k0r0:g}: sample is not much larger than the wavelength; "
            "large-sample formulas are unreliable"
        )
    if params.optical_depth < 1.0:
        warnings.append(
            f"N/(k0*R0)^2 = {params.optical_depth:g} < 1: collective forward emission "
            "does not dominate incoherent single-atom scattering"
        )
    return warnings


def _json_dump(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n")


def run_single(config: dict, out: Path, quiet: bool) -> dict:
    if "cloud" not in config:
        raise ConfigError("single mode needs a [cloud] table")
    params = cloud_params_from_dict(config["cloud"])
    single_cfg = config.get("single", {})
    tgrid = _time_grid(config, params)  # validate before any computation
    angular_order = int(config.get("quadrature", {}).get("angular_order", 0))
    warnings = _validity_warnings(params)

    cloud = sample_cloud(params, stream=int(single_cfg.get("stream", 0)))
    dm = build_decay_matrix(cloud)
    state0 = initial_state(cloud)
    gamma_col, gamma_r_full = pair_kernel_rates(cloud)

    basis = build_basis(params.n_atoms) if params.n_atoms >= 2 else None
    survival = []
    c_sym_abs = []
    for t in tgrid:
        state = evolve(state0, dm, float(t))
        survival.append(survival_probability(state))
        if basis is not None:
            c_sym_abs.append(abs(project(state, basis).c_sym))
        else:
            c_sym_abs.append(abs(state.beta[0]))

    early = None
    sel = (tgrid * gamma_col >= 0.01) & (tgrid * gamma_col <= 0.3)
    if np.count_nonzero(sel) >= 4:
        fit = fit_rate(tgrid[sel], np.asarray(survival)[sel])
        early = {"rate": fit.rate, "stderr": fit.stderr,
                 "oracle_2_gamma_col": 2.0 * gamma_col}

    pattern = None
    if single_cfg.get("forward_pattern", True):
        pat = angular_pattern(state0, cloud, grid=angular_order or None)
        pattern = {"forward_fraction": pat.forward_fraction,
                   "theta_c": pat.theta_c,
                   "forward_intensity": pat.forward_intensity}

    results = {
        "mode": "single",
        "params": {"n_atoms": params.n_atoms, "k0r0": params.k0r0,
                   "gamma1": params.gamma1, "seed": params.seed},
        "diagnostics": {"k0r0": params.k0r0, "optical_depth": params.optical_depth},
        "warnings": warnings,
        "gamma_col": gamma_col,
        "gamma_col_excess": gamma_col - params.gamma1,
        "gamma_r": gamma_r_full if not np.isnan(gamma_r_full) else None,
        "gamma_r_excess": (gamma_r_full - params.gamma1)
        if not np.isnan(gamma_r_full) else None,
        "early_rate_fit": early,
        "forward_pattern": pattern,
    }
    if params.n_atoms >= 2:
        ag = afterglow_state(cloud)
        rate = gamma_r(cloud, ag, dm)
        results["gamma_r_analytic"] = rate.analytic

    out.mkdir(parents=True, exist_ok=True)
    with open(out / "survival.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "survival", "c_sym_abs"])
        for t, s, c in zip(tgrid, survival, c_sym_abs):
            writer.writerow([repr(float(t)), repr(float(s)), repr(float(c))])
    if single_cfg.get("export_positions", False):
        write_positions_csv(cloud, out / "positions.csv")
    if single_cfg.get("export_amplitudes", False):
        with open(out / "amplitudes.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["t"]
            for j in range(params.n_atoms):
                header += [f"re_beta_{j}", f"im_beta_{j}"]
            writer.writerow(header)
            for t in tgrid:
                beta = evolve(state0, dm, float(t)).beta
                row = [repr(float(t))]
                for b in beta:
                    row += [repr(b.real), repr(b.imag)]
                writer.writerow(row)
    _json_dump(results, out / "results.json")

    lines = [
        "single-realization run",
        f"  N = {params.n_atoms}, k0*R0 = {params.k0r0:g}, gamma1 = {params.gamma1:g}, "
        f"seed = {params.seed}",
        f"  optical depth N/(k0*R0)^2 = {params.optical_depth:.4g}",
        f"  gamma_col = {gamma_col:.6g} (cooperative excess {gamma_col - params.gamma1:.6g})",
    ]
    if results.get("gamma_r") is not None:
        lines.append(f"  gamma_r   = {results['gamma_r']:.6g} "
                     f"(cooperative excess {results['gamma_r_excess']:.6g})")
    if early:
        lines.append(f"  early-window survival rate = {early['rate']:.6g} "
                     f"(oracle 2*gamma_col = {early['oracle_2_gamma_col']:.6g})")
    if pattern:
        lines.append(f"  forward fraction (theta_c = {pattern['theta_c']:.3g}) = "
                     f"{pattern['forward_fraction']:.4f}")
    for w in warnings:
        lines.append(f"  WARNING: {w}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    if not quiet:
        print("\n".join(lines))
    return results


def run_sweep(config: dict, out: Path, quiet: bool, threads: int | None) -> dict:
    sweep_cfg = config.get("sweep")
    if not sweep_cfg:
        raise ConfigError("sweep mode needs a [sweep] table")
    cloud_cfg = config.get("cloud", {})
    try:
        spec = SweepSpec(
            n_atoms=tuple(int(n) for n in sweep_cfg["n_atoms"]),
            k0r0=tuple(float(k) for k in sweep_cfg["k0r0"]),
            realizations=int(sweep_cfg["realizations"]),
            gamma1=float(cloud_cfg.get("gamma1", 1.0)),
            seed=int(cloud_cfg.get("seed", 0)),
            record_forward=bool(sweep_cfg.get("record_forward", False)),
            record_rates=bool(sweep_cfg.get("record_rates", False)),
            fit_exponents=bool(sweep_cfg.get("fit_exponents", True)),
            threads=threads or int(sweep_cfg.get("threads", 1)),
        )
    except KeyError as exc:
        raise ConfigError(f"sweep table is missing required key {exc}") from exc
    try:
        report = scaling_sweep(spec)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc

    out.mkdir(parents=True, exist_ok=True)
    payload = report.to_dict()
    for point in payload["points"]:
        point["warnings"] = _validity_warnings(
            cloud_params_from_dict({"n_atoms": point["n_atoms"], "r0_k0": point["k0r0"],
                                    "gamma1": spec.gamma1})
        )
    _json_dump(payload, out / "results.json")
    report.write_csv(out / "sweep_summary.csv")
    report.write_jsonl(out / "records.jsonl")

    lines = ["ensemble sweep"]
    for p in report.points:
        lines.append(
            f"  N = {p.n_atoms:5d}  k0*R0 = {p.k0r0:6g}  depth = {p.optical_depth:8.3g}  "
            f"gamma_col = {p.mean_gamma_col:.4g} +- {p.se_gamma_col:.2g}  "
            f"gamma_r = {p.mean_gamma_r:.4g} +- {p.se_gamma_r:.2g}"
        )
    for name, fit in sorted(report.exponents.items()):
        lines.append(f"  slope {name}: {fit.slope:+.3f} +- {fit.stderr:.3f}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    if not quiet:
        print("\n".join(lines))
    return payload


def run_accept(config: dict, out: Path, quiet: bool, seed_override: int | None) -> dict:
    accept_cfg = config.get("accept", {})
    seed = seed_override if seed_override is not None else int(accept_cfg.get("seed", DEFAULT_SEED))
    progress = None if quiet else print
    report = run_acceptance(seed=seed, progress=progress)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.json").write_text(report.to_json() + "\n")
    lines = [f"acceptance run, seed = {seed}"]
    lines += report.summary_lines()
    n_pass = sum(r.passed for r in report.results)
    lines.append(f"passed {n_pass}/{len(report.results)} criteria")
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    if not quiet:
        print(lines[-1])
    return report.payload()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dickesim",
        description="cooperative single-photon emission simulator",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("single", "sweep", "accept"):
        p = sub.add_parser(mode)
        p.add_argument("--config", type=Path, default=None,
                       help="TOML run configuration")
        p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory (default ./out)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the configured seed")
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes for ensemble sweeps")
        p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.mode == "accept":
            config = load_config(args.config) if args.config else {}
        else:
            if args.config is None:
                raise ConfigError(f"{args.mode} mode requires --config")
            config = load_config(args.config)
        if args.seed is not None and "cloud" in config:
            config = dict(config)
            config["cloud"] = dict(config["cloud"], seed=args.seed)
        if args.mode == "single":
            run_single(config, args.out, args.quiet)
        elif args.mode == "sweep":
            run_sweep(config, args.out, args.quiet, args.threads)
        else:
            run_accept(config, args.out, args.quiet, args.seed)
    except (ConfigError, ParameterError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalDecompositionError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
