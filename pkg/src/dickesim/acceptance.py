"""Verification battery for the collective-emission simulator.

Each criterion function runs a pinned, seeded experiment and returns a
CriterionResult whose ``details`` contain only deterministic numbers, so
the machine-readable report is byte-identical across reruns with one
seed.  Wall-clock timings live outside the deterministic payload.

Criteria 6, 7, and the k0R0-slope part of 8 are expected failures at
their pinned parameters: the configurational shot noise of the coupling
sums and the finite optical-depth correction (1 - (k0 R0)^2 / N), both
quantified here, dominate the idealized large-sample formulas in those
regimes.  The details record the measured values so the failures are
auditable.
"""

from __future__ import annotations

import cmath
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import pearsonr

from .cloud import CloudParams, min_pair_distance, sample_cloud
from .dicke import build_basis, project, symmetry_check
from .dynamics import (
    build_perturbative_model,
    collective_rate,
    evolve,
    initial_state,
    pair_kernel_rates,
    solve_perturbative,
)
from .kernel import build_decay_matrix, decay_matrix_retarded
from .observables import angular_pattern

DEFAULT_SEED = 20260809

# per-criterion base seeds stay decorrelated under a common user seed
_SEED_STRIDE = 1000003


def _sanitize(obj):
    """Plain-Python copy of a payload tree (numpy scalars to float/int/bool)."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    details: dict
    elapsed: float = 0.0

    def payload(self) -> dict:
        """Deterministic part (no timings)."""
        return _sanitize({"cid": self.cid, "name": self.name,
                          "passed": bool(self.passed), "details": self.details})


def _params(n, k0r0, seed, gamma1=1.0):
    return CloudParams(n_atoms=n, k0=1.0, r0=k0r0, gamma1=gamma1, seed=seed)


def _f(x) -> float:
    return float(x)


def criterion_1(seed: int) -> CriterionResult:
    """Decay matrix equals the brute-force pair kernel; spectral rebuild."""
    t0 = time.perf_counter()
    max_entry = 0.0
    max_recon = 0.0
    for stream in range(10):
        cloud = sample_cloud(_params(6, 3.0, seed), stream=stream)
        dm = build_decay_matrix(cloud)
        for j in range(6):
            for k in range(6):
                dr = cloud.positions[j] - cloud.positions[k]
                d = math.sqrt(dr @ dr)
                s = 1.0 if d == 0.0 else math.sin(d) / d
                ref = s * cmath.exp(-1j * (dr @ cloud.params.n0))
                max_entry = max(max_entry, abs(dm.gamma[j, k] - ref))
        max_recon = max(max_recon, dm.reconstruction_error())
    passed = max_entry <= 1e-12 and max_recon <= 1e-10
    return CriterionResult(1, "kernel oracle", passed,
                           {"max_entry_error": _f(max_entry),
                            "max_reconstruction_error": _f(max_recon),
                            "tol_entry": 1e-12, "tol_reconstruction": 1e-10},
                           time.perf_counter() - t0)


def criterion_2(seed: int) -> CriterionResult:
    """Phase-rotated and unrotated kernels share one spectrum."""
    t0 = time.perf_counter()
    cloud = sample_cloud(_params(64, 5.0, seed + _SEED_STRIDE), stream=0)
    beta = build_decay_matrix(cloud, frame="beta")
    alpha = build_decay_matrix(cloud, frame="alpha")
    spec_diff = float(np.max(np.abs(np.sort(alpha.eigenvalues) - np.sort(beta.eigenvalues))))
    from .kernel import frame_phases

    u = frame_phases(cloud)
    conj_diff = float(np.max(np.abs(np.outer(u, np.conj(u)) * alpha.gamma - beta.gamma)))
    passed = spec_diff <= 1e-10 and conj_diff <= 1e-12
    return CriterionResult(2, "gauge/spectrum invariance", passed,
                           {"max_spectrum_diff": spec_diff,
                            "max_conjugation_diff": conj_diff, "tol": 1e-10},
                           time.perf_counter() - t0)


def criterion_3(seed: int) -> CriterionResult:
    """Orthonormal symmetry basis; transpositions close on the subspace."""
    t0 = time.perf_counter()
    worst_gram = 0.0
    worst_leak = 0.0
    rng = np.random.Generator(np.random.Philox(key=[seed + 2 * _SEED_STRIDE, 0]))
    ok = True
    for n in (2, 5, 16):
        basis = build_basis(n)
        full = basis.full_matrix()
        worst_gram = max(worst_gram, float(np.max(np.abs(full @ full.T - np.eye(n)))))
        for _ in range(20):
            j, l = rng.choice(n, size=2, replace=False)
            permuted = np.array(basis.f_basis)
            permuted[:, [j, l]] = permuted[:, [l, j]]
            leak = float(np.max(np.abs(basis.symmetric @ permuted.T)))
            worst_leak = max(worst_leak, leak)
            try:
                symmetry_check(basis, (int(j), int(l)))
            except Exception:
                ok = False
    passed = ok and worst_gram <= 1e-12 and worst_leak <= 1e-12
    return CriterionResult(3, "symmetry basis", passed,
                           {"max_gram_defect": worst_gram,
                            "max_symmetric_leakage": worst_leak, "tol": 1e-12},
                           time.perf_counter() - t0)


def criterion_4(seed: int) -> CriterionResult:
    """Spectral propagator against a high-order ODE integration."""
    t0 = time.perf_counter()
    cloud = sample_cloud(_params(6, 2.0, seed + 3 * _SEED_STRIDE), stream=0)
    dm = build_decay_matrix(cloud)
    s0 = initial_state(cloud)
    t_eval = np.linspace(0.0, 5.0, 11)
    sol = solve_ivp(lambda _t, y: -(dm.gamma @ y), (0.0, 5.0), s0.beta,
                    method="DOP853", t_eval=t_eval, rtol=1e-12, atol=1e-14)
    worst = 0.0
    for i, t in enumerate(t_eval):
        worst = max(worst, float(np.max(np.abs(evolve(s0, dm, t).beta - sol.y[:, i]))))
    passed = worst <= 1e-8
    return CriterionResult(4, "exact dynamics oracle", passed,
                           {"max_amplitude_diff": worst, "tol": 1e-8},
                           time.perf_counter() - t0)


def _mean_rates(n, k0r0, seed, point, realizations):
    cols = np.empty(realizations)
    rs = np.empty(realizations)
    params = _params(n, k0r0, seed)
    for r in range(realizations):
        cloud = sample_cloud(params, stream=(point << 32) | r)
        cols[r], rs[r] = pair_kernel_rates(cloud)
    return cols, rs


def _weighted_slope(xs, means, ses):
    lx = np.log(np.asarray(xs, float))
    ly = np.log(np.asarray(means, float))
    w = (np.asarray(means) / np.asarray(ses)) ** 2
    xbar = (w * lx).sum() / w.sum()
    ybar = (w * ly).sum() / w.sum()
    sxx = (w * (lx - xbar) ** 2).sum()
    slope = float((w * (lx - xbar) * (ly - ybar)).sum() / sxx)
    return slope, float(np.sqrt(1.0 / sxx))


def criterion_5(seed: int) -> CriterionResult:
    """Collective-rate scaling: excess slope 1 vs N, -2 vs k0R0, prefactor."""
    t0 = time.perf_counter()
    s5 = seed + 4 * _SEED_STRIDE
    reals = 100
    details = {"realizations": reals, "points": []}

    def run_axis(ns, krs, point_base):
        means, ses, ratios = [], [], []
        for i, (n, kr) in enumerate([(n, kr) for n in ns for kr in krs]):
            cols, _ = _mean_rates(n, kr, s5, point_base + i, reals)
            exc = cols - 1.0
            means.append(exc.mean())
            ses.append(exc.std(ddof=1) / np.sqrt(reals))
            ratios.append(cols.mean() / (n / kr**2))
            details["points"].append({
                "n_atoms": n, "k0r0": kr,
                "mean_gamma_col": _f(cols.mean()),
                "mean_excess": _f(exc.mean()),
                "se_excess": _f(exc.std(ddof=1) / np.sqrt(reals)),
                "ratio_full_vs_collective_form": _f(ratios[-1]),
            })
        return means, ses, ratios

    n_vals = (128, 256, 512, 1024)
    means_n, ses_n, ratios_n = run_axis(n_vals, (10.0,), point_base=0)
    slope_n, slope_n_se = _weighted_slope(n_vals, means_n, ses_n)
    k_vals = (6.0, 10.0, 16.0, 24.0)
    means_k, ses_k, ratios_k = run_axis((512,), k_vals, point_base=10)
    slope_k, slope_k_se = _weighted_slope(k_vals, means_k, ses_k)

    all_ratios = ratios_n + ratios_k
    pref_ok = all(0.5 <= r <= 2.0 for r in all_ratios)
    details.update({
        "slope_vs_n": _f(slope_n), "slope_vs_n_se": _f(slope_n_se),
        "slope_vs_k0r0": _f(slope_k), "slope_vs_k0r0_se": _f(slope_k_se),
        "prefactor_band_ok": pref_ok,
        "target_slope_vs_n": [0.9, 1.1], "target_slope_vs_k0r0": [-2.2, -1.8],
    })
    passed = (0.9 <= slope_n <= 1.1) and (-2.2 <= slope_k <= -1.8) and pref_ok
    return CriterionResult(5, "collective-rate scaling", passed, details,
                           time.perf_counter() - t0)


def criterion_6(seed: int) -> CriterionResult:
    """Perturbative chain: envelope at pinned parameters; basis-change oracle."""
    t0 = time.perf_counter()
    s6 = seed + 5 * _SEED_STRIDE
    # (a) |c_sym(t)| vs e^{-gamma_col t}, single realization, gamma_col t <= 2
    cloud = sample_cloud(_params(512, 12.0, s6), stream=0)
    dm = build_decay_matrix(cloud)
    gcol = collective_rate(cloud)
    s0 = initial_state(cloud)
    sym = np.full(512, 1.0 / np.sqrt(512.0))
    worst_env = 0.0
    for gt in np.linspace(0.05, 2.0, 40):
        t = gt / gcol
        c_sym = abs(np.vdot(sym, evolve(s0, dm, t).beta))
        ref = math.exp(-gt)
        worst_env = max(worst_env, abs(c_sym - ref) / ref)
    env_ok = worst_env <= 0.10

    # (b) full Dicke-basis integration vs exact evolve + project at N = 8
    cloud8 = sample_cloud(_params(8, 2.0, s6 + 1), stream=0)
    basis = build_basis(8)
    model = build_perturbative_model(cloud8, basis)
    dm8 = build_decay_matrix(cloud8)
    st8 = initial_state(cloud8)
    t_grid = np.linspace(0.0, 3.0, 7)
    sol = solve_perturbative(model, t_grid)
    worst_basis = 0.0
    for i, t in enumerate(t_grid):
        proj = project(evolve(st8, dm8, t), basis)
        worst_basis = max(worst_basis, abs(sol.numeric_c_sym[i] - proj.c_sym))
        worst_basis = max(worst_basis, float(np.max(np.abs(sol.numeric_c_f[i] - proj.c_f))))
    basis_ok = worst_basis <= 1e-8

    details = {
        "max_envelope_rel_dev": _f(worst_env), "envelope_tol": 0.10,
        "envelope_ok": env_ok, "gamma_col": _f(gcol),
        "mixed_symmetry_weight": _f(1.0 - abs(np.vdot(sym, dm.eigenvectors[:, -1])) ** 2),
        "max_basis_change_diff": _f(worst_basis), "basis_change_tol": 1e-8,
        "basis_change_ok": basis_ok,
    }
    return CriterionResult(6, "perturbative chain", env_ok and basis_ok, details,
                           time.perf_counter() - t0)


def criterion_7(seed: int) -> CriterionResult:
    """Mixing amplitudes vs the closed form; subspace-weight scaling."""
    t0 = time.perf_counter()
    s7 = seed + 6 * _SEED_STRIDE

    def saturated_cf(n, kr, stream):
        cloud = sample_cloud(_params(n, kr, s7), stream=stream)
        model = build_perturbative_model(cloud, build_basis(n), include_q=False)
        z = cloud.n0_projections()
        return np.abs(model.s) / model.gamma_col, z

    csat, z = saturated_cf(1024, 15.0, 0)
    closed = 2.0 * np.abs(z[:1023]) / (math.sqrt(1024.0) * 15.0**2)
    pear = float(pearsonr(csat, closed)[0])
    pear_ok = pear >= 0.9

    weights = []
    k_vals = (8.0, 12.0, 18.0)
    for i, kr in enumerate(k_vals):
        tot = [float(np.sum(saturated_cf(1024, kr, (i << 32) | r)[0] ** 2))
               for r in range(12)]
        weights.append(float(np.mean(tot)))
    slope = float(np.polyfit(np.log(k_vals), np.log(weights), 1)[0])
    slope_ok = -2.4 <= slope <= -1.6

    details = {
        "pearson_r": pear, "pearson_target": 0.9, "pearson_ok": pear_ok,
        "subspace_weights": [_f(w) for w in weights],
        "subspace_slope": slope, "subspace_slope_target": [-2.4, -1.6],
        "subspace_slope_ok": slope_ok,
    }
    return CriterionResult(7, "mixing amplitude", pear_ok and slope_ok, details,
                           time.perf_counter() - t0)


def criterion_8(seed: int) -> CriterionResult:
    """Afterglow-rate scaling on the cooperative excess <h|Gamma|h> - gamma1."""
    t0 = time.perf_counter()
    s8 = seed + 7 * _SEED_STRIDE
    details = {"points": []}

    def run(points, axis_key, point_base):
        means, ses, ratios, xs = [], [], [], []
        for i, (n, kr, reals) in enumerate(points):
            _, rs = _mean_rates(n, kr, s8, point_base + i, reals)
            exc = rs - 1.0
            m = exc.mean()
            se = exc.std(ddof=1) / np.sqrt(reals)
            ratio = m / (n / (2.0 * kr**4))
            means.append(m)
            ses.append(se)
            ratios.append(ratio)
            xs.append(n if axis_key == "n_atoms" else kr)
            details["points"].append({
                "n_atoms": n, "k0r0": kr, "realizations": reals,
                "mean_excess": _f(m), "se_excess": _f(se),
                "ratio_vs_collective_form": _f(ratio),
            })
        return xs, means, ses, ratios

    xs_n, means_n, ses_n, ratios_n = run(
        [(128, 4.0, 4000), (512, 4.0, 1500), (2048, 4.0, 300)], "n_atoms", 0)
    slope_n, slope_n_se = _weighted_slope(xs_n, means_n, ses_n)
    xs_k, means_k, ses_k, ratios_k = run(
        [(512, 6.0, 2000), (512, 10.0, 6000), (512, 16.0, 20000)], "k0r0", 10)
    slope_k, slope_k_se = _weighted_slope(xs_k, means_k, ses_k)

    slope_n_ok = 0.85 <= slope_n <= 1.15
    slope_k_ok = -4.3 <= slope_k <= -3.7
    pref_ok = all(0.5 <= r <= 2.0 for r in ratios_n + ratios_k)
    details.update({
        "slope_vs_n": _f(slope_n), "slope_vs_n_se": _f(slope_n_se),
        "slope_vs_n_ok": slope_n_ok,
        "slope_vs_k0r0": _f(slope_k), "slope_vs_k0r0_se": _f(slope_k_se),
        "slope_vs_k0r0_ok": slope_k_ok,
        "prefactor_band_ok": pref_ok,
        "target_slope_vs_n": [0.85, 1.15], "target_slope_vs_k0r0": [-4.3, -3.7],
        "finite_depth_model_ratios": [
            _f(1.0 - kr**2 / n) for (n, kr) in
            [(128, 4.0), (512, 4.0), (2048, 4.0), (512, 6.0), (512, 10.0), (512, 16.0)]
        ],
    })
    passed = slope_n_ok and slope_k_ok and pref_ok
    return CriterionResult(8, "afterglow-rate scaling", passed, details,
                           time.perf_counter() - t0)


def criterion_9(seed: int) -> CriterionResult:
    """Forward directivity of the freshly excited symmetric state."""
    t0 = time.perf_counter()
    cloud = sample_cloud(_params(512, 10.0, seed + 8 * _SEED_STRIDE), stream=0)
    pattern = angular_pattern(initial_state(cloud), cloud)
    peak_ok = abs(pattern.forward_intensity - 512.0) <= 1e-9 * 512.0
    grid_max = float(np.max(pattern.intensity))
    fraction_ok = pattern.forward_fraction > 0.5
    oracle = math.sqrt(2.0 * math.log(2.0)) / 10.0
    width = pattern.half_width()
    width_ok = abs(width - oracle) <= 0.2 * oracle
    details = {
        "forward_intensity": _f(pattern.forward_intensity),
        "grid_max_intensity": grid_max,
        "forward_fraction": _f(pattern.forward_fraction), "theta_c": _f(pattern.theta_c),
        "half_width": _f(width), "half_width_oracle": _f(oracle),
    }
    passed = peak_ok and fraction_ok and width_ok and grid_max <= pattern.forward_intensity * (1 + 1e-9)
    return CriterionResult(9, "forward directivity", passed, details,
                           time.perf_counter() - t0)


def criterion_10(seed: int) -> CriterionResult:
    """Light-cone buildup: silent before first crossing, static afterwards."""
    t0 = time.perf_counter()
    cloud = sample_cloud(
        CloudParams(n_atoms=32, k0=1.0, r0=2.0e4, gamma1=1.0, seed=seed + 9 * _SEED_STRIDE),
        stream=0,
    )
    dmin = min_pair_distance(cloud)
    g_early = decay_matrix_retarded(cloud, 0.01 * dmin)
    off = np.abs(g_early - np.diag(np.diagonal(g_early)))
    early = float(np.max(off))
    g_late = decay_matrix_retarded(cloud, 10.0 * cloud.params.r0, frame="beta")
    static = build_decay_matrix(cloud).gamma
    late = float(np.max(np.abs(g_late - static)))
    passed = early <= 1e-3 and late <= 1e-6
    return CriterionResult(10, "retardation buildup", passed,
                           {"k0_min_distance": _f(dmin),
                            "max_offdiag_early": early, "tol_early": 1e-3,
                            "max_static_diff_late": late, "tol_late": 1e-6},
                           time.perf_counter() - t0)


_CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
             criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@dataclass
class AcceptanceReport:
    seed: int
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def payload(self) -> dict:
        return {"seed": self.seed,
                "criteria": [r.payload() for r in self.results],
                "all_passed": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.payload(), indent=2, sort_keys=True, allow_nan=False)

    def summary_lines(self) -> list:
        lines = []
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            lines.append(f"criterion {r.cid:2d} {status}  {r.name}  [{r.elapsed:.2f}s]")
        return lines


def run_acceptance(seed: int = DEFAULT_SEED, criteria=None, progress=None) -> AcceptanceReport:
    """Execute the numbered verification experiments (all by default)."""
    report = AcceptanceReport(seed=seed)
    selected = criteria or range(1, len(_CRITERIA) + 1)
    for cid in selected:
        result = _CRITERIA[cid - 1](seed)
        report.results.append(result)
        if progress is not None:
            status = "PASS" if result.passed else "FAIL"
            progress(f"criterion {result.cid:2d} {status}  {result.name}  "
                     f"[{result.elapsed:.2f}s]")
    return report
