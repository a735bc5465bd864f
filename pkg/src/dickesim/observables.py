"""Emission observables: angular pattern, survival, rate fits, sweeps.

The directional emission rate of a state is the structure function

    I(n) = gamma1 |sum_j beta_j e^{i k0 (n0 - n) . r_j}|^2 / ||beta||^2,

whose average over the unit sphere reproduces the instantaneous total
decay rate <beta|Gamma|beta>/||beta||^2.  Ensemble sweeps record the
exact pair-sum rates per realization and fit log-log scaling exponents
of the cooperative excess (rate minus the single-atom floor gamma1),
which is the part obeying the collective scaling laws.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import NamedTuple

import numpy as np

from .cloud import AtomicCloud, CloudParams, sample_cloud
from .dynamics import AmplitudeState, evolve, initial_state, pair_kernel_rates
from .errors import ParameterError
from .kernel import build_decay_matrix, sphere_quadrature

_AZIMUTH_PER_POLAR = 2
_ORDER_MARGIN = 32


@dataclass(frozen=True)
class DirectionGrid:
    """Unit directions with quadrature weights summing to one."""

    directions: np.ndarray   # (M, 3)
    weights: np.ndarray      # (M,)
    n_polar: int | None = None
    n_azimuth: int | None = None


def sphere_grid(n_polar: int, n_azimuth: int | None = None) -> DirectionGrid:
    dirs, w = sphere_quadrature(n_polar, n_azimuth)
    return DirectionGrid(directions=dirs, weights=w, n_polar=n_polar,
                         n_azimuth=n_azimuth or _AZIMUTH_PER_POLAR * n_polar)


def default_polar_order(cloud: AtomicCloud) -> int:
    """Polar order resolving the fastest pair phase k0 * max distance.

    Uses the O(N) bound 2 * max|r_j| on the largest pair separation.
    """
    span = 2.0 * float(np.max(np.linalg.norm(cloud.positions, axis=1)))
    phase = cloud.params.k0 * span
    return int(math.ceil(0.5 * phase)) + _ORDER_MARGIN


def _rotate_polar_axis(directions: np.ndarray, n0: np.ndarray) -> np.ndarray:
    """Map grid directions so their polar (z) axis lands on n0."""
    if np.allclose(n0, [0.0, 0.0, 1.0], atol=1e-15):
        return directions
    # orthonormal triad (e1, e2, n0)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n0[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(n0, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n0, e1)
    return directions @ np.vstack([e1, e2, n0])


def structure_amplitude(state: AmplitudeState, cloud: AtomicCloud,
                        directions: np.ndarray) -> np.ndarray:
    """sum_j beta_j e^{i k0 (n0 - n) . r_j} for each direction n."""
    if state.frame != "beta":
        raise ParameterError("angular observables expect a beta-frame state")
    p = cloud.params
    coeff = state.beta * np.exp(1j * p.k0 * cloud.n0_projections())
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    out = np.empty(directions.shape[0], dtype=complex)
    chunk = max(1, (1 << 22) // cloud.n_atoms)
    for lo in range(0, directions.shape[0], chunk):
        block = directions[lo : lo + chunk]
        out[lo : lo + chunk] = np.exp(-1j * p.k0 * (block @ cloud.positions.T)) @ coeff
    return out


@dataclass(frozen=True)
class AngularPattern:
    """Directional emission rates on a quadrature grid.

    ``forward_fraction`` is the share of the quadrature-weighted total
    emitted within polar angle theta_c of the incident direction;
    ``forward_intensity`` is the rate evaluated exactly at n = n0.
    ``polar_theta``/``polar_profile`` hold the azimuth-averaged profile
    when the grid is a product grid (None otherwise).
    """

    grid: DirectionGrid
    intensity: np.ndarray
    theta_c: float
    forward_fraction: float
    forward_intensity: float
    polar_theta: np.ndarray | None = None
    polar_profile: np.ndarray | None = None

    def total_rate(self) -> float:
        """Sphere average of the intensity; equals <beta|Gamma|beta>/||beta||^2."""
        return float(self.grid.weights @ self.intensity)

    def half_width(self) -> float:
        """Polar angle where the azimuth-averaged lobe falls to half its peak."""
        if self.polar_profile is None:
            raise ParameterError("half_width needs a product grid with polar rings")
        half = 0.5 * self.forward_intensity
        theta = np.concatenate([[0.0], self.polar_theta])
        prof = np.concatenate([[self.forward_intensity], self.polar_profile])
        below = np.flatnonzero(prof < half)
        if below.size == 0:
            raise ParameterError("profile never falls below half maximum")
        i = below[0]
        t0, t1 = theta[i - 1], theta[i]
        p0, p1 = prof[i - 1], prof[i]
        return float(t0 + (p0 - half) * (t1 - t0) / (p0 - p1))


def angular_pattern(state: AmplitudeState, cloud: AtomicCloud,
                    grid: DirectionGrid | int | None = None,
                    theta_c: float | None = None) -> AngularPattern:
    """Evaluate the directional emission rate of a state on a sphere grid.

    ``grid`` can be a DirectionGrid, a polar order, or None for the
    automatic order of :func:`default_polar_order`.  ``theta_c`` defaults
    to 3 / (k0 R0), covering the Gaussian forward lobe with margin.
    """
    nrm2 = float(np.vdot(state.beta, state.beta).real)
    if nrm2 <= 0.0:
        raise ParameterError("angular pattern of a zero-norm state is undefined")
    p = cloud.params
    if grid is None:
        grid = sphere_grid(default_polar_order(cloud))
    elif isinstance(grid, int):
        grid = sphere_grid(grid)
    if grid.n_polar is not None:
        # align the product grid's polar rings with n0 so the azimuth
        # average is taken at constant angle from the incident direction
        grid = DirectionGrid(directions=_rotate_polar_axis(grid.directions, p.n0),
                             weights=grid.weights, n_polar=grid.n_polar,
                             n_azimuth=grid.n_azimuth)
    if theta_c is None:
        theta_c = 3.0 / p.k0r0
    scale = p.gamma1 / nrm2
    amps = structure_amplitude(state, cloud, grid.directions)
    intensity = scale * np.abs(amps) ** 2
    forward_intensity = scale * float(
        np.abs(structure_amplitude(state, cloud, p.n0[None, :]))[0] ** 2
    )
    cos_cap = math.cos(theta_c)
    cap = (grid.directions @ p.n0) > cos_cap
    total = float(grid.weights @ intensity)
    forward = float(grid.weights[cap] @ intensity[cap])
    polar_theta = polar_profile = None
    if grid.n_polar is not None:
        rings = intensity.reshape(grid.n_polar, grid.n_azimuth)
        cos_t = grid.directions[:: grid.n_azimuth, :] @ p.n0
        order = np.argsort(np.arccos(np.clip(cos_t, -1, 1)))
        polar_theta = np.arccos(np.clip(cos_t, -1, 1))[order]
        polar_profile = rings.mean(axis=1)[order]
    return AngularPattern(grid=grid, intensity=intensity, theta_c=float(theta_c),
                          forward_fraction=forward / total,
                          forward_intensity=forward_intensity,
                          polar_theta=polar_theta, polar_profile=polar_profile)


def survival_probability(state: AmplitudeState) -> float:
    """Probability that the excitation is still atomic: sum_j |beta_j|^2."""
    return float(np.vdot(state.beta, state.beta).real)


class RateFit(NamedTuple):
    rate: float
    stderr: float


def fit_rate(times, values, weights=None) -> RateFit:
    """Decay rate from a linear fit of log(values) against time.

    Returns the magnitude of the log-slope and its standard error.  For
    two-regime curves restrict ``times`` to one regime before fitting.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise ParameterError("times and values must be matching 1-D arrays")
    if t.size < 4:
        raise ParameterError(f"rate fit needs at least 4 points, got {t.size}")
    if np.any(v <= 0.0):
        raise ParameterError("rate fit needs strictly positive values")
    if np.ptp(t) == 0.0:
        raise ParameterError("degenerate time grid")
    w = np.ones_like(t) if weights is None else np.asarray(weights, dtype=float)
    if np.any(w <= 0.0) or w.shape != t.shape:
        raise ParameterError("weights must be positive and match the grid")
    y = np.log(v)
    sw = w.sum()
    tbar = (w * t).sum() / sw
    ybar = (w * y).sum() / sw
    stt = (w * (t - tbar) ** 2).sum()
    slope = (w * (t - tbar) * (y - ybar)).sum() / stt
    resid = y - ybar - slope * (t - tbar)
    dof = t.size - 2
    sigma2 = (w * resid**2).sum() / dof
    return RateFit(rate=-slope, stderr=float(np.sqrt(sigma2 / stt)))


# ---------------------------------------------------------------------------
# Ensemble sweeps and scaling-law extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    """A sweep over (N, k0 R0) points with per-point ensembles.

    Realization r of point i uses the Philox stream (i << 32) | r derived
    from ``seed``, so reruns of the same spec are bit-reproducible and
    sweep points are decorrelated.
    """

    n_atoms: tuple
    k0r0: tuple
    realizations: int
    gamma1: float = 1.0
    seed: int = 0
    theta_c_factor: float = 3.0
    record_forward: bool = False
    record_rates: bool = False
    fit_exponents: bool = True
    rate_window: tuple = (0.1, 1.0)   # early-fit window in units of 1/gamma_col
    threads: int = 1

    def points(self):
        return [(int(n), float(kr)) for n in self.n_atoms for kr in self.k0r0]


@dataclass(frozen=True)
class ExponentFit:
    """Log-log slope of a mean observable along one sweep axis."""

    quantity: str
    axis: str
    fixed: float
    slope: float
    stderr: float
    intercept: float
    axis_values: tuple


@dataclass(frozen=True)
class PointStats:
    n_atoms: int
    k0r0: float
    optical_depth: float
    realizations: int
    mean_gamma_col: float
    se_gamma_col: float
    median_gamma_col: float
    mean_gamma_col_excess: float
    se_gamma_col_excess: float
    mean_gamma_r: float
    se_gamma_r: float
    median_gamma_r: float
    mean_gamma_r_excess: float
    se_gamma_r_excess: float
    ratio_gamma_col_vs_collective: float
    ratio_gamma_r_excess_vs_collective: float
    mean_forward_fraction: float | None = None
    mean_rate_fit_early: float | None = None


@dataclass
class EnsembleReport:
    """Per-realization records, per-point aggregates, and exponent fits."""

    spec: SweepSpec
    points: list = field(default_factory=list)       # [PointStats]
    records: list = field(default_factory=list)      # [dict]
    exponents: dict = field(default_factory=dict)    # name -> ExponentFit

    def to_dict(self) -> dict:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return None
            return x

        return {
            # threads is execution machinery: results do not depend on it
            "spec": {k: (list(v) if isinstance(v, tuple) else v)
                     for k, v in asdict(self.spec).items() if k != "threads"},
            "points": [{k: clean(v) for k, v in asdict(p).items()} for p in self.points],
            "exponents": {k: {kk: (list(vv) if isinstance(vv, tuple) else clean(vv))
                              for kk, vv in asdict(f).items()}
                          for k, f in sorted(self.exponents.items())},
        }

    def write_jsonl(self, path) -> None:
        """Line-delimited per-realization records."""
        with open(path, "w") as fh:
            for rec in self.records:
                fh.write(json.dumps({k: rec[k] for k in sorted(rec)}, allow_nan=False))
                fh.write("\n")

    def write_csv(self, path) -> None:
        """Summary table, one row per sweep point."""
        cols = ["n_atoms", "k0r0", "optical_depth", "realizations",
                "mean_gamma_col", "se_gamma_col", "mean_gamma_col_excess",
                "mean_gamma_r", "se_gamma_r", "mean_gamma_r_excess",
                "mean_forward_fraction"]
        slope_cols = sorted(self.exponents)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols + [f"slope:{c}" for c in slope_cols])
            slopes = [repr(self.exponents[c].slope) for c in slope_cols]
            for p in self.points:
                row = [getattr(p, c) for c in cols]
                writer.writerow([_csv_cell(x) for x in row] + slopes)


def _csv_cell(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    if isinstance(x, float):
        return repr(x)
    return x


def _sweep_record(args) -> dict:
    """One realization of one sweep point (top level for process pools)."""
    n, kr, gamma1, seed, stream, theta_c_factor, record_forward, record_rates, window = args
    params = CloudParams(n_atoms=n, k0=1.0, r0=kr, gamma1=gamma1, seed=seed)
    cloud = sample_cloud(params, stream=stream)
    gamma_col, gamma_r_val = pair_kernel_rates(cloud)
    rec = {
        "n_atoms": n,
        "k0r0": kr,
        "stream": stream,
        "gamma_col": gamma_col,
        "gamma_col_excess": gamma_col - gamma1,
        "gamma_r": gamma_r_val,
        "gamma_r_excess": gamma_r_val - gamma1,
    }
    if record_forward:
        pattern = angular_pattern(initial_state(cloud), cloud,
                                  theta_c=theta_c_factor / params.k0r0)
        rec["forward_fraction"] = pattern.forward_fraction
    if record_rates:
        dm = build_decay_matrix(cloud)
        state0 = initial_state(cloud)
        lo, hi = window
        tgrid = np.linspace(lo / gamma_col, hi / gamma_col, 12)
        surv = [survival_probability(evolve(state0, dm, t)) for t in tgrid]
        rec["rate_fit_early"] = fit_rate(tgrid, surv).rate
    return rec


def _loglog_fit(xs, means, ses):
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(means, dtype=float))
    w = (np.asarray(means) / np.asarray(ses)) ** 2  # weights ~ 1/var of log-mean
    sw = w.sum()
    xbar = (w * lx).sum() / sw
    ybar = (w * ly).sum() / sw
    sxx = (w * (lx - xbar) ** 2).sum()
    slope = (w * (lx - xbar) * (ly - ybar)).sum() / sxx
    intercept = ybar - slope * xbar
    se = float(np.sqrt(1.0 / sxx))
    return slope, se, intercept


def scaling_sweep(spec: SweepSpec) -> EnsembleReport:
    """Run the ensembles of a sweep and fit scaling exponents.

    Exponents are fitted on the ensemble-mean cooperative excess
    (gamma_col - gamma1 and gamma_r - gamma1): the single-atom diagonal
    contributes an exact additive gamma1 to both pair sums and would
    mask the collective power laws at desk scale.  Means, medians, and
    ratios against the large-sample collective forms are reported per
    point as well.
    """
    points = spec.points()
    if spec.fit_exponents:
        if spec.realizations < 50:
            raise ParameterError(
                f"exponent fits need >= 50 realizations per point, got {spec.realizations}"
            )
        n_axis_ok = len(set(n for n, _ in points)) >= 3
        k_axis_ok = len(set(k for _, k in points)) >= 3
        if not (n_axis_ok or k_axis_ok):
            raise ParameterError("exponent fits need >= 3 points along a sweep axis")

    tasks = []
    for i, (n, kr) in enumerate(points):
        for r in range(spec.realizations):
            tasks.append((n, kr, spec.gamma1, spec.seed, (i << 32) | r,
                          spec.theta_c_factor, spec.record_forward,
                          spec.record_rates, spec.rate_window))
    if spec.threads > 1:
        with ProcessPoolExecutor(max_workers=spec.threads) as pool:
            records = list(pool.map(_sweep_record, tasks, chunksize=16))
    else:
        records = [_sweep_record(t) for t in tasks]

    report = EnsembleReport(spec=spec, records=records)
    by_point = {}
    for rec in records:
        by_point.setdefault((rec["n_atoms"], rec["k0r0"]), []).append(rec)

    def agg(vals):
        arr = np.asarray(vals, dtype=float)
        return (float(arr.mean()), float(arr.std(ddof=1) / np.sqrt(arr.size))
                if arr.size > 1 else 0.0, float(np.median(arr)))

    for (n, kr), recs in by_point.items():
        gc, gc_se, gc_med = agg([r["gamma_col"] for r in recs])
        gce, gce_se, _ = agg([r["gamma_col_excess"] for r in recs])
        gr, gr_se, gr_med = agg([r["gamma_r"] for r in recs])
        gre, gre_se, _ = agg([r["gamma_r_excess"] for r in recs])
        ff = None
        if spec.record_forward:
            ff = float(np.mean([r["forward_fraction"] for r in recs]))
        rf = None
        if spec.record_rates:
            rf = float(np.mean([r["rate_fit_early"] for r in recs]))
        report.points.append(PointStats(
            n_atoms=n, k0r0=kr, optical_depth=n / kr**2, realizations=len(recs),
            mean_gamma_col=gc, se_gamma_col=gc_se, median_gamma_col=gc_med,
            mean_gamma_col_excess=gce, se_gamma_col_excess=gce_se,
            mean_gamma_r=gr, se_gamma_r=gr_se, median_gamma_r=gr_med,
            mean_gamma_r_excess=gre, se_gamma_r_excess=gre_se,
            ratio_gamma_col_vs_collective=gc / (spec.gamma1 * n / kr**2),
            ratio_gamma_r_excess_vs_collective=gre / (spec.gamma1 * n / (2 * kr**4)),
            mean_forward_fraction=ff, mean_rate_fit_early=rf,
        ))

    if spec.fit_exponents:
        report.exponents = _fit_exponents(report)
    return report


def _fit_exponents(report: EnsembleReport) -> dict:
    fits = {}
    pts = report.points

    def add(quantity, axis):
        mean_key = f"mean_{quantity}"
        se_key = f"se_{quantity}"
        if axis == "n_atoms":
            groups = {}
            for p in pts:
                groups.setdefault(p.k0r0, []).append(p)
        else:
            groups = {}
            for p in pts:
                groups.setdefault(p.n_atoms, []).append(p)
        for fixed, members in groups.items():
            if len(members) < 3:
                continue
            members = sorted(members, key=lambda p: getattr(p, axis))
            xs = [getattr(p, axis) for p in members]
            means = [getattr(p, mean_key) for p in members]
            ses = [max(getattr(p, se_key), 1e-300) for p in members]
            if any(m <= 0 for m in means):
                continue
            slope, se, intercept = _loglog_fit(xs, means, ses)
            fits[f"{quantity}_vs_{axis}@{fixed:g}"] = ExponentFit(
                quantity=quantity, axis=axis, fixed=float(fixed), slope=float(slope),
                stderr=se, intercept=float(intercept), axis_values=tuple(xs))

    for quantity in ("gamma_col_excess", "gamma_r_excess"):
        add(quantity, "n_atoms")
        add(quantity, "k0r0")
    return fits
