"""Seeded synthetic experiments for the stable-noise least-squares recursion.

Covers population generation, surrogate-loss risks, replicated sweeps over
(alpha, a, d) with per-record reproducibility, empirical uniform-stability
gaps estimated with common random numbers, and median/IQR aggregation with
CSV and SVG output.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bounds import StabilityRegime, classify_regime
from .errors import DegenerateDataError, ParameterError, ShapeError, UnstableRegimeError
from .rng import RngStream
from .sampling import StableParams, sample_isotropic_stable
from .simulate import QuadraticProblem, SimConfig, euler_maruyama_run
from .stationary import NeighborPair

RUN_RECORD_COLUMNS = ("replication", "alpha", "a", "d", "n", "p", "seed", "gen_error", "diverged")
AGGREGATE_COLUMNS = ("alpha", "a", "d", "median", "q25", "q75", "n_diverged")


@dataclass(frozen=True)
class SweepConfig:
    """Grid and protocol for the synthetic generalization experiment.

    Per replication: resample n rows with replacement from a size-N uniform
    population on (-a/2, a/2)^d, run the noisy recursion for `steps`
    iterations from zero, and score the final iterate's generalization error
    under the loss |theta^T x|^p.
    """

    alpha_grid: tuple
    a_grid: tuple
    d_grid: tuple
    n: int = 1000
    population_size: int = 100000
    replications: int = 200
    p: float = 1.0
    eta: float = 0.1
    steps: int = 3000
    noise_scale: float = 0.1
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))
        object.__setattr__(self, "a_grid", tuple(float(a) for a in self.a_grid))
        object.__setattr__(self, "d_grid", tuple(int(d) for d in self.d_grid))
        for name in ("alpha_grid", "a_grid", "d_grid"):
            if len(getattr(self, name)) == 0:
                raise ParameterError(f"{name} must be nonempty")
            if len(set(getattr(self, name))) != len(getattr(self, name)):
                raise ParameterError(f"{name} has duplicate entries")
        if any(not (0.0 < a <= 2.0) for a in self.alpha_grid):
            raise ParameterError("alpha_grid entries must lie in (0, 2]")
        if any(a <= 0 for a in self.a_grid):
            raise ParameterError("a_grid entries must be positive")
        if any(d < 1 for d in self.d_grid):
            raise ParameterError("d_grid entries must be positive")
        if self.n < 1:
            raise ParameterError(f"n must be positive, got {self.n}")
        if self.population_size < self.n:
            raise ParameterError(
                f"population_size {self.population_size} is smaller than n {self.n}"
            )
        if self.replications < 1:
            raise ParameterError(f"replications must be positive, got {self.replications}")
        if not (1.0 <= self.p <= 2.0):
            raise ParameterError(f"p must lie in [1, 2], got {self.p}")
        if not self.eta > 0:
            raise ParameterError(f"eta must be positive, got {self.eta}")
        if self.steps < 1:
            raise ParameterError(f"steps must be positive, got {self.steps}")
        if self.noise_scale < 0:
            raise ParameterError(f"noise_scale must be nonnegative, got {self.noise_scale}")


@dataclass(frozen=True)
class RunRecord:
    """One replication's outcome; re-running with the stored seed reproduces it."""

    replication: int
    alpha: float
    a: float
    d: int
    n: int
    p: float
    seed: int
    gen_error: float
    diverged: bool


def _derive_seed(master_seed: int, key: tuple) -> int:
    return int(np.random.SeedSequence(master_seed, spawn_key=key).generate_state(1, np.uint64)[0])


def generate_population(a: float, d: int, N: int, stream: RngStream) -> np.ndarray:
    """N i.i.d. points with coordinates uniform on (-a/2, a/2)."""
    if not a > 0:
        raise ParameterError(f"a must be positive, got {a}")
    if d < 1 or N < 1:
        raise ParameterError(f"d and N must be positive, got d={d}, N={N}")
    return stream.generator.uniform(-a / 2.0, a / 2.0, size=(N, d))


def surrogate_risk(theta, data, p: float) -> float:
    """(1/m) sum |theta^T x_i|^p over the rows of data."""
    if not (1.0 <= p <= 2.0):
        raise ParameterError(f"p must lie in [1, 2], got {p}")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.ndim != 2 or data.shape[1] != theta.shape[0]:
        raise ShapeError(
            f"data of shape {data.shape} does not match theta of dimension {theta.shape[0]}"
        )
    if data.shape[0] == 0:
        raise ShapeError("data must contain at least one row")
    with np.errstate(over="ignore"):
        return float(np.mean(np.abs(data @ theta) ** p))


def generalization_error(theta, train, population, p: float) -> float:
    """|empirical risk - population risk| at theta."""
    with np.errstate(invalid="ignore"):
        return abs(surrogate_risk(theta, train, p) - surrogate_risk(theta, population, p))


def _run_replication(
    cfg: SweepConfig, population: np.ndarray, alpha: float, a: float, replication: int, seed: int
) -> RunRecord:
    d = population.shape[1]
    stream = RngStream(seed)
    idx = stream.fork(0).generator.integers(0, population.shape[0], size=cfg.n)
    train = population[idx]
    problem = QuadraticProblem(train)
    sim = SimConfig(eta=cfg.eta, steps=cfg.steps, alpha=alpha, noise_scale=cfg.noise_scale)
    traj = euler_maruyama_run(problem, sim, stream=stream.fork(1))
    if traj.diverged:
        gen = float("nan")
        diverged = True
    else:
        gen = generalization_error(traj.final, train, population, cfg.p)
        diverged = not math.isfinite(gen)
    return RunRecord(
        replication=replication,
        alpha=float(alpha),
        a=float(a),
        d=int(d),
        n=int(cfg.n),
        p=float(cfg.p),
        seed=int(seed),
        gen_error=float(gen),
        diverged=bool(diverged),
    )


def run_synthetic_sweep(cfg: SweepConfig) -> list[RunRecord]:
    """One RunRecord per (grid point x replication), in canonical grid order.

    Every record's randomness derives from its own stored seed (population
    draws are keyed by the grid point), so any execution schedule produces
    the identical record set.
    """
    records = []
    for di, d in enumerate(cfg.d_grid):
        for ai, a in enumerate(cfg.a_grid):
            pop_stream = RngStream(_derive_seed(cfg.master_seed, (di, ai)))
            population = generate_population(a, d, cfg.population_size, pop_stream)
            for ki, alpha in enumerate(cfg.alpha_grid):
                for r in range(cfg.replications):
                    seed = _derive_seed(cfg.master_seed, (di, ai, ki, r))
                    records.append(_run_replication(cfg, population, alpha, a, r, seed))
    return records


def replay_record(cfg: SweepConfig, record: RunRecord) -> RunRecord:
    """Recompute a record from its stored seed; must match the original bit-exactly."""
    di = cfg.d_grid.index(record.d)
    ai = cfg.a_grid.index(record.a)
    pop_stream = RngStream(_derive_seed(cfg.master_seed, (di, ai)))
    population = generate_population(record.a, record.d, cfg.population_size, pop_stream)
    return _run_replication(cfg, population, record.alpha, record.a, record.replication, record.seed)


@dataclass(frozen=True, eq=False)
class StabilityGapEstimate:
    """Max-over-probes Monte-Carlo gap with its standard error at the arg-max probe."""

    gap: float
    stderr: float
    probe_index: int
    n_mc: int
    per_probe_gap: np.ndarray
    per_probe_stderr: np.ndarray


def default_probe_points(pair: NeighborPair, R: float) -> np.ndarray:
    """Signed coordinate directions scaled to R, plus the two differing rows."""
    if not R > 0:
        raise ParameterError(f"R must be positive, got {R}")
    eye = np.eye(pair.d)
    probes = [R * eye, -R * eye]
    for row in (pair.x_row, pair.x_tilde_row):
        if np.linalg.norm(row) > 0:
            probes.append(row[None, :])
    return np.vstack(probes)


def _coupled_stationary_draws(
    pair: NeighborPair, sim: SimConfig, n_mc: int, stream: RngStream
) -> tuple[np.ndarray, np.ndarray]:
    # Both chains are driven by the SAME noise realizations (common random
    # numbers); the O(1/n) gap between the two stationary means would
    # otherwise drown in Monte-Carlo error at any affordable sample size.
    problem = QuadraticProblem(pair.X)
    problem_hat = QuadraticProblem(pair.X_hat)
    d = pair.d
    for prob in (problem, problem_hat):
        if sim.eta * prob.lambda_max >= 2.0 and not sim.allow_unstable:
            raise ParameterError(
                f"eta * lambda_max = {sim.eta * prob.lambda_max:.4g} >= 2; "
                "the recursion has no stationary law"
            )
    lam_min = min(problem.lambda_min, problem_hat.lambda_min)
    if lam_min <= 0.0:
        raise DegenerateDataError(
            f"smallest Gram eigenvalue is {lam_min:.4g}; the chains do not mix"
        )
    if sim.burn_in is not None:
        burn = sim.burn_in
    else:
        needed = int(math.ceil(10.0 / (sim.eta * lam_min)))
        burn = min(needed, sim.steps)
        if burn < needed:
            warnings.warn(
                f"steps={sim.steps} is below the recommended burn-in {needed}; "
                "draws may retain initialization bias",
                RuntimeWarning,
                stacklevel=3,
            )
    contraction = np.eye(d) - sim.eta * problem.A
    contraction_hat = np.eye(d) - sim.eta * problem_hat.A
    sig = sim.effective_noise(d)
    scale = sim.eta ** (1.0 / sim.alpha)
    params = StableParams(alpha=sim.alpha, sigma=1.0)
    noise_stream = stream.fork(0)
    theta = np.zeros((n_mc, d))
    theta_hat = np.zeros((n_mc, d))
    for _ in range(burn):
        shock = scale * (
            sample_isotropic_stable(d, params, noise_stream, size=n_mc) @ sig.T
        )
        theta = theta @ contraction.T + shock
        theta_hat = theta_hat @ contraction_hat.T + shock
    return theta, theta_hat


def empirical_stability_gap(
    pair: NeighborPair,
    probe_points,
    p: float,
    alpha: float,
    sim: SimConfig,
    n_mc: int,
    stream: RngStream,
) -> StabilityGapEstimate:
    """Monte-Carlo estimate of max_z |E f(theta, z) - E f(theta_hat, z)|.

    theta and theta_hat are coupled stationary draws of the recursion on the
    two datasets; the returned gap is the signed difference at the probe
    with the largest absolute gap.
    """
    regime = classify_regime(p, alpha)
    if regime is StabilityRegime.UNSTABLE:
        raise UnstableRegimeError(
            f"p={p} >= alpha={alpha} with alpha < 2: the expected loss is infinite "
            "and no finite stability gap exists"
        )
    if n_mc < 100:
        warnings.warn(
            f"n_mc={n_mc} is very small; the gap estimate will be dominated by noise",
            RuntimeWarning,
            stacklevel=2,
        )
    probes = np.atleast_2d(np.asarray(probe_points, dtype=float))
    if probes.shape[1] != pair.d:
        raise ShapeError(
            f"probe points of shape {probes.shape} do not match data dimension {pair.d}"
        )
    if sim.alpha != alpha:
        sim = dataclasses.replace(sim, alpha=alpha)
    theta, theta_hat = _coupled_stationary_draws(pair, sim, n_mc, stream)
    diffs = np.abs(theta @ probes.T) ** p - np.abs(theta_hat @ probes.T) ** p
    gaps = diffs.mean(axis=0)
    stderrs = diffs.std(axis=0, ddof=1) / math.sqrt(n_mc)
    j = int(np.argmax(np.abs(gaps)))
    return StabilityGapEstimate(
        gap=float(gaps[j]),
        stderr=float(stderrs[j]),
        probe_index=j,
        n_mc=int(n_mc),
        per_probe_gap=gaps,
        per_probe_stderr=stderrs,
    )


def cauchy_doubling_check(values, initial_window: int = 1000, rel_tol: float = 0.1):
    """Whether prefix means settle under window doubling.

    Compares the running mean over the first w, 2w, 4w, ... values; returns
    (converged, max_relative_change). Divergent-mean losses (p >= alpha)
    keep drifting by a roughly constant factor per doubling and fail.
    """
    x = np.asarray(values, dtype=float).reshape(-1)
    if initial_window < 1:
        raise ParameterError(f"initial_window must be positive, got {initial_window}")
    if x.shape[0] < 2 * initial_window:
        raise ShapeError(
            f"need at least 2*initial_window = {2 * initial_window} values, got {x.shape[0]}"
        )
    window = initial_window
    prev = float(np.mean(x[:window]))
    max_change = 0.0
    while 2 * window <= x.shape[0]:
        window *= 2
        cur = float(np.mean(x[:window]))
        denom = max(abs(prev), 1e-300)
        max_change = max(max_change, abs(cur - prev) / denom)
        prev = cur
    return max_change <= rel_tol, max_change


def aggregate_median_iqr(records, group_keys=("alpha", "a", "d")) -> list[dict]:
    """Median and quartiles of gen_error per group.

    Divergent (or nonfinite) records are excluded from the quantiles but
    counted in n_diverged; a group with no usable records reports NaN
    quantiles alongside its divergence count.
    """
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        key = tuple(getattr(rec, k) for k in group_keys)
        groups.setdefault(key, []).append(rec)
    table = []
    for key, recs in groups.items():
        usable = [r.gen_error for r in recs if not r.diverged and math.isfinite(r.gen_error)]
        n_diverged = len(recs) - len(usable)
        if usable:
            q25, med, q75 = (float(v) for v in np.percentile(usable, [25.0, 50.0, 75.0]))
        else:
            q25 = med = q75 = float("nan")
        row = dict(zip(group_keys, key))
        row.update(median=med, q25=q25, q75=q75, n_diverged=n_diverged)
        table.append(row)
    return table


def write_run_records(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUN_RECORD_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.replication,
                    repr(float(r.alpha)),
                    repr(float(r.a)),
                    r.d,
                    r.n,
                    repr(float(r.p)),
                    r.seed,
                    repr(float(r.gen_error)),
                    int(r.diverged),
                ]
            )


def read_run_records(path) -> list[RunRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != RUN_RECORD_COLUMNS:
            raise ShapeError(f"unexpected record CSV header: {header}")
        for row in reader:
            records.append(
                RunRecord(
                    replication=int(row[0]),
                    alpha=float(row[1]),
                    a=float(row[2]),
                    d=int(row[3]),
                    n=int(row[4]),
                    p=float(row[5]),
                    seed=int(row[6]),
                    gen_error=float(row[7]),
                    diverged=bool(int(row[8])),
                )
            )
    return records


def write_aggregate(table, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_COLUMNS)
        for row in table:
            writer.writerow(
                [
                    repr(float(row["alpha"])),
                    repr(float(row["a"])),
                    int(row["d"]),
                    repr(float(row["median"])),
                    repr(float(row["q25"])),
                    repr(float(row["q75"])),
                    int(row["n_diverged"]),
                ]
            )


def write_sweep_svg(table, path, a: float, d: int) -> None:
    """Static median-with-IQR-band plot of gen_error against alpha for one (a, d)."""
    rows = sorted(
        (r for r in table if r["a"] == a and r["d"] == d and math.isfinite(r["median"])),
        key=lambda r: r["alpha"],
    )
    if not rows:
        raise ShapeError(f"no finite aggregate rows for a={a}, d={d}")
    alphas = [r["alpha"] for r in rows]
    med = [r["median"] for r in rows]
    lo = [r["q25"] for r in rows]
    hi = [r["q75"] for r in rows]

    width, height = 640, 400
    ml, mr, mt, mb = 70, 20, 40, 50
    x0, x1 = min(alphas), max(alphas)
    y0, y1 = min(lo), max(hi)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * (width - ml - mr)

    def sy(v):
        return height - mb - (v - y0) / (y1 - y0) * (height - mt - mb)

    band = " ".join(
        [f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(alphas, hi)]
        + [f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(reversed(alphas), reversed(lo))]
    )
    line = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(alphas, med))
    xticks = np.linspace(x0, x1, 5)
    yticks = np.linspace(y0, y1, 5)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">generalization error vs alpha (a={a:g}, d={d})</text>',
        f'<polygon points="{band}" fill="#7aa6d8" fill-opacity="0.35" stroke="none"/>',
        f'<polyline points="{line}" fill="none" stroke="#1f4e8c" stroke-width="2"/>',
        f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" '
        'stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" stroke="black"/>',
    ]
    for t in xticks:
        parts.append(
            f'<line x1="{sx(t):.2f}" y1="{height - mb}" x2="{sx(t):.2f}" '
            f'y2="{height - mb + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{sx(t):.2f}" y="{height - mb + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{t:.3g}</text>'
        )
    for t in yticks:
        parts.append(
            f'<line x1="{ml - 5}" y1="{sy(t):.2f}" x2="{ml}" y2="{sy(t):.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{ml - 8}" y="{sy(t) + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12">{t:.3g}</text>'
        )
    parts.append(
        f'<text x="{(ml + width - mr) / 2:.0f}" y="{height - 12}" text-anchor="middle" '
        'font-family="sans-serif" font-size="13">alpha</text>'
    )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
