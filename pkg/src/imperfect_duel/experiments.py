"""Experiment runner: per-seed simulation loops, regret traces, multi-seed
aggregation, log-log order fitting, and result serialization.

Each (config, seed) pair is an independent run with its own RNG, learner,
and corruption state.  Seeds derive from a master seed through a splitmix
style 64-bit mix so explicit seed lists and master-seed mode coincide.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algorithms import (
    DbgdLearner,
    DoublerLearner,
    RosmidLearner,
    Schedule,
    SparringLearner,
    _enclosing_radius,
    schedule_dbgd,
    schedule_rosmid,
)
from .corruption import (
    CorruptionSchedule,
    FlipFirstC,
    GeneralizedLearnability,
    NoCorruption,
    RhoImperfect,
)
from .geometry import ActionSpace, Ball, DiscreteEmbeddingSet, HalfspacePolytope, sample_unit_sphere
from .mirror import MirrorSolveError
from .preference import (
    Linear,
    LinearLink,
    LinkFunction,
    Logistic,
    QuadraticConcave,
    RescaledCosine,
    UtilityFunction,
    duel,
)

__all__ = [
    "ExperimentConfig",
    "RegretTrace",
    "FittedOrder",
    "derive_seed",
    "regret_increment",
    "run_experiment",
    "aggregate",
    "fit_order",
    "export_results",
    "optimal_action",
    "utility_range",
    "uniform_sample",
]


# --------------------------------------------------------------------------
# Seeds


def derive_seed(master_seed: int, run_index: int) -> int:
    """Splitmix-style 64-bit mix of (master_seed, run_index)."""
    mask = (1 << 64) - 1
    z = (master_seed + 0x9E3779B97F4A7C15 * (run_index + 1)) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


# --------------------------------------------------------------------------
# Config


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description (see configs/*.json for examples)."""

    space: dict
    utility: dict
    link: dict
    corruption: dict
    algorithm: dict
    horizon: int
    seeds: tuple[int, ...]
    record_every: int = 100
    raw: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.horizon < 100:
            raise ValueError("horizon must be >= 100")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.record_every < 1 or self.horizon % self.record_every != 0:
            raise ValueError("record_every must divide the horizon evenly")


_ALLOWED_KEYS = {
    "": {"space", "utility", "link", "corruption", "algorithm", "horizon", "seeds",
         "master_seed", "n_seeds", "record_every"},
    "space": {"type", "dim", "radius", "rows", "nonneg", "path", "k", "user",
              "cluster_seed"},
    "utility": {"type", "theta", "theta_mode", "scale"},
    "link": {"type"},
    "corruption": {"type", "rho", "c_kappa", "C", "c0", "lambda"},
    "algorithm": {"type", "alpha", "mode", "rho", "lam", "phi", "gamma", "delta",
                  "eta", "delta_b", "eta_b", "feedback"},
}


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a raw JSON config dict; unknown keys are rejected by path."""
    _reject_unknown(data, "", _ALLOWED_KEYS[""])
    for section in ("space", "utility", "link", "corruption", "algorithm"):
        if section not in data:
            raise ValueError(f"missing config section: {section}")
        _reject_unknown(data[section], section, _ALLOWED_KEYS[section])
    if "seeds" in data:
        seeds = tuple(int(s) for s in data["seeds"])
    else:
        if "master_seed" not in data or "n_seeds" not in data:
            raise ValueError("provide either 'seeds' or 'master_seed' plus 'n_seeds'")
        seeds = tuple(
            derive_seed(int(data["master_seed"]), i) for i in range(int(data["n_seeds"]))
        )
    return ExperimentConfig(
        space=dict(data["space"]),
        utility=dict(data["utility"]),
        link=dict(data["link"]),
        corruption=dict(data["corruption"]),
        algorithm=dict(data["algorithm"]),
        horizon=int(data["horizon"]),
        seeds=seeds,
        record_every=int(data.get("record_every", 100)),
        raw=dict(data),
    )


def _reject_unknown(d: dict, prefix: str, allowed: set[str]) -> None:
    if not isinstance(d, dict):
        raise ValueError(f"config section '{prefix or '<root>'}' must be an object")
    for key in d:
        if key not in allowed:
            path = f"{prefix}.{key}" if prefix else key
            raise ValueError(f"unknown config key: {path}")


# --------------------------------------------------------------------------
# Instance construction


def build_space(spec: dict) -> ActionSpace:
    kind = spec.get("type")
    if kind == "ball":
        return Ball(radius=float(spec["radius"]), dim=int(spec["dim"]))
    if kind == "polytope":
        rows = tuple((tuple(float(v) for v in c), float(b)) for c, b in spec["rows"])
        return HalfspacePolytope(rows=rows, nonneg=tuple(bool(f) for f in spec["nonneg"]))
    if kind == "corpus":
        from .corpus import ingest_corpus

        corpus = ingest_corpus(spec["path"], int(spec["k"]), int(spec.get("cluster_seed", 0)))
        radius = float(np.max(np.linalg.norm(corpus.items, axis=1))) * (1 + 1e-9)
        return DiscreteEmbeddingSet(items=corpus.items, enclosing_radius=radius)
    raise ValueError(f"unknown space type: {kind!r}")


def build_utility(spec: dict, space: ActionSpace, rng: np.random.Generator) -> UtilityFunction:
    kind = spec.get("type")
    if kind == "quadratic":
        theta = _resolve_theta(spec, space, rng)
        return QuadraticConcave(theta=theta)
    if kind == "linear":
        theta = _resolve_theta(spec, space, rng)
        return Linear(theta=theta)
    if kind == "cosine":
        if "theta" in spec:
            pref = np.asarray(spec["theta"], dtype=float)
        else:
            pref = _resolve_theta({"theta_mode": "sphere_surface"}, space, rng)
        return RescaledCosine(pref=pref, scale=float(spec.get("scale", 100.0)))
    raise ValueError(f"unknown utility type: {kind!r}")


def _resolve_theta(spec: dict, space: ActionSpace, rng: np.random.Generator) -> np.ndarray:
    if "theta" in spec:
        return np.asarray(spec["theta"], dtype=float)
    mode = spec.get("theta_mode", "sphere_surface")
    if mode != "sphere_surface":
        raise ValueError(f"unknown theta_mode: {mode!r}")
    d = space.dim
    r = _enclosing_radius(space)
    return r * sample_unit_sphere(rng, d)


def build_link(spec: dict) -> LinkFunction:
    kind = spec.get("type")
    if kind == "logistic":
        return Logistic()
    if kind == "linear":
        return LinearLink()
    raise ValueError(f"unknown link type: {kind!r}")


def build_corruption(
    spec: dict,
    space: ActionSpace,
    mu: UtilityFunction,
    a_star: np.ndarray,
    horizon: int,
    rng: np.random.Generator,
) -> CorruptionSchedule:
    kind = spec.get("type", "none")
    if kind == "none":
        sched: CorruptionSchedule = NoCorruption()
    elif kind == "rho_imperfect":
        c_kappa = spec.get("c_kappa")
        if c_kappa is None:
            lo, _hi = utility_range(space, mu, rng)
            c_kappa = 0.1 * (mu(a_star) - lo)
        sched = RhoImperfect(rho=float(spec["rho"]), c_kappa=float(c_kappa))
    elif kind == "learnability":
        c0 = spec.get("c0")
        if c0 is None:
            lo, hi = utility_range(space, mu, rng)
            c0 = 0.1 * (hi - lo)
        sched = GeneralizedLearnability.create(
            d=space.dim, rho=float(spec["rho"]), lam=float(spec.get("lambda", 2.0)), c0=float(c0)
        )
    elif kind == "flip_first":
        if "C" in spec:
            C = int(spec["C"])
        elif "rho" in spec:
            C = int(round(horizon ** float(spec["rho"])))
        else:
            raise ValueError("flip_first corruption needs 'C' or 'rho'")
        sched = FlipFirstC(C=C)
    else:
        raise ValueError(f"unknown corruption type: {kind!r}")
    sched.ledger.record_per_round = horizon <= 10_000
    return sched


def build_learner(
    spec: dict,
    space: ActionSpace,
    mu: UtilityFunction,
    link: LinkFunction,
    horizon: int,
    rng: np.random.Generator,
):
    kind = spec.get("type")
    d = space.dim
    if kind == "rosmid":
        mode = spec.get("mode", "known-rho")
        key = spec["rho"] if mode == "known-rho" else spec["alpha"]
        sched = schedule_rosmid(d, horizon, float(key), mode)
        return RosmidLearner(
            space,
            sched,
            rng,
            horizon,
            lam=float(spec.get("lam", 0.01)),
            phi=float(spec.get("phi", 0.01)),
            feedback=spec.get("feedback", "signed"),
        )
    if kind == "dbgd":
        R = _schedule_radius(space)
        sched = schedule_dbgd(
            R, d, horizon, float(spec.get("alpha", 0.25)), _l_sigma(link), _l_mu(mu, space)
        )
        if "gamma" in spec or "delta" in spec:
            sched = Schedule(
                gamma=float(spec.get("gamma", sched.gamma)),
                delta=float(spec.get("delta", sched.delta)),
                alpha=sched.alpha,
            )
        return DbgdLearner(space, sched, rng, horizon, feedback=spec.get("feedback", "signed"))
    if kind == "sparring":
        return SparringLearner(space, horizon, rng)
    if kind == "doubler":
        return DoublerLearner(space, horizon, rng)
    raise ValueError(f"unknown algorithm type: {kind!r}")


def _schedule_radius(space: ActionSpace) -> float:
    """The size constant R fed into the step-size formulas.

    For a ball this is its radius; for a discrete catalog the enclosing
    radius; for a polytope the set diameter (the bound the regret
    analysis is phrased in terms of, since no ball radius is given).
    """
    if isinstance(space, HalfspacePolytope):
        return space.diameter()
    return _enclosing_radius(space)


def _l_sigma(link: LinkFunction) -> float:
    return 0.25 if isinstance(link, Logistic) else 0.5


def _l_mu(mu: UtilityFunction, space: ActionSpace) -> float:
    if isinstance(mu, QuadraticConcave):
        return float(np.linalg.norm(mu.theta)) + _enclosing_radius(space)
    if isinstance(mu, Linear):
        return float(np.linalg.norm(mu.theta))
    # Rescaled cosine: the scale bounds the utility range; used as the
    # documented Lipschitz stand-in on the catalog region.
    return float(mu.scale)


# --------------------------------------------------------------------------
# Instance analysis helpers


def optimal_action(space: ActionSpace, mu: UtilityFunction) -> np.ndarray:
    """The true maximizer a* of mu over the action space."""
    if isinstance(space, DiscreteEmbeddingSet):
        vals = [mu(row) for row in space.items]
        return np.array(space.items[int(np.argmax(vals))], dtype=float)
    if isinstance(mu, QuadraticConcave):
        # argmax of theta.a - ||a||^2/2 over a convex set = projection of theta.
        return space.project(np.asarray(mu.theta, dtype=float))
    if isinstance(mu, Linear):
        theta = np.asarray(mu.theta, dtype=float)
        if isinstance(space, Ball):
            nrm = float(np.linalg.norm(theta))
            if nrm == 0:
                return np.zeros(space.dim)
            return space.radius * theta / nrm
        return _linprog_extreme(space, theta, maximize=True)
    if isinstance(mu, RescaledCosine) and isinstance(space, Ball):
        return space.radius * mu.pref
    raise ValueError(f"cannot compute the optimizer for {type(mu).__name__} on {type(space).__name__}")


def utility_range(
    space: ActionSpace, mu: UtilityFunction, rng: np.random.Generator, n_samples: int = 100_000
) -> tuple[float, float]:
    """(min, max) of mu over the space; exact on a discrete catalog,
    Monte-Carlo estimate (uniform samples) on continuous spaces."""
    if isinstance(space, DiscreteEmbeddingSet):
        vals = np.array([mu(row) for row in space.items])
        return float(vals.min()), float(vals.max())
    pts = uniform_sample(space, rng, n_samples)
    vals = np.array([mu(p) for p in pts])
    return float(vals.min()), float(vals.max())


def exact_utility_bounds(space: ActionSpace, mu: UtilityFunction) -> tuple[float, float]:
    """Closed-form (min, max) of mu over the space, for bracket constants."""
    if isinstance(space, DiscreteEmbeddingSet):
        vals = np.array([mu(row) for row in space.items])
        return float(vals.min()), float(vals.max())
    if isinstance(space, Ball):
        R = space.radius
        if isinstance(mu, QuadraticConcave):
            nt = float(np.linalg.norm(mu.theta))
            hi = mu(space.project(np.asarray(mu.theta, dtype=float)))
            lo = -R * nt - 0.5 * R**2
            return lo, hi
        if isinstance(mu, Linear):
            nt = float(np.linalg.norm(mu.theta))
            return -R * nt, R * nt
        if isinstance(mu, RescaledCosine):
            return -mu.scale, mu.scale
    if isinstance(space, HalfspacePolytope) and isinstance(mu, Linear):
        theta = np.asarray(mu.theta, dtype=float)
        lo = float(theta @ _linprog_extreme(space, theta, maximize=False))
        hi = float(theta @ _linprog_extreme(space, theta, maximize=True))
        return lo, hi
    raise ValueError(
        f"no closed-form utility bounds for {type(mu).__name__} on {type(space).__name__}"
    )


def _linprog_extreme(space: HalfspacePolytope, direction: np.ndarray, maximize: bool) -> np.ndarray:
    from scipy.optimize import linprog

    c = -direction if maximize else direction
    res = linprog(c, A_ub=space._C, b_ub=space._b, bounds=[(None, None)] * space.dim,
                  method="highs")
    if not res.success:
        raise RuntimeError(f"LP over polytope failed: {res.message}")
    return np.asarray(res.x, dtype=float)


def uniform_sample(space: ActionSpace, rng: np.random.Generator, n: int) -> np.ndarray:
    """n points approximately uniform on the space (exact for ball/polytope)."""
    d = space.dim
    if isinstance(space, Ball):
        dirs = rng.standard_normal((n, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radii = space.radius * rng.random(n) ** (1.0 / d)
        return dirs * radii[:, None]
    if isinstance(space, HalfspacePolytope):
        lo = np.empty(d)
        hi = np.empty(d)
        for i in range(d):
            e = np.zeros(d)
            e[i] = 1.0
            lo[i] = _linprog_extreme(space, e, maximize=False)[i]
            hi[i] = _linprog_extreme(space, e, maximize=True)[i]
        out = []
        while len(out) < n:
            batch = lo + (hi - lo) * rng.random((max(n, 1000), d))
            mask = np.all(space._C @ batch.T <= space._b[:, None] + 1e-12, axis=0)
            out.extend(batch[mask])
        return np.array(out[:n])
    if isinstance(space, DiscreteEmbeddingSet):
        idx = rng.integers(space.items.shape[0], size=n)
        return space.items[idx]
    raise TypeError(f"unsupported space: {type(space).__name__}")


# --------------------------------------------------------------------------
# Regret accounting


def regret_increment(
    mu: UtilityFunction,
    sigma: LinkFunction,
    a_star: np.ndarray,
    a: np.ndarray,
    a_prime: np.ndarray,
) -> tuple[float, float]:
    """(dueling, functional) regret increments from true utilities."""
    u_star = mu(a_star)
    gap = u_star - mu(a)
    gap_p = u_star - mu(a_prime)
    dueling = sigma(gap) + sigma(gap_p) - 1.0
    return dueling, gap + gap_p


@dataclass
class RegretTrace:
    """Thinned cumulative regret series for one seeded run."""

    seed: int
    rounds: list[int] = field(default_factory=list)
    cum_dueling: list[float] = field(default_factory=list)
    cum_functional: list[float] = field(default_factory=list)
    total_corruption: float = 0.0
    flips: int = 0
    failed: bool = False
    error: str = ""


def run_single(cfg: ExperimentConfig, seed: int) -> RegretTrace:
    """One full simulated interaction loop for one seed."""
    rng = np.random.Generator(np.random.PCG64(seed))
    if cfg.space.get("type") == "corpus":
        from .corpus import ingest_corpus

        corpus = ingest_corpus(
            cfg.space["path"], int(cfg.space["k"]), int(cfg.space.get("cluster_seed", 0))
        )
        radius = float(np.max(np.linalg.norm(corpus.items, axis=1))) * (1 + 1e-9)
        space: ActionSpace = DiscreteEmbeddingSet(items=corpus.items, enclosing_radius=radius)
        pref = corpus.centroids[int(cfg.space.get("user", 0))]
        mu: UtilityFunction = RescaledCosine(
            pref=pref, scale=float(cfg.utility.get("scale", 100.0))
        )
    else:
        space = build_space(cfg.space)
        mu = build_utility(cfg.utility, space, rng)
    link = build_link(cfg.link)
    a_star = optimal_action(space, mu)
    schedule = build_corruption(cfg.corruption, space, mu, a_star, cfg.horizon, rng)
    learner = build_learner(cfg.algorithm, space, mu, link, cfg.horizon, rng)

    lo, hi = exact_utility_bounds(space, mu)
    u_star = mu(a_star)
    max_gap = u_star - lo
    l1 = min(link.derivative(0.0), link.derivative(max_gap))
    L1 = link.derivative(0.0)

    trace = RegretTrace(seed=seed)
    cum_d = 0.0
    cum_f = 0.0
    T = cfg.horizon
    rec = cfg.record_every
    try:
        for t in range(1, T + 1):
            a, a_prime = learner.propose(t)
            u_a = mu(a)
            u_ap = mu(a_prime)
            outcome = duel(mu, link, schedule, a, a_prime, t, rng, utilities=(u_a, u_ap))
            learner.observe(t, outcome)
            gap = u_star - u_a
            gap_p = u_star - u_ap
            d_inc = link(gap) + link(gap_p) - 1.0
            f_inc = gap + gap_p
            # Increment-level bracket between dueling and functional regret.
            assert l1 * f_inc - 1e-9 <= d_inc <= L1 * f_inc + 1e-9, (
                f"regret bracket violated at t={t}: {l1 * f_inc} <= {d_inc} <= {L1 * f_inc}"
            )
            cum_d += d_inc
            cum_f += f_inc
            if t % rec == 0:
                trace.rounds.append(t)
                trace.cum_dueling.append(cum_d)
                trace.cum_functional.append(cum_f)
    except MirrorSolveError as exc:
        trace.failed = True
        trace.error = str(exc)
    trace.total_corruption = schedule.ledger.total()
    trace.flips = getattr(schedule, "flips", 0)
    return trace


def run_experiment(cfg: ExperimentConfig) -> list[RegretTrace]:
    """All seeds of one config; parallel if IMPERFECT_DUEL_THREADS > 1."""
    n_workers = int(os.environ.get("IMPERFECT_DUEL_THREADS", "0") or 0)
    if n_workers <= 1 or len(cfg.seeds) == 1:
        return [run_single(cfg, s) for s in cfg.seeds]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        futures = [pool.submit(run_single, cfg, s) for s in cfg.seeds]
        return [f.result() for f in futures]


# --------------------------------------------------------------------------
# Aggregation and order fitting


def aggregate(traces: list[RegretTrace]) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise (rounds, mean, population std, functional mean) over traces."""
    ok = [tr for tr in traces if not tr.failed]
    if not ok:
        raise ValueError("no successful traces to aggregate")
    rounds = np.asarray(ok[0].rounds)
    for tr in ok[1:]:
        if tr.rounds != ok[0].rounds:
            raise ValueError("misaligned round grids")
    dueling = np.array([tr.cum_dueling for tr in ok])
    functional = np.array([tr.cum_functional for tr in ok])
    return rounds, dueling.mean(axis=0), dueling.std(axis=0), functional.mean(axis=0)


@dataclass(frozen=True)
class FittedOrder:
    """OLS log-log slope over the trailing window of a cumulative series."""

    slope: float
    intercept: float
    window_fraction: float
    n_points: int
    stderr: float


def fit_order(
    rounds: np.ndarray, values: np.ndarray, window_fraction: float = 0.01
) -> FittedOrder:
    rounds = np.asarray(rounds, dtype=float)
    values = np.asarray(values, dtype=float)
    n = len(rounds)
    k = max(int(math.ceil(window_fraction * n)), 10)
    if n < k:
        raise ValueError(f"need at least {k} stored points, have {n}")
    x = rounds[-k:]
    y = values[-k:]
    if np.any(y <= 0):
        raise ValueError("order fitting needs strictly positive trace values")
    lx = np.log(x)
    ly = np.log(y)
    mx = lx.mean()
    my = ly.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    slope = float(np.sum((lx - mx) * (ly - my)) / sxx)
    intercept = my - slope * mx
    resid = ly - (intercept + slope * lx)
    dof = max(k - 2, 1)
    stderr = float(np.sqrt(np.sum(resid**2) / dof / sxx))
    return FittedOrder(slope, float(intercept), window_fraction, k, stderr)


# --------------------------------------------------------------------------
# Serialization


def export_results(
    cfg: ExperimentConfig,
    traces: list[RegretTrace],
    out_dir: str | Path,
    window_fraction: float = 0.01,
) -> dict:
    """Write trace.csv and report.json; returns the report dict."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rounds, mean_d, std_d, mean_f = aggregate(traces)
    with open(out / "trace.csv", "w", newline="\n") as fh:
        fh.write("t,cum_dueling_mean,cum_dueling_std,cum_functional_mean\n")
        for i in range(len(rounds)):
            fh.write(
                f"{int(rounds[i])},{mean_d[i]:.17g},{std_d[i]:.17g},{mean_f[i]:.17g}\n"
            )
    per_seed = []
    for tr in traces:
        entry: dict = {"seed": tr.seed, "failed": tr.failed}
        if tr.failed:
            entry["error"] = tr.error
        else:
            f = fit_order(np.asarray(tr.rounds), np.asarray(tr.cum_dueling), window_fraction)
            entry["slope"] = f.slope
            entry["stderr"] = f.stderr
        entry["total_corruption"] = tr.total_corruption
        if tr.flips:
            entry["flips"] = tr.flips
        per_seed.append(entry)
    agg_fit = fit_order(rounds, mean_d, window_fraction)
    report = {
        "config": cfg.raw,
        "per_seed": per_seed,
        "aggregate_slope": agg_fit.slope,
        "aggregate_stderr": agg_fit.stderr,
        "aggregate_intercept": agg_fit.intercept,
        "window_fraction": window_fraction,
        "total_corruption_budget": sum(tr.total_corruption for tr in traces),
        "failures": sum(tr.failed for tr in traces),
    }
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2)
    return report
