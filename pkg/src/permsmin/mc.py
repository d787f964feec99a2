"""Monte Carlo experiments for the tail laws of the smallest singular
value under i.i.d. diagonal entries.

Reproducibility contract: every trial draws from its own substream,
derived from (master_seed, N, trial_index) through a counter-based
generator, so reruns are byte-identical for a fixed master seed
regardless of worker count or execution order.  CSV columns are frozen;
floats are serialized with repr (shortest round-trip form).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import perm as permmod
from . import spectral, walk
from .dist import RadialModel, hypothesis_report, theta
from .logdomain import NEG_INF, logsumexp

#: documented default master seed for all experiments and the CLI
DEFAULT_SEED = 20180329


class SandwichViolation(AssertionError):
    """A per-trial bound assertion failed; the message carries the seed
    and the instance needed to reproduce it."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs shared by the experiment drivers."""

    model: RadialModel
    sizes: tuple[int, ...]
    trials: int
    mode: str = "single_cycle"  # or "uniform"
    master_seed: int = DEFAULT_SEED
    thresholds: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0)
    jobs: int = 1
    tol: float = 1e-9
    ladder_c: float = 1.0
    oracle_check: bool = False

    def __post_init__(self):
        if self.trials < 1 or not self.sizes:
            raise ValueError("need trials >= 1 and a nonempty size list")
        if self.mode not in ("single_cycle", "uniform"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class TailEstimate:
    """One empirical tail probability with its binomial standard error."""

    n: int
    threshold: float
    probability: float
    std_error: float
    trials: int


def trial_rng(master_seed: int, n: int, trial: int) -> np.random.Generator:
    """The trial's private substream: a counter-based generator keyed by
    (master_seed, N, trial_index)."""
    ss = np.random.SeedSequence((master_seed, n, trial))
    return np.random.Generator(np.random.Philox(ss))


def _single_cycle(n: int) -> permmod.Permutation:
    return permmod.Permutation(tuple(list(range(2, n + 1)) + [1]))


def _smin_sq_trial(master_seed: int, n: int, trial: int, model: RadialModel,
                   mode: str, tol: float) -> tuple[float, bool]:
    """(squared smallest singular value, singular flag) for one trial.

    Draw order: permutation first (uniform mode only), then the
    diagonal entries.
    """
    rng = trial_rng(master_seed, n, trial)
    if mode == "uniform":
        sigma = permmod.sample_uniform(n, rng)
    else:
        sigma = _single_cycle(n)
    d = model.sample_array(rng, n)
    s, singular = spectral.smin_global_exact(sigma, d, tol=tol)
    return s * s, singular


def _chunk_worker(args) -> tuple[int, list[tuple[float, bool]]]:
    master_seed, n, lo, hi, model, mode, tol = args
    out = [
        _smin_sq_trial(master_seed, n, t, model, mode, tol) for t in range(lo, hi)
    ]
    return lo, out


def collect_smin_sq(cfg: ExperimentConfig, n: int) -> tuple[np.ndarray, int]:
    """All trial values of the squared smallest singular value at size n,
    in trial order, plus the singular-draw count."""
    results: list[tuple[float, bool]] = [None] * cfg.trials  # type: ignore
    if cfg.jobs <= 1:
        for t in range(cfg.trials):
            results[t] = _smin_sq_trial(
                cfg.master_seed, n, t, cfg.model, cfg.mode, cfg.tol
            )
    else:
        chunk = max(1, math.ceil(cfg.trials / (cfg.jobs * 8)))
        tasks = [
            (cfg.master_seed, n, lo, min(lo + chunk, cfg.trials), cfg.model,
             cfg.mode, cfg.tol)
            for lo in range(0, cfg.trials, chunk)
        ]
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for lo, out in pool.map(_chunk_worker, tasks):
                results[lo : lo + len(out)] = out
    vals = np.array([v for v, _ in results])
    singulars = sum(1 for _, s in results if s)
    return vals, singulars


def _estimate(n: int, u: float, hits: int, trials: int) -> TailEstimate:
    p = hits / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    return TailEstimate(n=n, threshold=u, probability=p, std_error=se, trials=trials)


def lower_tail_scale(theta_value: float, n: int) -> float:
    """Threshold scale for the lower-tail law: u / (N^(1/theta) log N)
    below the transition (theta < 1), u / (N log N) above it."""
    if theta_value < 1.0:
        return 1.0 / (n ** (1.0 / theta_value) * math.log(n))
    return 1.0 / (n * math.log(n))


def lower_tail_experiment(cfg: ExperimentConfig) -> tuple[list[TailEstimate], dict]:
    """Empirical P[s_min^2 <= u * scale(N)] per size and threshold.

    Singular draws land in every bucket (s_min^2 = 0) and are counted
    separately in the metadata.
    """
    th = theta(cfg.model)
    rows: list[TailEstimate] = []
    singular_counts: dict[int, int] = {}
    for n in cfg.sizes:
        vals, singulars = collect_smin_sq(cfg, n)
        singular_counts[n] = singulars
        scale = lower_tail_scale(th, n)
        for u in cfg.thresholds:
            hits = int(np.sum(vals <= u * scale))
            rows.append(_estimate(n, u, hits, cfg.trials))
    meta = {"theta": th, "singular": singular_counts, "scaling": "lower"}
    return rows, meta


def upper_tail_experiment(cfg: ExperimentConfig) -> tuple[list[TailEstimate], dict]:
    """Empirical P[s_min^2 >= u * N^(-1/theta)] per size and threshold."""
    th = theta(cfg.model)
    rows: list[TailEstimate] = []
    singular_counts: dict[int, int] = {}
    for n in cfg.sizes:
        vals, singulars = collect_smin_sq(cfg, n)
        singular_counts[n] = singulars
        scale = n ** (-1.0 / th)
        for u in cfg.thresholds:
            hits = int(np.sum(vals >= u * scale))
            rows.append(_estimate(n, u, hits, cfg.trials))
    meta = {"theta": th, "singular": singular_counts, "scaling": "upper"}
    return rows, meta


# ---------------------------------------------------------------------------
# walk-functional experiments (radii draws only; batched across trials)


def _walk_increments(model: RadialModel, master_seed: int, n: int,
                     lo: int, hi: int) -> np.ndarray:
    """Increment matrix for trials lo..hi-1, one private substream each."""
    out = np.empty((hi - lo, n))
    for t in range(lo, hi):
        rng = trial_rng(master_seed, n, t)
        out[t - lo] = model.sample_xi(rng, n)
    return out


def _batch_m(xi: np.ndarray) -> np.ndarray:
    """Row-wise maximal segmental gain of the walks."""
    s = np.cumsum(xi, axis=1)
    return np.max(s - np.minimum.accumulate(s, axis=1), axis=1)


def _batch_log_t(xi: np.ndarray) -> np.ndarray:
    """Row-wise log of the exponential segment sum, time-stepped across
    the batch so the per-step work is vectorized."""
    trials, n = xi.shape
    lq = np.full(trials, NEG_INF)
    lt = np.full(trials, NEG_INF)
    for m in range(n):
        lq = np.logaddexp(0.0, xi[:, m] + lq)
        lt = np.logaddexp(lt, lq)
    return lt


@dataclass(frozen=True)
class GumbelResult:
    """Centered maxima samples per size, their medians, and the
    two-sample KS distances between consecutive sizes."""

    sizes: tuple[int, ...]
    theta: float
    centered: dict[int, np.ndarray]
    median_ratio: dict[int, float]
    ks: list[tuple[int, int, float]]


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov distance."""
    a = np.sort(a)
    b = np.sort(b)
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def gumbel_experiment(model: RadialModel, sizes, trials: int,
                      master_seed: int = DEFAULT_SEED, block: int = 256) -> GumbelResult:
    """Centered maxima M_N - log(N)/theta across sizes.

    As N grows the centered law settles: the KS distance between
    consecutive sizes shrinks and the median of M_N / log N approaches
    1/theta.
    """
    th = theta(model)
    centered: dict[int, np.ndarray] = {}
    median_ratio: dict[int, float] = {}
    for n in sizes:
        vals = np.empty(trials)
        for lo in range(0, trials, block):
            hi = min(lo + block, trials)
            xi = _walk_increments(model, master_seed, n, lo, hi)
            vals[lo:hi] = _batch_m(xi)
        centered[n] = vals - math.log(n) / th
        median_ratio[n] = float(np.median(vals)) / math.log(n)
    ks = []
    sizes = tuple(sizes)
    for a, b in zip(sizes[:-1], sizes[1:]):
        ks.append((a, b, ks_two_sample(centered[a], centered[b])))
    return GumbelResult(
        sizes=sizes, theta=th, centered=centered, median_ratio=median_ratio, ks=ks
    )


def t_tail_experiment(model: RadialModel, sizes, trials: int,
                      master_seed: int = DEFAULT_SEED,
                      thresholds=(1.0, 2.0, 4.0, 8.0),
                      ladder_c: float = 1.0,
                      check_excursion_bound: bool = False,
                      block: int = 256) -> tuple[list[TailEstimate], dict]:
    """Empirical survival of T_N / (N^(1/theta) ln N) (or /(N ln N) when
    theta > 1) at the given thresholds, plus the log-log slope across
    thresholds and, optionally, a pathwise excursion-bound audit."""
    th = theta(model)
    rows: list[TailEstimate] = []
    violations = 0
    slopes: dict[int, float] = {}
    for n in sizes:
        log_t = np.empty(trials)
        for lo in range(0, trials, block):
            hi = min(lo + block, trials)
            xi = _walk_increments(model, master_seed, n, lo, hi)
            log_t[lo:hi] = _batch_log_t(xi)
            if check_excursion_bound:
                for row in xi:
                    chk = walk.excursion_bound_check(
                        walk.WalkPath.from_increments(row), ladder_c
                    )
                    if not chk.holds:
                        violations += 1
        if th < 1.0:
            log_scale = math.log(n) / th + math.log(math.log(n))
        else:
            log_scale = math.log(n) + math.log(math.log(n))
        survivals = []
        for v in thresholds:
            hits = int(np.sum(log_t >= math.log(v) + log_scale))
            rows.append(_estimate(n, v, hits, trials))
            survivals.append(max(hits, 0) / trials)
        lv = np.log(np.asarray(thresholds, dtype=float))
        with np.errstate(divide="ignore"):
            ls = np.log(np.asarray(survivals))
        good = np.isfinite(ls)
        if int(np.sum(good)) >= 2:
            slope = float(np.polyfit(lv[good], ls[good], 1)[0])
        else:
            slope = math.nan
        slopes[n] = slope
    meta = {"theta": th, "slopes": slopes, "excursion_violations": violations}
    return rows, meta


# ---------------------------------------------------------------------------
# per-trial sandwich ledger


@dataclass(frozen=True)
class SandwichRecord:
    """Per-trial, per-cycle ledger row for the bound sweeps."""

    n: int
    trial: int
    cycle_len: int
    lower: float
    exact_sq: float
    upper: float
    c0: float
    m_n: float
    t_n: float
    x_n: float
    singular: bool


def sandwich_sweep(cfg: ExperimentConfig, rel_tol: float = 1e-9,
                   oracle_fraction: float = 0.01) -> tuple[list[SandwichRecord], dict]:
    """Emit the full per-trial ledger and assert both sandwiches on every
    nonsingular cycle: the functional bounds lower <= exact^2 <= upper
    and the walk form (2 X + 2 T)^(-1) <= exact^2 <= c0 exp(-M).

    A failure raises SandwichViolation with the offending seed and
    instance; a deterministic subsample of trials is cross-checked
    against the dense oracle when sizes stay within its cap.
    """
    from . import oracle as oraclemod

    records: list[SandwichRecord] = []
    checked_dense = 0
    log_slack = math.log1p(rel_tol)
    for n in cfg.sizes:
        for trial in range(cfg.trials):
            rng = trial_rng(cfg.master_seed, n, trial)
            if cfg.mode == "uniform":
                sigma = permmod.sample_uniform(n, rng)
            else:
                sigma = _single_cycle(n)
            d = cfg.model.sample_array(rng, n)
            blocks = spectral.cycle_diagonals(sigma, d)
            for blk in blocks:
                rep = spectral.bounds_cycle(blk, want_exact=True, tol=cfg.tol)
                if rep.singular:
                    records.append(SandwichRecord(
                        n=n, trial=trial, cycle_len=blk.n, lower=0.0,
                        exact_sq=0.0, upper=0.0, c0=rep.c0, m_n=math.nan,
                        t_n=math.nan, x_n=math.nan, singular=True))
                    continue
                w = walk.from_diagonal(blk)
                m_n = walk.m_functional(w)
                log_t = walk.t_functional_log(w)
                log_x = walk.x_functional_log(blk)
                log_exact = math.log(rep.exact)
                ctx = (f"seed={cfg.master_seed} n={n} trial={trial} "
                       f"cycle_len={blk.n} entries={blk.entries.tolist()!r}")
                if not (rep.log_lower <= log_exact + log_slack):
                    raise SandwichViolation(f"lower bound failed: {ctx}")
                if not (log_exact <= rep.log_upper + log_slack):
                    raise SandwichViolation(f"upper bound failed: {ctx}")
                walk_lower = -(math.log(2.0) + np.logaddexp(log_x, log_t))
                walk_upper = blk.log_c0 - m_n
                if not (walk_lower <= log_exact + log_slack):
                    raise SandwichViolation(f"walk lower bound failed: {ctx}")
                if not (log_exact <= walk_upper + log_slack):
                    raise SandwichViolation(f"walk upper bound failed: {ctx}")
                records.append(SandwichRecord(
                    n=n, trial=trial, cycle_len=blk.n, lower=rep.lower,
                    exact_sq=rep.exact, upper=rep.upper, c0=rep.c0,
                    m_n=m_n, t_n=math.exp(min(log_t, 709.0)),
                    x_n=math.exp(min(log_x, 709.0)), singular=False))
            # deterministic dense subsample: every k-th trial
            stride = max(1, int(round(1.0 / max(oracle_fraction, 1e-9))))
            if n <= oraclemod.DEFAULT_CAP and (cfg.oracle_check or trial % stride == 0):
                a = oraclemod.assemble(sigma, d)
                s_dense = oraclemod.dense_smin(a)
                s_struct, singular = spectral.smin_global_exact(sigma, d, tol=cfg.tol)
                if not singular and abs(s_struct - s_dense) > 1e-8 * max(s_dense, 1e-300):
                    raise SandwichViolation(
                        f"dense spot check failed: struct={s_struct!r} "
                        f"dense={s_dense!r} seed={cfg.master_seed} n={n} trial={trial}")
                checked_dense += 1
    meta = {"dense_checks": checked_dense}
    return records, meta


# ---------------------------------------------------------------------------
# CSV serialization (frozen schemas)


def format_float(x: float) -> str:
    return repr(float(x))


def tail_rows_csv(rows: list[TailEstimate]) -> str:
    lines = ["n,threshold,probability,std_error,trials"]
    for r in rows:
        lines.append(
            f"{r.n},{format_float(r.threshold)},{format_float(r.probability)},"
            f"{format_float(r.std_error)},{r.trials}"
        )
    return "\n".join(lines) + "\n"


def gumbel_csv(res: GumbelResult) -> str:
    lines = ["n,centered_value,cdf"]
    for n in res.sizes:
        vals = np.sort(res.centered[n])
        k = vals.size
        for i, v in enumerate(vals, start=1):
            lines.append(f"{n},{format_float(v)},{format_float(i / k)}")
    return "\n".join(lines) + "\n"


def sandwich_csv(records: list[SandwichRecord]) -> str:
    lines = ["n,trial,cycle_len,lower,exact_sq,upper,c0,m_n,t_n,x_n,singular"]
    for r in records:
        lines.append(
            f"{r.n},{r.trial},{r.cycle_len},{format_float(r.lower)},"
            f"{format_float(r.exact_sq)},{format_float(r.upper)},"
            f"{format_float(r.c0)},{format_float(r.m_n)},{format_float(r.t_n)},"
            f"{format_float(r.x_n)},{int(r.singular)}"
        )
    return "\n".join(lines) + "\n"


def experiment_log(cfg: ExperimentConfig, extra: dict) -> str:
    """Deterministic log header: config echo, tail exponent, hypothesis
    flags, and experiment-specific metadata.  No timestamps, so reruns
    are byte-identical."""
    lines = [
        "permsmin experiment log",
        f"model = {cfg.model.describe()}",
        f"sizes = {' '.join(str(n) for n in cfg.sizes)}",
        f"trials = {cfg.trials}",
        f"mode = {cfg.mode}",
        f"master_seed = {cfg.master_seed}",
        f"thresholds = {' '.join(format_float(u) for u in cfg.thresholds)}",
        f"tol = {format_float(cfg.tol)}",
    ]
    try:
        lines.append(f"theta = {format_float(theta(cfg.model))}")
    except Exception as exc:  # noqa: BLE001 - diagnostic echo only
        lines.append(f"theta = unavailable ({exc})")
    lines.append("hypothesis report:")
    lines.extend("  " + ln for ln in hypothesis_report(cfg.model).render().splitlines())
    for k in sorted(extra):
        lines.append(f"{k} = {extra[k]!r}")
    return "\n".join(lines) + "\n"
