"""Seeded Monte Carlo experiments on the dispersion of uniform random points.

Every experiment draws replicate ``i`` from its own stream (see
:mod:`.rng`) and reduces with compensated sums, so a report depends only on
its configuration and seed, never on the worker count.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import bounds
from .cover import GridCoverConfig, certified_bounds
from .rng import Summary, check_seed, run_replicates, summarize, uniform_points
from .solvers import DEFAULT_BUDGET, exact_value, max_circular_gap

EULER_GAMMA = 0.5772156649015329
METHODS = ("exact", "certified")


@dataclass(frozen=True)
class SimConfig:
    n: int
    d: int
    reps: int
    seed: int
    method: str = "exact"
    delta: float | None = None
    periodic: bool = False
    confidence: float = 0.95
    workers: int = 1
    budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        if self.n < 1 or self.d < 1 or self.reps < 1:
            raise ValueError("n, d and reps must be positive")
        check_seed(self.seed)
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.method == "certified":
            if self.delta is None or not (0.0 < self.delta <= 1.0):
                raise ValueError(f"certified method requires delta in (0, 1], got {self.delta}")
        if self.method == "exact" and self.periodic and self.d != 1:
            raise ValueError("exact periodic dispersion is only available for d = 1; use method 'certified'")
        if not (0.0 < self.confidence < 1.0):
            raise ValueError("confidence must lie in (0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    @property
    def resolution(self) -> int | None:
        if self.method != "certified":
            return None
        return GridCoverConfig(self.delta, self.d, self.periodic).m  # type: ignore[arg-type]

    def with_n(self, n: int) -> "SimConfig":
        return SimConfig(**{**asdict(self), "n": n})

    def to_dict(self) -> dict[str, Any]:
        # worker count never changes results, so it stays out of reports
        out = asdict(self)
        del out["workers"]
        out["resolution"] = self.resolution
        return out


@dataclass
class Comparison:
    name: str
    kind: str
    bound: float | None
    ok: bool | None
    note: str = ""

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class EstimateReport:
    """Monte Carlo estimate of E disp with the bounds it was checked against.

    ``estimate`` is set for the exact method. The certified method reports
    the mean of the per-replicate lower ends and of the upper ends; each
    upper end already includes the certificate width.
    """

    config: SimConfig
    estimate: Summary | None
    lower: Summary | None = None
    upper: Summary | None = None
    comparisons: list[Comparison] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def interval(self) -> tuple[float, float]:
        if self.estimate is not None:
            return self.estimate.mean, self.estimate.mean
        assert self.lower is not None and self.upper is not None
        return self.lower.mean, self.upper.mean

    @property
    def mean(self) -> float:
        lo, up = self.interval
        return 0.5 * (lo + up)

    def edges(self) -> tuple[float, float]:
        """Low and high ends of the confidence region for E disp."""
        if self.estimate is not None:
            h = self.estimate.half_width or 0.0
            return self.estimate.mean - h, self.estimate.mean + h
        assert self.lower is not None and self.upper is not None
        return (self.lower.mean - (self.lower.half_width or 0.0),
                self.upper.mean + (self.upper.half_width or 0.0))

    def verdict(self, kind: str) -> bool | None:
        for c in self.comparisons:
            if c.kind == kind and c.ok is not None:
                return c.ok
        return None

    @property
    def lower_ok(self) -> bool | None:
        return self.verdict("lower")

    @property
    def upper_ok(self) -> bool | None:
        return self.verdict("upper")

    @property
    def passed(self) -> bool:
        return all(c.ok is not False for c in self.comparisons)

    def to_dict(self) -> dict[str, Any]:
        lo, hi = self.edges()
        return {
            "config": self.config.to_dict(),
            "seed": self.config.seed,
            "reps": self.config.reps,
            "estimate": self.estimate.to_dict() if self.estimate else None,
            "lower": self.lower.to_dict() if self.lower else None,
            "upper": self.upper.to_dict() if self.upper else None,
            "interval": list(self.interval),
            "confidence_region": [lo, hi],
            "comparisons": [c.to_dict() for c in self.comparisons],
            "lower_ok": self.lower_ok,
            "upper_ok": self.upper_ok,
            "notes": list(self.notes),
        }


def _replicate_fn(cfg: SimConfig):
    n, d, budget = cfg.n, cfg.d, cfg.budget
    if cfg.method == "certified":
        m = cfg.resolution

        def certified(rng):
            return certified_bounds(uniform_points(rng, n, d), m, cfg.periodic, budget)

        return certified
    if cfg.periodic:
        return lambda rng: max_circular_gap(uniform_points(rng, n, 1)[:, 0])
    return lambda rng: exact_value(uniform_points(rng, n, d), budget)


def _compare(report: EstimateReport) -> None:
    cfg = report.config
    lo_edge, hi_edge = report.edges()
    n, d = cfg.n, cfg.d
    if n > d:
        lower, upper = bounds.thm1_bounds(n, d)
        note = "periodic dispersion dominates the plain one" if cfg.periodic else ""
        report.comparisons.append(Comparison("expected_lower", "lower", lower, hi_edge >= lower, note))
    else:
        report.comparisons.append(Comparison("expected_lower", "lower", None, None, "requires n > d"))
        report.notes.append("bound comparison omitted: requires n > d")
    if cfg.periodic:
        per = bounds.periodic_expected_bound(n, d)
        valid = bounds.periodic_bound_valid(n, d)
        clamped = min(1.0, per)
        note = "" if valid else "cover bound precondition fails at delta=2d/n"
        report.comparisons.append(Comparison("periodic_upper", "upper", clamped, lo_edge <= clamped, note))
    elif n > d:
        clamped = min(1.0, upper)
        note = "vacuous, clamped to 1" if upper > 1 else ""
        report.comparisons.append(Comparison("expected_upper", "upper", clamped, lo_edge <= clamped, note))
    else:
        report.comparisons.append(Comparison("expected_upper", "upper", None, None, "requires n > d"))


def estimate_expected_dispersion(cfg: SimConfig) -> EstimateReport:
    """Estimate E disp(X_1..X_n) and check it against the known bounds."""
    values = run_replicates(_replicate_fn(cfg), cfg.reps, cfg.seed, cfg.workers)
    if cfg.method == "certified":
        arr = np.asarray(values, dtype=np.float64)
        report = EstimateReport(cfg, None, summarize(arr[:, 0], cfg.confidence), summarize(arr[:, 1], cfg.confidence))
    else:
        report = EstimateReport(cfg, summarize(values, cfg.confidence))
    if cfg.reps < 2:
        report.notes.append("variance undefined for a single replicate")
    _compare(report)
    return report


@dataclass
class InverseReport:
    eps: float
    d: int
    estimate: int
    bracket: tuple[int, int]
    evaluations: list[dict[str, Any]]
    template: SimConfig | None
    comparisons: list[Comparison] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "eps": self.eps,
            "d": self.d,
            "estimate": self.estimate,
            "bracket": list(self.bracket),
            "evaluations": list(self.evaluations),
            "template": self.template.to_dict() if self.template else None,
            "comparisons": [c.to_dict() for c in self.comparisons],
            "notes": list(self.notes),
        }


def estimate_inverse(eps: float, d: int, template: SimConfig, max_n: int = 1 << 16) -> InverseReport:
    """Smallest n whose estimated E disp is at most ``eps``.

    An n passes when the high end of its confidence region (the certified
    upper mean for the certified method) is at most ``eps``. The search
    doubles n until one passes, then bisects, assuming monotonicity in n.
    All n share the template seed. The result is a bracket: ``n_lo`` is the
    largest failing n seen (0 if none) and ``n_hi`` the estimate.
    """
    if not (eps > 0.0):
        raise ValueError(f"eps must be positive, got {eps}")
    if template.d != d:
        template = SimConfig(**{**asdict(template), "d": d})
    if eps >= 1.0:
        rep = InverseReport(eps, d, 1, (0, 1), [], template, notes=["dispersion never exceeds 1"])
        return rep
    evaluations: list[dict[str, Any]] = []
    cache: dict[int, bool] = {}

    def passes(n: int) -> bool:
        if n not in cache:
            report = estimate_expected_dispersion(template.with_n(n))
            edge = report.edges()[1]
            cache[n] = edge <= eps
            evaluations.append({"n": n, "mean": report.mean, "high_edge": edge, "pass": cache[n]})
        return cache[n]

    n_lo, n_hi = 0, 1
    while not passes(n_hi):
        n_lo = n_hi
        n_hi *= 2
        if n_hi > max_n:
            raise RuntimeError(f"search budget exhausted: E disp estimate above {eps} for all n <= {max_n}")
    while n_hi - n_lo > 1:
        mid = (n_lo + n_hi) // 2
        if passes(mid):
            n_hi = mid
        else:
            n_lo = mid
    rep = InverseReport(eps, d, n_hi, (n_lo, n_hi), evaluations, template)
    if eps < 1 / (9 * math.e):
        lo, up = bounds.cor1_bounds(eps, d)
        rep.comparisons.append(Comparison("inverse_lower", "lower", lo, n_hi >= lo))
        rep.comparisons.append(Comparison("inverse_upper", "upper", float(up), n_lo < up))
    else:
        rep.notes.append("bound comparison omitted: requires eps < 1/(9e)")
    return rep


# --------------------------------------------------------------------------
# auxiliary random experiments


def coupon_time(rng: np.random.Generator, l: int) -> int:
    """Draws needed to see all ``l`` symbols of a uniform sequence."""
    chunk = max(16, int(l * (math.log(l) + 2)))
    draws = np.empty(0, dtype=np.int64)
    while True:
        draws = np.concatenate((draws, rng.integers(0, l, size=chunk)))
        uniq, first = np.unique(draws, return_index=True)
        if uniq.size == l:
            return int(first.max()) + 1


def coupon_variance(l: int) -> float:
    """Exact variance ``l^2 sum 1/j^2 - l H_l`` of the collection time."""
    return l * l * math.fsum(1.0 / (j * j) for j in range(1, l + 1)) - l * bounds.harmonic(l)


def simulate_coupon(l: int, n: int, reps: int, seed: int, confidence: float = 0.95, workers: int = 1) -> dict[str, Any]:
    """Empirical tail ``P(tau > n)`` and moments of the collection time."""
    if l < 1 or n < 0:
        raise ValueError("need l >= 1 and n >= 0")
    taus = np.asarray(run_replicates(lambda rng: coupon_time(rng, l), reps, seed, workers), dtype=np.int64)
    h = bounds.harmonic(l)
    tail = float(np.count_nonzero(taus > n)) / reps
    tail_se = math.sqrt(tail * (1 - tail) / reps)
    mean = summarize(taus, confidence)
    expected = l * h
    mean_z = None if not mean.stderr else (mean.mean - expected) / mean.stderr
    claim = n <= (h - 2) * l
    out = {
        "ell": l,
        "n": n,
        "reps": reps,
        "seed": seed,
        "harmonic": h,
        "claim_applies": claim,
        "tail_prob": tail,
        "tail_se": tail_se,
        "tail_margin_se": None if tail_se == 0 else (tail - 0.5) / tail_se,
        "tail_ok": (tail - 0.5 > 3 * tail_se) if claim else None,
        "mean": mean.to_dict(),
        "expected_mean": expected,
        "mean_z": mean_z,
        "mean_ok": None if mean.stderr is None else abs(mean.mean - expected) <= 4 * mean.stderr,
        "sample_variance": None if mean.std is None else mean.std**2,
        "variance_scale": math.pi**2 * l * l / 6,
        "exact_variance": coupon_variance(l),
    }
    return out


def anchored_box(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Anchored empty box ``prod [0, a_j)`` built from largest coordinates.

    Returns ``(a, jstar, xstar)``: the upper corner, each point's argmax
    axis (smallest axis on ties) and its largest coordinate.
    """
    pts = np.asarray(points, dtype=np.float64)
    l, d = pts.shape
    jstar = np.argmax(pts, axis=1)
    xstar = pts[np.arange(l), jstar]
    a = np.ones(d)
    np.minimum.at(a, jstar, xstar)
    return a, jstar, xstar


def _anchored_rep(l: int, d: int):
    def rep(rng):
        pts = uniform_points(rng, l, d)
        a, _, xstar = anchored_box(pts)
        # half-open box [0, a): inside iff every coordinate is below a
        if np.any(np.all(pts < a, axis=1)):
            raise RuntimeError("anchored box contains a point")
        return float(np.prod(xstar)), float(np.prod(a)), float(xstar.mean())

    return rep


def simulate_anchored_box(l: int, d: int, reps: int, seed: int, confidence: float = 0.95, workers: int = 1) -> dict[str, Any]:
    """Volume of the anchored box against ``(d/(d+1))^l`` and ``exp(-l/d)``."""
    if l < 1 or d < 1:
        raise ValueError("l and d must be positive")
    rows = np.asarray(run_replicates(_anchored_rep(l, d), reps, seed, workers))
    product = summarize(rows[:, 0], confidence)
    target = bounds.anchored_intermediate(l, d)
    lower = bounds.anchored_lower_bound(l, d)
    se = product.stderr
    return {
        "ell": l,
        "d": d,
        "reps": reps,
        "seed": seed,
        "empty_fraction": 1.0,
        "product": product.to_dict(),
        "volume": summarize(rows[:, 1], confidence).to_dict(),
        "xstar": summarize(rows[:, 2], confidence).to_dict(),
        "xstar_expected": d / (d + 1),
        "target": target,
        "exp_bound": lower,
        "target_exceeds_exp_bound": target >= lower,
        "product_z": None if not se else (product.mean - target) / se,
        "product_ok": None if se is None else abs(product.mean - target) <= 4 * se,
    }


def gumbel_quantile(p: float) -> float:
    return -math.log(-math.log(p))


def simulate_circle_gaps(n: int, reps: int, seed: int, confidence: float = 0.95, workers: int = 1,
                         tolerance: float = 0.1, asymptotic_from: int = 1000) -> dict[str, Any]:
    """Statistic ``(n+1) V_n - log(n+1)`` for the largest of n+1 circular gaps."""
    if n < 1:
        raise ValueError("n must be positive")
    shift = math.log(n + 1)
    stats = np.asarray(run_replicates(
        lambda rng: (n + 1) * max_circular_gap(rng.random(n + 1)) - shift, reps, seed, workers))
    s = summarize(stats, confidence)
    probs = (0.05, 0.25, 0.5, 0.75, 0.95)
    asymptotic = n >= asymptotic_from
    out = {
        "n": n,
        "reps": reps,
        "seed": seed,
        "statistic": s.to_dict(),
        "euler_gamma": EULER_GAMMA,
        # E V_n = H_{n+1}/(n+1) for n+1 uniform points on the circle
        "finite_n_expectation": bounds.harmonic(n + 1) - shift,
        "quantiles": {str(p): float(np.quantile(stats, p)) for p in probs},
        "gumbel_quantiles": {str(p): gumbel_quantile(p) for p in probs},
        "tolerance": tolerance,
        "ok": (abs(s.mean - EULER_GAMMA) <= tolerance) if asymptotic else None,
        "notes": [],
    }
    if not asymptotic:
        out["notes"].append("pre-asymptotic n, reported without verdict")
    if s.std is None:
        out["notes"].append("variance undefined for a single replicate")
    return out


def simulate_split_lower_bound(n: int, d: int, reps: int, seed: int, confidence: float = 0.95,
                               workers: int = 1) -> dict[str, Any]:
    """Chance that one of l equal slabs along the first axis is unhit."""
    if n < 3:
        raise ValueError("requires n >= 3")
    if d < 1:
        raise ValueError("d must be positive")
    l = bounds.split_cells(n)

    def rep(rng):
        x = uniform_points(rng, n, d)[:, 0]
        cells = np.minimum((x * l).astype(np.int64), l - 1)
        return float(np.bincount(cells, minlength=l).min() == 0)

    hits = summarize(run_replicates(rep, reps, seed, workers), confidence)
    p = hits.mean
    se = math.sqrt(p * (1 - p) / reps)
    estimate = p / l
    split = bounds.split_lower_bound(n)
    return {
        "n": n,
        "d": d,
        "reps": reps,
        "seed": seed,
        "ell": l,
        "p_empty": p,
        "p_empty_se": se,
        "claim_applies": n <= (bounds.harmonic(l) - 2) * l,
        "p_empty_ok": p - 0.5 > 3 * se,
        "bound_estimate": estimate,
        "half_cell_bound": 1 / (2 * l),
        "split_lower": split,
        "ok": estimate >= split,
    }
