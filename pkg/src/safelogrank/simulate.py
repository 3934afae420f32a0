"""Monte Carlo engine for sequential trial design with safe logrank tests.

Event streams are simulated directly on the risk-set scale: given ``y1``
treatment and ``y0`` control participants at risk, the next event falls in
the treatment group with probability ``theta * y1 / (y0 + theta * y1)``.
Tied streams instead walk unit time steps in which every at-risk
participant — control with probability ``h0``, treatment with
``h0 * theta`` — may have an event; all events inside one unit interval
form a single tied batch.

Randomness is counter-based: replication ``r`` of a run with seed ``s``
draws from a Philox stream keyed by ``(s, r)``, so results are bit-identical
however replications are chunked or distributed.

A stopping time ``tau`` is the first cumulative event count at which the
monitored statistic crosses its threshold (``+inf`` when it never does).
Designs are compared the way group-sequential designs usually are: the
maximum sample size ``n_max`` is the empirical ``power``-quantile of ``tau``,
the expected duration is the mean of ``tau' = min(tau, n_max)``, and the
early-stopping benefit is the mean of ``tau`` conditional on ``tau < n_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .adaptive import PriorSpec, bayes_log_trace, plugin_log_trace
from .core import (
    EventBatch,
    RiskSet,
    log_evalue_increment,
    update_two_sided,
    MartingaleState,
    validate_theta,
)
from .gaussian import (
    fixed_sample_boundary,
    log_gaussian_evalue,
    normal_quantile,
    obf_boundary,
    schoenfeld_mu,
)

__all__ = [
    "DesignSpec",
    "SimScenario",
    "StoppingReport",
    "TiedStream",
    "UnattainablePowerError",
    "stream_rng",
    "sample_single_event_stream",
    "sample_tied_stream",
    "stopping_time",
    "simulate_stopping_times",
    "compare_exact_gaussian",
    "estimate_nmax",
    "bootstrap_nmax",
    "summarize_stopping",
    "estimate_obf_nmax",
    "obf_stopping_times",
    "schoenfeld_sample_size",
    "wald_expected_stopping",
    "unit_time_martingale",
    "design_table",
    "DesignRow",
]

TestKind = Literal["exact", "gaussian", "plugin", "bayes", "obf", "fixed"]


class UnattainablePowerError(RuntimeError):
    """The requested power is not reached even with every observed event."""

    def __init__(self, requested: float, achieved: float):
        super().__init__(
            f"requested power {requested:.3f} but only {achieved:.3f} of "
            "replications ever stop; no finite n_max attains the target"
        )
        self.requested = requested
        self.achieved = achieved


@dataclass(frozen=True)
class DesignSpec:
    """What test is monitored and at what error rates.

    ``theta1`` is the design alternative (the minimal clinically relevant
    hazard ratio for two-sided tests); learning tests (``plugin``/``bayes``)
    ignore it for their numerator but keep it for reference sample sizes.
    ``n_max`` is the planning horizon required by ``obf`` and ``fixed``.
    """

    theta1: float
    alpha: float = 0.05
    power: float = 0.8
    theta0: float = 1.0
    test_kind: TestKind = "exact"
    two_sided: bool = False
    n_max: int | None = None
    prior: PriorSpec | None = None

    def __post_init__(self) -> None:
        validate_theta(self.theta1, "theta1")
        validate_theta(self.theta0, "theta0")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not (self.alpha < self.power < 1.0):
            raise ValueError(
                f"power must be in (alpha, 1) so that alpha + beta < 1, got {self.power}"
            )
        if self.test_kind not in ("exact", "gaussian", "plugin", "bayes", "obf", "fixed"):
            raise ValueError(f"unknown test kind {self.test_kind!r}")
        if self.test_kind in ("obf", "fixed") and self.n_max is None:
            raise ValueError(f"{self.test_kind!r} design needs an n_max horizon")
        if self.test_kind in ("exact", "gaussian", "obf") and self.theta1 == self.theta0:
            raise ValueError("theta1 must differ from theta0")

    @property
    def side(self) -> str:
        return "left" if self.theta1 < self.theta0 else "right"

    @property
    def log_threshold(self) -> float:
        return math.log(1.0 / self.alpha)


@dataclass(frozen=True)
class SimScenario:
    """A data-generating truth plus the design that monitors it."""

    m1: int
    m0: int
    theta: float
    design: DesignSpec
    replications: int = 10_000
    seed: int = 0
    tie_h0: float | None = None
    max_events: int | None = None

    def __post_init__(self) -> None:
        if self.m1 < 1 or self.m0 < 1:
            raise ValueError(f"group sizes must be >= 1, got m1={self.m1}, m0={self.m0}")
        validate_theta(self.theta)
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.tie_h0 is not None and not (
            0.0 < self.tie_h0 * max(self.theta, 1.0) < 1.0
        ):
            raise ValueError(
                f"tie_h0 * max(theta, 1) must lie in (0, 1), got tie_h0={self.tie_h0}"
            )


def stream_rng(seed: int, replication: int) -> np.random.Generator:
    """Counter-based per-replication generator keyed by (seed, replication)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, replication))))


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def sample_single_event_stream(
    m1: int,
    m0: int,
    theta: float,
    rng: np.random.Generator,
    max_events: int | None = None,
) -> list[EventBatch]:
    """One-event-at-a-time stream, run to risk-set exhaustion (or a cap)."""
    validate_theta(theta)
    y1, y0 = m1, m0
    n = m1 + m0 if max_events is None else min(max_events, m1 + m0)
    u = rng.random(n)
    out = []
    for i in range(n):
        p1 = theta * y1 / (y0 + theta * y1)
        o1 = int(u[i] < p1)
        out.append(EventBatch(risk=RiskSet(y1, y0), o=1, o1=o1))
        y1 -= o1
        y0 -= 1 - o1
    return out


@dataclass(frozen=True)
class TiedStream:
    """Event batches indexed by the unit time interval they occurred in."""

    m1: int
    m0: int
    batches: tuple[EventBatch, ...]
    times: tuple[int, ...]  # 1-based unit time of each batch
    horizon: int  # number of unit intervals simulated

    def __post_init__(self) -> None:
        if len(self.batches) != len(self.times):
            raise ValueError("each batch needs exactly one unit time")
        if any(t2 <= t1 for t1, t2 in zip(self.times, self.times[1:])):
            raise ValueError("unit times must be strictly increasing")
        if self.times and not (1 <= self.times[0] and self.times[-1] <= self.horizon):
            raise ValueError("unit times must lie within the horizon")


def sample_tied_stream(
    m1: int,
    m0: int,
    theta: float,
    h0: float,
    rng: np.random.Generator,
    horizon: int | None = None,
) -> TiedStream:
    """Unit-time stream: each at-risk participant has an event in interval k
    with probability ``h0`` (control) or ``h0 * theta`` (treatment).  Runs to
    risk-set exhaustion unless a horizon is given."""
    validate_theta(theta)
    if not (0.0 < h0 * max(theta, 1.0) < 1.0):
        raise ValueError(f"h0 * max(theta, 1) must lie in (0, 1), got h0={h0}")
    y1, y0 = m1, m0
    batches: list[EventBatch] = []
    times: list[int] = []
    k = 0
    while y1 + y0 > 0 and (horizon is None or k < horizon):
        k += 1
        o1 = int(rng.binomial(y1, h0 * theta)) if y1 else 0
        o0 = int(rng.binomial(y0, h0)) if y0 else 0
        if o1 + o0:
            batches.append(EventBatch(risk=RiskSet(y1, y0), o=o1 + o0, o1=o1))
            times.append(k)
            y1 -= o1
            y0 -= o0
    return TiedStream(
        m1=m1, m0=m0, batches=tuple(batches), times=tuple(times), horizon=k
    )


# ---------------------------------------------------------------------------
# per-stream stopping times
# ---------------------------------------------------------------------------

def stopping_time(batches: Sequence[EventBatch], design: DesignSpec) -> float:
    """First cumulative event count at which the design's statistic crosses
    its threshold, walking one explicit stream; ``inf`` if it never does."""
    n_events = np.cumsum([b.o for b in batches])
    kind = design.test_kind
    if kind in ("exact", "plugin", "bayes"):
        if kind == "exact" and design.two_sided:
            state = MartingaleState()
            trace = np.empty(len(batches))
            for i, b in enumerate(batches):
                state = update_two_sided(state, b, design.theta1, design.theta0)
                trace[i] = state.log_e
        elif kind == "exact":
            trace = np.cumsum(
                [log_evalue_increment(design.theta1, design.theta0, b) for b in batches]
            )
        elif kind == "plugin":
            trace = plugin_log_trace(batches, theta0=design.theta0)
        else:
            prior = design.prior or PriorSpec.lognormal(math.log(design.theta1))
            trace = bayes_log_trace(batches, prior, theta0=design.theta0)
        hits = np.flatnonzero(trace >= design.log_threshold)
        return float(n_events[hits[0]]) if hits.size else math.inf

    if kind in ("gaussian", "obf", "fixed"):
        mu1 = (
            schoenfeld_mu(design.theta1, batches[0].risk.y1, batches[0].risk.y0)
            if batches and kind == "gaussian"
            else None
        )
        score = variance = 0.0
        for b, n in zip(batches, n_events):
            y1, y = b.risk.y1, b.risk.total
            a1 = y1 / y
            score += b.o1 - b.o * a1
            if y > 1:
                variance += b.o * a1 * (1 - a1) * (y - b.o) / (y - 1)
            if variance <= 0:
                continue
            z = score / math.sqrt(variance)
            if kind == "gaussian":
                if log_gaussian_evalue(int(n), z, mu1) >= design.log_threshold:
                    return float(n)
            elif kind == "obf":
                if n > design.n_max:
                    return math.inf
                bound = obf_boundary(int(n), design.n_max, design.alpha, design.side)
                crossed = z <= bound if design.side == "left" else z >= bound
                if crossed:
                    return float(n)
            else:  # fixed: one look at the horizon
                if n >= design.n_max:
                    bound = fixed_sample_boundary(design.alpha, design.side)
                    crossed = z <= bound if design.side == "left" else z >= bound
                    return float(n) if crossed else math.inf
        return math.inf

    raise ValueError(f"unsupported test kind {kind!r}")


# ---------------------------------------------------------------------------
# vectorized multi-replication engine (single-event streams)
# ---------------------------------------------------------------------------

_THETA_HAT_BRACKET = (math.log(1e-8), math.log(1e8))


@dataclass
class _EngineResult:
    cap: int
    taus: dict[str, np.ndarray]
    z_scaled: np.ndarray | None = None  # (reps, cap) of Z_n * sqrt(n)
    dlog_at_exact_stop: np.ndarray | None = None


def _initial_theta_hat(m1: int, m0: int) -> float:
    """Root of the virtual-point score before any data: solved once, shared
    by every replication."""
    a = math.log((m1 + 1) / m0)
    b = math.log(m1 / (m0 + 1))

    def score(beta: float) -> float:
        return (1.0 - expit(beta + a)) - expit(beta + b)

    return float(brentq(score, *_THETA_HAT_BRACKET, xtol=1e-12, rtol=8.9e-16))


def _evolve_single_event(
    scenario: SimScenario,
    kinds: Sequence[str],
    cap: int | None = None,
    rep_range: tuple[int, int] | None = None,
    collect_z: bool = False,
    collect_dlog: bool = False,
) -> _EngineResult:
    """Evolve every replication's event stream in lockstep, one event per
    step, recording first-crossing times for the requested one-sided tests.

    All tests see the same simulated streams, so stopping times for
    different kinds are directly comparable replication by replication.
    The cap never exceeds ``m1 + m0``, so every replication has an event at
    every step and the cumulative event count is simply the step index.
    """
    design = scenario.design
    m1, m0 = scenario.m1, scenario.m0
    lo, hi = rep_range if rep_range is not None else (0, scenario.replications)
    reps = hi - lo
    cap = m1 + m0 if cap is None else min(cap, m1 + m0)
    if scenario.max_events is not None:
        cap = min(cap, scenario.max_events)
    threshold = design.log_threshold

    u = np.empty((reps, cap))
    for r in range(reps):
        u[r] = stream_rng(scenario.seed, lo + r).random(cap)

    y1 = np.full(reps, m1, dtype=np.int64)
    y0 = np.full(reps, m0, dtype=np.int64)

    want = set(kinds)
    unknown = want - {"exact", "gaussian", "plugin"}
    if unknown:
        raise ValueError(f"engine supports exact/gaussian/plugin, got {sorted(unknown)}")
    taus = {k: np.full(reps, np.inf) for k in want}

    log_t1 = math.log(design.theta1) if "exact" in want else 0.0
    log_t0 = math.log(design.theta0)
    exact_logm = np.zeros(reps)

    mu1 = schoenfeld_mu(design.theta1, m1, m0) if ("gaussian" in want or collect_z) else 0.0
    score = np.zeros(reps)
    variance = np.zeros(reps)
    gauss_logm = np.zeros(reps)

    if "plugin" in want:
        # History slabs for the smoothed score.  Empty slots hold
        # (o1, offset) = (1, +inf): sigmoid(beta + inf) == 1 makes their
        # score and information contributions exactly zero.
        hist_o1 = np.ones((reps, cap))
        hist_c = np.full((reps, cap), np.inf)
        beta = np.full(reps, _initial_theta_hat(m1, m0))
        va = math.log((m1 + 1) / m0)
        vb = math.log(m1 / (m0 + 1))
        plugin_logm = np.zeros(reps)

    z_scaled = np.full((reps, cap), np.nan) if collect_z else None
    dlog = np.full(reps, np.nan) if collect_dlog else None

    active = np.ones(reps, dtype=bool)
    for i in range(cap):
        n = i + 1
        if not active.any():
            break
        a = np.flatnonzero(active) if not collect_z else np.arange(reps)
        ay1, ay0 = y1[a], y0[a]
        total = ay1 + ay0
        p1 = scenario.theta * ay1 / (ay0 + scenario.theta * ay1)
        o1 = (u[a, i] < p1).astype(np.int64)

        informative = (ay1 > 0) & (ay0 > 0)
        inf_idx = a[informative]
        ly1 = np.log(y1[inf_idx])
        ly0 = np.log(y0[inf_idx])

        if "exact" in want:
            inc = np.zeros(a.size)
            inc[informative] = (
                o1[informative] * (log_t1 - log_t0)
                + np.logaddexp(ly0, log_t0 + ly1)
                - np.logaddexp(ly0, log_t1 + ly1)
            )
            exact_logm[a] += inc
            newly = (taus["exact"][a] == np.inf) & (exact_logm[a] >= threshold)
            taus["exact"][a[newly]] = n

        if "gaussian" in want or collect_z:
            e1 = ay1 / total
            score[a] += o1 - e1
            variance[a] += e1 * (1.0 - e1)  # o == 1, so V1 = A1 (1 - A1)
            pos = variance[a] > 0
            z = np.zeros(a.size)
            z[pos] = score[a][pos] / np.sqrt(variance[a][pos])
            if collect_z:
                z_scaled[a[pos], i] = z[pos] * math.sqrt(n)
            if "gaussian" in want:
                gauss_logm[a] = -0.5 * n * mu1 * mu1 + mu1 * math.sqrt(n) * z
                newly = pos & (taus["gaussian"][a] == np.inf) & (gauss_logm[a] >= threshold)
                taus["gaussian"][a[newly]] = n

        if "plugin" in want:
            inc = np.zeros(a.size)
            b_inf = beta[inf_idx]
            inc[informative] = (
                o1[informative] * (b_inf - log_t0)
                + np.logaddexp(ly0, log_t0 + ly1)
                - np.logaddexp(ly0, b_inf + ly1)
            )
            plugin_logm[a] += inc
            newly = (taus["plugin"][a] == np.inf) & (plugin_logm[a] >= threshold)
            taus["plugin"][a[newly]] = n
            # fold the new observation into each history, then re-solve
            hist_o1[inf_idx, i] = o1[informative]
            hist_c[inf_idx, i] = ly1 - ly0
            _newton_theta_hat(beta, hist_o1, hist_c, i + 1, va, vb, inf_idx)

        if collect_dlog and {"exact", "gaussian"} <= want:
            hit = a[(taus["exact"][a] == n)]
            dlog[hit] = np.abs(exact_logm[hit] - gauss_logm[hit])

        y1[a] -= o1
        y0[a] -= 1 - o1

        done = np.ones(a.size, dtype=bool)
        for k in want:
            done &= taus[k][a] < np.inf
        if not collect_z:
            active[a[done]] = False

    return _EngineResult(
        cap=cap,
        taus=taus,
        z_scaled=z_scaled,
        dlog_at_exact_stop=dlog,
    )


def _newton_theta_hat(
    beta: np.ndarray,
    hist_o1: np.ndarray,
    hist_c: np.ndarray,
    width: int,
    va: float,
    vb: float,
    rows: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 40,
) -> None:
    """Newton update, in place, of the smoothed-score roots for ``rows``.

    The smoothed log likelihood is strictly concave in beta with positive
    information from the two virtual points, so warm-started Newton with a
    bracket clamp converges in a couple of iterations.
    """
    if rows.size == 0:
        return
    o1 = hist_o1[rows, :width]
    c = hist_c[rows, :width]
    b = beta[rows]
    for _ in range(max_iter):
        sig = expit(b[:, None] + c)
        sa = expit(b + va)
        sb = expit(b + vb)
        u_val = (o1 - sig).sum(axis=1) + (1.0 - sa) - sb
        info = (sig * (1.0 - sig)).sum(axis=1) + sa * (1.0 - sa) + sb * (1.0 - sb)
        step = u_val / info
        b = np.clip(b + step, *_THETA_HAT_BRACKET)
        if np.max(np.abs(step)) <= tol:
            break
    beta[rows] = b


def simulate_stopping_times(
    scenario: SimScenario,
    cap: int | None = None,
    chunk_size: int | None = None,
) -> np.ndarray:
    """Stopping times (in events) for every replication of a scenario.

    ``chunk_size`` only bounds memory: replications are keyed individually,
    so any chunking returns bit-identical results.
    """
    design = scenario.design
    if (
        scenario.tie_h0 is not None
        or design.two_sided
        or design.test_kind not in ("exact", "gaussian", "plugin")
    ):
        return _stopping_times_per_stream(scenario, cap)
    reps = scenario.replications
    chunk = reps if chunk_size is None else max(1, chunk_size)
    parts = []
    for lo in range(0, reps, chunk):
        res = _evolve_single_event(
            scenario,
            kinds=(design.test_kind,),
            cap=cap,
            rep_range=(lo, min(lo + chunk, reps)),
        )
        parts.append(res.taus[design.test_kind])
    return np.concatenate(parts)


def _stopping_times_per_stream(scenario: SimScenario, cap: int | None) -> np.ndarray:
    design = scenario.design
    taus = np.empty(scenario.replications)
    limit = scenario.max_events if cap is None else cap
    for r in range(scenario.replications):
        rng = stream_rng(scenario.seed, r)
        if scenario.tie_h0 is None:
            batches: Sequence[EventBatch] = sample_single_event_stream(
                scenario.m1, scenario.m0, scenario.theta, rng, max_events=limit
            )
        else:
            stream = sample_tied_stream(
                scenario.m1, scenario.m0, scenario.theta, scenario.tie_h0, rng
            )
            batches = stream.batches
        taus[r] = stopping_time(batches, design)
    return taus


@dataclass(frozen=True)
class ExactGaussianComparison:
    tau_exact: np.ndarray
    tau_gaussian: np.ndarray
    dlog_at_exact_stop: np.ndarray  # nan where the exact test never stopped


def compare_exact_gaussian(scenario: SimScenario, cap: int | None = None) -> ExactGaussianComparison:
    """Run the exact and Gaussian-approximate tests on the same streams and
    record how far apart their log e-values are at the exact test's
    stopping time."""
    res = _evolve_single_event(
        scenario, kinds=("exact", "gaussian"), cap=cap, collect_dlog=True
    )
    return ExactGaussianComparison(
        tau_exact=res.taus["exact"],
        tau_gaussian=res.taus["gaussian"],
        dlog_at_exact_stop=res.dlog_at_exact_stop,
    )


# ---------------------------------------------------------------------------
# design summaries
# ---------------------------------------------------------------------------

def estimate_nmax(taus: np.ndarray, power: float) -> int:
    """Smallest horizon n_max with P(tau <= n_max) >= power, empirically:
    the ceil(power * N)-th order statistic of the stopping times."""
    if not (0.0 < power < 1.0):
        raise ValueError(f"power must be in (0, 1), got {power}")
    taus = np.asarray(taus, dtype=float)
    k = math.ceil(power * taus.size)
    finite = np.sort(taus[np.isfinite(taus)])
    if finite.size < k:
        raise UnattainablePowerError(power, finite.size / taus.size)
    return int(finite[k - 1])


def bootstrap_nmax(
    taus: np.ndarray,
    power: float,
    rounds: int = 1000,
    seed: int = 0,
    level: float = 0.95,
) -> tuple[int, int]:
    """Percentile bootstrap interval for the estimated n_max."""
    taus = np.asarray(taus, dtype=float)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, 0xB007))))
    estimates = np.empty(rounds)
    for b in range(rounds):
        resampled = taus[rng.integers(0, taus.size, taus.size)]
        try:
            estimates[b] = estimate_nmax(resampled, power)
        except UnattainablePowerError:
            estimates[b] = np.inf
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(estimates, [tail, 1.0 - tail])
    return int(lo), int(hi)


@dataclass(frozen=True)
class StoppingReport:
    """Design summary at a fixed horizon: expected duration with stopping
    truncated at n_max, mean duration of the runs that stopped early, and
    achieved power."""

    n_max: int
    mean_capped: float
    conditional_mean: float
    power: float
    replications: int
    seed: int | None = None

    def as_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "mean_capped": self.mean_capped,
            "conditional_mean": self.conditional_mean,
            "power": self.power,
            "replications": self.replications,
            "seed": self.seed,
        }


def summarize_stopping(taus: np.ndarray, n_max: int, seed: int | None = None) -> StoppingReport:
    taus = np.asarray(taus, dtype=float)
    capped = np.minimum(taus, n_max)
    early = taus[taus < n_max]
    return StoppingReport(
        n_max=int(n_max),
        mean_capped=float(capped.mean()),
        conditional_mean=float(early.mean()) if early.size else math.nan,
        power=float((taus <= n_max).mean()),
        replications=taus.size,
        seed=seed,
    )


def obf_stopping_times(
    z_scaled: np.ndarray, n_max: int, alpha: float, side: str = "left"
) -> np.ndarray:
    """First event count n <= n_max at which Z_n crosses the O'Brien-Fleming
    boundary, given the matrix of Z_n * sqrt(n) paths."""
    if n_max > z_scaled.shape[1]:
        raise ValueError(f"n_max={n_max} exceeds the simulated path length {z_scaled.shape[1]}")
    path = z_scaled[:, :n_max]
    crit = normal_quantile(1.0 - alpha / 2.0) * math.sqrt(n_max)
    with np.errstate(invalid="ignore"):
        hits = path <= -crit if side == "left" else path >= crit
    any_hit = hits.any(axis=1)
    first = hits.argmax(axis=1) + 1.0
    return np.where(any_hit, first, np.inf)


def estimate_obf_nmax(
    scenario: SimScenario,
    cap: int,
    power: float | None = None,
) -> tuple[int, np.ndarray]:
    """Smallest O'Brien-Fleming horizon reaching the target power, found by
    scanning candidate horizons over shared simulated Z paths.

    A path crosses the boundary for horizon ``h`` iff
    ``min_n (Z_n * sqrt(n)) <= -z_{1-alpha/2} * sqrt(h)`` (left side), so one
    running minimum per path answers every candidate at once.  Returns the
    horizon and the matrix of scaled-Z paths for reuse.
    """
    design = scenario.design
    power = design.power if power is None else power
    res = _evolve_single_event(scenario, kinds=("gaussian",), cap=cap, collect_z=True)
    z_scaled = res.z_scaled
    crit = normal_quantile(1.0 - design.alpha / 2.0)
    with np.errstate(invalid="ignore"):
        extreme = (
            np.fmin.accumulate(z_scaled, axis=1)
            if design.side == "left"
            else np.fmax.accumulate(z_scaled, axis=1)
        )
    for h in range(1, res.cap + 1):
        col = extreme[:, h - 1]
        bound = crit * math.sqrt(h)
        frac = np.mean(col <= -bound) if design.side == "left" else np.mean(col >= bound)
        if frac >= power:
            return h, z_scaled
    achieved = float(np.mean(extreme[:, -1] <= -crit * math.sqrt(res.cap)))
    raise UnattainablePowerError(power, achieved)


def schoenfeld_sample_size(theta1: float, alpha: float = 0.05, beta: float = 0.2) -> int:
    """Classical fixed-sample event count for a one-sided level-alpha
    logrank test with power 1 - beta under a balanced design."""
    validate_theta(theta1, "theta1")
    if theta1 == 1.0:
        raise ValueError("theta1 = 1 has no finite fixed sample size")
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0 and alpha + beta < 1.0):
        raise ValueError(f"need alpha, beta in (0, 1) with alpha + beta < 1, got {alpha}, {beta}")
    za = normal_quantile(1.0 - alpha)
    zb = normal_quantile(1.0 - beta)
    return math.ceil(4.0 * (za + zb) ** 2 / math.log(theta1) ** 2)


def wald_expected_stopping(
    theta: float,
    theta1: float,
    m1: int,
    m0: int,
    alpha: float = 0.05,
    theta0: float = 1.0,
) -> float:
    """Wald-style approximation to the expected stopping time in events:
    log(1/alpha) divided by the expected log growth per event, computed for
    the single-event kernel with the risk ratio frozen at m1 : m0."""
    validate_theta(theta)
    validate_theta(theta1, "theta1")
    validate_theta(theta0, "theta0")

    def p(th: float) -> float:
        return th * m1 / (m0 + th * m1)

    pt, pa, p0 = p(theta), p(theta1), p(theta0)
    drift = pt * math.log(pa / p0) + (1.0 - pt) * math.log((1.0 - pa) / (1.0 - p0))
    if drift <= 0.0:
        raise ValueError(
            "expected log growth per event is nonpositive at this truth; "
            "the test is not expected to stop"
        )
    return math.log(1.0 / alpha) / drift


# ---------------------------------------------------------------------------
# unit-time view of a tied stream
# ---------------------------------------------------------------------------

def unit_time_martingale(
    stream: TiedStream, theta1: float, theta0: float = 1.0
) -> np.ndarray:
    """Cumulative log e-value indexed by unit time rather than event time.

    Unit intervals without events contribute a factor of one, so the
    process agrees with the event-time martingale at every event time and
    is flat in between — the two views are interchangeable for monitoring.
    """
    log_u = np.zeros(stream.horizon)
    increments = {
        t: log_evalue_increment(theta1, theta0, b)
        for t, b in zip(stream.times, stream.batches)
    }
    running = 0.0
    for k in range(1, stream.horizon + 1):
        running += increments.get(k, 0.0)
        log_u[k - 1] = running
    return log_u


# ---------------------------------------------------------------------------
# design tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DesignRow:
    """One monitored design in a comparison table; ratios are relative to
    the classical fixed-sample event count."""

    test_kind: str
    n_max: int
    mean_capped: float
    conditional_mean: float
    power: float
    ratio_n_max: float
    ratio_mean: float


def design_table(
    theta1: float,
    m1: int,
    m0: int,
    *,
    theta: float | None = None,
    alpha: float = 0.05,
    power: float = 0.8,
    replications: int = 1000,
    seed: int = 0,
    kinds: Sequence[str] = ("exact",),
    cap: int | None = None,
    include_obf: bool = False,
    obf_cap: int | None = None,
) -> dict:
    """Compare sequential designs against the classical fixed-sample test.

    Simulates stopping times under ``theta`` (defaulting to the design
    alternative), sizes each design for the requested power, and reports
    expected durations.  The classical row is the reference: its n_max is
    the Schoenfeld event count and it never stops early.
    """
    theta = theta1 if theta is None else theta
    n_fixed = schoenfeld_sample_size(theta1, alpha, 1.0 - power)
    rows: list[DesignRow] = []
    unattained: list[dict] = []

    design = DesignSpec(theta1=theta1, alpha=alpha, power=power)
    scenario = SimScenario(
        m1=m1, m0=m0, theta=theta, design=design, replications=replications, seed=seed
    )
    engine_kinds = [k for k in kinds if k in ("exact", "gaussian", "plugin")]
    if engine_kinds:
        res = _evolve_single_event(scenario, kinds=engine_kinds, cap=cap)
        for kind in engine_kinds:
            taus = res.taus[kind]
            try:
                n_max = estimate_nmax(taus, power)
            except UnattainablePowerError as err:
                unattained.append(
                    {"test_kind": kind, "requested": err.requested, "achieved": err.achieved}
                )
                continue
            rep = summarize_stopping(taus, n_max, seed=seed)
            rows.append(
                DesignRow(
                    test_kind=kind,
                    n_max=n_max,
                    mean_capped=rep.mean_capped,
                    conditional_mean=rep.conditional_mean,
                    power=rep.power,
                    ratio_n_max=n_max / n_fixed,
                    ratio_mean=rep.mean_capped / n_fixed,
                )
            )

    if include_obf:
        horizon_cap = obf_cap if obf_cap is not None else (cap or m1 + m0)
        try:
            h, z_scaled = estimate_obf_nmax(scenario, cap=horizon_cap)
        except UnattainablePowerError as err:
            unattained.append(
                {
                    "test_kind": "obrien-fleming",
                    "requested": err.requested,
                    "achieved": err.achieved,
                }
            )
        else:
            taus = obf_stopping_times(z_scaled, h, alpha, design.side)
            rep = summarize_stopping(taus, h, seed=seed)
            rows.append(
                DesignRow(
                    test_kind="obrien-fleming",
                    n_max=h,
                    mean_capped=rep.mean_capped,
                    conditional_mean=rep.conditional_mean,
                    power=rep.power,
                    ratio_n_max=h / n_fixed,
                    ratio_mean=rep.mean_capped / n_fixed,
                )
            )

    rows.append(
        DesignRow(
            test_kind="fixed-classical",
            n_max=n_fixed,
            mean_capped=float(n_fixed),
            conditional_mean=math.nan,
            power=power,
            ratio_n_max=1.0,
            ratio_mean=1.0,
        )
    )
    try:
        wald = wald_expected_stopping(theta, theta1, m1, m0, alpha)
    except ValueError:
        wald = math.nan  # no positive drift at this truth
    return {
        "n_fixed": n_fixed,
        "wald_expected": wald,
        "rows": rows,
        "unattained": unattained,
    }
