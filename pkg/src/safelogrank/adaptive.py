"""Learning the alternative while testing: plug-in and Bayes e-processes,
and the confidence sequences they induce.

A fixed-alternative e-process grows fastest when the design alternative
``theta1`` happens to equal the true hazard ratio.  When it does not, the
*numerator* of the likelihood ratio may instead be learned from the past:
any predictive strategy ``r_i(o1 | past)`` that depends only on events
strictly before event time ``i`` keeps the running product

    M_i = prod_{k<=i} r_k(o1_k | past) / q_theta0(o1_k | batch_k)

a nonnegative martingale with unit expectation under ``theta0`` — the
learning cannot break type-I error control, it only shifts where the power
goes.

Two strategies are provided:

* **plug-in**: ``r_i = q_thetahat`` where ``thetahat`` maximizes the
  conditional likelihood of the strictly-past events, smoothed by two
  virtual observations anchored at the initial risk set (one treatment
  event with an extra treatment participant, one control event with an
  extra control participant).  The smoothing keeps the maximizer interior
  from the first event onward.

* **Bayes predictive**: ``r_i`` is the posterior predictive under a prior on
  ``theta``, discretized on a fixed log-spaced quadrature grid.  The product
  of predictive increments telescopes exactly to the (discretized) Bayes
  factor, which the tests exploit.

Inverting a family of such e-processes over a grid of null hazard ratios
gives an anytime-valid confidence sequence for the hazard ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import (
    THETA_LOWER,
    THETA_UPPER,
    EventBatch,
    _logsumexp,
    log_evalue_increment,
    log_hypergeom_event_prob,
    log_hypergeom_pmf,
    validate_theta,
)

__all__ = [
    "PlugInState",
    "PriorSpec",
    "BayesPosterior",
    "ConfidenceSequence",
    "new_plugin_state",
    "plugin_update",
    "plugin_log_increment",
    "plugin_increment",
    "plugin_log_trace",
    "bayes_predictive_log_increment",
    "bayes_log_trace",
    "confidence_sequence",
    "default_theta_grid",
]

_LOG_THETA_LO = math.log(THETA_LOWER)
_LOG_THETA_HI = math.log(THETA_UPPER)


# ---------------------------------------------------------------------------
# plug-in (prequential maximum likelihood)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlugInState:
    """Plug-in estimate of the hazard ratio from the strictly-past events.

    ``theta_hat`` maximizes the smoothed conditional log-likelihood

        sum_k log q_theta(o1_k | batch_k)
        + log q_theta(1 | m1+1, m0) + log q_theta(0 | m1, m0+1)

    where ``(m1, m0)`` is the *initial* risk set (the virtual points stay
    anchored there no matter how far the trial has progressed).  Because the
    state is immutable and updates return fresh states, an increment computed
    from a state can never have seen the batch it scores — the predictive
    discipline that makes the plug-in e-process a martingale is enforced by
    construction.

    Internally the informative single events are held as flat arrays
    (``o1``, ``log(y1/y0)``) so the score can be evaluated in one vectorized
    pass; tied batches keep their log-binomial weight tables.
    """

    m1: int
    m0: int
    theta_hat: float
    n_events: int = 0
    n_event_times: int = 0
    # singles: o1 and log(y1/y0) per informative single event
    _single_o1: np.ndarray = field(default_factory=lambda: np.zeros(0))
    _single_offset: np.ndarray = field(default_factory=lambda: np.zeros(0))
    # ties: (o1, support, log binomial weights) per informative tied batch
    _ties: tuple = ()

    def smoothed_score(self, beta: float) -> float:
        """U(beta) of the smoothed likelihood (strictly decreasing in beta)."""
        total = 0.0
        if self._single_o1.size:
            p = _sigmoid(beta + self._single_offset)
            total += float(np.sum(self._single_o1 - p))
        for o1, support, log_w in self._ties:
            total += o1 - _tilted_mean(support, log_w, beta)
        # virtual treatment event at (m1+1, m0), virtual control event at (m1, m0+1)
        total += 1.0 - _sigmoid(beta + math.log((self.m1 + 1) / self.m0))
        total -= _sigmoid(beta + math.log(self.m1 / (self.m0 + 1)))
        return total


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _tilted_mean(support: np.ndarray, log_w: np.ndarray, beta: float) -> float:
    log_p = log_w + support * beta
    log_p = log_p - _logsumexp(log_p)
    return float(np.exp(log_p) @ support)


def _solve_theta_hat(state: PlugInState) -> float:
    beta_hat = brentq(
        state.smoothed_score, _LOG_THETA_LO, _LOG_THETA_HI, xtol=1e-12, rtol=8.9e-16
    )
    return math.exp(beta_hat)


def new_plugin_state(m1: int, m0: int) -> PlugInState:
    """Fresh plug-in state before any events; the estimate comes from the
    virtual points alone (exactly 1 for a balanced initial risk set)."""
    if m1 < 1 or m0 < 1:
        raise ValueError(f"initial group sizes must be >= 1, got m1={m1}, m0={m0}")
    state = PlugInState(m1=m1, m0=m0, theta_hat=1.0)
    return PlugInState(m1=m1, m0=m0, theta_hat=_solve_theta_hat(state))


def plugin_update(state: PlugInState, batch: EventBatch) -> PlugInState:
    """Fold one event batch into the history and re-maximize.

    Forced batches (single-point support) are recorded in the counters but
    carry no likelihood information, so they are not stored.
    """
    single_o1, single_offset, ties = state._single_o1, state._single_offset, state._ties
    if not batch.forced:
        if batch.o == 1:
            single_o1 = np.append(single_o1, float(batch.o1))
            single_offset = np.append(
                single_offset, math.log(batch.risk.y1 / batch.risk.y0)
            )
        else:
            support, _ = log_hypergeom_pmf(1.0, batch.risk.y1, batch.risk.y0, batch.o)
            log_w = _log_binom_weights(batch.risk.y1, batch.risk.y0, batch.o, support)
            ties = ties + ((batch.o1, support.astype(float), log_w),)
    probe = replace(
        state,
        n_events=state.n_events + batch.o,
        n_event_times=state.n_event_times + 1,
        _single_o1=single_o1,
        _single_offset=single_offset,
        _ties=ties,
    )
    return replace(probe, theta_hat=_solve_theta_hat(probe))


def _log_binom_weights(y1: int, y0: int, o: int, support: np.ndarray) -> np.ndarray:
    from scipy.special import gammaln

    u = support
    return (
        gammaln(y1 + 1) - gammaln(u + 1) - gammaln(y1 - u + 1)
        + gammaln(y0 + 1) - gammaln(o - u + 1) - gammaln(y0 - o + u + 1)
    )


def plugin_log_increment(
    state: PlugInState, batch: EventBatch, theta0: float = 1.0
) -> float:
    """Log e-value increment q_thetahat(o1|batch) / q_theta0(o1|batch) where
    ``state`` must predate ``batch``."""
    return log_evalue_increment(state.theta_hat, theta0, batch)


def plugin_increment(state: PlugInState, batch: EventBatch, theta0: float = 1.0) -> float:
    return math.exp(plugin_log_increment(state, batch, theta0))


def plugin_log_trace(
    batches: Sequence[EventBatch],
    m1: int | None = None,
    m0: int | None = None,
    theta0: float = 1.0,
    return_numerator: bool = False,
):
    """Cumulative plug-in log e-value after each event time.

    ``m1``/``m0`` default to the risk set of the first batch.  With
    ``return_numerator`` the per-event log predictive probabilities
    log q_thetahat_i(o1_i | batch_i) come back too (they do not depend on
    ``theta0``, which confidence sequences exploit).
    """
    if not batches:
        empty = np.zeros(0)
        return (empty, empty) if return_numerator else empty
    if m1 is None:
        m1 = batches[0].risk.y1
    if m0 is None:
        m0 = batches[0].risk.y0
    state = new_plugin_state(m1, m0)
    log_num = np.empty(len(batches))
    log_inc = np.empty(len(batches))
    for i, batch in enumerate(batches):
        log_num[i] = log_hypergeom_event_prob(state.theta_hat, batch)
        log_inc[i] = plugin_log_increment(state, batch, theta0)
        state = plugin_update(state, batch)
    trace = np.cumsum(log_inc)
    return (trace, log_num) if return_numerator else trace


# ---------------------------------------------------------------------------
# Bayes predictive
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PriorSpec:
    """A prior on the hazard ratio, discretized on a fixed quadrature grid.

    ``thetas`` are the ordered positive support points and ``weights`` their
    prior masses (nonnegative, summing to one).  All posterior updating is
    deterministic reweighting in log space — no sampling anywhere — so the
    predictive-increment product telescopes to the grid Bayes factor exactly,
    up to float rounding.
    """

    thetas: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        thetas = np.asarray(self.thetas, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if thetas.ndim != 1 or thetas.size == 0 or weights.shape != thetas.shape:
            raise ValueError("thetas and weights must be matching 1-d arrays")
        if np.any(np.diff(thetas) <= 0):
            raise ValueError("thetas must be strictly increasing")
        for t in (thetas[0], thetas[-1]):
            validate_theta(float(t), "prior support point")
        if np.any(weights < 0) or not np.isfinite(weights).all():
            raise ValueError("weights must be finite and nonnegative")
        total = weights.sum()
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 (within 1e-12), got {total!r}")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "weights", weights / total)

    @classmethod
    def lognormal(
        cls, mean_log: float, sd_log: float = 0.5, n: int = 201, width: float = 6.0
    ) -> "PriorSpec":
        """Normal prior on log(theta), truncated at ``width`` standard
        deviations and discretized on ``n`` equally log-spaced nodes."""
        if sd_log <= 0 or n < 2:
            raise ValueError("sd_log must be > 0 and n >= 2")
        x = np.linspace(mean_log - width * sd_log, mean_log + width * sd_log, n)
        w = np.exp(-0.5 * ((x - mean_log) / sd_log) ** 2)
        return cls(thetas=np.exp(x), weights=w / w.sum())

    @classmethod
    def point_mass(cls, theta: float) -> "PriorSpec":
        return cls(thetas=np.array([float(theta)]), weights=np.array([1.0]))

    @classmethod
    def from_grid(cls, thetas, weights) -> "PriorSpec":
        w = np.asarray(weights, dtype=float)
        return cls(thetas=np.asarray(thetas, dtype=float), weights=w)


def _log_kernel_on_nodes(log_thetas: np.ndarray, batch: EventBatch) -> np.ndarray:
    """log q_theta(o1 | batch) evaluated at every node, vectorized."""
    y1, y0, o, o1 = batch.risk.y1, batch.risk.y0, batch.o, batch.o1
    if batch.forced:
        return np.zeros_like(log_thetas)
    if o == 1:
        log_w1 = math.log(y1) + log_thetas
        log_z = np.logaddexp(math.log(y0), log_w1)
        return (log_w1 if o1 == 1 else math.log(y0)) - log_z
    support, _ = log_hypergeom_pmf(1.0, y1, y0, o)
    log_w = _log_binom_weights(y1, y0, o, support)
    table = log_w[None, :] + np.outer(log_thetas, support.astype(float))
    m = table.max(axis=1)
    log_z = m + np.log(np.exp(table - m[:, None]).sum(axis=1))
    return table[:, int(o1 - support[0])] - log_z


class BayesPosterior:
    """Posterior over the prior's grid, updated one event batch at a time."""

    def __init__(self, prior: PriorSpec):
        self.prior = prior
        self._log_thetas = np.log(prior.thetas)
        with np.errstate(divide="ignore"):
            self._log_w = np.log(prior.weights)

    def log_predictive(self, batch: EventBatch) -> float:
        """log of the posterior-predictive probability of the observed o1."""
        log_k = _log_kernel_on_nodes(self._log_thetas, batch)
        value = _logsumexp(self._log_w + log_k) - _logsumexp(self._log_w)
        if not math.isfinite(value):
            raise ValueError(
                "posterior predictive underflowed to zero; the prior grid puts "
                "no usable mass near the data"
            )
        return float(value)

    def log_increment(self, batch: EventBatch, theta0: float = 1.0) -> float:
        if batch.forced:
            return 0.0
        return self.log_predictive(batch) - log_hypergeom_event_prob(theta0, batch)

    def update(self, batch: EventBatch) -> None:
        self._log_w = self._log_w + _log_kernel_on_nodes(self._log_thetas, batch)

    def posterior_weights(self) -> np.ndarray:
        w = np.exp(self._log_w - _logsumexp(self._log_w))
        return w / w.sum()


def bayes_predictive_log_increment(
    prior: PriorSpec,
    history: Sequence[EventBatch],
    batch: EventBatch,
    theta0: float = 1.0,
) -> float:
    """One predictive increment given the prior and the strictly-past history."""
    posterior = BayesPosterior(prior)
    for past in history:
        posterior.update(past)
    return posterior.log_increment(batch, theta0)


def bayes_log_trace(
    batches: Sequence[EventBatch],
    prior: PriorSpec,
    theta0: float = 1.0,
    return_numerator: bool = False,
):
    """Cumulative Bayes-predictive log e-value after each event time."""
    posterior = BayesPosterior(prior)
    log_num = np.empty(len(batches))
    log_inc = np.empty(len(batches))
    for i, batch in enumerate(batches):
        log_num[i] = posterior.log_predictive(batch)
        log_inc[i] = posterior.log_increment(batch, theta0)
        posterior.update(batch)
    trace = np.cumsum(log_inc) if batches else np.zeros(0)
    return (trace, log_num) if return_numerator else trace


# ---------------------------------------------------------------------------
# confidence sequences
# ---------------------------------------------------------------------------

def default_theta_grid(n: int = 400, lo: float = 1e-3, hi: float = 1e3) -> np.ndarray:
    """Log-spaced hazard-ratio grid used to invert the e-process family."""
    if n < 2 or not (THETA_LOWER <= lo < hi <= THETA_UPPER):
        raise ValueError(f"bad grid request (n={n}, lo={lo}, hi={hi})")
    return np.exp(np.linspace(math.log(lo), math.log(hi), n))


@dataclass(frozen=True)
class ConfidenceSequence:
    """Anytime-valid confidence intervals for the hazard ratio, per event time.

    ``lower``/``upper`` hold, for each event time, the hull of grid points
    *not* rejected at level alpha: the smallest interval such that every grid
    point outside it has e-value >= 1/alpha.  ``lower_bracketed`` (resp.
    upper) records whether the grid's own endpoint was rejected — when False
    the true bound lies outside the searched range and the reported endpoint
    is just the grid edge, which callers must not mistake for an inference.
    With ``intersected`` the running intersection over event times was taken,
    making the sequence monotone (nested) at the cost of non-recoverable
    narrowing.
    """

    grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    lower_bracketed: np.ndarray
    upper_bracketed: np.ndarray
    alpha: float
    numerator: str
    intersected: bool

    @property
    def final_lower(self) -> float:
        return float(self.lower[-1]) if self.lower.size else float(self.grid[0])

    @property
    def final_upper(self) -> float:
        return float(self.upper[-1]) if self.upper.size else float(self.grid[-1])

    def contains(self, theta: float) -> np.ndarray:
        """Per-event-time indicator that ``theta`` lies in the interval."""
        return (self.lower <= theta) & (theta <= self.upper)


def confidence_sequence(
    batches: Sequence[EventBatch],
    alpha: float = 0.05,
    numerator: Literal["plugin", "bayes"] = "plugin",
    grid: np.ndarray | None = None,
    prior: PriorSpec | None = None,
    m1: int | None = None,
    m0: int | None = None,
    running_intersection: bool = False,
) -> ConfidenceSequence:
    """Invert a learned-numerator e-process family into a confidence sequence.

    For every grid value ``theta'`` the e-process M_{theta'} shares the same
    numerator (the plug-in or Bayes predictive trace) and differs only in the
    denominator likelihood, so one pass computes the whole family.  The
    interval at event time i is the hull of non-rejected grid points; by
    Ville's inequality the true hazard ratio leaves the (unintersected)
    sequence at any time with probability at most alpha — provided it lies on
    the grid; off-grid values inherit the guarantee of their nearest bracketing
    grid points.  Running intersection is off by default: the plain sequence is
    what the coverage guarantee speaks about, intersection is a reporting
    convenience.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if grid is None:
        grid = default_theta_grid()
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a strictly increasing 1-d array")

    if numerator == "plugin":
        _, log_num = plugin_log_trace(batches, m1=m1, m0=m0, return_numerator=True)
    elif numerator == "bayes":
        if prior is None:
            prior = PriorSpec.lognormal(mean_log=0.0)
        _, log_num = bayes_log_trace(batches, prior, return_numerator=True)
    else:
        raise ValueError(f"unknown numerator strategy {numerator!r}")

    n_times = len(batches)
    n_grid = grid.size
    log_thetas = np.log(grid)
    log_den = np.empty((n_times, n_grid))
    for i, batch in enumerate(batches):
        log_den[i] = _log_kernel_on_nodes(log_thetas, batch)

    log_mart = np.cumsum(log_num)[:, None] - np.cumsum(log_den, axis=0)
    rejected = log_mart >= math.log(1.0 / alpha)

    lower = np.empty(n_times)
    upper = np.empty(n_times)
    lower_bracketed = np.zeros(n_times, dtype=bool)
    upper_bracketed = np.zeros(n_times, dtype=bool)
    for i in range(n_times):
        keep = ~rejected[i]
        if not keep.any():
            # grid too coarse: every candidate rejected
            lower[i] = math.nan
            upper[i] = math.nan
            lower_bracketed[i] = upper_bracketed[i] = True
            continue
        idx = np.flatnonzero(keep)
        lower[i] = grid[idx[0]]
        upper[i] = grid[idx[-1]]
        lower_bracketed[i] = bool(rejected[i, 0])
        upper_bracketed[i] = bool(rejected[i, -1])

    if running_intersection and n_times:
        lower = np.maximum.accumulate(lower)
        upper = np.minimum.accumulate(upper)
        lower_bracketed = np.maximum.accumulate(lower_bracketed)
        upper_bracketed = np.maximum.accumulate(upper_bracketed)

    return ConfidenceSequence(
        grid=grid,
        lower=lower,
        upper=upper,
        lower_bracketed=lower_bracketed,
        upper_bracketed=upper_bracketed,
        alpha=alpha,
        numerator=numerator,
        intersected=bool(running_intersection),
    )
