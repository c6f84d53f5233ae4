"""Monte-Carlo measurement simulation and median-of-means estimation.

Outcome sampling uses inverse-CDF draws from the exact outcome
distribution with a counter-based (Philox) generator; batches own
disjoint substreams, so runs are reproducible and splittable.  Shot
values come from precomputed per-outcome lookup tables rather than
per-shot matrix algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import ChoiState, outcome_distribution
from .norms import CompositeObservable
from .povm import ClassicalShadowSet, Povm, classical_shadows


@dataclass(frozen=True)
class MomPlan:
    """Sample budget from the concentration guarantee.

    K = ceil(2 ln(2HG/delta)) batches, M/K = ceil(34 kappa^2 / eps^2)
    shots per batch, M = K * (M/K) total.
    """

    batches: int
    shots: int
    epsilon: float
    delta: float
    n_observables: int
    n_states: int

    @property
    def shots_per_batch(self) -> int:
        return self.shots // self.batches


def plan(epsilon: float, delta: float, h: int, g: int, kappa_sq: float) -> MomPlan:
    """Shot budget sufficient to estimate all H*G functionals to epsilon."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if h < 1 or g < 1:
        raise ValueError("family sizes must be at least 1")
    if kappa_sq <= 0:
        raise ValueError("kappa^2 must be positive")
    k = math.ceil(2 * math.log(2 * h * g / delta))
    per_batch = math.ceil(34 * kappa_sq / epsilon**2)
    return MomPlan(
        batches=k,
        shots=k * per_batch,
        epsilon=epsilon,
        delta=delta,
        n_observables=h,
        n_states=g,
    )


def _generator(seed) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def sample_outcomes(dist: np.ndarray, m: int, seed) -> np.ndarray:
    """m i.i.d. inverse-CDF draws from a normalized outcome distribution.

    `seed` may be an int or a SeedSequence (for batch substreams).
    Returns flat outcome indices.
    """
    p = np.asarray(dist, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("distribution must be normalized and nonnegative")
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    rng = _generator(seed)
    u = rng.random(m)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


def split_outcome_index(indices: np.ndarray, n_b: int) -> np.ndarray:
    """Decode flat indices into (k_a, k_b) pairs (A-major order)."""
    idx = np.asarray(indices, dtype=np.int64)
    return np.stack([idx // n_b, idx % n_b], axis=-1)


def shot_estimator(record, shadows_a: ClassicalShadowSet, shadows_b: ClassicalShadowSet,
                   obs: CompositeObservable) -> float:
    """Single-shot estimate d Tr(rho_a rho^T) Tr(rho_b X) for outcome (k_a, k_b)."""
    k_a, k_b = int(record[0]), int(record[1])
    d = obs.dim
    sa = shadows_a.shadows[k_a]
    sb = shadows_b.shadows[k_b]
    return float(d * np.trace(sa @ obs.rho.T).real * np.trace(sb @ obs.x).real)


def estimator_tables(povm_a: Povm, povm_b: Povm, states, observables):
    """Per-outcome lookup tables: a_table[l, k_a], b_table[j, k_b].

    The shot value for pair (l, j) and outcome (k_a, k_b) is
    d * a_table[l, k_a] * b_table[j, k_b].
    """
    shadows_a = classical_shadows(povm_a)
    shadows_b = classical_shadows(povm_b)
    a_table = np.array([
        [np.trace(s @ np.asarray(rho).T).real for s in shadows_a.shadows]
        for rho in states
    ])
    b_table = np.array([
        [np.trace(s @ np.asarray(x)).real for s in shadows_b.shadows]
        for x in observables
    ])
    return a_table, b_table


@dataclass(frozen=True)
class Estimate:
    """Median of K batch means."""

    value: float
    batch_means: np.ndarray
    plan: MomPlan | None = field(default=None)


def median_of_means(shot_values: np.ndarray, k: int,
                    plan: MomPlan | None = None) -> Estimate:
    """Split into K contiguous batches, mean each, return the median.

    An even K takes the midpoint of the two central batch means.
    """
    values = np.asarray(shot_values, dtype=float)
    if k < 1:
        raise ValueError("batch count must be positive")
    if values.ndim != 1 or values.size == 0 or values.size % k != 0:
        raise ValueError(f"{values.size} shot values cannot split into {k} batches")
    means = values.reshape(k, -1).mean(axis=1)
    return Estimate(value=float(np.median(means)), batch_means=means, plan=plan)


def estimator_moments(povm_a: Povm, povm_b: Povm, eta: ChoiState,
                      obs: CompositeObservable):
    """Exact (mean, second moment) of the single-shot estimator by enumeration."""
    probs = outcome_distribution(eta, povm_a, povm_b)
    a_table, b_table = estimator_tables(povm_a, povm_b, [obs.rho], [obs.x])
    values = obs.dim * np.outer(a_table[0], b_table[0]).reshape(-1)
    mean = float(values @ probs)
    second = float((values**2) @ probs)
    return mean, second


def exact_variance(povm_a: Povm, povm_b: Povm, eta: ChoiState,
                   obs: CompositeObservable) -> float:
    """Var = sum_k x_k^2 Pr(k) - <X>^2, full enumeration over outcomes."""
    mean, second = estimator_moments(povm_a, povm_b, eta, obs)
    return second - mean**2


@dataclass(frozen=True)
class SimulationResult:
    """End-to-end estimation run: plans, estimates, truths, errors."""

    plan: MomPlan
    estimates: np.ndarray
    truths: np.ndarray
    batch_means: np.ndarray
    seed: int

    @property
    def errors(self) -> np.ndarray:
        return np.abs(self.estimates - self.truths)

    @property
    def max_error(self) -> float:
        return float(self.errors.max())


def simulate_channel_estimation(eta: ChoiState, povm_a: Povm, povm_b: Povm,
                                states, observables, epsilon: float, delta: float,
                                seed: int, kappa: float | None = None) -> SimulationResult:
    """Run the full protocol: plan, sample, estimate all G x H functionals.

    All functionals are estimated from the same outcome string, one batch
    per Philox substream.  `kappa` overrides the planner's worst-case
    squared norm (otherwise it is computed from the POVM pair).
    """
    from .channels import choi_expectation
    from .norms import kappa_sq as kappa_sq_report

    states = [np.asarray(s, dtype=complex) for s in states]
    observables = [np.asarray(x, dtype=complex) for x in observables]
    if kappa is None:
        family = [
            CompositeObservable(rho=s, x=x) for s in states for x in observables
        ]
        kappa = kappa_sq_report(povm_a, povm_b, family).value
    budget = plan(epsilon, delta, h=len(observables), g=len(states), kappa_sq=kappa)

    probs = outcome_distribution(eta, povm_a, povm_b)
    a_table, b_table = estimator_tables(povm_a, povm_b, states, observables)
    d = povm_a.dim
    n_b = povm_b.n_effects

    streams = np.random.SeedSequence(seed).spawn(budget.batches)
    batch_means = np.empty((len(states), len(observables), budget.batches))
    for k, stream in enumerate(streams):
        idx = sample_outcomes(probs, budget.shots_per_batch, stream)
        ka, kb = idx // n_b, idx % n_b
        # mean over the batch of d * a[l, ka] * b[j, kb] for every (l, j)
        batch_means[:, :, k] = d * np.einsum(
            "lm,jm->lj", a_table[:, ka], b_table[:, kb]
        ) / idx.size

    estimates = np.median(batch_means, axis=2)
    truths = np.array([
        [choi_expectation(eta, s, x) for x in observables] for s in states
    ])
    return SimulationResult(
        plan=budget,
        estimates=estimates,
        truths=truths,
        batch_means=batch_means,
        seed=seed,
    )
