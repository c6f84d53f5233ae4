"""Simulated annealing over constrained Bloch-vector POVMs.

Proposals perturb two randomly chosen effects by +xi / -xi (Gaussian noise
with std sqrt(T)), which preserves sum_k r_k exactly; candidates leaving
the unit ball or with a numerically singular W are rejected outright.
Acceptance follows the Metropolis rule, cooling is exponential with a
hard stop below T = 1e-8.

Restart chains are independent Markov chains.  Each chain owns an RNG
substream spawned from the config seed, so a chain's trajectory does not
depend on how many other restarts run alongside it; the per-chain walk
itself runs in a compiled kernel with all randomness drawn up front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .norms import bloch_norms_sq, observables_to_bloch, states_to_bloch_transposed
from .povm import (
    CUBE_DIRECTIONS,
    IC_CONDITION_LIMIT,
    OCTAHEDRON_DIRECTIONS,
    TETRAHEDRON_DIRECTIONS,
    BlochPovm,
    random_bloch_povm,
)

HARD_BREAK_TEMPERATURE = 1e-8


@dataclass(frozen=True)
class AnnealConfig:
    t0: float = 1.0
    t_min: float = 1e-8
    gamma: float = 0.95
    n_steps: int = 200
    restarts: int = 8
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.t_min < self.t0:
            raise ValueError("need 0 < t_min < t0")
        if not 0 < self.gamma < 1:
            raise ValueError("cooling rate must lie in (0, 1)")
        if self.n_steps < 1 or self.restarts < 1:
            raise ValueError("n_steps and restarts must be positive")

    def temperature_ladder(self) -> np.ndarray:
        temps = []
        t = self.t0
        while t > self.t_min:
            temps.append(t)
            t *= self.gamma
            if t < HARD_BREAK_TEMPERATURE:
                break
        return np.array(temps)


@dataclass(frozen=True, eq=False)
class AnnealResult:
    best_povm: BlochPovm
    best_energy: float
    history: np.ndarray
    accepted: int
    rejected: int


def symmetric_bloch_povm(n: int) -> BlochPovm | None:
    """Canonical symmetric layout for N in {4, 6, 8}, else None."""
    table = {4: TETRAHEDRON_DIRECTIONS, 6: OCTAHEDRON_DIRECTIONS, 8: CUBE_DIRECTIONS}
    if n in table:
        return BlochPovm(vectors=table[n])
    return None


def energy(povm: BlochPovm, family_bloch: np.ndarray) -> float:
    """Single-side energy: worst squared shadow norm over the family."""
    family = np.atleast_2d(np.asarray(family_bloch, dtype=float))
    if family.size == 0:
        raise ValueError("observable family is empty")
    return float(bloch_norms_sq(povm, family).max())


def pair_energy(povm_a: BlochPovm, povm_b: BlochPovm, states, observables) -> float:
    """Two-sided energy 4 * kappa_A^2 * kappa_B^2 for qubit Choi observables."""
    a = energy(povm_a, states_to_bloch_transposed(states))
    b = energy(povm_b, observables_to_bloch(observables))
    return 4.0 * a * b


def perturb_pair(povm: BlochPovm, temperature: float,
                 rng: np.random.Generator) -> BlochPovm | None:
    """One +xi/-xi proposal; returns None when the candidate is infeasible."""
    n = povm.n_effects
    k1 = int(rng.integers(n))
    k2 = (k1 + 1 + int(rng.integers(n - 1))) % n
    xi = rng.normal(0.0, math.sqrt(temperature), size=3)
    vectors = povm.vectors.copy()
    vectors[k1] += xi
    vectors[k2] -= xi
    if not _feasible(vectors, k1, k2):
        return None
    return BlochPovm(vectors=vectors)


def _feasible(vectors: np.ndarray, k1: int, k2: int) -> bool:
    if np.linalg.norm(vectors[k1]) > 1 or np.linalg.norm(vectors[k2]) > 1:
        return False
    w = vectors.T @ vectors / vectors.shape[0]
    eigs = np.linalg.eigvalsh(w)
    return eigs[0] > 0 and eigs[-1] / eigs[0] <= IC_CONDITION_LIMIT


@njit(cache=True)
def _eig_bounds_3x3(w):
    """Smallest/largest eigenvalue of a symmetric 3x3 matrix, closed form."""
    a, b, c = w[0, 0], w[1, 1], w[2, 2]
    d, e, f = w[0, 1], w[0, 2], w[1, 2]
    q = (a + b + c) / 3.0
    p2 = (a - q) ** 2 + (b - q) ** 2 + (c - q) ** 2 + 2.0 * (d * d + e * e + f * f)
    p = math.sqrt(max(p2 / 6.0, 0.0))
    if p == 0.0:
        return q, q
    ba, bb, bc = (a - q) / p, (b - q) / p, (c - q) / p
    bd, be, bf = d / p, e / p, f / p
    detb = (ba * (bb * bc - bf * bf) - bd * (bd * bc - bf * be)
            + be * (bd * bf - bb * be))
    r = min(max(detb / 2.0, -1.0), 1.0)
    phi = math.acos(r) / 3.0
    lo = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    hi = q + 2.0 * p * math.cos(phi)
    return lo, hi


@njit(cache=True)
def _energy_kernel(vectors, winv, x0, xvec):
    """max over family of (sum_k c_k + |sum_k c_k r_k|) / N."""
    n = vectors.shape[0]
    n_family = x0.shape[0]
    best = -1.0
    for f in range(n_family):
        vx = winv[0, 0] * xvec[f, 0] + winv[0, 1] * xvec[f, 1] + winv[0, 2] * xvec[f, 2]
        vy = winv[1, 0] * xvec[f, 0] + winv[1, 1] * xvec[f, 1] + winv[1, 2] * xvec[f, 2]
        vz = winv[2, 0] * xvec[f, 0] + winv[2, 1] * xvec[f, 1] + winv[2, 2] * xvec[f, 2]
        csum = 0.0
        rx = ry = rz = 0.0
        for k in range(n):
            ck = 0.5 * (x0[f] + vx * vectors[k, 0] + vy * vectors[k, 1]
                        + vz * vectors[k, 2])
            ck *= ck
            csum += ck
            rx += ck * vectors[k, 0]
            ry += ck * vectors[k, 1]
            rz += ck * vectors[k, 2]
        val = (csum + math.sqrt(rx * rx + ry * ry + rz * rz)) / n
        if val > best:
            best = val
    return best


@njit(cache=True)
def _chain_kernel(vectors, x0, xvec, temps, n_steps, k1_draws, k2_draws,
                  noise_draws, unif_draws, cond_limit):
    """Full annealing walk for one chain; all randomness pre-drawn.

    Returns (best_vectors, best_energy, history, accepted, rejected).
    """
    n = vectors.shape[0]
    w = np.zeros((3, 3))
    winv = np.zeros((3, 3))

    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(n):
                s += vectors[k, i] * vectors[k, j]
            w[i, j] = s / n
    _invert_3x3(w, winv)
    current = _energy_kernel(vectors, winv, x0, xvec)

    best_vectors = vectors.copy()
    best_energy = current
    history = np.empty(temps.shape[0])
    accepted = 0
    rejected = 0

    for ti in range(temps.shape[0]):
        t = temps[ti]
        sqrt_t = math.sqrt(t)
        for step in range(n_steps):
            idx = ti * n_steps + step
            k1 = k1_draws[idx]
            k2 = k2_draws[idx]
            dx = noise_draws[idx, 0] * sqrt_t
            dy = noise_draws[idx, 1] * sqrt_t
            dz = noise_draws[idx, 2] * sqrt_t

            a1x, a1y, a1z = vectors[k1, 0] + dx, vectors[k1, 1] + dy, vectors[k1, 2] + dz
            a2x, a2y, a2z = vectors[k2, 0] - dx, vectors[k2, 1] - dy, vectors[k2, 2] - dz
            if a1x * a1x + a1y * a1y + a1z * a1z > 1.0 or \
               a2x * a2x + a2y * a2y + a2z * a2z > 1.0:
                rejected += 1
                continue

            # apply the move, recompute W, gate on feasibility
            old1 = (vectors[k1, 0], vectors[k1, 1], vectors[k1, 2])
            old2 = (vectors[k2, 0], vectors[k2, 1], vectors[k2, 2])
            vectors[k1, 0], vectors[k1, 1], vectors[k1, 2] = a1x, a1y, a1z
            vectors[k2, 0], vectors[k2, 1], vectors[k2, 2] = a2x, a2y, a2z
            for i in range(3):
                for j in range(3):
                    s = 0.0
                    for k in range(n):
                        s += vectors[k, i] * vectors[k, j]
                    w[i, j] = s / n
            lo, hi = _eig_bounds_3x3(w)
            if lo <= 0.0 or hi > cond_limit * lo:
                vectors[k1, 0], vectors[k1, 1], vectors[k1, 2] = old1
                vectors[k2, 0], vectors[k2, 1], vectors[k2, 2] = old2
                rejected += 1
                continue

            _invert_3x3(w, winv)
            cand_energy = _energy_kernel(vectors, winv, x0, xvec)
            delta = cand_energy - current
            accept = delta < 0.0
            if not accept:
                arg = delta / t
                if arg < 700.0 and unif_draws[idx] < math.exp(-arg):
                    accept = True
            if accept:
                current = cand_energy
                accepted += 1
                if current < best_energy:
                    best_energy = current
                    best_vectors[:] = vectors
            else:
                vectors[k1, 0], vectors[k1, 1], vectors[k1, 2] = old1
                vectors[k2, 0], vectors[k2, 1], vectors[k2, 2] = old2
                rejected += 1
        history[ti] = best_energy
    return best_vectors, best_energy, history, accepted, rejected


@njit(cache=True)
def _invert_3x3(w, out):
    a, b, c = w[0, 0], w[1, 1], w[2, 2]
    d, e, f = w[0, 1], w[0, 2], w[1, 2]
    ca = b * c - f * f
    cd = e * f - d * c
    ce = d * f - e * b
    det = a * ca + d * cd + e * ce
    out[0, 0] = ca / det
    out[1, 1] = (a * c - e * e) / det
    out[2, 2] = (a * b - d * d) / det
    out[0, 1] = out[1, 0] = cd / det
    out[0, 2] = out[2, 0] = ce / det
    out[1, 2] = out[2, 1] = (d * e - a * f) / det


def anneal(initial: BlochPovm, family_bloch: np.ndarray,
           config: AnnealConfig) -> AnnealResult:
    """Minimize the family energy; chain 0 starts at `initial`, the other
    restarts at fresh random POVMs.  Deterministic for a fixed config."""
    family = np.atleast_2d(np.asarray(family_bloch, dtype=float))
    if family.size == 0:
        raise ValueError("observable family is empty")
    n = initial.n_effects
    temps = config.temperature_ladder()
    n_draws = temps.shape[0] * config.n_steps
    x0 = np.ascontiguousarray(family[:, 0])
    xvec = np.ascontiguousarray(family[:, 1:])

    best_energy = np.inf
    best_vectors = initial.vectors.copy()
    history = np.full(temps.shape[0], np.inf)
    accepted = 0
    rejected = 0

    for c, seq in enumerate(np.random.SeedSequence(config.seed).spawn(config.restarts)):
        rng = np.random.default_rng(seq)
        if c == 0:
            start = initial.vectors.copy()
        else:
            start = random_bloch_povm(n, rng).vectors.copy()
        k1 = rng.integers(n, size=n_draws)
        k2 = (k1 + 1 + rng.integers(n - 1, size=n_draws)) % n
        noise = rng.standard_normal(size=(n_draws, 3))
        unif = rng.random(n_draws)
        vecs, e, hist, acc, rej = _chain_kernel(
            start, x0, xvec, temps, config.n_steps, k1, k2, noise, unif,
            IC_CONDITION_LIMIT,
        )
        accepted += int(acc)
        rejected += int(rej)
        history = np.minimum(history, hist)
        if e < best_energy:
            best_energy = float(e)
            best_vectors = vecs
    if __debug__:
        assert np.abs(best_vectors.sum(axis=0)).max() < 1e-10
        assert np.linalg.norm(best_vectors, axis=1).max() <= 1 + 1e-12
    best = BlochPovm(vectors=best_vectors)
    return AnnealResult(
        best_povm=best,
        best_energy=best_energy,
        history=history,
        accepted=accepted,
        rejected=rejected,
    )


@dataclass(frozen=True, eq=False)
class OptimizeChoiResult:
    result_a: AnnealResult
    result_b: AnnealResult
    kappa_sq: float


def optimize_choi(states, observables, n_effects_a: int, n_effects_b: int,
                  config: AnnealConfig) -> OptimizeChoiResult:
    """Optimize each side of the product POVM independently.

    The energy of the composite observable family factorizes into the
    system and ancilla contributions, so the sides anneal separately; the
    combined value is 4 * kappa_A^2 * kappa_B^2 and the optimal POVM on
    the Choi system is the tensor product of the two winners.

    Side initials use the canonical symmetric POVM when one exists for
    the requested effect count (the remaining restarts are random).
    """
    states = list(states)
    observables = list(observables)
    if not states or not observables:
        raise ValueError("state and observable families must be nonempty")
    seed_a, seed_b = np.random.SeedSequence(config.seed).spawn(2)

    def run(n_effects: int, family: np.ndarray, seed_seq) -> AnnealResult:
        side_seed = int(seed_seq.generate_state(1)[0])
        side_config = AnnealConfig(
            t0=config.t0, t_min=config.t_min, gamma=config.gamma,
            n_steps=config.n_steps, restarts=config.restarts, seed=side_seed,
        )
        initial = symmetric_bloch_povm(n_effects)
        if initial is None:
            initial = random_bloch_povm(n_effects, np.random.default_rng(side_seed))
        return anneal(initial, family, side_config)

    result_a = run(n_effects_a, states_to_bloch_transposed(states), seed_a)
    result_b = run(n_effects_b, observables_to_bloch(observables), seed_b)
    return OptimizeChoiResult(
        result_a=result_a,
        result_b=result_b,
        kappa_sq=4.0 * result_a.best_energy * result_b.best_energy,
    )
