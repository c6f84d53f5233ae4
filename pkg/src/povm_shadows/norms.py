"""Shadow norms, worst-case norm maxima, and measurement baselines.

The squared shadow norm of an observable X under a POVM E is
lambda_max(sum_k Tr(rho_k X)^2 E_k); it bounds the single-shot estimator
variance for every input state.  For product POVMs on a Choi state the
norm factorizes across the system/ancilla cut, which is what all the
multiqubit paths exploit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    bloch_vector,
    hermitian,
    lambda_max,
    spectral_norm,
    tensor,
)
from .povm import (
    BlochPovm,
    ClassicalShadowSet,
    Povm,
    classical_shadows,
    w_inverse,
)


@dataclass(frozen=True, eq=False)
class CompositeObservable:
    """A (known state, observable) pair standing for d * rho^T (x) X."""

    rho: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        rho = hermitian(self.rho, atol=1e-10)
        x = hermitian(self.x, atol=1e-10)
        if rho.shape != x.shape:
            raise ValueError("state and observable dimensions differ")
        if abs(np.trace(rho).real - 1.0) > 1e-10:
            raise ValueError(f"state trace {np.trace(rho).real:.12g} != 1")
        if float(np.linalg.eigvalsh(rho)[0]) < -1e-10:
            raise ValueError("state is not positive semidefinite")
        rho.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "x", x)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


def shadow_norm_sq(povm: Povm, shadows: ClassicalShadowSet, obs: np.ndarray) -> float:
    """lambda_max(sum_k Tr(rho_k X)^2 E_k) for a single system."""
    x = np.asarray(obs, dtype=complex)
    if x.shape != (povm.dim, povm.dim):
        raise ValueError(f"observable shape {x.shape} does not match POVM dim")
    if len(shadows) != povm.n_effects:
        raise ValueError("shadow set does not match the POVM")
    acc = np.zeros_like(povm.effects[0])
    for e, s in zip(povm.effects, shadows.shadows):
        w = np.trace(s @ x).real ** 2
        acc = acc + w * e
    return lambda_max(acc, atol=1e-9)


def choi_shadow_norm_sq(povm_a: Povm, povm_b: Povm, obs: CompositeObservable) -> float:
    """Squared shadow norm of d * rho^T (x) X under a product POVM.

    Exactly equal to d^2 ||rho^T||_A^2 ||X||_B^2 because the weighted effect
    sum tensor-factorizes with PSD factors.
    """
    if povm_a.dim != obs.dim or povm_b.dim != obs.dim:
        raise ValueError("POVM dimensions do not match the observable pair")
    shadows_a = classical_shadows(povm_a)
    shadows_b = classical_shadows(povm_b)
    d = obs.dim
    a_factor = shadow_norm_sq(povm_a, shadows_a, obs.rho.T)
    b_factor = shadow_norm_sq(povm_b, shadows_b, obs.x)
    return d * d * a_factor * b_factor


@dataclass(frozen=True, eq=False)
class NormReport:
    """Worst-case squared shadow norm over a family, with the breakdown."""

    value: float
    argmax_index: int
    per_member: np.ndarray
    a_factors: np.ndarray
    b_factors: np.ndarray


def kappa_sq(povm_a: Povm, povm_b: Povm, family) -> NormReport:
    """max_j ||d rho_j^T (x) X_j||^2 over a family of composite observables."""
    members = list(family)
    if not members:
        raise ValueError("observable family is empty")
    shadows_a = classical_shadows(povm_a)
    shadows_b = classical_shadows(povm_b)
    a_factors = np.array([
        shadow_norm_sq(povm_a, shadows_a, m.rho.T) for m in members
    ])
    b_factors = np.array([
        shadow_norm_sq(povm_b, shadows_b, m.x) for m in members
    ])
    d = members[0].dim
    per_member = d * d * a_factors * b_factors
    idx = int(np.argmax(per_member))
    return NormReport(
        value=float(per_member[idx]),
        argmax_index=idx,
        per_member=per_member,
        a_factors=a_factors,
        b_factors=b_factors,
    )


# --- qubit Bloch fast path ---------------------------------------------------

def bloch_norm_sq(bp: BlochPovm, obs_bloch: np.ndarray) -> float:
    """Squared shadow norm from Bloch data: (sum c_k + |sum c_k r_k|) / N.

    c_k = [ (x0 + x . W^{-1} r_k) / 2 ]^2; agrees with the dense path.
    """
    return float(bloch_norms_sq(bp, np.asarray(obs_bloch, dtype=float)[None, :])[0])


def bloch_norms_sq(bp: BlochPovm, obs_bloch: np.ndarray) -> np.ndarray:
    """Vectorized :func:`bloch_norm_sq` over rows of a (F, 4) Bloch array."""
    obs = np.asarray(obs_bloch, dtype=float)
    if obs.ndim != 2 or obs.shape[1] != 4:
        raise ValueError(f"expected (F, 4) Bloch coefficients, got {obs.shape}")
    winv = w_inverse(bp)
    r = bp.vectors
    c = ((obs[:, :1] + obs[:, 1:] @ (winv @ r.T)) / 2) ** 2
    resultant = np.linalg.norm(c @ r, axis=1)
    return (c.sum(axis=1) + resultant) / bp.n_effects


def observables_to_bloch(observables) -> np.ndarray:
    """Stack qubit observables into an (F, 4) Bloch coefficient array."""
    return np.array([bloch_vector(np.asarray(o)) for o in observables])


def states_to_bloch_transposed(states) -> np.ndarray:
    """Bloch rows of rho^T for each state (the system-side norm argument)."""
    return np.array([bloch_vector(np.asarray(s).T) for s in states])


# --- multiqubit factorization -------------------------------------------------

@dataclass(frozen=True)
class SeparabilityStructure:
    """Ordered partition of state-side qubits into blocks.

    Each block is a tuple of qubit indices; single-qubit blocks are
    separable factors, larger blocks are genuinely entangled and get a
    dense evaluation (at most 4 qubits per block).
    """

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(int(q) for q in b) for b in self.blocks)
        seen = [q for b in blocks for q in b]
        n = len(seen)
        if sorted(seen) != list(range(n)):
            raise ValueError("blocks must partition qubit indices 0..n-1")
        for b in blocks:
            if len(b) > 4:
                raise ValueError("entangled blocks larger than 4 qubits need the dense path")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n_qubits(self) -> int:
        return sum(len(b) for b in self.blocks)

    @classmethod
    def all_separable(cls, n: int) -> "SeparabilityStructure":
        return cls(blocks=tuple((q,) for q in range(n)))


def _block_norm_sq(povms: list, block_state_t: np.ndarray,
                   shadow_cache: dict | None = None) -> float:
    """Dense lambda_max of the entangled-block weighted effect sum.

    povms: one qubit Povm per block qubit; block_state_t: rho^T on the block.
    """
    if shadow_cache is None:
        shadow_cache = {}
    shadow_sets = [_cached_shadows(p, shadow_cache) for p in povms]
    acc = None
    idx = [0] * len(povms)
    counts = [p.n_effects for p in povms]
    while True:
        shadow = shadow_sets[0].shadows[idx[0]]
        effect = povms[0].effects[idx[0]]
        for j in range(1, len(povms)):
            shadow = tensor(shadow, shadow_sets[j].shadows[idx[j]])
            effect = tensor(effect, povms[j].effects[idx[j]])
        weight = np.trace(shadow @ block_state_t).real ** 2
        acc = weight * effect if acc is None else acc + weight * effect
        for j in reversed(range(len(povms))):
            idx[j] += 1
            if idx[j] < counts[j]:
                break
            idx[j] = 0
        else:
            break
    return lambda_max(acc, atol=1e-8)


def _cached_shadows(povm: Povm, cache: dict) -> ClassicalShadowSet:
    key = id(povm)
    if key not in cache:
        cache[key] = (povm, classical_shadows(povm))
    return cache[key][1]


def factorized_kappa_sq(per_qubit_povms, structure: SeparabilityStructure,
                        states, observables) -> float:
    """Worst-case squared norm for n-qubit families, 4^n x per-factor products.

    per_qubit_povms: 2n qubit POVMs (Povm or BlochPovm), system side first.
    states: per family member, one density matrix per structure block.
    observables: per family member, one single-qubit observable per qubit.
    """
    n = structure.n_qubits
    povms = [p if isinstance(p, Povm) else _bloch_to_povm(p) for p in per_qubit_povms]
    if len(povms) != 2 * n:
        raise ValueError(f"expected {2 * n} per-qubit POVMs, got {len(povms)}")
    cache: dict = {}

    best_a = -np.inf
    for member in states:
        if len(member) != len(structure.blocks):
            raise ValueError("state entry does not match the separability structure")
        prod = 1.0
        for block, rho in zip(structure.blocks, member):
            rho = np.asarray(rho, dtype=complex)
            block_povms = [povms[q] for q in block]
            if len(block) == 1:
                shadows = _cached_shadows(block_povms[0], cache)
                prod *= shadow_norm_sq(block_povms[0], shadows, rho.T)
            else:
                prod *= _block_norm_sq(block_povms, rho.T, cache)
        best_a = max(best_a, prod)

    best_b = -np.inf
    for member in observables:
        if len(member) != n:
            raise ValueError("observable entry does not cover all qubits")
        prod = 1.0
        for q, x in enumerate(member):
            povm = povms[n + q]
            shadows = _cached_shadows(povm, cache)
            prod *= shadow_norm_sq(povm, shadows, np.asarray(x, dtype=complex))
        best_b = max(best_b, prod)

    return float(4.0 ** n * best_a * best_b)


def _bloch_to_povm(bp: BlochPovm) -> Povm:
    from .povm import bloch_povm_to_povm

    return bloch_povm_to_povm(bp)


# --- projective-measurement baselines ----------------------------------------

def pauli_bound_sq(obs: CompositeObservable) -> float:
    """Random-Pauli-measurement bound 4^{2n} ||d rho^T (x) X||_inf^2.

    The composite spectral norm factors exactly:
    ||d rho^T (x) X||_inf = d ||rho||_inf ||X||_inf.
    """
    d = obs.dim
    n = int(round(np.log2(d)))
    if 2 ** n != d:
        raise ValueError("Pauli bound is defined for qubit systems")
    norm = d * spectral_norm(obs.rho) * spectral_norm(obs.x)
    return float(4.0 ** (2 * n) * norm ** 2)


def pauli_bound_sq_product(states, observables) -> float:
    """Factorized Pauli bound for product states/observables (one qubit each)."""
    n = len(states)
    if len(observables) != n:
        raise ValueError("need one observable factor per state factor")
    norm = 2.0 ** n
    for rho in states:
        norm *= spectral_norm(np.asarray(rho, dtype=complex).T)
    for x in observables:
        norm *= spectral_norm(np.asarray(x, dtype=complex))
    return float(4.0 ** (2 * n) * norm ** 2)


def log2_pauli_bound_sq_product(states, observables) -> float:
    """log2 of :func:`pauli_bound_sq_product`, safe for large qubit counts."""
    n = len(states)
    if len(observables) != n:
        raise ValueError("need one observable factor per state factor")
    log_norm = float(n)
    for rho in states:
        log_norm += np.log2(spectral_norm(np.asarray(rho, dtype=complex).T))
    for x in observables:
        log_norm += np.log2(spectral_norm(np.asarray(x, dtype=complex)))
    return 4.0 * n + 2.0 * log_norm


@dataclass(frozen=True, eq=False)
class ProjectiveEnsemble:
    """Weighted finite set of orthonormal measurement bases.

    bases: (n_bases, d, d) array, columns of each matrix are the basis kets;
    weights: probabilities summing to 1.
    """

    bases: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        bases = np.asarray(self.bases, dtype=complex)
        weights = np.asarray(self.weights, dtype=float)
        if bases.ndim != 3 or bases.shape[1] != bases.shape[2]:
            raise ValueError(f"expected (n_bases, d, d) bases, got {bases.shape}")
        if weights.shape != (bases.shape[0],):
            raise ValueError("one weight per basis is required")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-10:
            raise ValueError("weights must be a probability vector")
        d = bases.shape[1]
        for u in bases:
            if np.max(np.abs(u.conj().T @ u - np.eye(d))) > 1e-10:
                raise ValueError("each basis must be orthonormal (unitary matrix)")
        bases.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return int(self.bases.shape[1])


def pauli_measurement_ensemble() -> ProjectiveEnsemble:
    """Uniformly weighted x/y/z eigenbasis measurements on one qubit."""
    zb = np.eye(2, dtype=complex)
    xb = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    yb = np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2)
    return ProjectiveEnsemble(
        bases=np.stack([zb, xb, yb]), weights=np.full(3, 1 / 3)
    )


def product_ensemble(a: ProjectiveEnsemble, b: ProjectiveEnsemble) -> ProjectiveEnsemble:
    """All pairwise basis products with product weights."""
    bases = np.stack([
        tensor(ua, ub) for ua in a.bases for ub in b.bases
    ])
    weights = np.array([wa * wb for wa in a.weights for wb in b.weights])
    return ProjectiveEnsemble(bases=bases, weights=weights)


def _ensemble_projectors(ensemble: ProjectiveEnsemble):
    """Yield (weight, rank-1 projector) over all (basis, outcome) pairs."""
    for u, w in zip(ensemble.bases, ensemble.weights):
        for b in range(ensemble.dim):
            ket = u[:, b]
            yield w, np.outer(ket, ket.conj())


def ensemble_measurement_channel(ensemble: ProjectiveEnsemble) -> np.ndarray:
    """Matrix of M(rho) = sum_{U,b} w_U <b|U rho U^d|b> U^d|b><b|U in the
    orthonormal Hermitian basis."""
    from .operators import basis_coefficients, hermitian_basis

    basis = hermitian_basis(ensemble.dim)
    rows = []
    weights = []
    for w, proj in _ensemble_projectors(ensemble):
        rows.append(basis_coefficients(proj, basis))
        weights.append(w)
    a = np.array(rows)
    return (a * np.array(weights)[:, None]).T @ a


def projective_ensemble_norm_sq(ensemble: ProjectiveEnsemble, obs: np.ndarray) -> float:
    """Exact worst-case single-shot second moment of the ensemble estimator.

    max over states sigma of
    sum_U w_U sum_b <b|U sigma U^d|b> Tr[M^{-1}(O) U^d|b><b|U]^2,
    where M is the ensemble's measurement channel.  Raises
    NotInformationallyCompleteError when M is not invertible.
    """
    from .operators import basis_coefficients, from_basis_coefficients, hermitian_basis
    from .povm import IC_CONDITION_LIMIT, NotInformationallyCompleteError

    obs = hermitian(np.asarray(obs, dtype=complex), atol=1e-10)
    if obs.shape != (ensemble.dim, ensemble.dim):
        raise ValueError("observable dimension does not match the ensemble")
    m = ensemble_measurement_channel(ensemble)
    eigs = np.linalg.eigvalsh(m)
    if eigs[0] <= 0 or eigs[-1] / eigs[0] > IC_CONDITION_LIMIT:
        raise NotInformationallyCompleteError(
            "ensemble measurement channel is not invertible"
        )
    basis = hermitian_basis(ensemble.dim)
    inv_obs = from_basis_coefficients(
        np.linalg.solve(m, basis_coefficients(obs, basis)), basis
    )
    acc = np.zeros_like(obs)
    for w, proj in _ensemble_projectors(ensemble):
        val = np.trace(inv_obs @ proj).real ** 2
        acc = acc + w * val * proj
    return lambda_max(acc, atol=1e-9)
