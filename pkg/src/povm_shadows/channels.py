"""Quantum channels as Kraus sets and their Choi-state representation.

The Choi state eta = (I (x) E)(|w><w|) with |w> = sum_n |n>|n> carries the
whole channel: E(rho) = Tr_A[(rho^T (x) I) eta] and
Tr[E(rho) X] = Tr[eta (rho^T (x) X)].  Dense Choi construction is limited
to systems of at most 4 qubits (eta dimension 256); larger experiments go
through the factorized norm path and never materialize eta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import hermitian, partial_trace_a, partial_trace_b, tensor
from .povm import Povm

MAX_DENSE_CHOI_DIM = 16  # system dimension; eta lives on dim**2

TP_TOL = 1e-10
CHOI_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Completely positive trace-preserving map given by Kraus operators."""

    dim: int
    kraus_ops: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        for k in ops:
            if k.shape != (self.dim, self.dim):
                raise ValueError(f"Kraus operator shape {k.shape} does not match dim")
            k.setflags(write=False)
        total = sum(k.conj().T @ k for k in ops)
        err = np.max(np.abs(total - np.eye(self.dim)))
        if err > TP_TOL:
            raise ValueError(f"channel is not trace preserving: residual {err:.3e}")
        object.__setattr__(self, "kraus_ops", ops)


def apply_channel(channel: KrausChannel, rho: np.ndarray) -> np.ndarray:
    """Direct Kraus application sum_i K_i rho K_i^dagger."""
    rho = np.asarray(rho, dtype=complex)
    return sum(k @ rho @ k.conj().T for k in channel.kraus_ops)


def identity_channel(dim: int = 2) -> KrausChannel:
    return KrausChannel(dim=dim, kraus_ops=(np.eye(dim, dtype=complex),))


def depolarizing_channel(p: float, dim: int = 2) -> KrausChannel:
    """E(rho) = p rho + (1-p) I/d  (p = 1 is the identity channel)."""
    if dim != 2:
        raise ValueError("depolarizing Kraus form implemented for qubits only")
    if not -1 / 3 <= p <= 1:
        raise ValueError("depolarizing parameter must lie in [-1/3, 1]")
    from .operators import PAULI_X, PAULI_Y, PAULI_Z

    w0 = (1 + 3 * p) / 4
    w = (1 - p) / 4
    ops = [np.sqrt(w0) * np.eye(2, dtype=complex)]
    ops += [np.sqrt(w) * s for s in (PAULI_X, PAULI_Y, PAULI_Z)]
    return KrausChannel(dim=2, kraus_ops=tuple(ops))


def amplitude_damping_channel(gamma: float) -> KrausChannel:
    if not 0 <= gamma <= 1:
        raise ValueError("damping rate must lie in [0, 1]")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return KrausChannel(dim=2, kraus_ops=(k0, k1))


def phase_damping_channel(lam: float) -> KrausChannel:
    if not 0 <= lam <= 1:
        raise ValueError("damping rate must lie in [0, 1]")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - lam)]], dtype=complex)
    k1 = np.array([[0, 0], [0, np.sqrt(lam)]], dtype=complex)
    return KrausChannel(dim=2, kraus_ops=(k0, k1))


def unitary_channel(u: np.ndarray) -> KrausChannel:
    u = np.asarray(u, dtype=complex)
    return KrausChannel(dim=u.shape[0], kraus_ops=(u,))


def random_channel(dim: int, n_kraus: int, rng: np.random.Generator) -> KrausChannel:
    """Random CPTP map via a Haar unitary on a dilated space (Stinespring blocks)."""
    from .operators import random_unitary

    big = random_unitary(dim * n_kraus, rng)
    ops = tuple(big[i * dim:(i + 1) * dim, :dim] for i in range(n_kraus))
    return KrausChannel(dim=dim, kraus_ops=ops)


@dataclass(frozen=True, eq=False)
class ChoiState:
    """Choi matrix eta with Tr(eta) = d and Tr_B(eta) = I_A."""

    dim: int
    eta: np.ndarray

    def __post_init__(self):
        eta = hermitian(self.eta, atol=1e-10)
        d = self.dim
        if eta.shape != (d * d, d * d):
            raise ValueError(f"Choi matrix shape {eta.shape} does not match dim {d}")
        min_eig = float(np.linalg.eigvalsh(eta)[0])
        if min_eig < -CHOI_TOL:
            raise ValueError(f"Choi matrix is not PSD: min eigenvalue {min_eig:.3e}")
        tr = float(np.trace(eta).real)
        if abs(tr - d) > CHOI_TOL:
            raise ValueError(f"Tr(eta) = {tr:.12g}, expected {d}")
        marginal = partial_trace_b(eta, d, d)
        if np.max(np.abs(marginal - np.eye(d))) > CHOI_TOL:
            raise ValueError("Tr_B(eta) deviates from the identity")
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)


def max_entangled_ket(dim: int) -> np.ndarray:
    """Unnormalized |w> = sum_n |n>_A |n>_B."""
    w = np.zeros(dim * dim, dtype=complex)
    w[:: dim + 1] = 1
    return w


def choi_state(channel: KrausChannel) -> ChoiState:
    """eta = (I (x) E)(|w><w|), built by applying E to each |n><m| block."""
    d = channel.dim
    if d > MAX_DENSE_CHOI_DIM:
        raise ValueError(
            f"dense Choi construction is limited to dim {MAX_DENSE_CHOI_DIM}"
        )
    eta = np.zeros((d * d, d * d), dtype=complex)
    for n in range(d):
        for m in range(d):
            block = np.zeros((d, d), dtype=complex)
            block[n, m] = 1
            eta[n * d:(n + 1) * d, m * d:(m + 1) * d] = apply_channel(channel, block)
    return ChoiState(dim=d, eta=eta)


def apply_via_choi(eta: ChoiState, rho: np.ndarray) -> np.ndarray:
    """E(rho) = Tr_A[(rho^T (x) I) eta]."""
    d = eta.dim
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (d, d):
        raise ValueError(f"state shape {rho.shape} does not match channel dim {d}")
    lifted = tensor(rho.T, np.eye(d)) @ eta.eta
    return hermitian(partial_trace_a(lifted, d, d), atol=1e-9)


def choi_expectation(eta: ChoiState, rho: np.ndarray, x: np.ndarray) -> float:
    """Tr[E(rho) X] evaluated as Tr[eta (rho^T (x) X)]."""
    d = eta.dim
    rho = np.asarray(rho, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if rho.shape != (d, d) or x.shape != (d, d):
        raise ValueError("state/observable dimensions do not match the channel")
    return float(np.trace(eta.eta @ tensor(rho.T, x)).real)


def outcome_distribution(eta: ChoiState, povm_a: Povm, povm_b: Povm) -> np.ndarray:
    """Pr(k) = Tr[(eta/d) (E_a (x) E_b)] over the product POVM, A-major order.

    Outcome (k_a, k_b) maps to flat index k_a * N_b + k_b.
    """
    d = eta.dim
    if povm_a.dim * povm_b.dim != d * d:
        raise ValueError("product POVM dimensions do not match the Choi state")
    rho = eta.eta / d
    probs = np.array([
        np.trace(rho @ tensor(ea, eb)).real
        for ea in povm_a.effects
        for eb in povm_b.effects
    ])
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"outcome probabilities sum to {total:.12f}")
    return probs / total


CHANNEL_KINDS = (
    "identity", "depolarizing", "amplitude_damping", "phase_damping",
    "unitary", "kraus",
)


def channel_from_dict(data: dict) -> KrausChannel:
    """Channel JSON form: {"kind": ..., params...}."""
    kind = data.get("kind")
    if kind == "identity":
        return identity_channel(int(data.get("dim", 2)))
    if kind == "depolarizing":
        return depolarizing_channel(float(data["p"]))
    if kind == "amplitude_damping":
        return amplitude_damping_channel(float(data["gamma"]))
    if kind == "phase_damping":
        return phase_damping_channel(float(data["lambda"]))
    if kind == "unitary":
        u = np.array([[complex(re, im) for re, im in row] for row in data["matrix"]])
        return unitary_channel(u)
    if kind == "kraus":
        ops = [
            np.array([[complex(re, im) for re, im in row] for row in op])
            for op in data["operators"]
        ]
        return KrausChannel(dim=ops[0].shape[0], kraus_ops=tuple(ops))
    raise ValueError(f"unknown channel kind {kind!r}; expected one of {CHANNEL_KINDS}")
