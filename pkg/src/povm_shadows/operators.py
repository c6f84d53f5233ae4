"""Dense Hermitian operator algebra on small Hilbert spaces.

Everything here works on plain complex numpy arrays.  Operators are
symmetrized on construction via :func:`hermitian` so downstream code can
rely on exact Hermiticity; all functions are pure and safe to share
across threads.
"""

from __future__ import annotations

import numpy as np

HERMITICITY_ATOL = 1e-12

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)

KET_0 = np.array([1, 0], dtype=complex)
KET_1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
KET_R = np.array([1, 1j], dtype=complex) / np.sqrt(2)
KET_L = np.array([1, -1j], dtype=complex) / np.sqrt(2)


def hermitian(mat: np.ndarray, atol: float = HERMITICITY_ATOL) -> np.ndarray:
    """Validate and symmetrize a matrix, returning (A + A†)/2.

    Raises ValueError if entries are not finite or the asymmetry exceeds
    `atol` (absolute, entrywise).
    """
    a = np.asarray(mat, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("matrix entries must be finite")
    asym = np.max(np.abs(a - a.conj().T))
    if asym > atol:
        raise ValueError(f"matrix is not Hermitian: asymmetry {asym:.3e} > {atol:.1e}")
    return (a + a.conj().T) / 2


def projector(ket: np.ndarray) -> np.ndarray:
    """Rank-1 projector |psi><psi| for a (not necessarily normalized) ket."""
    v = np.asarray(ket, dtype=complex).reshape(-1)
    # dividing the outer product by |v|^2 keeps entries like 1/2 exact
    return np.outer(v, v.conj()) / np.vdot(v, v).real


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two operators."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def lambda_max(a: np.ndarray, atol: float = HERMITICITY_ATOL) -> float:
    """Largest eigenvalue of a Hermitian operator.

    Uses the symmetric eigensolver; non-Hermitian input is rejected.
    """
    h = hermitian(a, atol=atol)
    return float(np.linalg.eigvalsh(h)[-1])


def spectral_norm(a: np.ndarray) -> float:
    """Operator infinity-norm (largest |eigenvalue|) of a Hermitian operator."""
    h = hermitian(a)
    if h.shape == (2, 2):
        # closed form keeps e.g. projector norms exactly 1
        mean = (h[0, 0].real + h[1, 1].real) / 2
        radius = np.hypot((h[0, 0].real - h[1, 1].real) / 2, abs(h[0, 1]))
        return abs(mean) + radius
    w = np.linalg.eigvalsh(h)
    return float(max(abs(w[0]), abs(w[-1])))


def partial_trace_a(op: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Trace out the first factor of an operator on H_A (x) H_B."""
    m = np.asarray(op, dtype=complex)
    if m.shape != (dim_a * dim_b, dim_a * dim_b):
        raise ValueError(
            f"operator has shape {m.shape}, expected {(dim_a * dim_b, dim_a * dim_b)}"
        )
    return np.einsum("aiaj->ij", m.reshape(dim_a, dim_b, dim_a, dim_b))


def partial_trace_b(op: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Trace out the second factor of an operator on H_A (x) H_B."""
    m = np.asarray(op, dtype=complex)
    if m.shape != (dim_a * dim_b, dim_a * dim_b):
        raise ValueError(
            f"operator has shape {m.shape}, expected {(dim_a * dim_b, dim_a * dim_b)}"
        )
    return np.einsum("iaja->ij", m.reshape(dim_a, dim_b, dim_a, dim_b))


def bloch_vector(op: np.ndarray) -> np.ndarray:
    """Coefficients (x1..x4) with X = (1/2) sum_i x_i sigma_i, x_i = Tr(X sigma_i).

    Only defined for qubit operators.  The identity maps to (2, 0, 0, 0).
    """
    a = np.asarray(op, dtype=complex)
    if a.shape != (2, 2):
        raise ValueError(f"Bloch representation requires a 2x2 operator, got {a.shape}")
    return np.array([np.trace(a @ s).real for s in PAULIS])


def from_bloch_vector(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`bloch_vector`: X = (1/2) sum_i x_i sigma_i."""
    x = np.asarray(coeffs, dtype=float).reshape(-1)
    if x.shape != (4,):
        raise ValueError(f"expected 4 Bloch coefficients, got shape {x.shape}")
    out = np.zeros((2, 2), dtype=complex)
    for xi, s in zip(x, PAULIS):
        out += xi * s
    return out / 2


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal Hermitian basis of C^{dxd}, shape (d^2, d, d).

    Identity-first generalized Gell-Mann family, normalized so that
    Tr(B_i B_j) = delta_ij.  For d=2 this is exactly {sigma_i / sqrt(2)}.
    """
    if d <= 0:
        raise ValueError("dimension must be positive")
    mats = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for k in range(1, d):
        for j in range(k):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1 / np.sqrt(2)
            mats.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j / np.sqrt(2)
            m[k, j] = 1j / np.sqrt(2)
            mats.append(m)
    for ell in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[np.arange(ell), np.arange(ell)] = 1
        m[ell, ell] = -ell
        mats.append(m / np.sqrt(ell * (ell + 1)))
    return np.stack(mats)


def basis_coefficients(op: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Real coefficients of a Hermitian operator in an orthonormal basis."""
    return np.einsum("kij,ji->k", basis, np.asarray(op, dtype=complex)).real


def from_basis_coefficients(coeffs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Reconstruct the operator sum_k c_k B_k."""
    return np.einsum("k,kij->ij", np.asarray(coeffs, dtype=float), basis)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    """Random Hermitian matrix with Gaussian entries."""
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (z + z.conj().T) / 2


def random_density_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    """Random full-rank density matrix (normalized Wishart)."""
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    w = z @ z.conj().T
    return w / np.trace(w).real


def random_projector(rng: np.random.Generator, d: int = 2) -> np.ndarray:
    """Haar-random pure-state projector from a normalized complex Gaussian ket."""
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    return projector(z)
