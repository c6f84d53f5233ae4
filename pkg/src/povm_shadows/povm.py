"""POVM representation, frame operators, and classical shadows.

A POVM is stored as a tuple of dense Hermitian effects.  Qubit POVMs with
uniform trace additionally admit the Bloch form E_k = (1/N)(I + r_k . sigma),
which is the configuration space the annealing optimizer works in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import (
    KET_0,
    KET_1,
    KET_L,
    KET_MINUS,
    KET_PLUS,
    KET_R,
    PAULI_I,
    PAULIS,
    basis_coefficients,
    from_basis_coefficients,
    hermitian,
    hermitian_basis,
    projector,
)

IC_CONDITION_LIMIT = 1e12
PSD_TOL = 1e-10
COMPLETENESS_TOL = 1e-10


class NotInformationallyCompleteError(ValueError):
    """The POVM's frame operator is singular or too ill-conditioned to invert."""


class SingularWError(NotInformationallyCompleteError):
    """The Bloch second-moment matrix W is (numerically) singular."""


@dataclass(frozen=True, eq=False)
class Povm:
    """An N-effect POVM on a d-dimensional system."""

    dim: int
    effects: tuple

    def __post_init__(self):
        effs = tuple(hermitian(e) for e in self.effects)
        for e in effs:
            if e.shape != (self.dim, self.dim):
                raise ValueError(f"effect shape {e.shape} does not match dim {self.dim}")
            e.setflags(write=False)
        object.__setattr__(self, "effects", effs)

    @property
    def n_effects(self) -> int:
        return len(self.effects)


def povm_from_effects(effects) -> Povm:
    """Build a Povm from a sequence of square matrices."""
    effects = [np.asarray(e, dtype=complex) for e in effects]
    if not effects:
        raise ValueError("a POVM needs at least one effect")
    return Povm(dim=effects[0].shape[0], effects=tuple(effects))


@dataclass(frozen=True)
class PovmValidity:
    """Report from :func:`validate_povm`."""

    min_eigenvalue: float
    completeness_residual: float
    is_valid: bool


def validate_povm(povm: Povm, psd_tol: float = PSD_TOL,
                  completeness_tol: float = COMPLETENESS_TOL) -> PovmValidity:
    """Check positivity of every effect and completeness sum_k E_k = I."""
    min_eig = min(float(np.linalg.eigvalsh(e)[0]) for e in povm.effects)
    total = sum(povm.effects)
    residual = float(np.max(np.abs(total - np.eye(povm.dim))))
    return PovmValidity(
        min_eigenvalue=min_eig,
        completeness_residual=residual,
        is_valid=(min_eig >= -psd_tol and residual <= completeness_tol),
    )


@dataclass(frozen=True, eq=False)
class FrameOperator:
    """Matrix of rho -> sum_k Tr(rho E_k) E_k in an orthonormal Hermitian basis."""

    dim: int
    matrix: np.ndarray
    basis: np.ndarray = field(repr=False)

    def apply(self, op: np.ndarray) -> np.ndarray:
        coeffs = self.matrix @ basis_coefficients(op, self.basis)
        return from_basis_coefficients(coeffs, self.basis)

    def inverse_apply(self, op: np.ndarray) -> np.ndarray:
        self._require_invertible()
        coeffs = np.linalg.solve(self.matrix, basis_coefficients(op, self.basis))
        return from_basis_coefficients(coeffs, self.basis)

    @property
    def condition_number(self) -> float:
        w = np.linalg.eigvalsh(self.matrix)
        if w[0] <= 0:
            return np.inf
        return float(w[-1] / w[0])

    def _require_invertible(self, limit: float = IC_CONDITION_LIMIT) -> None:
        cond = self.condition_number
        if not np.isfinite(cond) or cond > limit:
            raise NotInformationallyCompleteError(
                f"frame operator condition number {cond:.3e} exceeds {limit:.1e}"
            )


def frame_operator(povm: Povm) -> FrameOperator:
    """Frame operator of a POVM; symmetric PSD, invertible iff the POVM is IC."""
    basis = hermitian_basis(povm.dim)
    a = np.array([basis_coefficients(e, basis) for e in povm.effects])
    m = a.T @ a
    m = (m + m.T) / 2
    return FrameOperator(dim=povm.dim, matrix=m, basis=basis)


@dataclass(frozen=True, eq=False)
class ClassicalShadowSet:
    """Per-outcome least-squares state estimates rho_k = C_E^{-1}(E_k)."""

    shadows: tuple

    def __len__(self) -> int:
        return len(self.shadows)


def classical_shadows(povm: Povm, cond_limit: float = IC_CONDITION_LIMIT) -> ClassicalShadowSet:
    """Classical shadows of an informationally complete POVM."""
    fop = frame_operator(povm)
    fop._require_invertible(cond_limit)
    a = np.array([basis_coefficients(e, fop.basis) for e in povm.effects])
    coeffs = np.linalg.solve(fop.matrix, a.T).T
    shadows = []
    for c in coeffs:
        s = hermitian(from_basis_coefficients(c, fop.basis), atol=1e-9)
        s.setflags(write=False)
        shadows.append(s)
    return ClassicalShadowSet(shadows=tuple(shadows))


def least_squares_estimate(povm: Povm, frequencies: np.ndarray,
                           freq_tol: float = 1e-9) -> np.ndarray:
    """Least-squares state estimate sum_k p_k rho_k from outcome frequencies."""
    p = np.asarray(frequencies, dtype=float)
    if p.shape != (povm.n_effects,):
        raise ValueError(f"expected {povm.n_effects} frequencies, got shape {p.shape}")
    if abs(p.sum() - 1.0) > freq_tol:
        raise ValueError(f"frequencies sum to {p.sum():.12f}, expected 1")
    shadows = classical_shadows(povm)
    est = sum(pk * sk for pk, sk in zip(p, shadows.shadows))
    return hermitian(est, atol=1e-9)


# --- canonical qubit POVMs -------------------------------------------------

TETRAHEDRON_DIRECTIONS = np.array([
    [0.0, 0.0, 1.0],
    [2 * np.sqrt(2) / 3, 0.0, -1.0 / 3],
    [-np.sqrt(2) / 3, np.sqrt(2.0 / 3), -1.0 / 3],
    [-np.sqrt(2) / 3, -np.sqrt(2.0 / 3), -1.0 / 3],
])

OCTAHEDRON_DIRECTIONS = np.array([
    [0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0],
    [1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0],
])

CUBE_DIRECTIONS = np.array([
    [sx, sy, sz] for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)
]) / np.sqrt(3)


def tetrahedral_povm() -> Povm:
    """Symmetric 4-effect qubit POVM E_a = (1/4)(I + s_a . sigma)."""
    return bloch_povm_to_povm(BlochPovm(vectors=TETRAHEDRON_DIRECTIONS))


def pauli6_povm() -> Povm:
    """Six eigenstate effects of sigma_x/y/z, each weighted 1/3 (octahedron)."""
    kets = [KET_0, KET_1, KET_PLUS, KET_MINUS, KET_R, KET_L]
    return povm_from_effects([projector(k) / 3 for k in kets])


def random_povm(n: int, rng: np.random.Generator, max_tries: int = 100) -> Povm:
    """Random N-effect uniform-trace qubit POVM with sum_k r_k = 0.

    Samples N-1 directions uniformly on the sphere, closes the set with
    r_N = -sum(others), rescales into the unit ball, and rejects draws
    whose W matrix is numerically singular.
    """
    bp = random_bloch_povm(n, rng, max_tries=max_tries)
    return bloch_povm_to_povm(bp)


def random_bloch_povm(n: int, rng: np.random.Generator, max_tries: int = 100) -> "BlochPovm":
    if n < 4:
        raise ValueError("an informationally complete qubit POVM needs at least 4 effects")
    if n > 64:
        raise ValueError("POVMs with more than 64 effects per qubit are unsupported")
    for _ in range(max_tries):
        dirs = rng.normal(size=(n - 1, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        last = -dirs.sum(axis=0)
        vectors = np.vstack([dirs, last])
        scale = max(1.0, np.linalg.norm(last))
        vectors = vectors / scale
        w = vectors.T @ vectors / n
        eigs = np.linalg.eigvalsh(w)
        if eigs[0] > 0 and eigs[-1] / eigs[0] <= IC_CONDITION_LIMIT:
            return BlochPovm(vectors=vectors)
    raise RuntimeError(f"failed to draw a nonsingular {n}-effect POVM in {max_tries} tries")


def canonical_povm(kind: str, n: int | None = None, seed: int | None = None) -> Povm:
    """Dispatch by name: 'tetrahedral', 'pauli6', or 'random_n' (needs n, seed)."""
    if kind == "tetrahedral":
        return tetrahedral_povm()
    if kind == "pauli6":
        return pauli6_povm()
    if kind == "random_n":
        if n is None:
            raise ValueError("random_n requires an effect count")
        return random_povm(n, np.random.default_rng(seed))
    raise ValueError(f"unknown POVM kind {kind!r}")


def split_uniform_trace(povm: Povm, epsilon: float, int_tol: float = 1e-9) -> Povm:
    """Split every effect into Tr(E_k)/epsilon identical fragments of trace epsilon.

    Fragments of effect k stay contiguous and in the original order.  Raises
    if any Tr(E_k)/epsilon is not an integer (within `int_tol`).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    fragments = []
    for k, e in enumerate(povm.effects):
        ratio = float(np.trace(e).real) / epsilon
        n_k = round(ratio)
        if n_k < 1 or abs(ratio - n_k) > int_tol * max(1.0, abs(ratio)):
            raise ValueError(
                f"Tr(E_{k})/epsilon = {ratio:.12g} is not a positive integer"
            )
        fragments.extend([e / n_k] * n_k)
    return povm_from_effects(fragments)


# --- Bloch form ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BlochPovm:
    """Uniform-trace qubit POVM as Bloch vectors: E_k = (1/N)(I + r_k . sigma)."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"expected (N, 3) Bloch vectors, got shape {v.shape}")
        norms = np.linalg.norm(v, axis=1)
        if np.any(norms > 1 + 1e-9):
            raise ValueError(f"Bloch vector norm {norms.max():.12f} exceeds 1")
        resultant = np.abs(v.sum(axis=0)).max()
        if resultant > 1e-10:
            raise ValueError(f"Bloch vectors must sum to zero, residual {resultant:.3e}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def n_effects(self) -> int:
        return self.vectors.shape[0]


def bloch_povm_to_povm(bp: BlochPovm) -> Povm:
    n = bp.n_effects
    effects = []
    for r in bp.vectors:
        e = PAULI_I.copy()
        for ri, s in zip(r, PAULIS[1:]):
            e = e + ri * s
        effects.append(e / n)
    return povm_from_effects(effects)


def povm_to_bloch_povm(povm: Povm, atol: float = 1e-10) -> BlochPovm:
    """Inverse of :func:`bloch_povm_to_povm`; requires uniform trace 2/N."""
    if povm.dim != 2:
        raise ValueError("Bloch form is defined for qubit POVMs only")
    n = povm.n_effects
    vectors = []
    for k, e in enumerate(povm.effects):
        tr = float(np.trace(e).real)
        if abs(tr - 2.0 / n) > atol:
            raise ValueError(
                f"effect {k} has trace {tr:.12g}, expected uniform {2.0 / n:.12g}"
            )
        x = np.array([np.trace(e @ s).real for s in PAULIS[1:]])
        vectors.append(x * n / 2)
    return BlochPovm(vectors=np.array(vectors))


def w_matrix(bp: BlochPovm) -> np.ndarray:
    """Second-moment matrix W = (1/N) sum_k r_k r_k^T."""
    v = bp.vectors
    return v.T @ v / bp.n_effects


def w_inverse(bp: BlochPovm, cond_limit: float = IC_CONDITION_LIMIT) -> np.ndarray:
    w = w_matrix(bp)
    eigs = np.linalg.eigvalsh(w)
    if eigs[0] <= 0 or eigs[-1] / eigs[0] > cond_limit:
        raise SingularWError(
            f"W matrix is singular or ill-conditioned (eigenvalues {eigs})"
        )
    return np.linalg.inv(w)


def shadow_bloch_vectors(bp: BlochPovm) -> np.ndarray:
    """Shadows in Bloch form, one row (1, W^{-1} r_k) per effect."""
    winv = w_inverse(bp)
    n = bp.n_effects
    out = np.ones((n, 4))
    out[:, 1:] = bp.vectors @ winv.T
    return out


# --- JSON schemas ----------------------------------------------------------

def povm_to_dict(povm: Povm) -> dict:
    """Dense POVM JSON form: {"dim": d, "effects": [[[re, im], ...], ...]}."""
    return {
        "dim": povm.dim,
        "effects": [
            [[[float(z.real), float(z.imag)] for z in row] for row in e]
            for e in povm.effects
        ],
    }


def bloch_povm_to_dict(bp: BlochPovm) -> dict:
    """Bloch POVM JSON form: {"n": N, "vectors": [[x, y, z], ...]}."""
    return {"n": bp.n_effects, "vectors": [[float(c) for c in r] for r in bp.vectors]}


def povm_from_dict(data: dict) -> Povm:
    """Accepts either the dense or the Bloch JSON form."""
    if "effects" in data:
        effects = [
            np.array([[complex(re, im) for re, im in row] for row in e])
            for e in data["effects"]
        ]
        povm = povm_from_effects(effects)
        if "dim" in data and data["dim"] != povm.dim:
            raise ValueError(f"declared dim {data['dim']} does not match effects")
        return povm
    if "vectors" in data:
        vectors = np.asarray(data["vectors"], dtype=float)
        if "n" in data and data["n"] != vectors.shape[0]:
            raise ValueError(f"declared n {data['n']} does not match vectors")
        return bloch_povm_to_povm(BlochPovm(vectors=vectors))
    raise ValueError("POVM dict needs an 'effects' or 'vectors' field")
