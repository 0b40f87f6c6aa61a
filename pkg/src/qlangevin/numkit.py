"""Dense complex linear-algebra kernels shared by every other module.

Vectorization is column-stacking throughout the package, so the map
rho -> A @ rho @ B has matrix kron(B.T, A).
"""

import numpy as np
import scipy.linalg as la

from qlangevin.errors import DimensionError, ValidationError

HERMITIAN_TOL = 1e-10
NULL_TOL = 1e-10

CMatrix = np.ndarray


def as_cmatrix(a, name: str = "matrix") -> CMatrix:
    """
    Converts input to a finite 2-D complex128 array.

    :param a: Array-like input.
    :param name: Name used in error messages.
    :return: A new complex matrix.
    :raises ValidationError: If the input is not 2-D or holds NaN/Inf.
    """
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2 or 0 in m.shape:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} contains non-finite entries")
    return m


def require_square(a: CMatrix, name: str = "matrix") -> CMatrix:
    m = as_cmatrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m


def dagger(a: CMatrix) -> CMatrix:
    return np.conj(a).T


def max_abs(a) -> float:
    """Max-entry norm."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def hermiticity_defect(a: CMatrix) -> float:
    return max_abs(a - dagger(a))


def mat_exp(a: CMatrix) -> CMatrix:
    """
    Matrix exponential by scaling and squaring with a degree-13 Pade approximant.

    :param a: Square complex matrix.
    :return: e^a.
    :raises DimensionError: If a is not square.
    """
    return la.expm(require_square(a))


def kron(*factors: CMatrix) -> CMatrix:
    """Kronecker product of one or more matrices, left factor outermost."""
    if not factors:
        raise ValidationError("kron needs at least one factor")
    out = as_cmatrix(factors[0])
    for factor in factors[1:]:
        out = np.kron(out, as_cmatrix(factor))
    return out


def partial_trace_right(m: CMatrix, d: int, k: int) -> CMatrix:
    """
    Traces out the right tensor factor of an operator on C^d (x) C^k.

    :param m: Operator of shape (d*k, d*k), ordered system (x) environment.
    :param d: Dimension of the kept factor.
    :param k: Dimension of the traced factor.
    :return: The d x d reduced operator.
    """
    m = require_square(m)
    if m.shape[0] != d * k:
        raise DimensionError(f"operator of size {m.shape[0]} is not {d}x{k}")
    return np.trace(m.reshape(d, k, d, k), axis1=1, axis2=3)


def vec(a: CMatrix) -> np.ndarray:
    return np.asarray(a).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> CMatrix:
    return np.asarray(v).reshape(d, d, order="F")


def sandwich_superop(a: CMatrix, b: CMatrix) -> CMatrix:
    """
    Matrix of rho -> a @ rho @ b acting on column-stacked vectors.

    :return: kron(b.T, a), of size d^2.
    """
    a = require_square(a, "left factor")
    b = require_square(b, "right factor")
    if a.shape != b.shape:
        raise DimensionError(f"sandwich factors differ in shape: {a.shape} vs {b.shape}")
    return np.kron(b.T, a)


def commutator_superop(g: CMatrix) -> CMatrix:
    """Matrix of X -> g X - X g."""
    g = require_square(g)
    eye = np.eye(g.shape[0])
    return sandwich_superop(g, eye) - sandwich_superop(eye, g)


def herm_eig(a: CMatrix, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, CMatrix]:
    """
    Eigendecomposition of a Hermitian matrix.

    :param a: Matrix Hermitian up to tol in max-entry norm; symmetrized first.
    :return: Ascending real eigenvalues and the unitary matrix of eigenvectors.
    :raises ValidationError: If a is further than tol from Hermitian.
    """
    a = require_square(a)
    defect = hermiticity_defect(a)
    if defect > tol:
        raise ValidationError(f"matrix is not Hermitian (defect {defect:.3e} > {tol:.1e})")
    values, vectors = np.linalg.eigh((a + dagger(a)) / 2)
    return values, vectors


def null_space(a: CMatrix, tol: float = NULL_TOL) -> np.ndarray:
    """
    Orthonormal basis of the numerical kernel of a.

    Singular values at or below tol times the largest one count as zero.

    :return: Array whose columns are the basis vectors (possibly zero columns).
    """
    if tol <= 0:
        raise ValidationError("null-space tolerance must be positive")
    a = as_cmatrix(a)
    return la.null_space(a, rcond=tol)


def trace_norm(a: CMatrix) -> float:
    """Sum of singular values."""
    return float(np.linalg.norm(require_square(a), ord="nuc"))


def trace_distance(rho: CMatrix, sigma: CMatrix) -> float:
    """Half the trace norm of the difference."""
    return 0.5 * trace_norm(np.asarray(rho) - np.asarray(sigma))


def spectral_norm(a: CMatrix) -> float:
    a = np.asarray(a)
    return float(np.linalg.norm(a, ord=2)) if a.size else 0.0


def random_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0) -> CMatrix:
    """Hermitian matrix with spectral norm equal to scale (zero if scale is 0)."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (g + dagger(g)) / 2
    norm = spectral_norm(h)
    return h * (scale / norm) if norm > 0 else h


def random_density_matrix(d: int, rng: np.random.Generator) -> CMatrix:
    g = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    rho = g @ dagger(g)
    return rho / np.trace(rho)
