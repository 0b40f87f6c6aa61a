"""GNS representation of the interaction unitary and its continuous-time limits.

Basis elements X^i_j act on the GNS space M_{N+1} by left multiplication, with
scalar product <A, B> = tr(rho_beta A* B). The coefficient U^{i,j}_{k,l} is the
system operator tr_H(rho_beta (X^k_l)* U X^i_j); tables store it at
blocks[flat(i, j), flat(k, l)].
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from qlangevin import numkit
from qlangevin.errors import ValidationError
from qlangevin.logs import get_logger
from qlangevin.model import ModelSpec, interaction_unitary

logger = get_logger(__name__)

WEIGHT_SUM_TOL = 1e-12
GRAM_SCHMIDT_TOL = 1e-12
RESIDUAL_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class GnsBasis:
    N: int
    weights: np.ndarray
    X: dict

    @property
    def size(self) -> int:
        return (self.N + 1) ** 2

    def flat(self, i: int, j: int) -> int:
        return i * (self.N + 1) + j

    def indices(self) -> list[tuple[int, int]]:
        return list(itertools.product(range(self.N + 1), repeat=2))

    def stack(self) -> np.ndarray:
        """All basis matrices, shape ((N+1)^2, N+1, N+1), in flat index order."""
        return np.array([self.X[ij] for ij in self.indices()])

    def inner(self, a: np.ndarray, b: np.ndarray) -> complex:
        return complex(np.trace(np.diag(self.weights) @ numkit.dagger(a) @ b))

    def gram(self) -> np.ndarray:
        xs = self.stack()
        rho = np.diag(self.weights)
        return np.einsum("pa,kba,lbp->kl", rho, xs.conj(), xs)


def _weighted_gram_schmidt(weights: np.ndarray) -> list[np.ndarray]:
    """Orthonormal real vectors under sum_p w_p x_p y_p, starting from the constant one."""
    m = weights.size
    basis = [np.ones(m)]
    for p in range(m):
        if len(basis) == m:
            break
        v = np.zeros(m)
        v[p] = 1.0
        for b in basis:
            v = v - np.sum(weights * b * v) * b
        norm = np.sqrt(np.sum(weights * v * v))
        if norm < GRAM_SCHMIDT_TOL:
            continue
        v = v / norm
        lead = v[np.flatnonzero(np.abs(v) > GRAM_SCHMIDT_TOL)[0]]
        basis.append(v if lead > 0 else -v)
    return basis


def build_gns_basis(weights) -> GnsBasis:
    """
    Orthonormal basis X^i_j of the GNS space of the state diag(weights).

    Off-diagonal elements are a^i_j / sqrt(beta_i) with a^i_j = |e_j><e_i|.
    Diagonal elements X^i_i, i >= 1, come from weighted Gram-Schmidt of
    e_0, e_1, ... against the identity, each with a positive leading entry.

    :param weights: Strictly positive weights beta_0..beta_N summing to one.
    :return: The basis.
    :raises ValidationError: If the weights are not a faithful state.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.size < 2:
        raise ValidationError("GNS basis needs at least two weights")
    if np.any(weights <= 0):
        raise ValidationError("GNS weights must be strictly positive")
    if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise ValidationError(f"GNS weights sum to {weights.sum():.15f}, not 1")

    m = weights.size
    X = {}
    for i, j in itertools.product(range(m), repeat=2):
        if i != j:
            x = np.zeros((m, m), dtype=np.complex128)
            x[j, i] = 1.0 / np.sqrt(weights[i])
            X[(i, j)] = x
    for i, diagonal in enumerate(_weighted_gram_schmidt(weights)):
        X[(i, i)] = np.diag(diagonal).astype(np.complex128)
    X[(0, 0)] = np.eye(m, dtype=np.complex128)
    return GnsBasis(N=m - 1, weights=weights, X=X)


@dataclass(frozen=True, eq=False)
class CoeffTable:
    """Coefficients U^{i,j}_{k,l}; blocks has shape (M, M, d, d), M = (N+1)^2."""

    N: int
    blocks: np.ndarray
    tau: float | None = None

    def _flat(self, i: int, j: int) -> int:
        if not (0 <= i <= self.N and 0 <= j <= self.N):
            raise ValidationError(f"index ({i}, {j}) out of range for N={self.N}")
        return i * (self.N + 1) + j

    def __getitem__(self, key: tuple[int, int, int, int]) -> np.ndarray:
        i, j, k, q = key
        return self.blocks[self._flat(i, j), self._flat(k, q)]

    def compose(self, other: "CoeffTable") -> "CoeffTable":
        """Table of pi(A B) from the tables of pi(A) (self) and pi(B) (other)."""
        blocks = np.einsum("nkab,inbc->ikac", self.blocks, other.blocks)
        return CoeffTable(N=self.N, blocks=blocks)


def gns_coefficients(u: np.ndarray, basis: GnsBasis, tau: float | None = None) -> CoeffTable:
    """
    Every coefficient tr_H(rho_beta (X^k_l)* U X^i_j) of a block operator.

    :param u: Operator on H_S (x) C^{N+1}, system (x) bath ordering.
    :param basis: GNS basis of the bath state.
    :return: The complete CoeffTable.
    """
    u = numkit.require_square(u, "U")
    m = basis.N + 1
    if u.shape[0] % m:
        raise ValidationError(f"operator of size {u.shape[0]} is not a multiple of {m}")
    d = u.shape[0] // m
    u4 = u.reshape(d, m, d, m)
    xs = basis.stack()
    left = np.einsum("ab,kcb->kac", np.diag(basis.weights), xs.conj())
    blocks = np.einsum("kab,sbtc,ica->ikst", left, u4, xs)
    return CoeffTable(N=basis.N, blocks=blocks, tau=tau)


def gns_coefficient(
    u: np.ndarray, basis: GnsBasis, i: int, j: int, k: int, q: int
) -> np.ndarray:
    """Single coefficient U^{i,j}_{k,l} of a block operator."""
    for index in (i, j, k, q):
        if not 0 <= index <= basis.N:
            raise ValidationError(f"index {index} out of range for N={basis.N}")
    u = numkit.require_square(u, "U")
    m = basis.N + 1
    d = u.shape[0] // m
    left = np.diag(basis.weights) @ numkit.dagger(basis.X[(k, q)])
    return np.einsum("ab,sbtc,ca->st", left, u.reshape(d, m, d, m), basis.X[(i, j)])


def epsilon_table(N: int) -> np.ndarray:
    """Scaling exponents indexed [flat(i, j), flat(k, l)]."""
    size = (N + 1) ** 2
    eps = np.zeros((size, size))
    eps[0, 1:] = 0.5
    eps[1:, 0] = 0.5
    eps[0, 0] = 1.0
    return eps


@dataclass(frozen=True, eq=False)
class LimitTable:
    N: int
    blocks: np.ndarray
    epsilon: np.ndarray

    def _flat(self, i: int, j: int) -> int:
        return i * (self.N + 1) + j

    def __getitem__(self, key: tuple[int, int, int, int]) -> np.ndarray:
        i, j, k, q = key
        return self.blocks[self._flat(i, j), self._flat(k, q)]

    def eps(self, key: tuple[int, int, int, int]) -> float:
        i, j, k, q = key
        return float(self.epsilon[self._flat(i, j), self._flat(k, q)])


def theoretical_limits(model: ModelSpec) -> LimitTable:
    """
    Closed-form limits L^{i,j}_{k,l} of (U^{i,j}_{k,l} - delta I)/tau^epsilon.

    Only the dt entry and the entries pairing (0,0) with (i,0) or (0,i) survive.
    """
    d, N = model.d, model.N
    m = N + 1
    beta = model.bath.weights
    gamma = model.bath.gamma
    eye = np.eye(d)
    blocks = np.zeros(((m * m), (m * m), d, d), dtype=np.complex128)

    dt = -1j * model.system.H_S - 1j * np.dot(beta, gamma) * eye
    for i, v in enumerate(model.system.V, start=1):
        v_dag = numkit.dagger(v)
        dt = dt - 0.5 * (beta[0] * v_dag @ v + beta[i] * v @ v_dag)
        blocks[i * m, 0] = -1j * np.sqrt(beta[i]) * v
        blocks[i, 0] = -1j * np.sqrt(beta[0]) * v_dag
        blocks[0, i * m] = -1j * np.sqrt(beta[i]) * v_dag
        blocks[0, i] = -1j * np.sqrt(beta[0]) * v
    blocks[0, 0] = dt
    return LimitTable(N=N, blocks=blocks, epsilon=epsilon_table(N))


@dataclass(frozen=True, eq=False)
class LimitEstimate:
    index: tuple[int, int, int, int]
    epsilon: float
    estimate: np.ndarray
    extrapolated: np.ndarray
    theoretical: np.ndarray
    residuals: np.ndarray
    extrapolated_residual: float
    fitted_order: float

    @property
    def residual(self) -> float:
        return float(self.residuals[-1])


@dataclass(frozen=True, eq=False)
class EmpiricalLimits:
    taus: np.ndarray
    entries: list = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(entry.residual for entry in self.entries)

    def __getitem__(self, key: tuple[int, int, int, int]) -> LimitEstimate:
        for entry in self.entries:
            if entry.index == key:
                return entry
        raise KeyError(key)


def fit_order(taus: np.ndarray, residuals: np.ndarray) -> float:
    """Least-squares slope of log residual against log tau; NaN without two usable points."""
    usable = residuals > RESIDUAL_FLOOR
    if np.count_nonzero(usable) < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(taus[usable]), np.log(residuals[usable]), 1)
    return float(slope)


def _richardson(big: np.ndarray, small: np.ndarray, ratio: float, order: float) -> np.ndarray:
    factor = ratio**order
    return (factor * small - big) / (factor - 1.0)


def empirical_limits(model: ModelSpec, taus) -> EmpiricalLimits:
    """
    Rescaled GNS coefficients along a descending tau ladder, compared with the
    closed-form limits.

    :param model: The model.
    :param taus: At least four strictly descending values in (0, 0.5].
    :return: One LimitEstimate per (i, j, k, l).
    """
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1 or taus.size < 4:
        raise ValidationError("empirical limits need at least four tau values")
    if np.any(taus <= 0) or np.any(taus > 0.5):
        raise ValidationError("tau values must lie in (0, 0.5]")
    if np.any(np.diff(taus) >= 0):
        raise ValidationError("tau values must be strictly descending")

    basis = build_gns_basis(model.bath.weights)
    theory = theoretical_limits(model)
    size = basis.size
    identity = np.zeros_like(theory.blocks)
    for n in range(size):
        identity[n, n] = np.eye(model.d)

    rescaled = []
    for tau in taus:
        table = gns_coefficients(interaction_unitary(model, tau), basis, tau)
        scale = tau ** theory.epsilon[:, :, None, None]
        rescaled.append((table.blocks - identity) / scale)
        logger.debug(f"Extracted {size * size} GNS coefficients at tau={tau:.3e}")
    rescaled = np.array(rescaled)
    residuals = np.max(np.abs(rescaled - theory.blocks[None]), axis=(3, 4))

    entries = []
    ratio = taus[-2] / taus[-1]
    for (i, j), (k, q) in itertools.product(basis.indices(), repeat=2):
        a, b = basis.flat(i, j), basis.flat(k, q)
        order = fit_order(taus, residuals[:, a, b])
        richardson_order = max(0.5, round(2 * order) / 2) if np.isfinite(order) else 1.0
        extrapolated = _richardson(rescaled[-2, a, b], rescaled[-1, a, b], ratio, richardson_order)
        entries.append(
            LimitEstimate(
                index=(i, j, k, q),
                epsilon=float(theory.epsilon[a, b]),
                estimate=rescaled[-1, a, b],
                extrapolated=extrapolated,
                theoretical=theory.blocks[a, b],
                residuals=residuals[:, a, b],
                extrapolated_residual=numkit.max_abs(extrapolated - theory.blocks[a, b]),
                fitted_order=order,
            )
        )

    result = EmpiricalLimits(taus=taus, entries=entries)
    logger.info(
        f"Coefficient limits over {taus.size} tau values: "
        f"max residual {result.max_residual:.3e} at tau={taus[-1]:.3e}"
    )
    return result
