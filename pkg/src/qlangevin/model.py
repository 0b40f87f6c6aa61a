"""Module declaring the repeated-interaction model: system, bath, coupling and state."""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import softmax

from qlangevin import numkit
from qlangevin.errors import ValidationError
from qlangevin.logs import get_logger

logger = get_logger(__name__)

WEIGHT_SUM_TOL = 1e-12
DEGENERACY_TOL = 1e-14


def gibbs_weights(gamma, beta: float) -> np.ndarray:
    """
    Gibbs weights e^{-beta*gamma_i}/Z of a bath spectrum.

    :param gamma: Bath levels gamma_0..gamma_N with gamma_0 strictly minimal.
    :param beta: Inverse temperature, non-negative.
    :return: Weights summing to one.
    :raises ValidationError: On negative beta or a non-minimal gamma_0.
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim != 1 or gamma.size < 2:
        raise ValidationError("gamma needs at least two levels")
    if not np.all(np.isfinite(gamma)):
        raise ValidationError("gamma contains non-finite entries")
    if not np.isfinite(beta) or beta < 0:
        raise ValidationError(f"beta must be finite and non-negative, got {beta}")
    if np.any(gamma[1:] <= gamma[0]):
        raise ValidationError("gamma_0 must be strictly below every other level")
    # softmax subtracts the maximum before exponentiating
    return softmax(-beta * gamma)


def gibbs_state(h: numkit.CMatrix, beta: float) -> numkit.CMatrix:
    """e^{-beta*h}/Z for a Hermitian h."""
    values, vectors = numkit.herm_eig(h)
    weights = softmax(-beta * values)
    return (vectors * weights) @ numkit.dagger(vectors)


@dataclass(frozen=True, eq=False)
class SystemSpec:
    H_S: np.ndarray
    V: tuple

    def __post_init__(self):
        h = numkit.require_square(self.H_S, "H_S")
        defect = numkit.hermiticity_defect(h)
        if defect > numkit.HERMITIAN_TOL:
            raise ValidationError(f"H_S is not Hermitian (defect {defect:.3e})")
        if len(self.V) < 1:
            raise ValidationError("at least one coupling operator is required")
        couplings = []
        for i, v in enumerate(self.V, start=1):
            v = numkit.require_square(v, f"V_{i}")
            if v.shape != h.shape:
                raise ValidationError(f"V_{i} has shape {v.shape}, expected {h.shape}")
            couplings.append(v)
        object.__setattr__(self, "H_S", (h + numkit.dagger(h)) / 2)
        object.__setattr__(self, "V", tuple(couplings))

    @property
    def d(self) -> int:
        return self.H_S.shape[0]


@dataclass(frozen=True, eq=False)
class BathSpec:
    """
    Bath levels and diagonal bath state.

    Weights must be positive, normalized and dominated by beta_0; strict
    dominance is only demanded where beta_0 - beta_i appears in a denominator
    (see thermal_ratios).
    """

    gamma: np.ndarray
    weights: np.ndarray
    beta: float | None = field(default=None)

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if gamma.ndim != 1 or gamma.size < 2:
            raise ValidationError("gamma needs at least two levels (N >= 1)")
        if weights.shape != gamma.shape:
            raise ValidationError(
                f"{weights.size} weights given for {gamma.size} bath levels"
            )
        if not (np.all(np.isfinite(gamma)) and np.all(np.isfinite(weights))):
            raise ValidationError("bath data contains non-finite entries")
        if np.any(gamma[1:] <= gamma[0]):
            raise ValidationError("gamma_0 must be strictly below every other level")
        if np.any(weights <= 0):
            raise ValidationError("bath weights must be strictly positive")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"bath weights sum to {weights.sum():.15f}, not 1")
        if np.any(weights[1:] > weights[0]):
            raise ValidationError("beta_0 must dominate every other bath weight")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_gibbs(cls, gamma, beta: float) -> "BathSpec":
        return cls(gamma=gamma, weights=gibbs_weights(gamma, beta), beta=float(beta))

    @property
    def N(self) -> int:
        return self.gamma.size - 1

    def density(self) -> np.ndarray:
        return np.diag(self.weights).astype(np.complex128)

    def require_nondegenerate(self) -> None:
        gaps = self.weights[0] - self.weights[1:]
        if np.any(gaps <= DEGENERACY_TOL):
            channels = [int(i) + 1 for i in np.flatnonzero(gaps <= DEGENERACY_TOL)]
            raise ValidationError(
                f"beta_0 - beta_i vanishes for channels {channels}; thermal ratios undefined"
            )

    def thermal_ratios(self) -> tuple[np.ndarray, np.ndarray]:
        """
        Per-channel ratios beta_0/(beta_0-beta_i) and beta_i/(beta_0-beta_i).

        The first is built as one plus the second so their difference is one.
        """
        self.require_nondegenerate()
        minus = self.weights[1:] / (self.weights[0] - self.weights[1:])
        return 1.0 + minus, minus


@dataclass(frozen=True, eq=False)
class ModelSpec:
    system: SystemSpec
    bath: BathSpec

    def __post_init__(self):
        if len(self.system.V) != self.bath.N:
            raise ValidationError(
                f"{len(self.system.V)} coupling operators for {self.bath.N} excited bath levels"
            )

    @property
    def d(self) -> int:
        return self.system.d

    @property
    def N(self) -> int:
        return self.bath.N

    def with_hamiltonian(self, h_s) -> "ModelSpec":
        return ModelSpec(SystemSpec(h_s, self.system.V), self.bath)

    def with_couplings(self, couplings) -> "ModelSpec":
        return ModelSpec(SystemSpec(self.system.H_S, tuple(couplings)), self.bath)


def bath_ladder(n_levels: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """
    Bath ladder operators a^0_i = |e_i><e_0| and a^i_0 = |e_0><e_i|, i = 1..N.

    The convention is a^i_j e_k = delta_ik e_j.
    """
    raising, lowering = [], []
    for i in range(1, n_levels):
        up = np.zeros((n_levels, n_levels), dtype=np.complex128)
        up[i, 0] = 1.0
        raising.append(up)
        lowering.append(up.T.copy())
    return raising, lowering


def total_hamiltonian(model: ModelSpec, tau: float) -> np.ndarray:
    """
    Total Hamiltonian H_S(x)I + I(x)H_R + tau^{-1/2} sum_i (V_i(x)a^0_i + V_i*(x)a^i_0).

    :param model: The model.
    :param tau: Interaction time, positive.
    :return: Hermitian matrix of size d(N+1), system (x) bath ordering.
    """
    if not tau > 0:
        raise ValidationError(f"tau must be positive, got {tau}")
    m = model.N + 1
    h = np.kron(model.system.H_S, np.eye(m)) + np.kron(np.eye(model.d), np.diag(model.bath.gamma))
    raising, lowering = bath_ladder(m)
    scale = 1.0 / np.sqrt(tau)
    for v, up, down in zip(model.system.V, raising, lowering, strict=True):
        h = h + scale * (np.kron(v, up) + np.kron(numkit.dagger(v), down))
    return h


def interaction_unitary(model: ModelSpec, tau: float) -> np.ndarray:
    """U = exp(-i tau H) for one interaction of length tau."""
    return numkit.mat_exp(-1j * tau * total_hamiltonian(model, tau))


def ladder_couplings(dim: int) -> list[np.ndarray]:
    """
    Rank-one couplings V_i = |e_0><e_i|, i = 1..dim-1.

    This is the orientation for which the thermal Gibbs state is invariant
    under the limiting generator.
    """
    if dim < 2:
        raise ValidationError(f"ladder couplings need dim >= 2, got {dim}")
    couplings = []
    for i in range(1, dim):
        v = np.zeros((dim, dim), dtype=np.complex128)
        v[0, i] = 1.0
        couplings.append(v)
    return couplings


def ladder_model(h_s_diag, weights, beta: float | None = None) -> ModelSpec:
    """
    System in repeated interaction with copies of itself (H_R = H_S) in a bath
    state diag(weights), coupled through the ladder couplings.
    """
    levels = np.asarray(h_s_diag, dtype=float)
    bath = BathSpec(gamma=levels, weights=weights, beta=beta)
    system = SystemSpec(np.diag(levels).astype(np.complex128), tuple(ladder_couplings(levels.size)))
    return ModelSpec(system, bath)


def thermalization_model(h_s_diag, beta: float) -> ModelSpec:
    """ladder_model with the Gibbs state of H_S at inverse temperature beta."""
    levels = np.asarray(h_s_diag, dtype=float)
    model = ladder_model(levels, gibbs_weights(levels, beta), beta=float(beta))
    logger.debug(f"Thermalization model with levels {levels.tolist()} at beta={beta}")
    return model


def random_model(
    rng: np.random.Generator,
    d: int,
    N: int,
    coupling_scale: float = 1.0,
    hamiltonian_scale: float = 1.0,
    beta: float = 1.0,
) -> ModelSpec:
    """
    Seeded random model: Hermitian H_S, complex couplings with spectral norm at
    most coupling_scale, and a Gibbs bath over sorted random levels above 0.
    """
    h_s = numkit.random_hermitian(d, rng, hamiltonian_scale)
    couplings = []
    for _ in range(N):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        couplings.append(g * (coupling_scale / numkit.spectral_norm(g)))
    gamma = np.concatenate([[0.0], np.sort(rng.uniform(0.5, 2.0, size=N))])
    return ModelSpec(SystemSpec(h_s, tuple(couplings)), BathSpec.from_gibbs(gamma, beta))
