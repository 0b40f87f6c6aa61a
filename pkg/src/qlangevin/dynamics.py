"""Reduced dynamics: one-step channel, Lindblad generators, semigroups and thermalization."""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg as la

from qlangevin import numkit
from qlangevin.errors import NumericalQualityError, ValidationError
from qlangevin.logs import get_logger
from qlangevin.model import ModelSpec, interaction_unitary

logger = get_logger(__name__)

DENSITY_TOL = 1e-10
NULL_TOL = 1e-10
ZERO_EIGENVALUE_TOL = 1e-9
RATIO_TOL = 1e-12
FIT_WINDOW = (1e-8, 1e-2)
ERROR_FLOOR = 1e-15

Picture = Literal["schrodinger", "heisenberg"]
Kind = Literal["generator", "channel"]


def validate_density_matrix(rho, tol: float = DENSITY_TOL) -> np.ndarray:
    """
    Checks that rho is a density matrix and returns its Hermitian part.

    :raises ValidationError: If rho is not Hermitian, unit-trace and positive to tol.
    """
    rho = numkit.require_square(rho, "density matrix")
    defect = numkit.hermiticity_defect(rho)
    if defect > tol:
        raise ValidationError(f"density matrix is not Hermitian (defect {defect:.3e})")
    rho = (rho + numkit.dagger(rho)) / 2
    trace = np.trace(rho).real
    if abs(trace - 1.0) > tol:
        raise ValidationError(f"density matrix has trace {trace:.15f}")
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    if min_eig < -tol:
        raise ValidationError(f"density matrix has negative eigenvalue {min_eig:.3e}")
    return rho


def _swap_permutation(d: int) -> np.ndarray:
    """Index permutation p with vec(A.T) = vec(A)[p]."""
    grid = np.arange(d * d).reshape((d, d), order="F")
    return grid.T.reshape(-1, order="F")


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Linear map on d x d matrices, as a d^2 matrix on column-stacked vectors."""

    matrix: np.ndarray
    kind: Kind = "generator"
    picture: Picture = "schrodinger"

    def __post_init__(self):
        m = numkit.require_square(self.matrix, "superoperator")
        d = int(round(np.sqrt(m.shape[0])))
        if d * d != m.shape[0]:
            raise ValidationError(f"superoperator size {m.shape[0]} is not a square number")
        object.__setattr__(self, "matrix", m)

    @property
    def d(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, x: np.ndarray) -> np.ndarray:
        return numkit.unvec(self.matrix @ numkit.vec(x), self.d)

    def dual(self) -> "Superoperator":
        """Map M_* with tr(M(X) rho) = tr(X M_*(rho)); swaps the picture."""
        perm = _swap_permutation(self.d)
        dual_matrix = self.matrix.T[np.ix_(perm, perm)]
        picture = "heisenberg" if self.picture == "schrodinger" else "schrodinger"
        return Superoperator(dual_matrix, kind=self.kind, picture=picture)

    def trace_defect(self) -> float:
        """
        Distance from the defining constraint: trace preservation (channel) or
        trace annihilation (generator) in the Schrodinger picture, unitality or
        L(I) = 0 in the Heisenberg picture.
        """
        vec_identity = numkit.vec(np.eye(self.d))
        if self.picture == "schrodinger":
            image = vec_identity @ self.matrix
        else:
            image = self.matrix @ vec_identity
        if self.kind == "channel":
            image = image - vec_identity
        return numkit.max_abs(image)

    def __sub__(self, other: "Superoperator") -> np.ndarray:
        return self.matrix - other.matrix


def lindblad_superop(h: np.ndarray, jumps: list, picture: Picture = "schrodinger") -> Superoperator:
    """
    GKSL generator with Hamiltonian h and weighted jump operators.

    Schrodinger: -i[h, rho] + sum r (L rho L* - 1/2 {L*L, rho}).
    Heisenberg:  i[h, X]    + sum r (L* X L - 1/2 {L*L, X}).

    :param jumps: Pairs (rate, L).
    """
    h = numkit.require_square(h, "H")
    eye = np.eye(h.shape[0])
    sign = -1.0 if picture == "schrodinger" else 1.0
    matrix = sign * 1j * numkit.commutator_superop(h)
    for rate, jump in jumps:
        jump = numkit.require_square(jump, "jump operator")
        jump_dag = numkit.dagger(jump)
        decay = jump_dag @ jump
        if picture == "schrodinger":
            feed = numkit.sandwich_superop(jump, jump_dag)
        else:
            feed = numkit.sandwich_superop(jump_dag, jump)
        anticommutator = numkit.sandwich_superop(decay, eye) + numkit.sandwich_superop(eye, decay)
        matrix = matrix + rate * (feed - 0.5 * anticommutator)
    return Superoperator(matrix, kind="generator", picture=picture)


def kraus_operators(model: ModelSpec, tau: float) -> list[np.ndarray]:
    """K_{p,q} = sqrt(beta_q) <e_p|U|e_q>, for every bath pair (p, q)."""
    m = model.N + 1
    u4 = interaction_unitary(model, tau).reshape(model.d, m, model.d, m)
    weights = model.bath.weights
    return [np.sqrt(weights[q]) * u4[:, p, :, q] for p in range(m) for q in range(m)]


def interaction_map(model: ModelSpec, tau: float) -> Superoperator:
    """
    One-step reduced dynamics rho -> tr_bath(U (rho (x) rho_bath) U*), as a Kraus sum.
    """
    matrix = sum(
        numkit.sandwich_superop(k, numkit.dagger(k)) for k in kraus_operators(model, tau)
    )
    return Superoperator(matrix, kind="channel", picture="schrodinger")


def iterate_map(channel: Superoperator, rho0: np.ndarray, k: int) -> np.ndarray:
    """k-fold application of a channel to a state."""
    if k < 0:
        raise ValidationError(f"iteration count must be non-negative, got {k}")
    power = np.linalg.matrix_power(channel.matrix, k)
    return numkit.unvec(power @ numkit.vec(rho0), channel.d)


def discrete_generator(model: ModelSpec, tau: float) -> Superoperator:
    """(Phi_tau - Id)/tau, the finite-tau generator of the repeated interactions."""
    channel = interaction_map(model, tau)
    matrix = (channel.matrix - np.eye(channel.matrix.shape[0])) / tau
    return Superoperator(matrix, kind="generator", picture="schrodinger")


def _coupling_jumps(model: ModelSpec) -> list:
    weights = model.bath.weights
    jumps = []
    for i, v in enumerate(model.system.V, start=1):
        jumps.append((weights[0], v))
        jumps.append((weights[i], numkit.dagger(v)))
    return jumps


def lindblad_heisenberg(model: ModelSpec) -> Superoperator:
    """Limit generator on observables of the repeated-interaction model."""
    return lindblad_superop(model.system.H_S, _coupling_jumps(model), picture="heisenberg")


def lindblad_schrodinger(model: ModelSpec) -> Superoperator:
    """Limit generator on states; the trace-pairing dual of lindblad_heisenberg."""
    return lindblad_superop(model.system.H_S, _coupling_jumps(model), picture="schrodinger")


def lindblad_thermal(h: np.ndarray, w: list, ratios_plus, ratios_minus) -> Superoperator:
    """
    Heisenberg generator of the thermal Langevin equation.

    L(X) = i[H,X] - 1/2 sum r+_i (W*W X + X W*W - 2 W*XW)
                  - 1/2 sum r-_i (WW* X + X WW* - 2 W X W*).

    :raises ValidationError: If r+_i - r-_i differs from one.
    """
    ratios_plus = np.asarray(ratios_plus, dtype=float)
    ratios_minus = np.asarray(ratios_minus, dtype=float)
    if not (len(w) == ratios_plus.size == ratios_minus.size):
        raise ValidationError("one ratio pair is needed per coupling operator")
    mismatch = np.abs(ratios_plus - ratios_minus - 1.0)
    if np.any(mismatch > RATIO_TOL):
        raise ValidationError(
            f"thermal ratios do not differ by one (max defect {mismatch.max():.3e})"
        )
    jumps = []
    for wi, plus, minus in zip(w, ratios_plus, ratios_minus, strict=True):
        jumps.append((plus, wi))
        jumps.append((minus, numkit.dagger(wi)))
    return lindblad_superop(h, jumps, picture="heisenberg")


def thermal_couplings(model: ModelSpec) -> list[np.ndarray]:
    """W_i = -i sqrt(beta_0 - beta_i) V_i."""
    weights = model.bath.weights
    model.bath.require_nondegenerate()
    return [
        -1j * np.sqrt(weights[0] - weights[i]) * v
        for i, v in enumerate(model.system.V, start=1)
    ]


def _require_generator(generator: Superoperator, picture: Picture) -> None:
    if generator.kind != "generator" or generator.picture != picture:
        raise ValidationError(
            f"expected a {picture} generator, got a {generator.picture} {generator.kind}"
        )


def evolve(generator: Superoperator, rho0, t: float) -> np.ndarray:
    """
    State e^{tL}(rho0) of the semigroup, by matrix exponential.

    :raises NumericalQualityError: If the result is not a density matrix.
    """
    _require_generator(generator, "schrodinger")
    if t < 0:
        raise ValidationError(f"evolution time must be non-negative, got {t}")
    rho0 = validate_density_matrix(rho0)
    rho = numkit.unvec(numkit.mat_exp(t * generator.matrix) @ numkit.vec(rho0), generator.d)
    rho = (rho + numkit.dagger(rho)) / 2
    try:
        return validate_density_matrix(rho)
    except ValidationError as e:
        diagnostics = {
            "t": t,
            "trace": float(np.trace(rho).real),
            "min_eigenvalue": float(np.linalg.eigvalsh(rho)[0]),
        }
        raise NumericalQualityError(f"evolved state is invalid: {e}", diagnostics) from e


def evolve_observable(generator: Superoperator, x: np.ndarray, t: float) -> np.ndarray:
    """P_t(X) = e^{tL}(X) for a Heisenberg generator."""
    _require_generator(generator, "heisenberg")
    if t < 0:
        raise ValidationError(f"evolution time must be non-negative, got {t}")
    x = numkit.require_square(x, "observable")
    return numkit.unvec(numkit.mat_exp(t * generator.matrix) @ numkit.vec(x), generator.d)


def _independent_subset(candidates: list[np.ndarray], limit: int) -> list[np.ndarray]:
    chosen, vectors = [], []
    for candidate in candidates:
        trial = np.array(vectors + [numkit.vec(candidate)])
        if np.linalg.matrix_rank(trial, tol=1e-8) == len(trial):
            chosen.append(candidate)
            vectors.append(numkit.vec(candidate))
        if len(chosen) == limit:
            break
    return chosen


def stationary_states(generator: Superoperator, tol: float = NULL_TOL) -> list[np.ndarray]:
    """
    Linearly independent invariant density matrices spanning the kernel of L.

    Positive and negative parts of a Hermitian kernel basis are themselves
    invariant, so normalizing them yields states.

    :raises NumericalQualityError: If the kernel is empty.
    """
    _require_generator(generator, "schrodinger")
    d = generator.d
    kernel = numkit.null_space(generator.matrix, tol)
    dimension = kernel.shape[1]
    if dimension == 0:
        raise NumericalQualityError(
            "generator has no kernel",
            {"smallest_singular_value": float(la.svdvals(generator.matrix)[-1])},
        )

    hermitian = []
    for column in kernel.T:
        r = numkit.unvec(column, d)
        trace = np.trace(r)
        if abs(trace) > tol:
            r = r * np.conj(trace) / abs(trace)
        hermitian.append((r + numkit.dagger(r)) / 2)
        hermitian.append((r - numkit.dagger(r)) / 2j)

    candidates = []
    for h in sorted(hermitian, key=lambda a: -np.linalg.norm(a)):
        if np.linalg.norm(h) < 1e-6:
            continue
        values, vectors = np.linalg.eigh(h)
        for part in (np.clip(values, 0, None), np.clip(-values, 0, None)):
            if part.sum() > 1e-6:
                state = (vectors * part) @ numkit.dagger(vectors)
                candidates.append(state / np.trace(state).real)

    states = [validate_density_matrix(s) for s in _independent_subset(candidates, dimension)]
    if dimension > 1:
        logger.warning(f"Generator kernel has dimension {dimension}: stationary state not unique")
    if len(states) < dimension:
        logger.warning(
            f"Only {len(states)} independent states recovered from a {dimension}-dim kernel"
        )
    return states


def generator_spectrum(generator: Superoperator) -> np.ndarray:
    """Eigenvalues of the generator, sorted by decreasing real part."""
    eigenvalues = la.eigvals(generator.matrix)
    order = np.lexsort((eigenvalues.imag, -eigenvalues.real))
    return eigenvalues[order]


def spectral_gap(generator: Superoperator) -> float:
    """
    Smallest -Re(mu) over nonzero eigenvalues mu; zero means |mu| <= 1e-9 ||L||.
    """
    eigenvalues = la.eigvals(generator.matrix)
    threshold = ZERO_EIGENVALUE_TOL * numkit.spectral_norm(generator.matrix)
    nonzero = eigenvalues[np.abs(eigenvalues) > threshold]
    if nonzero.size == 0:
        return 0.0
    return max(0.0, float(np.min(-nonzero.real)))


def commutant_dim(generators: list, tol: float = NULL_TOL) -> int:
    """Dimension of {X : GX = XG for every G in generators}."""
    if not generators:
        raise ValidationError("commutant needs at least one operator")
    stacked = np.vstack([numkit.commutator_superop(g) for g in generators])
    return numkit.null_space(stacked, tol).shape[1]


def commutant_dims(h: np.ndarray, jumps: list) -> tuple[int, int]:
    """Commutant dimensions of {H, L_i, L_i*} and of {L_i, L_i*}."""
    family = list(jumps) + [numkit.dagger(j) for j in jumps]
    return commutant_dim([h, *family]), commutant_dim(family)


def frigerio_verri_check(h: np.ndarray, jumps: list) -> bool:
    """
    True when adding H to {L_i, L_i*} leaves the commutant unchanged, which
    certifies return to equilibrium.
    """
    h = numkit.require_square(h, "H")
    if numkit.hermiticity_defect(h) > numkit.HERMITIAN_TOL:
        raise ValidationError("H must be Hermitian")
    with_h, without_h = commutant_dims(h, jumps)
    logger.debug(f"Commutant dimensions: with H {with_h}, without H {without_h}")
    return with_h == without_h


def fit_log_slope(x: np.ndarray, y: np.ndarray, floor: float = ERROR_FLOOR) -> float:
    """Least-squares slope of log y against log x over points with y above floor."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    usable = y > floor
    if np.count_nonzero(usable) < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(x[usable]), np.log(y[usable]), 1)
    return float(slope)


@dataclass(frozen=True)
class ConvergenceRow:
    tau: float
    n_steps: int
    trace_distance: float


@dataclass(frozen=True)
class ConvergenceStudy:
    t: float
    rows: list = field(default_factory=list)
    slope: float = float("nan")


def convergence_study(model: ModelSpec, rho0, t: float, taus) -> ConvergenceStudy:
    """
    Trace distance between floor(t/tau) repeated interactions and the limit
    semigroup at time t, for each tau, with the fitted log-log slope.
    """
    taus = np.asarray(taus, dtype=float)
    if t <= 0:
        raise ValidationError(f"t must be positive, got {t}")
    if taus.ndim != 1 or taus.size < 2:
        raise ValidationError("convergence study needs at least two tau values")
    if np.any(taus <= 0) or np.any(taus > t):
        raise ValidationError("every tau must lie in (0, t]")
    if np.any(np.diff(taus) >= 0):
        raise ValidationError("tau values must be strictly descending")

    rho0 = validate_density_matrix(rho0)
    limit_state = evolve(lindblad_schrodinger(model), rho0, t)
    rows = []
    for tau in taus:
        n_steps = int(np.floor(t / tau + 1e-9))
        rho = iterate_map(interaction_map(model, tau), rho0, n_steps)
        distance = numkit.trace_distance(rho, limit_state)
        rows.append(ConvergenceRow(tau=float(tau), n_steps=n_steps, trace_distance=distance))
        logger.debug(f"tau={tau:.3e}: {n_steps} steps, trace distance {distance:.3e}")

    slope = fit_log_slope(taus, np.array([row.trace_distance for row in rows]))
    logger.info(f"Convergence study at t={t}: fitted slope {slope:.3f}")
    return ConvergenceStudy(t=t, rows=rows, slope=slope)


@dataclass(frozen=True)
class EquilibriumRow:
    t: float
    trace_distance: float


@dataclass(frozen=True, eq=False)
class EquilibriumRun:
    stationary: np.ndarray
    rows: list
    rate: float


def return_to_equilibrium(model: ModelSpec, rho0, t_grid) -> EquilibriumRun:
    """
    Distance of e^{tL}(rho0) to the unique invariant state along t_grid, and
    the exponential rate fitted where the distance lies in [1e-8, 1e-2].

    :raises ValidationError: If the invariant state is not unique.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(t_grid < 0) or np.any(np.diff(t_grid) <= 0):
        raise ValidationError("t grid must be non-negative and strictly ascending")
    generator = lindblad_schrodinger(model)
    states = stationary_states(generator)
    if len(states) != 1:
        dimension = numkit.null_space(generator.matrix, NULL_TOL).shape[1]
        raise ValidationError(
            f"return to equilibrium needs a unique invariant state; kernel dimension {dimension}"
        )
    target = states[0]
    rho0 = validate_density_matrix(rho0)

    rows = []
    for t in t_grid:
        distance = numkit.trace_distance(evolve(generator, rho0, t), target)
        rows.append(EquilibriumRow(t=float(t), trace_distance=distance))
    distances = np.array([row.trace_distance for row in rows])
    low, high = FIT_WINDOW
    window = (distances >= low) & (distances <= high)
    if np.count_nonzero(window) < 2:
        logger.warning("Fewer than two distances in the fit window; rate left undefined")
        rate = float("nan")
    else:
        slope, _ = np.polyfit(t_grid[window], np.log(distances[window]), 1)
        rate = float(-slope)
    logger.info(f"Return to equilibrium over t in [{t_grid[0]}, {t_grid[-1]}]: rate {rate:.4f}")
    return EquilibriumRun(stationary=target, rows=rows, rate=rate)
