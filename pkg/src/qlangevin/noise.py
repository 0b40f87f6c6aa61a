"""
Module for the quantum Ito algebra of the Fock and thermal noises.

Symbols
    dt            the time differential
    fock(i, j)    da^i_j, with fock(0, 0) identified with dt
    aplus(i)      dA^0_i, thermal creation-type noise of channel i
    aminus(i)     dA^i_0, thermal annihilation-type noise of channel i

Fock products follow da^i_j . da^k_l = delta_il da^k_j, where the delta vanishes
at (i, l) = (0, 0). Thermal products are dA^i_0 . dA^0_i = r+_i dt and
dA^0_i . dA^i_0 = r-_i dt, with r+_i = beta_0/(beta_0-beta_i) and
r-_i = beta_i/(beta_0-beta_i).

Only the doubled-Fock labelling of the thermal noises is modelled: at zero
temperature aplus(i) plays the part of fock(0, i) and aminus(i) of fock(i, 0).
"""

import itertools
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import partial
from typing import Literal

import numpy as np

from qlangevin import numkit
from qlangevin.errors import ValidationError
from qlangevin.logs import get_logger
from qlangevin.model import ModelSpec

logger = get_logger(__name__)

UNITARY_TOL = 1e-10
THERMAL_TOL = 1e-12
RATIO_TOL = 1e-12

SymbolKind = Literal["dt", "fock", "aplus", "aminus"]


@dataclass(frozen=True, order=True)
class ItoSymbol:
    kind: SymbolKind
    i: int = 0
    j: int = 0

    def __post_init__(self):
        if self.kind not in ("dt", "fock", "aplus", "aminus"):
            raise ValidationError(f"unknown Ito symbol kind {self.kind!r}")
        if self.i < 0 or self.j < 0:
            raise ValidationError(f"negative index in Ito symbol {self.kind}({self.i}, {self.j})")
        if self.kind == "fock" and (self.i, self.j) == (0, 0):
            object.__setattr__(self, "kind", "dt")
        if self.kind in ("aplus", "aminus") and self.i == 0:
            raise ValidationError("thermal noise channels are numbered from 1")

    @classmethod
    def dt(cls) -> "ItoSymbol":
        return cls("dt")

    @classmethod
    def fock(cls, i: int, j: int) -> "ItoSymbol":
        return cls("fock", i, j)

    @classmethod
    def aplus(cls, i: int) -> "ItoSymbol":
        return cls("aplus", i)

    @classmethod
    def aminus(cls, i: int) -> "ItoSymbol":
        return cls("aminus", i)

    def adjoint(self) -> "ItoSymbol":
        if self.kind == "fock":
            return ItoSymbol.fock(self.j, self.i)
        if self.kind == "aplus":
            return ItoSymbol.aminus(self.i)
        if self.kind == "aminus":
            return ItoSymbol.aplus(self.i)
        return self

    def __str__(self) -> str:
        if self.kind == "dt":
            return "dt"
        if self.kind == "fock":
            return f"da^{self.i}_{self.j}"
        if self.kind == "aplus":
            return f"dA^0_{self.i}"
        return f"dA^{self.i}_0"


def _as_coefficient(c) -> np.ndarray:
    c = np.asarray(c, dtype=np.complex128)
    if c.ndim not in (0, 2):
        raise ValidationError(f"Ito coefficient must be a scalar or a matrix, got ndim {c.ndim}")
    if not np.all(np.isfinite(c)):
        raise ValidationError("Ito coefficient contains non-finite entries")
    return c


def _multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim == 0 or b.ndim == 0:
        return a * b
    return a @ b


def _adjoint_coefficient(c: np.ndarray) -> np.ndarray:
    return np.conj(c) if c.ndim == 0 else numkit.dagger(c)


ProductTable = Callable[[ItoSymbol, ItoSymbol], "ItoExpr"]


@dataclass(frozen=True, eq=False)
class ItoExpr:
    """Finite sum of Ito symbols with scalar or operator coefficients."""

    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        terms = {}
        for symbol, coefficient in self.terms.items():
            if not isinstance(symbol, ItoSymbol):
                raise ValidationError(f"{symbol!r} is not an ItoSymbol")
            terms[symbol] = _as_coefficient(coefficient)
        object.__setattr__(self, "terms", terms)

    @classmethod
    def of(cls, symbol: ItoSymbol, coefficient=1.0) -> "ItoExpr":
        return cls({symbol: coefficient})

    def coefficient(self, symbol: ItoSymbol):
        """Coefficient of symbol, or 0 when absent."""
        return self.terms.get(symbol, np.complex128(0.0))

    def __add__(self, other: "ItoExpr") -> "ItoExpr":
        terms = dict(self.terms)
        for symbol, c in other.terms.items():
            terms[symbol] = terms[symbol] + c if symbol in terms else c
        return ItoExpr(terms)

    def __neg__(self) -> "ItoExpr":
        return self.scale(-1.0)

    def __sub__(self, other: "ItoExpr") -> "ItoExpr":
        return self + (-other)

    def scale(self, factor) -> "ItoExpr":
        factor = _as_coefficient(factor)
        return ItoExpr({s: _multiply(factor, c) for s, c in self.terms.items()})

    def product(self, other: "ItoExpr", table: ProductTable) -> "ItoExpr":
        """
        (sum a_s s)(sum b_t t) = sum a_s b_t (s.t), with s.t read from table.
        """
        result = ItoExpr()
        for s, a in self.terms.items():
            for t, b in other.terms.items():
                reduced = table(s, t)
                if reduced.terms:
                    result = result + reduced.scale(_multiply(a, b))
        return result

    def adjoint(self) -> "ItoExpr":
        return ItoExpr({s.adjoint(): _adjoint_coefficient(c) for s, c in self.terms.items()})

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(c))) for c in self.terms.values()), default=0.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_abs() <= tol

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"[{c}] {s}" for s, c in sorted(self.terms.items()))


def _fock_indices(s: ItoSymbol) -> tuple[int, int]:
    if s.kind == "dt":
        return 0, 0
    if s.kind == "fock":
        return s.i, s.j
    raise ValidationError(f"{s} is not a Fock differential")


def fock_ito_product(s1: ItoSymbol, s2: ItoSymbol) -> ItoExpr:
    """da^i_j . da^k_l = delta_il da^k_j, zero when (i, l) = (0, 0)."""
    i, j = _fock_indices(s1)
    k, m = _fock_indices(s2)
    if i != m or (i, m) == (0, 0):
        return ItoExpr()
    return ItoExpr.of(ItoSymbol.fock(k, j))


@dataclass(frozen=True, eq=False)
class ThermalRatios:
    """Per-channel ratios r+ and r-, with r+ - r- = 1."""

    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self):
        plus = np.asarray(self.plus, dtype=float)
        minus = np.asarray(self.minus, dtype=float)
        if plus.ndim != 1 or plus.shape != minus.shape or plus.size == 0:
            raise ValidationError("thermal ratios need one (r+, r-) pair per channel")
        if np.any(minus < 0):
            raise ValidationError("r- must be non-negative")
        defect = np.abs(plus - minus - 1.0)
        if np.any(defect > RATIO_TOL):
            raise ValidationError(f"r+ - r- differs from one by {defect.max():.3e}")
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)

    @classmethod
    def from_weights(cls, weights) -> "ThermalRatios":
        """
        Ratios of a bath state diag(weights); r+ is built as 1 + r-.

        :raises ValidationError: If some beta_i is not strictly below beta_0.
        """
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or weights.size < 2:
            raise ValidationError("need beta_0 and at least one excited weight")
        gaps = weights[0] - weights[1:]
        if np.any(gaps <= 0):
            raise ValidationError("beta_0 - beta_i must be positive for every channel")
        minus = weights[1:] / gaps
        return cls(plus=1.0 + minus, minus=minus)

    @classmethod
    def from_model(cls, model: ModelSpec) -> "ThermalRatios":
        plus, minus = model.bath.thermal_ratios()
        return cls(plus=plus, minus=minus)

    @classmethod
    def zero_temperature(cls, n_channels: int) -> "ThermalRatios":
        return cls(plus=np.ones(n_channels), minus=np.zeros(n_channels))

    @property
    def N(self) -> int:
        return self.plus.size


def thermal_ito_product(s1: ItoSymbol, s2: ItoSymbol, ratios: ThermalRatios) -> ItoExpr:
    """
    dA^i_0 . dA^0_i = r+_i dt, dA^0_i . dA^i_0 = r-_i dt, every other product 0.
    """
    for s in (s1, s2):
        if s.kind not in ("dt", "aplus", "aminus"):
            raise ValidationError(f"{s} is not a thermal differential")
        if s.kind != "dt" and s.i > ratios.N:
            raise ValidationError(f"{s} is beyond the {ratios.N} thermal channels")
    if s1.kind == "dt" or s2.kind == "dt" or s1.i != s2.i or s1.kind == s2.kind:
        return ItoExpr()
    rate = ratios.plus if s1.kind == "aminus" else ratios.minus
    return ItoExpr.of(ItoSymbol.dt(), rate[s1.i - 1])


def thermal_table(ratios: ThermalRatios) -> ProductTable:
    return partial(thermal_ito_product, ratios=ratios)


def ccr_check(f_norms, g_inner, ratios: ThermalRatios) -> complex:
    """
    Coefficient of [A(f), A*(g)] computed through the thermal table:
    sum_i (r+_i - r-_i) <f_i, g_i>, which equals sum_i <f_i, g_i>.
    """
    f_norms = np.asarray(f_norms, dtype=float)
    g_inner = np.asarray(g_inner, dtype=np.complex128)
    if f_norms.shape != (ratios.N,) or g_inner.shape != (ratios.N,):
        raise ValidationError(f"need {ratios.N} channel values for f and <f, g>")
    if np.any(f_norms < 0):
        raise ValidationError("channel norms must be non-negative")
    total = 0j
    for i in range(1, ratios.N + 1):
        up, down = ItoSymbol.aplus(i), ItoSymbol.aminus(i)
        commutator = (
            thermal_ito_product(down, up, ratios).coefficient(ItoSymbol.dt())
            - thermal_ito_product(up, down, ratios).coefficient(ItoSymbol.dt())
        )
        total += complex(commutator) * g_inner[i - 1]
    return total


@dataclass(frozen=True)
class UnitarityCheck:
    unitary: bool
    failed: str | None = None
    diagnostics: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.unitary


def _table_size(table: dict) -> tuple[int, int]:
    if not table:
        raise ValidationError("coefficient table is empty")
    n = max(max(i, j) for i, j in table)
    missing = [(i, j) for i in range(n + 1) for j in range(n + 1) if (i, j) not in table]
    if missing:
        raise ValidationError(f"coefficient table misses entries {missing}")
    d = numkit.require_square(table[(0, 0)], "L^0_0").shape[0]
    return n, d


def hp_unitarity(table: dict, tol: float = UNITARY_TOL) -> UnitarityCheck:
    """
    Decides whether dU = sum L^i_j U da^i_j has unitary solutions.

    The table is keyed by (i, j), the coefficient of da^i_j. The conditions are
    checked constructively: S^i_j = L^i_j + delta_ij I unitary, H = i(L^0_0 +
    1/2 sum (L^0_k)* L^0_k) Hermitian, and L^i_0 = -sum_k (L^0_k)* S^k_i.

    :param table: Complete map (i, j) -> d x d coefficient, i, j in 0..N.
    :return: UnitarityCheck naming the first failing condition.
    """
    n, d = _table_size(table)
    coeff = {key: numkit.require_square(value, f"L{key}") for key, value in table.items()}
    eye = np.eye(d)
    diagnostics = {}

    if n > 0:
        channels = range(1, n + 1)
        scattering = np.block(
            [[coeff[(i, j)] + (eye if i == j else 0) for j in channels] for i in channels]
        )
        diagnostics["scattering_defect"] = numkit.max_abs(
            numkit.dagger(scattering) @ scattering - np.eye(n * d)
        )
        if diagnostics["scattering_defect"] > tol:
            return UnitarityCheck(False, "scattering matrix not unitary", diagnostics)

    drift = coeff[(0, 0)] + 0.5 * sum(
        (numkit.dagger(coeff[(0, k)]) @ coeff[(0, k)] for k in range(1, n + 1)), np.zeros((d, d))
    )
    diagnostics["hamiltonian_defect"] = numkit.hermiticity_defect(1j * drift)
    if diagnostics["hamiltonian_defect"] > tol:
        return UnitarityCheck(False, "Hamiltonian part not Hermitian", diagnostics)

    defect = 0.0
    for i in range(1, n + 1):
        expected = -sum(
            numkit.dagger(coeff[(0, k)]) @ (coeff[(k, i)] + (eye if k == i else 0))
            for k in range(1, n + 1)
        )
        defect = max(defect, numkit.max_abs(coeff[(i, 0)] - expected))
    diagnostics["annihilation_defect"] = defect
    if defect > tol:
        return UnitarityCheck(False, "annihilation coefficients inconsistent", diagnostics)
    return UnitarityCheck(True, None, diagnostics)


def thermal_drift(k00, k_plus: list, ratios: ThermalRatios) -> np.ndarray:
    """K = K00 + 1/2 sum (r+ Kplus* Kplus + r- Kplus Kplus*)."""
    k = numkit.require_square(k00, "K00").copy()
    for plus, r_plus, r_minus in zip(k_plus, ratios.plus, ratios.minus, strict=True):
        plus = numkit.require_square(plus, "Kplus")
        k = k + 0.5 * (r_plus * numkit.dagger(plus) @ plus + r_minus * plus @ numkit.dagger(plus))
    return k


def thermal_unitarity(
    k00, k_plus: list, k_minus: list, ratios: ThermalRatios, tol: float = THERMAL_TOL
) -> UnitarityCheck:
    """
    Decides whether dU = (K00 dt + sum Kplus_i dA^0_i + Kminus_i dA^i_0) U is
    unitary: Kminus_i = -Kplus_i* and K + K* = 0.
    """
    if not (len(k_plus) == len(k_minus) == ratios.N):
        raise ValidationError(f"need {ratios.N} Kplus and Kminus coefficients")
    noise_defects = [
        numkit.max_abs(numkit.as_cmatrix(m) + numkit.dagger(p))
        for p, m in zip(k_plus, k_minus, strict=True)
    ]
    diagnostics = {"noise_defect": max(noise_defects, default=0.0)}
    if diagnostics["noise_defect"] > tol:
        return UnitarityCheck(False, "Kminus is not -Kplus*", diagnostics)
    k = thermal_drift(k00, k_plus, ratios)
    diagnostics["drift_defect"] = numkit.max_abs(k + numkit.dagger(k))
    if diagnostics["drift_defect"] > tol:
        return UnitarityCheck(False, "K + K* does not vanish", diagnostics)
    return UnitarityCheck(True, None, diagnostics)


def thermal_langevin_coefficients(
    h, w: list, ratios: ThermalRatios
) -> tuple[np.ndarray, list, list]:
    """
    Coefficients of the regrouped thermal Langevin equation:
    K00 = -iH - 1/2 sum (r+ W*W + r- WW*), Kplus_i = W_i, Kminus_i = -W_i*.
    """
    h = numkit.require_square(h, "H")
    if len(w) != ratios.N:
        raise ValidationError(f"need {ratios.N} coupling operators, got {len(w)}")
    w = [numkit.require_square(wi, "W") for wi in w]
    k00 = -1j * h
    for wi, r_plus, r_minus in zip(w, ratios.plus, ratios.minus, strict=True):
        k00 = k00 - 0.5 * (r_plus * numkit.dagger(wi) @ wi + r_minus * wi @ numkit.dagger(wi))
    return k00, w, [-numkit.dagger(wi) for wi in w]


def zero_temperature_table(h, w: list) -> dict:
    """Hudson-Parthasarathy table with W_i in da^0_i, -W_i* in da^i_0 and S = I."""
    n = len(w)
    k00, k_plus, k_minus = thermal_langevin_coefficients(h, w, ThermalRatios.zero_temperature(n))
    d = k00.shape[0]
    indices = itertools.product(range(n + 1), repeat=2)
    table = {ij: np.zeros((d, d), dtype=np.complex128) for ij in indices}
    table[(0, 0)] = k00
    for i in range(1, n + 1):
        table[(0, i)] = k_plus[i - 1]
        table[(i, 0)] = k_minus[i - 1]
    return table


def langevin_differential(k00, k_plus: list, k_minus: list) -> ItoExpr:
    """dU U^{-1} = K00 dt + sum_i (Kplus_i dA^0_i + Kminus_i dA^i_0)."""
    terms = {ItoSymbol.dt(): k00}
    for i, (plus, minus) in enumerate(zip(k_plus, k_minus, strict=True), start=1):
        terms[ItoSymbol.aplus(i)] = plus
        terms[ItoSymbol.aminus(i)] = minus
    return ItoExpr(terms)


def isometry_defect(du: ItoExpr, table: ProductTable) -> ItoExpr:
    """d(U*U) at U = I: dU* + dU + dU* dU."""
    du_star = du.adjoint()
    return du_star + du + du_star.product(du, table)


def coisometry_defect(du: ItoExpr, table: ProductTable) -> ItoExpr:
    """d(UU*) at U = I: dU + dU* + dU dU*."""
    du_star = du.adjoint()
    return du + du_star + du.product(du_star, table)


@dataclass(frozen=True, eq=False)
class WeylVariance:
    value: float
    coth_factors: np.ndarray
    residuals: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())


def weyl_vacuum_variance(model: ModelSpec, f_norms) -> WeylVariance:
    """
    Vacuum expectation exp(-1/4 sum_i coth(beta (gamma_i - gamma_0)/2) ||f_i||^2)
    of a Weyl operator, with the coth factors read off the bath weights as
    (beta_0 + beta_i)/(beta_0 - beta_i).

    :param f_norms: Squared channel norms ||f_i||^2, i = 1..N.
    :return: The value, the per-channel factors and their residual against coth.
    :raises ValidationError: Without an inverse temperature, or if beta_0 = beta_i.
    """
    bath = model.bath
    if bath.beta is None:
        raise ValidationError("Weyl variance needs a Gibbs bath with known beta")
    f_norms = np.asarray(f_norms, dtype=float)
    if f_norms.shape != (bath.N,):
        raise ValidationError(f"need {bath.N} channel norms, got shape {f_norms.shape}")
    if np.any(f_norms < 0):
        raise ValidationError("channel norms must be non-negative")
    bath.require_nondegenerate()

    w0, wi = bath.weights[0], bath.weights[1:]
    factors = (w0 + wi) / (w0 - wi)
    coth = 1.0 / np.tanh(bath.beta * (bath.gamma[1:] - bath.gamma[0]) / 2)
    value = float(np.exp(-0.25 * np.dot(factors, f_norms)))
    residuals = np.abs(factors - coth)
    logger.debug(f"Weyl variance {value:.6g}, identity residual {residuals.max():.3e}")
    return WeylVariance(value=value, coth_factors=factors, residuals=residuals)


def thermal_to_doubled_fock(ratios: ThermalRatios, i: int) -> tuple[float, float]:
    """Amplitudes (sqrt r+_i, sqrt r-_i) of the two Fock noises making up dA^0_i."""
    if not 1 <= i <= ratios.N:
        raise ValidationError(f"channel {i} out of range 1..{ratios.N}")
    return float(np.sqrt(ratios.plus[i - 1])), float(np.sqrt(ratios.minus[i - 1]))
