"""Tests for the quantum Ito algebra, unitarity conditions and thermal noise identities."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlangevin import numkit
from qlangevin.errors import ValidationError
from qlangevin.model import BathSpec, ModelSpec, SystemSpec, gibbs_weights, ladder_model
from qlangevin.noise import (
    ItoExpr,
    ItoSymbol,
    ThermalRatios,
    ccr_check,
    coisometry_defect,
    fock_ito_product,
    hp_unitarity,
    isometry_defect,
    langevin_differential,
    thermal_ito_product,
    thermal_langevin_coefficients,
    thermal_table,
    thermal_to_doubled_fock,
    thermal_unitarity,
    weyl_vacuum_variance,
    zero_temperature_table,
)

DT = ItoSymbol.dt()


def nonzero_terms(expr: ItoExpr, tol: float = 0.0) -> dict:
    return {s: complex(c) for s, c in expr.terms.items() if np.max(np.abs(c)) > tol}


def fock_symbols(n: int) -> list[ItoSymbol]:
    return [ItoSymbol.fock(i, j) for i, j in itertools.product(range(n + 1), repeat=2)]


def random_couplings(rng, d: int, n: int) -> list[np.ndarray]:
    return [rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(n)]


def gibbs_ratios(gaps, beta) -> ThermalRatios:
    gamma = np.concatenate([[0.0], np.cumsum(gaps)])
    return ThermalRatios.from_weights(gibbs_weights(gamma, beta))


@pytest.mark.unit
def test_symbols():
    assert ItoSymbol.fock(0, 0) == DT
    assert ItoSymbol.fock(1, 2).adjoint() == ItoSymbol.fock(2, 1)
    assert ItoSymbol.aplus(1).adjoint() == ItoSymbol.aminus(1)
    assert ItoSymbol.aminus(2).adjoint() == ItoSymbol.aplus(2)
    assert DT.adjoint() == DT
    symbols = (DT, ItoSymbol.fock(1, 2), ItoSymbol.aplus(1), ItoSymbol.aminus(1))
    assert [str(s) for s in symbols] == ["dt", "da^1_2", "dA^0_1", "dA^1_0"]


@pytest.mark.unit
@pytest.mark.parametrize(
    ("build", "message"),
    [
        (lambda: ItoSymbol.aplus(0), "numbered from 1"),
        (lambda: ItoSymbol.fock(-1, 0), "negative index"),
        (lambda: ItoSymbol("other"), "unknown Ito symbol"),
        (lambda: ItoExpr({"dt": 1.0}), "not an ItoSymbol"),
        (lambda: ItoExpr.of(DT, np.ones(3)), "scalar or a matrix"),
        (lambda: ItoExpr.of(DT, np.nan), "non-finite"),
    ],
)
def test_invalid_symbols_and_expressions(build, message):
    with pytest.raises(ValidationError, match=message):
        build()


@pytest.mark.unit
def test_expression_arithmetic():
    a = ItoExpr.of(DT, 2.0) + ItoExpr.of(ItoSymbol.fock(1, 0), 1j)
    b = ItoExpr.of(DT, 1.0)
    assert a.coefficient(DT) == 2.0
    assert a.coefficient(ItoSymbol.fock(0, 1)) == 0
    assert (a - b).coefficient(DT) == 1.0
    assert (-a).coefficient(ItoSymbol.fock(1, 0)) == -1j
    assert a.scale(3.0).coefficient(DT) == 6.0
    assert a.adjoint().coefficient(ItoSymbol.fock(0, 1)) == -1j
    assert (a - a).is_zero()
    assert a.max_abs() == 2.0
    assert str(ItoExpr()) == "0"


@pytest.mark.unit
def test_matrix_coefficients_multiply_in_order(rng):
    x = rng.normal(size=(2, 2))
    y = rng.normal(size=(2, 2))
    left = ItoExpr.of(ItoSymbol.fock(1, 0), x)
    right = ItoExpr.of(ItoSymbol.fock(0, 1), y)
    product = left.product(right, fock_ito_product)
    assert numkit.max_abs(product.coefficient(DT) - x @ y) == 0.0


@pytest.mark.unit
def test_fock_table_examples():
    assert fock_ito_product(ItoSymbol.fock(1, 0), ItoSymbol.fock(0, 1)).terms == {
        DT: np.complex128(1.0)
    }
    assert not fock_ito_product(ItoSymbol.fock(0, 1), ItoSymbol.fock(1, 0)).terms
    assert not fock_ito_product(DT, ItoSymbol.fock(1, 0)).terms
    assert not fock_ito_product(ItoSymbol.fock(1, 0), DT).terms
    result = fock_ito_product(ItoSymbol.fock(2, 1), ItoSymbol.fock(1, 2))
    assert list(result.terms) == [ItoSymbol.fock(1, 1)]
    with pytest.raises(ValidationError, match="not a Fock differential"):
        fock_ito_product(ItoSymbol.aplus(1), DT)


@pytest.mark.unit
def test_fock_table_is_associative():
    symbols = fock_symbols(2)
    for s1, s2, s3 in itertools.product(symbols, repeat=3):
        e1, e2, e3 = (ItoExpr.of(s) for s in (s1, s2, s3))
        left = e1.product(e2, fock_ito_product).product(e3, fock_ito_product)
        right = e1.product(e2.product(e3, fock_ito_product), fock_ito_product)
        assert nonzero_terms(left) == nonzero_terms(right), (s1, s2, s3)


@pytest.mark.unit
def test_thermal_table_examples():
    ratios = ThermalRatios(plus=[3.0, 1.5], minus=[2.0, 0.5])
    product = thermal_ito_product(ItoSymbol.aminus(1), ItoSymbol.aplus(1), ratios)
    assert product.coefficient(DT) == 3.0
    product = thermal_ito_product(ItoSymbol.aplus(2), ItoSymbol.aminus(2), ratios)
    assert product.coefficient(DT) == 0.5
    assert not thermal_ito_product(ItoSymbol.aplus(1), ItoSymbol.aminus(2), ratios).terms
    assert not thermal_ito_product(ItoSymbol.aplus(1), ItoSymbol.aplus(1), ratios).terms
    assert not thermal_ito_product(DT, ItoSymbol.aplus(1), ratios).terms

    with pytest.raises(ValidationError, match="not a thermal differential"):
        thermal_ito_product(ItoSymbol.fock(1, 0), DT, ratios)
    with pytest.raises(ValidationError, match="beyond"):
        thermal_ito_product(ItoSymbol.aplus(3), ItoSymbol.aminus(3), ratios)


@pytest.mark.unit
def test_zero_temperature_thermal_table_is_fock_table():
    n = 2
    table = thermal_table(ThermalRatios.zero_temperature(n))
    thermal = [DT] + [ItoSymbol.aplus(i) for i in range(1, n + 1)]
    thermal += [ItoSymbol.aminus(i) for i in range(1, n + 1)]

    def as_fock(s: ItoSymbol) -> ItoSymbol:
        if s.kind == "aplus":
            return ItoSymbol.fock(0, s.i)
        if s.kind == "aminus":
            return ItoSymbol.fock(s.i, 0)
        return s

    for s1, s2 in itertools.product(thermal, repeat=2):
        expected = fock_ito_product(as_fock(s1), as_fock(s2))
        assert nonzero_terms(table(s1, s2)) == nonzero_terms(expected), (s1, s2)


@pytest.mark.unit
def test_thermal_ratios_validation(qubit_ladder):
    with pytest.raises(ValidationError, match="differs from one"):
        ThermalRatios(plus=[2.0], minus=[0.5])
    with pytest.raises(ValidationError, match="non-negative"):
        ThermalRatios(plus=[0.5], minus=[-0.5])
    with pytest.raises(ValidationError, match="one \\(r\\+, r-\\) pair"):
        ThermalRatios(plus=[1.0, 2.0], minus=[0.0])
    with pytest.raises(ValidationError, match="must be positive"):
        ThermalRatios.from_weights([0.5, 0.5])

    ratios = ThermalRatios.from_model(qubit_ladder)
    w0, w1 = qubit_ladder.bath.weights
    assert ratios.N == 1
    assert ratios.minus[0] == pytest.approx(w1 / (w0 - w1), rel=1e-14)
    assert ratios.plus[0] == pytest.approx(w0 / (w0 - w1), rel=1e-14)


@pytest.mark.unit
@settings(max_examples=40, deadline=None)
@given(
    beta=st.floats(1.0, 3.0),
    gaps=st.lists(st.floats(0.75, 2.0), min_size=1, max_size=3),
    data=st.data(),
)
def test_ccr_reduces_to_inner_product(beta, gaps, data):
    ratios = gibbs_ratios(gaps, beta)
    n = len(gaps)
    parts = st.floats(-5.0, 5.0)
    real = np.array(data.draw(st.lists(parts, min_size=n, max_size=n)))
    imag = np.array(data.draw(st.lists(parts, min_size=n, max_size=n)))
    g = real + 1j * imag
    f_norms = np.abs(g) + 1.0
    result = ccr_check(f_norms, g, ratios)
    assert abs(result - g.sum()) <= 1e-15 * max(1.0, np.abs(g).sum())


@pytest.mark.unit
def test_ccr_check_validates_input():
    ratios = ThermalRatios.zero_temperature(2)
    with pytest.raises(ValidationError, match="need 2 channel values"):
        ccr_check([1.0], [1.0], ratios)
    with pytest.raises(ValidationError, match="non-negative"):
        ccr_check([1.0, -1.0], [1.0, 1.0], ratios)


@pytest.mark.unit
def test_zero_temperature_table_satisfies_hp_conditions(rng):
    h = numkit.random_hermitian(2, rng)
    w = random_couplings(rng, 2, 2)
    table = zero_temperature_table(h, w)
    assert set(table) == set(itertools.product(range(3), repeat=2))
    check = hp_unitarity(table)
    assert check
    assert check.failed is None
    assert check.diagnostics["scattering_defect"] <= 1e-12


@pytest.mark.unit
def test_hp_conditions_with_nontrivial_scattering(rng):
    h = numkit.random_hermitian(2, rng)
    w = random_couplings(rng, 2, 1)[0]
    s = numkit.mat_exp(1j * numkit.random_hermitian(2, rng))
    table = {
        (0, 0): -1j * h - 0.5 * numkit.dagger(w) @ w,
        (0, 1): w,
        (1, 0): -numkit.dagger(w) @ s,
        (1, 1): s - np.eye(2),
    }
    assert hp_unitarity(table)


@pytest.mark.unit
@pytest.mark.parametrize(
    ("entry", "change", "failure"),
    [
        ((1, 1), lambda c: c + 0.5 * np.eye(2), "scattering matrix not unitary"),
        ((0, 0), lambda c: c + np.eye(2), "Hamiltonian part not Hermitian"),
        ((1, 0), lambda c: -c, "annihilation coefficients inconsistent"),
    ],
)
def test_hp_conditions_report_failures(rng, entry, change, failure):
    table = zero_temperature_table(numkit.random_hermitian(2, rng), random_couplings(rng, 2, 2))
    table[entry] = change(table[entry])
    check = hp_unitarity(table)
    assert not check
    assert check.failed == failure


@pytest.mark.unit
def test_hp_table_must_be_complete():
    with pytest.raises(ValidationError, match="empty"):
        hp_unitarity({})
    with pytest.raises(ValidationError, match="misses entries"):
        hp_unitarity({(0, 0): np.zeros((2, 2)), (1, 1): np.zeros((2, 2))})


@pytest.mark.unit
@pytest.mark.parametrize("beta", [0.3, 1.0, 3.0])
def test_thermal_langevin_coefficients_are_unitary(rng, beta):
    ratios = gibbs_ratios([0.5, 0.7], beta)
    h = numkit.random_hermitian(3, rng)
    w = random_couplings(rng, 3, 2)
    k00, k_plus, k_minus = thermal_langevin_coefficients(h, w, ratios)
    check = thermal_unitarity(k00, k_plus, k_minus, ratios)
    assert check
    assert check.diagnostics["drift_defect"] <= 1e-12


@pytest.mark.integration
def test_thermal_unitarity_over_seeded_tables():
    ratios = gibbs_ratios([0.6, 0.9], 1.5)
    zero = ThermalRatios.zero_temperature(2)
    for seed in range(100):
        rng = np.random.default_rng(seed)
        h = numkit.random_hermitian(2, rng)
        w = random_couplings(rng, 2, 2)
        k00, k_plus, k_minus = thermal_langevin_coefficients(h, w, ratios)
        assert thermal_unitarity(k00, k_plus, k_minus, ratios)
        assert not thermal_unitarity(k00 + 1e-3 * np.eye(2), k_plus, k_minus, ratios)

        k00, k_plus, k_minus = thermal_langevin_coefficients(h, w, zero)
        assert bool(thermal_unitarity(k00, k_plus, k_minus, zero)) is bool(
            hp_unitarity(zero_temperature_table(h, w))
        )


@pytest.mark.unit
def test_thermal_unitarity_failures(rng):
    ratios = gibbs_ratios([0.5], 1.0)
    h = numkit.random_hermitian(2, rng)
    w = random_couplings(rng, 2, 1)
    k00, k_plus, k_minus = thermal_langevin_coefficients(h, w, ratios)

    check = thermal_unitarity(k00, k_plus, [-m for m in k_minus], ratios)
    assert check.failed == "Kminus is not -Kplus*"
    check = thermal_unitarity(k00 + 0.1 * np.eye(2), k_plus, k_minus, ratios)
    assert check.failed == "K + K* does not vanish"
    assert check.diagnostics["drift_defect"] == pytest.approx(0.2)
    with pytest.raises(ValidationError, match="Kplus and Kminus"):
        thermal_unitarity(k00, k_plus, [], ratios)
    with pytest.raises(ValidationError, match="coupling operators"):
        thermal_langevin_coefficients(h, w + w, ratios)


@pytest.mark.unit
@pytest.mark.parametrize("beta", [0.3, 1.0, 2.5])
def test_symbolic_unitarity_defects_vanish(rng, beta):
    ratios = gibbs_ratios([0.4, 1.0], beta)
    k00, k_plus, k_minus = thermal_langevin_coefficients(
        numkit.random_hermitian(2, rng), random_couplings(rng, 2, 2), ratios
    )
    du = langevin_differential(k00, k_plus, k_minus)
    table = thermal_table(ratios)
    assert isometry_defect(du, table).is_zero(1e-12)
    assert coisometry_defect(du, table).is_zero(1e-12)


@pytest.mark.unit
def test_symbolic_defect_detects_non_unitary_drift(rng):
    ratios = gibbs_ratios([0.4], 1.0)
    k00, k_plus, k_minus = thermal_langevin_coefficients(
        numkit.random_hermitian(2, rng), random_couplings(rng, 2, 1), ratios
    )
    du = langevin_differential(k00 + 0.1 * np.eye(2), k_plus, k_minus)
    defect = isometry_defect(du, thermal_table(ratios))
    assert numkit.max_abs(defect.coefficient(DT) - 0.2 * np.eye(2)) <= 1e-12
    assert not defect.is_zero(1e-12)


@pytest.mark.unit
def test_fock_isometry_defect_of_zero_temperature_table(rng):
    table = zero_temperature_table(numkit.random_hermitian(2, rng), random_couplings(rng, 2, 2))
    du = ItoExpr({ItoSymbol.fock(i, j): c for (i, j), c in table.items()})
    assert isometry_defect(du, fock_ito_product).is_zero(1e-12)
    assert coisometry_defect(du, fock_ito_product).is_zero(1e-12)


def gibbs_bath_model(gaps, beta) -> ModelSpec:
    gamma = np.concatenate([[0.0], np.cumsum(gaps)])
    couplings = tuple(np.eye(1) for _ in gaps)
    return ModelSpec(SystemSpec(np.zeros((1, 1)), couplings), BathSpec.from_gibbs(gamma, beta))


@pytest.mark.unit
def test_weyl_variance_spot_value():
    variance = weyl_vacuum_variance(gibbs_bath_model([np.log(3)], 1.0), [1.0])
    assert variance.coth_factors[0] == pytest.approx(2.0, abs=1e-14)
    assert variance.value == pytest.approx(np.exp(-0.5), rel=1e-14)


@pytest.mark.unit
@pytest.mark.parametrize("beta", [0.1, 0.5, 1.0, 5.0, 20.0])
def test_weyl_variance_matches_coth(beta):
    variance = weyl_vacuum_variance(gibbs_bath_model([0.5, 0.25], beta), [1.0, 2.0])
    assert variance.max_residual <= 1e-12
    assert 0.0 < variance.value < 1.0


@pytest.mark.unit
@pytest.mark.parametrize("gap", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("beta", [0.1, 1.0, 10.0])
def test_weyl_coth_identity_grid(beta, gap):
    variance = weyl_vacuum_variance(gibbs_bath_model([gap], beta), [1.0])
    assert variance.max_residual <= 1e-12


@pytest.mark.unit
def test_weyl_variance_zero_temperature_limit():
    variance = weyl_vacuum_variance(gibbs_bath_model([1.0, 1.5], 50.0), [0.7, 1.3])
    assert np.allclose(variance.coth_factors, 1.0, atol=1e-15)
    assert variance.value == pytest.approx(np.exp(-0.25 * 2.0), rel=1e-12)


@pytest.mark.unit
def test_weyl_variance_is_monotone():
    model = gibbs_bath_model([0.5], 1.0)
    by_norm = [weyl_vacuum_variance(model, [f]).value for f in (0.0, 0.5, 1.0, 2.0, 4.0)]
    assert by_norm[0] == 1.0
    assert np.all(np.diff(by_norm) < 0)

    gaps = (0.25, 0.5, 1.0, 2.0)
    by_gap = [weyl_vacuum_variance(gibbs_bath_model([g], 1.0), [1.0]).value for g in gaps]
    assert np.all(np.diff(by_gap) > 0)


@pytest.mark.unit
def test_weyl_variance_validation():
    no_beta = ladder_model([0.0, 1.0], [0.6, 0.4])
    with pytest.raises(ValidationError, match="known beta"):
        weyl_vacuum_variance(no_beta, [1.0])
    model = gibbs_bath_model([0.5], 1.0)
    with pytest.raises(ValidationError, match="channel norms"):
        weyl_vacuum_variance(model, [1.0, 1.0])
    with pytest.raises(ValidationError, match="non-negative"):
        weyl_vacuum_variance(model, [-1.0])


@pytest.mark.unit
def test_thermal_to_doubled_fock():
    ratios = gibbs_ratios([0.5, 1.0], 1.0)
    for i in (1, 2):
        plus, minus = thermal_to_doubled_fock(ratios, i)
        assert plus**2 - minus**2 == pytest.approx(1.0, abs=1e-12)
    assert thermal_to_doubled_fock(ThermalRatios.zero_temperature(1), 1) == (1.0, 0.0)
    plus, minus = thermal_to_doubled_fock(ThermalRatios.from_weights([2 / 3, 1 / 3]), 1)
    assert plus == pytest.approx(np.sqrt(2.0), abs=1e-14)
    assert minus == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValidationError, match="out of range"):
        thermal_to_doubled_fock(ratios, 3)
