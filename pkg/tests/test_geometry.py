import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idemgeo.geometry import (
    KAHLER,
    OMEGA,
    DifferentialForm,
    UnsupportedError,
    apply_structure,
    directional_derivative,
    exterior_derivative,
    form_matrix,
    jbold,
    jbold_printed,
    kahler_2form,
    metric_family,
    metric_g,
    metric_scale,
    omega,
    tau,
)
from idemgeo.linalg import commutator, dagger, hs_norm
from idemgeo.variety import ValidationError, is_tangent, random_point, random_tangent, tangent_basis

from conftest import e

seeds = st.integers(0, 2**32 - 1)
Q0 = np.diag([1.0, 0.0]).astype(complex)


def test_structure_examples():
    np.testing.assert_allclose(apply_structure("J", Q0, e(0, 1)), -1j * e(0, 1))
    # qA = A -> +A ; Aq = A -> -A
    np.testing.assert_allclose(apply_structure("K", Q0, e(0, 1)), e(0, 1))
    np.testing.assert_allclose(apply_structure("K", Q0, e(1, 0)), -e(1, 0))
    np.testing.assert_allclose(apply_structure("I", Q0, e(0, 1)), 1j * e(0, 1))


def test_jbold_on_zero_section(rng):
    p = random_point(3, 1, 0.0, rng)
    A = random_tangent(p, rng)
    np.testing.assert_allclose(jbold(p, A), 1j * commutator(p, dagger(A)), atol=1e-13)


def test_jbold_rank_and_norm_guards(rng):
    q = random_point(4, 2, 1.0, rng)
    with pytest.raises(UnsupportedError):
        apply_structure("Jbold", q, random_tangent(q, rng))
    with pytest.raises(ValidationError):
        tau(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        apply_structure("L", Q0, e(0, 1))


@given(st.sampled_from([(2, 1), (3, 1), (3, 2), (4, 2)]), seeds)
@settings(max_examples=25, deadline=None)
def test_structures_square_and_stay_tangent(shape, seed):
    rng = np.random.default_rng(seed)
    q = random_point(*shape, 1.0, rng)
    A = random_tangent(q, rng)
    for tag, sign in (("I", -1), ("J", -1), ("K", 1), ("Jhat", -1)):
        X = apply_structure(tag, q, A)
        assert is_tangent(q, X, 1e-9)
        assert hs_norm(apply_structure(tag, q, X) - sign * A) < 1e-10 * hs_norm(A)


def test_printed_jbold_sign_fails_off_zero_section(rng):
    # the + sign variant agrees on the zero section but does not square to -1
    p = random_point(2, 1, 0.0, rng)
    A = random_tangent(p, rng)
    np.testing.assert_allclose(jbold_printed(p, A), jbold(p, A), atol=1e-13)
    q = random_point(2, 1, 1.0, rng)
    A = random_tangent(q, rng)
    assert hs_norm(jbold_printed(q, jbold_printed(q, A)) + A) > 1e-3 * hs_norm(A)
    assert hs_norm(jbold(q, jbold(q, A)) + A) < 1e-12 * hs_norm(A)


def test_omega_examples(rng):
    assert omega(Q0, e(0, 1), e(1, 0)) == pytest.approx(1j)
    q = random_point(3, 1, 1.0, rng)
    A = random_tangent(q, rng)
    assert omega(q, A, A) == 0


def test_tau_and_ddc_tau(rng):
    assert tau(Q0) == 1
    A = e(0, 1) * (2 + 1j)
    assert kahler_2form(Q0, 1j * A, A) == pytest.approx(2 * hs_norm(A) ** 2)
    for _ in range(20):
        q = random_point(3, 1, 2.0, rng)
        A = random_tangent(q, rng)
        # Cauchy-Schwarz lower bound
        assert kahler_2form(q, 1j * A, A) >= hs_norm(A) ** 2 / hs_norm(q) - 1e-12


def test_metric_family_zero_section_example(rng):
    p = random_point(3, 1, 0.0, rng)
    A = random_tangent(p, rng)
    expect = 2 * hs_norm(A) ** 2 - abs(np.trace(dagger(A) @ p)) ** 2
    assert metric_family(p, A, A) == pytest.approx(expect)


def test_metric_calibration_constant():
    assert metric_scale() == pytest.approx(0.5, abs=1e-12)


def test_metric_properties(rng):
    for _ in range(20):
        d = 2 + rng.integers(2)
        q = random_point(d, 1, 1.5, rng)
        A, B = random_tangent(q, rng), random_tangent(q, rng)
        assert metric_g(q, A, A) > 0
        assert metric_g(q, A, B) == pytest.approx(metric_g(q, B, A), abs=1e-13)
        assert metric_g(q, jbold(q, A), B) == pytest.approx(omega(q, A, B).real, abs=1e-12)
    with pytest.raises(UnsupportedError):
        q = random_point(4, 2, 1.0, rng)
        metric_g(q, q, q)


def test_differential_form_arity(rng):
    q = random_point(2, 1, 1.0, rng)
    with pytest.raises(ValueError):
        OMEGA(q, q)
    with pytest.raises(ValueError):
        exterior_derivative(OMEGA, q, q, q)


def test_forms_alternating(rng):
    q = random_point(3, 1, 1.0, rng)
    A, B, C = (random_tangent(q, rng) for _ in range(3))
    for form in (OMEGA, KAHLER):
        assert abs(form(q, A, B) + form(q, B, A)) < 1e-12
        lin = form(q, 2 * A + C, B) - 2 * form(q, A, B) - form(q, C, B)
        assert abs(lin) < 1e-12


def test_exterior_derivative_of_constant_is_zero(rng):
    q = random_point(3, 1, 1.0, rng)
    A, B = random_tangent(q, rng), random_tangent(q, rng)
    const = DifferentialForm(1, lambda p, X: 3.0, "const")
    assert abs(exterior_derivative(const, q, A, B)) < 1e-12


def test_directional_derivative_of_linear_function(rng):
    # f(p) = Tr(Mp) has derivative Tr(MA) along the flow with velocity A
    q = random_point(3, 2, 1.0, rng)
    A = random_tangent(q, rng)
    M = rng.standard_normal((3, 3))
    val = directional_derivative(lambda p: np.trace(M @ p), q, A)
    assert abs(val - np.trace(M @ A)) < 1e-8 * (1 + hs_norm(M) * hs_norm(A))


def test_d_omega_vanishes(rng):
    for d, n in [(2, 1), (3, 1), (4, 2)]:
        q = random_point(d, n, 1.0, rng)
        A, B, C = (random_tangent(q, rng) for _ in range(3))
        scale = 1 + hs_norm(A) * hs_norm(B) * hs_norm(C)
        assert abs(exterior_derivative(OMEGA, q, A, B, C)) < 1e-6 * scale


def test_d_of_non_closed_form_detected(rng):
    # the 1-form p -> Tr(p A) has non-vanishing d; the engine must see it
    q = random_point(3, 1, 1.0, rng)
    A, B = random_tangent(q, rng), random_tangent(q, rng)
    form = DifferentialForm(1, lambda p, X: np.trace(p @ p @ X @ dagger(p)), "test")
    assert abs(exterior_derivative(form, q, A, B)) > 1e-3


def test_form_matrix_antisymmetric(rng):
    q = random_point(2, 1, 1.0, rng)
    W = form_matrix(KAHLER, q, tangent_basis(q))
    np.testing.assert_allclose(W, -W.T, atol=1e-15)
    assert np.linalg.matrix_rank(W) == 4
