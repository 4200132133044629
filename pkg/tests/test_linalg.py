import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idemgeo.linalg import (
    DimensionError,
    as_matrix,
    commutator,
    conj_flow,
    dagger,
    dumps_matrix,
    haar_unitary,
    hs_inner,
    hs_norm,
    loads_matrix,
    make_rng,
    matrix_from_json,
    matrix_to_json,
)

from conftest import e

seeds = st.integers(0, 2**32 - 1)


def test_hs_inner_examples():
    assert hs_inner(np.eye(2), np.eye(2)) == 2
    assert hs_inner(e(0, 1), e(0, 1)) == 1


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_hs_inner_conjugate_symmetric(seed):
    rng = np.random.default_rng(seed)
    X, Y = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)) for _ in range(2))
    assert abs(hs_inner(X, Y) - np.conj(hs_inner(Y, X))) < 1e-12
    assert abs(hs_inner(X, 2j * Y) - 2j * hs_inner(X, Y)) < 1e-12
    assert hs_inner(X, X).real >= 0 and abs(hs_inner(X, X).imag) < 1e-12


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        hs_inner(np.eye(2), np.eye(3))
    with pytest.raises(DimensionError):
        commutator(np.eye(2), np.eye(3))


def test_as_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_matrix(np.array([[np.nan, 0], [0, 1]]))
    with pytest.raises(ValueError):
        as_matrix(np.ones((2, 3)))


def test_commutator():
    X = np.arange(4.0).reshape(2, 2)
    assert hs_norm(commutator(X, X)) == 0
    np.testing.assert_allclose(commutator(e(0, 1), e(1, 0)), np.diag([1, -1]))


def test_commutator_traceless(rng):
    X, Y = rng.standard_normal((2, 5, 5)) + 1j * rng.standard_normal((2, 5, 5))
    assert abs(np.trace(commutator(X, Y))) < 1e-13


def test_adjoint_involution(rng):
    X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.array_equal(dagger(dagger(X)), X)


def test_conj_flow(rng):
    p = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    N = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    np.testing.assert_allclose(conj_flow(p, N, 0.0), p, atol=1e-15)
    np.testing.assert_allclose(conj_flow(p, np.zeros((3, 3)), 1.7), p, atol=1e-14)
    np.testing.assert_allclose(conj_flow(conj_flow(p, N, 0.3), N, 0.4), conj_flow(p, N, 0.7), atol=1e-12)
    h = 1e-6
    deriv = (conj_flow(p, N, h) - conj_flow(p, N, -h)) / (2 * h)
    np.testing.assert_allclose(deriv, commutator(p, N), atol=1e-7)


def test_haar_unitary_is_unitary_and_reproducible():
    U = haar_unitary(5, seed=3)
    np.testing.assert_allclose(U @ dagger(U), np.eye(5), atol=1e-13)
    np.testing.assert_array_equal(U, haar_unitary(5, seed=3))
    stack = haar_unitary(3, seed=1, size=4)
    assert stack.shape == (4, 3, 3)


def test_haar_unitary_first_moment():
    # E|U_00|^2 = 1/d for Haar unitaries
    U = haar_unitary(3, seed=8, size=20000)
    assert abs(np.mean(np.abs(U[:, 0, 0]) ** 2) - 1 / 3) < 0.01


def test_make_rng_passthrough():
    g = np.random.default_rng(0)
    assert make_rng(g) is g
    assert isinstance(make_rng(4).bit_generator, np.random.PCG64)


def test_matrix_json_roundtrip(rng):
    X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    obj = matrix_to_json(X)
    assert obj["dim"] == 3
    json.dumps(obj)
    np.testing.assert_array_equal(matrix_from_json(obj), X)
    np.testing.assert_array_equal(loads_matrix(dumps_matrix(X)), X)
