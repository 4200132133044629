import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idemgeo.linalg import commutator, conj_flow, dagger, hs_norm
from idemgeo.variety import (
    LeafMismatch,
    ValidationError,
    base_projection,
    base_projection_rank1,
    check_fiber_vector,
    check_point,
    check_tangent,
    fiber_add,
    fiber_compose,
    fiber_decompose,
    fiber_scale,
    from_json,
    metric_iso,
    point_to_json,
    pushforward,
    random_hermitian_tangent,
    random_point,
    random_tangent,
    same_leaf,
    tangent_basis,
    tangent_project,
    tangent_to_json,
    validate_point,
)

shapes = st.sampled_from([(2, 1), (3, 1), (3, 2), (4, 2), (5, 2)])
seeds = st.integers(0, 2**32 - 1)


def test_validate_point_reports_without_raising():
    diag = validate_point(np.diag([1.0, 0.0]), 1)
    assert diag.accepted and diag.rank_estimate == 1
    bad = validate_point(np.diag([2.0, 0.0]), 1)
    assert not bad.accepted and bad.reasons
    garbage = validate_point(np.ones((2, 3)), 1)
    assert not garbage.accepted


@given(shapes, seeds, st.floats(0, 5))
@settings(max_examples=40, deadline=None)
def test_random_point_valid(shape, seed, scale):
    d, n = shape
    q = random_point(d, n, scale, seed)
    assert validate_point(q, n).accepted
    if scale == 0:
        assert hs_norm(q - dagger(q)) < 1e-14


def test_random_point_bad_rank():
    with pytest.raises(ValueError):
        random_point(3, 3)


@given(shapes, seeds)
@settings(max_examples=40, deadline=None)
def test_tangent_projector(shape, seed):
    rng = np.random.default_rng(seed)
    d, n = shape
    q = random_point(d, n, 1.0, rng)
    M = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    P = tangent_project(q, M)
    check_tangent(q, P)
    np.testing.assert_allclose(tangent_project(q, P), P, atol=1e-11 * (1 + hs_norm(P)) * hs_norm(q) ** 2)
    # equivalently [q, [q, M]]
    np.testing.assert_allclose(P, commutator(q, commutator(q, M)), atol=1e-11 * hs_norm(M) * hs_norm(q) ** 2)


def test_tangent_basis_dimension(rng):
    for d, n in [(2, 1), (3, 1), (4, 2)]:
        q = random_point(d, n, 1.0, rng)
        assert len(tangent_basis(q)) == 4 * n * (d - n)


def test_check_tangent_rejects(rng):
    q = random_point(3, 1, 1.0, rng)
    with pytest.raises(ValidationError):
        check_tangent(q, np.eye(3))


def test_base_projection_examples(rng):
    np.testing.assert_allclose(base_projection(np.array([[1, 1], [0, 0]])), np.diag([1, 0]), atol=1e-15)
    p = random_point(3, 1, 0.0, rng)
    np.testing.assert_allclose(base_projection(p), p, atol=1e-14)
    q = random_point(4, 2, 1.0, rng)
    p = base_projection(q)
    assert hs_norm(p @ q - q) < 1e-11 and hs_norm(q @ p - p) < 1e-11
    assert hs_norm(p - dagger(p)) < 1e-14


def test_base_projection_rank1_formula(rng):
    q = random_point(3, 1, 2.0, rng)
    np.testing.assert_allclose(base_projection(q), base_projection_rank1(q), atol=1e-13)


def test_base_projection_rank_deficient():
    with pytest.raises(ValidationError):
        base_projection(np.zeros((3, 3)), 1)


def test_pushforward_examples(rng):
    p = random_point(3, 1, 0.0, rng)
    S = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    S = S - dagger(S)
    A = commutator(p, S)
    np.testing.assert_allclose(pushforward(p, A), A, atol=1e-14)


@given(shapes, seeds)
@settings(max_examples=25, deadline=None)
def test_pushforward_matches_finite_difference(shape, seed):
    rng = np.random.default_rng(seed)
    d, n = shape
    q = random_point(d, n, 1.0, rng)
    A = random_tangent(q, rng)
    N = commutator(q, A)
    h = 1e-5 / (1 + hs_norm(N))
    fd = (base_projection(conj_flow(q, N, h)) - base_projection(conj_flow(q, N, -h))) / (2 * h)
    X = pushforward(q, A)
    assert hs_norm(fd - X) < 1e-6 * (1 + hs_norm(X))
    p = base_projection(q)
    assert hs_norm(q @ X + A @ p - X) < 1e-10 * (1 + hs_norm(A))


def test_leaf_and_fiber_operations(rng):
    q = random_point(3, 1, 1.0, rng)
    p, f = fiber_decompose(q)
    q2 = fiber_compose(p, 2.5 * f)
    assert same_leaf(q, q2) and same_leaf(q2, q)
    assert validate_point(fiber_scale(q, 0.3 + 1j), 1).accepted
    s = fiber_add(q, q2)
    np.testing.assert_allclose(s, p + 3.5 * f, atol=1e-12)
    np.testing.assert_allclose(fiber_scale(q, 2.0), p + 2 * f, atol=1e-12)
    np.testing.assert_allclose(fiber_compose(*fiber_decompose(q)), q, atol=1e-12)
    other = random_point(3, 1, 1.0, rng)
    assert not same_leaf(q, other)
    with pytest.raises(LeafMismatch):
        fiber_add(q, other)


def test_fiber_vector_check(rng):
    p = random_point(3, 1, 0.0, rng)
    with pytest.raises(ValidationError):
        check_fiber_vector(p, np.eye(3))


def test_metric_iso(rng):
    p = random_point(3, 1, 0.0, rng)
    A, B = random_hermitian_tangent(p, rng), random_hermitian_tangent(p, rng)
    assert abs(2 * np.trace(metric_iso(p, A) @ B).real - np.trace(A @ B).real) < 1e-12
    assert hs_norm(metric_iso(p, np.zeros((3, 3)))) == 0
    with pytest.raises(ValidationError):
        metric_iso(random_point(3, 1, 1.0, rng), A)


def test_json_roundtrip(rng):
    q = random_point(3, 1, 1.0, rng)
    A = random_tangent(q, rng)
    np.testing.assert_array_equal(from_json(point_to_json(q)), q)
    q2, A2 = from_json(tangent_to_json(q, A))
    np.testing.assert_array_equal(q2, q)
    np.testing.assert_array_equal(A2, A)
    check_point(q2)
