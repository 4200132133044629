"""Bundle structure of pi: connection, curvature, the Gr x Gr chart, the
compactification of T P(H), the idempotent section S and the map Psi."""

import numpy as np

from .geometry import j_op
from .linalg import as_matrix, commutator, dagger, hs_norm
from .variety import (
    DEFAULT_TOL,
    ValidationError,
    _realify,
    base_projection,
    check_fiber_vector,
    is_hermitian,
    pushforward,
    rank_of,
    tangent_basis,
)

TRANSVERSALITY_COND = 1e8


class TransversalityError(ValidationError):
    """The pair does not satisfy C^d = range(p1) (+) range(p2)^perp."""


# --- connection and curvature ------------------------------------------------

def horizontal_lift(q, A, p=None):
    """H(A) = [q, [pi(q), A]] for A tangent to Gr at pi(q)."""
    q, A = as_matrix(q), as_matrix(A)
    if p is None:
        p = base_projection(q)
    return commutator(q, commutator(p, A))


def curvature_F(q, A, B, C):
    """F_q(A, B) C = C[A, B] - [A, B]C."""
    AB = commutator(as_matrix(A), as_matrix(B))
    C = as_matrix(C)
    return C @ AB - AB @ C


# --- Gr x Gr chart -----------------------------------------------------------

def compactify(q):
    """q -> (pi(q), pi(q*))."""
    q = as_matrix(q)
    n = rank_of(q)
    return base_projection(q, n), base_projection(dagger(q), n)


def _frame(p, want_range=True):
    w, V = np.linalg.eigh((p + dagger(p)) / 2)
    mask = w > 0.5 if want_range else w <= 0.5
    return V[:, mask]


def direct_sum_condition(p1, p2):
    """Condition number of [range(p1) | range(p2)^perp]; inf if not square."""
    V = _frame(p1, True)
    W = _frame(p2, False)
    T = np.hstack([V, W])
    if T.shape[0] != T.shape[1]:
        return np.inf
    return float(np.linalg.cond(T))


def is_transverse(p1, p2, max_cond=TRANSVERSALITY_COND):
    return direct_sum_condition(p1, p2) < max_cond


def decompactify(p1, p2, max_cond=TRANSVERSALITY_COND):
    """Oblique projector with range(p1) and kernel range(p2)^perp."""
    p1, p2 = as_matrix(p1), as_matrix(p2)
    V = _frame(p1, True)
    W = _frame(p2, False)
    T = np.hstack([V, W])
    if T.shape[0] != T.shape[1]:
        raise TransversalityError("ranks of p1 and p2 differ")
    cond = np.linalg.cond(T)
    if not cond < max_cond:
        raise TransversalityError(
            f"C^d = range(p1) + range(p2)^perp fails (condition number {cond:.2e})")
    target = np.hstack([V, np.zeros_like(W)])
    # r T = target
    return np.linalg.solve(T.T, target.T).T


def rank1_image_test(p, q, tol=1e-8):
    """For rank-1 p, q: the pair lies in the image iff pq != 0."""
    return hs_norm(as_matrix(p) @ as_matrix(q)) > tol


def chart_push(q, A, pair=None):
    """Differential of q -> (pi(q), pi(q*))."""
    p1, p2 = compactify(q) if pair is None else pair
    return pushforward(q, A, p1), pushforward(dagger(q), dagger(A), p2)


def chart_pull(q, B1, B2, pair=None):
    """Tangent X at q whose chart image is (B1, B2)."""
    pair = compactify(q) if pair is None else pair
    basis = tangent_basis(q)
    cols = []
    for E in basis:
        E1, E2 = chart_push(q, E, pair)
        cols.append(np.concatenate([_realify([E1])[0], _realify([E2])[0]]))
    Mat = np.array(cols).T
    rhs = np.concatenate([_realify([B1])[0], _realify([B2])[0]])
    coef, *_ = np.linalg.lstsq(Mat, rhs, rcond=None)
    resid = np.linalg.norm(Mat @ coef - rhs)
    if resid > 1e-8 * (1 + np.linalg.norm(rhs)):
        raise ValidationError(f"(B1, B2) is not tangent to the chart image (residual {resid:.2e})")
    return sum(c * E for c, E in zip(coef, basis))


def jhat_pair(p, q, A, B):
    """Extension of Jhat to Gr x Gr:
    (A, B) -> (J_p A, -J_q B + J_q A - J_q^2 J_p A)."""
    JpA = j_op(p, A)
    return JpA, -j_op(q, B) + j_op(q, A) - j_op(q, j_op(q, JpA))


def jhat(q, A):
    pair = compactify(q)
    A1, A2 = chart_push(q, A, pair)
    B1, B2 = jhat_pair(pair[0], pair[1], A1, A2)
    return chart_pull(q, B1, B2, pair)


# --- compactification of T P(H) ----------------------------------------------

def tangent_compactify(q, A, t):
    """(q + tA + t^2 AqA) / (1 + t^2 Tr(qA^2)); t = inf gives AqA / Tr(qA^2)."""
    q, A = as_matrix(q), as_matrix(A)
    if rank_of(q) != 1:
        raise ValidationError("tangent_compactify needs a rank-1 point")
    AqA = A @ q @ A
    c = np.trace(q @ A @ A).real
    if np.isinf(t):
        if c <= 1e-14 * (1 + hs_norm(A) ** 2):
            raise ValidationError("Tr(qA^2) = 0: degenerate direction has no limit")
        return AqA / c
    if abs(t) <= 1:
        return (q + t * A + t * t * AqA) / (1 + t * t * c)
    s = 1.0 / t
    return (s * s * q + s * A + AqA) / (s * s + c)


# --- idempotent section and Psi ----------------------------------------------

def section_S(q, p, A, tol=DEFAULT_TOL):
    """A S(q, p) = pA - pAp, mapping the fiber over q to the fiber over p."""
    q, p = as_matrix(q), as_matrix(p)
    check_fiber_vector(q, A, tol)
    return p @ A - p @ A @ p


def nabla_S(q, A, B):
    """Horizontal lift of B in T_q Gr to the point q + A: B + [B, A]."""
    return as_matrix(B) + commutator(B, A)


def psi(M):
    """Section q -> qM - qMq of the fiber bundle."""
    M = as_matrix(M)
    return lambda q: q @ M - q @ M @ q


def sl_basis(d):
    """Hilbert-Schmidt orthonormal basis of traceless d x d matrices."""
    mats = []
    for i in range(d):
        for j in range(d):
            if i != j:
                E = np.zeros((d, d), dtype=complex)
                E[i, j] = 1
                mats.append(E)
    for k in range(1, d):
        D = np.zeros((d, d), dtype=complex)
        D[np.arange(k), np.arange(k)] = 1
        D[k, k] = -k
        mats.append(D / np.sqrt(k * (k + 1)))
    return mats


def psi_dagger(q):
    """Matrix of M -> qM - qMq on sl(d) in the basis ``sl_basis(d)``."""
    q = as_matrix(q)
    if not is_hermitian(q):
        raise ValidationError("psi_dagger is defined on the Grassmannian")
    basis = sl_basis(q.shape[0])
    f = psi_apply(q)
    return np.array([[np.vdot(Ei, f(Ej)) for Ej in basis] for Ei in basis])


def psi_apply(q):
    return lambda M: q @ M - q @ M @ q
