"""Points and tangent vectors of the variety of rank-n idempotents.

A point is a d x d complex matrix q with q^2 = q and Tr q = n. Tangent
vectors at q are the matrices A with qA + Aq = A. The Hermitian points form
the zero section, a copy of the Grassmannian Gr(n, C^d), and every point
decomposes as q = pi(q) + f with pi(q) the orthogonal projection onto the
range of q and f a fiber vector (pi(q) f = f, f pi(q) = 0).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr

from .linalg import (
    as_matrix,
    commutator,
    dagger,
    ginibre,
    haar_unitary,
    hs_norm,
    make_rng,
    matrix_from_json,
    matrix_to_json,
)

DEFAULT_TOL = 1e-10


class ValidationError(ValueError):
    """Input is not a valid point, tangent or fiber vector."""


class LeafMismatch(ValidationError):
    pass


@dataclass(frozen=True)
class PointDiagnostics:
    idempotency_residual: float
    trace_residual: float
    rank_estimate: int
    norm: float
    accepted: bool
    reasons: list = field(default_factory=list)


def rank_of(q):
    return int(round(float(np.trace(q).real)))


def validate_point(M, n, tol=DEFAULT_TOL):
    """Check q^2 = q and Tr q = n. Never raises; failures are reported."""
    reasons = []
    try:
        M = as_matrix(M)
    except ValueError as exc:
        return PointDiagnostics(np.inf, np.inf, 0, np.inf, False, [str(exc)])
    d = M.shape[0]
    nrm = hs_norm(M)
    idem = hs_norm(M @ M - M)
    tr = abs(np.trace(M) - n)
    sv = np.linalg.svd(M, compute_uv=False)
    rank = int(np.sum(sv > 1e-8 * max(1.0, sv[0])))
    if idem > tol * (1 + nrm**2):
        reasons.append(f"idempotency residual {idem:.3e} exceeds tolerance")
    if tr > tol:
        reasons.append(f"trace residual {tr:.3e} exceeds tolerance")
    if not 1 <= n <= d - 1:
        reasons.append(f"rank {n} outside 1..{d - 1}")
    return PointDiagnostics(idem, float(tr), rank, nrm, not reasons, reasons)


def check_point(q, n=None, tol=DEFAULT_TOL):
    q = as_matrix(q)
    if n is None:
        n = rank_of(q)
    diag = validate_point(q, n, tol)
    if not diag.accepted:
        raise ValidationError("; ".join(diag.reasons))
    return q


def is_tangent(q, A, tol=DEFAULT_TOL):
    return hs_norm(q @ A + A @ q - A) <= tol * (1 + hs_norm(A)) * (1 + hs_norm(q))


def check_tangent(q, A, tol=DEFAULT_TOL):
    A = as_matrix(A)
    if A.shape != q.shape:
        raise ValidationError(f"tangent shape {A.shape} does not match base {q.shape}")
    if not is_tangent(q, A, tol):
        res = hs_norm(q @ A + A @ q - A)
        raise ValidationError(f"not tangent: |qA + Aq - A| = {res:.3e}")
    return A


def is_hermitian(X, tol=DEFAULT_TOL):
    return hs_norm(X - dagger(X)) <= tol * (1 + hs_norm(X))


def check_hermitian_point(q, tol=DEFAULT_TOL):
    q = check_point(q, tol=tol)
    if not is_hermitian(q, tol):
        raise ValidationError("base point is not Hermitian")
    return q


def tangent_project(q, M):
    """Projector onto T_q: M -> qM + Mq - 2qMq."""
    q, M = as_matrix(q), as_matrix(M)
    if q.shape != M.shape:
        raise ValidationError("dimension mismatch")
    qM = q @ M
    return qM + M @ q - 2 * qM @ q


def random_hermitian_point(d, n, rng):
    U = haar_unitary(d, rng)
    frame = U[:, :n]
    return frame @ dagger(frame)


def random_fiber_vector(p, rng, scale=1.0):
    d = p.shape[0]
    G = ginibre(d, rng)
    comp = np.eye(d) - p
    return scale * (p @ G @ comp)


def random_point(d, n, fiber_scale=1.0, seed=None):
    """Haar base point plus a Gaussian fiber vector scaled by fiber_scale."""
    if not 1 <= n <= d - 1:
        raise ValueError(f"rank n={n} must satisfy 1 <= n <= d-1 (d={d})")
    if fiber_scale < 0:
        raise ValueError("fiber_scale must be non-negative")
    rng = make_rng(seed)
    p = random_hermitian_point(d, n, rng)
    if fiber_scale == 0:
        return p
    return p + random_fiber_vector(p, rng, fiber_scale)


def random_tangent(q, seed=None):
    rng = make_rng(seed)
    return tangent_project(q, ginibre(q.shape[0], rng))


def random_hermitian_tangent(p, seed=None):
    """Random tangent to the Grassmannian at a Hermitian point p."""
    A = random_tangent(p, seed)
    return (A + dagger(A)) / 2


def base_projection(q, n=None):
    """Orthogonal projection onto range(q), via column-pivoted QR."""
    q = as_matrix(q)
    if n is None:
        n = rank_of(q)
    Q, R, _ = qr(q, pivoting=True)
    diag = np.abs(np.diag(R))
    if n < 1 or diag[n - 1] <= 1e-10 * max(1.0, diag[0]):
        raise ValidationError(f"rank-deficient input: expected rank {n}")
    frame = Q[:, :n]
    return frame @ dagger(frame)


def base_projection_rank1(q):
    qq = q @ dagger(q)
    return qq / np.trace(qq).real


def pushforward(q, A, p=None):
    """Derivative of the base projection pi at q applied to A.

    With M = [q, A] one has A = [q, M]; the skew-Hermitian part S of M maps
    to [p, S] and the Hermitian part H to [[p, H], p].
    """
    q, A = as_matrix(q), as_matrix(A)
    if A.shape != q.shape:
        raise ValidationError("inconsistent base")
    if p is None:
        p = base_projection(q)
    M = commutator(q, A)
    S = (M - dagger(M)) / 2
    H = (M + dagger(M)) / 2
    return commutator(p, S) + commutator(commutator(p, H), p)


def same_leaf(q, q2, tol=DEFAULT_TOL):
    q, q2 = as_matrix(q), as_matrix(q2)
    if rank_of(q) != rank_of(q2):
        raise ValidationError("points have different ranks")
    return hs_norm(q @ q2 - q2) <= tol * (1 + hs_norm(q) * hs_norm(q2))


def fiber_scale(q, r):
    """r . q = (1 - r) pi(q) + r q."""
    p = base_projection(q)
    return (1 - r) * p + r * q


def fiber_add(q, q2, tol=DEFAULT_TOL):
    """q (+) q2 = q + q2 - pi(q) for points on the same leaf."""
    if not same_leaf(q, q2, tol):
        raise LeafMismatch("points are not on the same leaf of pi")
    return q + q2 - base_projection(q)


def fiber_decompose(q):
    p = base_projection(q)
    return p, q - p


def check_fiber_vector(p, f, tol=DEFAULT_TOL):
    f = as_matrix(f)
    scale = tol * (1 + hs_norm(f))
    if hs_norm(p @ f - f) > scale or hs_norm(f @ p) > scale:
        raise ValidationError("fiber condition pf = f, fp = 0 violated")
    return f


def fiber_compose(p, f, tol=DEFAULT_TOL):
    p = check_hermitian_point(p, tol)
    check_fiber_vector(p, f, tol)
    return p + f


def metric_iso(q, A, tol=DEFAULT_TOL):
    """Fubini-Study identification T_q Gr -> fiber: A -> qA.

    For Hermitian tangents A, B: Tr(AB) = 2 Re Tr(qAB); the two off-diagonal
    blocks of AB contribute complex-conjugate traces.
    """
    q = as_matrix(q)
    if not is_hermitian(q, tol):
        raise ValidationError("metric_iso needs a Hermitian base point")
    return q @ as_matrix(A)


# --- real bases -------------------------------------------------------------

def _realify(mats):
    flat = np.array([np.ravel(M) for M in mats])
    return np.concatenate([flat.real, flat.imag], axis=1)


def real_span_basis(mats, d, rtol=1e-9):
    """Orthonormal basis (w.r.t. Re <X, Y>) of the real span of ``mats``."""
    R = _realify(mats)
    _, s, Vt = np.linalg.svd(R, full_matrices=False)
    r = int(np.sum(s > rtol * max(1.0, s[0])))
    out = []
    for v in Vt[:r]:
        half = v.size // 2
        out.append((v[:half] + 1j * v[half:]).reshape(d, d))
    return out


def tangent_basis(q):
    """Real orthonormal basis of T_q (real dimension 4n(d-n))."""
    d = q.shape[0]
    imgs = []
    for i in range(d):
        for j in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = 1.0
            P = tangent_project(q, E)
            imgs.extend([P, 1j * P])
    return real_span_basis(imgs, d)


def grassmann_tangent_basis(p):
    """Real orthonormal basis of Hermitian tangents at Hermitian p."""
    d = p.shape[0]
    herm = [(X + dagger(X)) / 2 for X in tangent_basis(p)]
    return real_span_basis(herm, d)


def real_coords(X, basis):
    """Coordinates of X in a real orthonormal basis."""
    return np.array([np.vdot(B, X).real for B in basis])


# --- serialization ----------------------------------------------------------

def point_to_json(q, n=None):
    n = rank_of(q) if n is None else n
    return {"kind": "point", "rank": int(n), "matrix": matrix_to_json(q), "base": None}


def tangent_to_json(q, A, n=None):
    n = rank_of(q) if n is None else n
    return {"kind": "tangent", "rank": int(n), "matrix": matrix_to_json(A),
            "base": matrix_to_json(q)}


def from_json(obj):
    kind = obj.get("kind")
    if kind == "point":
        return matrix_from_json(obj["matrix"])
    if kind == "tangent":
        return matrix_from_json(obj["base"]), matrix_from_json(obj["matrix"])
    raise ValueError(f"unknown kind {kind!r}")
