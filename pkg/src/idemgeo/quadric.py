"""The d = 2, n = 1 model: the variety as the unit complex quadric.

A rank-1 idempotent [[z, y], [x, 1 - z]] (so xy = z - z^2) is sent to
(i(x - y), x + y, 1 - 2z), which satisfies X^2 + Y^2 + Z^2 = 1.
"""

import numpy as np

from .geometry import tau
from .linalg import DimensionError, as_matrix, dagger, hs_norm
from .variety import ValidationError, check_point, real_span_basis, tangent_basis

INVOLUTIONS = ("sphere", "disk", "cylinder")
_D = np.diag([1.0, -1.0]).astype(complex)


def _require_d2(q):
    q = as_matrix(q)
    if q.shape != (2, 2):
        raise DimensionError(f"the quadric model needs d = 2, got d = {q.shape[0]}")
    return q


def quadric_coords(q):
    q = _require_d2(q)
    z, y, x = q[0, 0], q[0, 1], q[1, 0]
    return np.array([1j * (x - y), x + y, 1 - 2 * z])


def from_quadric(coords):
    X, Y, Z = np.asarray(coords, dtype=complex)
    x, y, z = (Y - 1j * X) / 2, (Y + 1j * X) / 2, (1 - Z) / 2
    return np.array([[z, y], [x, 1 - z]])


def quadric_residual(coords):
    return abs(np.sum(np.asarray(coords) ** 2) - 1)


def tangent_coords(q, A):
    """Differential of ``quadric_coords``; it is linear in the entries."""
    _require_d2(q)
    A = as_matrix(A)
    return np.array([1j * (A[1, 0] - A[0, 1]), A[1, 0] + A[0, 1], -2 * A[0, 0]])


def from_tangent_coords(t):
    a, b, c = np.asarray(t, dtype=complex)
    z = -c / 2
    return np.array([[z, (b + 1j * a) / 2], [(b - 1j * a) / 2, -z]])


def cross_product_J(coords, t, tol=1e-10):
    """J(a, b, c) = (a, b, c) x (x, y, z), complex bilinear."""
    coords = np.asarray(coords, dtype=complex)
    t = np.asarray(t, dtype=complex)
    if abs(np.dot(coords, t)) > tol * (1 + np.linalg.norm(coords) * np.linalg.norm(t)):
        raise ValidationError("(a, b, c) is not tangent to the quadric at (x, y, z)")
    return np.cross(t, coords)


# --- antiholomorphic involutions ---------------------------------------------

def _entry_map(kind, X):
    if kind == "sphere":
        return dagger(X)
    if kind == "disk":
        return _D @ dagger(X) @ _D
    if kind == "cylinder":
        return X.conj()
    raise ValueError(f"unknown involution {kind!r}; expected one of {INVOLUTIONS}")


def involution(kind, q):
    """sphere (x,y,z) -> (ybar, xbar, zbar); disk -> (-ybar, -xbar, zbar);
    cylinder -> (xbar, ybar, zbar), in the matrix entries."""
    return _entry_map(kind, _require_d2(q))


def involution_differential(kind, q, A):
    """Exact differential; the maps are conjugate-linear in the entries."""
    _require_d2(q)
    return _entry_map(kind, as_matrix(A))


def fixed_point(kind, rng):
    """Random fixed point of the involution."""
    if kind == "sphere":
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v /= np.linalg.norm(v)
        return np.outer(v, v.conj())
    if kind == "disk":
        # x = -conj(y), z real: z(z - 1) = |x|^2
        x = complex(rng.standard_normal(), rng.standard_normal())
        z = (1 + rng.choice([-1.0, 1.0]) * np.sqrt(1 + 4 * abs(x) ** 2)) / 2
        return np.array([[z, -np.conj(x)], [x, 1 - z]])
    if kind == "cylinder":
        x, z = rng.standard_normal(2)
        x = x if abs(x) > 0.1 else 0.1
        return np.array([[z, (z - z * z) / x], [x, 1 - z]], dtype=complex)
    raise ValueError(f"unknown involution {kind!r}; expected one of {INVOLUTIONS}")


def fixed_tangent_basis(kind, q):
    """Real basis of the tangent vectors fixed by the differential."""
    q = check_point(_require_d2(q))
    if hs_norm(involution(kind, q) - q) > 1e-10 * (1 + hs_norm(q)):
        raise ValidationError(f"q is not fixed by the {kind} involution")
    sym = [(E + involution_differential(kind, q, E)) / 2 for E in tangent_basis(q)]
    return real_span_basis(sym, 2)


# --- Eguchi-Hanson potential ----------------------------------------------------

def eguchi_hanson_potential(q):
    X, Y, Z = quadric_coords(q)
    return float(np.sqrt((abs(X) ** 2 + abs(Y) ** 2 + abs(Z) ** 2 + 1) / 2))


def eguchi_hanson_residual(q):
    return abs(tau(q) - eguchi_hanson_potential(q))
