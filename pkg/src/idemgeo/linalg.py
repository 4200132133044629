"""Dense complex matrix helpers: Hilbert-Schmidt structure, conjugation
flows, Haar-random unitaries and the JSON matrix format.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.
"""

import json

import numpy as np
from scipy.linalg import expm

RNG_NAME = "numpy.PCG64"


class DimensionError(ValueError):
    """Raised when matrix operands have incompatible shapes."""


def as_matrix(X):
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] < 1:
        raise DimensionError(f"expected a square matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix has non-finite entries")
    return X


def _check_same(X, Y):
    if X.shape != Y.shape:
        raise DimensionError(f"dimension mismatch: {X.shape} vs {Y.shape}")


def dagger(X):
    return np.conj(np.swapaxes(X, -1, -2))


def hs_inner(X, Y):
    """Hilbert-Schmidt inner product Tr(X* Y), linear in the second slot."""
    X, Y = as_matrix(X), as_matrix(Y)
    _check_same(X, Y)
    return complex(np.vdot(X, Y))


def hs_norm(X):
    return float(np.linalg.norm(X))


def commutator(X, Y):
    X, Y = as_matrix(X), as_matrix(Y)
    _check_same(X, Y)
    return X @ Y - Y @ X


def anticommutator(X, Y):
    return X @ Y + Y @ X


def conj_flow(p, N, t):
    """Return exp(-tN) p exp(tN); its t-derivative at 0 is [p, N]."""
    p, N = as_matrix(p), as_matrix(N)
    _check_same(p, N)
    if t == 0:
        return p.copy()
    return expm(-t * N) @ p @ expm(t * N)


def scaled_tol(tol, *mats):
    """Absolute tolerance scaled by (1 + product of input norms)."""
    scale = 1.0
    for M in mats:
        scale *= hs_norm(M)
    return tol * (1.0 + scale)


def make_rng(seed):
    """Seeded PCG64 generator; ``seed`` may be an int or a SeedSequence."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def ginibre(d, rng, size=None):
    shape = (d, d) if size is None else (size, d, d)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _phase_fixed_qr(Z):
    Q, R = np.linalg.qr(Z)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    phases = diag / np.abs(diag)
    return Q * phases[..., None, :]


def haar_unitary(d, seed=None, size=None):
    """Haar-distributed unitary (or a stack of ``size`` of them).

    QR of a complex Ginibre matrix with the diagonal of R rotated to the
    positive reals (Mezzadri's correction).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    rng = make_rng(seed)
    return _phase_fixed_qr(ginibre(d, rng, size))


# --- matrix JSON ------------------------------------------------------------

def matrix_to_json(X):
    X = as_matrix(X)
    return {
        "dim": int(X.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in X],
    }


def matrix_from_json(obj):
    d = int(obj["dim"])
    rows = obj["entries"]
    if len(rows) != d or any(len(r) != d for r in rows):
        raise DimensionError(f"entries do not match dim={d}")
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def dumps_matrix(X):
    # repr-based float formatting round-trips doubles exactly
    return json.dumps(matrix_to_json(X))


def loads_matrix(text):
    return matrix_from_json(json.loads(text))
