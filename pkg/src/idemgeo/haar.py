"""Monte-Carlo integration over Gr(n, C^d) with the normalized Haar measure.

Samples come in fixed-size batches, each with its own PCG64 substream
spawned from the master seed, so results do not depend on how batches are
scheduled. Batch sums are reduced with ``math.fsum``; the standard error is
the delete-one jackknife of the mean.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bundle import section_S
from .linalg import RNG_NAME, dagger, ginibre, hs_norm

BATCH = 2000


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class MCEstimate:
    mean: object
    stderr: object
    samples: int
    seed: int
    rng: str = RNG_NAME

    def within(self, target, nsigma=3.0):
        """|mean - target| <= nsigma * |stderr| (Frobenius norms for matrices)."""
        return deviation(self, target) <= nsigma * float(np.linalg.norm(self.stderr)) + 1e-14

    def sigmas(self, target):
        s = float(np.linalg.norm(self.stderr))
        dev = deviation(self, target)
        return dev / s if s > 0 else (0.0 if dev < 1e-14 else np.inf)


def deviation(est, target):
    return float(np.linalg.norm(np.asarray(est.mean) - np.asarray(target)))


def _batch_sizes(samples):
    full, rem = divmod(samples, BATCH)
    return [BATCH] * full + ([rem] if rem else [])


def haar_frames(d, n, rng, size):
    """Stack of ``size`` Haar-distributed orthonormal d x n frames."""
    Z = ginibre(d, rng, size)
    Q, R = np.linalg.qr(Z)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    Q = Q * (diag / np.abs(diag))[..., None, :]
    return Q[..., :n]


def haar_points(d, n, rng, size):
    F = haar_frames(d, n, rng, size)
    return F @ dagger(F)


def _fsum_complex(arr):
    arr = np.asarray(arr)
    flat = arr.reshape(arr.shape[0], -1)
    out = np.array([complex(math.fsum(flat[:, k].real), math.fsum(flat[:, k].imag))
                    for k in range(flat.shape[1])])
    return out.reshape(arr.shape[1:])


def integrate(fn, d, n, samples, seed, batched=False):
    """Estimate the Haar average of ``fn`` over rank-n Hermitian projections.

    ``fn`` maps a point to a scalar or matrix; with ``batched=True`` it maps
    a stack (size, d, d) to a stack of values instead. The reported stderr
    is the delete-one jackknife of the mean, i.e. s / sqrt(N), with batch
    variances merged by the pairwise (Chan et al.) update.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sizes = _batch_sizes(samples)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    sums, m2s = [], []
    offset = 0
    for size, ss in zip(sizes, streams):
        rng = np.random.Generator(np.random.PCG64(ss))
        Q = haar_points(d, n, rng, size)
        if batched:
            vals = np.asarray(fn(Q), dtype=complex)
        else:
            vals = []
            for k in range(size):
                try:
                    vals.append(fn(Q[k]))
                except Exception as exc:
                    raise IntegrationError(f"integrand failed at sample {offset + k}: {exc}") from exc
            vals = np.asarray(vals, dtype=complex)
        bsum = _fsum_complex(vals)
        bmean = bsum / size
        sums.append(bsum)
        m2s.append(np.sum(np.abs(vals - bmean) ** 2, axis=0))
        offset += size
    sums = np.asarray(sums)
    sizes_arr = np.asarray(sizes, dtype=float).reshape((-1,) + (1,) * (sums.ndim - 1))
    mean = _fsum_complex(sums) / samples
    m2 = np.sum(m2s, axis=0) + np.sum(sizes_arr * np.abs(sums / sizes_arr - mean) ** 2, axis=0)
    if samples > 1:
        stderr = np.sqrt(m2 / (samples - 1) / samples)
    else:
        stderr = np.zeros_like(m2)
    if np.ndim(mean) == 0:
        return MCEstimate(complex(mean), float(stderr), samples, int(seed))
    return MCEstimate(mean, stderr, samples, int(seed))


def rank1_moment(M, d):
    """Closed form of the Haar integral of qMq over rank-1 projections."""
    return (M + np.trace(M) * np.eye(d)) / (d * (d + 1))


def lambda_exact(d, n):
    """Schur constant n(d - n)/(d^2 - 1) from the second Haar moment."""
    return n * (d - n) / (d * d - 1)


@dataclass(frozen=True)
class LambdaEstimate:
    value: float
    stderr: float
    integral: MCEstimate
    proportionality_residual: float


def schur_lambda(d, n, M, samples, seed):
    """Estimate lambda with lambda M = integral of (qM - qMq) dq, Tr M = 0."""
    M = np.asarray(M, dtype=complex)
    if abs(np.trace(M)) > 1e-12 * (1 + hs_norm(M)):
        raise ValueError("M must be traceless")
    if hs_norm(M) == 0:
        raise ValueError("M must be nonzero")
    nM2 = np.vdot(M, M).real

    def fn(Q):
        QM = Q @ M
        X = QM - QM @ Q
        ratio = np.einsum("ij,kij->k", M.conj(), X) / nM2
        return np.concatenate([X.reshape(len(Q), -1), ratio[:, None]], axis=1)

    est = integrate(fn, d, n, samples, seed, batched=True)
    integral = MCEstimate(est.mean[:-1].reshape(d, d), est.stderr[:-1].reshape(d, d), samples, int(seed))
    lam = est.mean[-1]
    resid = hs_norm(integral.mean - lam.real * M)
    return LambdaEstimate(float(lam.real), float(est.stderr[-1]), integral, resid)


def section_integral(q, p, A, samples, seed):
    """Monte-Carlo integral of A S(q, q') S(q', p) over q'."""
    A = np.asarray(A, dtype=complex)

    def fn(Q):
        X = Q @ A - Q @ A @ Q
        return p @ X - p @ X @ p

    return integrate(fn, q.shape[0], int(round(np.trace(q).real)), samples, seed, batched=True)


def idempotency_normalization(q, p, A, samples, seed):
    """Fit c with integral = c * A S(q, p) on one calibration pair."""
    est = section_integral(q, p, A, samples, seed)
    target = section_S(q, p, A)
    t2 = np.vdot(target, target).real
    c = (np.vdot(target, est.mean) / t2).real
    c_err = float(np.linalg.norm(est.stderr)) / math.sqrt(t2)
    return c, c_err


@dataclass(frozen=True)
class IdempotencyResult:
    residual: float
    sigma: float
    passed: bool


def idempotency_check(q, p, A, samples, seed, normalization, nsigma=3.0):
    """Compare integral / c with A S(q, p), errors propagated from both."""
    c, c_err = normalization
    est = section_integral(q, p, A, samples, seed)
    target = section_S(q, p, A)
    resid = hs_norm(est.mean / c - target)
    sigma = math.hypot(float(np.linalg.norm(est.stderr)) / abs(c), hs_norm(target) * c_err / abs(c))
    return IdempotencyResult(resid, sigma, resid <= nsigma * sigma + 1e-14)


def reference_lambda(d, n, samples, seed):
    """Empirical Schur constant from a fixed traceless reference matrix,
    drawn on a stream independent of ``seed``'s own samples."""
    ref = np.zeros((d, d), dtype=complex)
    ref[0, 1] = ref[1, 0] = 1.0
    ss = np.random.SeedSequence([int(seed), 0x5C4])
    return schur_lambda(d, n, ref, samples, int(ss.generate_state(1)[0]))


def psi_left_inverse(M, d, n, samples, seed, lam=None):
    """lambda^-1 times the integral of Psi_M; recovers traceless M.

    Without ``lam`` the constant is estimated by ``reference_lambda`` and
    its error is propagated into the returned stderr.
    """
    M = np.asarray(M, dtype=complex)
    if abs(np.trace(M)) > 1e-12 * (1 + hs_norm(M)):
        raise ValueError("M must be traceless")
    lam_err = 0.0
    if lam is None:
        ref = reference_lambda(d, n, samples, seed)
        lam, lam_err = ref.value, ref.stderr
    est = integrate(lambda Q: Q @ M - Q @ M @ Q, d, n, samples, seed, batched=True)
    mean = est.mean / lam
    stderr = np.hypot(np.asarray(est.stderr) / abs(lam), np.abs(mean) * lam_err / abs(lam))
    return MCEstimate(mean, stderr, samples, int(seed))
