"""Verification suites. Each suite draws from its own seeded stream and
returns a list of ``Check`` records carrying the identity being tested."""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import bundle, geometry, haar, poisson, quadric
from .geometry import apply_structure, j_op, jbold, metric_g, omega
from .linalg import commutator, conj_flow, dagger, ginibre, haar_unitary, hs_norm
from .variety import (
    ValidationError,
    base_projection,
    grassmann_tangent_basis,
    pushforward,
    random_fiber_vector,
    random_hermitian_point,
    random_hermitian_tangent,
    random_point,
    random_tangent,
    real_span_basis,
    tangent_basis,
)

SUITES = (
    "bundle",
    "compactification",
    "complex-structures",
    "d2-model",
    "haar",
    "hyperkahler",
    "identities",
    "poisson",
    "symplectic",
)


@dataclass
class Check:
    suite: str
    name: str
    anchor: str
    max_residual: float
    tolerance: float
    informational: bool = False
    seconds: float = 0.0
    witness: dict = field(default=None, repr=False, compare=False)

    @property
    def passed(self):
        return bool(self.max_residual <= self.tolerance)


class Worst:
    """Running maximum of a residual, remembering the worst inputs."""

    def __init__(self):
        self.value = 0.0
        self.witness = None

    def add(self, r, **inputs):
        r = float(r)
        if math.isnan(self.value):
            return
        if math.isnan(r) or r > self.value or self.witness is None:
            self.value = max(r, self.value) if not math.isnan(r) else r
            self.witness = inputs


class Recorder:
    def __init__(self, suite, tol_scale=1.0):
        self.suite = suite
        self.tol_scale = tol_scale
        self.checks = []
        self._t = time.perf_counter()

    def add(self, name, anchor, worst, tol, informational=False, scale_tol=True):
        if not isinstance(worst, Worst):
            w = Worst()
            w.add(worst)
            worst = w
        now = time.perf_counter()
        self.checks.append(Check(self.suite, name, anchor, worst.value,
                                 tol * self.tol_scale if scale_tol else tol,
                                 informational, now - self._t, worst.witness))
        self._t = now


def _shapes(cfg):
    return [(cfg.dim, cfg.rank)]


def _cycle(shapes, trials):
    return [shapes[k % len(shapes)] for k in range(trials)]


RANK1_SHAPES = [(2, 1), (3, 1)]


# --- identities -----------------------------------------------------------------

def identity_residuals(q, A, B, M):
    """Scaled residuals of the five tangent-space identities."""
    nq, na, nb, nm = hs_norm(q), hs_norm(A), hs_norm(B), hs_norm(M)
    X = commutator(q, M)
    JA, JB = j_op(q, A), j_op(q, B)
    return {
        "qAq=0": hs_norm(q @ A @ q) / (nq * nq * na),
        "[q,[q,A]]=A": hs_norm(commutator(q, commutator(q, A)) - A) / (nq * nq * na),
        "q[q,M]+[q,M]q=[q,M]": hs_norm(q @ X + X @ q - X) / (nq ** 3 * nm),
        "[q,AB]=0": hs_norm(commutator(q, A @ B)) / (nq * na * nb),
        "i[A,q]i[B,q]=AB, [JA,JB]=[A,B]": max(
            hs_norm(JA @ JB - A @ B), hs_norm(commutator(JA, JB) - commutator(A, B))
        ) / (nq * nq * na * nb),
    }


def suite_identities(cfg, rng, rec, shapes=None):
    worst = {}
    for d, n in _cycle(shapes or _shapes(cfg), cfg.trials):
        q = random_point(d, n, 1.0, rng)
        A, B = random_tangent(q, rng), random_tangent(q, rng)
        M = ginibre(d, rng)
        for k, r in identity_residuals(q, A, B, M).items():
            worst.setdefault(k, Worst()).add(r, q=q, A=A, B=B, M=M)
    for k, w in worst.items():
        rec.add(f"identity {k}", k, w, 1e-11)


# --- complex structures -----------------------------------------------------------

def suite_complex_structures(cfg, rng, rec, shapes=None):
    S = apply_structure
    names = ["J^2=-1", "K^2=+1", "Jhat^2=-1", "[J,Jhat]=0", "IJ=JI", "outputs tangent"]
    w = {k: Worst() for k in names + ["IJhat=JhatI"]}
    for d, n in _cycle(shapes or _shapes(cfg), cfg.trials):
        q = random_point(d, n, 1.0, rng)
        A = random_tangent(q, rng)
        na = hs_norm(A)
        JA, KA, HA = S("J", q, A), S("K", q, A), S("Jhat", q, A)
        w["J^2=-1"].add(hs_norm(S("J", q, JA) + A) / na, q=q, A=A)
        w["K^2=+1"].add(hs_norm(S("K", q, KA) - A) / na, q=q, A=A)
        w["Jhat^2=-1"].add(hs_norm(S("Jhat", q, HA) + A) / na, q=q, A=A)
        w["[J,Jhat]=0"].add(hs_norm(S("J", q, HA) - S("Jhat", q, JA)) / na, q=q, A=A)
        w["IJ=JI"].add(hs_norm(1j * JA - S("J", q, 1j * A)) / na, q=q, A=A)
        w["IJhat=JhatI"].add(hs_norm(1j * HA - S("Jhat", q, 1j * A)) / na, q=q, A=A)
        tang = max(hs_norm(q @ X + X @ q - X) / (1 + hs_norm(X)) for X in (JA, KA, HA))
        w["outputs tangent"].add(tang, q=q, A=A)
    for k in names:
        rec.add(k, k, w[k], 1e-10)
    # not implied for the chart structure; reported only
    rec.add("IJhat=JhatI", "IJhat=JhatI", w["IJhat=JhatI"], 1e-10, informational=True)

    wb = {"Jbold^2=-1": Worst(), "IJbold=-JboldI": Worst()}
    for d, n in _cycle(RANK1_SHAPES, cfg.trials):
        q = random_point(d, n, 1.0, rng)
        A = random_tangent(q, rng)
        na = hs_norm(A)
        JA = jbold(q, A)
        wb["Jbold^2=-1"].add(hs_norm(jbold(q, JA) + A) / na, q=q, A=A)
        wb["IJbold=-JboldI"].add(hs_norm(1j * JA + jbold(q, 1j * A)) / na, q=q, A=A)
    for k, v in wb.items():
        rec.add(k, k, v, 1e-10)


# --- symplectic -----------------------------------------------------------------

def suite_symplectic(cfg, rng, rec, shapes=None, triples=None):
    shapes = shapes or _shapes(cfg)
    wd, wj, wa = Worst(), Worst(), Worst()
    for d, n in _cycle(shapes, triples or max(1, cfg.trials // 2)):
        q = random_point(d, n, 1.0, rng)
        A, B, C = (random_tangent(q, rng) for _ in range(3))
        scale = 1 + hs_norm(A) * hs_norm(B) * hs_norm(C)
        wd.add(abs(geometry.exterior_derivative(geometry.OMEGA, q, A, B, C)) / scale, q=q, A=A, B=B, C=C)
        wj.add(abs(omega(q, j_op(q, A), j_op(q, B)) - omega(q, A, B))
               / (1 + hs_norm(q) * hs_norm(A) * hs_norm(B)), q=q, A=A, B=B)
        wa.add(abs(omega(q, A, B) + omega(q, B, A)), q=q, A=A, B=B)
    rec.add("dOmega=0", "dOmega=0", wd, 1e-6)
    rec.add("Omega(JA,JB)=Omega(A,B)", "Omega(JA,JB)=Omega(A,B)", wj, 1e-12)
    rec.add("Omega antisymmetric", "Omega(A,B)=-Omega(B,A)", wa, 1e-12)

    names = ["pi I-holomorphic", "pi J-holomorphic", "adjoint I-antiholomorphic",
             "adjoint J-holomorphic", "q->1-q J-antiholomorphic"]
    w = {k: Worst() for k in names}
    for d, n in _cycle(shapes, cfg.trials):
        q = random_point(d, n, 1.0, rng)
        A = random_tangent(q, rng)
        p = base_projection(q)
        na = hs_norm(A)
        PA = pushforward(q, A, p)
        # on Gr the complex structure is J_p: A -> i[A, p]
        w["pi I-holomorphic"].add(hs_norm(pushforward(q, 1j * A, p) - j_op(p, PA)) / na, q=q, A=A)
        w["pi J-holomorphic"].add(hs_norm(pushforward(q, j_op(q, A), p) - j_op(p, PA)) / na, q=q, A=A)
        w["adjoint I-antiholomorphic"].add(hs_norm(dagger(1j * A) + 1j * dagger(A)) / na, q=q, A=A)
        w["adjoint J-holomorphic"].add(hs_norm(dagger(j_op(q, A)) - j_op(dagger(q), dagger(A))) / na, q=q, A=A)
        comp = np.eye(d) - q
        w["q->1-q J-antiholomorphic"].add(hs_norm(-j_op(q, A) + j_op(comp, -A)) / na, q=q, A=A)
    for k in names:
        rec.add(k, k, w[k], 1e-11)

    wc, wu = Worst(), Worst()
    for d, n in _cycle(shapes, max(1, cfg.trials // 5)):
        p = random_hermitian_point(d, n, rng)
        basis = grassmann_tangent_basis(p)
        W = np.array([[omega(p, a, b).real for b in basis] for a in basis])
        s = np.linalg.svd(W, compute_uv=False)
        wc.add(s[0] / s[-1] if s[-1] > 0 else np.inf, p=p)
        U = haar_unitary(d, rng)
        A, B = random_hermitian_tangent(p, rng), random_hermitian_tangent(p, rng)
        Ud = dagger(U)
        wu.add(abs(omega(U @ p @ Ud, U @ A @ Ud, U @ B @ Ud) - omega(p, A, B))
               / (1 + hs_norm(A) * hs_norm(B)), p=p, A=A, B=B, U=U)
    rec.add("Fubini-Study form nondegenerate (condition number)", "Re Omega on Hermitian tangents", wc, 1e8,
            scale_tol=False)
    rec.add("Fubini-Study form U(d)-invariant", "Omega(UAU*,UBU*)=Omega(A,B)", wu, 1e-12)


# --- hyperkahler ------------------------------------------------------------------

def _g_I(q, A, B):
    return metric_g(q, 1j * A, B)


G_I = geometry.DifferentialForm(2, _g_I, "g(I.,.)")


def suite_hyperkahler(cfg, rng, rec, trials=None):
    trials = trials or cfg.trials
    w = {k: Worst() for k in ("g(JboldA,B)=Re Omega(A,B)", "Jbold^2=-1", "g symmetric",
                               "g(IA,IB)=g(A,B)", "g(I.,.)=c ddc tau")}
    wpd = Worst()
    for d, n in _cycle(RANK1_SHAPES, trials):
        q = random_point(d, n, 1.0, rng)
        A, B = random_tangent(q, rng), random_tangent(q, rng)
        s = 1 + hs_norm(A) * hs_norm(B)
        w["g(JboldA,B)=Re Omega(A,B)"].add(abs(metric_g(q, jbold(q, A), B) - omega(q, A, B).real) / s,
                                           q=q, A=A, B=B)
        w["Jbold^2=-1"].add(hs_norm(jbold(q, jbold(q, A)) + A) / hs_norm(A), q=q, A=A)
        w["g symmetric"].add(abs(metric_g(q, A, B) - metric_g(q, B, A)) / s, q=q, A=A, B=B)
        w["g(IA,IB)=g(A,B)"].add(abs(metric_g(q, 1j * A, 1j * B) - metric_g(q, A, B)) / s, q=q, A=A, B=B)
        w["g(I.,.)=c ddc tau"].add(abs(_g_I(q, A, B) - metric_g_kahler_ratio() * geometry.kahler_2form(q, A, B)) / s,
                                   q=q, A=A, B=B)
        basis = tangent_basis(q)
        G = np.array([[metric_g(q, a, b) for b in basis] for a in basis])
        ev = np.linalg.eigvalsh((G + G.T) / 2)
        wpd.add(ev[-1] / ev[0] if ev[0] > 0 else np.inf, q=q)
    for k, v in w.items():
        rec.add(k, k, v, 1e-10)
    rec.add("g positive definite (Gram condition number)", "g(A,A)>0", wpd, 1e12, scale_tol=False)

    wcl = Worst()
    for d, n in _cycle(RANK1_SHAPES, max(1, trials // 5)):
        q = random_point(d, n, 1.0, rng)
        A, B, C = (random_tangent(q, rng) for _ in range(3))
        wcl.add(abs(geometry.exterior_derivative(G_I, q, A, B, C)) / (1 + hs_norm(A) * hs_norm(B) * hs_norm(C)),
                q=q, A=A, B=B, C=C)
    rec.add("d g(I.,.)=0", "d g(I.,.)=0", wcl, 1e-6)


def metric_g_kahler_ratio():
    """g(IA, B) = c ddc tau(A, B) holds with c = -metric_scale() (exact algebra)."""
    return -geometry.metric_scale()


# --- d = 2 model ------------------------------------------------------------------

def suite_d2_model(cfg, rng, rec, trials=None, fixed=20):
    trials = trials or cfg.trials
    names = ["quadric equation", "quadric inverse", "cross product J = J", "cross product J^2=-1",
             "involution valid", "involution squares to id", "involution I-antiholomorphic",
             "Eguchi-Hanson potential"]
    w = {k: Worst() for k in names}
    for _ in range(trials):
        q = random_point(2, 1, 1.0, rng)
        A = random_tangent(q, rng)
        c = quadric.quadric_coords(q)
        t = quadric.tangent_coords(q, A)
        w["quadric equation"].add(quadric.quadric_residual(c), q=q)
        w["quadric inverse"].add(hs_norm(quadric.from_quadric(c) - q), q=q)
        w["cross product J = J"].add(
            np.linalg.norm(quadric.tangent_coords(q, j_op(q, A)) - quadric.cross_product_J(c, t))
            / np.linalg.norm(t), q=q, A=A)
        w["cross product J^2=-1"].add(
            np.linalg.norm(quadric.cross_product_J(c, quadric.cross_product_J(c, t)) + t) / np.linalg.norm(t),
            q=q, A=A)
        w["Eguchi-Hanson potential"].add(quadric.eguchi_hanson_residual(q), q=q)
        for kind in quadric.INVOLUTIONS:
            s = quadric.involution(kind, q)
            w["involution valid"].add(hs_norm(s @ s - s) + abs(np.trace(s) - 1), q=q)
            w["involution squares to id"].add(hs_norm(quadric.involution(kind, s) - q), q=q)
            w["involution I-antiholomorphic"].add(
                hs_norm(quadric.involution_differential(kind, q, 1j * A)
                        + 1j * quadric.involution_differential(kind, q, A)), q=q, A=A)
    anchors = {
        "quadric equation": "x^2+y^2+z^2=1",
        "quadric inverse": "(i(x-y),x+y,1-2z) inverts",
        "cross product J = J": "J(a,b,c)=(a,b,c)x(x,y,z)",
        "cross product J^2=-1": "J^2=-1 on the quadric",
        "involution valid": "sigma(q) idempotent, rank 1",
        "involution squares to id": "sigma^2=id",
        "involution I-antiholomorphic": "dsigma(iA)=-i dsigma(A)",
        "Eguchi-Hanson potential": "|q|=(1/sqrt2)sqrt(|x|^2+|y|^2+|z|^2+1)",
    }
    tols = {"quadric equation": 1e-12, "quadric inverse": 1e-12, "cross product J = J": 1e-11,
            "cross product J^2=-1": 1e-11, "involution valid": 1e-12, "involution squares to id": 1e-13,
            "involution I-antiholomorphic": 1e-13, "Eguchi-Hanson potential": 1e-12}
    for k in names:
        rec.add(k, anchors[k], w[k], tols[k])

    base = np.diag([1.0, 0.0]).astype(complex)
    rec.add("quadric coords of diag(1,0)", "diag(1,0) -> (0,0,-1)",
            float(np.linalg.norm(quadric.quadric_coords(base) - np.array([0, 0, -1]))), 1e-15)

    for kind in quadric.INVOLUTIONS:
        wn = Worst()
        for _ in range(fixed):
            q = quadric.fixed_point(kind, rng)
            B = quadric.fixed_tangent_basis(kind, q)
            if len(B) != 2:
                wn.add(np.inf, q=q)
                continue
            W = np.array([[omega(q, a, b) for b in B] for a in B])
            det = abs(np.linalg.det(W))
            wn.add(1.0 / math.sqrt(det) if det > 0 else np.inf, q=q)
        rec.add(f"{kind} fixed set symplectic (1/sqrt|det|)", f"{kind}: Omega nondegenerate on fixed tangents",
                wn, 1e6, scale_tol=False)

    we = Worst()
    for _ in range(max(1, trials // 20)):
        p = random_hermitian_point(2, 1, rng)
        f = random_fiber_vector(p, rng)
        for t in (0.0, 0.5, 2.0, 10.0, 100.0):
            q = p + t * f
            we.add(quadric.eguchi_hanson_residual(q) / (1 + t * hs_norm(f)), p=p, f=f)
    rec.add("Eguchi-Hanson potential along fiber rays", "tau = potential under fiber scaling", we, 1e-12)


# --- bundle ----------------------------------------------------------------------

def suite_bundle(cfg, rng, rec, shapes=None):
    names = ["pushforward defining equation", "pushforward Hermitian tangent", "pushforward finite difference",
             "H splits pi_*", "curvature (0,2)-part", "nabla_S = H at q+A", "pi_*((HJA)*)=i[A,pi(q*)]",
             "section Hermitian", "S(q,q)=id", "compactify(q*)=swap", "Psi_M fiber vector",
             "Psi-dagger idempotent", "Psi-dagger rank n(d-n)", "connection splitting dimension"]
    w = {k: Worst() for k in names}
    anchors = {
        "pushforward defining equation": "q pi_*(A) + A pi(q) = pi_*(A)",
        "pushforward Hermitian tangent": "pi_*(A) tangent to Gr",
        "pushforward finite difference": "d/dt pi(q(t)) = pi_*(A)",
        "H splits pi_*": "pi_* H(A) = A",
        "curvature (0,2)-part": "F(A+iJA,B+iJB)=0",
        "nabla_S = H at q+A": "B+[B,A] = H(B)",
        "pi_*((HJA)*)=i[A,pi(q*)]": "pi_*((HJA)*)=i[A,pi(q*)]",
        "section Hermitian": "Tr((AS(q,p))*B)=Tr(A*(BS(p,q)))",
        "S(q,q)=id": "S(q,q)=id",
        "compactify(q*)=swap": "q* -> (pi(q*),pi(q))",
        "Psi_M fiber vector": "qM-qMq in the fiber",
        "Psi-dagger idempotent": "Psi-dagger_q idempotent",
        "Psi-dagger rank n(d-n)": "rank Psi-dagger_q = n(d-n)",
        "connection splitting dimension": "T = H(T Gr) + fiber",
    }
    tols = {"pushforward finite difference": 1e-6, "curvature (0,2)-part": 1e-11, "nabla_S = H at q+A": 1e-11,
            "section Hermitian": 1e-12, "S(q,q)=id": 1e-12, "compactify(q*)=swap": 0.0,
            "Psi-dagger rank n(d-n)": 0.0, "connection splitting dimension": 0.0,
            "Psi_M fiber vector": 1e-12, "Psi-dagger idempotent": 1e-12}
    for k, (d, n) in enumerate(_cycle(shapes or _shapes(cfg), cfg.trials)):
        q = random_point(d, n, 1.0, rng)
        p = base_projection(q)
        A = random_tangent(q, rng)
        X = pushforward(q, A, p)
        na = hs_norm(A)
        w["pushforward defining equation"].add(hs_norm(q @ X + A @ p - X) / (na * hs_norm(q)), q=q, A=A)
        w["pushforward Hermitian tangent"].add(
            (hs_norm(X - dagger(X)) + hs_norm(p @ X + X @ p - X)) / (1 + hs_norm(X)), q=q, A=A)
        if k % 5 == 0:
            N = commutator(q, A)
            h = 1e-4 / (1 + hs_norm(N))
            fd = (base_projection(conj_flow(q, N, h)) - base_projection(conj_flow(q, N, -h))) / (2 * h)
            w["pushforward finite difference"].add(hs_norm(fd - X) / (1 + hs_norm(X)), q=q, A=A)

        Ah = random_hermitian_tangent(p, rng)
        w["H splits pi_*"].add(hs_norm(pushforward(q, bundle.horizontal_lift(q, Ah, p), p) - Ah) / hs_norm(Ah),
                               q=q, A=Ah)
        HJA = bundle.horizontal_lift(q, j_op(p, Ah), p)
        w["pi_*((HJA)*)=i[A,pi(q*)]"].add(
            hs_norm(pushforward(dagger(q), dagger(HJA)) - 1j * commutator(Ah, base_projection(dagger(q))))
            / hs_norm(Ah), q=q, A=Ah)

        Ta, Tb = random_tangent(p, rng), random_tangent(p, rng)
        C = random_fiber_vector(p, rng)
        F = bundle.curvature_F(p, Ta + 1j * j_op(p, Ta), Tb + 1j * j_op(p, Tb), C)
        w["curvature (0,2)-part"].add(hs_norm(F) / (hs_norm(Ta) * hs_norm(Tb) * hs_norm(C)), p=p, A=Ta, B=Tb, C=C)

        f = q - p
        w["nabla_S = H at q+A"].add(
            hs_norm(bundle.nabla_S(p, f, Ah) - bundle.horizontal_lift(q, Ah, p)) / (hs_norm(Ah) * (1 + hs_norm(f))),
            p=p, A=f, B=Ah)

        p2 = random_hermitian_point(d, n, rng)
        fa = random_fiber_vector(p, rng)
        fb = random_fiber_vector(p2, rng)
        lhs = np.trace(dagger(bundle.section_S(p, p2, fa)) @ fb)
        rhs = np.trace(dagger(fa) @ bundle.section_S(p2, p, fb))
        w["section Hermitian"].add(abs(lhs - rhs) / (hs_norm(fa) * hs_norm(fb)), p=p, q=p2, A=fa, B=fb)
        w["S(q,q)=id"].add(hs_norm(bundle.section_S(p, p, fa) - fa) / hs_norm(fa), p=p, A=fa)

        c1, c2 = bundle.compactify(q)
        s1, s2 = bundle.compactify(dagger(q))
        w["compactify(q*)=swap"].add(max(hs_norm(s1 - c2), hs_norm(s2 - c1)), q=q)

        M = ginibre(d, rng)
        Y = bundle.psi(M)(q)
        w["Psi_M fiber vector"].add((hs_norm(q @ Y - Y) + hs_norm(Y @ q)) / (1 + hs_norm(M) * hs_norm(q) ** 2),
                                    q=q, M=M)
        if k % 5 == 0:
            P = bundle.psi_dagger(p)
            w["Psi-dagger idempotent"].add(np.linalg.norm(P @ P - P), p=p)
            sv = np.linalg.svd(P, compute_uv=False)
            w["Psi-dagger rank n(d-n)"].add(abs(int(np.sum(sv > 1e-8)) - n * (d - n)), p=p)
            hor = [bundle.horizontal_lift(q, E, p) for E in grassmann_tangent_basis(p)]
            fib = []
            for E in tangent_basis(p):
                Z = p @ E @ (np.eye(d) - p)
                fib.extend([Z, 1j * Z])
            dh = len(real_span_basis(hor, d))
            df = len(real_span_basis(fib, d))
            dt = len(real_span_basis(hor + fib, d))
            w["connection splitting dimension"].add(
                abs(dh - 2 * n * (d - n)) + abs(df - 2 * n * (d - n)) + abs(dt - 4 * n * (d - n)), q=q)
    for k in names:
        rec.add(k, anchors[k], w[k], tols.get(k, 1e-10))


# --- compactification ------------------------------------------------------------------

def _boundary_pair(d, rng):
    """Rank-1 (p, q) with pq = 0 and a tangent to {pq = 0}."""
    U = haar_unitary(d, rng)
    v, u = U[:, :1], U[:, 1:2]
    p, q = v @ dagger(v), u @ dagger(u)
    X = ginibre(d, rng)
    X = (X - dagger(X)) / 2
    Y = ginibre(d, rng)
    Y = (np.eye(d) - p) @ ((Y - dagger(Y)) / 2) @ (np.eye(d) - p)
    return p, q, commutator(X, p), commutator(X + Y, q)


def suite_compactification(cfg, rng, rec, shapes=None, roundtrips=200, pairs=1000, t_large=1e6):
    shapes = shapes or _shapes(cfg)
    wr, wj = Worst(), Worst()
    for d, n in _cycle(shapes, roundtrips):
        q = random_point(d, n, 1.0, rng)
        p1, p2 = bundle.compactify(q)
        wr.add(hs_norm(bundle.decompactify(p1, p2) - q) / hs_norm(q), q=q)
        A = random_tangent(q, rng)
        A1, A2 = bundle.chart_push(q, A, (p1, p2))
        B1, B2 = bundle.jhat_pair(p1, p2, A1, A2)
        C1, C2 = bundle.jhat_pair(p1, p2, B1, B2)
        wj.add((hs_norm(C1 + A1) + hs_norm(C2 + A2)) / (hs_norm(A1) + hs_norm(A2)), q=q, A=A)
    rec.add("decompactify o compactify = id", "q -> (pi(q),pi(q*)) invertible on its image", wr, 1e-10)
    rec.add("extended Jhat^2=-1 on the image", "(J_pA,-J_qB+J_qA-J_q^2J_pA)^2=-1", wj, 1e-10)

    wh = Worst()
    for d, n in shapes:
        p = random_hermitian_point(d, n, rng)
        c1, c2 = bundle.compactify(p)
        wh.add(max(hs_norm(c1 - p), hs_norm(c2 - p), hs_norm(bundle.decompactify(p, p) - p)), p=p)
    rec.add("zero section is the diagonal", "Hermitian q -> (q,q)", wh, 1e-12)

    bad = 0
    for _ in range(10):
        p = random_hermitian_point(2, 1, rng)
        try:
            bundle.decompactify(p, np.eye(2) - p)
            bad += 1
        except bundle.TransversalityError:
            pass
    rec.add("d=2 complement pair rejected (count accepted)", "(q,1-q) not in the image", bad, 0, scale_tol=False)

    d = shapes[0][0]
    mismatch = 0
    for k in range(pairs):
        p = random_hermitian_point(d, 1, rng)
        if k % 2:
            q = random_hermitian_point(d, 1, rng)
        else:
            p, q, _, _ = _boundary_pair(d, rng)
        mismatch += bundle.rank1_image_test(p, q) != bundle.is_transverse(p, q)
    rec.add("rank-1 image test = direct-sum test (mismatches)", "image = {pq != 0}", mismatch, 0, scale_tol=False)

    wb, wc = Worst(), Worst()
    for _ in range(max(1, cfg.trials // 5)):
        p, q, A, B = _boundary_pair(d, rng)
        B1, B2 = bundle.jhat_pair(p, q, A, B)
        C1, C2 = bundle.jhat_pair(p, q, B1, B2)
        wb.add((hs_norm(C1 + A) + hs_norm(C2 + B)) / (hs_norm(A) + hs_norm(B)), p=p, q=q, A=A, B=B)
        wc.add(hs_norm(p @ B2 + B1 @ q) / (1 + hs_norm(A) + hs_norm(B)), p=p, q=q, A=A, B=B)
    rec.add("extended Jhat^2=-1 on {pq=0}", "(J_pA,-J_qB+J_qA-J_q^2J_pA)^2=-1", wb, 1e-10)
    rec.add("{pq=0} preserved by (J,-J)", "-p[B,q]+[A,p]q=0", wc, 1e-11)

    names = ["t=0 gives q", "f(q,tA) rank-1 projection", "f'(0)=A", "limit q = 0",
             "limit invariant under (x+yJ)A", f"limit reached at t={t_large:g}", "O(1/t) approach"]
    w = {k: Worst() for k in names}
    for _ in range(max(1, cfg.trials // 2)):
        q = random_hermitian_point(d, 1, rng)
        A = random_hermitian_tangent(q, rng)
        f = bundle.tangent_compactify
        lim = f(q, A, np.inf)
        w["t=0 gives q"].add(hs_norm(f(q, A, 0.0) - q), q=q, A=A)
        for t in (0.3, 1.0, 7.0, 1e3):
            x = f(q, A, t)
            w["f(q,tA) rank-1 projection"].add(hs_norm(x @ x - x) + hs_norm(x - dagger(x)) + abs(np.trace(x) - 1),
                                                q=q, A=A)
        h = 1e-5
        w["f'(0)=A"].add(hs_norm((f(q, A, h) - f(q, A, -h)) / (2 * h) - A) / hs_norm(A), q=q, A=A)
        w["limit q = 0"].add(hs_norm(lim @ q), q=q, A=A)
        x, y = rng.standard_normal(2)
        A2 = x * A + y * j_op(q, A)
        w["limit invariant under (x+yJ)A"].add(hs_norm(f(q, A2, np.inf) - lim), q=q, A=A)
        e1 = hs_norm(f(q, A, t_large) - lim)
        w[f"limit reached at t={t_large:g}"].add(e1, q=q, A=A)
        e2 = hs_norm(f(q, A, 10 * t_large) - lim)
        w["O(1/t) approach"].add(abs(10 * e2 / e1 - 1), q=q, A=A)
    tols = {"t=0 gives q": 1e-15, "f(q,tA) rank-1 projection": 1e-12, "f'(0)=A": 1e-6, "limit q = 0": 1e-12,
            "limit invariant under (x+yJ)A": 1e-10, f"limit reached at t={t_large:g}": 1e-8,
            "O(1/t) approach": 1e-3}
    anchors = {"t=0 gives q": "f(q,0)=q", "f(q,tA) rank-1 projection": "(q+A+AqA)/(1+Tr(qA^2))",
               "f'(0)=A": "d/dt f(q,tA)|0 = A", "limit q = 0": "AqA/Tr(qA^2) q = 0",
               "limit invariant under (x+yJ)A": "limit invariant under A -> (x+yJ)A",
               f"limit reached at t={t_large:g}": "f(q,tA) -> AqA/Tr(qA^2)",
               "O(1/t) approach": "|f(q,tA) - limit| ~ 1/t"}
    for k in names:
        rec.add(k, anchors[k], w[k], tols[k])


# --- poisson -----------------------------------------------------------------------

def suite_poisson(cfg, rng, rec, shapes=None, points=20):
    shapes = shapes or _shapes(cfg)
    names = ["{M^,N^}=[M,N]^", "commuting pair bracket", "star commutator = bracket",
             "taut identity", "hat equivariant", "hat zero on zero section", "flow commutator",
             "canonical form nondegenerate (condition number)"]
    w = {k: Worst() for k in names}
    for d, n in _cycle(shapes, points):
        q = random_point(d, n, 1.0, rng)
        M, N = ginibre(d, rng), ginibre(d, rng)
        scale = 1 + hs_norm(M) * hs_norm(N) * hs_norm(q) ** 2
        br = poisson.poisson_bracket(M, N, q)
        target = poisson.hat(commutator(M, N), q)
        w["{M^,N^}=[M,N]^"].add(abs(br - target) / scale, q=q, M=M, N=N)
        Mc = M @ M + 2 * M
        w["commuting pair bracket"].add(abs(poisson.poisson_bracket(M, Mc, q))
                                        / (1 + hs_norm(M) * hs_norm(Mc) * hs_norm(q) ** 2), q=q, M=M, N=Mc)
        ker = [np.eye(d) / math.sqrt(d)]
        Mp, Np = poisson.project_out_kernel(M, ker), poisson.project_out_kernel(N, ker)
        w["star commutator = bracket"].add(poisson.star_commutator_check(Mp, Np, q) / scale, q=q, M=Mp, N=Np)

        A = random_tangent(q, rng)
        p = base_projection(q)
        w["taut identity"].add(abs(np.trace(q @ pushforward(q, A, p)) + np.trace(A @ p)) / (hs_norm(A) * hs_norm(q)),
                               q=q, A=A)
        U = haar_unitary(d, rng)
        Ud = dagger(U)
        w["hat equivariant"].add(abs(poisson.hat(U @ M @ Ud, U @ q @ Ud) - poisson.hat(M, q)) / scale, q=q, M=M, U=U)
        w["hat zero on zero section"].add(abs(poisson.hat(M, p)) / (1 + hs_norm(M)), p=p, M=M)

        t = 1e-3
        x = q
        for G, s in ((M, t), (N, t), (M, -t), (N, -t)):
            x = conj_flow(x, G, s)
        lie = poisson.vector_field_X(commutator(M, N), q)
        w["flow commutator"].add(hs_norm((x - q) / t ** 2 - lie) / (1 + hs_norm(lie)), q=q, M=M, N=N)

        W, _ = poisson.symplectic_matrix(q)
        s = np.linalg.svd(W, compute_uv=False)
        w["canonical form nondegenerate (condition number)"].add(s[0] / s[-1] if s[-1] > 0 else np.inf, q=q)
    anchors = {"{M^,N^}=[M,N]^": "{M^,N^}=[M,N]^", "commuting pair bracket": "[M,N]=0 => {M^,N^}=0",
               "star commutator = bracket": "M^*N^-N^*M^={M^,N^}", "taut identity": "Tr(q pi_*(A))=-Tr(A pi(q))",
               "hat equivariant": "hat(UMU*,UqU*)=hat(M,q)", "hat zero on zero section": "hat(M,p)=0 for p=p*",
               "flow commutator": "[X_M,X_N]=X_[M,N]",
               "canonical form nondegenerate (condition number)": "d(Re taut) nondegenerate"}
    tols = {"{M^,N^}=[M,N]^": 1e-5, "commuting pair bracket": 1e-6, "star commutator = bracket": 1e-5,
            "taut identity": 1e-11, "hat equivariant": 1e-12, "hat zero on zero section": 1e-12,
            "flow commutator": 1e-2, "canonical form nondegenerate (condition number)": 1e8}
    for k in names:
        rec.add(k, anchors[k], w[k], tols[k], scale_tol="condition" not in k)

    for d, n in shapes:
        kdim = len(poisson.hat_kernel(d, n, seed=int(rng.integers(2**31))))
        rec.add(f"hat kernel dimension (d={d}, n={n}) minus 1", "kernel of hat = scalars", abs(kdim - 1), 0,
                informational=(d, n) != (2, 1), scale_tol=False)


# --- haar ------------------------------------------------------------------------

def suite_haar(cfg, rng, rec, shapes=None, pairs=10):
    d, n = (shapes or _shapes(cfg))[0]
    N = cfg.samples

    def seed():
        return int(rng.integers(2**63))

    est = haar.integrate(lambda Q: Q, d, n, N, seed(), batched=True)
    rec.add("integral of q (sigmas)", "int q dq = (n/d) Id", est.sigmas(n / d * np.eye(d)), 3.0, scale_tol=False)
    tr = haar.integrate(lambda Q: np.trace(Q, axis1=1, axis2=2), d, n, N, seed(), batched=True)
    rec.add("integral of Tr q", "int Tr q dq = n", abs(tr.mean - n), 1e-12)

    for dd, nn in sorted({(2, 1), (3, 1), (d, n)}):
        M = _traceless(dd, rng)
        lam = haar.schur_lambda(dd, nn, M, N, seed())
        oracle = haar.lambda_exact(dd, nn)
        rec.add(f"lambda(d={dd},n={nn}) vs oracle (sigmas)", "lambda M = int (qM-qMq) dq",
                abs(lam.value - oracle) / lam.stderr, 3.0, scale_tol=False)
        if (dd, nn) == (d, n):
            prop = lam.integral.sigmas(lam.value * M)
            rec.add("Schur proportionality (sigmas)", "int (qM-qMq) dq proportional to M", prop, 3.0,
                    scale_tol=False)
            lam2 = haar.schur_lambda(d, n, _traceless(d, rng), N, seed())
            rec.add("lambda independent of M (sigmas)", "lambda independent of M",
                    abs(lam.value - lam2.value) / math.hypot(lam.stderr, lam2.stderr), 3.0, scale_tol=False)

    q0 = random_hermitian_point(d, n, rng)
    p0 = random_hermitian_point(d, n, rng)
    norm = haar.idempotency_normalization(q0, p0, random_fiber_vector(q0, rng), N, seed())
    rec.add("idempotency normalization vs lambda (informational)", "S(q,p) = int S(q,q')S(q',p) dq'",
            abs(norm[0] - haar.lambda_exact(d, n)) / norm[1], 3.0, informational=True, scale_tol=False)
    wi = Worst()
    for k in range(pairs):
        q = random_hermitian_point(d, n, rng)
        p = q if k == 0 else random_hermitian_point(d, n, rng)
        A = random_fiber_vector(q, rng)
        res = haar.idempotency_check(q, p, A, N, seed(), norm)
        wi.add(res.residual / res.sigma if res.sigma > 0 else (0.0 if res.residual < 1e-14 else np.inf),
               q=q, p=p, A=A)
    rec.add("section idempotency (sigmas)", "S(q,p) = int S(q,q')S(q',p) dq'", wi, 3.0, scale_tol=False)

    M = _traceless(d, rng)
    rec_est = haar.psi_left_inverse(M, d, n, N, seed())
    rec.add("Psi left inverse (sigmas)", "lambda^-1 int Psi_M(q) dq = M", rec_est.sigmas(M), 3.0, scale_tol=False)

    U = haar_unitary(d, rng)
    Ud = dagger(U)
    s = seed()
    plain = haar.integrate(lambda Q: Q @ M @ Q, d, n, N, s, batched=True)
    conj = haar.integrate(lambda Q: U @ Q @ Ud @ M @ U @ Q @ Ud, d, n, N, seed(), batched=True)
    combined = math.hypot(float(np.linalg.norm(plain.stderr)), float(np.linalg.norm(conj.stderr)))
    rec.add("unitary invariance (sigmas)", "int f(UqU*) dq = int f(q) dq",
            float(np.linalg.norm(plain.mean - conj.mean)) / combined, 3.0, scale_tol=False)


def _traceless(d, rng):
    M = ginibre(d, rng)
    return M - np.trace(M) / d * np.eye(d)


SUITE_FUNCS = {
    "bundle": suite_bundle,
    "compactification": suite_compactification,
    "complex-structures": suite_complex_structures,
    "d2-model": suite_d2_model,
    "haar": suite_haar,
    "hyperkahler": suite_hyperkahler,
    "identities": suite_identities,
    "poisson": suite_poisson,
    "symplectic": suite_symplectic,
}


def suite_rng(seed, suite):
    return np.random.default_rng(np.random.SeedSequence([int(seed), SUITES.index(suite)]))


def run_one(cfg, suite, **kwargs):
    """Run a single suite; a suite that raises yields one failing record."""
    rng = suite_rng(cfg.seed, suite)
    rec = Recorder(suite, cfg.tol_scale)
    try:
        SUITE_FUNCS[suite](cfg, rng, rec, **kwargs)
    except (ValidationError, ValueError, np.linalg.LinAlgError) as exc:
        rec.add(f"suite raised {type(exc).__name__}: {exc}", "-", np.inf, 0.0, scale_tol=False)
    return rec.checks
