"""Pointwise pseudo-Riemannian curvature machinery.

Everything is driven by order-3 jets of the metric components, so third
metric derivatives (needed by the covariant derivative of the Schouten
tensor) come out of the same evaluation.  The batched :class:`Frame`
computes all curvature data at an array of sample points at once; the
public single-point operations are thin wrappers returning
:class:`TensorValue` records.

Curvature sign conventions are frozen in :mod:`wefe.constants`: the
valence-4 curvature is R(X,Y,Z,U) = g((nabla_[X,Y] - [nabla_X,
nabla_Y])Z, U), the Ricci tensor is the metric contraction normalized
so a round sphere has positive scalar curvature, and the Weyl tensor
W = R - P (kn) g is totally trace-free with the standard
Kulkarni-Nomizu product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets as J
from .constants import RICCI_SIGN, RIEMANN_SIGN
from .errors import (DimensionError, DomainError, SignatureMismatch,
                     SingularMetric)

_DET_TOL = 1e-12
_FRAME_CACHE_SIZE = 16


@dataclass(frozen=True)
class MetricMeasureSpec:
    """A chart metric with positive density: dimension, symmetric
    component expressions g_ij, density expression h, domain box,
    signature tag, and optional expected-property flags."""

    name: str
    n: int
    g: tuple  # tuple of tuples of Expr, full symmetric n x n
    h: object  # Expr
    box: tuple  # ((lo, hi), ...) per coordinate
    signature: str = "lorentzian"
    coords: tuple = ()
    flags: dict = field(default_factory=dict, hash=False, compare=False)
    citation: str = ""

    def __post_init__(self):
        if not 3 <= self.n <= 6:
            raise DimensionError(f"dimension {self.n} outside 3..6")
        if self.signature not in ("lorentzian", "riemannian"):
            raise ValueError(f"unknown signature tag {self.signature!r}")
        if len(self.g) != self.n or any(len(r) != self.n for r in self.g):
            raise ValueError("metric component array must be n x n")
        if len(self.box) != self.n:
            raise ValueError("domain box must have one interval per coordinate")
        if not self.coords:
            object.__setattr__(
                self, "coords", tuple(J.default_coord_names(self.n)))

    def contains(self, p):
        return all(lo < x < hi for x, (lo, hi) in zip(p, self.box))


def make_spec(name, n, g_upper, h, box, signature="lorentzian",
              coords=(), flags=None, citation=""):
    """Build a spec from the upper-triangular component map
    {(i, j): Expr, i <= j}; missing entries are zero."""
    zero = J.const(0)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            key = (i, j) if i <= j else (j, i)
            row.append(g_upper.get(key, zero))
        rows.append(tuple(row))
    return MetricMeasureSpec(name=name, n=n, g=tuple(rows), h=h,
                             box=tuple(tuple(b) for b in box),
                             signature=signature, coords=tuple(coords),
                             flags=dict(flags or {}), citation=citation)


@dataclass
class TensorValue:
    """Dense component array of fixed valence at a point; indices are
    covariant unless stated otherwise by the producing operation."""

    valence: int
    components: np.ndarray
    point: np.ndarray

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=float)
        self.point = np.asarray(self.point, dtype=float)
        if self.components.ndim != self.valence:
            raise ValueError("component array rank must equal valence")

    def max_norm(self):
        return float(np.max(np.abs(self.components))) if self.components.size \
            else 0.0


# -- the batched curvature frame ----------------------------------------

class Frame:
    """All curvature data of a spec at an array of points, computed once.

    Value arrays carry the point axis first: g0 has shape (m, n, n),
    d_ric has shape (m, a, i, j) meaning (d_a applied to ricci_ij before
    the Christoffel correction), cov_ric has the derivative slot first
    per the (nabla_a T)(b, c) reading."""

    def __init__(self, spec, pts):
        self.spec = spec
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[1] != spec.n:
            raise DomainError("point dimension does not match chart")
        self.pts = pts
        self.m = pts.shape[0]
        self.n = spec.n
        self.ctx = J.jet_context(spec.n)
        self._compute()

    def _compute(self):
        spec, ctx, n, m = self.spec, self.ctx, self.n, self.m
        pts = self.pts
        d1_idx = [ctx.index_of[_unit(n, i)] for i in range(n)]

        def values(a):
            """(comp..., m, N) jets -> (m, comp...) values."""
            return np.moveaxis(a[..., 0], -1, 0)

        def derivs1(a):
            """-> (m, axis, comp...) first-derivative values."""
            d = a[..., d1_idx]            # (comp..., m, axis)
            d = np.moveaxis(d, -1, 0)     # (axis, comp..., m)
            d = np.moveaxis(d, -1, 0)     # (m, axis, comp...)
            return d

        # metric jets
        gJ = np.empty((n, n, m, ctx.N))
        for i in range(n):
            for j in range(n):
                gJ[i, j] = J.eval_jets(spec.g[i][j], pts, ctx)
        self.g0 = values(gJ)

        det = np.linalg.det(self.g0)
        if np.any(np.abs(det) < _DET_TOL) or not np.all(np.isfinite(det)):
            raise SingularMetric(
                f"{spec.name}: |det g| < {_DET_TOL} at a sample point")
        self.detg = det
        eig = np.linalg.eigvalsh(self.g0)
        neg = np.sum(eig < 0.0, axis=1)
        want = 1 if spec.signature == "lorentzian" else 0
        if np.any(neg != want):
            raise SignatureMismatch(
                f"{spec.name}: eigenvalue signs do not match "
                f"{spec.signature} tag")

        # jet-ring metric inverse by Newton iteration from the numeric
        # inverse; two steps are exact at truncation order 3
        ginv0 = np.linalg.inv(self.g0)
        X = np.zeros_like(gJ)
        X[..., 0] = np.moveaxis(ginv0, 0, -1)
        eye = np.zeros_like(gJ)
        for i in range(n):
            eye[i, i, :, 0] = 1.0
        for _ in range(2):
            AX = _jmm(ctx, gJ, X)
            X = _jmm(ctx, X, 2.0 * eye - AX)
        ginvJ = X
        self.ginv0 = ginv0

        dgJ = np.empty((n, n, n, m, ctx.N))  # [a, i, j] = d_a g_ij
        for a in range(n):
            dgJ[a] = ctx.deriv(gJ, a)
        self.dg = values(dgJ)

        # Christoffel symbols: lowered and raised, as jets
        lowJ = 0.5 * (np.transpose(dgJ, (2, 0, 1, 3, 4))
                      + np.transpose(dgJ, (2, 1, 0, 3, 4))
                      - dgJ)  # low[k, i, j] = G_kij
        upJ = ctx.mul(ginvJ[:, :, None, None], lowJ[None]).sum(axis=1)
        self.gamma_low0 = values(lowJ)
        self.gamma0 = values(upJ)     # (m, k, i, j)
        dupJ = np.empty((n,) + upJ.shape)
        for a in range(n):
            dupJ[a] = ctx.deriv(upJ, a)
        self.dgamma = values(dupJ)    # (m, a, k, i, j)
        # second derivatives of Gamma from the degree-2 jet slots
        self.d2gamma = _second_derivs(ctx, upJ)  # (m, a, b, k, i, j)

        # curvature R~(i,j,k,l), Christoffel form, valid to jet order 1
        rmJ = np.zeros((n, n, n, n, m, ctx.N))
        for i in range(n):
            for j in range(i + 1, n):
                dE = dupJ[i, :, j, :] - dupJ[j, :, i, :]   # (mc, k, m, N)
                t1 = ctx.mul(gJ[:, :, None], dE[None]).sum(axis=1)  # (l, k)
                t2 = ctx.mul(lowJ[:, i, :, None], upJ[None, :, j, :]).sum(axis=1)
                t3 = ctx.mul(lowJ[:, j, :, None], upJ[None, :, i, :]).sum(axis=1)
                comp = t1 + t2 - t3                        # (l, k, m, N)
                rmJ[i, j] = np.transpose(comp, (1, 0, 2, 3))
                rmJ[j, i] = -rmJ[i, j]
        self.rm_std0 = values(rmJ)               # (m, i, j, k, l)
        self.riemann0 = RIEMANN_SIGN * self.rm_std0

        # Ricci jets (valid to order 1) and scalar curvature
        ricJ = RICCI_SIGN * ctx.mul(
            ginvJ[:, :, None, None],
            np.transpose(rmJ, (0, 3, 1, 2, 4, 5))).sum(axis=(0, 1))
        tauJ = ctx.mul(ginvJ, ricJ).sum(axis=(0, 1))
        self.ric0 = values(ricJ)                 # (m, i, j)
        self.d_ric = derivs1(ricJ)               # (m, a, i, j)
        self.tau0 = values(tauJ)                 # (m,)
        self.d_tau = derivs1(tauJ)               # (m, a)

        # density
        hJ = J.eval_jets(spec.h, pts, ctx)
        if np.any(hJ[..., 0] <= 0.0):
            raise DomainError(f"{spec.name}: density not positive on box")
        self.h0 = values(hJ)
        dhJ = np.empty((n, m, ctx.N))
        for a in range(n):
            dhJ[a] = ctx.deriv(hJ, a)
        self.dh = values(dhJ)                    # (m, a)
        hesJ = np.empty((n, n, m, ctx.N))
        for i in range(n):
            for j in range(n):
                hesJ[i, j] = ctx.deriv(dhJ[i], j)
        hesJ -= ctx.mul(upJ, dhJ[:, None, None]).sum(axis=0)
        self.hes0 = values(hesJ)                 # (m, i, j)
        self.lap0 = np.einsum("mij,mij->m", ginv0, self.hes0)
        self.gradh = np.einsum("mij,mj->mi", ginv0, self.dh)
        self.gradh_sq = np.einsum("mi,mi->m", self.dh, self.gradh)

        # Schouten tensor jets and its covariant derivative values
        nn = float(n)
        jJ = tauJ / (2.0 * (nn - 1.0))           # scalar J jets
        pJ = (ricJ - ctx.mul(jJ[None, None], gJ)) / (nn - 2.0)
        self.schouten0 = values(pJ)
        self.scalar_j0 = values(jJ)
        self.cov_schouten = _cov2(values(pJ), derivs1(pJ), self.gamma0)
        self.cov_ric = _cov2(self.ric0, self.d_ric, self.gamma0)

        # Cotton tensor dP(X,Y,Z), stored [x, y, z]
        cp = self.cov_schouten                   # (m, a, b, c)
        self.cotton0 = (nn - 2.0) * (np.einsum("myxz->mxyz", cp)
                                     - np.einsum("mzxy->mxyz", cp))
        cr = self.cov_ric
        self.div_riemann0 = (np.einsum("myxz->mxyz", cr)
                             - np.einsum("mzxy->mxyz", cr))

        # Weyl
        if n >= 4:
            self.weyl0 = self.riemann0 - kn_product(self.schouten0, self.g0)
        else:
            self.weyl0 = None


def _unit(n, i):
    a = [0] * n
    a[i] = 1
    return tuple(a)


def _jmm(ctx, A, B):
    """Jet matrix product: A, B shaped (n, n, m, N)."""
    return ctx.mul(A[:, :, None], B[None]).sum(axis=1)


def _second_derivs(ctx, a):
    """Degree-2 derivative values of jets (comp..., m, N) as
    (m, axis_a, axis_b, comp...)."""
    n = ctx.n
    lead = a.shape[:-2]
    m = a.shape[-2]
    out = np.empty((n, n) + lead + (m,))
    for i in range(n):
        for j in range(n):
            alpha = [0] * n
            alpha[i] += 1
            alpha[j] += 1
            idx = ctx.index_of[tuple(alpha)]
            fac = ctx.alpha_factorial[idx]
            out[i, j] = a[..., idx] * fac
    return np.moveaxis(out, -1, 0)


def _cov2(t0, dt, gamma0):
    """Covariant derivative of a valence-2 tensor from values.

    t0: (m, b, c); dt: (m, a, b, c) coordinate derivatives;
    gamma0: (m, k, i, j).  Returns (m, a, b, c) = (nabla_a t)(b, c)."""
    corr1 = np.einsum("msab,msc->mabc", gamma0, t0)
    corr2 = np.einsum("msac,mbs->mabc", gamma0, t0)
    return dt - corr1 - corr2


def kn_product(A, B):
    """Kulkarni-Nomizu product of symmetric 2-tensors, batched or not:
    (A kn B)_ijkl = A_ik B_jl + A_jl B_ik - A_il B_jk - A_jk B_il."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim == 2:
        return (np.einsum("ik,jl->ijkl", A, B)
                + np.einsum("jl,ik->ijkl", A, B)
                - np.einsum("il,jk->ijkl", A, B)
                - np.einsum("jk,il->ijkl", A, B))
    return (np.einsum("mik,mjl->mijkl", A, B)
            + np.einsum("mjl,mik->mijkl", A, B)
            - np.einsum("mil,mjk->mijkl", A, B)
            - np.einsum("mjk,mil->mijkl", A, B))


# -- frame cache and single-point wrappers ------------------------------

_frame_cache = {}


def frame_at(spec, pts):
    """Batched frame, cached on (spec identity, points)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    key = (id(spec), pts.tobytes())
    hit = _frame_cache.get(key)
    if hit is not None:
        return hit
    fr = Frame(spec, pts)
    if len(_frame_cache) >= _FRAME_CACHE_SIZE:
        _frame_cache.pop(next(iter(_frame_cache)))
    _frame_cache[key] = fr
    return fr


def _one(spec, p):
    return frame_at(spec, np.asarray(p, dtype=float)[None, :])


def metric_at(spec, p):
    """Metric and inverse metric values (plus the frame holding the
    underlying jets)."""
    fr = _one(spec, p)
    g = TensorValue(2, fr.g0[0], p)
    ginv = TensorValue(2, fr.ginv0[0], p)
    return g, ginv, fr


def christoffel(spec, p):
    """Christoffel symbols Gamma^k_ij (index order k, i, j) together
    with their first and second coordinate derivatives."""
    fr = _one(spec, p)
    return fr.gamma0[0], fr.dgamma[0], fr.d2gamma[0]


def riemann(spec, p):
    """Valence-4 curvature R_ijkl in the frozen sign convention."""
    fr = _one(spec, p)
    return TensorValue(4, fr.riemann0[0], p)


def ricci(spec, p):
    fr = _one(spec, p)
    return TensorValue(2, fr.ric0[0], p)


def scalar_curvature(spec, p):
    fr = _one(spec, p)
    return float(fr.tau0[0])


def hessian(spec, p):
    """Hessian of the density h."""
    fr = _one(spec, p)
    return TensorValue(2, fr.hes0[0], p)


def laplacian(spec, p):
    fr = _one(spec, p)
    return float(fr.lap0[0])


def schouten(spec, p):
    fr = _one(spec, p)
    return TensorValue(2, fr.schouten0[0], p)


def weyl(spec, p):
    if spec.n < 4:
        raise DimensionError("Weyl tensor needs dimension >= 4")
    fr = _one(spec, p)
    return TensorValue(4, fr.weyl0[0], p)


def kulkarni_nomizu(A, B):
    a = A.components if isinstance(A, TensorValue) else A
    b = B.components if isinstance(B, TensorValue) else B
    pt = A.point if isinstance(A, TensorValue) else np.zeros(len(a))
    return TensorValue(4, kn_product(a, b), pt)


def cov_ricci(spec, p):
    """(nabla_a rho)(b, c) with the derivative slot first."""
    fr = _one(spec, p)
    return TensorValue(3, fr.cov_ric[0], p)


def cotton(spec, p):
    """dP(X,Y,Z) = (n-2)((nabla_Y P)(X,Z) - (nabla_Z P)(X,Y)),
    stored with slot order (X, Y, Z)."""
    fr = _one(spec, p)
    return TensorValue(3, fr.cotton0[0], p)


# -- warped-product Ricci oracle -----------------------------------------

def warped_ricci(eps, f, fp, fpp, fiber_ricci, fiber_metric):
    """Independent Ricci oracle for a warped product eps dt^2 + f^2 g_F
    with Einstein-or-known fiber: given f and its derivatives at the
    point plus the fiber Ricci and metric component blocks, assemble the
    (1+d)-dimensional coordinate Ricci matrix (base coordinate first)."""
    return multiply_warped_ricci(eps, [(f, fp, fpp, fiber_ricci,
                                        fiber_metric)])


def multiply_warped_ricci(eps, fibers):
    """Ricci oracle for eps dt^2 + sum_a f_a^2 g_{F_a}: ``fibers`` is a
    list of (f, f', f'', fiber_ricci, fiber_metric) blocks.  Returns the
    full coordinate matrix with the base coordinate first and fiber
    blocks in order; cross blocks vanish."""
    dims = [np.asarray(fm).shape[0] for (_, _, _, _, fm) in fibers]
    n = 1 + sum(dims)
    out = np.zeros((n, n))
    out[0, 0] = -sum(d * fpp / f
                     for d, (f, fp, fpp, _, _) in zip(dims, fibers))
    ofs = 1
    for a, (f, fp, fpp, fric, fmet) in enumerate(fibers):
        d = dims[a]
        mix = sum(dims[b] * fibers[b][1] / fibers[b][0]
                  for b in range(len(fibers)) if b != a)
        c = eps * (fpp / f + (d - 1) * (fp / f) ** 2 + (fp / f) * mix)
        block = np.asarray(fric, dtype=float) \
            - c * f ** 2 * np.asarray(fmet, dtype=float)
        out[ofs:ofs + d, ofs:ofs + d] = block
        ofs += d
    return out
