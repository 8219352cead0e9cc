"""The singular candidate w = P / |x|^delta and its certification.

The function is positively homogeneous of degree 3 - delta, odd, and smooth
away from the origin.  Its Hessian restricted to a hyperplane orthogonal to
a unit point a equals the restriction of D2P(a) - delta*P(a)*I, which makes
the restricted spectra expressible through three shifted cubic roots.  The
certificates in this module sample the eigenvalue-ratio bounds that those
roots obey.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .certificate import Certificate, merge_extremes
from .cubic import CubicForm, scale_invariants, triality_form, triality_form_grad, triality_form_hess
from .errors import DimensionMismatchError, DomainError, SingularPointError, ZeroFormError
from .rng import stream
from .spectral import solve_depressed_cubic, sym_eigen, sym_eigen_batch
from .octonion import basis  # noqa: F401  (re-exported convenience)

RATIO_CAP = 1.0 / 20.0


@dataclass
class DeltaParams:
    """The homogeneity exponent and its ellipticity ratio bounds."""

    delta: float

    def __post_init__(self):
        if not 1.0 <= self.delta < 2.0:
            raise DomainError("exponent must lie in [1, 2)")

    @property
    def epsilon_scalar(self) -> float:
        """(2 - delta) / (4 + delta): the scalar ratio bound."""
        return (2.0 - self.delta) / (4.0 + self.delta)

    @property
    def epsilon(self) -> float:
        """min{(2 - delta)/(4 + delta), 1/20}: the Hessian ratio bound."""
        return min(self.epsilon_scalar, RATIO_CAP)


def singular_value(v, delta: float):
    """P(v) / |v|^delta; extends continuously by 0 at the origin."""
    v = np.asarray(v, dtype=float)
    r = np.linalg.norm(v, axis=-1)
    p = triality_form(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(r > 0.0, p / np.where(r > 0.0, r, 1.0) ** delta, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def singular_hessian(v, delta: float) -> np.ndarray:
    """Analytic 24x24 Hessian of the singular candidate away from 0.

    With r = |v|:  r^-d D2P - d r^-d-2 (grad P (x) v + v (x) grad P)
                   - d P r^-d-2 I + d(d+2) P r^-d-4 v (x) v.
    """
    v = np.asarray(v, dtype=float)
    single = v.ndim == 1
    vb = v[None, :] if single else v
    r = np.linalg.norm(vb, axis=1)
    if np.any(r < 1e-8):
        raise SingularPointError("Hessian requested too close to the origin")
    d = float(delta)
    p = triality_form(vb)
    g = triality_form_grad(vb)
    h = triality_form_hess(vb)
    rm2 = r ** (-d - 2.0)
    gv = g[:, :, None] * vb[:, None, :]
    out = (
        r[:, None, None] ** (-d) * h
        - d * rm2[:, None, None] * (gv + np.swapaxes(gv, 1, 2))
        - (d * p * rm2)[:, None, None] * np.eye(24)
        + (d * (d + 2.0) * p * r ** (-d - 4.0))[:, None, None]
        * vb[:, :, None]
        * vb[:, None, :]
    )
    return out[0] if single else out


# ---------------------------------------------------------------------------
# Subspaces
# ---------------------------------------------------------------------------


@dataclass
class Subspace:
    """Orthonormal row basis of a k-dimensional subspace of R^24."""

    rows: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        if self.rows.ndim != 2 or self.rows.shape[1] != 24:
            raise DimensionMismatchError("basis must be rows in R^24")
        gram = self.rows @ self.rows.T
        if np.max(np.abs(gram - np.eye(self.dim))) > 1e-12:
            raise DimensionMismatchError("basis rows are not orthonormal")

    @property
    def dim(self) -> int:
        return self.rows.shape[0]

    def restrict(self, a) -> np.ndarray:
        """B A B^T for a symmetric matrix (or stack of matrices)."""
        a = np.asarray(a, dtype=float)
        if a.shape[-1] != 24 or a.shape[-2] != 24:
            raise DimensionMismatchError("expected 24x24 matrices")
        return self.rows @ a @ self.rows.T

    def lift(self, coeffs) -> np.ndarray:
        """Map coordinate vectors in R^k to points of the subspace."""
        return np.asarray(coeffs, dtype=float) @ self.rows

    def to_json(self) -> str:
        return json.dumps({"basis": self.rows.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "Subspace":
        return cls(rows=np.array(json.loads(text)["basis"], dtype=float))

    @classmethod
    def default(cls, k: int = 21) -> "Subspace":
        """The first k coordinate directions (drops the trailing ones)."""
        return cls(rows=np.eye(24)[:k])

    @classmethod
    def random(cls, k: int, rng: np.random.Generator) -> "Subspace":
        g = rng.standard_normal((24, k))
        q, r = np.linalg.qr(g)
        q = q * np.sign(np.diag(r))
        return cls(rows=q.T)

    def complement_of(self, vectors) -> "Subspace":
        """Orthocomplement of the span of given 24-vectors inside this subspace."""
        vecs = np.atleast_2d(np.asarray(vectors, dtype=float))
        coords = vecs @ self.rows.T  # coordinates in the subspace
        k = self.dim
        q, _ = np.linalg.qr(np.concatenate([coords.T, np.eye(k)], axis=1))
        keep = q[:, coords.shape[0]: k].T  # (k - m, k) coords orthogonal to vecs
        return Subspace(rows=keep @ self.rows)


def haar_orthogonal(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-distributed orthogonal matrices via sign-corrected QR."""
    shape = (n, n) if size is None else (size, n, n)
    g = rng.standard_normal(shape)
    q, r = np.linalg.qr(g)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d = np.where(d == 0.0, 1.0, d)
    return q * d[..., None, :]


# ---------------------------------------------------------------------------
# Root system of the restricted Hessian
# ---------------------------------------------------------------------------


def tangential_roots(w, delta: float) -> np.ndarray:
    """Descending roots mu_i = (roots of T^3 - T + 2w) - delta*w.

    These are the three eigenvalues pinned inside the spectrum of the
    restricted Hessian of the singular candidate at a unit point with form
    value w.
    """
    w = np.asarray(w, dtype=float)
    return solve_depressed_cubic(w) - float(delta) * w[..., None]


def tangential_identity_audit(
    delta: float, samples: int, seed: int, tol: float = 1e-10
) -> Certificate:
    """Restricted Hessian of w vs restricted (D2P - delta P I) on a^perp."""
    DeltaParams(delta)
    rng = stream(seed, "tangential-identity", int(round(delta * 1000)))
    worst = 0.0
    chunk = 1024
    done = 0
    while done < samples:
        nb = min(chunk, samples - done)
        a = rng.standard_normal((nb, 24))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        hw = singular_hessian(a, delta)
        hp = triality_form_hess(a)
        p = triality_form(a)
        target = hp - delta * p[:, None, None] * np.eye(24)
        # orthonormal basis of a^perp per sample: QR with a as first column
        for i in range(nb):
            mat = np.concatenate([a[i][:, None], np.eye(24)], axis=1)
            q, _ = np.linalg.qr(mat)
            b = q[:, 1:24].T  # (23, 24) basis of the hyperplane
            lhs = b @ hw[i] @ b.T
            rhs = b @ target[i] @ b.T
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        done += nb
    return Certificate(
        name="tangential-identity",
        seed=seed,
        samples=samples,
        worst_residual=worst,
        extremes={"max_residual": worst},
        passed=bool(worst <= tol),
        tolerance=tol,
        meta={"delta": delta},
    )


# ---------------------------------------------------------------------------
# Scalar ratio certificate
# ---------------------------------------------------------------------------


def certify_root_ratio(
    delta: float, samples: int, seed: int, slack: float = 1e-9, tol_scale: float = 1.0
) -> Certificate:
    """Ratio bounds for componentwise differences of shifted root triples.

    Samples form values w, w_bar uniform on the admissible interval and a
    scale factor K = |b|^-delta with |b| in [1, 10] (a tenth of the samples
    pinned at K = 1), skips degenerate samples, and asserts

        (2-d)/(4+d) <= mu_plus / (-mu_minus) <= (4+d)/(2-d)

    with the stated slack.
    """
    params = DeltaParams(delta)
    eps = params.epsilon_scalar
    slack = slack * tol_scale
    rng = stream(seed, "scalar-root-ratio", int(round(delta * 1000)))
    bound = 3.0 ** -1.5
    w = rng.uniform(-bound, bound, size=samples)
    wbar = rng.uniform(-bound, bound, size=samples)
    radius = rng.uniform(1.0, 10.0, size=samples)
    k = radius ** (-float(delta))
    unit_k = rng.random(samples) < 0.1
    k[unit_k] = 1.0

    mu = tangential_roots(w, delta)
    mubar = tangential_roots(wbar, delta)
    diffs = mu - k[:, None] * mubar
    degenerate = (np.abs(k - 1.0) + np.abs(wbar - w)) <= 1e-12
    mu_plus = np.max(diffs, axis=1)
    mu_minus = np.min(diffs, axis=1)
    live = ~degenerate
    sign_ok = (mu_plus[live] > 0.0) & (mu_minus[live] < 0.0)
    ratio = mu_plus[live] / (-mu_minus[live])
    lo = float(np.min(ratio)) if ratio.size else np.nan
    hi = float(np.max(ratio)) if ratio.size else np.nan
    ok = bool(np.all(sign_ok) and lo >= eps - slack and hi <= 1.0 / eps + slack)
    return Certificate(
        name="scalar-root-ratio",
        seed=seed,
        samples=samples,
        worst_residual=float(max(eps - lo, hi - 1.0 / eps)),
        extremes={
            "min_ratio": lo,
            "max_ratio": hi,
            "skips": int(np.sum(degenerate)),
        },
        passed=ok,
        tolerance=slack,
        meta={"delta": delta, "epsilon": eps},
    )


# ---------------------------------------------------------------------------
# Hessian-difference ratio certificate
# ---------------------------------------------------------------------------


def certify_hessian_ratio(
    delta: float,
    subspace: Subspace,
    samples: int,
    seed: int,
    slack: float = 1e-9,
    chunk: int = 2048,
    tol_scale: float = 1.0,
) -> Certificate:
    """Eigenvalue-ratio certificate for restricted Hessian differences.

    Samples unit points a and points b with |b| in [1, 10] inside the
    subspace, conjugates the second restricted Hessian by a Haar orthogonal
    matrix, and asserts that the top/bottom eigenvalues of the difference
    satisfy  eps <= L1 / (-L21) <= 1/eps  with eps = min{(2-d)/(4+d), 1/20}.
    """
    params = DeltaParams(delta)
    if subspace.dim != 21:
        raise DimensionMismatchError("certificate requires a 21-dimensional subspace")
    eps = params.epsilon
    slack = slack * tol_scale
    k = subspace.dim
    rng = stream(seed, "hessian-ratio", int(round(delta * 1000)))

    extremes = {}
    skips = 0
    failures = 0
    done = 0
    chunk_idx = 0
    min_ratio = np.inf
    max_ratio = -np.inf
    argmin = argmax = -1
    while done < samples:
        nb = min(chunk, samples - done)
        ca = rng.standard_normal((nb, k))
        ca /= np.linalg.norm(ca, axis=1, keepdims=True)
        cb = rng.standard_normal((nb, k))
        cb /= np.linalg.norm(cb, axis=1, keepdims=True)
        radii = rng.uniform(1.0, 10.0, size=nb)
        a_pts = subspace.lift(ca)
        b_dirs = subspace.lift(cb)
        ra = subspace.restrict(singular_hessian(a_pts, delta))
        # homogeneity: restricted Hessian at radius r is r^(1-d) times unit value
        rb_unit = subspace.restrict(singular_hessian(b_dirs, delta))
        rb = radii[:, None, None] ** (1.0 - delta) * rb_unit
        o = haar_orthogonal(k, rng, size=nb)
        m = ra - np.swapaxes(o, 1, 2) @ rb @ o
        fro = np.linalg.norm(m, axis=(1, 2))
        keep = fro >= 1e-10
        skips += int(np.sum(~keep))
        vals = sym_eigen_batch(m[keep])
        top = vals[:, 0]
        bot = vals[:, -1]
        straddle = (top > 0.0) & (bot < 0.0)
        failures += int(np.sum(~straddle))
        ratio = np.where(straddle, top / np.where(bot < 0, -bot, 1.0), np.nan)
        ratio = ratio[straddle]
        if ratio.size:
            i_lo = int(np.argmin(ratio))
            i_hi = int(np.argmax(ratio))
            if ratio[i_lo] < min_ratio:
                min_ratio = float(ratio[i_lo])
                argmin = done + i_lo
            if ratio[i_hi] > max_ratio:
                max_ratio = float(ratio[i_hi])
                argmax = done + i_hi
            failures += int(np.sum(ratio < eps - slack) + np.sum(ratio > 1.0 / eps + slack))
        done += nb
        chunk_idx += 1

    extremes = {
        "min_ratio": min_ratio,
        "max_ratio": max_ratio,
        "skips": skips,
        "argmin_sample": argmin,
        "argmax_sample": argmax,
    }
    worst = max(eps - min_ratio, max_ratio - 1.0 / eps)
    return Certificate(
        name="hessian-ratio",
        seed=seed,
        samples=samples,
        worst_residual=float(worst),
        extremes=extremes,
        passed=bool(failures == 0),
        tolerance=slack,
        meta={"delta": delta, "epsilon": eps, "subspace_dim": k},
    )


def certify_hessian_ratio_sweep(
    delta: float,
    samples_total: int,
    seed: int,
    n_random_subspaces: int = 5,
    slack: float = 1e-9,
    tol_scale: float = 1.0,
) -> Certificate:
    """Run the ratio certificate over the default and several random subspaces."""
    subs = [Subspace.default()]
    for i in range(n_random_subspaces):
        subs.append(Subspace.random(21, stream(seed, "ratio-subspace", i)))
    per = samples_total // len(subs)
    counts = [per] * len(subs)
    counts[0] += samples_total - per * len(subs)
    extremes: dict = {}
    passed = True
    worst = -np.inf
    for i, (sub, cnt) in enumerate(zip(subs, counts)):
        cert = certify_hessian_ratio(
            delta, sub, cnt, seed + i, slack=slack, tol_scale=tol_scale
        )
        passed = passed and cert.passed
        worst = max(worst, cert.worst_residual)
        extremes = merge_extremes(extremes, cert.extremes)
    return Certificate(
        name="hessian-ratio-sweep",
        seed=seed,
        samples=samples_total,
        worst_residual=float(worst),
        extremes=extremes,
        passed=passed,
        tolerance=slack * tol_scale,
        meta={"delta": delta, "subspaces": len(subs)},
    )


# ---------------------------------------------------------------------------
# Sup-direction audit for general cubics
# ---------------------------------------------------------------------------


def _sphere_ascent(form: CubicForm, x0: np.ndarray, iters: int, tol: float):
    x = x0 / np.linalg.norm(x0)
    val = form.value(x)
    step = 0.5
    for _ in range(iters):
        g = form.grad(x)
        tang = g - np.dot(g, x) * x
        tn = np.linalg.norm(tang)
        if tn <= tol:
            break
        step = min(step * 2.0, 1.0)
        improved = False
        while step > 1e-18:
            cand = x + step * tang
            cand /= np.linalg.norm(cand)
            cval = form.value(cand)
            if cval > val + 1e-4 * step * tn * tn:
                x, val = cand, cval
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return x, val, np.linalg.norm(form.grad(x) - np.dot(form.grad(x), x) * x)


def sup_direction_audit(
    form: CubicForm, restarts: int, seed: int, iters: int = 5000, tol: float = 1e-10
):
    """Maximize the cubic over the sphere; check its directional Hessian.

    Returns (direction, descending spectrum of D2P at the maximizer, ok)
    where ok asserts  lam_1 >= 2 lam_2  and  2 lam_(n-1) >= lam_n  within
    1e-8.
    """
    scale = np.max(np.abs(form.tensor))
    if scale == 0.0:
        raise ZeroFormError("cannot maximize the zero form")
    rng = stream(seed, "sup-direction")
    n = form.dim
    best_val = -np.inf
    best_x = None
    for _ in range(restarts):
        x0 = rng.standard_normal(n)
        x, val, _res = _sphere_ascent(form, x0, iters, tol)
        if val > best_val:
            best_val, best_x = val, x
    d = best_x
    spec = sym_eigen(form.hess(d))
    ok = bool(spec[0] >= 2.0 * spec[1] - 1e-8 and 2.0 * spec[n - 2] >= spec[n - 1] - 1e-8)
    return d, spec, ok


def sign_change_witnesses(subspace: Subspace, seed: int, radii=(1e-1, 1e-3, 1e-6)):
    """Pairs of points of the subspace with opposite signs at each radius.

    Witnesses that the singular candidate changes sign on every neighborhood
    of the origin intersected with the subspace (oddness makes this easy).
    """
    rng = stream(seed, "sign-change")
    for _ in range(100):
        u = subspace.lift(rng.standard_normal(subspace.dim))
        u /= np.linalg.norm(u)
        if abs(triality_form(u)) > 1e-6:
            break
    else:
        raise ZeroFormError("form vanished on all sampled directions")
    return [(r * u, -r * u) for r in radii]
