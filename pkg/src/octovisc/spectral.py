"""Closed-form and numeric spectra of the cubic form's Hessian.

Eigenvalue lists are plain float arrays sorted in DESCENDING order
everywhere in this package.  The numeric route is a self-contained cyclic
Jacobi solver (accurate and accumulable at n <= 24); the closed-form route
builds the spectrum from three depressed cubics whose constant terms are
the two scale invariants of the point.
"""

from __future__ import annotations

import time

import numpy as np
from numba import njit, prange

from .certificate import Certificate
from .cubic import (
    build_block,
    norm_product,
    quat_triality_form,
    scale_invariants,
    triality_form_hess,
)
from .errors import ConvergenceError, DimensionMismatchError, DomainError
from .octonion import embed_quaternion
from .rng import stream

#: largest constant for which T^3 - T + 2c has three real roots
ROOT_BOUND = 3.0 ** -1.5

_TWO_OVER_SQRT3 = 2.0 / np.sqrt(3.0)
_THREE_SQRT3 = 3.0 * np.sqrt(3.0)


def solve_depressed_cubic(c):
    """Three real roots of T^3 - T + 2c, descending.

    Uses the trigonometric substitution T = (2/sqrt 3) cos(gamma).  Requires
    |c| <= 3^(-3/2); values within 1e-9 beyond the bound are clamped, larger
    ones raise DomainError.
    """
    c_arr = np.asarray(c, dtype=float)
    if np.any(np.abs(c_arr) > ROOT_BOUND + 1e-9):
        raise DomainError("constant term outside the three-real-roots range")
    u = np.clip(_THREE_SQRT3 * c_arr, -1.0, 1.0)
    beta = np.arccos(u)
    roots = np.stack(
        [
            _TWO_OVER_SQRT3 * np.cos((beta - np.pi) / 3.0),
            _TWO_OVER_SQRT3 * np.cos((beta + np.pi) / 3.0),
            -_TWO_OVER_SQRT3 * np.cos(beta / 3.0),
        ],
        axis=-1,
    )
    return roots


def spectrum_from_invariants(m, w, dim: int = 24) -> np.ndarray:
    """Hessian spectrum at a unit point from (|X||Y||Z|, P): descending.

    dim=24 uses multiplicities (1, 1, 6) for the factors with constants
    (+m, -m, +w); dim=12 (the quaternionic form) uses (1, 1, 2).
    """
    if dim == 24:
        reps = 6
    elif dim == 12:
        reps = 2
    else:
        raise DimensionMismatchError("closed-form spectra exist for dim 12 and 24")
    m = np.asarray(m, dtype=float)
    w = np.asarray(w, dtype=float)
    rm = solve_depressed_cubic(m)
    rn = solve_depressed_cubic(-m)
    rw = solve_depressed_cubic(w)
    parts = [rm, rn] + [rw] * reps
    full = np.concatenate(parts, axis=-1)
    return -np.sort(-full, axis=-1)


def hessian_spectrum_closed_form(v) -> np.ndarray:
    """Closed-form 24-spectrum of the cubic form's Hessian at a unit point."""
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v, axis=-1)
    if np.any(np.abs(nrm - 1.0) > 1e-10):
        raise DomainError("closed-form spectrum requires a unit point")
    m, w = scale_invariants(v)
    return spectrum_from_invariants(m, w, dim=24)


# ---------------------------------------------------------------------------
# Jacobi eigensolver
# ---------------------------------------------------------------------------


@njit(cache=True)
def _jacobi_sweeps(a, v, accumulate, tol_rel, max_sweeps):
    n = a.shape[0]
    norm_a = 0.0
    for i in range(n):
        for j in range(n):
            norm_a += a[i, j] * a[i, j]
    norm_a = np.sqrt(norm_a)
    if norm_a == 0.0:
        return True
    thresh = tol_rel * norm_a
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += 2.0 * a[i, j] * a[i, j]
        off = np.sqrt(off)
        if off <= thresh:
            return True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                cth = 1.0 / np.sqrt(1.0 + t * t)
                sth = t * cth
                app = a[p, p]
                aqq = a[q, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(n):
                    if i != p and i != q:
                        aip = a[i, p]
                        aiq = a[i, q]
                        a[i, p] = cth * aip - sth * aiq
                        a[p, i] = a[i, p]
                        a[i, q] = sth * aip + cth * aiq
                        a[q, i] = a[i, q]
                if accumulate:
                    for i in range(n):
                        vip = v[i, p]
                        viq = v[i, q]
                        v[i, p] = cth * vip - sth * viq
                        v[i, q] = sth * vip + cth * viq
    # final convergence check after the last sweep
    off = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            off += 2.0 * a[i, j] * a[i, j]
    return np.sqrt(off) <= thresh


@njit(cache=True, parallel=True)
def _jacobi_values_batch(mats, tol_rel, max_sweeps):
    nb = mats.shape[0]
    n = mats.shape[1]
    out = np.empty((nb, n))
    ok = np.empty(nb, dtype=np.bool_)
    dummy = np.empty((1, 1))
    for b in prange(nb):
        a = mats[b].copy()
        ok[b] = _jacobi_sweeps(a, dummy, False, tol_rel, max_sweeps)
        vals = np.empty(n)
        for i in range(n):
            vals[i] = a[i, i]
        vals = np.sort(vals)[::-1]
        out[b] = vals
    return out, ok


def sym_eigen(a, vectors: bool = False, tol: float = 1e-12, max_sweeps: int = 100):
    """Descending eigenvalues of a symmetric matrix by cyclic Jacobi.

    With ``vectors=True`` also returns the orthogonal matrix whose columns
    are the corresponding eigenvectors.  Raises ConvergenceError after
    ``max_sweeps`` sweeps (unreachable in practice for n <= 24) and
    DimensionMismatchError for inputs that are not symmetric to 1e-12
    relative.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError("expected a square matrix")
    scale = np.linalg.norm(a)
    if scale > 0 and np.linalg.norm(a - a.T) > 1e-12 * scale:
        raise DimensionMismatchError("matrix is not symmetric")
    work = 0.5 * (a + a.T)
    n = work.shape[0]
    v = np.eye(n)
    converged = _jacobi_sweeps(work, v, vectors, tol, max_sweeps)
    if not converged:
        raise ConvergenceError("Jacobi sweeps exhausted")
    vals = np.diag(work).copy()
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    if vectors:
        return vals, v[:, order]
    return vals


def sym_eigen_batch(mats, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Descending eigenvalues for a stack of symmetric matrices."""
    mats = np.ascontiguousarray(np.asarray(mats, dtype=float))
    vals, ok = _jacobi_values_batch(mats, tol, max_sweeps)
    if not np.all(ok):
        raise ConvergenceError("Jacobi sweeps exhausted in batch")
    return vals


# ---------------------------------------------------------------------------
# Perturbation checkers
# ---------------------------------------------------------------------------


def weyl_inequality_check(a, b) -> bool:
    """Difference-spectrum bounds for symmetric a, b (descending spectra).

    True iff the top eigenvalue of a-b dominates max_i(lam_i - lam'_i) and
    the bottom one is below min_i(lam_i - lam'_i), within a norm-scaled
    tolerance.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatchError("operands must share a dimension")
    la = sym_eigen(a)
    lb = sym_eigen(b)
    ld = sym_eigen(a - b)
    tol = 1e-10 * (np.linalg.norm(a) + np.linalg.norm(b))
    gaps = la - lb
    return bool(ld[0] >= np.max(gaps) - tol and ld[-1] <= np.min(gaps) + tol)


def interlacing_check(full_vals, restricted_vals, tol: float = 1e-10) -> bool:
    """Eigenvalue interlacing for a k-codimension restriction.

    ``full_vals`` and ``restricted_vals`` are descending.  Applies the
    rank-one interlacing k times: lam_i >= lam'_i >= lam_{i+k}.
    """
    lf = np.asarray(full_vals, dtype=float)
    lr = np.asarray(restricted_vals, dtype=float)
    k = lf.size - lr.size
    if k < 1:
        raise DimensionMismatchError("restriction must lower the dimension")
    upper = lf[: lr.size]
    lower = lf[k:]
    return bool(np.all(upper >= lr - tol) and np.all(lr >= lower - tol))


# ---------------------------------------------------------------------------
# Audits
# ---------------------------------------------------------------------------


def _charpoly4(mats) -> np.ndarray:
    """Monic char-poly coefficients of 4x4 matrices (Faddeev-LeVerrier)."""
    a = np.asarray(mats, dtype=float)
    single = a.ndim == 2
    if single:
        a = a[None]
    eye = np.eye(4)
    coeffs = [np.ones(a.shape[0])]
    m = a.copy()
    c = -np.trace(m, axis1=1, axis2=2)
    coeffs.append(c)
    for k in (2, 3, 4):
        m = a @ (m + c[:, None, None] * eye)
        c = -np.trace(m, axis1=1, axis2=2) / k
        coeffs.append(c)
    out = np.stack(coeffs, axis=-1)
    return out[0] if single else out


def block_matrix_audit(samples: int, seed: int, tol: float = 1e-9) -> Certificate:
    """Properties of the 4x4 blocks and their triple products.

    Checks, on random 4-vectors r, s, t: proportional orthogonality,
    the signed determinants, the factored characteristic polynomials of
    both patterns and their normalized versions, the spectra of the
    symmetrized normalized blocks, and the triple-product characteristic
    polynomials coupled through Re(q_r q_s q_t).
    """
    rng = stream(seed, "block-matrices")
    # radii kept near 1 so char-poly coefficients stay O(1)
    def sample_vecs(n):
        d = rng.standard_normal((n, 4))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return d * rng.uniform(0.5, 1.5, size=(n, 1))

    r = sample_vecs(samples)
    s = sample_vecs(samples)
    t = sample_vecs(samples)
    worst = 0.0
    ext = {}

    ms = build_block(s, "reflect")
    ls = build_block(s, "rotate")
    s2 = np.sum(s * s, axis=1)
    eye = np.eye(4)

    def upd(key, res):
        nonlocal worst
        val = float(np.max(res))
        ext[key] = val
        worst = max(worst, val)

    upd("orthogonality", np.abs(ms @ np.swapaxes(ms, 1, 2) - s2[:, None, None] * eye))
    upd("orthogonality_rotate", np.abs(ls @ np.swapaxes(ls, 1, 2) - s2[:, None, None] * eye))
    upd("det_reflect", np.abs(np.linalg.det(ms) + s2**2))
    upd("det_rotate", np.abs(np.linalg.det(ls) - s2**2))

    z = np.zeros(samples)
    s0 = s[:, 0]
    pm_expected = np.stack([np.ones(samples), 2 * s0, z, -2 * s0 * s2, -(s2**2)], axis=1)
    pl_expected = np.stack(
        [np.ones(samples), 4 * s0, 4 * s0**2 + 2 * s2, 4 * s0 * s2, s2**2], axis=1
    )
    upd("charpoly_reflect", np.abs(_charpoly4(ms) - pm_expected))
    upd("charpoly_rotate", np.abs(_charpoly4(ls) - pl_expected))

    snorm = np.sqrt(s2)
    s0n = s0 / snorm
    os_ = ms / snorm[:, None, None]
    ops = ls / snorm[:, None, None]
    one = np.ones(samples)
    po_expected = np.stack([one, 2 * s0n, z, -2 * s0n, -one], axis=1)
    pop_expected = np.stack([one, 4 * s0n, 4 * s0n**2 + 2, 4 * s0n, one], axis=1)
    upd("charpoly_orth_reflect", np.abs(_charpoly4(os_) - po_expected))
    upd("charpoly_orth_rotate", np.abs(_charpoly4(ops) - pop_expected))

    ns = os_ + np.swapaxes(os_, 1, 2)
    nps = ops + np.swapaxes(ops, 1, 2)
    ns_vals = sym_eigen_batch(ns)
    nps_vals = sym_eigen_batch(nps)
    expect_ns = -np.sort(
        -np.stack([2 * one, -2 * one, -2 * s0n, -2 * s0n], axis=1), axis=1
    )
    expect_nps = np.repeat((-2 * s0n)[:, None], 4, axis=1)
    upd("spectrum_sym_reflect", np.abs(ns_vals - expect_ns))
    upd("spectrum_sym_rotate", np.abs(nps_vals - np.sort(expect_nps, axis=1)[:, ::-1]))

    mr = build_block(r, "reflect")
    mt = build_block(t, "reflect")
    lr = build_block(r, "rotate")
    lt = build_block(t, "rotate")
    m_rst = mr @ ms @ mt
    l_rst = lr @ ls @ lt
    prod2 = np.sum(r * r, axis=1) * s2 * np.sum(t * t, axis=1)
    coupling = quat_triality_form(r, s, t)
    pm3 = np.stack(
        [one, 2 * coupling, z, -2 * coupling * prod2, -(prod2**2)], axis=1
    )
    pl3 = np.stack(
        [one, 4 * coupling, 4 * coupling**2 + 2 * prod2, 4 * coupling * prod2, prod2**2],
        axis=1,
    )
    upd("charpoly_product_reflect", np.abs(_charpoly4(m_rst) - pm3))
    upd("charpoly_product_rotate", np.abs(_charpoly4(l_rst) - pl3))

    return Certificate(
        name="block-matrices",
        seed=seed,
        samples=samples,
        worst_residual=worst,
        extremes=ext,
        passed=bool(worst <= tol),
        tolerance=tol,
    )


def random_unit_triples(n: int, rng: np.random.Generator, dim: int = 24) -> np.ndarray:
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def factorization_audit(samples: int, seed: int, tol: float = 1e-9, chunk: int = 2048) -> Certificate:
    """Closed-form spectrum vs Jacobi spectrum of the analytic Hessian."""
    rng = stream(seed, "factorization")
    worst = 0.0
    start = time.monotonic()
    done = 0
    while done < samples:
        nb = min(chunk, samples - done)
        v = random_unit_triples(nb, rng)
        closed = hessian_spectrum_closed_form(v)
        numeric = sym_eigen_batch(triality_form_hess(v))
        worst = max(worst, float(np.max(np.abs(closed - numeric))))
        done += nb
    elapsed = time.monotonic() - start
    return Certificate(
        name="factorization",
        seed=seed,
        samples=samples,
        worst_residual=worst,
        extremes={"max_spectrum_gap": worst},
        passed=bool(worst <= tol),
        tolerance=tol,
        meta={"elapsed_seconds": elapsed},
    )


def doubling_inequality_audit(samples: int, seed: int, tol: float = 1e-10) -> Certificate:
    """2*lam_3 >= lam_1 and 2*lam_(n-2) <= lam_n for both closed-form spectra."""
    rng = stream(seed, "doubling-inequality")
    worst = -np.inf
    ext = {}
    for dim, tag in ((24, "dim24"), (12, "dim12")):
        v = rng.standard_normal((samples, dim))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        if dim == 24:
            m, w = scale_invariants(v)
        else:
            r4, s4, t4 = v[:, 0:4], v[:, 4:8], v[:, 8:12]
            m = (
                np.linalg.norm(r4, axis=1)
                * np.linalg.norm(s4, axis=1)
                * np.linalg.norm(t4, axis=1)
            )
            w = quat_triality_form(r4, s4, t4)
        spec = spectrum_from_invariants(m, w, dim=dim)
        top_gap = float(np.max(spec[:, 0] - 2.0 * spec[:, 2]))
        bot_gap = float(np.max(2.0 * spec[:, dim - 3] - spec[:, dim - 1]))
        ext[f"max_top_violation_{tag}"] = top_gap
        ext[f"max_bottom_violation_{tag}"] = bot_gap
        worst = max(worst, top_gap, bot_gap)
    return Certificate(
        name="doubling-inequality",
        seed=seed,
        samples=samples,
        worst_residual=worst,
        extremes=ext,
        passed=bool(worst <= tol),
        tolerance=tol,
    )


def weyl_interlacing_audit(samples: int, seed: int) -> Certificate:
    """Random-instance sweep of the two perturbation checkers.

    These are theorems: any reported violation is an implementation bug.
    """
    rng = stream(seed, "weyl-interlacing")
    dims = rng.integers(2, 25, size=samples)
    violations = 0
    worst = 0.0
    half = samples // 2
    for group in range(2):
        lo = 0 if group == 0 else half
        hi = half if group == 0 else samples
        for n in range(2, 25):
            idx = np.nonzero(dims[lo:hi] == n)[0]
            nb = idx.size
            if nb == 0:
                continue
            if group == 0:
                a = rng.standard_normal((nb, n, n)) / np.sqrt(n)
                b = rng.standard_normal((nb, n, n)) / np.sqrt(n)
                a = 0.5 * (a + np.swapaxes(a, 1, 2))
                b = 0.5 * (b + np.swapaxes(b, 1, 2))
                la = sym_eigen_batch(a)
                lb = sym_eigen_batch(b)
                ld = sym_eigen_batch(a - b)
                tol = 1e-10 * (
                    np.linalg.norm(a, axis=(1, 2)) + np.linalg.norm(b, axis=(1, 2))
                )
                gaps = la - lb
                bad_top = ld[:, 0] - np.max(gaps, axis=1)
                bad_bot = np.min(gaps, axis=1) - ld[:, -1]
                violations += int(np.sum(bad_top < -tol) + np.sum(bad_bot < -tol))
                worst = max(worst, float(np.max(-bad_top)), float(np.max(-bad_bot)))
            else:
                a = rng.standard_normal((nb, n, n)) / np.sqrt(n)
                a = 0.5 * (a + np.swapaxes(a, 1, 2))
                ks = rng.integers(1, n, size=nb)
                for i in range(nb):
                    k = int(ks[i])
                    g = rng.standard_normal((n, n - k))
                    q, _ = np.linalg.qr(g)
                    basis = q.T
                    restricted = basis @ a[i] @ basis.T
                    lf = sym_eigen(a[i])
                    lr = sym_eigen(restricted)
                    upper = lf[: n - k]
                    lower = lf[k:]
                    gap = min(float(np.min(upper - lr)), float(np.min(lr - lower)))
                    worst = max(worst, -gap)
                    if gap < -1e-10:
                        violations += 1
    return Certificate(
        name="weyl-interlacing",
        seed=seed,
        samples=samples,
        worst_residual=worst,
        extremes={"violation_count": violations, "max_gap_overshoot": worst},
        passed=bool(violations == 0),
        tolerance=1e-10,
    )
