"""Eigenvalue-space operator built from sampled Hessian spectra.

The construction realizes a uniformly elliptic function f on R^21 whose
zero set contains the sorted spectra of the restricted Hessians of the
singular candidate.  Ingredients:

* a ratio-bounded positive cone (aspect lambda: positive vectors with
  max/min <= lambda^2) and its dual, with a closed-form membership test
  obtained by minimizing over the extreme rays;
* the gauge e(z) of the dual cone over the trace axis, so that the dual
  cone is the epigraph of e in (z, s) coordinates with s the coordinate
  sum and z an orthonormal coordinate system of the sum-zero hyperplane;
* a table of sampled spectra, pairwise-checked to avoid the dual cone in
  both directions, which therefore forms a Lipschitz graph s = g(z);
* the inf-convolution extension g~(z) = inf_w { g(w) + e(z - w) } and the
  level function f = s - g~(z), evaluated after sorting its argument
  (sorting replaces the permutation-sum symmetrization; the zero set on
  sorted spectra and permutation invariance are preserved).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from .certificate import Certificate
from .errors import (
    ConeViolationError,
    DimensionMismatchError,
    DomainError,
    EmptyTableError,
)
from .rng import stream
from .singular import DeltaParams, Subspace, singular_hessian
from .spectral import sym_eigen_batch


@dataclass
class ConeParams:
    """Aspect-bounded positive cone in R^n."""

    aspect: float
    n: int = 21

    def __post_init__(self):
        if self.aspect < 1.0:
            raise DomainError("cone aspect must be >= 1")
        if self.n < 2:
            raise DomainError("cone dimension must be >= 2")


def default_cone(delta: float, n: int = 21, margin: float = 1.01) -> ConeParams:
    """Aspect 1/epsilon(delta) widened by a roundoff margin."""
    return ConeParams(aspect=margin / DeltaParams(delta).epsilon, n=n)


def dual_cone_member(x, cone: ConeParams):
    """Membership of x in the dual of the aspect cone.

    Closed form from extreme-ray minimization: sum of positive parts must
    dominate aspect^2 times the sum of negative parts.
    """
    x = np.asarray(x, dtype=float)
    pos = np.sum(np.where(x > 0.0, x, 0.0), axis=-1)
    neg = np.sum(np.where(x < 0.0, -x, 0.0), axis=-1)
    return pos >= cone.aspect**2 * neg


def helmert_rows(n: int) -> np.ndarray:
    """Orthonormal rows spanning the sum-zero hyperplane of R^n."""
    rows = np.zeros((n - 1, n))
    for k in range(1, n):
        rows[k - 1, :k] = 1.0
        rows[k - 1, k] = -k
        rows[k - 1] /= np.sqrt(k * (k + 1.0))
    return rows


def split_coordinates(vec, rows: np.ndarray):
    """(z, s) coordinates: s the coordinate sum, z the sum-zero part."""
    vec = np.asarray(vec, dtype=float)
    return vec @ rows.T, np.sum(vec, axis=-1)


def join_coordinates(z, s, rows: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    s = np.asarray(s, dtype=float)
    n = rows.shape[1]
    return z @ rows + (s / n)[..., None] * np.ones(n)


def cone_gauge(z, cone: ConeParams, tol: float = 1e-10) -> float:
    """Gauge e(z) = inf{c : (z, c) in dual cone} by bisection.

    Nonnegative, positively homogeneous and subadditive; e(0) = 0.  The
    bracket is grown geometrically before bisecting to tolerance
    ``tol * (1 + |z|)``.
    """
    rows = helmert_rows(cone.n)
    z = np.asarray(z, dtype=float)
    if z.shape != (cone.n - 1,):
        raise DimensionMismatchError("gauge argument must have dimension n-1")
    x0 = z @ rows  # sum-zero representative
    if np.allclose(x0, 0.0):
        return 0.0

    def member(c):
        return bool(dual_cone_member(x0 + (c / cone.n) * np.ones(cone.n), cone))

    hi = 1.0
    cap = cone.n * max(0.0, -float(np.min(x0))) + 1.0
    while not member(hi):
        hi *= 2.0
        if hi > 4.0 * cap:
            raise DomainError("gauge bracket failed to close")
    lo = 0.0
    target = tol * (1.0 + float(np.linalg.norm(z)))
    while hi - lo > target:
        mid = 0.5 * (lo + hi)
        if member(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _gauge_zero_sum_batch(x0: np.ndarray, aspect: float) -> np.ndarray:
    """Exact gauge of sum-zero vectors (vectorized piecewise-linear root).

    For h(t) = sum of positive parts of (x0 + t), the membership boundary
    solves  aspect^2 * n * t = (aspect^2 - 1) * h(t); the root is found by
    walking the sorted breakpoints.  Agrees with the bisection gauge but is
    exact to roundoff.
    """
    lam2 = aspect * aspect
    x = np.asarray(x0, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None]
    nb, n = x.shape
    xs = np.sort(x, axis=1)  # ascending
    # breakpoints beta_j = -xs[:, n-1-j] ascending in j; A_m = sum of m largest
    desc = xs[:, ::-1]
    suffix = np.cumsum(desc, axis=1)  # A_1..A_n
    m = np.arange(1, n + 1)
    denom = lam2 * n - (lam2 - 1.0) * m  # always >= n
    t_candidates = (lam2 - 1.0) * suffix / denom
    beta = -desc  # beta_j for j = 0..n-1 ascending
    # phi at the upper breakpoint of each segment m (beta_m), phi increasing
    # segment m covers [beta_(m-1), beta_m); the root lies in the first
    # segment whose upper endpoint has phi >= 0 (the last segment always does)
    beta_hi = beta[:, 1:]
    phi_hi = lam2 * n * beta_hi - (lam2 - 1.0) * (suffix[:, :-1] + m[:-1] * beta_hi)
    phi_hi = np.concatenate([phi_hi, np.full((nb, 1), np.inf)], axis=1)
    first = np.argmax(phi_hi >= 0.0, axis=1)
    t = np.take_along_axis(t_candidates, first[:, None], axis=1)[:, 0]
    rownorm = np.linalg.norm(x, axis=1)
    t = np.where(rownorm == 0.0, 0.0, t)
    out = n * t
    return out[0] if single else out


@njit(cache=True)
def _gauge_zero_sum_scalar(x0, lam2, n):
    xs = np.sort(x0)  # ascending
    acc = 0.0
    # walk segments m = 1..n (m largest entries active)
    for m in range(1, n + 1):
        acc += xs[n - m]
        denom = lam2 * n - (lam2 - 1.0) * m
        if m < n:
            beta_hi = -xs[n - 1 - m]
            phi_hi = lam2 * n * beta_hi - (lam2 - 1.0) * (acc + m * beta_hi)
            if phi_hi >= 0.0:
                return n * (lam2 - 1.0) * acc / denom
        else:
            return n * (lam2 - 1.0) * acc / denom
    return 0.0


@njit(cache=True, parallel=True)
def _scan_batch(probe_lam, probe_s, hints, tab_lam, tab_s, aspect, alpha_pr):
    """g~ at each probe by pruned scan over the s-ascending table."""
    lam2 = aspect * aspect
    np_, n = probe_lam.shape
    nt = tab_lam.shape[0]
    out = np.empty(np_)
    diff = np.empty(n)
    for p in prange(np_):
        d = np.empty(n)
        best = np.inf
        h = hints[p]
        if h >= 0:
            ds = probe_s[p] - tab_s[h]
            for i in range(n):
                d[i] = probe_lam[p, i] - tab_lam[h, i] - ds / n
            best = tab_s[h] + _gauge_zero_sum_scalar(d, lam2, n)
        for w in range(nt):
            sw = tab_s[w]
            if sw >= best:
                break  # table sorted by s ascending and gauge >= 0
            ds = probe_s[p] - sw
            mx = -np.inf
            for i in range(n):
                d[i] = probe_lam[p, i] - tab_lam[w, i] - ds / n
                if d[i] > mx:
                    mx = d[i]
            if sw + alpha_pr * mx >= best:
                continue  # provable lower bound on the gauge excludes w
            val = sw + _gauge_zero_sum_scalar(d, lam2, n)
            if val < best:
                best = val
        out[p] = best
    return out


def _prune_alpha(aspect: float, n: int) -> float:
    """Provable constant with gauge(x0) >= alpha * max(x0)."""
    lam2 = aspect * aspect
    return n * (lam2 - 1.0) / (lam2 * (n - 1.0) + 1.0)


@dataclass
class OperatorTable:
    """Sealed table of projected spectra defining the operator's graph."""

    z: np.ndarray  # (N, n-1)
    s: np.ndarray  # (N,)
    cone: ConeParams
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        self.s = np.asarray(self.s, dtype=float)
        if self.z.ndim != 2 or self.z.shape[1] != self.cone.n - 1:
            raise DimensionMismatchError("z block has the wrong width")
        if self.s.shape != (self.z.shape[0],):
            raise DimensionMismatchError("s block has the wrong length")
        rows = helmert_rows(self.cone.n)
        lambdas = join_coordinates(self.z, self.s, rows)
        # evaluation heights recomputed as float sums of the derived rows so
        # that a probe equal to a stored row reproduces them bit-for-bit;
        # the scan kernel requires ascending heights
        s_eval = np.sum(lambdas, axis=1)
        order = np.argsort(s_eval, kind="stable")
        self.z = np.ascontiguousarray(self.z[order])
        self.s = np.ascontiguousarray(self.s[order])
        self._lambdas = np.ascontiguousarray(lambdas[order])
        self._s_eval = np.ascontiguousarray(s_eval[order])
        for arr in (self.z, self.s, self._lambdas, self._s_eval):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return self.z.shape[0]

    @property
    def lambdas(self) -> np.ndarray:
        """Eigenvalue vectors (descending rows), ordered by ascending s."""
        return self._lambdas

    @property
    def heights(self) -> np.ndarray:
        """Evaluation heights: float coordinate sums of the lambda rows."""
        return self._s_eval

    def save_jsonl(self, path) -> None:
        header = {
            "kind": "operator-table",
            "n": self.cone.n,
            "aspect": self.cone.aspect,
            "count": len(self),
        }
        header.update(self.meta)
        with open(path, "w") as fh:
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for zi, si in zip(self.z, self.s):
                zs = ",".join("%.17g" % v for v in zi)
                fh.write('{"z":[%s],"s":%s}\n' % (zs, "%.17g" % si))

    @classmethod
    def load_jsonl(cls, path) -> "OperatorTable":
        with open(path) as fh:
            header = json.loads(fh.readline())
            if header.get("kind") != "operator-table":
                raise DomainError("not an operator table file")
            zs, ss = [], []
            for line in fh:
                rec = json.loads(line)
                zs.append(rec["z"])
                ss.append(rec["s"])
        cone = ConeParams(aspect=header["aspect"], n=header["n"])
        meta = {
            k: v for k, v in header.items() if k not in ("kind", "n", "aspect", "count")
        }
        return cls(z=np.array(zs), s=np.array(ss), cone=cone, meta=meta)

    @classmethod
    def merge(cls, tables) -> "OperatorTable":
        tables = list(tables)
        cone = tables[0].cone
        for t in tables[1:]:
            if t.cone != cone:
                raise DomainError("cannot merge tables over different cones")
        z = np.concatenate([t.z for t in tables])
        s = np.concatenate([t.s for t in tables])
        meta = dict(tables[0].meta)
        meta["merged_from"] = len(tables)
        return cls(z=z, s=s, cone=cone, meta=meta)


def subspace_digest(subspace: Subspace) -> str:
    text = ",".join("%.17g" % v for v in subspace.rows.ravel())
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def sample_spectra(
    delta: float, subspace: Subspace, n_samples: int, rng: np.random.Generator, chunk: int = 4096
) -> np.ndarray:
    """Sorted spectra of restricted Hessians at random unit points."""
    k = subspace.dim
    out = np.empty((n_samples, k))
    done = 0
    while done < n_samples:
        nb = min(chunk, n_samples - done)
        coeffs = rng.standard_normal((nb, k))
        coeffs /= np.linalg.norm(coeffs, axis=1, keepdims=True)
        pts = subspace.lift(coeffs)
        restricted = subspace.restrict(singular_hessian(pts, delta))
        out[done : done + nb] = sym_eigen_batch(restricted)
        done += nb
    return out


def check_cone_condition(
    lambdas: np.ndarray, cone: ConeParams, pairs: int, rng: np.random.Generator
):
    """Sampled pairwise check that spectrum differences avoid +-dual cone.

    Returns (violations, checked, skipped); near-identical pairs are skipped,
    mirroring the nonzero-difference hypothesis of the ratio bound.
    """
    n = lambdas.shape[0]
    i = rng.integers(0, n, size=pairs)
    j = rng.integers(0, n, size=pairs)
    keep = i != j
    d = lambdas[i[keep]] - lambdas[j[keep]]
    norms = np.linalg.norm(d, axis=1)
    live = norms >= 1e-10
    d = d[live]
    fwd = dual_cone_member(d, cone)
    bwd = dual_cone_member(-d, cone)
    violations = int(np.sum(fwd | bwd))
    return violations, int(d.shape[0]), int(pairs - d.shape[0])


def build_table(
    delta: float,
    subspace: Subspace,
    n_samples: int,
    seed: int,
    cone: ConeParams | None = None,
    pair_checks: int = 10_000,
) -> OperatorTable:
    """Sample spectra, verify the pairwise cone condition, and seal the table.

    Raises ConeViolationError if any sampled pair of spectra differs by a
    dual-cone vector (which would falsify the ratio bound for this aspect).
    """
    params = DeltaParams(delta)
    if cone is None:
        cone = default_cone(delta, n=subspace.dim)
    if cone.n != subspace.dim:
        raise DimensionMismatchError("cone dimension must match the subspace")
    rng = stream(seed, "operator-table")
    lambdas = sample_spectra(delta, subspace, n_samples, rng)
    violations, checked, skipped = check_cone_condition(
        lambdas, cone, pair_checks, stream(seed, "operator-pairs")
    )
    if violations:
        raise ConeViolationError(
            f"{violations} of {checked} sampled spectrum pairs landed in the cone"
        )
    rows = helmert_rows(cone.n)
    z, s = split_coordinates(lambdas, rows)
    meta = {
        "delta": delta,
        "epsilon": params.epsilon,
        "seed": seed,
        "samples": n_samples,
        "subspace": subspace_digest(subspace),
        "pair_checks": checked,
        "pair_skips": skipped,
        "symmetrization": "sorted-canonicalization (replaces the permutation sum)",
    }
    return OperatorTable(z=z, s=s, cone=cone, meta=meta)


def operator_value(lambda_vec, table: OperatorTable) -> float:
    """f(lambda) = s - g~(z) after sorting the argument descending.

    Vanishes on every stored spectrum; monotone under componentwise
    increase; permutation invariant by canonicalization.
    """
    if len(table) == 0:
        raise EmptyTableError("operator table has no entries")
    lam = np.sort(np.asarray(lambda_vec, dtype=float))[::-1]
    if lam.shape != (table.cone.n,):
        raise DimensionMismatchError("argument dimension must match the cone")
    s = float(np.sum(lam))
    diffs = lam[None, :] - table.lambdas
    ds = s - table.heights
    x0 = diffs - (ds / table.cone.n)[:, None]
    gauges = _gauge_zero_sum_batch(x0, table.cone.aspect)
    return s - float(np.min(table.heights + gauges))


def operator_value_batch(
    lams: np.ndarray, table: OperatorTable, hints: np.ndarray | None = None
) -> np.ndarray:
    """Vectorized operator values with an optional per-probe table hint."""
    if len(table) == 0:
        raise EmptyTableError("operator table has no entries")
    lams = -np.sort(-np.asarray(lams, dtype=float), axis=1)
    s = np.sum(lams, axis=1)
    if hints is None:
        hints = np.full(lams.shape[0], -1, dtype=np.int64)
    gt = _scan_batch(
        np.ascontiguousarray(lams),
        np.ascontiguousarray(s),
        np.ascontiguousarray(hints.astype(np.int64)),
        table.lambdas,
        table.heights,
        table.cone.aspect,
        _prune_alpha(table.cone.aspect, table.cone.n),
    )
    return s - gt


def coordinate_gauges(cone: ConeParams):
    """Gauges of the sum-zero parts of +e1 and -e1.

    By permutation symmetry these drive the two-sided ellipticity constant:
    quotients of f under single-coordinate increases lie in
    [1 - gauge(+), 1 + gauge(-)].
    """
    e1 = np.zeros(cone.n)
    e1[0] = 1.0
    x0 = e1 - np.sum(e1) / cone.n
    gp = float(_gauge_zero_sum_batch(x0, cone.aspect))
    gm = float(_gauge_zero_sum_batch(-x0, cone.aspect))
    return gp, gm


def ellipticity_constant(cone: ConeParams) -> float:
    gp, gm = coordinate_gauges(cone)
    if gp >= 1.0:
        raise DomainError("degenerate cone: coordinate gauge reached 1")
    return max(1.0 / (1.0 - gp), 1.0 + gm)


def audit_operator(
    table: OperatorTable,
    delta: float,
    subspace: Subspace,
    seed: int,
    fresh_points: int = 1000,
    table_points: int = 1000,
    probes: int = 100_000,
    fresh_tol: float = 1e-2,
    tol_scale: float = 1.0,
) -> Certificate:
    """Residual and ellipticity audit of the sampled operator.

    Checks (i) |f| at stored table points (must vanish to 1e-12), (ii) |f|
    at freshly sampled spectra against a density-limited tolerance, and
    (iii) single-coordinate difference quotients of f against the two-sided
    ellipticity band implied by the cone aspect.
    """
    if len(table) == 0:
        raise EmptyTableError("operator table has no entries")
    n = table.cone.n
    rng_points = stream(seed, "operator-audit-points")
    rng_probe = stream(seed, "operator-audit-probes")

    # (i) residual at stored entries
    count = min(table_points, len(table))
    idx = rng_points.choice(len(table), size=count, replace=False)
    vals = operator_value_batch(table.lambdas[idx], table, hints=idx)
    table_res = float(np.max(np.abs(vals)))

    # (ii) residual at fresh spectra
    fresh = sample_spectra(delta, subspace, fresh_points, rng_points)
    fvals = operator_value_batch(fresh, table)
    fresh_res = float(np.max(np.abs(fvals)))
    # nearest-entry distances give the observed covering scale
    sub_idx = rng_points.choice(len(table), size=min(len(table), 20_000), replace=False)
    ref = table.lambdas[sub_idx]
    d2 = (
        np.sum(fresh**2, axis=1)[:, None]
        - 2.0 * fresh @ ref.T
        + np.sum(ref**2, axis=1)[None, :]
    )
    covering = float(np.max(np.sqrt(np.maximum(np.min(d2, axis=1), 0.0))))

    # (iii) ellipticity difference quotients
    gp, gm = coordinate_gauges(table.cone)
    c0 = ellipticity_constant(table.cone)
    src = rng_probe.integers(0, len(table), size=probes)
    base = table.lambdas[src] + 1e-3 * rng_probe.standard_normal((probes, n))
    coord = rng_probe.integers(0, n, size=probes)
    mu = 1.0 - rng_probe.random(probes)  # (0, 1]
    bumped = base.copy()
    bumped[np.arange(probes), coord] += mu
    f0 = operator_value_batch(base, table, hints=src)
    f1 = operator_value_batch(bumped, table, hints=src)
    quot = (f1 - f0) / mu
    slack = 1e-9 * tol_scale
    lo_band = 1.0 - gp - slack
    hi_band = 1.0 + gm + slack
    q_min = float(np.min(quot))
    q_max = float(np.max(quot))
    quot_ok = q_min >= lo_band and q_max <= hi_band

    passed = (
        table_res <= 1e-12 * tol_scale
        and fresh_res <= fresh_tol * tol_scale
        and quot_ok
    )
    worst = max(table_res / 1e-12, fresh_res / fresh_tol, 0.0)
    return Certificate(
        name="operator-audit",
        seed=seed,
        samples=probes,
        worst_residual=float(worst),
        extremes={
            "max_table_residual": table_res,
            "max_fresh_residual": fresh_res,
            "fresh_covering_radius": covering,
            "min_quotient": q_min,
            "max_quotient": q_max,
        },
        passed=bool(passed),
        tolerance=1.0,
        meta={
            "delta": delta,
            "aspect": table.cone.aspect,
            "ellipticity_constant": c0,
            "quotient_band": [1.0 - gp, 1.0 + gm],
            "table_points_checked": int(count),
            "fresh_points": fresh_points,
            "table_entries": len(table),
        },
    )
