"""The triality cubic form on R^24, its derivatives, and 4x4 building blocks.

A point is a triple V = (X, Y, Z) of octonion coefficient vectors, stored
as a flat length-24 array (X first, then Y, then Z).  The form is

    P(X, Y, Z) = Re((oX * oY) * oZ) = Re(oX * (oY * oZ)),

a harmonic cubic.  Two independent evaluation routes are kept: the octonion
product route and a fixed table of 64 signed monomials X_i Y_j Z_k.  The
table below is transcribed once and never regenerated; the product route
cross-checks it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import octonion
from .certificate import Certificate
from .rng import stream

# sign, X index, Y index, Z index; one entry per monomial of the expanded form
FORM_TERMS = (
    (+1, 0, 0, 0), (-1, 0, 1, 1), (-1, 0, 2, 2), (-1, 0, 3, 3),
    (-1, 0, 4, 4), (-1, 0, 5, 5), (-1, 0, 6, 6), (-1, 0, 7, 7),
    (-1, 1, 0, 1), (-1, 1, 1, 0), (-1, 1, 2, 4), (-1, 1, 3, 7),
    (+1, 1, 4, 2), (-1, 1, 5, 6), (+1, 1, 6, 5), (+1, 1, 7, 3),
    (-1, 2, 0, 2), (+1, 2, 1, 4), (-1, 2, 2, 0), (-1, 2, 3, 5),
    (-1, 2, 4, 1), (+1, 2, 5, 3), (-1, 2, 6, 7), (+1, 2, 7, 6),
    (-1, 3, 0, 3), (+1, 3, 1, 7), (+1, 3, 2, 5), (-1, 3, 3, 0),
    (-1, 3, 4, 6), (-1, 3, 5, 2), (+1, 3, 6, 4), (-1, 3, 7, 1),
    (-1, 4, 0, 4), (-1, 4, 1, 2), (+1, 4, 2, 1), (+1, 4, 3, 6),
    (-1, 4, 4, 0), (-1, 4, 5, 7), (-1, 4, 6, 3), (+1, 4, 7, 5),
    (-1, 5, 0, 5), (+1, 5, 1, 6), (-1, 5, 2, 3), (+1, 5, 3, 2),
    (+1, 5, 4, 7), (-1, 5, 5, 0), (-1, 5, 6, 1), (-1, 5, 7, 4),
    (-1, 6, 0, 6), (-1, 6, 1, 5), (+1, 6, 2, 7), (-1, 6, 3, 4),
    (+1, 6, 4, 3), (+1, 6, 5, 1), (-1, 6, 6, 0), (-1, 6, 7, 2),
    (-1, 7, 0, 7), (-1, 7, 1, 3), (-1, 7, 2, 6), (+1, 7, 3, 1),
    (-1, 7, 4, 5), (+1, 7, 5, 4), (+1, 7, 6, 2), (-1, 7, 7, 0),
)


def _build_trilinear():
    t = np.zeros((8, 8, 8))
    for s, i, j, k in FORM_TERMS:
        t[i, j, k] = s
    return t


#: TRILINEAR[i, j, k] = coefficient of X_i Y_j Z_k
TRILINEAR = _build_trilinear()


def _build_sym3():
    """Symmetric third-derivative tensor of the form on R^24."""
    t = np.zeros((24, 24, 24))
    for s, i, j, k in FORM_TERMS:
        a, b, c = i, 8 + j, 16 + k
        for p, q, r in ((a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)):
            t[p, q, r] = s
    return t


SYM3 = _build_sym3()


def _batched(v):
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        return v[None, :], True
    return v, False


def triality_form(v) -> np.ndarray:
    """Expanded-polynomial evaluation of the cubic form."""
    vb, single = _batched(v)
    x, y, z = vb[:, :8], vb[:, 8:16], vb[:, 16:24]
    out = np.einsum("ijk,ni,nj,nk->n", TRILINEAR, x, y, z, optimize=True)
    return out[0] if single else out


def triality_form_oct(v) -> np.ndarray:
    """Octonion-product evaluation Re((oX*oY)*oZ); independent of the table."""
    vb, single = _batched(v)
    x, y, z = vb[:, :8], vb[:, 8:16], vb[:, 16:24]
    out = octonion.re_mul(octonion.mul(x, y), z)
    return out[0] if single else out


def triality_form_grad(v) -> np.ndarray:
    """Exact gradient; satisfies Euler's identity grad . v = 3 P(v)."""
    vb, single = _batched(v)
    x, y, z = vb[:, :8], vb[:, 8:16], vb[:, 16:24]
    gx = np.einsum("ijk,nj,nk->ni", TRILINEAR, y, z, optimize=True)
    gy = np.einsum("ijk,ni,nk->nj", TRILINEAR, x, z, optimize=True)
    gz = np.einsum("ijk,ni,nj->nk", TRILINEAR, x, y, optimize=True)
    out = np.concatenate([gx, gy, gz], axis=1)
    return out[0] if single else out


def triality_form_hess(v) -> np.ndarray:
    """Full 24x24 Hessian; entries linear in v, zero diagonal blocks."""
    vb, single = _batched(v)
    out = np.einsum("abc,nc->nab", SYM3, vb, optimize=True)
    return out[0] if single else out


def norm_product(v) -> np.ndarray:
    """|X| |Y| |Z| for the triple."""
    vb, single = _batched(v)
    out = (
        np.linalg.norm(vb[:, :8], axis=1)
        * np.linalg.norm(vb[:, 8:16], axis=1)
        * np.linalg.norm(vb[:, 16:24], axis=1)
    )
    return out[0] if single else out


def scale_invariants(v):
    """The pair (|X||Y||Z|, P(v)) that controls the Hessian spectrum."""
    return norm_product(v), triality_form(v)


def quat_triality_form(r, s, t) -> np.ndarray:
    """Re(q_r q_s q_t) for quaternion coefficient 4-vectors."""
    er = octonion.embed_quaternion(r)
    es = octonion.embed_quaternion(s)
    et = octonion.embed_quaternion(t)
    return octonion.re_mul(octonion.mul(er, es), et)


# ---------------------------------------------------------------------------
# 4x4 building blocks
# ---------------------------------------------------------------------------

_BLOCK_INDEX = np.array([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]])
_REFLECT_SIGNS = np.array(
    [[1, -1, -1, -1], [-1, -1, -1, 1], [-1, 1, -1, -1], [-1, -1, 1, -1]], dtype=float
)
_ROTATE_SIGNS = np.array(
    [[-1, -1, 1, -1], [1, -1, -1, -1], [-1, 1, -1, -1], [1, 1, 1, -1]], dtype=float
)


def build_block(s, pattern: str) -> np.ndarray:
    """4x4 block from s in R^4.

    ``pattern="reflect"`` gives the determinant ``-|s|^4`` family,
    ``pattern="rotate"`` the determinant ``+|s|^4`` family.  Both satisfy
    ``B . B^T = |s|^2 I``.
    """
    s = np.asarray(s, dtype=float)
    signs = {"reflect": _REFLECT_SIGNS, "rotate": _ROTATE_SIGNS}[pattern]
    return signs * s[..., _BLOCK_INDEX]


#: coordinate permutation splitting the Hessian at a quaternionic point
#: into two 12x12 blocks (X0 X1 X2 X4 | Y... | Z... | X5 X6 X3 X7 | ...)
QUATERNION_SPLIT_PERM = (
    0, 1, 2, 4, 8, 9, 10, 12, 16, 17, 18, 20,
    5, 6, 3, 7, 13, 14, 11, 15, 21, 22, 19, 23,
)


def quaternion_hessian_blocks(x4, y4, z4):
    """The two 12x12 Hessian blocks at a quaternionic point.

    ``x4, y4, z4`` are the coefficient 4-vectors of the point over
    {1, e1, e2, e4}.  Block layout (b_s stands for the pattern block):

        [[0,    b_z,   b_y^T],
         [b_z^T, 0,    b_x  ],
         [b_y,  b_x^T, 0    ]]

    with "reflect" blocks in the first group of coordinates and "rotate"
    blocks in the second.
    """
    out = []
    for pattern in ("reflect", "rotate"):
        bx = build_block(x4, pattern)
        by = build_block(y4, pattern)
        bz = build_block(z4, pattern)
        h = np.zeros((12, 12))
        h[0:4, 4:8] = bz
        h[0:4, 8:12] = by.T
        h[4:8, 8:12] = bx
        h = h + h.T
        out.append(h)
    return out[0], out[1]


# ---------------------------------------------------------------------------
# General cubic forms (for the sup-direction audit)
# ---------------------------------------------------------------------------


@dataclass
class CubicForm:
    """Cubic form on R^n given by its symmetric third-derivative tensor."""

    tensor: np.ndarray  # (n, n, n), symmetric

    @property
    def dim(self) -> int:
        return self.tensor.shape[0]

    def value(self, v) -> float:
        return float(np.einsum("abc,a,b,c->", self.tensor, v, v, v) / 6.0)

    def grad(self, v) -> np.ndarray:
        return np.einsum("abc,b,c->a", self.tensor, v, v) / 2.0

    def hess(self, v) -> np.ndarray:
        return np.einsum("abc,c->ab", self.tensor, v)

    @classmethod
    def from_triality(cls) -> "CubicForm":
        return cls(tensor=SYM3)

    @classmethod
    def single_power(cls, n: int, axis: int = 0) -> "CubicForm":
        """The form x_axis^3."""
        t = np.zeros((n, n, n))
        t[axis, axis, axis] = 6.0
        return cls(tensor=t)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "CubicForm":
        base = rng.standard_normal((n, n, n))
        sym = np.zeros_like(base)
        for perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
            sym += base.transpose(perm)
        return cls(tensor=sym)


# ---------------------------------------------------------------------------
# Triple points and JSON interface
# ---------------------------------------------------------------------------


@dataclass
class TriplePoint:
    """A point of R^24 viewed as three octonion coefficient vectors."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(8)
        self.y = np.asarray(self.y, dtype=float).reshape(8)
        self.z = np.asarray(self.z, dtype=float).reshape(8)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.y, self.z])

    @classmethod
    def from_vector(cls, v) -> "TriplePoint":
        v = np.asarray(v, dtype=float).reshape(24)
        return cls(v[:8], v[8:16], v[16:24])

    def to_json(self) -> str:
        return json.dumps({"X": self.x.tolist(), "Y": self.y.tolist(), "Z": self.z.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "TriplePoint":
        d = json.loads(text)
        return cls(np.array(d["X"]), np.array(d["Y"]), np.array(d["Z"]))


def unit_real_triple() -> TriplePoint:
    """The point (1, 1, 1)/sqrt(3): all three factors the real unit."""
    e0 = np.zeros(8)
    e0[0] = 1.0
    s = 1.0 / np.sqrt(3.0)
    return TriplePoint(s * e0, s * e0, s * e0)


def dual_evaluation_audit(samples: int, seed: int, assoc_samples: int = 10_000) -> Certificate:
    """Expanded-table vs octonion-product evaluation, plus weak associativity."""
    tol = 1e-12
    rng = stream(seed, "dual-evaluation")
    worst = 0.0
    chunk = 100_000
    done = 0
    while done < samples:
        nb = min(chunk, samples - done)
        v = rng.standard_normal((nb, 24))
        a = triality_form(v)
        b = triality_form_oct(v)
        scale = 1.0 + np.abs(norm_product(v))
        worst = max(worst, float(np.max(np.abs(a - b) / scale)))
        done += nb

    rng2 = stream(seed, "weak-associativity")
    a8 = rng2.standard_normal((assoc_samples, 8))
    b8 = rng2.standard_normal((assoc_samples, 8))
    c8 = rng2.standard_normal((assoc_samples, 8))
    left = octonion.re_mul(octonion.mul(a8, b8), c8)
    right = octonion.re_mul(a8, octonion.mul(b8, c8))
    scale = 1.0 + octonion.norm(a8) * octonion.norm(b8) * octonion.norm(c8)
    assoc_worst = float(np.max(np.abs(left - right) / scale))

    worst_all = max(worst, assoc_worst)
    return Certificate(
        name="dual-evaluation",
        seed=seed,
        samples=samples,
        worst_residual=worst_all,
        extremes={"max_path_residual": worst, "max_assoc_residual": assoc_worst},
        passed=bool(worst_all <= tol),
        tolerance=tol,
        meta={"assoc_samples": assoc_samples},
    )
