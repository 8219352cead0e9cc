"""Cayley octonion arithmetic over coefficient vectors.

Octonions are represented as length-8 float arrays ``(c0, c1, ..., c7)``
with ``c0`` the real part and ``ci`` the coefficient of the imaginary unit
``e_i``.  All operations broadcast over leading batch axes.

The multiplication table is generated from the seven oriented index
triples (1,2,4), (2,3,5), (3,4,6), (4,5,7), (5,6,1), (6,7,2), (7,1,3):
each triple (a,b,c) is cyclic, meaning ``e_a e_b = e_c``, ``e_b e_c = e_a``,
``e_c e_a = e_b``, with anticommutation for reversed pairs and
``e_i e_i = -1``.  In particular ``e_1 e_2 = e_4``.  The quaternion
subalgebra is spanned by ``{1, e1, e2, e4}``.
"""

from __future__ import annotations

import numpy as np

from .certificate import Certificate
from .rng import stream

ORIENTED_TRIPLES = ((1, 2, 4), (2, 3, 5), (3, 4, 6), (4, 5, 7), (5, 6, 1), (6, 7, 2), (7, 1, 3))

#: coordinate slots of the quaternion subalgebra inside an octonion vector
QUATERNION_AXES = (0, 1, 2, 4)


def _build_table():
    sign = np.zeros((8, 8), dtype=np.int64)
    index = np.zeros((8, 8), dtype=np.int64)
    for j in range(8):
        sign[0, j] = 1
        index[0, j] = j
        sign[j, 0] = 1
        index[j, 0] = j
    for i in range(1, 8):
        sign[i, i] = -1
        index[i, i] = 0
    for a, b, c in ORIENTED_TRIPLES:
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            sign[x, y] = 1
            index[x, y] = z
            sign[y, x] = -1
            index[y, x] = z
    # every off-diagonal imaginary pair must be covered by exactly one triple
    filled = (sign != 0)
    assert filled.all(), "multiplication table incomplete"
    return sign, index


MUL_SIGN, MUL_INDEX = _build_table()


def basis(i: int) -> np.ndarray:
    """Basis octonion: basis(0) = 1, basis(i) = e_i."""
    e = np.zeros(8)
    e[i] = 1.0
    return e


def mul(a, b) -> np.ndarray:
    """Octonion product, broadcasting over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out_shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(out_shape)
    for i in range(8):
        for j in range(8):
            out[..., MUL_INDEX[i, j]] += MUL_SIGN[i, j] * a[..., i] * b[..., j]
    return out


def re_mul(a, b) -> np.ndarray:
    """Real part of the product a*b without forming the full product."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 0] - np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def conj(o) -> np.ndarray:
    o = np.asarray(o, dtype=float)
    out = o.copy()
    out[..., 1:] *= -1.0
    return out


def re_part(o) -> np.ndarray:
    return np.asarray(o, dtype=float)[..., 0]


def norm(o) -> np.ndarray:
    return np.linalg.norm(np.asarray(o, dtype=float), axis=-1)


def embed_quaternion(q) -> np.ndarray:
    """Embed 4 coefficients over {1, e1, e2, e4} into an octonion vector."""
    q = np.asarray(q, dtype=float)
    out = np.zeros(q.shape[:-1] + (8,))
    for slot, axis in enumerate(QUATERNION_AXES):
        out[..., axis] = q[..., slot]
    return out


def quaternion_mul(a, b) -> np.ndarray:
    """Associative product of quaternion coefficient 4-vectors."""
    prod = mul(embed_quaternion(a), embed_quaternion(b))
    return prod[..., list(QUATERNION_AXES)]


def algebra_axioms_audit(samples: int, seed: int) -> Certificate:
    """Check the algebra axioms on the basis (exhaustively) and at random.

    Covers: anticommutation of distinct imaginary units, the alternative
    laws, multiplicativity of the norm, the conjugation anti-automorphism,
    and weak associativity of the real trilinear trace.
    """
    tol = 1e-12
    worst = 0.0
    ext = {}

    # exhaustive: basis antisymmetry and alternative laws
    for i in range(1, 8):
        for j in range(1, 8):
            if i != j:
                r = np.max(np.abs(mul(basis(i), basis(j)) + mul(basis(j), basis(i))))
                worst = max(worst, r)
    units = np.stack([basis(i) for i in range(8)])
    for i in range(8):
        for j in range(8):
            a, b = units[i], units[j]
            worst = max(worst, np.max(np.abs(mul(mul(a, a), b) - mul(a, mul(a, b)))))
            worst = max(worst, np.max(np.abs(mul(mul(b, a), a) - mul(b, mul(a, a)))))
            worst = max(worst, np.max(np.abs(conj(mul(a, b)) - mul(conj(b), conj(a)))))
    ext["basis_worst"] = worst

    rng = stream(seed, "algebra-axioms")
    a = rng.standard_normal((samples, 8))
    b = rng.standard_normal((samples, 8))
    c = rng.standard_normal((samples, 8))

    norm_res = np.max(np.abs(norm(mul(a, b)) - norm(a) * norm(b)) / (1.0 + norm(a) * norm(b)))
    ext["max_norm_residual"] = norm_res
    worst = max(worst, norm_res)

    conj_res = np.max(np.abs(conj(mul(a, b)) - mul(conj(b), conj(a))))
    scale = 1.0 + np.max(norm(a) * norm(b))
    ext["max_conj_residual"] = conj_res / scale
    worst = max(worst, conj_res / scale)

    alt1 = np.max(np.abs(mul(mul(a, a), b) - mul(a, mul(a, b)))) / scale
    alt2 = np.max(np.abs(mul(mul(b, a), a) - mul(b, mul(a, a)))) / scale
    ext["max_alternative_residual"] = max(alt1, alt2)
    worst = max(worst, alt1, alt2)

    tri = np.abs(re_mul(mul(a, b), c) - re_mul(a, mul(b, c)))
    tri_scale = 1.0 + norm(a) * norm(b) * norm(c)
    tri_res = np.max(tri / tri_scale)
    ext["max_trace_assoc_residual"] = tri_res
    worst = max(worst, tri_res)

    return Certificate(
        name="algebra-axioms",
        seed=seed,
        samples=samples,
        worst_residual=float(worst),
        extremes={k: float(v) for k, v in ext.items()},
        passed=bool(worst <= tol),
        tolerance=tol,
    )
