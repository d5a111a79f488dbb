"""Hard-coded Gr(2,6) in its Pluecker embedding, with toric deformation.

A 2-plane in C^6 is the row span of

    H(t) = [ 1  0  t1 t2 t3 t4 ]
           [ 0  1  t5 t6 t7 t8 ]

and its 15 Pluecker coordinates are the 2x2 minors of H, one per column pair
(i, j) with 1 <= i < j <= 6 in lexicographic order, so index 0 is (1,2),
index 1 is (1,3), ..., index 14 is (5,6).  The (1,2) coordinate is always 1
on this chart.

The weight vector omega = (3,2,1,0,0,1,2,3) induces the diagonal term order:
in every quadratic minor the main-diagonal product is the initial monomial.
Scaling each trailing monomial by u**(nu - omega.alpha) interpolates between
the Grassmannian (u = 1) and its toric degeneration (u = 0), where every
coordinate collapses to a single monomial.

The coordinate and relation tables are generated once at import from the
pair/quadruple combinatorics rather than typed by hand.
"""

from __future__ import annotations

import itertools

import numpy as np

OMEGA = np.array([3, 2, 1, 0, 0, 1, 2, 3], dtype=np.int64)

PAIRS: tuple[tuple[int, int], ...] = tuple(itertools.combinations(range(1, 7), 2))
PAIR_INDEX: dict[tuple[int, int], int] = {p: k for k, p in enumerate(PAIRS)}
QUADS: tuple[tuple[int, int, int, int], ...] = tuple(
    itertools.combinations(range(1, 7), 4)
)

# Chart entries of H: column c of row r is either a constant or chart var.
# _chart[r][c] = ("const", value) or ("var", index into t_1..t_8 as 0..7).
_chart = (
    (("const", 1.0), ("const", 0.0), ("var", 0), ("var", 1), ("var", 2), ("var", 3)),
    (("const", 0.0), ("const", 1.0), ("var", 4), ("var", 5), ("var", 6), ("var", 7)),
)


def _monomials_of_pair(a: int, b: int):
    """Expand the (a, b) minor H[0,a]H[1,b] - H[0,b]H[1,a] into monomials.

    Yields (coeff, vars) with vars a tuple of 0..7 chart-variable indices
    (possibly empty for the constant coordinate); zero terms are dropped.
    """
    for sign, (c1, c2) in ((1.0, (a, b)), (-1.0, (b, a))):
        kind1, v1 = _chart[0][c1 - 1]
        kind2, v2 = _chart[1][c2 - 1]
        coeff = sign
        vs = []
        if kind1 == "const":
            if v1 == 0.0:
                continue
            coeff *= v1
        else:
            vs.append(v1)
        if kind2 == "const":
            if v2 == 0.0:
                continue
            coeff *= v2
        else:
            vs.append(v2)
        yield coeff, tuple(vs)


def _build_embedding_tables():
    """Flat monomial tables for the deformed embedding.

    Variables are addressed in an augmented vector (t_1..t_8, 1) so that a
    slot index of 8 means "no variable".  For each coordinate exactly one
    monomial gets u-exponent 0 (the initial term of the diagonal order).
    """
    var1, var2, coeff, uexp, coord = [], [], [], [], []
    nu = np.zeros(15, dtype=np.int64)
    per_coord = []
    for k, (a, b) in enumerate(PAIRS):
        mons = list(_monomials_of_pair(a, b))
        weights = [int(sum(OMEGA[v] for v in vs)) for _, vs in mons]
        nu[k] = max(weights)
        per_coord.append([(c, vs, nu[k] - w) for (c, vs), w in zip(mons, weights)])
    for k, mons in enumerate(per_coord):
        for c, vs, e in mons:
            padded = tuple(vs) + (8,) * (2 - len(vs))
            var1.append(padded[0])
            var2.append(padded[1])
            coeff.append(c)
            uexp.append(int(e))
            coord.append(k)
    var1 = np.array(var1, dtype=np.intp)
    var2 = np.array(var2, dtype=np.intp)
    coeff = np.array(coeff, dtype=np.complex128)
    uexp = np.array(uexp, dtype=np.int64)
    coord = np.array(coord, dtype=np.intp)
    scatter = np.zeros((len(coord), 15), dtype=np.complex128)
    scatter[np.arange(len(coord)), coord] = 1.0
    # One-hot variable selectors for the two slots (zero row for slot 8).
    sel1 = np.zeros((len(coord), 8), dtype=np.complex128)
    sel2 = np.zeros((len(coord), 8), dtype=np.complex128)
    for i in range(len(coord)):
        if var1[i] < 8:
            sel1[i, var1[i]] = 1.0
        if var2[i] < 8:
            sel2[i, var2[i]] = 1.0
    return var1, var2, coeff, uexp, coord, nu, scatter, sel1, sel2


(
    _MVAR1,
    _MVAR2,
    _MCOEF,
    _MUEXP,
    _MCOORD,
    NU,
    _MSCATTER,
    _MSEL1,
    _MSEL2,
) = _build_embedding_tables()

_N_MON = _MVAR1.shape[0]

# Flattened (monomial -> coordinate x variable) maps so the Jacobian is one
# plain matmul; einsum dispatch costs more than the arithmetic at this size.
_JT_MAP1 = (_MSCATTER[:, :, None] * _MSEL1[:, None, :]).reshape(_N_MON, 15 * 8)
_JT_MAP2 = (_MSCATTER[:, :, None] * _MSEL2[:, None, :]).reshape(_N_MON, 15 * 8)
_JT_MAP = np.concatenate([_JT_MAP1, _JT_MAP2], axis=0)

_MAX_UEXP = int(_MUEXP.max())


def _u_powers(u: np.ndarray) -> np.ndarray:
    """u**e for all monomial exponents via cumulative products (no complex pow)."""
    b = u.shape[0]
    table = np.empty((b, _MAX_UEXP + 1), dtype=np.complex128)
    table[:, 0] = 1.0
    for e in range(1, _MAX_UEXP + 1):
        table[:, e] = table[:, e - 1] * u
    return table[:, _MUEXP]


def _build_relation_tables():
    """Three-term quadrics p_ij p_kl - p_ik p_jl + p_il p_jk per 4-subset."""
    left = np.zeros((15, 3), dtype=np.intp)
    right = np.zeros((15, 3), dtype=np.intp)
    sign = np.zeros((15, 3), dtype=np.complex128)
    for r, (i, j, k, l) in enumerate(QUADS):
        terms = (
            (1.0, (i, j), (k, l)),
            (-1.0, (i, k), (j, l)),
            (1.0, (i, l), (j, k)),
        )
        for t, (s, pa, pb) in enumerate(terms):
            left[r, t] = PAIR_INDEX[pa]
            right[r, t] = PAIR_INDEX[pb]
            sign[r, t] = s
    # The 6 coordinates of a relation are distinct, so its Jacobian row is a
    # pure scatter: flat target slots for d/d(left) and d/d(right) terms.
    cols = np.concatenate(
        [
            (np.arange(15)[:, None] * 15 + left).ravel(),
            (np.arange(15)[:, None] * 15 + right).ravel(),
        ]
    )
    return left, right, sign, cols


_RLEFT, _RRIGHT, _RSIGN, _RJCOLS = _build_relation_tables()


def _as_batch(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=np.complex128)
    if arr.ndim == 1:
        return arr[None, :], True
    return arr, False


def _augment(t_arr: np.ndarray) -> np.ndarray:
    b = t_arr.shape[0]
    aug = np.empty((b, 9), dtype=np.complex128)
    aug[:, :8] = t_arr
    aug[:, 8] = 1.0
    return aug


def embed_u_many(t_batch, u_batch) -> np.ndarray:
    """Deformed Pluecker coordinates for a batch of chart points.

    t_batch: (B, 8); u_batch: scalar or (B,).  Returns (B, 15).
    """
    t_arr = np.asarray(t_batch, dtype=np.complex128)
    b = t_arr.shape[0]
    u = np.broadcast_to(np.asarray(u_batch, dtype=np.complex128), (b,))
    aug = _augment(t_arr)
    mvals = _MCOEF * aug[:, _MVAR1] * aug[:, _MVAR2] * _u_powers(u)
    return mvals @ _MSCATTER


def embed_u_jacobian_many(t_batch, u_batch, want_du: bool = True):
    """Values plus analytic derivatives in t and (optionally) u for a batch.

    Returns (P (B,15), Jt (B,15,8), Ju (B,15) or None).
    """
    t_arr = np.asarray(t_batch, dtype=np.complex128)
    b = t_arr.shape[0]
    u = np.broadcast_to(np.asarray(u_batch, dtype=np.complex128), (b,))
    aug = _augment(t_arr)
    f1 = aug[:, _MVAR1]
    f2 = aug[:, _MVAR2]
    base = _MCOEF * _u_powers(u)
    mvals = base * f1 * f2
    p = mvals @ _MSCATTER
    stacked = np.empty((b, 2 * _N_MON), dtype=np.complex128)
    stacked[:, :_N_MON] = base * f2
    stacked[:, _N_MON:] = base * f1
    jt = (stacked @ _JT_MAP).reshape(b, 15, 8)
    if not want_du:
        return p, jt, None
    # d/du: exponent e pulls down, u**(e-1); terms with e = 0 vanish.
    epos = _MUEXP >= 1
    du = np.zeros((b, _N_MON), dtype=np.complex128)
    du[:, epos] = (
        _MCOEF[None, epos]
        * _MUEXP[None, epos]
        * u[:, None] ** (_MUEXP[None, epos] - 1)
        * f1[:, epos]
        * f2[:, epos]
    )
    ju = du @ _MSCATTER
    return p, jt, ju


def pluecker_embed(t) -> np.ndarray:
    """All 15 2x2 minors of H(t), lex pair order; the (1,2) slot is 1."""
    tb, single = _as_batch(t)
    p = embed_u_many(tb, 1.0 + 0.0j)
    return p[0] if single else p


def pluecker_embed_u(t, u) -> np.ndarray:
    """Deformed coordinates; equals pluecker_embed at u = 1, initial terms at u = 0."""
    tb, single = _as_batch(t)
    p = embed_u_many(tb, u)
    return p[0] if single else p


def pluecker_embed_jacobian(t, u):
    """Analytic (15, 8) Jacobian in t and the (15,) derivative in u."""
    tb, _ = _as_batch(t)
    _, jt, ju = embed_u_jacobian_many(tb, u)
    return jt[0], ju[0]


def relations_many(p_batch) -> np.ndarray:
    """Evaluate the 15 Pluecker quadrics on a batch of 15-vectors."""
    p = np.asarray(p_batch, dtype=np.complex128)
    return (_RSIGN[None] * p[:, _RLEFT] * p[:, _RRIGHT]).sum(axis=2)


def relations_jacobian_many(p_batch) -> np.ndarray:
    """Batch Jacobians (B, 15, 15) of the Pluecker quadrics."""
    p = np.asarray(p_batch, dtype=np.complex128)
    b = p.shape[0]
    vals = np.empty((b, 90), dtype=np.complex128)
    vals[:, :45] = (_RSIGN[None] * p[:, _RRIGHT]).reshape(b, 45)
    vals[:, 45:] = (_RSIGN[None] * p[:, _RLEFT]).reshape(b, 45)
    flat = np.zeros((b, 15 * 15), dtype=np.complex128)
    flat[:, _RJCOLS] = vals
    return flat.reshape(b, 15, 15)


def pluecker_relations(p) -> np.ndarray:
    """The 15 three-term quadrics, one per 4-subset of {1..6} in lex order."""
    pb, single = _as_batch(p)
    q = relations_many(pb)
    return q[0] if single else q


def pluecker_relations_jacobian(p) -> np.ndarray:
    """Analytic 15 x 15 Jacobian of pluecker_relations."""
    pb, _ = _as_batch(p)
    return relations_jacobian_many(pb)[0]
