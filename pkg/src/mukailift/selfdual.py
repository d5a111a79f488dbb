"""Configurations of 14 points in P^6: self-duality, Gale duality, normal forms.

A configuration is a 7 x 14 complex matrix whose columns are homogeneous
coordinates.  Self-duality means an invertible diagonal witness L with
G L G^T = 0 (plain transpose throughout: the pairing is bilinear, never
Hermitian).  The orthogonal normal form rescales columns by principal square
roots of the witness and reduces the first block to the identity; the skew
normal form [I+S | I-S] is its Cayley-transformed 21-parameter chart.

Randomized searches (witness entries, equivalence certificates) draw from an
explicitly passed generator so every result is reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import linalg
from .errors import (
    CayleySingular,
    DegenerateConfig,
    NotSelfDual,
    RankDeficient,
    SingularMatrix,
)
from .linalg import DEFAULT_TOLS, Tolerances

N_POINTS = 14
DIM = 7

# Row-major upper-triangle pair order for packing Skew(7) into 21 scalars.
SKEW_PAIRS: tuple[tuple[int, int], ...] = tuple(
    itertools.combinations(range(DIM), 2)
)

_UPPER_I, _UPPER_J = np.triu_indices(DIM)


def as_config(gamma) -> np.ndarray:
    """Validate a 7 x 14 configuration: finite entries, no zero column."""
    g = np.ascontiguousarray(gamma, dtype=np.complex128)
    if g.shape != (DIM, N_POINTS):
        raise ValueError(f"expected a {DIM}x{N_POINTS} configuration, got {g.shape}")
    if not np.isfinite(g).all():
        raise ValueError("configuration has non-finite entries")
    if (np.abs(g).max(axis=0) == 0.0).any():
        raise ValueError("configuration has a zero column")
    return g


def skew_from_params(s) -> np.ndarray:
    """Unpack 21 scalars into S in Skew(7), row-major upper triangle."""
    v = np.asarray(s, dtype=np.complex128).ravel()
    if v.size != len(SKEW_PAIRS):
        raise ValueError("expected 21 skew parameters")
    m = np.zeros((DIM, DIM), dtype=np.complex128)
    for k, (i, j) in enumerate(SKEW_PAIRS):
        m[i, j] = v[k]
        m[j, i] = -v[k]
    return m


def params_from_skew(s_mat) -> np.ndarray:
    """Pack the upper triangle of a skew matrix into 21 scalars."""
    m = np.asarray(s_mat, dtype=np.complex128)
    if m.shape != (DIM, DIM):
        raise ValueError("expected a 7x7 matrix")
    return np.array([m[i, j] for i, j in SKEW_PAIRS], dtype=np.complex128)


@dataclass
class NormalFormCert:
    """Witnesses the reduction A [I | P] = Gamma diag(lambda_scale).

    P is special orthogonal (PP^T = I, det P = 1); s holds the packed Cayley
    image once a skew normal form has been computed, else None.
    """

    p: np.ndarray
    a: np.ndarray
    lambda_scale: np.ndarray
    s: np.ndarray | None = None


def _witness_system(gamma: np.ndarray) -> np.ndarray:
    """28 x 14 evaluation matrix of the upper triangle of sum_i l_i g_i g_i^T."""
    return gamma[_UPPER_I, :] * gamma[_UPPER_J, :]


def self_dual_witness(gamma, rng=None, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Invertible diagonal witness of self-duality, or raise NotSelfDual.

    Solves the 28 x 14 linear system for the diagonal entries, then looks for
    a nullspace element with no small entry (random complex combinations,
    up to 8 tries).  The result has unit 2-norm with its first entry rotated
    onto the positive real axis, so golden comparisons are deterministic.
    """
    g = as_config(gamma)
    if rng is None:
        rng = np.random.default_rng(0x5D)
    basis = linalg.nullspace(_witness_system(g), tols)
    k = basis.shape[1]
    if k == 0:
        raise NotSelfDual("witness system has trivial nullspace")
    candidates = [basis[:, 0]] if k == 1 else []
    for _ in range(8):
        coeff = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        candidates.append(basis @ coeff)
    for lam in candidates:
        mags = np.abs(lam)
        if mags.min() > tols.witness_tol * mags.max():
            lam = lam / np.linalg.norm(lam)
            phase = lam[0] / abs(lam[0])
            return lam / phase
    raise NotSelfDual("every witness candidate has a near-zero entry")


def witness_residual(gamma, lam) -> float:
    """max-norm of Gamma diag(lam) Gamma^T."""
    g = as_config(gamma)
    return float(np.abs((g * np.asarray(lam)) @ g.T).max())


def gale_transform(gamma, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Rows span the kernel of the configuration matrix (plain transpose).

    Defined up to left GL(7) and column scaling; an involution on
    configurations up to projective equivalence, whose fixed points are the
    self-dual ones.
    """
    g = as_config(gamma)
    kernel = linalg.nullspace(g, tols)
    if kernel.shape[1] != DIM:
        raise RankDeficient(f"configuration has rank {N_POINTS - kernel.shape[1]} < 7")
    return np.ascontiguousarray(kernel.T)


def is_linearly_general(gamma, tols: Tolerances = DEFAULT_TOLS) -> bool:
    """True iff every 7 of the 14 points are linearly independent."""
    g = as_config(gamma)
    g = g / np.linalg.norm(g, axis=0)
    cols = np.array(list(itertools.combinations(range(N_POINTS), DIM)))
    stacks = g[:, cols].transpose(1, 0, 2)
    dets = np.abs(np.linalg.det(stacks))
    return bool(dets.min() > tols.general_tol)


def _subset_ranks_ok(g: np.ndarray, strict: bool, tols: Tolerances) -> bool:
    """Span inequality rank(Y) >= #Y/2 (or > for proper Y) over column subsets.

    A batched unpivoted QR screens all subsets of one size at once; its
    nonzero-diagonal count never exceeds the true rank, so subsets that pass
    the bound are sound and only apparent violations are re-checked with a
    pivoted factorization.
    """
    top = N_POINTS - 1 if strict else N_POINTS  # full set always hits equality
    for size in range(1, top + 1):
        bound = 3.5 * size / 7.0  # (n+1) #Y / m with n+1 = 7, m = 14
        subsets = np.array(list(itertools.combinations(range(N_POINTS), size)))
        stacks = g[:, subsets].transpose(1, 0, 2)
        r = np.linalg.qr(stacks, mode="r")
        diag = np.abs(np.diagonal(r, axis1=1, axis2=2))
        lead = diag.max(axis=1, keepdims=True)
        ranks = np.count_nonzero(
            diag > tols.rank_tol * np.maximum(lead, 1e-300), axis=1
        )
        suspect = ranks <= bound if strict else ranks < bound
        for idx in np.flatnonzero(suspect):
            true_rank = linalg.numerical_rank(g[:, subsets[idx]], tols)
            if strict:
                if true_rank <= bound:
                    return False
            elif true_rank < bound:
                return False
    return True


def is_semistable(gamma, tols: Tolerances = DEFAULT_TOLS) -> tuple[bool, bool]:
    """(semistable, stable) flags via brute force over all 16383 subsets.

    Stability demands strict inequality on proper subsets; the full
    configuration meets the bound with equality by definition.
    """
    g = as_config(gamma)
    g = g / np.linalg.norm(g, axis=0)
    semistable = _subset_ranks_ok(g, strict=False, tols=tols)
    stable = semistable and _subset_ranks_ok(g, strict=True, tols=tols)
    return semistable, stable


def orthogonal_normal_form(
    gamma, rng=None, tols: Tolerances = DEFAULT_TOLS
) -> NormalFormCert:
    """Reduce a self-dual configuration to [I_7 | P] with P in SO(7).

    Columns are rescaled by principal square roots of the witness (entries
    1..7 by sqrt(l_i), 8..14 by sqrt(-l_i)); the rescaled first block becomes
    A and P = A^{-1} (rescaled second block).  A negative determinant is
    repaired by flipping the last column of P, recorded in lambda_scale.
    """
    g = as_config(gamma)
    lam = self_dual_witness(g, rng, tols)
    scale = np.concatenate([np.sqrt(lam[:DIM]), np.sqrt(-lam[DIM:])])
    rescaled = g * scale
    a = rescaled[:, :DIM]
    try:
        p = linalg.lu_solve(a, rescaled[:, DIM:], tols)
    except SingularMatrix as exc:
        raise SingularMatrix("first seven columns are not independent") from exc
    det = linalg.lu_det(p, tols)
    if det.real < 0.0:
        p[:, -1] = -p[:, -1]
        scale[-1] = -scale[-1]
    return NormalFormCert(p=p, a=a, lambda_scale=scale)


def cayley(m, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """(I - M)(I + M)^{-1}; self-inverse, exchanges Skew(7) and SO(7)."""
    m = np.asarray(m, dtype=np.complex128)
    eye = np.eye(m.shape[0], dtype=np.complex128)
    return linalg.lu_solve(eye + m, eye - m, tols)


def skew_normal_form(
    gamma, rng=None, tols: Tolerances = DEFAULT_TOLS
) -> tuple[np.ndarray, NormalFormCert]:
    """Skew parameters s with [I+S | I-S] projectively equivalent to gamma."""
    cert = orthogonal_normal_form(gamma, rng, tols)
    try:
        s_mat = cayley(cert.p, tols)
    except SingularMatrix as exc:
        raise CayleySingular(
            "orthogonal factor has an eigenvalue at -1; permute columns and retry"
        ) from exc
    skew_defect = np.abs(s_mat + s_mat.T).max()
    if skew_defect > 1e-6 * max(1.0, np.abs(s_mat).max()):
        raise CayleySingular(f"Cayley image not skew (defect {skew_defect:.2e})")
    s = params_from_skew(s_mat)
    cert.s = s
    return s, cert


def config_from_skew(s, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Build [I+S | I-S]; rejects coinciding columns (e.g. S = 0)."""
    s_mat = skew_from_params(s)
    eye = np.eye(DIM, dtype=np.complex128)
    g = np.concatenate([eye + s_mat, eye - s_mat], axis=1)
    norms = np.linalg.norm(g, axis=0)
    if norms.min() == 0.0:
        raise DegenerateConfig("zero column in skew normal form")
    unit = g / norms
    gram = np.abs(unit.conj().T @ unit)
    np.fill_diagonal(gram, 0.0)
    worst = gram.max()
    if worst >= 1.0 or np.sqrt(max(0.0, 1.0 - worst * worst)) < 1e-10:
        raise DegenerateConfig("two columns coincide as projective points")
    return g


def projective_equivalent(
    g1, g2, rng=None, tols: Tolerances = DEFAULT_TOLS
) -> tuple[bool, tuple[np.ndarray, np.ndarray] | None]:
    """Decide A g1 = g2 D for invertible A and diagonal D.

    Returns (True, (A, D)) with an explicit certificate, or (False, None).
    The 98 x 63 linear system in (A, D) is solved by nullspace; random
    combinations (8 tries) search for an element with A invertible and all
    diagonal entries away from zero.
    """
    m1 = as_config(g1)
    m2 = as_config(g2)
    if rng is None:
        rng = np.random.default_rng(0xE9)
    rows = DIM * N_POINTS
    sys = np.zeros((rows, DIM * DIM + N_POINTS), dtype=np.complex128)
    for i in range(N_POINTS):
        for r in range(DIM):
            row = i * DIM + r
            sys[row, r * DIM : (r + 1) * DIM] = m1[:, i]
            sys[row, DIM * DIM + i] = -m2[r, i]
    basis = linalg.nullspace(sys, tols)
    k = basis.shape[1]
    if k == 0:
        return False, None
    candidates = [basis[:, 0]] if k == 1 else []
    for _ in range(8):
        coeff = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        candidates.append(basis @ coeff)
    for vec in candidates:
        a = vec[: DIM * DIM].reshape(DIM, DIM)
        d = vec[DIM * DIM :]
        d_mags = np.abs(d)
        if d_mags.max() == 0.0 or d_mags.min() <= tols.witness_tol * d_mags.max():
            continue
        a_diag = scipy.linalg.qr(a, mode="r", check_finite=False)[0]
        a_mags = np.abs(np.diag(a_diag))
        if a_mags.max() == 0.0 or a_mags.min() <= tols.witness_tol * a_mags.max():
            continue
        resid = np.abs(a @ m1 - m2 * d).max()
        scale = max(np.abs(m1).max(), np.abs(m2).max())
        if resid <= 1e-8 * scale * max(1.0, np.abs(a).max(), d_mags.max()):
            return True, (a, d)
    return False, None
