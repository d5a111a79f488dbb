"""Inverse problem: recover a linear embedding mapping a self-dual
configuration onto a linear section of Gr(2,6).

The unknown embedding is written L = L_start + sum_k ell_k A_k with 69 free
coefficients (the generic fiber of the slicing map has dimension 36 inside
the 105 entries, so 69 random linear constraints cut it to points).  The
equations demand that every Pluecker quadric vanishes on L gamma_i(s) for
the 14 columns of [I+S | I-S]: 210 equations, heavily overdetermined, with
the 21 skew parameters s as homotopy parameters.

A start pair comes from the forward direction: slicing a random complex
section yields a configuration whose skew normal form makes ell = 0 an exact
solution at s = s_start.  Lifting a target configuration then tracks the
straight segment s_start -> s_target in C^21 with Gauss-Newton correction;
because s_start is intrinsically complex the segment misses the real-
codimension-2 branch locus with probability one.  The composed map
L_hat = L (I + S_target) A_target^{-1} is verified independently on the
original columns.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from . import grassmann, linalg, selfdual, slicing, tracker
from .errors import (
    CayleySingular,
    DegenerateConfig,
    PathFailed,
    RankDeficient,
    ResidualCheckFailed,
    SingularMatrix,
    StartResidualTooLarge,
)
from .linalg import DEFAULT_TOLS, Tolerances
from .selfdual import DIM, N_POINTS, SKEW_PAIRS, NormalFormCert
from .tracker import DEFAULT_OPTIONS, TrackerOptions

N_VARS = 69
N_EQUATIONS = N_POINTS * 15  # 210
N_SKEW = len(SKEW_PAIRS)  # 21


@dataclass
class LiftProblem:
    """Immutable start data for lifting homotopies.

    directions are the 69 random matrices multiplying the variables; the
    start solution is always the zero vector, which solves the system at
    s = s_start by construction.
    """

    l_start: np.ndarray  # (15, 7)
    directions: np.ndarray  # (69, 15, 7)
    s_start: np.ndarray  # (21,)
    start_solution: np.ndarray = field(
        default_factory=lambda: np.zeros(N_VARS, dtype=np.complex128)
    )
    seed: int | None = None


@dataclass
class LiftReport:
    max_residual: float
    per_point: np.ndarray  # (14,)
    rank: int
    injectivity_margin: float
    degenerate: bool


@dataclass
class LiftResult:
    ell: np.ndarray  # (69,)
    l_matrix: np.ndarray  # (15, 7)
    l_hat: np.ndarray  # (15, 7)
    max_plucker_residual: float
    path_stats: tracker.PathResult
    s_target: np.ndarray = None
    report: LiftReport = None


class LiftSystem(tracker.EvaluatedSystem):
    """q_k(L(ell) gamma_i(s)) = 0: variables ell in C^69, parameters s in C^21.

    Per-parameter caches hold gamma(s) and the direction images A_k gamma_i,
    recomputed only when s changes (once per predictor step); a lock keeps
    concurrent evaluation safe.
    """

    m = N_EQUATIONS
    n = N_VARS
    q = N_SKEW

    def __init__(self, problem: LiftProblem):
        self.problem = problem
        self._directions_flat = np.ascontiguousarray(
            problem.directions.reshape(N_VARS, 15 * DIM)
        )
        self._lock = threading.Lock()
        self._cache_key = None
        self._cache = None

    def _per_s(self, s: np.ndarray):
        key = s.tobytes()
        with self._lock:
            if key == self._cache_key:
                return self._cache
        s_mat = selfdual.skew_from_params(s)
        eye = np.eye(DIM, dtype=np.complex128)
        gamma = np.concatenate([eye + s_mat, eye - s_mat], axis=1)  # (7, 14)
        # direction images per point: b[i] = (A_k gamma_i)_r as (15, 69)
        d = self.problem.directions
        b = (d.reshape(N_VARS * 15, DIM) @ gamma).reshape(N_VARS, 15, N_POINTS)
        b = np.ascontiguousarray(b.transpose(2, 1, 0))  # (14, 15, 69)
        with self._lock:
            self._cache_key = key
            self._cache = (gamma, b)
        return gamma, b

    def _points(self, ell: np.ndarray, gamma: np.ndarray):
        l_mat = self.problem.l_start + (ell @ self._directions_flat).reshape(15, DIM)
        return l_mat, np.ascontiguousarray((l_mat @ gamma).T)  # (14, 15)

    def _skew_tangents(self, l_mat: np.ndarray):
        """t[i, :, k] = L d(gamma_i)/d(s_k): four nonzero blocks per pair."""
        t = np.zeros((N_POINTS, 15, N_SKEW), dtype=np.complex128)
        for k, (a, b) in enumerate(SKEW_PAIRS):
            t[b, :, k] += l_mat[:, a]
            t[a, :, k] -= l_mat[:, b]
            t[DIM + b, :, k] -= l_mat[:, a]
            t[DIM + a, :, k] += l_mat[:, b]
        return t

    def evaluate(self, x, params):
        ell = np.asarray(x, dtype=np.complex128)
        s = np.asarray(params, dtype=np.complex128)
        gamma, b = self._per_s(s)
        l_mat, pts = self._points(ell, gamma)
        f = grassmann.relations_many(pts).reshape(N_EQUATIONS)
        jq = grassmann.relations_jacobian_many(pts)  # (14, 15, 15)
        j_ell = (jq @ b).reshape(N_EQUATIONS, N_VARS)
        j_s = (jq @ self._skew_tangents(l_mat)).reshape(N_EQUATIONS, N_SKEW)
        return f, j_ell, j_s

    def residual_batch(self, x_batch, p_batch):
        out = np.empty((x_batch.shape[0], N_EQUATIONS), dtype=np.complex128)
        for i in range(x_batch.shape[0]):
            gamma, _ = self._per_s(p_batch[i])
            _, pts = self._points(x_batch[i], gamma)
            out[i] = grassmann.relations_many(pts).reshape(N_EQUATIONS)
        return out

    def residual_jacobian_batch(self, x_batch, p_batch):
        bsz = x_batch.shape[0]
        f = np.empty((bsz, N_EQUATIONS), dtype=np.complex128)
        jx = np.empty((bsz, N_EQUATIONS, N_VARS), dtype=np.complex128)
        for i in range(bsz):
            gamma, b = self._per_s(p_batch[i])
            _, pts = self._points(x_batch[i], gamma)
            f[i] = grassmann.relations_many(pts).reshape(N_EQUATIONS)
            jq = grassmann.relations_jacobian_many(pts)
            jx[i] = (jq @ b).reshape(N_EQUATIONS, N_VARS)
        return f, jx


def build_lift_system(problem: LiftProblem) -> LiftSystem:
    return LiftSystem(problem)


def snf_with_retries(gamma, rng, tols: Tolerances = DEFAULT_TOLS, retries: int = 32):
    """Skew normal form, permuting the column partition on degenerate cases.

    The normal form only needs some ordering of the points, so a -1
    eigenvalue of the orthogonal factor or a singular leading block is
    handled by re-partitioning; genuine non-self-duality still raises.
    """
    g = selfdual.as_config(gamma)
    try:
        s, cert = selfdual.skew_normal_form(g, rng, tols)
        return s, cert, np.arange(N_POINTS)
    except (CayleySingular, DegenerateConfig, SingularMatrix):
        pass
    for _ in range(retries):
        perm = rng.permutation(N_POINTS)
        try:
            s, cert = selfdual.skew_normal_form(g[:, perm], rng, tols)
            return s, cert, perm
        except (CayleySingular, DegenerateConfig, SingularMatrix):
            continue
    raise CayleySingular("no column ordering produced a skew normal form")


def _right_inverse_compose(l_mat, s_mat, a_mat, tols: Tolerances):
    """L (I + S) A^{-1} without forming the inverse."""
    eye = np.eye(DIM, dtype=np.complex128)
    tmp = l_mat @ (eye + s_mat)
    return linalg.lu_solve(a_mat.T, tmp.T, tols).T


def _normalized_images(gamma: np.ndarray, l_hat: np.ndarray):
    """Images L_hat gamma_i scaled to unit max-modulus (zero-safe)."""
    images = (l_hat @ gamma).T  # (14, 15)
    scale = np.abs(images).max(axis=1)
    scale[scale == 0.0] = 1.0
    return images / scale[:, None]


def verify_lift(gamma, l_hat, tols: Tolerances = DEFAULT_TOLS) -> LiftReport:
    """Independent acceptance gate: all 15 quadrics at all 14 images.

    Residuals are evaluated at points normalized to unit max-modulus; the
    rank and the smallest QR diagonal of L_hat expose degenerate embeddings
    that would pass the residual test trivially.
    """
    g = selfdual.as_config(gamma)
    l_hat = np.asarray(l_hat, dtype=np.complex128)
    if l_hat.shape != (15, DIM):
        raise ValueError("embedding matrix must be 15x7")
    images = _normalized_images(g, l_hat)
    per_point = np.abs(grassmann.relations_many(images)).max(axis=1)
    rank = linalg.numerical_rank(l_hat, tols)
    margin = linalg.smallest_qr_diagonal(l_hat)
    return LiftReport(
        max_residual=float(per_point.max()),
        per_point=per_point,
        rank=rank,
        injectivity_margin=margin,
        degenerate=rank < DIM,
    )


def make_start_pair(
    seed: int,
    opts: TrackerOptions = DEFAULT_OPTIONS,
    tols: Tolerances = DEFAULT_TOLS,
) -> tuple[LiftProblem, np.ndarray, NormalFormCert]:
    """Slice a random complex section and turn it into lifting start data.

    With L0 spanning the section and (s, cert) the skew normal form of the
    recovered configuration, L_start = L0 A (I + S)^{-1} maps the skew
    normal form columns onto the sliced Grassmannian points up to scaling,
    so ell = 0 solves the lifting equations at s_start exactly.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    a_target = rng.standard_normal(slicing.SECTION_SHAPE) + 1j * rng.standard_normal(
        slicing.SECTION_SHAPE
    )
    result = slicing.slice_section(a_target, opts=opts, rng=rng, tols=tols)
    l0 = linalg.nullspace(a_target, tols)
    gamma = result.gamma
    s_start, cert, perm = snf_with_retries(gamma, rng, tols)
    s_mat = selfdual.skew_from_params(s_start)
    eye = np.eye(DIM, dtype=np.complex128)
    # L_start (I + S) = L0 A  =>  transpose solve, no explicit inverse
    l_start = linalg.lu_solve((eye + s_mat).T, (l0 @ cert.a).T, tols).T
    directions = rng.standard_normal((N_VARS, 15, DIM)) + 1j * rng.standard_normal(
        (N_VARS, 15, DIM)
    )
    stacked = directions.reshape(N_VARS, 15 * DIM).T  # (105, 69)
    if linalg.numerical_rank(stacked, tols) != N_VARS:
        raise RankDeficient("direction matrices are linearly dependent")
    problem = LiftProblem(
        l_start=l_start,
        directions=directions,
        s_start=s_start,
        seed=seed,
    )
    gamma_snf = selfdual.config_from_skew(s_start, tols)
    images = _normalized_images(gamma_snf, l_start)
    start_residual = float(np.abs(grassmann.relations_many(images)).max())
    if start_residual >= 1e-9:
        raise StartResidualTooLarge(
            f"start pair residual {start_residual:.2e} exceeds 1e-9"
        )
    return problem, gamma, cert


def lift(
    gamma,
    problem: LiftProblem,
    opts: TrackerOptions = DEFAULT_OPTIONS,
    seed: int = 0,
    gamma_arc: float = 0.0,
    squared_up: bool = False,
    progress=None,
    tols: Tolerances = DEFAULT_TOLS,
) -> LiftResult:
    """Track the lifting system from the start pair to the given configuration.

    The single path runs from (ell = 0, s_start) along a straight segment to
    s_target, the skew normal form of gamma; Gauss-Newton handles the 210x69
    shape.  The composed embedding L_hat = L (I + S) A^{-1} is then verified
    on gamma's original columns, which also catches path jumps onto branches
    that only solve the least-squares problem.
    """
    g = selfdual.as_config(gamma)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    selfdual.self_dual_witness(g, rng, tols)
    s_target, cert, _perm = snf_with_retries(g, rng, tols)
    system: tracker.EvaluatedSystem = LiftSystem(problem)
    if squared_up:
        multiplier = rng.standard_normal((N_VARS, N_EQUATIONS)) + 1j * (
            rng.standard_normal((N_VARS, N_EQUATIONS))
        )
        system = tracker.SquaredUpSystem(system, multiplier / np.sqrt(N_EQUATIONS))
    if gamma_arc:
        bump = gamma_arc * (
            rng.standard_normal(N_SKEW) + 1j * rng.standard_normal(N_SKEW)
        )
        path = tracker.ArcPath(problem.s_start, s_target, bump)
    else:
        path = tracker.StraightLinePath(problem.s_start, s_target)
    stats = tracker.track_path(system, problem.start_solution, path, opts, progress)
    # A CorrectorFailed status can only mean the final refinement stalled at
    # the floating-point floor of the raw quadrics (their scale grows with
    # the squared image magnitudes, which |ell| does not see).  The endpoint
    # is still at s_target, so let the independent residual gate decide; any
    # other status means the path never arrived.
    if not stats.success and stats.status is not tracker.PathStatus.CORRECTOR_FAILED:
        raise PathFailed(
            f"lift path ended with {stats.status.value} "
            f"(residual {stats.residual:.2e} after {stats.steps_taken} steps)",
            stats,
        )
    ell = stats.endpoint
    l_mat = problem.l_start + np.tensordot(ell, problem.directions, 1)
    s_mat = selfdual.skew_from_params(s_target)
    l_hat = _right_inverse_compose(l_mat, s_mat, cert.a, tols)
    report = verify_lift(g, l_hat, tols)
    if report.degenerate:
        raise ResidualCheckFailed("composed embedding is rank-deficient")
    if report.max_residual >= tols.lift_tol:
        raise ResidualCheckFailed(
            f"relation residual {report.max_residual:.2e} exceeds "
            f"{tols.lift_tol:.0e}; the tracked branch is spurious"
        )
    return LiftResult(
        ell=ell,
        l_matrix=l_mat,
        l_hat=l_hat,
        max_plucker_residual=report.max_residual,
        path_stats=stats,
        s_target=s_target,
        report=report,
    )
