"""Forward problem: slice Gr(2,6) with a 7-dimensional linear subspace of P^14.

The section is the projectivized kernel of an 8 x 15 matrix A; intersecting
it with the Grassmannian means solving the 8 equations A p_u(t) = 0 in the
8 chart coordinates.  Three homotopy stages do the work:

  1. a total-degree bootstrap (256 paths, gamma trick) solves the toric
     system at u = 0 for one random complex section; 14 paths arrive,
  2. u is tracked 0 -> 1 at that fixed section, landing on the Grassmannian,
  3. the section is tracked from the complex start to the requested target.

Stages 1-2 are done once per start and cached; every further slice or census
sample reuses them and only pays for stage 3 (14 paths).  The recovered
configuration gamma solves L gamma_k = Z_k column by column, where L spans
the kernel of A, and is always checked for self-duality.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import grassmann, linalg, selfdual, tracker
from .errors import RankDeficient, RecoveryFailed, WrongCount
from .linalg import DEFAULT_TOLS, Tolerances
from .tracker import DEFAULT_OPTIONS, PathStatus, TrackerOptions

N_SOLUTIONS = 14
SECTION_SHAPE = (8, 15)
N_PARAMS = 1 + 120  # u followed by the row-major section entries


def pack_params(u, a) -> np.ndarray:
    """Parameter vector (u, a_11, ..., a_8_15) of the deformed system."""
    a = np.asarray(a, dtype=np.complex128)
    if a.shape != SECTION_SHAPE:
        raise ValueError(f"section matrix must be {SECTION_SHAPE}")
    return np.concatenate([[complex(u)], a.ravel()])


class SlicingSystem(tracker.EvaluatedSystem):
    """A(p_{0,u}(t), ..., p_{14,u}(t))^T = 0 with parameters (u, entries of A)."""

    m = 8
    n = 8
    q = N_PARAMS

    def __init__(self, a_target=None):
        self.a_target = (
            None if a_target is None else np.asarray(a_target, dtype=np.complex128)
        )

    def evaluate(self, x, params):
        xb = np.asarray(x, dtype=np.complex128)[None, :]
        params = np.asarray(params, dtype=np.complex128)
        a = params[1:].reshape(SECTION_SHAPE)
        p_emb, jt, ju = grassmann.embed_u_jacobian_many(xb, params[0])
        f = a @ p_emb[0]
        jx = a @ jt[0]
        jp = np.zeros((8, N_PARAMS), dtype=np.complex128)
        jp[:, 0] = a @ ju[0]
        for e in range(8):
            jp[e, 1 + 15 * e : 1 + 15 * (e + 1)] = p_emb[0]
        return f, jx, jp

    def residual_batch(self, x_batch, p_batch):
        u = p_batch[:, 0]
        a = p_batch[:, 1:].reshape(-1, *SECTION_SHAPE)
        p_emb = grassmann.embed_u_many(x_batch, u)
        return (a @ p_emb[:, :, None])[:, :, 0]

    def residual_jacobian_batch(self, x_batch, p_batch):
        u = p_batch[:, 0]
        a = p_batch[:, 1:].reshape(-1, *SECTION_SHAPE)
        p_emb, jt, _ = grassmann.embed_u_jacobian_many(x_batch, u, want_du=False)
        f = (a @ p_emb[:, :, None])[:, :, 0]
        jx = a @ jt
        return f, jx

    def full_batch(self, x_batch, p_batch, dp_batch):
        u = p_batch[:, 0]
        a = p_batch[:, 1:].reshape(-1, *SECTION_SHAPE)
        du = None if dp_batch is None else dp_batch[:, 0]
        moving_u = du is not None and bool(np.any(du != 0.0))
        p_emb, jt, ju = grassmann.embed_u_jacobian_many(x_batch, u, want_du=moving_u)
        f = (a @ p_emb[:, :, None])[:, :, 0]
        jx = a @ jt
        if dp_batch is None:
            return f, jx, None
        da = dp_batch[:, 1:].reshape(-1, *SECTION_SHAPE)
        jpdp = (da @ p_emb[:, :, None])[:, :, 0]
        if moving_u:
            jpdp += du[:, None] * (a @ ju[:, :, None])[:, :, 0]
        return f, jx, jpdp


def build_slicing_system(a_target) -> SlicingSystem:
    """System for a concrete target section (bound via pack_params)."""
    a = np.asarray(a_target, dtype=np.complex128)
    if a.shape != SECTION_SHAPE:
        raise ValueError(f"section matrix must be {SECTION_SHAPE}")
    return SlicingSystem(a)


def _distinct(points: np.ndarray, tol: float) -> bool:
    if len(points) < 2:
        return True
    diff = points[:, None, :] - points[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    dist += np.eye(len(points)) * (10.0 * tol)
    return bool(dist.min() > tol)


# The 242 bootstrap paths that leave the toric fiber drift to infinity; a
# coarser floor truncates them early without touching the 14 finite ones.
_BOOTSTRAP_MIN_STEP = 1e-10


def solve_toric_start(
    a_start,
    opts: TrackerOptions = DEFAULT_OPTIONS,
    rng=None,
    tols: Tolerances = DEFAULT_TOLS,
) -> np.ndarray:
    """Solutions of the degenerated system at u = 0 for a generic section.

    Total-degree bootstrap: the 8 equations are quadrics, so 2^8 = 256
    root-of-unity starts are tracked through a gamma-trick blend; exactly 14
    finite regular solutions must survive (the toric fiber has degree 14).
    Retries with a fresh gamma up to 3 times before raising WrongCount.
    """
    if rng is None:
        rng = np.random.default_rng(0xA7)
    system = SlicingSystem()
    toric = tracker.FrozenSystem(system, pack_params(0.0, a_start))
    boot_opts = TrackerOptions(
        initial_step=opts.initial_step,
        min_step=max(opts.min_step, _BOOTSTRAP_MIN_STEP),
        max_step=opts.max_step,
        corrector_tol=opts.corrector_tol,
        corrector_iters=opts.corrector_iters,
        divergence_bound=opts.divergence_bound,
        refine_tol=opts.refine_tol,
        step_expand=opts.step_expand,
        step_shrink=opts.step_shrink,
        successes_before_expand=opts.successes_before_expand,
    )
    last = None
    for _attempt in range(4):
        gamma = np.exp(2j * np.pi * rng.uniform())
        start_sys, starts = tracker.total_degree_start([2] * 8, gamma)
        blend = tracker.LinearBlendSystem(start_sys, toric, gamma)
        path = tracker.StraightLinePath([0.0], [1.0])
        results = tracker.track_all(blend, starts, path, boot_opts)
        good = np.array(
            [r.endpoint for r in results if r.status is PathStatus.SUCCESS]
        )
        if len(good):
            keep = []
            for pt in good:
                if all(
                    np.linalg.norm(pt - q) > tols.distinct_tol for q in keep
                ):
                    keep.append(pt)
            if len(keep) == N_SOLUTIONS:
                return np.array(keep)
            last = len(keep)
        else:
            last = 0
    raise WrongCount(
        f"toric start produced {last} distinct solutions, expected {N_SOLUTIONS}"
    )


@dataclass
class SliceStart:
    """Reusable stage 1-2 output: solutions at (u=1, a_start)."""

    a_start: np.ndarray
    chart_points: np.ndarray  # (14, 8)


@dataclass
class SliceResult:
    chart_points: np.ndarray  # (14, 8)
    plucker_points: np.ndarray  # (14, 15)
    gamma: np.ndarray  # (7, 14), columns scaled to unit max-modulus
    max_relation_residual: float
    recovery_residual: float
    witness: np.ndarray = field(default=None, repr=False)
    witness_residual: float = 0.0


def prepare_start(
    rng, opts: TrackerOptions = DEFAULT_OPTIONS, tols: Tolerances = DEFAULT_TOLS
) -> SliceStart:
    """Stages 1-2 at a fresh random complex section."""
    system = SlicingSystem()
    last_exc = None
    for _attempt in range(3):
        a_start = rng.standard_normal(SECTION_SHAPE) + 1j * rng.standard_normal(
            SECTION_SHAPE
        )
        try:
            toric_points = solve_toric_start(a_start, opts, rng, tols)
        except WrongCount as exc:
            last_exc = exc
            continue
        path = tracker.StraightLinePath(
            pack_params(0.0, a_start), pack_params(1.0, a_start)
        )
        results = tracker.track_all(system, toric_points, path, opts)
        good = np.array(
            [r.endpoint for r in results if r.status is PathStatus.SUCCESS]
        )
        if len(good) == N_SOLUTIONS and _distinct(good, tols.distinct_tol):
            return SliceStart(a_start=a_start, chart_points=good)
        last_exc = WrongCount(
            f"stage 2 kept {len(good)} paths, expected {N_SOLUTIONS}"
        )
    raise last_exc


def _stage3(
    a_target, start: SliceStart, opts: TrackerOptions
) -> list[tracker.PathResult]:
    system = SlicingSystem()
    path = tracker.StraightLinePath(
        pack_params(1.0, start.a_start), pack_params(1.0, a_target)
    )
    return tracker.track_all(system, start.chart_points, path, opts)


def _stage3_endpoints(
    a_target, start: SliceStart, opts: TrackerOptions, tols: Tolerances
) -> np.ndarray | None:
    """Stage-3 endpoints, or None when fewer than 14 distinct points survive.

    Solutions near the chart boundary have huge coordinates, and the
    tracker's linear-in-|x| success bound is unattainable there even though
    the point is converged to the floating-point floor.  Such endpoints are
    salvaged when the unit-normalized embedded point genuinely lies on the
    Grassmannian (relations < 1e-10) and in the section (|A z| < 1e-9).
    """
    results = _stage3(a_target, start, opts)
    system = SlicingSystem()
    params = pack_params(1.0, a_target)
    a_mat = np.asarray(a_target, dtype=np.complex128)
    points = []
    for r in results:
        if r.status is PathStatus.SUCCESS:
            points.append(r.endpoint)
            continue
        if not np.isfinite(r.endpoint).all():
            return None
        x, _ = tracker.newton_refine(system, r.endpoint, params, opts.refine_tol, 10)
        z = grassmann.pluecker_embed(x)
        zn = np.linalg.norm(z)
        if not np.isfinite(zn) or zn == 0.0:
            return None
        z_unit = z / zn
        if np.abs(grassmann.pluecker_relations(z_unit)).max() >= 1e-10:
            return None
        if np.linalg.norm(a_mat @ z_unit) >= 1e-9:
            return None
        points.append(x)
    points = np.array(points)
    if len(points) != N_SOLUTIONS or not _distinct(points, tols.distinct_tol):
        return None
    return points


def _recover_gamma(a_target, chart_points, tols: Tolerances):
    """Pull the embedded points back through the section: L gamma_k = Z_k."""
    z = grassmann.embed_u_many(chart_points, 1.0 + 0.0j)  # (14, 15)
    kernel = linalg.nullspace(np.asarray(a_target, dtype=np.complex128), tols)
    if kernel.shape[1] != 7:
        raise RankDeficient("section kernel is not 7-dimensional")
    gamma = np.empty((7, N_SOLUTIONS), dtype=np.complex128)
    worst = 0.0
    for k in range(N_SOLUTIONS):
        gamma[:, k] = linalg.qr_least_squares(kernel, z[k], tols)
        resid = np.linalg.norm(kernel @ gamma[:, k] - z[k])
        scale = np.linalg.norm(z[k])
        worst = max(worst, resid / scale)
        if resid > 1e-8 * scale:
            raise RecoveryFailed(
                f"point {k}: pullback residual {resid / scale:.2e}"
            )
    return z, gamma, worst


def slice_section(
    a_target,
    start: SliceStart | None = None,
    opts: TrackerOptions = DEFAULT_OPTIONS,
    rng=None,
    tols: Tolerances = DEFAULT_TOLS,
) -> SliceResult:
    """Intersect the Grassmannian with the kernel of a_target.

    Returns the 14 chart solutions, their embedded images, and the recovered
    self-dual configuration.  A cached SliceStart skips stages 1-2.
    """
    a_target = np.asarray(a_target, dtype=np.complex128)
    if a_target.shape != SECTION_SHAPE:
        raise ValueError(f"section matrix must be {SECTION_SHAPE}")
    if linalg.numerical_rank(a_target, tols) != 8:
        raise RankDeficient("target section matrix must have rank 8")
    if rng is None:
        rng = np.random.default_rng(0x51)
    if start is None:
        start = prepare_start(rng, opts, tols)
    good = _stage3_endpoints(a_target, start, opts, tols)
    if good is None:
        raise WrongCount(
            f"stage 3 did not yield {N_SOLUTIONS} distinct solutions"
        )
    z, gamma, recovery = _recover_gamma(a_target, good, tols)
    z_unit = z / np.linalg.norm(z, axis=1, keepdims=True)
    relation_residual = float(
        np.abs(grassmann.relations_many(z_unit)).max()
    )
    gamma = gamma / np.abs(gamma).max(axis=0)
    witness = selfdual.self_dual_witness(gamma, rng, tols)
    return SliceResult(
        chart_points=good,
        plucker_points=z,
        gamma=gamma,
        max_relation_residual=relation_residual,
        recovery_residual=recovery,
        witness=witness,
        witness_residual=selfdual.witness_residual(gamma, witness),
    )


@dataclass
class CensusTable:
    samples: int
    histogram: np.ndarray  # counts indexed by number of real solutions, 0..14
    failures: int

    def proportions(self) -> np.ndarray:
        return self.histogram / max(self.samples, 1)


def _count_real(
    endpoints: np.ndarray,
    a_target: np.ndarray,
    opts: TrackerOptions,
    tols: Tolerances,
) -> int:
    """Real solutions among refined endpoints; -1 flags a classification fault."""
    imag_max = np.abs(endpoints.imag).max(axis=1)
    borderline = (imag_max >= 1e-8) & (imag_max <= 1e-4)
    if borderline.any():
        system = SlicingSystem()
        params = pack_params(1.0, a_target)
        for idx in np.flatnonzero(borderline):
            refined, _ = tracker.newton_refine(
                system, endpoints[idx], params, 1e-15, 6
            )
            endpoints[idx] = refined
        imag_max = np.abs(endpoints.imag).max(axis=1)
    count = int(np.count_nonzero(imag_max < tols.real_tol))
    if count % 2 == 1:
        return -1
    return count


def _census_sample(
    index: int, seed: int, start: SliceStart, opts: TrackerOptions, tols: Tolerances
) -> int:
    """One census draw; returns the real count or -1 for a failure."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1 + index]))
    a_target = rng.standard_normal(SECTION_SHAPE).astype(np.complex128)
    good = _stage3_endpoints(a_target, start, opts, tols)
    if good is None:
        return -1
    return _count_real(good, a_target, opts, tols)


def _census_chunk(args) -> np.ndarray:
    lo, hi, seed, a_start, chart_points, opts, tols = args
    start = SliceStart(a_start=a_start, chart_points=chart_points)
    partial = np.zeros(16, dtype=np.int64)  # bins 0..14 plus failures at 15
    for index in range(lo, hi):
        outcome = _census_sample(index, seed, start, opts, tols)
        partial[outcome if outcome >= 0 else 15] += 1
    return partial


def default_thread_count() -> int:
    env = os.environ.get("MUKAI_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def census(
    samples: int,
    seed: int,
    opts: TrackerOptions = DEFAULT_OPTIONS,
    threads: int | None = None,
    tols: Tolerances = DEFAULT_TOLS,
    start: SliceStart | None = None,
    progress=None,
) -> CensusTable:
    """Count real solutions over random real Gaussian sections.

    One complex start pair is prepared once; every sample then tracks only
    stage 3 from it.  Sample i draws its section from a generator seeded by
    (seed, 1 + i), so the histogram is identical for any worker count.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if start is None:
        start = prepare_start(
            np.random.default_rng(np.random.SeedSequence([seed, 0])), opts, tols
        )
    threads = threads or default_thread_count()
    threads = max(1, min(threads, samples))
    totals = np.zeros(16, dtype=np.int64)
    if threads == 1:
        done = 0
        for index in range(samples):
            outcome = _census_sample(index, seed, start, opts, tols)
            totals[outcome if outcome >= 0 else 15] += 1
            done += 1
            if progress is not None and done % 256 == 0:
                progress(done, samples)
    else:
        chunk = max(16, (samples + threads * 8 - 1) // (threads * 8))
        jobs = [
            (lo, min(lo + chunk, samples), seed, start.a_start,
             start.chart_points, opts, tols)
            for lo in range(0, samples, chunk)
        ]
        done = 0
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for partial in pool.map(_census_chunk, jobs):
                totals += partial
                done += int(partial.sum())
                if progress is not None:
                    progress(done, samples)
    return CensusTable(
        samples=samples, histogram=totals[:15].copy(), failures=int(totals[15])
    )
