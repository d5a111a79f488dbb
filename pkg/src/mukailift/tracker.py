"""Predictor-corrector homotopy continuation over the complex numbers.

Paths follow a parameter curve u -> p(u) in C^q from a solved start system to
a target: an explicit Euler predictor on the Davidenko ODE followed by a
Newton (square) or Gauss-Newton (overdetermined, via QR) corrector, with
multiplicative step adaptation.  There is no certified endgame; the step is
clamped to the remaining interval and a final refinement runs at u = 1.

All paths of a batch are advanced together on stacked arrays, each with its
own adaptive step, so a diverging path never slows the others; a single path
is just a batch of one.  Everything is deterministic for fixed inputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import linalg
from .errors import BezoutOverflow, RankDeficient, SingularMatrix


@dataclass(frozen=True)
class TrackerOptions:
    initial_step: float = 0.05
    min_step: float = 1e-14
    max_step: float = 0.25
    corrector_tol: float = 1e-9
    corrector_iters: int = 3
    divergence_bound: float = 1e8
    refine_tol: float = 1e-13
    step_expand: float = 2.0
    step_shrink: float = 0.5
    successes_before_expand: int = 4

    def __post_init__(self):
        if not (0.0 < self.min_step < self.initial_step <= self.max_step < 1.0):
            raise ValueError("need 0 < min_step < initial_step <= max_step < 1")
        if not (self.corrector_tol > self.refine_tol > 0.0):
            raise ValueError("need corrector_tol > refine_tol > 0")


DEFAULT_OPTIONS = TrackerOptions()


class PathStatus(Enum):
    SUCCESS = "Success"
    DIVERGED = "Diverged"
    MIN_STEP_REACHED = "MinStepReached"
    CORRECTOR_FAILED = "CorrectorFailed"


@dataclass
class PathResult:
    status: PathStatus
    endpoint: np.ndarray
    residual: float
    steps_taken: int
    final_newton_iters: int

    @property
    def success(self) -> bool:
        return self.status is PathStatus.SUCCESS


class EvaluatedSystem:
    """Evaluation contract for a parameterized polynomial system.

    Subclasses declare m (equations), n (variables), q (parameters) and
    implement evaluate(); the batched hooks have generic fallbacks that loop,
    and hot systems override them with vectorized versions.  Evaluation must
    be deterministic and safe to call concurrently.
    """

    m: int
    n: int
    q: int

    def evaluate(self, x, params):
        """Return (F (m,), dF/dx (m,n), dF/dparams (m,q)) at one point."""
        raise NotImplementedError

    def residual_batch(self, x_batch, p_batch) -> np.ndarray:
        return self.residual_jacobian_batch(x_batch, p_batch)[0]

    def residual_jacobian_batch(self, x_batch, p_batch):
        b = x_batch.shape[0]
        f = np.empty((b, self.m), dtype=np.complex128)
        jx = np.empty((b, self.m, self.n), dtype=np.complex128)
        for i in range(b):
            f[i], jx[i], _ = self.evaluate(x_batch[i], p_batch[i])
        return f, jx

    def full_batch(self, x_batch, p_batch, dp_batch):
        """Residuals, x-Jacobians and directional parameter derivatives."""
        b = x_batch.shape[0]
        f = np.empty((b, self.m), dtype=np.complex128)
        jx = np.empty((b, self.m, self.n), dtype=np.complex128)
        jpdp = np.empty((b, self.m), dtype=np.complex128)
        for i in range(b):
            fi, jxi, jpi = self.evaluate(x_batch[i], p_batch[i])
            f[i], jx[i] = fi, jxi
            jpdp[i] = jpi @ dp_batch[i]
        return f, jx, jpdp


class PlainSystem:
    """Parameter-free system: F and its Jacobian only."""

    m: int
    n: int

    def value_jac(self, x):
        raise NotImplementedError

    def value_jac_batch(self, x_batch):
        b = x_batch.shape[0]
        f = np.empty((b, self.m), dtype=np.complex128)
        j = np.empty((b, self.m, self.n), dtype=np.complex128)
        for i in range(b):
            f[i], j[i] = self.value_jac(x_batch[i])
        return f, j


class PowerStartSystem(PlainSystem):
    """G_i(x) = x_i**d_i - 1, the total-degree start system."""

    def __init__(self, degrees):
        self.degrees = np.asarray(degrees, dtype=np.int64)
        if self.degrees.ndim != 1 or (self.degrees < 1).any():
            raise ValueError("degrees must be positive integers")
        self.m = self.n = int(self.degrees.size)

    def value_jac(self, x):
        f, j = self.value_jac_batch(np.asarray(x, dtype=np.complex128)[None, :])
        return f[0], j[0]

    def value_jac_batch(self, x_batch):
        x = np.asarray(x_batch, dtype=np.complex128)
        d = self.degrees[None, :]
        f = x**d - 1.0
        b = x.shape[0]
        j = np.zeros((b, self.m, self.n), dtype=np.complex128)
        idx = np.arange(self.n)
        j[:, idx, idx] = d * x ** (d - 1)
        return f, j


class FrozenSystem(PlainSystem):
    """An EvaluatedSystem with its parameters pinned to a constant vector."""

    def __init__(self, system: EvaluatedSystem, params):
        self.system = system
        self.params = np.asarray(params, dtype=np.complex128)
        self.m = system.m
        self.n = system.n

    def value_jac(self, x):
        f, jx, _ = self.system.evaluate(x, self.params)
        return f, jx

    def value_jac_batch(self, x_batch):
        p = np.broadcast_to(self.params, (x_batch.shape[0], self.params.size))
        return self.system.residual_jacobian_batch(x_batch, p)


class LinearBlendSystem(EvaluatedSystem):
    """H(x, u) = (1-u) * gamma * G(x) + u * F(x) with u as the sole parameter.

    gamma is the random complex constant of the gamma trick; with probability
    one the segment u in [0, 1] misses the discriminant.
    """

    def __init__(self, start: PlainSystem, target: PlainSystem, gamma: complex):
        if (start.m, start.n) != (target.m, target.n):
            raise ValueError("blended systems must have matching shapes")
        if gamma == 0:
            raise ValueError("gamma must be nonzero")
        self.start = start
        self.target = target
        self.gamma = complex(gamma)
        self.m, self.n, self.q = start.m, start.n, 1

    def evaluate(self, x, params):
        u = complex(np.asarray(params).ravel()[0])
        fg, jg = self.start.value_jac(x)
        ff, jf = self.target.value_jac(x)
        c = (1.0 - u) * self.gamma
        return c * fg + u * ff, c * jg + u * jf, (ff - self.gamma * fg)[:, None]

    def residual_jacobian_batch(self, x_batch, p_batch):
        u = p_batch[:, 0]
        fg, jg = self.start.value_jac_batch(x_batch)
        ff, jf = self.target.value_jac_batch(x_batch)
        c = ((1.0 - u) * self.gamma)[:, None]
        f = c * fg + u[:, None] * ff
        jx = c[:, :, None] * jg + u[:, None, None] * jf
        return f, jx

    def full_batch(self, x_batch, p_batch, dp_batch):
        u = p_batch[:, 0]
        fg, jg = self.start.value_jac_batch(x_batch)
        ff, jf = self.target.value_jac_batch(x_batch)
        c = ((1.0 - u) * self.gamma)[:, None]
        f = c * fg + u[:, None] * ff
        jx = c[:, :, None] * jg + u[:, None, None] * jf
        jpdp = (ff - self.gamma * fg) * dp_batch[:, 0][:, None]
        return f, jx, jpdp


class SquaredUpSystem(EvaluatedSystem):
    """Random square-down M @ F of an overdetermined system (cross-check mode).

    Solutions of the squared system form a superset of the original ones, so
    any endpoint must still pass the independent residual verification.
    """

    def __init__(self, system: EvaluatedSystem, multiplier):
        self.system = system
        self.multiplier = np.asarray(multiplier, dtype=np.complex128)
        if self.multiplier.shape != (system.n, system.m):
            raise ValueError("multiplier must be n x m")
        self.m = system.n
        self.n = system.n
        self.q = system.q

    def evaluate(self, x, params):
        f, jx, jp = self.system.evaluate(x, params)
        mlt = self.multiplier
        return mlt @ f, mlt @ jx, mlt @ jp


class StraightLinePath:
    """p(u) = (1-u) p_start + u p_target."""

    def __init__(self, p_start, p_target):
        self.p0 = np.asarray(p_start, dtype=np.complex128).ravel()
        self.p1 = np.asarray(p_target, dtype=np.complex128).ravel()
        if self.p0.shape != self.p1.shape:
            raise ValueError("endpoint parameter vectors differ in length")
        self.q = self.p0.size

    def values(self, u):
        u = np.asarray(u, dtype=np.complex128)[:, None]
        return (1.0 - u) * self.p0 + u * self.p1

    def derivative(self, u):
        b = np.asarray(u).shape[0]
        return np.broadcast_to(self.p1 - self.p0, (b, self.q))


class ArcPath(StraightLinePath):
    """Straight segment plus a u(1-u) detour, for dodging bad midpoints."""

    def __init__(self, p_start, p_target, bump):
        super().__init__(p_start, p_target)
        self.bump = np.asarray(bump, dtype=np.complex128).ravel()
        if self.bump.shape != self.p0.shape:
            raise ValueError("bump length mismatch")

    def values(self, u):
        u = np.asarray(u, dtype=np.complex128)[:, None]
        return (1.0 - u) * self.p0 + u * self.p1 + u * (1.0 - u) * self.bump

    def derivative(self, u):
        u = np.asarray(u, dtype=np.complex128)[:, None]
        return super().derivative(u[:, 0]) + (1.0 - 2.0 * u) * self.bump


def total_degree_start(degrees, gamma, cap: int = 10**6):
    """Total-degree bootstrap: G_i = x_i**d_i - 1 and all root-of-unity tuples.

    The returned system is meant for LinearBlendSystem(G, target, gamma); the
    gamma argument is validated here because a zero gamma voids the trick.
    """
    if gamma == 0:
        raise ValueError("gamma must be nonzero")
    system = PowerStartSystem(degrees)
    total = int(np.prod(system.degrees, dtype=object))
    if total > cap:
        raise BezoutOverflow(f"{total} start points exceed cap {cap}")
    roots = [
        np.exp(2j * np.pi * np.arange(d) / d) for d in system.degrees.tolist()
    ]
    starts = np.array(
        [list(combo) for combo in itertools.product(*roots)], dtype=np.complex128
    )
    return system, starts


def _solve_square_batch(j_batch, rhs_batch):
    """Batched square solves; per-path fallback when LAPACK flags singularity."""
    b = j_batch.shape[0]
    ok = np.ones(b, dtype=bool)
    try:
        sol = np.linalg.solve(j_batch, rhs_batch[..., None])[..., 0]
    except np.linalg.LinAlgError:
        sol = np.zeros_like(rhs_batch)
        for i in range(b):
            try:
                sol[i] = np.linalg.solve(j_batch[i], rhs_batch[i])
            except np.linalg.LinAlgError:
                ok[i] = False
    bad = ~np.isfinite(sol).all(axis=1)
    sol[bad] = 0.0
    ok &= ~bad
    return sol, ok


def _solve_lstsq_batch(j_batch, rhs_batch, tols=linalg.DEFAULT_TOLS):
    b = j_batch.shape[0]
    n = j_batch.shape[2]
    sol = np.zeros((b, n), dtype=np.complex128)
    ok = np.ones(b, dtype=bool)
    for i in range(b):
        try:
            sol[i] = linalg.qr_least_squares(j_batch[i], rhs_batch[i], tols)
        except (RankDeficient, SingularMatrix, ValueError):
            ok[i] = False
        if not np.isfinite(sol[i]).all():
            sol[i] = 0.0
            ok[i] = False
    return sol, ok


def _newton_solve(j_batch, rhs_batch, square: bool):
    if square:
        return _solve_square_batch(j_batch, rhs_batch)
    return _solve_lstsq_batch(j_batch, rhs_batch)


def _norms(x_batch: np.ndarray) -> np.ndarray:
    return np.sqrt((x_batch.real**2 + x_batch.imag**2).sum(axis=1))


def _refine_batch(system, x_batch, p_batch, tol, max_iters, square):
    """Damped Newton / Gauss-Newton until residual <= tol * (1 + |x|)."""
    x = x_batch.copy()
    b = x.shape[0]
    f, jx = system.residual_jacobian_batch(x, p_batch)
    res = np.linalg.norm(f, axis=1)
    iters = np.zeros(b, dtype=np.int64)
    for _ in range(max_iters):
        need = res > tol * (1.0 + np.linalg.norm(x, axis=1))
        need &= np.isfinite(res)
        if not need.any():
            break
        idx = np.flatnonzero(need)
        delta, ok = _newton_solve(jx[idx], -f[idx], square)
        scale = np.ones(len(idx))
        improved = np.zeros(len(idx), dtype=bool)
        x_new = x[idx].copy()
        res_new = res[idx].copy()
        for _damp in range(4):
            trial = x[idx] + scale[:, None] * delta
            f_try = system.residual_batch(trial, p_batch[idx])
            r_try = np.linalg.norm(f_try, axis=1)
            better = ok & ~improved & np.isfinite(r_try) & (r_try < res_new)
            x_new[better] = trial[better]
            res_new[better] = r_try[better]
            improved |= better
            if improved.all():
                break
            scale[~improved] *= 0.5
        moved = idx[improved]
        if moved.size == 0:
            break
        x[moved] = x_new[improved]
        iters[moved] += 1
        f_upd, jx_upd = system.residual_jacobian_batch(x[moved], p_batch[moved])
        f[moved], jx[moved] = f_upd, jx_upd
        res[moved] = np.linalg.norm(f_upd, axis=1)
        # paths that could not improve stop iterating
        if not improved.all():
            res[idx[~improved]] = res_new[~improved]
    return x, res, iters


def newton_refine(system, x, params, tol, max_iters):
    """Polish one point at fixed parameters; returns (point, residual)."""
    p = np.asarray(params, dtype=np.complex128).ravel()[None, :]
    if p.shape[1] == 0:
        p = np.zeros((1, max(system.q, 0)), dtype=np.complex128)
    xb = np.asarray(x, dtype=np.complex128)[None, :]
    square = system.m == system.n
    out, res, _ = _refine_batch(system, xb, p, tol, max_iters, square)
    return out[0], float(res[0])


_TRACKING = 0
_STATUS_CODE = {
    1: PathStatus.SUCCESS,
    2: PathStatus.DIVERGED,
    3: PathStatus.MIN_STEP_REACHED,
    4: PathStatus.CORRECTOR_FAILED,
}


def track_all(system, starts, path, opts: TrackerOptions = DEFAULT_OPTIONS,
              progress=None):
    """Track every start along the parameter path; one PathResult per start.

    Paths are independent: a failing path is reported in place and never
    aborts the batch.  Results preserve the input order.
    """
    starts = np.asarray(starts, dtype=np.complex128)
    if starts.size == 0:
        return []
    if starts.ndim == 1:
        starts = starts[:, None] if system.n == 1 else starts[None, :]
    b = starts.shape[0]
    square = system.m == system.n

    x = starts.copy()
    u = np.zeros(b)
    step = np.full(b, opts.initial_step)
    status = np.zeros(b, dtype=np.int64)
    steps_taken = np.zeros(b, dtype=np.int64)
    consec = np.zeros(b, dtype=np.int64)
    final_iters = np.zeros(b, dtype=np.int64)
    residual = np.full(b, np.inf)
    # Davidenko tangents depend only on (x, u), so they survive rejected
    # steps; recompute only after a path actually moves.
    tangent = np.zeros_like(x)
    tangent_ok = np.zeros(b, dtype=bool)
    have_tangent = np.zeros(b, dtype=bool)

    with np.errstate(all="ignore"):
        # Start validation: points off the start fiber are rejected in place,
        # never rescued, so a corrupted start cannot silently jump branches.
        p0 = path.values(u)
        r0 = np.linalg.norm(system.residual_batch(x, p0), axis=1)
        bad = ~(np.isfinite(r0) & (r0 <= opts.corrector_tol * (1.0 + np.linalg.norm(x, axis=1))))
        if bad.any():
            status[bad] = 4
            residual[bad] = np.where(np.isfinite(r0[bad]), r0[bad], np.inf)

        while True:
            act = np.flatnonzero(status == _TRACKING)
            if act.size == 0:
                break
            need = act[~have_tangent[act]]
            if need.size:
                p_need = path.values(u[need])
                dp_need = path.derivative(u[need])
                _, jx0, jpdp = system.full_batch(x[need], p_need, dp_need)
                v, ok = _newton_solve(jx0, -jpdp, square)
                tangent[need] = v
                tangent_ok[need] = ok
                have_tangent[need] = True

            ua = u[act]
            h = np.minimum(step[act], 1.0 - ua)
            pred_ok = tangent_ok[act]
            x_pred = x[act] + h[:, None] * tangent[act]

            u_new = ua + h
            p_new = path.values(u_new)
            xc = x_pred.copy()
            conv = np.zeros(act.size, dtype=bool)
            todo = np.arange(act.size)
            corrector_used = 0
            # Accept once the residual is below corrector_tol * (1 + |x|);
            # each path gets at most corrector_iters Newton updates plus the
            # evaluation that certifies the last one.
            for it in range(opts.corrector_iters + 1):
                corrector_used = it
                fc, jxc = system.residual_jacobian_batch(xc[todo], p_new[todo])
                rn = _norms(fc)
                good = np.isfinite(rn) & (
                    rn <= opts.corrector_tol * (1.0 + _norms(xc[todo]))
                )
                conv[todo[good]] = True
                todo = todo[~good]
                if todo.size == 0 or it == opts.corrector_iters:
                    break
                delta, ok_it = _newton_solve(jxc[~good], -fc[~good], square)
                xc[todo] += delta
                dead = ~(ok_it & np.isfinite(delta).all(axis=1))
                todo = todo[~dead]
            conv &= pred_ok & np.isfinite(xc).all(axis=1)

            xnorm = _norms(xc)
            diverged = conv & (xnorm > opts.divergence_bound)
            accept = conv & ~diverged
            reject = ~conv

            idx_div = act[diverged]
            status[idx_div] = 2
            x[idx_div] = xc[diverged]

            idx_acc = act[accept]
            x[idx_acc] = xc[accept]
            u[idx_acc] = u_new[accept].real
            have_tangent[idx_acc] = False
            steps_taken[idx_acc] += 1
            consec[idx_acc] += 1
            grow = consec[idx_acc] >= opts.successes_before_expand
            step[idx_acc[grow]] = np.minimum(
                step[idx_acc[grow]] * opts.step_expand, opts.max_step
            )
            consec[idx_acc[grow]] = 0

            idx_rej = act[reject]
            step[idx_rej] = h[reject] * opts.step_shrink
            consec[idx_rej] = 0
            status[idx_rej[step[idx_rej] < opts.min_step]] = 3

            done = idx_acc[u[idx_acc] >= 1.0 - 1e-12]
            if done.size:
                p_end = path.values(np.ones(done.size))
                x_end, r_end, it_end = _refine_batch(
                    system, x[done], p_end, opts.refine_tol, 10, square
                )
                x[done] = x_end
                residual[done] = r_end
                final_iters[done] = it_end
                good = np.isfinite(r_end) & (
                    r_end <= opts.refine_tol * (1.0 + np.linalg.norm(x_end, axis=1))
                )
                status[done[good]] = 1
                status[done[~good]] = 4

            if progress is not None:
                live = status == _TRACKING
                if live.any():
                    progress(
                        float(u[live].min()),
                        float(step[live].min()),
                        int(corrector_used),
                    )

        # residuals for non-success endpoints, for diagnostics
        rest = np.flatnonzero(status != 1)
        if rest.size:
            p_rest = path.values(np.minimum(u[rest], 1.0))
            f_rest = system.residual_batch(x[rest], p_rest)
            r = np.linalg.norm(f_rest, axis=1)
            residual[rest] = np.where(np.isfinite(r), r, np.inf)

    return [
        PathResult(
            status=_STATUS_CODE[int(status[i])] if status[i] else PathStatus.CORRECTOR_FAILED,
            endpoint=x[i].copy(),
            residual=float(residual[i]),
            steps_taken=int(steps_taken[i]),
            final_newton_iters=int(final_iters[i]),
        )
        for i in range(b)
    ]


def track_path(system, x_start, path, opts: TrackerOptions = DEFAULT_OPTIONS,
               progress=None) -> PathResult:
    """Track a single solution path; batch of one."""
    return track_all(system, np.asarray(x_start)[None, :], path, opts, progress)[0]
