"""JSON payloads for matrices, slice results, lift problems and results.

Complex numbers are [re, im] pairs of exact doubles; matrices are row-major
under {"rows", "cols", "data"}.  Pluecker vectors are bare length-15 arrays
in the lexicographic pair order and skew parameters bare length-21 arrays.
Emission uses repr-exact floats so parse(emit(x)) round-trips bit for bit.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .lifting import LiftProblem, LiftResult
from .slicing import CensusTable, SliceResult
from .tracker import PathResult


def complex_to_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def cvector_to_json(v) -> list:
    return [complex_to_pair(z) for z in np.asarray(v, dtype=np.complex128).ravel()]


def cvector_from_json(obj, length: int | None = None) -> np.ndarray:
    if not isinstance(obj, list):
        raise InputError("expected a list of [re, im] pairs")
    if length is not None and len(obj) != length:
        raise InputError(f"expected {length} entries, got {len(obj)}")
    out = np.empty(len(obj), dtype=np.complex128)
    for i, pair in enumerate(obj):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(c, (int, float)) for c in pair)
        ):
            raise InputError(f"entry {i} is not a [re, im] pair")
        out[i] = complex(pair[0], pair[1])
    if not np.isfinite(out).all():
        raise InputError("non-finite complex entry")
    return out


def cmat_to_json(m) -> dict:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError("expected a matrix")
    return {
        "rows": arr.shape[0],
        "cols": arr.shape[1],
        "data": cvector_to_json(arr.ravel()),
    }


def cmat_from_json(obj, shape: tuple[int, int] | None = None) -> np.ndarray:
    if not isinstance(obj, dict) or not {"rows", "cols", "data"} <= set(obj):
        raise InputError("expected {rows, cols, data}")
    rows, cols = obj["rows"], obj["cols"]
    if not (isinstance(rows, int) and isinstance(cols, int) and rows >= 1 and cols >= 1):
        raise InputError("rows/cols must be positive integers")
    if shape is not None and (rows, cols) != shape:
        raise InputError(f"expected a {shape[0]}x{shape[1]} matrix, got {rows}x{cols}")
    flat = cvector_from_json(obj["data"], rows * cols)
    return flat.reshape(rows, cols)


def path_result_to_json(r: PathResult) -> dict:
    return {
        "status": r.status.value,
        "endpoint": cvector_to_json(r.endpoint),
        "residual": r.residual,
        "steps_taken": r.steps_taken,
        "final_newton_iters": r.final_newton_iters,
    }


def slice_result_to_json(res: SliceResult) -> dict:
    return {
        "chart_points": [cvector_to_json(t) for t in res.chart_points],
        "plucker_points": [cvector_to_json(z) for z in res.plucker_points],
        "gamma": cmat_to_json(res.gamma),
        "max_relation_residual": res.max_relation_residual,
        "recovery_residual": res.recovery_residual,
        "witness": cvector_to_json(res.witness),
        "witness_residual": res.witness_residual,
    }


def lift_problem_to_json(p: LiftProblem) -> dict:
    return {
        "l_start": cmat_to_json(p.l_start),
        "directions": [cmat_to_json(d) for d in p.directions],
        "s_start": cvector_to_json(p.s_start),
        "seed": p.seed,
    }


def lift_problem_from_json(obj) -> LiftProblem:
    if not isinstance(obj, dict):
        raise InputError("expected a lift problem object")
    try:
        l_start = cmat_from_json(obj["l_start"], (15, 7))
        directions = np.stack(
            [cmat_from_json(d, (15, 7)) for d in obj["directions"]]
        )
        s_start = cvector_from_json(obj["s_start"], 21)
    except KeyError as exc:
        raise InputError(f"lift problem is missing {exc}") from exc
    if directions.shape[0] != 69:
        raise InputError(f"expected 69 direction matrices, got {directions.shape[0]}")
    return LiftProblem(
        l_start=l_start,
        directions=directions,
        s_start=s_start,
        seed=obj.get("seed"),
    )


def lift_result_to_json(res: LiftResult) -> dict:
    return {
        "ell": cvector_to_json(res.ell),
        "L": cmat_to_json(res.l_matrix),
        "L_hat": cmat_to_json(res.l_hat),
        "s_target": cvector_to_json(res.s_target),
        "max_plucker_residual": res.max_plucker_residual,
        "report": {
            "max_residual": res.report.max_residual,
            "per_point": [float(v) for v in res.report.per_point],
            "rank": res.report.rank,
            "injectivity_margin": res.report.injectivity_margin,
            "degenerate": res.report.degenerate,
        },
        "path": {
            "status": res.path_stats.status.value,
            "residual": res.path_stats.residual,
            "steps_taken": res.path_stats.steps_taken,
            "final_newton_iters": res.path_stats.final_newton_iters,
        },
    }


def census_to_csv(table: CensusTable) -> str:
    lines = ["real_count,count,proportion"]
    for k in range(0, 15, 2):
        lines.append(
            f"{k},{int(table.histogram[k])},{table.histogram[k] / table.samples:.6f}"
        )
    lines.append(f"failures,{table.failures},{table.failures / table.samples:.6f}")
    return "\n".join(lines) + "\n"
