"""Command-line frontend: slice, census, check, snf, lift, make-start-pair.

Every command is deterministic under fixed --seed and options, independent
of thread count.  Stage seeds derive from the root seed by a counter scheme
(SeedSequence([seed, k])) recorded in the manifest, so any stage can be
reproduced in isolation.  Exit codes: 0 success, 2 domain failure, 3 I/O or
parse failure.
"""

from __future__ import annotations

import functools
import hashlib
import json
import sys
import time

import click
import numpy as np

from . import __version__, lifting, selfdual, serialize, slicing
from .errors import InputError, MukaiError, NotSelfDual, RankDeficient
from .linalg import numerical_rank
from .tracker import TrackerOptions


class StageClock:
    """Accumulates wall-clock timings per named stage."""

    def __init__(self):
        self.timings: dict[str, float] = {}
        self.current = "setup"
        self._t0 = time.perf_counter()

    def stage(self, name: str):
        self._flush()
        self.current = name

    def _flush(self):
        now = time.perf_counter()
        self.timings[self.current] = (
            self.timings.get(self.current, 0.0) + now - self._t0
        )
        self._t0 = now

    def done(self) -> dict[str, float]:
        self._flush()
        return {k: round(v, 6) for k, v in self.timings.items()}


def _sha256_bytes(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _payload_digest(payload) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return _sha256_bytes(canonical.encode())


def _load_json_file(path: str):
    """Load JSON, resolving an optional '#fragment' key path."""
    fragment = None
    if "#" in path:
        path, fragment = path.split("#", 1)
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        obj = json.loads(raw)
    except ValueError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc
    if fragment:
        if isinstance(obj, dict) and fragment in obj:
            obj = obj[fragment]
        elif (
            isinstance(obj, dict)
            and isinstance(obj.get("result"), dict)
            and fragment in obj["result"]
        ):
            obj = obj["result"][fragment]
        else:
            raise InputError(f"{path}: no field '{fragment}'")
    return obj, path, _sha256_bytes(raw)


def _manifest(command, seed, options, clock: StageClock, inputs, payload):
    return {
        "command": command,
        "version": __version__,
        "seed": seed,
        "seed_scheme": "SeedSequence([seed, stage_counter])",
        "options": options,
        "timings": clock.done(),
        "inputs": inputs,
        "payload_digest": _payload_digest(payload),
    }


def _emit(out_path, document):
    text = json.dumps(document, indent=1)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def _cli_errors(fn):
    """Map typed failures to exit codes; messages name the failing stage."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        clock = StageClock()
        try:
            fn(*args, clock=clock, **kwargs)
        except MukaiError as exc:
            click.echo(
                f"error [{clock.current}] {type(exc).__name__}: {exc}", err=True
            )
            sys.exit(2)
        except InputError as exc:
            click.echo(f"error [{clock.current}] input: {exc}", err=True)
            sys.exit(3)
        except OSError as exc:
            click.echo(f"error [{clock.current}] io: {exc}", err=True)
            sys.exit(3)

    return wrapper


def _tracker_options(tol, refine_tol, initial_step, min_step, max_step):
    return TrackerOptions(
        corrector_tol=tol,
        refine_tol=refine_tol,
        initial_step=initial_step,
        min_step=min_step,
        max_step=max_step,
    )


def _tracker_flags(fn):
    decorators = [
        click.option("--tol", type=float, default=TrackerOptions.corrector_tol,
                      show_default=True, help="corrector tolerance"),
        click.option("--refine-tol", type=float, default=TrackerOptions.refine_tol,
                      show_default=True, help="endpoint refinement tolerance"),
        click.option("--initial-step", type=float,
                      default=TrackerOptions.initial_step, show_default=True),
        click.option("--min-step", type=float, default=TrackerOptions.min_step,
                      show_default=True),
        click.option("--max-step", type=float, default=TrackerOptions.max_step,
                      show_default=True),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


def _gamma_input(fn):
    decorators = [
        click.option("--gamma", "gamma_path", default=None,
                      help="configuration JSON (alias of --input)"),
        click.option("--input", "input_path", default=None,
                      help="configuration JSON, may use file.json#field"),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


def _load_gamma(gamma_path, input_path):
    path = gamma_path or input_path
    if path is None:
        raise InputError("need --gamma or --input")
    obj, path, digest = _load_json_file(path)
    gamma = serialize.cmat_from_json(obj, (7, 14))
    try:
        gamma = selfdual.as_config(gamma)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return gamma, {path: digest}


@click.group()
@click.version_option(version=__version__, prog_name="mukailift")
def main():
    """Linear sections of Gr(2,6) and the inverse lifting problem."""


@main.command(name="slice")
@click.option("--input", "input_path", default=None,
              help="8x15 section matrix JSON; random complex when omitted")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", default=None, help="output JSON path")
@_tracker_flags
@_cli_errors
def cmd_slice(input_path, seed, out_path, tol, refine_tol, initial_step,
              min_step, max_step, clock: StageClock):
    """Intersect the Grassmannian with a linear section; emit the 14 points."""
    opts = _tracker_options(tol, refine_tol, initial_step, min_step, max_step)
    inputs = {}
    clock.stage("input")
    if input_path:
        obj, path, digest = _load_json_file(input_path)
        a_target = serialize.cmat_from_json(obj, (8, 15))
        inputs[path] = digest
        if numerical_rank(a_target) != 8:
            raise RankDeficient("target section matrix must have rank 8")
    else:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
        a_target = rng.standard_normal((8, 15)) + 1j * rng.standard_normal((8, 15))
    clock.stage("bootstrap")
    start = slicing.prepare_start(
        np.random.default_rng(np.random.SeedSequence([seed, 0])), opts
    )
    clock.stage("track")
    result = slicing.slice_section(
        a_target, start=start, opts=opts,
        rng=np.random.default_rng(np.random.SeedSequence([seed, 2])),
    )
    clock.stage("emit")
    payload = serialize.slice_result_to_json(result)
    payload["a_target"] = serialize.cmat_to_json(a_target)
    document = {
        "manifest": _manifest(
            "slice", seed,
            {"tol": tol, "refine_tol": refine_tol, "initial_step": initial_step,
             "min_step": min_step, "max_step": max_step,
             "input": input_path},
            clock, inputs, payload,
        ),
        "result": payload,
    }
    _emit(out_path, document)


@main.command(name="census")
@click.option("--samples", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=None,
              help="worker processes; defaults to MUKAI_THREADS or CPU count")
@click.option("--out", "out_path", required=True, help="output CSV path")
@_tracker_flags
@_cli_errors
def cmd_census(samples, seed, threads, out_path, tol, refine_tol, initial_step,
               min_step, max_step, clock: StageClock):
    """Real-solution histogram over random real sections (CSV)."""
    if samples < 1:
        raise InputError("--samples must be >= 1")
    opts = _tracker_options(tol, refine_tol, initial_step, min_step, max_step)
    clock.stage("census")

    def progress(done, total):
        click.echo(f"census: {done}/{total} samples", err=True)

    table = slicing.census(
        samples, seed, opts=opts, threads=threads, progress=progress
    )
    clock.stage("emit")
    csv_text = serialize.census_to_csv(table)
    with open(out_path, "w") as fh:
        fh.write(csv_text)
    payload = {
        "samples": table.samples,
        "histogram": [int(c) for c in table.histogram],
        "failures": table.failures,
    }
    manifest = _manifest(
        "census", seed,
        {"samples": samples, "threads": threads, "tol": tol,
         "refine_tol": refine_tol, "initial_step": initial_step,
         "min_step": min_step, "max_step": max_step},
        clock, {}, payload,
    )
    with open(out_path + ".manifest.json", "w") as fh:
        json.dump({"manifest": manifest, "result": payload}, fh, indent=1)
        fh.write("\n")


@main.command(name="check")
@_gamma_input
@click.option("--out", "out_path", default=None)
@_cli_errors
def cmd_check(gamma_path, input_path, out_path, clock: StageClock):
    """Self-duality and stability report; exit 2 when not self-dual."""
    clock.stage("input")
    gamma, inputs = _load_gamma(gamma_path, input_path)
    clock.stage("check")
    semistable, stable = selfdual.is_semistable(gamma)
    general = selfdual.is_linearly_general(gamma)
    try:
        witness = selfdual.self_dual_witness(gamma)
    except NotSelfDual:
        payload = {
            "self_dual": False,
            "semistable": semistable,
            "stable": stable,
            "linearly_general": general,
        }
        clock.stage("emit")
        _emit(out_path, {
            "manifest": _manifest("check", None, {}, clock, inputs, payload),
            "result": payload,
        })
        click.echo("not self-dual", err=True)
        sys.exit(2)
    residual = selfdual.witness_residual(gamma, witness)
    payload = {
        "self_dual": True,
        "witness": serialize.cvector_to_json(witness),
        "witness_residual": residual,
        "semistable": semistable,
        "stable": stable,
        "linearly_general": general,
    }
    clock.stage("emit")
    _emit(out_path, {
        "manifest": _manifest("check", None, {}, clock, inputs, payload),
        "result": payload,
    })


@main.command(name="snf")
@_gamma_input
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", default=None)
@_cli_errors
def cmd_snf(gamma_path, input_path, seed, out_path, clock: StageClock):
    """Skew normal form: emit the 21 parameters and the certificate."""
    clock.stage("input")
    gamma, inputs = _load_gamma(gamma_path, input_path)
    clock.stage("normal-form")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    s, cert, perm = lifting.snf_with_retries(gamma, rng)
    payload = {
        "s": serialize.cvector_to_json(s),
        "cert": {
            "P": serialize.cmat_to_json(cert.p),
            "A": serialize.cmat_to_json(cert.a),
            "lambda_scale": serialize.cvector_to_json(cert.lambda_scale),
        },
        "column_permutation": [int(i) for i in perm],
    }
    clock.stage("emit")
    _emit(out_path, {
        "manifest": _manifest("snf", seed, {}, clock, inputs, payload),
        "result": payload,
    })


@main.command(name="make-start-pair")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True)
@_tracker_flags
@_cli_errors
def cmd_make_start_pair(seed, out_path, tol, refine_tol, initial_step,
                        min_step, max_step, clock: StageClock):
    """Build and persist a reusable lifting start pair."""
    opts = _tracker_options(tol, refine_tol, initial_step, min_step, max_step)
    clock.stage("start-pair")
    problem, gamma_start, _cert = lifting.make_start_pair(seed, opts)
    clock.stage("emit")
    payload = serialize.lift_problem_to_json(problem)
    payload["gamma_start"] = serialize.cmat_to_json(gamma_start)
    _emit(out_path, {
        "manifest": _manifest(
            "make-start-pair", seed,
            {"tol": tol, "refine_tol": refine_tol}, clock, {}, payload,
        ),
        "result": payload,
    })


@main.command(name="lift")
@_gamma_input
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--start-cache", "cache_path", default=None,
              help="reuse a make-start-pair JSON instead of building one")
@click.option("--gamma-arc", type=float, default=0.0, show_default=True,
              help="midpoint detour magnitude for the parameter path")
@click.option("--squared-up", is_flag=True, default=False,
              help="track the randomly squared 69x69 system (cross-check)")
@click.option("--out", "out_path", default=None)
@_tracker_flags
@_cli_errors
def cmd_lift(gamma_path, input_path, seed, cache_path, gamma_arc, squared_up,
             out_path, tol, refine_tol, initial_step, min_step, max_step,
             clock: StageClock):
    """Recover a linear embedding onto a section through the configuration."""
    opts = _tracker_options(tol, refine_tol, initial_step, min_step, max_step)
    clock.stage("input")
    gamma, inputs = _load_gamma(gamma_path, input_path)
    if cache_path:
        obj, path, digest = _load_json_file(cache_path)
        if isinstance(obj, dict) and "result" in obj:
            obj = obj["result"]
        problem = serialize.lift_problem_from_json(obj)
        inputs[path] = digest
    else:
        clock.stage("start-pair")
        problem, _, _ = lifting.make_start_pair(seed, opts)
    clock.stage("track")

    last_beat = [time.monotonic()]

    def heartbeat(u, step, corrector_iters):
        now = time.monotonic()
        if now - last_beat[0] >= 5.0:
            last_beat[0] = now
            click.echo(
                f"lift: u={u:.4f} step={step:.2e} "
                f"corrector_iters={corrector_iters}",
                err=True,
            )

    result = lifting.lift(
        gamma, problem, opts=opts, seed=seed, gamma_arc=gamma_arc,
        squared_up=squared_up, progress=heartbeat,
    )
    clock.stage("emit")
    payload = serialize.lift_result_to_json(result)
    document = {
        "manifest": _manifest(
            "lift", seed,
            {"start_cache": cache_path, "gamma_arc": gamma_arc,
             "squared_up": squared_up, "tol": tol, "refine_tol": refine_tol},
            clock, inputs, payload,
        ),
        "result": payload,
    }
    _emit(out_path, document)
    click.echo(
        f"max relation residual over all 14 points: "
        f"{result.max_plucker_residual:.16e}",
        err=True,
    )


if __name__ == "__main__":
    main()
