"""Command line harness: kernel tables, operator tables, verification sweeps.

Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 verification
failure. All data files are byte-stable for a fixed config and seed; wall-clock
measurements go only to timings.json.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .basis import JacobiParams
from .config import RunConfig, load_config
from .errors import ConfigError, NumericFailure
from .paths import default_bands, jump_count_batch, oscillation_batch, variation_batch
from .quadrature import auto_order
from .semigroup import (
    kernel_dt_tensor,
    kernel_matrix,
    kernel_tensor,
    markov_defect,
    semigroup_defect,
)
from .verify import (
    _lacunary_step_matrices,
    verify_cotlar,
    verify_dt_sup,
    verify_kernel_decay,
    verify_kernel_smoothness,
    verify_lacunary_tail,
    verify_poly_bound,
    verify_qn_bounds,
    verify_theorem_norms,
)
from .weights import WeightSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4

POLY_SIZES = (100, 200, 400)
COTLAR_WINDOW = 4
COTLAR_Q = 1.5
COTLAR_RANDOM = 20


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(v) if not isinstance(v, str) else v
                                   for v in row) + "\n")


def _write_json(path: str, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def _matrix_rows(matrix: np.ndarray):
    size = matrix.shape[0]
    for row in range(size):
        for col in range(matrix.shape[1]):
            yield (row, col, matrix[row, col])


def cmd_kernel(config: RunConfig) -> int:
    """Write heat-kernel and time-derivative matrices with defect sidecars."""
    base = os.path.join(config.out_dir, "kernel")
    _ensure_dir(base)
    _write_json(os.path.join(base, "config.json"), config.to_dict())
    times = list(config.kernel_times)
    size = max(config.sizes)
    timings = {}
    for params in config.params:
        started = time.perf_counter()
        tag_dir = os.path.join(base, params.tag())
        _ensure_dir(tag_dir)
        defects: dict = {"markov": [], "semigroup": [], "cross_method": []}
        for idx, t in enumerate(times):
            quad = kernel_matrix(params, t, size, method="quadrature",
                                 quad_tol=config.quad_tol)
            spectral = kernel_matrix(params, t, size, method="spectral",
                                     quad_tol=config.quad_tol)
            dkt = kernel_dt_tensor(params, np.array([t]), size, config.quad_tol)[0]
            _write_csv(os.path.join(tag_dir, f"kernel_{idx:02d}.csv"),
                       ("row", "col", "value"), _matrix_rows(quad.entries))
            _write_csv(os.path.join(tag_dir, f"kernel_dt_{idx:02d}.csv"),
                       ("row", "col", "value"), _matrix_rows(dkt))
            defects["markov"].append(max(
                markov_defect(params, t, n, size) for n in range(size // 4 + 1)))
            defects["semigroup"].append(
                semigroup_defect(params, t / 2.0, t / 2.0, size))
            defects["cross_method"].append(
                float(np.abs(quad.entries - spectral.entries).max()))
        order = auto_order(params, size - 1, max(times), config.quad_tol)
        _write_json(os.path.join(tag_dir, "report.json"), {
            "alpha": params.alpha,
            "beta": params.beta,
            "size": size,
            "method": "quadrature",
            "order": order,
            "times": times,
            "defects": defects,
        })
        timings[params.tag()] = time.perf_counter() - started
    _write_json(os.path.join(base, "timings.json"),
                {"command": "kernel", "cells": timings})
    return EXIT_OK


def _operator_table(config: RunConfig, params: JacobiParams):
    grid = config.t_grid.build()
    size = max(config.sizes)
    f = config.signal.resolve(size)
    header = ["n", "variation", "oscillation"]
    header += [f"jump_lam{lam:g}" for lam in config.lambdas]
    header += ["s_star", "margin"]
    if f.size == 0:
        return header, [], {}
    if f.size > size:
        raise ConfigError(
            f"signal has {f.size} entries, larger than the truncation size {size}")
    kt = kernel_tensor(params, grid.times, size, config.quad_tol)
    paths = np.tensordot(kt, np.pad(f, (0, size - f.size)), axes=([2], [0]))
    flat = paths.T[:, None, :]
    var = variation_batch(flat, config.rho)[:, 0]
    osc = oscillation_batch(grid.times, flat, default_bands(grid))[:, 0]
    jumps = {lam: lam * jump_count_batch(flat, lam)[:, 0] ** (1.0 / config.rho)
             for lam in config.lambdas}
    lac = config.lacunary.build()
    b = config.bcoef.resolve(lac)
    steps = _lacunary_step_matrices(params, lac, b, size, config.quad_tol)
    m_range = config.lacunary.window
    offset = -m_range - lac.j_min
    prefix = np.concatenate([np.zeros((1, size, size)),
                             np.cumsum(steps[offset:offset + 2 * m_range + 1], axis=0)])
    sums = prefix @ np.pad(f, (0, size - f.size))
    sstar = sums.max(axis=0) - sums.min(axis=0)
    bound = 2.0 ** (1.0 + 1.0 / config.rho) * var
    worst_jump = np.max(np.stack(list(jumps.values())), axis=0)
    margin = bound - worst_jump
    rows = []
    for n in range(size):
        row = [n, var[n], osc[n]]
        row += [jumps[lam][n] for lam in config.lambdas]
        row += [sstar[n], margin[n]]
        rows.append(row)
    report = {
        "size": size,
        "argmax_variation": int(np.argmax(var)),
        "min_margin": float(margin.min()),
    }
    return header, rows, report


def cmd_operators(config: RunConfig) -> int:
    """Write per-index path-functional tables for the configured signal."""
    base = os.path.join(config.out_dir, "operators")
    _ensure_dir(base)
    _write_json(os.path.join(base, "config.json"), config.to_dict())
    timings = {}
    for params in config.params:
        started = time.perf_counter()
        tag_dir = os.path.join(base, params.tag())
        _ensure_dir(tag_dir)
        header, rows, report = _operator_table(config, params)
        _write_csv(os.path.join(tag_dir, "operators.csv"), header, rows)
        _write_json(os.path.join(tag_dir, "report.json"),
                    {"alpha": params.alpha, "beta": params.beta, **report})
        timings[params.tag()] = time.perf_counter() - started
    _write_json(os.path.join(base, "timings.json"),
                {"command": "operators", "cells": timings})
    return EXIT_OK


NEGATIVE_CONTROL_PARAMS = JacobiParams(-0.5, -0.5)
NEGATIVE_CONTROL_P = 2.0


def _verify_cell(config: RunConfig, params: JacobiParams, estimate: str):
    grid = config.t_grid.build()
    if estimate == "kernel_decay":
        return verify_kernel_decay(params, config.sizes, grid, config.rho,
                                   config.quad_tol)
    if estimate == "kernel_smoothness":
        return verify_kernel_smoothness(params, config.sizes, grid, config.rho,
                                        config.quad_tol)
    if estimate == "dt_sup":
        return verify_dt_sup(params, config.sizes, grid, config.quad_tol)
    if estimate == "qn_bounds":
        lac = config.lacunary.build()
        return verify_qn_bounds(params, lac, config.bcoef.resolve(lac),
                                config.lacunary.window, config.sizes,
                                config.quad_tol)
    if estimate == "lacunary_tail":
        lac = config.lacunary.build()
        return verify_lacunary_tail(params, lac, config.bcoef.resolve(lac),
                                    config.sizes, config.quad_tol)
    if estimate == "cotlar":
        m_range = min(COTLAR_WINDOW, config.lacunary.window)
        lac = config.lacunary.build()
        return verify_cotlar(params, m_range, lac, config.bcoef.resolve(lac),
                             COTLAR_Q, config.sizes, config.seed, COTLAR_RANDOM,
                             config.quad_tol)
    if estimate == "poly_bound":
        return verify_poly_bound(params, POLY_SIZES)
    raise ConfigError(f"unknown estimate {estimate!r}")


def cmd_verify(config: RunConfig) -> int:
    """Run the estimate verifiers plus the growing-weight negative control."""
    base = os.path.join(config.out_dir, "verify")
    _ensure_dir(base)
    _write_json(os.path.join(base, "config.json"), config.to_dict())
    cells = [(params, estimate) for params in config.params
             for estimate in config.estimates]
    timings = {}

    def run_cell(cell):
        params, estimate = cell
        return _verify_cell(config, params, estimate)

    workers = _worker_count(config)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_cell, cells))
    else:
        reports = [run_cell(cell) for cell in cells]
    summary_rows = []
    exit_code = EXIT_OK
    for (params, estimate), report in zip(cells, reports):
        tag_dir = os.path.join(base, params.tag())
        _ensure_dir(tag_dir)
        _write_json(os.path.join(tag_dir, f"{estimate}.json"), report.to_dict())
        timings[f"{params.tag()}/{estimate}"] = report.runtime
        summary_rows.append([estimate, params.alpha, params.beta, report.verdict,
                             report.constants[-1], report.stability_ratio])
        if report.verdict in ("failed", "growing"):
            exit_code = EXIT_VERIFY
    control = verify_theorem_norms(
        NEGATIVE_CONTROL_PARAMS, "variation", NEGATIVE_CONTROL_P,
        WeightSpec("power", exponent=NEGATIVE_CONTROL_P), config.sizes,
        grid=config.norms_t_grid.build(), rho=config.rho,
        lambdas=config.lambdas, seed=config.seed, quad_tol=config.quad_tol)
    _write_json(os.path.join(base, "negative_control.json"), control.to_dict())
    timings["negative_control"] = control.runtime
    summary_rows.append(["negative_control", NEGATIVE_CONTROL_PARAMS.alpha,
                         NEGATIVE_CONTROL_PARAMS.beta, control.verdict,
                         control.constants[-1], control.stability_ratio])
    if control.verdict == "failed":
        exit_code = EXIT_VERIFY
    _write_csv(os.path.join(base, "summary.csv"),
               ("estimate", "alpha", "beta", "verdict", "constant",
                "stability_ratio"), summary_rows)
    _write_json(os.path.join(base, "timings.json"),
                {"command": "verify", "cells": timings})
    return exit_code


def cmd_norms(config: RunConfig) -> int:
    """Sweep weighted operator norms for every configured (p, weight) pair."""
    if len(config.p_values) != len(config.weights):
        raise ConfigError("p_values and weights must have equal length for norms")
    base = os.path.join(config.out_dir, "norms")
    _ensure_dir(base)
    _write_json(os.path.join(base, "config.json"), config.to_dict())
    grid = config.norms_t_grid.build()
    lac = config.lacunary.build()
    b = config.bcoef.resolve(lac)
    pairs = list(zip(config.p_values, config.weights))
    pairs += [(p, WeightSpec("power", exponent=p)) for p in config.p_values]
    cells = [(params, operator, p, wspec) for params in config.params
             for operator in config.operators for p, wspec in pairs]
    timings = {}

    def run_cell(cell):
        params, operator, p, wspec = cell
        strong = verify_theorem_norms(
            params, operator, p, wspec, config.sizes, grid=grid, rho=config.rho,
            lambdas=config.lambdas, lac=lac, bcoef=b,
            m_range=config.lacunary.window, seed=config.seed, mode="strong",
            quad_tol=config.quad_tol)
        weak = verify_theorem_norms(
            params, operator, 1.0, wspec, config.sizes, grid=grid, rho=config.rho,
            lambdas=config.lambdas, lac=lac, bcoef=b,
            m_range=config.lacunary.window, seed=config.seed, mode="weak11",
            quad_tol=config.quad_tol)
        return strong, weak

    workers = _worker_count(config)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_cell, cells))
    else:
        results = [run_cell(cell) for cell in cells]
    rows = []
    for (params, operator, p, wspec), (strong, weak) in zip(cells, results):
        timings[f"{params.tag()}/{operator}/p{p:g}/{wspec.label()}"] = \
            strong.runtime + weak.runtime
        for i, size in enumerate(config.sizes):
            rows.append([params.tag(), operator, p, wspec.label(), size,
                         strong.constants[i], weak.constants[i],
                         strong.stability_ratio])
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], r[4]))
    _write_csv(os.path.join(base, "norms.csv"),
               ("params", "operator", "p", "weight", "size", "norm_estimate",
                "weak11_estimate", "stability_ratio"), rows)
    _write_json(os.path.join(base, "timings.json"),
                {"command": "norms", "cells": timings})
    return EXIT_OK


def _worker_count(config: RunConfig) -> int:
    if config.workers is not None:
        return config.workers
    env = os.environ.get("JHL_WORKERS", "").strip()
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError(f"JHL_WORKERS must be an integer, got {env!r}") from exc
        if value < 1:
            raise ConfigError("JHL_WORKERS must be at least 1")
        return value
    return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jhl",
        description="Heat-semigroup kernels, path operators, and estimate "
                    "verification for Jacobi expansions.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (("kernel", "write kernel and derivative matrices"),
                      ("operators", "write per-index path-functional tables"),
                      ("verify", "run the estimate verification sweeps"),
                      ("norms", "sweep weighted operator-norm estimates")):
        cmd = sub.add_parser(name, help=doc)
        cmd.add_argument("--config", help="path to a JSON run configuration")
        cmd.add_argument("--out", help="output directory (overrides config)")
        cmd.add_argument("--seed", type=int, help="probe seed (overrides config)")
        cmd.add_argument("--workers", type=int,
                         help="worker count (overrides config and JHL_WORKERS)")
    return parser


_COMMANDS = {
    "kernel": cmd_kernel,
    "operators": cmd_operators,
    "verify": cmd_verify,
    "norms": cmd_norms,
}


def _error_record(kind: str, message: str) -> None:
    json.dump({"error": kind, "message": message}, sys.stderr)
    sys.stderr.write("\n")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config) if args.config else RunConfig()
        overrides = {}
        if args.out is not None:
            overrides["out_dir"] = args.out
        if args.seed is not None:
            if not (0 <= args.seed < 2 ** 64):
                raise ConfigError("seed must fit in an unsigned 64-bit integer")
            overrides["seed"] = args.seed
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("workers must be at least 1")
            overrides["workers"] = args.workers
        if overrides:
            config = RunConfig.from_dict({**config.to_dict(), **overrides})
        return _COMMANDS[args.command](config)
    except ConfigError as exc:
        _error_record("config", str(exc))
        return EXIT_CONFIG
    except NumericFailure as exc:
        _error_record("numeric", str(exc))
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
