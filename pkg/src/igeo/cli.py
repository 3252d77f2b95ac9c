"""``igeo`` command-line entry point.

    igeo <command> --config <path> [--out <path>] [--seed N]

Commands: divergence, geometry, geodesic, transport, ngd, verify.
Exit codes: 0 ok, 1 invariant failure, 2 bad input, 3 numeric failure.
Set ``IGEO_LOG`` (e.g. ``DEBUG``, ``INFO``) for log output on stderr.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import __version__
from .divergence_geometry import divergence
from .errors import DomainError, IGeoError, NumericsError, OutOfDomain, ShapeError
from .io import ConfigError, ResultTable, load_family, load_measure, load_space, read_config
from .kernels import check_alpha
from .oracles import RNG_ALGORITHM
from .submanifolds import christoffel, geodesic, line_path, natural_gradient_descent, parallel_transport
from .verify import ALPHA_GRID, run_all

log = logging.getLogger("igeo")

EXIT_OK, EXIT_INVARIANT, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class _PartialResult(Exception):
    def __init__(self, table):
        self.table = table


def _number(config, key, default=None, positive=False):
    value = config.get(key, default)
    if value is None:
        raise ConfigError(f"missing required key {key!r}")
    try:
        value = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a number") from exc
    if not np.isfinite(value) or (positive and value <= 0):
        raise ConfigError(f"{key} must be {'positive' if positive else 'finite'}")
    return value


def _alpha(config, key="alpha", default=None):
    value = _number(config, key, default)
    try:
        return check_alpha(value)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def _vec(config, key, dim=None):
    if key not in config:
        raise ConfigError(f"missing required key {key!r}")
    try:
        arr = np.asarray(config[key], dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a list of numbers") from exc
    if dim is not None and arr.size != dim:
        raise ConfigError(f"{key} must have length {dim}")
    return arr


def _family(config):
    space = load_space(config.get("space"))
    return space, load_family(config.get("family"), space)


def cmd_divergence(config: dict) -> ResultTable:
    space = load_space(config.get("space"))
    P = load_measure(config.get("P"), space)
    Q = load_measure(config.get("Q"), space)
    alphas = config.setdefault("alphas", list(ALPHA_GRID))
    table = ResultTable(["alpha", "D_alpha_PQ", "D_neg_alpha_QP"])
    for al in alphas:
        al = _alpha({"alpha": al})
        table.add(al, divergence(al, P, Q), divergence(-al, Q, P))
    return table


def cmd_geometry(config: dict) -> ResultTable:
    _, fam = _family(config)
    y = _vec(config, "y", fam.dim)
    alpha = _alpha(config)
    con = christoffel(fam, y, alpha)
    table = ResultTable(["quantity", "k", "i", "j", "value"])
    d = fam.dim
    for i in range(d):
        for j in range(d):
            table.add("g", "", i, j, con.g[i, j])
    for i in range(d):
        for j in range(d):
            table.add("g_inv", "", i, j, con.g_inv[i, j])
    for k in range(d):
        for i in range(d):
            for j in range(d):
                table.add("gamma", k, i, j, con.christoffel[k, i, j])
    return table


def _trace_table(names, d):
    cols = ["t"] + [f"y{i}" for i in range(d)]
    for name in names:
        cols += [f"{name}{i}" for i in range(d)]
    return cols


def cmd_geodesic(config: dict) -> ResultTable:
    _, fam = _family(config)
    alpha = _alpha(config)
    y0, v0 = _vec(config, "y0", fam.dim), _vec(config, "v0", fam.dim)
    t_end = _number(config, "t_end", 1.0, positive=True)
    step = _number(config, "step", 1e-2, positive=True)
    config.update(t_end=t_end, step=step)
    table = ResultTable(_trace_table(["ydot"], fam.dim) + ["energy", "status"])
    try:
        tr = geodesic(fam, alpha, y0, v0, t_end, step)
    except OutOfDomain as exc:
        tr = exc.trace
    for k, t in enumerate(tr.t):
        table.add(t, *tr.y[k], *tr.ydot[k], tr.energy[k], "ok")
    if tr.status != "ok":
        table.rows[-1][-1] = tr.status
        raise _PartialResult(table)
    return table


def cmd_transport(config: dict) -> ResultTable:
    _, fam = _family(config)
    alpha = _alpha(config)
    path_cfg = config.get("path")
    if not isinstance(path_cfg, dict):
        raise ConfigError("transport needs a 'path' object with y0 and velocity")
    path = line_path(_vec(path_cfg, "y0", fam.dim), _vec(path_cfg, "velocity", fam.dim))
    u0 = _vec(config, "u0", fam.dim)
    v0 = _vec(config, "v0", fam.dim) if "v0" in config else None
    t_end = _number(config, "t_end", 1.0, positive=True)
    step = _number(config, "step", 1e-3, positive=True)
    config.update(t_end=t_end, step=step)
    names = ["u"] + (["v"] if v0 is not None else [])
    cols = _trace_table(names, fam.dim) + ["u_norm_sq"] + (["dual_product"] if v0 is not None else []) + ["status"]
    table = ResultTable(cols)
    try:
        tr = parallel_transport(fam, alpha, path, u0, t_end, step, dual_v0=v0)
    except OutOfDomain as exc:
        tr = exc.trace
    for k, t in enumerate(tr.t):
        row = [t, *tr.y[k], *tr.u[k]]
        if v0 is not None:
            row += [*tr.v[k]]
        row.append(tr.norm_sq[k])
        if v0 is not None:
            row.append(tr.product[k])
        table.add(*row, "ok")
    if tr.status != "ok":
        table.rows[-1][-1] = tr.status
        raise _PartialResult(table)
    return table


def cmd_ngd(config: dict) -> ResultTable:
    space, fam = _family(config)
    alpha = _alpha(config)
    target_cfg = config.get("target")
    if isinstance(target_cfg, dict) and "parameters" in target_cfg:
        target = fam.measure(_vec(target_cfg, "parameters", fam.dim))
    else:
        target = load_measure(target_cfg, space)
    y_init = _vec(config, "y_init", fam.dim)
    max_iters = int(_number(config, "max_iters", 100, positive=True))
    config["max_iters"] = max_iters
    tr = natural_gradient_descent(fam, alpha, target, y_init, max_iters=max_iters)
    table = ResultTable(["iter"] + [f"y{i}" for i in range(fam.dim)] + ["objective", "grad_norm", "step_size"])
    for k in range(len(tr.objective)):
        table.add(k, *tr.y[k], tr.objective[k], tr.grad_norm[k], tr.step_size[k])
    table.metadata["status"] = tr.status
    return table


def cmd_verify(config: dict) -> tuple[ResultTable, bool]:
    if "seed" not in config:
        raise ConfigError("verify needs a seed (config key 'seed' or --seed)")
    seed = int(_number(config, "seed"))
    samples = int(_number(config, "samples", 200, positive=True))
    tol = config.get("tolerance")
    if tol is not None:
        tol = _number(config, "tolerance")
        if tol < 0:
            raise ConfigError("tolerance must be non-negative")
    config.update(seed=seed, samples=samples)
    rows, ok = run_all(seed, samples, tol)
    table = ResultTable(["invariant", "max_violation", "tolerance", "passed"])
    for name, violation, t, passed in rows:
        table.add(name, violation, t, passed)
    table.metadata["rng"] = RNG_ALGORITHM
    return table, ok


COMMANDS = {
    "divergence": cmd_divergence,
    "geometry": cmd_geometry,
    "geodesic": cmd_geodesic,
    "transport": cmd_transport,
    "ngd": cmd_ngd,
    "verify": cmd_verify,
}


def _emit(table: ResultTable, out):
    if out:
        table.write(out)
    else:
        sys.stdout.write(table.to_csv())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="igeo", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", help="CSV output path (default: stdout)")
    parser.add_argument("--seed", type=int, help="seed for randomised sweeps; overrides the config")
    args = parser.parse_args(argv)

    level = os.environ.get("IGEO_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")

    try:
        config = read_config(args.config)
        if args.seed is not None:
            config["seed"] = args.seed
        log.info("running %s with config %s", args.command, args.config)
        result = COMMANDS[args.command](config)
    except _PartialResult as partial:
        table = partial.table
        table.metadata.update(command=args.command, config=config, igeo_version=__version__)
        _emit(table, args.out)
        print("igeo: trajectory left the parameter box; partial trace written", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, DomainError, ShapeError) as exc:
        print(f"igeo: bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericsError, IGeoError, FloatingPointError) as exc:
        print(f"igeo: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    status = EXIT_OK
    if isinstance(result, tuple):
        result, ok = result
        status = EXIT_OK if ok else EXIT_INVARIANT
    result.metadata.update(command=args.command, config=config, igeo_version=__version__)
    _emit(result, args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
