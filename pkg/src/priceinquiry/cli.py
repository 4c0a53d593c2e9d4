"""Command-line driver.

    priceinquiry solve    --bus A --theta 200 --cost 10
    priceinquiry evaluate --policy myopic
    priceinquiry simulate --episodes 10000 --seed 1 --mode kernel
    priceinquiry sweep    --axis cost --values 1,2,5,10,20,40 --mode exact
    priceinquiry kernel   --bus E --out-dir kernels/

Options may also come from a flat TOML file (``--config``) whose keys are
the long flag names; flags win. Exit status: 0 ok, 1 bad input, 2
numerical failure.
"""

import argparse
import contextlib
import os
import sys
import time
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import csvio
from .exceptions import ConvergenceError, InputError
from .lmp_curve import load_curves
from .mdp import ModelConfig, evaluate_policy, solve
from .policies import PolicySpec, make_policy
from .simulator import (DEFAULT_COSTS, DEFAULT_THETAS, SWEEP_COLUMNS, KernelCache,
                        SimConfig, simulate, sweep)

DATA_ENV = "PRICEINQUIRY_DATA_DIR"
DEFAULT_CURVE = "pjm5.csv"

DEFAULTS = {
    "curve": None,
    "bus": "all",
    "theta": 200.0,
    "cost": 10.0,
    "beta": 0.99,
    "horizon": 10,
    "utility_scale": 100.0,
    "tol": 1e-9,
    "max_iter": 100_000,
    "out": None,
    "episodes": 10_000,
    "slots": 917,
    "seed": 0,
    "mode": None,
    "policy": "optimal",
    "policy_file": None,
    "policies": "optimal,always,never,myopic",
    "axis": "cost",
    "values": None,
    "out_dir": None,
}
INTS = {"horizon", "episodes", "slots", "seed", "max_iter"}
FLOATS = {"theta", "cost", "beta", "utility_scale", "tol"}

SIM_COLUMNS = ("bus", "mode", "policy", "episodes", "slots", "mean_reward", "mean_ideal",
               "mean_cost", "stderr_cost", "mean_inquiries")


def default_curve_path():
    env = os.environ.get(DATA_ENV)
    if env:
        return Path(env) / DEFAULT_CURVE
    return resources.files("priceinquiry") / "data" / DEFAULT_CURVE


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat TOML file with option defaults")
    common.add_argument("--curve", help="LMP table CSV (default: bundled PJM five-bus)")
    common.add_argument("--bus", help="bus id or 'all'")
    common.add_argument("--theta", type=float, help="load variance growth per slot, MW^2")
    common.add_argument("--cost", type=float, help="communication cost per inquiry")
    common.add_argument("--beta", type=float, help="discount factor")
    common.add_argument("--horizon", type=int, help="maximum slots between inquiries")
    common.add_argument("--utility-scale", dest="utility_scale", type=float,
                        help="a in U(x) = a log x")
    common.add_argument("--tol", type=float, help="value iteration tolerance")
    common.add_argument("--max-iter", dest="max_iter", type=int,
                        help="value iteration sweep limit")
    common.add_argument("--out", help="output CSV (default: stdout)")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--episodes", type=int)
    sim.add_argument("--slots", type=int, help="slots per episode")
    sim.add_argument("--seed", type=int)

    p = argparse.ArgumentParser(prog="priceinquiry", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="optimal policy and values")
    ev = sub.add_parser("evaluate", parents=[common], help="exact value of a policy")
    ev.add_argument("--policy", help="optimal, myopic, always, never or periodic:n")
    ev.add_argument("--policy-file", dest="policy_file", help="policy CSV dump to evaluate")
    si = sub.add_parser("simulate", parents=[common, sim], help="Monte Carlo evaluation")
    si.add_argument("--policies", help="comma separated policy list")
    si.add_argument("--mode", choices=("random_walk", "kernel"))
    sw = sub.add_parser("sweep", parents=[common, sim], help="cost ratios over theta or cost")
    sw.add_argument("--axis", choices=("theta", "cost"))
    sw.add_argument("--values", help="comma separated ascending values")
    sw.add_argument("--mode", choices=("exact", "random_walk", "kernel", "all"))
    ke = sub.add_parser("kernel", parents=[common], help="dump transition matrices")
    ke.add_argument("--out-dir", dest="out_dir", help="write one CSV per bus and gap")
    return p


def _merge(args):
    opts = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read config file: {exc}", "config") from None
        except tomllib.TOMLDecodeError as exc:
            raise InputError(f"malformed config file: {exc}", "config") from None
        for key, value in data.items():
            name = key.replace("-", "_")
            if name not in DEFAULTS:
                raise InputError(f"unknown config key {key!r}", key)
            if name in INTS and not isinstance(value, int) or \
                    name in FLOATS and not isinstance(value, (int, float)):
                raise InputError(f"config key {key!r} must be numeric", key)
            if isinstance(value, list):
                value = ",".join(str(v) for v in value)
            opts[name] = value
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            opts[key] = value
    return opts


def _floats(text, name):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InputError(f"{name} must be a comma separated list of numbers", name) from None


def _model(opts):
    try:
        return ModelConfig(beta=opts["beta"], comm_cost=opts["cost"],
                           horizon=opts["horizon"], utility_scale=opts["utility_scale"])
    except InputError as exc:
        if exc.field == "comm_cost":
            exc.field = "cost"
        raise


def _curves(opts):
    path = Path(opts["curve"]) if opts["curve"] else default_curve_path()
    if not path.is_file():
        raise InputError(f"curve file {path} does not exist", "curve")
    buses = None if opts["bus"] == "all" else [b.strip() for b in str(opts["bus"]).split(",")]
    return load_curves(path, buses)


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def cmd_solve(opts, cache):
    config = _model(opts)
    rows, states, residual = [], 0, 0.0
    for curve in _curves(opts):
        kernel = cache.get(curve, opts["theta"], config.horizon)
        vf = solve(config, curve, kernel, tol=opts["tol"], max_iter=opts["max_iter"])
        rows += csvio.policy_rows(curve, vf.policy, vf.values)
        states += vf.values.size
        residual = max(residual, vf.residual)
    with _output(opts["out"]) as fh:
        csvio.write_rows(fh, csvio.POLICY_COLUMNS, rows)
    return f"solved {states} states, residual {residual:.3g}"


def cmd_evaluate(opts, cache):
    config = _model(opts)
    curves = _curves(opts)
    dumped = None
    if opts["policy_file"]:
        try:
            dumped = csvio.read_policy_dump(Path(opts["policy_file"]).read_text())
        except OSError as exc:
            raise InputError(f"cannot read policy file: {exc}", "policy_file") from None
    spec = PolicySpec.parse(opts["policy"])
    rows, starts = [], []
    for curve in curves:
        kernel = cache.get(curve, opts["theta"], config.horizon)
        if dumped is not None:
            if curve.bus_id not in dumped:
                raise InputError(f"policy file has no bus {curve.bus_id!r}", "policy_file")
            table = dumped[curve.bus_id][0]
        else:
            solved = None
            if spec.kind == "optimal":
                solved = solve(config, curve, kernel, tol=opts["tol"],
                               max_iter=opts["max_iter"])
            table = make_policy(spec, config, curve, kernel, solved)
        pv = evaluate_policy(config, curve, kernel, table)
        rows += csvio.policy_rows(curve, table, pv.values)
        starts.append(f"{curve.bus_id}={pv.start_value:.6g}")
    with _output(opts["out"]) as fh:
        csvio.write_rows(fh, csvio.POLICY_COLUMNS, rows)
    return f"evaluated {len(rows)} states, start values {' '.join(starts)}"


def _sim(opts, mode):
    return SimConfig(episodes=opts["episodes"], slots_per_episode=opts["slots"],
                     base_seed=opts["seed"], mode=mode)


def cmd_simulate(opts, cache):
    config = _model(opts)
    mode = opts["mode"] or "random_walk"
    sim = _sim(opts, mode)
    specs = [PolicySpec.parse(s) for s in str(opts["policies"]).split(",") if s.strip()]
    rows = []
    for curve in _curves(opts):
        kernel = cache.get(curve, opts["theta"], config.horizon)
        solved = None
        if any(s.kind == "optimal" for s in specs):
            solved = solve(config, curve, kernel, tol=opts["tol"], max_iter=opts["max_iter"])
        tables = [make_policy(s, config, curve, kernel, solved) for s in specs]
        stats = simulate(tables, config, curve, kernel.law, sim, kernel=kernel)
        for spec, st in zip(specs, stats):
            rows.append({"bus": curve.bus_id, "mode": mode, "policy": spec.label,
                         "episodes": st.episodes, "slots": sim.slots_per_episode,
                         "mean_reward": st.discounted_reward,
                         "mean_ideal": st.discounted_ideal, "mean_cost": st.mean_cost,
                         "stderr_cost": st.standard_error,
                         "mean_inquiries": st.inquiry_count})
    with _output(opts["out"]) as fh:
        csvio.write_rows(fh, SIM_COLUMNS, rows)
    return f"simulated {len(rows)} policy runs x {sim.episodes} episodes ({mode})"


def cmd_sweep(opts, cache):
    config = _model(opts)
    axis = "comm_cost" if opts["axis"] in ("cost", "comm_cost") else opts["axis"]
    if axis not in ("theta", "comm_cost"):
        raise InputError(f"axis must be theta or cost, got {opts['axis']!r}", "axis")
    if opts["values"] is None:
        values = list(DEFAULT_THETAS if axis == "theta" else DEFAULT_COSTS)
    else:
        values = _floats(opts["values"], "values")
    mode = opts["mode"] or "all"
    modes = ("exact", "random_walk", "kernel") if mode == "all" else (mode,)
    sim = _sim(opts, "random_walk") if mode != "exact" else None
    rows = sweep(axis, values, _curves(opts), config, opts["theta"], sim, modes, cache)
    with _output(opts["out"]) as fh:
        csvio.write_rows(fh, SWEEP_COLUMNS, rows)
    return f"swept {axis} over {len(values)} values, {len(rows)} rows"


def cmd_kernel(opts, cache):
    horizon = _model(opts).horizon
    out_dir = opts["out_dir"]
    long_rows, files = [], 0
    for curve in _curves(opts):
        kernel = cache.get(curve, opts["theta"], horizon)
        for delta in range(1, horizon + 1):
            m = kernel[delta]
            if out_dir:
                Path(out_dir).mkdir(parents=True, exist_ok=True)
                path = Path(out_dir) / f"kernel_{curve.bus_id}_d{delta:02d}.csv"
                rows = csvio.kernel_matrix_rows(curve, m)
                with open(path, "w", newline="") as fh:
                    csvio.write_rows(fh, list(rows[0]), rows)
                files += 1
            for i in range(m.shape[0]):
                for j in range(m.shape[1]):
                    long_rows.append({"bus": curve.bus_id, "delta": delta, "from_level": i,
                                      "to_level": j, "from_price": float(curve.prices[i]),
                                      "to_price": float(curve.prices[j]),
                                      "probability": float(m[i, j])})
    if not out_dir or opts["out"]:
        cols = ("bus", "delta", "from_level", "to_level", "from_price", "to_price",
                "probability")
        with _output(opts["out"]) as fh:
            csvio.write_rows(fh, cols, long_rows)
    return f"kernel: {len(long_rows)} entries, {files} files"


COMMANDS = {"solve": cmd_solve, "evaluate": cmd_evaluate, "simulate": cmd_simulate,
            "sweep": cmd_sweep, "kernel": cmd_kernel}


def main(argv=None):
    args = _parser().parse_args(argv)
    start = time.perf_counter()
    try:
        opts = _merge(args)
        cache = KernelCache(tol=1e-9)
        summary = COMMANDS[args.command](opts, cache)
    except InputError as exc:
        field = f" [{exc.field}]" if exc.field else ""
        print(f"priceinquiry: error{field}: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"priceinquiry: numerical failure: {exc}", file=sys.stderr)
        return 2
    print(f"{args.command}: {summary}, {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
