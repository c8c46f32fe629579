"""Command-line front end: ``favblotto <subcommand> ...``.

Every result is reported in the player labels of the input file, even when the
instance is internally relabelled so that player A has the smaller budget.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, TextIO

import numpy as np

from . import fapa
from .experiments import PRESETS, load_spec, run_experiment
from .game import GameInstance, Player, pure_payoffs, random_instance
from .oud import Kappa, build_ouds, oud_payoffs, residual
from .solver import RefinementError, SolverConfig, Status, solve
from .strategies import StrategyKind, StrategyProfile, exploitability, sample

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TRIVIAL = 2
EXIT_BUDGET = 3


class InputError(Exception):
    """Bad user input; reported on stderr with exit code 1."""


def _load_instance(path: str) -> GameInstance:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read instance file {path!r}: {exc.strerror}") from exc
    try:
        return GameInstance.from_json(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"instance file {path!r} is not valid JSON: {exc}") from exc
    except (ValueError, TypeError, KeyError) as exc:
        raise InputError(f"invalid instance in {path!r}: {exc}") from exc


@contextmanager
def _output(path: str | None) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _emit_json(args, obj) -> None:
    with _output(args.out) as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _config(args) -> SolverConfig:
    try:
        return SolverConfig(delta=args.delta, m0=getattr(args, "m0", None), M0=getattr(args, "M0", None))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _internal_kappa(g: GameInstance, pair: list[float] | None, cfg: SolverConfig) -> Kappa:
    """Kappa in internal labels, either from the caller's ``--kappa`` or by solving."""
    if pair is not None:
        lamA, lamB = g.to_caller(tuple(pair))  # the swap is its own inverse
        k = Kappa(lamA, lamB)
        try:
            k.require_positive()
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        return k
    report = solve(g, cfg)
    if report.status is not Status.SOLVED:
        raise InputError(
            f"instance could not be solved (status {report.status.value}); pass --kappa explicitly"
        )
    return report.kappa


def _caller_ouds(g: GameInstance, k: Kappa) -> dict:
    prof = build_ouds(g, k).to_dict()
    lamA, lamB = g.to_caller(k.as_tuple())
    prof["kappa"] = {"lamA": lamA, "lamB": lamB}
    if g.swapped:
        for bf in prof["battlefields"]:
            bf["fA"], bf["fB"] = bf["fB"], bf["fA"]
            bf["meanA"], bf["meanB"] = bf["meanB"], bf["meanA"]
        prof["classes_refer_to_relabelled_instance"] = True
    return prof


# -- subcommands ---------------------------------------------------------


def cmd_solve(args) -> int:
    g = _load_instance(args.instance)
    cfg = _config(args)
    trace: list | None = [] if args.trace else None
    report = solve(g, cfg, trace=trace)
    out = report.to_dict(g)
    if report.status is Status.SOLVED:
        out["payoffs"] = dict(zip(("piA", "piB"), g.to_caller(oud_payoffs(g, report.kappa))))
    _emit_json(args, out)
    if trace is not None:
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["phase", "t", "curve_x", "curve_y", "gA", "gB"])
            for phase, t, x, y, gA, gB in trace:
                cx, cy = g.to_caller((x, y))
                cA, cB = g.to_caller((gA, gB))
                writer.writerow([phase] + [f"{v:.12g}" for v in (t, cx, cy, cA, cB)])
    return {Status.SOLVED: EXIT_OK, Status.TRIVIAL_GAME: EXIT_TRIVIAL}.get(report.status, EXIT_BUDGET)


def cmd_fapa(args) -> int:
    try:
        inst = fapa.FapaInstance(args.uA, args.uB, args.p, args.q, args.alpha)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    eq = fapa.equilibrium(inst)
    out = eq.to_dict()
    if args.check_step is not None:
        gapA, gapB = fapa.deviation_gap(inst, eq, args.check_step)
        out["deviation_gap"] = {"gapA": gapA, "gapB": gapB, "grid_step": args.check_step}
    _emit_json(args, out)
    return EXIT_OK


def _parse_alloc(text: str, n: int) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise InputError(f"allocation {text!r} is not a comma-separated list of numbers") from exc
    if len(vals) != n:
        raise InputError(f"allocation {text!r} has {len(vals)} entries, instance has {n}")
    return vals


def cmd_payoff(args) -> int:
    g = _load_instance(args.instance)
    if args.alloc_a is not None or args.alloc_b is not None:
        if args.alloc_a is None or args.alloc_b is None:
            raise InputError("--alloc-a and --alloc-b must be given together")
        a = _parse_alloc(args.alloc_a, g.n)
        b = _parse_alloc(args.alloc_b, g.n)
        # pure allocations are in caller labels; map them to internal players
        ia, ib = g.to_caller((a, b))
        piA, piB = g.to_caller(pure_payoffs(g, ia, ib))
        _emit_json(args, {"piA": piA, "piB": piB})
        return EXIT_OK
    k = _internal_kappa(g, args.kappa, _config(args))
    piA, piB = g.to_caller(oud_payoffs(g, k))
    res = residual(g, k)
    gA, gB = g.to_caller((res.gA, res.gB))
    lamA, lamB = g.to_caller(k.as_tuple())
    _emit_json(
        args,
        {"kappa": {"lamA": lamA, "lamB": lamB}, "residual": {"gA": gA, "gB": gB}, "piA": piA, "piB": piB},
    )
    return EXIT_OK


def cmd_ouds(args) -> int:
    g = _load_instance(args.instance)
    k = _internal_kappa(g, args.kappa, _config(args))
    _emit_json(args, _caller_ouds(g, k))
    return EXIT_OK


def _profile(g: GameInstance, args) -> StrategyProfile:
    k = _internal_kappa(g, args.kappa, _config(args))
    owner = g.caller_player(Player(args.player))
    return StrategyProfile.for_game(g, build_ouds(g, k), owner, StrategyKind(args.kind))


def cmd_sample(args) -> int:
    g = _load_instance(args.instance)
    if args.count < 1:
        raise InputError("--count must be >= 1")
    sp = _profile(g, args)
    draws = sample(sp, np.random.default_rng(args.seed), args.count)
    with _output(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(g.n)])
        for row in draws:
            writer.writerow([f"{v:.12g}" for v in row])
    return EXIT_OK


def cmd_exploit(args) -> int:
    g = _load_instance(args.instance)
    if args.samples < 1:
        raise InputError("--samples must be >= 1")
    sp = _profile(g, args)
    step = args.grid_step if args.grid_step is not None else g.budget(sp.owner.other) / 400
    try:
        rep = exploitability(g, sp, step, args.samples, np.random.default_rng(args.seed))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    out = rep.to_dict()
    out["deviator"] = g.caller_player(Player(rep.deviator)).value
    out["exploited"] = g.caller_player(Player(rep.exploited)).value
    _emit_json(args, out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        spec = load_spec(args.spec)
    except OSError as exc:
        raise InputError(f"cannot read experiment spec {args.spec!r}: {exc.strerror}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"invalid experiment spec {args.spec!r}: {exc}") from exc
    cfg = _config(args) if args.delta_given else SolverConfig(delta=spec.delta)
    with _output(args.out) as fh:
        run_experiment(spec, fh, cfg)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.n < 1:
        raise InputError("--n must be >= 1")
    _emit_json(args, random_instance(args.n, args.seed).to_dict())
    return EXIT_OK


# -- parser --------------------------------------------------------------


class _DeltaAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.delta_given = True


def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="RNG seed (default 0)")
    p.add_argument(
        "--delta", type=float, default=d(1e-6), action=_DeltaAction,
        help="solver stopping diameter (default 1e-6)",
    )
    p.add_argument("--out", default=d(None), help="write output here instead of stdout")


def _add_kappa(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--kappa", nargs=2, type=float, metavar=("LAMA", "LAMB"),
        help="use this kappa instead of solving the instance",
    )


def _add_strategy(p: argparse.ArgumentParser) -> None:
    _add_kappa(p)
    p.add_argument("--player", choices=["A", "B"], default="A", help="whose strategy (default A)")
    p.add_argument(
        "--kind", choices=[k.value for k in StrategyKind], default="GL",
        help="GL: independent draws; IU: rescaled to the exact budget; UniformSplit: even split",
    )


EXPERIMENT_HELP = f"""\
Run a parameter sweep and write one CSV row per sweep point.

SPEC is a JSON sweep file or a preset name ({", ".join(PRESETS)}).
Columns: the sweep variables, lamA, lamB, gA, gB, piA, piB, class_1..class_n,
status. class_i is the battlefield's index class (IP1..IP3, IN1..IN3) or
FREE_A / FREE_B for battlefields decided without a solve. status is Solved,
TrivialGame, BudgetExceeded or "Error: ...". Numbers use 9 significant digits.
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="favblotto",
        description="Equilibria of Colonel Blotto and General Lotto games with favoritism.",
    )
    _add_common(parser, suppress=False)
    parser.set_defaults(delta_given=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, description=None):
        p = sub.add_parser(
            name, help=help_text, description=description or help_text,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        _add_common(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add(
        "solve", cmd_solve,
        "find a delta-approximate kappa; exit 0 solved, 2 trivial game, 3 budget exceeded",
    )
    p.add_argument("instance", help="instance JSON file ('-' for stdin)")
    p.add_argument("--m0", type=float, help="initial lower corner (default 1e-3*min(xA,1))")
    p.add_argument("--M0", type=float, help="initial upper corner (default 10*xA)")
    p.add_argument("--trace", metavar="CSV", help="write boundary samples to this CSV file")

    p = add("fapa", cmd_fapa, "equilibrium of a single all-pay auction with favoritism")
    p.add_argument("--uA", type=float, required=True)
    p.add_argument("--uB", type=float, required=True)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--check-step", type=float, help="also report deviation gaps on this bid grid")

    p = add("payoff", cmd_payoff, "equilibrium payoffs at kappa, or payoffs of two pure allocations")
    p.add_argument("instance")
    _add_kappa(p)
    p.add_argument("--alloc-a", help="comma-separated pure allocation of player A")
    p.add_argument("--alloc-b", help="comma-separated pure allocation of player B")

    p = add("ouds", cmd_ouds, "per-battlefield equilibrium marginals as JSON")
    p.add_argument("instance")
    _add_kappa(p)

    p = add("sample", cmd_sample, "draw allocations from a strategy as CSV (one row per draw)")
    p.add_argument("instance")
    _add_strategy(p)
    p.add_argument("--count", type=int, default=10)

    p = add("exploit", cmd_exploit, "estimate how much the opponent gains by best-responding")
    p.add_argument("instance")
    _add_strategy(p)
    p.add_argument("--grid-step", type=float, help="best-response bid grid (default budget/400)")
    p.add_argument("--samples", type=int, default=20000)

    p = add("experiment", cmd_experiment, "run a sweep to CSV", EXPERIMENT_HELP)
    p.add_argument("spec", help="sweep JSON file or preset name")

    p = add("gen", cmd_gen, "generate a random instance as JSON")
    p.add_argument("--n", type=int, required=True, help="number of battlefields")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"favblotto {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except RefinementError as exc:
        print(f"favblotto {args.command}: refinement failure: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
