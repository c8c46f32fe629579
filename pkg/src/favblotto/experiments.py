"""Parameter sweeps that solve a family of games and tabulate the results as CSV.

A sweep spec is a JSON document::

    {
      "name": "fig4a",
      "sweep": {"pbar": {"start": -10, "stop": 10, "step": 0.1}, "qbar": [0.5, 1, 2]},
      "template": {"xA": 10, "xB": 10, "alpha": 0.5,
                   "battlefields": [{"w": 1, "p": "pbar", "q": "qbar"}, ...]},
      "delta": 1e-6
    }

Template fields may be numbers or arithmetic expressions over the sweep
variables. The sweep is the cartesian product of the variables in the order
given, with the last variable varying fastest.
"""

from __future__ import annotations

import ast
import csv
import io
import itertools
import json
import operator
from dataclasses import dataclass, field
from decimal import Decimal
from importlib import resources
from pathlib import Path
from typing import Any, Iterator

from .game import Battlefield, GameInstance, Player, check_assumptions
from .oud import Kappa, build_ouds, oud_payoffs
from .solver import SolverConfig, Status, solve

FREE_A = "FREE_A"
FREE_B = "FREE_B"

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def evaluate(expr: Any, env: dict[str, float]) -> float:
    """Evaluate a number or an arithmetic expression string over ``env``."""
    if isinstance(expr, bool):
        raise ValueError(f"expected a number or expression, got {expr!r}")
    if isinstance(expr, (int, float)):
        return float(expr)
    if not isinstance(expr, str):
        raise ValueError(f"expected a number or expression, got {expr!r}")

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise ValueError(f"unknown variable {node.id!r} in {expr!r}")
            return float(env[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](walk(node.operand))
        raise ValueError(f"unsupported syntax in expression {expr!r}")

    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {expr!r}") from exc
    return walk(tree)


def _range_values(spec: dict) -> list[float]:
    # Decimal arithmetic keeps 0.1-style steps from drifting
    start, stop, step = (Decimal(str(spec[k])) for k in ("start", "stop", "step"))
    if step <= 0:
        raise ValueError("sweep step must be > 0")
    count = int((stop - start) / step + Decimal("1e-9")) + 1
    return [float(start + i * step) for i in range(count)]


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    template: dict
    sweep: dict[str, list[float]]
    delta: float = 1e-6

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        unknown = set(data) - {"name", "template", "sweep", "delta", "description"}
        if unknown:
            raise ValueError(f"unknown experiment fields: {sorted(unknown)}")
        if "template" not in data or "sweep" not in data:
            raise ValueError("experiment spec needs 'template' and 'sweep'")
        sweep = {}
        for var, values in data["sweep"].items():
            if not var.isidentifier():
                raise ValueError(f"sweep variable {var!r} is not an identifier")
            vals = _range_values(values) if isinstance(values, dict) else [float(v) for v in values]
            if not vals:
                raise ValueError(f"sweep variable {var!r} has no values")
            sweep[var] = vals
        return cls(
            name=str(data.get("name", "experiment")),
            template=data["template"],
            sweep=sweep,
            delta=float(data.get("delta", 1e-6)),
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        return cls.from_dict(json.loads(text))

    def points(self) -> Iterator[dict[str, float]]:
        names = list(self.sweep)
        for combo in itertools.product(*(self.sweep[k] for k in names)):
            yield dict(zip(names, combo))

    def instance(self, env: dict[str, float]) -> GameInstance:
        t = self.template
        bfs = [
            Battlefield(
                evaluate(b["w"], env), evaluate(b.get("p", 0.0), env), evaluate(b.get("q", 1.0), env)
            )
            for b in t["battlefields"]
        ]
        return GameInstance(
            tuple(bfs), evaluate(t["xA"], env), evaluate(t["xB"], env), evaluate(t.get("alpha", 0.5), env)
        )

    @property
    def n(self) -> int:
        return len(self.template["battlefields"])


@dataclass
class Outcome:
    """Equilibrium summary in internal labels (after the xA <= xB normalisation)."""

    status: str
    piA: float = float("nan")
    piB: float = float("nan")
    kappa: Kappa | None = None
    gA: float = float("nan")
    gB: float = float("nan")
    classes: list[str] = field(default_factory=list)
    message: str = ""


def solve_with_reductions(g: GameInstance, cfg: SolverConfig) -> Outcome:
    """Solve ``g``, settling trivially decided battlefields and games first.

    Battlefields one player wins while spending nothing are credited to that
    player and dropped; if a player can then outbid every opponent reach at
    once, that player takes all remaining value.
    """
    status = check_assumptions(g)
    free_a = free_b = 0.0
    classes = [""] * g.n
    keep = list(range(g.n))
    if status.a2_violators:
        for i, winner in zip(status.a2_violators, status.a2_winners):
            if winner is Player.A:
                free_a += g.battlefields[i].w
                classes[i] = FREE_A
            else:
                free_b += g.battlefields[i].w
                classes[i] = FREE_B
        keep = [i for i in range(g.n) if not classes[i]]
        if not keep:
            return Outcome(Status.TRIVIAL_GAME.value, free_a, free_b, classes=classes)
        # budgets are already ordered, so the reduced game is not re-swapped
        g = GameInstance(tuple(g.battlefields[i] for i in keep), g.xA, g.xB, g.alpha)
        status = check_assumptions(g)
    rest = g.total_value
    if not status.a1_holds:
        sweeper = status.trivial_winner
        for i in keep:
            classes[i] = FREE_A if sweeper is Player.A else FREE_B
        if sweeper is Player.A:
            return Outcome(Status.TRIVIAL_GAME.value, free_a + rest, free_b, classes=classes)
        return Outcome(Status.TRIVIAL_GAME.value, free_a, free_b + rest, classes=classes)
    report = solve(g, cfg)
    if report.status is not Status.SOLVED:
        return Outcome(report.status.value, classes=classes, message=report.message)
    piA, piB = oud_payoffs(g, report.kappa)
    for i, c in zip(keep, build_ouds(g, report.kappa).classes):
        classes[i] = c.value
    return Outcome(
        Status.SOLVED.value,
        free_a + piA,
        free_b + piB,
        report.kappa,
        report.residual.gA,
        report.residual.gB,
        classes,
    )


def _fmt(x: float | None) -> str:
    if x is None or x != x:
        return ""
    return f"{x:.9g}"


def header(spec: ExperimentSpec) -> list[str]:
    return (
        list(spec.sweep)
        + ["lamA", "lamB", "gA", "gB", "piA", "piB"]
        + [f"class_{i + 1}" for i in range(spec.n)]
        + ["status"]
    )


def run_rows(spec: ExperimentSpec, cfg: SolverConfig | None = None) -> Iterator[list[str]]:
    """One CSV row per sweep point, in the caller's player labels."""
    cfg = cfg or SolverConfig(delta=spec.delta)
    for env in spec.points():
        values = [_fmt(v) for v in env.values()]
        try:
            g = spec.instance(env)
            out = solve_with_reductions(g, cfg)
        except (ValueError, ArithmeticError, RuntimeError) as exc:
            yield values + [""] * 6 + [""] * spec.n + [f"Error: {exc}".replace("\n", " ")]
            continue
        lam = out.kappa.as_tuple() if out.kappa is not None else (None, None)
        lamA, lamB = g.to_caller(lam)
        gA, gB = g.to_caller((out.gA, out.gB))
        piA, piB = g.to_caller((out.piA, out.piB))
        classes = out.classes
        if g.swapped:
            classes = [{FREE_A: FREE_B, FREE_B: FREE_A}.get(c, c) for c in classes]
        yield values + [_fmt(v) for v in (lamA, lamB, gA, gB, piA, piB)] + classes + [out.status]


def run_experiment(spec: ExperimentSpec, out: io.TextIOBase | None = None, cfg: SolverConfig | None = None) -> str:
    """Run the sweep; write CSV to ``out`` if given and return it as a string."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header(spec))
    for row in run_rows(spec, cfg):
        writer.writerow(row)
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


PRESETS = ("fig4a", "fig4b", "fig5_spread", "fig5_focus")


def load_preset(name: str) -> ExperimentSpec:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("favblotto.presets").joinpath(f"{name}.json").read_text()
    return ExperimentSpec.from_json(text)


def load_spec(path_or_preset: str) -> ExperimentSpec:
    if path_or_preset in PRESETS and not Path(path_or_preset).exists():
        return load_preset(path_or_preset)
    return ExperimentSpec.from_json(Path(path_or_preset).read_text())
