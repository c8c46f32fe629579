"""Winding-number bisection for the zero of the residual map.

A rectangle whose boundary is mapped by ``G`` to a curve winding around the
origin contains a zero of ``G``. The solver first grows a square until its
image winds, then halves it repeatedly, always keeping a half whose image
still winds, until the rectangle is smaller than ``delta``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .game import AssumptionStatus, GameInstance, check_assumptions
from .oud import Kappa, Residual, residual, residual_batch

_MIN_CORNER = 1e-12
_SAMPLES_PER_SIDE = 4


class RefinementError(RuntimeError):
    """Boundary subdivision hit its depth cap before the image was resolved."""


class Status(str, enum.Enum):
    SOLVED = "Solved"
    TRIVIAL_GAME = "TrivialGame"
    BUDGET_EXCEEDED = "BudgetExceeded"


@dataclass(frozen=True)
class Rect:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self) -> None:
        for name in ("x_lo", "x_hi", "y_lo", "y_hi"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (0 < self.x_lo < self.x_hi and 0 < self.y_lo < self.y_hi):
            raise ValueError(f"rectangle must be non-empty and strictly positive: {self}")

    @property
    def diameter(self) -> float:
        return max(self.x_hi - self.x_lo, self.y_hi - self.y_lo)

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_lo + self.x_hi) / 2, (self.y_lo + self.y_hi) / 2)

    def contains(self, x: float, y: float) -> bool:
        return self.x_lo <= x <= self.x_hi and self.y_lo <= y <= self.y_hi

    def contains_rect(self, other: "Rect") -> bool:
        return (
            self.x_lo <= other.x_lo
            and other.x_hi <= self.x_hi
            and self.y_lo <= other.y_lo
            and other.y_hi <= self.y_hi
        )

    def split(self) -> tuple["Rect", "Rect"]:
        """Two equal halves across the longer side (x on ties); the lower half comes first."""
        if self.x_hi - self.x_lo >= self.y_hi - self.y_lo:
            mid = (self.x_lo + self.x_hi) / 2
            return replace(self, x_hi=mid), replace(self, x_lo=mid)
        mid = (self.y_lo + self.y_hi) / 2
        return replace(self, y_hi=mid), replace(self, y_lo=mid)

    def boundary(self, t: np.ndarray, clockwise: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Points on the boundary for parameters ``t`` in [0, 4], starting at (x_lo, y_lo)."""
        t = np.asarray(t, dtype=float)
        if clockwise:
            t = 4.0 - t
        side = np.minimum(t.astype(np.int64), 3)
        s = t - side
        dx, dy = self.x_hi - self.x_lo, self.y_hi - self.y_lo
        x = np.array([self.x_lo, self.x_hi, self.x_hi, self.x_lo])[side]
        x += np.array([dx, 0.0, -dx, 0.0])[side] * s
        y = np.array([self.y_lo, self.y_lo, self.y_hi, self.y_hi])[side]
        y += np.array([0.0, dy, 0.0, -dy])[side] * s
        # clamp so that rounding never steps outside the rectangle
        np.minimum(np.maximum(x, self.x_lo, out=x), self.x_hi, out=x)
        np.minimum(np.maximum(y, self.y_lo, out=y), self.y_hi, out=y)
        return x, y

    def to_dict(self) -> dict:
        return {"x_lo": self.x_lo, "x_hi": self.x_hi, "y_lo": self.y_lo, "y_hi": self.y_hi}


@dataclass(frozen=True)
class SolverConfig:
    """Solver knobs. ``None`` entries are derived from the game (see :meth:`resolved`)."""

    delta: float = 1e-6
    m0: Optional[float] = None
    M0: Optional[float] = None
    max_enlarge: int = 60
    max_bisect: int = 200
    eps_zero: Optional[float] = None
    max_refine_depth: int = 48

    def __post_init__(self) -> None:
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be a finite positive number, got {self.delta}")
        if self.m0 is not None and not self.m0 > 0:
            raise ValueError(f"m0 must be > 0, got {self.m0}")
        if self.m0 is not None and self.M0 is not None and not self.m0 < self.M0:
            raise ValueError(f"need m0 < M0, got m0={self.m0}, M0={self.M0}")
        if self.eps_zero is not None and not self.eps_zero > 0:
            raise ValueError(f"eps_zero must be > 0, got {self.eps_zero}")
        for name in ("max_enlarge", "max_bisect", "max_refine_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def resolved(self, g: GameInstance) -> "SolverConfig":
        m0 = self.m0 if self.m0 is not None else 1e-3 * min(g.xA, 1.0)
        M0 = self.M0 if self.M0 is not None else 10.0 * g.xA
        if not m0 < M0:
            raise ValueError(f"need m0 < M0, got m0={m0}, M0={M0}")
        return replace(self, m0=m0, M0=M0)

    def zero_threshold(self, g: GameInstance, r: Rect) -> float:
        if self.eps_zero is not None:
            return self.eps_zero
        return 1e-12 * g.xB * max(r.x_hi, r.y_hi)


@dataclass
class WindingResult:
    winding: Optional[int]  # None: a boundary sample is itself a zero of G
    candidate: Optional[Kappa]
    samples: int
    # the accepted polygon, kept for diagnostics and post-hoc checks
    t: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    gA: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    gB: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))


def _count_crossings(gA: np.ndarray, gB: np.ndarray) -> int:
    """Signed crossings of the positive x half-axis by the closed polygon (gA, gB)."""
    x0, x1, y0, y1 = gA[:-1], gA[1:], gB[:-1], gB[1:]
    up = (y0 < 0) & (y1 >= 0)
    down = (y0 >= 0) & (y1 < 0)
    moving = up | down
    dy = np.where(moving, y1 - y0, 1.0)
    x_cross = x0 + (x1 - x0) * (-y0 / dy)
    positive = moving & (x_cross > 0)
    return int(np.count_nonzero(positive & up)) - int(np.count_nonzero(positive & down))


def winding_number(
    g: GameInstance,
    r: Rect,
    cfg: SolverConfig | None = None,
    clockwise: bool = False,
    trace: list | None = None,
    phase: str = "",
) -> WindingResult:
    """Winding number of ``G`` restricted to the boundary of ``r`` around the origin.

    Boundary segments are bisected until each chord of the image is shorter
    (sup norm) than the distance of its nearer endpoint to the origin, so no
    turn around the origin can hide between consecutive samples.
    """
    cfg = cfg or SolverConfig()
    eps = cfg.zero_threshold(g, r)
    t = np.linspace(0.0, 4.0, 4 * _SAMPLES_PER_SIDE + 1)
    x, y = r.boundary(t, clockwise)
    # rows: parameter, gA, gB; columns stay sorted by parameter
    pts = np.vstack((t, *residual_batch(g, x, y)))
    depth = np.zeros(len(t) - 1, dtype=int)
    evaluated = len(t)
    new_idx = np.arange(len(t))
    while True:
        dist = np.abs(pts[1:]).max(axis=0)
        near = np.flatnonzero(dist[new_idx] < eps)
        if near.size:
            i = int(new_idx[near.min()])
            xi, yi = r.boundary(pts[0, i : i + 1], clockwise)
            _record(trace, phase, r, clockwise, pts)
            return WindingResult(None, Kappa(xi[0], yi[0]), evaluated, *pts)
        chord = np.abs(np.diff(pts[1:], axis=1)).max(axis=0)
        bad = chord >= np.minimum(dist[:-1], dist[1:])
        if not bad.any():
            break
        too_deep = bad & (depth >= cfg.max_refine_depth)
        if too_deep.any():
            j = int(np.flatnonzero(too_deep)[0])
            x0, y0 = r.boundary(pts[0, j : j + 2], clockwise)
            raise RefinementError(
                f"boundary segment t in [{float(pts[0, j])!r}, {float(pts[0, j + 1])!r}] "
                f"from kappa=({float(x0[0])!r}, {float(y0[0])!r}) to ({float(x0[1])!r}, {float(y0[1])!r}) "
                f"still unresolved after {cfg.max_refine_depth} bisections"
            )
        seg = np.flatnonzero(bad)
        t_mid = (pts[0, seg] + pts[0, seg + 1]) / 2
        xm, ym = r.boundary(t_mid, clockwise)
        evaluated += len(seg)
        # insert midpoints after each bad segment's left endpoint
        pts = np.insert(pts, seg + 1, np.vstack((t_mid, *residual_batch(g, xm, ym))), axis=1)
        child = depth[seg] + 1
        depth = np.insert(depth, seg + 1, child)
        shifted = seg + np.arange(len(seg))
        depth[shifted] = child
        new_idx = shifted + 1
    t, gA, gB = pts
    _record(trace, phase, r, clockwise, pts)
    ok = np.flatnonzero((gA <= 0) & (gB <= 0))
    candidate = None
    if ok.size:
        xi, yi = r.boundary(t[ok[0] : ok[0] + 1], clockwise)
        candidate = Kappa(xi[0], yi[0])
    return WindingResult(_count_crossings(gA, gB), candidate, evaluated, t, gA, gB)


def _record(trace, phase, r, clockwise, pts) -> None:
    if trace is None:
        return
    t, gA, gB = pts
    x, y = r.boundary(t, clockwise)
    trace.extend(zip([phase] * len(t), t.tolist(), x.tolist(), y.tolist(), gA.tolist(), gB.tolist()))


@dataclass
class SolveReport:
    status: Status
    kappa: Optional[Kappa] = None
    residual: Optional[Residual] = None
    rect_trace: list = field(default_factory=list)  # (phase, Rect, winding or None)
    enlargements: int = 0
    bisections: int = 0
    curve_samples_total: int = 0
    assumptions: Optional[AssumptionStatus] = None
    final_rect: Optional[Rect] = None
    # candidate taken from the rectangle center without passing the sign check
    unverified: bool = False
    # some split left a nonzero winding on both halves: more than one zero exists
    multiple_zeros: bool = False
    # the final rectangle's own winding came out zero although its parent's
    # did not (numerical trouble near the zero)
    anomalies: int = 0
    exact_boundary_zero: bool = False
    message: str = ""

    def to_dict(self, g: GameInstance | None = None) -> dict:
        """JSON-ready form; with ``g`` given, kappa and residual use the caller's labels."""

        def pair(a, b):
            return g.to_caller((a, b)) if g is not None else (a, b)

        out: dict = {"status": self.status.value}
        if self.kappa is not None:
            lamA, lamB = pair(self.kappa.lamA, self.kappa.lamB)
            out["kappa"] = {"lamA": lamA, "lamB": lamB}
        if self.residual is not None:
            gA, gB = pair(self.residual.gA, self.residual.gB)
            out["residual"] = {"gA": gA, "gB": gB}
        if self.assumptions is not None and self.assumptions.trivial_winner is not None:
            winner = self.assumptions.trivial_winner
            out["trivial_winner"] = (g.caller_player(winner) if g is not None else winner).value
        if self.assumptions is not None and self.assumptions.a2_violators:
            out["a2_violators"] = list(self.assumptions.a2_violators)
        out.update(
            enlargements=self.enlargements,
            bisections=self.bisections,
            curve_samples_total=self.curve_samples_total,
            unverified=self.unverified,
            multiple_zeros=self.multiple_zeros,
            anomalies=self.anomalies,
            exact_boundary_zero=self.exact_boundary_zero,
        )
        if self.final_rect is not None:
            out["final_rect"] = self.final_rect.to_dict()
        out["rect_trace"] = [
            {"phase": ph, "rect": rc.to_dict(), "winding": w} for ph, rc, w in self.rect_trace
        ]
        if g is not None and g.swapped:
            out["labels_swapped_internally"] = True
        if self.message:
            out["message"] = self.message
        return out


def _pick_candidate(g: GameInstance, r: Rect, found: Optional[Kappa]) -> tuple[Kappa, bool]:
    if found is not None:
        return found, False
    xs = np.linspace(r.x_lo, r.x_hi, 8)
    ys = np.linspace(r.y_lo, r.y_hi, 8)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    gA, gB = residual_batch(g, gx.ravel(), gy.ravel())
    ok = np.flatnonzero((gA <= 0) & (gB <= 0))
    if ok.size:
        return Kappa(gx.ravel()[ok[0]], gy.ravel()[ok[0]]), False
    return Kappa(*r.center), True


def solve(g: GameInstance, cfg: SolverConfig | None = None, trace: list | None = None) -> SolveReport:
    """Find a delta-approximate zero of the residual map in internal (xA <= xB) labels.

    ``trace``, when a list, collects one row per accepted boundary sample:
    (phase, t, curve_x, curve_y, gA, gB).
    """
    cfg = (cfg or SolverConfig()).resolved(g)
    status = check_assumptions(g)
    report = SolveReport(Status.TRIVIAL_GAME, assumptions=status)
    if not status.ok:
        report.message = "standing assumptions fail; the game has a trivial pure equilibrium"
        return report

    def finish_exact(res: WindingResult, r: Rect) -> SolveReport:
        report.status = Status.SOLVED
        report.kappa = res.candidate
        report.residual = residual(g, res.candidate)
        report.final_rect = r
        report.exact_boundary_zero = True
        return report

    m, M = cfg.m0, cfg.M0
    rect = Rect(m, M, m, M)
    while True:
        res = winding_number(g, rect, cfg, trace=trace, phase="enlarge")
        report.curve_samples_total += res.samples
        report.rect_trace.append(("enlarge", rect, res.winding))
        if res.winding is None:
            return finish_exact(res, rect)
        if res.winding != 0:
            break
        if report.enlargements >= cfg.max_enlarge:
            report.status = Status.BUDGET_EXCEEDED
            report.final_rect = rect
            report.message = f"no winding square found after {cfg.max_enlarge} enlargements"
            return report
        report.enlargements += 1
        m, M = max(m / 2, _MIN_CORNER), M * 2
        rect = Rect(m, M, m, M)

    wind = res.winding
    last = res
    while rect.diameter > cfg.delta:
        if report.bisections >= cfg.max_bisect:
            report.status = Status.BUDGET_EXCEEDED
            report.final_rect = rect
            report.message = f"diameter {rect.diameter:.3g} still above delta after {cfg.max_bisect} bisections"
            return report
        report.bisections += 1
        d1, d2 = rect.split()
        r1 = winding_number(g, d1, cfg, trace=trace, phase="bisect")
        report.curve_samples_total += r1.samples
        if r1.winding is None:
            report.rect_trace.append(("bisect", d1, None))
            return finish_exact(r1, d1)
        if r1.winding != 0:
            if wind - r1.winding != 0:
                report.multiple_zeros = True
            rect, wind, last = d1, r1.winding, r1
            report.rect_trace.append(("bisect", d1, r1.winding))
            continue
        # winding is additive over the halves, so D2 carries all of it
        rect, last = d2, None
        report.rect_trace.append(("bisect", d2, wind))

    if last is None:
        last = winding_number(g, rect, cfg, trace=trace, phase="final")
        report.curve_samples_total += last.samples
        if last.winding is None:
            return finish_exact(last, rect)
        if last.winding == 0:
            report.anomalies += 1
    kappa, unverified = _pick_candidate(g, rect, last.candidate)
    report.status = Status.SOLVED
    report.kappa = kappa
    report.residual = residual(g, kappa)
    report.final_rect = rect
    report.unverified = unverified
    return report


def verify_delta_solution(
    g: GameInstance,
    k: Kappa,
    delta: float,
    reference: Kappa | None = None,
    roundoff: float = 1e-12,
) -> bool:
    """Sign check of both residuals, plus closeness to ``reference`` when one is given.

    Each residual may exceed zero by ``roundoff`` times the size of its budget
    term, so a floating-point rendering of an exact zero still passes.
    """
    k.require_positive()
    r = residual(g, k)
    if r.gA > roundoff * g.xB * k.lamA or r.gB > roundoff * g.xA * k.lamB:
        return False
    if reference is not None:
        return abs(k.lamA - reference.lamA) <= delta and abs(k.lamB - reference.lamB) <= delta
    return True
