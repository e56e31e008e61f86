"""Fractional-gradient-descent stepping for one parameter tensor at a time.

Iteration 0 is a plain integer-order step: there is no previous iterate yet,
so the memory term has no base to stand on.  From iteration 1 on, the update
direction comes from the truncated fractional series evaluated with the
elementwise distance moved last iteration as the memory step.  Derivatives
come either from an analytic function object or from a per-parameter history
of (point, gradient) pairs.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .config import FgdConfig
from .deriv_oracle import AnalyticFunction, HistoryWindow, analytic_stack, history_stack
from .frac_math import DerivativeStack, fractional_gradient, series_tail_bound

DIVERGENCE_NORM = 1e12


class NumericError(RuntimeError):
    """A non-finite gradient or iterate showed up mid-run."""

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


class DivergenceError(RuntimeError):
    """Iterates blew past the divergence guard."""

    def __init__(self, message: str, last_iterate: np.ndarray, iteration: int):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iteration = iteration


@dataclass
class ParamState:
    """Mutable per-tensor optimizer state.

    current / previous are the two most recent iterates, velocity is the
    momentum buffer, history holds (point, gradient) pairs when no analytic
    derivative source is available.  States for different tensors are fully
    independent.
    """

    current: np.ndarray
    previous: np.ndarray
    velocity: np.ndarray
    history: HistoryWindow
    iteration: int = 0


@dataclass(frozen=True)
class StepReport:
    """What one step did: applied update size, truncation proxy, terms used."""

    update_norm: float
    truncation_tail: float
    effective_terms: int


def init_state(initial: np.ndarray, cfg: FgdConfig) -> ParamState:
    """Fresh state at a starting iterate.

    The history window keeps n_terms pairs, one extra when derivatives are
    evaluated at the previous iterate so that gradient is still around.
    """
    arr = np.asarray(initial, dtype=np.float64).copy()
    if not np.all(np.isfinite(arr)):
        raise ValueError("initial iterate must be finite")
    capacity = cfg.n_terms + (1 if cfg.gradient_point == "previous" else 0)
    return ParamState(
        current=arr,
        previous=arr.copy(),
        velocity=np.zeros_like(arr),
        history=HistoryWindow(capacity=capacity),
        iteration=0,
    )


def step(
    state: ParamState,
    grads_now: np.ndarray,
    cfg: FgdConfig,
    oracle: AnalyticFunction | None = None,
) -> StepReport:
    """Advance the state by one update, in place, and report on it.

    grads_now is the first derivative at state.current.  With an oracle the
    derivative stack is exact, evaluated at the point cfg.gradient_point
    selects; without one the stack is fitted from the history window after
    pushing (current, grads_now).  In history mode with gradient_point
    "previous", the first-order term is the gradient stored one step back
    when the window has it.
    """
    grads = np.asarray(grads_now, dtype=np.float64)
    if grads.shape != state.current.shape:
        raise ValueError(
            f"gradient shape {grads.shape} does not match parameter shape {state.current.shape}"
        )
    if not np.all(np.isfinite(grads)):
        raise NumericError(
            f"non-finite gradient at iteration {state.iteration}", iteration=state.iteration
        )

    if oracle is None:
        state.history.push(state.current, grads)

    if state.iteration == 0:
        update = grads.copy()
        tail = 0.0
        effective = 1
    else:
        step_abs = np.abs(state.current - state.previous)
        if oracle is not None:
            point = state.current if cfg.gradient_point == "current" else state.previous
            stack = analytic_stack(oracle, point, cfg.n_terms)
            effective = cfg.n_terms
        else:
            stack = history_stack(state.history, cfg.n_terms, cfg.phi)
            if cfg.gradient_point == "previous" and len(state.history) >= 2:
                stack = DerivativeStack(
                    [np.asarray(state.history.grads[-2], dtype=np.float64).copy()]
                    + stack.values[1:]
                )
            effective = min(cfg.n_terms, len(state.history))
        update = fractional_gradient(stack, step_abs, cfg)
        tail = series_tail_bound(stack, step_abs, cfg)

    # overflow here surfaces as NumericError below, not as a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        state.velocity = cfg.momentum * state.velocity + update
        new_current = state.current - cfg.learning_rate * state.velocity
    if not np.all(np.isfinite(new_current)):
        raise NumericError(
            f"non-finite iterate produced at iteration {state.iteration}",
            iteration=state.iteration,
        )
    state.previous = state.current
    state.current = new_current
    state.iteration += 1
    return StepReport(
        update_norm=float(np.linalg.norm(cfg.learning_rate * state.velocity)),
        truncation_tail=tail,
        effective_terms=effective,
    )


@dataclass
class Trajectory:
    """Full record of a run: one row per visited iterate, plus the verdict."""

    iterations: list[int] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    gradient_norms: list[float] = field(default_factory=list)
    update_norms: list[float] = field(default_factory=list)
    points: list[np.ndarray] = field(default_factory=list)
    converged: bool = False
    reason: str = ""
    final_point: np.ndarray | None = None

    @property
    def n_rows(self) -> int:
        return len(self.iterations)

    def write_csv(self, fileobj: io.TextIOBase) -> None:
        writer = csv.writer(fileobj, lineterminator="\n")
        writer.writerow(["iteration", "value", "gradient_norm", "update_norm"])
        for row in zip(self.iterations, self.values, self.gradient_norms, self.update_norms):
            writer.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3])])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)


def run_to_convergence(
    f: AnalyticFunction,
    initial: np.ndarray,
    cfg: FgdConfig,
    tol: float = 1e-6,
    max_iter: int = 5000,
) -> Trajectory:
    """Iterate until the gradient norm (or distance to a known minimum) is
    within tol, or until max_iter steps have been taken.

    Row i of the trajectory describes the iterate before step i, so a full
    non-converging run has max_iter + 1 rows.  Iterates whose norm passes
    1e12 raise DivergenceError carrying the last finite iterate.
    """
    if tol < 0.0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    if max_iter < 0:
        raise ValueError(f"max_iter must be >= 0, got {max_iter}")
    state = init_state(initial, cfg)
    traj = Trajectory()
    last_update = 0.0
    for it in range(max_iter + 1):
        current = state.current
        if not np.all(np.isfinite(current)) or float(np.linalg.norm(current)) > DIVERGENCE_NORM:
            raise DivergenceError(
                f"iterate norm passed {DIVERGENCE_NORM:g} at iteration {it}",
                last_iterate=state.previous.copy(),
                iteration=it,
            )
        g = f.derivative(1, current)
        gnorm = float(np.linalg.norm(g))
        traj.iterations.append(it)
        traj.values.append(f.value(current))
        traj.gradient_norms.append(gnorm)
        traj.update_norms.append(last_update)
        traj.points.append(current.copy())
        close_enough = gnorm <= tol
        if f.true_minimum is not None:
            close_enough = close_enough or float(
                np.linalg.norm(current - f.true_minimum)
            ) <= tol
        if close_enough:
            traj.converged = True
            traj.reason = f"tolerance {tol:g} met at iteration {it}"
            break
        if it == max_iter:
            traj.reason = f"iteration budget {max_iter} exhausted"
            break
        report = step(state, g, cfg, oracle=f)
        last_update = report.update_norm
    traj.final_point = state.current.copy()
    return traj
