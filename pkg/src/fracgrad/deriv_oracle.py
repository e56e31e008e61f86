"""Two ways to supply the derivative stack: exact formulas or history fits.

Analytic route: a function object that knows its own elementwise derivatives
up to some order.  History route: estimate order-v derivatives from the last
v (point, gradient) pairs with Newton divided differences, scaled by
(v - 1)! so that the estimate is the derivative itself, not the difference
coefficient.  The history route is what network training uses, where only
first-order backprop gradients are observable.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .frac_math import DerivativeStack


@dataclass
class AnalyticFunction:
    """An objective with closed-form elementwise derivatives.

    evaluate maps a point (1-d array) to a scalar.  derivative(v, point)
    returns the elementwise v-th derivative at the point, same shape as the
    point; orders above max_order raise.  true_minimum, when known, lets
    runs report distance to the solution.  default_start is a reasonable
    generic starting iterate for demos and the CLI.
    """

    name: str
    dimension: int
    evaluate: Callable[[np.ndarray], float]
    derivative_fn: Callable[[int, np.ndarray], np.ndarray]
    max_order: int
    true_minimum: np.ndarray | None = None
    default_start: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.true_minimum is not None:
            self.true_minimum = np.asarray(self.true_minimum, dtype=np.float64)
        if self.default_start is not None:
            self.default_start = np.asarray(self.default_start, dtype=np.float64)

    def value(self, point: np.ndarray) -> float:
        return float(self.evaluate(np.asarray(point, dtype=np.float64)))

    def derivative(self, v: int, point: np.ndarray) -> np.ndarray:
        if not (1 <= v <= self.max_order):
            raise ValueError(
                f"{self.name} provides derivative orders 1..{self.max_order}, got {v}"
            )
        point = np.asarray(point, dtype=np.float64)
        out = np.asarray(self.derivative_fn(v, point), dtype=np.float64)
        return np.broadcast_to(out, point.shape).astype(np.float64, copy=True)

    def gradient(self, point: np.ndarray) -> np.ndarray:
        return self.derivative(1, point)


def analytic_stack(f: AnalyticFunction, point: np.ndarray, n_terms: int) -> DerivativeStack:
    """Exact derivatives of orders 1..n_terms at one point."""
    point = np.asarray(point, dtype=np.float64)
    return DerivativeStack([f.derivative(v, point) for v in range(1, n_terms + 1)])


@dataclass
class HistoryWindow:
    """Bounded record of recent (point, gradient) pairs, newest last."""

    capacity: int
    points: deque = field(init=False)
    grads: deque = field(init=False)

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {self.capacity}")
        self.points = deque(maxlen=self.capacity)
        self.grads = deque(maxlen=self.capacity)

    def push(self, point: np.ndarray, grad: np.ndarray) -> None:
        point = np.asarray(point, dtype=np.float64)
        grad = np.asarray(grad, dtype=np.float64)
        if point.shape != grad.shape:
            raise ValueError(f"point shape {point.shape} != gradient shape {grad.shape}")
        if self.points and point.shape != self.points[-1].shape:
            raise ValueError(
                f"push shape {point.shape} does not match stored shape {self.points[-1].shape}"
            )
        self.points.append(point.copy())
        self.grads.append(grad.copy())

    def __len__(self) -> int:
        return len(self.points)


def history_stack(window: HistoryWindow, n_terms: int, phi: float = 0.0) -> DerivativeStack:
    """Estimate derivative orders 1..n_terms from the history window.

    Order 1 is the newest stored gradient verbatim.  Order v >= 2 is the
    Newton divided difference of the last v gradients over the last v points,
    scaled by (v - 1)!; with phi = 0 this is exact when the gradient is a
    polynomial of degree v - 1 in each coordinate.  Orders with too little
    history are zero-filled, which simply truncates the series for early
    iterations.  With phi > 0 every denominator is offset away from zero by
    sign-preserving addition of phi (a zero denominator becomes +phi).  That
    floor matches the |step| + phi base of the power series: a coordinate
    whose movement collapses to ~0 would otherwise divide noise by an
    arbitrarily small denominator while its power factor is held at phi
    scale, and the mismatch blows the high-order terms up.
    """
    if len(window) == 0:
        raise RuntimeError("history window is empty; push at least one pair first")
    shape = window.points[-1].shape
    values: list[np.ndarray] = [np.asarray(window.grads[-1], dtype=np.float64).copy()]
    pts = list(window.points)
    gds = list(window.grads)
    for v in range(2, n_terms + 1):
        if len(window) < v:
            values.append(np.zeros(shape, dtype=np.float64))
            continue
        tail_pts = pts[-v:]
        table = [g.astype(np.float64, copy=True) for g in gds[-v:]]
        for level in range(1, v):
            for i in range(v - level):
                denom = tail_pts[i + level] - tail_pts[i]
                if phi > 0.0:
                    denom = denom + np.where(denom >= 0.0, phi, -phi)
                with np.errstate(divide="ignore", invalid="ignore"):
                    table[i] = (table[i + 1] - table[i]) / denom
        values.append(math.factorial(v - 1) * table[0])
    return DerivativeStack(values)
