"""Catalog of test objectives with closed-form derivative stacks."""

from __future__ import annotations

import numpy as np

from .deriv_oracle import AnalyticFunction

# The double-well has stationary points at -1, +0.2, +1: a deep minimum at
# -1, a barrier at 0.2, and a shallow minimum at +1.  Starts drawn from the
# interval below land in the shallow basin.
DOUBLEWELL_SHALLOW_BASIN = (0.3, 1.7)
DOUBLEWELL_GLOBAL_MIN = -1.0
DOUBLEWELL_LOCAL_MIN = 1.0


def _shifted_quadratic(name: str, center: float, start: float) -> AnalyticFunction:
    c = float(center)

    def ev(k: np.ndarray) -> float:
        return float(np.sum((k - c) ** 2))

    def dv(v: int, k: np.ndarray) -> np.ndarray:
        if v == 1:
            return 2.0 * (k - c)
        if v == 2:
            return np.full_like(k, 2.0)
        return np.zeros_like(k)

    return AnalyticFunction(
        name=name,
        dimension=1,
        evaluate=ev,
        derivative_fn=dv,
        max_order=4,
        true_minimum=np.array([c]),
        default_start=np.array([float(start)]),
    )


def _quartic() -> AnalyticFunction:
    # f(k) = k^4 + k^2, minimum at 0, fourth derivative constant 24.
    def ev(k: np.ndarray) -> float:
        return float(np.sum(k**4 + k**2))

    def dv(v: int, k: np.ndarray) -> np.ndarray:
        if v == 1:
            return 4.0 * k**3 + 2.0 * k
        if v == 2:
            return 12.0 * k**2 + 2.0
        if v == 3:
            return 24.0 * k
        return np.full_like(k, 24.0)

    return AnalyticFunction(
        name="quartic",
        dimension=1,
        evaluate=ev,
        derivative_fn=dv,
        max_order=4,
        true_minimum=np.array([0.0]),
        default_start=np.array([2.0]),
    )


def _illcond2d() -> AnalyticFunction:
    # f(x, y) = x^2 + 100 y^2; Hessian diag(2, 200), condition number 100.
    # Derivatives are reported elementwise per coordinate.
    scale = np.array([1.0, 100.0])

    def ev(k: np.ndarray) -> float:
        return float(np.sum(scale * k**2))

    def dv(v: int, k: np.ndarray) -> np.ndarray:
        if v == 1:
            return 2.0 * scale * k
        if v == 2:
            return 2.0 * scale * np.ones_like(k)
        return np.zeros_like(k)

    return AnalyticFunction(
        name="illcond2d",
        dimension=2,
        evaluate=ev,
        derivative_fn=dv,
        max_order=4,
        true_minimum=np.array([0.0, 0.0]),
        default_start=np.array([3.0, 1.0]),
    )


def _doublewell() -> AnalyticFunction:
    # f'(k) = 4 (k + 1)(k - 0.2)(k - 1); integrating,
    # f(k) = k^4 - (0.8 / 3) k^3 - 2 k^2 + 0.8 k.
    b = 0.2

    def ev(k: np.ndarray) -> float:
        return float(np.sum(k**4 - (4.0 * b / 3.0) * k**3 - 2.0 * k**2 + 4.0 * b * k))

    def dv(v: int, k: np.ndarray) -> np.ndarray:
        if v == 1:
            return 4.0 * k**3 - 4.0 * b * k**2 - 4.0 * k + 4.0 * b
        if v == 2:
            return 12.0 * k**2 - 8.0 * b * k - 4.0
        if v == 3:
            return 24.0 * k - 8.0 * b
        return np.full_like(k, 24.0)

    return AnalyticFunction(
        name="doublewell",
        dimension=1,
        evaluate=ev,
        derivative_fn=dv,
        max_order=4,
        true_minimum=np.array([DOUBLEWELL_GLOBAL_MIN]),
        default_start=np.array([1.2]),
    )


def make_test_functions() -> dict[str, AnalyticFunction]:
    """All catalog objectives keyed by name."""
    fns = [
        _shifted_quadratic("quad3", 3.0, start=10.0),
        _shifted_quadratic("quad0", 0.0, start=7.0),
        _shifted_quadratic("quadm2", -2.0, start=5.0),
        _quartic(),
        _illcond2d(),
        _doublewell(),
    ]
    return {f.name: f for f in fns}
