"""Hyperparameter bundle shared by the optimizer, the trainer, and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, replace

GRADIENT_POINTS = ("current", "previous")


@dataclass(frozen=True)
class FgdConfig:
    """Settings for one fractional-gradient-descent run.

    alpha is the fractional order in (0, 1]; alpha == 1 recovers plain
    gradient descent exactly.  n_terms is the number of series terms kept
    (M >= 1).  phi is the small positive offset added to the memory step so
    the power term never sits exactly at zero.  gradient_point selects where
    derivatives are evaluated: at the newest iterate ("current") or at the
    one before it ("previous").  momentum is a classical velocity factor
    applied on top of the fractional update; 0 disables it.
    """

    alpha: float = 0.9
    n_terms: int = 1
    learning_rate: float = 0.1
    phi: float = 1e-8
    gradient_point: str = "current"
    momentum: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.n_terms, int):
            raise TypeError(f"n_terms must be an int, got {type(self.n_terms).__name__}")
        if not (0.0 < float(self.alpha) <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.n_terms < 1:
            raise ValueError(f"n_terms must be >= 1, got {self.n_terms}")
        if not (float(self.learning_rate) > 0.0):
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not (float(self.phi) >= 0.0):
            raise ValueError(f"phi must be >= 0, got {self.phi}")
        if self.gradient_point not in GRADIENT_POINTS:
            raise ValueError(
                f"gradient_point must be one of {GRADIENT_POINTS}, got {self.gradient_point!r}"
            )
        if not (0.0 <= float(self.momentum) < 1.0):
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum}")

    def with_updates(self, **changes) -> "FgdConfig":
        """Return a copy with some fields replaced (validation re-runs)."""
        return replace(self, **changes)


# Two run styles exposed side by side: the plain setting used for the
# convex-function studies, and the momentum setting used for network training
# experiments that pair a tiny step with a heavy velocity term.
PRESETS: dict[str, FgdConfig] = {
    "plain": FgdConfig(alpha=0.9, n_terms=1, learning_rate=0.1, momentum=0.0),
    "momentum": FgdConfig(alpha=0.9, n_terms=1, learning_rate=0.0005, momentum=0.9),
}
