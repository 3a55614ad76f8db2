"""Fundamental-value jump process for the single traded stock.

The fundamental value is a pure jump process: at each step an independent
uniform draw decides whether the value moves, and when it does the value is
multiplied by (1 + j). Only fundamentalists observe it.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class FundamentalProcess:
    """Jump process p_f -> p_f * (1 + j) with per-step jump probability.

    With ``symmetric`` set (the default) the jump direction is resampled at
    every jump: the sub-threshold uniform that triggered the jump also picks
    the sign (upper half positive), so a single draw per step drives the
    whole process and replays stay deterministic. With ``symmetric`` off the
    signed ``jump_size`` is applied as-is, giving a one-sided drift.
    """

    p_f: float
    jump_size: float = 0.002
    jump_prob: float = 0.001
    symmetric: bool = True

    def __post_init__(self):
        if self.p_f <= 0:
            raise ValueError("fundamental value must be positive")
        if self.jump_size <= -1.0:
            raise ValueError("jump size must exceed -1 to keep p_f positive")
        if not 0.0 <= self.jump_prob <= 1.0:
            raise ValueError("jump probability must lie in [0, 1]")

    def step(self, u: float) -> float:
        """Advance one step given a uniform draw in [0, 1); returns p_f."""
        if u < self.jump_prob:
            j = self.jump_size
            if self.symmetric and u < 0.5 * self.jump_prob:
                j = -j
            self.p_f *= 1.0 + j
        return self.p_f
