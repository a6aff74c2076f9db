"""Shared domain types: step CDF null bounds, stream records, per-step decisions.

All types here are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field


@dataclass(frozen=True)
class StepCdf:
    """Right-continuous step function bounding a discrete null p-value CDF.

    Only the jump points are stored: F(u) is the largest jump point <= u
    (0 if there is none), and F(u) = F(1) for u > 1.  Jump points must be
    strictly increasing, lie in (0, 1], and end at 1, so that F(u) <= u
    holds everywhere and F(u) = u at every jump point.

    The ``exact_identity`` flag marks the uniform bound F(u) = min(u, 1);
    it is kept distinct from a dense-support approximation so that
    non-rewarded behavior is reproduced bit-exactly.
    """

    support: tuple[float, ...]
    exact_identity: bool = False

    def __post_init__(self):
        if not self.support:
            raise ValueError("support must be nonempty")
        prev = 0.0
        for s in self.support:
            if not prev < s <= 1.0:
                raise ValueError(f"support must be strictly increasing in (0, 1]: {self.support}")
            prev = s
        if self.support[-1] != 1.0:
            raise ValueError("support must end at 1")

    def __call__(self, u: float) -> float:
        """Evaluate F(u) for u >= 0 (u > 1 is treated as u = 1)."""
        if u < 0:
            raise ValueError("u must be nonnegative")
        if u > 1.0:
            u = 1.0
        if self.exact_identity:
            return u
        i = bisect.bisect_right(self.support, u)
        return self.support[i - 1] if i else 0.0


IDENTITY_BOUND = StepCdf(support=(1.0,), exact_identity=True)


def identity_bound() -> StepCdf:
    """The uniform null bound F(u) = min(u, 1)."""
    return IDENTITY_BOUND


def step_cdf_eval(cdf: StepCdf, u: float) -> float:
    """Functional form of StepCdf evaluation."""
    return cdf(u)


def sure_reward(alpha: float, cdf: StepCdf) -> float:
    """Unspent fraction of the critical value: alpha - F(alpha), always >= 0."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    return alpha - cdf(alpha)


@dataclass(frozen=True)
class StreamRecord:
    """One stream element: a time index, a p-value and its null bound."""

    t: int
    p: float
    null_bound: StepCdf = field(default=IDENTITY_BOUND)
    label: bool | None = None  # True = alternative, for evaluation only

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class Decision:
    """Outcome of one online test: critical value, its breakdown, and the reward."""

    t: int
    p: float
    alpha: float      # may exceed 1 for investing procedures
    reject: bool
    rho: float        # alpha - F(alpha)
    base_part: float
    sure_part: float
    eps_part: float
    r_count: int      # rejections up to and including t
