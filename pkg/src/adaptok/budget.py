"""Sigmoidal split of a fixed token budget into saliency and coverage parts.

The normalized entropy of a sample is pushed through a logistic curve
centered at ``mu`` with smoothness ``tau``; the resulting ratio decides how
many of the T budget slots go to coverage-driven selection:

    coverage_ratio = sigmoid((h - mu) / tau)
    t_cov = floor(T * coverage_ratio),  t_sal = T - t_cov

Concentrated samples (low entropy) land on the saliency-dominant side,
spread-out samples (high entropy) on the coverage-dominant side.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import InvalidBudgetError, InvalidInputError

# Midpoints calibrated per vision-encoder family; the smoothness is shared.
MU_PRESETS = {
    "clip": 0.42,
    "qwen25vl": 0.5744,
}
DEFAULT_TAU = 0.02

DIVERSITY_METHODS = ("dpp", "fps", "facility_location")

# Entropy values this far outside [0, 1] are floating-point noise and get
# clamped; anything further out is rejected.
ENTROPY_TOL = 1e-9

_RATIO_MIN = np.finfo(np.float64).tiny
_RATIO_MAX = float(np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class CompressConfig:
    """Knobs for one compression run."""

    total_budget: int
    mu: float = MU_PRESETS["clip"]
    tau: float = DEFAULT_TAU
    diversity_method: str = "dpp"
    epsilon: float = 1e-12

    def __post_init__(self):
        if int(self.total_budget) < 1:
            raise InvalidBudgetError(f"total_budget must be >= 1, got {self.total_budget}")
        if not 0.0 < self.mu < 1.0:
            raise InvalidInputError(f"mu must lie in (0, 1), got {self.mu}")
        if not self.tau > 0.0:
            raise InvalidInputError(f"tau must be positive, got {self.tau}")
        if self.diversity_method not in DIVERSITY_METHODS:
            raise InvalidInputError(
                f"unknown diversity method {self.diversity_method!r}, "
                f"expected one of {DIVERSITY_METHODS}"
            )
        if not self.epsilon > 0.0:
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class BudgetSplit:
    """A (t_sal, t_cov) partition plus the entropy and ratio that produced it."""

    t_sal: int
    t_cov: int
    normalized_entropy: float
    coverage_ratio: float

    def __post_init__(self):
        if self.t_sal < 0 or self.t_cov < 0:
            raise InvalidBudgetError("budget parts must be nonnegative")

    @property
    def total(self) -> int:
        return self.t_sal + self.t_cov


def allocate_budget(normalized_entropy: float, config: CompressConfig) -> BudgetSplit:
    """Map a normalized entropy in [0, 1] to an exact (t_sal, t_cov) split.

    Monotone in the entropy, and t_sal + t_cov == total_budget always.  The
    sigmoid output is kept in the open interval (0, 1) so t_sal >= 1 even
    when float64 saturates the logistic for extreme (h - mu) / tau.
    """
    h = float(normalized_entropy)
    if not np.isfinite(h) or h < -ENTROPY_TOL or h > 1.0 + ENTROPY_TOL:
        raise InvalidInputError(f"normalized entropy must lie in [0, 1], got {h}")
    h = min(max(h, 0.0), 1.0)

    ratio = float(expit((h - config.mu) / config.tau))
    ratio = min(max(ratio, _RATIO_MIN), _RATIO_MAX)
    t_cov = int(np.floor(config.total_budget * ratio))
    return BudgetSplit(
        t_sal=config.total_budget - t_cov,
        t_cov=t_cov,
        normalized_entropy=h,
        coverage_ratio=ratio,
    )


def resolve_mu(preset: str | None = None, mu: float | None = None) -> float:
    """Pick the sigmoid midpoint: an explicit ``mu`` wins over a preset name."""
    if mu is not None:
        return float(mu)
    if preset is None:
        preset = "clip"
    if preset not in MU_PRESETS:
        raise InvalidInputError(
            f"unknown preset {preset!r}, expected one of {tuple(MU_PRESETS)}"
        )
    return MU_PRESETS[preset]
