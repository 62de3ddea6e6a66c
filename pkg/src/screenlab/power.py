"""Design-stage planning: standard-error ratios and minimum detectable effects."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

from .errors import InvalidConfig, InvalidRetention

# Acklam's rational approximation to the standard normal quantile
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def norm_ppf(p: float) -> float:
    """Standard normal quantile.

    Acklam's rational approximation (relative error about 1.2e-9) followed
    by one Halley refinement step against ``erfc``, which brings the error
    down to roughly machine precision. The upper half uses symmetry.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile probability must lie in (0, 1), got {p}")
    if p > 0.5:
        # 1 - p is exact here, and the lower tail refines without cancellation
        return -norm_ppf(1.0 - p)
    if p < _P_LOW:
        t = math.sqrt(-2 * math.log(p))
        x = (((((_C[0] * t + _C[1]) * t + _C[2]) * t + _C[3]) * t + _C[4]) * t + _C[5]) / (
            (((_D[0] * t + _D[1]) * t + _D[2]) * t + _D[3]) * t + 1
        )
    else:
        t = p - 0.5
        r = t * t
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * t / (
            ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1
        )
    e = 0.5 * math.erfc(-x / math.sqrt(2)) - p
    u = e * math.sqrt(2 * math.pi) * math.exp(x * x / 2)
    return x - u / (1 + x * u / 2)


def _check_retention(r: float) -> float:
    if not 0.0 < r <= 1.0:
        raise InvalidRetention(f"retention fraction must lie in (0, 1], got {r}")
    return float(r)


def predicted_se_ratio(r: float) -> float:
    """se(screened) / se(unscreened) for a complier-retaining screen keeping ``r``."""
    return math.sqrt(_check_retention(r))


def mde(se: float, alpha: float = 0.05, target_power: float = 0.8) -> float:
    """Two-sided minimum detectable effect, ``(z_{1-alpha/2} + z_power) * se``."""
    if se < 0:
        raise ValueError("standard error must be non-negative")
    return (norm_ppf(1 - alpha / 2) + norm_ppf(target_power)) * se


def unscreened_se(pi_hat: float, n: int, sigma_u: float, q: float) -> float:
    return math.sqrt(sigma_u**2 / (n * pi_hat**2 * q * (1 - q)))


@dataclass(frozen=True)
class PowerSpec:
    alpha: float = 0.05
    target_power: float = 0.8
    se_unscreened: Optional[float] = None
    n: Optional[int] = None
    sigma_u: Optional[float] = None
    q: Optional[float] = None
    r_candidates: tuple[float, ...] = field(default_factory=tuple)

    def validate(self) -> "PowerSpec":
        if not 0 < self.alpha < 1:
            raise InvalidConfig(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.5 < self.target_power < 1:
            raise InvalidConfig(f"target power must lie in (0.5, 1), got {self.target_power}")
        for r in self.r_candidates:
            _check_retention(r)
        if self.se_unscreened is not None and self.se_unscreened <= 0:
            raise InvalidConfig("se_unscreened must be positive")
        return self

    def resolve_se(self, pi_hat: float) -> Optional[float]:
        if self.se_unscreened is not None:
            return self.se_unscreened
        if None not in (self.n, self.sigma_u, self.q):
            return unscreened_se(pi_hat, self.n, self.sigma_u, self.q)
        return None


@dataclass(frozen=True)
class CandidateGain:
    r: float
    se_ratio: float
    mde: Optional[float]


@dataclass(frozen=True)
class GainReport:
    pi_hat: float
    optimal_r: float
    optimal_se_ratio: float
    mde_reduction: float
    se_unscreened: Optional[float]
    mde_unscreened: Optional[float]
    mde_screened: Optional[float]
    candidates: tuple[CandidateGain, ...]

    def to_dict(self) -> dict:
        return asdict(self)


def gain_report(pi_hat: float, spec: PowerSpec = PowerSpec()) -> GainReport:
    """Precision gain from screening out every non-complier.

    The first stage estimates the complier share, so the optimal screen keeps
    ``r = pi_hat``. ``mde_reduction`` is the fractional drop in the MDE.
    """
    spec.validate()
    r_opt = _check_retention(pi_hat)
    ratio = predicted_se_ratio(r_opt)
    se1 = spec.resolve_se(pi_hat)
    mde1 = None if se1 is None else mde(se1, spec.alpha, spec.target_power)

    def scaled(k):
        return None if mde1 is None else mde1 * k

    return GainReport(
        pi_hat=float(pi_hat),
        optimal_r=r_opt,
        optimal_se_ratio=ratio,
        mde_reduction=1.0 - ratio,
        se_unscreened=se1,
        mde_unscreened=mde1,
        mde_screened=scaled(ratio),
        candidates=tuple(
            CandidateGain(r=float(r), se_ratio=predicted_se_ratio(r), mde=scaled(predicted_se_ratio(r)))
            for r in spec.r_candidates
        ),
    )
