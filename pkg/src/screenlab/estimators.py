"""Wald / 2SLS estimation with a single binary instrument."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import EmptyArm, WeakFirstStage
from .screening import ScreenedSample

WEAK_TOL = 1e-12


@dataclass(frozen=True)
class EstimateReport:
    beta_hat: float
    pi_hat: float
    se: float
    n_used: int
    retention_fraction: float
    sign_screen_pass: bool
    sigma_u_hat: float

    def to_dict(self) -> dict:
        return asdict(self)


def arm_difference(x: np.ndarray, z: np.ndarray) -> float:
    """``mean(x | z=1) - mean(x | z=0)``."""
    treated = z == 1
    n1 = int(np.count_nonzero(treated))
    n0 = len(z) - n1
    if n1 == 0 or n0 == 0:
        raise EmptyArm(f"instrument arms have sizes {n1} (z=1) and {n0} (z=0)")
    return float(x[treated].sum() / n1 - x[~treated].sum() / n0)


def wald_ratio(y: np.ndarray, d: np.ndarray, z: np.ndarray) -> tuple[float, float]:
    """Return ``(reduced_form / first_stage, first_stage)``."""
    pi_hat = arm_difference(d, z)
    if abs(pi_hat) < WEAK_TOL:
        raise WeakFirstStage(f"estimated first stage {pi_hat:.3g} is numerically zero")
    return arm_difference(y, z) / pi_hat, pi_hat


def first_stage(s: ScreenedSample) -> float:
    z, d, _ = s.columns()
    return arm_difference(d, z)


def wald(s: ScreenedSample) -> float:
    z, d, y = s.columns()
    return wald_ratio(y, d, z)[0]


def _residual_variance(z, d, y, beta_hat) -> float:
    alpha_hat = y.mean() - beta_hat * d.mean()
    resid = y - alpha_hat - beta_hat * d
    return float(resid @ resid / len(y))


def residual_variance(s: ScreenedSample, beta_hat: float) -> float:
    """Mean squared structural residual, divisor ``n`` (not ``n - 2``)."""
    z, d, y = s.columns()
    return _residual_variance(z, d, y, beta_hat)


def _standard_error(z, d, y, beta_hat, pi_hat) -> tuple[float, float]:
    s2 = _residual_variance(z, d, y, beta_hat)
    q = z.mean()
    return math.sqrt(s2 / (len(z) * pi_hat**2 * q * (1 - q))), s2


def iv_standard_error(s: ScreenedSample, beta_hat: float) -> float:
    """Homoscedastic 2SLS standard error.

    ``sqrt(sigma2_hat / (n * pi_hat^2 * q(1-q)))`` with ``q`` the realized
    instrument share among the units used.
    """
    z, d, y = s.columns()
    pi_hat = arm_difference(d, z)
    if abs(pi_hat) < WEAK_TOL:
        raise WeakFirstStage(f"estimated first stage {pi_hat:.3g} is numerically zero")
    return _standard_error(z, d, y, beta_hat, pi_hat)[0]


def sign_screen(pi_hat: float, population_sign) -> bool:
    """True iff ``pi_hat`` is nonzero with the expected sign."""
    sign = parse_sign(population_sign)
    return pi_hat != 0 and math.copysign(1, pi_hat) == sign


def parse_sign(population_sign) -> int:
    if population_sign in (1, "+", "+1", "positive"):
        return 1
    if population_sign in (-1, "-", "-1", "negative"):
        return -1
    raise ValueError(f"population sign must be + or -, got {population_sign!r}")


def estimate(s: ScreenedSample, population_sign=1) -> EstimateReport:
    """Bundle point estimate, first stage and standard error.

    A failed sign screen is recorded, not acted on; callers decide whether
    to discard.
    """
    z, d, y = s.columns()
    beta_hat, pi_hat = wald_ratio(y, d, z)
    se, s2 = _standard_error(z, d, y, beta_hat, pi_hat)
    return EstimateReport(
        beta_hat=beta_hat,
        pi_hat=pi_hat,
        se=se,
        n_used=len(z),
        retention_fraction=s.retention_fraction,
        sign_screen_pass=sign_screen(pi_hat, population_sign),
        sigma_u_hat=math.sqrt(s2),
    )
