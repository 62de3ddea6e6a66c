"""Complier-retention and true-negative-rate diagnostics.

Both rely on the complier-mean identity: with a binary instrument, the IV
coefficient of ``X * D`` on ``D`` estimates ``E[X | complier]``. Taking
``X`` to be the stated-complier indicator gives the retention probability
``P[stated complier | complier]``. Inverting the law of total probability
then gives the true-negative rate ``P[stated non-complier | non-complier]``.

The one-sided tests (null: probability equals one; alternative: below one)
use a bootstrap stratified by instrument arm. Two p-value rules exist:

``centered`` (default)
    The replicates are shifted to the null value, ``theta* - theta_hat + 1``,
    and the p-value is the share of shifted replicates at or below
    ``theta_hat``.
``percentile``
    The share of raw replicates at or above the null value.

Both use the ``(1 + count) / (B + 1)`` convention. With many always-takers
the centered rule rejects somewhat more often than nominal; the percentile
rule tracks nominal size more closely.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import rng
from .dgp import Sample
from .errors import (
    AllCompliers,
    DegenerateBootstrap,
    InvalidConfig,
    MissingStatedTypes,
    WeakFirstStage,
)
from .estimators import WEAK_TOL, arm_difference

DEFAULT_N_BOOT = 999
MIN_N_BOOT = 200
ALL_COMPLIER_TOL = 1e-9
# replicates per batch are capped so a batch holds at most this many draws
_BATCH_DRAWS = 2_000_000


@dataclass(frozen=True)
class RetentionEstimate:
    """Retention test result.

    ``ci_lower_one_sided`` is the upper limit ``U`` of the one-sided
    ``(-inf, U]`` interval that pairs with the lower-tail alternative; the
    null is rejected roughly when ``U < 1``. ``theta_hat`` is raw and may
    exceed one; ``theta_display`` is clamped to [0, 1] for printing only.
    """

    theta_hat: float
    se_boot: float
    ci_lower_one_sided: float
    p_value: float
    n_boot: int
    alpha: float
    reject: bool

    @property
    def theta_display(self) -> float:
        return min(max(self.theta_hat, 0.0), 1.0)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["theta_display"] = self.theta_display
        return out


@dataclass(frozen=True)
class TnrEstimate:
    tnr_hat: float
    p_stated_noncomplier: float
    p_complier: float
    p_stated_noncomplier_given_complier: float
    p_value: Optional[float] = None
    se_boot: Optional[float] = None
    ci_lower_one_sided: Optional[float] = None
    n_boot: Optional[int] = None
    alpha: Optional[float] = None
    reject: Optional[bool] = None

    @property
    def tnr_display(self) -> float:
        return min(max(self.tnr_hat, 0.0), 1.0)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["tnr_display"] = self.tnr_display
        return out


def complier_mean(x: np.ndarray, d: np.ndarray, z: np.ndarray) -> float:
    """IV coefficient of ``x * d`` on ``d`` instrumented by ``z``."""
    fs = arm_difference(d, z)
    if abs(fs) < WEAK_TOL:
        raise WeakFirstStage(f"estimated first stage {fs:.3g} is numerically zero")
    return arm_difference(x * d, z) / fs


def _stated(s: Sample) -> np.ndarray:
    if s.stated_complier is None:
        raise MissingStatedTypes("the diagnostics need a stated_complier column")
    return np.asarray(s.stated_complier, dtype=np.float64)


def retention_estimate(s: Sample) -> float:
    """Estimate ``P[stated complier | complier]`` on the full sample."""
    return complier_mean(_stated(s), np.asarray(s.d, dtype=np.float64), s.z)


def tnr_from_components(
    p_stated_noncomplier: float, p_complier: float, p_stated_noncomplier_given_complier: float
) -> float:
    if p_complier >= 1 - ALL_COMPLIER_TOL:
        raise AllCompliers(
            f"complier share {p_complier:.6g} leaves no non-compliers to evaluate"
        )
    return (p_stated_noncomplier - p_complier * p_stated_noncomplier_given_complier) / (
        1 - p_complier
    )


def tnr_estimate(s: Sample) -> TnrEstimate:
    stated = _stated(s)
    d = np.asarray(s.d, dtype=np.float64)
    p_sn = float(1.0 - stated.mean())
    p_c = arm_difference(d, s.z)
    theta = complier_mean(stated, d, s.z)
    p_sn_c = 1.0 - theta
    return TnrEstimate(
        tnr_hat=tnr_from_components(p_sn, p_c, p_sn_c),
        p_stated_noncomplier=p_sn,
        p_complier=p_c,
        p_stated_noncomplier_given_complier=p_sn_c,
    )


def bootstrap_arm_sums(
    columns: list[np.ndarray], z: np.ndarray, n_boot: int, seed: int
) -> dict[int, np.ndarray]:
    """Per-arm column sums over stratified bootstrap resamples.

    Returns ``{arm: array of shape (n_boot, len(columns))}``. Each arm is
    resampled with replacement to its own size; replicate ``b`` of arm
    ``a`` uses the stream ``(seed, "bootstrap", a)`` at the replicate's
    counter offset, so results do not depend on how replicates are batched.
    """
    out = {}
    for arm in (1, 0):
        members = np.flatnonzero(z == arm)
        m = len(members)
        if m == 0:
            raise DegenerateBootstrap(f"instrument arm z={arm} is empty")
        cols = [np.asarray(c, dtype=np.float64)[members] for c in columns]
        sums = np.empty((n_boot, len(cols)))
        batch = max(1, _BATCH_DRAWS // m)
        for start in range(0, n_boot, batch):
            stop = min(n_boot, start + batch)
            u = rng.replicate_uniforms(seed, "bootstrap", stop - start, m, arm, start=start)
            pick = (u * m).astype(np.intp)
            for j, c in enumerate(cols):
                sums[start:stop, j] = c[pick].sum(axis=1)
        out[arm] = sums
    return out


METHODS = ("centered", "percentile")


def _lower_tail_test(estimate: float, boot: np.ndarray, null_value: float, alpha: float, method: str):
    if not np.all(np.isfinite(boot)):
        raise DegenerateBootstrap("a bootstrap replicate had a zero first stage")
    if method == "centered":
        centered = boot - estimate
        hits = np.count_nonzero(centered <= estimate - null_value)
        upper = estimate - float(np.quantile(centered, alpha))
    else:
        hits = np.count_nonzero(boot >= null_value)
        upper = float(np.quantile(boot, 1 - alpha))
    p_value = (1 + hits) / (len(boot) + 1)
    return float(p_value), float(boot.std(ddof=1)), upper


def check_test_args(alpha, n_boot, method):
    if method not in METHODS:
        raise InvalidConfig(f"method must be one of {METHODS}, got {method!r}")
    if not 0 < alpha < 0.5:
        raise InvalidConfig(f"alpha must lie in (0, 0.5), got {alpha}")
    if int(n_boot) != n_boot or n_boot < MIN_N_BOOT:
        raise InvalidConfig(f"n_boot must be an integer >= {MIN_N_BOOT}, got {n_boot}")


def _arm_sizes(z):
    n1 = int(np.count_nonzero(z == 1))
    return n1, len(z) - n1


def retention_test(
    s: Sample,
    alpha: float = 0.05,
    n_boot: int = DEFAULT_N_BOOT,
    seed: int = 0,
    method: str = "centered",
) -> RetentionEstimate:
    """One-sided test of full complier retention by stated compliers."""
    check_test_args(alpha, n_boot, method)
    theta = retention_estimate(s)
    stated = _stated(s)
    d = np.asarray(s.d, dtype=np.float64)
    sums = bootstrap_arm_sums([stated * d, d], s.z, n_boot, seed)
    n1, n0 = _arm_sizes(s.z)
    m1, m0 = sums[1] / n1, sums[0] / n0
    with np.errstate(divide="ignore", invalid="ignore"):
        boot = (m1[:, 0] - m0[:, 0]) / (m1[:, 1] - m0[:, 1])
    p_value, se, upper = _lower_tail_test(theta, boot, 1.0, alpha, method)
    return RetentionEstimate(
        theta_hat=theta,
        se_boot=se,
        ci_lower_one_sided=upper,
        p_value=p_value,
        n_boot=int(n_boot),
        alpha=alpha,
        reject=p_value < alpha,
    )


def tnr_test(
    s: Sample,
    alpha: float = 0.05,
    n_boot: int = DEFAULT_N_BOOT,
    seed: int = 0,
    method: str = "centered",
) -> TnrEstimate:
    """One-sided test that stated non-compliance catches every non-complier.

    All three plug-in components are recomputed on each joint resample.
    """
    check_test_args(alpha, n_boot, method)
    point = tnr_estimate(s)
    stated = _stated(s)
    d = np.asarray(s.d, dtype=np.float64)
    sums = bootstrap_arm_sums([stated * d, d, 1.0 - stated], s.z, n_boot, seed)
    n1, n0 = _arm_sizes(s.z)
    m1, m0 = sums[1] / n1, sums[0] / n0
    p_c = m1[:, 1] - m0[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = (m1[:, 0] - m0[:, 0]) / p_c
        p_sn = (sums[1][:, 2] + sums[0][:, 2]) / (n1 + n0)
        boot = (p_sn - p_c * (1.0 - theta)) / (1.0 - p_c)
    boot[p_c >= 1 - ALL_COMPLIER_TOL] = np.nan
    p_value, se, upper = _lower_tail_test(point.tnr_hat, boot, 1.0, alpha, method)
    return TnrEstimate(
        tnr_hat=point.tnr_hat,
        p_stated_noncomplier=point.p_stated_noncomplier,
        p_complier=point.p_complier,
        p_stated_noncomplier_given_complier=point.p_stated_noncomplier_given_complier,
        p_value=p_value,
        se_boot=se,
        ci_lower_one_sided=upper,
        n_boot=int(n_boot),
        alpha=alpha,
        reject=p_value < alpha,
    )


def recommend(result: RetentionEstimate) -> str:
    """Report the unscreened estimator iff complier retention is rejected."""
    return "unscreened" if result.reject else "screened"

