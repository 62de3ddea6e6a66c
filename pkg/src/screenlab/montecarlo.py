"""Replicated experiments and their summaries.

Every replication draws from seeds derived from ``(base_seed, rep_index)``,
and rows are assembled in rep-index order. A :class:`RepTable` is therefore
the same for any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Optional, Union

import numpy as np

from . import diagnostics, rng
from .dgp import DiscreteDgpConfig, GaussianDgpConfig, generate_discrete, generate_gaussian
from .errors import AllDiscarded, InvalidConfig, ScreenlabError
from .estimators import estimate, parse_sign
from .screening import ScreenMechanism, apply_screen

Arm = Union[ScreenMechanism, float]
QUANTILE_LEVELS = (0.25, 0.5, 0.75, 0.9)
_Z95 = 1.959963984540054


def arm_label(arm: Arm) -> str:
    if isinstance(arm, ScreenMechanism):
        return arm.value
    return f"r={float(arm):g}"


@dataclass(frozen=True)
class Scenario:
    """One Monte Carlo design.

    ``mechanisms`` holds screening mechanisms for a discrete DGP and
    retention fractions for a Gaussian DGP.
    """

    dgp: Union[DiscreteDgpConfig, GaussianDgpConfig]
    mechanisms: tuple = (ScreenMechanism.NO_SCREEN, ScreenMechanism.ORACLE_COMPLIER)
    population_sign: int = 1
    apply_sign_screen: bool = False
    n_reps: int = 2000
    base_seed: int = 0

    def __post_init__(self):
        if isinstance(self.dgp, GaussianDgpConfig):
            arms = tuple(float(r) for r in self.mechanisms)
        else:
            arms = tuple(ScreenMechanism(m) for m in self.mechanisms)
        object.__setattr__(self, "mechanisms", arms)
        object.__setattr__(self, "population_sign", parse_sign(self.population_sign))

    @property
    def is_gaussian(self) -> bool:
        return isinstance(self.dgp, GaussianDgpConfig)

    @property
    def labels(self) -> list[str]:
        return [arm_label(a) for a in self.mechanisms]

    def validate(self) -> "Scenario":
        self.dgp.validate()
        if int(self.n_reps) != self.n_reps or self.n_reps < 1:
            raise InvalidConfig(f"n_reps must be a positive integer, got {self.n_reps}")
        if not self.mechanisms:
            raise InvalidConfig("at least one mechanism (or r value) is required")
        if self.is_gaussian:
            for r in self.mechanisms:
                if not 0.0 < r <= 1.0:
                    raise InvalidConfig(f"retention fractions must lie in (0, 1], got {r}")
        return self


@dataclass(frozen=True)
class RepRow:
    rep_index: int
    mechanism: str
    beta_hat: float
    pi_hat: float
    se: float
    retention_fraction: float
    sign_screen_pass: bool
    discarded: bool
    reason: str = ""


REP_COLUMNS = tuple(RepRow.__dataclass_fields__)


@dataclass
class RepTable:
    rows: list[RepRow]
    labels: list[str]

    def __len__(self):
        return len(self.rows)

    def for_mechanism(self, label: str) -> list[RepRow]:
        return [r for r in self.rows if r.mechanism == label]

    def column(self, label: str, name: str, kept_only: bool = True) -> np.ndarray:
        rows = self.for_mechanism(label)
        if kept_only:
            rows = [r for r in rows if not r.discarded]
        return np.array([getattr(r, name) for r in rows], dtype=float)


def _row(rep, label, report, retention, sign_screen):
    return RepRow(
        rep_index=rep,
        mechanism=label,
        beta_hat=report.beta_hat,
        pi_hat=report.pi_hat,
        se=report.se,
        retention_fraction=retention,
        sign_screen_pass=report.sign_screen_pass,
        discarded=sign_screen and not report.sign_screen_pass,
        reason="sign_screen" if sign_screen and not report.sign_screen_pass else "",
    )


def _failed_row(rep, label, err: ScreenlabError, retention=math.nan):
    nan = math.nan
    return RepRow(rep, label, nan, nan, nan, retention, False, True, err.code)


def _run_rep(sc: Scenario, rep: int) -> list[RepRow]:
    rows = []
    if sc.is_gaussian:
        for k, r in enumerate(sc.mechanisms):
            label = arm_label(r)
            try:
                sample = generate_gaussian(sc.dgp, r, rng.child_seed(sc.base_seed, "replication", rep, k))
                ss = apply_screen(sample, ScreenMechanism.NO_SCREEN)
                report = estimate(ss, sc.population_sign)
            except ScreenlabError as err:
                rows.append(_failed_row(rep, label, err, r))
                continue
            rows.append(_row(rep, label, report, r, sc.apply_sign_screen))
        return rows
    # one draw per replication, shared by every mechanism (paired comparison)
    sample = generate_discrete(sc.dgp, rng.child_seed(sc.base_seed, "replication", rep))
    for m in sc.mechanisms:
        label = arm_label(m)
        try:
            ss = apply_screen(sample, m)
            report = estimate(ss, sc.population_sign)
        except ScreenlabError as err:
            rows.append(_failed_row(rep, label, err))
            continue
        rows.append(_row(rep, label, report, report.retention_fraction, sc.apply_sign_screen))
    return rows


def _run_block(sc: Scenario, start: int, stop: int) -> list[RepRow]:
    rows = []
    for rep in range(start, stop):
        rows.extend(_run_rep(sc, rep))
    return rows


def _blocks(n_reps: int, workers: int) -> list[tuple[int, int]]:
    n_blocks = min(n_reps, workers * 4)
    edges = np.linspace(0, n_reps, n_blocks + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _parallel(fn, n_reps: int, workers: int) -> list:
    """Apply ``fn(start, stop)`` over rep blocks and concatenate in order."""
    blocks = _blocks(n_reps, workers)
    if workers <= 1:
        parts = [fn(a, b) for a, b in blocks]
    else:
        starts, stops = zip(*blocks)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, starts, stops))
    return [row for part in parts for row in part]


def run_scenario(sc: Scenario, workers: int = 1) -> RepTable:
    """Run every replication of ``sc``.

    Estimation failures become discarded rows carrying the error code;
    with ``apply_sign_screen`` a wrong-signed first stage is discarded with
    reason ``sign_screen``.
    """
    sc.validate()
    return RepTable(rows=_parallel(partial(_run_block, sc), sc.n_reps, workers), labels=sc.labels)


@dataclass(frozen=True)
class QuantileEstimate:
    level: float
    value: float
    mcse: float


@dataclass(frozen=True)
class MechanismSummary:
    mechanism: str
    n_reps: int
    n_kept: int
    mean_beta_hat: float
    mean_beta_hat_mcse: float
    empirical_sd: float
    empirical_sd_mcse: float
    median_abs_bias: float
    median_abs_bias_mcse: float
    abs_bias_quantiles: tuple[QuantileEstimate, ...]
    mean_se: float
    mean_se_mcse: float
    mean_pi_hat: float
    mean_retention: float
    discard_rate: float
    discard_rate_mcse: float

    def quantile(self, level: float) -> QuantileEstimate:
        for q in self.abs_bias_quantiles:
            if math.isclose(q.level, level):
                return q
        raise KeyError(level)


@dataclass
class McSummary:
    """Per-mechanism summaries.

    ``diagnostic`` holds an attached size/power run. The bootstrap tests use
    the full pseudo-screened sample, so their rejection rate belongs to the
    design as a whole rather than to any one mechanism.
    """

    beta_target: float
    mechanisms: dict[str, MechanismSummary] = field(default_factory=dict)
    diagnostic: Optional["SizePowerResult"] = None

    def __getitem__(self, label: str) -> MechanismSummary:
        return self.mechanisms[label]

    def to_dict(self) -> dict:
        out = {
            "beta_target": self.beta_target,
            "mechanisms": {k: asdict(v) for k, v in self.mechanisms.items()},
        }
        if self.diagnostic is not None:
            out["diagnostic"] = self.diagnostic.to_dict()
        return out


def order_statistic_quantile(x: np.ndarray, level: float) -> QuantileEstimate:
    """Sample quantile with a distribution-free standard error.

    The binomial order-statistic interval ``[x_(j), x_(k)]`` with ranks
    ``n p -/+ 1.96 sqrt(n p (1-p))`` covers the population quantile with
    probability about 0.95; its half-width over 1.96 is the reported error.
    """
    x = np.sort(np.asarray(x, dtype=float))
    n = len(x)
    value = float(np.quantile(x, level))
    half = _Z95 * math.sqrt(n * level * (1 - level))
    j = max(int(math.floor(n * level - half)), 0)
    k = min(int(math.ceil(n * level + half)), n - 1)
    return QuantileEstimate(level, value, float((x[k] - x[j]) / (2 * _Z95)))


def _sd_mcse(sd: float, n: int) -> float:
    # normal-theory approximation
    return sd / math.sqrt(2 * (n - 1)) if n > 1 else math.nan


def summarize(t: RepTable, beta_target: float) -> McSummary:
    out = McSummary(beta_target=float(beta_target))
    for label in t.labels:
        rows = t.for_mechanism(label)
        kept = [r for r in rows if not r.discarded]
        if not kept:
            raise AllDiscarded(f"every replication of {label} was discarded")
        n_all, n = len(rows), len(kept)
        beta = np.array([r.beta_hat for r in kept])
        se = np.array([r.se for r in kept])
        abs_bias = np.abs(beta - beta_target)
        sd = float(beta.std(ddof=1)) if n > 1 else 0.0
        discard = (n_all - n) / n_all
        quants = tuple(order_statistic_quantile(abs_bias, p) for p in QUANTILE_LEVELS)
        median = next(q for q in quants if q.level == 0.5)
        out.mechanisms[label] = MechanismSummary(
            mechanism=label,
            n_reps=n_all,
            n_kept=n,
            mean_beta_hat=float(beta.mean()),
            mean_beta_hat_mcse=sd / math.sqrt(n),
            empirical_sd=sd,
            empirical_sd_mcse=_sd_mcse(sd, n),
            median_abs_bias=median.value,
            median_abs_bias_mcse=median.mcse,
            abs_bias_quantiles=quants,
            mean_se=float(se.mean()),
            mean_se_mcse=float(se.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
            mean_pi_hat=float(np.mean([r.pi_hat for r in kept])),
            mean_retention=float(np.mean([r.retention_fraction for r in kept])),
            discard_rate=discard,
            discard_rate_mcse=math.sqrt(discard * (1 - discard) / n_all),
        )
    return out


@dataclass(frozen=True)
class DiagnosticRow:
    rep_index: int
    statistic: float
    p_value: float
    reject: bool
    discarded: bool
    reason: str = ""


@dataclass(frozen=True)
class SizePowerResult:
    diagnostic: str
    alpha: float
    n_reps: int
    n_ok: int
    rejections: int
    rejection_rate: float
    rejection_rate_mcse: float
    rows: tuple[DiagnosticRow, ...] = ()

    def to_dict(self) -> dict:
        out = asdict(self)
        del out["rows"]
        return out


_DIAGNOSTICS = {
    "retention_test": (diagnostics.retention_test, "theta_hat"),
    "tnr_test": (diagnostics.tnr_test, "tnr_hat"),
}


def _test_block(sc, name, alpha, n_boot, method, start, stop):
    fn, stat = _DIAGNOSTICS[name]
    rows = []
    for rep in range(start, stop):
        try:
            sample = generate_discrete(sc.dgp, rng.child_seed(sc.base_seed, "replication", rep))
            res = fn(sample, alpha, n_boot, rng.child_seed(sc.base_seed, "bootstrap", rep), method)
        except ScreenlabError as err:
            rows.append(DiagnosticRow(rep, math.nan, math.nan, False, True, err.code))
            continue
        rows.append(DiagnosticRow(rep, getattr(res, stat), res.p_value, bool(res.reject), False))
    return rows


def size_power_run(
    sc: Scenario,
    diagnostic: str = "retention_test",
    alpha: float = 0.05,
    n_boot: int = diagnostics.DEFAULT_N_BOOT,
    workers: int = 1,
    method: str = "centered",
) -> SizePowerResult:
    """Rejection rate of a diagnostic over replicated full-sample experiments."""
    if diagnostic not in _DIAGNOSTICS:
        raise InvalidConfig(f"unknown diagnostic {diagnostic!r}; choose from {sorted(_DIAGNOSTICS)}")
    diagnostics.check_test_args(alpha, n_boot, method)
    if not isinstance(sc.dgp, DiscreteDgpConfig):
        raise InvalidConfig("size/power runs need a discrete DGP with stated types")
    sc.validate()
    rows = _parallel(partial(_test_block, sc, diagnostic, alpha, n_boot, method), sc.n_reps, workers)
    ok = [r for r in rows if not r.discarded]
    rej = sum(r.reject for r in ok)
    rate = rej / len(ok) if ok else math.nan
    return SizePowerResult(
        diagnostic=diagnostic,
        alpha=alpha,
        n_reps=sc.n_reps,
        n_ok=len(ok),
        rejections=rej,
        rejection_rate=rate,
        rejection_rate_mcse=math.sqrt(rate * (1 - rate) / len(ok)) if ok else math.nan,
        rows=tuple(rows),
    )
