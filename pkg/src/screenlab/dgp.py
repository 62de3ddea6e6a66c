"""Synthetic experiments with partial compliance.

Two data-generating processes are provided:

* the discrete-type world, where each unit is a complier, always-taker or
  never-taker and ``y = alpha + beta_type * d + u``;
* the Gaussian linear-IV world, ``d = phi + pi_s * z + eta`` and
  ``y = alpha + beta * d + u``, used to study finite-sample median bias.

Samples are stored column-wise (numpy arrays); :attr:`Sample.units` gives
the row view when one is needed.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Optional

import numpy as np

from . import rng
from .errors import DegenerateAssignment, InvalidConfig, InvalidRetention

PROB_TOL = 1e-12


class UnitType(IntEnum):
    COMPLIER = 0
    ALWAYS_TAKER = 1
    NEVER_TAKER = 2

    @property
    def char(self) -> str:
        return "can"[self]

    @classmethod
    def from_char(cls, c: str) -> "UnitType":
        try:
            return cls("can".index(c))
        except ValueError:
            raise ValueError(f"unknown unit type {c!r}; expected one of c/a/n") from None


class DgpKind(str, Enum):
    DISCRETE = "discrete"
    GAUSSIAN = "gaussian"


def _check_prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise InvalidConfig(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class DiscreteDgpConfig:
    n: int = 10_000
    p_complier: float = 0.25
    p_always: float = 0.35
    p_never: float = 0.40
    q: float = 0.5
    alpha: float = 0.0
    beta_complier: float = 2.0
    beta_always: float = 2.0
    sigma_u: float = 1.0
    eps1: float = 0.0
    eps2: float = 0.0

    kind = DgpKind.DISCRETE

    def validate(self) -> "DiscreteDgpConfig":
        if int(self.n) != self.n or self.n < 1:
            raise InvalidConfig(f"n must be a positive integer, got {self.n}")
        for name in ("p_complier", "p_always", "p_never", "eps1", "eps2"):
            _check_prob(name, getattr(self, name))
        total = self.p_complier + self.p_always + self.p_never
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidConfig(
                f"p_complier + p_always + p_never must equal 1, got {total:.12g}"
            )
        if self.p_complier <= 0:
            raise InvalidConfig("p_complier must be positive (no first stage otherwise)")
        if not 0.0 < self.q < 1.0:
            raise InvalidConfig(f"q must lie in (0, 1), got {self.q}")
        if self.sigma_u < 0:
            raise InvalidConfig(f"sigma_u must be non-negative, got {self.sigma_u}")
        return self


@dataclass(frozen=True)
class GaussianDgpConfig:
    n: int = 40
    q: float = 0.5
    alpha: float = 0.0
    beta: float = 1.0
    phi: float = 0.0
    pi: float = 0.5
    sigma_u: float = 1.0
    sigma_eta: float = 1.0

    kind = DgpKind.GAUSSIAN

    def validate(self) -> "GaussianDgpConfig":
        if int(self.n) != self.n or self.n < 1:
            raise InvalidConfig(f"n must be a positive integer, got {self.n}")
        if self.pi == 0:
            raise InvalidConfig("pi must be nonzero")
        if not 0.0 < self.q < 1.0:
            raise InvalidConfig(f"q must lie in (0, 1), got {self.q}")
        if self.sigma_u < 0 or self.sigma_eta < 0:
            raise InvalidConfig("sigma_u and sigma_eta must be non-negative")
        return self

    @property
    def concentration_ratio(self) -> float:
        """``mu / sd(M_eta)`` for the unscreened design at the nominal q.

        With ``mu = pi * n * q(1-q)`` and ``Var(M_eta) = sigma_eta^2 * n * q(1-q)``
        this is ``pi * sqrt(n q (1-q)) / sigma_eta``; its square is the
        concentration parameter.
        """
        return self.pi * math.sqrt(self.n * self.q * (1 - self.q)) / self.sigma_eta


@dataclass(frozen=True)
class Unit:
    z: int
    d: float
    y: float
    true_type: Optional[UnitType] = None
    stated_complier: Optional[bool] = None
    screened_in: Optional[bool] = None


@dataclass(frozen=True, eq=False)
class Sample:
    """Column store for one simulated or ingested experiment.

    ``true_type`` holds :class:`UnitType` codes as ``int8``; it and
    ``stated_complier`` are ``None`` when unavailable (Gaussian samples,
    field data without a questionnaire).
    """

    z: np.ndarray
    d: np.ndarray
    y: np.ndarray
    dgp_kind: Optional[DgpKind] = None
    config: object = None
    true_type: Optional[np.ndarray] = None
    stated_complier: Optional[np.ndarray] = None
    screened_in: Optional[np.ndarray] = None
    retention: float = 1.0
    realized_q: float = field(init=False)

    def __post_init__(self):
        if len(self.z) == 0:
            raise ValueError("a sample needs at least one unit")
        object.__setattr__(self, "realized_q", float(np.mean(self.z)))

    def __len__(self):
        return len(self.z)

    @property
    def units(self) -> list[Unit]:
        out = []
        for i in range(len(self)):
            out.append(
                Unit(
                    z=int(self.z[i]),
                    d=self.d[i].item(),
                    y=float(self.y[i]),
                    true_type=None if self.true_type is None else UnitType(int(self.true_type[i])),
                    stated_complier=(
                        None if self.stated_complier is None else bool(self.stated_complier[i])
                    ),
                    screened_in=None if self.screened_in is None else bool(self.screened_in[i]),
                )
            )
        return out

    def replace(self, **changes) -> "Sample":
        return dataclasses.replace(self, **changes)

    def without_stated_types(self) -> "Sample":
        return self.replace(stated_complier=None)

    def equals(self, other: "Sample") -> bool:
        """Bitwise equality of every column and of the metadata."""
        if (self.dgp_kind, self.config, self.retention) != (
            other.dgp_kind,
            other.config,
            other.retention,
        ):
            return False
        for name in ("z", "d", "y", "true_type", "stated_complier", "screened_in"):
            a, b = getattr(self, name), getattr(other, name)
            if (a is None) != (b is None):
                return False
            if a is not None and (a.dtype != b.dtype or a.tobytes() != b.tobytes()):
                return False
        return True


def treated_count(n: int, q: float) -> int:
    # the tiny slack keeps products like 0.29 * 100 from flooring to 28
    return math.floor(q * n + 1e-9)


def assign_instrument(n: int, q: float, seed: int) -> np.ndarray:
    """Complete randomization: exactly ``floor(q * n)`` units get ``z = 1``."""
    k = treated_count(n, q)
    if k < 1 or n - k < 1:
        raise DegenerateAssignment(
            f"n={n}, q={q} gives {k} treated and {n - k} control units; both arms must be non-empty"
        )
    keys = rng.raw(seed, "instrument", n)
    z = np.zeros(n, dtype=np.int8)
    z[np.argsort(keys, kind="stable")[:k]] = 1
    return z


def realize_treatment(t: UnitType, z: int) -> int:
    if t == UnitType.COMPLIER:
        return int(z)
    return 1 if t == UnitType.ALWAYS_TAKER else 0


def realize_treatment_array(types: np.ndarray, z: np.ndarray) -> np.ndarray:
    return np.where(
        types == UnitType.COMPLIER, z, (types == UnitType.ALWAYS_TAKER).astype(np.int8)
    ).astype(np.int8)


def draw_types(cfg: DiscreteDgpConfig, seed: int) -> np.ndarray:
    u = rng.uniforms(seed, "type", cfg.n)
    types = np.full(cfg.n, UnitType.NEVER_TAKER, dtype=np.int8)
    types[u < cfg.p_complier + cfg.p_always] = UnitType.ALWAYS_TAKER
    types[u < cfg.p_complier] = UnitType.COMPLIER
    return types


def generate_discrete(cfg: DiscreteDgpConfig, seed: int) -> Sample:
    """Draw one discrete-type experiment.

    Types and stated types are drawn before the instrument is consulted, so
    both are independent of ``z`` by construction.
    """
    from .screening import elicit_stated_types

    cfg.validate()
    types = draw_types(cfg, seed)
    stated = elicit_stated_types(types, cfg.eps1, cfg.eps2, rng.uniforms(seed, "stated", cfg.n))
    z = assign_instrument(cfg.n, cfg.q, seed)
    d = realize_treatment_array(types, z)
    beta = np.where(
        types == UnitType.COMPLIER,
        cfg.beta_complier,
        np.where(types == UnitType.ALWAYS_TAKER, cfg.beta_always, 0.0),
    )
    u = cfg.sigma_u * rng.normals(seed, "outcome", cfg.n)
    y = cfg.alpha + beta * d + u
    return Sample(
        z=z,
        d=d,
        y=y,
        dgp_kind=DgpKind.DISCRETE,
        config=cfg,
        true_type=types,
        stated_complier=stated,
    )


def screened_size(n: int, r: float) -> int:
    return math.floor(r * n + 0.5)


def generate_gaussian(cfg: GaussianDgpConfig, r: float, seed: int) -> Sample:
    """Draw the screened Gaussian design with retention ``r``.

    Screening that keeps every complier raises the first-stage slope to
    ``pi / r`` while shrinking the sample to ``round(r * n)``; the sample is
    built directly with those values rather than by discarding units.
    """
    cfg.validate()
    if not 0.0 < r <= 1.0:
        raise InvalidRetention(f"retention fraction must lie in (0, 1], got {r}")
    n_s = screened_size(cfg.n, r)
    if n_s < 4:
        raise InvalidRetention(f"r * n rounds to {n_s} units; at least 4 are needed")
    z = assign_instrument(n_s, cfg.q, seed)
    eta = cfg.sigma_eta * rng.normals(seed, "first_stage", n_s)
    u = cfg.sigma_u * rng.normals(seed, "outcome", n_s)
    d = cfg.phi + (cfg.pi / r) * z + eta
    y = cfg.alpha + cfg.beta * d + u
    return Sample(z=z, d=d, y=y, dgp_kind=DgpKind.GAUSSIAN, config=cfg, retention=float(r))
