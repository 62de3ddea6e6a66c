"""Stated-type elicitation and screening mechanisms."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dgp import Sample, UnitType
from .errors import EmptyScreen, MissingStatedTypes, MissingTypes


class ScreenMechanism(str, Enum):
    NO_SCREEN = "no_screen"
    ORACLE_COMPLIER = "oracle_complier"
    STATED_COMPLIER = "stated_complier"
    PSEUDO_SCREEN = "pseudo_screen"


def elicit_stated_types(types: np.ndarray, eps1: float, eps2: float, u: np.ndarray) -> np.ndarray:
    """Vectorised questionnaire answers given one uniform per unit.

    A complier answers "complier" unless ``u < eps2`` (Type-II error); a
    non-complier answers "complier" only when ``u < eps1`` (Type-I error).
    Only the complier indicator is elicited, so no unit is ever recorded as a
    stated always-taker.
    """
    is_complier = np.asarray(types) == UnitType.COMPLIER
    return np.where(is_complier, u >= eps2, u < eps1)


def elicit_stated_type(t: UnitType, eps1: float, eps2: float, stream: np.random.Generator) -> bool:
    if not (0.0 <= eps1 <= 1.0 and 0.0 <= eps2 <= 1.0):
        raise ValueError("eps1 and eps2 must lie in [0, 1]")
    u = stream.random()
    return bool(elicit_stated_types(np.array([t]), eps1, eps2, np.array([u]))[0])


@dataclass(frozen=True, eq=False)
class ScreenedSample:
    """A sample with the screening flag set on every unit.

    ``used`` is the estimation mask. It equals ``sample.screened_in`` except
    under pseudo-screening, where the flag only marks stated compliers and
    every unit stays in the experiment.
    """

    sample: Sample
    mechanism: ScreenMechanism
    used: np.ndarray

    @property
    def retained_count(self) -> int:
        return int(np.count_nonzero(self.used))

    @property
    def total_count(self) -> int:
        return len(self.sample)

    @property
    def retention_fraction(self) -> float:
        return self.retained_count / self.total_count

    def columns(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(z, d, y)`` restricted to the units used for estimation."""
        s = self.sample
        if self.retained_count == self.total_count:
            return s.z, s.d, s.y
        m = self.used
        return s.z[m], s.d[m], s.y[m]

    def stated_subset(self) -> "ScreenedSample":
        return apply_screen(self.sample, ScreenMechanism.STATED_COMPLIER)


def apply_screen(s: Sample, m: ScreenMechanism) -> ScreenedSample:
    m = ScreenMechanism(m)
    n = len(s)
    if m is ScreenMechanism.NO_SCREEN:
        flag = np.ones(n, dtype=bool)
        used = flag
    elif m is ScreenMechanism.ORACLE_COMPLIER:
        if s.true_type is None:
            raise MissingTypes("oracle screening needs true unit types")
        flag = s.true_type == UnitType.COMPLIER
        used = flag
    elif m is ScreenMechanism.STATED_COMPLIER:
        if s.stated_complier is None:
            raise MissingStatedTypes("stated-complier screening needs elicited stated types")
        flag = np.asarray(s.stated_complier, dtype=bool)
        used = flag
    else:
        if s.stated_complier is None:
            raise MissingStatedTypes("pseudo-screening needs elicited stated types")
        flag = np.asarray(s.stated_complier, dtype=bool)
        used = np.ones(n, dtype=bool)
    if not used.any():
        raise EmptyScreen(f"{m.value} retained no units")
    return ScreenedSample(sample=s.replace(screened_in=flag), mechanism=m, used=used)
