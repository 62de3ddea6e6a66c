import numpy as np
import pytest

from screenlab.dgp import DgpKind, DiscreteDgpConfig, Sample, UnitType


def make_sample(z, d, y, stated=None, types=None):
    """Hand-built sample from plain sequences; ``types`` uses c/a/n chars."""
    return Sample(
        z=np.asarray(z, dtype=np.int8),
        d=np.asarray(d, dtype=np.int8),
        y=np.asarray(y, dtype=np.float64),
        dgp_kind=DgpKind.DISCRETE,
        stated_complier=None if stated is None else np.asarray(stated, dtype=bool),
        true_type=None if types is None else np.array([UnitType.from_char(t) for t in types], dtype=np.int8),
    )


@pytest.fixture
def reference_config():
    return DiscreteDgpConfig(n=10_000, p_complier=0.25, p_always=0.35, p_never=0.40)
