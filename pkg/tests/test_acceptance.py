"""Acceptance criteria 1-9 at their stated tolerances.

Each test runs one check from :mod:`screenlab.verify` at the package's
default seed and prints a single PASS/FAIL line with observed and expected
values. Run directly (``python tests/test_acceptance.py``) for the lines
alone. The full set takes a few minutes on one core.
"""

import sys

import pytest

from screenlab.verify import CHECKS, DEFAULT_SEED, default_workers

WORKERS = default_workers()


@pytest.mark.slow
@pytest.mark.parametrize("criterion", sorted(CHECKS), ids=lambda c: f"criterion_{c}")
def test_criterion(criterion, capsys):
    result = CHECKS[criterion](seed=DEFAULT_SEED, workers=WORKERS)
    with capsys.disabled():
        print(f"\n{result.line()}")
    assert result.passed, result.line()


def main() -> int:
    failed = 0
    for criterion in sorted(CHECKS):
        result = CHECKS[criterion](seed=DEFAULT_SEED, workers=WORKERS)
        print(result.line(), flush=True)
        failed += not result.passed
    print(f"{len(CHECKS) - failed}/{len(CHECKS)} criteria passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
