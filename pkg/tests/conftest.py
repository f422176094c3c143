from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rational_alphas(count: int = 20, seed: int = 7) -> list[Fraction]:
    """Seeded nonzero rationals in [-3, 3] with small denominators."""
    r = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        a = Fraction(int(r.integers(-30, 31)), int(r.integers(1, 11)))
        if a != 0 and a not in out:
            out.append(a)
    return out
