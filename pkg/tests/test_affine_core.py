from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from flataffine import affine_core as ac
from flataffine.devmap import ETALE_REPS


def random_invertible(r, n=2, bound=5.0):
    while True:
        a = r.uniform(-bound, bound, (n, n))
        if abs(np.linalg.det(a)) > 0.1:
            return ac.AffineMap(a, r.uniform(-bound, bound, n))


def test_apply_identity():
    np.testing.assert_array_equal(ac.apply(ac.identity(2), [3, -1]), [3, -1])


def test_apply_rho5_and_rho2():
    rho5 = ETALE_REPS["rho5"]((math.log(2), math.log(3)))
    np.testing.assert_allclose(ac.apply(rho5, [1, 1]), [2, 3])
    rho2 = ETALE_REPS["rho2"]((0.0, 1.0))
    np.testing.assert_allclose(ac.apply(rho2, [0, 0]), [0.5, 1.0])


def test_apply_dimension_mismatch():
    with pytest.raises(ac.DimensionError):
        ac.apply(ac.identity(2), [1, 2, 3])


def test_exact_apply_stays_rational():
    t = ac.AffineMap([[1, 1], [0, 1]], [0, Fraction(1, 2)])
    assert t.exact
    assert list(ac.apply(t, [Fraction(1, 3), 2])) == [Fraction(7, 3), Fraction(5, 2)]


def test_compose_examples(rng):
    t = random_invertible(rng)
    assert ac.distance(ac.compose(t, ac.identity(2)), t) == 0
    assert ac.distance(ac.compose(t, ac.invert(t)), ac.identity(2)) < 1e-12
    rho5 = ETALE_REPS["rho5"]
    lhs = ac.compose(rho5((0.3, -0.4)), rho5((1.1, 0.5)))
    assert ac.distance(lhs, rho5((1.4, 0.1))) < 1e-12


def test_invert_examples():
    assert ac.distance(ac.invert(ac.identity(2)), ac.identity(2)) == 0
    inv = ac.invert(ac.AffineMap([[2, 0], [0, 3]], [0, 0]))
    assert inv.linear.tolist() == [[Fraction(1, 2), 0], [0, Fraction(1, 3)]]
    inv = ac.invert(ac.AffineMap([[1, 1], [0, 1]], [1, 0]))
    assert inv.linear.tolist() == [[1, -1], [0, 1]] and inv.translation.tolist() == [-1, 0]


def test_singular_rejected():
    with pytest.raises(ac.SingularMapError):
        ac.AffineMap([[1, 2], [2, 4]], [0, 0])
    with pytest.raises(ac.SingularMapError):
        ac.AffineMap([[1.0, 2.0], [2.0, 4.0 + 1e-14]], [0, 0])


def test_from_frame_images_examples():
    frame = ac.AffineFrame.standard(2)
    t = ac.from_frame_images(frame, [[0, 0], [1, 0], [0, 1]])
    assert ac.distance(t, ac.identity(2)) == 0
    t = ac.from_frame_images(frame, [[1, 0], [3, 0], [1, 1]])
    assert t.linear.tolist() == [[2, 0], [0, 1]] and t.translation.tolist() == [1, 0]
    t = ac.from_frame_images(frame, [[1, 1]] * 3)
    assert t.singular


def test_frame_rejects_degenerate_points():
    with pytest.raises(ValueError):
        ac.AffineFrame(([0, 0], [1, 1], [2, 2]))


def test_from_frame_images_reproduces_random_maps(rng):
    for n in (2, 3):
        for _ in range(50):
            t = random_invertible(rng, n)
            frame = ac.AffineFrame(tuple(rng.uniform(-5, 5, (n + 1, n)).tolist()))
            images = [ac.apply(t, p).tolist() for p in frame.points]
            assert ac.distance(ac.from_frame_images(frame, images), t) < 1e-10


def test_orientation_sign_examples():
    assert ac.orientation_sign(ac.identity(2)) == 1
    assert ac.orientation_sign(ac.AffineMap([[-1, 0], [0, 1]], [0, 0])) == -1
    assert ac.orientation_sign(ETALE_REPS["rho6"]((0.0, math.pi / 2))) == 1


@settings(max_examples=50, deadline=None)
@given(hst.integers(0, 2**31 - 1))
def test_group_laws(seed):
    r = np.random.default_rng(seed)
    s, t, u = (random_invertible(r) for _ in range(3))
    assert ac.distance(ac.compose(ac.compose(s, t), u), ac.compose(s, ac.compose(t, u))) < 1e-9
    assert ac.distance(ac.compose(ac.invert(t), t), ac.identity(2)) < 1e-9
    assert ac.orientation_sign(ac.compose(s, t)) == ac.orientation_sign(s) * ac.orientation_sign(t)
    x = r.normal(size=2)
    np.testing.assert_allclose(ac.apply(ac.compose(s, t), x), ac.apply(s, ac.apply(t, x)), atol=1e-9)


def test_json_round_trip_exact_and_float():
    t = ac.AffineMap([[Fraction(1, 3), 0], [2, 1]], [Fraction(-5, 7), 1])
    data = json.loads(json.dumps(t.to_json()))
    assert data["linear"][0][0] == "1/3"
    back = ac.AffineMap.from_json(data)
    assert back.exact and back.linear.tolist() == t.linear.tolist()
    f = ac.AffineMap([[0.5, 0.0], [0.0, 2.0]], [0.1, 0.2])
    assert ac.distance(ac.AffineMap.from_json(f.to_json()), f) == 0
