"""Classical affine transformations x ↦ A·x + v of ℝⁿ and affine frames.

Maps whose entries are all rational are carried exactly (object arrays of
Fractions); anything else falls back to float64.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .numerics import (
    det_exact,
    fraction_array,
    is_exact,
    solve_exact,
    solve_float,
    to_fraction,
)

SINGULAR_RTOL = 1e-12


class SingularMapError(ValueError):
    pass


class DimensionError(ValueError):
    pass


def _as_array(values, exact: bool) -> np.ndarray:
    if exact:
        return fraction_array(values)
    return np.array(values, dtype=float)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AffineMap:
    linear: np.ndarray
    translation: np.ndarray
    allow_singular: InitVar[bool] = False
    singular: bool = field(init=False)

    def __post_init__(self, allow_singular: bool):
        exact = is_exact(self.linear) and is_exact(self.translation)
        a = _as_array(self.linear, exact)
        v = _as_array(self.translation, exact)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or v.shape != (a.shape[0],):
            raise DimensionError(f"linear {a.shape} / translation {v.shape} mismatch")
        object.__setattr__(self, "linear", _freeze(a))
        object.__setattr__(self, "translation", _freeze(v))
        object.__setattr__(self, "singular", self._is_singular())
        if self.singular and not allow_singular:
            raise SingularMapError("linear part is singular")

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    @property
    def exact(self) -> bool:
        return self.linear.dtype == object

    def det(self):
        if self.exact:
            return det_exact(self.linear.tolist())
        return float(np.linalg.det(self.linear))

    def _is_singular(self) -> bool:
        d = self.det()
        if self.exact:
            return d == 0
        scale = float(np.max(np.abs(self.linear))) or 1.0
        return abs(d) <= SINGULAR_RTOL * scale**self.dim

    def as_float(self) -> "AffineMap":
        if not self.exact:
            return self
        return AffineMap(self.linear.astype(float), self.translation.astype(float),
                         allow_singular=True)

    def matrix(self) -> np.ndarray:
        """(n+1)×(n+1) homogeneous matrix [[A, v], [0, 1]]."""
        n = self.dim
        out = np.zeros((n + 1, n + 1), dtype=self.linear.dtype)
        if self.exact:
            out[:] = Fraction(0)
        out[:n, :n] = self.linear
        out[:n, n] = self.translation
        out[n, n] = Fraction(1) if self.exact else 1.0
        return out

    def __call__(self, x):
        return apply(self, x)

    def __matmul__(self, other: "AffineMap") -> "AffineMap":
        return compose(self, other)

    def __repr__(self) -> str:
        return f"AffineMap(linear={self.linear.tolist()}, translation={self.translation.tolist()})"

    def to_json(self) -> dict:
        def enc(x):
            return str(x) if isinstance(x, Fraction) else float(x)
        return {
            "dim": self.dim,
            "linear": [[enc(x) for x in row] for row in self.linear],
            "translation": [enc(x) for x in self.translation],
        }

    @classmethod
    def from_json(cls, data: dict) -> "AffineMap":
        def dec(x):
            return Fraction(x) if isinstance(x, str) else x
        t = cls([[dec(x) for x in row] for row in data["linear"]],
                [dec(x) for x in data["translation"]], allow_singular=True)
        if t.dim != data["dim"]:
            raise DimensionError("dim field disagrees with matrix size")
        return t


def identity(n: int) -> AffineMap:
    return AffineMap(np.eye(n, dtype=int).tolist(), [0] * n)


def translation(v: Sequence) -> AffineMap:
    n = len(v)
    return AffineMap(np.eye(n, dtype=int).tolist(), list(v))


def linear_map(a) -> AffineMap:
    return AffineMap(a, [0] * len(a))


def apply(t: AffineMap, x) -> np.ndarray:
    if len(x) != t.dim:
        raise DimensionError(f"point of dim {len(x)} for map of dim {t.dim}")
    if t.exact and is_exact(list(x)):
        xv = fraction_array(list(x))
        return t.linear.dot(xv) + t.translation
    f = t.as_float()
    return f.linear @ np.asarray(x, dtype=float) + f.translation


def apply_many(t: AffineMap, xs: np.ndarray) -> np.ndarray:
    """Vectorised float apply on an (m, n) array of points."""
    f = t.as_float()
    return np.asarray(xs, dtype=float) @ f.linear.T + f.translation


def compose(s: AffineMap, t: AffineMap) -> AffineMap:
    """s ∘ t."""
    if s.dim != t.dim:
        raise DimensionError("cannot compose maps of different dimension")
    if s.exact != t.exact:
        s, t = s.as_float(), t.as_float()
    return AffineMap(s.linear.dot(t.linear), s.linear.dot(t.translation) + s.translation,
                     allow_singular=s.singular or t.singular)


def invert(t: AffineMap) -> AffineMap:
    if t.singular:
        raise SingularMapError("cannot invert a singular affine map")
    n = t.dim
    if t.exact:
        a = t.linear.tolist()
        cols = [solve_exact(a, [Fraction(int(i == j)) for i in range(n)]) for j in range(n)]
        inv = fraction_array([[cols[j][i] for j in range(n)] for i in range(n)])
    else:
        inv = np.linalg.inv(t.linear)
    return AffineMap(inv, -inv.dot(t.translation))


def orientation_sign(t: AffineMap) -> int:
    if t.singular:
        raise SingularMapError("orientation undefined for singular maps")
    return 1 if t.det() > 0 else -1


def distance(s: AffineMap, t: AffineMap) -> float:
    """Max-entry distance between homogeneous matrices."""
    return float(np.max(np.abs(s.as_float().matrix() - t.as_float().matrix())))


@dataclass(frozen=True, eq=False)
class AffineFrame:
    points: tuple

    def __post_init__(self):
        pts = list(self.points)
        exact = is_exact(pts)
        arr = _as_array(pts, exact)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] + 1:
            raise DimensionError("an affine frame of ℝⁿ has n+1 points in ℝⁿ")
        object.__setattr__(self, "points", _freeze(arr))
        basis = (arr[1:] - arr[0]).tolist()
        if exact:
            degenerate = det_exact(basis) == 0
        else:
            scale = float(np.max(np.abs(basis))) or 1.0
            degenerate = abs(np.linalg.det(np.array(basis, float))) <= SINGULAR_RTOL * scale**self.dim
        if degenerate:
            raise ValueError("frame vectors p0p1, ..., p0pn are linearly dependent")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def exact(self) -> bool:
        return self.points.dtype == object

    def vectors(self) -> np.ndarray:
        return self.points[1:] - self.points[0]

    @classmethod
    def standard(cls, n: int) -> "AffineFrame":
        return cls(tuple([[0] * n] + np.eye(n, dtype=int).tolist()))


def from_frame_images(frame: AffineFrame, images: Sequence) -> AffineMap:
    """The unique affine map sending frame.points[i] to images[i].

    Solves the (n²+n)-unknown system in (A row-major, v). When the images do
    not form a frame the map is still returned, with `singular` set.
    """
    n = frame.dim
    if len(images) != n + 1 or any(len(q) != n for q in images):
        raise DimensionError(f"need {n + 1} image points in ℝ^{n}")
    exact = frame.exact and is_exact([list(q) for q in images])
    size = n * n + n
    rows, rhs = [], []
    for p, q in zip(frame.points, images):
        for r in range(n):
            row = [0] * size
            for c in range(n):
                row[r * n + c] = p[c]
            row[n * n + r] = 1
            rows.append(row)
            rhs.append(q[r])
    if exact:
        sol = solve_exact(rows, [to_fraction(v) for v in rhs])
        if sol is None:
            raise ValueError("frame system is singular")
        lin = [[sol[r * n + c] for c in range(n)] for r in range(n)]
        trans = sol[n * n:]
    else:
        sol, _ = solve_float(np.array(rows, dtype=float), np.array(rhs, dtype=float))
        lin = sol[: n * n].reshape(n, n)
        trans = sol[n * n:]
    return AffineMap(lin, trans, allow_singular=True)
