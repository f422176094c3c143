"""Left-symmetric algebras given by structure constants.

Convention: eᵢ·eⱼ = Σₖ c[i][j][k] eₖ (indices from 0). The associator is
a(X,Y,Z) = (X·Y)·Z − X·(Y·Z); a product is left symmetric when the
associator is symmetric in its first two arguments.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .numerics import fraction_array, is_exact, solve_exact, to_fraction
from .report import VerificationReport, exact_report, tolerance_report

DEFAULT_TOL = 1e-9

FAMILY_NAMES = ("F1", "F2")
EXCEPTIONAL_NAMES = ("E1", "E2", "E3", "E4")
PLANAR_NAMES = ("P1", "P2", "P3", "P4", "P5", "P6")
CATALOG_NAMES = PLANAR_NAMES + FAMILY_NAMES + EXCEPTIONAL_NAMES


class UnknownCatalogEntry(KeyError):
    pass


def _structure_array(values, dim: int) -> np.ndarray:
    arr = fraction_array(values) if is_exact(np.asarray(values, dtype=object).tolist()) \
        else np.array(values, dtype=float)
    if arr.shape != (dim, dim, dim):
        raise ValueError(f"structure constants must have shape {(dim,) * 3}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


def _zero_like(arr: np.ndarray):
    return Fraction(0) if arr.dtype == object else 0.0


def _max_abs(values) -> float:
    return max((abs(float(v)) for v in values), default=0.0)


@dataclass(frozen=True, eq=False)
class LieBracket:
    dim: int
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", _structure_array(self.b, self.dim))

    @property
    def exact(self) -> bool:
        return self.b.dtype == object

    def bracket(self, x: Sequence, y: Sequence) -> np.ndarray:
        return _bilinear(self.b, x, y)

    def antisymmetry_residual(self):
        b = self.b
        vals = [b[i, j, k] + b[j, i, k] for i, j, k in itertools.product(range(self.dim), repeat=3)]
        return _residual(vals, self.exact)

    def jacobi_residual(self):
        """max |[[eᵢ,eⱼ],eₖ] + [[eⱼ,eₖ],eᵢ] + [[eₖ,eᵢ],eⱼ]| over basis triples."""
        n, b = self.dim, self.b
        vals = []
        for i, j, k in itertools.product(range(n), repeat=3):
            for m in range(n):
                vals.append(sum((b[i, j, l] * b[l, k, m] + b[j, k, l] * b[l, i, m]
                                 + b[k, i, l] * b[l, j, m]) for l in range(n)))
        return _residual(vals, self.exact)

    def __eq__(self, other) -> bool:
        return isinstance(other, LieBracket) and self.dim == other.dim and bool(np.all(self.b == other.b))


def _residual(vals, exact: bool):
    if exact:
        nz = [v for v in vals if v != 0]
        return Fraction(0) if not nz else max(abs(v) for v in nz)
    return _max_abs(vals)


def _bilinear(c: np.ndarray, x, y) -> np.ndarray:
    n = c.shape[0]
    out = [sum((x[i] * y[j] * c[i, j, k] for i in range(n) for j in range(n)), _zero_like(c))
           for k in range(n)]
    return np.array(out, dtype=c.dtype)


@dataclass(frozen=True, eq=False)
class LSA:
    dim: int
    c: np.ndarray
    name: str = ""
    alpha: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "c", _structure_array(self.c, self.dim))
        if self.alpha is not None:
            object.__setattr__(self, "alpha", to_fraction(self.alpha))

    @property
    def exact(self) -> bool:
        return self.c.dtype == object

    def mul(self, x: Sequence, y: Sequence) -> np.ndarray:
        return _bilinear(self.c, x, y)

    def basis(self, i: int) -> np.ndarray:
        e = np.array([_zero_like(self.c)] * self.dim, dtype=self.c.dtype)
        e[i] = Fraction(1) if self.exact else 1.0
        return e

    def left_matrix(self, i: int) -> np.ndarray:
        """Matrix of Y ↦ eᵢ·Y; column j holds the coordinates of eᵢ·eⱼ."""
        return self.c[i].T.copy()

    def associator(self, i: int, j: int, k: int) -> np.ndarray:
        ei, ej, ek = self.basis(i), self.basis(j), self.basis(k)
        return self.mul(self.mul(ei, ej), ek) - self.mul(ei, self.mul(ej, ek))

    def __eq__(self, other) -> bool:
        return isinstance(other, LSA) and self.dim == other.dim and bool(np.all(self.c == other.c))

    @property
    def label(self) -> str:
        return self.name if self.alpha is None else f"{self.name}({self.alpha})"

    def to_json(self) -> dict:
        def enc(x):
            return str(x) if isinstance(x, Fraction) else float(x)
        out = {"dim": self.dim, "c": [[[enc(v) for v in row] for row in mat] for mat in self.c],
               "name": self.name}
        if self.alpha is not None:
            out["alpha"] = str(self.alpha)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "LSA":
        def dec(x):
            return Fraction(x) if isinstance(x, str) else x
        c = [[[dec(v) for v in row] for row in mat] for mat in data["c"]]
        alpha = data.get("alpha")
        return cls(data["dim"], c, data.get("name", ""), Fraction(alpha) if alpha is not None else None)


def bracket_of(a: LSA) -> LieBracket:
    c = a.c
    return LieBracket(a.dim, c - np.transpose(c, (1, 0, 2)))


def is_torsion_free_compatible(a: LSA, g: LieBracket, tol: float = DEFAULT_TOL) -> VerificationReport:
    if a.dim != g.dim:
        raise ValueError("dimension mismatch between product and bracket")
    diff = (bracket_of(a).b - g.b).ravel()
    check = f"torsion-free:{a.label}"
    if a.exact and g.exact:
        return exact_report(check, _residual(diff, True))
    return tolerance_report(check, _max_abs(diff), tol)


def _triple_check(a: LSA, check: str, expr, tol: float) -> VerificationReport:
    n = a.dim
    vals = []
    for i, j, k in itertools.product(range(n), repeat=3):
        vals.extend(expr(i, j, k))
    if a.exact:
        return exact_report(check, _residual(vals, True))
    return tolerance_report(check, _max_abs(vals), tol)


def is_left_symmetric(a: LSA, tol: float = DEFAULT_TOL) -> VerificationReport:
    return _triple_check(a, f"left-symmetric:{a.label}",
                         lambda i, j, k: a.associator(i, j, k) - a.associator(j, i, k), tol)


def is_flat_compatible(a: LSA, tol: float = DEFAULT_TOL) -> VerificationReport:
    """[X,Y]·Z = X·(Y·Z) − Y·(X·Z) with the bracket induced by the product."""
    br = bracket_of(a)

    def expr(i, j, k):
        x, y, z = a.basis(i), a.basis(j), a.basis(k)
        return a.mul(br.bracket(x, y), z) - (a.mul(x, a.mul(y, z)) - a.mul(y, a.mul(x, z)))

    return _triple_check(a, f"flat:{a.label}", expr, tol)


def is_associative(a: LSA, tol: float = DEFAULT_TOL) -> VerificationReport:
    return _triple_check(a, f"associative:{a.label}", a.associator, tol)


@dataclass(frozen=True, eq=False)
class InfinitesimalAffineRep:
    """Images (Aᵢ, vᵢ) of a Lie algebra basis in aff(ℝⁿ)."""

    linear: tuple
    translation: tuple
    name: str = ""

    def __post_init__(self):
        if len(self.linear) != len(self.translation):
            raise ValueError("one (A, v) pair per basis element")
        exact = is_exact([np.asarray(x, dtype=object).tolist() for x in self.linear + self.translation])
        conv = fraction_array if exact else (lambda x: np.array(x, dtype=float))
        object.__setattr__(self, "linear", tuple(conv(x) for x in self.linear))
        object.__setattr__(self, "translation", tuple(conv(x) for x in self.translation))

    @property
    def algebra_dim(self) -> int:
        return len(self.linear)

    @property
    def ambient_dim(self) -> int:
        return len(self.translation[0])

    @property
    def exact(self) -> bool:
        return self.linear[0].dtype == object

    def velocities(self, base: Sequence) -> list[np.ndarray]:
        """Orbit velocities wᵢ = Aᵢ·base + vᵢ."""
        b = fraction_array(list(base)) if self.exact and is_exact(list(base)) \
            else np.asarray(base, dtype=float)
        return [A.dot(b) + v for A, v in zip(self.linear, self.translation)]


class NotEtale(ValueError):
    pass


def lsa_from_etale(rep: InfinitesimalAffineRep, base: Sequence, name: str = "") -> LSA:
    """Koszul product: Xᵢ·Xⱼ = Aᵢ·wⱼ written in the basis of orbit velocities."""
    m, n = rep.algebra_dim, rep.ambient_dim
    if m != n:
        raise NotEtale(f"algebra dim {m} != ambient dim {n}")
    w = rep.velocities(base)
    cols = np.array(w).T
    exact = w[0].dtype == object
    c = np.empty((n, n, n), dtype=object if exact else float)
    if exact:
        wmat = cols.tolist()
        for i in range(n):
            for j in range(n):
                sol = solve_exact(wmat, list(rep.linear[i].dot(w[j])))
                if sol is None:
                    raise NotEtale("orbit velocities do not span: isotropy not discrete")
                c[i, j, :] = sol
    else:
        wmat = np.array(cols, dtype=float)
        if abs(np.linalg.det(wmat)) <= 1e-12 * max(1.0, np.max(np.abs(wmat))) ** n:
            raise NotEtale("orbit velocities do not span: isotropy not discrete")
        for i in range(n):
            for j in range(n):
                c[i, j, :] = np.linalg.solve(wmat, rep.linear[i] @ w[j])
    return LSA(n, c, name)


def infinitesimal_rep_from_lsa(a: LSA) -> InfinitesimalAffineRep:
    """X ↦ (left multiplication by X, X)."""
    return InfinitesimalAffineRep(tuple(a.left_matrix(i) for i in range(a.dim)),
                                  tuple(a.basis(i) for i in range(a.dim)),
                                  name=f"lambda:{a.label}")


def _table(entries: dict, alpha=None, name="") -> LSA:
    """Build a planar LSA from {(i, j): (coef_e1, coef_e2)} with 1-based keys."""
    c = [[[Fraction(0)] * 2 for _ in range(2)] for _ in range(2)]
    for (i, j), vec in entries.items():
        c[i - 1][j - 1] = [to_fraction(v) for v in vec]
    return LSA(2, c, name, alpha)


def catalog_lsa(name: str, alpha=None) -> LSA:
    """Catalog entry by name.

    F1, F2, E1–E4 are the products compatible with [e₁,e₂] = e₂ on the Lie
    algebra of the orientation-preserving affine group of the line. P1–P6
    are the products of the six transitive flat connections on ℝ², derived
    from the étale representations at the base point D(0).
    """
    if name in FAMILY_NAMES:
        if alpha is None:
            raise ValueError(f"{name} needs a rational parameter alpha")
        al = to_fraction(alpha)
        if name == "F1":
            return _table({(1, 1): (al, 0), (1, 2): (0, 1)}, al, name)
        if al == 0:
            raise ValueError("F2 requires alpha != 0")
        return _table({(1, 1): (al, 0), (1, 2): (0, al + 1), (2, 1): (0, al)}, al, name)
    if name == "E1":
        return _table({(1, 1): (1, 1), (1, 2): (0, 1)}, name=name)
    if name == "E2":
        return _table({(1, 1): (-1, 1), (2, 1): (0, -1)}, name=name)
    if name in ("E3", "E4"):
        sign = 1 if name == "E3" else -1
        return _table({(1, 1): (2, 0), (1, 2): (0, 1), (2, 2): (sign, 0)}, name=name)
    if name in PLANAR_NAMES:
        from .devmap import planar_lsa  # devmap depends on this module
        return planar_lsa(name)
    raise UnknownCatalogEntry(name)


AFF_LINE_BRACKET = LieBracket(2, [[[0, 0], [0, 1]], [[0, -1], [0, 0]]])
ABELIAN_PLANE_BRACKET = LieBracket(2, [[[0, 0], [0, 0]], [[0, 0], [0, 0]]])


def axiom_reports(a: LSA, bracket: LieBracket | None = None) -> list[VerificationReport]:
    """Torsion-free compatibility, left symmetry and flatness for one product."""
    g = bracket if bracket is not None else expected_bracket(a)
    return [is_torsion_free_compatible(a, g), is_left_symmetric(a), is_flat_compatible(a)]


def expected_bracket(a: LSA) -> LieBracket:
    if a.name in FAMILY_NAMES + EXCEPTIONAL_NAMES:
        return AFF_LINE_BRACKET
    if a.name in PLANAR_NAMES:
        return ABELIAN_PLANE_BRACKET
    return bracket_of(a)
