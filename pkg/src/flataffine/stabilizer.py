"""Stabilizers of connected open sets of ℝⁿ under affine maps.

A DomainSpec is an open set given by strict sign conditions on polynomials
of degree ≤ 2, together with a stratified boundary (points, hyperplanes,
graphs x₁ = q(x₂, …, xₙ) of quadratics). Its stabilizer Lie algebra is the
space of affine fields x ↦ Mx + b tangent to every stratum, computed
exactly by polynomial coefficient matching.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import affine_core as ac
from .numerics import (
    LinPoly,
    PolySystem,
    fd_first,
    fd_second,
    fraction_array,
    is_exact,
    mat_exp,
    match_coefficients,
    monomials,
    nullspace,
    rank_exact,
    to_fraction,
)
from .report import (
    FAIL,
    PASS,
    VerificationReport,
    exact_report,
    tolerance_report,
)

MEMBERSHIP_TOL = 1e-9
NumPoly = dict  # Monomial -> Fraction


def _const(nvars: int, c) -> NumPoly:
    return {(0,) * nvars: to_fraction(c)}


def _var(nvars: int, k: int, c=1) -> NumPoly:
    m = [0] * nvars
    m[k] = 1
    return {tuple(m): to_fraction(c)}


def _padd(*polys: NumPoly) -> NumPoly:
    out: NumPoly = {}
    for p in polys:
        for m, c in p.items():
            out[m] = out.get(m, Fraction(0)) + c
    return {m: c for m, c in out.items() if c != 0}


def _pdiff(p: NumPoly, k: int) -> NumPoly:
    out: NumPoly = {}
    for m, c in p.items():
        if m[k]:
            mm = list(m)
            mm[k] -= 1
            out[tuple(mm)] = c * m[k]
    return out


def _peval(p: NumPoly, x: np.ndarray) -> np.ndarray:
    """Evaluate on an (m, nvars) float array."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape[0])
    for mono, c in p.items():
        term = np.full(x.shape[0], float(c))
        for k, e in enumerate(mono):
            if e:
                term = term * x[:, k] ** e
        out += term
    return out


# ---------------------------------------------------------------------------
# boundary strata


@dataclass(frozen=True, eq=False)
class Point:
    p: tuple

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(to_fraction(v) for v in self.p))

    def residual(self, xs: np.ndarray) -> np.ndarray:
        return np.linalg.norm(np.atleast_2d(xs) - np.array(self.p, dtype=float), axis=1)

    def sample(self, rng, count: int, half_width: float) -> np.ndarray:
        return np.array([self.p], dtype=float)

    def tangency(self, nunk: int, field_poly) -> list[LinPoly]:
        n = len(self.p)
        x = [_const(0, v) for v in self.p]
        return [field_poly(r, x, 0) for r in range(n)]

    def describe(self) -> dict:
        return {"type": "point", "p": [str(v) for v in self.p]}


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """ℓ·x = c."""

    normal: tuple
    c: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(to_fraction(v) for v in self.normal))
        object.__setattr__(self, "c", to_fraction(self.c))
        if not any(self.normal):
            raise ValueError("hyperplane normal must be nonzero")

    def _param(self) -> tuple[list[Fraction], list[list[Fraction]]]:
        n = len(self.normal)
        k = next(i for i, v in enumerate(self.normal) if v != 0)
        base = [Fraction(0)] * n
        base[k] = self.c / self.normal[k]
        return base, nullspace([list(self.normal)])

    def residual(self, xs: np.ndarray) -> np.ndarray:
        ell = np.array(self.normal, dtype=float)
        return np.abs(np.atleast_2d(xs) @ ell - float(self.c)) / np.linalg.norm(ell)

    def sample(self, rng, count: int, half_width: float) -> np.ndarray:
        base, dirs = self._param()
        t = rng.uniform(-half_width, half_width, size=(count, len(dirs)))
        return np.array(base, dtype=float) + t @ np.array(dirs, dtype=float)

    def tangency(self, nunk: int, field_poly) -> list[LinPoly]:
        base, dirs = self._param()
        nv = len(dirs)
        n = len(base)
        x = [_padd(_const(nv, base[c]), *[_var(nv, s, dirs[s][c]) for s in range(nv)])
             for c in range(n)]
        ident = LinPoly.zero(nv, nunk)
        for r in range(n):
            if self.normal[r]:
                ident = ident + field_poly(r, x, nv).scale(self.normal[r])
        return [ident]

    def describe(self) -> dict:
        return {"type": "hyperplane", "normal": [str(v) for v in self.normal], "c": str(self.c)}


@dataclass(frozen=True, eq=False)
class QuadricGraph:
    """x₁ = q(x₂, …, xₙ) with q a polynomial of degree ≤ 2 in n−1 variables."""

    q: NumPoly

    def __post_init__(self):
        object.__setattr__(self, "q", {tuple(m): to_fraction(c) for m, c in self.q.items()})
        if any(sum(m) > 2 for m in self.q):
            raise ValueError("quadric strata must have degree ≤ 2")

    @property
    def nvars(self) -> int:
        return len(next(iter(self.q)))

    def residual(self, xs: np.ndarray) -> np.ndarray:
        xs = np.atleast_2d(xs)
        return np.abs(xs[:, 0] - _peval(self.q, xs[:, 1:]))

    def sample(self, rng, count: int, half_width: float) -> np.ndarray:
        y = rng.uniform(-half_width, half_width, size=(count, self.nvars))
        return np.column_stack([_peval(self.q, y), y])

    def tangency(self, nunk: int, field_poly) -> list[LinPoly]:
        nv = self.nvars
        x = [self.q] + [_var(nv, s) for s in range(nv)]
        ident = field_poly(0, x, nv)
        for s in range(nv):
            ident = ident - field_poly(s + 1, x, nv).times(_pdiff(self.q, s))
        return [ident]

    def describe(self) -> dict:
        return {"type": "quadric-graph",
                "q": [{"monomial": list(m), "coef": str(c)} for m, c in sorted(self.q.items())]}


Stratum = Point | Hyperplane | QuadricGraph


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """Open set {x : p(x) > 0 for every p in `positive`} with boundary strata."""

    name: str
    dim: int
    positive: tuple
    strata: tuple
    witness: tuple
    half_width: float = 4.0
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "witness", tuple(to_fraction(v) for v in self.witness))
        if not self.contains(np.array(self.witness, dtype=float)):
            raise ValueError(f"{self.name}: witness is not interior")

    def contains_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        ok = np.all(np.isfinite(xs), axis=1)
        for p in self.positive:
            ok &= _peval(p, xs) > 0
        return ok

    def contains(self, x) -> bool:
        return bool(self.contains_many(np.asarray(x, dtype=float)[None, :])[0])

    def boundary_residual(self, xs: np.ndarray) -> np.ndarray:
        """Distance-like residual to the nearest stratum, per point."""
        xs = np.atleast_2d(xs)
        if not self.strata:
            return np.full(xs.shape[0], np.inf)
        return np.min([s.residual(xs) for s in self.strata], axis=0)

    def sample_boundary(self, rng, per_stratum: int) -> np.ndarray:
        if not self.strata:
            return np.zeros((0, self.dim))
        return np.vstack([s.sample(rng, per_stratum, self.half_width) for s in self.strata])

    def describe(self) -> dict:
        return {"name": self.name, "dim": self.dim,
                "strata": [s.describe() for s in self.strata],
                "witness": [str(v) for v in self.witness]}


def _frame_points(n: int) -> list[list[int]]:
    return [[0] * n] + np.eye(n, dtype=int).tolist()


def punctured(k: int, n: int, name: str | None = None) -> DomainSpec:
    """ℝⁿ minus the first k points of the standard frame 0, e₁, …, eₙ."""
    if not 0 <= k <= n + 1:
        raise ValueError(f"can remove at most n+1={n + 1} frame points")
    pts = _frame_points(n)[:k]
    positive = []
    for p in pts:
        # |x − p|² > 0
        terms = []
        for c in range(n):
            m2 = [0] * n
            m2[c] = 2
            terms.append({tuple(m2): Fraction(1)})
            if p[c]:
                terms.append(_var(n, c, -2 * p[c]))
                terms.append(_const(n, p[c] ** 2))
        positive.append(_padd(*terms))
    witness = [Fraction(1, 3 + c) for c in range(n)]
    return DomainSpec(name or f"punctured:{k}", n, tuple(positive), tuple(Point(p) for p in pts), witness)


def orthant(i: int, n: int) -> DomainSpec:
    """x₁ > 0, …, xᵢ > 0; strata are the full hyperplanes xₖ = 0."""
    if not 1 <= i <= n:
        raise ValueError("orthant index must satisfy 1 <= i <= n")
    positive = tuple(_var(n, k) for k in range(i))
    strata = tuple(Hyperplane(np.eye(n, dtype=int)[k].tolist()) for k in range(i))
    return DomainSpec(f"orthant:{i}", n, positive, strata, [1] * n)


def _parabola(name: str, sign: int) -> DomainSpec:
    # x₁ > (sign·x₂² − 1)/2
    q = {(2,): Fraction(sign, 2), (0,): Fraction(-1, 2)}
    positive = ({(1, 0): Fraction(1), (0, 2): Fraction(-sign, 2), (0, 0): Fraction(1, 2)},)
    return DomainSpec(name, 2, positive, (QuadricGraph(q),), [0, 0])


def domain_spec(name: str, n: int = 2) -> DomainSpec:
    """Catalog lookup: plane, punctured:<k>, punctured-plane, orthant:<i>,
    upper-half-plane, left-half-plane, parabola, parabola-reflected."""
    if name == "plane":
        return DomainSpec("plane", n, (), (), [0] * n)
    if name == "punctured-plane":
        return punctured(1, 2, "punctured-plane")
    if name == "upper-half-plane":
        return DomainSpec(name, 2, (_var(2, 1),), (Hyperplane([0, 1]),), [0, 1])
    if name == "left-half-plane":
        return DomainSpec(name, 2, (_var(2, 0, -1),), (Hyperplane([1, 0]),), [-1, 0])
    if name == "parabola":
        return _parabola(name, 1)
    if name == "parabola-reflected":
        return _parabola(name, -1)
    m = re.fullmatch(r"(punctured|orthant):(\d+)", name)
    if m:
        k = int(m.group(2))
        return punctured(k, n) if m.group(1) == "punctured" else orthant(k, n)
    raise KeyError(f"unknown domain spec {name!r}")


SPEC_NAMES = ("plane", "punctured:<k>", "punctured-plane", "orthant:<i>", "upper-half-plane",
              "left-half-plane", "parabola", "parabola-reflected")


# ---------------------------------------------------------------------------
# affine fields and the stabilizer algebra


@dataclass(frozen=True, eq=False)
class AffineField:
    """The vector field x ↦ M·x + b."""

    m: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        exact = is_exact(np.asarray(self.m, dtype=object).tolist()) and \
            is_exact(np.asarray(self.b, dtype=object).tolist())
        conv = fraction_array if exact else (lambda v: np.array(v, dtype=float))
        object.__setattr__(self, "m", conv(self.m))
        object.__setattr__(self, "b", conv(self.b))

    @property
    def dim(self) -> int:
        return len(self.b)

    @property
    def exact(self) -> bool:
        return self.m.dtype == object

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.m, dtype=float) @ np.asarray(x, dtype=float) + np.asarray(self.b, dtype=float)

    def matrix(self) -> np.ndarray:
        """(n+1)×(n+1) embedding [[M, b], [0, 0]]."""
        n = self.dim
        out = np.empty((n + 1, n + 1), dtype=self.m.dtype)
        out[:] = Fraction(0) if self.exact else 0.0
        out[:n, :n] = self.m
        out[:n, n] = self.b
        return out

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "AffineField":
        n = mat.shape[0] - 1
        return cls(mat[:n, :n], mat[:n, n])

    def vector(self) -> list:
        return list(self.m.ravel()) + list(self.b)

    def to_json(self) -> dict:
        enc = (lambda v: str(v)) if self.exact else float
        return {"M": [[enc(v) for v in row] for row in self.m], "b": [enc(v) for v in self.b]}


def field_bracket(x: AffineField, y: AffineField) -> AffineField:
    """Commutator of the matrix embeddings."""
    mx, my = x.matrix(), y.matrix()
    return AffineField.from_matrix(mx.dot(my) - my.dot(mx))


@dataclass(frozen=True, eq=False)
class StabilizerAlgebra:
    domain: DomainSpec
    basis: tuple

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_json(self) -> dict:
        return {"domain": self.domain.name, "n": self.domain.dim, "dim": self.dim,
                "basis": [f.to_json() for f in self.basis]}


def _field_poly_factory(n: int):
    """field_poly(r, x, nv): the r-th component of M·x(t) + b as a LinPoly,
    x given as numeric polynomials in nv parameters; unknowns are M row-major
    then b."""
    nunk = n * n + n

    def field_poly(r: int, x: list[NumPoly], nv: int) -> LinPoly:
        out = LinPoly.unknown(nv, nunk, n * n + r)
        for c in range(n):
            out = out + LinPoly.unknown(nv, nunk, r * n + c).times(x[c])
        return out

    return field_poly


def tangency_system(spec: DomainSpec) -> PolySystem:
    n = spec.dim
    nunk = n * n + n
    fp = _field_poly_factory(n)
    system = PolySystem(nunk, max_degree=3)
    for s in spec.strata:
        for ident in s.tangency(nunk, fp):
            system.add(ident)
    return system


def stabilizer_algebra(spec: DomainSpec) -> StabilizerAlgebra:
    """Exact basis of affine fields tangent to every boundary stratum."""
    n = spec.dim
    system = tangency_system(spec)
    if system.identities:
        basis_vecs = nullspace(match_coefficients(system))
    else:
        basis_vecs = np.eye(n * n + n, dtype=int).tolist()
        basis_vecs = [[Fraction(v) for v in row] for row in basis_vecs]
    fields = tuple(AffineField(np.array(v[: n * n], dtype=object).reshape(n, n), v[n * n:])
                   for v in basis_vecs)
    alg = StabilizerAlgebra(spec, fields)
    for f in fields:
        if constraint_residual(f, spec) != 0:
            raise ArithmeticError("basis field violates a tangency constraint")
    return alg


def constraint_residual(f: AffineField, spec: DomainSpec) -> Fraction:
    """Largest |coefficient| left after substituting f into the constraints."""
    system = tangency_system(spec)
    if not system.identities:
        return Fraction(0)
    mat = match_coefficients(system)
    vals = mat @ f.vector()
    return max((abs(v) for v in vals), default=Fraction(0))


def closed_form_dimension(spec: DomainSpec) -> int | None:
    """Known dimension formulas for punctured spaces and orthants."""
    n = spec.dim
    m = re.fullmatch(r"punctured:(\d+)", spec.name)
    if m or spec.name == "punctured-plane":
        k = int(m.group(1)) if m else 1
        if k == 0:
            return n * n + n
        i = k - 1
        return i * (n - i) + (n - i) ** 2
    m = re.fullmatch(r"orthant:(\d+)", spec.name)
    if m:
        i = int(m.group(1))
        return i + i * (n - i) + (n - i) * (n - i + 1)
    if spec.name == "plane":
        return n * n + n
    return None


def algebra_dimension_table(specs: Sequence[DomainSpec]) -> dict[str, int]:
    return {f"{s.name}@R{s.dim}": stabilizer_algebra(s).dim for s in specs}


def _span_closure(alg: StabilizerAlgebra, op, check: str) -> VerificationReport:
    vecs = [f.matrix().ravel().tolist() for f in alg.basis]
    r0 = rank_exact(vecs)
    outside = 0
    for x, y in itertools.product(alg.basis, repeat=2):
        prod = op(x, y).ravel().tolist()
        if rank_exact(vecs + [prod]) > r0:
            outside += 1
    note = f"{outside} of {alg.dim ** 2} products leave the span"
    return exact_report(check, Fraction(outside), note)


def is_closed_under_matrix_product(alg: StabilizerAlgebra) -> VerificationReport:
    return _span_closure(alg, lambda x, y: x.matrix().dot(y.matrix()),
                         f"associative-closure:{alg.domain.name}@R{alg.domain.dim}")


def is_lie_subalgebra(alg: StabilizerAlgebra) -> VerificationReport:
    return _span_closure(alg, lambda x, y: field_bracket(x, y).matrix(),
                         f"lie-closure:{alg.domain.name}@R{alg.domain.dim}")


def flow_of(f: AffineField, t: float) -> ac.AffineMap:
    e = mat_exp(np.asarray(f.matrix(), dtype=float), t)
    n = f.dim
    return ac.AffineMap(e[:n, :n], e[:n, n])


# ---------------------------------------------------------------------------
# membership


def _boundary_excess(t: ac.AffineMap, spec: DomainSpec, xs: np.ndarray) -> float:
    ys = ac.apply_many(t, xs)
    res = spec.boundary_residual(ys) / (1.0 + np.linalg.norm(ys, axis=1))
    res = np.where(np.isfinite(ys).all(axis=1), res, np.inf)
    return float(np.max(res)) if len(res) else 0.0


def preserves_boundary(t: ac.AffineMap, spec: DomainSpec, samples: int = 50,
                       tol: float = MEMBERSHIP_TOL, seed: int = 0) -> VerificationReport:
    """Sampled boundary points must map onto the boundary under T and T⁻¹."""
    if t.dim != spec.dim:
        raise ac.DimensionError("map and domain dimensions differ")
    check = f"boundary:{spec.name}"
    if not spec.strata:
        return VerificationReport(check, PASS, 0.0, tol, note="empty boundary")
    rng = np.random.default_rng(seed)
    xs = spec.sample_boundary(rng, samples)
    try:
        tinv = ac.invert(t)
    except ac.SingularMapError:
        return VerificationReport(check, FAIL, math.inf, tol, note="singular map")
    res = max(_boundary_excess(t, spec, xs), _boundary_excess(tinv, spec, xs))
    return tolerance_report(check, res, tol, samples=len(xs), seed=seed)


def preserves_open_set(t: ac.AffineMap, spec: DomainSpec, tol: float = MEMBERSHIP_TOL,
                       samples: int = 50, seed: int = 0) -> VerificationReport:
    """Boundary preserved by T and T⁻¹, and T(witness) interior."""
    b = preserves_boundary(t, spec, samples, tol, seed)
    w = ac.apply(t.as_float(), [float(v) for v in spec.witness])
    inside = spec.contains(w)
    ok = b.passed and inside
    note = "witness maps inside" if inside else "witness maps outside"
    return VerificationReport(f"preserves:{spec.name}", PASS if ok else FAIL, b.residual,
                              tol, b.samples, b.seed, note)


ORACLE_LAYER = tuple(10.0 ** -k for k in range(1, 7))


def oracle_grid(spec: DomainSpec, resolution: int = 41, layer: int = 100) -> np.ndarray:
    """Cell-centred grid of the box [−w, w]ⁿ restricted to the open set, plus
    a boundary layer: `layer` boundary points per stratum (fixed seed) nudged
    by 10⁻¹..10⁻⁶ along each coordinate direction, kept where interior.

    The layer lets the oracle see maps that only fail very close to the
    boundary, which a uniform grid misses.
    """
    w = spec.half_width
    step = 2 * w / resolution
    axis = -w + step * (np.arange(resolution) + 0.5)
    pts = np.array(np.meshgrid(*[axis] * spec.dim, indexing="ij")).reshape(spec.dim, -1).T
    if layer and spec.strata:
        base = spec.sample_boundary(np.random.default_rng(0), layer)
        dirs = np.vstack([np.eye(spec.dim), -np.eye(spec.dim)])
        shifts = (np.array(ORACLE_LAYER)[:, None, None] * dirs[None, :, :]).reshape(-1, spec.dim)
        pts = np.vstack([pts, (base[:, None, :] + shifts[None, :, :]).reshape(-1, spec.dim)])
    return pts[spec.contains_many(pts)]


def oracle_preserves(t: ac.AffineMap, spec: DomainSpec, resolution: int = 41,
                     grid: np.ndarray | None = None) -> VerificationReport:
    """Brute force: every interior grid point stays interior under T and T⁻¹."""
    pts = oracle_grid(spec, resolution) if grid is None else grid
    check = f"oracle:{spec.name}"
    try:
        tinv = ac.invert(t)
    except ac.SingularMapError:
        return VerificationReport(check, FAIL, 1.0, 0.0, note="singular map")
    bad = (~spec.contains_many(ac.apply_many(t, pts))).sum() + \
        (~spec.contains_many(ac.apply_many(tinv, pts))).sum()
    frac = float(bad) / (2 * len(pts))
    return VerificationReport(check, PASS if bad == 0 else FAIL, frac, 0.0,
                              note=f"{len(pts)} grid points")


def is_complete_on(f: AffineField, spec: DomainSpec, t_range=(-10.0, 10.0),
                   samples: int = 41, tol: float = MEMBERSHIP_TOL) -> VerificationReport:
    bad = [float(t) for t in np.linspace(*t_range, samples)
           if not preserves_open_set(flow_of(f, float(t)), spec, tol)]
    note = "flow preserves the domain" if not bad else f"fails at t={bad[:3]}"
    return VerificationReport(f"complete:{spec.name}", PASS if not bad else FAIL,
                              float(len(bad)), 0.0, samples, 0, note)


# ---------------------------------------------------------------------------
# infinitesimal affine transformations of constant-coefficient connections


@dataclass(frozen=True, eq=False)
class PolyField:
    """Polynomial vector field; components[k] maps monomials to coefficients."""

    components: tuple

    def __call__(self, x) -> np.ndarray:
        return np.array([_peval(c, np.asarray(x, dtype=float)[None, :])[0] if c else 0.0
                         for c in self.components])

    @property
    def degree(self) -> int:
        return max((sum(m) for c in self.components for m, v in c.items() if v), default=0)


def solve_infinitesimal(gamma, n: int, max_degree: int = 2) -> list[PolyField]:
    """Polynomial fields X of degree ≤ max_degree with ∇_{∇_Y Z}X = ∇_Y∇_Z X.

    gamma is a constant exact array Γ[k][i][j] (∇_{∂ᵢ}∂ⱼ = Σₖ Γ[k][i][j]∂ₖ).
    """
    if max_degree > 3:
        raise ValueError("max_degree must be ≤ 3")
    g = fraction_array(np.asarray(gamma, dtype=object).tolist())
    monos = monomials(n, max_degree)
    nunk = n * len(monos)
    X = [LinPoly.zero(n, nunk) for _ in range(n)]
    for k in range(n):
        for a, mono in enumerate(monos):
            X[k] = X[k] + LinPoly.unknown(n, nunk, k * len(monos) + a, mono)

    def cov(j: int) -> list[LinPoly]:
        """(∇_{∂ⱼ}X)ᵐ for every m."""
        out = []
        for m in range(n):
            e = X[m].diff(j)
            for l in range(n):
                if g[m, j, l]:
                    e = e + X[l].scale(g[m, j, l])
            out.append(e)
        return out

    covs = [cov(j) for j in range(n)]
    system = PolySystem(nunk, max_degree)
    for i, j in itertools.product(range(n), repeat=2):
        for m in range(n):
            lhs = covs[j][m].diff(i)
            for l in range(n):
                if g[m, i, l]:
                    lhs = lhs + covs[j][l].scale(g[m, i, l])
            for k in range(n):
                if g[k, i, j]:
                    lhs = lhs - covs[k][m].scale(g[k, i, j])
            system.add(lhs)
    basis = nullspace(match_coefficients(system))
    out = []
    for v in basis:
        comps = tuple({mono: v[k * len(monos) + a] for a, mono in enumerate(monos)
                       if v[k * len(monos) + a] != 0} for k in range(n))
        out.append(PolyField(comps))
    return out


def in_span(fields: Sequence[PolyField], target: PolyField, n: int, max_degree: int) -> bool:
    monos = monomials(n, max_degree)

    def vec(f: PolyField) -> list:
        return [f.components[k].get(m, Fraction(0)) for k in range(n) for m in monos]

    rows = [vec(f) for f in fields]
    return rank_exact(rows + [vec(target)]) == rank_exact(rows)


def constant_field(n: int, k: int) -> PolyField:
    return PolyField(tuple({(0,) * n: Fraction(1)} if c == k else {} for c in range(n)))


def infinitesimal_residual(x_field: Callable, gamma_fn: Callable, point,
                           h: float = 1e-4) -> float:
    """Finite-difference residual of ∇_{∇_Y Z}X − ∇_Y∇_Z X over coordinate Y, Z,
    relative to the size of X and its derivatives."""
    p = np.asarray(point, dtype=float)
    g = gamma_fn(p)
    n = len(p)
    x = np.asarray(x_field(p), dtype=float)
    d1 = [fd_first(x_field, p, j, h) for j in range(n)]
    scale = max(1.0, float(np.max(np.abs(x))), max(float(np.max(np.abs(d))) for d in d1))
    res = 0.0
    for i, j in itertools.product(range(n), repeat=2):
        d2 = fd_second(x_field, p, i, j, h)
        scale = max(scale, float(np.max(np.abs(d2))))
        # ∇_{∂ᵢ}∇_{∂ⱼ}X − Σₖ Γᵏᵢⱼ ∇_{∂ₖ}X; Γ is constant along the chart here only
        # through gamma_fn(p), so ∂ᵢΓ is taken by differences as well
        dg = (gamma_fn(p + h * np.eye(n)[i]) - gamma_fn(p - h * np.eye(n)[i])) / (2 * h)
        cov_j = d1[j] + g[:, j, :] @ x
        d_cov_j = d2 + dg[:, j, :] @ x + g[:, j, :] @ d1[i]
        lhs = d_cov_j + g[:, i, :] @ cov_j
        rhs = sum(g[k, i, j] * (d1[k] + g[:, k, :] @ x) for k in range(n))
        res = max(res, float(np.max(np.abs(lhs - rhs))))
    return res / scale


def pullback_field(develop: Callable, jacobian: Callable, w: AffineField) -> Callable:
    """x ↦ J(x)⁻¹ W(D(x)): the field on the chart that D carries to W."""
    def field_(x):
        return np.linalg.solve(jacobian(x), w(develop(x)))
    return field_
