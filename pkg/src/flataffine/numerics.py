"""Shared numeric kernels.

Exact rational linear algebra (row reduction, nullspace, solve), a float
solver with partial pivoting, central finite differences, classical RK4,
the matrix exponential, and polynomial coefficient matching.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Sequence

import numpy as np

Monomial = tuple[int, ...]


class DomainExit(Exception):
    """Raised when an integrated path leaves its admissible region."""

    def __init__(self, t_exit: float, state=None):
        super().__init__(f"path left the domain at t={t_exit:.6g}")
        self.t_exit = t_exit
        self.state = state


class DegreeOverflow(ValueError):
    pass


def is_exact(value) -> bool:
    """True if `value` (scalar or nested sequence) holds only rationals/ints."""
    if isinstance(value, np.ndarray):
        if value.dtype == object:
            return all(is_exact(v) for v in value.flat)
        return np.issubdtype(value.dtype, np.integer)
    if isinstance(value, (list, tuple)):
        return all(is_exact(v) for v in value)
    return isinstance(value, Rational) and not isinstance(value, bool)


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


def fraction_array(values) -> np.ndarray:
    """Object array of Fractions with the shape of `values`."""
    arr = np.array(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        out[idx] = to_fraction(arr[idx])
    return out


# ---------------------------------------------------------------------------
# exact linear algebra


@dataclass(frozen=True)
class RationalMatrix:
    """Dense matrix of exact rationals (backed by Python's big integers)."""

    rows: tuple[tuple[Fraction, ...], ...]
    ncols: int = -1

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(v) for v in r) for r in self.rows)
        ncols = self.ncols if self.ncols >= 0 else (len(rows[0]) if rows else 0)
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "ncols", ncols)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "RationalMatrix":
        return cls(tuple((Fraction(0),) * ncols for _ in range(nrows)), ncols)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)), n)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __matmul__(self, vec: Sequence) -> list[Fraction]:
        return [sum((a * to_fraction(v) for a, v in zip(row, vec)), Fraction(0)) for row in self.rows]

    def rref(self) -> tuple[list[list[Fraction]], list[int]]:
        """Reduced row echelon form and pivot columns."""
        m = [list(r) for r in self.rows]
        pivots: list[int] = []
        r = 0
        for c in range(self.ncols):
            piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
            if piv is None:
                continue
            m[r], m[piv] = m[piv], m[r]
            p = m[r][c]
            m[r] = [v / p for v in m[r]]
            for i in range(len(m)):
                if i != r and m[i][c] != 0:
                    f = m[i][c]
                    m[i] = [a - f * b for a, b in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
            if r == len(m):
                break
        return m, pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def nullspace(self) -> list[list[Fraction]]:
        return nullspace(self)


def nullspace(a: RationalMatrix) -> list[list[Fraction]]:
    """Exact nullspace basis; each vector is checked by substitution."""
    if not isinstance(a, RationalMatrix):
        a = RationalMatrix(tuple(tuple(r) for r in a))
    reduced, pivots = a.rref()
    free = [c for c in range(a.ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * a.ncols
        v[f] = Fraction(1)
        for row, pc in zip(reduced, pivots):
            v[pc] = -row[f]
        basis.append(v)
    for v in basis:
        if any(x != 0 for x in a @ v):
            raise ArithmeticError("nullspace vector failed back-substitution")
    assert len(basis) == a.ncols - len(pivots)
    return basis


def rank_exact(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return RationalMatrix(tuple(tuple(r) for r in rows)).rank()


def solve_exact(a: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Unique exact solution of a·x = b, or None if a is singular."""
    n = len(a)
    aug = RationalMatrix(tuple(tuple(list(row) + [bi]) for row, bi in zip(a, b)))
    reduced, pivots = aug.rref()
    if pivots != list(range(n)):
        return None
    return [reduced[i][n] for i in range(n)]


def det_exact(a: Sequence[Sequence]) -> Fraction:
    m = [[to_fraction(v) for v in row] for row in a]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return det


def solve_float(a, b) -> tuple[np.ndarray, float]:
    """Gaussian elimination with partial pivoting.

    Returns the solution and the smallest pivot magnitude encountered, which
    callers use as a singularity signal (0.0 means exactly singular).
    """
    m = np.array(a, dtype=float)
    rhs = np.array(b, dtype=float)
    n = m.shape[0]
    min_pivot = math.inf
    for c in range(n):
        p = c + int(np.argmax(np.abs(m[c:, c])))
        min_pivot = min(min_pivot, abs(m[p, c]))
        if m[p, c] == 0.0:
            return np.full(n, np.nan), 0.0
        if p != c:
            m[[c, p]] = m[[p, c]]
            rhs[[c, p]] = rhs[[p, c]]
        f = m[c + 1:, c] / m[c, c]
        m[c + 1:, c:] -= np.outer(f, m[c, c:])
        rhs[c + 1:] -= f * rhs[c]
    x = np.zeros(n)
    for r in range(n - 1, -1, -1):
        x[r] = (rhs[r] - m[r, r + 1:] @ x[r + 1:]) / m[r, r]
    return x, float(min_pivot)


# ---------------------------------------------------------------------------
# finite differences, ODEs, exponential


def fd_first(f: Callable, x, i: int, h: float = 1e-4) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    e = np.zeros_like(x)
    e[i] = h
    return (np.asarray(f(x + e), dtype=float) - np.asarray(f(x - e), dtype=float)) / (2 * h)


def fd_second(f: Callable, x, i: int, j: int, h: float = 1e-4) -> np.ndarray:
    """Central-difference second partial ∂²f/∂xᵢ∂xⱼ, O(h²)."""
    x = np.asarray(x, dtype=float)
    ei = np.zeros_like(x)
    ei[i] = h
    if i == j:
        return (np.asarray(f(x + ei), float) - 2 * np.asarray(f(x), float)
                + np.asarray(f(x - ei), float)) / h**2
    ej = np.zeros_like(x)
    ej[j] = h
    return (np.asarray(f(x + ei + ej), float) - np.asarray(f(x + ei - ej), float)
            - np.asarray(f(x - ei + ej), float) + np.asarray(f(x - ei - ej), float)) / (4 * h**2)


def rk4_batch(f: Callable, x0, t_end: float, steps: int,
              inside: Callable | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Classical fourth-order Runge-Kutta on a batch of states.

    f(t, X) maps an (m, d) array to its derivative. `inside(X)` returns an
    (m,) boolean mask; a row is frozen (and its exit time recorded) at the
    first step whose stage states leave it or become non-finite.

    Returns the sample times, states of shape (steps+1, m, d) and the exit
    times (inf for rows that never left).
    """
    if steps < 2:
        raise ValueError("rk4 needs at least 2 steps")
    x = np.array(x0, dtype=float, ndmin=2)
    m = x.shape[0]
    dt = t_end / steps
    ts = np.linspace(0.0, t_end, steps + 1)
    out = np.empty((steps + 1,) + x.shape)
    exit_t = np.full(m, np.inf)

    def ok(y):
        good = np.isfinite(y).all(axis=1)
        if inside is not None:
            good &= inside(np.where(good[:, None], y, 0.0))
        return good

    alive = ok(x)
    exit_t[~alive] = 0.0
    out[0] = x
    with np.errstate(all="ignore"):
        for s in range(steps):
            t = ts[s]
            k1 = f(t, x)
            y2 = x + 0.5 * dt * k1
            k2 = f(t + 0.5 * dt, y2)
            y3 = x + 0.5 * dt * k2
            k3 = f(t + 0.5 * dt, y3)
            y4 = x + dt * k3
            k4 = f(t + dt, y4)
            nxt = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            good = alive & ok(np.concatenate([y2, y3, y4, nxt])).reshape(4, m).all(axis=0)
            exit_t[alive & ~good] = t
            alive = good
            x = np.where(alive[:, None], nxt, x)
            out[s + 1] = x
    return ts, out, exit_t


def rk4(f: Callable, x0, t_end: float, steps: int,
        inside: Callable | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Classical RK4 for x' = f(t, x) on one state vector.

    `inside(x)` optionally bounds the state; leaving it (or overflowing)
    raises DomainExit carrying the exit time.
    """
    x0 = np.asarray(x0, dtype=float)
    fb = (lambda t, X: np.asarray(f(t, X[0]), dtype=float)[None, :])
    ib = None if inside is None else (lambda X: np.array([bool(inside(X[0]))]))
    ts, out, exit_t = rk4_batch(fb, x0[None, :], t_end, steps, ib)
    if np.isfinite(exit_t[0]):
        raise DomainExit(float(exit_t[0]), out[-1, 0])
    return ts, out[:, 0, :]


def mat_exp(m, t: float = 1.0) -> np.ndarray:
    """exp(t·M) by scaling and squaring with a truncated Taylor series."""
    a = np.asarray(m, dtype=float) * t
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    a = a / (2.0**squarings)
    result = np.eye(n)
    term = np.eye(n)
    for k in range(1, 60):
        term = term @ a / k
        result = result + term
        if np.linalg.norm(term, 1) < 1e-18 * np.linalg.norm(result, 1):
            break
    for _ in range(squarings):
        result = result @ result
    return result


# ---------------------------------------------------------------------------
# polynomials with linear-form coefficients


def _mono_add(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


@dataclass
class LinPoly:
    """Polynomial in `nvars` variables whose coefficients are linear forms.

    terms maps a monomial (exponent tuple) to a coefficient vector of length
    `nunknowns`; a vector v stands for Σₖ v[k]·uₖ.
    """

    nvars: int
    nunknowns: int
    terms: dict[Monomial, list[Fraction]] = field(default_factory=dict)

    @classmethod
    def unknown(cls, nvars: int, nunknowns: int, index: int,
                monomial: Monomial | None = None, coeff=1) -> "LinPoly":
        v = [Fraction(0)] * nunknowns
        v[index] = to_fraction(coeff)
        return cls(nvars, nunknowns, {monomial or (0,) * nvars: v})

    @classmethod
    def zero(cls, nvars: int, nunknowns: int) -> "LinPoly":
        return cls(nvars, nunknowns, {})

    def _combine(self, other: "LinPoly", sign: int) -> "LinPoly":
        out = {k: list(v) for k, v in self.terms.items()}
        for mono, vec in other.terms.items():
            cur = out.setdefault(mono, [Fraction(0)] * self.nunknowns)
            for k, c in enumerate(vec):
                cur[k] += sign * c
        return LinPoly(self.nvars, self.nunknowns, out)

    def __add__(self, other: "LinPoly") -> "LinPoly":
        return self._combine(other, 1)

    def __sub__(self, other: "LinPoly") -> "LinPoly":
        return self._combine(other, -1)

    def scale(self, c) -> "LinPoly":
        c = to_fraction(c)
        if c == 0:
            return LinPoly.zero(self.nvars, self.nunknowns)
        return LinPoly(self.nvars, self.nunknowns,
                       {m: [c * x for x in v] for m, v in self.terms.items()})

    def times(self, poly: dict[Monomial, Fraction]) -> "LinPoly":
        """Product with a numeric polynomial {monomial: coefficient}."""
        out = LinPoly.zero(self.nvars, self.nunknowns)
        for pm, pc in poly.items():
            if pc == 0:
                continue
            shifted = {_mono_add(m, pm): [to_fraction(pc) * x for x in v]
                       for m, v in self.terms.items()}
            out = out + LinPoly(self.nvars, self.nunknowns, shifted)
        return out

    def diff(self, var: int) -> "LinPoly":
        out: dict[Monomial, list[Fraction]] = {}
        for mono, vec in self.terms.items():
            e = mono[var]
            if e == 0:
                continue
            m = list(mono)
            m[var] -= 1
            out[tuple(m)] = [e * x for x in vec]
        return LinPoly(self.nvars, self.nunknowns, out)

    @property
    def degree(self) -> int:
        live = [sum(m) for m, v in self.terms.items() if any(v)]
        return max(live, default=0)


@dataclass
class PolySystem:
    """Polynomial identities (≡ 0 in every variable) linear in the unknowns."""

    nunknowns: int
    max_degree: int
    identities: list[LinPoly] = field(default_factory=list)

    def add(self, identity: LinPoly) -> None:
        self.identities.append(identity)


def match_coefficients(system: PolySystem) -> RationalMatrix:
    """One row per monomial coefficient per identity; nullspace = solutions."""
    rows: list[list[Fraction]] = []
    for ident in system.identities:
        if ident.degree > system.max_degree:
            raise DegreeOverflow(f"identity of degree {ident.degree} > {system.max_degree}")
        for mono in sorted(ident.terms):
            vec = ident.terms[mono]
            if any(vec):
                rows.append(list(vec))
    if not rows:
        return RationalMatrix.zeros(0, system.nunknowns)
    return RationalMatrix(tuple(tuple(r) for r in rows), system.nunknowns)


def monomials(nvars: int, max_degree: int) -> list[Monomial]:
    """All exponent tuples of total degree ≤ max_degree, graded order."""
    out = []
    for d in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for v in combo:
                e[v] += 1
            out.append(tuple(e))
    return out


def eval_poly(poly: dict[Monomial, Fraction], x: Iterable[float]) -> float:
    x = list(x)
    return sum(float(c) * math.prod(xi**e for xi, e in zip(x, m)) for m, c in poly.items())
