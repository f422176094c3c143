"""Group charts, étale representations and developing maps.

Covers the six transitive flat connections on ℝ² (additive chart) and the
left-symmetric products on the orientation-preserving affine group of the
line, chart (a, b) with a > 0 and (a, b)(c, d) = (ac, ad + b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import affine_core as ac
from .lsa import (
    LSA,
    FAMILY_NAMES,
    InfinitesimalAffineRep,
    catalog_lsa,
    lsa_from_etale,
)
from .numerics import DomainExit, fd_first, fd_second, rk4_batch
from .report import FAIL, VerificationReport, tolerance_report
from .stabilizer import DomainSpec, domain_spec

FD_STEP = 1e-4
FD_TOL = 1e-5
CLOSED_FORM_TOL = 1e-9


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True, eq=False)
class GroupChart:
    """Global coordinates on a Lie group.

    `frame(x)` has the left-invariant fields E₁..Eₙ as columns and
    `dframe_inv(x)[i]` is ∂ᵢ of the inverse frame matrix.
    """

    name: str
    dim: int
    identity: tuple
    mul: Callable
    contains: Callable
    low: tuple
    high: tuple
    frame: Callable
    dframe_inv: Callable
    gamma_scale: Callable | None = None

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(self.low, self.high, size=(count, self.dim))

    def contains_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        ok = np.isfinite(xs).all(axis=-1)
        if self.name == "aff-line":
            ok &= xs[..., 0] > 0
        return ok

    def inner(self, x, margin: float) -> bool:
        """x and its box of half-width `margin` lie in the chart."""
        x = np.asarray(x, dtype=float)
        for corner in np.ndindex(*(3,) * self.dim):
            if not self.contains(x + margin * (np.array(corner) - 1)):
                return False
        return True


def _additive_mul(g, h):
    return np.asarray(g, dtype=float) + np.asarray(h, dtype=float)


def _aff_line_mul(g, h):
    g, h = np.asarray(g, dtype=float), np.asarray(h, dtype=float)
    a, b = g[..., 0], g[..., 1]
    c, d = h[..., 0], h[..., 1]
    return np.stack(np.broadcast_arrays(a * c, a * d + b), axis=-1)


ADDITIVE_R2 = GroupChart(
    "additive-R2", 2, (0.0, 0.0), _additive_mul, lambda x: bool(np.all(np.isfinite(x))),
    (-2.0, -2.0), (2.0, 2.0),
    frame=lambda x: np.eye(2), dframe_inv=lambda x: np.zeros((2, 2, 2)),
)

AFF_LINE = GroupChart(
    "aff-line", 2, (1.0, 0.0), _aff_line_mul, lambda x: bool(x[0] > 0 and np.isfinite(x[1])),
    (0.1, -2.0), (4.0, 2.0),
    frame=lambda x: x[0] * np.eye(2),
    dframe_inv=lambda x: np.array([-np.eye(2) / x[0] ** 2, np.zeros((2, 2))]),
    gamma_scale=lambda x: 1.0 / np.asarray(x)[..., 0],
)


# ---------------------------------------------------------------------------
# connections


def christoffels_from_lsa(a: LSA) -> np.ndarray:
    """Constant Γ[k][i][j] = c[i][j][k]; valid when the left-invariant frame
    is the coordinate frame (additive chart)."""
    return np.transpose(a.c, (2, 0, 1)).copy()


@dataclass(frozen=True, eq=False)
class Connection:
    """Left-invariant connection ∇_{X⁺}Y⁺ = (X·Y)⁺ written in chart coordinates."""

    lsa: LSA
    chart: GroupChart

    @property
    def constant(self) -> bool:
        return self.chart is ADDITIVE_R2

    def gamma(self, x) -> np.ndarray:
        """Γ[k][i][j] at x:  ∇_{∂ᵢ}∂ⱼ = Σₖ Γ[k][i][j] ∂ₖ."""
        c = np.asarray(self.lsa.c, dtype=float)
        if self.constant:
            return np.transpose(c, (2, 0, 1))
        e = self.chart.frame(x)
        einv = np.linalg.inv(e)
        de = self.chart.dframe_inv(x)
        # ∂ⱼ = Σₐ einv[a][j] Eₐ, ∇_{E_b}E_a = Σ_c c[b][a][c] E_c
        first = np.einsum("iaj,ka->kij", de, e)
        second = np.einsum("aj,bi,bac,kc->kij", einv, einv, c, e)
        return first + second

    def gamma_fn(self):
        if self.constant:
            g = self.gamma(None)
            return lambda x: g
        scale = self.chart.gamma_scale
        if scale is not None:
            # Γ(x) = Γ(identity)·scale(x) for this chart
            g0 = self.gamma(np.array(self.chart.identity)) / scale(np.array(self.chart.identity))
            return lambda x: g0 * np.asarray(scale(x))[..., None, None, None]
        return self.gamma


# ---------------------------------------------------------------------------
# étale representations


@dataclass(frozen=True, eq=False)
class EtaleRep:
    name: str
    chart: GroupChart
    linear: Callable
    translation: Callable
    differential: InfinitesimalAffineRep
    variant: str = "original"
    note: str = ""

    def __call__(self, g) -> ac.AffineMap:
        return ac.AffineMap(self.linear(*g), self.translation(*g))


def _rot(b, sign=1):
    return np.array([[math.cos(b), -sign * math.sin(b)], [sign * math.sin(b), math.cos(b)]])


_Z = [[0, 0], [0, 0]]
_I = [[1, 0], [0, 1]]


def _diff(a1, v1, a2, v2, name):
    return InfinitesimalAffineRep((a1, a2), (v1, v2), name)


ETALE_REPS: dict[str, EtaleRep] = {r.name: r for r in [
    EtaleRep("rho1", ADDITIVE_R2, lambda a, b: np.eye(2), lambda a, b: np.array([a, b]),
             _diff(_Z, [1, 0], _Z, [0, 1], "d rho1")),
    EtaleRep("rho2", ADDITIVE_R2, lambda a, b: np.array([[1.0, b], [0.0, 1.0]]),
             lambda a, b: np.array([a + b * b / 2, b]),
             _diff(_Z, [1, 0], [[0, 1], [0, 0]], [0, 1], "d rho2")),
    EtaleRep("rho3", ADDITIVE_R2, lambda a, b: np.diag([1.0, math.exp(b)]),
             lambda a, b: np.array([a, 0.0]),
             _diff(_Z, [1, 0], [[0, 0], [0, 1]], [0, 0], "d rho3")),
    EtaleRep("rho4", ADDITIVE_R2, lambda a, b: math.exp(a) * np.array([[1.0, b], [0.0, 1.0]]),
             lambda a, b: np.zeros(2),
             _diff(_I, [0, 0], [[0, 1], [0, 0]], [0, 0], "d rho4"),
             note="original form; open orbit through (0,1) is the upper half-plane"),
    EtaleRep("rho4-corrected", ADDITIVE_R2, lambda a, b: math.exp(a) * np.array([[1.0, 0.0], [b, 1.0]]),
             lambda a, b: np.zeros(2),
             _diff(_I, [0, 0], [[0, 0], [1, 0]], [0, 0], "d rho4-corrected"),
             variant="corrected", note="coordinates swapped to match D4(x,y)=(e^x, y e^x)"),
    EtaleRep("rho5", ADDITIVE_R2, lambda a, b: np.diag([math.exp(a), math.exp(b)]),
             lambda a, b: np.zeros(2),
             _diff([[1, 0], [0, 0]], [0, 0], [[0, 0], [0, 1]], [0, 0], "d rho5")),
    EtaleRep("rho6", ADDITIVE_R2, lambda a, b: math.exp(a) * _rot(b, -1), lambda a, b: np.zeros(2),
             _diff(_I, [0, 0], [[0, 1], [-1, 0]], [0, 0], "d rho6"),
             note="original form; rotation block acts by -b"),
    EtaleRep("rho6-corrected", ADDITIVE_R2, lambda a, b: math.exp(a) * _rot(b, 1), lambda a, b: np.zeros(2),
             _diff(_I, [0, 0], [[0, -1], [1, 0]], [0, 0], "d rho6-corrected"),
             variant="corrected", note="rotation block transposed"),
]}


# ---------------------------------------------------------------------------
# developing maps


@dataclass(frozen=True, eq=False)
class DevelopingMap:
    name: str
    chart: GroupChart
    formula: Callable
    lsa_name: str
    alpha: Fraction | None = None
    image: str = ""
    stated_image: str = ""
    note: str = ""

    jac: Callable | None = None

    def __call__(self, x) -> np.ndarray:
        """D at a point (shape (n,)) or at a batch of points (shape (m, n))."""
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            parts = self.formula(*np.moveaxis(x, -1, 0))
        return np.stack(np.broadcast_arrays(*[np.asarray(p, dtype=float) for p in parts]), axis=-1)

    @property
    def lsa(self) -> LSA:
        return catalog_lsa(self.lsa_name, self.alpha)

    @property
    def connection(self) -> Connection:
        return Connection(self.lsa, self.chart)

    @property
    def image_spec(self) -> DomainSpec:
        return domain_spec(self.image)

    def jacobian(self, x, h: float = FD_STEP) -> np.ndarray:
        """Analytic Jacobian when catalogued, central differences otherwise."""
        if self.jac is not None:
            return np.array(self.jac(*np.asarray(x, dtype=float)), dtype=float)
        return np.column_stack([fd_first(self, x, i, h) for i in range(self.chart.dim)])


_exp = np.exp

PLANAR_MAPS: dict[str, DevelopingMap] = {d.name: d for d in [
    DevelopingMap("D1", ADDITIVE_R2, lambda x, y: (x, y), "P1", image="plane",
                  jac=lambda x, y: [[1, 0], [0, 1]]),
    DevelopingMap("D2", ADDITIVE_R2, lambda x, y: (x + y * y / 2, y), "P2", image="plane",
                  jac=lambda x, y: [[1, y], [0, 1]]),
    DevelopingMap("D3", ADDITIVE_R2, lambda x, y: (x, _exp(y)), "P3", image="upper-half-plane",
                  jac=lambda x, y: [[1, 0], [0, _exp(y)]]),
    DevelopingMap("D4", ADDITIVE_R2, lambda x, y: (_exp(x), y * _exp(x)), "P4",
                  image="orthant:1", stated_image="upper-half-plane",
                  note="image is the right half-plane; the stated upper half-plane is the "
                       "orbit of the original rho4 through (0,1)",
                  jac=lambda x, y: [[_exp(x), 0], [y * _exp(x), _exp(x)]]),
    DevelopingMap("D5", ADDITIVE_R2, lambda x, y: (_exp(x), _exp(y)), "P5", image="orthant:2",
                  jac=lambda x, y: [[_exp(x), 0], [0, _exp(y)]]),
    DevelopingMap("D6", ADDITIVE_R2, lambda x, y: (_exp(x) * np.cos(y), _exp(x) * np.sin(y)), "P6",
                  image="punctured-plane",
                  note="covering map onto the punctured plane, not injective",
                  jac=lambda x, y: [[_exp(x) * np.cos(y), -_exp(x) * np.sin(y)],
                                    [_exp(x) * np.sin(y), _exp(x) * np.cos(y)]]),
]}

# base point D(0) for each planar entry, exact, and the representation whose
# differential yields the planar product
_PLANAR_SOURCE = {
    "P1": ("rho1", (0, 0)), "P2": ("rho2", (0, 0)), "P3": ("rho3", (0, 1)),
    "P4": ("rho4-corrected", (1, 0)), "P5": ("rho5", (1, 1)), "P6": ("rho6-corrected", (1, 0)),
}

# developing map -> (original rep, corrected rep or None)
REP_PAIRS = {
    "D1": ("rho1", None), "D2": ("rho2", None), "D3": ("rho3", None),
    "D4": ("rho4", "rho4-corrected"), "D5": ("rho5", None), "D6": ("rho6", "rho6-corrected"),
}


def planar_base_point(name: str) -> tuple:
    return tuple(Fraction(v) for v in _PLANAR_SOURCE[name][1])


def planar_lsa(name: str) -> LSA:
    rep_name, base = _PLANAR_SOURCE[name]
    a = lsa_from_etale(ETALE_REPS[rep_name].differential, [Fraction(v) for v in base], name)
    return a


def _fam_map(name: str, alpha) -> DevelopingMap:
    al = Fraction(alpha)
    af = float(al)
    if name == "F1":
        if al == 0:
            return DevelopingMap("F1(0)", AFF_LINE, lambda x, y: (np.log(x), y), "F1", al, "plane")
        return DevelopingMap(f"F1({al})", AFF_LINE, lambda x, y: (x**af / af, y), "F1", al,
                             "orthant:1" if al > 0 else "left-half-plane",
                             stated_image="orthant:1")
    if al == 0:
        raise ValueError("F2 requires alpha != 0")
    return DevelopingMap(f"F2({al})", AFF_LINE, lambda x, y: (x**af / af, x**af * y), "F2", al,
                         "orthant:1" if al > 0 else "left-half-plane", stated_image="orthant:1")


EXCEPTIONAL_MAPS: dict[str, DevelopingMap] = {d.name: d for d in [
    DevelopingMap("E1", AFF_LINE, lambda x, y: (x, 1 + x + y + x * np.log(x)), "E1", image="orthant:1"),
    DevelopingMap("E2", AFF_LINE, lambda x, y: (-1 / x, 1 / x + y / x + np.log(x) - 1), "E2",
                  image="left-half-plane", stated_image="orthant:1"),
    DevelopingMap("E3", AFF_LINE, lambda x, y: ((x * x + y * y - 1) / 2, y), "E3", image="parabola"),
    DevelopingMap("E4", AFF_LINE, lambda x, y: ((x * x - y * y - 1) / 2, y), "E4",
                  image="parabola-reflected", stated_image="parabola"),
]}

FAMILY_ALPHAS = (Fraction(-2), Fraction(-1), Fraction(1), Fraction(2), Fraction(3))


def developing_map(name: str, alpha=None) -> DevelopingMap:
    """Look up by map name (D1..D6, E1..E4) or LSA name (P1..P6, F1, F2)."""
    if name in PLANAR_MAPS:
        return PLANAR_MAPS[name]
    if name in EXCEPTIONAL_MAPS:
        return EXCEPTIONAL_MAPS[name]
    if name.startswith("P") and f"D{name[1:]}" in PLANAR_MAPS:
        return PLANAR_MAPS[f"D{name[1:]}"]
    if name in FAMILY_NAMES:
        if alpha is None:
            raise ValueError(f"{name} needs alpha")
        return _fam_map(name, alpha)
    for fam in FAMILY_NAMES:
        if name.startswith(fam + "(") and name.endswith(")"):
            return _fam_map(fam, Fraction(name[len(fam) + 1:-1]))
    raise KeyError(f"unknown developing map {name!r}")


def catalog_maps() -> list[DevelopingMap]:
    """Every developing map used by the acceptance suite, stable order."""
    out = list(PLANAR_MAPS.values())
    out += [_fam_map(f, a) for f in FAMILY_NAMES for a in FAMILY_ALPHAS]
    out.append(_fam_map("F1", 0))
    out += list(EXCEPTIONAL_MAPS.values())
    return out


# ---------------------------------------------------------------------------
# equivariance


@dataclass(frozen=True)
class InducedMap:
    map: ac.AffineMap
    residual: float


def _chart_frame(chart: GroupChart) -> list[np.ndarray]:
    e = np.array(chart.identity, dtype=float)
    return [e] + [e + 0.5 * np.eye(chart.dim)[k] for k in range(chart.dim)]


def induced_rep(d: DevelopingMap, g, samples: int = 50, seed: int = 0) -> InducedMap:
    """The affine T with D(g·h) = T(D(h)), fitted on a frame near the identity."""
    chart = d.chart
    if not chart.contains(np.asarray(g, dtype=float)):
        raise ValueError(f"{g} outside chart {chart.name}")
    hs = np.array(_chart_frame(chart))
    try:
        frame = ac.AffineFrame(tuple(map(tuple, d(hs).tolist())))
    except ValueError as exc:
        raise ValueError(f"{d.name} is not immersive near the identity") from exc
    t = ac.from_frame_images(frame, d(chart.mul(g, hs)).tolist())
    rng = np.random.default_rng(seed)
    h = chart.sample(rng, samples)
    res = float(np.max(np.abs(d(chart.mul(g, h)) - ac.apply_many(t, d(h))))) if samples else 0.0
    return InducedMap(t, res)


def _rep_apply(rho: EtaleRep, g, y) -> np.ndarray:
    return np.asarray(rho.linear(*g), dtype=float) @ y + np.asarray(rho.translation(*g), dtype=float)


def verify_equivariance(d: DevelopingMap, rho: EtaleRep, samples: int = 1000,
                        tol: float = CLOSED_FORM_TOL, seed: int = 0) -> VerificationReport:
    """max ‖D(g·h) − ρ(g)(D(h))‖ over seeded pairs (g, h)."""
    if d.chart is not rho.chart:
        raise ValueError("developing map and representation live on different charts")
    chart = d.chart
    rng = np.random.default_rng(seed)
    gs, hs = chart.sample(rng, samples), chart.sample(rng, samples)
    ghs = chart.mul(gs, hs)
    inside = chart.contains_many(ghs)
    skipped = int(np.count_nonzero(~inside))
    lhs, dh = d(ghs), d(hs)
    res = 0.0
    for k in np.flatnonzero(inside):
        res = max(res, float(np.max(np.abs(lhs[k] - _rep_apply(rho, gs[k], dh[k])))))
    note = f"{rho.variant} variant"
    if rho.note:
        note += f"; {rho.note}"
    if skipped:
        note += f"; {skipped} samples outside chart skipped"
    return tolerance_report(f"equivariance:{d.name}/{rho.name}", res, tol,
                            samples=samples, seed=seed, note=note)


def homomorphism_residual(rho: EtaleRep, samples: int = 500, seed: int = 0) -> float:
    chart = rho.chart
    rng = np.random.default_rng(seed)
    res = 0.0
    for g, h in zip(chart.sample(rng, samples), chart.sample(rng, samples)):
        res = max(res, ac.distance(rho(chart.mul(g, h)), ac.compose(rho(g), rho(h))))
    return res


def image_membership(d: DevelopingMap, samples: int = 1000, seed: int = 0) -> VerificationReport:
    """Fraction of sampled D(x) outside the image domain (0 to pass)."""
    spec = d.image_spec
    rng = np.random.default_rng(seed)
    misses = int(np.count_nonzero(~spec.contains_many(d(d.chart.sample(rng, samples)))))
    note = f"image {d.image}"
    if d.stated_image and d.stated_image != d.image:
        note += f"; stated image {d.stated_image} differs"
    if d.note:
        note += f"; {d.note}"
    return tolerance_report(f"image:{d.name}", misses / samples, 0.0, samples=samples,
                            seed=seed, note=note)


def immersion_jacobian_min(d: DevelopingMap, samples: int = 1000, seed: int = 0) -> float:
    """Smallest |det J| over seeded samples."""
    rng = np.random.default_rng(seed)
    return min(abs(float(np.linalg.det(d.jacobian(x)))) for x in d.chart.sample(rng, samples))


# ---------------------------------------------------------------------------
# affine immersion and geodesics


def _gamma_callable(gamma) -> Callable:
    """Normalise Γ to a callable accepting (n,) or (m, n) points."""
    if isinstance(gamma, Connection):
        return gamma.gamma_fn()
    if callable(gamma):
        return gamma
    g = np.asarray(gamma, dtype=float)
    return lambda x: g


def immersion_residual(d: DevelopingMap, gamma, point, h: float = FD_STEP) -> float:
    """max |∂ᵢ∂ⱼDᵏ − Σₗ Γˡᵢⱼ ∂ₗDᵏ| relative to the size of the derivatives."""
    g = _gamma_callable(gamma)(np.asarray(point, dtype=float))
    n = d.chart.dim
    first = [fd_first(d, point, l, h) for l in range(n)]
    res, scale = 0.0, 1.0
    for i in range(n):
        for j in range(n):
            second = fd_second(d, point, i, j, h)
            rhs = sum(g[l, i, j] * first[l] for l in range(n))
            res = max(res, float(np.max(np.abs(second - rhs))))
            scale = max(scale, float(np.max(np.abs(second))))
    scale = max(scale, max(float(np.max(np.abs(f))) for f in first))
    return res / scale


def check_affine_immersion(d: DevelopingMap, gamma, point, h: float = FD_STEP,
                           tol: float = FD_TOL) -> VerificationReport:
    check = f"immersion:{d.name}"
    if not d.chart.inner(point, 2 * h):
        raise ValueError(f"{point} is within 2h of the chart boundary")
    return tolerance_report(check, immersion_residual(d, gamma, point, h), tol,
                            note=f"at {np.round(np.asarray(point, float), 6).tolist()}, h={h:g}")


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    t: np.ndarray
    x: np.ndarray
    u: np.ndarray


def _batch_inside(inside: Callable | None, chart_many: Callable | None):
    if chart_many is not None:
        return chart_many
    if inside is None:
        return None
    return lambda xs: np.array([bool(inside(x)) for x in xs])


def geodesic_batch(gamma, x0s, u0s, t_end: float, steps: int = 1000,
                   inside: Callable | None = None, max_speed: float = 1e8,
                   inside_many: Callable | None = None):
    """Integrate a batch of geodesics at once.

    Returns the times, positions (steps+1, m, n), velocities and the exit
    time of each row (inf when it stayed inside up to t_end).
    """
    g = _gamma_callable(gamma)
    x0s = np.array(x0s, dtype=float, ndmin=2)
    u0s = np.array(u0s, dtype=float, ndmin=2)
    n = x0s.shape[1]
    bounded = _batch_inside(inside, inside_many)

    def rhs(t, s):
        x, u = s[:, :n], s[:, n:]
        acc = -np.einsum("...kij,...i,...j->...k", g(x), u, u)
        return np.concatenate([u, acc], axis=1)

    def ok(s):
        good = np.abs(s[:, n:]).max(axis=1) <= max_speed
        if bounded is not None:
            good &= bounded(s[:, :n])
        return good

    ts, states, exit_t = rk4_batch(rhs, np.hstack([x0s, u0s]), t_end, steps, ok)
    return ts, states[:, :, :n], states[:, :, n:], exit_t


def geodesic(gamma, x0, u0, t_end: float, steps: int = 1000,
             inside: Callable | None = None, max_speed: float = 1e8) -> GeodesicPath:
    """Integrate ẍᵏ + Γᵏᵢⱼ ẋⁱ ẋʲ = 0 with RK4.

    `gamma` is a constant Γ[k][i][j] array, a callable x ↦ Γ(x), or a
    Connection. Leaving `inside` or exceeding `max_speed` raises DomainExit.
    """
    ts, xs, us, exit_t = geodesic_batch(gamma, [x0], [u0], t_end, steps, inside, max_speed)
    if np.isfinite(exit_t[0]):
        raise DomainExit(float(exit_t[0]), np.concatenate([xs[-1, 0], us[-1, 0]]))
    return GeodesicPath(ts, xs[:, 0], us[:, 0])


def exp_map(gamma, p, v, steps: int = 1000, inside: Callable | None = None,
            rtol: float = 1e-6) -> np.ndarray:
    """γ(1) for the geodesic launched at (p, v).

    The end point is recomputed at twice the step count; a mismatch above
    `rtol` means the geodesic blows up before t = 1 and raises DomainExit.
    """
    coarse = geodesic(gamma, p, v, 1.0, steps, inside).x[-1]
    fine = geodesic(gamma, p, v, 1.0, 2 * steps, inside).x[-1]
    if np.max(np.abs(coarse - fine)) > rtol * (1 + np.max(np.abs(fine))):
        raise DomainExit(1.0, fine)
    return fine


def develop_path(d: DevelopingMap, path: GeodesicPath) -> np.ndarray:
    return d(path.x)


def line_residual(developed: np.ndarray, dt: float) -> float:
    """Max second difference / dt², relative to max first difference / dt."""
    acc = (developed[2:] - 2 * developed[1:-1] + developed[:-2]) / dt**2
    vel = (developed[1:] - developed[:-1]) / dt
    return float(np.max(np.abs(acc))) / max(1.0, float(np.max(np.abs(vel))))


def check_develops_to_line(d: DevelopingMap, gamma, x0, u0, t_end: float = 1.0,
                           steps: int = 1000, grid: int = 50,
                           tol: float = FD_TOL) -> VerificationReport:
    """D∘γ must be an affinely parametrised straight line."""
    path = geodesic(gamma, x0, u0, t_end, steps, inside=d.chart.contains)
    return tolerance_report(f"develops-to-line:{d.name}", develops_to_line_residual(d, path, grid),
                            tol, note=f"x0={np.round(x0, 6).tolist()} u0={np.round(u0, 6).tolist()}")


def sample_geodesics(d: DevelopingMap, count: int, seed: int, speed: float = 0.5,
                     t_end: float = 1.0, steps: int = 1000,
                     max_tries: int = 1000) -> tuple[list, int]:
    """Seeded initial conditions whose geodesic stays in the chart up to t_end.

    Conditions are drawn in rounds and integrated together; the first
    `count` survivors in draw order are kept. Returns the accepted
    ((x0, u0), path) pairs and the number of redrawn conditions.
    """
    rng = np.random.default_rng(seed)
    gamma = d.connection.gamma_fn()
    accepted, rejected, tried = [], 0, 0
    while len(accepted) < count and tried < max_tries:
        batch = min(2 * count, max_tries - tried)
        x0s = d.chart.sample(rng, batch)
        u0s = rng.uniform(-speed, speed, size=(batch, d.chart.dim))
        ts, xs, us, exit_t = geodesic_batch(gamma, x0s, u0s, t_end, steps,
                                            inside_many=d.chart.contains_many)
        for k in range(batch):
            if len(accepted) == count:
                break
            tried += 1
            if np.isfinite(exit_t[k]):
                rejected += 1
                continue
            accepted.append(((x0s[k], u0s[k]), GeodesicPath(ts, xs[:, k], us[:, k])))
    return accepted, rejected


def develops_to_line_residual(d: DevelopingMap, path: GeodesicPath, grid: int = 50) -> float:
    stride = max(1, (len(path.t) - 1) // grid)
    pts = d(path.x[::stride])
    return line_residual(pts, path.t[stride] - path.t[0])


def geodesic_reports(d: DevelopingMap, count: int = 10, seed: int = 0,
                     tol: float = FD_TOL) -> list[VerificationReport]:
    runs, rejected = sample_geodesics(d, count, seed)
    residuals = [develops_to_line_residual(d, path) for _, path in runs]
    worst = max(residuals, default=math.inf)
    ok = len(runs) == count and worst <= tol
    return [VerificationReport(f"geodesics:{d.name}", "pass" if ok else FAIL, worst, tol,
                               count, seed, note=f"{rejected} draws left the chart and were redrawn")]


def immersion_reports(d: DevelopingMap, points: int = 10, seed: int = 0,
                      tol: float = FD_TOL) -> VerificationReport:
    rng = np.random.default_rng(seed)
    low = np.maximum(np.asarray(d.chart.low), 0.5) if d.chart is AFF_LINE else np.asarray(d.chart.low)
    pts = rng.uniform(low, d.chart.high, size=(points, d.chart.dim))
    conn = d.connection
    worst = max(immersion_residual(d, conn, p) for p in pts)
    return tolerance_report(f"immersion:{d.name}", worst, tol, samples=points, seed=seed)


def devmap_reports(d: DevelopingMap, samples: int = 1000, seed: int = 0,
                   tol: float = CLOSED_FORM_TOL, fd_tol: float = FD_TOL) -> list[VerificationReport]:
    """Equivariance (where a representation is catalogued), image membership,
    immersion and geodesic development for one developing map."""
    out: list[VerificationReport] = []
    if d.name in REP_PAIRS:
        for rep_name in REP_PAIRS[d.name]:
            if rep_name:
                out.append(verify_equivariance(d, ETALE_REPS[rep_name], samples, tol, seed))
    else:
        out.append(induced_equivariance(d, samples=min(samples, 50), seed=seed))
    out.append(image_membership(d, samples, seed))
    out.append(immersion_reports(d, seed=seed, tol=fd_tol))
    out.extend(geodesic_reports(d, seed=seed, tol=fd_tol))
    return out


def induced_equivariance(d: DevelopingMap, samples: int = 50, seed: int = 0,
                         tol: float = 1e-8) -> VerificationReport:
    """induced_rep(g·h) = induced_rep(g)∘induced_rep(h) and frame-fit residuals."""
    chart = d.chart
    rng = np.random.default_rng(seed)
    res = 0.0
    for g, h in zip(chart.sample(rng, samples), chart.sample(rng, samples)):
        tg, th = induced_rep(d, g, samples=20), induced_rep(d, h, samples=20)
        tgh = induced_rep(d, chart.mul(g, h), samples=20)
        scale = max(1.0, float(np.max(np.abs(tgh.map.as_float().matrix()))))
        res = max(res, tg.residual / scale, th.residual / scale,
                  ac.distance(tgh.map, ac.compose(tg.map, th.map)) / scale)
    return tolerance_report(f"induced-rep:{d.name}", res, tol, samples=samples, seed=seed,
                            note="relative to the size of the induced map")
