"""Computational geometry in the Poincare half-space model of H^d.

Points live in R^(d-1) x (0, inf); the last coordinate is the height.
Distances use the explicit 2*log formula; geodesics are boundary-orthogonal
circles and vertical lines.  Half-spaces are stored by their boundary
representation (a boundary-orthogonal hemisphere or a vertical hyperplane)
plus a side flag, so membership tests never go through the defining pair.

Everything is float64 with a global EQ_TOL = 1e-9 for equality predicates;
values are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

EQ_TOL = 1e-9
MIN_HEIGHT = 1e-300


class GeometryError(ValueError):
    pass


class Point:
    """A point of H^d, coords = (x_1, ..., x_{d-1}, height)."""

    __slots__ = ("coords",)

    def __init__(self, coords: Sequence[float]):
        c = np.atleast_1d(np.asarray(coords, dtype=float))
        if c.ndim != 1 or c.size < 1:
            raise GeometryError("point coords must be a flat sequence of length >= 1")
        if not np.all(np.isfinite(c)):
            raise GeometryError("point coords must be finite")
        if c[-1] < MIN_HEIGHT:
            raise GeometryError("point height underflows (x_d < 1e-300)")
        c.setflags(write=False)
        self.coords = c

    @property
    def dim(self) -> int:
        return self.coords.size

    @property
    def height(self) -> float:
        return float(self.coords[-1])

    @property
    def horizontal(self) -> np.ndarray:
        return self.coords[:-1]

    def __repr__(self):
        return "Point(%s)" % (list(self.coords),)

    def __eq__(self, other):
        return isinstance(other, Point) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())

    def to_json(self) -> dict:
        return {"coords": [float(v) for v in self.coords]}

    @staticmethod
    def from_json(obj: dict) -> "Point":
        return Point(obj["coords"])


class IdealPoint:
    """Boundary point of H^d: either a point of R^(d-1) or infinity."""

    __slots__ = ("coords", "is_infinity")

    def __init__(self, coords=None, infinity: bool = False):
        if infinity:
            self.coords = None
            self.is_infinity = True
        else:
            c = np.atleast_1d(np.asarray(coords, dtype=float))
            if not np.all(np.isfinite(c)):
                raise GeometryError("finite ideal point must have finite coords")
            c.setflags(write=False)
            self.coords = c
            self.is_infinity = False

    @staticmethod
    def infinity() -> "IdealPoint":
        return IdealPoint(infinity=True)

    def __repr__(self):
        return "IdealPoint(inf)" if self.is_infinity else "IdealPoint(%s)" % (list(self.coords),)

    def __eq__(self, other):
        if not isinstance(other, IdealPoint):
            return False
        if self.is_infinity or other.is_infinity:
            return self.is_infinity and other.is_infinity
        return np.array_equal(self.coords, other.coords)


def _check_same_dim(p: Point, q: Point):
    if p.dim != q.dim:
        raise GeometryError("dimension mismatch: %d vs %d" % (p.dim, q.dim))


def distance(p: Point, q: Point) -> float:
    """Hyperbolic distance, 2*log((s_minus + s_plus) / (2 sqrt(y1 y2)))."""
    _check_same_dim(p, q)
    dx = float(np.linalg.norm(p.horizontal - q.horizontal))
    y1, y2 = p.height, q.height
    s_minus = math.hypot(dx, y1 - y2)
    s_plus = math.hypot(dx, y1 + y2)
    return 2.0 * math.log((s_minus + s_plus) / (2.0 * math.sqrt(y1 * y2)))


def distance_arcosh(p: Point, q: Point) -> float:
    """Independent twin of `distance` via cosh d = 1 + |p-q|^2/(2 y1 y2)."""
    _check_same_dim(p, q)
    d2 = float(np.sum((p.coords - q.coords) ** 2))
    return math.acosh(1.0 + d2 / (2.0 * p.height * q.height))


def _pairwise_distance_matrix(coords: np.ndarray) -> np.ndarray:
    """All-pairs hyperbolic distances for an (n, d) coordinate array."""
    diff2 = np.sum((coords[:, None, :] - coords[None, :, :]) ** 2, axis=-1)
    hh = coords[:, -1][:, None] * coords[None, :, -1]
    arg = 1.0 + diff2 / (2.0 * hh)
    return np.arccosh(np.maximum(arg, 1.0))


def _geodesic_plane_frame(p: Point, target) -> tuple[np.ndarray, float, float]:
    """Reduce p and target to the 2-plane spanned by the vertical direction and
    the horizontal segment between them.  Returns (unit horizontal direction u,
    target horizontal offset w, target height) with p at offset 0."""
    if isinstance(target, IdealPoint):
        if target.is_infinity:
            raise GeometryError("infinite target has no plane frame")
        tq = target.coords
        th = 0.0
    else:
        tq = target.horizontal
        th = target.height
    delta = tq - p.horizontal
    w = float(np.linalg.norm(delta))
    if w < 1e-14 * max(1.0, p.height):
        u = np.zeros(p.dim - 1)
        return u, 0.0, th
    return delta / w, w, th


def geodesic_point(p: Point, target, t: float) -> Point:
    """The point at hyperbolic distance t from p along the geodesic toward target."""
    if t < 0:
        raise GeometryError("t must be nonnegative")
    if isinstance(target, IdealPoint) and target.is_infinity:
        return Point(np.concatenate([p.horizontal, [p.height * math.exp(t)]]))
    if isinstance(target, Point):
        _check_same_dim(p, target)
        if np.array_equal(p.coords, target.coords):
            raise GeometryError("target must be distinct from p")
    u, w, th = _geodesic_plane_frame(p, target)
    if w == 0.0:
        # vertical geodesic: up toward a higher point, down toward lower/ideal
        if isinstance(target, IdealPoint):
            sgn = -1.0
        else:
            sgn = 1.0 if target.height > p.height else -1.0
        return Point(np.concatenate([p.horizontal, [p.height * math.exp(sgn * t)]]))
    # circle orthogonal to the boundary in plane coords: p at (0, y), target (w, th)
    y = p.height
    if isinstance(target, IdealPoint):
        m = (w * w - y * y) / (2.0 * w)
    else:
        m = (w * w + th * th - y * y) / (2.0 * w)
    radius = math.hypot(m, y)
    # arc-length parameter s(theta) = log tan(theta/2); theta from positive axis
    theta_p = math.atan2(y, -m)
    if isinstance(target, IdealPoint):
        theta_t = 0.0 if w > m else math.pi  # endpoint at angle 0 is (m + R, 0)
        toward = -1.0 if theta_t < theta_p else 1.0
    else:
        theta_t = math.atan2(th, w - m)
        toward = 1.0 if theta_t > theta_p else -1.0
    # s decreases as theta decreases; moving distance t in direction `toward`
    tan_half = math.tan(theta_p / 2.0) * math.exp(toward * t)
    theta_new = 2.0 * math.atan(tan_half)
    xi = m + radius * math.cos(theta_new)
    eta = radius * math.sin(theta_new)
    return Point(np.concatenate([p.horizontal + xi * u, [eta]]))


class HalfSpace:
    """A half-space of H^d bounded by a boundary-orthogonal hyperplane.

    kind = "hemisphere": boundary is the sphere of Euclidean radius `radius`
    centred at (center, 0); side = +1 keeps the inside of the sphere, -1 the
    outside.  kind = "vertical": boundary is {x : n . x' = offset}; the kept
    side is n . x' >= offset.  The defining pair (a, b), when present, is only
    cached for cross-validation; the geometric representation is authoritative.
    """

    __slots__ = ("kind", "center", "radius", "normal", "offset", "side", "pair")

    def __init__(self, kind, center=None, radius=None, normal=None, offset=None,
                 side=1, pair=None):
        self.kind = kind
        self.pair = pair
        if kind == "hemisphere":
            self.center = np.asarray(center, dtype=float)
            self.radius = float(radius)
            if self.radius <= 0:
                raise GeometryError("hemisphere radius must be positive")
            self.normal = None
            self.offset = None
            self.side = int(side)
            if self.side not in (1, -1):
                raise GeometryError("side must be +1 (inside) or -1 (outside)")
        elif kind == "vertical":
            n = np.asarray(normal, dtype=float)
            norm = np.linalg.norm(n)
            if norm == 0:
                raise GeometryError("vertical normal must be nonzero")
            if side == -1:
                n, offset = -n, -offset
            self.normal = n / norm
            self.offset = float(offset) / norm
            self.center = None
            self.radius = None
            self.side = 1
        else:
            raise GeometryError("unknown half-space kind %r" % (kind,))
        for arr in (self.center, self.normal):
            if arr is not None:
                arr.setflags(write=False)

    def signed(self, x: Point) -> float:
        """Positive inside the half-space, zero on the boundary."""
        return self._signed_arr(x.coords[None, :])[0]

    def _signed_arr(self, coords: np.ndarray) -> np.ndarray:
        if self.kind == "hemisphere":
            c = np.concatenate([self.center, [0.0]])
            dist = np.linalg.norm(coords - c[None, :], axis=1)
            return self.side * (self.radius - dist)
        return coords[:, :-1] @ self.normal - self.offset

    def contains(self, x: Point, tol: float = EQ_TOL) -> bool:
        return bool(self.signed(x) >= -tol)

    def contains_coords(self, coords: np.ndarray, tol: float = EQ_TOL) -> np.ndarray:
        return self._signed_arr(coords) >= -tol

    def boundary_distance(self, x: Point) -> float:
        """Hyperbolic distance from x to the boundary hyperplane."""
        return float(self._boundary_distance_arr(x.coords[None, :])[0])

    def _boundary_distance_arr(self, coords: np.ndarray) -> np.ndarray:
        h = coords[:, -1]
        if self.kind == "hemisphere":
            c = np.concatenate([self.center, [0.0]])
            u2 = np.sum((coords - c[None, :]) ** 2, axis=1)
            s = np.abs(u2 - self.radius ** 2) / (2.0 * self.radius * h)
        else:
            t = np.abs(coords[:, :-1] @ self.normal - self.offset)
            s = t / h
        return np.arcsinh(s)

    def nearest_boundary_point(self, x: Point) -> Point:
        """The point of the boundary hyperplane closest to x."""
        if self.kind == "vertical":
            t = float(x.horizontal @ self.normal - self.offset)
            foot = x.horizontal - t * self.normal
            return Point(np.concatenate([foot, [math.hypot(x.height, t)]]))
        c = self.center
        v = x.horizontal - c
        vn = float(np.linalg.norm(v))
        if vn < 1e-14 * self.radius:
            return Point(np.concatenate([c, [self.radius]]))
        u = v / vn
        # 2-plane coords (xi along u, eta vertical), boundary = circle radius r0
        r0 = self.radius
        z = complex(vn, x.height)
        wm = (z - r0) / (z + r0)  # Moebius sending the circle to the vertical axis
        w_near = complex(0.0, abs(wm))
        z_near = r0 * (1 + w_near) / (1 - w_near)
        return Point(np.concatenate([c + z_near.real * u, [z_near.imag]]))


def halfspace(a: Point, b: Point) -> HalfSpace:
    """H(a, b) = {x : d(x, a) <= d(x, b)}, bounded by the perpendicular bisector."""
    _check_same_dim(a, b)
    if np.array_equal(a.coords, b.coords):
        raise GeometryError("half-space needs distinct defining points")
    ad, bd = a.height, b.height
    ca, cb = a.coords, b.coords
    if abs(ad - bd) <= 1e-14 * max(ad, bd):
        n = a.horizontal - b.horizontal
        offset = (np.sum(ca ** 2) - np.sum(cb ** 2)) / 2.0
        hs = HalfSpace("vertical", normal=n, offset=offset, pair=(a, b))
    else:
        # bisector: bd |x-a|^2 = ad |x-b|^2 reduces to a sphere centred on the boundary
        centre_full = (bd * ca - ad * cb) / (bd - ad)
        k_const = (bd * np.sum(ca ** 2) - ad * np.sum(cb ** 2)) / (bd - ad)
        r2 = float(np.sum(centre_full ** 2) - k_const)
        if r2 <= 0:
            raise GeometryError("degenerate bisector (numerically coincident points)")
        centre = centre_full[:-1]
        side = 1 if np.linalg.norm(ca - np.concatenate([centre, [0.0]])) <= math.sqrt(r2) else -1
        hs = HalfSpace("hemisphere", center=centre, radius=math.sqrt(r2), side=side, pair=(a, b))
    return hs


def distance_to_halfspace(x: Point, H: HalfSpace) -> float:
    """0 inside H, otherwise the hyperbolic distance to the boundary hyperplane."""
    if H.contains(x, tol=0.0):
        return 0.0
    return H.boundary_distance(x)


def distance_to_halfspace_sampled(x: Point, H: HalfSpace, n_samples: int = 10000) -> float:
    """Sampled-minimisation oracle for `distance_to_halfspace` (2-d boundaries).

    Samples the boundary hyperplane densely, takes the best point, and
    refines with golden-section search on the boundary parameter.
    """
    if H.contains(x, tol=0.0):
        return 0.0
    if x.dim != 2:
        raise GeometryError("sampled oracle implemented for H^2 only")

    if H.kind == "hemisphere":
        def bpoint(th):
            return Point([H.center[0] + H.radius * math.cos(th), H.radius * math.sin(th)])
        lo, hi = 1e-9, math.pi - 1e-9
    else:
        # vertical line x' = offset in H^2: parametrise by log-height
        def bpoint(s):
            return Point([H.offset * H.normal[0], math.exp(s)])
        lo, hi = -25.0, 25.0

    grid = np.linspace(lo, hi, n_samples)
    vals = [distance(x, bpoint(g)) for g in grid]
    i = int(np.argmin(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, n_samples - 1)]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = distance(x, bpoint(c)), distance(x, bpoint(d))
    for _ in range(80):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = distance(x, bpoint(c))
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = distance(x, bpoint(d))
    return min(fc, fd)


def ball_exterior_halfspace(x: Point, r: float) -> HalfSpace:
    """Smallest half-space containing H^d minus the Euclidean ball B(x, r x_d).

    Represented by the boundary-orthogonal sphere with highest point
    (x', sqrt(r^2-1) x_d); for r >= sqrt(2) the distance from x to the result
    is log sqrt(r^2 - 1).
    """
    if not r > 1.0:
        raise GeometryError("ball_exterior_halfspace needs r > 1")
    radius = math.sqrt(r * r - 1.0) * x.height
    return HalfSpace("hemisphere", center=np.array(x.horizontal), radius=radius, side=-1)


def ball_covering_halfspace(y: Sequence[float], rho: float) -> HalfSpace:
    """Smallest half-space containing B(y, rho) intersected with H^d.

    y may sit on the model boundary (y_d >= 0); the result is the inside of
    the boundary-orthogonal sphere with highest point (y', y_d + rho).
    """
    if rho <= 0:
        raise GeometryError("ball_covering_halfspace needs rho > 0")
    yc = np.asarray(y, dtype=float)
    if yc[-1] < 0:
        raise GeometryError("centre must have y_d >= 0")
    return HalfSpace("hemisphere", center=yc[:-1].copy(), radius=float(yc[-1] + rho), side=1)


def doubling_halfspace(x: Point, z: Point) -> HalfSpace:
    """H(y, x) for the point y on the ray from x through z with d(x,y) = 2 d(x,z).

    The bisector passes through z, so d(x, result) = d(x, z).
    """
    _check_same_dim(x, z)
    if np.array_equal(x.coords, z.coords):
        raise GeometryError("x and z must be distinct")
    y = geodesic_point(x, z, 2.0 * distance(x, z))
    return halfspace(y, x)


def halfspace_enlarged_toward(x: Point, H: HalfSpace, pad: float = 1.0) -> HalfSpace:
    """A half-space containing the closed pad-neighbourhood of H, built on the
    axis from x through the nearest boundary point, with
    d(x, result) = d(x, H) - 2*pad.  Requires d(x, H) > 2*pad."""
    D = distance_to_halfspace(x, H)
    if D <= 2.0 * pad:
        raise GeometryError("x too close to H for enlargement (d=%g, pad=%g)" % (D, pad))
    w = H.nearest_boundary_point(x)
    y = geodesic_point(x, w, 2.0 * (D - 2.0 * pad))
    return halfspace(y, x)


# ---------------------------------------------------------------------------
# isometries


class _Translation:
    def __init__(self, v):
        self.v = np.asarray(v, dtype=float)

    def apply(self, coords):
        out = coords.copy()
        out[:-1] += self.v
        return out

    def apply_ideal(self, pt: IdealPoint):
        if pt.is_infinity:
            return pt
        return IdealPoint(pt.coords + self.v)


class _Dilation:
    def __init__(self, lam, center=None):
        if lam <= 0:
            raise GeometryError("dilation factor must be positive")
        self.lam = float(lam)
        self.center = None if center is None else np.asarray(center, dtype=float)

    def apply(self, coords):
        out = coords.copy()
        if self.center is not None:
            out[:-1] -= self.center
        out *= self.lam
        if self.center is not None:
            out[:-1] += self.center
        return out

    def apply_ideal(self, pt: IdealPoint):
        if pt.is_infinity:
            return pt
        c = pt.coords if self.center is None else pt.coords - self.center
        c = self.lam * c
        if self.center is not None:
            c = c + self.center
        return IdealPoint(c)


class _Orthogonal:
    def __init__(self, Q):
        Q = np.asarray(Q, dtype=float)
        if not np.allclose(Q @ Q.T, np.eye(Q.shape[0]), atol=1e-12):
            raise GeometryError("orthogonal map must satisfy Q Q^T = I")
        self.Q = Q

    def apply(self, coords):
        out = coords.copy()
        out[:-1] = self.Q @ out[:-1]
        return out

    def apply_ideal(self, pt: IdealPoint):
        if pt.is_infinity:
            return pt
        return IdealPoint(self.Q @ pt.coords)


class _Inversion:
    """Inversion through the sphere of radius r centred at a boundary point."""

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise GeometryError("inversion radius must be positive")

    def apply(self, coords):
        c = np.concatenate([self.center, [0.0]])
        v = coords - c
        n2 = float(np.sum(v * v))
        if n2 == 0.0:
            return None  # maps to infinity
        return c + (self.radius ** 2 / n2) * v

    def apply_ideal(self, pt: IdealPoint):
        if pt.is_infinity:
            return IdealPoint(self.center)
        v = pt.coords - self.center
        n2 = float(np.sum(v * v))
        if n2 == 0.0:
            return IdealPoint.infinity()
        return IdealPoint(self.center + (self.radius ** 2 / n2) * v)


class Isometry:
    """Composition of primitive model isometries, applied left to right."""

    def __init__(self, ops: Iterable = ()):
        self.ops = list(ops)

    @staticmethod
    def identity() -> "Isometry":
        return Isometry([])

    @staticmethod
    def translation(v) -> "Isometry":
        return Isometry([_Translation(v)])

    @staticmethod
    def dilation(lam, center=None) -> "Isometry":
        return Isometry([_Dilation(lam, center)])

    @staticmethod
    def orthogonal(Q) -> "Isometry":
        return Isometry([_Orthogonal(Q)])

    @staticmethod
    def inversion(center, radius) -> "Isometry":
        return Isometry([_Inversion(center, radius)])

    def then(self, other: "Isometry") -> "Isometry":
        return Isometry(self.ops + other.ops)

    def __call__(self, x):
        return self.apply(x)

    def apply(self, x):
        if isinstance(x, Point):
            coords = x.coords
            for op in self.ops:
                coords = op.apply(coords)
                if coords is None:
                    return IdealPoint.infinity()
            if coords[-1] <= 0:
                # boundary points can only arise from roundoff at extreme inputs
                raise GeometryError("isometry image left the open half-space")
            return Point(coords)
        if isinstance(x, IdealPoint):
            pt = x
            for op in self.ops:
                pt = op.apply_ideal(pt)
            return pt
        raise GeometryError("apply expects a Point or IdealPoint")


def apply_isometry(gamma: Isometry, x):
    return gamma.apply(x)


def normalize_pair(x: Point, y: Point) -> Isometry:
    """An isometry gamma with gamma(x) = (0,...,0,1) and
    gamma(y) = (0,...,0,exp d(x,y))."""
    _check_same_dim(x, y)
    if np.array_equal(x.coords, y.coords):
        raise GeometryError("normalize_pair needs distinct points")
    d_target = distance(x, y)
    gamma = Isometry.translation(-x.horizontal).then(Isometry.dilation(1.0 / x.height))
    x1, y1 = gamma(x), gamma(y)
    w = float(np.linalg.norm(y1.horizontal))
    if w > 1e-12:
        # send the geodesic through x1, y1 to the vertical axis by inverting
        # about one of its ideal endpoints
        u = y1.horizontal / w
        yh = y1.height
        m = (w * w + yh * yh - 1.0) / (2.0 * w)
        radius = math.hypot(m, 1.0)
        e_far = m - radius  # plane coordinate of the endpoint behind x1
        e_near = m + radius
        center = e_far * u
        inv = Isometry.inversion(center, 1.0)
        gamma = gamma.then(inv)
        # the geodesic now runs vertically above the image of the near endpoint
        land = inv.apply(IdealPoint(e_near * u))
        gamma = gamma.then(Isometry.translation(-land.coords))
        x2 = gamma(x)
        gamma = gamma.then(Isometry.dilation(1.0 / x2.height))
    y2 = gamma(y)
    if y2.height < 1.0:
        gamma = gamma.then(Isometry.inversion(np.zeros(x.dim - 1), 1.0))
    # clean tiny horizontal drift of the pair with one exact translation
    x3 = gamma(x)
    gamma = gamma.then(Isometry.translation(-x3.horizontal))
    x4 = gamma(x)
    gamma = gamma.then(Isometry.dilation(1.0 / x4.height))
    final_y = gamma(y)
    if abs(final_y.height - math.exp(d_target)) > 1e-6 * math.exp(d_target):
        raise GeometryError("normalize_pair failed to verify (numerical degeneracy)")
    return gamma


def random_point(rng: np.random.Generator, dim: int = 2, spread: float = 1.5) -> Point:
    c = rng.normal(0.0, spread, size=dim)
    c[-1] = math.exp(rng.normal(0.0, spread / 2.0))
    return Point(c)


def random_similarity(rng: np.random.Generator, dim: int = 2) -> Isometry:
    """A random isometry fixing infinity: translation + dilation + rotation."""
    ops = Isometry.translation(rng.normal(0.0, 2.0, size=dim - 1))
    ops = ops.then(Isometry.dilation(math.exp(rng.normal(0.0, 0.7))))
    if dim - 1 >= 2:
        a = rng.normal(size=(dim - 1, dim - 1))
        q, _ = np.linalg.qr(a)
        ops = ops.then(Isometry.orthogonal(q))
    elif rng.random() < 0.5:
        ops = ops.then(Isometry.orthogonal(-np.eye(1)))
    return ops


def random_isometry(rng: np.random.Generator, dim: int = 2) -> Isometry:
    """A random isometry, possibly involving an inversion."""
    gamma = random_similarity(rng, dim)
    if rng.random() < 0.5:
        center = rng.normal(0.0, 2.0, size=dim - 1)
        gamma = gamma.then(Isometry.inversion(center, math.exp(rng.normal(0.0, 0.5))))
        gamma = gamma.then(random_similarity(rng, dim))
    return gamma


def halfspace_to_json(H: HalfSpace) -> dict:
    if H.kind == "hemisphere":
        return {"kind": "hemisphere", "center": [float(v) for v in H.center],
                "radius": H.radius, "side": H.side}
    return {"kind": "vertical", "normal": [float(v) for v in H.normal],
            "offset": H.offset, "side": H.side}


def halfspace_from_json(obj: dict) -> HalfSpace:
    if obj["kind"] == "hemisphere":
        return HalfSpace("hemisphere", center=obj["center"], radius=obj["radius"],
                         side=obj.get("side", 1))
    return HalfSpace("vertical", normal=obj["normal"], offset=obj["offset"],
                     side=obj.get("side", 1))
