"""Origin-symmetric star and convex bodies: gauges, radial and support
functions, polarity, linear images, containment.

Bodies are immutable after construction and safe to share across threads
(the intersection-body radial cache is lock-protected). All evaluation
entry points are vectorized: ``gauge_many`` / ``radial_many`` /
``support_many`` take an (N, n) array and return an (N,) array. The
scalar module-level functions ``gauge``, ``radial``, ``support`` wrap
them for single points.
"""

from __future__ import annotations

import threading

import numpy as np

from .errors import (
    BodySpecError,
    DegeneratePoints,
    DimensionMismatch,
    NonConvexBody,
    NonConvexPolar,
    SingularMap,
)

_DIRECTION_TOL = 1e-12


def as_points(x, dim):
    """Coerce input to an (N, dim) float array."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.shape[1] != dim:
        raise DimensionMismatch(f"points have dimension {pts.shape[1]}, body has {dim}")
    if not np.all(np.isfinite(pts)):
        raise BodySpecError("non-finite coordinates")
    return pts


def unit_vector(v):
    """Normalize v to a unit vector; reject near-zero input."""
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm < _DIRECTION_TOL:
        raise BodySpecError("cannot normalize a (near-)zero vector")
    return v / norm


def check_direction(theta):
    theta = np.asarray(theta, dtype=float)
    if abs(np.linalg.norm(theta) - 1.0) > 1e-9:
        raise BodySpecError(f"direction is not unit length: |theta| = {np.linalg.norm(theta)}")
    return theta


class LinearMap:
    """Invertible n-by-n map with cached determinant and inverse."""

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise BodySpecError("linear map must be a square matrix")
        if not np.all(np.isfinite(matrix)):
            raise BodySpecError("linear map has non-finite entries")
        self.matrix = matrix
        self.det = float(np.linalg.det(matrix))
        if abs(self.det) <= 1e-12:
            raise SingularMap(f"map determinant {self.det} too close to zero")
        self._inverse = None

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def inverse(self):
        if self._inverse is None:
            self._inverse = np.linalg.inv(self.matrix)
        return self._inverse

    def sl_normalized(self):
        """Rescale to unit determinant (preserving orientation modulus)."""
        n = self.dim
        return LinearMap(self.matrix / abs(self.det) ** (1.0 / n))

    def compose(self, other):
        return LinearMap(self.matrix @ other.matrix)

    def inverse_transpose(self):
        return LinearMap(self.inverse.T)

    def __repr__(self):
        return f"LinearMap(det={self.det:.6g}, dim={self.dim})"


def random_sl_map(n, rng, spread=0.5):
    """Random unit-determinant map, mildly conditioned, for invariance tests."""
    while True:
        m = np.eye(n) + spread * rng.standard_normal((n, n))
        if abs(np.linalg.det(m)) > 1e-6:
            return LinearMap(m).sl_normalized()


class Body:
    """Base type: an origin-symmetric star body with continuous radial function."""

    dim: int
    is_convex: bool = False

    # -- vectorized evaluation ------------------------------------------------

    def gauge_many(self, pts):
        """Minkowski functional at each row of pts; shape (N,)."""
        raise NotImplementedError

    def radial_many(self, dirs):
        """Radial function at each (unit) row of dirs; default 1/gauge."""
        g = self.gauge_many(dirs)
        out = np.empty_like(g)
        np.divide(1.0, g, out=out, where=g > 0)
        out[g <= 0] = np.inf
        return out

    def support_many(self, dirs):
        """Support function (convex bodies only)."""
        raise NonConvexBody(f"{type(self).__name__} has no support function")

    # -- structure ------------------------------------------------------------

    def polar_body(self):
        raise NonConvexPolar(f"{type(self).__name__} has no polar")

    def map_by(self, lin: LinearMap):
        """Image under an invertible map; default wraps in LinearImage."""
        return LinearImage(lin, self)

    def to_json(self):
        raise NotImplementedError


class EuclideanBall(Body):
    def __init__(self, radius, dim):
        if radius <= 0:
            raise BodySpecError("ball radius must be positive")
        self.radius = float(radius)
        self.dim = int(dim)
        self.is_convex = True

    def gauge_many(self, pts):
        return np.linalg.norm(as_points(pts, self.dim), axis=1) / self.radius

    def support_many(self, dirs):
        return np.full(as_points(dirs, self.dim).shape[0], self.radius)

    def polar_body(self):
        return EuclideanBall(1.0 / self.radius, self.dim)

    def map_by(self, lin):
        inv = lin.inverse
        return Ellipsoid(inv.T @ inv / self.radius**2)

    def to_json(self):
        return {"type": "ball", "radius": self.radius, "dim": self.dim}


class Ellipsoid(Body):
    """Centered ellipsoid {x : x^T M x <= 1} for symmetric positive-definite M."""

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise BodySpecError("ellipsoid matrix must be square")
        m = 0.5 * (m + m.T)
        eigvals = np.linalg.eigvalsh(m)
        # huge-aspect-ratio matrices produce negative roundoff of size
        # ~eps * top eigenvalue in eigvalsh; only reject beyond that
        if eigvals[-1] <= 0.0 or eigvals[0] <= -1e-12 * eigvals[-1]:
            raise BodySpecError(f"ellipsoid matrix not positive definite (min eig {eigvals[0]})")
        eigvals = np.maximum(eigvals, 1e-300)
        self.matrix = m
        self.eigvals = eigvals
        self.dim = m.shape[0]
        self.is_convex = True
        self._inv = None

    @property
    def inv_matrix(self):
        if self._inv is None:
            self._inv = np.linalg.inv(self.matrix)
        return self._inv

    def gauge_many(self, pts):
        pts = as_points(pts, self.dim)
        quad_form = np.einsum("ij,jk,ik->i", pts, self.matrix, pts)
        return np.sqrt(np.maximum(quad_form, 0.0))

    def support_many(self, dirs):
        dirs = as_points(dirs, self.dim)
        return np.sqrt(np.einsum("ij,jk,ik->i", dirs, self.inv_matrix, dirs))

    def polar_body(self):
        return Ellipsoid(self.inv_matrix)

    def map_by(self, lin):
        inv = lin.inverse
        return Ellipsoid(inv.T @ self.matrix @ inv)

    def semi_axes(self):
        """Principal semi-axis lengths, descending."""
        return np.sort(1.0 / np.sqrt(self.eigvals))[::-1]

    def to_json(self):
        return {"type": "ellipsoid", "matrix": self.matrix.tolist()}


class LpBall(Body):
    """l_p ball of given radius; 0 < p <= inf (star-shaped but non-convex for p < 1)."""

    def __init__(self, p, radius, dim):
        p = float(p)
        if not (p > 0):
            raise BodySpecError("p must be positive")
        if radius <= 0:
            raise BodySpecError("radius must be positive")
        self.p = p
        self.radius = float(radius)
        self.dim = int(dim)
        self.is_convex = p >= 1

    def gauge_many(self, pts):
        pts = as_points(pts, self.dim)
        if np.isinf(self.p):
            norms = np.max(np.abs(pts), axis=1)
        else:
            norms = np.sum(np.abs(pts) ** self.p, axis=1) ** (1.0 / self.p)
        return norms / self.radius

    def support_many(self, dirs):
        if self.p < 1:
            raise NonConvexBody("support undefined for p < 1")
        q = self._conjugate()
        dirs = as_points(dirs, self.dim)
        if np.isinf(q):
            norms = np.max(np.abs(dirs), axis=1)
        else:
            norms = np.sum(np.abs(dirs) ** q, axis=1) ** (1.0 / q)
        return self.radius * norms

    def _conjugate(self):
        if np.isinf(self.p):
            return 1.0
        if self.p == 1.0:
            return np.inf
        return self.p / (self.p - 1.0)

    def polar_body(self):
        if self.p < 1:
            raise NonConvexPolar("polar refuses p < 1")
        return LpBall(self._conjugate(), 1.0 / self.radius, self.dim)

    def to_json(self):
        p = "inf" if np.isinf(self.p) else self.p
        return {"type": "lp_ball", "p": p, "radius": self.radius, "dim": self.dim}


class Cube(Body):
    """Axis-aligned cube [-h, h]^n. half_side 1/2 gives the volume-1 cube."""

    def __init__(self, half_side, dim):
        if half_side <= 0:
            raise BodySpecError("half_side must be positive")
        self.half_side = float(half_side)
        self.dim = int(dim)
        self.is_convex = True

    def gauge_many(self, pts):
        return np.max(np.abs(as_points(pts, self.dim)), axis=1) / self.half_side

    def support_many(self, dirs):
        return self.half_side * np.sum(np.abs(as_points(dirs, self.dim)), axis=1)

    def polar_body(self):
        return CrossPolytope(1.0 / self.half_side, self.dim)

    def vertices(self):
        """All 2^n corners (for exact enclosing-ellipsoid computations)."""
        n = self.dim
        signs = np.array(np.meshgrid(*([[-1.0, 1.0]] * n))).reshape(n, -1).T
        return self.half_side * signs

    def facet_rows(self):
        """Rows a_i of the equivalent {|<a_i, x>| <= 1} representation."""
        return np.eye(self.dim) / self.half_side

    def to_json(self):
        return {"type": "cube", "half_side": self.half_side, "dim": self.dim}


class CrossPolytope(Body):
    """l_1 ball of given radius (conv of +/- radius * e_i)."""

    def __init__(self, radius, dim):
        if radius <= 0:
            raise BodySpecError("radius must be positive")
        self.radius = float(radius)
        self.dim = int(dim)
        self.is_convex = True

    def gauge_many(self, pts):
        return np.sum(np.abs(as_points(pts, self.dim)), axis=1) / self.radius

    def support_many(self, dirs):
        return self.radius * np.max(np.abs(as_points(dirs, self.dim)), axis=1)

    def polar_body(self):
        return Cube(1.0 / self.radius, self.dim)

    def vertices(self):
        eye = np.eye(self.dim) * self.radius
        return np.vstack([eye, -eye])

    def to_json(self):
        return {"type": "cross_polytope", "radius": self.radius, "dim": self.dim}


class HPolytope(Body):
    """Symmetric polytope {x : |<a_i, x>| <= 1} from facet rows a_i."""

    def __init__(self, rows):
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if not np.all(np.isfinite(rows)):
            raise BodySpecError("facet rows must be finite")
        if np.linalg.matrix_rank(rows) < rows.shape[1]:
            raise BodySpecError("facet rows do not span R^n (body unbounded)")
        self.rows = rows
        self.dim = rows.shape[1]
        self.is_convex = True
        self._vertices = None

    def gauge_many(self, pts):
        pts = as_points(pts, self.dim)
        return np.max(np.abs(pts @ self.rows.T), axis=1)

    def support_many(self, dirs):
        return self.polar_body().gauge_many(dirs)

    def polar_body(self):
        return VPolytope(np.vstack([self.rows, -self.rows]))

    def vertices(self):
        """Exact vertex set via facet enumeration of the polar (n <= 7)."""
        if self._vertices is None:
            normals, offsets = _convex_hull_facets(np.vstack([self.rows, -self.rows]))
            self._vertices = normals / (-offsets)[:, None]
        return self._vertices

    def to_json(self):
        return {"type": "h_polytope", "rows": self.rows.tolist()}


class VPolytope(Body):
    """Symmetric polytope conv{v_j}; the vertex list must be closed under negation."""

    def __init__(self, vertices):
        verts = np.atleast_2d(np.asarray(vertices, dtype=float))
        if not np.all(np.isfinite(verts)):
            raise BodySpecError("vertices must be finite")
        if np.linalg.matrix_rank(verts) < verts.shape[1]:
            raise DegeneratePoints("vertices do not span R^n")
        _check_symmetric_set(verts)
        self.verts = verts
        self.dim = verts.shape[1]
        self.is_convex = True
        self._facets = None
        self._lock = threading.Lock()

    @classmethod
    def from_half(cls, half_vertices):
        half = np.atleast_2d(np.asarray(half_vertices, dtype=float))
        return cls(np.vstack([half, -half]))

    def _facet_form(self):
        with self._lock:
            if self._facets is None:
                self._facets = _convex_hull_facets(self.verts)
        return self._facets

    def gauge_many(self, pts):
        pts = as_points(pts, self.dim)
        if self.dim <= 7:
            normals, offsets = self._facet_form()
            return np.max(pts @ normals.T / (-offsets)[None, :], axis=1)
        return np.array([_gauge_lp(self.verts, x) for x in pts])

    def support_many(self, dirs):
        dirs = as_points(dirs, self.dim)
        return np.max(np.abs(dirs @ self.verts.T), axis=1)

    def polar_body(self):
        return HPolytope(_dedupe_antipodal(self.verts))

    def vertices(self):
        return self.verts

    def to_json(self):
        return {"type": "v_polytope", "vertices": self.verts.tolist()}


class LinearImage(Body):
    """T(K) for an invertible map T; nested images are flattened."""

    def __init__(self, lin: LinearMap, inner: Body):
        if lin.dim != inner.dim:
            raise DimensionMismatch("map and body dimensions differ")
        if isinstance(inner, LinearImage):
            lin = lin.compose(inner.lin)
            inner = inner.inner
        self.lin = lin
        self.inner = inner
        self.dim = inner.dim
        self.is_convex = inner.is_convex

    def gauge_many(self, pts):
        pts = as_points(pts, self.dim)
        return self.inner.gauge_many(pts @ self.lin.inverse.T)

    def support_many(self, dirs):
        dirs = as_points(dirs, self.dim)
        return self.inner.support_many(dirs @ self.lin.matrix)

    def polar_body(self):
        return LinearImage(self.lin.inverse_transpose(), self.inner.polar_body())

    def map_by(self, lin):
        return self.inner.map_by(lin.compose(self.lin))

    def to_json(self):
        return {
            "type": "linear_image",
            "matrix": self.lin.matrix.tolist(),
            "inner": self.inner.to_json(),
        }


class Polar(Body):
    """Explicit polar node K^o (convex inner bodies only)."""

    def __init__(self, inner: Body):
        if not inner.is_convex:
            raise NonConvexPolar("polar of a star-only body")
        self.inner = inner
        self.dim = inner.dim
        self.is_convex = True

    def gauge_many(self, pts):
        return self.inner.support_many(pts)

    def support_many(self, dirs):
        return self.inner.gauge_many(dirs)

    def polar_body(self):
        return self.inner

    def to_json(self):
        return {"type": "polar", "inner": self.inner.to_json()}


class RadialPowerSum(Body):
    """Star body with rho^k = sum_j w_j rho_j^k (k-radial sum)."""

    def __init__(self, k, terms):
        k = int(k)
        if k < 1:
            raise BodySpecError("k must be a positive integer")
        terms = [(float(w), body) for w, body in terms]
        if not terms:
            raise BodySpecError("radial power sum needs at least one term")
        if any(w <= 0 for w, _ in terms):
            raise BodySpecError("weights must be positive")
        dims = {body.dim for _, body in terms}
        if len(dims) != 1:
            raise DimensionMismatch("all terms must share a dimension")
        self.k = k
        self.terms = terms
        self.dim = dims.pop()

    def radial_many(self, dirs):
        dirs = as_points(dirs, self.dim)
        acc = np.zeros(dirs.shape[0])
        for w, body in self.terms:
            acc += w * body.radial_many(dirs) ** self.k
        return acc ** (1.0 / self.k)

    def gauge_many(self, pts):
        pts = as_points(pts, self.dim)
        norms = np.linalg.norm(pts, axis=1)
        out = np.zeros(pts.shape[0])
        mask = norms > 0
        if np.any(mask):
            dirs = pts[mask] / norms[mask, None]
            out[mask] = norms[mask] / self.radial_many(dirs)
        return out

    def map_by(self, lin):
        # radial sums commute with linear maps, so map termwise
        return RadialPowerSum(self.k, [(w, body.map_by(lin)) for w, body in self.terms])

    def to_json(self):
        return {
            "type": "radial_power_sum",
            "k": self.k,
            "terms": [{"weight": w, "body": b.to_json()} for w, b in self.terms],
        }


class IntersectionBodyOf(Body):
    """Star body with rho(theta) = Vol_{n-1}(inner cut by theta-perp).

    Each radial evaluation costs an (n-1)-dimensional quadrature, so values
    are cached per direction quantized to a 1e-6 grid (lock-protected).
    """

    def __init__(self, inner: Body, sub_samples=2048, sub_seed=0):
        if inner.dim < 2:
            raise BodySpecError("intersection body needs dimension >= 2")
        self.inner = inner
        self.dim = inner.dim
        self.sub_samples = int(sub_samples)
        self.sub_seed = int(sub_seed)
        self._cache = {}
        self._lock = threading.Lock()

    def radial_many(self, dirs):
        from . import radon  # deferred: radon imports this module

        dirs = as_points(dirs, self.dim)
        keys = [np.round(d / 1e-6).astype(np.int64).tobytes() for d in dirs]
        out = np.empty(dirs.shape[0])
        missing = []
        with self._lock:
            for i, key in enumerate(keys):
                if key in self._cache:
                    out[i] = self._cache[key]
                else:
                    missing.append(i)
        if missing:
            vals = radon.intersection_radius_many(
                self.inner, dirs[missing], self.sub_samples, self.sub_seed
            )
            with self._lock:
                for j, i in enumerate(missing):
                    self._cache[keys[i]] = vals[j]
                    out[i] = vals[j]
        return out

    def gauge_many(self, pts):
        pts = as_points(pts, self.dim)
        norms = np.linalg.norm(pts, axis=1)
        out = np.zeros(pts.shape[0])
        mask = norms > 0
        if np.any(mask):
            dirs = pts[mask] / norms[mask, None]
            out[mask] = norms[mask] / self.radial_many(dirs)
        return out

    def to_json(self):
        return {
            "type": "intersection_body",
            "inner": self.inner.to_json(),
            "sub_samples": self.sub_samples,
            "sub_seed": self.sub_seed,
        }


# -- internal helpers ---------------------------------------------------------


def _check_symmetric_set(verts, tol=1e-9):
    scale = max(1.0, float(np.max(np.abs(verts))))
    rounded = {tuple(np.round(v / (scale * tol)).astype(np.int64)) for v in verts}
    for v in verts:
        if tuple(np.round(-v / (scale * tol)).astype(np.int64)) not in rounded:
            raise BodySpecError("vertex list is not closed under negation")


def _dedupe_antipodal(verts, tol=1e-9):
    scale = max(1.0, float(np.max(np.abs(verts))))
    seen = set()
    keep = []
    for v in verts:
        key = tuple(np.round(v / (scale * tol)).astype(np.int64))
        akey = tuple(-k for k in key)
        if key in seen or akey in seen:
            continue
        seen.add(key)
        keep.append(v)
    return np.array(keep)


def _convex_hull_facets(points):
    """Outward facet normals and offsets (a.x + b <= 0 inside) via Qhull."""
    from scipy.spatial import ConvexHull, QhullError

    try:
        hull = ConvexHull(points)
    except QhullError as exc:
        raise DegeneratePoints(f"convex hull failed: {exc}") from exc
    eqs = hull.equations
    normals, offsets = eqs[:, :-1], eqs[:, -1]
    if np.any(offsets >= -1e-12):
        raise DegeneratePoints("origin is not interior to the hull")
    return normals, offsets


def _gauge_lp(verts, x):
    """Gauge of conv{verts} at x: min sum(c) s.t. [V^T -V^T] c = x, c >= 0."""
    from scipy.optimize import linprog

    m = verts.shape[0]
    a_eq = np.hstack([verts.T, -verts.T])
    res = linprog(np.ones(2 * m), A_eq=a_eq, b_eq=x, bounds=(0, None), method="highs")
    if not res.success:
        raise DegeneratePoints(f"gauge LP failed: {res.message}")
    return float(res.fun)


# -- public operations --------------------------------------------------------


def gauge(body: Body, x) -> float:
    """Minkowski functional of body at point x (0 at the origin)."""
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x) == 0.0:
        return 0.0
    return float(body.gauge_many(x[None, :])[0])


def radial(body: Body, theta) -> float:
    """Radial function at a unit direction; equals 1/gauge."""
    theta = check_direction(theta)
    return float(body.radial_many(theta[None, :])[0])


def support(body: Body, theta) -> float:
    """Support function at a unit direction (convex bodies only)."""
    theta = check_direction(theta)
    return float(body.support_many(theta[None, :])[0])


def polar(body: Body) -> Body:
    """Polar body, using the type-directed closed forms."""
    return body.polar_body()


def apply_map(lin, body: Body) -> Body:
    """Image of body under an invertible linear map (matrix or LinearMap)."""
    if not isinstance(lin, LinearMap):
        lin = LinearMap(lin)
    return body.map_by(lin)


def scale_body(body: Body, factor: float) -> Body:
    """Homothety by a positive factor."""
    if factor <= 0:
        raise BodySpecError("scale factor must be positive")
    return apply_map(np.eye(body.dim) * factor, body)


def contains(outer: Body, inner: Body, rule, tol=1e-9):
    """Sampled containment test: (verdict, worst rho_outer/rho_inner ratio)."""
    if outer.dim != inner.dim:
        raise DimensionMismatch("containment operands differ in dimension")
    ratios = outer.radial_many(rule.points) / inner.radial_many(rule.points)
    worst = float(np.min(ratios))
    return worst >= 1.0 - tol, worst


def exact_volume(body: Body):
    """Closed-form volume where available, else None."""
    import math

    from .quadrature import ball_volume

    n = body.dim
    if isinstance(body, EuclideanBall):
        return ball_volume(n) * body.radius**n
    if isinstance(body, Ellipsoid):
        return ball_volume(n) / math.sqrt(float(np.linalg.det(body.matrix)))
    if isinstance(body, Cube):
        return (2.0 * body.half_side) ** n
    if isinstance(body, CrossPolytope):
        return (2.0 * body.radius) ** n / math.factorial(n)
    if isinstance(body, LpBall):
        if np.isinf(body.p):
            return (2.0 * body.radius) ** n
        lg = n * math.lgamma(1.0 + 1.0 / body.p) - math.lgamma(1.0 + n / body.p)
        return (2.0 * body.radius) ** n * math.exp(lg)
    if isinstance(body, LinearImage):
        inner = exact_volume(body.inner)
        return None if inner is None else abs(body.lin.det) * inner
    if isinstance(body, (VPolytope, HPolytope)) and n <= 7:
        from scipy.spatial import ConvexHull

        return float(ConvexHull(body.vertices()).volume)
    if isinstance(body, RadialPowerSum) and body.k == n:
        parts = [exact_volume(b) for _, b in body.terms]
        if all(p is not None for p in parts):
            return float(sum(w * p for (w, _), p in zip(body.terms, parts)))
    return None


# -- JSON body-spec schema (see docs/bodyspec.md) -------------------------------

_JSON_BUILDERS = {}


def _register(name):
    def wrap(fn):
        _JSON_BUILDERS[name] = fn
        return fn

    return wrap


@_register("ball")
def _ball_from_json(node):
    return EuclideanBall(node["radius"], node["dim"])


@_register("ellipsoid")
def _ellipsoid_from_json(node):
    return Ellipsoid(np.asarray(node["matrix"], dtype=float))


@_register("lp_ball")
def _lp_from_json(node):
    p = node["p"]
    p = np.inf if p in ("inf", "Infinity") else float(p)
    return LpBall(p, node["radius"], node["dim"])


@_register("cube")
def _cube_from_json(node):
    return Cube(node["half_side"], node["dim"])


@_register("cross_polytope")
def _cross_from_json(node):
    return CrossPolytope(node["radius"], node["dim"])


@_register("h_polytope")
def _hpoly_from_json(node):
    return HPolytope(np.asarray(node["rows"], dtype=float))


@_register("v_polytope")
def _vpoly_from_json(node):
    return VPolytope(np.asarray(node["vertices"], dtype=float))


@_register("linear_image")
def _image_from_json(node):
    return LinearImage(LinearMap(np.asarray(node["matrix"], dtype=float)), body_from_json(node["inner"]))


@_register("polar")
def _polar_from_json(node):
    return Polar(body_from_json(node["inner"]))


@_register("radial_power_sum")
def _rps_from_json(node):
    terms = [(t["weight"], body_from_json(t["body"])) for t in node["terms"]]
    return RadialPowerSum(node["k"], terms)


@_register("intersection_body")
def _ibody_from_json(node):
    return IntersectionBodyOf(
        body_from_json(node["inner"]),
        sub_samples=node.get("sub_samples", 2048),
        sub_seed=node.get("sub_seed", 0),
    )


def body_from_json(node) -> Body:
    """Build a body from its JSON description (recursive under inner/terms)."""
    if not isinstance(node, dict) or "type" not in node:
        raise BodySpecError("body node must be an object with a 'type' field")
    kind = node["type"]
    if kind not in _JSON_BUILDERS:
        raise BodySpecError(f"unknown body type {kind!r}")
    try:
        return _JSON_BUILDERS[kind](node)
    except KeyError as exc:
        raise BodySpecError(f"body type {kind!r} missing field {exc}") from exc
