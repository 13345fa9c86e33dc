"""Seeded deterministic integration over spheres, subspheres, body interiors
and Grassmannians, plus every scalar functional built on top of it (volume,
dual mixed volumes, mean norms/radii/widths, moments, section volumes,
covariance).

Measure convention: all closed-form derivations integrate over the sphere
with the Lebesgue surface measure, then get converted once to means against
the rotation-invariant probability measure sigma through
``sphere_lebesgue_area`` (surface area = n * ball volume). That helper is
the only place the conversion factor lives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bodies
from .errors import (
    BadRank,
    BodySpecError,
    DimensionMismatch,
    LogOfZero,
    NonConvexBody,
    NumericOverflow,
    RejectionTooSlow,
    UnsupportedKind,
)

RULE_KINDS = ("monte_carlo", "antithetic", "product_lowdim")

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def ball_volume(n: int) -> float:
    """Volume of the n-dimensional Euclidean unit ball, via log-gamma."""
    if n < 0:
        raise BodySpecError("dimension must be nonnegative")
    return math.exp(0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1.0))


def sphere_lebesgue_area(n: int) -> float:
    """Lebesgue surface area of S^{n-1}; converts sphere integrals dx to
    sigma-means: integral f dx = sphere_lebesgue_area(n) * E_sigma[f]."""
    return n * ball_volume(n)


@dataclass
class QuadratureEstimate:
    value: float
    std_error: float
    samples: int

    def __post_init__(self):
        if self.std_error < 0:
            raise BodySpecError("std_error must be nonnegative")
        if self.samples < 1:
            raise BodySpecError("samples must be >= 1")


class SphereRule:
    """Weighted point set on S^{n-1}; weights sum to 1."""

    def __init__(self, dim, points, weights, seed, kind):
        points = np.asarray(points, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if kind not in RULE_KINDS:
            raise UnsupportedKind(f"unknown rule kind {kind!r}")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise BodySpecError("rule weights must sum to 1")
        self.dim = int(dim)
        self.points = points
        self.weights = weights
        self.seed = seed
        self.kind = kind

    @property
    def size(self):
        return self.points.shape[0]

    def fold_pairs(self, values):
        """Average antithetic pairs so variance is estimated on independent draws."""
        if self.kind == "antithetic":
            half = self.size // 2
            return 0.5 * (values[:half] + values[half:]), 2.0 * self.weights[:half]
        return values, self.weights


def sphere_rule(n, N, seed, kind="antithetic") -> SphereRule:
    """Build an integration rule on S^{n-1}.

    monte_carlo: N iid uniform directions (normalized Gaussians).
    antithetic: N/2 pairs (theta, -theta); N must be even.
    product_lowdim: deterministic rule, n = 2 (uniform angles) or
    n = 3 (Fibonacci spiral); n = 1 gives the two-point rule.
    """
    if N < 2:
        raise BodySpecError("rule needs at least two points")
    if n < 1:
        raise BodySpecError("dimension must be >= 1")
    if kind == "monte_carlo":
        rng = np.random.default_rng(seed)
        pts = _normalize_rows(rng.standard_normal((N, n)))
        return SphereRule(n, pts, np.full(N, 1.0 / N), seed, kind)
    if kind == "antithetic":
        if N % 2:
            raise BodySpecError("antithetic rules need an even point count")
        rng = np.random.default_rng(seed)
        half = _normalize_rows(rng.standard_normal((N // 2, n)))
        pts = np.vstack([half, -half])
        return SphereRule(n, pts, np.full(N, 1.0 / N), seed, kind)
    if kind == "product_lowdim":
        if n == 1:
            pts = np.array([[1.0], [-1.0]])
            return SphereRule(1, pts, np.array([0.5, 0.5]), seed, kind)
        if n == 2:
            ang = (np.arange(N) + 0.5) * (2.0 * math.pi / N)
            pts = np.column_stack([np.cos(ang), np.sin(ang)])
            return SphereRule(2, pts, np.full(N, 1.0 / N), seed, kind)
        if n == 3:
            i = np.arange(N)
            z = 1.0 - (2.0 * i + 1.0) / N
            r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
            phi = i * _GOLDEN_ANGLE
            pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
            return SphereRule(3, pts, np.full(N, 1.0 / N), seed, kind)
        raise UnsupportedKind("product_lowdim only covers n <= 3")
    raise UnsupportedKind(f"unknown rule kind {kind!r}")


def _normalize_rows(m):
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return m / norms


@dataclass
class SubspaceFrame:
    """Orthonormal basis (columns) of an m-dimensional subspace of R^n."""

    dim: int
    rank: int
    columns: np.ndarray

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=float)
        gram = cols.T @ cols
        if np.max(np.abs(gram - np.eye(self.rank))) > 1e-10:
            raise BodySpecError("frame columns are not orthonormal")
        self.columns = cols

    def projector(self):
        return self.columns @ self.columns.T


def grassmann_sample(n, m, N, seed):
    """N Haar-distributed frames in G(n, m): QR of Gaussian matrices with the
    positive-diagonal sign convention."""
    if not 1 <= m <= n - 1:
        raise BadRank(f"rank m={m} outside 1..{n - 1}")
    rng = np.random.default_rng(seed)
    frames = []
    for _ in range(N):
        g = rng.standard_normal((n, m))
        q, r = np.linalg.qr(g)
        q = q * np.sign(np.diag(r))[None, :]
        frames.append(SubspaceFrame(n, m, q))
    return frames


def _estimate(values, rule: SphereRule, scale=1.0) -> QuadratureEstimate:
    """Weighted estimate with a plug-in standard error (0 for deterministic rules)."""
    if not np.all(np.isfinite(values)):
        bad = int(np.argmax(~np.isfinite(values)))
        raise NumericOverflow(
            "integrand not finite at a rule point", direction=rule.points[bad]
        )
    mean = float(np.dot(rule.weights, values))
    if rule.kind == "product_lowdim":
        se = 0.0
    else:
        folded, w = rule.fold_pairs(values)
        se = float(np.sqrt(np.sum((w * (folded - mean)) ** 2)))
    return QuadratureEstimate(scale * mean, abs(scale) * se, rule.size)


def volume(body, rule: SphereRule) -> QuadratureEstimate:
    """Vol(body) = ball_volume(n) * E_sigma[rho^n] (polar integration)."""
    _check_rule(body, rule)
    rho = body.radial_many(rule.points)
    return _estimate(rho**body.dim, rule, ball_volume(body.dim))


def dual_mixed_volume(body1, body2, p, rule: SphereRule) -> QuadratureEstimate:
    """Dual mixed volume of order p: ball_volume(n) * E[rho1^p rho2^(n-p)].

    p may be negative; overflow raises instead of saturating.
    """
    _check_rule(body1, rule)
    _check_rule(body2, rule)
    n = body1.dim
    with np.errstate(over="ignore", invalid="ignore"):
        vals = body1.radial_many(rule.points) ** p * body2.radial_many(rule.points) ** (n - p)
    return _estimate(vals, rule, ball_volume(n))


def mean_norm(body, p, rule: SphereRule) -> float:
    """p-th mean of the gauge over sigma; p = 0 gives the geometric mean."""
    _check_rule(body, rule)
    if p < 0:
        raise BodySpecError("mean_norm needs p >= 0")
    g = body.gauge_many(rule.points)
    if p == 0:
        if np.any(g <= 0.0) or not np.all(np.isfinite(g)):
            raise LogOfZero("gauge vanished or blew up on the rule")
        return float(math.exp(np.dot(rule.weights, np.log(g))))
    return float(np.dot(rule.weights, g**p) ** (1.0 / p))


def mean_radius(body, p, rule: SphereRule) -> float:
    """p-th mean of the radial function over sigma (p > 0)."""
    _check_rule(body, rule)
    if p <= 0:
        raise BodySpecError("mean_radius needs p > 0")
    rho = body.radial_many(rule.points)
    return float(np.dot(rule.weights, rho**p) ** (1.0 / p))


def mean_width(body, p, rule: SphereRule) -> float:
    """p-th mean width: mean_norm of the polar body."""
    return mean_norm(bodies.polar(body), p, rule)


def circumradius_inradius(body, rule: SphereRule | None = None):
    """(circumscribed radius a, inscribed radius 1/b).

    Exact for balls, ellipsoids, l_p balls, cubes, cross-polytopes and
    H/V-polytopes (vertex/facet data); otherwise max/min of rho over the rule.
    """
    a = _exact_circumradius(body)
    r_in = None
    if body.is_convex:
        try:
            ap = _exact_circumradius(bodies.polar(body))
            r_in = None if ap is None else 1.0 / ap
        except NonConvexBody:
            r_in = None
    if a is None or r_in is None:
        if rule is None:
            raise BodySpecError("no closed form for this body; supply a rule")
        rho = body.radial_many(rule.points)
        if a is None:
            a = float(np.max(rho))
        if r_in is None:
            r_in = float(np.min(rho))
    return a, r_in


def _exact_circumradius(body):
    n = body.dim
    if isinstance(body, bodies.EuclideanBall):
        return body.radius
    if isinstance(body, bodies.Ellipsoid):
        return float(1.0 / math.sqrt(body.eigvals[0]))
    if isinstance(body, bodies.Cube):
        return body.half_side * math.sqrt(n)
    if isinstance(body, bodies.CrossPolytope):
        return body.radius
    if isinstance(body, bodies.LpBall):
        if np.isinf(body.p):
            return body.radius * math.sqrt(n)
        return body.radius * n ** max(0.0, 0.5 - 1.0 / body.p)
    if isinstance(body, (bodies.VPolytope, bodies.HPolytope, bodies.Cube, bodies.CrossPolytope)):
        if body.dim <= 7:
            return float(np.max(np.linalg.norm(body.vertices(), axis=1)))
        return None
    if isinstance(body, bodies.LinearImage):
        inner = body.inner
        if isinstance(inner, (bodies.VPolytope, bodies.Cube, bodies.CrossPolytope)):
            return float(np.max(np.linalg.norm(inner.vertices() @ body.lin.matrix.T, axis=1)))
        if isinstance(inner, bodies.HPolytope) and inner.dim <= 7:
            return float(np.max(np.linalg.norm(inner.vertices() @ body.lin.matrix.T, axis=1)))
    return None


def directional_moment_integral(body, theta, p, rule: SphereRule) -> QuadratureEstimate:
    """Raw integral over the body of |<x, theta>|^p dx, by polar integration."""
    _check_rule(body, rule)
    if p <= 0:
        raise BodySpecError("moment needs p > 0")
    n = body.dim
    theta = bodies.check_direction(theta)
    rho = body.radial_many(rule.points)
    with np.errstate(over="ignore"):
        vals = np.abs(rule.points @ theta) ** p * rho ** (n + p)
    return _estimate(vals, rule, sphere_lebesgue_area(n) / (n + p))


def moment_p(body, theta, p, rule: SphereRule) -> float:
    """(integral over the body of |<x, theta>|^p dx)^(1/p)."""
    return moment_p_est(body, theta, p, rule).value


def moment_p_est(body, theta, p, rule: SphereRule) -> QuadratureEstimate:
    raw = directional_moment_integral(body, theta, p, rule)
    if raw.value <= 0.0:
        raise NumericOverflow("moment integral vanished on the rule", direction=theta)
    value = raw.value ** (1.0 / p)
    # delta method: d(I^(1/p))/dI = I^(1/p - 1) / p
    se = raw.std_error * raw.value ** (1.0 / p - 1.0) / p
    return QuadratureEstimate(value, se, raw.samples)


def section_volume(body, frame: SubspaceFrame, sub_rule: SphereRule) -> float:
    """Volume of the central section body cut by span(frame)."""
    return section_volume_est(body, frame, sub_rule).value


def section_volume_est(body, frame, sub_rule) -> QuadratureEstimate:
    if frame.rank < 1:
        raise BadRank("frame rank must be >= 1")
    if sub_rule.dim != frame.rank:
        raise BadRank("sub-rule dimension must match the frame rank")
    if frame.dim != body.dim:
        raise BadRank("frame ambient dimension must match the body")
    dirs = sub_rule.points @ frame.columns.T
    rho = body.radial_many(dirs)
    return _estimate(rho**frame.rank, sub_rule, ball_volume(frame.rank))


def covariance(body, rule: SphereRule) -> np.ndarray:
    """Inertia matrix of the uniform measure on the body (symmetric PSD)."""
    _check_rule(body, rule)
    n = body.dim
    rho = body.radial_many(rule.points)
    weights = rule.weights * rho ** (n + 2)
    cov = np.einsum("i,ij,ik->jk", weights, rule.points, rule.points)
    cov *= sphere_lebesgue_area(n) / (n + 2)
    return 0.5 * (cov + cov.T)


def covariance_se(body, rule: SphereRule) -> np.ndarray:
    """Entrywise plug-in standard errors for the covariance estimator."""
    n = body.dim
    rho = body.radial_many(rule.points)
    scale = sphere_lebesgue_area(n) / (n + 2)
    se = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            vals = rule.points[:, i] * rule.points[:, j] * rho ** (n + 2)
            est = _estimate(vals, rule, scale)
            se[i, j] = se[j, i] = est.std_error
    return se


def sample_interior(body, N, seed, method="rejection"):
    """N approximately-uniform interior points.

    rejection: exact uniform via a circumscribed-ball proposal.
    hit_and_run: Markov chain on a convex body; burn-in 50n, thinning n.
    """
    if method == "rejection":
        return _sample_rejection(body, N, seed)
    if method == "hit_and_run":
        return _sample_hit_and_run(body, N, seed)
    raise UnsupportedKind(f"unknown sampling method {method!r}")


def _bounding_radius(body, seed):
    a = _exact_circumradius(body)
    if a is not None:
        return a
    probe = sphere_rule(body.dim, 4096, seed, "antithetic")
    # sampled max underestimates the true circumradius; pad generously
    return 1.25 * float(np.max(body.radial_many(probe.points)))


def _sample_rejection(body, N, seed):
    n = body.dim
    rng = np.random.default_rng(seed)
    radius = _bounding_radius(body, seed)
    out = np.empty((N, n))
    got = 0
    drawn = 0
    batch = max(1024, 4 * N)
    while got < N:
        g = rng.standard_normal((batch, n))
        dirs = _normalize_rows(g)
        radii = radius * rng.random(batch) ** (1.0 / n)
        pts = dirs * radii[:, None]
        inside = body.gauge_many(pts) <= 1.0
        take = min(int(inside.sum()), N - got)
        out[got : got + take] = pts[inside][:take]
        got += take
        drawn += batch
        if drawn >= 65536 and got / drawn < 1e-5:
            raise RejectionTooSlow(
                f"acceptance rate {got / drawn:.2e}; consider hit_and_run"
            )
    return out


def _linear_constraints(body):
    """Rows C with body = {x : Cx <= 1}, or None when not piecewise linear."""
    if isinstance(body, bodies.Cube):
        eye = np.eye(body.dim) / body.half_side
        return np.vstack([eye, -eye])
    if isinstance(body, bodies.CrossPolytope):
        n = body.dim
        signs = np.array(np.meshgrid(*([[-1.0, 1.0]] * n))).reshape(n, -1).T
        return signs / body.radius
    if isinstance(body, bodies.LpBall) and np.isinf(body.p):
        eye = np.eye(body.dim) / body.radius
        return np.vstack([eye, -eye])
    if isinstance(body, bodies.LpBall) and body.p == 1.0:
        return _linear_constraints(bodies.CrossPolytope(body.radius, body.dim))
    if isinstance(body, bodies.HPolytope):
        return np.vstack([body.rows, -body.rows])
    if isinstance(body, bodies.VPolytope) and body.dim <= 7:
        normals, offsets = body._facet_form()
        return normals / (-offsets)[:, None]
    if isinstance(body, bodies.LinearImage):
        inner = _linear_constraints(body.inner)
        return None if inner is None else inner @ body.lin.inverse
    return None


def _chord(body, x, u, radius):
    """Intersection interval {t : x + t u in body} for convex bodies."""
    if isinstance(body, bodies.EuclideanBall):
        return _chord_quadratic(np.eye(body.dim) / body.radius**2, x, u)
    if isinstance(body, bodies.Ellipsoid):
        return _chord_quadratic(body.matrix, x, u)
    if isinstance(body, bodies.LinearImage) and isinstance(
        body.inner, (bodies.EuclideanBall, bodies.Ellipsoid)
    ):
        return _chord(body.inner.map_by(body.lin), x, u, radius)
    rows = _linear_constraints(body)
    if rows is not None:
        s = rows @ x
        d = rows @ u
        hi = np.inf
        lo = -np.inf
        pos = d > 1e-14
        neg = d < -1e-14
        if np.any(pos):
            hi = np.min((1.0 - s[pos]) / d[pos])
        if np.any(neg):
            lo = np.max((1.0 - s[neg]) / d[neg])
        return lo, hi
    return _chord_bisection(body, x, u, radius)


def _chord_quadratic(m, x, u):
    a = u @ m @ u
    b = x @ m @ u
    c = x @ m @ x - 1.0
    disc = b * b - a * c
    root = math.sqrt(max(disc, 0.0))
    return (-b - root) / a, (-b + root) / a


def _chord_bisection(body, x, u, radius, iters=60):
    def endpoint(sign):
        lo, hi = 0.0, 2.0 * radius + float(np.linalg.norm(x)) + 1.0
        f = lambda t: float(body.gauge_many((x + sign * t * u)[None, :])[0])
        while f(hi) <= 1.0:
            hi *= 2.0
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if f(mid) <= 1.0:
                lo = mid
            else:
                hi = mid
        return sign * lo

    return endpoint(-1.0), endpoint(1.0)


def _sample_hit_and_run(body, N, seed):
    if not body.is_convex:
        raise NonConvexBody("hit_and_run requires a convex body")
    n = body.dim
    rng = np.random.default_rng(seed)
    radius = _bounding_radius(body, seed)
    x = np.zeros(n)
    burn = 50 * n
    thin = n
    out = np.empty((N, n))
    total = burn + thin * N
    kept = 0
    for step in range(total):
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        lo, hi = _chord(body, x, u, radius)
        x = x + (lo + (hi - lo) * rng.random()) * u
        if step >= burn and (step - burn) % thin == thin - 1:
            out[kept] = x
            kept += 1
            if kept == N:
                break
    return out


def _check_rule(body, rule):
    if body.dim != rule.dim:
        raise DimensionMismatch(
            f"rule dimension {rule.dim} != body dimension {body.dim}"
        )
