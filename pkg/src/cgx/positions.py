"""Position solvers and position-derived functionals: isotropic position and
constant, minimum-volume enclosing ellipsoids, Lowner/John positions, John
decompositions of the identity, Lewis position for atomic p-norm data,
minimal surface-area position, and Gaussian type/cotype-2 probes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bodies, quadrature as quad
from .errors import (
    BodySpecError,
    DegenerateBody,
    DegeneratePoints,
    FacetAreaFailure,
    InsufficientContacts,
    NoConvergence,
)


@dataclass
class PositionResult:
    """A unit-determinant positioning map plus convergence diagnostics."""

    matrix: np.ndarray
    iterations: int
    residual: float
    trace: list = field(default_factory=list)

    def __post_init__(self):
        det = abs(float(np.linalg.det(self.matrix)))
        if abs(det - 1.0) > 1e-8:
            raise BodySpecError(f"position map determinant {det} != 1")

    @property
    def map(self):
        return bodies.LinearMap(self.matrix)


@dataclass
class IsotropicMeasure:
    """Discrete measure sum_i lambda_i delta_{v_i} with sum lambda v v^T = I."""

    vectors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights <= 0):
            raise BodySpecError("isotropic measure weights must be positive")

    @property
    def dim(self):
        return self.vectors.shape[1]

    def second_moment(self):
        return np.einsum("i,ij,ik->jk", self.weights, self.vectors, self.vectors)

    def residual(self):
        return float(np.linalg.norm(self.second_moment() - np.eye(self.dim)))

    def weight_sum(self):
        return float(self.weights.sum())


@dataclass
class TypeCotypeEstimate:
    lower_bound_T2: float
    lower_bound_C2: float
    trials: int
    seed: int


def _sym_power(mat, power):
    """mat^power for symmetric positive-definite mat (eigendecomposition)."""
    vals, vecs = np.linalg.eigh(0.5 * (mat + mat.T))
    if vals[0] <= 0:
        raise DegenerateBody(f"matrix not positive definite (min eig {vals[0]})")
    return (vecs * vals**power) @ vecs.T


def _det_normalized(mat):
    n = mat.shape[0]
    det = abs(float(np.linalg.det(mat)))
    return mat / det ** (1.0 / n)


def default_rule(n, samples, seed, kind=None):
    """Antithetic MC rule, switching to the deterministic product rule for n <= 3."""
    if kind is None:
        kind = "product_lowdim" if n <= 3 else "antithetic"
    return quad.sphere_rule(n, samples, seed, kind)


# -- isotropic position and constant -------------------------------------------


def isotropic_position(body, tol=1e-6, max_iter=50, rule=None, seed=0, samples=2**14):
    """Whitening iteration T <- Cov^(-1/2) det-normalized, on a fixed rule.

    Keeping the rule fixed across iterations makes the map a deterministic
    contraction, so the on-rule anisotropy can be driven far below the rule's
    own statistical error. Returns (PositionResult, L_K of the positioned,
    volume-normalized body).
    """
    n = body.dim
    if rule is None:
        rule = default_rule(n, samples, seed)
    t = np.eye(n)
    trace = []
    current = body
    cov = None
    for it in range(1, max_iter + 1):
        cov = quad.covariance(current, rule)
        eigs = np.linalg.eigvalsh(cov)
        if eigs[0] <= 1e-14 * max(eigs[-1], 1e-300):
            raise DegenerateBody("covariance numerically singular")
        aniso = float(np.linalg.norm(n * cov / np.trace(cov) - np.eye(n)))
        trace.append(aniso)
        if aniso < tol:
            break
        w = _det_normalized(_sym_power(cov, -0.5))
        t = w @ t
        current = bodies.apply_map(t, body)
    else:
        raise NoConvergence(
            f"anisotropy {trace[-1]:.3e} after {max_iter} iterations", trace
        )
    vol = bodies.exact_volume(current)
    if vol is None:
        vol = quad.volume(current, rule).value
    lk = math.sqrt(np.trace(cov) / n) / vol ** ((n + 2) / (2.0 * n))
    result = PositionResult(_det_normalized(t), it, trace[-1], trace)
    return result, lk


def isotropic_constant(body, rule) -> float:
    """Position-free isotropic constant det(Cov)^(1/2n) / Vol^(1/2 + 1/n)."""
    n = body.dim
    cov = quad.covariance(body, rule)
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise DegenerateBody("covariance not positive definite")
    vol = bodies.exact_volume(body)
    if vol is None:
        vol = quad.volume(body, rule).value
    return math.exp(logdet / (2.0 * n)) / vol ** (0.5 + 1.0 / n)


# -- enclosing ellipsoids and the Lowner/John positions -------------------------


def mvee(points, tol=1e-7, max_iter=100000):
    """Minimum-volume centered ellipsoid enclosing a symmetric point set,
    via multiplicative barycentric-coordinate updates."""
    ell, _, _ = _mvee_full(points, tol, max_iter)
    return ell


def _mvee_full(points, tol, max_iter=100000):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m, n = pts.shape
    if np.linalg.matrix_rank(pts) < n:
        raise DegeneratePoints("points do not span R^n")
    u = np.full(m, 1.0 / m)
    gap = np.inf
    for it in range(1, max_iter + 1):
        s = np.einsum("i,ij,ik->jk", u, pts, pts)
        sinv = np.linalg.inv(s)
        kappa = np.einsum("ij,jk,ik->i", pts, sinv, pts)
        gap = float(np.max(kappa) / n - 1.0)
        if gap <= tol:
            break
        u *= kappa / n
        u /= u.sum()
    else:
        raise NoConvergence(f"enclosing-ellipsoid gap {gap:.2e} after {max_iter} iterations")
    matrix = 0.5 * (sinv + sinv.T) / n
    return bodies.Ellipsoid(matrix), gap, it


def _boundary_or_vertices(body, rule):
    inner, lin = body, None
    if isinstance(body, bodies.LinearImage):
        inner, lin = body.inner, body.lin
    if isinstance(inner, (bodies.VPolytope, bodies.Cube, bodies.CrossPolytope)) or (
        isinstance(inner, bodies.HPolytope) and inner.dim <= 7
    ):
        verts = inner.vertices()
        return verts if lin is None else verts @ lin.matrix.T
    rho = body.radial_many(rule.points)
    return rule.points * rho[:, None]


def lowner_position(body, rule=None, tol=1e-7, seed=0, samples=2**12):
    """Map the minimal enclosing ellipsoid to a round ball (det 1)."""
    if not body.is_convex:
        raise BodySpecError("Lowner position needs a convex body")
    if rule is None:
        rule = default_rule(body.dim, samples, seed)
    points = _boundary_or_vertices(body, rule)
    ell, gap, iters = _mvee_full(points, tol)
    t = _det_normalized(_sym_power(ell.matrix, 0.5))
    return PositionResult(t, iters, gap, [gap])


def john_position(body, rule=None, tol=1e-7, seed=0, samples=2**12):
    """John position via duality: the inverse-transpose of the polar's Lowner map."""
    res = lowner_position(bodies.polar(body), rule=rule, tol=tol, seed=seed, samples=samples)
    t = _det_normalized(np.linalg.inv(res.matrix).T)
    return PositionResult(t, res.iterations, res.residual, res.trace)


def _contact_candidates(body, tol, seed):
    """Unit directions where the inscribed unit ball can touch the body."""
    inner, lin_inv = body, None
    if isinstance(body, bodies.LinearImage):
        inner, lin_inv = body.inner, body.lin.inverse

    rows = quad._linear_constraints(body)
    cands = []
    if rows is not None:
        norms = np.linalg.norm(rows, axis=1)
        near = np.abs(norms - 1.0) <= tol
        cands.append(rows[near] / norms[near, None])
    verts = None
    if isinstance(inner, (bodies.VPolytope, bodies.Cube, bodies.CrossPolytope)):
        verts = inner.vertices()
        if lin_inv is not None:
            verts = verts @ np.linalg.inv(lin_inv).T
    if verts is not None:
        vnorms = np.linalg.norm(verts, axis=1)
        near = np.abs(vnorms - 1.0) <= tol
        cands.append(verts[near] / vnorms[near, None])
    if not cands or sum(c.shape[0] for c in cands) == 0:
        probe = default_rule(body.dim, 2**13, seed, kind="antithetic")
        rho = body.radial_many(probe.points)
        near = np.abs(rho - 1.0) <= tol
        cands = [probe.points[near]]
    allc = np.vstack([c for c in cands if c.shape[0]])
    if allc.shape[0] == 0:
        raise InsufficientContacts("no touching directions found", best_residual=None)
    return bodies._dedupe_antipodal(allc, tol=1e-6)


def john_decomposition(body, tol=1e-4, seed=0) -> IsotropicMeasure:
    """Contact points and weights with sum lambda v v^T = I (NNLS fit).

    Requires the inscribed ball to be the unit ball within tol. Antipodal
    contacts are folded together, so the weights satisfy sum lambda = n
    counting each contact line once.
    """
    from scipy.optimize import nnls

    n = body.dim
    _, rin = quad.circumradius_inradius(body, default_rule(n, 2**13, seed, "antithetic"))
    if abs(rin - 1.0) > 10 * tol:
        raise BodySpecError(f"inscribed radius {rin:.6f} is not 1; position the body first")
    cands = _contact_candidates(body, tol, seed)
    m = cands.shape[0]
    iu = np.triu_indices(n)
    scale = np.where(iu[0] == iu[1], 1.0, math.sqrt(2.0))
    design = np.empty((len(iu[0]), m))
    for j, v in enumerate(cands):
        design[:, j] = (np.outer(v, v))[iu] * scale
    target = np.eye(n)[iu] * scale
    lam, resid = nnls(design, target)
    if resid > 1e-6:
        raise InsufficientContacts(
            f"decomposition residual {resid:.2e} exceeds 1e-6", best_residual=resid
        )
    keep = lam > 1e-12
    return IsotropicMeasure(cands[keep], lam[keep])


def gaussian_mixture_check(measure: IsotropicMeasure, N, seed) -> float:
    """Spectral distance of the empirical covariance of sum g_i sqrt(l_i) v_i
    from the identity; O(sqrt(n/N)) when the measure is isotropic."""
    if measure.residual() > 1e-8:
        raise BodySpecError("measure is not isotropic within 1e-8")
    rng = np.random.default_rng(seed)
    mix = measure.vectors * np.sqrt(measure.weights)[:, None]
    z = rng.standard_normal((N, measure.vectors.shape[0])) @ mix
    emp = z.T @ z / N
    return float(np.linalg.norm(emp - np.eye(measure.dim), 2))


def isotropic_prop_ratio(body, measure: IsotropicMeasure, rule) -> float:
    """sqrt(n) M_2(body) / (sum lambda_i ||v_i||_body^2)^(1/2)."""
    if measure.residual() > 1e-6:
        raise BodySpecError("measure is not isotropic")
    m2 = quad.mean_norm(body, 2, rule)
    gnorms = body.gauge_many(measure.vectors)
    denom = math.sqrt(float(np.dot(measure.weights, gnorms**2)))
    return math.sqrt(body.dim) * m2 / denom


# -- Lewis position for atomic p-norm data ---------------------------------------


def push_atoms(lin: bodies.LinearMap, weights, vectors, p):
    """Atoms of the image body: ||x||_{T(L)}^p = sum c |T^-T u|^p |<x, unit>|^p."""
    w = np.asarray(weights, dtype=float).copy()
    u = np.atleast_2d(np.asarray(vectors, dtype=float)) @ lin.inverse
    norms = np.linalg.norm(u, axis=1)
    return w * norms**p, u / norms[:, None]


def lewis_position(weights, vectors, p, tol=1e-10, max_iter=5000):
    """Position the body ||x||^p = sum c_i |<x, u_i>|^p so the representing
    measure is isotropic (damped fixed point on the second-moment matrix).

    Returns (PositionResult, IsotropicMeasure); the measure holds the
    converged unit atoms and weights, with sum c = n at convergence.
    """
    c = np.asarray(weights, dtype=float).copy()
    u = np.atleast_2d(np.asarray(vectors, dtype=float)).copy()
    m, n = u.shape
    if np.any(c <= 0):
        raise BodySpecError("weights must be positive")
    if np.linalg.matrix_rank(u) < n:
        raise DegeneratePoints("vectors do not span R^n")
    norms = np.linalg.norm(u, axis=1)
    c *= norms**p
    u /= norms[:, None]

    accum = np.eye(n)
    power = 0.5
    last = np.inf
    trace = []
    for it in range(1, max_iter + 1):
        mom = np.einsum("i,ij,ik->jk", c, u, u)
        resid = float(np.linalg.norm(mom - np.eye(n)))
        trace.append(resid)
        if resid < tol:
            break
        if resid > last:
            power = 0.25  # damp once the undamped step starts oscillating
        last = resid
        step = _sym_power(mom, -power)
        accum = step @ accum
        w = u @ step
        norms = np.linalg.norm(w, axis=1)
        u = w / norms[:, None]
        c *= norms**p
    else:
        raise NoConvergence(f"Lewis residual {trace[-1]:.2e} after {max_iter} iterations", trace)

    # atoms were transported by accum = T^-T, so the body map is its inverse-transpose
    t = _det_normalized(np.linalg.inv(accum).T)
    return PositionResult(t, it, trace[-1], trace), IsotropicMeasure(u, c)


def atomic_circumradius(weights, vectors, p, rule=None, polish=True):
    """Circumradius of {x : sum c |<x,u>|^p <= 1}: max rho over directions,
    refined by local minimization of the gauge on the sphere."""
    from scipy.optimize import minimize

    c = np.asarray(weights, dtype=float)
    u = np.atleast_2d(np.asarray(vectors, dtype=float))
    n = u.shape[1]
    if rule is None:
        rule = default_rule(n, 2**12, 7, kind="antithetic")

    def gauge_p(x):
        return float(np.dot(c, np.abs(u @ x) ** p))

    vals = np.dot(np.abs(rule.points @ u.T) ** p, c)
    best = rule.points[int(np.argmin(vals))]
    if polish:
        res = minimize(lambda y: gauge_p(y / np.linalg.norm(y)), best, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000})
        if res.fun < gauge_p(best):
            best = res.x / np.linalg.norm(res.x)
    return 1.0 / gauge_p(best) ** (1.0 / p)


# -- minimal surface-area position ---------------------------------------------


def _facet_length_2d(row, all_rows):
    """Exact length of the segment facet {<row, x> = 1} clipped by the others."""
    a = row
    q = np.array([-a[1], a[0]]) / np.linalg.norm(a)
    p = a / np.dot(a, a)
    lo, hi = -np.inf, np.inf
    for b in all_rows:
        s, d = float(np.dot(b, p)), float(np.dot(b, q))
        for sign in (1.0, -1.0):
            ss, dd = sign * s, sign * d
            if abs(dd) < 1e-14:
                if ss > 1.0 + 1e-12:
                    return 0.0
                continue
            bound = (1.0 - ss) / dd
            if dd > 0:
                hi = min(hi, bound)
            else:
                lo = max(lo, bound)
    return max(0.0, hi - lo)


def _facet_area_3d(row, all_rows):
    """Exact polygon area of the facet {<row, x> = 1} clipped by the others."""
    from .radon import householder_frame

    a = row
    unit = a / np.linalg.norm(a)
    frame = householder_frame(unit)
    p = a / np.dot(a, a)
    # one-sided constraints g.y <= h in facet-plane coordinates
    gs, hs = [], []
    for b in all_rows:
        s = float(np.dot(b, p))
        g = frame.T @ b
        gs.extend([g, -g])
        hs.extend([1.0 - s, 1.0 + s])
    gs = np.array(gs)
    hs = np.array(hs)
    verts = []
    k = len(hs)
    for i in range(k):
        for j in range(i + 1, k):
            mat = np.array([gs[i], gs[j]])
            if abs(np.linalg.det(mat)) < 1e-12:
                continue
            y = np.linalg.solve(mat, np.array([hs[i], hs[j]]))
            if np.all(gs @ y <= hs + 1e-9):
                verts.append(y)
    if len(verts) < 3:
        return 0.0
    verts = np.array(verts)
    center = verts.mean(axis=0)
    order = np.argsort(np.arctan2(verts[:, 1] - center[1], verts[:, 0] - center[0]))
    v = verts[order]
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _facet_areas(rows, samples, seed):
    """Area of each facet pair representative: exact in n <= 3, shared-sample
    Monte Carlo on the facet hyperplanes otherwise."""
    from .radon import householder_frame

    n = rows.shape[1]
    both = np.vstack([rows, -rows])
    if n == 2:
        return np.array([_facet_length_2d(a, rows) for a in rows])
    if n == 3:
        return np.array([_facet_area_3d(a, rows) for a in rows])

    poly = bodies.HPolytope(rows)
    big_r = float(np.max(np.linalg.norm(poly.vertices(), axis=1)))
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((samples, n - 1))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    unit_ball = dirs * rng.random(samples)[:, None] ** (1.0 / (n - 1))
    areas = np.empty(rows.shape[0])
    for i, a in enumerate(rows):
        anorm = float(np.linalg.norm(a))
        r2 = big_r**2 - 1.0 / anorm**2
        if r2 <= 0:
            areas[i] = 0.0
            continue
        rf = math.sqrt(r2)
        frame = householder_frame(a / anorm)
        pts = a / anorm**2 + (rf * unit_ball) @ frame.T
        inside = np.max(pts @ both.T, axis=1) <= 1.0 + 1e-12
        areas[i] = quad.ball_volume(n - 1) * rf ** (n - 1) * inside.mean()
    return areas


def minimal_surface_position(body, tol=1e-6, max_iter=300, area_samples=2**13, seed=0):
    """Fixed point driving the normalized facet-area measure to isotropy
    (the surface-area-minimizing position criterion)."""
    if isinstance(body, bodies.Cube):
        rows0 = body.facet_rows()
    elif isinstance(body, bodies.HPolytope):
        rows0 = body.rows
    else:
        raise BodySpecError("minimal surface-area position implemented for H-polytopes")
    n = rows0.shape[1]
    t = np.eye(n)
    trace = []
    for it in range(1, max_iter + 1):
        rows = rows0 @ np.linalg.inv(t)
        areas = _facet_areas(rows, area_samples, seed)
        total = float(areas.sum())
        if not np.isfinite(total) or total <= 0:
            raise FacetAreaFailure("facet areas vanished or overflowed")
        units = rows / np.linalg.norm(rows, axis=1, keepdims=True)
        mom = (n / total) * np.einsum("i,ij,ik->jk", areas, units, units)
        resid = float(np.linalg.norm(mom - np.eye(n)))
        trace.append(resid)
        if resid < tol:
            break
        t = _det_normalized(_sym_power(mom, 0.5)) @ t
    else:
        raise NoConvergence(
            f"area-measure residual {trace[-1]:.2e} after {max_iter} iterations", trace
        )
    return PositionResult(_det_normalized(t), it, trace[-1], trace)


def surface_area_measure_residual(body, area_samples=2**13, seed=0):
    """Isotropy residual of n/Vol(boundary) * (facet-area measure)."""
    if isinstance(body, bodies.Cube):
        rows = body.facet_rows()
    elif isinstance(body, bodies.HPolytope):
        rows = body.rows
    else:
        raise BodySpecError("facet-area measure needs an H-polytope")
    n = rows.shape[1]
    areas = _facet_areas(rows, area_samples, seed)
    units = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    mom = (n / float(areas.sum())) * np.einsum("i,ij,ik->jk", areas, units, units)
    return float(np.linalg.norm(mom - np.eye(n)))


# -- type/cotype-2 probes --------------------------------------------------------


def type2_lower_bound(body, m, trials, gaussian_N, seed) -> TypeCotypeEstimate:
    """Monte Carlo lower bounds on the Gaussian type-2 and cotype-2 constants.

    Each trial draws m boundary points (vertices, for polytopes with vertex
    data) and compares (E ||sum g_i x_i||^2)^(1/2) against (sum ||x_i||^2)^(1/2).
    The single-vector construction pins both bounds at >= 1 exactly.
    """
    rng = np.random.default_rng(seed)
    n = body.dim
    t2 = 1.0
    c2 = 1.0
    verts = None
    if isinstance(body, (bodies.VPolytope, bodies.Cube, bodies.CrossPolytope)):
        verts = body.vertices()
    for _ in range(trials):
        if verts is not None:
            x = verts[rng.integers(0, verts.shape[0], size=m)]
        else:
            dirs = rng.standard_normal((m, n))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            x = dirs * body.radial_many(dirs)[:, None]
        denom = math.sqrt(float(np.sum(body.gauge_many(x) ** 2)))
        g = rng.standard_normal((gaussian_N, m))
        num = math.sqrt(float(np.mean(body.gauge_many(g @ x) ** 2)))
        ratio = num / denom
        t2 = max(t2, ratio)
        c2 = max(c2, 1.0 / ratio)
    return TypeCotypeEstimate(t2, c2, trials, seed)


def lk_type2_bound_check(body, t2_value, rule, position="lowner", seed=0) -> float:
    """L_K * sqrt(n) * M_2(K) / T2 for the volume-1 body in the requested
    position; the type-2 theorem asserts this is bounded by a universal constant."""
    n = body.dim
    if position == "lowner":
        res = lowner_position(body, rule=None, seed=seed)
    elif position == "isotropic":
        res, _ = isotropic_position(body, rule=rule, seed=seed)
    else:
        raise BodySpecError(f"unknown position {position!r}")
    positioned = bodies.apply_map(res.matrix, body)
    vol = bodies.exact_volume(positioned)
    if vol is None:
        vol = quad.volume(positioned, rule).value
    k1 = bodies.scale_body(positioned, vol ** (-1.0 / n))
    lk = isotropic_constant(body, rule)
    m2 = quad.mean_norm(k1, 2, rule)
    return lk * math.sqrt(n) * m2 / t2_value
