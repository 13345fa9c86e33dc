"""Catalog of named, reproducible verification checks.

Each check is a pure function of its parameters (seed included) returning a
CheckRecord with observed scalars, the window or oracle it was held against,
and a pass/fail/report_only verdict. Unknown universal constants are
operationalized as declared windows (config-overridable); identities are held
to 3 combined standard errors plus a 1% cushion. A check fails only on a
window violation; precondition problems raise instead.
"""

from __future__ import annotations

import math
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import bodies, positions, quadrature as quad, radon
from .errors import (
    BodySpecError,
    ContainmentViolated,
    DegeneratePolytope,
    RankOutOfRange,
    UnknownCheck,
)

WINDOWS_VERSION = 1

# Declared acceptance windows for the unknown universal constants. Tightening
# any of these is a deliberate, versioned act.
DEFAULT_WINDOWS = {
    "check_main1_sandwich": {"hi_over_sqrt_p0": 5.0, "lo_times_sqrt_p0": 0.1},
    "check_theorem1": {"hi": 5.0},
    "check_theorem2": {"hi": 5.0},
    "check_main2_sandwich": {"lo": 0.05, "hi_times_script_l": 5.0},
    "check_theorem3": {"hi": 5.0},
    "check_theorem4": {"hi": 10.0},
    "check_psi_profile": {"growth_slope": 3.0, "flat_lo": 0.3, "flat_hi": 3.0},
    "check_santalo": {"root_lo": 0.5},
    "check_polytope_sweep": {"spread_factor": 3.0},
    "check_kv_meanradius": {
        "mr_times_m": (0.5, 2.0),
        "k_norm": (0.3, 3.0),
        "mr_norm": (0.4, 3.0),
    },
    "check_grinberg_invariance": {"spread_slack": 0.02},
    "check_theorem2_meanradius": (0.1, 1.0),
}

# Injected reference constants; never silently computed.
DEFAULT_CONSTANTS = {"script_l": 1.0, "script_l_2k": 1.0}


def t2_reference(p):
    """Reference type-2 constant for the l_p family: sqrt(p) for p >= 2."""
    return math.sqrt(p) if p >= 2 else 1.0


@dataclass
class CheckRecord:
    check_id: str
    params: dict
    observed: dict
    bounds: dict
    verdict: str
    runtime: float = 0.0

    def canonical(self):
        """Determinism-comparable content (runtime stripped)."""
        return {
            "check_id": self.check_id,
            "params": self.params,
            "observed": self.observed,
            "bounds": self.bounds,
            "verdict": self.verdict,
        }

    @property
    def passed(self):
        return self.verdict in ("pass", "report_only")


@dataclass
class LevyRepresentation:
    """Atomic representation ||x||^p = sum_i mu_i |<x, theta_i>|^p.

    Quacks like a Body (dim / gauge_many / radial_many), so every quadrature
    functional accepts it directly.
    """

    p: float
    dirs: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.dirs = np.atleast_2d(np.asarray(self.dirs, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        norms = np.linalg.norm(self.dirs, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-9:
            raise BodySpecError("representation atoms must be unit directions")
        if np.any(self.weights <= 0):
            raise BodySpecError("representation weights must be positive")

    @property
    def dim(self):
        return self.dirs.shape[1]

    is_convex = property(lambda self: self.p >= 1)

    @classmethod
    def lp_ball(cls, n, p, radius=1.0):
        return cls(p, np.eye(n), np.full(n, radius ** (-float(p))))

    def gauge_many(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return (np.abs(pts @ self.dirs.T) ** self.p @ self.weights) ** (1.0 / self.p)

    def radial_many(self, dirs):
        return 1.0 / self.gauge_many(dirs)

    def scaled(self, t):
        """Atoms of t * L."""
        return LevyRepresentation(self.p, self.dirs, self.weights * t ** (-self.p))

    def apply_map(self, lin: bodies.LinearMap):
        w, u = positions.push_atoms(lin, self.weights, self.dirs, self.p)
        return LevyRepresentation(self.p, u, w)

    def validate_against(self, body, n_dirs=200, seed=0, tol=1e-9):
        """Max relative gauge mismatch on random directions."""
        rng = np.random.default_rng(seed)
        dirs = rng.standard_normal((n_dirs, self.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        mine = self.gauge_many(dirs)
        theirs = body.gauge_many(dirs)
        err = float(np.max(np.abs(mine - theirs) / theirs))
        if err > tol:
            raise BodySpecError(f"atomic representation mismatch {err:.2e}")
        return err


def sphere_moment_abs(n, p):
    """E_sigma |theta_1|^p on S^{n-1}, closed form."""
    return math.exp(
        math.lgamma((p + 1) / 2.0)
        + math.lgamma(n / 2.0)
        - math.lgamma((n + p) / 2.0)
        - 0.5 * math.log(math.pi)
    )


def atomic_mean_norm(rep: LevyRepresentation):
    """Closed-form M_p of an atomic body: (E|theta_1|^p * sum mu)^(1/p)."""
    n = rep.dim
    return (sphere_moment_abs(n, rep.p) * float(rep.weights.sum())) ** (1.0 / rep.p)


def p0_of(p, n):
    return max(1.0, min(float(p), float(n)))


# -- corpus ----------------------------------------------------------------------


def corpus_body(name, n, seed=0):
    """Named test bodies; random ones are seeded and reproducible."""
    rng = np.random.default_rng([seed, zlib.crc32(name.encode())])
    if name == "ball":
        return bodies.EuclideanBall(1.0, n)
    if name == "cube":
        return bodies.Cube(0.5, n)  # volume 1
    if name == "cube_unit":
        return bodies.Cube(1.0, n)
    if name == "cross":
        return bodies.CrossPolytope(1.0, n)
    if name == "cross_vol1":
        return bodies.CrossPolytope(0.5 * math.factorial(n) ** (1.0 / n), n)
    if name.startswith("lp_"):
        return bodies.LpBall(float(name[3:]), 1.0, n)
    if name == "ellipsoid":
        a = rng.standard_normal((n, n)) * 0.4 + np.eye(n)
        return bodies.Ellipsoid(a @ a.T)
    if name == "sheared_cube":
        return bodies.apply_map(bodies.random_sl_map(n, rng), bodies.Cube(0.5, n))
    if name == "sheared_ball":
        return bodies.apply_map(bodies.random_sl_map(n, rng), bodies.EuclideanBall(1.0, n))
    if name == "hpoly":
        rows = rng.standard_normal((3 * n, n))
        rows /= np.linalg.norm(rows, axis=1, keepdims=True)
        return bodies.HPolytope(rows)
    if name == "vpoly":
        half = rng.standard_normal((3 * n, n))
        half /= np.linalg.norm(half, axis=1, keepdims=True)
        return bodies.VPolytope.from_half(half)
    raise BodySpecError(f"unknown corpus body {name!r}")


_SYMMETRIC_ISOTROPIC = (bodies.EuclideanBall, bodies.Cube, bodies.CrossPolytope, bodies.LpBall)


def prepare_isotropic(body, target_vol, seed, samples):
    """Isotropic position scaled to the target volume; returns (body, L_K).

    Coordinate-symmetric bodies are isotropic already and skip the solver.
    """
    n = body.dim
    rule = positions.default_rule(n, samples, seed)
    if isinstance(body, _SYMMETRIC_ISOTROPIC):
        positioned, lk = body, positions.isotropic_constant(body, rule)
    else:
        res, lk = positions.isotropic_position(
            body, tol=1e-8, max_iter=60, rule=rule
        )
        positioned = bodies.apply_map(res.matrix, body)
    vol = bodies.exact_volume(positioned)
    if vol is None:
        vol = quad.volume(positioned, rule).value
    return bodies.scale_body(positioned, (target_vol / vol) ** (1.0 / n)), lk


def scale_to_contain(outer, inner, rule, margin=1e-9):
    """Smallest homothety of `outer` covering `inner` on the rule directions."""
    s = float(np.max(inner.radial_many(rule.points) / outer.radial_many(rule.points)))
    return bodies.scale_body(outer, s * (1.0 + margin)), s


def scale_to_fit(inner, outer, rule, margin=1e-9):
    """Largest homothety of `inner` inside `outer` on the rule directions."""
    s = float(np.min(outer.radial_many(rule.points) / inner.radial_many(rule.points)))
    return bodies.scale_body(inner, s * (1.0 - margin)), s


def _require_contains(outer, inner, rule, what):
    ok, worst = bodies.contains(outer, inner, rule, tol=1e-6)
    if not ok:
        raise ContainmentViolated(f"{what}: worst radial ratio {worst:.6f} < 1")
    return worst


def _subseed(seed, check_id, k=0):
    return int((seed * 1000003 + zlib.crc32(check_id.encode()) + 7919 * k) % 2**63)


# -- registry --------------------------------------------------------------------

CHECKS = {}


def register(check_id, description, report_only=False):
    def wrap(fn):
        CHECKS[check_id] = {
            "fn": fn,
            "description": description,
            "report_only": report_only,
        }
        return fn

    return wrap


def run_check(check_id, **params) -> CheckRecord:
    if check_id not in CHECKS:
        raise UnknownCheck(f"no check named {check_id!r}")
    t0 = time.perf_counter()
    record = CHECKS[check_id]["fn"](**params)
    record.runtime = time.perf_counter() - t0
    return record


def list_checks():
    return {cid: meta["description"] for cid, meta in sorted(CHECKS.items())}


# -- identity checks --------------------------------------------------------------


@register(
    "check_fubini1",
    "dual mixed volume of order -p against the atom-by-atom directional moment"
    " expansion (two independent estimators of the same integral)",
)
def check_fubini1(n=3, p=1.0, body="cube", levy="lp", seed=0, samples=2**13):
    base = _subseed(seed, "check_fubini1")
    rule_lhs = quad.sphere_rule(n, samples, base, "antithetic")
    rule_rhs = quad.sphere_rule(n, samples, base + 1, "antithetic")
    g_body = corpus_body(body, n, seed)
    rep = LevyRepresentation.lp_ball(n, p) if levy == "lp" else LevyRepresentation.lp_ball(n, p).apply_map(
        bodies.random_sl_map(n, np.random.default_rng(base + 2))
    )
    lhs = quad.dual_mixed_volume(rep, g_body, -p, rule_lhs)
    rhs_val = 0.0
    rhs_se = 0.0
    for mu, theta in zip(rep.weights, rep.dirs):
        est = quad.directional_moment_integral(g_body, theta, p, rule_rhs)
        rhs_val += mu * est.value
        rhs_se += mu * est.std_error
    rhs_val *= (n + p) / n
    rhs_se *= (n + p) / n
    tol = 3.0 * (lhs.std_error + rhs_se) + 0.01 * abs(rhs_val)
    ok = abs(lhs.value - rhs_val) <= tol
    return CheckRecord(
        "check_fubini1",
        {"n": n, "p": p, "body": body, "levy": levy, "seed": seed, "samples": samples},
        {"lhs": lhs.value, "rhs": rhs_val, "diff": lhs.value - rhs_val,
         "se_lhs": lhs.std_error, "se_rhs": rhs_se},
        {"tolerance": tol},
        "pass" if ok else "fail",
    )


# -- sandwich and theorem checks ---------------------------------------------------


@register(
    "check_main1_sandwich",
    "two-sided isotropic-constant sandwich from order -p dual mixed volumes"
    " against a volume-matched ball",
)
def check_main1_sandwich(n=3, p=2.0, body="cube", seed=0, samples=2**13, window=None):
    base = _subseed(seed, "check_main1_sandwich")
    rule = quad.sphere_rule(n, samples, base, "antithetic")
    k_iso, lk = prepare_isotropic(corpus_body(body, n, seed), quad.ball_volume(n), seed, samples)
    ball = bodies.EuclideanBall(1.0, n)
    lp = bodies.LpBall(p if p > 0 else 2.0, 1.0, n)
    l_body, _ = scale_to_contain(lp, k_iso, rule)
    num = quad.dual_mixed_volume(l_body, ball, -p, rule)
    den = quad.dual_mixed_volume(l_body, k_iso, -p, rule)
    r = lk * (num.value / den.value) ** (1.0 / p)
    w = window or DEFAULT_WINDOWS["check_main1_sandwich"]
    p0 = p0_of(p, n)
    ok = (r / math.sqrt(p0) <= w["hi_over_sqrt_p0"]) and (r * math.sqrt(p0) >= w["lo_times_sqrt_p0"])
    return CheckRecord(
        "check_main1_sandwich",
        {"n": n, "p": p, "body": body, "seed": seed, "samples": samples},
        {"ratio": r, "ratio_over_sqrt_p0": r / math.sqrt(p0), "L_K": lk, "p0": p0},
        dict(w),
        "pass" if ok else "fail",
    )


@register(
    "check_theorem1",
    "isotropic constant bounded by sqrt(p0) over the p-th mean norm of a"
    " covering body with an atomic p-norm representation",
)
def check_theorem1(n=3, p=2.0, body="cube", seed=0, samples=2**13, window=None):
    base = _subseed(seed, "check_theorem1")
    rule = quad.sphere_rule(n, samples, base, "antithetic")
    k_iso, lk = prepare_isotropic(corpus_body(body, n, seed), quad.ball_volume(n), seed, samples)
    rep = LevyRepresentation.lp_ball(n, p)
    scale = float(np.max(k_iso.radial_many(rule.points) * rep.gauge_many(rule.points)))
    rep_scaled = rep.scaled(scale * (1.0 + 1e-9))
    _require_contains(rep_scaled, k_iso, rule, "covering body must contain K")
    mp = quad.mean_norm(rep_scaled, p, rule) if p > 0 else quad.mean_norm(rep_scaled, 0, rule)
    p0 = p0_of(p, n)
    ratio = lk * mp / math.sqrt(p0)
    w = window or DEFAULT_WINDOWS["check_theorem1"]
    ok = ratio <= w["hi"]
    return CheckRecord(
        "check_theorem1",
        {"n": n, "p": p, "body": body, "seed": seed, "samples": samples},
        {"ratio": ratio, "L_K": lk, "M_p_L": mp, "p0": p0, "cover_scale": scale},
        dict(w),
        "pass" if ok else "fail",
    )


def _ellipsoid_sum_cover(n, k, k_iso, rule, seed, terms=3):
    """Random k-radial sum of ellipsoids scaled to cover the body."""
    rng = np.random.default_rng(seed)
    parts = [(1.0, bodies.EuclideanBall(1.0, n))]
    for _ in range(terms - 1):
        a = rng.standard_normal((n, n)) * 0.3 + np.eye(n)
        parts.append((float(rng.random() + 0.5), bodies.Ellipsoid(a @ a.T)))
    l_raw = radon.bp_body_from_ellipsoids(k, parts)
    covered, _ = scale_to_contain(l_raw, k_iso, rule)
    return covered


@register(
    "check_theorem2",
    "isotropic constant bounded by the k-th mean radius of a covering"
    " k-radial-sum body, normalized by the dimension-k reference constant",
)
def check_theorem2(n=4, k=1, body="cube", mode="ellipsoid_sum", seed=0, samples=2**13,
                   script_l=None, window=None):
    base = _subseed(seed, "check_theorem2")
    rule = quad.sphere_rule(n, samples, base, "antithetic")
    if not 1 <= k <= n - 1:
        raise RankOutOfRange(f"k={k} outside 1..{n - 1}")
    k_iso, lk = prepare_isotropic(corpus_body(body, n, seed), quad.ball_volume(n), seed, samples)
    if mode == "ellipsoid_sum":
        l_body = _ellipsoid_sum_cover(n, k, k_iso, rule, base + 1)
    elif mode == "density":
        g = radon.GrassmannDensity(rank=n - k, kind="exp_trace",
                                   matrix=0.5 * np.diag(np.linspace(1.0, 0.0, n)))
        raw = radon.bp_body_from_density(k, g, n, samples=512, seed=base + 1)
        l_body, _ = scale_to_contain(raw, k_iso, rule)
    else:
        raise BodySpecError(f"unknown mode {mode!r}")
    _require_contains(l_body, k_iso, rule, "radial-sum body must contain K")
    sl = script_l if script_l is not None else DEFAULT_CONSTANTS["script_l"]
    mr = quad.mean_radius(l_body, k, rule)
    ratio = lk / (sl * mr)
    w = window or DEFAULT_WINDOWS["check_theorem2"]
    ok = ratio <= w["hi"]
    return CheckRecord(
        "check_theorem2",
        {"n": n, "k": k, "body": body, "mode": mode, "seed": seed,
         "samples": samples, "script_l": sl},
        {"ratio": ratio, "L_K": lk, "MR_k_L": mr},
        dict(w),
        "pass" if ok else "fail",
    )


@register(
    "check_main2_sandwich",
    "two-sided isotropic-constant sandwich from order k dual mixed volumes,"
    " with the Grassmannian section-average identity cross-validated for"
    " density-built bodies",
)
def check_main2_sandwich(n=4, k=1, body="cube", mode="density", seed=0, samples=2**13,
                         script_l=None, density_frames=2048, grassmann_N=256, window=None):
    base = _subseed(seed, "check_main2_sandwich")
    rule = quad.sphere_rule(n, samples, base, "antithetic")
    if not 1 <= k <= n - 1:
        raise RankOutOfRange(f"k={k} outside 1..{n - 1}")
    k_iso, lk = prepare_isotropic(corpus_body(body, n, seed), quad.ball_volume(n), seed, samples)
    ball = bodies.EuclideanBall(1.0, n)
    observed = {}
    if mode == "density":
        g = radon.GrassmannDensity(rank=n - k, kind="exp_trace",
                                   matrix=0.4 * np.diag(np.linspace(1.0, -0.2, n)))
        l_body = radon.bp_body_from_density(k, g, n, samples=density_frames, seed=base + 1)
        # cross-validate the section-average identity on K itself
        sphere_est = quad.dual_mixed_volume(l_body, k_iso, k, rule)
        _, pencil_se = radon.dual_radon_profile(l_body, rule.points)
        extra_se = quad.ball_volume(n) * float(
            np.dot(rule.weights, pencil_se * k_iso.radial_many(rule.points) ** (n - k))
        )
        frames = quad.grassmann_sample(n, n - k, grassmann_N, base + 2)
        sub = quad.sphere_rule(n - k, 1024, base + 3, "product_lowdim" if n - k <= 3 else "antithetic")
        vols = np.array([quad.section_volume(k_iso, fr, sub) for fr in frames])
        gvals = g.evaluate_frames(np.stack([fr.columns for fr in frames]))
        scale = quad.ball_volume(n) / quad.ball_volume(n - k)
        grass_val = scale * float(np.mean(gvals * vols))
        grass_se = scale * float(np.std(gvals * vols, ddof=1) / math.sqrt(grassmann_N))
        tol = 3.0 * (sphere_est.std_error + extra_se + grass_se) + 0.01 * abs(grass_val)
        fubini2_ok = abs(sphere_est.value - grass_val) <= tol
        observed.update(
            {"fubini2_sphere": sphere_est.value, "fubini2_grassmann": grass_val,
             "fubini2_tol": tol, "fubini2_ok": float(fubini2_ok)}
        )
    else:
        l_body = _ellipsoid_sum_cover(n, k, k_iso, rule, base + 1)
        fubini2_ok = True
    num = quad.dual_mixed_volume(l_body, ball, k, rule)
    den = quad.dual_mixed_volume(l_body, k_iso, k, rule)
    ratio = lk / (num.value / den.value) ** (1.0 / k)
    sl = script_l if script_l is not None else DEFAULT_CONSTANTS["script_l"]
    w = window or DEFAULT_WINDOWS["check_main2_sandwich"]
    ok = (w["lo"] <= ratio <= w["hi_times_script_l"] * sl) and fubini2_ok
    observed.update({"ratio": ratio, "L_K": lk})
    return CheckRecord(
        "check_main2_sandwich",
        {"n": n, "k": k, "body": body, "mode": mode, "seed": seed,
         "samples": samples, "script_l": sl},
        observed,
        dict(w),
        "pass" if ok else "fail",
    )


@register(
    "check_theorem3",
    "isotropic constant bounded by sqrt(p0) times the p-th mean width of the"
    " covering quotient-type body after its atomic core is positioned",
)
def check_theorem3(n=3, q=2.0, body="cross_vol1", seed=0, samples=2**13, window=None):
    base = _subseed(seed, "check_theorem3")
    rule = quad.sphere_rule(n, samples, base, "antithetic")
    p = q / (q - 1.0) if q > 1 else float(n)
    p0 = p0_of(p, n)
    k_iso, lk = prepare_isotropic(corpus_body(body, n, seed), quad.ball_volume(n), seed, samples)
    rep_unit = LevyRepresentation.lp_ball(n, p)
    # L = (tB)^o covers K iff tB sits inside K^o; compare radial functions there
    rho_k_polar = 1.0 / k_iso.support_many(rule.points)
    rho_core = 1.0 / rep_unit.gauge_many(rule.points)
    t = float(np.min(rho_k_polar / rho_core))
    rep = rep_unit.scaled(t * (1.0 - 1e-9))
    worst = float(np.min(rho_k_polar * rep.gauge_many(rule.points)))
    if worst < 1.0 - 1e-6:
        raise ContainmentViolated(f"core must fit inside the polar: worst ratio {worst:.6f}")
    pos, measure = positions.lewis_position(rep.weights, rep.dirs, p)
    pushed = rep.apply_map(pos.map)
    m_star = atomic_mean_norm(pushed)
    m_star_quad = quad.mean_norm(pushed, p, rule)
    ratio = lk / (math.sqrt(p0) * m_star)
    w = window or DEFAULT_WINDOWS["check_theorem3"]
    ok = ratio <= w["hi"]
    return CheckRecord(
        "check_theorem3",
        {"n": n, "q": q, "body": body, "seed": seed, "samples": samples},
        {"ratio": ratio, "L_K": lk, "M_star_p": m_star, "M_star_p_quadrature": m_star_quad,
         "p": p, "p0": p0, "lewis_residual": pos.residual,
         "lewis_weight_sum": measure.weight_sum()},
        dict(w),
        "pass" if ok else "fail",
    )


@register(
    "check_theorem4",
    "isotropic constant bounded via the k-th mean radius of a radial-sum body"
    " sitting inside the polar, k up to n/3",
)
def check_theorem4(n=3, k=1, body="cube", seed=0, samples=2**13, script_l_2k=None, window=None):
    base = _subseed(seed, "check_theorem4")
    rule = quad.sphere_rule(n, samples, base, "antithetic")
    if k > n // 3:
        raise RankOutOfRange(f"k={k} exceeds n/3={n // 3}")
    k_iso, lk = prepare_isotropic(corpus_body(body, n, seed), quad.ball_volume(n), seed, samples)
    k_polar = bodies.polar(k_iso) if not isinstance(k_iso, bodies.LinearImage) else k_iso.polar_body()
    rng = np.random.default_rng(base + 1)
    parts = [(1.0, bodies.EuclideanBall(1.0, n))]
    a = rng.standard_normal((n, n)) * 0.2 + np.eye(n)
    parts.append((0.5, bodies.Ellipsoid(a @ a.T)))
    l_raw = radon.bp_body_from_ellipsoids(k, parts)
    l_body, _ = scale_to_fit(l_raw, k_polar, rule)
    _require_contains(k_polar, l_body, rule, "radial-sum body must fit inside the polar")
    sl = script_l_2k if script_l_2k is not None else DEFAULT_CONSTANTS["script_l_2k"]
    mr = quad.mean_radius(l_body, k, rule)
    ratio = lk * mr / sl**2
    w = window or DEFAULT_WINDOWS["check_theorem4"]
    ok = ratio <= w["hi"]
    return CheckRecord(
        "check_theorem4",
        {"n": n, "k": k, "body": body, "seed": seed, "samples": samples, "script_l_2k": sl},
        {"ratio": ratio, "L_K": lk, "MR_k_L": mr},
        dict(w),
        "pass" if ok else "fail",
    )


# -- Grassmannian section checks ---------------------------------------------------


@register(
    "check_avg_sections",
    "Haar-average section volume never exceeds the best worst-case section"
    " over unit-determinant repositionings",
)
def check_avg_sections(n=3, m=2, body="cube", T_samples=6, n_frames=128, sub_samples=1024,
                       seed=0):
    base = _subseed(seed, "check_avg_sections")
    a_body = corpus_body(body, n, seed)
    frames = quad.grassmann_sample(n, m, n_frames, base)
    sub = quad.sphere_rule(m, sub_samples, base + 1, "product_lowdim" if m <= 3 else "antithetic")
    vols = np.array([quad.section_volume(a_body, fr, sub) for fr in frames])
    lhs = float(vols.mean())
    lhs_se = float(vols.std(ddof=1) / math.sqrt(n_frames))
    rng = np.random.default_rng(base + 2)
    maps = [np.eye(n)] + [bodies.random_sl_map(n, rng).matrix for _ in range(T_samples - 1)]
    rhs = np.inf
    for t in maps:
        imaged = bodies.apply_map(t, a_body)
        worst = max(quad.section_volume(imaged, fr, sub) for fr in frames)
        rhs = min(rhs, worst)
    rel_se = lhs_se / lhs if lhs > 0 else 0.0
    ok = lhs <= rhs * (1.0 + 3.0 * rel_se + 1e-9)
    return CheckRecord(
        "check_avg_sections",
        {"n": n, "m": m, "body": body, "T_samples": T_samples,
         "n_frames": n_frames, "seed": seed},
        {"lhs_mean_section": lhs, "rhs_min_max_section": rhs, "lhs_se": lhs_se},
        {"inequality": "lhs <= rhs within 3 relative SE"},
        "pass" if ok else "fail",
    )


@register(
    "check_grinberg_invariance",
    "the n-th-power section-volume mean is invariant under unit-determinant"
    " maps, and the round ball maximizes it at fixed volume",
)
def check_grinberg_invariance(n=3, m=2, body="cube", n_maps=10, n_frames=160,
                              sub_samples=1024, seed=0, window=None):
    base = _subseed(seed, "check_grinberg_invariance")
    a_body = corpus_body(body, n, seed)
    frames = quad.grassmann_sample(n, m, n_frames, base)
    sub = quad.sphere_rule(m, sub_samples, base + 1, "product_lowdim" if m <= 3 else "antithetic")
    rng = np.random.default_rng(base + 2)
    maps = [np.eye(n)] + [bodies.random_sl_map(n, rng).matrix for _ in range(n_maps - 1)]
    phis = []
    rel_ses = []
    for t in maps:
        imaged = bodies.apply_map(t, a_body)
        vols = np.array([quad.section_volume(imaged, fr, sub) for fr in frames]) ** n
        mean = float(vols.mean())
        se = float(vols.std(ddof=1) / math.sqrt(n_frames))
        phis.append(mean ** (1.0 / n))
        rel_ses.append(se / (n * mean))
    phis = np.array(phis)
    spread = float((phis.max() - phis.min()) / phis.mean())
    w = window or DEFAULT_WINDOWS["check_grinberg_invariance"]
    allowance = 3.0 * 2.0 * float(np.max(rel_ses)) + w["spread_slack"]
    vol = bodies.exact_volume(a_body)
    if vol is None:
        vol = quad.volume(a_body, positions.default_rule(n, 2**13, base + 3)).value
    phi_ball = quad.ball_volume(m) * (vol / quad.ball_volume(n)) ** (m / n)
    extremal_ok = phis[0] <= phi_ball * (1.0 + 3.0 * rel_ses[0] + 0.005)
    ok = spread <= allowance and extremal_ok
    return CheckRecord(
        "check_grinberg_invariance",
        {"n": n, "m": m, "body": body, "n_maps": n_maps, "n_frames": n_frames, "seed": seed},
        {"phi": float(phis[0]), "spread": spread, "allowance": allowance,
         "phi_ball_same_volume": phi_ball, "extremal_ok": float(extremal_ok)},
        dict(w),
        "pass" if ok else "fail",
    )


# -- moment-profile, duality-product and family checks ------------------------------


@register(
    "check_psi_profile",
    "growth profile of directional p-th moments on a volume-1 isotropic body:"
    " at most linear in p above 1, flat below 1",
)
def check_psi_profile(n=3, body="cube", p_grid=(0.5, 1.0, 2.0, 4.0, 8.0), seed=0,
                      samples=2**14, window=None):
    base = _subseed(seed, "check_psi_profile")
    rule = positions.default_rule(n, samples, base)
    k_iso, _ = prepare_isotropic(corpus_body(body, n, seed), 1.0, seed, samples)
    thetas = {
        "e1": np.eye(n)[0],
        "diag": np.ones(n) / math.sqrt(n),
    }
    rng = np.random.default_rng(base + 1)
    extra = rng.standard_normal(n)
    thetas["random"] = extra / np.linalg.norm(extra)
    w = window or DEFAULT_WINDOWS["check_psi_profile"]
    profile = {}
    ok = True
    for name, theta in thetas.items():
        m2 = quad.moment_p(k_iso, theta, 2.0, rule)
        for p in p_grid:
            r = quad.moment_p(k_iso, theta, float(p), rule) / m2
            profile[f"{name}_p{p}"] = r
            if p >= 1.0:
                ok = ok and (r <= w["growth_slope"] * max(p, 1.0))
            else:
                ok = ok and (w["flat_lo"] <= r <= w["flat_hi"])
    return CheckRecord(
        "check_psi_profile",
        {"n": n, "body": body, "p_grid": list(p_grid), "seed": seed, "samples": samples},
        profile,
        dict(w),
        "pass" if ok else "fail",
    )


@register(
    "check_santalo",
    "volume product of a convex body and its polar: at most the ball's"
    " (round case extremal), with the n-th root bounded away from zero",
)
def check_santalo(n=3, body="cube", seed=0, samples=2**14, window=None):
    base = _subseed(seed, "check_santalo")
    k_body = corpus_body(body, n, seed)
    if not k_body.is_convex:
        raise BodySpecError("volume-product check needs a convex body")
    k_polar = bodies.polar(k_body)
    rel_se = 0.0
    vol_k = bodies.exact_volume(k_body)
    if vol_k is None:
        est = quad.volume(k_body, quad.sphere_rule(n, samples, base, "antithetic"))
        vol_k, rel_se = est.value, est.std_error / est.value
    vol_p = bodies.exact_volume(k_polar)
    if vol_p is None:
        est = quad.volume(k_polar, quad.sphere_rule(n, samples, base + 1, "antithetic"))
        vol_p = est.value
        rel_se += est.std_error / est.value
    s = vol_k * vol_p / quad.ball_volume(n) ** 2
    w = window or DEFAULT_WINDOWS["check_santalo"]
    ok = (s <= 1.0 + 3.0 * rel_se + 1e-12) and (s ** (1.0 / n) >= w["root_lo"])
    return CheckRecord(
        "check_santalo",
        {"n": n, "body": body, "seed": seed, "samples": samples},
        {"volume_product": s, "nth_root": s ** (1.0 / n), "rel_se": rel_se},
        dict(w),
        "pass" if ok else "fail",
    )


def _random_symmetric_polytope(n, m, kind, rng):
    for _ in range(10):
        try:
            if kind == "facets":
                rows = rng.standard_normal((m, n))
                rows /= np.linalg.norm(rows, axis=1, keepdims=True)
                return bodies.HPolytope(rows)
            half = rng.standard_normal((m, n))
            half /= np.linalg.norm(half, axis=1, keepdims=True)
            return bodies.VPolytope.from_half(half)
        except (BodySpecError, Exception):
            continue
    raise DegeneratePolytope(f"could not draw a nondegenerate {kind} polytope")


@register(
    "check_polytope_sweep",
    "isotropic constants of random symmetric polytopes grow no faster than"
    " sqrt(log(1+m)) in the facet count (log(1+m) in the vertex count)",
)
def check_polytope_sweep(n=4, m_list=(8, 16, 32), trials=20, kind="facets", seed=0,
                         samples=2**12, window=None):
    base = _subseed(seed, "check_polytope_sweep")
    rng = np.random.default_rng(base)
    rule = quad.sphere_rule(n, samples, base + 1, "antithetic")
    norm = (lambda m: math.sqrt(math.log1p(m))) if kind == "facets" else (lambda m: math.log1p(m))
    degenerate = 0
    normalized = {}
    for m in m_list:
        worst = 0.0
        for _ in range(trials):
            try:
                poly = _random_symmetric_polytope(n, m, kind, rng)
                worst = max(worst, positions.isotropic_constant(poly, rule))
            except DegeneratePolytope:
                degenerate += 1
        normalized[m] = worst / norm(m)
    vals = np.array(list(normalized.values()))
    factor = float(vals.max() / vals.min())
    w = window or DEFAULT_WINDOWS["check_polytope_sweep"]
    ok = factor < w["spread_factor"]
    return CheckRecord(
        "check_polytope_sweep",
        {"n": n, "m_list": list(m_list), "trials": trials, "kind": kind,
         "seed": seed, "samples": samples},
        {**{f"normalized_m{m}": v for m, v in normalized.items()},
         "spread_factor": factor, "degenerate_redraws": float(degenerate)},
        dict(w),
        "pass" if ok else "fail",
    )


@register(
    "check_kv_meanradius",
    "mean radius of the volume-1 cube behaves like the reciprocal mean norm,"
    " with the critical-dimension parameter tracking sqrt(log(1+n))",
)
def check_kv_meanradius(n_list=(2, 3, 4, 5, 6, 7, 8, 9, 10), seed=0, samples=2**13,
                        window=None):
    base = _subseed(seed, "check_kv_meanradius")
    w = window or DEFAULT_WINDOWS["check_kv_meanradius"]
    observed = {}
    ok = True
    for n in n_list:
        rule = positions.default_rule(n, samples, base + n)
        q_cube = bodies.Cube(0.5, n)
        m1 = quad.mean_norm(q_cube, 1.0, rule)
        mr1 = quad.mean_radius(q_cube, 1.0, rule)
        b = 2.0  # reciprocal inradius of the volume-1 cube
        k_crit = n * (m1 / b) ** 2
        prod = mr1 * m1
        k_norm = k_crit / math.sqrt(math.log1p(n))
        mr_norm = mr1 * math.sqrt(math.log1p(n)) / math.sqrt(n)
        observed[f"n{n}_mr_times_m"] = prod
        observed[f"n{n}_k_norm"] = k_norm
        observed[f"n{n}_mr_norm"] = mr_norm
        ok = ok and w["mr_times_m"][0] <= prod <= w["mr_times_m"][1]
        ok = ok and w["k_norm"][0] <= k_norm <= w["k_norm"][1]
        ok = ok and w["mr_norm"][0] <= mr_norm <= w["mr_norm"][1]
    # ball control: exact reciprocal relation
    rule = positions.default_rule(3, samples, base)
    ball = bodies.EuclideanBall(2.0, 3)
    control = quad.mean_radius(ball, 1.0, rule) * quad.mean_norm(ball, 1.0, rule)
    observed["ball_control"] = control
    ok = ok and abs(control - 1.0) < 1e-9
    return CheckRecord(
        "check_kv_meanradius",
        {"n_list": list(n_list), "seed": seed, "samples": samples},
        observed,
        dict(w),
        "pass" if ok else "fail",
    )


@register(
    "check_bobkov_nazarov",
    "containment ratios of an unconditional isotropic volume-1 body between"
    " the volume-1 cube and the volume-1 l1 ball (recorded, not asserted)",
    report_only=True,
)
def check_bobkov_nazarov(n=4, body="cube", seed=0, samples=2**13):
    base = _subseed(seed, "check_bobkov_nazarov")
    rule = quad.sphere_rule(n, samples, base, "antithetic")
    k_body, _ = prepare_isotropic(corpus_body(body, n, seed), 1.0, seed, samples)
    q_cube = bodies.Cube(0.5, n)
    p_l1 = bodies.CrossPolytope(0.5 * math.factorial(n) ** (1.0 / n), n)
    rho_k = k_body.radial_many(rule.points)
    inner = float(np.min(rho_k / q_cube.radial_many(rule.points)))
    outer = float(np.min(p_l1.radial_many(rule.points) / rho_k))
    return CheckRecord(
        "check_bobkov_nazarov",
        {"n": n, "body": body, "seed": seed, "samples": samples},
        {"inner_ratio_vs_cube": inner, "outer_ratio_vs_l1ball": outer},
        {"note": "report only; external inclusion used as a probe"},
        "report_only",
    )


# -- suites ------------------------------------------------------------------------

SUITES = {
    "smoke": [
        ("check_fubini1", {"n": 3, "p": 2.0, "body": "ball", "samples": 2**11}),
        ("check_santalo", {"n": 3, "body": "ball"}),
        ("check_main1_sandwich", {"n": 3, "p": 2.0, "body": "ball", "samples": 2**11}),
        ("check_theorem2", {"n": 3, "k": 1, "body": "ball", "samples": 2**11}),
        ("check_kv_meanradius", {"n_list": [2, 3], "samples": 2**11}),
    ],
    "default": [
        ("check_fubini1", {"n": 3, "p": 1.0, "body": "cube"}),
        ("check_fubini1", {"n": 4, "p": 3.0, "body": "ellipsoid"}),
        ("check_main1_sandwich", {"n": 4, "p": 2.0, "body": "cube"}),
        ("check_theorem1", {"n": 4, "p": 2.0, "body": "cube"}),
        ("check_theorem2", {"n": 4, "k": 2, "body": "cube"}),
        ("check_main2_sandwich", {"n": 4, "k": 1, "body": "cube"}),
        ("check_theorem3", {"n": 4, "q": 2.0, "body": "cross_vol1"}),
        ("check_theorem4", {"n": 4, "k": 1, "body": "cube"}),
        ("check_avg_sections", {"n": 3, "m": 2, "body": "cube"}),
        ("check_grinberg_invariance", {"n": 3, "m": 2, "body": "cube"}),
        ("check_psi_profile", {"n": 3, "body": "cube"}),
        ("check_santalo", {"n": 4, "body": "cross"}),
        ("check_kv_meanradius", {}),
        ("check_bobkov_nazarov", {"n": 4, "body": "lp_2"}),
    ],
    "full": [],  # populated below
}

SUITES["full"] = SUITES["default"] + [
    ("check_polytope_sweep", {"n": 4, "kind": "facets"}),
    ("check_polytope_sweep", {"n": 4, "kind": "vertices"}),
    ("check_theorem3", {"n": 3, "q": 3.0, "body": "cube"}),
    ("check_main2_sandwich", {"n": 4, "k": 2, "body": "cross_vol1", "mode": "ellipsoid_sum"}),
]
