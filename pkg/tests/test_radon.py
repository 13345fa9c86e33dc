import math
import threading

import numpy as np
import pytest

from cgx import bodies as B, quadrature as Q, radon as R
from cgx.errors import BadRank, BodySpecError
from conftest import random_directions


def dual_radon_reference(g, theta, N, seed):
    """Independent estimator: frames through theta built by direct QR of
    projected Gaussians (different construction path from the library's)."""
    n = theta.shape[0]
    m = g.rank
    rng = np.random.default_rng(seed)
    proj = np.eye(n) - np.outer(theta, theta)
    vals = np.empty(N)
    for i in range(N):
        raw = proj @ rng.standard_normal((n, m - 1))
        q, r = np.linalg.qr(raw)
        q = q * np.sign(np.diag(r))[None, :]
        frame = np.column_stack([theta, q])
        vals[i] = g.evaluate_frames(frame[None])[0]
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(N))


class TestHouseholderFrame:
    def test_orthonormal_and_perpendicular(self):
        for theta in random_directions(5, 20, 0):
            f = R.householder_frame(theta)
            assert np.allclose(f.T @ f, np.eye(4), atol=1e-12)
            assert np.allclose(f.T @ theta, 0.0, atol=1e-12)

    def test_axis_direction(self):
        f = R.householder_frame(np.array([0.0, 0.0, 1.0]))
        assert np.allclose(f.T @ f, np.eye(2), atol=1e-14)

    def test_deterministic(self):
        theta = random_directions(4, 1, 3)[0]
        assert np.array_equal(R.householder_frame(theta), R.householder_frame(theta))


class TestRadonM:
    def test_constant_function(self):
        sub = Q.sphere_rule(2, 256, 0, "product_lowdim")
        for frame in Q.grassmann_sample(4, 2, 5, 1):
            assert R.radon_m(lambda d: np.ones(len(d)), frame, sub) == pytest.approx(1.0)

    def test_radial_power_gives_section_volume(self):
        body = B.Ellipsoid(np.diag([1.0, 2.0, 0.5, 1.5]))
        sub = Q.sphere_rule(2, 512, 0, "product_lowdim")
        for frame in Q.grassmann_sample(4, 2, 3, 2):
            via_radon = R.radon_m(lambda d: body.radial_many(d) ** 2, frame, sub)
            assert via_radon * Q.ball_volume(2) == pytest.approx(
                Q.section_volume(body, frame, sub), rel=1e-12
            )

    def test_second_moment_in_and_out_of_plane(self):
        sub = Q.sphere_rule(2, 1024, 0, "product_lowdim")
        frame = Q.grassmann_sample(5, 2, 1, 7)[0]
        inside = frame.columns[:, 0]
        outside = np.linalg.svd(frame.columns)[0][:, -1]  # orthogonal complement
        f_in = lambda d: (d @ inside) ** 2
        f_out = lambda d: (d @ outside) ** 2
        assert R.radon_m(f_in, frame, sub) == pytest.approx(0.5, abs=1e-10)
        assert R.radon_m(f_out, frame, sub) == pytest.approx(0.0, abs=1e-12)


class TestDualRadon:
    def test_constant_density(self):
        g = R.GrassmannDensity(rank=2, kind="constant")
        for theta in random_directions(4, 5, 4):
            assert R.dual_radon_m(g, theta, 64, 0) == pytest.approx(1.0)

    def test_against_independent_reference(self):
        g = R.GrassmannDensity(rank=3, kind="exp_trace",
                               matrix=np.diag([0.8, 0.2, -0.3, 0.0, 0.1]))
        theta = random_directions(5, 1, 9)[0]
        mine = R.dual_radon_m(g, theta, 4096, 11)
        ref, ref_se = dual_radon_reference(g, theta, 4096, 13)
        assert abs(mine - ref) <= 3 * 2 * ref_se

    def test_duality_pairing(self):
        # sphere-side pairing of f with the transformed density equals the
        # Grassmannian-side pairing of the subsphere average with the density
        n, m = 4, 2
        rng = np.random.default_rng(15)
        a = rng.standard_normal((n, n)) * 0.3 + np.eye(n)
        ell = B.Ellipsoid(a @ a.T)
        f = lambda d: ell.radial_many(d) ** 2
        for g in (
            R.GrassmannDensity(rank=m, kind="constant", value=0.7),
            R.GrassmannDensity(rank=m, kind="exp_trace", matrix=0.5 * np.diag([1.0, 0, 0, -0.5])),
            R.GrassmannDensity(
                rank=m, kind="mixture",
                components=((0.5, R.GrassmannDensity(rank=m, kind="constant")),
                            (1.0, R.GrassmannDensity(rank=m, kind="exp_trace",
                                                     matrix=0.3 * np.eye(n)))),
            ),
        ):
            rule = Q.sphere_rule(n, 2**10, 17, "antithetic")
            pencil = R.DualRadonBody(n - m, g, n, samples=512, seed=19)
            rstar, pencil_se = R.dual_radon_profile(pencil, rule.points)
            fvals = f(rule.points)
            lhs_vals = fvals * rstar
            lhs = float(np.dot(rule.weights, lhs_vals))
            lhs_se = float(np.sqrt(np.sum((rule.weights * (lhs_vals - lhs)) ** 2)))
            # pencil frames are shared across directions: correlated error
            lhs_se += float(np.dot(rule.weights, fvals * pencil_se))
            frames = Q.grassmann_sample(n, m, 1024, 21)
            sub = Q.sphere_rule(m, 256, 23, "product_lowdim")
            rhs_vals = np.array(
                [R.radon_m(f, fr, sub) * g.evaluate(fr) for fr in frames]
            )
            rhs = float(rhs_vals.mean())
            rhs_se = float(rhs_vals.std(ddof=1) / math.sqrt(len(frames)))
            assert abs(lhs - rhs) <= 3 * (lhs_se + rhs_se) + 0.01 * abs(rhs)


class TestIntersectionBodies:
    def test_ball_sections_are_discs(self):
        for theta in random_directions(3, 4, 25):
            got = R.intersection_radius(B.EuclideanBall(1.0, 3), theta)
            assert got == pytest.approx(math.pi, rel=1e-12)

    def test_ball_any_dimension(self):
        for n in (2, 4, 5):
            theta = random_directions(n, 1, 27)[0]
            got = R.intersection_radius(B.EuclideanBall(1.0, n), theta, sub_samples=4096)
            assert got == pytest.approx(Q.ball_volume(n - 1), rel=1e-6)

    def test_ellipsoid_matches_quadratic_profile(self):
        # hyperplane sections of an ellipsoid form another ellipsoid's radial
        # profile; fit the quadratic form to 1/rho^2 and check the residual
        m = np.diag([1.0, 0.5, 2.0])
        ell = B.Ellipsoid(m)
        dirs = random_directions(3, 60, 29)
        rho = R.intersection_radius_many(ell, dirs, sub_samples=2**12)
        inv2 = 1.0 / rho**2
        design = np.column_stack([
            dirs[:, 0] ** 2, dirs[:, 1] ** 2, dirs[:, 2] ** 2,
            2 * dirs[:, 0] * dirs[:, 1], 2 * dirs[:, 0] * dirs[:, 2],
            2 * dirs[:, 1] * dirs[:, 2],
        ])
        coef, *_ = np.linalg.lstsq(design, inv2, rcond=None)
        fit = design @ coef
        rel_resid = float(np.max(np.abs(fit - inv2) / inv2))
        assert rel_resid < 1e-2
        want = np.linalg.det(m) / Q.ball_volume(2) ** 2 * np.linalg.inv(m)
        got = np.array([[coef[0], coef[3], coef[4]],
                        [coef[3], coef[1], coef[5]],
                        [coef[4], coef[5], coef[2]]])
        assert np.allclose(got, want, rtol=1e-3)

    def test_intersection_body_node_caches(self):
        body = B.IntersectionBodyOf(B.EuclideanBall(1.0, 3), sub_samples=256)
        theta = random_directions(3, 1, 31)[0]
        first = B.radial(body, theta)
        second = B.radial(body, theta)
        assert first == second == pytest.approx(math.pi, rel=1e-12)
        assert len(body._cache) == 1

    def test_cache_is_thread_safe(self):
        body = B.IntersectionBodyOf(B.Ellipsoid(np.diag([1.0, 2.0, 0.7])), sub_samples=128)
        dirs = random_directions(3, 64, 33)
        results = {}

        def work(tag):
            results[tag] = body.radial_many(dirs)

        threads = [threading.Thread(target=work, args=(i,)) for i in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        for tag in results:
            assert np.array_equal(results[tag], results[0])


class TestRadialSumConstructions:
    def test_single_ellipsoid_identity(self):
        ell = B.Ellipsoid(np.diag([1.0, 2.0]))
        rps = R.bp_body_from_ellipsoids(1, [(1.0, ell)])
        dirs = random_directions(2, 16, 35)
        assert np.allclose(rps.radial_many(dirs), ell.radial_many(dirs))

    def test_two_balls_pythagoras(self):
        rps = R.bp_body_from_ellipsoids(
            2, [(1.0, B.EuclideanBall(1.0, 3)), (1.0, B.EuclideanBall(2.0, 3))]
        )
        theta = random_directions(3, 1, 37)[0]
        assert B.radial(rps, theta) == pytest.approx(math.sqrt(5.0))

    def test_rejects_non_ellipsoids(self):
        with pytest.raises(BodySpecError):
            R.bp_body_from_ellipsoids(1, [(1.0, B.Cube(1.0, 2))])

    def test_random_sum_smoke_positive_continuous(self):
        rng = np.random.default_rng(39)
        terms = []
        for _ in range(5):
            a = rng.standard_normal((4, 4)) * 0.3 + np.eye(4)
            terms.append((float(rng.random() + 0.2), B.Ellipsoid(a @ a.T)))
        rps = R.bp_body_from_ellipsoids(2, terms)
        dirs = random_directions(4, 1000, 41)
        rho = rps.radial_many(dirs)
        assert np.all(rho > 0) and np.all(np.isfinite(rho))

    def test_volume_additive_at_k_equals_n(self):
        n = 3
        rng = np.random.default_rng(43)
        a = rng.standard_normal((n, n)) * 0.2 + np.eye(n)
        terms = [(1.2, B.EuclideanBall(0.8, n)), (0.7, B.Ellipsoid(a @ a.T))]
        rps = B.RadialPowerSum(n, terms)
        rule = Q.sphere_rule(n, 2**13, 45, "product_lowdim")
        lhs = Q.volume(rps, rule).value
        rhs = sum(w * Q.volume(b, rule).value for w, b in terms)
        assert lhs == pytest.approx(rhs, rel=1e-12)


class TestDensityBodies:
    def test_haar_density_gives_unit_ball(self):
        body = R.bp_body_from_density(1, R.GrassmannDensity(rank=2, kind="constant"), 3)
        dirs = random_directions(3, 8, 47)
        assert np.allclose(body.radial_many(dirs), 1.0)

    def test_anisotropic_density_orients_the_body(self):
        g = R.GrassmannDensity(rank=2, kind="exp_trace", matrix=np.diag([2.0, 0, 0, 0]))
        body = R.bp_body_from_density(2, g, 4, samples=512, seed=3)
        assert B.radial(body, np.eye(4)[0]) > B.radial(body, np.eye(4)[3])

    def test_rank_validation(self):
        with pytest.raises(BadRank):
            R.bp_body_from_density(2, R.GrassmannDensity(rank=2, kind="constant"), 3)

    def test_normalization_estimate(self):
        g = R.GrassmannDensity(rank=2, kind="exp_trace", matrix=0.3 * np.eye(4))
        est = g.normalization(4, 512, 7)
        assert est.value > 0 and est.std_error > 0


class TestApproxUnity:
    def test_axis_radii(self):
        xi = np.array([0.0, 1.0, 0.0])
        ell = R.approx_unity_ellipsoid(R.ApproxUnityParams(xi, 4.0, 0.25))
        assert B.radial(ell, xi) == pytest.approx(4.0)
        assert B.radial(ell, np.array([1.0, 0.0, 0.0])) == pytest.approx(0.25)

    def test_parameter_validation(self):
        with pytest.raises(BodySpecError):
            R.ApproxUnityParams(np.array([1.0, 0.0]), 0.9, 0.5)

    def test_kernel_averages_converge_monotonically(self):
        # |kernel(f) - f(xi)| decreases along the schedule for smooth even f
        n = 3
        xi = np.array([0.6, 0.8, 0.0])
        tests = [
            lambda d: d[:, 0] ** 2,
            lambda d: np.exp(-np.sum((d - xi) ** 2, axis=1)) + np.exp(-np.sum((d + xi) ** 2, axis=1)),
            lambda d: 1.0 + d[:, 1] ** 4,
        ]
        for f in tests:
            target = float(f(xi[None, :])[0])
            errs = [
                abs(R.approx_unity_apply(f, xi, a, b, n) - target)
                for a, b in R.DEFAULT_UNITY_SCHEDULE
            ]
            assert all(e2 < e1 + 1e-12 for e1, e2 in zip(errs, errs[1:]))
            assert errs[-1] < 0.1 * max(abs(target), 1.0)

    def test_mr_ratio_endpoints(self):
        n = 3
        out_axis = R.mr_ratio_demo(n, np.array([1.0, 0.0, 0.0]))
        assert out_axis["limit"] == pytest.approx(math.sqrt(n))
        assert out_axis["rows"][-1]["ratio"] == pytest.approx(math.sqrt(n), rel=0.1)
        diag = np.ones(n) / math.sqrt(n)
        out_diag = R.mr_ratio_demo(n, diag)
        assert out_diag["limit"] == pytest.approx(1.0)
        assert out_diag["rows"][-1]["ratio"] == pytest.approx(1.0, rel=0.1)

    def test_mr_ratio_interpolates(self):
        n = 3
        xi = np.array([1.0, 1.0, 0.0]) / math.sqrt(2)
        out = R.mr_ratio_demo(n, xi)
        assert 1.0 < out["limit"] < math.sqrt(n)
        ratios = [row["ratio"] for row in out["rows"]]
        # monotone approach toward the pointwise limit
        gaps = [abs(r - out["limit"]) for r in ratios]
        assert gaps[-1] <= gaps[0]
