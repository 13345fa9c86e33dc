import numpy as np
import pytest

from cgx import bodies as B, checks as C
from cgx.errors import BodySpecError, RankOutOfRange, UnknownCheck

LIGHT = [
    ("check_fubini1", dict(n=3, p=1.0, body="cube", samples=2**11)),
    ("check_fubini1", dict(n=3, p=3.0, body="ellipsoid", levy="lp_image", samples=2**11)),
    ("check_main1_sandwich", dict(n=3, p=2.0, body="cube", samples=2**11)),
    ("check_theorem1", dict(n=3, p=1.0, body="cube", samples=2**11)),
    ("check_theorem2", dict(n=4, k=2, body="cube", samples=2**11)),
    ("check_theorem2", dict(n=4, k=1, body="cube", mode="density", samples=2**11)),
    ("check_main2_sandwich", dict(n=4, k=1, body="cube", samples=2**11,
                                  density_frames=1024, grassmann_N=128)),
    ("check_main2_sandwich", dict(n=4, k=2, body="cross_vol1", mode="ellipsoid_sum",
                                  samples=2**11)),
    ("check_theorem3", dict(n=3, q=2.0, body="cross_vol1", samples=2**11)),
    ("check_theorem3", dict(n=4, q=4.0, body="cube", samples=2**11)),
    ("check_theorem4", dict(n=3, k=1, body="cube", samples=2**11)),
    ("check_theorem4", dict(n=6, k=2, body="cube", samples=2**11)),
    ("check_avg_sections", dict(n=3, m=2, body="cube", n_frames=64)),
    ("check_avg_sections", dict(n=4, m=2, body="ellipsoid", n_frames=64)),
    ("check_grinberg_invariance", dict(n=3, m=2, body="cube", n_frames=96)),
    ("check_psi_profile", dict(n=3, body="cube", samples=2**12)),
    ("check_psi_profile", dict(n=3, body="cross_vol1", samples=2**12)),
    ("check_santalo", dict(n=3, body="cube")),
    ("check_santalo", dict(n=4, body="ellipsoid")),
    ("check_polytope_sweep", dict(n=4, m_list=(8, 16), trials=4, samples=2**11)),
    ("check_polytope_sweep", dict(n=4, m_list=(8, 16), trials=4, kind="vertices",
                                  samples=2**11)),
    ("check_kv_meanradius", dict(n_list=(2, 4, 6), samples=2**11)),
    ("check_bobkov_nazarov", dict(n=4, body="cube", samples=2**11)),
]


@pytest.mark.parametrize("check_id,params", LIGHT,
                         ids=[f"{c}-{i}" for i, (c, _) in enumerate(LIGHT)])
def test_catalog_passes(check_id, params):
    rec = C.run_check(check_id, **params)
    assert rec.passed, rec.observed
    assert rec.check_id == check_id
    assert rec.runtime >= 0


def test_every_registered_check_is_exercised():
    exercised = {cid for cid, _ in LIGHT}
    assert exercised == set(C.CHECKS)


def test_determinism_same_seed_same_record():
    a = C.run_check("check_main1_sandwich", n=3, p=2.0, body="ellipsoid",
                    seed=11, samples=2**11)
    b = C.run_check("check_main1_sandwich", n=3, p=2.0, body="ellipsoid",
                    seed=11, samples=2**11)
    assert a.canonical() == b.canonical()


def test_unknown_check():
    with pytest.raises(UnknownCheck):
        C.run_check("check_nonexistent")


def test_rank_out_of_range():
    with pytest.raises(RankOutOfRange):
        C.run_check("check_theorem4", n=4, k=2, body="cube", samples=2**10)
    with pytest.raises(RankOutOfRange):
        C.run_check("check_theorem2", n=3, k=3, body="cube", samples=2**10)


def test_window_override_can_fail_a_check():
    rec = C.run_check("check_theorem1", n=3, p=2.0, body="cube", samples=2**11,
                      window={"hi": 1e-6})
    assert rec.verdict == "fail"


def test_report_only_never_fails():
    meta = C.CHECKS["check_bobkov_nazarov"]
    assert meta["report_only"]
    rec = C.run_check("check_bobkov_nazarov", n=3, body="cube", samples=2**10)
    assert rec.verdict == "report_only"
    assert rec.passed


class TestLevyRepresentation:
    def test_matches_lp_ball_gauge(self):
        for p, radius in ((1.0, 1.0), (2.0, 0.7), (3.5, 1.3)):
            rep = C.LevyRepresentation.lp_ball(3, p, radius)
            err = rep.validate_against(B.LpBall(p, radius, 3), n_dirs=200, seed=1)
            assert err <= 1e-9

    def test_pushforward_matches_linear_image(self):
        rng = np.random.default_rng(5)
        t = B.random_sl_map(3, rng)
        rep = C.LevyRepresentation.lp_ball(3, 3.0).apply_map(t)
        imaged = B.apply_map(t, B.LpBall(3.0, 1.0, 3))
        assert rep.validate_against(imaged, n_dirs=200, seed=2) <= 1e-9

    def test_scaling(self):
        rep = C.LevyRepresentation.lp_ball(2, 2.0).scaled(3.0)
        assert rep.gauge_many(np.array([[3.0, 0.0]]))[0] == pytest.approx(1.0)

    def test_atoms_must_be_unit(self):
        with pytest.raises(BodySpecError):
            C.LevyRepresentation(2.0, np.array([[2.0, 0.0]]), np.array([1.0]))


class TestCorpus:
    def test_volume_one_entries(self):
        assert B.exact_volume(C.corpus_body("cube", 5)) == pytest.approx(1.0)
        assert B.exact_volume(C.corpus_body("cross_vol1", 5)) == pytest.approx(1.0)

    def test_seeded_bodies_reproduce(self):
        a = C.corpus_body("ellipsoid", 4, seed=9)
        b = C.corpus_body("ellipsoid", 4, seed=9)
        assert np.array_equal(a.matrix, b.matrix)

    def test_unknown_name(self):
        with pytest.raises(BodySpecError):
            C.corpus_body("torus", 3)


def test_atomic_mean_norm_closed_form_matches_quadrature():
    from cgx import quadrature as Q

    rep = C.LevyRepresentation.lp_ball(4, 3.0, 1.2)
    rule = Q.sphere_rule(4, 2**14, 3, "antithetic")
    closed = C.atomic_mean_norm(rep)
    sampled = Q.mean_norm(rep, 3.0, rule)
    assert closed == pytest.approx(sampled, rel=5e-3)


def test_suites_reference_known_checks():
    for name, jobs in C.SUITES.items():
        for cid, params in jobs:
            assert cid in C.CHECKS, (name, cid)
