import numpy as np
import pytest
from numpy.testing import assert_array_equal

from randgsvd.gsvd import GmpPair, gsvd_full_rank
from randgsvd.rgsvd import rgsvd, rgsvd_overdetermined, rgsvd_underdetermined, sketched_identities
from randgsvd.sampling import SamplerConfig
from randgsvd.tikhonov import solve_exact, solve_rgsvd, TikhonovProblem


def _decaying(rng, m, n, rate=0.5):
    u = np.linalg.qr(rng.standard_normal((m, min(m, n))))[0]
    v = np.linalg.qr(rng.standard_normal((n, min(m, n))))[0]
    s = np.exp(-rate * np.arange(min(m, n)))
    return u @ np.diag(s) @ v.T


def test_dispatch_matches_orientation(rng):
    a_tall = _decaying(rng, 40, 30)
    l = rng.standard_normal((29, 30))
    cfg = SamplerConfig(epsilon=1e-6, blocksize=4, seed=0)
    approx = rgsvd(a_tall, l, 1e-6, cfg)
    assert approx.branch == "over"
    a_wide = _decaying(rng, 30, 40)
    approx2 = rgsvd(a_wide, rng.standard_normal((39, 40)), 1e-6, cfg)
    assert approx2.branch == "under"
    with pytest.raises(ValueError):
        rgsvd_overdetermined(a_wide, rng.standard_normal((39, 40)), 1e-6, cfg)
    with pytest.raises(ValueError):
        rgsvd_underdetermined(a_tall, l, 1e-6, cfg)


def test_sketched_identities_hold(rng):
    a = _decaying(rng, 50, 35, rate=0.7)
    l = rng.standard_normal((34, 35))
    approx = rgsvd(a, l, 1e-8, SamplerConfig(epsilon=1e-8, blocksize=5, seed=1))
    err_a, err_l = sketched_identities(approx, a, l)
    scale = max(np.linalg.norm(a), np.linalg.norm(l))
    assert err_a <= 1e-9 * scale
    assert err_l <= 1e-9 * scale
    assert 0 < approx.l1 <= 35 and 0 < approx.l2 <= approx.l1


def test_full_sampling_reproduces_exact_solution(rng, make_gmp):
    # epsilon tight enough to force full capture on tall/square pairs: the
    # sketched solve must agree with the dense oracle essentially to roundoff
    for m, p, n, seed in [(30, 19, 20, 0), (25, 10, 25, 1)]:
        a, l = make_gmp(m, p, n, seed=seed)
        prob = TikhonovProblem(a=a, l=l, b=rng.standard_normal(m))
        cfg = SamplerConfig(epsilon=1e-12, blocksize=4, seed=seed)
        approx = rgsvd(a, l, 1e-12, cfg)
        for lam in (1e-3, 1e-1, 1.0):
            dense = solve_exact(prob, lam)
            sk = solve_rgsvd(approx, prob.b, lam)
            rel = np.linalg.norm(sk.x - dense.x) / np.linalg.norm(dense.x)
            assert rel <= 1e-8


def test_under_branch_matches_range_restricted_oracle(rng, make_gmp):
    # with m < n the sketch can only span range(A'); the reference is the
    # solve restricted to that subspace (the ambient solution keeps null(A)
    # components the compression deliberately drops)
    m, p, n, seed = 15, 24, 25, 1
    a, l = make_gmp(m, p, n, seed=seed)
    b = rng.standard_normal(m)
    approx = rgsvd(a, l, 1e-12, SamplerConfig(epsilon=1e-12, blocksize=4, seed=seed))
    assert approx.branch == "under"
    q = approx.q
    for lam in (1e-3, 1e-1, 1.0):
        stacked = np.vstack([a @ q, lam * (l @ q)])
        rhs = np.concatenate([b, np.zeros(p)])
        x_ref = q @ np.linalg.lstsq(stacked, rhs, rcond=None)[0]
        for path in ("filter", "pinv"):
            sk = solve_rgsvd(approx, b, lam, path=path)
            rel = np.linalg.norm(sk.x - x_ref) / np.linalg.norm(x_ref)
            assert rel <= 1e-8


def test_filter_and_pinv_paths_agree(rng):
    a = _decaying(rng, 45, 30, rate=0.4)
    l = rng.standard_normal((29, 30))
    b = rng.standard_normal(45)
    approx = rgsvd(a, l, 1e-6, SamplerConfig(epsilon=1e-6, blocksize=4, seed=2))
    for lam in (1e-3, 1e-2, 1.0):
        s1 = solve_rgsvd(approx, b, lam, path="filter")
        s2 = solve_rgsvd(approx, b, lam, path="pinv")
        # the two routes are algebraically equal; numerically they drift by
        # roughly eps * cond of the stacked system, which lam bounds from below
        assert np.linalg.norm(s1.x - s2.x) <= 1e-8 * max(1.0, np.linalg.norm(s1.x))
        assert s1.residual_norm == pytest.approx(s2.residual_norm, rel=1e-6, abs=1e-10)
        assert s1.seminorm == pytest.approx(s2.seminorm, rel=1e-6, abs=1e-10)


def test_low_rank_saturation(rng):
    # rank-3 operator: sample counts stop at the rank, not at min(m, n)
    u = np.linalg.qr(rng.standard_normal((50, 3)))[0]
    v = np.linalg.qr(rng.standard_normal((40, 3)))[0]
    a = u @ np.diag([4.0, 2.0, 1.0]) @ v.T
    l = np.eye(40)
    approx = rgsvd(a, l, 1e-10, SamplerConfig(epsilon=1e-10, blocksize=4, seed=3))
    assert approx.l1 <= 8 and approx.l2 <= 8
    err_a, _ = sketched_identities(approx, a, l)
    assert err_a <= 1e-9 * np.linalg.norm(a)


def test_degenerate_zero_operator():
    a = np.zeros((12, 10))
    l = np.eye(10)
    approx = rgsvd(a, l, 1e-4, SamplerConfig(epsilon=1e-4, blocksize=3, seed=0))
    assert approx.is_degenerate
    b = np.ones(12)
    sol = solve_rgsvd(approx, b, 0.5)
    assert_array_equal(sol.x, np.zeros(10))
    assert sol.residual_norm == pytest.approx(np.linalg.norm(b))


def test_under_branch_alignment(rng):
    a = _decaying(rng, 25, 60, rate=0.6)
    l = rng.standard_normal((59, 60))
    approx = rgsvd(a, l, 1e-8, SamplerConfig(epsilon=1e-8, blocksize=4, seed=4))
    assert approx.branch == "under"
    assert approx.inner is not None
    # the inner pair is l2 x l1: wide exactly when stage 2 dropped columns
    assert approx.inner.branch == ("wide" if approx.l2 < approx.l1 else "tall")
    z = approx.z
    assert z.shape == (approx.inner.n, 60)
    err_a, err_l = sketched_identities(approx, a, l)
    scale = max(np.linalg.norm(a), np.linalg.norm(l))
    assert max(err_a, err_l) <= 1e-9 * scale


def test_under_branch_wide_inner_via_loose_stage2(rng):
    # a looser stage-2 tolerance drops columns, exercising the wide inner
    # branch and its leading zero block in the filtered coordinates
    a = _decaying(rng, 25, 60, rate=0.6)
    l = rng.standard_normal((59, 60))
    cfg = SamplerConfig(epsilon=1e-10, blocksize=4, seed=7, stage2_epsilon=1e-2)
    approx = rgsvd(a, l, 1e-10, cfg)
    assert approx.branch == "under"
    assert approx.l2 < approx.l1
    assert approx.inner.branch == "wide"
    assert approx.inner.offset == approx.l1 - approx.l2
    b = rng.standard_normal(25)
    for lam in (1e-2, 1.0):
        s1 = solve_rgsvd(approx, b, lam, path="filter")
        s2 = solve_rgsvd(approx, b, lam, path="pinv")
        assert np.linalg.norm(s1.x - s2.x) <= 1e-9 * max(1.0, np.linalg.norm(s2.x))


def test_determinism_per_seed(rng):
    a = _decaying(rng, 40, 30)
    l = rng.standard_normal((29, 30))
    c1 = rgsvd(a, l, 1e-6, SamplerConfig(epsilon=1e-6, blocksize=4, seed=9))
    c2 = rgsvd(a, l, 1e-6, SamplerConfig(epsilon=1e-6, blocksize=4, seed=9))
    assert_array_equal(c1.p, c2.p)
    assert_array_equal(c1.q, c2.q)
    assert_array_equal(c1.w, c2.w)
    c3 = rgsvd(a, l, 1e-6, SamplerConfig(epsilon=1e-6, blocksize=4, seed=10))
    assert c1.l1 != c3.l1 or not np.array_equal(c1.p, c3.p)
