import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from singularpaths.grid import Grid, RngStream, SampledPath, TwoParamField, make_geometric_grid, make_uniform_grid, sample_brownian
from singularpaths.integrate import (
    ControlledPath,
    InhomRoughPath,
    chen_defect,
    chen_defect_detail,
    controlled_compose,
    improper_rough,
    improper_young,
    level2_lift_young,
    levy_area_leftpoint,
    rough_integral,
    shoelace_area,
    signed_area,
    singular_controlled_norm,
    tensor_chen_defect,
    young_integral,
)
from singularpaths.norms import log_log_slope, profile_trend
from singularpaths.roughvol import KernelSpec, build_W_triple, make_noise, negative_noise_part, noise_from_increments, rl_fbm
from singularpaths.sle import TREND_TOL


def on(grid, f):
    return SampledPath(grid, f(grid.points))


def power_pair(eta1, eta2, levels=20, per_level=256):
    g = make_geometric_grid(1.0, levels, per_level)
    return on(g, lambda t: t ** eta1), on(g, lambda t: t ** eta2)


finite_floats = st.floats(-10, 10, allow_nan=False)


# -------------------------------------------------------------- young


def test_young_identity_path():
    g = make_uniform_grid(0.0, 1.0, 2 ** 12 + 1)
    x = on(g, lambda t: t)
    assert young_integral(x, x, 0.0, 1.0) == pytest.approx(0.5, abs=2e-4)


def test_young_power_closed_form():
    g = make_uniform_grid(0.25, 1.0, 2 ** 16 + 1)
    Y, X = on(g, lambda t: t ** -0.2), on(g, lambda t: t ** 0.6)
    exact = 1.5 * (1 - 0.25 ** 0.4)
    assert young_integral(Y, X, 0.25, 1.0) == pytest.approx(exact, rel=1e-3)


def test_young_constant_integrand_exact(rng):
    g = make_uniform_grid(0.0, 1.0, 101)
    X = sample_brownian(g, rng)
    Y = SampledPath(g, np.full(101, 2.5))
    assert young_integral(Y, X, 0.2, 0.7) == pytest.approx(2.5 * (X.at(0.7) - X.at(0.2)), rel=1e-12, abs=1e-15)


def test_young_off_grid_snaps_with_warning():
    g = make_uniform_grid(0.0, 1.0, 11)
    x = on(g, lambda t: t)
    with pytest.warns(UserWarning):
        young_integral(x, x, 0.0, 0.55)


@given(
    vals=arrays(float, (2, 40), elements=finite_floats),
    cut=st.lists(st.integers(0, 39), min_size=3, max_size=3),
)
def test_young_additivity(vals, cut):
    g = make_uniform_grid(0.0, 1.0, 40)
    Y, X = SampledPath(g, vals[0]), SampledPath(g, vals[1])
    i, k, j = sorted(cut)
    t = g.points
    whole = young_integral(Y, X, t[i], t[j])
    parts = young_integral(Y, X, t[i], t[k]) + young_integral(Y, X, t[k], t[j])
    assert parts == pytest.approx(whole, rel=1e-12, abs=1e-9)


# ------------------------------------------------------------ improper young


def test_improper_young_converges_to_closed_form():
    Y, X = power_pair(-0.2, 0.6)
    rep = improper_young(Y, X, eta1=-0.2, eta2=0.6)
    assert rep.limit == pytest.approx(1.5, rel=1e-2)
    assert rep.fitted_rate == pytest.approx(0.4, abs=0.1)
    assert rep.predicted_rate == pytest.approx(0.4)
    assert not rep.diverged


def test_improper_young_divergence_flag():
    Y, X = power_pair(-0.6, 0.4)
    rep = improper_young(Y, X, eta1=-0.6, eta2=0.4)
    assert rep.diverged
    assert not rep.conditions["eta1+eta2>0"]
    # I_n - I_(n-1) grows like 2^(0.2 n)
    assert rep.fitted_rate == pytest.approx(-0.2, abs=0.02)


def test_improper_young_constant_integrand():
    Y, X = power_pair(0.0, 0.4)
    Y = SampledPath(Y.grid, np.full(len(Y), 3.0))
    rep = improper_young(Y, X, eta1=0.0, eta2=0.4)
    assert rep.limit == pytest.approx(3.0, rel=1e-3)


def test_improper_young_needs_positive_grid():
    g = make_uniform_grid(0.0, 1.0, 65)
    x = on(g, lambda t: t)
    with pytest.raises(ValueError):
        improper_young(x, x, eta1=1, eta2=1)


@given(eta1=st.floats(-0.4, 0.0), eta2=st.floats(0.3, 0.9))
def test_improper_young_envelope_sharp_for_negative_eta1(eta1, eta2):
    if eta1 + eta2 < 0.1:
        return
    Y, X = power_pair(eta1, eta2, levels=14, per_level=64)
    rep = improper_young(Y, X, eta1=eta1, eta2=eta2)
    slope = np.polyfit(np.arange(1, rep.sequence.size), np.log2(np.abs(rep.increments)), 1)[0]
    assert slope == pytest.approx(-rep.predicted_rate, abs=0.1)


@given(eta1=st.floats(0.05, 0.5), eta2=st.floats(0.3, 0.9))
def test_improper_young_envelope_bound_for_positive_eta1(eta1, eta2):
    # for eta1 > 0 the increments decay at eta1 + eta2, faster than the envelope
    Y, X = power_pair(eta1, eta2, levels=14, per_level=64)
    rep = improper_young(Y, X, eta1=eta1, eta2=eta2)
    slope = np.polyfit(np.arange(1, rep.sequence.size), np.log2(np.abs(rep.increments)), 1)[0]
    assert slope <= -rep.predicted_rate + 0.1


# --------------------------------------------------------------- chen


def scale(xh, x, n):
    return np.max(np.abs(xh)) * np.max(np.abs(np.diff(x))) * n


def test_chen_leftpoint_field(rng):
    g = make_uniform_grid(0.0, 1.0, 120)
    xh, x = sample_brownian(g, rng), sample_brownian(g, rng)
    rp = InhomRoughPath(x, xh, levy_area_leftpoint(xh, x), 0.45, 0.45)
    defect, count, exhaustive = chen_defect_detail(rp)
    assert exhaustive and count == 120 * 119 * 118 // 6
    assert defect <= 1e-10 * scale(xh.values, x.values, 120)


def test_chen_zero_field_violation(rng):
    g = make_uniform_grid(0.0, 1.0, 30)
    xh, x = sample_brownian(g, rng), sample_brownian(g, rng)
    rp = InhomRoughPath(x, xh, TwoParamField(g, lambda i, j: np.zeros(np.broadcast(i, j).shape)), 0.45, 0.45)
    a, b = xh.values, x.values
    expected = max(
        abs((a[u] - a[s]) * (b[t] - b[u])) for s in range(30) for u in range(s + 1, 30) for t in range(u + 1, 30)
    )
    assert chen_defect(rp) == pytest.approx(expected, rel=1e-14)
    assert expected > 0


def test_chen_constant_xhat_additive_field(rng):
    g = make_uniform_grid(0.0, 1.0, 50)
    x = sample_brownian(g, rng)
    F = rng.standard_normal(50)
    rp = InhomRoughPath(x, SampledPath(g, np.full(50, 1.7)), TwoParamField(g, lambda i, j: F[j] - F[i]), 0.45, 0.45)
    assert chen_defect(rp) <= 1e-12


def test_chen_subsample_above_budget(rng):
    g = make_uniform_grid(0.0, 1.0, 300)
    xh, x = sample_brownian(g, rng), sample_brownian(g, rng)
    rp = InhomRoughPath(x, xh, levy_area_leftpoint(xh, x), 0.45, 0.45)
    defect, count, exhaustive = chen_defect_detail(rp, max_triples=50_000)
    assert not exhaustive and 0 < count <= 50_000
    assert defect <= 1e-10 * scale(xh.values, x.values, 300)


@given(vals=arrays(float, (2, 25), elements=finite_floats))
def test_chen_levy_area_property(vals):
    g = make_uniform_grid(0.0, 1.0, 25)
    xh, x = SampledPath(g, vals[0]), SampledPath(g, vals[1])
    rp = InhomRoughPath(x, xh, levy_area_leftpoint(xh, x), 0.45, 0.45)
    assert chen_defect(rp) <= 1e-10 * max(scale(vals[0], vals[1], 25), 1e-300)


def test_inhom_rough_path_rejects_low_regularity(rng):
    g = make_uniform_grid(0.0, 1.0, 10)
    x = sample_brownian(g, rng)
    with pytest.raises(ValueError):
        InhomRoughPath(x, x, levy_area_leftpoint(x, x), 0.3, 0.3)


# ----------------------------------------------------------- levy area


def test_levy_area_identity_refines():
    errs = []
    for n in (2 ** 9, 2 ** 10, 2 ** 11):
        g = make_uniform_grid(0.0, 1.0, n + 1)
        x = on(g, lambda t: t)
        f = levy_area_leftpoint(x, x)
        i, j = g.index_of(0.25), g.index_of(1.0)
        errs.append(abs(float(f(i, j)) - 0.75 ** 2 / 2))
    assert errs[-1] < 5e-4
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=1e-6)


def test_levy_area_diagonal_zero(rng):
    g = make_uniform_grid(0.0, 1.0, 64)
    f = levy_area_leftpoint(sample_brownian(g, rng), sample_brownian(g, rng))
    k = np.arange(64)
    assert np.all(f(k, k) == 0)


# --------------------------------------------------------- rough integral


def smooth_triple(grid):
    X, Xh = on(grid, np.sin), on(grid, np.cos)
    rp = InhomRoughPath(X, Xh, levy_area_leftpoint(Xh, X), 0.9, 0.9)
    # Y = exp, Y' = dY / dX_hat
    cp = ControlledPath(on(grid, np.exp), on(grid, lambda t: -np.exp(t) / np.sin(t)), Xh, 0.9)
    return cp, rp


def test_rough_integral_no_derivative_is_young(rng):
    g = make_uniform_grid(0.0, 1.0, 200)
    x, xh, y = (sample_brownian(g, rng) for _ in range(3))
    rp = InhomRoughPath(x, xh, levy_area_leftpoint(xh, x), 0.45, 0.45)
    cp = ControlledPath(y, SampledPath(g, np.zeros(200)), xh, 0.45)
    assert rough_integral(cp, rp, 0.0, 1.0) == young_integral(y, x, 0.0, 1.0)
    part = np.append(np.arange(0, 199, 7), 199)
    coarse = float(np.sum(y.values[part[:-1]] * np.diff(x.values[part])))
    assert rough_integral(cp, rp, 0.0, 1.0, stride=7) == pytest.approx(coarse, rel=1e-12)


def test_rough_integral_smooth_self_convergence():
    exact = lambda r: np.exp(r) * (np.sin(r) + np.cos(r)) / 2
    a, b = 0.5, 1.5
    Ns = [2 ** k for k in range(10, 15)]
    vals, errs = [], []
    for N in Ns:
        cp, rp = smooth_triple(make_uniform_grid(a, b, N + 1))
        vals.append(rough_integral(cp, rp, a, b))
        errs.append(abs(vals[-1] - (exact(b) - exact(a))))
    assert errs[-1] < 10.0 / Ns[-1]
    diffs = np.abs(np.diff(vals))
    order = -log_log_slope(np.array(Ns[:-1], float), diffs)
    assert order >= 1.0 - 0.05


def test_rough_integral_compensator_on_coarse_partition():
    # fine-grid second level, coarse partition: the compensated sum gains an order
    a, b = 0.5, 1.5
    cp, rp = smooth_triple(make_uniform_grid(a, b, 2 ** 14 + 1))
    ref = rough_integral(cp, rp, a, b)
    strides = [2 ** k for k in range(4, 9)]
    comp = [abs(rough_integral(cp, rp, a, b, s) - ref) for s in strides]
    zero = ControlledPath(cp.Y, SampledPath(cp.Y.grid, np.zeros(len(cp.Y))), cp.controller, 0.9)
    plain = [abs(rough_integral(zero, rp, a, b, s) - ref) for s in strides]
    assert log_log_slope(np.array(strides, float), np.array(comp)) >= 1.8
    assert log_log_slope(np.array(strides, float), np.array(plain)) == pytest.approx(1.0, abs=0.1)


def test_sewing_local_error_on_dyadic_blocks():
    g = make_geometric_grid(1.0, 6, 4096)
    X = on(g, np.sin)
    Xh = on(g, lambda t: t)
    rp = InhomRoughPath(X, Xh, levy_area_leftpoint(Xh, X), 0.9, 0.9)
    cp = ControlledPath(on(g, np.exp), on(g, np.exp), Xh, 0.9)
    y, yp, x = cp.Y.values, cp.Y_prime.values, X.values
    errs = []
    for n in range(1, 7):
        i, j = g.index_of(2.0 ** -n), g.index_of(2.0 ** (1 - n))
        germ = y[i] * (x[j] - x[i]) + yp[i] * float(rp.XX(i, j))
        errs.append(abs(rough_integral(cp, rp, g.points[i], g.points[j]) - germ))
    slope = np.polyfit(np.arange(1, 7), np.log2(errs), 1)[0]
    # gamma + beta + alpha = 3 for smooth data
    assert slope == pytest.approx(-3.0, abs=0.3)


def test_rough_integral_rejects_wrong_controller(rng):
    g = make_uniform_grid(0.0, 1.0, 50)
    x, xh, y = (sample_brownian(g, rng) for _ in range(3))
    rp = InhomRoughPath(x, xh, levy_area_leftpoint(xh, x), 0.45, 0.45)
    with pytest.raises(ValueError):
        rough_integral(ControlledPath(y, y, x, 0.45), rp, 0.0, 1.0)
    with pytest.raises(ValueError):
        rough_integral(ControlledPath(y, y, xh, 0.45, tag="X"), rp, 0.0, 1.0)


def coarsen(noise, factor):
    inc = noise.increments.reshape(-1, factor).sum(axis=1)
    return noise_from_increments(inc, noise.step * factor, noise.n_neg // factor)


@pytest.mark.slow
def test_rough_integral_fbm_self_convergence():
    kernel = KernelSpec(0.4)
    Ns = [2 ** k for k in range(8, 13)]
    orders = []
    for r in range(10):
        fine = make_noise(1.0, Ns[-1], RngStream(21).spawn(r))
        checkpoints = np.linspace(0.0, 1.0, 17)
        sups = []
        prev = None
        for N in Ns:
            noise = coarsen(fine, Ns[-1] // N)
            rp = build_W_triple(noise, kernel)
            WH = rl_fbm(noise, kernel)
            cp = ControlledPath(WH, SampledPath(WH.grid, np.ones(len(WH))), rp.X_hat, 1 - rp.beta)
            cur = np.array([rough_integral(cp, rp, 0.0, t) for t in checkpoints])
            if prev is not None:
                sups.append(np.max(np.abs(cur - prev)))
            prev = cur
        orders.append(-log_log_slope(np.array(Ns[1:], float), np.array(sups)))
    assert np.median(orders) >= 0.15


# ------------------------------------------------------------ improper rough


def test_improper_rough_classical_reduction(rng):
    full = make_geometric_grid(1.0, 12, 256, include_zero=True)
    B = sample_brownian(full, rng)
    g = Grid(full.points[1:])
    b = SampledPath(g, B.values[1:])
    rp = InhomRoughPath(b, b, levy_area_leftpoint(b, b), 0.45, 0.45)
    cp = controlled_compose(np.cos, lambda v: -np.sin(v), ControlledPath(b, SampledPath(g, np.ones(len(g))), b, 0.45))
    rep = improper_rough(cp, rp, eta1=0.9, eta2=0.9)
    direct = rough_integral(cp, rp, g.points[0], 1.0)
    assert rep.anchors[-1] == g.points[0]
    assert rep.sequence[-1] == direct
    assert abs(rep.limit - direct) <= 3 * abs(rep.increments[-1])
    assert not rep.diverged
    assert all(rep.conditions.values())


def test_improper_rough_Z_is_controlled_by_X(rng):
    full = make_geometric_grid(1.0, 10, 128, include_zero=True)
    B = sample_brownian(full, rng)
    g = Grid(full.points[1:])
    b = SampledPath(g, B.values[1:])
    rp = InhomRoughPath(b, b, levy_area_leftpoint(b, b), 0.45, 0.45)
    cp = ControlledPath(b, SampledPath(g, np.ones(len(g))), b, 0.45)
    rep = improper_rough(cp, rp, eta1=0.45, eta2=0.9)
    Z = rep.Z
    assert Z.tag == "X"
    assert Z.Y.values[-1] == pytest.approx(rep.limit, abs=1e-12)
    assert np.array_equal(Z.Y_prime.values, cp.Y.values[-len(Z.Y):])


def test_improper_rough_fbm_converges():
    kernel = KernelSpec(0.4)
    noise = make_noise(1.0, 2 ** 12, RngStream(5))
    rp0 = build_W_triple(noise, kernel)
    g = Grid(rp0.grid.points[1:])
    cut = lambda p: SampledPath(g, p.values[1:])
    X, Xh = cut(rp0.X), cut(rp0.X_hat)
    rp = InhomRoughPath(X, Xh, levy_area_leftpoint(Xh, X), rp0.alpha, rp0.beta)
    WH = cut(rl_fbm(noise, kernel))
    cp = ControlledPath(WH, SampledPath(g, np.ones(len(g))), Xh, 1 - rp.beta)
    rep = improper_rough(cp, rp, eta1=0.38, eta2=rp.alpha + rp.beta)
    assert rep.fitted_rate > 0 and not rep.diverged
    assert all(rep.conditions.values())


def test_improper_rough_power_negative_control():
    # (Y, Y') = (X_hat, 1) with X_hat = t^b, X = t^a and a + b < 0: the integral is
    # a / (a + b) (1 - eps^(a + b)), which blows up
    a, b = -0.3, 0.2
    g = make_geometric_grid(1.0, 16, 256)
    t = g.points
    X, Xh = on(g, lambda s: s ** a), on(g, lambda s: s ** b)
    xx = lambda i, j: ((t[j] ** (a + b) - t[i] ** (a + b)) * a / (a + b)) - t[i] ** b * (t[j] ** a - t[i] ** a)
    rp = InhomRoughPath(X, Xh, TwoParamField(g, xx), 0.9, 0.9)
    cp = ControlledPath(Xh, SampledPath(g, np.ones(len(g))), Xh, 0.9)
    rep = improper_rough(cp, rp, eta1=b, eta2=a)
    assert rep.diverged
    assert not rep.conditions["eta2>max(alpha,beta)"]


# ---------------------------------------------------------- compose / norm


def test_compose_identity_and_constant(rng):
    g = make_uniform_grid(0.0, 1.0, 40)
    y, yp, c = (sample_brownian(g, rng) for _ in range(3))
    cp = ControlledPath(y, yp, c, 0.3)
    same = controlled_compose(lambda v: v, np.ones_like, cp)
    assert np.array_equal(same.Y.values, y.values) and np.array_equal(same.Y_prime.values, yp.values)
    const = controlled_compose(lambda v: np.full_like(v, 4.0), np.zeros_like, cp)
    assert np.all(const.Y.values == 4.0) and np.all(const.Y_prime.values == 0.0)
    assert const.controller is c


def test_compose_taylor_order_two():
    ratios, rmax, steps = [], [], []
    for N in (2 ** 8, 2 ** 9, 2 ** 10, 2 ** 11):
        g = make_uniform_grid(0.0, 1.0, N + 1)
        c = on(g, lambda t: np.sin(3 * t))
        cp = controlled_compose(np.exp, np.exp, ControlledPath(c, SampledPath(g, np.ones(N + 1)), c, 1.0))
        k = np.arange(N)
        R = np.abs(cp.remainder(k, k + 1))
        dc = np.abs(np.diff(c.values))
        mask = dc > 1e-3 / N
        ratios.append(np.max(R[mask] / dc[mask] ** 2))
        rmax.append(R.max())
        steps.append(1.0 / N)
    assert log_log_slope(np.array(steps), np.array(rmax)) == pytest.approx(2.0, abs=0.05)
    assert max(ratios) / min(ratios) < 1.05


@given(vals=arrays(float, (3, 20), elements=st.floats(-3, 3)))
def test_compose_remainder_is_derived(vals):
    g = make_uniform_grid(0.0, 1.0, 20)
    cp = ControlledPath(*(SampledPath(g, v) for v in vals), gamma=0.3)
    i, j = np.triu_indices(20, 1)
    expected = vals[0][j] - vals[0][i] - vals[1][i] * (vals[2][j] - vals[2][i])
    assert np.array_equal(cp.remainder(i, j), expected)
    assert np.array_equal(cp.remainder_field()(i, j), expected)


def brute_controlled(cp, gamma, beta, eta):
    t = cp.Y.t
    yp = cp.Y_prime.values
    best = 0.0
    for i in range(t.size):
        w = t[i] ** (eta - gamma - beta)
        for j in range(i + 1, t.size):
            d = t[j] - t[i]
            best = max(best, abs(yp[j] - yp[i]) / (w * d ** gamma), abs(float(cp.remainder(i, j))) / (w * d ** (gamma + beta)))
    return best


def test_controlled_norm_zero_remainder(rng):
    g = make_uniform_grid(0.01, 1.0, 60)
    xh = sample_brownian(g, rng)
    cp = ControlledPath(SampledPath(g, 2.0 * xh.values), SampledPath(g, np.full(60, 2.0)), xh, 0.3)
    assert singular_controlled_norm(cp, 0.3, 0.4, 0.2).value == 0.0


@given(vals=arrays(float, (3, 31), elements=st.floats(-3, 3)), eta=st.floats(-0.5, 0.7))
def test_controlled_norm_matches_brute_force_and_profile(vals, eta):
    g = make_geometric_grid(1.0, 5, 6)
    cp = ControlledPath(*(SampledPath(g, v) for v in vals), gamma=0.3)
    rep = singular_controlled_norm(cp, 0.3, 0.4, eta)
    assert rep.value == pytest.approx(brute_controlled(cp, 0.3, 0.4, eta), rel=1e-12, abs=1e-300)
    assert np.max(rep.eps_profile[:, 1]) == pytest.approx(rep.value, rel=1e-12, abs=1e-300)


def test_controlled_norm_rejects_large_eta(rng):
    g = make_uniform_grid(0.1, 1.0, 10)
    x = sample_brownian(g, rng)
    with pytest.raises(ValueError):
        singular_controlled_norm(ControlledPath(x, x, x, 0.3), 0.3, 0.4, 0.8)


def wh_controlled(N, stream):
    kernel = KernelSpec(0.4)
    noise = make_noise(1.0, N, stream)
    WH = rl_fbm(noise, kernel)
    past = negative_noise_part(noise, kernel)
    g = Grid(WH.t[1:])
    wh = WH.values[1:]
    return ControlledPath(SampledPath(g, wh), SampledPath(g, np.ones(wh.size)), SampledPath(g, wh + past.values[1:]), 0.61)


@pytest.mark.slow
def test_controlled_norm_misspecification_detector():
    # the profile grows once eta exceeds H; fit at small eps where D' ~ s^(H-1) dominates
    good, bad = [], []
    for r in range(6):
        cp = wh_controlled(2 ** 13, RngStream(13).spawn(r))
        ok = singular_controlled_norm(cp, 0.61, 0.39, 0.39)
        assert np.isfinite(ok.value)
        good.append(profile_trend(ok.eps_profile, eps_max=2.0 ** -9))
        bad.append(profile_trend(singular_controlled_norm(cp, 0.61, 0.39, 0.9).eps_profile, eps_max=2.0 ** -9))
    assert np.median(good) >= -TREND_TOL
    assert np.median(bad) < -TREND_TOL


def test_compose_cos_on_fbm_has_finite_norm():
    trends = []
    for r in range(5):
        cp = wh_controlled(2 ** 10, RngStream(17).spawn(r))
        out = controlled_compose(np.cos, lambda v: -np.sin(v), cp)
        rep = singular_controlled_norm(out, 0.26, 0.39, 0.39)
        assert np.isfinite(rep.value) and rep.value > 0
        trends.append(profile_trend(rep.eps_profile))
    assert np.median(trends) >= -TREND_TOL


# ------------------------------------------------------------ planar lift


def test_lift_straight_line():
    g = make_uniform_grid(0.0, 1.0, 2 ** 12 + 1)
    path = on(g, lambda t: (1 + 2j) * t)
    p, f = level2_lift_young(path)
    v = f(0, len(g) - 1)
    inc = np.array([1.0, 2.0])
    assert np.allclose(v, np.outer(inc, inc) / 2, atol=1e-3)
    assert abs(float(signed_area(f, 0, len(g) - 1))) < 1e-12


def test_lift_circle_matches_shoelace():
    g = make_uniform_grid(0.0, math.pi, 4001)
    path = on(g, lambda t: np.exp(1j * t))
    p, f = level2_lift_young(path)
    area = float(signed_area(f, 0, len(g) - 1))
    assert area == pytest.approx(shoelace_area(p), abs=1e-6)
    assert area == pytest.approx(math.pi / 2, rel=1e-5)


def test_lift_restricts_to_a():
    g = make_uniform_grid(0.0, 1.0, 101)
    p, f = level2_lift_young(on(g, lambda t: np.exp(1j * t)), a=0.5)
    assert p.t[0] == pytest.approx(0.5) and len(f.grid) == len(p)


@given(vals=arrays(complex, 15, elements=st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)))
def test_lift_tensor_chen(vals):
    g = make_uniform_grid(0.0, 1.0, 15)
    p, f = level2_lift_young(SampledPath(g, vals))
    assert tensor_chen_defect(f, p) <= 1e-10 * max(np.max(np.abs(vals)) ** 2 * 15, 1e-300)
