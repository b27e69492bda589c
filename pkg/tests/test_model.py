import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from genxy import lattice, model
from genxy.model import GeneralizedXY, ModelError, ModelSpec, SpinConfiguration, SquareDitch


def bond_sum_oracle(spec, cfg):
    total = 0.0
    for i, j in lattice.bonds(cfg.geom):
        if isinstance(spec.variant, GeneralizedXY):
            si = math.sin(cfg.theta[i]) ** spec.variant.p
            sj = math.sin(cfg.theta[j]) ** spec.variant.p
        else:
            si = float(abs(cfg.theta[i] - math.pi / 2) <= spec.variant.epsilon)
            sj = float(abs(cfg.theta[j] - math.pi / 2) <= spec.variant.epsilon)
        total -= si * sj * math.cos(cfg.phi[i] - cfg.phi[j])
    return total


def test_aligned_ground_state():
    g = lattice.build(2, 4)
    cfg = SpinConfiguration.uniform(g)
    assert model.energy(ModelSpec(GeneralizedXY(1), 1.0), cfg) == -32.0
    for p in (1, 5, 16):
        obs = model.measure(ModelSpec(GeneralizedXY(p), 1.0), cfg)
        assert obs.u == pytest.approx(-2.0, abs=1e-12)
        assert obs.m_xy == pytest.approx(1.0) and obs.m_p == pytest.approx(1.0)
        assert obs.rho is None


def test_ditch_empty_energy_and_observables():
    g = lattice.build(2, 4)
    cfg = SpinConfiguration.uniform(g, theta=0.0)
    spec = ModelSpec(SquareDitch(0.1), 1.0)
    assert model.energy(spec, cfg) == 0.0
    obs = model.measure(spec, cfg)
    assert obs.m_xy == pytest.approx(0.0, abs=1e-15) and obs.m_p == 0.0 and obs.rho == 0.0


def test_ditch_boundary_is_closed():
    eps = 0.25
    w = model.site_weight(SquareDitch(eps), np.array([math.pi / 2 + eps, math.pi / 2 - eps]))
    assert w.tolist() == [1.0, 1.0]


@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 3, 8]))
@settings(max_examples=20, deadline=None)
def test_energy_matches_bond_oracle(seed, p):
    g = lattice.build(2, 3)
    cfg = SpinConfiguration.random(g, np.random.default_rng(seed))
    for spec in (ModelSpec(GeneralizedXY(p), 1.0), ModelSpec(SquareDitch(0.7), 1.0)):
        assert model.energy(spec, cfg) == pytest.approx(bond_sum_oracle(spec, cfg), abs=1e-12)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_measure_matches_site_oracle(seed):
    g = lattice.build(2, 3)
    cfg = SpinConfiguration.random(g, np.random.default_rng(seed))
    spec = ModelSpec(GeneralizedXY(3), 0.5)
    obs = model.measure(spec, cfg)
    mx = my = px = py = 0.0
    for t, f in zip(cfg.theta, cfg.phi):
        mx += math.sin(t) * math.cos(f)
        my += math.sin(t) * math.sin(f)
        px += math.sin(t) ** 3 * math.cos(f)
        py += math.sin(t) ** 3 * math.sin(f)
    assert obs.m_xy == pytest.approx(math.hypot(mx, my) / 9, abs=1e-12)
    assert obs.m_p == pytest.approx(math.hypot(px, py) / 9, abs=1e-12)
    assert obs.u == pytest.approx(bond_sum_oracle(spec, cfg) / 9, abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(-10, 10), st.sampled_from(["xy", "ditch"]))
@settings(max_examples=30, deadline=None)
def test_global_rotation_symmetry(seed, shift, kind):
    g = lattice.build(2, 4)
    cfg = SpinConfiguration.random(g, np.random.default_rng(seed))
    spec = ModelSpec(GeneralizedXY(2) if kind == "xy" else SquareDitch(0.6), 1.0)
    rot = SpinConfiguration(cfg.theta, cfg.phi + shift, g)
    a, b = model.measure(spec, cfg), model.measure(spec, rot)
    assert model.energy(spec, rot) == pytest.approx(model.energy(spec, cfg), abs=1e-12)
    for name in ("u", "m_xy", "m_p"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), abs=1e-12)
    if kind == "ditch":
        assert b.rho == a.rho


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_polar_reflection_symmetry(seed):
    g = lattice.build(2, 4)
    cfg = SpinConfiguration.random(g, np.random.default_rng(seed))
    flipped = SpinConfiguration(math.pi - cfg.theta, cfg.phi, g)
    for spec in (ModelSpec(GeneralizedXY(3), 1.0), ModelSpec(SquareDitch(0.4), 1.0)):
        assert model.energy(spec, flipped) == pytest.approx(model.energy(spec, cfg), abs=1e-12)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_energy_bounds_and_ditch_monotone(seed):
    g = lattice.build(2, 4)
    cfg = SpinConfiguration.random(g, np.random.default_rng(seed))
    n = g.site_count
    h = model.energy(ModelSpec(GeneralizedXY(1), 1.0), cfg)
    assert -2 * n <= h <= 2 * n
    prev = None
    for eps in (0.1, 0.3, 0.6, 1.0):
        occ = model.occupation(eps, cfg.theta)
        if prev is not None:
            assert np.all(occ >= prev)
        prev = occ
        if occ.sum() == 0:
            assert model.energy(ModelSpec(SquareDitch(eps), 1.0), cfg) == 0.0


def test_p1_equator_is_plane_rotator():
    g = lattice.build(2, 4)
    rng = np.random.default_rng(3)
    phi = rng.uniform(-math.pi, math.pi, g.site_count)
    cfg = SpinConfiguration(np.full(g.site_count, math.pi / 2), phi, g)
    rotor = -sum(math.cos(phi[i] - phi[j]) for i, j in lattice.bonds(g))
    assert model.energy(ModelSpec(GeneralizedXY(1), 1.0), cfg) == pytest.approx(rotor, abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.sampled_from(["xy", "ditch"]))
@settings(max_examples=40, deadline=None)
def test_local_delta_matches_recompute(seed, kind):
    g = lattice.build(2, 4)
    rng = np.random.default_rng(seed)
    cfg = SpinConfiguration.random(g, rng)
    spec = ModelSpec(GeneralizedXY(4) if kind == "xy" else SquareDitch(1.0), 1.0)
    site = int(rng.integers(g.site_count))
    t, f = model.haar_sample(rng)
    after = cfg.copy()
    after.theta[site], after.phi[site] = t, f
    expected = model.energy(spec, after) - model.energy(spec, cfg)
    assert model.local_energy_delta(spec, cfg, site, t, f) == pytest.approx(expected, abs=1e-10)
    same = model.local_energy_delta(spec, cfg, site, cfg.theta[site], cfg.phi[site])
    assert same == 0.0


def test_local_delta_with_empty_neighborhood():
    g = lattice.build(2, 4)
    rng = np.random.default_rng(1)
    theta = np.zeros(g.site_count)
    cfg = SpinConfiguration(theta, rng.uniform(-1, 1, g.site_count), g)
    spec = ModelSpec(SquareDitch(0.2), 1.0)
    for _ in range(20):
        t, f = model.haar_sample(rng)
        assert model.local_energy_delta(spec, cfg, 5, t, f) == 0.0


def test_haar_sample_statistics():
    rng = np.random.default_rng(2024)
    n = 10**6
    theta, phi = model.haar_sample(rng, n)
    assert abs(np.cos(theta).mean()) < 3 * (1 / math.sqrt(3)) / 1e3
    assert abs(np.cos(phi).mean()) < 3 * math.sqrt(0.5 / n)
    q = math.sin(0.3)
    frac = np.mean(np.abs(theta - math.pi / 2) <= 0.3)
    assert abs(frac - q) < 3 * math.sqrt(q * (1 - q) / n)
    assert theta.min() >= 0 and theta.max() <= math.pi
    assert phi.min() >= -math.pi and phi.max() < math.pi


def test_chemical_potential():
    assert model.chemical_potential(math.pi / 6, 1.0) == 0.0
    q = math.sin(math.pi / 18)
    # 40-digit reference value of ln(sin(pi/18) / (1 - sin(pi/18))) / 2
    assert model.chemical_potential(math.pi / 18, 2.0) == pytest.approx(
        -0.77999466650853806138, rel=1e-14
    )
    assert model.chemical_potential(math.pi / 18, 2.0) == pytest.approx(
        math.log(q / (1 - q)) / 2, rel=1e-14
    )
    values = [model.chemical_potential(e, 1.0) for e in (1e-1, 1e-3, 1e-6, 1e-9)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < -20
    eps = np.linspace(0.01, 1.5, 50)
    nu = [model.chemical_potential(e, 0.7) for e in eps]
    assert np.all(np.diff(nu) > 0)
    assert all((v < 0) == (math.sin(e) < 0.5) for e, v in zip(eps, nu))


@pytest.mark.parametrize("eps,beta", [(math.pi / 2, 1.0), (0.3, 0.0), (0.3, -1.0), (0.0, 1.0)])
def test_chemical_potential_domain(eps, beta):
    with pytest.raises(ModelError):
        model.chemical_potential(eps, beta)


def test_variant_validation():
    for bad in (0, -1, 2.5):
        with pytest.raises(ModelError):
            GeneralizedXY(bad)
    for bad in (0.0, 2.0):
        with pytest.raises(ModelError):
            SquareDitch(bad)
    with pytest.raises(ModelError):
        ModelSpec(GeneralizedXY(1), -0.1)


def test_phi_is_wrapped():
    g = lattice.build(2, 3)
    cfg = SpinConfiguration(np.full(9, 1.0), np.full(9, math.pi), g)
    assert np.allclose(cfg.phi, -math.pi)
    with pytest.raises(ModelError):
        SpinConfiguration(np.full(9, 4.0), np.zeros(9), g)
