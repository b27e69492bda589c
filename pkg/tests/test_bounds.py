import math

import numpy as np
import pytest
from scipy.special import i0

from genxy import bounds, lattice
from genxy.bounds import BoundsError, LadderSettings

FAST = LadderSettings(therm=1000, sweeps=8000)
G4 = lattice.build(2, 4)


@pytest.fixture(scope="module")
def suite():
    return bounds.bound_suite((0.05, 0.1, 0.2), (0.5, 1.0, 2.0), settings=FAST, sample_contour=False)


def test_zero_coupling_is_exactly_one():
    assert bounds.estimate_Z(0.3, 0.0, G4) == bounds.LogEstimate(0.0, 0.0)


@pytest.mark.parametrize("beta", [0.5, 2.0])
def test_pair_without_dilution_is_bessel(beta):
    est = bounds.estimate_Z(math.pi / 2, beta, lattice.pair_graph(), LadderSettings(sweeps=40000))
    assert abs(est.value - math.log(i0(beta))) <= 3 * est.error + 1e-12


@pytest.mark.parametrize("col,beta", [(0, 0.5), (2, 2.0)])
def test_two_particle_weight(suite, col, beta):
    """Two occupied sites interact only when adjacent: 32 of 120 placements."""
    w = suite["weights"]
    exact = math.log((32 / 120) * i0(beta) + 88 / 120)
    assert w.log_w[0, col] == w.log_w[1, col] == 0.0
    assert abs(w.log_w[2, col] - exact) <= 3 * w.error[2, col]


def test_full_occupation_matches_direct_ladder(suite):
    w = suite["weights"]
    direct = bounds.ladder_log_z(bounds.SquareDitch(math.pi / 2), G4, np.linspace(0, 1.0, 21), FAST)[-1]
    assert abs(w.log_w[16, 1] - direct.value) <= 3 * math.hypot(w.error[16, 1], direct.error)


def test_mixture_limits(suite):
    w = suite["weights"]
    full = w.log_z(math.pi / 2)
    np.testing.assert_allclose([f.value for f in full], w.log_w[16])
    assert all(e.value == pytest.approx(0.0, abs=1e-12) for e in w.log_z(1e-9))


def test_lower_bounds_hold(suite):
    assert len(suite["reports"]) == 9
    for r in suite["reports"]:
        assert r.passes["Z>=1"] and r.passes["Z>=lower2"] and r.passes["Zuniv<=upper"]
        assert r.log_z_err >= 0 and r.sigma == 3.0
        assert r.to_dict()["schema"] == bounds.BOUND_SCHEMA


def test_single_point_estimate_matches_grid(suite):
    one = bounds.check_lower_bound(0.2, 2.0, G4, settings=FAST)
    grid = next(r for r in suite["reports"] if r.epsilon == 0.2 and r.beta == 2.0)
    assert one.log_z == grid.log_z


def test_restricted_site_mass():
    assert bounds.restricted_site_mass(0.2) == pytest.approx(0.0099335, abs=1e-7)
    assert bounds.restricted_site_mass(0.2) == pytest.approx(math.sin(0.2) / 20, rel=1e-15)


def test_lower_bound_at_zero_coupling():
    for eps in (0.05, 0.3, 1.0):
        assert bounds.lower_bound_log(eps, 0.0, 16) <= 0.0


def test_contour_pattern_structure():
    cls = bounds.contour_classes(G4)
    sites = bounds.contour_sites(G4)
    ordered = set(sites["ordered"])
    assert len(ordered) == 4 and len(sites["disordered"]) == 4
    assert len(sites["in_ditch_as_neighbors"]) == 8
    nbrs_of_ordered = {int(j) for i in ordered for j in G4.neighbors(i)}
    assert nbrs_of_ordered == set(sites["in_ditch_as_neighbors"])
    assert nbrs_of_ordered.isdisjoint(sites["disordered"])
    # diagonals at distance two alternate between the two kinds
    for i in range(G4.site_count):
        x, y = G4.coords(i)
        assert cls[i] == (x - y) % 4


def test_contour_mass_at_zero_coupling():
    eps = 0.3
    q = math.sin(eps)
    counted = 12 * math.log(q) + 4 * math.log(1 - q)
    assert bounds.restricted_log_z_exact(eps, 0.0, G4) == pytest.approx(counted, rel=1e-12)
    est = bounds.estimate_restricted_Z(eps, 0.0, G4)
    assert est.value == pytest.approx(counted, rel=1e-12) and est.error == 0.0


def test_contour_vanishes_without_dilution():
    assert bounds.restricted_log_z_exact(math.pi / 2, 1.0, G4) == -math.inf
    masses = [bounds.contour_event_log_mass(e, 16) for e in (1.0, 1.4, 1.55, 1.57)]
    assert all(a > b for a, b in zip(masses, masses[1:]))


@pytest.mark.parametrize("beta", [0.5, 2.0])
def test_ring_kernel_against_transfer_matrix(beta):
    """Direct transfer-matrix trace over the four ordered azimuths."""
    n = 512
    x = 2 * math.pi * np.arange(n) / n
    K = i0(2 * beta * np.abs(np.cos(0.5 * (x[:, None] - x[None, :])))) ** 2 / n
    rotor = math.log(np.trace(np.linalg.matrix_power(K, 4)))
    eps = 0.1
    expected = bounds.contour_event_log_mass(eps, 16) + rotor
    assert bounds.restricted_log_z_exact(eps, beta, G4) == pytest.approx(expected, abs=1e-10)


def test_sampled_contour_matches_closed_form():
    est = bounds.estimate_restricted_Z(0.1, 1.5, G4, FAST)
    exact = bounds.restricted_log_z_exact(0.1, 1.5, G4)
    assert abs(est.value - exact) <= 3 * est.error


@pytest.mark.parametrize("d,L", [(2, 6), (2, 3), (3, 4)])
def test_contour_geometry_rejected(d, L):
    with pytest.raises(BoundsError):
        bounds.restricted_log_z_exact(0.1, 1.0, lattice.build(d, L))
    with pytest.raises(BoundsError):
        bounds.contour_classes(lattice.build(d, L))


def test_larger_torus_contour():
    g8 = lattice.build(2, 8)
    assert len(bounds.contour_sites(g8)["ordered"]) == 16
    est = bounds.estimate_restricted_Z(0.1, 0.5, g8, FAST)
    assert abs(est.value - bounds.restricted_log_z_exact(0.1, 0.5, g8)) <= 3 * est.error


def test_fit_contour_exponent():
    eps = np.array([0.05, 0.1, 0.2])
    c3 = 1.7
    y = 16 / (4 + c3) * np.log(eps) - 3.0
    assert bounds.fit_contour_exponent(eps, y, 16) == pytest.approx(c3)
    assert math.isnan(bounds.fit_contour_exponent(eps, -y, 16))


def test_suppression_grows_as_window_narrows(suite):
    for beta in (0.5, 1.0):
        assert suite["monotonicity"][beta]["increasing_in_eps"]


@pytest.mark.xfail(strict=True, reason="ordering at eps=0.2 raises Z faster than Z_univ at beta=2")
def test_suppression_monotone_at_beta_2(suite):
    assert suite["monotonicity"][2.0]["increasing_in_eps"]
