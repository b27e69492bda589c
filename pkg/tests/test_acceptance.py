"""Acceptance criteria, one test each.

Every test prints a single ``CRITERION n: PASS|FAIL ...`` line (visible with
``pytest -s``) and then asserts the same verdict.
"""

import math
import time

import numpy as np
import pytest

import oracles
from genxy import bounds, lattice, meanfield, model, reference
from genxy.analysis import ScanPoint, classify_order, series_stats
from genxy.model import GeneralizedXY, ModelSpec, SpinConfiguration, SquareDitch
from genxy.montecarlo import ChainState, RunPlan, advance, metropolis_color_update, run

TABLE_P = reference.P_VALUES
FIRST_ORDER_P = reference.FIRST_ORDER_P


def verdict(n, failures, detail=""):
    ok = not failures
    text = detail if ok else "; ".join(failures)
    print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} {text}".rstrip())
    assert ok, text


def rel(a, b):
    return abs(a - b) / abs(b)


def best_convention(r, target):
    """Closest of the recorded order-parameter conventions to ``target``."""
    cands = {"m_bar_p": r.m_bar_p, "m_bar_1": r.m_bar_1, "m_bar_phi": r.m_bar_phi}
    name = min(cands, key=lambda k: rel(cands[k], target))
    return name, rel(cands[name], target)


def table_failures(method, rows, ref, tol_theta, tol_cells):
    failures, matched, waived = [], {}, []
    for p in TABLE_P:
        r, t = rows[p], ref[p]
        if rel(r.theta_star, t.theta) > tol_theta:
            failures.append(f"{method} p={p} theta {r.theta_star:.5f} vs {t.theta} ({rel(r.theta_star, t.theta):.2e})")
        if r.order_type != t.order_type:
            failures.append(f"{method} p={p} type {r.order_type} vs {t.order_type}")
    for p in FIRST_ORDER_P:
        r, t = rows[p], ref[p]
        if r.delta_u is None or rel(r.delta_u, t.delta_u) > tol_cells:
            failures.append(f"{method} p={p} dU {r.delta_u} vs {t.delta_u}")
        if r.m_bar_p is None:
            failures.append(f"{method} p={p} no order parameter")
            continue
        name, dev = best_convention(r, t.m_bar)
        matched[p] = name
        if dev > tol_cells:
            if (method, p, "m_bar") in reference.WAIVED:
                waived.append(f"p={p} M ({dev:.1%} off)")
            else:
                failures.append(f"{method} p={p} M {dev:.2%} off under every convention")
    # a waiver only stands when everything else is clean
    if failures and waived:
        failures += [f"{method} waived cell {w} with other failures" for w in waived]
    return failures, matched, waived


def test_criterion_1_mean_field_table():
    start = time.perf_counter()
    rows = {p: meanfield.solve_mf(p) for p in TABLE_P}
    elapsed = time.perf_counter() - start
    failures, matched, waived = table_failures("MF", rows, reference.MEAN_FIELD, 1e-3, 0.02)
    if elapsed >= 60:
        failures.append(f"runtime {elapsed:.1f}s")
    verdict(1, failures, f"conventions {matched}; waived {waived}; {elapsed:.1f}s")


def test_criterion_2_instability_identity():
    failures = []
    worst = 0.0
    for p in range(1, 21):
        closed = meanfield.instability_temperature(p)
        quad = meanfield.instability_temperature_quadrature(p)
        worst = max(worst, abs(quad - closed))
        if abs(quad - closed) > 1e-10:
            failures.append(f"p={p} quadrature {quad!r} vs {closed!r}")
    t5 = meanfield.instability_temperature(5)
    if abs(t5 - reference.MEAN_FIELD[5].theta) > 1e-4:
        failures.append(f"Theta_inst(5)={t5:.6f}")
    verdict(2, failures, f"max |quad-closed| {worst:.1e}; Theta_inst(5)={t5:.6f}")


def test_criterion_3_pair_cluster_table(tsc):
    start = time.perf_counter()
    rows = {p: tsc(p) for p in TABLE_P}
    elapsed = time.perf_counter() - start
    failures, matched, _ = table_failures("TSC", rows, reference.PAIR_CLUSTER, 0.02, 0.05)
    if not (rows[10].order_type == "II" and rows[11].order_type == "I"):
        failures.append("order-type threshold not between p=10 and p=11")
    if elapsed >= 600:
        failures.append(f"runtime {elapsed:.1f}s")
    verdict(3, failures, f"conventions {matched}; {elapsed:.1f}s")


def test_criterion_4_method_ordering(mf, tsc):
    failures = [
        f"p={p} TSC {tsc(p).theta_star:.4f} >= MF {mf(p).theta_star:.4f}"
        for p in TABLE_P
        if not tsc(p).theta_star < mf(p).theta_star
    ]
    verdict(4, failures)


def _mc_series(geom, p, beta, cluster_every, sweeps, seed):
    st = ChainState.create(ModelSpec(GeneralizedXY(p), beta), geom, np.random.default_rng(seed))
    advance(st, 2000, cluster_every)
    rec = advance(st, sweeps, cluster_every).records
    return {"u": rec[:, 0], "m_xy": rec[:, 1], "m_p": rec[:, 2]}


def test_criterion_5_exact_small_systems():
    failures, checks, worst = [], 0, 0.0
    pair, grid = lattice.pair_graph(), lattice.build(2, 3)
    seed = 100
    for p in (1, 8):
        for beta in (0.5, 1.0, 2.0):
            exact = oracles.pair_averages(beta, p)
            gibbs = {k: series_stats(v) for k, v in oracles.gibbs_series(grid, p, beta, 200_000, seed=seed).items()}
            for cluster_every in (0, 1):
                seed += 1
                mc = _mc_series(pair, p, beta, cluster_every, 1_000_000, seed)
                for name in ("u", "m_xy", "m_p"):
                    s = series_stats(mc[name])
                    z = abs(s.mean - exact[name]) / s.error
                    checks, worst = checks + 1, max(worst, z)
                    if z > 3:
                        failures.append(f"pair p={p} b={beta} cl={cluster_every} {name} {z:.1f}sigma")
                seed += 1
                mc = _mc_series(grid, p, beta, cluster_every, 200_000, seed)
                for name in ("u", "m_xy", "m_p"):
                    s, g = series_stats(mc[name]), gibbs[name]
                    z = abs(s.mean - g.mean) / math.hypot(s.error, g.error)
                    checks, worst = checks + 1, max(worst, z)
                    if z > 3:
                        failures.append(f"3x3 p={p} b={beta} cl={cluster_every} {name} {z:.1f}sigma")
    verdict(5, failures, f"{checks} comparisons, largest deviation {worst:.2f} sigma")


def _scan(p, thetas, sweeps, seed):
    plan = RunPlan(
        3, 8, ModelSpec(GeneralizedXY(p), 1.0 / thetas[0]), therm=sweeps // 10, sweeps=sweeps,
        seed=seed, thetas=tuple(thetas), cluster_every=1,
    )
    res = run(plan)
    n = 8**3
    return classify_order([ScanPoint(t, s["u"], n) for t, s in zip(thetas, res.samples)])


@pytest.mark.slow
def test_criterion_6_order_discrimination():
    failures = []
    strong = _scan(16, np.linspace(0.780, 0.792, 7), 60_000, seed=16)
    if strong.classification != "first_order":
        failures.append(
            f"p=16 {strong.classification} (valley/peak {strong.bimodality:.2f}, "
            f"Binder min {strong.binder_min:.3f}, Theta*={strong.theta_star:.4f})"
        )
    weak = _scan(1, np.linspace(1.5, 2.3, 9), 20_000, seed=1)
    if weak.classification not in ("second_order", "undecided") or weak.theta_bimodal is not None:
        failures.append(f"p=1 {weak.classification}")
    verdict(
        6, failures,
        f"p=16 first_order dU*={strong.delta_u}; p=1 {weak.classification} Theta*={weak.theta_star:.3f}",
    )


def test_criterion_7_bounds():
    start = time.perf_counter()
    out = bounds.bound_suite((0.05, 0.1, 0.2), (0.5, 1.0, 2.0, 3.0))
    elapsed = time.perf_counter() - start
    failures = []
    for r in out["reports"]:
        bad = [k for k, v in r.passes.items() if not v]
        if bad:
            failures.append(f"eps={r.epsilon} beta={r.beta} {bad}")
    for beta, m in out["monotonicity"].items():
        if not m["decreasing_in_eps"]:
            ratios = ", ".join(f"{v:.2f}" for v in m["log_ratio_by_eps"].values())
            failures.append(f"beta={beta} ln(Zuniv/Z) over eps not decreasing [{ratios}]")
    if elapsed >= 900:
        failures.append(f"runtime {elapsed:.1f}s")
    verdict(7, failures, f"{len(out['reports'])} grid points; {elapsed:.1f}s")


def _o2_failures(rng):
    failures = []
    geom = lattice.build(3, 4)
    for variant in (GeneralizedXY(5), SquareDitch(0.4)):
        spec = ModelSpec(variant, 1.0)
        cfg = SpinConfiguration.random(geom, rng)
        a = model.measure(spec, cfg)
        for alpha in rng.uniform(-math.pi, math.pi, 5):
            rot = SpinConfiguration(cfg.theta, cfg.phi + alpha, geom)
            ref = SpinConfiguration(cfg.theta, -cfg.phi, geom)
            for b in (model.measure(spec, rot), model.measure(spec, ref)):
                if abs(b.u - a.u) > 1e-12 or abs(b.m_xy - a.m_xy) > 1e-12 or abs(b.m_p - a.m_p) > 1e-12:
                    failures.append(f"O(2) {variant}")
    return failures


def _drift_failures():
    st = ChainState.create(ModelSpec(GeneralizedXY(3), 1.2), lattice.build(2, 16), np.random.default_rng(1))
    advance(st, 500, 1)
    if st.energy_drift() > 1e-10 * st.sweep_count:
        return [f"energy drift {st.energy_drift():.1e} after {st.sweep_count} sweeps"]
    return []


def _density_failures():
    eps = 0.3
    st = ChainState.create(ModelSpec(SquareDitch(eps), 0.0), lattice.build(2, 4), np.random.default_rng(8))
    s = series_stats(advance(st, 20_000).records[:, 3])
    if abs(s.mean - math.sin(eps)) > 3 * s.error:
        return [f"beta=0 density {s.mean:.5f}+-{s.error:.5f} vs {math.sin(eps):.5f}"]
    return []


def _balance_failures():
    st = ChainState.create(ModelSpec(GeneralizedXY(2), 1.5), lattice.pair_graph(), np.random.default_rng(12))
    pick = np.random.default_rng(13)

    def cell(s):
        u = np.cos(s.cfg.theta)
        return int(abs(u[0]) > 0.5) + 2 * int(abs(u[1]) > 0.5) + 4 * int(math.cos(s.cfg.phi[0] - s.cfg.phi[1]) > 0)

    flux = np.zeros((8, 8))
    a = cell(st)
    for _ in range(150_000):
        metropolis_color_update(st, int(pick.integers(2)))
        b = cell(st)
        flux[a, b] += 1
        a = b
    off = ~np.eye(8, dtype=bool)
    tot, diff = (flux + flux.T)[off], np.abs(flux - flux.T)[off]
    seen = tot > 0
    if seen.sum() < 30 or np.any(diff[seen] > 4 * np.sqrt(tot[seen])):
        return ["pair kernel flux asymmetric"]
    return []


def _null_failures():
    plan = RunPlan(2, 4, ModelSpec(GeneralizedXY(1), 1.0), therm=1000, sweeps=100_000, seed=21, cluster_every=1)
    res = run(plan)
    mx, my = series_stats(res.series("mx_phi")), series_stats(res.series("my_phi"))
    chi2 = (mx.mean / mx.error) ** 2 + (my.mean / my.error) ** 2
    return [f"d=2 vector magnetization chi2={chi2:.1f}"] if chi2 >= 13.8 else []


def _nu_failures():
    failures = []
    if model.chemical_potential(math.pi / 6, 1.0) != 0.0:
        failures.append("nu(pi/6) != 0")
    nu = model.chemical_potential(math.pi / 18, 2.0)
    if abs(nu - -0.77999466650853806138) > 1e-14:
        failures.append(f"nu(pi/18, 2) = {nu!r}")
    seq = [model.chemical_potential(e, 1.0) for e in (1e-1, 1e-4, 1e-8, 1e-12)]
    if not all(a > b for a, b in zip(seq, seq[1:])):
        failures.append("nu not monotone as eps -> 0")
    return failures


def test_criterion_8_invariants():
    rng = np.random.default_rng(2024)
    failures = (
        _o2_failures(rng) + _drift_failures() + _density_failures()
        + _balance_failures() + _null_failures() + _nu_failures()
    )
    verdict(8, failures, "O(2), energy drift, beta=0 density, flux symmetry, d=2 null, nu examples")
