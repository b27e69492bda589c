"""Numerical checks of partition-function inequalities for the square-ditch model.

``Z = <exp(-beta H)>`` over the product Haar measure, so ``Z = 1`` at
``beta = 0``.  Only the in/out-of-ditch indicator of ``theta`` matters, and
``Z`` splits into a binomial mixture over the number of occupied sites.
Each fixed-occupancy weight is reached by bridge sampling along a ladder
of inverse temperatures sampled with replica exchange:

    ln Z_{k+1} - ln Z_k = ln <e^{-dB H/2}>_k - ln <e^{+dB H/2}>_{k+1}

The restricted partition function of the diagonal contour pattern on an
``L x L`` torus (``L`` a multiple of 4) is also available in closed form.
Sites with ``x - y = 0 (mod 4)`` are ordered: they and their neighbors sit in
the ditch, which forces every odd-diagonal site in.  Sites with
``x - y = 2 (mod 4)`` are out of the ditch.  Each odd site then links two
consecutive sites of one ordered diagonal, and integrating it out gives the
ring kernel ``I0(2 beta |cos(d/2)|)`` per odd site, two per link.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln, i0e

from ._occupancy import fixed_occupancy_energies
from .analysis import series_stats
from .lattice import LatticeGeometry, SiteGraph, build, graph_from_edges
from .model import HALF_PI, ModelSpec, SpinConfiguration, SquareDitch
from .montecarlo import ChainState, advance, replica_exchange_step, tune_width

C2 = math.cos(math.pi / 20)
PHI_WINDOW_MASS = 1.0 / 20.0
BOUND_SCHEMA = "genxy-bounds/1"


class BoundsError(ValueError):
    pass


@dataclass(frozen=True)
class LogEstimate:
    """``ln`` of a positive quantity with a one-sigma error."""

    value: float
    error: float

    @property
    def linear(self) -> float:
        return math.exp(self.value)


@dataclass(frozen=True)
class LadderSettings:
    step: float = 0.05
    therm: int = 2000
    sweeps: int = 40000
    exchange_every: int = 10
    seed: int = 0
    cold_start: bool = True


def _ladder(beta: float, step: float) -> np.ndarray:
    n = max(2, int(math.ceil(beta / step)) + 1)
    return np.linspace(0.0, beta, n)


def ladder_log_z(
    variant, geom: SiteGraph, betas: Sequence[float], settings: LadderSettings = LadderSettings()
) -> list[LogEstimate]:
    """``ln Z`` at every ladder point (``betas[0]`` must be 0)."""
    betas = np.asarray(betas, dtype=float)
    if betas[0] != 0.0 or np.any(np.diff(betas) <= 0):
        raise BoundsError("ladder must start at beta = 0 and increase")
    if geom.bond_count == 0:
        return [LogEstimate(0.0, 0.0) for _ in betas]
    seqs = np.random.SeedSequence(settings.seed).spawn(betas.size + 1)
    # ordered starts: melting is fast, nucleating the ordered phase in a
    # narrow ditch is not
    start = SpinConfiguration.uniform(geom) if settings.cold_start else None
    states = [
        ChainState.create(
            ModelSpec(variant, float(b)), geom, np.random.default_rng(s),
            cfg=start.copy() if start is not None else None,
        )
        for b, s in zip(betas, seqs[:-1])
    ]
    ex_rng = np.random.default_rng(seqs[-1])
    every = settings.exchange_every
    energies = [[] for _ in states]
    total = settings.therm + settings.sweeps
    done = 0
    while done < total:
        chunk = min(every, total - done)
        for k, st in enumerate(states):
            blk = advance(st, chunk)
            if done < settings.therm:
                tune_width(st, blk.accepted, blk.tried)
            else:
                energies[k].append(blk.records[:, 0] * geom.site_count)
        done += chunk
        replica_exchange_step(states, ex_rng, parity=(done // every) % 2)
    return _bridge(betas, [np.concatenate(e) for e in energies])


def _log_mean_exp(x: np.ndarray) -> tuple[float, float]:
    shift = float(x.max())
    w = np.exp(x - shift)
    st = series_stats(w)
    return shift + math.log(st.mean), st.error / st.mean


@dataclass(frozen=True)
class OccupancyWeights:
    """``ln W_m(beta)`` and errors for ``m = 0..N`` (rows) on a beta grid (columns)."""

    betas: np.ndarray
    log_w: np.ndarray
    error: np.ndarray

    def log_z(self, epsilon: float) -> list[LogEstimate]:
        """``ln Z = ln sum_m C(N, m) q^m (1-q)^(N-m) W_m`` with ``q = sin eps``."""
        n = self.log_w.shape[0] - 1
        q = math.sin(epsilon)
        m = np.arange(n + 1)
        log_binom = gammaln(n + 1) - gammaln(m + 1) - gammaln(n - m + 1)
        with np.errstate(divide="ignore"):
            log_p = log_binom + m * math.log(q) + (n - m) * np.log1p(-q) if q < 1 else np.where(m == n, 0.0, -np.inf)
        out = []
        for j in range(self.betas.size):
            terms = log_p + self.log_w[:, j]
            top = terms.max()
            w = np.exp(terms - top)
            total = w.sum()
            err = math.sqrt(np.sum((w / total * self.error[:, j]) ** 2))
            out.append(LogEstimate(float(top + math.log(total)), err))
        return out


def occupancy_weights(
    geom: SiteGraph, betas: Sequence[float], settings: LadderSettings = LadderSettings()
) -> OccupancyWeights:
    """Rotor partition functions averaged over occupied sets of each size.

    In the square-ditch model ``theta`` enters only through the in/out
    indicator, so ``Z`` is a binomial mixture of these weights.  Each
    ``W_m`` comes from its own fixed-``m`` ladder, which never crosses the
    occupancy jump that makes the grand-canonical ladder mix poorly.
    """
    targets = np.asarray(betas, dtype=float)
    grid = np.union1d(_ladder(float(targets.max()), settings.step), targets)
    cols = np.array([int(np.flatnonzero(np.isclose(grid, b))[0]) for b in targets])
    n = geom.site_count
    log_w = np.zeros((n + 1, targets.size))
    err = np.zeros_like(log_w)
    seqs = np.random.SeedSequence(settings.seed).spawn(n + 1)
    for m in range(2, n + 1):
        E = fixed_occupancy_energies(
            geom.neighbor_table, geom.bond_array, grid, m, settings.therm, settings.sweeps,
            settings.exchange_every, np.random.default_rng(seqs[m]),
        )
        est = _bridge(grid, E)
        log_w[m] = [est[c].value for c in cols]
        err[m] = [est[c].error for c in cols]
    return OccupancyWeights(targets, log_w, err)


def _bridge(betas: np.ndarray, E: Sequence[np.ndarray]) -> list[LogEstimate]:
    out = [LogEstimate(0.0, 0.0)]
    acc, var = 0.0, 0.0
    for k in range(betas.size - 1):
        half = 0.5 * (betas[k + 1] - betas[k])
        fwd = _log_mean_exp(-half * E[k])
        bwd = _log_mean_exp(half * E[k + 1])
        acc += fwd[0] - bwd[0]
        var += fwd[1] ** 2 + bwd[1] ** 2
        out.append(LogEstimate(acc, math.sqrt(var)))
    return out


def estimate_Z(
    epsilon: float,
    beta: float,
    geom: SiteGraph,
    settings: LadderSettings = LadderSettings(),
) -> LogEstimate:
    """``ln Z`` of the square-ditch model at one ``(epsilon, beta)``."""
    if beta == 0:
        return LogEstimate(0.0, 0.0)
    return occupancy_weights(geom, [beta], settings).log_z(epsilon)[0]


def estimate_Z_grid(
    epsilon: float,
    betas: Sequence[float],
    geom: SiteGraph,
    settings: LadderSettings = LadderSettings(),
) -> dict[float, LogEstimate]:
    est = occupancy_weights(geom, betas, settings).log_z(epsilon)
    return {float(b): e for b, e in zip(betas, est)}


def restricted_site_mass(epsilon: float) -> float:
    """Haar mass of ``|theta - pi/2| <= eps`` and ``|phi| <= pi/20``: ``sin(eps)/20``."""
    return math.sin(epsilon) * PHI_WINDOW_MASS


def lower_bound_log(epsilon: float, beta: float, site_count: int) -> float:
    """``ln (C1 eps e^{2 C2 beta})^N`` with ``C1 eps`` the restricted site mass."""
    return site_count * (math.log(restricted_site_mass(epsilon)) + 2.0 * C2 * beta)


def upper_bound_log(epsilon: float, beta: float, site_count: int) -> float:
    """``ln ((2 eps)^{3/4} e^beta)^N``."""
    return site_count * (0.75 * math.log(2.0 * epsilon) + beta)


# contour pattern


def _require_contour_geometry(geom) -> LatticeGeometry:
    if not isinstance(geom, LatticeGeometry) or geom.d != 2:
        raise BoundsError("contour pattern needs a two-dimensional lattice")
    if geom.L % 4:
        raise BoundsError(f"contour pattern needs L divisible by 4, got {geom.L}")
    return geom


def contour_classes(geom: LatticeGeometry) -> np.ndarray:
    """``(x - y) mod 4`` per site: 0 ordered, 2 disordered, odd in between."""
    _require_contour_geometry(geom)
    xy = np.array([geom.coords(i) for i in range(geom.site_count)])
    return (xy[:, 0] - xy[:, 1]) % 4


def contour_sites(geom: LatticeGeometry) -> dict[str, list[int]]:
    c = contour_classes(geom)
    return {
        "ordered": np.flatnonzero(c == 0).tolist(),
        "in_ditch_as_neighbors": np.flatnonzero(c % 2 == 1).tolist(),
        "disordered": np.flatnonzero(c == 2).tolist(),
    }


def contour_event_log_mass(epsilon: float, site_count: int) -> float:
    """``ln`` of the Haar probability of the contour event."""
    q = math.sin(epsilon)
    if q >= 1.0:
        return -math.inf
    return 0.75 * site_count * math.log(q) + 0.25 * site_count * math.log1p(-q)


def _ring_kernel_fourier(beta: float, n: int) -> np.ndarray:
    """Fourier coefficients of ``I0(2 beta |cos(d/2)|)^2`` scaled by ``exp(-4 beta)``."""
    d = 2.0 * math.pi * np.arange(n) / n
    x = 2.0 * beta * np.abs(np.cos(0.5 * d))
    k = (i0e(x) * np.exp(x - 2.0 * beta)) ** 2
    return np.fft.fft(k).real / n


def restricted_log_z_exact(epsilon: float, beta: float, geom) -> float:
    """Closed-form ``ln Z_univ`` through the ordered-diagonal ring kernel."""
    geom = _require_contour_geometry(geom)
    L, N = geom.L, geom.site_count
    log_mass = contour_event_log_mass(epsilon, N)
    if not math.isfinite(log_mass):
        return -math.inf
    n = 256
    while True:
        kh = _ring_kernel_fourier(beta, n)
        kh2 = _ring_kernel_fourier(beta, 2 * n)
        if np.max(np.abs(kh2[: n // 2] - kh[: n // 2])) < 1e-15 or n >= 1 << 16:
            break
        n *= 2
    kh = kh2
    top = np.max(np.abs(kh))
    ring = math.log(np.sum((kh / top) ** L)) + L * math.log(top)
    return log_mass + (L // 4) * (ring + 4.0 * beta * L)


def contour_graph(geom) -> tuple[SiteGraph, np.ndarray]:
    """Occupied sub-graph of the contour pattern and its site labels."""
    c = contour_classes(geom)
    keep = np.flatnonzero(c != 2)
    relabel = {int(s): i for i, s in enumerate(keep)}
    edges = [(relabel[int(i)], relabel[int(j)]) for i, j in geom.bond_array if c[i] != 2 and c[j] != 2]
    return graph_from_edges(keep.size, edges), keep


def estimate_restricted_Z(
    epsilon: float,
    beta: float,
    geom,
    settings: LadderSettings = LadderSettings(),
) -> LogEstimate:
    """``ln Z_univ`` by sampling the plane rotator on the occupied contour graph."""
    geom = _require_contour_geometry(geom)
    log_mass = contour_event_log_mass(epsilon, geom.site_count)
    if not math.isfinite(log_mass):
        return LogEstimate(-math.inf, 0.0)
    if beta == 0:
        return LogEstimate(log_mass, 0.0)
    g, _ = contour_graph(geom)
    est = ladder_log_z(SquareDitch(HALF_PI), g, _ladder(beta, settings.step), settings)[-1]
    return LogEstimate(log_mass + est.value, est.error)


@dataclass
class BoundReport:
    L: int
    site_count: int
    epsilon: float
    beta: float
    log_z: float
    log_z_err: float
    lower_bound_1_log: float
    lower_bound_2_log: float
    c1: float
    c2: float
    log_z_univ: Optional[float] = None
    log_z_univ_err: Optional[float] = None
    log_z_univ_exact: Optional[float] = None
    upper_bound_log: Optional[float] = None
    passes: dict = field(default_factory=dict)
    sigma: float = 3.0
    contour: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema"] = BOUND_SCHEMA
        return d

    @property
    def ok(self) -> bool:
        return all(self.passes.values())


def check_lower_bound(
    epsilon: float, beta: float, geom: SiteGraph, z: Optional[LogEstimate] = None,
    settings: LadderSettings = LadderSettings(), sigma: float = 3.0,
) -> BoundReport:
    """``Z >= 1`` and ``Z >= (C1 eps e^{2 C2 beta})^N``, both in log space at ``sigma``."""
    if z is None:
        z = estimate_Z(epsilon, beta, geom, settings)
    n = geom.site_count
    lb2 = lower_bound_log(epsilon, beta, n)
    slack = sigma * z.error
    return BoundReport(
        L=getattr(geom, "L", 0),
        site_count=n,
        epsilon=epsilon,
        beta=beta,
        log_z=z.value,
        log_z_err=z.error,
        lower_bound_1_log=0.0,
        lower_bound_2_log=lb2,
        c1=restricted_site_mass(epsilon) / epsilon,
        c2=C2,
        passes={"Z>=1": z.value >= -slack, "Z>=lower2": z.value >= lb2 - slack},
        sigma=sigma,
    )


def check_upper_bound(
    report: BoundReport, geom, settings: LadderSettings = LadderSettings(), sample: bool = True
) -> BoundReport:
    """Add the contour estimate and ``Z_univ <= ((2 eps)^{3/4} e^beta)^N`` to ``report``."""
    eps, beta, n = report.epsilon, report.beta, report.site_count
    exact = restricted_log_z_exact(eps, beta, geom)
    if sample:
        est = estimate_restricted_Z(eps, beta, geom, settings)
    else:
        est = LogEstimate(exact, 0.0)
    ub = upper_bound_log(eps, beta, n)
    report.log_z_univ, report.log_z_univ_err = est.value, est.error
    report.log_z_univ_exact = exact
    report.upper_bound_log = ub
    report.passes["Zuniv<=upper"] = est.value <= ub + report.sigma * est.error
    if sample:
        report.passes["Zuniv sampled~exact"] = abs(est.value - exact) <= report.sigma * est.error + 1e-12
    report.contour = contour_sites(geom)
    return report


def fit_contour_exponent(epsilons, log_ratios, site_count: int) -> float:
    """``C3`` from ``ln(Z_univ/Z) ~ N/(4 + C3) ln eps`` by least squares in ``ln eps``."""
    x = np.log(np.asarray(epsilons, dtype=float))
    y = np.asarray(log_ratios, dtype=float)
    slope = np.polyfit(x, y, 1)[0]
    return float(site_count / slope - 4.0) if slope > 0 else math.nan


def bound_suite(
    epsilons=(0.05, 0.1, 0.2),
    betas=(0.5, 1.0, 2.0, 3.0),
    L: int = 4,
    settings: LadderSettings = LadderSettings(),
    sample_contour: bool = True,
    sigma: float = 3.0,
) -> dict:
    """All inequality checks on one ``L x L`` torus plus the suppression ratios.

    The occupancy weights do not depend on ``epsilon``, so one set of
    ladders serves the whole grid.
    """
    geom = build(2, L)
    weights = occupancy_weights(geom, betas, settings)
    reports = []
    ratios: dict[float, dict[float, LogEstimate]] = {b: {} for b in betas}
    for i, eps in enumerate(epsilons):
        s = replace(settings, seed=settings.seed + 1000 * (i + 1))
        for beta, z in zip(betas, weights.log_z(eps)):
            r = check_lower_bound(eps, beta, geom, z, s, sigma)
            check_upper_bound(r, geom, s, sample=sample_contour)
            reports.append(r)
            ratios[beta][eps] = LogEstimate(r.log_z_univ_exact - r.log_z, r.log_z_err)
    monotone = {}
    c3 = {}
    for beta, by_eps in ratios.items():
        eps_sorted = sorted(by_eps)
        vals = [by_eps[e] for e in eps_sorted]
        steps = [
            (b.value - a.value, math.hypot(a.error, b.error)) for a, b in zip(vals[:-1], vals[1:])
        ]
        monotone[beta] = {
            "log_ratio_by_eps": {e: by_eps[e].value for e in eps_sorted},
            "log_ratio_err_by_eps": {e: by_eps[e].error for e in eps_sorted},
            "increasing_in_eps": all(d > sigma * s for d, s in steps),
            "decreasing_in_eps": all(d < -sigma * s for d, s in steps),
        }
        c3[beta] = fit_contour_exponent(eps_sorted, [v.value for v in vals], geom.site_count)
    return {"reports": reports, "monotonicity": monotone, "c3": c3, "weights": weights}
