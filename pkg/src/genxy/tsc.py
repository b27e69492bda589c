"""Two-site cluster (pair) variational theory of the generalized XY model.

One bond is treated exactly; each of its two sites feels the remaining
``z - 1`` neighbors through a boundary field ``lam`` (energy units):

    Z2(lam) = << exp(beta [s1 s2 cos(phi1 - phi2) + (z-1) lam (m1 + m2)]) >>
    Z1(lam) = <  exp(beta z lam m) >
    f(lam)  = -Theta [ (z/2) ln Z2 - (z-1) ln Z1 ]

with ``s = sin(theta)**p`` and ``m = s cos(phi)``.  ``df/dlam = 0`` is the
statement that the pair and single-site magnetizations agree.

The double azimuthal integral collapses through
``e^{x cos a} = sum_k I_k(x) e^{i k a}`` to ``sum_k I_k(a1) I_k(a2) I_k(c)``
(``k`` over all integers), leaving a 2D polar quadrature.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import ive

from .meanfield import (
    COORDINATION,
    SolverError,
    TransitionReport,
    single_site_partition,
    site_magnetizations,
)
from .quadrature import adaptive, polar_rule, sin_power_mean


class PairAverages(NamedTuple):
    log_z: float
    m: float
    bond: float


@lru_cache(maxsize=256)
def bessel_order_cutoff(c_max: float, tol: float = 1e-13) -> int:
    """Smallest ``K`` with ``2 sum_{k>K} I_k(c_max) / I_0(c_max) < tol``.

    Since ``I_k(a) <= I_0(a)`` this bounds the relative truncation error of
    the pair sum for every node pair.
    """
    ks = np.arange(0, 400)
    r = ive(ks, c_max) / ive(0, c_max)
    tail = 2.0 * np.cumsum(r[::-1])[::-1]
    below = np.flatnonzero(tail < tol)
    return int(max(below[0] - 1, 2))


def _bessel_and_slope(K: int, x: np.ndarray):
    """``ive(k, x)`` and ``d/dx I_k(x) * exp(-x)`` for ``k = 0..K`` (rows)."""
    x = np.asarray(x, dtype=float)
    ks = np.arange(K + 2).reshape((-1,) + (1,) * x.ndim)
    iv = ive(ks, x[None, ...])
    slope = np.empty((K + 1,) + iv.shape[1:])
    slope[0] = iv[1]
    slope[1:] = 0.5 * (iv[0:K] + iv[2 : K + 2])
    return iv[: K + 1], slope


class PairCluster:
    """Pair-cluster integrals at fixed ``beta``, evaluated for any field."""

    def __init__(self, p: int, beta: float, z: int = COORDINATION, n: int = 48):
        self.p, self.beta, self.z, self.n = p, beta, z, n
        theta, w = polar_rule(n)
        self.sin_theta = np.sin(theta)
        self.s = self.sin_theta**p
        c = beta * np.outer(self.s, self.s)
        self.K = bessel_order_cutoff(float(beta))
        ic, ic_slope = _bessel_and_slope(self.K, c)
        mult = np.full(self.K + 1, 2.0)
        mult[0] = 1.0
        # exp(c - beta) rescaling; beta is added back in log_z
        W = np.outer(w, w) * np.exp(c - beta)
        self._A = mult[:, None, None] * ic * W
        self._B = mult[:, None, None] * ic_slope * W * np.outer(self.s, self.s)

    def _field_terms(self, lam: float):
        a = self.beta * (self.z - 1) * lam * self.s
        ia, ia_slope = _bessel_and_slope(self.K, a)
        shift = np.exp(a - a.max()) if a.size else a
        return ia * shift, ia_slope * shift, 2.0 * (a.max() if a.size else 0.0)

    def evaluate(self, lam: float) -> dict:
        ia, ia_slope, log_shift = self._field_terms(lam)
        A_ia = np.einsum("kqr,kr->kq", self._A, ia)
        Z = np.einsum("kq,kq->", ia, A_ia)
        # d/da_1 brings down cos(phi_1); weight by the theta_1 factor wanted
        dz_site = np.einsum("kq,kq->q", ia_slope, A_ia)
        bond = np.einsum("kq,kqr,kr->", ia, self._B, ia)
        return {
            "log_z": math.log(Z) + log_shift + self.beta,
            "m": float(np.dot(self.s, dz_site) / Z),
            "m_1": float(np.dot(self.sin_theta, dz_site) / Z),
            "m_phi": float(dz_site.sum() / Z),
            "bond": float(bond / Z),
        }

    def site_square_mean(self) -> float:
        """``<s1^2>`` in the zero-field pair."""
        ia, _, _ = self._field_terms(0.0)
        w_q = np.einsum("kq,kqr,kr->q", ia, self._A, ia)
        return float(np.dot(self.s**2, w_q) / w_q.sum())

    def residual(self, lam: float) -> float:
        """``-(df/dlam)/z``: positive when the pair is more ordered than the site."""
        pair = self.evaluate(lam)["m"]
        site = single_site_partition(self.beta * self.z * lam, self.p).m
        return (self.z - 1) * (pair - site)

    def initial_slope(self) -> float:
        """``d residual / d lam`` at ``lam = 0`` divided by ``beta (z-1)``."""
        s0 = sin_power_mean(2 * self.p)
        pair0 = self.evaluate(0.0)
        return (self.z - 1) * 0.5 * (self.site_square_mean() + pair0["bond"]) - 0.5 * self.z * s0

    def free_energy(self, lam: float) -> float:
        log_z2 = self.evaluate(lam)["log_z"]
        log_z1 = single_site_partition(self.beta * self.z * lam, self.p).log_z
        return -(0.5 * self.z * log_z2 - (self.z - 1) * log_z1) / self.beta


class DecoupledPair:
    """Pair cluster with its explicit bond replaced by the mean field ``lam``.

    The exponent becomes ``beta [z lam (m1 + m2) - lam^2]``, which turns the
    cluster free energy into the single-site mean-field functional.
    """

    def __init__(self, p: int, beta: float, z: int = COORDINATION, n: Optional[int] = None):
        self.p, self.beta, self.z = p, beta, z

    def evaluate(self, lam: float) -> dict:
        h = self.beta * self.z * lam
        site = single_site_partition(h, self.p)
        m_p, m_1, m_phi = site_magnetizations(h, self.p)
        return {
            "log_z": 2 * site.log_z - self.beta * lam * lam,
            "m": m_p,
            "m_1": m_1,
            "m_phi": m_phi,
            "bond": lam * lam,
        }

    def residual(self, lam: float) -> float:
        return single_site_partition(self.beta * self.z * lam, self.p).m - lam

    def initial_slope(self) -> float:
        return 0.5 * self.z * sin_power_mean(2 * self.p) - 1.0 / self.beta

    def free_energy(self, lam: float) -> float:
        log_z1 = single_site_partition(self.beta * self.z * lam, self.p).log_z
        return 0.5 * self.z * lam * lam - log_z1 / self.beta


@lru_cache(maxsize=64)
def pair_nodes(p: int, beta_max: float = 2.0, lam_max: float = 1.0) -> int:
    """Polar node count at which ``ln Z2`` and ``<m>`` have converged."""

    def probe(n):
        cl = PairCluster(p, beta_max, n=n)
        ev = cl.evaluate(lam_max)
        return np.array([ev["log_z"], ev["m"], ev["bond"]])

    return adaptive(probe, n0=24, tol=1e-11, n_max=512)[1]


def pair_partition(
    lam: float, theta_temp: float, p: int, z: int = COORDINATION, n: Optional[int] = None
) -> PairAverages:
    """``ln Z2``, pair magnetization ``<s1 cos phi1>`` and bond ``<s1 s2 cos(phi1-phi2)>``."""
    if lam < 0 or theta_temp <= 0:
        raise ValueError("need lam >= 0 and theta_temp > 0")
    cl = PairCluster(p, 1.0 / theta_temp, z, n or pair_nodes(p))
    ev = cl.evaluate(lam)
    return PairAverages(ev["log_z"], ev["m"], ev["bond"])


class _ClusterBranch:
    """Ordered stationary branch ``lam -> Theta(lam)`` of a cluster functional."""

    def __init__(self, p: int, z: int, decoupled: bool, n: int, beta_bracket=(0.05, 50.0)):
        self.p, self.z, self.decoupled, self.n = p, z, decoupled, n
        self.beta_bracket = beta_bracket
        self._cache: dict[float, object] = {}
        self._beta: dict[float, float] = {}

    def cluster(self, beta: float):
        cl = self._cache.get(beta)
        if cl is None:
            cls = DecoupledPair if self.decoupled else PairCluster
            cl = cls(self.p, beta, self.z, self.n)
            if len(self._cache) > 512:
                self._cache.clear()
            self._cache[beta] = cl
        return cl

    def beta_inst(self) -> float:
        lo, hi = self.beta_bracket
        return brentq(lambda b: self.cluster(b).initial_slope(), lo, hi, xtol=1e-14, rtol=1e-14)

    def beta_at(self, lam: float) -> float:
        if lam in self._beta:
            return self._beta[lam]
        lo, hi = self.beta_bracket
        g = lambda b: self.cluster(b).residual(lam)  # noqa: E731
        if g(lo) > 0 or g(hi) < 0:
            raise SolverError(f"no stationary temperature for lam={lam} in beta {self.beta_bracket}")
        self._beta[lam] = brentq(g, lo, hi, xtol=1e-14, rtol=1e-14)
        return self._beta[lam]

    def temperature(self, lam: float) -> float:
        return 1.0 / self.beta_at(lam)

    def delta_f(self, lam: float) -> float:
        cl = self.cluster(self.beta_at(lam))
        return cl.free_energy(lam) - cl.free_energy(0.0)


def solve_tsc(
    p: int,
    z: int = COORDINATION,
    lam_range: tuple[float, float] = (1e-3, 0.98),
    grid: int = 48,
    xtol: float = 1e-10,
    decoupled: bool = False,
    n: Optional[int] = None,
) -> TransitionReport:
    """Locate and classify the pair-cluster transition.

    ``decoupled=True`` swaps the exact bond for its mean-field replacement;
    the result must then coincide with the single-site solver.
    """
    if int(p) != p or p < 1:
        raise ValueError(f"p must be a positive integer, got {p}")
    n = n or (pair_nodes(p) if not decoupled else 0)
    br = _ClusterBranch(p, z, decoupled, n)
    theta_inst = 1.0 / br.beta_inst()
    method = "TSC-decoupled" if decoupled else "TSC"

    br.beta_bracket = (0.05, 4.0 / theta_inst)
    lams, thetas, df = [], [], []
    for x in np.geomspace(lam_range[0], lam_range[1], grid):
        try:
            th = br.temperature(x)
        except SolverError:
            break
        lams.append(x)
        thetas.append(th)
        df.append(br.delta_f(x))
        bent = max(thetas) > theta_inst * (1 + 1e-9)
        if th < 0.75 * theta_inst or (bent and df[-1] < 0):
            break
    lams, thetas, df = np.array(lams), np.array(thetas), np.array(df)
    grid = lams.size
    i_top = int(np.argmax(thetas))
    if thetas[i_top] <= theta_inst * (1 + 1e-9):
        if np.any(np.diff(thetas) > 0):
            raise SolverError(f"p={p}: non-monotone ordered branch without first-order bend")
        return TransitionReport(method, p, theta_inst, "II", theta_inst=theta_inst, z=z)

    lo = lams[max(i_top - 1, 0)]
    hi = lams[min(i_top + 1, grid - 1)]
    lam_turn = minimize_scalar(
        lambda x: -br.temperature(x), bounds=(lo, hi), method="bounded", options={"xatol": 1e-8}
    ).x
    after = np.flatnonzero((lams[:-1] >= lam_turn) & (df[:-1] > 0) & (df[1:] <= 0))
    if after.size == 0:
        # the crossing can sit between the turning point and the next grid node
        if br.delta_f(lam_turn) > 0 and df[i_top + 1 :].size and df[i_top + 1] <= 0:
            a, b = lam_turn, lams[i_top + 1]
        else:
            raise SolverError(f"p={p}: no free-energy crossing bracketed on the ordered branch")
    else:
        i = int(after[0])
        a, b = max(lams[i], lam_turn), lams[i + 1]
    lam_star = brentq(br.delta_f, a, b, xtol=xtol, rtol=1e-14)
    beta_star = br.beta_at(lam_star)
    cl = br.cluster(beta_star)
    ordered, disordered = cl.evaluate(lam_star), cl.evaluate(0.0)
    # order parameters are read off the pair, the largest cluster treated exactly
    m_p, m_1, m_phi = site_magnetizations(beta_star * z * lam_star, p)
    return TransitionReport(
        method,
        p,
        1.0 / beta_star,
        "I",
        delta_u=0.5 * z * (ordered["bond"] - disordered["bond"]),
        m_bar_p=ordered["m"],
        m_bar_1=ordered["m_1"],
        m_bar_phi=ordered["m_phi"],
        theta_inst=theta_inst,
        z=z,
        extra={
            "lam_star": lam_star,
            "site_m_1": m_1,
            "site_m_phi": m_phi,
            "consistency": abs(ordered["m"] - m_p),
            "theta_spinodal": br.temperature(lam_turn),
        },
    )
