"""Single-site mean-field theory of the generalized XY model.

The trial free energy per site is ``f(M) = (z/2) M**2 - Theta ln Z1(z M / Theta)``
with ``Z1(h) = < exp(h sin(theta)**p cos(phi)) >`` over the sphere.  The
azimuthal integral is done analytically through modified Bessel functions,
the polar one by Gauss-Legendre quadrature.

Stationary points satisfy ``M = m(h)``, ``h = z M / Theta``.  Reading this
backwards, the ordered branch is parametrized by the field ``h`` alone:
``M = m(h)`` and ``Theta = z m(h) / h``.  The solver walks that curve
instead of root-finding at fixed temperature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import ive

from .quadrature import adaptive, double_factorial_ratio, polar_rule

COORDINATION = 6


class SolverError(RuntimeError):
    pass


class SiteAverages(NamedTuple):
    log_z: float
    m: float
    m2: float


@dataclass(frozen=True)
class MFState:
    p: int
    theta_temp: float
    z: int
    m_p: float
    m_1: float
    f: float
    u: float


@dataclass(frozen=True)
class TransitionReport:
    method: str
    p: int
    theta_star: float
    order_type: str
    delta_u: Optional[float] = None
    m_bar_p: Optional[float] = None
    m_bar_1: Optional[float] = None
    m_bar_phi: Optional[float] = None
    theta_inst: float = float("nan")
    z: int = COORDINATION
    extra: dict = field(default_factory=dict, compare=False)

    def row(self) -> dict:
        return {
            "p": self.p,
            "theta_star": self.theta_star,
            "type": self.order_type,
            "delta_u": self.delta_u,
            "m_bar_p": self.m_bar_p,
            "m_bar_1": self.m_bar_1,
            "m_bar_phi": self.m_bar_phi,
        }


def _site_terms(h: float, p: int, n: int):
    theta, w = polar_rule(n)
    s = np.sin(theta) ** p
    a = h * s
    # ive(k, a) * exp(a - h) == I_k(a) * exp(-h); h >= a keeps this bounded
    scale = np.exp(a - h)
    return theta, w, s, ive(0, a) * scale, ive(1, a) * scale, ive(2, a) * scale


def _site_nodes(p: int, h: float) -> int:
    return _nodes_for(p, int(math.ceil(max(h, 1.0))))


@lru_cache(maxsize=None)
def _nodes_for(p: int, h_ceil: int) -> int:
    def lnz(n):
        _, w, _, e0, e1, _ = _site_terms(float(h_ceil), p, n)
        return np.array([math.log(np.dot(w, e0)), np.dot(w, e1)])

    return adaptive(lnz, n0=32, tol=1e-13)[1]


def single_site_partition(h: float, p: int, n: Optional[int] = None) -> SiteAverages:
    """``ln Z1(h)``, ``<m>`` and ``<m^2>`` for ``m = sin(theta)**p cos(phi)``.

    ``<m^2>`` uses ``cos^2 = (1 + cos 2phi)/2``, giving the ``I_0 + I_2`` weight.
    """
    if h < 0:
        raise ValueError("field must be >= 0")
    n = n or _site_nodes(p, h)
    _, w, s, e0, e1, e2 = _site_terms(h, p, n)
    z = np.dot(w, e0)
    return SiteAverages(
        log_z=math.log(z) + h,
        m=float(np.dot(w, s * e1) / z),
        m2=float(np.dot(w, s * s * (e0 + e2)) / (2.0 * z)),
    )


def site_magnetizations(h: float, p: int, n: Optional[int] = None) -> tuple[float, float, float]:
    """``(<sin^p theta cos phi>, <sin theta cos phi>, <cos phi>)`` in field ``h``."""
    n = n or _site_nodes(p, h)
    theta, w, s, e0, e1, _ = _site_terms(h, p, n)
    z = np.dot(w, e0)
    return (
        float(np.dot(w, s * e1) / z),
        float(np.dot(w, np.sin(theta) * e1) / z),
        float(np.dot(w, e1) / z),
    )


def instability_temperature(p: int, z: int = COORDINATION) -> float:
    """Closed form ``z <m^2>_0 = (z/2) (2p)!!/(2p+1)!!``."""
    return 0.5 * z * double_factorial_ratio(p)


def instability_temperature_quadrature(p: int, z: int = COORDINATION) -> float:
    return z * single_site_partition(0.0, p).m2


def mf_free_energy(M: float, theta_temp: float, p: int, z: int = COORDINATION) -> float:
    if theta_temp <= 0:
        raise ValueError("temperature must be > 0")
    return 0.5 * z * M * M - theta_temp * single_site_partition(z * M / theta_temp, p).log_z


def self_consistency_residual(M: float, theta_temp: float, p: int, z: int = COORDINATION) -> float:
    return single_site_partition(z * M / theta_temp, p).m - M


def mf_state(theta_temp: float, p: int, z: int = COORDINATION, grid: int = 400) -> MFState:
    """Global free-energy minimum at fixed temperature, by scan plus bracketing."""
    Ms = np.linspace(0.0, 1.0, grid + 1)[1:]
    r = np.array([self_consistency_residual(M, theta_temp, p, z) for M in Ms])
    candidates = [0.0]
    for i in np.flatnonzero(np.sign(r[:-1]) * np.sign(r[1:]) < 0):
        candidates.append(
            brentq(self_consistency_residual, Ms[i], Ms[i + 1], args=(theta_temp, p, z), xtol=1e-15)
        )
    fs = [mf_free_energy(M, theta_temp, p, z) for M in candidates]
    k = int(np.argmin(fs))
    if k > 0 and fs[k] > -1e-14:
        k = 0
    M = candidates[k]
    _, m1, _ = site_magnetizations(z * M / theta_temp, p)
    return MFState(p=p, theta_temp=theta_temp, z=z, m_p=M, m_1=m1, f=fs[k], u=-0.5 * z * M * M)


class _Branch:
    """Ordered stationary branch as a function of the effective field ``h``."""

    def __init__(self, p: int, z: int):
        self.p, self.z = p, z

    def temperature(self, h: float) -> float:
        return self.z * single_site_partition(h, self.p).m / h

    def delta_f(self, h: float) -> float:
        site = single_site_partition(h, self.p)
        theta = self.z * site.m / h
        return 0.5 * self.z * site.m**2 - theta * site.log_z


def solve_mf(
    p: int,
    z: int = COORDINATION,
    h_range: tuple[float, float] = (1e-3, 200.0),
    grid: int = 160,
    xtol: float = 1e-12,
) -> TransitionReport:
    """Locate the mean-field ordering transition and classify its order.

    Type II when the ordered branch leaves ``M = 0`` towards lower
    temperature; type I when it first bends above the instability point,
    in which case the transition sits where the ordered free energy
    crosses zero on the stable part of the branch.
    """
    if int(p) != p or p < 1:
        raise ValueError(f"p must be a positive integer, got {p}")
    br = _Branch(p, z)
    theta_inst = instability_temperature(p, z)
    hs = np.geomspace(h_range[0], h_range[1], grid)
    thetas = np.array([br.temperature(h) for h in hs])
    i_top = int(np.argmax(thetas))
    if thetas[i_top] <= theta_inst * (1 + 1e-9):
        if np.any(np.diff(thetas) > 0):
            raise SolverError(f"p={p}: non-monotone ordered branch without first-order bend")
        return TransitionReport("MF", p, theta_inst, "II", theta_inst=theta_inst, z=z)

    lo = hs[max(i_top - 1, 0)]
    hi = hs[min(i_top + 1, grid - 1)]
    h_turn = minimize_scalar(lambda h: -br.temperature(h), bounds=(lo, hi), method="bounded").x
    df = np.array([br.delta_f(h) for h in hs])
    after = np.flatnonzero((hs[:-1] >= h_turn) & (df[:-1] > 0) & (df[1:] <= 0))
    if after.size == 0:
        raise SolverError(f"p={p}: no free-energy crossing bracketed on the ordered branch")
    i = int(after[0])
    h_star = brentq(br.delta_f, max(hs[i], h_turn), hs[i + 1], xtol=xtol, rtol=1e-15)
    theta_star = br.temperature(h_star)
    m_p, m_1, m_phi = site_magnetizations(h_star, p)
    return TransitionReport(
        "MF",
        p,
        theta_star,
        "I",
        delta_u=0.5 * z * m_p**2,
        m_bar_p=m_p,
        m_bar_1=m_1,
        m_bar_phi=m_phi,
        theta_inst=theta_inst,
        z=z,
        extra={"h_star": h_star, "theta_spinodal": br.temperature(h_turn)},
    )
