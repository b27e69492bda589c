"""Gauss-Legendre rules for averages over the unit sphere.

All single-site integrands used here depend on ``theta`` only through
``sin(theta)``, so the polar integral is folded onto ``[0, pi/2]``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def polar_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes ``theta`` in ``(0, pi/2)`` and weights summing to 1.

    ``sum(w * f(theta))`` approximates the sphere average of ``f`` for
    integrands symmetric under ``theta -> pi - theta``.
    """
    x, w = legendre(n)
    theta = 0.25 * np.pi * (x + 1.0)
    weight = 0.25 * np.pi * w * np.sin(theta)
    theta.setflags(write=False)
    weight.setflags(write=False)
    return theta, weight


def adaptive(fn, n0: int = 32, tol: float = 1e-12, n_max: int = 4096):
    """Evaluate ``fn(n)`` with doubling ``n`` until successive results agree.

    ``fn`` may return a scalar or an array; agreement is judged on the
    largest absolute difference relative to ``max(1, |value|)``.
    Returns ``(value, n)``.
    """
    n = n0
    prev = np.asarray(fn(n), dtype=float)
    while n < n_max:
        n *= 2
        cur = np.asarray(fn(n), dtype=float)
        scale = np.maximum(1.0, np.abs(cur))
        if np.all(np.abs(cur - prev) <= tol * scale):
            return cur if cur.ndim else float(cur), n
        prev = cur
    raise RuntimeError(f"quadrature did not converge to {tol} with {n_max} nodes")


def sin_power_mean(a: float) -> float:
    """Sphere average of ``sin(theta)**a`` for real ``a >= 0``.

    Equals ``(2p)!!/(2p+1)!!`` for ``a = 2p``.
    """
    from scipy.special import gammaln

    return float(
        np.exp(0.5 * np.log(np.pi) + gammaln(0.5 * a + 1.0) - np.log(2.0) - gammaln(0.5 * a + 1.5))
    )


def double_factorial_ratio(p: int) -> float:
    """``(2p)!! / (2p+1)!!`` as an exact running product."""
    r = 1.0
    for k in range(1, p + 1):
        r *= (2 * k) / (2 * k + 1)
    return r
