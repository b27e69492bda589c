"""Compiled inner loops.  All randomness arrives as pre-drawn uniforms."""

import math

import numpy as np
from numba import njit

HALF_PI = 0.5 * math.pi
TWO_PI = 2.0 * math.pi
RESYNC_EVERY = 1000


@njit(cache=True)
def weight(code, param, theta):
    if code == 0:
        return math.sin(theta) ** int(param)
    return 1.0 if abs(theta - HALF_PI) <= param else 0.0


@njit(cache=True)
def wrap(phi):
    return (phi + math.pi) % TWO_PI - math.pi


@njit(cache=True)
def coupling_sum(i, phi_i, s, phi, nbr):
    acc = 0.0
    for k in range(nbr.shape[1]):
        j = nbr[i, k]
        if j < 0:
            break
        acc += s[j] * math.cos(phi_i - phi[j])
    return acc


@njit(cache=True)
def total_energy(s, phi, bonds):
    # Kahan-compensated bond sum
    total = 0.0
    comp = 0.0
    for b in range(bonds.shape[0]):
        i = bonds[b, 0]
        j = bonds[b, 1]
        y = -s[i] * s[j] * math.cos(phi[i] - phi[j]) - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


@njit(cache=True)
def metropolis_pass(theta, phi, s, nbr, order, beta, code, param, width, rand):
    """One proposal per site of ``order``; returns (dE, local accepted, local tried).

    ``rand[k]`` = (kernel choice, u-move, phi-move, acceptance).  Half the
    proposals are fresh Haar draws, half are symmetric moves in
    ``(cos theta, phi)`` with reflection at ``cos theta = +-1``; both are
    symmetric with respect to the Haar measure, so the acceptance is plain
    Metropolis on ``exp(-beta dE)``.
    """
    dE_total = 0.0
    acc_local = 0
    tried_local = 0
    for k in range(order.shape[0]):
        i = order[k]
        r0 = rand[k, 0]
        r1 = rand[k, 1]
        r2 = rand[k, 2]
        r3 = rand[k, 3]
        local = r0 >= 0.5
        if local:
            u = math.cos(theta[i]) + width * (2.0 * r1 - 1.0)
            if u > 1.0:
                u = 2.0 - u
            elif u < -1.0:
                u = -2.0 - u
            phi_new = wrap(phi[i] + math.pi * width * (2.0 * r2 - 1.0))
            tried_local += 1
        else:
            u = 1.0 - 2.0 * r1
            phi_new = TWO_PI * r2 - math.pi
        theta_new = math.acos(min(1.0, max(-1.0, u)))
        s_new = weight(code, param, theta_new)
        old = s[i] * coupling_sum(i, phi[i], s, phi, nbr)
        new = s_new * coupling_sum(i, phi_new, s, phi, nbr)
        dE = old - new
        if dE <= 0.0 or r3 < math.exp(-beta * dE):
            theta[i] = theta_new
            phi[i] = phi_new
            s[i] = s_new
            dE_total += dE
            if local:
                acc_local += 1
    return dE_total, acc_local, tried_local


@njit(cache=True)
def wolff_reflect(phi, s, nbr, beta, rand, mark, stack, proj):
    """Embedded-rotor Wolff update of the azimuths; returns the cluster size.

    ``rand[0]`` picks the mirror axis, ``rand[1]`` the seed site, the rest
    are consumed one per bond test.
    """
    n = phi.shape[0]
    alpha = TWO_PI * rand[0]
    seed = min(int(rand[1] * n), n - 1)
    for i in range(n):
        mark[i] = 0
        proj[i] = math.cos(phi[i] - alpha)
    ptr = 2
    top = 0
    stack[top] = seed
    top += 1
    mark[seed] = 1
    size = 1
    while top > 0:
        top -= 1
        i = stack[top]
        for k in range(nbr.shape[1]):
            j = nbr[i, k]
            if j < 0:
                break
            if mark[j]:
                continue
            x = -2.0 * beta * s[i] * s[j] * proj[i] * proj[j]
            p_add = 1.0 - math.exp(x) if x < 0.0 else 0.0
            r = rand[ptr]
            ptr += 1
            if r < p_add:
                mark[j] = 1
                stack[top] = j
                top += 1
                size += 1
    for i in range(n):
        if mark[i]:
            phi[i] = wrap(2.0 * alpha + math.pi - phi[i])
    return size


@njit(cache=True)
def observables(theta, phi, s, energy, code, out):
    n = theta.shape[0]
    ax = 0.0
    ay = 0.0
    bx = 0.0
    by = 0.0
    cx = 0.0
    cy = 0.0
    occ = 0.0
    for i in range(n):
        c = math.cos(phi[i])
        sn = math.sin(phi[i])
        st = math.sin(theta[i])
        ax += st * c
        ay += st * sn
        bx += s[i] * c
        by += s[i] * sn
        cx += c
        cy += sn
        occ += s[i]
    out[0] = energy / n
    out[1] = math.sqrt(ax * ax + ay * ay) / n
    out[2] = math.sqrt(bx * bx + by * by) / n
    out[3] = occ / n if code == 1 else math.nan
    out[4] = math.sqrt(cx * cx + cy * cy) / n
    out[5] = cx / n
    out[6] = cy / n


@njit(cache=True)
def run_sweeps(
    theta, phi, s, nbr, bonds, order, beta, code, param, width,
    rand, n_metro, cluster_every, sweep0, energy, record,
):
    """``rand.shape[0]`` sweeps; row layout = metropolis block then cluster block."""
    n = theta.shape[0]
    n_sweeps = rand.shape[0]
    mark = np.zeros(n, dtype=np.uint8)
    stack = np.zeros(max(n, 1), dtype=np.int64)
    proj = np.zeros(n, dtype=np.float64)
    acc = 0
    tried = 0
    cluster_sizes = 0
    for t in range(n_sweeps):
        row = rand[t]
        block = row[:n_metro].reshape((order.shape[0], 4))
        dE, a, tr = metropolis_pass(theta, phi, s, nbr, order, beta, code, param, width, block)
        energy += dE
        acc += a
        tried += tr
        sweep = sweep0 + t + 1
        if cluster_every > 0 and sweep % cluster_every == 0 and n > 0:
            cluster_sizes += wolff_reflect(phi, s, nbr, beta, row[n_metro:], mark, stack, proj)
            energy = total_energy(s, phi, bonds)
        if sweep % RESYNC_EVERY == 0:
            energy = total_energy(s, phi, bonds)
        if n > 0:
            observables(theta, phi, s, energy, code, record[t])
    return energy, acc, tried, cluster_sizes
