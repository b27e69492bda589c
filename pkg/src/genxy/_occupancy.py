"""Compiled fixed-occupancy plane-rotator ladder.

``m`` rotors sit on a uniformly random ``m``-subset of the sites; bonds act
only between occupied neighbors.  Each sweep makes one rotor proposal per
site (skipped on empty sites) and one hop proposal per site, which moves a
random rotor to a random empty site with a fresh angle.  Chains at
neighboring inverse temperatures swap configurations every
``exchange_every`` sweeps.
"""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi
DRAWS_PER_SITE = 7


@njit(cache=True)
def _field(i, ang, occ, phi, nbr):
    acc = 0.0
    for k in range(nbr.shape[1]):
        j = nbr[i, k]
        if j < 0:
            break
        if occ[j]:
            acc += math.cos(ang - phi[j])
    return acc


@njit(cache=True)
def _energy(occ, phi, bonds):
    e = 0.0
    for b in range(bonds.shape[0]):
        i = bonds[b, 0]
        j = bonds[b, 1]
        if occ[i] and occ[j]:
            e -= math.cos(phi[i] - phi[j])
    return e


@njit(cache=True)
def ladder_block(
    nbr, bonds, betas, occ, phi, filled, empty, energy, perm,
    rand, ex_rand, sweep0, exchange_every, record, out,
):
    """Advance all replicas ``rand.shape[0]`` sweeps.

    ``perm[k]`` is the replica currently at ladder slot ``k``; ``out[k, t]``
    receives the energy at slot ``k`` after sweep ``t`` when ``record``.
    """
    n_slots = betas.shape[0]
    n = occ.shape[1]
    m = filled.shape[1]
    for t in range(rand.shape[0]):
        for k in range(n_slots):
            r = perm[k]
            beta = betas[k]
            width = min(1.0, 1.0 / math.sqrt(1.0 + beta))
            row = rand[t, k]
            e = energy[r]
            for i in range(n):
                u0 = row[3 * i]
                u1 = row[3 * i + 1]
                u2 = row[3 * i + 2]
                if not occ[r, i]:
                    continue
                if u0 < 0.5:
                    new = TWO_PI * u1 - math.pi
                else:
                    new = phi[r, i] + math.pi * width * (2.0 * u1 - 1.0)
                dE = _field(i, phi[r, i], occ[r], phi[r], nbr) - _field(i, new, occ[r], phi[r], nbr)
                if dE <= 0.0 or u2 < math.exp(-beta * dE):
                    phi[r, i] = (new + math.pi) % TWO_PI - math.pi
                    e += dE
            if 0 < m < n:
                base = 3 * n
                for h in range(n):
                    a_pos = min(int(row[base + 4 * h] * m), m - 1)
                    b_pos = min(int(row[base + 4 * h + 1] * (n - m)), n - m - 1)
                    a = filled[r, a_pos]
                    b = empty[r, b_pos]
                    new = TWO_PI * row[base + 4 * h + 2] - math.pi
                    before = _field(a, phi[r, a], occ[r], phi[r], nbr)
                    occ[r, a] = 0
                    after = _field(b, new, occ[r], phi[r], nbr)
                    dE = before - after
                    if dE <= 0.0 or row[base + 4 * h + 3] < math.exp(-beta * dE):
                        occ[r, b] = 1
                        phi[r, b] = new
                        filled[r, a_pos] = b
                        empty[r, b_pos] = a
                        e += dE
                    else:
                        occ[r, a] = 1
            energy[r] = e
        sweep = sweep0 + t + 1
        if sweep % 1000 == 0:
            for r in range(n_slots):
                energy[r] = _energy(occ[r], phi[r], bonds)
        if sweep % exchange_every == 0:
            start = (sweep // exchange_every) % 2
            for k in range(start, n_slots - 1, 2):
                x = (betas[k] - betas[k + 1]) * (energy[perm[k]] - energy[perm[k + 1]])
                if x >= 0.0 or ex_rand[t, k] < math.exp(x):
                    tmp = perm[k]
                    perm[k] = perm[k + 1]
                    perm[k + 1] = tmp
        if record:
            for k in range(n_slots):
                out[k, t] = energy[perm[k]]


def fixed_occupancy_energies(
    nbr, bonds, betas, m: int, therm: int, sweeps: int, exchange_every: int,
    rng: np.random.Generator, chunk: int = 200,
):
    """Energy series ``(len(betas), sweeps)`` of the fixed-``m`` ladder.

    Replicas start with the first ``m`` sites occupied and all angles zero.
    """
    betas = np.ascontiguousarray(betas, dtype=float)
    n_slots, n = betas.size, nbr.shape[0]
    occ = np.zeros((n_slots, n), dtype=np.uint8)
    occ[:, :m] = 1
    phi = np.zeros((n_slots, n))
    filled = np.tile(np.arange(m, dtype=np.int64), (n_slots, 1))
    empty = np.tile(np.arange(m, n, dtype=np.int64), (n_slots, 1))
    energy = np.array([_energy(occ[r], phi[r], bonds) for r in range(n_slots)])
    perm = np.arange(n_slots, dtype=np.int64)
    out = np.empty((n_slots, sweeps))
    scratch = np.empty((n_slots, 1))
    done = 0
    total = therm + sweeps
    while done < total:
        c = min(chunk, total - done)
        if done < therm:
            c = min(c, therm - done)
        rand = rng.random((c, n_slots, DRAWS_PER_SITE * n))
        ex = rng.random((c, max(n_slots - 1, 1)))
        measuring = done >= therm
        target = out[:, done - therm: done - therm + c] if measuring else scratch
        buf = np.empty((n_slots, c)) if measuring else scratch
        ladder_block(
            nbr, bonds, betas, occ, phi, filled, empty, energy, perm,
            rand, ex, done, exchange_every, measuring, buf,
        )
        if measuring:
            target[:] = buf
        done += c
    return out
