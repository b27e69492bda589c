"""Single-chain state and the elementary Markov moves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..lattice import SiteGraph
from ..model import ModelSpec, SpinConfiguration, energy, site_weight
from . import _kernels as K

TARGET_ACCEPTANCE = 0.4
WIDTH_BOUNDS = (1e-3, 1.0)

# columns of a per-sweep record row
RECORD_FIELDS = ("u", "m_xy", "m_p", "rho", "m_phi", "mx_phi", "my_phi")


class MonteCarloError(ValueError):
    pass


@dataclass
class ChainState:
    """One Markov chain: configuration, target, random source and bookkeeping.

    ``weights`` mirrors ``site_weight(spec.variant, cfg.theta)``; the kernels
    keep both in step.  ``width`` is the local-move window, a fraction of
    the full range in ``cos(theta)`` and in ``phi / pi``.
    """

    cfg: SpinConfiguration
    spec: ModelSpec
    rng: np.random.Generator
    cached_energy: float = math.nan
    sweep_count: int = 0
    width: float = 0.5
    weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.weights is None:
            self.weights = np.ascontiguousarray(site_weight(self.spec.variant, self.cfg.theta))
        if math.isnan(self.cached_energy):
            self.resync()

    @classmethod
    def create(
        cls,
        spec: ModelSpec,
        geom: SiteGraph,
        rng: np.random.Generator,
        cfg: Optional[SpinConfiguration] = None,
    ) -> "ChainState":
        """Hot start from a Haar-random configuration unless ``cfg`` is given."""
        if cfg is None:
            cfg = SpinConfiguration.random(geom, rng)
        return cls(cfg=cfg, spec=spec, rng=rng)

    @property
    def geom(self) -> SiteGraph:
        return self.cfg.geom

    @property
    def rng_state(self) -> dict:
        return self.rng.bit_generator.state

    @property
    def variant_args(self) -> tuple[int, float]:
        return self.spec.variant.code, self.spec.variant.param

    @property
    def cluster_draws(self) -> int:
        """Uniforms consumed by one cluster move: axis, seed, one per directed bond."""
        return 2 + int(np.count_nonzero(self.geom.neighbor_table >= 0))

    def resync(self) -> float:
        self.cached_energy = float(K.total_energy(self.weights, self.cfg.phi, self.geom.bond_array))
        return self.cached_energy

    def energy_drift(self) -> float:
        return abs(self.cached_energy - energy(self.spec, self.cfg))

    def with_beta(self, beta: float) -> "ChainState":
        return ChainState(
            cfg=self.cfg.copy(),
            spec=self.spec.with_beta(beta),
            rng=self.rng,
            sweep_count=self.sweep_count,
            width=self.width,
        )


def _pass(state: ChainState, order: np.ndarray, rand: np.ndarray) -> tuple[int, int]:
    code, param = state.variant_args
    dE, acc, tried = K.metropolis_pass(
        state.cfg.theta, state.cfg.phi, state.weights, state.geom.neighbor_table,
        order, state.spec.beta, code, param, state.width, rand,
    )
    state.cached_energy += dE
    return acc, tried


def metropolis_sweep(state: ChainState) -> ChainState:
    """One proposal per site, color by color (checkerboard on even lattices)."""
    order = state.geom.sweep_order
    rand = state.rng.random((order.size, 4))
    _pass(state, order, rand)
    state.sweep_count += 1
    if state.sweep_count % K.RESYNC_EVERY == 0:
        state.resync()
    return state


def metropolis_color_update(state: ChainState, color: int) -> ChainState:
    """Update a single independent site set.

    Sites of one color do not interact, so this move is reversible on its
    own; a full sweep is a product of such moves.
    """
    order = np.ascontiguousarray(state.geom.colors[color], dtype=np.int64)
    _pass(state, order, state.rng.random((order.size, 4)))
    return state


def cluster_update_phi(state: ChainState) -> int:
    """Wolff reflection of the azimuths about a random axis; returns the cluster size."""
    n = state.geom.site_count
    if n == 0:
        return 0
    rand = state.rng.random(state.cluster_draws)
    size = K.wolff_reflect(
        state.cfg.phi, state.weights, state.geom.neighbor_table, state.spec.beta, rand,
        np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.int64), np.zeros(n),
    )
    state.resync()
    return int(size)


@dataclass
class SweepBlock:
    records: np.ndarray
    accepted: int
    tried: int
    cluster_sites: int


def advance(state: ChainState, n_sweeps: int, cluster_every: int = 0) -> SweepBlock:
    """Run ``n_sweeps`` compiled sweeps and record observables after each.

    Each sweep consumes one row of ``4N`` uniforms, plus a cluster block
    when ``cluster_every > 0`` (drawn every sweep, used every
    ``cluster_every``-th).  With ``cluster_every`` in {0, 1} the random
    stream coincides with calling ``metropolis_sweep`` (then
    ``cluster_update_phi``) the same number of times.
    """
    n = state.geom.site_count
    order = state.geom.sweep_order
    n_metro = 4 * order.size
    width = n_metro + (state.cluster_draws if cluster_every > 0 else 0)
    rand = state.rng.random((n_sweeps, width))
    records = np.full((n_sweeps, len(RECORD_FIELDS)), np.nan)
    code, param = state.variant_args
    e, acc, tried, csize = K.run_sweeps(
        state.cfg.theta, state.cfg.phi, state.weights, state.geom.neighbor_table,
        state.geom.bond_array, order, state.spec.beta, code, param, state.width,
        rand, n_metro, int(cluster_every), state.sweep_count, state.cached_energy, records,
    )
    state.cached_energy = float(e)
    state.sweep_count += n_sweeps
    if n == 0:
        records[:, 0] = 0.0
    return SweepBlock(records, int(acc), int(tried), int(csize))


def tune_width(state: ChainState, accepted: int, tried: int) -> float:
    """Nudge the local window toward the target acceptance."""
    if tried:
        rate = accepted / tried
        factor = min(2.0, max(0.5, (rate + 0.05) / (TARGET_ACCEPTANCE + 0.05)))
        state.width = float(np.clip(state.width * factor, *WIDTH_BOUNDS))
    return state.width


def _check_compatible(states: Sequence[ChainState]):
    if len(states) < 2:
        return
    key = states[0].geom.key()
    variant = states[0].spec.variant
    for st in states[1:]:
        if st.geom.key() != key:
            raise MonteCarloError("replicas must share one geometry")
        if st.spec.variant != variant:
            raise MonteCarloError("replicas must share one model variant")


def swap_configurations(a: ChainState, b: ChainState):
    a.cfg, b.cfg = b.cfg, a.cfg
    a.weights, b.weights = b.weights, a.weights
    a.cached_energy, b.cached_energy = b.cached_energy, a.cached_energy


def replica_exchange_step(
    states: Sequence[ChainState], rng: np.random.Generator, parity: int = 0
) -> list[bool]:
    """Attempt swaps of neighbors ``(k, k+1)`` with ``k = parity, parity+2, ...``.

    Acceptance is ``min(1, exp((beta_k - beta_{k+1}) (E_k - E_{k+1})))``.
    Temperatures stay with their slots; configurations move.  One uniform
    is drawn per attempted pair.
    """
    _check_compatible(states)
    pairs = range(parity % 2, len(states) - 1, 2)
    draws = rng.random(len(pairs))
    accepted = []
    for r, k in zip(draws, pairs):
        a, b = states[k], states[k + 1]
        x = (a.spec.beta - b.spec.beta) * (a.cached_energy - b.cached_energy)
        ok = x >= 0.0 or r < math.exp(x)
        if ok:
            swap_configurations(a, b)
        accepted.append(bool(ok))
    return accepted
