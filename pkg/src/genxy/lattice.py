"""Periodic hypercubic lattices and small explicit site graphs.

Sites of a ``LatticeGeometry`` are numbered row-major: the coordinate
``(x_0, ..., x_{d-1})`` maps to ``sum_k x_k * L**(d-1-k)``, so the last
coordinate runs fastest.  Every graph carries a neighbor table of shape
``(site_count, max_degree)`` padded with ``-1`` and an ordered tuple of
independent site sets used as the sweep order by the samplers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np


class LatticeError(ValueError):
    """Invalid lattice parameters."""


@dataclass(frozen=True, eq=False)
class SiteGraph:
    """Undirected simple graph on ``site_count`` sites.

    ``neighbor_table[i]`` lists the neighbors of ``i`` (``-1`` padded),
    ``bond_array`` holds each unordered bond once as ``(i, j)`` with ``i < j``
    and ``colors`` is a partition of the sites into independent sets.
    """

    site_count: int
    neighbor_table: np.ndarray
    bond_array: np.ndarray
    colors: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def bond_count(self) -> int:
        return int(self.bond_array.shape[0])

    @property
    def sweep_order(self) -> np.ndarray:
        """Sites concatenated color by color."""
        if not self.colors:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(self.colors).astype(np.int64)

    def neighbors(self, site: int) -> np.ndarray:
        row = self.neighbor_table[site]
        return row[row >= 0]

    def key(self) -> tuple:
        """Hashable structural identity, used by checkpoints and replica checks."""
        return (self.site_count, self.bond_array.tobytes())


@dataclass(frozen=True, eq=False)
class LatticeGeometry(SiteGraph):
    """Periodic ``L**d`` hypercubic lattice, ``d`` in {2, 3}."""

    d: int = 2
    L: int = 3

    def coords(self, site: int) -> tuple[int, ...]:
        return tuple(int(c) for c in np.unravel_index(site, (self.L,) * self.d))

    def index(self, coords) -> int:
        return int(np.ravel_multi_index(tuple(int(c) % self.L for c in coords), (self.L,) * self.d))


def _bonds_from_table(table: np.ndarray) -> np.ndarray:
    pairs = {(min(i, int(j)), max(i, int(j))) for i, row in enumerate(table) for j in row if j >= 0}
    return np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)


def _greedy_colors(table: np.ndarray) -> tuple[np.ndarray, ...]:
    n = table.shape[0]
    color = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        used = {color[j] for j in table[i] if j >= 0 and color[j] >= 0}
        c = 0
        while c in used:
            c += 1
        color[i] = c
    return tuple(np.flatnonzero(color == c) for c in range(int(color.max()) + 1 if n else 0))


def build(d: int, L: int) -> LatticeGeometry:
    """Build the periodic ``d``-dimensional lattice of linear size ``L``.

    Even ``L`` uses the two checkerboard sublattices as sweep colors; odd
    ``L`` falls back to a greedy proper coloring.
    """
    if d not in (2, 3):
        raise LatticeError(f"dimension must be 2 or 3, got {d}")
    if int(L) != L or L < 3:
        raise LatticeError(f"linear size must be an integer >= 3, got {L}")
    L = int(L)
    shape = (L,) * d
    n = L**d
    coords = np.array(list(product(range(L), repeat=d)), dtype=np.int64)
    table = np.empty((n, 2 * d), dtype=np.int64)
    for axis in range(d):
        for k, step in enumerate((1, -1)):
            shifted = coords.copy()
            shifted[:, axis] = (shifted[:, axis] + step) % L
            table[:, 2 * axis + k] = np.ravel_multi_index(tuple(shifted.T), shape)
    bonds = _bonds_from_table(table)
    if L % 2 == 0:
        parity = coords.sum(axis=1) % 2
        colors = (np.flatnonzero(parity == 0), np.flatnonzero(parity == 1))
    else:
        colors = _greedy_colors(table)
    return LatticeGeometry(
        site_count=n, neighbor_table=table, bond_array=bonds, colors=colors, d=d, L=L
    )


def graph_from_edges(site_count: int, edges) -> SiteGraph:
    """Explicit graph, e.g. the two-site pair or a single free site."""
    edges = [(int(a), int(b)) for a, b in edges]
    adj: list[set[int]] = [set() for _ in range(site_count)]
    for a, b in edges:
        if a == b or not (0 <= a < site_count and 0 <= b < site_count):
            raise LatticeError(f"invalid edge ({a}, {b})")
        adj[a].add(b)
        adj[b].add(a)
    width = max((len(s) for s in adj), default=0)
    table = np.full((site_count, width), -1, dtype=np.int64)
    for i, nbrs in enumerate(adj):
        table[i, : len(nbrs)] = sorted(nbrs)
    return SiteGraph(
        site_count=site_count,
        neighbor_table=table,
        bond_array=_bonds_from_table(table),
        colors=_greedy_colors(table),
    )


def pair_graph() -> SiteGraph:
    return graph_from_edges(2, [(0, 1)])


def bonds(geom: SiteGraph) -> list[tuple[int, int]]:
    """Each unordered nearest-neighbor pair exactly once."""
    return [(int(a), int(b)) for a, b in geom.bond_array]


def checkerboard_partition(geom: LatticeGeometry) -> tuple[np.ndarray, np.ndarray]:
    """The two sublattices of even and odd coordinate sum (``L`` must be even)."""
    if geom.L % 2:
        raise LatticeError(f"checkerboard partition needs even L, got {geom.L}")
    return geom.colors[0], geom.colors[1]
