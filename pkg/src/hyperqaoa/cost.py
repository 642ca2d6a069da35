"""Classical cost oracle for the diagonal k-local Hamiltonian.

The cost of a spin assignment z in {+1,-1}^n is the sum over hyperedges of
``weight * prod(z_j)``.  The full diagonal (one value per basis state) is
precomputed once per hypergraph and shared with the statevector simulator;
basis index bit j carries qubit j, with bit value b mapping to spin
z = 1 - 2b.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .hypergraph import Hypergraph

ENUMERATION_CAP = 26


class CapacityError(ValueError):
    """Vertex count exceeds the exhaustive-enumeration cap."""


class EmptyHypergraphError(ValueError):
    """Operation requires a hypergraph with at least one edge."""


@dataclass(frozen=True)
class EnergySpectrumSummary:
    """Exact extreme energies; ``argmin`` is the lowest minimizing basis index."""

    e_min: float
    e_max: float
    argmin: int


def index_spins(index: int, n: int) -> np.ndarray:
    """Spin vector (z_0..z_{n-1}) of one basis index."""
    bits = (index >> np.arange(n)) & 1
    return 1 - 2 * bits


def spin_signs(n: int, nodes: Sequence[int]) -> np.ndarray:
    """prod_{j in nodes} z_j for every basis index, as a float array of +-1."""
    mask = 0
    for j in nodes:
        if not 0 <= j < n:
            raise ValueError(f"vertex {j} out of range for n={n}")
        mask |= 1 << j
    idx = np.arange(1 << n, dtype=np.uint32 if n <= 26 else np.uint64)
    parity = np.bitwise_count(idx & idx.dtype.type(mask)) & 1
    return 1.0 - 2.0 * parity


@lru_cache(maxsize=8)
def diagonal_table(h: Hypergraph) -> np.ndarray:
    """Cost of every basis state, length 2^n.  Cached and read-only."""
    if h.n > ENUMERATION_CAP:
        raise CapacityError(f"n={h.n} exceeds enumeration cap {ENUMERATION_CAP}")
    table = np.zeros(1 << h.n)
    for e in h.edges:
        table += e.weight * spin_signs(h.n, e.nodes)
    table.setflags(write=False)
    return table


def cost(h: Hypergraph, z: Sequence[int]) -> float:
    """Cost of one spin assignment (entries must be +-1)."""
    z = np.asarray(z)
    if z.shape != (h.n,):
        raise ValueError(f"assignment length {z.shape} does not match n={h.n}")
    if not np.all(np.abs(z) == 1):
        raise ValueError("spin entries must be +1 or -1")
    total = 0.0
    for e in h.edges:
        term = e.weight
        for j in e.nodes:
            term *= z[j]
        total += term
    return float(total)


def extreme_energies(h: Hypergraph, cap: int = ENUMERATION_CAP) -> EnergySpectrumSummary:
    """Exact min/max cost over all 2^n assignments by exhaustive enumeration."""
    if not h.edges:
        raise EmptyHypergraphError("extreme energies are undefined without edges")
    if h.n > cap:
        raise CapacityError(f"n={h.n} exceeds enumeration cap {cap}")
    table = diagonal_table(h)
    argmin = int(np.argmin(table))
    return EnergySpectrumSummary(float(table[argmin]), float(table.max()), argmin)
