"""Exact statevector evolution for QAOA with a transverse-field mixer.

One layer applies the diagonal phase ``amp[z] *= exp(-i*gamma*C(z))`` and
then the mixer.  Sign convention (frozen contract): the mixer Hamiltonian
is minus the sum of single-qubit X operators, whose ground state is the
uniform superposition, so one mixer layer applies ``exp(+i*beta*X)`` on
every qubit:

    (a, b) -> (a*cos(beta) + i*b*sin(beta), b*cos(beta) + i*a*sin(beta))

For a single qubit carrying an isolated weight-w vertex term this gives
``<Z> = -sin(2*beta)*sin(2*gamma*w)``, the oracle that pins the sign for
every closed form in :mod:`hyperqaoa.analytic`.  The simulator is ground
truth: analytic expressions are validated against it, never the reverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cost import CapacityError, diagonal_table, spin_signs
from .hypergraph import Hypergraph

STATEVECTOR_CAP = 26

StateVector = np.ndarray


@dataclass(frozen=True)
class AngleSchedule:
    """Depth-p variational angles, gammas for the phase and betas for the mixer."""

    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if len(self.gammas) != len(self.betas):
            raise ValueError("gammas and betas must have equal length")
        if not self.gammas:
            raise ValueError("schedule needs at least one layer")

    @property
    def p(self) -> int:
        return len(self.gammas)


def _qubit_count(state: StateVector) -> int:
    n = int(len(state)).bit_length() - 1
    if len(state) != 1 << n:
        raise ValueError(f"state length {len(state)} is not a power of two")
    return n


def initial_state(n: int) -> StateVector:
    """Uniform superposition: amplitude 2^(-n/2) on every basis state."""
    if n < 1:
        raise ValueError("qubit count must be positive")
    if n > STATEVECTOR_CAP:
        raise CapacityError(f"n={n} exceeds statevector cap {STATEVECTOR_CAP}")
    dim = 1 << n
    return np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128)


def _phase_inplace(state: StateVector, gamma: float, table: np.ndarray) -> None:
    state *= np.exp(-1j * gamma * table)


def _mixer_inplace(state: StateVector, beta: float, n: int) -> None:
    # stride-paired update per qubit; the only gate set this simulator needs
    c = np.cos(beta)
    s = 1j * np.sin(beta)
    for j in range(n):
        view = state.reshape(-1, 2, 1 << j)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = c * a + s * b
        view[:, 1, :] = c * b + s * a


def apply_phase(state: StateVector, gamma: float, h: Hypergraph) -> StateVector:
    """Multiply each amplitude by ``exp(-i*gamma*C(z))``."""
    if len(state) != 1 << h.n:
        raise ValueError(f"state length {len(state)} does not match n={h.n}")
    out = state.astype(np.complex128, copy=True)
    _phase_inplace(out, gamma, diagonal_table(h))
    return out


def apply_mixer(state: StateVector, beta: float) -> StateVector:
    """Apply ``exp(+i*beta*X)`` to every qubit (see module sign convention)."""
    n = _qubit_count(state)
    out = state.astype(np.complex128, copy=True)
    _mixer_inplace(out, beta, n)
    return out


def evolve(h: Hypergraph, schedule: AngleSchedule) -> StateVector:
    """Run the full layered evolution from the uniform superposition."""
    table = diagonal_table(h)
    state = initial_state(h.n)
    for gamma, beta in zip(schedule.gammas, schedule.betas):
        _phase_inplace(state, gamma, table)
        _mixer_inplace(state, beta, h.n)
    return state


def expectation_energy(state: StateVector, h: Hypergraph) -> float:
    """<C> = sum_z |amp[z]|^2 * C(z); real by construction."""
    if len(state) != 1 << h.n:
        raise ValueError(f"state length {len(state)} does not match n={h.n}")
    probs = state.real**2 + state.imag**2
    return float(probs @ diagonal_table(h))


def correlator(state: StateVector, q: Sequence[int]) -> float:
    """Expectation of the Z-string over the vertex set ``q``."""
    q = tuple(q)
    if not q:
        raise ValueError("correlator needs a nonempty vertex set")
    n = _qubit_count(state)
    probs = state.real**2 + state.imag**2
    return float(probs @ spin_signs(n, q))
