"""QAOA on hypergraph Max-k-XORSAT instances.

Exact statevector simulation, closed-form depth-1 correlators, and
locality-aware variational-angle transfer, plus the sweep pipeline that
compares full optimization against transferred angles.
"""

from .analytic import (
    TransferContext,
    beta_star,
    energy_small_gamma,
    j_acyclic,
    j_general,
    j_small_gamma,
    read_context,
    transfer_betas,
    transfer_gammas,
    write_context,
)
from .cost import EnergySpectrumSummary, diagonal_table, extreme_energies
from .hypergraph import (
    GenerationSpec,
    Hyperedge,
    Hypergraph,
    average_degree,
    generate_random,
    has_short_berge_cycle,
    is_connected,
    neighborhood,
    rescale_probability,
)
from .optimizer import (
    BootstrapStrategy,
    Method,
    OptimizationResult,
    OptimizerBudget,
    best_schedule,
    best_schedule_chain,
    bootstrap_extend,
    grid_search_p1,
    multistart_local,
)
from .simulator import (
    AngleSchedule,
    apply_mixer,
    apply_phase,
    correlator,
    evolve,
    expectation_energy,
    initial_state,
)

__version__ = "0.1.0"
