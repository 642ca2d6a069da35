"""Closed-form depth-1 correlators and the angle-transfer rules.

SIGN CONVENTION (resolved once, here).  All closed forms below are pinned
to the simulator's frozen mixer convention (``exp(+i*beta*X)`` per qubit,
see :mod:`hyperqaoa.simulator`): the general sum uses the per-qubit mixer
factor ``exp(-2i*beta)*z_j + exp(+2i*beta)*z'_j`` and the acyclic
odd-subset sum uses the parity factor ``(-1)^((k_q - 1)/2)``.  These are
the unique choices that reproduce the single-qubit oracle
``-sin(2*beta)*sin(2*gamma*w)`` and the isolated-pair oracle
``-sin(4*beta)*sin(2*gamma)``, and they make the acyclic sum consistent
with its own small-gamma limit ``-2*gamma*w*sin(2*k*beta)``.

The transfer rules: a target instance rescales reference mixer angles by
``beta_star(target)/beta_star(reference)`` and reference phase angles by
``1/sqrt(D)`` with D the target's average degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .cost import EmptyHypergraphError
from .hypergraph import Hypergraph, average_degree, has_short_berge_cycle, neighborhood

GENERAL_SCOPE_CAP = 30


class ScopeTooLargeError(ValueError):
    """The brute-force correlator sum would exceed the size cap."""


class ShortBergeCycleError(ValueError):
    """The closed form requires Berge girth of at least four."""


@dataclass(frozen=True)
class TransferContext:
    """Reference angles plus the reference-side scale factors.

    ``reference_beta_star`` is the mixer-angle peak location of the
    reference instance; ``reference_degree`` (optional) is its average
    degree, used only by the opt-in degree-normalized gamma transfer.
    """

    reference_gammas: tuple[float, ...]
    reference_betas: tuple[float, ...]
    reference_beta_star: float
    reference_degree: float | None = None
    source_label: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "reference_gammas", tuple(float(g) for g in self.reference_gammas)
        )
        object.__setattr__(
            self, "reference_betas", tuple(float(b) for b in self.reference_betas)
        )
        if len(self.reference_gammas) != len(self.reference_betas):
            raise ValueError("reference angle vectors must have equal length")
        if not self.reference_gammas:
            raise ValueError("reference angles must be nonempty")
        if not self.reference_beta_star > 0:
            raise ValueError("reference_beta_star must be positive")

    @property
    def p(self) -> int:
        return len(self.reference_gammas)


def j_general(h: Hypergraph, alpha: int, beta: float, gamma: float) -> float:
    """Depth-1 Z-string expectation of edge ``alpha`` by the general sum.

    Evaluates the brute-force triple sum: outer spins on the neighborhood
    of the edge, inner spins and flipped partners on the edge itself,
    relative phase from the cost terms touching the edge, per-qubit mixer
    factors, prefactor 2^-(d+2k).  Exponential in d + 2k by design; it
    exists to check the starting point of the acyclic reduction, not to
    be fast.
    """
    nbr, _ = neighborhood(h, alpha)
    edge = h.edges[alpha]
    q = edge.nodes
    k = len(q)
    d = len(nbr)
    if d + 2 * k > GENERAL_SCOPE_CAP:
        raise ScopeTooLargeError(
            f"edge {alpha}: neighborhood size {d} + 2*{k} exceeds cap {GENERAL_SCOPE_CAP}"
        )
    local = list(q) + sorted(nbr)
    pos = {v: i for i, v in enumerate(local)}
    touching = [e for e in h.edges if set(e.nodes) & set(q)]

    # cost restricted to terms touching the edge, over local variables
    dim = 1 << (k + d)
    idx = np.arange(dim)
    table = np.zeros(dim)
    for e in touching:
        signs = np.ones(dim)
        for v in e.nodes:
            signs *= 1.0 - 2.0 * ((idx >> pos[v]) & 1)
        table += e.weight * signs
    z_string = np.ones(dim)
    for v in q:
        z_string *= 1.0 - 2.0 * ((idx >> pos[v]) & 1)

    e_plus = np.exp(2j * beta)
    e_minus = np.exp(-2j * beta)
    total = 0.0 + 0.0j
    for flips in range(1 << k):
        mixer = 1.0 + 0.0j
        flip_idx = 0
        for bit in range(k):
            if (flips >> bit) & 1:
                mixer *= e_minus - e_plus  # z'_j = -z_j
                flip_idx |= 1 << bit
            else:
                mixer *= e_minus + e_plus  # z'_j = +z_j
        phase = np.exp(1j * gamma * (table[idx ^ flip_idx] - table))
        total += mixer * np.sum(z_string * phase)
    total /= 2 ** (d + 2 * k)
    if abs(total.imag) >= 1e-9:
        raise ArithmeticError(f"correlator sum has imaginary part {total.imag:.3e}")
    return float(total.real)


def j_acyclic(
    h: Hypergraph, alpha: int, beta: float, gamma: float, check_cycles: bool = True
) -> float:
    """Depth-1 Z-string expectation of edge ``alpha``, closed form.

    Valid when the hypergraph has no Berge cycle of length two or three;
    pass ``check_cycles=False`` to evaluate the formula anyway (useful for
    studying where it breaks down on cyclic instances).

    The odd-subset sum folds every neighboring edge in through an even
    cosine factor, which is exact only for edges with bits outside alpha.
    A locality-1 edge on a vertex of alpha has no such bits and keeps an
    odd sine part; it survives the spin sum only when every vertex of
    alpha carries a self-edge, giving the completion term added at the
    end.  Both pieces together match the simulator on any short-cycle-free
    instance.
    """
    if check_cycles and has_short_berge_cycle(h):
        raise ShortBergeCycleError(
            "closed form needs Berge girth >= 4; rerun with check_cycles=False to force"
        )
    _, by_vertex = neighborhood(h, alpha)
    edge = h.edges[alpha]
    k = edge.locality
    # per vertex: cos(2*gamma*w_r) product over the other edges containing it,
    # plus the odd sine part of its self-edge (zero when there is none)
    factor: dict[int, float] = {}
    odd_part: dict[int, float] = {}
    for j, rs in by_vertex.items():
        shared = 1.0
        self_cos, self_sin = 1.0, 0.0
        for r in rs:
            other = h.edges[r]
            if other.locality == 1:
                self_cos = float(np.cos(2.0 * gamma * other.weight))
                self_sin = float(np.sin(2.0 * gamma * other.weight))
            else:
                shared *= float(np.cos(2.0 * gamma * other.weight))
        factor[j] = shared * self_cos
        odd_part[j] = shared * self_sin
    cos2b = np.cos(2.0 * beta)
    sin2b = np.sin(2.0 * beta)
    total = 0.0
    for size in range(1, k + 1, 2):
        parity = (-1.0) ** ((size - 1) // 2)
        trig = cos2b ** (k - size) * sin2b**size
        for subset in combinations(edge.nodes, size):
            term = parity * trig
            for j in subset:
                term *= factor[j]
            total += term
    value = -np.sin(2.0 * gamma * edge.weight) * total
    completion = (-1.0) ** k * sin2b**k
    if k % 2 == 1:
        completion *= np.cos(2.0 * gamma * edge.weight)
    for j in edge.nodes:
        completion *= odd_part[j]
    return float(value + completion)


def j_small_gamma(k: int, w: float, beta: float, gamma: float) -> float:
    """Leading small-gamma behavior of the depth-1 correlator of one edge."""
    return float(-2.0 * gamma * w * np.sin(2.0 * k * beta))


def energy_small_gamma(h: Hypergraph, beta: float, gamma: float) -> float:
    """Small-gamma energy: -2*gamma * sum_edges w^2 * sin(2*k*beta)."""
    return float(
        -2.0 * gamma * sum(e.weight**2 * np.sin(2.0 * e.locality * beta) for e in h.edges)
    )


def beta_star(h: Hypergraph) -> float:
    """Location of the combined first mixer-angle peak.

    (pi/4) * sum(w^2 k) / sum(w^2 k^2); equals pi/(4k) when every edge has
    locality k.  Weights enter squared, so sign flips do not move it.
    """
    if not h.edges:
        raise EmptyHypergraphError("beta_star is undefined without edges")
    num = sum(e.weight**2 * e.locality for e in h.edges)
    den = sum(e.weight**2 * e.locality**2 for e in h.edges)
    return float(np.pi / 4.0 * num / den)


def transfer_betas(ctx: TransferContext, target: Hypergraph) -> tuple[float, ...]:
    """Rescale every reference mixer angle by beta_star(target)/beta_star(ref)."""
    scale = beta_star(target) / ctx.reference_beta_star
    return tuple(scale * b for b in ctx.reference_betas)


def transfer_gammas(
    ctx: TransferContext,
    target: Hypergraph,
    normalize_by_reference_degree: bool = False,
) -> tuple[float, ...]:
    """Rescale every reference phase angle by 1/sqrt(D) of the target.

    With ``normalize_by_reference_degree`` the scale becomes
    sqrt(D_ref/D_target), for reference angles that are not already
    degree-normalized; this requires ``ctx.reference_degree``.
    """
    d = average_degree(target)
    if d <= 0:
        raise ValueError(f"target average degree {d} must be positive")
    if normalize_by_reference_degree:
        if ctx.reference_degree is None:
            raise ValueError("degree-normalized transfer needs ctx.reference_degree")
        scale = np.sqrt(ctx.reference_degree / d)
    else:
        scale = 1.0 / np.sqrt(d)
    return tuple(float(scale * g) for g in ctx.reference_gammas)


def write_context(ctx: TransferContext, path) -> None:
    """Write a transfer context as key = value text."""
    lines = [
        f"p = {ctx.p}",
        "gammas = " + ",".join(repr(g) for g in ctx.reference_gammas),
        "betas = " + ",".join(repr(b) for b in ctx.reference_betas),
        f"beta_star_ref = {ctx.reference_beta_star!r}",
    ]
    if ctx.reference_degree is not None:
        lines.append(f"degree_ref = {ctx.reference_degree!r}")
    if ctx.source_label:
        lines.append(f"source = {ctx.source_label}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_context(path) -> TransferContext:
    """Read a transfer context written by :func:`write_context`."""
    fields: dict[str, str] = {}
    with open(path) as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
    missing = {"gammas", "betas", "beta_star_ref"} - fields.keys()
    if missing:
        raise ValueError(f"transfer context missing keys: {sorted(missing)}")
    gammas = tuple(float(tok) for tok in fields["gammas"].split(","))
    betas = tuple(float(tok) for tok in fields["betas"].split(","))
    if "p" in fields and int(fields["p"]) != len(gammas):
        raise ValueError("declared p does not match angle vector length")
    degree = float(fields["degree_ref"]) if "degree_ref" in fields else None
    return TransferContext(
        reference_gammas=gammas,
        reference_betas=betas,
        reference_beta_star=float(fields["beta_star_ref"]),
        reference_degree=degree,
        source_label=fields.get("source", ""),
    )
