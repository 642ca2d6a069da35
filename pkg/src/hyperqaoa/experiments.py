"""Dataset sweep and the three solution schemes, with CSV/plot reporting.

The sweep enumerates a Cartesian product of per-locality inclusion
probabilities (locality >= 3 choices are bases rescaled so expected edge
counts match locality 2), drops the all-empty combos, and generates a
fixed number of connected instances per combo with seeds derived from the
master seed.  Each (instance, depth) cell is then solved three ways:

  VARIATIONAL  full optimization (grid + multistart + bootstrap, best-of)
  GAMMA_ONLY   reference angles with only the phase angles rescaled by
               1/sqrt(average degree); mixer angles used as-is
  GAMMA_BETA   phase rescaling plus mixer rescaling by the ratio of
               first-peak locations

Transfer schemes never re-optimize: they are single evaluations of the
rescaled schedule.  Records store energy, the exact ground-state energy
from exhaustive enumeration, and their ratio.  Rows for transfer schemes
carry seed 0 (nothing random happens); variational rows carry the
optimizer seed.
"""

from __future__ import annotations

import enum
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from scipy.optimize import minimize as sp_minimize

from . import analytic, cost, hypergraph, optimizer, simulator
from .analytic import TransferContext
from .hypergraph import GenerationSpec, Hypergraph
from .optimizer import OptimizerBudget
from .simulator import AngleSchedule

MAX_TRACKED_LOCALITY = 5


class EmptySelectionError(ValueError):
    """A report filter matched no records."""


class Scheme(enum.Enum):
    VARIATIONAL = "v"
    GAMMA_ONLY = "g"
    GAMMA_BETA = "gb"


def parse_schemes(text: str) -> tuple[Scheme, ...]:
    """Parse a comma-separated scheme code list like ``v,g,gb``."""
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        try:
            out.append(Scheme(tok))
        except ValueError:
            raise ValueError(f"unknown scheme code {tok!r}; use v, g, gb") from None
    if not out:
        raise ValueError("no schemes given")
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep shape plus optimizer budgets; defaults are desk scale."""

    n: int = 10
    p1_choices: tuple[float, ...] = (0.0,)
    p2_choices: tuple[float, ...] = (0.0, 0.2)
    pk_base_choices: tuple[float, ...] = (0.0, 0.2)
    max_locality: int = 5
    instances_per_combo: int = 2
    depths: tuple[int, ...] = (1, 2, 3, 4)
    schemes: tuple[Scheme, ...] = (Scheme.VARIATIONAL, Scheme.GAMMA_ONLY, Scheme.GAMMA_BETA)
    transfer_context_path: str | None = None
    master_seed: int = 7
    budget: OptimizerBudget = field(default_factory=OptimizerBudget)
    gamma_degree_normalization: bool = False
    workers: int = 1
    max_retries: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "p1_choices", tuple(float(p) for p in self.p1_choices))
        object.__setattr__(self, "p2_choices", tuple(float(p) for p in self.p2_choices))
        object.__setattr__(
            self, "pk_base_choices", tuple(float(p) for p in self.pk_base_choices)
        )
        object.__setattr__(self, "depths", tuple(int(d) for d in self.depths))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if self.max_locality < 2 or self.max_locality > MAX_TRACKED_LOCALITY:
            raise ValueError(f"max_locality must be in [2, {MAX_TRACKED_LOCALITY}]")
        if not self.depths or min(self.depths) < 1:
            raise ValueError("depths must be positive")
        if self.instances_per_combo < 1:
            raise ValueError("instances_per_combo must be positive")


def parse_config_file(path: str) -> ExperimentConfig:
    """Build a config from ``key = value`` text.

    List values are comma-separated; booleans accept true/false; optimizer
    keys are grid_points, starts_p1, starts_high, max_evals,
    bootstrap_strategies, optimizer_seed.  Unknown keys are rejected.
    """
    fields_: dict[str, str] = {}
    with open(path) as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"bad config line (expected key = value): {line!r}")
            fields_[key.strip()] = value.strip()

    def floats(text: str) -> tuple[float, ...]:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())

    def ints(text: str) -> tuple[int, ...]:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())

    def boolean(text: str) -> bool:
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"expected boolean, got {text!r}")

    kwargs: dict = {}
    budget_kwargs: dict = {}
    for key, value in fields_.items():
        if key == "n":
            kwargs["n"] = int(value)
        elif key in ("p1_choices", "p2_choices", "pk_base_choices"):
            kwargs[key] = floats(value)
        elif key == "max_locality":
            kwargs["max_locality"] = int(value)
        elif key == "instances_per_combo":
            kwargs["instances_per_combo"] = int(value)
        elif key == "depths":
            kwargs["depths"] = ints(value)
        elif key == "schemes":
            kwargs["schemes"] = parse_schemes(value)
        elif key == "transfer_context_path":
            kwargs["transfer_context_path"] = value or None
        elif key == "master_seed":
            kwargs["master_seed"] = int(value)
        elif key == "gamma_degree_normalization":
            kwargs["gamma_degree_normalization"] = boolean(value)
        elif key == "workers":
            kwargs["workers"] = int(value)
        elif key == "max_retries":
            kwargs["max_retries"] = int(value)
        elif key in ("grid_points", "starts_p1", "starts_high", "max_evals"):
            budget_kwargs[key] = int(value)
        elif key == "optimizer_seed":
            budget_kwargs["seed"] = int(value)
        elif key == "bootstrap_strategies":
            budget_kwargs["bootstrap_strategies"] = tuple(
                optimizer.BootstrapStrategy(tok.strip().lower())
                for tok in value.split(",")
                if tok.strip()
            )
        else:
            raise ValueError(f"unknown config key {key!r}")
    if budget_kwargs:
        kwargs["budget"] = OptimizerBudget(**budget_kwargs)
    return ExperimentConfig(**kwargs)


def desk_scale_config() -> ExperimentConfig:
    """Small sweep that finishes in minutes."""
    return ExperimentConfig(
        n=10,
        p1_choices=(0.0,),
        p2_choices=(0.0, 0.2),
        pk_base_choices=(0.0, 0.2),
        max_locality=4,
        instances_per_combo=2,
        depths=(1, 2, 3, 4),
        budget=OptimizerBudget(grid_points=48, starts_p1=10, starts_high=15),
    )


def full_scale_config() -> ExperimentConfig:
    """The full n=14 sweep shape: 765 combos, 3,060 instances.

    Shipped for completeness; not meant for CI (hours of runtime).
    """
    n = 14
    return ExperimentConfig(
        n=n,
        p1_choices=(0.0, hypergraph.rescale_probability(0.1, 1, n), 1.0),
        p2_choices=(0.0, 0.1, 0.2, 0.3),
        pk_base_choices=(0.0, 0.1, 0.2, 0.3),
        max_locality=5,
        instances_per_combo=4,
        depths=(1, 2, 3, 4, 5),
        budget=OptimizerBudget(grid_points=64, starts_p1=100, starts_high=1000),
    )


Combo = tuple[tuple[int, float], ...]


def enumerate_combos(cfg: ExperimentConfig) -> list[Combo]:
    """All (locality, probability) combos, excluding the all-empty ones.

    Locality-1 probabilities come straight from ``p1_choices``; locality 2
    from ``p2_choices``; each higher locality uses ``pk_base_choices``
    rescaled so the expected edge count matches locality 2.  Combos whose
    probabilities vanish at every locality >= 2 are dropped.
    """
    per_k: list[tuple[int, tuple[float, ...]]] = [(1, cfg.p1_choices), (2, cfg.p2_choices)]
    for k in range(3, cfg.max_locality + 1):
        scaled = tuple(
            hypergraph.rescale_probability(base, k, cfg.n) for base in cfg.pk_base_choices
        )
        per_k.append((k, scaled))
    if any(not choices for _, choices in per_k):
        raise ValueError("every locality needs at least one probability choice")
    localities = [k for k, _ in per_k]
    combos: list[Combo] = []
    for picks in itertools.product(*[choices for _, choices in per_k]):
        combo = tuple(zip(localities, picks))
        if all(p == 0.0 for k, p in combo if k >= 2):
            continue
        combos.append(combo)
    return combos


def count_instances(cfg: ExperimentConfig) -> tuple[int, int]:
    """(number of combos, number of instances) without generating anything."""
    combos = enumerate_combos(cfg)
    return len(combos), len(combos) * cfg.instances_per_combo


@dataclass(frozen=True)
class DatasetInstance:
    instance_id: str
    combo_index: int
    replicate: int
    probs: Combo
    seed: int
    graph: Hypergraph


def _instance_seed(master_seed: int, combo_index: int, replicate: int) -> int:
    ss = np.random.SeedSequence([master_seed, combo_index, replicate])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def build_dataset(cfg: ExperimentConfig) -> list[DatasetInstance]:
    """Generate every instance of the sweep, deterministically from the config."""
    instances = []
    for ci, combo in enumerate(enumerate_combos(cfg)):
        probs = {k: p for k, p in combo if p > 0}
        for r in range(cfg.instances_per_combo):
            seed = _instance_seed(cfg.master_seed, ci, r)
            try:
                graph = hypergraph.generate_random(
                    GenerationSpec(cfg.n, probs, seed, cfg.max_retries)
                )
            except hypergraph.GenerationError as err:
                raise hypergraph.GenerationError(
                    f"combo {ci} ({combo}) replicate {r}: {err}", err.attempts
                ) from err
            instances.append(
                DatasetInstance(f"c{ci:04d}i{r}", ci, r, combo, seed, graph)
            )
    return instances


def write_dataset(instances: list[DatasetInstance], out_dir: str) -> str:
    """Write one hypergraph file per instance plus a manifest; returns manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    graph_dir = os.path.join(out_dir, "instances")
    os.makedirs(graph_dir, exist_ok=True)
    header = ["instance_id", "combo_index", "replicate", "seed", "n"]
    localities = sorted({k for inst in instances for k, _ in inst.probs})
    header += [f"p{k}" for k in localities] + ["file"]
    lines = [",".join(header)]
    for inst in instances:
        fname = f"{inst.instance_id}.hg"
        hypergraph.save(inst.graph, os.path.join(graph_dir, fname))
        probs = dict(inst.probs)
        row = [
            inst.instance_id,
            str(inst.combo_index),
            str(inst.replicate),
            str(inst.seed),
            str(inst.graph.n),
        ]
        row += [repr(probs.get(k, 0.0)) for k in localities]
        row.append(f"instances/{fname}")
        lines.append(",".join(row))
    manifest_path = os.path.join(out_dir, "manifest.csv")
    with open(manifest_path, "w") as f:
        f.write("\n".join(lines) + "\n")
    return manifest_path


def load_dataset(dataset_dir: str) -> list[DatasetInstance]:
    """Read back a dataset written by :func:`write_dataset`."""
    manifest_path = os.path.join(dataset_dir, "manifest.csv")
    with open(manifest_path) as f:
        rows = [ln.strip() for ln in f if ln.strip()]
    header = rows[0].split(",")
    col = {name: i for i, name in enumerate(header)}
    prob_cols = [(int(name[1:]), i) for i, name in enumerate(header) if name.startswith("p") and name[1:].isdigit()]
    instances = []
    for row in rows[1:]:
        parts = row.split(",")
        graph = hypergraph.load(os.path.join(dataset_dir, parts[col["file"]]))
        probs = tuple((k, float(parts[i])) for k, i in prob_cols)
        instances.append(
            DatasetInstance(
                instance_id=parts[col["instance_id"]],
                combo_index=int(parts[col["combo_index"]]),
                replicate=int(parts[col["replicate"]]),
                probs=probs,
                seed=int(parts[col["seed"]]),
                graph=graph,
            )
        )
    return instances


REFERENCE_SEED = 11
REFERENCE_N = 8
REFERENCE_DEGREE = 3


def derive_reference_context(
    p_max: int = 5,
    n: int = REFERENCE_N,
    degree: int = REFERENCE_DEGREE,
    seed: int = REFERENCE_SEED,
    max_evals: int = 4000,
) -> TransferContext:
    """Fallback reference angles: fixed-angle pair from a regular graph.

    Used when no transfer-context file is supplied.  A single constant
    (gamma, beta) pair is optimized for the depth-``p_max`` schedule that
    repeats it on every layer, then stored repeated so a depth-p prefix is
    itself a sensible depth-p fixed-angle reference.  The pair is kept in
    the canonical first-peak basin (scan gamma upward at beta equal to the
    graph's first-peak location, take the first local minimum, polish
    within gamma in (0, pi/2) x beta in (0, pi/4)): only that basin's
    angles rescale meaningfully onto other instances, and a free global
    search would land on an arbitrary symmetry image instead.  The context
    is tagged as derived so downstream records carry the provenance.
    """
    ref = hypergraph.regular_graph(n, degree, seed)
    evaluator = optimizer._Evaluator(ref)
    ref_beta_star = analytic.beta_star(ref)

    def constant_energy(pair: np.ndarray) -> float:
        return evaluator(
            np.concatenate([np.full(p_max, pair[0]), np.full(p_max, pair[1])])
        )

    scan = np.linspace(0.0, np.pi / 2, 200)
    energies = [constant_energy(np.array([g, ref_beta_star])) for g in scan]
    first_min = next(
        scan[i]
        for i in range(1, len(scan) - 1)
        if energies[i] <= energies[i - 1] and energies[i] <= energies[i + 1]
    )
    res = sp_minimize(
        constant_energy,
        np.array([first_min, ref_beta_star]),
        method="L-BFGS-B",
        bounds=[(1e-4, np.pi / 2), (1e-4, np.pi / 4)],
        options={"ftol": 1e-12, "maxfun": max_evals},
    )
    gamma_bar, beta_bar = float(res.x[0]), float(res.x[1])
    return TransferContext(
        reference_gammas=(gamma_bar,) * p_max,
        reference_betas=(beta_bar,) * p_max,
        reference_beta_star=ref_beta_star,
        reference_degree=hypergraph.average_degree(ref),
        source_label=f"derived:{degree}regular-n{n}-seed{seed}",
    )


def load_or_derive_context(cfg: ExperimentConfig) -> TransferContext:
    """Read the configured context file, or derive the fallback reference."""
    if cfg.transfer_context_path:
        return analytic.read_context(cfg.transfer_context_path)
    return derive_reference_context(p_max=max(5, max(cfg.depths)))


@dataclass(frozen=True)
class ExperimentRecord:
    """One (instance, scheme, depth) result row."""

    instance_id: str
    probs: Combo
    n: int
    m_counts: tuple[int, ...]  # m_1..m_5
    degree: float
    beta_star: float
    scheme: Scheme
    p: int
    energy: float
    e_min: float
    ratio: float
    gammas: tuple[float, ...]
    betas: tuple[float, ...]
    method: str
    seed: int


def _transfer_schedule(
    h: Hypergraph, scheme: Scheme, p: int, ctx: TransferContext, cfg: ExperimentConfig
) -> AngleSchedule:
    if ctx.p < p:
        raise ValueError(f"depth {p} exceeds transfer context depth {ctx.p}")
    gammas = analytic.transfer_gammas(ctx, h, cfg.gamma_degree_normalization)[:p]
    if scheme is Scheme.GAMMA_ONLY:
        betas = ctx.reference_betas[:p]
    else:
        betas = analytic.transfer_betas(ctx, h)[:p]
    return AngleSchedule(gammas, betas)


def _make_record(
    inst: DatasetInstance,
    scheme: Scheme,
    p: int,
    schedule: AngleSchedule,
    energy: float,
    e_min: float,
    method: str,
    seed: int,
) -> ExperimentRecord:
    h = inst.graph
    m_counts = tuple(h.locality_count(k) for k in range(1, MAX_TRACKED_LOCALITY + 1))
    return ExperimentRecord(
        instance_id=inst.instance_id,
        probs=inst.probs,
        n=h.n,
        m_counts=m_counts,
        degree=hypergraph.average_degree(h),
        beta_star=analytic.beta_star(h),
        scheme=scheme,
        p=p,
        energy=energy,
        e_min=e_min,
        ratio=energy / e_min,
        gammas=schedule.gammas,
        betas=schedule.betas,
        method=method,
        seed=seed,
    )


def run_scheme(
    h: Hypergraph,
    scheme: Scheme,
    p: int,
    ctx: TransferContext,
    cfg: ExperimentConfig,
    instance: DatasetInstance | None = None,
) -> ExperimentRecord:
    """Solve one (instance, scheme, depth) cell and record the outcome."""
    if instance is None:
        instance = DatasetInstance("adhoc", -1, 0, (), 0, h)
    e_min = cost.extreme_energies(h).e_min
    if scheme is Scheme.VARIATIONAL:
        result = optimizer.best_schedule(h, p, cfg.budget)
        return _make_record(
            instance, scheme, p, result.schedule, result.energy,
            e_min, result.method.value, result.seed,
        )
    schedule = _transfer_schedule(h, scheme, p, ctx, cfg)
    energy = simulator.expectation_energy(simulator.evolve(h, schedule), h)
    method = f"transfer:{ctx.source_label or 'reference'}"
    return _make_record(instance, scheme, p, schedule, energy, e_min, method, 0)


def _instance_records(
    inst: DatasetInstance, cfg: ExperimentConfig, ctx: TransferContext
) -> list[ExperimentRecord]:
    """All records for one instance; shares the variational bootstrap chain."""
    h = inst.graph
    e_min = cost.extreme_energies(h).e_min
    records = []
    chain = None
    if Scheme.VARIATIONAL in cfg.schemes:
        chain = {
            d + 1: r
            for d, r in enumerate(optimizer.best_schedule_chain(h, max(cfg.depths), cfg.budget))
        }
    for scheme in cfg.schemes:
        for p in cfg.depths:
            if scheme is Scheme.VARIATIONAL:
                result = chain[p]
                records.append(
                    _make_record(
                        inst, scheme, p, result.schedule, result.energy,
                        e_min, result.method.value, result.seed,
                    )
                )
            else:
                schedule = _transfer_schedule(h, scheme, p, ctx, cfg)
                energy = simulator.expectation_energy(simulator.evolve(h, schedule), h)
                method = f"transfer:{ctx.source_label or 'reference'}"
                records.append(
                    _make_record(inst, scheme, p, schedule, energy, e_min, method, 0)
                )
    return records


def _worker(payload):
    inst, cfg, ctx = payload
    return _instance_records(inst, cfg, ctx)


def run_pipeline(
    instances: list[DatasetInstance], cfg: ExperimentConfig, ctx: TransferContext
) -> list[ExperimentRecord]:
    """Run every (instance, scheme, depth) cell; deterministic record order."""
    if cfg.workers > 1:
        payloads = [(inst, cfg, ctx) for inst in instances]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            batches = list(pool.map(_worker, payloads))
    else:
        batches = [_instance_records(inst, cfg, ctx) for inst in instances]
    return [rec for batch in batches for rec in batch]


CSV_COLUMNS = (
    "instance_id,n,m1,m2,m3,m4,m5,D,beta_star,scheme,p,energy,e_min,ratio,"
    "method,seed,gammas,betas"
)


def records_to_csv(
    records: list[ExperimentRecord], path: str, include_timestamp: bool = True
) -> None:
    """Write records with a fixed column order; timestamp line is optional."""
    lines = []
    if include_timestamp:
        lines.append(f"# generated {datetime.now(timezone.utc).isoformat()}")
    lines.append(CSV_COLUMNS)
    for r in records:
        lines.append(
            ",".join(
                [
                    r.instance_id,
                    str(r.n),
                    *[str(m) for m in r.m_counts],
                    repr(r.degree),
                    repr(r.beta_star),
                    r.scheme.value,
                    str(r.p),
                    repr(r.energy),
                    repr(r.e_min),
                    repr(r.ratio),
                    r.method,
                    str(r.seed),
                    ";".join(repr(g) for g in r.gammas),
                    ";".join(repr(b) for b in r.betas),
                ]
            )
        )
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_records_csv(path: str) -> list[ExperimentRecord]:
    """Read back a results CSV (combo probabilities are not stored there)."""
    with open(path) as f:
        rows = [ln.rstrip("\n") for ln in f if ln.strip() and not ln.startswith("#")]
    if not rows or rows[0] != CSV_COLUMNS:
        raise ValueError(f"unexpected results header in {path}")
    records = []
    for row in rows[1:]:
        parts = row.split(",")
        records.append(
            ExperimentRecord(
                instance_id=parts[0],
                probs=(),
                n=int(parts[1]),
                m_counts=tuple(int(x) for x in parts[2:7]),
                degree=float(parts[7]),
                beta_star=float(parts[8]),
                scheme=Scheme(parts[9]),
                p=int(parts[10]),
                energy=float(parts[11]),
                e_min=float(parts[12]),
                ratio=float(parts[13]),
                method=parts[14],
                seed=int(parts[15]),
                gammas=tuple(float(x) for x in parts[16].split(";")) if parts[16] else (),
                betas=tuple(float(x) for x in parts[17].split(";")) if parts[17] else (),
            )
        )
    return records


@dataclass(frozen=True)
class AggregateRow:
    scheme: Scheme
    p: int
    mean_ratio: float
    count: int


def aggregate_report(
    records: list[ExperimentRecord], which: str = "all"
) -> list[AggregateRow]:
    """Mean approximation ratio per (scheme, depth).

    ``which`` selects the instance filter: ``all`` keeps everything,
    ``k2only`` keeps instances whose edges all have locality <= 2.
    """
    if which == "all":
        kept = records
    elif which == "k2only":
        kept = [r for r in records if all(m == 0 for m in r.m_counts[2:])]
    else:
        raise ValueError(f"unknown filter {which!r}; use 'all' or 'k2only'")
    if not kept:
        raise EmptySelectionError(f"filter {which!r} matched no records")
    groups: dict[tuple[str, int], list[float]] = {}
    for r in kept:
        groups.setdefault((r.scheme.value, r.p), []).append(r.ratio)
    scheme_order = {s.value: i for i, s in enumerate(Scheme)}
    rows = [
        AggregateRow(Scheme(code), p, float(np.mean(vals)), len(vals))
        for (code, p), vals in groups.items()
    ]
    rows.sort(key=lambda row: (scheme_order[row.scheme.value], row.p))
    return rows


def write_report_csv(rows: list[AggregateRow], path: str) -> None:
    lines = ["scheme,p,mean_ratio,count"]
    for row in rows:
        lines.append(f"{row.scheme.value},{row.p},{row.mean_ratio!r},{row.count}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def plot_report(rows: list[AggregateRow], path: str) -> None:
    """Line chart of mean ratio vs depth, one line per scheme."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = {
        Scheme.VARIATIONAL: "variational",
        Scheme.GAMMA_ONLY: "gamma reweighting",
        Scheme.GAMMA_BETA: "gamma + beta reweighting",
    }
    fig, ax = plt.subplots(figsize=(5, 3.4))
    for scheme in Scheme:
        pts = sorted((r.p, r.mean_ratio) for r in rows if r.scheme is scheme)
        if pts:
            ax.plot([p for p, _ in pts], [v for _, v in pts], marker="o", label=labels[scheme])
    ax.set_xlabel("circuit depth p")
    ax.set_ylabel("mean approximation ratio")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
