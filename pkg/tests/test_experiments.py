"""Unit tests for the sweep pipeline, schemes, reporting, and CLI."""

import math
import os

import numpy as np
import pytest

from hyperqaoa import analytic, cli, simulator as sim
from hyperqaoa import experiments as ex
from hyperqaoa import hypergraph as hg
from hyperqaoa.analytic import TransferContext
from hyperqaoa.experiments import ExperimentConfig, Scheme
from hyperqaoa.hypergraph import Hyperedge, Hypergraph
from hyperqaoa.optimizer import OptimizerBudget
from hyperqaoa.simulator import AngleSchedule


def edge(*nodes, w=1.0):
    return Hyperedge(tuple(nodes), w)


TINY_BUDGET = OptimizerBudget(grid_points=12, starts_p1=2, starts_high=2, max_evals=400, seed=1)


def tiny_config(**overrides):
    base = dict(
        n=6,
        p1_choices=(0.0,),
        p2_choices=(0.0, 0.4),
        pk_base_choices=(0.0, 0.3),
        max_locality=3,
        instances_per_combo=1,
        depths=(1, 2),
        schemes=(Scheme.VARIATIONAL, Scheme.GAMMA_ONLY, Scheme.GAMMA_BETA),
        master_seed=5,
        budget=TINY_BUDGET,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def tiny_context():
    return TransferContext(
        (0.5591, 0.5591, 0.5591),
        (0.4089, 0.4089, 0.4089),
        np.pi / 8,
        3.0,
        "fixture",
    )


# combo enumeration and counting


def test_combo_count_paper_scale():
    # 3 * 4^4 - 3 = 765 combos and 765 * 4 = 3060 instances, counting only
    cfg = ex.full_scale_config()
    n_combos, n_instances = ex.count_instances(cfg)
    assert n_combos == 765
    assert n_instances == 3060


def test_combo_count_small():
    cfg = tiny_config()
    n_combos, n_instances = ex.count_instances(cfg)
    assert n_combos == 3  # 2*2 minus the all-zero combo
    assert n_instances == 3


def test_combos_exclude_trivial_only():
    cfg = tiny_config(p1_choices=(0.0, 0.5))
    combos = ex.enumerate_combos(cfg)
    assert len(combos) == 6  # 2*2*2 minus two all-zero-beyond-k1 combos
    for combo in combos:
        assert any(p > 0 for k, p in combo if k >= 2)


def test_combo_probabilities_rescaled():
    cfg = tiny_config()
    combos = ex.enumerate_combos(cfg)
    scaled = {p for combo in combos for k, p in combo if k == 3 and p > 0}
    assert scaled == {hg.rescale_probability(0.3, 3, cfg.n)}


def test_paper_scale_p1_choices():
    cfg = ex.full_scale_config()
    assert cfg.p1_choices == (0.0, 0.65, 1.0)


# dataset build and round trip


def test_build_dataset_deterministic():
    cfg = tiny_config()
    a = ex.build_dataset(cfg)
    b = ex.build_dataset(cfg)
    assert a == b


def test_dataset_instances_connected_and_sized():
    cfg = tiny_config()
    instances = ex.build_dataset(cfg)
    assert len(instances) == 3
    for inst in instances:
        assert inst.graph.n == cfg.n
        assert hg.is_connected(inst.graph)


def test_write_load_dataset_round_trip(tmp_path):
    cfg = tiny_config()
    instances = ex.build_dataset(cfg)
    ex.write_dataset(instances, tmp_path / "data")
    again = ex.load_dataset(tmp_path / "data")
    assert again == instances


def test_manifest_bytes_deterministic(tmp_path):
    cfg = tiny_config()
    instances = ex.build_dataset(cfg)
    ex.write_dataset(instances, tmp_path / "a")
    ex.write_dataset(instances, tmp_path / "b")
    a = (tmp_path / "a" / "manifest.csv").read_bytes()
    b = (tmp_path / "b" / "manifest.csv").read_bytes()
    assert a == b


# reference context


def test_derive_reference_context_shape():
    ctx = ex.derive_reference_context(p_max=3)
    assert ctx.p == 3
    assert len(set(ctx.reference_gammas)) == 1  # constant pair repeated
    assert ctx.reference_beta_star == pytest.approx(np.pi / 8, abs=1e-15)
    assert ctx.reference_degree == 3.0
    assert ctx.source_label.startswith("derived:")
    assert 0 < ctx.reference_gammas[0] < np.pi / 2
    assert 0 < ctx.reference_betas[0] < np.pi / 4


def test_load_or_derive_prefers_file(tmp_path, tiny_context):
    path = tmp_path / "ref.ctx"
    analytic.write_context(tiny_context, path)
    cfg = tiny_config(transfer_context_path=str(path))
    assert ex.load_or_derive_context(cfg) == tiny_context


# run_scheme


def test_run_scheme_identity_transfer(tiny_context):
    # a target matching the reference degree and beta_star evaluates the
    # reference angles unchanged under degree normalization
    target = hg.regular_graph(8, 3, seed=2)
    cfg = tiny_config(gamma_degree_normalization=True)
    record = ex.run_scheme(target, Scheme.GAMMA_BETA, 2, tiny_context, cfg)
    assert record.gammas == pytest.approx(tiny_context.reference_gammas[:2], abs=1e-12)
    assert record.betas == pytest.approx(tiny_context.reference_betas[:2], abs=1e-12)


def test_run_scheme_gamma_only_keeps_reference_betas(tiny_context):
    target = hg.generate_random(hg.GenerationSpec(6, {2: 0.4, 3: 0.1}, seed=8))
    cfg = tiny_config()
    record = ex.run_scheme(target, Scheme.GAMMA_ONLY, 2, tiny_context, cfg)
    assert record.betas == tiny_context.reference_betas[:2]
    scale = 1 / math.sqrt(hg.average_degree(target))
    expected = tuple(scale * g for g in tiny_context.reference_gammas[:2])
    assert record.gammas == pytest.approx(expected, abs=1e-12)


def test_run_scheme_beta_rescale_uniform_k3(tiny_context):
    target = Hypergraph(6, (edge(0, 1, 2), edge(2, 3, 4), edge(3, 4, 5)))
    cfg = tiny_config()
    record = ex.run_scheme(target, Scheme.GAMMA_BETA, 1, tiny_context, cfg)
    # beta_star(target) = pi/12 versus reference pi/8: factor 2/3
    assert record.betas[0] == pytest.approx(tiny_context.reference_betas[0] * 2 / 3, abs=1e-12)


def test_run_scheme_energy_within_bounds(tiny_context):
    from hyperqaoa.cost import extreme_energies

    target = hg.generate_random(hg.GenerationSpec(6, {2: 0.4}, seed=3))
    summary = extreme_energies(target)
    cfg = tiny_config()
    for scheme in (Scheme.VARIATIONAL, Scheme.GAMMA_ONLY, Scheme.GAMMA_BETA):
        record = ex.run_scheme(target, scheme, 1, tiny_context, cfg)
        assert summary.e_min - 1e-12 <= record.energy <= summary.e_max + 1e-12
        assert record.ratio == record.energy / record.e_min


def test_run_scheme_depth_exceeds_context(tiny_context):
    target = hg.generate_random(hg.GenerationSpec(6, {2: 0.4}, seed=3))
    cfg = tiny_config()
    with pytest.raises(ValueError):
        ex.run_scheme(target, Scheme.GAMMA_BETA, 4, tiny_context, cfg)


def test_transfer_record_reproducible_energy(tiny_context):
    target = hg.generate_random(hg.GenerationSpec(6, {2: 0.4, 3: 0.1}, seed=4))
    cfg = tiny_config()
    record = ex.run_scheme(target, Scheme.GAMMA_BETA, 2, tiny_context, cfg)
    state = sim.evolve(target, AngleSchedule(record.gammas, record.betas))
    assert sim.expectation_energy(state, target) == pytest.approx(record.energy, abs=1e-9)


# pipeline and records


@pytest.fixture(scope="module")
def tiny_records(tiny_context):
    cfg = tiny_config()
    instances = ex.build_dataset(cfg)
    return ex.run_pipeline(instances, cfg, tiny_context), cfg, instances


def test_pipeline_record_grid(tiny_records):
    records, cfg, instances = tiny_records
    assert len(records) == len(instances) * len(cfg.schemes) * len(cfg.depths)
    assert {r.scheme for r in records} == set(cfg.schemes)


def test_pipeline_ratios_bounded(tiny_records):
    records, _, _ = tiny_records
    for r in records:
        assert r.ratio <= 1 + 1e-12


def test_pipeline_variational_matches_standalone(tiny_records):
    records, cfg, instances = tiny_records
    inst = instances[0]
    standalone = ex.run_scheme(
        inst.graph, Scheme.VARIATIONAL, 2, None, cfg, instance=inst
    )
    from_pipeline = next(
        r
        for r in records
        if r.instance_id == inst.instance_id and r.scheme is Scheme.VARIATIONAL and r.p == 2
    )
    assert standalone.energy == from_pipeline.energy
    assert standalone.gammas == from_pipeline.gammas


def test_records_reproducible_energies(tiny_records):
    records, _, instances = tiny_records
    graphs = {inst.instance_id: inst.graph for inst in instances}
    for r in records:
        h = graphs[r.instance_id]
        state = sim.evolve(h, AngleSchedule(r.gammas, r.betas))
        assert sim.expectation_energy(state, h) == pytest.approx(r.energy, abs=1e-9)


def test_records_csv_round_trip(tmp_path, tiny_records):
    records, _, _ = tiny_records
    path = tmp_path / "results.csv"
    ex.records_to_csv(records, path, include_timestamp=False)
    again = ex.read_records_csv(path)
    assert len(again) == len(records)
    for a, b in zip(again, records):
        assert (a.instance_id, a.scheme, a.p) == (b.instance_id, b.scheme, b.p)
        assert a.energy == b.energy
        assert a.ratio == b.ratio
        assert a.gammas == b.gammas


def test_records_csv_deterministic_without_timestamp(tmp_path, tiny_records):
    records, _, _ = tiny_records
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    ex.records_to_csv(records, a, include_timestamp=False)
    ex.records_to_csv(records, b, include_timestamp=False)
    assert a.read_bytes() == b.read_bytes()


def test_records_csv_timestamp_header(tmp_path, tiny_records):
    records, _, _ = tiny_records
    path = tmp_path / "stamped.csv"
    ex.records_to_csv(records, path, include_timestamp=True)
    first = path.read_text().splitlines()[0]
    assert first.startswith("# generated ")


# aggregation


def test_aggregate_single_record(tiny_records):
    records, _, _ = tiny_records
    rows = ex.aggregate_report(records[:1])
    assert len(rows) == 1
    assert rows[0].mean_ratio == records[0].ratio
    assert rows[0].count == 1


def test_aggregate_k2only_filter(tiny_records):
    records, _, _ = tiny_records
    rows = ex.aggregate_report(records, "k2only")
    kept_ids = {r.instance_id for r in records if all(m == 0 for m in r.m_counts[2:])}
    assert kept_ids  # the tiny sweep includes a locality-2-only combo
    assert sum(row.count for row in rows) == sum(
        1 for r in records if r.instance_id in kept_ids
    )


def test_aggregate_empty_selection():
    with pytest.raises(ex.EmptySelectionError):
        ex.aggregate_report([], "all")


def test_aggregate_unknown_filter(tiny_records):
    records, _, _ = tiny_records
    with pytest.raises(ValueError):
        ex.aggregate_report(records, "k9")


def test_parse_schemes():
    assert ex.parse_schemes("v,g,gb") == (
        Scheme.VARIATIONAL,
        Scheme.GAMMA_ONLY,
        Scheme.GAMMA_BETA,
    )
    with pytest.raises(ValueError):
        ex.parse_schemes("v,x")


# config file parsing


CONFIG_TEXT = """
# sweep shape
n = 6
p1_choices = 0.0
p2_choices = 0.0, 0.4
pk_base_choices = 0.0, 0.3
max_locality = 3
instances_per_combo = 1
depths = 1, 2
schemes = v, g, gb
master_seed = 5
grid_points = 12
starts_p1 = 2
starts_high = 2
max_evals = 400
optimizer_seed = 1
workers = 1
"""


def test_parse_config_file(tmp_path):
    path = tmp_path / "sweep.cfg"
    path.write_text(CONFIG_TEXT)
    cfg = ex.parse_config_file(path)
    assert cfg == tiny_config()


def test_parse_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("n = 6\nshots = 100\n")
    with pytest.raises(ValueError):
        ex.parse_config_file(path)


# CLI end to end


def test_cli_full_round(tmp_path, tiny_context):
    cfg_path = tmp_path / "sweep.cfg"
    ctx_path = tmp_path / "ref.ctx"
    analytic.write_context(tiny_context, ctx_path)
    cfg_path.write_text(CONFIG_TEXT + f"transfer_context_path = {ctx_path}\n")
    data_dir = tmp_path / "data"
    results = tmp_path / "results.csv"
    table = tmp_path / "table.csv"
    plot = tmp_path / "ratios.svg"

    assert cli.main(["generate", "--config", str(cfg_path), "--out", str(data_dir)]) == 0
    assert (data_dir / "manifest.csv").exists()

    assert (
        cli.main(
            [
                "run",
                "--config",
                str(cfg_path),
                "--dataset",
                str(data_dir),
                "--out",
                str(results),
                "--no-timestamp",
            ]
        )
        == 0
    )
    records = ex.read_records_csv(results)
    assert records

    assert (
        cli.main(
            [
                "report",
                "--in",
                str(results),
                "--filter",
                "all",
                "--out",
                str(table),
                "--plot",
                str(plot),
            ]
        )
        == 0
    )
    assert table.read_text().startswith("scheme,p,mean_ratio,count")
    assert plot.exists() and plot.stat().st_size > 0

    assert (
        cli.main(
            ["check-analytic", "--dataset", str(data_dir), "--tolerance", "1e-9"]
        )
        == 0
    )


def test_cli_run_scheme_subset(tmp_path, tiny_context):
    cfg_path = tmp_path / "sweep.cfg"
    ctx_path = tmp_path / "ref.ctx"
    analytic.write_context(tiny_context, ctx_path)
    cfg_path.write_text(CONFIG_TEXT + f"transfer_context_path = {ctx_path}\n")
    data_dir = tmp_path / "data"
    results = tmp_path / "results.csv"
    cli.main(["generate", "--config", str(cfg_path), "--out", str(data_dir)])
    cli.main(
        [
            "run",
            "--config",
            str(cfg_path),
            "--dataset",
            str(data_dir),
            "--out",
            str(results),
            "--schemes",
            "g,gb",
            "--no-timestamp",
        ]
    )
    records = ex.read_records_csv(results)
    assert {r.scheme for r in records} == {Scheme.GAMMA_ONLY, Scheme.GAMMA_BETA}


def test_run_csv_byte_identical_reruns(tmp_path, tiny_context):
    cfg = tiny_config()  # all three schemes, variational included
    instances = ex.build_dataset(cfg)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    ex.records_to_csv(ex.run_pipeline(instances, cfg, tiny_context), a, include_timestamp=False)
    ex.records_to_csv(ex.run_pipeline(instances, cfg, tiny_context), b, include_timestamp=False)
    assert a.read_bytes() == b.read_bytes()


def test_pipeline_worker_pool_matches_serial(tiny_context):
    cfg = tiny_config(schemes=(Scheme.GAMMA_ONLY, Scheme.GAMMA_BETA))
    instances = ex.build_dataset(cfg)
    serial = ex.run_pipeline(instances, cfg, tiny_context)
    import dataclasses

    parallel = ex.run_pipeline(
        instances, dataclasses.replace(cfg, workers=2), tiny_context
    )
    assert serial == parallel
