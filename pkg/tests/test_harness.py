import numpy as np
import pytest
import yaml

from gralign import (
    CellMean,
    ConfigError,
    ExperimentConfig,
    ExperimentRecord,
    MethodSpec,
    NetworkSpec,
    ParameterError,
    SaSettings,
    SimilarityMatrix,
    aggregate,
    generate_geo,
    measure_runtimes,
    rank_methods,
    rewire,
    run_benchmark,
    write_similarity_file,
)
from gralign.harness import read_records_csv


def tiny_config(**overrides):
    base = dict(
        networks=[NetworkSpec(name="geo-s", model="geo", n=60, m=150)],
        methods=[MethodSpec(name="graphlet-pca")],
        aligners=["wave"],
        noise_levels=[0],
        instances_per_level=1,
        master_seed=99,
        sa=SaSettings(move_budget=2000),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def record(method="m", aligner="wave", network="net", noise=0, instance=0, nc=1.0, s3=1.0):
    return ExperimentRecord(
        method=method,
        aligner=aligner,
        network=network,
        noise_pct=noise,
        instance=instance,
        seed=0,
        node_correctness=nc,
        s3=s3,
    )


# -- run_benchmark ---------------------------------------------------------------


def test_minimal_grid_single_record():
    records = run_benchmark(tiny_config())
    assert len(records) == 1
    rec = records[0]
    assert rec.method == "graphlet-pca" and rec.aligner == "wave"
    assert rec.noise_pct == 0 and rec.instance == 0
    assert 0.0 <= rec.node_correctness <= 1.0
    assert rec.node_correctness == 1.0  # zero noise, identical graphs
    assert rec.s3 == 1.0
    assert rec.embed_real_s > 0.0


def test_grid_size_matches_configuration():
    cfg = tiny_config(
        noise_levels=[0, 50],
        instances_per_level=2,
        aligners=["wave", "sa"],
    )
    records = run_benchmark(cfg)
    assert len(records) == 1 * 2 * 2 * 1 * 2  # networks x levels x instances x methods x aligners
    keys = {r.key for r in records}
    assert len(keys) == len(records)


def test_benchmark_persists_and_resumes(tmp_path):
    cfg = tiny_config(noise_levels=[0, 25], instances_per_level=1)
    out = tmp_path / "run"
    records = run_benchmark(cfg, out_dir=out)
    assert (out / "records.csv").is_file()
    assert (out / "timings.csv").is_file()
    assert (out / "manifest.yaml").is_file()
    assert (out / "cell_means.csv").is_file()
    first = (out / "records.csv").read_text()
    again = run_benchmark(cfg, out_dir=out)  # resumes: nothing recomputed
    assert (out / "records.csv").read_text() == first
    assert len(again) == len(records)
    assert sorted(r.key for r in again) == sorted(r.key for r in records)
    # timings survive the resume round trip
    assert all(r.embed_real_s > 0 for r in again)
    manifest = yaml.safe_load((out / "manifest.yaml").read_text())
    assert manifest["master_seed"] == 99


def test_benchmark_records_reload_from_csv(tmp_path):
    cfg = tiny_config()
    out = tmp_path / "run"
    records = run_benchmark(cfg, out_dir=out)
    loaded = read_records_csv((out / "records.csv").read_text())
    assert len(loaded) == len(records)
    assert loaded[0].node_correctness == records[0].node_correctness


def test_external_method_interface(tmp_path):
    # emulate a third-party embedding through the similarity-file interface
    net = NetworkSpec(name="geo-s", model="geo", n=40, m=100)
    master = 7
    base = net.load(master)
    from gralign.generators import derive_seed

    for noise in (0, 25):
        pair_seed = derive_seed(master, "pair", net.name, noise, 0)
        pair = rewire(base, noise, pair_seed)
        values = np.full((40, 40), 0.2)
        np.fill_diagonal(values, 0.9)
        sim = SimilarityMatrix(values, pair.original.labels, pair.noisy.labels)
        (tmp_path / f"geo-s-{noise}-0.sim").write_text(write_similarity_file(sim))

    cfg = tiny_config(
        networks=[net],
        methods=[
            MethodSpec(name="graphlet-pca"),
            MethodSpec(
                name="oracle-sim",
                kind="external",
                sim_files=str(tmp_path / "{network}-{noise}-{instance}.sim"),
            ),
        ],
        noise_levels=[0, 25],
        master_seed=master,
    )
    records = run_benchmark(cfg)
    assert len(records) == 4
    ext = [r for r in records if r.method == "oracle-sim"]
    assert len(ext) == 2
    assert all(r.embed_real_s == 0.0 for r in ext)
    # the planted diagonal similarity aligns perfectly even under noise
    assert all(r.node_correctness == 1.0 for r in ext)


def test_external_method_missing_file_fails_before_running(tmp_path):
    cfg = tiny_config(
        methods=[
            MethodSpec(
                name="ext",
                kind="external",
                sim_files=str(tmp_path / "missing-{network}-{noise}-{instance}.sim"),
            )
        ]
    )
    out = tmp_path / "never"
    with pytest.raises(ConfigError, match="missing"):
        run_benchmark(cfg, out_dir=out)
    assert not (out / "records.csv").exists()


def test_benchmark_with_sa_and_workers(tmp_path):
    cfg = tiny_config(
        networks=[NetworkSpec(name="geo-s", model="geo", n=40, m=100)],
        aligners=["wave", "sa"],
        noise_levels=[0, 50],
        workers=2,
        sa=SaSettings(move_budget=1000),
    )
    records = run_benchmark(cfg, out_dir=tmp_path / "w2")
    assert len(records) == 4
    for r in records:
        assert 0.0 <= r.node_correctness <= 1.0
        assert 0.0 <= r.s3 <= 1.0


# -- config parsing ----------------------------------------------------------------


def test_config_from_yaml_round_trip():
    text = """
master_seed: 5
instances_per_level: 2
noise_levels: [0, 25, 50]
aligners: [wave, sa]
networks:
  - name: geo-small
    model: geo
    n: 100
    m: 300
methods:
  - name: graphlet-pca
    pca_variance: 0.95
sa:
  move_budget: 500
"""
    cfg = ExperimentConfig.from_yaml(text)
    assert cfg.master_seed == 5
    assert cfg.networks[0].m == 300
    assert cfg.methods[0].pca_variance == 0.95
    assert cfg.sa.move_budget == 500
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize(
    "mutation, message",
    [
        (dict(networks=[]), "no networks"),
        (dict(instances_per_level=0), "instances_per_level"),
        (dict(noise_levels=[0, 0]), "distinct"),
        (dict(noise_levels=[50, 0]), "sorted"),
        (dict(noise_levels=[0, 150]), "0..100"),
        (dict(aligners=["wave", "hungarian"]), "aligners"),
        (dict(workers=0), "workers"),
    ],
)
def test_config_validation_errors(mutation, message):
    with pytest.raises(ConfigError, match=message):
        tiny_config(**mutation).validate()


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown config keys"):
        ExperimentConfig.from_yaml("masterseed: 3\nnetworks: []\nmethods: []")
    with pytest.raises(ConfigError, match="unknown network keys"):
        ExperimentConfig.from_yaml(
            "networks:\n  - name: a\n    kind: geo\nmethods:\n  - name: graphlet-pca"
        )


def test_network_spec_validation(tmp_path):
    with pytest.raises(ConfigError, match="exactly one"):
        NetworkSpec(name="x", model="geo", n=5, m=5, path="f.el").validate()
    with pytest.raises(ConfigError, match="unknown model"):
        NetworkSpec(name="x", model="er", n=5, m=5).validate()
    with pytest.raises(ConfigError, match="not found"):
        NetworkSpec(name="x", path=str(tmp_path / "nope.el")).validate()
    p = tmp_path / "ok.el"
    p.write_text("a b\n")
    spec = NetworkSpec(name="x", path=str(p))
    spec.validate()
    g = spec.load(master_seed=0)
    assert g.n == 2


# -- aggregation -------------------------------------------------------------------


def test_aggregate_means():
    values = [1.0, 1.0, 0.5, 0.5, 0.5]
    records = [record(instance=i, nc=v, s3=v / 2) for i, v in enumerate(values)]
    (cell,) = aggregate(records, expected_instances=5)
    assert cell.mean_nc == pytest.approx(0.7)
    assert cell.mean_s3 == pytest.approx(0.35)
    assert cell.n_instances == 5 and cell.complete


def test_aggregate_single_record():
    (cell,) = aggregate([record(nc=0.42, s3=0.13)])
    assert cell.mean_nc == 0.42 and cell.mean_s3 == 0.13 and cell.n_instances == 1


def test_aggregate_partial_cell_flagged_incomplete():
    records = [record(instance=i, nc=0.5) for i in range(3)]
    (cell,) = aggregate(records, expected_instances=5)
    assert not cell.complete
    assert cell.mean_nc == pytest.approx(0.5)


def test_aggregate_empty_is_error():
    with pytest.raises(ParameterError):
        aggregate([])


# -- ranking -----------------------------------------------------------------------


def cell(method, nc, aligner="wave", network="net", noise=0):
    return CellMean(method, aligner, network, noise, nc, 0.0, 5)


def test_rank_two_methods_clear_winner():
    table = rank_methods([cell("a", 0.9), cell("b", 0.2)])
    assert table.rank_counts["a"] == {1: 1}
    assert table.rank_counts["b"] == {2: 1}


def test_rank_epsilon_tie_shares_rank_one():
    table = rank_methods([cell("a", 0.501), cell("b", 0.499)], tie_epsilon=0.005)
    assert table.rank_counts["a"] == {1: 1}
    assert table.rank_counts["b"] == {1: 1}
    assert table.tie_groups == {("a", "b"): 1}


def test_rank_competition_ranking_after_tie():
    means = [cell("a", 0.50), cell("b", 0.499), cell("c", 0.30)]
    table = rank_methods(means)
    assert table.rank_counts["a"] == {1: 1}
    assert table.rank_counts["b"] == {1: 1}
    assert table.rank_counts["c"] == {3: 1}  # competition: rank 2 skipped


def test_rank_omits_high_noise_cells():
    means = [
        cell("a", 0.9, noise=0),
        cell("b", 0.1, noise=0),
        cell("a", 0.0, noise=75),
        cell("b", 0.0, noise=75),
    ]
    table = rank_methods(means)
    assert table.n_cells == 1


def test_rank_skips_cells_missing_methods():
    means = [
        cell("a", 0.9, noise=0),
        cell("b", 0.1, noise=0),
        cell("a", 0.8, noise=10),  # b missing here
    ]
    with pytest.warns(UserWarning, match="missing methods"):
        table = rank_methods(means)
    assert table.n_cells == 1


def test_rank_frequencies_cover_all_cells():
    rng = np.random.default_rng(0)
    means = []
    for aligner in ("wave", "sa"):
        for network in ("geo", "sf"):
            for noise in (0, 10, 25, 50):
                for method in ("a", "b", "c"):
                    means.append(cell(method, float(rng.random()), aligner, network, noise))
    table = rank_methods(means)
    assert table.n_cells == 16
    for method in ("a", "b", "c"):
        assert sum(table.rank_counts[method].values()) == table.n_cells


def test_rank_needs_two_methods():
    with pytest.raises(ParameterError):
        rank_methods([cell("a", 0.5)])


def test_rank_table_format():
    table = rank_methods([cell("a", 0.9), cell("b", 0.2)])
    text = table.format()
    assert "rank1" in text and "a" in text and "100.00%" in text


# -- runtimes ----------------------------------------------------------------------


def test_measure_runtimes():
    g = generate_geo(200, 600, seed=0)
    real, cpu = measure_runtimes(g)
    assert real > 0.0
    assert cpu >= 0.0
    with pytest.raises(ParameterError):
        measure_runtimes(g, method="node2vec")
