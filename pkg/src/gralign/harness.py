"""Benchmark harness: noise-robustness evaluation grid, aggregation, and
rank-frequency reporting.

For every (network, noise level, instance) cell the harness rewires the base
network with a derived seed, builds node similarities per configured method,
runs the configured aligners, and records node correctness, S3, and runtimes.
Raw records go to an append-only CSV keyed by record identity so interrupted
runs resume where they left off; runtimes are persisted in a separate CSV so
the metric records are bit-reproducible for a fixed master seed.
"""

import concurrent.futures
import csv
import io
import time
import warnings
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .errors import ConfigError, DegenerateInputError, ParameterError
from .graph import Graph, parse_edge_list
from .generators import derive_seed, generate_geo, generate_sf, rewire
from .graphlets import count_orbits
from .embedding import (
    FeatureMatrix,
    SimilarityMatrix,
    cosine_similarity_matrix,
    pca_reduce,
    read_similarity_file,
)
from .aligners import SaConfig, node_correctness, s3_score, sa_align, wave_align

__all__ = [
    "NetworkSpec",
    "MethodSpec",
    "SaSettings",
    "ExperimentConfig",
    "ExperimentRecord",
    "CellMean",
    "RankTable",
    "run_benchmark",
    "aggregate",
    "rank_methods",
    "measure_runtimes",
    "read_records_csv",
    "write_records_csv",
    "write_cell_means_csv",
]

RECORD_FIELDS = (
    "method",
    "aligner",
    "network",
    "noise_pct",
    "instance",
    "seed",
    "node_correctness",
    "s3",
)
TIMING_FIELDS = (
    "method",
    "aligner",
    "network",
    "noise_pct",
    "instance",
    "embed_real_s",
    "embed_cpu_s",
    "align_real_s",
)


@dataclass
class NetworkSpec:
    """A benchmark network: either a generator spec or an edge-list path."""

    name: str
    model: str | None = None  # "geo" | "sf"
    n: int | None = None
    m: int | None = None
    path: str | None = None

    @property
    def is_synthetic(self) -> bool:
        return self.model is not None

    def validate(self) -> None:
        if (self.model is None) == (self.path is None):
            raise ConfigError(f"network {self.name!r}: give exactly one of model/path")
        if self.model is not None:
            if self.model not in ("geo", "sf"):
                raise ConfigError(f"network {self.name!r}: unknown model {self.model!r}")
            if not self.n or not self.m:
                raise ConfigError(f"network {self.name!r}: model needs n and m")
        elif not Path(self.path).is_file():
            raise ConfigError(f"network {self.name!r}: file not found: {self.path}")

    def load(self, master_seed: int) -> Graph:
        if self.model == "geo":
            return generate_geo(self.n, self.m, derive_seed(master_seed, "base", self.name))
        if self.model == "sf":
            return generate_sf(self.n, self.m, derive_seed(master_seed, "base", self.name))
        return parse_edge_list(Path(self.path).read_text())


@dataclass
class MethodSpec:
    """A node-similarity source: the graphlet pipeline or external files."""

    name: str
    kind: str = ""  # "graphlet-pca" | "external"; defaults to name
    pca_variance: float = 0.90
    min_components: int = 2
    log_transform: bool = False
    sim_files: str | None = None  # template with {network} {noise} {instance}

    def __post_init__(self):
        if not self.kind:
            self.kind = self.name

    def validate(self) -> None:
        if self.kind not in ("graphlet-pca", "external"):
            raise ConfigError(f"method {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "external" and not self.sim_files:
            raise ConfigError(f"method {self.name!r}: external method needs sim_files")


@dataclass
class SaSettings:
    w_s3: float = 1.0
    w_esim: float = 1.0
    synthetic_time_budget_s: float = 300.0
    real_time_budget_s: float = 3600.0
    move_budget: int | None = None  # overrides wall-clock budgets when set


@dataclass
class ExperimentConfig:
    networks: list[NetworkSpec]
    methods: list[MethodSpec]
    aligners: list[str] = field(default_factory=lambda: ["wave", "sa"])
    noise_levels: list[int] = field(default_factory=lambda: [0, 10, 25, 50, 75, 100])
    instances_per_level: int = 5
    master_seed: int = 1
    sa: SaSettings = field(default_factory=SaSettings)
    workers: int = 1

    def validate(self) -> None:
        if not self.networks:
            raise ConfigError("no networks configured")
        if not self.methods:
            raise ConfigError("no methods configured")
        for spec in self.networks:
            spec.validate()
        for spec in self.methods:
            spec.validate()
        names = [s.name for s in self.networks]
        if len(set(names)) != len(names):
            raise ConfigError("network names must be unique")
        names = [s.name for s in self.methods]
        if len(set(names)) != len(names):
            raise ConfigError("method names must be unique")
        if not self.aligners or any(a not in ("wave", "sa") for a in self.aligners):
            raise ConfigError("aligners must be a non-empty subset of {wave, sa}")
        if len(set(self.aligners)) != len(self.aligners):
            raise ConfigError("duplicate aligners configured")
        if self.instances_per_level < 1:
            raise ConfigError("instances_per_level must be >= 1")
        levels = list(self.noise_levels)
        if len(set(levels)) != len(levels):
            raise ConfigError("noise levels must be distinct")
        if any(not 0 <= x <= 100 for x in levels):
            raise ConfigError("noise levels must lie in 0..100")
        if sorted(levels) != levels:
            raise ConfigError("noise levels must be sorted ascending")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    # -- config file --------------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a mapping")
        known = {
            "networks",
            "methods",
            "aligners",
            "noise_levels",
            "instances_per_level",
            "master_seed",
            "sa",
            "workers",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")

        def build(cls_, entry, what):
            if not isinstance(entry, dict):
                raise ConfigError(f"each {what} entry must be a mapping")
            fields_ = {f.name for f in cls_.__dataclass_fields__.values()}
            unknown_ = set(entry) - fields_
            if unknown_:
                raise ConfigError(f"unknown {what} keys: {sorted(unknown_)}")
            return cls_(**entry)

        networks = [build(NetworkSpec, e, "network") for e in raw.get("networks", [])]
        methods = [build(MethodSpec, e, "method") for e in raw.get("methods", [])]
        sa = build(SaSettings, raw.get("sa", {}), "sa")
        cfg = cls(
            networks=networks,
            methods=methods,
            aligners=list(raw.get("aligners", ["wave", "sa"])),
            noise_levels=[int(x) for x in raw.get("noise_levels", [0, 10, 25, 50, 75, 100])],
            instances_per_level=int(raw.get("instances_per_level", 5)),
            master_seed=int(raw.get("master_seed", 1)),
            sa=sa,
            workers=int(raw.get("workers", 1)),
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"could not parse config: {exc}") from None
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "networks": [asdict(s) for s in self.networks],
            "methods": [asdict(s) for s in self.methods],
            "aligners": list(self.aligners),
            "noise_levels": list(self.noise_levels),
            "instances_per_level": self.instances_per_level,
            "master_seed": self.master_seed,
            "sa": asdict(self.sa),
            "workers": self.workers,
        }


@dataclass
class ExperimentRecord:
    """One benchmark cell result."""

    method: str
    aligner: str
    network: str
    noise_pct: int
    instance: int
    seed: int
    node_correctness: float
    s3: float
    embed_real_s: float = 0.0
    embed_cpu_s: float = 0.0
    align_real_s: float = 0.0

    @property
    def key(self) -> tuple:
        return (self.method, self.aligner, self.network, self.noise_pct, self.instance)


def _sim_file_path(method: MethodSpec, network: str, noise: int, instance: int) -> Path:
    return Path(method.sim_files.format(network=network, noise=noise, instance=instance))


def _warm_orbit_kernel() -> None:
    # first call JIT-compiles; keep that out of measured sections
    count_orbits(Graph(2, [(0, 1)]))


def graphlet_similarity(
    g1: Graph,
    g2: Graph,
    pca_variance: float = 0.90,
    min_components: int = 2,
    log_transform: bool = False,
) -> SimilarityMatrix:
    """GDV -> joint PCA -> normalized cosine similarity pipeline.

    Falls back to raw GDV cosine when the joint GDVs have zero variance.
    """
    gdv1 = count_orbits(g1)
    gdv2 = count_orbits(g2)
    try:
        f1, f2 = pca_reduce(gdv1, gdv2, pca_variance, min_components, log_transform)
    except DegenerateInputError:
        f1 = FeatureMatrix(gdv1.astype(np.float64))
        f2 = FeatureMatrix(gdv2.astype(np.float64))
    return cosine_similarity_matrix(f1, f2, g1.labels, g2.labels)


def _run_cell(
    base: Graph,
    network: NetworkSpec,
    noise: int,
    instance: int,
    cfg: ExperimentConfig,
    needed: list[tuple[str, str]],
) -> list[ExperimentRecord]:
    """Compute all needed (method, aligner) records for one grid cell."""
    pair_seed = derive_seed(cfg.master_seed, "pair", network.name, noise, instance)
    pair = rewire(base, noise, pair_seed)
    records = []
    needed_method_names = {m for m, _ in needed}
    for method in cfg.methods:
        mname = method.name
        if mname not in needed_method_names:
            continue
        if method.kind == "graphlet-pca":
            real0, cpu0 = time.perf_counter(), time.process_time()
            sim = graphlet_similarity(
                pair.original,
                pair.noisy,
                method.pca_variance,
                method.min_components,
                method.log_transform,
            )
            embed_real = time.perf_counter() - real0
            embed_cpu = time.process_time() - cpu0
        else:
            text = _sim_file_path(method, network.name, noise, instance).read_text()
            sim = read_similarity_file(text, pair.original.labels, pair.noisy.labels)
            embed_real = embed_cpu = 0.0  # embedding ran out of process
        for aligner in cfg.aligners:
            if (mname, aligner) not in needed:
                continue
            real0 = time.perf_counter()
            if aligner == "wave":
                alignment = wave_align(pair.original, pair.noisy, sim)
            else:
                budget = (
                    cfg.sa.synthetic_time_budget_s
                    if network.is_synthetic
                    else cfg.sa.real_time_budget_s
                )
                sa_cfg = SaConfig(
                    w_s3=cfg.sa.w_s3,
                    w_esim=cfg.sa.w_esim,
                    time_budget_s=budget,
                    move_budget=cfg.sa.move_budget,
                    seed=derive_seed(cfg.master_seed, "sa", network.name, noise, instance, mname),
                )
                alignment = sa_align(pair.original, pair.noisy, sim, sa_cfg)
            align_real = time.perf_counter() - real0
            records.append(
                ExperimentRecord(
                    method=mname,
                    aligner=aligner,
                    network=network.name,
                    noise_pct=noise,
                    instance=instance,
                    seed=pair_seed,
                    node_correctness=node_correctness(alignment, pair.true_mapping),
                    s3=s3_score(pair.original, pair.noisy, alignment),
                    embed_real_s=embed_real,
                    embed_cpu_s=embed_cpu,
                    align_real_s=align_real,
                )
            )
    return records


def run_benchmark(
    cfg: ExperimentConfig,
    out_dir: str | Path | None = None,
    resume: bool = True,
    verbose: bool = False,
) -> list[ExperimentRecord]:
    """Run the full evaluation grid and return one record per
    (method, aligner, network, noise level, instance).

    With `out_dir`, records and timings are appended to CSV files as cells
    complete, a manifest captures the config and versions, and per-cell mean
    metrics are written at the end. Completed records found in an existing
    records CSV are not recomputed when `resume` is set.
    """
    cfg.validate()
    for method in cfg.methods:
        if method.kind != "external":
            continue
        missing = []
        for network in cfg.networks:
            for noise in cfg.noise_levels:
                for instance in range(cfg.instances_per_level):
                    p = _sim_file_path(method, network.name, noise, instance)
                    if not p.is_file():
                        missing.append(str(p))
        if missing:
            raise ConfigError(
                f"method {method.name!r}: {len(missing)} similarity file(s) missing, "
                f"first: {missing[0]}"
            )

    records_path = timings_path = None
    done: dict[tuple, ExperimentRecord] = {}
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        records_path = out_dir / "records.csv"
        timings_path = out_dir / "timings.csv"
        manifest = {
            "config": cfg.to_dict(),
            "master_seed": cfg.master_seed,
            "versions": {
                "gralign": __version__,
                "numpy": np.__version__,
            },
        }
        (out_dir / "manifest.yaml").write_text(yaml.safe_dump(manifest, sort_keys=True))
        if resume and records_path.is_file():
            for rec in read_records_csv(records_path.read_text()):
                done[rec.key] = rec
            if timings_path.is_file():
                _merge_timings(done, timings_path.read_text())

    _warm_orbit_kernel()
    base_graphs = {spec.name: spec.load(cfg.master_seed) for spec in cfg.networks}

    jobs = []
    for network in cfg.networks:
        for noise in cfg.noise_levels:
            for instance in range(cfg.instances_per_level):
                needed = [
                    (m.name, a)
                    for m in cfg.methods
                    for a in cfg.aligners
                    if (m.name, a, network.name, noise, instance) not in done
                ]
                if needed:
                    jobs.append((network, noise, instance, needed))

    new_records: list[ExperimentRecord] = []

    def emit(cell_records: list[ExperimentRecord]) -> None:
        new_records.extend(cell_records)
        if records_path is not None:
            _append_csv(records_path, RECORD_FIELDS, cell_records)
            _append_csv(timings_path, TIMING_FIELDS, cell_records)
        if verbose and cell_records:
            r = cell_records[0]
            print(f"[{r.network} noise={r.noise_pct}% instance={r.instance}] done")

    if cfg.workers == 1:
        for network, noise, instance, needed in jobs:
            emit(_run_cell(base_graphs[network.name], network, noise, instance, cfg, needed))
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [
                pool.submit(_run_cell, base_graphs[network.name], network, noise, instance, cfg, needed)
                for network, noise, instance, needed in jobs
            ]
            for fut in futures:  # single serialized sink, deterministic order
                emit(fut.result())

    records = list(done.values()) + new_records
    records.sort(key=lambda r: r.key)
    if out_dir is not None:
        write_cell_means_csv(out_dir / "cell_means.csv", aggregate(records, cfg.instances_per_level))
    return records


# -- persistence -------------------------------------------------------------


def _format_value(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def _append_csv(path: Path, fields: tuple, records: list) -> None:
    new = not path.is_file()
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new:
            writer.writerow(fields)
        for rec in records:
            writer.writerow([_format_value(getattr(rec, f)) for f in fields])


def write_records_csv(records: list[ExperimentRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_FIELDS)
    for rec in records:
        writer.writerow([_format_value(getattr(rec, f)) for f in RECORD_FIELDS])
    return buf.getvalue()


def read_records_csv(text: str) -> list[ExperimentRecord]:
    reader = csv.DictReader(io.StringIO(text))
    records = []
    for row in reader:
        records.append(
            ExperimentRecord(
                method=row["method"],
                aligner=row["aligner"],
                network=row["network"],
                noise_pct=int(row["noise_pct"]),
                instance=int(row["instance"]),
                seed=int(row["seed"]),
                node_correctness=float(row["node_correctness"]),
                s3=float(row["s3"]),
            )
        )
    return records


def _merge_timings(done: dict, text: str) -> None:
    reader = csv.DictReader(io.StringIO(text))
    for row in reader:
        key = (
            row["method"],
            row["aligner"],
            row["network"],
            int(row["noise_pct"]),
            int(row["instance"]),
        )
        rec = done.get(key)
        if rec is not None:
            rec.embed_real_s = float(row["embed_real_s"])
            rec.embed_cpu_s = float(row["embed_cpu_s"])
            rec.align_real_s = float(row["align_real_s"])


# -- aggregation and ranking --------------------------------------------------


@dataclass
class CellMean:
    method: str
    aligner: str
    network: str
    noise_pct: int
    mean_nc: float
    mean_s3: float
    n_instances: int
    complete: bool = True


def aggregate(records: list[ExperimentRecord], expected_instances: int | None = None) -> list[CellMean]:
    """Mean metrics per (method, aligner, network, noise) cell.

    Cells with fewer instances than expected are flagged incomplete but still
    averaged over what is present.
    """
    if not records:
        raise ParameterError("no records to aggregate")
    groups: dict[tuple, list[ExperimentRecord]] = {}
    for rec in records:
        groups.setdefault((rec.method, rec.aligner, rec.network, rec.noise_pct), []).append(rec)
    out = []
    for (method, aligner, network, noise), recs in sorted(groups.items()):
        ncs = [r.node_correctness for r in recs]
        s3s = [r.s3 for r in recs]
        out.append(
            CellMean(
                method=method,
                aligner=aligner,
                network=network,
                noise_pct=noise,
                mean_nc=float(np.mean(ncs)),
                mean_s3=float(np.mean(s3s)),
                n_instances=len(recs),
                complete=expected_instances is None or len(recs) >= expected_instances,
            )
        )
    return out


def write_cell_means_csv(path: str | Path, means: list[CellMean]) -> None:
    # tidy layout: one row per cell, ready for noise-curve plotting
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ("method", "aligner", "network", "noise_pct", "mean_nc", "mean_s3", "n_instances", "complete")
        )
        for cm in means:
            writer.writerow(
                [
                    cm.method,
                    cm.aligner,
                    cm.network,
                    cm.noise_pct,
                    repr(cm.mean_nc),
                    repr(cm.mean_s3),
                    cm.n_instances,
                    int(cm.complete),
                ]
            )


@dataclass
class RankTable:
    """Rank-frequency summary over evaluation cells."""

    methods: tuple[str, ...]
    n_cells: int
    rank_counts: dict[str, dict[int, int]]
    tie_groups: dict[tuple[str, ...], int]

    def rank_pct(self, method: str, rank: int) -> float:
        if self.n_cells == 0:
            return 0.0
        return 100.0 * self.rank_counts[method].get(rank, 0) / self.n_cells

    def format(self) -> str:
        lines = ["method" + "".join(f"\trank{r}" for r in range(1, len(self.methods) + 1))]
        for m in self.methods:
            cells = "".join(
                f"\t{self.rank_pct(m, r):.2f}%" for r in range(1, len(self.methods) + 1)
            )
            lines.append(m + cells)
        lines.append(f"cells scored: {self.n_cells}")
        for group, count in sorted(self.tie_groups.items()):
            lines.append(f"tie {{{', '.join(group)}}}: {count} cell(s)")
        return "\n".join(lines)


def rank_methods(
    cell_means: list[CellMean],
    tie_epsilon: float = 0.005,
    max_noise_pct: int = 50,
) -> RankTable:
    """Competition-rank methods per (aligner, network, noise) cell by mean
    node correctness, counting methods within `tie_epsilon` of the group
    leader as tied at the leader's rank. Noise levels above `max_noise_pct`
    are omitted (alignment quality degenerates to ties near zero there)."""
    methods = tuple(sorted({cm.method for cm in cell_means}))
    if len(methods) < 2:
        raise ParameterError("ranking needs at least two methods")
    cells: dict[tuple, dict[str, float]] = {}
    for cm in cell_means:
        if cm.noise_pct > max_noise_pct:
            continue
        cells.setdefault((cm.aligner, cm.network, cm.noise_pct), {})[cm.method] = cm.mean_nc

    rank_counts: dict[str, dict[int, int]] = {m: {} for m in methods}
    tie_groups: dict[tuple[str, ...], int] = {}
    n_cells = 0
    for key in sorted(cells):
        per_method = cells[key]
        if len(per_method) < len(methods):
            missing = set(methods) - set(per_method)
            warnings.warn(f"cell {key} missing methods {sorted(missing)}; skipped")
            continue
        n_cells += 1
        remaining = sorted(per_method.items(), key=lambda kv: (-kv[1], kv[0]))
        position = 0
        while remaining:
            leader_nc = remaining[0][1]
            group = [m for m, v in remaining if leader_nc - v <= tie_epsilon]
            rank = position + 1
            for m in group:
                rank_counts[m][rank] = rank_counts[m].get(rank, 0) + 1
            if len(group) > 1:
                gkey = tuple(sorted(group))
                tie_groups[gkey] = tie_groups.get(gkey, 0) + 1
            position += len(group)
            remaining = remaining[len(group):]
    return RankTable(methods=methods, n_cells=n_cells, rank_counts=rank_counts, tie_groups=tie_groups)


def measure_runtimes(g: Graph, method: str = "graphlet", warm: bool = True) -> tuple[float, float]:
    """Wall-clock and process-CPU seconds for the embedding step only
    (GDV counting; graph loading excluded)."""
    if method != "graphlet":
        raise ParameterError(f"cannot measure {method!r} locally; only 'graphlet' runs in-process")
    if warm:
        _warm_orbit_kernel()
    real0, cpu0 = time.perf_counter(), time.process_time()
    count_orbits(g)
    return time.perf_counter() - real0, time.process_time() - cpu0
