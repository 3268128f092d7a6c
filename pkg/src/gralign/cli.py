"""Command-line interface.

Exit codes: 0 success, 2 configuration/parameter error, 3 input-format error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, GralignError, ParameterError, ParseError
from .graph import parse_edge_list, serialize_edge_list
from .generators import generate_geo, generate_sf, rewire
from .graphlets import count_orbits, read_gdv_file, write_gdv_file
from .embedding import (
    FeatureMatrix,
    cosine_similarity_matrix,
    pca_reduce,
    read_similarity_file,
    write_similarity_file,
)
from .errors import DegenerateInputError
from .aligners import (
    Alignment,
    SaConfig,
    node_correctness,
    read_alignment_file,
    s3_score,
    sa_align,
    wave_align,
    write_alignment_file,
)
from .harness import (
    ExperimentConfig,
    aggregate,
    graphlet_similarity,
    rank_methods,
    read_records_csv,
    run_benchmark,
)


def _read(path: str) -> str:
    return Path(path).read_text()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _cmd_generate(args) -> int:
    gen = generate_geo if args.model == "geo" else generate_sf
    g = gen(args.n, args.m, args.seed)
    _write(args.output, serialize_edge_list(g))
    return 0


def _cmd_rewire(args) -> int:
    g = parse_edge_list(_read(args.edge_list))
    pair = rewire(g, args.noise_pct, args.seed, degree_preserving=args.degree_preserving)
    _write(args.output, serialize_edge_list(pair.noisy))
    if args.mapping_out:
        truth = Alignment(pair.true_mapping)
        _write(args.mapping_out, write_alignment_file(pair.original, pair.noisy, truth))
    return 0


def _cmd_gdv(args) -> int:
    g = parse_edge_list(_read(args.edge_list))
    _write(args.output, write_gdv_file(g, count_orbits(g)))
    return 0


def _cmd_sim(args) -> int:
    if args.from_gdv:
        labels1, gdv1 = read_gdv_file(_read(args.first))
        labels2, gdv2 = read_gdv_file(_read(args.second))
        try:
            f1, f2 = pca_reduce(gdv1, gdv2, args.pca_variance, args.min_components, args.log_transform)
        except DegenerateInputError:
            f1 = FeatureMatrix(gdv1.astype(np.float64))
            f2 = FeatureMatrix(gdv2.astype(np.float64))
        sim = cosine_similarity_matrix(f1, f2, labels1, labels2)
    else:
        g1 = parse_edge_list(_read(args.first))
        g2 = parse_edge_list(_read(args.second))
        sim = graphlet_similarity(
            g1, g2, args.pca_variance, args.min_components, args.log_transform
        )
    _write(args.output, write_similarity_file(sim))
    return 0


def _cmd_align(args) -> int:
    g1 = parse_edge_list(_read(args.g1))
    g2 = parse_edge_list(_read(args.g2))
    sim = read_similarity_file(_read(args.similarities), g1.labels, g2.labels)
    if args.strategy == "wave":
        alignment = wave_align(g1, g2, sim, pure_similarity=args.pure_similarity)
    else:
        cfg = SaConfig(
            w_s3=args.s3_weight,
            w_esim=args.esim_weight,
            time_budget_s=args.time,
            move_budget=args.move_budget,
            seed=args.seed,
            greedy_init=args.greedy_init,
        )
        alignment = sa_align(g1, g2, sim, cfg)
    _write(args.output, write_alignment_file(g1, g2, alignment))
    return 0


def _cmd_eval(args) -> int:
    g1 = parse_edge_list(_read(args.g1))
    g2 = parse_edge_list(_read(args.g2))
    alignment = read_alignment_file(_read(args.alignment), g1, g2)
    truth = read_alignment_file(_read(args.truth), g1, g2)
    nc = node_correctness(alignment, truth.mapping)
    s3 = s3_score(g1, g2, alignment)
    print(f"node_correctness\t{nc!r}")
    print(f"s3\t{s3!r}")
    return 0


def _cmd_benchmark(args) -> int:
    cfg = ExperimentConfig.from_yaml(_read(args.config))
    records = run_benchmark(cfg, out_dir=args.output, resume=not args.no_resume, verbose=args.verbose)
    print(f"{len(records)} record(s) in {args.output}/records.csv")
    return 0


def _cmd_rank(args) -> int:
    records = read_records_csv(_read(args.records))
    means = aggregate(records)
    table = rank_methods(means, tie_epsilon=args.tie_epsilon, max_noise_pct=args.max_noise)
    print(table.format())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gralign",
        description="Graphlet-based node embedding and network alignment toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic network edge list")
    p.add_argument("--model", choices=("geo", "sf"), required=True)
    p.add_argument("-n", type=int, required=True, help="node count")
    p.add_argument("-m", type=int, required=True, help="edge count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("rewire", help="create a noisy counterpart of a network")
    p.add_argument("edge_list")
    p.add_argument("--noise-pct", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--degree-preserving", action="store_true")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--mapping-out", help="write the true node mapping here")
    p.set_defaults(func=_cmd_rewire)

    p = sub.add_parser("gdv", help="compute graphlet degree vectors")
    p.add_argument("edge_list")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_gdv)

    p = sub.add_parser("sim", help="compute a node similarity file from two networks")
    p.add_argument("first", help="edge list (or GDV file with --from-gdv)")
    p.add_argument("second")
    p.add_argument("--from-gdv", action="store_true", help="inputs are GDV files")
    p.add_argument("--pca-variance", type=float, default=0.90)
    p.add_argument("--min-components", type=int, default=2)
    p.add_argument("--log-transform", action="store_true")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_sim)

    p = sub.add_parser("align", help="align two networks given a similarity file")
    p.add_argument("g1")
    p.add_argument("g2")
    p.add_argument("similarities")
    p.add_argument("--strategy", choices=("wave", "sa"), default="wave")
    p.add_argument("--s3-weight", type=float, default=1.0)
    p.add_argument("--esim-weight", type=float, default=1.0)
    p.add_argument("--time", type=float, default=300.0, help="SA wall-clock budget, seconds")
    p.add_argument("--move-budget", type=int, default=None, help="SA move budget (reproducible)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pure-similarity", action="store_true", help="drop the WAVE vote term")
    p.add_argument("--greedy-init", action="store_true", help="greedy SA initialization")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("eval", help="score an alignment against a true mapping")
    p.add_argument("--g1", required=True)
    p.add_argument("--g2", required=True)
    p.add_argument("--alignment", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("benchmark", help="run the noise-robustness benchmark grid")
    p.add_argument("config", help="YAML experiment config")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--no-resume", action="store_true")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("rank", help="rank methods from a records CSV")
    p.add_argument("records")
    p.add_argument("--tie-epsilon", type=float, default=0.005)
    p.add_argument("--max-noise", type=int, default=50)
    p.set_defaults(func=_cmd_rank)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GralignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
