"""Command-line pipeline: run | ablate | prototype | fingerprint | paired | atlas.

Every verb reads plain files, writes only under --out, and is
deterministic for identical inputs; timing goes to its own file so the
result files are byte-reproducible.  The thread count honored by the
BLAS backends comes from GRAPHSIG_NUM_THREADS, applied at package
import before numpy starts.
"""

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import time

import numpy as np

from .atlas import dataset_fingerprint, emit_figure_data, node_atlas
from .conventions import EPSILON, PACKAGE_VERSION, STD_MODE
from .dictionary import BLOCK_NAMES
from .io import (
    RunConfig,
    config_hash,
    load_dataset,
    load_snapshot,
    report_meta,
    save_edge_provenance,
    save_snapshot,
    write_json,
)
from .graph import save_edge_list
from .lab import (
    VARIANTS,
    ablation_table,
    compare_runs,
    degree_preserving_rewire,
    mutual_knn_densify,
    paired_stats,
    run_variants,
    variant_by_name,
)
from .scaffold import SearchGrids, SplitSpec, evaluate_repeats, summarize_repeats


class CliError(Exception):
    def __init__(self, stage, err):
        super().__init__(f"stage {stage}: {err}")
        self.stage = stage


def _ints(text):
    return tuple(int(t) for t in text.split(",") if t.strip())


def _floats(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _alpha_sets(text):
    sets = tuple(_floats(part) for part in text.split(";") if part.strip())
    if not sets:
        raise argparse.ArgumentTypeError("empty alpha-set grid")
    return sets


def _add_dataset_args(p, labels_required=True):
    p.add_argument("--edges", required=True, help="edge list file (src,dst per line)")
    p.add_argument("--features", required=True, help="feature CSV or packed binary")
    p.add_argument("--labels", required=labels_required, help="label file, one per node")
    p.add_argument("--name", default=None, help="dataset name used in reports")


def _add_split_args(p):
    p.add_argument("--split-mode", choices=("per-class", "fraction"), default="per-class")
    p.add_argument("--train-per-class", type=int, default=20)
    p.add_argument("--val-per-class", type=int, default=30)
    p.add_argument(
        "--fractions",
        type=_floats,
        default=(0.6, 0.2, 0.2),
        metavar="TR,VA,TE",
        help="train,val,test fractions for --split-mode fraction",
    )
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="base seed; repeat i uses seed+i")


def _add_model_args(p):
    p.add_argument(
        "--blocks",
        default=",".join(BLOCK_NAMES),
        help="comma-separated active dictionary blocks",
    )
    p.add_argument("--grid-k", type=_ints, default=None, metavar="K1,K2,...")
    p.add_argument("--grid-rmax", type=_ints, default=None, metavar="R1,R2,...")
    p.add_argument("--grid-eta", type=_floats, default=None, metavar="E1,E2,...")
    p.add_argument(
        "--grid-alphas",
        type=_alpha_sets,
        default=None,
        metavar="A1,A2,A3;B1,B2,B3",
        help="semicolon-separated alpha sets",
    )
    p.add_argument("--grid-w", type=_floats, default=None, metavar="W1,W2,...")
    p.add_argument("--fisher-mode", choices=("train", "train+val"), default="train")


def _split_spec(args) -> SplitSpec:
    fr = args.fractions
    if len(fr) != 3:
        raise CliError("configure", "--fractions needs exactly three values")
    return SplitSpec(
        mode=args.split_mode,
        train_per_class=args.train_per_class,
        val_per_class=args.val_per_class,
        train_frac=fr[0],
        val_frac=fr[1],
        test_frac=fr[2],
        seed=args.seed,
    )


def _grids(args) -> SearchGrids:
    base = SearchGrids()
    return SearchGrids(
        ks=args.grid_k or base.ks,
        r_maxs=args.grid_rmax or base.r_maxs,
        etas=args.grid_eta or base.etas,
        alpha_sets=args.grid_alphas or base.alpha_sets,
        ws=args.grid_w or base.ws,
    )


def _blocks(args):
    names = tuple(t.strip() for t in args.blocks.split(",") if t.strip())
    for t in names:
        if t not in BLOCK_NAMES:
            raise CliError(
                "configure", f"unknown block {t!r}; known: {', '.join(BLOCK_NAMES)}"
            )
    return names


def _run_config(args, out_dir) -> RunConfig:
    return RunConfig(
        name=args.name or "dataset",
        split=_split_spec(args),
        repeats=args.repeats,
        grids=_grids(args),
        active_blocks=_blocks(args),
        fisher_mode=args.fisher_mode,
        snapshots=getattr(args, "snapshots", "first"),
        out_dir=out_dir,
    )


def cmd_run(args) -> int:
    out = args.out
    os.makedirs(out, exist_ok=True)
    t_start = time.perf_counter()
    stage_times = {}

    stage = "load-dataset"
    try:
        t0 = time.perf_counter()
        bundle = load_dataset(args.edges, args.features, args.labels, name=args.name)
        config = dataclasses.replace(_run_config(args, out), name=bundle.name)
        stage_times["load"] = time.perf_counter() - t0

        stage = "evaluate"
        t0 = time.perf_counter()
        outcomes = evaluate_repeats(
            bundle.graph,
            bundle.X,
            bundle.y,
            config.split,
            n_repeats=config.repeats,
            grids=config.grids,
            active_blocks=config.active_blocks,
            fisher_mode=config.fisher_mode,
        )
        summary = summarize_repeats(outcomes)
        stage_times["evaluate"] = time.perf_counter() - t0

        stage = "atlas"
        t0 = time.perf_counter()
        meta = report_meta(config)
        for o in outcomes:
            rep_dir = os.path.join(out, f"repeat_{o.repeat:02d}")
            records = node_atlas(o.scaffold, o.test, bundle.y, bundle.graph.degree)
            fp = dataset_fingerprint(records, o.scaffold.subspaces)
            emit_figure_data(
                records,
                fp,
                rep_dir,
                subspaces=o.scaffold.subspaces,
                dataset_name=bundle.name,
                split_mode=config.split.mode,
                meta=dict(meta, repeat=o.repeat),
            )
            want_snap = config.snapshots == "all" or (
                config.snapshots == "first" and o.repeat == 0
            )
            if want_snap:
                save_snapshot(
                    os.path.join(rep_dir, "snapshot.json"),
                    o.scaffold,
                    extra={
                        "dataset": bundle.name,
                        "split_mode": config.split.mode,
                        "seed": o.seed,
                        "repeat": o.repeat,
                        "val_idx": o.val.tolist(),
                        "test_idx": o.test.tolist(),
                    },
                )
        stage_times["atlas"] = time.perf_counter() - t0

        stage = "report"
        results = {
            "dataset": {
                "name": bundle.name,
                "n": bundle.graph.n,
                "d": int(bundle.X.shape[1]),
                "edges": bundle.graph.n_edges,
                "n_classes": len(bundle.label_map),
                "labeled": int(np.sum(bundle.y >= 0)),
                "label_map": bundle.label_map,
            },
            "config": config.to_dict(),
            "config_hash": config_hash(config),
            "code_version": PACKAGE_VERSION,
            "accuracy_mean": summary["mean"],
            "accuracy_std": summary["std"],
            "repeats": [
                {
                    "repeat": o.repeat,
                    "seed": o.seed,
                    "val_accuracy": o.val_accuracy,
                    "test_accuracy": o.test_accuracy,
                    "selected_config": o.config.to_dict(),
                    "sizes": {
                        "train": int(o.train.size),
                        "val": int(o.val.size),
                        "test": int(o.test.size),
                    },
                }
                for o in outcomes
            ],
        }
        write_json(os.path.join(out, "results.json"), results)
        stage_times["total"] = time.perf_counter() - t_start
        write_json(
            os.path.join(out, "timing.json"),
            {"config_hash": config_hash(config), "seconds": stage_times},
        )
    except CliError:
        raise
    except Exception as e:
        raise CliError(stage, e) from e
    print(
        f"run complete: mean accuracy {summary['mean']:.4f}"
        + (f" +- {summary['std']:.4f}" if summary["std"] is not None else "")
        + f" over {len(outcomes)} repeats -> {out}"
    )
    return 0


def cmd_ablate(args) -> int:
    out = args.out
    os.makedirs(out, exist_ok=True)
    stage = "load-dataset"
    try:
        bundle = load_dataset(args.edges, args.features, args.labels, name=args.name)
        config = dataclasses.replace(_run_config(args, out), name=bundle.name)
        wanted = (
            [variant_by_name(t.strip()) for t in args.variants.split(",") if t.strip()]
            if args.variants
            else list(VARIANTS)
        )

        stage = "evaluate-variants"
        results = run_variants(
            bundle.graph,
            bundle.X,
            bundle.y,
            config.split,
            variants=wanted,
            n_repeats=config.repeats,
            grids=config.grids,
            fisher_mode=config.fisher_mode,
            keep_scaffolds=False,
        )
        table = ablation_table(results)

        stage = "report"
        meta = report_meta(config)
        n_rep = config.repeats
        header = (
            ["variant"]
            + [f"acc_{i}" for i in range(n_rep)]
            + ["mean", "std", "rank"]
        )
        lines = ["# " + " ".join(f"{k}={meta[k]}" for k in sorted(meta))]
        lines.append(",".join(header))
        for row in table:
            cells = [row["variant"]]
            cells += [f"{a:.10g}" for a in row["accuracies"]]
            cells += [
                f"{row['mean']:.10g}",
                "" if row["std"] is None else f"{row['std']:.10g}",
                str(row["rank"]),
            ]
            lines.append(",".join(cells))
        with open(os.path.join(out, "ablation_report.csv"), "w") as fh:
            fh.write("\n".join(lines) + "\n")

        payload = {"meta": meta, "variants": table}
        if "full" in results and len(results) > 1:
            payload["paired_vs_full"] = {
                name: dataclasses.asdict(compare_runs(res, results["full"]))
                for name, res in results.items()
                if name != "full"
            }
        write_json(os.path.join(out, "ablation_report.json"), payload)
    except CliError:
        raise
    except Exception as e:
        raise CliError(stage, e) from e
    best = min(table, key=lambda r: r["rank"])
    print(
        f"ablation complete: {len(table)} variants, best {best['variant']} "
        f"(mean {best['mean']:.4f}) -> {out}"
    )
    return 0


def cmd_prototype(args) -> int:
    out = args.out
    os.makedirs(out, exist_ok=True)
    stage = "load-dataset"
    try:
        bundle = load_dataset(
            args.edges, args.features, args.labels, name=args.name
        )
        g = bundle.graph
        stage = f"prototype-{args.method}"
        if args.method == "knn":
            g2, added = mutual_knn_densify(g, bundle.X, args.k)
            info = {
                "method": "mutual-cosine-knn",
                "parameters": {"k": args.k},
                "edges_before": g.n_edges,
                "edges_after": g2.n_edges,
                "edges_added": added,
            }
        else:
            g2, swap_info = degree_preserving_rewire(
                g, args.fraction, seed=args.proto_seed, fallback_dropout=args.fallback_dropout
            )
            info = {
                "method": swap_info["method"],
                "parameters": {
                    "fraction": args.fraction,
                    "fallback_dropout": args.fallback_dropout,
                },
                "seed": args.proto_seed,
                "edges_before": g.n_edges,
                "edges_after": g2.n_edges,
                "swaps": swap_info["swaps"],
                "target_swaps": swap_info["target"],
                "attempts": swap_info["attempts"],
            }
        stage = "write"
        edge_path = os.path.join(out, "processed_edges.csv")
        save_edge_list(edge_path, g2.edges)
        save_edge_provenance(
            os.path.join(out, "processed_edges.json"),
            dict(info, dataset=bundle.name, code_version=PACKAGE_VERSION),
        )
    except CliError:
        raise
    except Exception as e:
        raise CliError(stage, e) from e
    print(
        f"prototype complete: {info['method']} "
        f"{info['edges_before']} -> {info['edges_after']} edges -> {edge_path}"
    )
    return 0


def _atlas_like(args) -> int:
    out = args.out
    os.makedirs(out, exist_ok=True)
    stage = "load-dataset"
    try:
        bundle = load_dataset(args.edges, args.features, args.labels, name=args.name)
        stage = "load-snapshot"
        with open(args.snapshot, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        scaffold = load_snapshot(args.snapshot, bundle.graph, bundle.X)
        extra = raw.get("extra", {})

        stage = "select-eval-nodes"
        if args.eval_nodes:
            eval_idx = np.loadtxt(args.eval_nodes, dtype=np.int64, ndmin=1)
        else:
            key = {"train": None, "val": "val_idx", "test": "test_idx"}[args.eval]
            if key is None:
                eval_idx = scaffold.train_idx
            elif key in extra:
                eval_idx = np.asarray(extra[key], dtype=np.int64)
            else:
                raise CliError(
                    stage,
                    f"snapshot lacks {key}; pass --eval-nodes with explicit ids",
                )

        stage = "atlas"
        records = node_atlas(scaffold, eval_idx, bundle.y, bundle.graph.degree)
        fp = dataset_fingerprint(records, scaffold.subspaces)
        blob = json.dumps(scaffold.config.to_dict(), sort_keys=True)
        meta = {
            "config_hash": hashlib.sha256(blob.encode()).hexdigest()[:16],
            "code_version": PACKAGE_VERSION,
            "std_mode": STD_MODE,
            "epsilon": EPSILON,
            "split_mode": extra.get("split_mode", "unspecified"),
        }
        emit_figure_data(
            records,
            fp,
            out,
            subspaces=scaffold.subspaces,
            dataset_name=bundle.name,
            split_mode=meta["split_mode"],
            meta=meta,
        )
    except CliError:
        raise
    except Exception as e:
        raise CliError(stage, e) from e
    print(
        f"atlas complete: {len(records)} nodes, accuracy {fp.accuracy:.4f}, "
        f"shares raw/low/high = {100 * fp.raw_share:.2f}/"
        f"{100 * fp.low_share:.2f}/{100 * fp.high_share:.2f} -> {out}"
    )
    return 0


def cmd_paired(args) -> int:
    out = args.out
    os.makedirs(out, exist_ok=True)
    stage = "load-results"
    try:
        if args.deltas is not None:
            result = paired_stats(args.deltas)
            inputs = {"deltas": list(args.deltas)}
        else:
            if not (args.a and args.b):
                raise CliError(stage, "need --a and --b result files (or --deltas)")
            with open(args.a) as fh:
                ra = json.load(fh)
            with open(args.b) as fh:
                rb = json.load(fh)
            acc_a = [r["test_accuracy"] for r in ra["repeats"]]
            acc_b = [r["test_accuracy"] for r in rb["repeats"]]
            if len(acc_a) != len(acc_b):
                raise CliError(stage, "result files have different repeat counts")
            stage = "paired-stats"
            result = paired_stats(
                [100.0 * (a - b) for a, b in zip(acc_a, acc_b)]
            )
            inputs = {
                "a": {"path": str(args.a), "config_hash": ra.get("config_hash")},
                "b": {"path": str(args.b), "config_hash": rb.get("config_hash")},
            }
        stage = "report"
        write_json(
            os.path.join(out, "paired_report.json"),
            {
                "inputs": inputs,
                "code_version": PACKAGE_VERSION,
                "result": dataclasses.asdict(result),
            },
        )
    except CliError:
        raise
    except Exception as e:
        raise CliError(stage, e) from e
    print(
        f"paired comparison: n={result.n} mean={result.mean:+.3f} pp, "
        f"t p={result.t_p:.4f}, Wilcoxon p={result.wilcoxon_p:.4f}, "
        f"sign p={result.sign_p:.4f} -> {out}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="graphsig",
        description="White-box graph node classification from explicit signal dictionaries",
    )
    p.add_argument("--version", action="version", version=PACKAGE_VERSION)
    sub = p.add_subparsers(dest="verb", required=True)

    pr = sub.add_parser("run", help="grid search + repeated evaluation + atlas")
    _add_dataset_args(pr)
    _add_split_args(pr)
    _add_model_args(pr)
    pr.add_argument("--snapshots", choices=("none", "first", "all"), default="first")
    pr.add_argument("--out", required=True)
    pr.set_defaults(fn=cmd_run)

    pa = sub.add_parser("ablate", help="run the intervention variant suite")
    _add_dataset_args(pa)
    _add_split_args(pa)
    _add_model_args(pa)
    pa.add_argument("--variants", default=None, help="comma-separated variant names")
    pa.add_argument("--out", required=True)
    pa.set_defaults(fn=cmd_ablate)

    pp = sub.add_parser("prototype", help="emit a processed prototype edge list")
    _add_dataset_args(pp, labels_required=False)
    pp.add_argument("--method", choices=("knn", "rewire"), required=True)
    pp.add_argument("--k", type=int, default=10)
    pp.add_argument("--fraction", type=float, default=0.20)
    pp.add_argument("--fallback-dropout", type=float, default=0.15)
    pp.add_argument("--proto-seed", type=int, default=0)
    pp.add_argument("--out", required=True)
    pp.set_defaults(fn=cmd_prototype)

    for verb in ("fingerprint", "atlas"):
        pf = sub.add_parser(
            verb, help="recompute atlas + fingerprint from a snapshot"
        )
        _add_dataset_args(pf)
        pf.add_argument("--snapshot", required=True)
        pf.add_argument("--eval", choices=("train", "val", "test"), default="test")
        pf.add_argument("--eval-nodes", default=None, help="file of node ids, one per line")
        pf.add_argument("--out", required=True)
        pf.set_defaults(fn=_atlas_like)

    pd = sub.add_parser("paired", help="paired statistics between two runs")
    pd.add_argument("--a", default=None, help="results.json of run A")
    pd.add_argument("--b", default=None, help="results.json of run B")
    pd.add_argument("--deltas", type=_floats, default=None, help="explicit deltas (pp)")
    pd.add_argument("--out", required=True)
    pd.set_defaults(fn=cmd_paired)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as e:
        print(f"graphsig {args.verb}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
