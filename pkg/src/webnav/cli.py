"""The ``webnav`` command line.

Subcommands: compile, embed, phi, gen, import-qa, train, eval, search,
sweep, serve, report, synth. Exit codes: 0 success, 1 usage error, 2 data
error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__, _kernels
from .errors import DataError, UsageError, WebNavError

log = logging.getLogger("webnav")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="webnav", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=None,
                        help="override the per-command random seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for evaluation")
    parser.add_argument("--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a corpus into a graph")
    p.add_argument("--corpus", required=True)
    p.add_argument("--start", required=True, help="title of the start node")
    p.add_argument("--out", required=True, help="output .navg path")
    p.add_argument("--stats", default=None,
                   help="stats JSON path (default: stats.json next to --out)")
    p.add_argument("--exclude-section", action="append", default=None,
                   metavar="S", help="drop this section (repeatable)")
    p.add_argument("--exclude-title-prefix", action="append", default=None,
                   metavar="P", help="exclude documents by title prefix (repeatable)")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--nodes", type=int, default=500)
    p.add_argument("--categories", type=int, default=40)
    p.add_argument("--seed", type=int, default=0, dest="cmd_seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("embed", help="train CBOW word vectors on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0, dest="cmd_seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("phi", help="precompute per-node content vectors")
    p.add_argument("--graph", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("gen", help="generate a navigation dataset")
    p.add_argument("--graph", required=True)
    p.add_argument("--nh", type=int, required=True)
    p.add_argument("--nq", type=int, required=True)
    p.add_argument("--train", type=int, default=1000)
    p.add_argument("--valid", type=int, default=100)
    p.add_argument("--test", type=int, default=100)
    p.add_argument("--seed", type=int, default=17, dest="cmd_seed")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("import-qa", help="import question-answer pairs")
    p.add_argument("--graph", required=True)
    p.add_argument("--pairs", required=True,
                   help='JSONL with {"question": ..., "answer": ...} lines')
    p.add_argument("--train", type=int, default=None)
    p.add_argument("--valid", type=int, default=None)
    p.add_argument("--test", type=int, default=None)
    p.add_argument("--seed", type=int, default=0, dest="cmd_seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_import_qa)

    p = sub.add_parser("train", help="train a navigation agent")
    p.add_argument("--graph", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--split", default="train", choices=["train", "valid", "test"])
    p.add_argument("--core", default="ff", choices=["ff", "rec"])
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--units", type=int, default=512)
    p.add_argument("--query", default="bow", choices=["bow", "att"])
    p.add_argument("--u", type=int, default=4, help="attention window size")
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--clip", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0, dest="cmd_seed")
    p.add_argument("--init", default=None, help="checkpoint to start from")
    p.add_argument("--out", required=True, help="output checkpoint")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model or the search baseline")
    p.add_argument("--metric", required=True, choices=["reward", "recall"])
    p.add_argument("--system", default="agent", choices=["agent", "simplesearch"])
    p.add_argument("--graph", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test", choices=["train", "valid", "test"])
    p.add_argument("--model", default=None, help="agent checkpoint")
    p.add_argument("--phi", default=None)
    p.add_argument("--vectors", default=None)
    p.add_argument("--nn", type=int, default=4, help="peek budget / beam width")
    p.add_argument("--nh", type=int, default=None,
                   help="hop limit (default: dataset n_h)")
    p.add_argument("--k", type=int, default=4, help="K for recall")
    p.add_argument("--out", default=None, help="write the report JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("search", help="query the inverted-index baseline")
    p.add_argument("--graph", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, default=40)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("sweep", help="difficulty sweep over n_h and n_q")
    p.add_argument("--graph", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--nh", default="4,8", help="comma-separated n_h values")
    p.add_argument("--nq", default="1,2,4", help="comma-separated n_q values")
    p.add_argument("--seeds", default="1,2,3")
    p.add_argument("--train", type=int, default=120)
    p.add_argument("--valid", type=int, default=12)
    p.add_argument("--test", type=int, default=24)
    p.add_argument("--core", default="ff", choices=["ff", "rec"])
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--units", type=int, default=32)
    p.add_argument("--query", default="bow", choices=["bow", "att"])
    p.add_argument("--u", type=int, default=2)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--nn", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("serve", help="serve human navigation trials over HTTP")
    p.add_argument("--graph", required=True)
    p.add_argument("--data", required=True,
                   help="dataset directory (or a directory of datasets)")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--store", required=True, help="transcript directory")
    p.add_argument("--ui", default=None, help="static UI bundle to serve")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="render report JSONs as a text table")
    p.add_argument("inputs", nargs="+", help="eval or sweep report files")
    p.set_defaults(func=cmd_report)
    return parser


# --- helpers ---------------------------------------------------------------

def _load_graph(path: str):
    from .graph import load_graph

    return load_graph(path)


def _seed(args, fallback: int) -> int:
    if args.seed is not None:
        return args.seed
    return getattr(args, "cmd_seed", fallback)


def _check_graph_match(recorded: str | None, actual: str, what: str) -> None:
    if recorded and recorded != actual:
        raise DataError(
            f"{what} was built against a different graph "
            f"(expected {recorded[:12]}, got {actual[:12]})"
        )


# --- commands ----------------------------------------------------------------

def cmd_compile(args) -> int:
    import os

    from .corpus import (
        CompileConfig,
        DEFAULT_EXCLUDED_SECTIONS,
        DEFAULT_EXCLUDED_TITLE_PREFIXES,
        compile_graph,
        graph_stats,
        read_corpus,
    )
    from .graph import save_graph

    cfg = CompileConfig(
        excluded_sections=tuple(args.exclude_section)
        if args.exclude_section is not None else DEFAULT_EXCLUDED_SECTIONS,
        excluded_title_prefixes=tuple(args.exclude_title_prefix)
        if args.exclude_title_prefix is not None else DEFAULT_EXCLUDED_TITLE_PREFIXES,
    )
    g = compile_graph(read_corpus(args.corpus), args.start, cfg)
    save_graph(g, args.out)
    stats = graph_stats(g)
    stats_path = args.stats or os.path.join(
        os.path.dirname(os.path.abspath(args.out)), "stats.json"
    )
    with open(stats_path, "w", encoding="utf-8") as fh:
        json.dump(stats.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"{args.out}: {stats.nodes} nodes, {stats.edges} edges")
    return 0


def cmd_synth(args) -> int:
    from .synth import make_synthetic_corpus, write_corpus

    docs = make_synthetic_corpus(
        n_nodes=args.nodes, n_categories=args.categories, seed=_seed(args, 0)
    )
    write_corpus(docs, args.out)
    print(f"{args.out}: {len(docs)} documents")
    return 0


def cmd_embed(args) -> int:
    from .corpus import parse_document, read_corpus
    from .embeddings import save_vectors, train_cbow

    # train on the same cleaned text the graph nodes will carry
    texts = []
    for doc in read_corpus(args.corpus):
        parsed = parse_document(doc)
        if parsed is not None:
            texts.append(parsed.clean_text)
    wv = train_cbow(texts, dim=args.dim, window=args.window,
                    epochs=args.epochs, lr=args.lr, seed=_seed(args, 0))
    save_vectors(wv, args.out)
    print(f"{args.out}: {len(wv)} vectors, dim {wv.dim} "
          f"({_kernels.BACKEND} kernels)")
    return 0


def cmd_phi(args) -> int:
    from .embeddings import compute_phi, load_vectors, save_phi

    g = _load_graph(args.graph)
    wv = load_vectors(args.vectors)
    phi = compute_phi(g, wv)
    save_phi(phi, args.out)
    print(f"{args.out}: {phi.shape[0]} x {phi.shape[1]} content vectors")
    return 0


def cmd_gen(args) -> int:
    from .graph import file_sha256
    from .tasks import generate_dataset, save_splits

    g = _load_graph(args.graph)
    splits = generate_dataset(
        g, args.nh, args.nq,
        {"train": args.train, "valid": args.valid, "test": args.test},
        seed=_seed(args, 17),
    )
    save_splits(splits, args.out, graph_sha256=file_sha256(args.graph))
    print(f"{args.out}: train {len(splits.train)}, valid {len(splits.valid)}, "
          f"test {len(splits.test)}")
    return 0


def cmd_import_qa(args) -> int:
    from .graph import file_sha256
    from .tasks import import_qa_pairs, save_splits

    g = _load_graph(args.graph)

    def pairs():
        with open(args.pairs, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                if "question" not in obj or "answer" not in obj:
                    raise DataError(
                        f"{args.pairs}:{lineno}: expected question and answer"
                    )
                yield str(obj["question"]), str(obj["answer"])

    counts = None
    if args.train is not None or args.valid is not None or args.test is not None:
        counts = {"train": args.train or 0, "valid": args.valid or 0,
                  "test": args.test or 0}
    splits = import_qa_pairs(g, pairs(), split_counts=counts, seed=_seed(args, 0))
    save_splits(splits, args.out, graph_sha256=file_sha256(args.graph))
    print(f"{args.out}: train {len(splits.train)}, valid {len(splits.valid)}, "
          f"test {len(splits.test)}")
    return 0


def cmd_train(args) -> int:
    from .agent import (
        AgentConfig,
        init_parameters,
        load_checkpoint,
        save_checkpoint,
        train,
    )
    from .embeddings import load_phi, load_vectors
    from .graph import file_sha256
    from .tasks import load_splits

    g = _load_graph(args.graph)
    graph_hash = file_sha256(args.graph)
    wv = load_vectors(args.vectors)
    phi = load_phi(args.phi).astype(np.float64)
    splits = load_splits(args.data)
    _check_graph_match(splits.meta.get("graph_sha256"), graph_hash, "dataset")
    seed = _seed(args, 0)
    if args.init:
        params, init_meta = load_checkpoint(args.init)
        _check_graph_match(init_meta.get("graph_sha256"), graph_hash,
                           "initial checkpoint")
        log.info("initialized from %s", args.init)
    else:
        params = init_parameters(AgentConfig(
            core=args.core, layers=args.layers, units=args.units, dim=wv.dim,
            query_mode=args.query, window=args.u if args.query == "att" else 0,
            beam_width=4, seed=seed,
        ))
    cost_log = train(params, splits.split(args.split), g, phi, wv,
                     lr=args.lr, epochs=args.epochs, clip=args.clip, seed=seed)
    save_checkpoint(params, args.out, meta={
        "graph_sha256": graph_hash,
        "dataset": args.data,
        "split": args.split,
        "lr": args.lr,
        "epochs": args.epochs,
        "clip": args.clip,
        "seed": seed,
        "init": args.init,
        "cost_log": cost_log,
    })
    print(f"{args.out}: final cost {cost_log[-1]:.6f} "
          f"({_kernels.BACKEND} kernels)")
    return 0


def cmd_eval(args) -> int:
    from .evaluate import (
        average_reward,
        recall_at_k_agent,
        recall_at_k_simplesearch,
    )
    from .graph import file_sha256
    from .tasks import load_splits

    g = _load_graph(args.graph)
    graph_hash = file_sha256(args.graph)
    splits = load_splits(args.data)
    _check_graph_match(splits.meta.get("graph_sha256"), graph_hash, "dataset")
    examples = splits.split(args.split)
    n_h = args.nh if args.nh is not None else splits.meta.get("n_h")
    dataset_id = f"{args.data}:{args.split}"

    if args.metric == "recall" and args.system == "simplesearch":
        from .search import build_index

        report = recall_at_k_simplesearch(build_index(g), examples, args.k,
                                          dataset_id=dataset_id)
    else:
        if not (args.model and args.phi and args.vectors):
            raise UsageError("agent evaluation needs --model, --phi and --vectors")
        from .agent import load_checkpoint
        from .embeddings import load_phi, load_vectors

        params, meta = load_checkpoint(args.model)
        _check_graph_match(meta.get("graph_sha256"), graph_hash, "model")
        wv = load_vectors(args.vectors)
        phi = load_phi(args.phi)
        if n_h is None:
            raise UsageError("--nh is required when the dataset has no n_h")
        if args.metric == "reward":
            report = average_reward(params, g, phi, wv, examples, args.nn, n_h,
                                    threads=args.threads, dataset_id=dataset_id,
                                    model_id=args.model)
        else:
            report = recall_at_k_agent(params, g, phi, wv, examples, args.k, n_h,
                                       threads=args.threads, dataset_id=dataset_id,
                                       model_id=args.model)
    if args.out:
        report.dump(args.out)
    print(f"{report.metric} = {report.value:.4f} "
          f"({len(report.outcomes)} examples, {report.wall_time_s:.2f}s)")
    return 0


def cmd_search(args) -> int:
    from .search import build_index, search

    g = _load_graph(args.graph)
    for node, score in search(build_index(g), args.query, args.k):
        print(f"{score:10.4f}  {g.titles[node]}")
    return 0


def cmd_sweep(args) -> int:
    from .agent import AgentConfig
    from .embeddings import load_phi, load_vectors
    from .evaluate import difficulty_sweep

    g = _load_graph(args.graph)
    wv = load_vectors(args.vectors)
    phi = load_phi(args.phi).astype(np.float64)
    result = difficulty_sweep(
        g, phi, wv,
        n_h_values=[int(v) for v in args.nh.split(",")],
        n_q_values=[int(v) for v in args.nq.split(",")],
        seeds=[int(v) for v in args.seeds.split(",")],
        counts={"train": args.train, "valid": args.valid, "test": args.test},
        agent_config=AgentConfig(
            core=args.core, layers=args.layers, units=args.units, dim=wv.dim,
            query_mode=args.query, window=args.u if args.query == "att" else 0,
        ),
        lr=args.lr, epochs=args.epochs, n_n=args.nn, threads=args.threads,
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(result, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"{args.out}: {len(result['cells'])} cells")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_datasets

    g = _load_graph(args.graph)
    app = create_app(g, load_datasets(args.data), store_dir=args.store,
                     ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_report(args) -> int:
    for path in args.inputs:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        print(f"== {path}")
        if "cells" in obj:  # sweep matrix
            n_qs = obj["grid"]["n_q"]
            n_hs = obj["grid"]["n_h"]
            header = "n_h \\ n_q " + "".join(f"{q:>8}" for q in n_qs)
            print(header)
            for nh in n_hs:
                row = [f"{nh:>9}"]
                for nq in n_qs:
                    cell = obj["cells"].get(f"{nh}-{nq}", {})
                    median = cell.get("median")
                    row.append(f"{median:8.3f}" if median is not None
                               else f"{'-':>8}")
                print(" ".join(row))
        else:
            print(f"{obj.get('metric', '?'):>14}: {obj.get('value'):.4f}  "
                  f"model={obj.get('model') or '-'} dataset={obj.get('dataset')}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        level = logging.WARNING if args.quiet else logging.INFO
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
        logging.getLogger().setLevel(level)  # basicConfig is a no-op when reentered
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except WebNavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
