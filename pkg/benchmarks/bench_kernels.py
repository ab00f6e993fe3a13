#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Times the per-call primitives at the sizes training actually uses, plus one
whole-pipeline measurement (a CBOW epoch and an SGD epoch of the navigation
agent). Run after `pip install -e .`:

    python benchmarks/bench_kernels.py
"""

import argparse
import time
import timeit

import numpy as np

import webnav._kernels as K
from webnav.agent import AgentConfig, init_parameters, train
from webnav.corpus import compile_graph
from webnav.embeddings import compute_phi, train_cbow
from webnav.synth import make_synthetic_corpus
from webnav.tasks import generate_dataset


def bench_primitives(H, d, repeats=2000):
    rng = np.random.default_rng(0)
    x = rng.normal(size=2 * d)
    W, b = rng.normal(size=(H, 2 * d)), rng.normal(size=H)
    Wx, Wh = rng.normal(size=(4 * H, 2 * d)), rng.normal(size=(4 * H, H))
    bl = rng.normal(size=4 * H)
    h0, c0 = rng.normal(size=H), rng.normal(size=H)
    dh, dc = rng.normal(size=H), rng.normal(size=H)

    a = K.affine_tanh_fwd(W, b, x)
    hs, cs, gates = K.lstm_step_fwd(Wx, Wh, bl, x, h0, c0)
    da = rng.normal(size=H)
    cases = {
        "affine_tanh_fwd": lambda: K.affine_tanh_fwd(W, b, x),
        "affine_tanh_bwd": lambda: K.affine_tanh_bwd(W, x, a, da),
        "lstm_step_fwd": lambda: K.lstm_step_fwd(Wx, Wh, bl, x, h0, c0),
        "lstm_step_bwd": lambda: K.lstm_step_bwd(
            Wx, Wh, x, h0, c0, gates, cs, dh, dc
        ),
    }
    out = {}
    for name, fn in cases.items():
        out[name] = min(timeit.repeat(fn, number=repeats, repeat=3)) / repeats
    return out


def bench_pipeline(nodes=300, seed=3):
    docs = make_synthetic_corpus(nodes, n_categories=20, seed=seed)
    g = compile_graph(iter(docs), "Start")
    texts = list(g.texts)

    t0 = time.perf_counter()
    wv = train_cbow(texts, dim=32, window=5, epochs=5, lr=0.1, seed=1)
    cbow_s = time.perf_counter() - t0

    phi = compute_phi(g, wv).astype(np.float64)
    splits = generate_dataset(g, 4, 1, {"train": 60, "valid": 5, "test": 5}, seed=2)
    params = init_parameters(
        AgentConfig(core="rec", layers=1, units=64, dim=32, seed=0)
    )
    t0 = time.perf_counter()
    train(params, splits.train, g, phi, wv, lr=0.05, epochs=3, seed=0)
    train_s = time.perf_counter() - t0
    return {"cbow_5_epochs": cbow_s, "rec_sgd_3_epochs": train_s}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--units", type=int, default=64)
    parser.add_argument("--dim", type=int, default=32)
    args = parser.parse_args()

    backends = K.available_backends()
    if len(backends) < 2:
        print("compiled kernels not built; benchmarking the fallback only")

    rows = {}
    for backend in backends:
        K.use(backend)
        rows[backend] = bench_primitives(args.units, args.dim)
        rows[backend].update(bench_pipeline())
    K.use(backends[-1])

    names = list(next(iter(rows.values())))
    print(f"\nH={args.units}, d={args.dim}")
    header = f"{'kernel':<22}" + "".join(f"{b:>14}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name in names:
        line = f"{name:<22}"
        for b in backends:
            v = rows[b][name]
            line += f"{v * 1e6:>12.1f}us" if v < 0.1 else f"{v:>13.2f}s"
        if len(backends) == 2:
            line += f"{rows['python'][name] / rows['compiled'][name]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    import logging

    logging.basicConfig(level=logging.WARNING)
    main()
