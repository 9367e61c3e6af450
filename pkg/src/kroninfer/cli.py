"""Command line front end.

Subcommands: generate, infer, spectrum, bench, features. Every text
artifact starts with a comment line recording the subcommand, the full
flag set (including the seed) and the artifact format version, so a rerun
with identical flags reproduces identical bytes. Timing columns are the
one exception to byte reproducibility and are always placed last.

Exit codes: 0 success, 2 argument/validation errors, 3 file and parse
errors, 4 numerical failures.
"""
import argparse
import csv
import os
import sys

import numpy as np

from .datasets import extract_features, parse_tu_dataset, standardize_features
from .denoise import (
    SpectralModel,
    center_adjacency,
    estimate_p,
    invert_spike,
    ks_statistic,
    shrink_singular,
    spike_prediction,
)
from .linear_map import rank_bound
from .model import (
    apply_permutation,
    build_initiator,
    kronecker_power,
    load_adjacency,
    random_sparse_permutation,
    sample_adjacency,
    save_adjacency,
    save_edge_list,
)
from .solver import SolverConfig, infer
from .validation import (
    NumericalError,
    ParseError,
    ValidationError,
    check_dense_size,
    infer_order,
)

ARTIFACT_VERSION = 1
OUTPUT_DIR_ENV = "KRONINFER_OUTPUT_DIR"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{v:.12g}"
    return str(v)


def _comment(cmd, args):
    skip = {"func"}
    pairs = [f"--{k.replace('_', '-')}={v}" for k, v in sorted(vars(args).items())
             if k not in skip]
    return f"# kroninfer {cmd} " + " ".join(pairs) + f" artifact_version={ARTIFACT_VERSION}"


def _out_dir(args):
    out = args.out or os.environ.get(OUTPUT_DIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_csv(path, comment_lines, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in comment_lines:
            fh.write(line.rstrip("\n") + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _parse_vector(text, n, name):
    parts = [t for t in text.split(",") if t.strip() != ""]
    if len(parts) != n:
        raise ValidationError(f"{name} needs {n} comma-separated values, got {len(parts)}")
    try:
        return np.array([float(t) for t in parts])
    except ValueError:
        raise ValidationError(f"{name} must be numeric, got {text!r}")


def _solver_config(args):
    return SolverConfig(
        method=args.method,
        eta=args.eta,
        s=args.s,
        gamma=args.gamma,
        max_iter=args.max_iter,
        tol=args.tol,
        block_count=args.block_count,
        seed=args.seed,
    )


def _add_solver_flags(sp):
    sp.add_argument("--method", default="iht", choices=["iht", "relax"])
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--s", type=int, default=5, help="per-block outlier sparsity")
    sp.add_argument("--gamma", type=float, default=None,
                    help="l1 weight for relax (default: data driven)")
    sp.add_argument("--max-iter", type=int, default=500)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--block-count", type=int, default=None,
                    help="sampled column blocks (default: 100 when accelerated)")
    sp.add_argument("--accelerate", action="store_true",
                    help="randomized factorization plus block sampling")


def cmd_generate(args):
    m, K = args.m, args.K
    N = m ** K
    x = _parse_vector(args.x, m * m, "--x") if args.x else np.zeros(m * m)
    X = x.reshape(m, m, order="F")
    P1 = build_initiator(args.p, X, N)
    P = kronecker_power(P1, K)
    rng = np.random.default_rng(args.seed)
    A0 = sample_adjacency(P, rng, directed=not args.undirected)
    perm = random_sparse_permutation(N, args.shuffle, rng)
    A = apply_permutation(A0, perm)

    out = _out_dir(args)
    comment = _comment("generate", args)
    adj_path = os.path.join(out, "adjacency.bin")
    save_adjacency(A, adj_path)  # binary container, no comment line
    written = [adj_path]
    if args.edges:
        edge_path = os.path.join(out, "edges.txt")
        save_edge_list(A, edge_path, header=comment)
        written.append(edge_path)
    perm_path = os.path.join(out, "permutation.csv")
    _write_csv(perm_path, [comment], ["node", "target"],
               [(i, int(perm[i])) for i in range(N)])
    written.append(perm_path)
    manifest = [
        ("m", m), ("K", K), ("N", N), ("p", args.p), ("x", args.x or "0"),
        ("shuffle", args.shuffle), ("seed", args.seed),
        ("undirected", args.undirected), ("edge_count", int(A.sum())),
        ("artifact_version", ARTIFACT_VERSION),
    ] + [(f"file_{i}", os.path.basename(f)) for i, f in enumerate(written)]
    man_path = os.path.join(out, "manifest.csv")
    _write_csv(man_path, [comment], ["key", "value"], manifest)
    print(f"generated N={N} graph with {int(A.sum())} edges -> {out}")
    return 0


def cmd_infer(args):
    A = load_adjacency(args.adjacency)
    res = infer(A, args.m, _solver_config(args), accelerate=args.accelerate)
    mse = float("nan")
    if args.truth:
        truth = _parse_vector(args.truth, args.m ** 2, "--truth")
        mse = float(((res.X_hat.flatten(order="F") - truth) ** 2).sum())
    out = _out_dir(args)
    header = (["p_hat"] + [f"x_{q}" for q in range(1, args.m ** 2 + 1)]
              + ["mse", "iterations", "d_nnz", "final_residual", "wall_time_s"])
    row = ([res.p_hat] + list(res.X_hat.flatten(order="F"))
           + [mse, res.iterations, res.d_nnz, res.final_residual, res.wall_time])
    path = os.path.join(out, "infer.csv")
    _write_csv(path, [_comment("infer", args)], header, [row])
    print(f"p_hat={res.p_hat:.6g} iterations={res.iterations} "
          f"wall={res.wall_time:.3f}s mse={mse:.6g} -> {path}")
    return 0


def cmd_spectrum(args):
    A = load_adjacency(args.adjacency)
    N = A.shape[0]
    check_dense_size(N, "full spectrum")
    K = infer_order(N, args.m)
    _, pbar = estimate_p(A, K)
    Abar, _ = center_adjacency(A)
    sv = np.linalg.svd(Abar, compute_uv=False)
    model = SpectralModel(pbar)
    shrunk = shrink_singular(sv, pbar)
    r = min(rank_bound(args.m, K), N)
    ks = ks_statistic(sv[r:], pbar) if N > r else float("nan")

    out = _out_dir(args)
    comment = _comment("spectrum", args)
    stats = (f"# pbar_hat={pbar:.12g} edge={model.edge:.12g} ks={ks:.12g} "
             f"bulk_count={max(N - r, 0)}")
    spec_path = os.path.join(out, "spectrum.csv")
    _write_csv(spec_path, [comment, stats],
               ["index", "singular_value", "shrunk_value", "above_edge"],
               [(i + 1, sv[i], shrunk[i], int(sv[i] > model.edge)) for i in range(N)])

    ts = np.linspace(0.0, model.edge, 512)
    curve_path = os.path.join(out, "curve.csv")
    _write_csv(curve_path, [comment], ["t", "density"],
               list(zip(ts, model.density(ts))))

    spike_rows = []
    for v in sv[sv > model.edge]:
        ell = invert_spike(v, pbar)
        loc, _ = spike_prediction(ell, pbar)
        spike_rows.append((ell, loc, v))
    spike_path = os.path.join(out, "spikes.csv")
    _write_csv(spike_path, [comment, stats],
               ["ell_hat", "predicted_location", "observed"], spike_rows)
    print(f"N={N} ks={ks:.4f} above_edge={len(spike_rows)} -> {out}")
    return 0


def cmd_bench(args):
    m = args.m
    Ks = [int(t) for t in args.K.split(",") if t.strip()]
    ps = [float(t) for t in args.p.split(",") if t.strip()]
    methods = [t.strip() for t in args.methods.split(",") if t.strip()]
    accels = [bool(int(t)) for t in args.accel.split(",") if t.strip()]
    x = _parse_vector(args.x, m * m, "--x")
    X = x.reshape(m, m, order="F")

    rows = []
    for K in Ks:
        N = m ** K
        for p in ps:
            P = kronecker_power(build_initiator(p, X, N), K)
            for method in methods:
                for accel in accels:
                    mses, walls = [], []
                    for rep in range(args.repeats):
                        rng = np.random.default_rng(args.seed + rep)
                        A = sample_adjacency(P, rng)
                        perm = random_sparse_permutation(N, args.shuffle, rng)
                        A = apply_permutation(A, perm)
                        cfg = SolverConfig(method=method, seed=args.seed + rep)
                        res = infer(A, m, cfg, accelerate=accel)
                        mses.append(((res.X_hat - X) ** 2).sum())
                        walls.append(res.wall_time)
                    rows.append((m, K, N, p, method, int(accel), args.repeats,
                                 float(np.mean(mses)), float(np.std(mses)),
                                 float(np.mean(walls))))
    out = _out_dir(args)
    path = os.path.join(out, "bench.csv")
    _write_csv(path, [_comment("bench", args)],
               ["m", "K", "N", "p", "method", "accelerate", "repeats",
                "mse_mean", "mse_std", "wall_mean_s"], rows)
    for row in rows:
        print("bench:", ",".join(_fmt(v) for v in row))
    print(f"-> {path}")
    return 0


def cmd_features(args):
    graphs = parse_tu_dataset(args.dataset)
    cfg = SolverConfig(method=args.method, s=args.s, seed=args.seed)
    table = extract_features(graphs, args.m, cfg, accelerate=args.accelerate)
    if not args.raw:
        table = standardize_features(table)
    out = _out_dir(args)
    path = os.path.join(out, "features.csv")
    table.to_csv(path, comment=_comment("features", args))
    print(f"{len(graphs)} graphs, {table.width} columns per row -> {path}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="kroninfer",
        description="Kronecker graph generation and initiator inference",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a Kronecker graph")
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--K", type=int, required=True)
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--x", default=None,
                   help="m*m comma-separated perturbation entries, column-major")
    g.add_argument("--shuffle", type=float, default=0.0,
                   help="fraction of nodes to relabel")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--undirected", action="store_true")
    g.add_argument("--edges", action="store_true", help="also write an edge list")
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_generate)

    i = sub.add_parser("infer", help="recover initiator parameters")
    i.add_argument("adjacency", help="binary adjacency file")
    i.add_argument("--m", type=int, required=True)
    _add_solver_flags(i)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--truth", default=None,
                   help="true m*m perturbation for error reporting")
    i.add_argument("--out", default=None)
    i.set_defaults(func=cmd_infer)

    s = sub.add_parser("spectrum", help="singular value diagnostics")
    s.add_argument("adjacency")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_spectrum)

    b = sub.add_parser("bench", help="sweep configurations and report errors")
    b.add_argument("--m", type=int, default=2)
    b.add_argument("--K", required=True, help="comma-separated orders")
    b.add_argument("--p", required=True, help="comma-separated base rates")
    b.add_argument("--x", required=True)
    b.add_argument("--methods", default="iht,relax")
    b.add_argument("--accel", default="0", help="comma list of 0/1")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--shuffle", type=float, default=0.0)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)

    f = sub.add_parser("features", help="feature rows from a TU-layout corpus")
    f.add_argument("dataset", help="dataset directory")
    f.add_argument("--m", type=int, required=True)
    f.add_argument("--raw", action="store_true", help="skip standardization")
    f.add_argument("--method", default="iht", choices=["iht", "relax"])
    f.add_argument("--s", type=int, default=5)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--accelerate", action="store_true")
    f.add_argument("--out", default=None)
    f.set_defaults(func=cmd_features)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ParseError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (NumericalError, np.linalg.LinAlgError) as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
