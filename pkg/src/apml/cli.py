"""Command-line entry point.

Exit status is 0 on success, 1 on a usage error and 2 when the computation
itself fails (bad input file, numerical failure, oracle limits).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import kernels
from .errors import APMLError
from .fit import FitConfig, LossKind, fit_pointset, loss_and_grad
from .io import load_pointcloud, save_pointcloud
from .loss import ApmlConfig, apml_forward
from .metrics import DEFAULT_TAU, EmdNormalization, compute_metrics, emd_bruteforce, emd_exact
from .shapes import Shape
from .transport import DEFAULT_THRESHOLD, sparsity_stats, threshold_sparsify


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_apml_flags(p, reduction="sum"):
    g = p.add_argument_group("APML hyperparameters")
    g.add_argument("--p-min", type=float, default=0.8)
    g.add_argument("--delta", type=float, default=1e-6)
    g.add_argument("--eps-gap", type=float, default=1e-5)
    g.add_argument("--l-iter", type=int, default=10)
    g.add_argument("--eps-stab", type=float, default=1e-8)
    g.add_argument("--grad-mode", choices=["full", "detached"], default="full")
    g.add_argument("--reduction", choices=["sum", "mean"], default=reduction)


def _add_pair(p):
    p.add_argument("pred", help="predicted / source point cloud")
    p.add_argument("truth", help="ground-truth / target point cloud")
    p.add_argument("--format", choices=["auto", "xyz", "bin"], default="auto",
                   help="input file format (default: from the file suffix)")


def _apml_cfg(args):
    try:
        return ApmlConfig.from_values(args.p_min, args.delta, args.eps_gap, args.l_iter, args.eps_stab,
                                      args.grad_mode, args.reduction)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_pair(args):
    return load_pointcloud(args.pred, args.format), load_pointcloud(args.truth, args.format)


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def cmd_loss(args, out):
    pred, truth = _load_pair(args)
    kind = LossKind(args.kind)
    if kind is LossKind.APML:
        res = apml_forward(pred, truth, _apml_cfg(args))
        print(repr(res.loss), file=out)
        if args.save_transport:
            np.save(args.save_transport, res.transport[0])
        if args.diagnostics:
            d = res.diagnostics[0]
            record = {
                "loss": res.loss,
                "override_count": res.override_count,
                "row_overrides": int(d.row_override.sum()),
                "col_overrides": int(d.col_override.sum()),
                "max_row_temperature": float(np.max(d.row_temperature)),
                "max_col_temperature": float(np.max(d.col_temperature)),
                "max_row_dev": d.residuals.max_row_dev,
                "max_col_dev": d.residuals.max_col_dev,
            }
            print(json.dumps(record), file=out)
    else:
        loss, _ = loss_and_grad(kind, pred, truth)
        print(repr(loss), file=out)


def cmd_metrics(args, out):
    pred, truth = _load_pair(args)
    report = compute_metrics(pred, truth, args.tau, EmdNormalization(args.emd_normalization), args.seed)
    w = _writer(out)
    w.writerow(["cd_l1", "cd_l2", "emd", "emd_x100", "f1", "precision", "recall", "tau"])
    w.writerow([repr(v) for v in (report.cd_l1, report.cd_l2, report.emd, report.emd_times_100,
                                  report.f1, report.precision, report.recall, report.tau)])


def cmd_fit(args, out):
    apml_cfg = _apml_cfg(args)
    try:
        cfg = FitConfig(args.loss, args.steps, args.step_size, args.seed, args.n, args.shape, apml_cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    target = load_pointcloud(args.target, args.format) if args.target else None
    if target is not None and target.n != cfg.n_points:
        raise UsageError(f"--n {cfg.n_points} does not match the {target.n} points in {args.target}")
    trace = fit_pointset(cfg, target=target)
    if args.out and args.out != "-":
        with open(args.out, "w", newline="") as fh:
            trace.write_csv(fh, timing=not args.no_timing)
    else:
        trace.write_csv(out, timing=not args.no_timing)
    if args.save_final:
        save_pointcloud(trace.final_points, args.save_final)


def cmd_analyze(args, out):
    if args.transport:
        if args.pred or args.truth:
            raise UsageError("give either a point-cloud pair or --transport, not both")
        P = np.load(args.transport)
        stage = "saved"
    else:
        if not (args.pred and args.truth):
            raise UsageError("analyze needs two point clouds or --transport")
        pred, truth = _load_pair(args)
        res = apml_forward(pred, truth, _apml_cfg(args))
        if args.stage == "pre":
            P = res.diagnostics[0].pre_sinkhorn
        else:
            P = res.transport[0]
        stage = args.stage
    report = sparsity_stats(P, args.threshold, args.bins, clamped=args.clamped)
    sparse = threshold_sparsify(P, args.threshold)
    w = _writer(out)
    w.writerow(["stage", "threshold", "fraction_above", "sparsity", "n_entries", "nnz_kept",
                "sparse_bytes", "dense_bytes"])
    w.writerow([stage, repr(report.threshold), repr(report.fraction_above), repr(report.sparsity),
                report.n_entries, sparse.nnz, sparse.nbytes, sparse.dense_nbytes])
    if args.histogram:
        with open(args.histogram, "w", newline="") as fh:
            hw = _writer(fh)
            hw.writerow(["bin_lo", "bin_hi", "count"])
            for lo, hi, c in report.histogram_rows():
                hw.writerow([repr(lo), repr(hi), c])


def cmd_emd_oracle(args, out):
    pred, truth = _load_pair(args)
    brute = emd_bruteforce(pred, truth)
    exact = emd_exact(pred, truth, EmdNormalization.SUM)
    w = _writer(out)
    w.writerow(["n", "emd_exact", "emd_bruteforce", "abs_diff"])
    w.writerow([pred.n, repr(exact), repr(brute), repr(abs(exact - brute))])


def run_bench(sizes, reps, seed=0, dtype="float64", cfg=None):
    """Time the forward pass on seeded random clouds; returns ``(n, mean_ms, std_ms, reps)`` rows."""
    rng = np.random.default_rng(seed)
    rows = []
    for n in sizes:
        x = rng.random((n, 3)).astype(dtype)
        y = rng.random((n, 3)).astype(dtype)
        apml_forward(x, y, cfg)  # warm-up
        times = []
        for _ in range(reps):
            t0 = time.perf_counter()
            apml_forward(x, y, cfg)
            times.append(1e3 * (time.perf_counter() - t0))
        rows.append((n, float(np.mean(times)), float(np.std(times)), reps))
    return rows


def cmd_bench(args, out):
    if any(n < 2 for n in args.sizes) or args.reps < 1:
        raise UsageError("sizes must be >= 2 and reps >= 1")
    backend = kernels.backend_name() if args.backend == "auto" else args.backend
    if backend not in kernels.available_backends():
        raise UsageError(f"backend {backend!r} is not available; have {kernels.available_backends()}")
    with kernels.use_backend(backend):
        rows = run_bench(args.sizes, args.reps, args.seed, args.dtype, _apml_cfg(args))
    fh = open(args.out, "w", newline="") if args.out else out
    try:
        w = _writer(fh)
        w.writerow(["n", "mean_ms", "std_ms", "reps"])
        for n, mean, std, reps in rows:
            w.writerow([n, f"{mean:.4f}", f"{std:.4f}", reps])
    finally:
        if fh is not out:
            fh.close()


def build_parser():
    parser = _Parser(prog="apml", description="Adaptive probabilistic matching loss for point sets.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("loss", help="evaluate a loss between two point clouds")
    _add_pair(p)
    p.add_argument("--kind", choices=[k.value for k in LossKind], default="apml")
    p.add_argument("--diagnostics", action="store_true", help="also print a JSON line of diagnostics")
    p.add_argument("--save-transport", metavar="PATH", help="save the final transport plan as .npy")
    _add_apml_flags(p)
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("metrics", help="Chamfer, EMD and F1 between two point clouds")
    _add_pair(p)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    p.add_argument("--emd-normalization", choices=["sum", "mean"], default="mean")
    p.add_argument("--seed", type=int, default=0, help="seed for subsampling unequal sets")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("fit", help="fit a point set to a target by gradient descent")
    p.add_argument("--loss", choices=[k.value for k in LossKind], default="apml")
    p.add_argument("--shape", choices=[s.value for s in Shape], default="sphere")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--step-size", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--target", help="point-cloud file to use instead of a generated shape")
    p.add_argument("--format", choices=["auto", "xyz", "bin"], default="auto")
    p.add_argument("--out", help="trace CSV path (default: stdout)")
    p.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 for byte-identical traces")
    p.add_argument("--save-final", metavar="PATH", help="save the fitted cloud")
    _add_apml_flags(p, reduction="mean")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("analyze", help="sparsity statistics of a transport plan")
    p.add_argument("pred", nargs="?")
    p.add_argument("truth", nargs="?")
    p.add_argument("--format", choices=["auto", "xyz", "bin"], default="auto")
    p.add_argument("--transport", metavar="NPY", help="analyze a saved plan instead of computing one")
    p.add_argument("--stage", choices=["pre", "post"], default="pre", help="before or after Sinkhorn")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--clamped", action="store_true", help="collapse values below 0.05 into the first bin")
    p.add_argument("--histogram", metavar="PATH", help="write histogram CSV (bin_lo, bin_hi, count)")
    _add_apml_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("emd-oracle", help="compare exact EMD against brute-force enumeration")
    _add_pair(p)
    p.set_defaults(func=cmd_emd_oracle)

    p = sub.add_parser("bench", help="forward-pass runtime sweep over N")
    p.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512, 1024])
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dtype", choices=["float64", "float32"], default="float64")
    p.add_argument("--backend", choices=["auto", "compiled", "python"], default="auto")
    p.add_argument("--out", help="CSV path (default: stdout)")
    _add_apml_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"apml: error: {exc}", file=sys.stderr)
        return 1
    except (APMLError, OSError, ValueError) as exc:
        print(f"apml: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
