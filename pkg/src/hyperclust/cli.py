"""Command line entry point: ``hyperclust {cluster,experiment,synth}``."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .core import (
    DegenerateGraphError,
    DegenerateScaleError,
    InvalidInputError,
    InvalidParameterError,
    NumericalError,
)
from .evaluation import accuracy, nmi
from .fusion import ABLATIONS, DEFAULT_WEIGHTS
from .harness import (
    ExperimentConfig,
    ParseError,
    ResultRecord,
    emit_results,
    iter_pipeline,
    load_config,
    load_csv,
    run_method,
    select_sigma,
    summarize,
    synth_blobs,
    write_csv,
)
from .pairwise import default_sigma

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hyperclust", description="Hypergraph spectral clustering with context-aware similarity.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("cluster", help="cluster one CSV file")
    c.add_argument("--data", required=True, type=Path)
    c.add_argument("--kappa", required=True, type=int)
    w = c.add_mutually_exclusive_group()
    w.add_argument("--ablation", choices=ABLATIONS, type=str.upper)
    c.add_argument("--alpha", type=float, default=DEFAULT_WEIGHTS[0])
    c.add_argument("--beta", type=float, default=DEFAULT_WEIGHTS[1])
    w.add_argument("--csc", action="store_true", help="classic spectral clustering on the kernel matrix")
    c.add_argument("--criterion", choices=("dhpc", "nc"), default="dhpc", type=str.lower)
    s = c.add_mutually_exclusive_group()
    s.add_argument("--sigma", type=float)
    s.add_argument("--sigma-grid", action="store_true")
    c.add_argument("--k", type=int, default=3)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True, type=Path)

    e = sub.add_parser("experiment", help="run a sweep described by a key = value config file")
    e.add_argument("--config", required=True, type=Path)
    e.add_argument("--out", required=True, type=Path)
    e.add_argument("--workers", type=int)

    y = sub.add_parser("synth", help="write a synthetic Gaussian-blob CSV")
    y.add_argument("--blobs", type=int, required=True)
    y.add_argument("--per-cluster", type=int, required=True)
    y.add_argument("--dim", type=int, default=2)
    y.add_argument("--separation", type=float, default=6.0)
    y.add_argument("--seed", type=int, default=0)
    y.add_argument("--out", required=True, type=Path)
    return p


def _write_labels(path: Path, labels) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "cluster"])
        for i, lab in enumerate(labels):
            w.writerow([i, int(lab)])


def _cmd_cluster(args) -> int:
    method = "CSC" if args.csc else (args.ablation or "PKO")
    dataset = load_csv(args.data)
    cfg = ExperimentConfig(
        data=str(args.data), kappa=args.kappa, sigma=args.sigma, sigma_grid=args.sigma_grid,
        k=args.k, alpha=args.alpha, beta=args.beta, method=method, criterion=args.criterion,
        seeds=(args.seed,),
    )
    sigma = args.sigma
    if sigma is None:
        sigma = select_sigma(cfg, dataset) if args.sigma_grid else default_sigma(dataset)
    t0 = time.perf_counter()
    out = run_method(dataset, cfg.params(dataset, args.seed, sigma), method, args.criterion)
    labelled = dataset.labels is not None
    rec = ResultRecord(
        fingerprint=cfg.fingerprint(), method=method, criterion=args.criterion, corruption="noise",
        level=0.0, seed=args.seed, sigma=sigma,
        nmi=nmi(out.labels, dataset.labels) if labelled else float("nan"),
        accuracy=accuracy(out.labels, dataset.labels) if labelled else float("nan"),
        objective=out.objective, iterations=out.iterations, converged=out.converged,
        seconds=time.perf_counter() - t0,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    _write_labels(args.out / "labels.csv", out.labels)
    emit_results([rec], args.out)
    msg = f"{method}+{args.criterion}: {len(np.unique(out.labels))} clusters, sigma={sigma:.6g}"
    if labelled:
        msg += f", NMI={rec.nmi:.4f}, accuracy={rec.accuracy:.4f}"
    print(msg)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    if args.workers:
        cfg.workers = args.workers
    records = []
    for rec in iter_pipeline(cfg):
        logging.getLogger("hyperclust").info(
            "level=%s seed=%s nmi=%.4f acc=%.4f%s", rec.level, rec.seed, rec.nmi, rec.accuracy,
            f" ERROR {rec.error}" if rec.error else "",
        )
        records.append(rec)
    emit_results(records, args.out)
    for row in summarize(records):
        print(f"{row[1]}+{row[2]} {row[3]}={row[4]:g}: NMI {row[7]:.4f} +/- {row[8]:.4f}, "
              f"accuracy {row[9]:.4f} +/- {row[10]:.4f} ({row[5]} runs, {row[6]} failed)")
    return EXIT_OK


def _cmd_synth(args) -> int:
    ds = synth_blobs(args.blobs, args.per_cluster, args.dim, args.separation, args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(ds, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"cluster": _cmd_cluster, "experiment": _cmd_experiment, "synth": _cmd_synth}
    try:
        return handlers[args.command](args)
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, InvalidInputError, DegenerateScaleError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, DegenerateGraphError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
