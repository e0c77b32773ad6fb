"""Command-line entry point: ``wassdim <experiment> [options]``."""
import argparse
import logging
import sys

from .config import EXPERIMENTS, ConfigError, parse_config, parse_scales
from .experiments import run_experiment, write_report

logger = logging.getLogger("wassdim")


def _int_list(text):
    return [int(t) for t in text.split(",") if t.strip()]


def build_parser():
    p = argparse.ArgumentParser(
        prog="wassdim",
        description="Intrinsic dimension from Wasserstein-1 decay between subsamples.",
    )
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="JSON config file or a previous run's manifest.json")
    p.add_argument("--scales", type=parse_scales, help="scales k (n = 2^k), e.g. 5..10 or 5,7,9")
    p.add_argument("--seeds", type=int, help="number of seeds, run as 0..N-1")
    p.add_argument("--ot", choices=("exact", "sinkhorn"))
    p.add_argument("--reg", type=float, help="absolute entropic regularization")
    p.add_argument("--iters", type=int, help="maximum Sinkhorn iterations")
    p.add_argument("--metric", choices=("euclid", "graph", "both"))
    p.add_argument("--knn", type=int, help="starting k of the kNN graph")
    p.add_argument("--degree", type=int, help="polynomial embedding degree")
    p.add_argument("--ambient", type=_int_list, help="ambient dimension(s) D, comma separated")
    p.add_argument("--dims", type=_int_list, help="intrinsic dimension(s) d, comma separated")
    p.add_argument("--digits", type=_int_list, help="MNIST digits, comma separated")
    p.add_argument("--digit", type=int, help="MNIST digit for fig1_residuals")
    p.add_argument("--mnist-dir", dest="mnist_dir")
    p.add_argument("--mnist-split", dest="mnist_split", choices=("train", "t10k"))
    p.add_argument("--n-total", dest="n_total", type=int, help="Swiss roll sample size")
    p.add_argument("--linear-block", dest="linear_block", choices=("random", "identity", "orthogonal"))
    p.add_argument("--out", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
    if args.seeds is not None:
        overrides["seeds"] = list(range(args.seeds))
    try:
        cfg = parse_config(args.config, **overrides)
    except ConfigError as exc:
        print(f"wassdim: config error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run_experiment(cfg)
    except FileNotFoundError as exc:
        print(f"wassdim: {exc}", file=sys.stderr)
        return 1
    paths = write_report(report, cfg)
    for name, path in paths.items():
        logger.info("wrote %s: %s", name, path)
    failed = [r for r in report.rows if r.get("status") not in ("ok", "summary")]
    if failed:
        print(f"wassdim: {len(failed)} of {len(report.rows)} rows failed; see {paths['results']}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
