"""Batch experiments: sphere and ambient sweeps, Swiss roll, MNIST, residual comparison.

Each ``run_*`` function returns a :class:`Report`; :func:`write_report`
writes ``results.csv``, ``series.csv`` and ``manifest.json``. Tasks fan out
over a process pool sized by ``WASSDIM_THREADS`` (default: CPU count).
"""
import csv
import json
import logging
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy
import sklearn

from . import __version__
from .dimension import EstimatorConfig, estimate_dimension, mle_estimate
from .ingest import filter_by_digit, load_mnist
from .synth import EmbeddingSpec, polynomial_embed, sample_sphere, swiss_roll

logger = logging.getLogger(__name__)

RESULT_COLUMNS = {
    "sphere_sweep": ["d_true", "seed", "d_hat_w1_euclid", "d_hat_w1_graph", "d_hat_mle", "status"],
    "ambient_sweep": ["D", "seed", "d_hat", "d_hat_mle", "status"],
    "swiss_roll": ["seed", "d_hat_w1_euclid", "d_hat_w1_graph", "d_hat_mle", "status"],
    "mnist": ["digit", "reg", "max_iters", "seed", "d_hat", "status"],
    "fig1_residuals": ["seed", "metric", "k", "n", "w1", "log2_n", "log2_w1", "fitted", "residual", "status"],
}
SERIES_COLUMNS = [
    "run", "metric", "k", "n", "w1", "ot_method", "reg", "iterations", "converged", "marginal_error",
]
METRIC_LABEL = {"euclidean": "euclid", "graph_geodesic": "graph"}


@dataclass
class Report:
    experiment: str
    rows: list = field(default_factory=list)
    series: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(r.get("status") == "ok" for r in self.rows if r.get("status") != "summary")


def worker_count():
    env = os.environ.get("WASSDIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning("ignoring non-integer WASSDIM_THREADS=%r", env)
    return os.cpu_count() or 1


def _map(fn, tasks):
    workers = min(worker_count(), len(tasks))
    if workers <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*tasks)))


def _estimator_config(cfg, seed, metric=None, reg=None, iters=None):
    return EstimatorConfig(
        scales=tuple(cfg.scales),
        metric=metric or cfg.metric,
        ot=cfg.ot,
        reg=cfg.reg if reg is None else reg,
        max_iters=cfg.iters if iters is None else iters,
        tol=cfg.tol,
        knn=cfg.knn,
        repetitions=cfg.repetitions,
        disjoint_scales=cfg.disjoint_scales,
        seed=seed,
    )


def _series_rows(run, estimates):
    rows = []
    for est in estimates:
        if est is None:
            continue
        transport = est.metadata["transport"]
        for k, w in zip(est.scales, est.w1):
            results = transport[k]
            reg = results[0]["reg"]
            rows.append({
                "run": run,
                "metric": METRIC_LABEL[est.metric_kind],
                "k": k,
                "n": 2 ** k,
                "w1": w,
                "ot_method": results[0]["method"],
                "reg": "" if reg is None else reg,
                "iterations": max(r["iterations_run"] for r in results),
                "converged": all(r["converged"] for r in results),
                "marginal_error": max(r["marginal_error"] for r in results),
            })
    return rows


def _d_hat(est):
    return "" if est is None else est.d_hat


def _synthetic_size(cfg):
    if cfg.n_total is not None:
        return int(cfg.n_total)
    return cfg.repetitions * sum(2 * 2 ** k for k in cfg.scales)


def _embedded_sphere(cfg, d, D, seed):
    cloud = sample_sphere(d, _synthetic_size(cfg), seed)
    spec = EmbeddingSpec(d, D, cfg.degree, seed, cfg.linear_block)
    return polynomial_embed(cloud, spec)


def _sphere_task(cfg, d, D, seed):
    run = f"d={d},D={D},seed={seed}"
    try:
        points = _embedded_sphere(cfg, d, D, seed)
        euclid, graph = estimate_dimension(points, _estimator_config(cfg, seed))
        mle = mle_estimate(points, cfg.mle_k)
    except Exception as exc:  # one failed run must not sink the sweep
        logger.exception("run %s failed", run)
        return {"d": d, "D": D, "seed": seed, "status": f"error: {exc}"}, []
    row = {
        "d": d, "D": D, "seed": seed, "euclid": _d_hat(euclid), "graph": _d_hat(graph),
        "mle": mle.d_hat, "status": "ok",
    }
    return row, _series_rows(run, (euclid, graph))


def run_sphere_sweep(cfg):
    """Estimated versus true dimension for polynomially embedded spheres."""
    D = cfg.ambient[0]
    out = _map(_sphere_task, [(cfg, d, D, s) for d in cfg.dims for s in cfg.seeds])
    report = Report("sphere_sweep")
    for row, series in out:
        report.rows.append({
            "d_true": row["d"], "seed": row["seed"], "d_hat_w1_euclid": row.get("euclid", ""),
            "d_hat_w1_graph": row.get("graph", ""), "d_hat_mle": row.get("mle", ""), "status": row["status"],
        })
        report.series.extend(series)
    for d in cfg.dims:
        ok = [r for r in report.rows if r["d_true"] == d and r["status"] == "ok"]
        report.summary[f"d={d}"] = {
            col: float(np.median([r[col] for r in ok]))
            for col in ("d_hat_w1_euclid", "d_hat_w1_graph", "d_hat_mle")
            if ok and ok[0][col] != ""
        }
    return report


def run_ambient_sweep(cfg):
    """Fixed intrinsic dimension, varying ambient dimension."""
    d = cfg.dims[0]
    out = _map(_sphere_task, [(cfg, d, D, s) for D in cfg.ambient for s in cfg.seeds])
    report = Report("ambient_sweep")
    for row, series in out:
        primary = row.get("graph", "") if cfg.metric != "euclidean" else row.get("euclid", "")
        report.rows.append({
            "D": row["D"], "seed": row["seed"], "d_hat": primary, "d_hat_mle": row.get("mle", ""),
            "status": row["status"],
        })
        report.series.extend(series)
    ok = [r for r in report.rows if r["status"] == "ok"]
    medians = {D: float(np.median([r["d_hat"] for r in ok if r["D"] == D])) for D in cfg.ambient
               if any(r["D"] == D for r in ok)}
    mle_medians = {D: float(np.median([r["d_hat_mle"] for r in ok if r["D"] == D])) for D in medians}
    if medians:
        spread = max(medians.values()) - min(medians.values())
        overall = float(np.median([r["d_hat"] for r in ok]))
        mle_spread = max(mle_medians.values()) - min(mle_medians.values())
        report.summary = {
            "d": d, "median_by_D": medians, "mle_median_by_D": mle_medians, "spread": spread,
            "overall_median": overall, "relative_spread": spread / overall, "mle_spread": mle_spread,
        }
        report.rows.append({"D": "summary", "seed": "", "d_hat": spread, "d_hat_mle": mle_spread,
                            "status": "summary"})
    return report


def _swiss_task(cfg, seed):
    run = f"swiss_roll,seed={seed}"
    try:
        points = swiss_roll(cfg.n_total, seed)
        euclid, graph = estimate_dimension(points, _estimator_config(cfg, seed))
        mle = mle_estimate(points, cfg.mle_k)
    except Exception as exc:
        logger.exception("run %s failed", run)
        return {"seed": seed, "d_hat_w1_euclid": "", "d_hat_w1_graph": "", "d_hat_mle": "",
                "status": f"error: {exc}"}, []
    row = {"seed": seed, "d_hat_w1_euclid": _d_hat(euclid), "d_hat_w1_graph": _d_hat(graph),
           "d_hat_mle": mle.d_hat, "status": "ok"}
    return row, _series_rows(run, (euclid, graph))


def run_swiss_roll(cfg):
    report = Report("swiss_roll")
    for row, series in _map(_swiss_task, [(cfg, s) for s in cfg.seeds]):
        report.rows.append(row)
        report.series.extend(series)
    ok = [r for r in report.rows if r["status"] == "ok"]
    for col in ("d_hat_w1_euclid", "d_hat_w1_graph", "d_hat_mle"):
        vals = [r[col] for r in ok if r[col] != ""]
        if vals:
            report.summary[f"median_{col}"] = float(np.median(vals))
    return report


def _require_mnist(cfg):
    if not cfg.mnist_dir:
        raise FileNotFoundError("MNIST directory not set (use --mnist-dir)")
    return load_mnist(cfg.mnist_dir, cfg.mnist_split)


def _mnist_task(cfg, digit, points, reg, iters, seed):
    run = f"digit={digit},reg={reg},seed={seed}"
    base = {"digit": digit, "reg": reg, "max_iters": iters, "seed": seed}
    try:
        _, graph = estimate_dimension(points, _estimator_config(cfg, seed, metric="graph", reg=reg, iters=iters))
    except Exception as exc:
        logger.exception("run %s failed", run)
        return dict(base, d_hat="", status=f"error: {exc}"), []
    return dict(base, d_hat=graph.d_hat, status="ok"), _series_rows(run, (graph,))


def run_mnist(cfg):
    """Graph-metric estimate per digit and per (reg, iterations) setting."""
    data = _require_mnist(cfg)
    tasks = []
    for digit in cfg.digits:
        points = filter_by_digit(data, digit)
        for reg, iters in cfg.reg_settings:
            for seed in cfg.seeds:
                tasks.append((cfg, digit, points, reg, iters, seed))
    report = Report("mnist")
    for row, series in _map(_mnist_task, tasks):
        report.rows.append(row)
        report.series.extend(series)
    for digit in cfg.digits:
        for reg, _ in cfg.reg_settings:
            vals = [r["d_hat"] for r in report.rows
                    if r["digit"] == digit and r["reg"] == reg and r["status"] == "ok"]
            if vals:
                report.summary[f"digit={digit},reg={reg}"] = float(np.median(vals))
    return report


def _fig1_task(cfg, points, seed):
    run = f"digit={cfg.digit},seed={seed}"
    try:
        euclid, graph = estimate_dimension(points, _estimator_config(cfg, seed, metric="both"))
    except Exception as exc:
        logger.exception("run %s failed", run)
        return seed, None, None, str(exc)
    return seed, euclid, graph, None


def run_fig1(cfg):
    """Euclidean versus graph-geodesic log-log series and their fit residuals."""
    data = _require_mnist(cfg)
    points = filter_by_digit(data, cfg.digit)
    report = Report("fig1_residuals")
    per_seed = {}
    for seed, euclid, graph, err in _map(_fig1_task, [(cfg, points, s) for s in cfg.seeds]):
        if err is not None:
            report.rows.append({c: "" for c in RESULT_COLUMNS["fig1_residuals"]} | {"seed": seed, "status": f"error: {err}"})
            continue
        for est in (euclid, graph):
            for k, w, res in zip(est.scales, est.w1, est.residuals):
                fitted = est.intercept + est.slope * k
                report.rows.append({
                    "seed": seed, "metric": METRIC_LABEL[est.metric_kind], "k": k, "n": 2 ** k, "w1": w,
                    "log2_n": float(k), "log2_w1": float(np.log2(w)), "fitted": fitted, "residual": res,
                    "status": "ok",
                })
        report.series.extend(_series_rows(f"digit={cfg.digit},seed={seed}", (euclid, graph)))
        per_seed[seed] = {
            "d_hat_euclid": euclid.d_hat, "d_hat_graph": graph.d_hat,
            "rss_euclid": euclid.rss, "rss_graph": graph.rss,
            "graph_rss_le_euclid": graph.rss <= euclid.rss,
        }
    report.summary = {
        "digit": cfg.digit,
        "per_seed": per_seed,
        "seeds_graph_rss_le_euclid": sum(v["graph_rss_le_euclid"] for v in per_seed.values()),
    }
    return report


RUNNERS = {
    "sphere_sweep": run_sphere_sweep,
    "ambient_sweep": run_ambient_sweep,
    "swiss_roll": run_swiss_roll,
    "mnist": run_mnist,
    "fig1_residuals": run_fig1,
}


def run_experiment(cfg):
    return RUNNERS[cfg.experiment](cfg)


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k, "")) for k in columns})


def versions():
    return {
        "wassdim": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "scikit-learn": sklearn.__version__,
    }


def write_report(report, cfg, out_dir=None):
    """Write ``results.csv``, ``series.csv`` and ``manifest.json``; return their paths."""
    out_dir = out_dir or cfg.out
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "results": os.path.join(out_dir, "results.csv"),
        "series": os.path.join(out_dir, "series.csv"),
        "manifest": os.path.join(out_dir, "manifest.json"),
    }
    _write_csv(paths["results"], RESULT_COLUMNS[report.experiment], report.rows)
    _write_csv(paths["series"], SERIES_COLUMNS, report.series)
    manifest = {
        "config": cfg.to_dict(),
        "seeds": list(cfg.seeds),
        "versions": versions(),
        "status": "ok" if report.ok else "partial_failure",
        "summary": report.summary,
        "outputs": {k: os.path.basename(v) for k, v in paths.items()},
    }
    with open(paths["manifest"], "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=_json_default)
    return paths


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
