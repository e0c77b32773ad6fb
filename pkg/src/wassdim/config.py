"""Experiment configuration: JSON file plus command-line overrides."""
import json
from dataclasses import asdict, dataclass, fields

EXPERIMENTS = ("sphere_sweep", "ambient_sweep", "swiss_roll", "mnist", "fig1_residuals")
METRIC_ALIASES = {"euclid": "euclidean", "euclidean": "euclidean", "graph": "graph", "both": "both"}

_SYNTHETIC_SCALES = [5, 6, 7, 8, 9, 10]
_MNIST_SCALES = [5, 6, 7, 8, 9]


# Neighbor count for embedded-sphere runs; the generic default undershoots in
# high intrinsic dimension (see README).
SPHERE_KNN = 128


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Resolved settings of one experiment run.

    ``None`` fields are filled with per-experiment defaults by
    :func:`parse_config`.
    """

    experiment: str = "sphere_sweep"
    scales: list = None
    seeds: list = None
    ot: str = None
    reg: float = 0.1
    iters: int = None
    tol: float = 1e-9
    metric: str = None
    knn: int = None
    degree: int = 3
    linear_block: str = "random"
    ambient: list = None
    dims: list = None
    digits: list = None
    digit: int = 7
    reg_settings: list = None
    mnist_dir: str = None
    mnist_split: str = "train"
    n_total: int = None
    mle_k: int = 10
    repetitions: int = 1
    disjoint_scales: object = "auto"
    out: str = "results"

    def to_dict(self):
        return asdict(self)


def _defaults(experiment):
    corpus = experiment in ("mnist", "fig1_residuals")
    d = {
        "scales": list(_MNIST_SCALES if corpus else _SYNTHETIC_SCALES),
        "seeds": [0, 1, 2, 3, 4],
        "ot": "sinkhorn" if corpus else "exact",
        "metric": "graph" if experiment == "mnist" else "both",
        "ambient": [20, 50, 100] if experiment == "ambient_sweep" else [20],
        "dims": [4] if experiment == "ambient_sweep" else [2, 4, 8],
        "digits": list(range(10)),
        "reg_settings": [[0.1, 10000], [0.05, 30000]],
    }
    if experiment == "sphere_sweep" or experiment == "ambient_sweep":
        d["knn"] = SPHERE_KNN
    if experiment == "swiss_roll":
        d["n_total"] = 4096
    return d



def _as_int_list(value, field_name):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    try:
        out = [int(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{field_name}: expected a list of integers, got {value!r}") from None
    if any(o != v for o, v in zip(out, value)):
        raise ConfigError(f"{field_name}: expected integers, got {value!r}")
    return out


def parse_scales(text):
    """Parse ``"5..10"`` or ``"5,6,7"`` into a list of ints."""
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"scales: cannot parse {text!r}") from None


def _validate(cfg):
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: must be one of {EXPERIMENTS}, got {cfg.experiment!r}")
    cfg.scales = _as_int_list(cfg.scales, "scales")
    if len(cfg.scales) < 2:
        raise ConfigError(f"scales: need at least 2 scales, got {cfg.scales}")
    if any(b <= a for a, b in zip(cfg.scales, cfg.scales[1:])):
        raise ConfigError(f"scales: not strictly increasing: {cfg.scales}")
    if cfg.scales[0] < 1:
        raise ConfigError(f"scales: must be >= 1, got {cfg.scales}")
    cfg.seeds = _as_int_list(cfg.seeds, "seeds")
    if not cfg.seeds or min(cfg.seeds) < 0:
        raise ConfigError(f"seeds: need a nonempty list of nonnegative seeds, got {cfg.seeds}")
    if cfg.ot not in ("exact", "sinkhorn"):
        raise ConfigError(f"ot: must be 'exact' or 'sinkhorn', got {cfg.ot!r}")
    if cfg.metric not in METRIC_ALIASES:
        raise ConfigError(f"metric: must be euclid, graph or both, got {cfg.metric!r}")
    cfg.metric = METRIC_ALIASES[cfg.metric]
    if not (isinstance(cfg.reg, (int, float)) and cfg.reg > 0):
        raise ConfigError(f"reg: must be positive, got {cfg.reg!r}")
    if cfg.iters is not None and int(cfg.iters) < 1:
        raise ConfigError(f"iters: must be >= 1, got {cfg.iters}")
    if not cfg.tol > 0:
        raise ConfigError(f"tol: must be positive, got {cfg.tol}")
    if cfg.knn is not None and int(cfg.knn) < 1:
        raise ConfigError(f"knn: must be >= 1, got {cfg.knn}")
    if int(cfg.degree) < 1:
        raise ConfigError(f"degree: must be >= 1, got {cfg.degree}")
    if cfg.linear_block not in ("random", "identity", "orthogonal"):
        raise ConfigError(f"linear_block: must be random, identity or orthogonal, got {cfg.linear_block!r}")
    cfg.ambient = _as_int_list(cfg.ambient, "ambient")
    cfg.dims = _as_int_list(cfg.dims, "dims")
    if not cfg.dims or min(cfg.dims) < 1:
        raise ConfigError(f"dims: need positive intrinsic dimensions, got {cfg.dims}")
    if not cfg.ambient or any(D < d + 1 for D in cfg.ambient for d in cfg.dims):
        raise ConfigError(f"ambient: every D must exceed every d, got ambient={cfg.ambient}, dims={cfg.dims}")
    cfg.digits = _as_int_list(cfg.digits, "digits")
    if any(not 0 <= g <= 9 for g in cfg.digits + [cfg.digit]):
        raise ConfigError("digits: must lie in 0..9")
    try:
        cfg.reg_settings = [[float(r), int(i)] for r, i in cfg.reg_settings]
    except (TypeError, ValueError):
        raise ConfigError(f"reg_settings: expected [[reg, iters], ...], got {cfg.reg_settings!r}") from None
    if cfg.mnist_split not in ("train", "t10k"):
        raise ConfigError(f"mnist_split: must be train or t10k, got {cfg.mnist_split!r}")
    if cfg.n_total is not None and int(cfg.n_total) < 2:
        raise ConfigError(f"n_total: must be >= 2, got {cfg.n_total}")
    if int(cfg.mle_k) < 2:
        raise ConfigError(f"mle_k: must be >= 2, got {cfg.mle_k}")
    if int(cfg.repetitions) < 1:
        raise ConfigError(f"repetitions: must be >= 1, got {cfg.repetitions}")
    if cfg.disjoint_scales not in ("auto", True, False):
        raise ConfigError(f"disjoint_scales: must be auto, true or false, got {cfg.disjoint_scales!r}")
    return cfg


def load_config_file(path):
    """Read a config file; a run manifest (``{"config": {...}, ...}``) is unwrapped."""
    with open(path) as f:
        text = f.read()
    if not text.strip():
        return {}
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    if "config" in data and "versions" in data:
        data = data["config"]
    return data


def parse_config(path=None, **overrides):
    """Build a validated :class:`ExperimentConfig`.

    Values come from the JSON file at ``path`` (if any), then ``overrides``
    (non-``None`` entries win), then per-experiment defaults.
    """
    values = load_config_file(path) if path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    cfg = ExperimentConfig(**values)
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: must be one of {EXPERIMENTS}, got {cfg.experiment!r}")
    for name, default in _defaults(cfg.experiment).items():
        if getattr(cfg, name) is None:
            setattr(cfg, name, default)
    return _validate(cfg)
