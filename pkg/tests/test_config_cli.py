import csv
import json

import pytest

from wassdim.cli import main
from wassdim.config import SPHERE_KNN, ConfigError, parse_config, parse_scales


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def test_empty_file_gives_defaults(tmp_path):
    f = tmp_path / "empty.json"
    f.write_text("")
    cfg = parse_config(str(f))
    assert cfg.experiment == "sphere_sweep"
    assert cfg.scales == [5, 6, 7, 8, 9, 10]
    assert cfg.seeds == [0, 1, 2, 3, 4]
    assert cfg.ot == "exact" and cfg.metric == "both"
    assert cfg.dims == [2, 4, 8] and cfg.ambient == [20]
    assert cfg.knn == SPHERE_KNN


def test_corpus_defaults():
    cfg = parse_config(experiment="mnist")
    assert cfg.scales == [5, 6, 7, 8, 9]
    assert cfg.ot == "sinkhorn" and cfg.metric == "graph"
    assert cfg.reg_settings == [[0.1, 10000], [0.05, 30000]]
    assert parse_config(experiment="swiss_roll").n_total == 4096
    assert parse_config(experiment="ambient_sweep").ambient == [20, 50, 100]


def test_scales_not_increasing(tmp_path):
    with pytest.raises(ConfigError, match="scales"):
        parse_config(write_json(tmp_path / "c.json", {"scales": [10, 5]}))


def test_flags_override_file(tmp_path):
    path = write_json(tmp_path / "c.json", {"ot": "exact", "reg": 0.5})
    cfg = parse_config(path, ot="sinkhorn", reg=0.1)
    assert cfg.ot == "sinkhorn" and cfg.reg == 0.1
    assert parse_config(path, ot=None).ot == "exact"


def test_unknown_keys_listed(tmp_path):
    with pytest.raises(ConfigError, match="bogus, wat"):
        parse_config(write_json(tmp_path / "c.json", {"wat": 1, "bogus": 2}))


@pytest.mark.parametrize("bad, field", [
    ({"reg": 0}, "reg"), ({"seeds": []}, "seeds"), ({"metric": "l1"}, "metric"),
    ({"ambient": [3], "dims": [4]}, "ambient"), ({"digits": [11]}, "digits"), ({"ot": "emd"}, "ot"),
])
def test_invalid_ranges_name_field(bad, field):
    with pytest.raises(ConfigError, match=field):
        parse_config(**bad)


def test_invalid_json(tmp_path):
    f = tmp_path / "c.json"
    f.write_text("{nope")
    with pytest.raises(ConfigError, match="invalid JSON"):
        parse_config(str(f))


def test_parse_scales():
    assert parse_scales("5..7") == [5, 6, 7]
    assert parse_scales("4,6") == [4, 6]
    with pytest.raises(ConfigError):
        parse_scales("a..b")


def read_csv(path):
    with open(path) as f:
        return list(csv.reader(f))


SMALL = ["--scales", "4..6", "--seeds", "2", "--dims", "2", "--knn", "10"]


def test_cli_writes_outputs_and_rerun_is_bit_exact(tmp_path):
    out = tmp_path / "run1"
    assert main(["sphere_sweep", *SMALL, "--out", str(out)]) == 0
    rows = read_csv(out / "results.csv")
    assert rows[0] == ["d_true", "seed", "d_hat_w1_euclid", "d_hat_w1_graph", "d_hat_mle", "status"]
    assert len(rows) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seeds"] == [0, 1] and "numpy" in manifest["versions"]
    assert manifest["config"]["ot"] == "exact"

    out2 = tmp_path / "run2"
    assert main(["sphere_sweep", "--config", str(out / "manifest.json"), "--out", str(out2)]) == 0
    for name in ("results.csv", "series.csv"):
        assert (out / name).read_bytes() == (out2 / name).read_bytes()


def test_cli_config_error_exit_code(tmp_path, capsys):
    assert main(["sphere_sweep", "--config", write_json(tmp_path / "c.json", {"nope": 1})]) == 2
    assert "nope" in capsys.readouterr().err


def test_cli_missing_mnist_exit_code(tmp_path):
    assert main(["mnist", "--mnist-dir", str(tmp_path), "--out", str(tmp_path / "o")]) == 1


def test_cli_partial_failure_exit_code(tmp_path):
    # n_total below the required sample budget makes every run fail
    code = main(["swiss_roll", "--scales", "4..6", "--seeds", "1", "--n-total", "50", "--out", str(tmp_path)])
    assert code == 1
    rows = read_csv(tmp_path / "results.csv")
    assert rows[1][-1].startswith("error")
    assert json.loads((tmp_path / "manifest.json").read_text())["status"] == "partial_failure"
