import io
import json

import pytest

import pyage.cli as cli_module
from pyage.ablation import LADDER
from pyage.cli import dispatch


@pytest.fixture
def config_file(tmp_path):
    """A quick run configuration for the planted-partition graph."""
    path = tmp_path / "config.json"
    path.write_text(
        json.dumps(
            {
                "t": 3,
                "h": 16,
                "max_iter": 20,
                "update_every": 10,
                "lr": 0.01,
                "r_pos_st_ratio": 0.05,
                "r_pos_ed_ratio": 0.02,
                "r_neg_st_ratio": 0.4,
                "r_neg_ed_ratio": 0.5,
                "spectral_restarts": 3,
            }
        )
    )
    return path


@pytest.fixture
def run(tmp_path):
    """Call dispatch and capture both streams."""

    def runner(*argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        outcome = dispatch(list(argv), stdout=stdout, stderr=stderr)
        return outcome, stdout.getvalue(), stderr.getvalue()

    return runner


def test_spectrum(run, tmp_path):
    out = tmp_path / "spectrum"
    outcome, stdout, _ = run("spectrum", "--dataset", "sbm", "--out", str(out))
    assert outcome.exit_code == 0
    doc = json.loads(stdout)
    assert 0.0 < doc["lambda_max"] < 2.0
    assert sum(count for _, _, count in doc["bins"]) == 150
    assert outcome.artifacts == [out / "spectrum.json"]
    assert json.loads((out / "spectrum.json").read_text()) == doc


def test_spectrum_with_smoothed_features(run, tmp_path):
    out = tmp_path / "spectrum"
    outcome, stdout, _ = run(
        "spectrum", "--dataset", "sbm", "--out", str(out), "--smoothed", "--t", "2"
    )
    assert outcome.exit_code == 0
    assert [path.name for path in outcome.artifacts] == [
        "spectrum.json",
        "smoothed.tsv",
    ]
    assert len((out / "smoothed.tsv").read_text().splitlines()) == 150


def test_spectrum_estimate_only(run, tmp_path):
    outcome, stdout, _ = run(
        "spectrum", "--dataset", "sbm", "--out", str(tmp_path), "--estimate-only"
    )
    assert outcome.exit_code == 0
    assert json.loads(stdout)["bins"] == []


def test_embed_writes_snapshots(run, tmp_path, config_file):
    out = tmp_path / "embed"
    outcome, stdout, _ = run(
        "embed", "--config", str(config_file), "--dataset", "sbm", "--out", str(out)
    )
    assert outcome.exit_code == 0
    assert json.loads(stdout)["snapshots"] == 2
    assert [path.name for path in outcome.artifacts] == [
        "snapshot_10.tsv",
        "snapshot_20.tsv",
        "manifest.json",
    ]
    assert all(path.is_file() for path in outcome.artifacts)
    entries = json.loads((out / "manifest.json").read_text())["snapshots"]
    assert all(entry["dbi"] > 0 for entry in entries)
    assert all("val_auc" not in entry for entry in entries)


def test_embed_on_a_missing_dataset_fails_cleanly(run, tmp_path):
    out = tmp_path / "embed"
    outcome, stdout, stderr = run(
        "embed", "--dataset", str(tmp_path / "missing"), "--out", str(out)
    )
    assert outcome.exit_code == 1
    assert stdout == ""
    assert json.loads(stderr.splitlines()[-1])["error"] == "InputError"
    assert not out.exists()


@pytest.mark.parametrize(
    "argv",
    [
        pytest.param(("cluster", "--dataset", "sbm", "--bogus"), id="unknown_flag"),
        pytest.param(("cluster", "--dataset", "sbm", "--k", "big"), id="bad_k"),
        pytest.param(("train", "--dataset", "sbm"), id="unknown_command"),
        pytest.param((), id="no_command"),
        pytest.param(("cluster",), id="no_dataset"),
    ],
)
def test_usage_errors(run, argv):
    outcome, stdout, stderr = run(*argv)
    assert outcome.exit_code == 2
    assert stdout == ""
    assert stderr.startswith("usage:")


@pytest.mark.parametrize(
    "content",
    [
        pytest.param('{"t": -1}', id="invalid_value"),
        pytest.param('{"epochs": 3}', id="unknown_key"),
        pytest.param("{", id="not_json"),
    ],
)
def test_bad_config_exits_with_usage_code(run, tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    outcome, _, stderr = run("cluster", "--config", str(path), "--dataset", "sbm")
    assert outcome.exit_code == 2
    assert json.loads(stderr)["error"] == "ConfigurationError"


def test_help_exits_cleanly(run, capsys):
    outcome, _, _ = run("--help")
    assert outcome.exit_code == 0
    assert "embed" in capsys.readouterr().out


def test_cluster(run, tmp_path, config_file):
    argv = ("cluster", "--config", str(config_file), "--dataset", "sbm")
    outcome, stdout, _ = run(*argv, "--out", str(tmp_path))
    assert outcome.exit_code == 0
    doc = json.loads(stdout)
    assert doc == outcome.metrics
    assert set(doc) == {"acc", "nmi", "ari", "dbi", "epoch"}
    assert doc["epoch"] in (10, 20)

    _, second, _ = run(*argv, "--out", str(tmp_path))
    assert second == stdout


def test_cluster_with_another_variant(run, config_file):
    outcome, stdout, _ = run(
        "cluster", "--config", str(config_file), "--dataset", "sbm", "--variant", "ls"
    )
    assert outcome.exit_code == 0
    assert json.loads(stdout)["epoch"] == 0


def test_linkpred(run, config_file):
    outcome, stdout, _ = run(
        "linkpred", "--config", str(config_file), "--dataset", "sbm"
    )
    assert outcome.exit_code == 0
    doc = json.loads(stdout)
    assert set(doc) == {"auc", "ap", "val_auc", "epoch"}
    assert 0.0 <= doc["auc"] <= 1.0


def test_ablate(run, config_file):
    outcome, stdout, _ = run("ablate", "--config", str(config_file), "--dataset", "sbm")
    assert outcome.exit_code == 0
    rows = json.loads(stdout)["rows"]
    assert [row["name"] for row in rows] == list(LADDER)


def test_ablate_pretty(run, config_file):
    outcome, stdout, _ = run(
        "ablate", "--config", str(config_file), "--dataset", "sbm", "--pretty"
    )
    assert outcome.exit_code == 0
    lines = stdout.splitlines()
    assert lines[0].startswith("name")
    assert "-+-" in lines[1]
    assert [line.split(" | ")[0].strip() for line in lines[2:]] == list(LADDER)


def test_variants(run, config_file):
    outcome, stdout, _ = run(
        "variants", "--config", str(config_file), "--dataset", "sbm"
    )
    assert outcome.exit_code == 0
    names = [row["name"] for row in json.loads(stdout)["rows"]]
    assert names == ["ls", "ls_ra", "ls_rx", "age"]


def test_ksweep(run, config_file):
    outcome, stdout, _ = run(
        "ksweep",
        "--config",
        str(config_file),
        "--dataset",
        "sbm",
        "--variant",
        "ls",
        "--ks",
        "0.5,auto",
    )
    assert outcome.exit_code == 0
    names = [row["name"] for row in json.loads(stdout)["rows"]]
    assert names == ["k=0.5", "k=1/lambda_max"]


@pytest.fixture
def unlabeled_dir(tmp_path):
    directory = tmp_path / "unlabeled"
    directory.mkdir()
    (directory / "edges.tsv").write_text("0\t1\n1\t2\n2\t3\n")
    (directory / "features.tsv").write_text("4 2\n1\t0\n1\t0\n0\t1\n0\t1\n")
    return directory


def test_embed_without_labels_leaves_scores_out(run, tmp_path, unlabeled_dir):
    out = tmp_path / "embed"
    outcome, _, _ = run(
        "embed", "--dataset", str(unlabeled_dir), "--variant", "ls", "--out", str(out)
    )
    assert outcome.exit_code == 0
    entries = json.loads((out / "manifest.json").read_text())["snapshots"]
    assert entries == [{"epoch": 0, "file": "snapshot_0.tsv"}]


def test_negative_feature_header_fails_cleanly(run, tmp_path, unlabeled_dir):
    (unlabeled_dir / "features.tsv").write_text("-2 3\n")
    outcome, stdout, stderr = run(
        "embed", "--dataset", str(unlabeled_dir), "--out", str(tmp_path / "out")
    )
    assert outcome.exit_code == 1
    assert stdout == ""
    doc = json.loads(stderr.splitlines()[-1])
    assert doc["error"] == "InputError"
    assert doc["line"] == 1


def test_unexpected_errors_exit_with_a_document(run, monkeypatch):
    def broken(config):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli_module, "make_variant", broken)
    outcome, stdout, stderr = run("embed", "--dataset", "sbm")
    assert outcome.exit_code == 1
    assert stdout == ""
    doc = json.loads(stderr.splitlines()[-1])
    assert doc == {"error": "RuntimeError", "message": "boom"}
