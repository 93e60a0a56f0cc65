import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from advdist import (
    AttackConfig,
    CleverConfig,
    DataError,
    Dataset,
    Dense,
    Norm,
    SecondAttackConfig,
    ShapeError,
    evaluate,
    forward,
    load_dataset,
    load_model,
    write_report,
)
from advdist.cli import main
from advdist.report import RECORD_COLUMNS


def write_model(path, doc):
    path.write_text(json.dumps(doc))
    return path


IDENTITY_DOC = {
    "num_classes": 2,
    "layers": [{"type": "dense", "weights": [[1.0, 0.0], [0.0, 1.0]], "bias": [0.0, 0.0]}],
}


def separable_model_doc():
    return {
        "num_classes": 2,
        "layers": [{"type": "dense", "weights": [[2.0, 0.0], [0.0, 0.0]], "bias": [-1.0, 0.0]}],
    }


def write_dataset(path, rows, header="label,f0,f1"):
    path.write_text("\n".join([header] + rows) + "\n")
    return path


class TestLoadModel:
    def test_identity_model(self, tmp_path):
        net = load_model(write_model(tmp_path / "m.json", IDENTITY_DOC))
        assert net.num_classes == 2
        assert len(net.layers) == 1
        assert isinstance(net.layers[0], Dense)

    def test_truncated_file_is_a_data_error(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(IDENTITY_DOC)[:25])
        with pytest.raises(DataError, match="JSON"):
            load_model(path)

    def test_bad_layer_reports_its_index(self, tmp_path):
        doc = {
            "num_classes": 2,
            "layers": [
                {"type": "dense", "weights": [[1.0, 0.0], [0.0, 1.0]], "bias": [0.0, 0.0]},
                {"type": "maxpool"},
            ],
        }
        with pytest.raises(DataError, match="layer 1"):
            load_model(write_model(tmp_path / "m.json", doc))

    def test_dimension_chain_break_is_a_shape_error(self, tmp_path):
        doc = {
            "num_classes": 2,
            "layers": [
                {"type": "dense", "weights": [[1.0, 0.0, 0.0]], "bias": [0.0]},
                {"type": "dense", "weights": [[1.0, 1.0], [0.0, 1.0]], "bias": [0.0, 0.0]},
            ],
        }
        with pytest.raises(ShapeError):
            load_model(write_model(tmp_path / "m.json", doc))

    def test_round_trip_against_inline_arithmetic(self, tmp_path):
        rng = np.random.default_rng(0)
        w1 = rng.normal(size=(4, 3)).round(6)
        b1 = rng.normal(size=4).round(6)
        w2 = rng.normal(size=(2, 4)).round(6)
        b2 = rng.normal(size=2).round(6)
        doc = {
            "num_classes": 2,
            "layers": [
                {"type": "dense", "weights": w1.tolist(), "bias": b1.tolist()},
                {"type": "relu"},
                {"type": "dense", "weights": w2.tolist(), "bias": b2.tolist()},
            ],
        }
        net = load_model(write_model(tmp_path / "m.json", doc))
        x = rng.uniform(size=3)
        expected = w2 @ np.maximum(w1 @ x + b1, 0.0) + b2
        assert np.max(np.abs(forward(net, x).logits - expected)) < 1e-5


class TestLoadDataset:
    def test_three_rows(self, tmp_path):
        ds = load_dataset(
            write_dataset(tmp_path / "d.csv", ["0,0.1,0.2", "1,0.5,0.5", "0,1.0,0.0"])
        )
        assert len(ds) == 3
        assert ds.labels.tolist() == [0, 1, 0]

    def test_out_of_range_feature_names_the_row(self, tmp_path):
        path = write_dataset(tmp_path / "d.csv", ["0,0.1,0.2", "1,1.5,0.5"])
        with pytest.raises(DataError, match="line 3"):
            load_dataset(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("")
        with pytest.raises(DataError):
            load_dataset(path)
        path.write_text("label,f0,f1\n")
        with pytest.raises(DataError, match="no data rows"):
            load_dataset(path)

    def test_bad_header_rejected(self, tmp_path):
        path = write_dataset(tmp_path / "d.csv", ["0,0.1,0.2"], header="target,f0,f1")
        with pytest.raises(DataError, match="label"):
            load_dataset(path)


def small_report(tmp_path):
    net = load_model(write_model(tmp_path / "m.json", separable_model_doc()))
    dataset = Dataset(
        inputs=np.array([[0.7, 0.5], [0.62, 0.4], [0.8, 0.3]]), labels=np.array([1, 0, 0])
    )
    return evaluate(
        net,
        dataset,
        AttackConfig(p=Norm.L2, eps_step=0.01, max_iters=100),
        SecondAttackConfig(kind="carlini_wagner_l2", p=Norm.L2, iterations=50, binary_search_steps=10),
        CleverConfig(radius=1.0, p=Norm.L2, nb_batches=5, samples_per_batch=10),
    )


class TestWriteReport:
    def test_files_and_empty_fields(self, tmp_path):
        report = small_report(tmp_path)
        write_report(report, tmp_path / "out")
        with open(tmp_path / "out" / "records.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == RECORD_COLUMNS
        misclassified = next(r for r in rows if r["winner"] == "misclassified")
        assert misclassified["clever_score"] == ""
        assert misclassified["distance_alg1"] == ""
        assert (tmp_path / "out" / "distances.svg").exists()
        assert (tmp_path / "out" / "summary.csv").exists()

    def test_distance_column_is_monotone(self, tmp_path):
        report = small_report(tmp_path)
        write_report(report, tmp_path / "out")
        with open(tmp_path / "out" / "records.csv", newline="") as fh:
            dists = [float(r["distance_min"]) for r in csv.DictReader(fh)]
        assert dists == sorted(dists)

    def test_floats_round_trip_at_full_precision(self, tmp_path):
        report = small_report(tmp_path)
        write_report(report, tmp_path / "out")
        with open(tmp_path / "out" / "records.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        by_index = {r.index: r for r in report.records}
        for row in rows:
            rec = by_index[int(row["index"])]
            assert float(row["distance_min"]) == rec.distance_min
            if row["distance_alg1"]:
                assert float(row["distance_alg1"]) == rec.distance_alg1

    def test_rerun_with_same_seed_is_byte_identical(self, tmp_path):
        write_report(small_report(tmp_path), tmp_path / "a")
        write_report(small_report(tmp_path), tmp_path / "b")
        a = (tmp_path / "a" / "records.csv").read_bytes()
        b = (tmp_path / "b" / "records.csv").read_bytes()
        assert a == b


@pytest.fixture
def cli_files(tmp_path):
    model = write_model(tmp_path / "model.json", separable_model_doc())
    data = write_dataset(
        tmp_path / "data.csv", ["1,0.7,0.5", "0,0.62,0.4", "0,0.8,0.3"]
    )
    return model, data, tmp_path / "out"


class TestCli:
    def run(self, *args):
        return CliRunner().invoke(main, [str(a) for a in args])

    def test_evaluate_happy_path(self, cli_files):
        model, data, out = cli_files
        result = self.run(
            "evaluate", "--model", model, "--data", data, "--norm", "2", "--eps-step", "0.01",
            "--max-iters", "100", "--second", "cw", "--second-iters", "50",
            "--clever-preset", "20x10", "--seed", "0", "--out", out,
        )
        assert result.exit_code == 0, result.output
        assert (out / "records.csv").exists()
        assert (out / "distances.svg").exists()
        assert "mean adversarial distance" in result.output

    def test_attack_subcommand(self, cli_files):
        model, data, out = cli_files
        result = self.run(
            "attack", "--model", model, "--data", data, "--norm", "2", "--eps-step", "0.01",
            "--max-iters", "100", "--second", "none", "--seed", "1", "--out", out,
        )
        assert result.exit_code == 0, result.output
        with open(out / "records.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert all(r["clever_score"] == "" for r in rows)

    def test_clever_subcommand(self, cli_files):
        model, data, out = cli_files
        result = self.run(
            "clever", "--model", model, "--data", data, "--norm", "2", "--radius", "0.5",
            "--clever-preset", "20x10", "--seed", "2", "--out", out,
        )
        assert result.exit_code == 0, result.output
        with open(out / "clever.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 3
        assert rows[0]["clever_score"] == ""  # misclassified image left blank

    def test_tradeoff_subcommand(self, cli_files):
        model, data, out = cli_files
        result = self.run(
            "tradeoff", "--model", model, "--data", data, "--norm", "2", "--eps-step", "0.02",
            "--halvings", "2", "--max-iters", "100", "--seed", "3", "--out", out,
        )
        assert result.exit_code == 0, result.output
        assert (out / "tradeoff.csv").exists()
        assert (out / "tradeoff.svg").exists()

    def test_missing_model_path_is_a_config_error(self, cli_files):
        _, data, out = cli_files
        result = self.run(
            "evaluate", "--model", "nope.json", "--data", data, "--seed", "0", "--out", out
        )
        assert result.exit_code == 2

    def test_second_attack_norm_mismatch_is_a_config_error(self, cli_files):
        model, data, out = cli_files
        result = self.run(
            "attack", "--model", model, "--data", data, "--norm", "2", "--second", "ead",
            "--seed", "0", "--out", out,
        )
        assert result.exit_code == 2

    def test_malformed_model_is_a_data_error(self, cli_files, tmp_path):
        _, data, out = cli_files
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        result = self.run(
            "evaluate", "--model", bad, "--data", data, "--seed", "0", "--out", out
        )
        assert result.exit_code == 3

    def test_out_of_range_feature_is_a_data_error(self, cli_files, tmp_path):
        model, _, out = cli_files
        bad = write_dataset(tmp_path / "bad.csv", ["0,0.5,1.7"])
        result = self.run(
            "evaluate", "--model", model, "--data", bad, "--seed", "0", "--out", out
        )
        assert result.exit_code == 3

    def test_seed_is_mandatory(self, cli_files):
        model, data, out = cli_files
        result = self.run("evaluate", "--model", model, "--data", data, "--out", out)
        assert result.exit_code == 2
