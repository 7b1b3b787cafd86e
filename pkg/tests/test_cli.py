import csv
import json
import subprocess
import sys

import pytest

import minicpp
from chunkwise.cli import main
from chunkwise.dataio import format_brut_csv, load_brut_csv
from chunkwise.export import load_model


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("CHUNKWISE_SEED", raising=False)
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def dataset(work, capsys):
    assert run(capsys, "gen-data", "--out", "data.csv", "--jobs", "2")[0] == 0
    assert run(capsys, "split", "--data", "data.csv", "--train", "train.csv", "--test", "test.csv")[0] == 0
    return work


def test_gen_data_default(dataset):
    assert len(load_brut_csv(dataset / "data.csv")) == 288
    manifest = json.loads((dataset / "data.csv.manifest.json").read_text())
    assert manifest["command"] == "gen-data" and manifest["seed"] == 0
    assert manifest["argv"][-2:] == ["--seed", "0"]
    assert set(manifest["outputs"]) == {"data.csv"}


def test_gen_data_seed_and_env(work, capsys):
    run(capsys, "gen-data", "--out", "a.csv", "--seed", "5", "--jobs", "1")
    run(capsys, "gen-data", "--out", "b.csv", "--seed", "5", "--jobs", "4")
    assert (work / "a.csv").read_bytes() == (work / "b.csv").read_bytes()


def test_gen_data_spec_errors(work, capsys):
    assert run(capsys, "gen-data", "--spec", "missing.ini", "--out", "x.csv")[0] == 2
    (work / "bad.ini").write_text("[dmatdmatadd]\nms_values = 100\nleft_width = ?\n")
    code, _, err = run(capsys, "gen-data", "--spec", "bad.ini", "--out", "x.csv")
    assert code == 3 and "line 3" in err


def test_split_sizes(dataset):
    assert len(load_brut_csv(dataset / "train.csv")) == 192
    assert len(load_brut_csv(dataset / "test.csv")) == 96
    assert (dataset / "train.csv.split.txt").read_text().startswith("seed: 0\n")


def test_split_bad_ratio(dataset, capsys):
    assert run(capsys, "split", "--data", "data.csv", "--train", "a", "--test", "b", "--ratio", "3/2")[0] == 2


def test_train_two_example_csv(work, capsys):
    grid_cols = "perf_cs_1,perf_cs_2"
    (work / "toy2.csv").write_text(f"ms,mflop,n_thr,n_ite,{grid_cols}\n1,2.3,1,1,1000,2100\n1,1.5,1,1,2500,1200\n")
    code, out, _ = run(capsys, "train", "--data", "toy2.csv", "--model", "preto-custom", "--out", "m.json")
    assert code == 0 and "training MSOP: 1.000" in out and "nodes: 3" in out


def test_train_posto_and_bad_flags(dataset, capsys):
    assert run(capsys, "train", "--data", "train.csv", "--model", "posto-dtr", "--out", "p.json")[0] == 0
    assert load_model(dataset / "p.json").kind.value == "PosTO"
    assert run(capsys, "train", "--data", "train.csv", "--model", "preto-custom", "--out", "x.json",
               "--max-depth", "0")[0] == 2
    assert run(capsys, "train", "--data", "train.csv", "--model", "forest", "--out", "x.json")[0] == 2
    assert run(capsys, "train", "--data", "nope.csv", "--model", "random", "--out", "x.json")[0] == 2


def test_cross_validate_table_and_reproducibility(dataset, capsys):
    code, out, _ = run(capsys, "cross-validate", "--data", "train.csv", "--out", "r1.csv", "--table", "t1.txt")
    assert code == 0
    rows = (dataset / "r1.csv").read_text().splitlines()[1:]
    assert len(rows) == 5
    means = {r.split(",")[0]: float(r.split(",")[2]) for r in rows}
    assert means["random"] < 1.0
    run(capsys, "cross-validate", "--data", "train.csv", "--out", "r2.csv", "--table", "t2.txt", "--jobs", "1")
    assert (dataset / "r1.csv").read_bytes() == (dataset / "r2.csv").read_bytes()
    assert (dataset / "t1.txt").read_bytes() == (dataset / "t2.txt").read_bytes()
    assert out == (dataset / "t1.txt").read_text()


def test_cross_validate_with_oracle(dataset, capsys):
    run(capsys, "cross-validate", "--data", "train.csv", "--out", "r.csv", "--models", "random,oracle")
    with open(dataset / "r.csv", newline="") as fh:
        means = {row["model"]: float(row["msop_mean"]) for row in csv.DictReader(fh)}
    assert means["oracle"] == 1.0 and means["random"] < 1.0


def test_evaluate(dataset, capsys):
    run(capsys, "train", "--data", "train.csv", "--model", "preto-custom", "--out", "m.json")
    code, out, _ = run(capsys, "evaluate", "--data", "test.csv", "--model", "m.json")
    assert code == 0 and len(out.strip().split(".")[1]) == 3 and 0 < float(out) <= 1
    assert run(capsys, "evaluate", "--data", "test.csv", "--oracle")[1] == "1.000\n"


def test_evaluate_grid_mismatch(dataset, capsys):
    run(capsys, "train", "--data", "train.csv", "--model", "preto-custom", "--out", "m.json")
    data = load_brut_csv(dataset / "test.csv")
    text = format_brut_csv(data).splitlines()
    header = text[0].replace("perf_cs_10", "perf_cs_11")
    (dataset / "other.csv").write_text("\n".join([header] + text[1:]) + "\n")
    assert run(capsys, "evaluate", "--data", "other.csv", "--model", "m.json")[0] == 3


def test_evaluate_bad_inputs(dataset, capsys):
    (dataset / "broken.json").write_text('{"format_version": 99}')
    assert run(capsys, "evaluate", "--data", "test.csv", "--model", "broken.json")[0] == 3
    (dataset / "bad.csv").write_text("ms,mflop\n1,2\n")
    assert run(capsys, "evaluate", "--data", "bad.csv", "--oracle")[0] == 3


@pytest.mark.parametrize("n_ite,expected", [("245", "10"), ("100", "7")])
def test_predict_equal_share(dataset, capsys, n_ite, expected):
    run(capsys, "train", "--data", "train.csv", "--model", "equal-share", "--out", "eq.json")
    code, out, _ = run(capsys, "predict", "--model", "eq.json", "--ms", "1000000", "--mflop", "1.0",
                       "--n-thr", "16", "--n-ite", n_ite)
    assert code == 0 and out == expected + "\n"


def test_predict_missing_flag(dataset, capsys):
    run(capsys, "train", "--data", "train.csv", "--model", "random", "--out", "r.json")
    assert run(capsys, "predict", "--model", "r.json", "--ms", "10")[0] == 2
    code, out, _ = run(capsys, "predict", "--model", "r.json", "--ms", "10", "--mflop", "1", "--n-thr", "2",
                       "--n-ite", "4")
    assert code == 0 and 1 <= int(out) <= 10


def test_export_tree(dataset, capsys):
    run(capsys, "train", "--data", "train.csv", "--model", "preto-custom", "--out", "m.json")
    assert run(capsys, "export-tree", "--model", "m.json", "--out", "tree.hpp")[0] == 0
    first = (dataset / "tree.hpp").read_bytes()
    assert b"if (featureVector[" in first
    run(capsys, "export-tree", "--model", "m.json", "--out", "tree.hpp")
    assert (dataset / "tree.hpp").read_bytes() == first
    program = minicpp.parse(first.decode())
    model = load_model(dataset / "m.json")
    for ex in load_brut_csv(dataset / "test.csv").examples:
        assert minicpp.run(program, ex.features.as_list()) == model.predict(ex.features)


def test_export_posto_unsupported(dataset, capsys):
    run(capsys, "train", "--data", "train.csv", "--model", "posto-dtr", "--out", "p.json")
    assert run(capsys, "export-tree", "--model", "p.json", "--out", "x.hpp")[0] == 4


def test_env_seed_fallback(dataset, capsys, monkeypatch):
    monkeypatch.setenv("CHUNKWISE_SEED", "11")
    run(capsys, "split", "--data", "data.csv", "--train", "a.csv", "--test", "b.csv")
    assert json.loads((dataset / "a.csv.manifest.json").read_text())["seed"] == 11
    monkeypatch.setenv("CHUNKWISE_SEED", "eleven")
    assert run(capsys, "split", "--data", "data.csv", "--train", "a.csv", "--test", "b.csv")[0] == 2


def test_rerun_reproduces_bytes(dataset, capsys):
    run(capsys, "train", "--data", "train.csv", "--model", "preto-dtc", "--out", "m.json")
    before = (dataset / "m.json").read_bytes()
    (dataset / "m.json").unlink()
    assert run(capsys, "rerun", "m.json.manifest.json")[0] == 0
    assert (dataset / "m.json").read_bytes() == before


def test_rerun_detects_changed_input(dataset, capsys):
    run(capsys, "train", "--data", "train.csv", "--model", "random", "--out", "m.json")
    with open(dataset / "train.csv", "a") as fh:
        fh.write("\n")
    assert run(capsys, "rerun", "m.json.manifest.json")[0] == 3


def test_module_entry_point(work):
    proc = subprocess.run([sys.executable, "-m", "chunkwise", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("chunkwise ")
    proc = subprocess.run([sys.executable, "-m", "chunkwise"], capture_output=True, text=True)
    assert proc.returncode == 2
