import hashlib
import io
import json
import zipfile

import numpy as np
import pytest

from fairaudit import cli, data
from fairaudit.data import SyntheticSpec


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def sha(b: bytes) -> str:
    return hashlib.sha256(b).hexdigest()


@pytest.fixture
def local_manifest(tmp_path):
    """Manifest whose sources are file:// URLs: one plain file, one zip member,
    and a dead first source that must be skipped."""
    src = tmp_path / "src"
    src.mkdir()
    plain = b"39, State-gov, 77516\n"
    (src / "adult.data").write_bytes(plain)
    member = b"id,name\n1,a\n"
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        zf.writestr("pkg/compas.csv", member)
    (src / "bundle.zip").write_bytes(buf.getvalue())
    manifest = {"version": 1, "datasets": {
        "adult": {"files": [{"name": "adult.data", "sha256": sha(plain), "sources": [
            {"url": (src / "missing").as_uri()},
            {"url": (src / "adult.data").as_uri()}]}]},
        "compas": {"files": [{"name": "compas-scores-two-years.csv", "sha256": sha(member), "sources": [
            {"url": (src / "bundle.zip").as_uri(), "member": "pkg/compas.csv",
             "archive_sha256": sha(buf.getvalue())}]}]},
    }}
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    return path, manifest


def test_fetch_is_idempotent(capsys, tmp_path, local_manifest):
    path, _ = local_manifest
    out_dir = tmp_path / "data"
    code, out, _ = run(capsys, "fetch", "--dataset", "adult", "--out", out_dir, "--manifest", path)
    assert code == 0 and "downloaded" in out
    before = (out_dir / "adult" / "adult.data").read_bytes()
    code, out, _ = run(capsys, "fetch", "--dataset", "adult", "--out", out_dir, "--manifest", path)
    assert code == 0 and "already present" in out
    assert (out_dir / "adult" / "adult.data").read_bytes() == before


def test_fetch_zip_member_layout(capsys, tmp_path, local_manifest):
    path, _ = local_manifest
    code, _, _ = run(capsys, "fetch", "--dataset", "compas", "--out", tmp_path / "d", "--manifest", path)
    assert code == 0
    assert (tmp_path / "d" / "compas" / "compas-scores-two-years.csv").read_bytes() == b"id,name\n1,a\n"


def test_fetch_checksum_mismatch(capsys, tmp_path, local_manifest):
    path, manifest = local_manifest
    manifest["datasets"]["adult"]["files"][0]["sha256"] = "0" * 64
    path.write_text(json.dumps(manifest))
    code, _, err = run(capsys, "fetch", "--dataset", "adult", "--out", tmp_path / "d", "--manifest", path)
    assert code == 2
    assert "0" * 64 in err and sha(b"39, State-gov, 77516\n") in err
    assert not (tmp_path / "d" / "adult" / "adult.data").exists()


def test_fetch_all_sources_down(capsys, tmp_path, local_manifest):
    path, manifest = local_manifest
    manifest["datasets"]["adult"]["files"][0]["sources"] = [{"url": (tmp_path / "nope").as_uri()}]
    path.write_text(json.dumps(manifest))
    code, _, err = run(capsys, "fetch", "--dataset", "adult", "--out", tmp_path / "d", "--manifest", path)
    assert code == 3 and "all sources failed" in err


def write_predictions(path, rows, header="pred,label,protected"):
    path.write_text(header + "\n" + "\n".join(",".join(map(str, r)) for r in rows) + "\n")
    return path


def test_audit_perfect_predictor(capsys, tmp_path):
    rows = [(1, 1, 1), (0, 0, 1), (1, 1, 0), (0, 0, 0), (1, 1, 1), (0, 0, 0)]
    code, out, _ = run(capsys, "audit", write_predictions(tmp_path / "p.csv", rows))
    assert code == 0
    assert "| BA | 1.0000 |" in out and "| TI | 0.0000 |" in out


def test_audit_json(capsys, tmp_path):
    rows = [(1, 1, 1), (1, 0, 1), (0, 1, 0), (0, 0, 0), (1, 1, 0), (0, 0, 1)]
    code, out, _ = run(capsys, "audit", "--json", write_predictions(tmp_path / "p.csv", rows))
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"ba", "spd", "aod", "di", "eod", "ti"}
    assert doc["ba"] == pytest.approx(2 / 3)


def test_audit_weighted(capsys, tmp_path):
    rows = [(1, 1, 1, 2.0), (0, 0, 1, 1.0), (1, 1, 0, 0.5), (0, 0, 0, 1.0)]
    path = write_predictions(tmp_path / "p.csv", rows, "pred,label,protected,weight")
    code, out, _ = run(capsys, "audit", "--json", path)
    assert code == 0 and json.loads(out)["spd"] == pytest.approx(0.5 / 1.5 - 2 / 3)


def test_audit_missing_column(capsys, tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("pred,label\n1,1\n0,0\n")
    code, _, err = run(capsys, "audit", path)
    assert code == 2 and "protected" in err


def test_audit_non_binary(capsys, tmp_path):
    code, _, _ = run(capsys, "audit", write_predictions(tmp_path / "p.csv", [(2, 1, 1), (0, 0, 0)]))
    assert code == 2


def test_audit_undefined_metric(capsys, tmp_path):
    # no unprivileged positives: EOD is undefined
    rows = [(1, 1, 1), (0, 0, 1), (0, 0, 0), (1, 0, 0)]
    code, _, err = run(capsys, "audit", write_predictions(tmp_path / "p.csv", rows))
    assert code == 3 and "aod" in err


@pytest.fixture
def synthetic_csv(tmp_path):
    ds = data.synthesize(SyntheticSpec(n_total=300, positive_rate_privileged=0.7,
                                       positive_rate_unprivileged=0.35, feature_dim=3, seed=1))
    path = tmp_path / "synthetic.csv"
    data.save_dataset(ds, path)
    return path


def test_reweigh(capsys, tmp_path, synthetic_csv):
    code, out, _ = run(capsys, "reweigh", synthetic_csv, "--out", tmp_path / "o", "--json")
    assert code == 0
    coef = json.loads(out)
    assert coef["w_pup"] > 1 > coef["w_pp"]
    ds = data.load_dataset(tmp_path / "o" / "synthetic_reweighed.csv")
    assert ds.weights.sum() == pytest.approx(ds.n)
    assert set(np.round(ds.weights, 12)) == {round(coef[k], 12) for k in coef}


def test_run_writes_reports_deterministically(capsys, tmp_path, synthetic_csv):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(f"data = {synthetic_csv}\nseed = 5\nrforest.n_trees = 10\n")
    code, out, _ = run(capsys, "run", cfg, "--out", tmp_path / "a")
    assert code == 0 and "## Performance after reweighing" in out
    md = (tmp_path / "a" / "report.md").read_text()
    assert sum(1 for line in md.splitlines() if line.startswith("| ") and not line.startswith("| Model")) == 10
    code, _, _ = run(capsys, "run", cfg, "--out", tmp_path / "b")
    assert code == 0
    assert (tmp_path / "a" / "report.csv").read_bytes() == (tmp_path / "b" / "report.csv").read_bytes()
    doc = json.loads((tmp_path / "a" / "report.json").read_text())
    assert doc["config"]["seed"] == 5 and doc["sweeps"] == []


def test_sweep_writes_series(capsys, tmp_path, synthetic_csv):
    code, _, _ = run(capsys, "sweep", "--data", synthetic_csv, "--models", "gnb", "--out", tmp_path / "s")
    assert code == 0
    for phase in ("before", "after"):
        lines = (tmp_path / "s" / f"sweep_gnb_{phase}.csv").read_text().splitlines()
        assert len(lines) == 102 and lines[0].startswith("threshold,ba")


def test_flags_override_config(capsys, tmp_path, synthetic_csv):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(f"data = {synthetic_csv}\nmodels = gnb\nseed = 1\n")
    code, _, _ = run(capsys, "run", cfg, "--seed", "8", "--models", "knn", "--out", tmp_path / "o")
    assert code == 0
    doc = json.loads((tmp_path / "o" / "report.json").read_text())
    assert doc["config"]["seed"] == 8 and [m["kind"] for m in doc["config"]["models"]] == ["knn"]


@pytest.mark.parametrize("argv", [
    ["run", "--models", "svm"],
    ["run", "--test-fraction", "2"],
    ["run", "--eval-split", "valid"],
    ["frobnicate"],
    ["audit"],
])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 1


def test_missing_config_file(capsys, tmp_path):
    assert run(capsys, "run", tmp_path / "absent.cfg")[0] == 1


def test_missing_data(capsys, tmp_path):
    code, _, err = run(capsys, "run", "--data", tmp_path / "empty", "--models", "knn", "--out", tmp_path / "o")
    assert code == 2


def test_help_lists_flags(capsys):
    code, out, _ = run(capsys, "run", "--help")
    assert code == 0
    for flag in ("--dataset", "--protected", "--models", "--seed", "--test-fraction",
                 "--eval-split", "--grid", "--data", "--out", "--verbose"):
        assert flag in out


def test_prepare_real_adult(capsys, tmp_path, raw_data_dir):
    code, out, _ = run(capsys, "prepare", "--dataset", "adult", "--protected", "sex",
                       "--data", raw_data_dir, "--out", tmp_path)
    assert code == 0 and "45222 rows" in out
    ds = data.load_dataset(tmp_path / "adult_sex.csv")
    assert ds.n == 45222 and ds.d == 104
