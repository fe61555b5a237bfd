import csv
import json
import shutil

import pytest

from reselim.cli import (EXIT_GUARD, EXIT_IO, EXIT_PARSE, EXIT_USAGE, ExperimentConfig, main)



@pytest.fixture
def star_file(tmp_path):
    assert main(["gen", "star", "--leaves", "10", "--p", "0.5", "--out-dir", str(tmp_path),
                 "-q"]) == 0
    return tmp_path / "star.txt"


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_gen_star(star_file):
    lines = star_file.read_text().splitlines()
    assert len(lines) == 10 and all(l.split()[2] == "0.5" for l in lines)
    manifest = json.loads((star_file.parent / "manifest_gen.json").read_text())
    assert manifest["kind"] == "star" and manifest["params"]["leaves"] == 10


def test_gen_random_clique(tmp_path):
    assert main(["gen", "random", "--n", "5", "--edge-prob", "1", "--p", "0.3", "--seed", "7",
                 "--out-dir", str(tmp_path), "-q"]) == 0
    assert len((tmp_path / "random.txt").read_text().splitlines()) == 20


def test_gen_usage_errors(tmp_path):
    assert main(["gen", "star", "--leaves", "0", "--p", "0.5", "--out-dir", str(tmp_path),
                 "-q"]) == EXIT_USAGE
    assert main(["gen", "star", "--leaves", "3", "--out-dir", str(tmp_path), "-q"]) == EXIT_USAGE
    assert main(["gen", "blob"]) == EXIT_USAGE


def test_maximize_multiset_star(star_file, tmp_path):
    out = tmp_path / "m"
    assert main(["maximize", "-i", str(star_file), "--mode", "multiset", "--k", "2",
                 "--alpha", "1", "--out-dir", str(out), "-q"]) == 0
    rows = read_csv(out / "curve_multiset.csv")
    assert rows[1]["k"] == "2" and rows[1]["node"] == "0"
    assert rows[1]["multiplicity_after"] == "2"
    assert abs(float(rows[1]["spread_mean"]) - 8.5) <= 0.05
    summary = json.loads((out / "summary_multiset.json").read_text())
    assert summary["multiset"] == {"0": 2}


def test_maximize_bad_k(star_file, tmp_path):
    assert main(["maximize", "-i", str(star_file), "--k", "0", "--out-dir", str(tmp_path),
                 "-q"]) == EXIT_USAGE
    assert main(["maximize", "-i", str(star_file), "--k", "12", "--out-dir", str(tmp_path),
                 "-q"]) == EXIT_USAGE


def _outputs(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*"))
            if p.is_file()}


def test_byte_identical_reruns_regardless_of_threads(star_file, tmp_path):
    results = []
    out = tmp_path / "run"
    for threads in ("1", "3", "1"):
        shutil.rmtree(out, ignore_errors=True)
        assert main(["report", "-i", str(star_file), "--k", "3", "--runs", "3000",
                     "--threads", threads, "--seed", "11", "--out-dir", str(out), "-q"]) == 0
        assert main(["maximize", "-i", str(star_file), "--mode", "multiset", "--k", "3",
                     "--runs", "3000", "--threads", threads, "--seed", "11",
                     "--out-dir", str(out), "-q"]) == 0
        results.append(_outputs(out))
    assert results[0] == results[1] == results[2]


def test_report_star(star_file, tmp_path, capsys):
    assert main(["report", "-i", str(star_file), "--k", "2", "--out-dir", str(tmp_path),
                 "-q"]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert abs(rep["rg"] - 8.5 / 6.5) <= 0.02
    assert rep["category"] == "aware"
    assert abs(rep["hr"]["2"] - 6.0) <= 0.2
    assert json.loads(capsys.readouterr().out) == rep
    row = read_csv(tmp_path / "report.csv")[0]
    assert row["category"] == "aware"


def test_report_clique_hub_ratios(tmp_path):
    assert main(["report", "-i", "gen:clique:n=6,p=0.3", "--k", "2", "--hr",
                 "--out-dir", str(tmp_path), "-q"]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["rg"] is None
    assert set(rep["hr"]) == {str(k) for k in range(2, 7)}
    assert all(abs(v - 1.0) <= 0.05 for v in rep["hr"].values())


def test_report_uses_cache(star_file, tmp_path):
    args = ["report", "-i", str(star_file), "--k", "2", "--rg", "--out-dir", str(tmp_path), "-q"]
    assert main(args) == 0
    cached = sorted((tmp_path / ".cache").iterdir())
    assert len(cached) == 2
    stamp = [p.stat().st_mtime_ns for p in cached]
    assert main(args) == 0
    assert [p.stat().st_mtime_ns for p in sorted((tmp_path / ".cache").iterdir())] == stamp


def test_report_sweep_alpha(star_file, tmp_path):
    assert main(["report", "-i", str(star_file), "--k", "2", "--rg", "--sweep-alpha",
                 "--alphas", "0,0.5,1", "--out-dir", str(tmp_path), "-q"]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert set(rep["alpha_curve"]) == {"0.0", "0.5", "1.0"}
    assert rep["alpha_curve"]["0.0"] == 1.0
    rows = read_csv(tmp_path / "alpha_sweep.csv")
    assert [r["alpha"] for r in rows] == ["0.0", "0.5", "1.0"]


def test_sweep_alpha_command(star_file, tmp_path):
    assert main(["sweep-alpha", "-i", str(star_file), "--k", "2", "--alphas", "0,1",
                 "--runs", "2000", "--out-dir", str(tmp_path), "-q"]) == 0
    rows = read_csv(tmp_path / "alpha_sweep.csv")
    assert float(rows[0]["rg"]) == 1.0 and abs(float(rows[1]["rg"]) - 8.5 / 6.5) < 0.03


def test_exact_command(tmp_path, capsys):
    path = tmp_path / "path.txt"
    path.write_text("0 1 0.5\n1 2 0.5\n")
    assert main(["exact", "-i", str(path), "--seeds", "0:2", "--alpha", "1",
                 "--out-dir", str(tmp_path), "-q"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "spread 2.125"
    assert "mset_size 2 unique_count 1" in out
    assert main(["exact", "-i", str(path), "--seeds", "", "--out-dir", str(tmp_path),
                 "-q"]) == 0
    assert json.loads((tmp_path / "exact.json").read_text())["spread"] == 0


def test_exact_guard(tmp_path):
    path = tmp_path / "big.txt"
    path.write_text("".join(f"0 {i} 0.5\n" for i in range(1, 31)))
    assert main(["exact", "-i", str(path), "--seeds", "0", "--out-dir", str(tmp_path),
                 "-q"]) == EXIT_GUARD


def test_parse_and_io_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n1 x\n")
    assert main(["maximize", "-i", str(bad), "--out-dir", str(tmp_path), "-q"]) == EXIT_PARSE
    assert main(["maximize", "-i", str(tmp_path / "missing.txt"), "--out-dir", str(tmp_path),
                 "-q"]) == EXIT_IO


def test_weights_sparse_ids_and_undirected(tmp_path):
    src = tmp_path / "snap.txt"
    src.write_text("# undirected\n10 30\n30 20\n")
    assert main(["weights", "-i", str(src), "--weights", "wc", "--undirected",
                 "--out-dir", str(tmp_path), "-q"]) == 0
    lines = sorted((tmp_path / "weighted.txt").read_text().splitlines())
    assert lines == ["10 30 0.5", "20 30 0.5", "30 10 1.0", "30 20 1.0"]
    assert (tmp_path / "ids.csv").read_text().splitlines()[1:] == ["10,0", "20,1", "30,2"]
    assert main(["weights", "-i", str(src), "--weights", "tr", "--seed", "4",
                 "--out-dir", str(tmp_path / "tr"), "-q"]) == 0
    probs = {l.split()[2] for l in (tmp_path / "tr" / "weighted.txt").read_text().splitlines()}
    assert probs <= {"0.1", "0.01", "0.001"}


def test_seeds_use_original_ids(tmp_path, capsys):
    src = tmp_path / "w.txt"
    src.write_text("100 200 1.0\n")
    assert main(["exact", "-i", str(src), "--seeds", "100", "--out-dir", str(tmp_path),
                 "-q"]) == 0
    assert capsys.readouterr().out.startswith("spread 2.0")
    assert main(["exact", "-i", str(src), "--seeds", "5", "--out-dir", str(tmp_path),
                 "-q"]) == EXIT_USAGE


def test_spread_and_rank_nodes(star_file, tmp_path):
    assert main(["spread", "-i", str(star_file), "--seeds", "0:2", "--alpha", "0.5",
                 "--dump-counts", "--out-dir", str(tmp_path), "-q"]) == 0
    est = json.loads((tmp_path / "spread.json").read_text())
    assert abs(est["mean"] - 7.25) <= 0.05
    assert len((tmp_path / "spread_counts.csv").read_text().splitlines()) == 10_001
    assert main(["rank-nodes", "-i", str(star_file), "--runs", "2000",
                 "--out-dir", str(tmp_path), "-q"]) == 0
    rows = read_csv(tmp_path / "ranking.csv")
    assert rows[0]["node"] == "0" and len(rows) == 11


def test_manifest_round_trip(star_file, tmp_path):
    assert main(["maximize", "-i", str(star_file), "--k", "2", "--alpha", "0.4", "--runs", "500",
                 "--seed", "3", "--out-dir", str(tmp_path), "-q"]) == 0
    body = json.loads((tmp_path / "manifest_maximize.json").read_text())
    cfg = ExperimentConfig.from_json(json.dumps(body["config"]))
    assert cfg == ExperimentConfig(str(star_file), "auto", 0.4, 2, 500, 3, str(tmp_path), False)
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg


def test_explicit_model_conflicts(star_file, tmp_path):
    assert main(["maximize", "-i", str(star_file), "--weights", "wc", "--out-dir",
                 str(tmp_path), "-q"]) == EXIT_USAGE
