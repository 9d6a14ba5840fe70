import json
import subprocess
import sys
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from regscope.cli import main
from regscope.datagen import default_profiles, synthetic_report
from regscope.dataset import Class, load_dataset
from regscope.ingest import dump_report

from conftest import DATA


def run(*argv):
    return subprocess.run(
        [sys.executable, "-m", "regscope", *argv], capture_output=True, text=True, check=False
    )


def mode_vector(cls):
    p = next(p for p in default_profiles() if p.label is cls)
    return [v >= 0.5 for v in p.hit_prob]


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["datagen", "--fixture", "separable", "--out", str(d / "sep.csv")]) == 0
    assert main(["train", str(d / "sep.csv"), "--kind", "boosted_tree", "--out", str(d / "m.json")]) == 0
    reports = d / "reports"
    reports.mkdir()
    for i, cls in enumerate((Class.TROJAN, Class.BOTNET, Class.WORM, Class.CLEANWARE)):
        name = {Class.TROJAN: "Trojan.Win32.Dridex.v", Class.BOTNET: "MSIL.NanoBot.bi",
                Class.WORM: "Worm.Win32.Cake", Class.CLEANWARE: "Win32.Lolbot.aoi"}[cls]
        r = synthetic_report(mode_vector(cls), f"s{i}", name)
        (reports / f"{i}.json").write_text(dump_report(r), encoding="utf-8")
    (d / "empty.json").write_text(dump_report(synthetic_report([False] * 47, "none")), encoding="utf-8")
    return d


def test_catalog_list(capsys):
    assert main(["catalog", "list"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 47
    assert "CustomLocale\\en-US" in lines[0]
    assert lines[16].startswith("P17\t")


def test_catalog_check(tmp_path, capsys):
    good = tmp_path / "good.tsv"
    good.write_text("P1\tHKLM\\A\nP2\tC:\\B\n", encoding="utf-8")
    assert main(["catalog", "check", str(good)]) == 0
    assert "2 locations" in capsys.readouterr().out
    bad = tmp_path / "bad.tsv"
    bad.write_text("P1\tHKLM\\A\nP3\tC:\\B\n", encoding="utf-8")
    assert main(["catalog", "check", str(bad)]) == 2
    assert main(["catalog", "check"]) == 1


def test_catalog_env_override(tmp_path):
    m = tmp_path / "m.tsv"
    m.write_text("P1\tHKCU\\Software\n", encoding="utf-8")
    out = subprocess.run(
        [sys.executable, "-m", "regscope", "catalog", "list"],
        capture_output=True, text=True, env={**__import__("os").environ, "REGSCOPE_CATALOG": str(m)},
    )
    assert out.returncode == 0 and out.stdout.splitlines() == ["P1\tHKCU\\Software"]


def test_caro(capsys):
    assert main(["caro", "Worm.Win32.Mydoom.a.exe"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["family"] == "Mydoom" and doc["residue"] == "exe" and doc["class"] == "worm"


def test_usage_errors_exit_one():
    assert run().returncode == 1
    assert run("frobnicate").returncode == 1
    assert run("train", "x.csv", "--kind", "svm").returncode == 1
    assert run("grid").returncode == 1


def test_data_errors_exit_two(tmp_path):
    assert run("eval", "nope.json", "nope.csv").returncode == 2
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    r = run("predict", str(junk), str(junk))
    assert r.returncode == 2 and "regscope:" in r.stderr
    bad_csv = tmp_path / "bad.csv"
    bad_csv.write_text("sample,os,label,P1\nx,Unknown,9,1\n")
    assert run("train", str(bad_csv), "--kind", "logistic").returncode == 2


def test_predict_trojan_report(tmp_path, work, capsys):
    report = tmp_path / "trojan.json"
    report.write_text(dump_report(synthetic_report(mode_vector(Class.TROJAN), "t", "Trojan.Win32.Example")))
    assert main(["predict", str(work / "m.json"), str(report), "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["predicted"]["class"] == "trojan"
    ids = [f["id"] for f in doc["fired_locations"]]
    assert ids[:2] == ["P17", "P18"] and ids[2:] == sorted(ids[2:], key=lambda s: int(s[1:]))
    assert abs(sum(doc["probabilities"].values()) - 1) < 1e-9
    assert main(["predict", str(work / "m.json"), str(report)]) == 0
    text = capsys.readouterr().out
    assert "prediction:  trojan (-3)" in text and "P17" in text


def test_predict_with_nothing_fired(work, capsys):
    assert main(["predict", str(work / "m.json"), str(work / "empty.json")]) == 0
    assert "no catalog locations fired" in capsys.readouterr().out


def test_eval(work, capsys):
    assert main(["eval", str(work / "m.json"), str(work / "sep.csv"), "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_test"] == 360 and doc["accuracy"] > 0.95


def test_extract_directory_is_ordered_and_parallel_safe(work, tmp_path):
    one, four = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["extract", str(work / "reports"), "--label", "worm", "--out", str(one)]) == 0
    assert main(["extract", str(work / "reports"), "--label", "worm", "--jobs", "4", "--out", str(four)]) == 0
    assert one.read_bytes() == four.read_bytes()
    d = load_dataset(one.read_bytes())
    assert d.names[0] == "Trojan.Win32.Dridex.v" and set(d.y.tolist()) == {-1}
    assert d.X[0].tolist() == mode_vector(Class.TROJAN)


def test_extract_label_sources(work, tmp_path):
    reports = work / "reports"
    # Without --label the name decides; Lolbot says nothing, so this fails.
    assert main(["extract", str(reports), "--out", str(tmp_path / "x.csv")]) == 2
    rep = tmp_path / "rep.json"
    rep.write_text(json.dumps({f"s{i}": {"positives": p, "total": 60} for i, p in enumerate((40, 30, 20, 1))}))
    out = tmp_path / "y.csv"
    assert main(["extract", str(reports), "--reputation", str(rep), "--out", str(out)]) == 0
    assert load_dataset(out.read_bytes()).y.tolist() == [-3, -2, -1, 0]
    assert main(["extract", str(reports), "--reputation", str(rep), "--threshold", "41",
                 "--out", str(out)]) == 0
    assert load_dataset(out.read_bytes()).y.tolist() == [0, 0, 0, 0]


def test_extract_reputation_url(work, tmp_path):
    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):
            body = json.dumps({"positives": 12, "total": 60}).encode()
            self.send_response(200)
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    server = HTTPServer(("127.0.0.1", 0), Handler)
    t = threading.Thread(target=server.serve_forever, daemon=True)
    t.start()
    try:
        out = tmp_path / "z.csv"
        url = f"http://127.0.0.1:{server.server_port}/verdict"
        assert main(["extract", str(work / "reports" / "3.json"), "--reputation-url", url, "--out", str(out)]) == 0
        # Malware by reputation, family unknown from the name.
        assert load_dataset(out.read_bytes()).y.tolist() == [1]
    finally:
        server.shutdown()


def test_train_determinism_under_parallelism(work, tmp_path):
    outs = []
    for jobs in ("1", "3", "3"):
        out = tmp_path / f"rf{len(outs)}.json"
        assert main(["train", str(work / "sep.csv"), "--kind", "random_forest", "--n-trees", "15",
                     "--seed", "4", "--jobs", jobs, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    doc = json.loads(outs[0])
    assert doc["hyperparameters"]["n_trees"] == 15 and doc["hyperparameters"]["seed"] == 4


def test_train_class_set(work, tmp_path):
    out = tmp_path / "bin.json"
    assert main(["train", str(work / "sep.csv"), "--kind", "decision_tree", "--class-set",
                 "BinaryCleanMal", "--max-depth", "2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["classes"] == [0, 1] and doc["hyperparameters"]["max_depth"] == 2


def test_datagen_profiles(tmp_path):
    prof, a, b = tmp_path / "p.csv", tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["datagen", "--n", "5", "--seed", "3", "--dump-profiles", str(prof), "--out", str(a)]) == 0
    assert main(["datagen", "--profiles", str(prof), "--n", "5", "--seed", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(load_dataset(a.read_bytes())) == 20


def test_grid_matches_pinned_and_is_stable(tmp_path):
    a, b, conf = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.json"
    assert main(["grid", "--fixture", "separable", "--seed", "7", "--out", str(a), "--confusion", str(conf)]) == 0
    assert main(["grid", "--fixture", "separable", "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes() == (DATA / "separable_grid_seed7.csv").read_bytes()
    assert set(json.loads(conf.read_text())) == {"80/20", "70/30", "60/40", "50/50"}


def test_grid_on_dataset_file(work, tmp_path):
    out = tmp_path / "g.csv"
    assert main(["grid", str(work / "sep.csv"), "--ratios", "50/50", "--n-trees", "5",
                 "--n-rounds", "5", "--epochs", "20", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "ratio,classifier,accuracy" and len(rows) == 6
