import json
import pathlib
import subprocess
import sys

import pytest

GOLDEN = pathlib.Path(__file__).parent / "golden"


def run_cli(*args, cwd=None):
    proc = subprocess.run(
        [sys.executable, "-m", "rmtt.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )
    return proc


def report(proc):
    return json.loads(proc.stdout)


def test_check_sig_shipped_ok():
    proc = run_cli("check-sig", "itth")
    assert proc.returncode == 0
    assert report(proc)["result"]["valid"]


def test_check_sig_type_error(tmp_path):
    bad = tmp_path / "bad.sig"
    bad.write_text("T : sort\nc : (x : T) -> U\n")
    proc = run_cli("check-sig", str(bad))
    assert proc.returncode == 1


def test_check_sig_malformed(tmp_path):
    bad = tmp_path / "bad.sig"
    bad.write_text("T :::\n")
    proc = run_cli("check-sig", str(bad))
    assert proc.returncode == 2


def test_normalize_normal_form_unchanged():
    proc = run_cli("normalize", "itth", "tt")
    assert proc.returncode == 0
    res = report(proc)["result"]
    assert res["normal_form"] == "tt"
    assert res["changed"] is False


def test_normalize_budget_inconclusive(tmp_path):
    sig = tmp_path / "loop.sig"
    sig.write_text("T : sort\nc : T\nloop : (x : T) -> T\nloop(x) ~> loop(loop(x))\n")
    proc = run_cli("--fuel", "40", "normalize", str(sig), "loop(c)")
    assert proc.returncode == 3


def test_classifier_reports_fiber_sizes(tmp_path):
    run_cli("corpus", "--dir", str(tmp_path))
    proc = run_cli("classifier", str(tmp_path / "base_delta1.json"))
    assert proc.returncode == 0
    assert report(proc)["result"]["omega_fiber_sizes"] == [1, 2]


def test_classifier_malformed_input(tmp_path):
    f = tmp_path / "x.json"
    f.write_text("{not json")
    assert run_cli("classifier", str(f)).returncode == 2


def test_initial_model_and_check_model_pipeline(tmp_path):
    out = tmp_path / "m.json"
    proc = run_cli("--depth", "1", "initial-model", "tthg", "--model-out", str(out))
    assert proc.returncode == 0
    proc2 = run_cli("check-model", str(out))
    assert proc2.returncode == 0
    proc3 = run_cli("--depth", "1", "il", str(out))
    assert proc3.returncode == 0
    assert report(proc3)["result"]["sizes"] == [1, 0]
    proc4 = run_cli("heart", str(out))
    assert proc4.returncode == 0
    assert report(proc4)["result"]["democratic"] is True


def test_pushout_subcommand(tmp_path):
    cof = tmp_path / "cof.json"
    cof.write_text(json.dumps({
        "attachments": [
            {"length": 0, "top": "Ty", "terms": []},
            {"length": 0, "top": "El", "terms": ["att0"]},
        ]
    }))
    proc = run_cli("pushout", "itth", str(cof))
    assert proc.returncode == 0
    assert report(proc)["result"]["added"] == ["att0", "att1"]


def test_corpus_deterministic(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    run_cli("corpus", "--dir", str(d1))
    run_cli("corpus", "--dir", str(d2))
    for f in sorted(d1.iterdir()):
        assert (d2 / f.name).read_bytes() == f.read_bytes()


def test_suite_subset():
    proc = run_cli("suite", "--only", "3")
    assert proc.returncode == 0
    rep = report(proc)
    assert rep["result"]["criteria"]["3"]["ok"]


@pytest.mark.parametrize(
    "golden,args",
    [
        ("classifier_delta1.json", ("classifier", str(GOLDEN / "corpus" / "base_delta1.json"))),
        ("check_sig_itth.json", ("check-sig", "itth")),
        ("normalize_tt.json", ("normalize", "itth", "tt")),
    ],
)
def test_golden_reports(golden, args, tmp_path):
    out = tmp_path / "r.json"
    proc = run_cli(*args, "--out", str(out))
    assert proc.returncode == 0
    assert out.read_text() == (GOLDEN / golden).read_text()
