import json

import pytest

from conglab.cli import main

from conftest import FIVESET, HAUSDORFF, MIXED, R2_SWAP, ROBINSON


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in [("hausdorff", HAUSDORFF), ("robinson", ROBINSON),
                       ("fiveset", FIVESET), ("r2", R2_SWAP), ("mixed", MIXED)]:
        p = tmp_path / f"{name}.cong"
        p.write_text(text)
        paths[name] = str(p)
    return paths


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_classify_hausdorff_fails(files, capsys):
    code, payload = run_json(capsys, ["classify", files["hausdorff"], "--json"])
    assert code == 1
    assert not payload["weak"]["ok"]
    assert not payload["consistent"]["ok"]


def test_classify_fiveset_ok(files, capsys):
    code, payload = run_json(capsys, ["classify", files["fiveset"], "--json", "--pairs"])
    assert code == 0
    assert payload["weak"]["ok"] and payload["consistent"]["ok"] and payload["nonredundant"]["ok"]
    assert payload["decreasing_pairs"] == [[[1, 3, 4], [1, 2]], [[3, 4, 5], [2, 5]]]


def test_classify_human_output(files, capsys):
    code = main(["classify", files["robinson"]])
    out = capsys.readouterr().out
    assert code == 1
    assert "weak" in out and "consistent" in out


def test_classify_reads_stdin(monkeypatch, capsys):
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO(FIVESET))
    code, payload = run_json(capsys, ["classify", "-", "--json"])
    assert code == 0 and payload["r"] == 5


def test_gen_pipes_into_classify(capsys, monkeypatch):
    import io

    code = main(["gen-cor22", "--n", "3"])
    generated = capsys.readouterr().out
    assert code == 0
    monkeypatch.setattr("sys.stdin", io.StringIO(generated))
    code, payload = run_json(capsys, ["classify", "-", "--json"])
    assert code == 0
    assert payload["r"] == 3
    assert payload["weak"]["ok"] and payload["consistent"]["ok"] and payload["nonredundant"]["ok"]


def test_reduce_robinson(files, capsys):
    code, payload = run_json(capsys, ["reduce", files["robinson"], "--json"])
    assert code == 0
    assert payload["empty"] and payload["deleted"] == [1, 2, 3, 4]


def test_reduce_human(files, capsys):
    code = main(["reduce", files["fiveset"]])
    out = capsys.readouterr().out
    assert code == 0 and out.startswith("sets 5")


def test_transform_hausdorff(files, capsys):
    code, payload = run_json(capsys, ["transform", files["hausdorff"], "--json"])
    assert code == 0
    assert payload["m_bar"] == 2 and payload["self_complement_indices"] == [3]


def test_graph_fiveset_all_claims(files, capsys, tmp_path):
    dot = tmp_path / "g.dot"
    code, payload = run_json(capsys, ["graph", files["fiveset"], "--json", "--dot", str(dot)])
    assert code == 0
    assert payload["claim1"]["ok"] and payload["claim2"]["ok"] and payload["claim3"]["ok"]
    assert dot.read_text().startswith("digraph")


def test_graph_claim_failure_exit(files, capsys):
    code, payload = run_json(capsys, ["graph", files["robinson"], "--json", "--claims", "1"])
    assert code == 1
    assert not payload["claim1"]["ok"]


def test_graph_s4_transforms_input(files, capsys):
    code, payload = run_json(capsys, ["graph", files["mixed"], "--json", "--variant", "s4"])
    assert code == 0
    assert payload["variant"] == "s4"


def test_partition_fiveset(files, capsys):
    code, payload = run_json(capsys, ["partition", files["fiveset"], "--json",
                                      "--w", "s1^2", "--verify-depth", "3"])
    assert code == 0
    assert payload["verified"]["ok"]
    assert payload["anchor_piece"] == payload["identity_piece"]


def test_orbit_partition_r2(files, capsys):
    code, payload = run_json(capsys, ["orbit-partition", files["r2"], "--json",
                                      "--w", "t1^2", "--verify-depth", "3"])
    assert code == 0
    assert payload["verified"]["ok"]
    assert payload["representatives"] == {"e": 1, "t1": 2}


def test_certify_free(capsys):
    code, payload = run_json(capsys, ["certify-free", "--m", "2", "--mbar", "1",
                                      "--depth", "4", "--json"])
    assert code == 0
    assert payload["certified"]


def test_simulate_and_render(files, capsys, tmp_path):
    out = tmp_path / "snaps"
    code, payload = run_json(capsys, [
        "simulate", files["r2"], "--variant", "s4", "--steps", "2", "--json",
        "--snapshot-every", "1", "--out", str(out), "--svg", "--cert-depth", "4",
    ])
    assert code == 0
    assert payload["invariants"]["ok"] and payload["stages"] == 2
    snap = out / "stage0001.json"
    assert snap.exists() and (out / "final.svg").exists()
    code = main(["render", str(snap), "--out", str(tmp_path / "x.svg"), "--axis", "x"])
    assert code == 0
    assert (tmp_path / "x.svg").read_text().startswith("<svg")


def test_usage_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.cong"
    bad.write_text("sets 2\ncong {1 2} ~ {1}\n")
    assert main(["classify", str(bad)]) == 2
    assert main(["gen-cor22", "--n", "9"]) == 2
