import json
import os
import subprocess
import sys

import pytest

from nfvsim.cli import main

DATA = os.path.join(os.path.dirname(__file__), "..", "data")


def make_config(tmp_path, **overrides):
    doc = {
        "topology": {"kind": "linear", "n": 6},
        "workload": {"rate": [1, 20], "chain_len": [2, 2], "best_effort": [0, 1],
                     "dest_count": [1, 1]},
        "algorithm": "approximation",
        "route_links": 4,
        "chain_budget": 4,
        "termination": {"max_consecutive_rejections": 25, "max_requests": 1500},
        "seeds": [0],
    }
    doc.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_run_writes_outputs(tmp_path, capsys):
    cfg = make_config(tmp_path)
    out_dir = tmp_path / "run"
    assert main(["run", "--config", cfg, "--out", str(out_dir)]) == 0
    assert (out_dir / "result.json").exists()
    assert (out_dir / "trace.jsonl").exists()
    assert (out_dir / "metadata.json").exists()
    result = json.loads((out_dir / "result.json").read_text())
    assert result["algorithm"] == "approximation"
    assert result["profit"] > 0


def test_run_missing_config_exits_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2


def test_run_algorithm_override(tmp_path):
    cfg = make_config(tmp_path)
    out_dir = tmp_path / "greedy_run"
    assert main(["run", "--config", cfg, "--algorithm", "greedy", "--out", str(out_dir)]) == 0
    result = json.loads((out_dir / "result.json").read_text())
    assert result["algorithm"] == "greedy"


def test_dump_state_replays_trace(tmp_path, capsys):
    cfg = make_config(tmp_path)
    out_dir = tmp_path / "run"
    main(["run", "--config", cfg, "--out", str(out_dir)])
    capsys.readouterr()
    out_file = tmp_path / "state.json"
    assert main(["dump-state", "--trace", str(out_dir), "--out", str(out_file)]) == 0
    doc = json.loads(out_file.read_text())
    assert "links" in doc and "nodes" in doc
    result = json.loads((out_dir / "result.json").read_text())
    assert doc["dual_D"] == pytest.approx(result["dual_d"])


def test_sweep_writes_csv_and_metadata(tmp_path, capsys):
    cfg = make_config(tmp_path)
    out_csv = tmp_path / "res.csv"
    rc = main([
        "sweep", "--config", cfg, "--axis", "n", "--values", "6,8",
        "--seeds", "0,1", "--algorithms", "approximation,greedy",
        "--out", str(out_csv),
    ])
    assert rc == 0
    text = out_csv.read_text().splitlines()
    assert text[0] == "axis,algorithm,seed,accepted_full,accepted_mand,rejected,profit,profit_norm,mean_link_util,mean_node_util,J,D"
    assert len(text) == 1 + 2 * 2 * 2
    meta = json.loads((tmp_path / "res.metadata.json").read_text())
    assert meta["axis"] == "n"


def test_gen_topology_linear(tmp_path, capsys):
    out = tmp_path / "sub.json"
    rc = main(["gen-topology", "--kind", "linear", "--n", "8", "--out", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert len(doc["nodes"]) == 8
    assert len(doc["links"]) == 14


def test_gen_topology_graphml(tmp_path, capsys):
    out = tmp_path / "bell.json"
    rc = main([
        "gen-topology", "--kind", "graphml",
        "--path", os.path.join(DATA, "bellcanada_like.graphml"), "--out", str(out),
    ])
    assert rc == 0
    captured = capsys.readouterr()
    assert "48 nodes" in captured.out
    doc = json.loads(out.read_text())
    assert len(doc["nodes"]) == 48


def test_gen_workload(tmp_path, capsys):
    sub_path = tmp_path / "sub.json"
    main(["gen-topology", "--kind", "linear", "--n", "6", "--out", str(sub_path)])
    wl_cfg = tmp_path / "wl.json"
    wl_cfg.write_text(json.dumps({"rate": [1, 20], "chain_len": [2, 2],
                                  "best_effort": [0, 1], "seed": 5}))
    out = tmp_path / "wl.jsonl"
    rc = main(["gen-workload", "--config", str(wl_cfg), "--substrate", str(sub_path),
               "--count", "40", "--out", str(out)])
    assert rc == 0
    lines = [l for l in out.read_text().splitlines() if l]
    assert len(lines) == 40
    first = json.loads(lines[0])
    assert {"id", "source", "destinations", "chain", "rate"} <= set(first)


def test_verify_subcommand(capsys):
    assert main(["verify", "--instances", "5", "--seed", "0"]) == 0
    out = capsys.readouterr().out
    assert "5/5 instances satisfy" in out


def test_dump_transform(tmp_path, capsys):
    sub_path = tmp_path / "sub.json"
    main(["gen-topology", "--kind", "linear", "--n", "4", "--out", str(sub_path)])
    capsys.readouterr()
    rc = main(["dump-transform", "--substrate", str(sub_path), "--chain", "nf0,nf1"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("digraph")


def test_figures_without_frontend(tmp_path, capsys):
    csv = tmp_path / "r.csv"
    csv.write_text("axis,algorithm\n")
    rc = main(["figures", "--results", str(csv), "--out-dir", str(tmp_path),
               "--frontend", str(tmp_path / "nofrontend")])
    assert rc == 1
    err = capsys.readouterr().err
    assert "profit_norm" in err  # names the expected CSV contract


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["sweep"])  # missing required args
    assert exc.value.code == 2
