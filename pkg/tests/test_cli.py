import json

import pytest

from dmac.bounds import GainBounds
from dmac.cli import RunConfig, load_network, main, read_trace


def test_generate_large_tree(tmp_path, capsys):
    assert main(["generate", "--tree", "10000", "--b", "0.1", "--models", "2", "--seed", "7", "--out", str(tmp_path)]) == 0
    net = load_network(tmp_path / "network.json")
    assert net.graph.edge_count == 9999
    assert all(len(c) == 2 for c in net.candidates)
    assert set(net.true_index.tolist()) == {1}


def test_generate_minimal_fixture(tmp_path):
    out = tmp_path / "n.json"
    assert main(["generate", "--line", "2", "--b", "0.1", "--models", "1", "-o", str(out)]) == 0
    net = load_network(out)
    assert net.n == 2 and len(net.candidates[0]) == 1


def test_generate_rejects_large_b(tmp_path, capsys):
    code = main(["generate", "--star", "10", "--b", "0.5", "--out", str(tmp_path)])
    assert code != 0
    err = capsys.readouterr().err
    assert "sqrt(1/(8*d_max))" in err and "9" in err
    assert not (tmp_path / "network.json").exists()


def test_bounds_round_trip(tmp_path, capsys):
    main(["generate", "--tree", "30", "--seed", "1", "--out", str(tmp_path)])
    capsys.readouterr()
    assert main(["bounds", str(tmp_path / "network.json"), "--out", str(tmp_path)]) == 0
    printed = json.loads(capsys.readouterr().out)
    stored = GainBounds.from_record(json.loads((tmp_path / "bounds.json").read_text()))
    assert printed["gamma_upper"] == stored.gamma_upper
    assert printed["gamma_lower"] == stored.gamma_lower
    assert {"f1", "f2", "f3", "f4", "zero_control_gain_min", "zero_control_gain_max"} <= set(printed)


def test_bounds_single_model_network(tmp_path, capsys):
    main(["generate", "--tree", "20", "--models", "1", "--true-index", "0", "--seed", "2", "--out", str(tmp_path)])
    capsys.readouterr()
    assert main(["bounds", str(tmp_path / "network.json")]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["gamma_upper"] > 0


def test_zero_disturbance_trace_is_zero(tmp_path):
    code = main(["simulate", "--tree", "8", "-T", "5", "--disturbance", "zero", "--out", str(tmp_path)])
    assert code == 0
    for kind in ("minimax", "hinf", "zero"):
        nodes = read_trace(tmp_path / f"trace_{kind}_nodes.csv")
        for k in ("state", "control", "disturbance"):
            assert all(v == 0.0 for v in nodes[k].values())
        edges = read_trace(tmp_path / f"trace_{kind}_edges.csv")
        assert len(edges["edge_input"]) == 5 * 7
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["zero"]["total_cost"] == 0.0


def test_compare_outputs_and_determinism(tmp_path):
    cfg = {"graph": {"kind": "tree", "n": 40, "seed": 3}, "models.seed": 3, "horizon": 15, "disturbance.seed": 5}
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps(cfg))
    outputs = []
    for name in ("a", "b"):
        assert main(["compare", "--config", str(cfg_path), "--out", str(tmp_path / name), "--plot"]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted((tmp_path / name).iterdir())})
    assert outputs[0].keys() == outputs[1].keys()
    for key in outputs[0]:
        if key.endswith((".csv", ".json")):
            assert outputs[0][key] == outputs[1][key], key
    header = outputs[0]["differences.csv"].decode().splitlines()[0]
    assert "state_diff_l1" in header and "control_diff_l1" in header
    assert "differences.svg" in outputs[0]


def test_sweep(tmp_path, capsys):
    assert main(["sweep", "--tree", "15", "-T", "50", "--seeds", "0-2", "--controller", "zero", "--out", str(tmp_path)]) == 0
    rec = json.loads((tmp_path / "sweep.json").read_text())
    assert rec["zero"]["seeds"] == [0, 1, 2]
    assert rec["zero"]["max_gain"] <= rec["bounds"]["zero_control_gain_max"]


def test_config_keys():
    cfg = RunConfig.from_mapping({"graph": {"kind": "line", "n": 4}, "b": 0.05})
    assert cfg.graph_kind == "line" and cfg.graph_n == 4 and cfg.b == 0.05
    assert RunConfig.from_mapping(cfg.to_mapping()) == cfg
    with pytest.raises(ValueError):
        RunConfig.from_mapping({"graph.colour": "red"})


def test_confusion_from_cli(tmp_path):
    code = main(["simulate", "--tree", "10", "-T", "10", "--disturbance", "confusion", "--x0", "1.0",
                 "--controller", "minimax", "--out", str(tmp_path)])
    assert code == 0
    sel = read_trace(tmp_path / "trace_minimax_nodes.csv")["selection"]
    net_true = 1
    assert all(v != net_true for (t, _), v in sel.items() if t >= 1)
