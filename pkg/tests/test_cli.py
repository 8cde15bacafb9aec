from __future__ import annotations

import json

from coopkitchen.cli import main


def test_play_writes_log_and_replay_verifies(tmp_path, capsys):
    log_path = tmp_path / "episode.json"
    code = main([
        "play", "--layout", "cramped_room", "--p0", "greedy", "--p1", "greedy",
        "--seed", "0", "--horizon", "60", "--out", str(log_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "reward=" in out and "trace_hash=" in out
    assert log_path.exists()

    code = main(["replay", "--log", str(log_path)])
    assert code == 0
    assert "matches" in capsys.readouterr().out


def test_replay_detects_tampered_log(tmp_path, capsys):
    log_path = tmp_path / "episode.json"
    main([
        "play", "--layout", "cramped_room", "--p0", "greedy", "--p1", "stay",
        "--seed", "1", "--horizon", "40", "--out", str(log_path),
    ])
    log = json.loads(log_path.read_text())
    log["trace_hash"] = "0" * 64
    log_path.write_text(json.dumps(log))
    code = main(["replay", "--log", str(log_path)])
    assert code == 1
    assert "MISMATCH" in capsys.readouterr().out


def test_eval_writes_reports_and_figures(tmp_path):
    out = tmp_path / "report"
    code = main([
        "eval", "--layouts", "cramped_room",
        "--policies", "greedy", "stay",
        "--episodes", "2", "--horizon", "30", "--seed", "0",
        "--out", str(out),
    ])
    assert code == 0
    assert (out / "matrix.json").exists()
    assert (out / "summary.json").exists()
    assert (out / "cells.csv").exists()
    assert (out / "seats.csv").exists()
    assert (out / "heatmap_cramped_room.png").exists()
    assert (out / "seat_means.png").exists()
    matrix = json.loads((out / "matrix.json").read_text())
    assert len(matrix["cells"]) == 4


def test_eval_no_figures_flag(tmp_path):
    out = tmp_path / "nofigs"
    code = main([
        "eval", "--layouts", "cramped_room",
        "--policies", "stay",
        "--episodes", "1", "--horizon", "10", "--seed", "0",
        "--out", str(out), "--no-figures",
    ])
    assert code == 0
    assert not list(out.glob("*.png"))


def test_eval_save_episodes(tmp_path):
    out = tmp_path / "full"
    main([
        "eval", "--layouts", "cramped_room",
        "--policies", "stay",
        "--episodes", "2", "--horizon", "10", "--seed", "0",
        "--out", str(out), "--no-figures", "--save-episodes",
    ])
    episodes = list((out / "episodes").glob("*.json"))
    assert len(episodes) == 2
    log = json.loads(episodes[0].read_text())
    assert log["layout"] == "cramped_room"


def test_eval_exit_code_on_incomplete(tmp_path, monkeypatch):
    import coopkitchen.orchestrator as orch
    from coopkitchen.planner import BackendError

    class FaultyBackend:
        def query(self, bundle):
            raise BackendError("down")

    real = orch.make_backend

    def fake(config, **kwargs):
        if config.kind == "remote":
            return FaultyBackend()
        return real(config, **kwargs)

    monkeypatch.setattr(orch, "make_backend", fake)
    code = main([
        "eval", "--layouts", "cramped_room",
        "--policies", "proagent:backend=remote",
        "--episodes", "3", "--horizon", "10", "--seed", "0",
        "--out", str(tmp_path / "bad"), "--no-figures",
    ])
    assert code == 1
