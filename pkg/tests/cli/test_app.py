from __future__ import annotations

import json
from collections.abc import Sequence
from pathlib import Path

import pytest
from typer.testing import CliRunner

from ovigo.cli.app import app
from ovigo.config.defaults import ENV_ENDPOINT
from ovigo.graph.serialize import read_graph, write_graph
from ovigo.models.reasoning import ChatMessage
from ovigo.reasoning.client import PolicyChatClient, RecordingChatClient
from ovigo.reasoning.pipeline import run_pipeline
from ovigo.services.location_masks import location_masks_to_dict
from tests.factories import FRAME, rect_mask, two_room_graph

runner = CliRunner()

ANSWERS = {
    "select:floors": '{"ids": [0]}',
    "select:rooms": '{"ids": [2]}',
    "targets:room 2": '{"target_ids": [6, 7], "anchor_ids": [5]}',
    "ground": '{"reasoning": "closer to the stove", "explanation": "vase 6", "object_id": 6}',
}
QUERY = "the vase next to the stove"


def _answer(stage: str, messages: Sequence[ChatMessage]) -> str:
    return ANSWERS[stage]


@pytest.fixture
def graph_file(tmp_path: Path) -> Path:
    path = tmp_path / "scene.json"
    write_graph(two_room_graph(), str(path))
    return path


@pytest.fixture(autouse=True)
def _no_endpoint(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv(ENV_ENDPOINT, raising=False)


def _transcript(graph_file: Path, tmp_path: Path) -> Path:
    recorder = RecordingChatClient(PolicyChatClient(_answer))
    run_pipeline(read_graph(str(graph_file)), QUERY, recorder)
    path = tmp_path / "transcript.jsonl"
    path.write_text(recorder.to_jsonl(timings=False))
    return path


class TestSampleConfig:
    def test_prints_defaults(self) -> None:
        result = runner.invoke(app, ["sample-config"])
        assert result.exit_code == 0
        payload = json.loads(result.stdout)
        assert payload["binH"] == 0.01
        assert payload["locationSource"] == "geometric"


class TestGround:
    def test_query_replays_transcript(self, graph_file: Path, tmp_path: Path) -> None:
        transcript = _transcript(graph_file, tmp_path)
        out = tmp_path / "result.json"
        result = runner.invoke(
            app, ["ground", str(graph_file), "--query", QUERY, "--transcript", str(transcript), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["result"]["object_id"] == 6
        assert payload["trace"]["rooms"] == [2]
        assert payload["trace"]["edge_pairs"] == 2
        assert payload["trace"]["skipped_rooms"] == {}
        assert set(payload["prompts"]) >= {"system", "ground", "repair"}
        assert all(len(digest) == 64 for digest in payload["prompts"].values())

    def test_needs_query_or_benchmark(self, graph_file: Path) -> None:
        result = runner.invoke(app, ["ground", str(graph_file)])
        assert result.exit_code == 2

    def test_needs_client(self, graph_file: Path) -> None:
        result = runner.invoke(app, ["ground", str(graph_file), "--query", QUERY])
        assert result.exit_code == 2
        assert "transcript" in result.output

    def test_unreadable_graph(self, tmp_path: Path) -> None:
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        transcript = tmp_path / "t.jsonl"
        transcript.write_text("")
        result = runner.invoke(app, ["ground", str(bad), "--query", QUERY, "--transcript", str(transcript)])
        assert result.exit_code == 2

    def test_unscripted_request_fails(self, graph_file: Path, tmp_path: Path) -> None:
        transcript = tmp_path / "empty.jsonl"
        transcript.write_text("")
        result = runner.invoke(app, ["ground", str(graph_file), "--query", QUERY, "--transcript", str(transcript)])
        assert result.exit_code == 1
        assert "unexpected_request" in result.output

    def test_bad_override(self, graph_file: Path) -> None:
        result = runner.invoke(app, ["ground", str(graph_file), "--query", QUERY, "--set", "pH=7"])
        assert result.exit_code == 2


class TestEvalLocations:
    def test_identical_masks_score_one(self, tmp_path: Path) -> None:
        masks = [rect_mask(0.5, 0.5, 3.0, 2.5), rect_mask(5.0, 1.0, 6.0, 2.0)]
        path = tmp_path / "masks.json"
        path.write_text(json.dumps(location_masks_to_dict(0, FRAME, masks)))
        out = tmp_path / "report.json"
        result = runner.invoke(app, ["eval-locations", str(path), str(path), "--out", str(out)])
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert report["predicted"] == 2
        assert all(row["f1"] == 1.0 for row in report["sweep"])

    def test_graph_as_prediction(self, graph_file: Path, tmp_path: Path) -> None:
        gt = tmp_path / "gt.json"
        gt.write_text(json.dumps(location_masks_to_dict(0, FRAME, [rect_mask(0.5, 0.5, 3.0, 2.5)])))
        out = tmp_path / "report.json"
        result = runner.invoke(app, ["eval-locations", str(graph_file), str(gt), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert json.loads(out.read_text())["sweep"][0]["tp"] == 1

    def test_wrong_floor(self, tmp_path: Path) -> None:
        path = tmp_path / "masks.json"
        path.write_text(json.dumps(location_masks_to_dict(0, FRAME, [rect_mask(0.5, 0.5, 3.0, 2.5)])))
        result = runner.invoke(app, ["eval-locations", str(path), str(path), "--floor", "1"])
        assert result.exit_code == 2


class TestExport:
    def test_dot(self, graph_file: Path, tmp_path: Path) -> None:
        out_dir = tmp_path / "export"
        result = runner.invoke(app, ["export", str(graph_file), "--kind", "graph-dot", "--out-dir", str(out_dir)])
        assert result.exit_code == 0, result.output
        assert "b0 -> f0;" in (out_dir / "scene_graph.dot").read_text()

    def test_bev_png(self, graph_file: Path, tmp_path: Path) -> None:
        result = runner.invoke(app, ["export", str(graph_file), "--out-dir", str(tmp_path)])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "bev_floor0.png").read_bytes().startswith(b"\x89PNG")

    def test_missing_graph(self, tmp_path: Path) -> None:
        result = runner.invoke(app, ["export", str(tmp_path / "none.json")])
        assert result.exit_code == 2
