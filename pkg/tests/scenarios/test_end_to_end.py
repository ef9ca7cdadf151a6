from __future__ import annotations

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from ovigo.cli.app import app
from ovigo.graph.serialize import read_graph
from ovigo.models.enums import EdgeKind

runner = CliRunner()


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory: pytest.TempPathFactory) -> Path:
    out = tmp_path_factory.mktemp("apartment")
    result = runner.invoke(app, ["gen-fixture", str(out)])
    assert result.exit_code == 0, result.output
    return out


def _build(fixture_dir: Path, out: Path) -> None:
    result = runner.invoke(
        app,
        [
            "build-graph",
            str(fixture_dir / "manifest.json"),
            "--out",
            str(out),
            "--transcript",
            str(fixture_dir / "transcript.jsonl"),
            "--threads",
            "2",
        ],
    )
    assert result.exit_code == 0, result.output


@pytest.fixture(scope="module")
def graph_path(fixture_dir: Path) -> Path:
    path = fixture_dir / "scene_graph.json"
    _build(fixture_dir, path)
    return path


class TestGeneratedApartment:
    def test_files_written(self, fixture_dir: Path) -> None:
        for name in ("manifest.json", "scene.ply", "benchmark.jsonl", "transcript.jsonl", "gt/objects.json"):
            assert (fixture_dir / name).exists(), name
        manifest = json.loads((fixture_dir / "manifest.json").read_text())
        assert len(manifest["frames"]) > 0
        assert (fixture_dir / manifest["frames"][0]["depth_path"]).exists()

    def test_benchmark_not_empty(self, fixture_dir: Path) -> None:
        rows = (fixture_dir / "benchmark.jsonl").read_text().splitlines()
        assert 0 < len(rows) <= 20


class TestRebuiltGraph:
    def test_hierarchy(self, graph_path: Path) -> None:
        graph = read_graph(str(graph_path))
        assert len(graph.floors) == 2
        assert len(graph.rooms) == 5
        assert len(graph.locations) == 3
        assert len(graph.objects) > 30
        for obj_id in graph.objects:
            assert graph.parent_of(EdgeKind.RO, obj_id) is not None

    def test_tags_replayed(self, graph_path: Path) -> None:
        graph = read_graph(str(graph_path))
        assert {r.tag for r in graph.rooms.values()} == {"living room", "kitchen", "bedroom", "office", "bathroom"}
        assert {loc.tag for loc in graph.locations.values()} == {"seating area", "sleeping area", "work area"}

    def test_rebuild_is_byte_identical(self, fixture_dir: Path, graph_path: Path) -> None:
        again = fixture_dir / "scene_graph_again.json"
        _build(fixture_dir, again)
        assert again.read_bytes() == graph_path.read_bytes()


class TestEvaluation:
    def test_grounding_benchmark(self, fixture_dir: Path, graph_path: Path) -> None:
        out = fixture_dir / "grounding.json"
        result = runner.invoke(
            app,
            [
                "eval-grounding",
                str(graph_path),
                str(fixture_dir / "benchmark.jsonl"),
                "--transcript",
                str(fixture_dir / "transcript.jsonl"),
                "--object-labels",
                str(fixture_dir / "gt" / "object_labels.json"),
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert report["accuracy"]["0.25"] == 1.0
        assert report["accuracy"]["0.5"] == 1.0
        assert all(q["error"] is None for q in report["queries"])
        assert 0.0 < report["topk"]["auc"] <= 100.0

    def test_location_masks(self, fixture_dir: Path, graph_path: Path) -> None:
        out = fixture_dir / "locations.json"
        result = runner.invoke(
            app,
            ["eval-locations", str(graph_path), str(fixture_dir / "gt" / "locations_floor0.json"), "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert report["ground_truth"] == 1
        assert report["sweep"][0]["tp"] == 1
