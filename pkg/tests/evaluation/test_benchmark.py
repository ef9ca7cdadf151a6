from __future__ import annotations

import json

import pytest

from ovigo.evaluation.benchmark import benchmark_to_jsonl, parse_benchmark, read_benchmark, run_benchmark
from ovigo.models.errors import EmptyBenchmark, MissingFile, ParseError
from ovigo.models.evaluation import BenchmarkItem
from ovigo.models.geometry import Box3D
from ovigo.reasoning.client import PolicyChatClient, RecordingChatClient, ScriptedChatClient
from ovigo.reasoning.pipeline import run_pipeline
from tests.factories import two_room_graph
from tests.fs_mock import MemoryFileSystem

ANSWERS = {
    "select:floors": '{"ids": [0]}',
    "select:rooms": '{"ids": [2]}',
    "targets:room 2": '{"target_ids": [6, 7], "anchor_ids": [5]}',
    "ground": '{"reasoning": "", "explanation": "", "object_id": 6}',
}
ROW = '{"query": "the vase", "gt_box": {"min": [0, 0, 0], "max": [1, 1, 1]}}'


def _vase_client() -> ScriptedChatClient:
    recorder = RecordingChatClient(PolicyChatClient(lambda stage, messages: ANSWERS[stage]))
    run_pipeline(two_room_graph(), "the vase by the stove", recorder)
    return ScriptedChatClient.from_jsonl(recorder.to_jsonl())


class TestParseBenchmark:
    def test_rows(self) -> None:
        (item,) = parse_benchmark(ROW + "\n\n")
        assert item.query == "the vase"
        assert item.gt_box == Box3D((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))

    def test_malformed_line_reports_position(self) -> None:
        with pytest.raises(ParseError) as info:
            parse_benchmark(ROW + "\n{broken\n", "bench.jsonl")
        assert info.value.context["line"] == 2

    def test_blank_query(self) -> None:
        with pytest.raises(ParseError, match="query"):
            parse_benchmark('{"query": " ", "gt_box": {"min": [0, 0, 0], "max": [1, 1, 1]}}')

    def test_bad_box(self) -> None:
        with pytest.raises(ParseError, match="gt_box"):
            parse_benchmark('{"query": "x", "gt_box": {"min": [0, 0]}}')

    def test_jsonl_writer_is_readable(self) -> None:
        items = [BenchmarkItem("a chair", Box3D((0.0, 1.0, 2.0), (3.0, 4.0, 5.0)))]
        assert parse_benchmark(benchmark_to_jsonl(items)) == items

    def test_read_from_file(self) -> None:
        fs = MemoryFileSystem().add_file("/b.jsonl", ROW)
        assert len(read_benchmark("/b.jsonl", fs)) == 1
        with pytest.raises(MissingFile):
            read_benchmark("/missing.jsonl", fs)


class TestRunBenchmark:
    def test_failures_count_as_misses(self) -> None:
        graph = two_room_graph()
        items = [
            BenchmarkItem("the vase by the stove", graph.objects[6].bbox),
            BenchmarkItem("the toaster", graph.objects[5].bbox),
        ]
        report = run_benchmark(graph, items, _vase_client(), config={"k": 1})
        first, second = report.outcomes
        assert first.object_id == 6
        assert first.iou == pytest.approx(1.0)
        assert second.object_id is None
        assert second.error is not None and "unexpected_request" in second.error
        assert report.accuracy[0.5] == 0.5
        data = report.to_dict()
        assert data["config"] == {"k": 1}
        assert data["accuracy"]["0.25"] == 0.5
        assert json.dumps(data)

    def test_empty(self) -> None:
        with pytest.raises(EmptyBenchmark):
            run_benchmark(two_room_graph(), [], ScriptedChatClient({}))
