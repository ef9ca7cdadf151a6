from __future__ import annotations

import json
import logging
import os
from dataclasses import replace
from importlib import resources
from typing import Annotated, Any, NoReturn

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from result import Err

from ovigo.config.defaults import ENV_API_KEY, default_config
from ovigo.config.loader import apply_env, apply_overrides, load_config, sample_config_json
from ovigo.config.schema import PipelineConfig
from ovigo.evaluation.benchmark import read_benchmark, run_benchmark
from ovigo.evaluation.metrics import F1_DELTAS, auc_topk, f1_sweep, rank_labels
from ovigo.fixtures.generator import generate_fixture
from ovigo.fixtures.spec import FixtureSpec, load_fixture_spec
from ovigo.graph.serialize import read_graph, write_graph
from ovigo.models.enums import ExportKind, MatchOrder
from ovigo.models.errors import EmptyHierarchy, ErrorCode, OvigoError, ParseError, StageError, UsageError
from ovigo.models.evaluation import TopkReport
from ovigo.models.geometry import BevFrame, BinaryMask
from ovigo.models.scene import SceneGraph
from ovigo.pipeline.builder import build_scene
from ovigo.reasoning.client import ChatClient, OpenAIChatClient, RecordingChatClient, ScriptedChatClient
from ovigo.reasoning.pipeline import PipelineTrace, run_pipeline
from ovigo.reasoning.prompts import template_digests
from ovigo.services.frames import load_sequence
from ovigo.services.fs import DEFAULT_FS
from ovigo.services.location_masks import ingest_location_masks
from ovigo.services.render import graph_to_dot, render_bev_png, render_loc_input_png
from ovigo.services.summary import benchmark_table, f1_table, render_graph_summary, topk_table

app = typer.Typer(
    add_completion=False,
    no_args_is_help=True,
    help="Build hierarchical 3D scene graphs from RGB-D sequences and ground object queries in them.",
)
console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger("ovigo")

ConfigOption = Annotated[str | None, typer.Option("--config", "-c", help="JSON config file over the defaults.")]
SetOption = Annotated[
    list[str] | None, typer.Option("--set", "-s", help="Override one config key, e.g. --set deltaWall=0.5.")
]
TranscriptOption = Annotated[
    str | None, typer.Option("--transcript", "-t", help="Replay chat answers from a JSONL transcript.")
]
RecordOption = Annotated[str | None, typer.Option("--record", help="Write every chat exchange to this JSONL file.")]
VerboseOption = Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging.")]


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False, rich_tracebacks=False)],
        force=True,
    )


def _fail(error: StageError | OvigoError) -> NoReturn:
    if isinstance(error, OvigoError):
        error = StageError.from_exception(error.context.get("stage", "input"), error)
    err_console.print(f"[red]{escape(error.describe())}[/]")
    raise typer.Exit(error.code.exit_code)


def _effective_config(
    config_path: str | None,
    assignments: list[str] | None,
    *,
    threads: int | None = None,
    force_extend: bool = False,
) -> PipelineConfig:
    """defaults < config file < environment < CLI flags."""
    loaded = load_config(config_path)
    if isinstance(loaded, Err):
        err_console.print(f"[red]{escape(loaded.err_value)}[/]")
        raise typer.Exit(ErrorCode.CONFIG_ERROR.exit_code)
    config = apply_env(loaded.ok_value)
    overridden = apply_overrides(config, assignments or [])
    if isinstance(overridden, Err):
        err_console.print(f"[red]{escape(overridden.err_value)}[/]")
        raise typer.Exit(ErrorCode.CONFIG_ERROR.exit_code)
    config = overridden.ok_value
    if threads is not None:
        config = replace(config, threads=max(1, threads))
    if force_extend:
        config = replace(config, force_extend=True)
    return config


def _client(config: PipelineConfig, transcript: str | None) -> ChatClient | None:
    if transcript is not None:
        path = DEFAULT_FS.expanduser(transcript)
        if not DEFAULT_FS.exists(path):
            raise UsageError(f"Transcript {path} does not exist", path=path)
        return ScriptedChatClient.from_jsonl(DEFAULT_FS.read_text(path), path)
    if config.llm_endpoint:
        return OpenAIChatClient(
            config.llm_endpoint,
            config.llm_model,
            api_key=os.environ.get(ENV_API_KEY),
            temperature=config.temperature,
            max_retries=config.max_retries,
            timeout=config.request_timeout,
        )
    return None


def _recording(client: ChatClient | None, record: str | None) -> tuple[ChatClient | None, RecordingChatClient | None]:
    if client is None or record is None:
        return client, None
    recorder = RecordingChatClient(client)
    return recorder, recorder


def _save_transcript(recorder: RecordingChatClient | None, record: str | None) -> None:
    if recorder is not None and record is not None:
        DEFAULT_FS.write_text(record, recorder.to_jsonl())
        logger.info("Wrote %d chat exchanges to %s", len(recorder.entries), record)


def _write_json(path: str, payload: Any) -> None:
    DEFAULT_FS.write_text(path, json.dumps(payload, indent=1, sort_keys=True) + "\n")


@app.command("build-graph")
def build_graph_cmd(
    manifest: Annotated[str, typer.Argument(help="Sequence manifest JSON.")],
    out: Annotated[str, typer.Option("--out", "-o", help="Scene-graph JSON to write.")] = "scene_graph.json",
    config_path: ConfigOption = None,
    assignments: SetOption = None,
    transcript: TranscriptOption = None,
    record: RecordOption = None,
    threads: Annotated[int | None, typer.Option("--threads", help="Worker threads; default is all cores.")] = None,
    force_extend: Annotated[
        bool, typer.Option("--force-extend", help="Pad a lone trailing floor boundary instead of failing.")
    ] = False,
    verbose: VerboseOption = False,
) -> None:
    """Build the building/floor/room/location/object graph of one sequence."""
    _setup_logging(verbose)
    config = _effective_config(config_path, assignments, threads=threads, force_extend=force_extend)
    try:
        client, recorder = _recording(_client(config, transcript), record)
        if client is None:
            logger.warning("No chat client configured; rooms and locations get fallback tags")
        sequence = load_sequence(manifest)
        with console.status("[bold #8abeb7]Building scene graph...[/]") as status:
            built = build_scene(
                sequence,
                config,
                client,
                on_stage=lambda stage: status.update(f"[bold #8abeb7]Building scene graph: {stage}...[/]"),
            )
        if isinstance(built, Err):
            _fail(built.err_value)
        graph = built.ok_value
        write_graph(graph, DEFAULT_FS.expanduser(out))
        _save_transcript(recorder, record)
    except OvigoError as exc:
        _fail(exc)
    render_graph_summary(console, graph)
    console.print(f"[#b5bd68]Wrote {escape(out)}[/]")


def _load_graph(path: str) -> SceneGraph:
    graph = read_graph(path)
    if not graph.floors:
        raise EmptyHierarchy(f"Scene graph {path} has no floors", path=path)
    return graph


@app.command("ground")
def ground_cmd(
    graph_path: Annotated[str, typer.Argument(help="Scene-graph JSON from build-graph.")],
    query: Annotated[str | None, typer.Option("--query", "-q", help="One natural-language query.")] = None,
    benchmark: Annotated[str | None, typer.Option("--benchmark", "-b", help="JSONL benchmark of queries.")] = None,
    out: Annotated[str | None, typer.Option("--out", "-o", help="Result JSON to write.")] = None,
    config_path: ConfigOption = None,
    assignments: SetOption = None,
    transcript: TranscriptOption = None,
    record: RecordOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Ground a query (or every benchmark query) to one object of the graph."""
    _setup_logging(verbose)
    config = _effective_config(config_path, assignments)
    try:
        if (query is None) == (benchmark is None):
            raise UsageError("Pass exactly one of --query or --benchmark")
        client, recorder = _recording(_client(config, transcript), record)
        if client is None:
            raise UsageError("Grounding needs --transcript or an LLM endpoint (llmEndpoint / OVIGO_LLM_ENDPOINT)")
        graph = _load_graph(graph_path)
        if benchmark is not None:
            report = run_benchmark(
                graph, read_benchmark(benchmark), client, margin=config.edge_delta_above, config=config.to_dict()
            )
            _save_transcript(recorder, record)
            if out is not None:
                _write_json(out, report.to_dict())
            console.print(benchmark_table(report))
            return
        trace = PipelineTrace()
        outcome = run_pipeline(graph, str(query), client, margin=config.edge_delta_above, trace=trace)
        _save_transcript(recorder, record)
    except OvigoError as exc:
        _fail(exc)
    if isinstance(outcome, Err):
        _fail(outcome.err_value)
    payload = {
        "query": query,
        "config": config.to_dict(),
        "prompts": template_digests(),
        "result": outcome.ok_value.to_dict(),
        "trace": {
            "floors": trace.floors,
            "rooms": trace.rooms,
            "locations": trace.locations,
            "groups": [{"room": g.room_id, "nodes": sorted(g.node_ids)} for g in trace.groups],
            "edge_pairs": trace.edge_stats.pairs,
            "skipped_rooms": {str(room): reason for room, reason in trace.skipped_rooms.items()},
        },
    }
    if out is not None:
        _write_json(out, payload)
    typer.echo(json.dumps(payload, indent=1, sort_keys=True))


def _read_masks(path: str, floor: int, frame: BevFrame | None) -> tuple[list[BinaryMask], BevFrame | None]:
    """Masks of one floor from a mask file or from the locations of a scene-graph file."""
    resolved = DEFAULT_FS.expanduser(path)
    try:
        is_graph = DEFAULT_FS.exists(resolved) and "schema" in json.loads(DEFAULT_FS.read_text(resolved))
    except (json.JSONDecodeError, TypeError):
        is_graph = False
    if is_graph:
        graph = read_graph(resolved)
        if floor not in graph.floors:
            raise UsageError(f"{path} has no floor {floor}", path=path)
        masks = [loc.mask for _, loc in sorted(graph.locations.items()) if loc.floor_index == floor]
        return masks, graph.floors[floor].frame
    masks = ingest_location_masks(resolved, floor, frame)
    return masks, frame if frame is not None else (masks[0].frame if masks else None)


@app.command("eval-locations")
def eval_locations_cmd(
    predicted: Annotated[str, typer.Argument(help="Predicted masks: a mask file or a scene-graph JSON.")],
    ground_truth: Annotated[str, typer.Argument(help="Ground-truth mask file.")],
    floor: Annotated[int, typer.Option("--floor", help="Floor index both files describe.")] = 0,
    input_order: Annotated[
        bool, typer.Option("--input-order", help="Match predictions in file order instead of best IoU first.")
    ] = False,
    out: Annotated[str | None, typer.Option("--out", "-o", help="Report JSON to write.")] = None,
    verbose: VerboseOption = False,
) -> None:
    """Precision, recall and F1 of location masks over the IoU threshold sweep."""
    _setup_logging(verbose)
    try:
        pred, frame = _read_masks(predicted, floor, None)
        gt, _ = _read_masks(ground_truth, floor, frame)
    except OvigoError as exc:
        _fail(exc)
    order = MatchOrder.INPUT if input_order else MatchOrder.BEST_IOU
    reports = f1_sweep(pred, gt, F1_DELTAS, order=order)
    if out is not None:
        _write_json(
            out,
            {
                "floor": floor,
                "order": order.value,
                "predicted": len(pred),
                "ground_truth": len(gt),
                "sweep": [r.to_dict() for r in reports],
            },
        )
    console.print(f1_table(reports))


@app.command("eval-grounding")
def eval_grounding_cmd(
    graph_path: Annotated[str, typer.Argument(help="Scene-graph JSON from build-graph.")],
    benchmark: Annotated[str, typer.Argument(help="JSONL benchmark of queries with ground-truth boxes.")],
    object_labels: Annotated[
        str | None, typer.Option("--object-labels", help="Ground-truth labels per object node, for top-k ranking.")
    ] = None,
    out: Annotated[str | None, typer.Option("--out", "-o", help="Report JSON to write.")] = None,
    config_path: ConfigOption = None,
    assignments: SetOption = None,
    transcript: TranscriptOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Acc@IoU of the grounding benchmark, plus label-ranking AUC when labels are given."""
    _setup_logging(verbose)
    config = _effective_config(config_path, assignments)
    try:
        client = _client(config, transcript)
        if client is None:
            raise UsageError("Grounding needs --transcript or an LLM endpoint (llmEndpoint / OVIGO_LLM_ENDPOINT)")
        graph = _load_graph(graph_path)
        report = run_benchmark(
            graph, read_benchmark(benchmark), client, margin=config.edge_delta_above, config=config.to_dict()
        )
        payload = report.to_dict()
        payload["prompts"] = template_digests()
        topk = None
        if object_labels is not None:
            topk = _topk(graph, object_labels)
            payload["topk"] = {"auc": topk.auc, "curve": list(topk.curve)}
    except OvigoError as exc:
        _fail(exc)
    if out is not None:
        _write_json(out, payload)
    console.print(benchmark_table(report))
    if topk is not None:
        console.print(topk_table(topk))


def _topk(graph: SceneGraph, labels_path: str) -> TopkReport:
    path = DEFAULT_FS.expanduser(labels_path)
    try:
        doc = json.loads(DEFAULT_FS.read_text(path))
        label_set = [str(label) for label in doc["label_set"]]
        labels = {int(k): str(v) for k, v in doc["objects"].items()}
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path} is not an object-label file: {exc}", path=path) from exc
    known = sorted(i for i in labels if i in graph.objects)
    rankings = [rank_labels(label_set, graph.objects[i].tags) for i in known]
    return auc_topk(rankings, [labels[i] for i in known], label_set)


def _bundled_spec() -> FixtureSpec:
    text = resources.files("ovigo.fixtures").joinpath("apartment.json").read_text(encoding="utf-8")
    return FixtureSpec.from_dict(json.loads(text))


@app.command("gen-fixture")
def gen_fixture_cmd(
    out_dir: Annotated[str, typer.Argument(help="Directory for the generated fixture.")],
    spec_path: Annotated[
        str | None, typer.Option("--spec", help="Fixture spec JSON; the bundled two-floor apartment by default.")
    ] = None,
    seed: Annotated[int | None, typer.Option("--seed", help="Override the fixture seed.")] = None,
    config_path: ConfigOption = None,
    assignments: SetOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Generate a synthetic apartment with ground truth, benchmark and scripted transcript."""
    _setup_logging(verbose)
    config = _effective_config(config_path, assignments)
    try:
        spec = load_fixture_spec(spec_path) if spec_path is not None else _bundled_spec()
        if seed is not None:
            spec = replace(spec, seed=seed)
        with console.status("[bold #8abeb7]Generating fixture...[/]"):
            generated = generate_fixture(spec, out_dir, config=config)
    except OvigoError as exc:
        _fail(exc)
    if isinstance(generated, Err):
        _fail(generated.err_value)
    report = generated.ok_value
    console.print_json(json.dumps(report.to_dict()))


@app.command("export")
def export_cmd(
    graph_path: Annotated[str, typer.Argument(help="Scene-graph JSON from build-graph.")],
    kind: Annotated[ExportKind, typer.Option("--kind", "-k", help="What to export.")] = ExportKind.BEV_PNG,
    out_dir: Annotated[str, typer.Option("--out-dir", "-o", help="Directory for exported files.")] = ".",
    config_path: ConfigOption = None,
    assignments: SetOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Static BEV images, location-detector inputs or a Graphviz DOT of the hierarchy."""
    _setup_logging(verbose)
    written: list[str] = []
    try:
        graph = _load_graph(graph_path)
        if kind is ExportKind.GRAPH_DOT:
            path = os.path.join(out_dir, "scene_graph.dot")
            DEFAULT_FS.write_text(path, graph_to_dot(graph))
            written.append(path)
        else:
            if config_path or assignments:
                band = _effective_config(config_path, assignments).band
            else:
                band = PipelineConfig.from_dict(graph.config, default_config()).band
            for floor_id in sorted(graph.floors):
                if kind is ExportKind.BEV_PNG:
                    path, data = os.path.join(out_dir, f"bev_floor{floor_id}.png"), render_bev_png(graph, floor_id)
                else:
                    path = os.path.join(out_dir, f"loc_input_floor{floor_id}.png")
                    data = render_loc_input_png(graph, floor_id, band)
                DEFAULT_FS.write_bytes(path, data)
                written.append(path)
    except (OvigoError, ValueError) as exc:
        _fail(exc if isinstance(exc, OvigoError) else UsageError(str(exc)))
    for path in written:
        console.print(f"[#b5bd68]Wrote {escape(path)}[/]")


@app.command("sample-config")
def sample_config_cmd() -> None:
    """Print the default configuration as JSON."""
    typer.echo(sample_config_json())


def cli() -> None:
    app()


if __name__ == "__main__":
    cli()
