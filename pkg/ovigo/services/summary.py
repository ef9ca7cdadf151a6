from __future__ import annotations

import io
from collections.abc import Sequence

from rich.console import Console
from rich.markup import escape
from rich.table import Table

from ovigo.evaluation.metrics import TOPK_GRID
from ovigo.models.enums import EdgeKind
from ovigo.models.evaluation import BenchmarkReport, MatchReport, TopkReport
from ovigo.models.scene import SceneGraph


def table_text(table: Table, width: int = 110) -> str:
    """Plain aligned-column rendering for report files."""
    buffer = io.StringIO()
    Console(file=buffer, width=width, color_system=None, force_terminal=False).print(table)
    return buffer.getvalue()


def graph_summary_table(graph: SceneGraph) -> Table:
    table = Table(title=f"Scene Graph: {escape(graph.building_tag)}", header_style="bold cyan")
    table.add_column("Room", justify="right")
    table.add_column("Floor", justify="right")
    table.add_column("Tag")
    table.add_column("Area m²", justify="right")
    table.add_column("Locations", justify="right")
    table.add_column("Objects", justify="right")
    for room in graph.rooms.values():
        floor = graph.parent_of(EdgeKind.FR, room.id)
        table.add_row(
            str(room.id),
            "" if floor is None else str(floor),
            escape(room.tag),
            f"{room.mask.area:.1f}",
            str(len(graph.children(EdgeKind.RL, {room.id}))),
            str(len(graph.children(EdgeKind.RO, {room.id}))),
        )
    table.add_section()
    table.add_row(
        "[bold]Total[/bold]",
        f"[bold]{len(graph.floors)}[/bold]",
        "",
        "",
        f"[bold]{len(graph.locations)}[/bold]",
        f"[bold]{len(graph.objects)}[/bold]",
    )
    return table


def benchmark_table(report: BenchmarkReport) -> Table:
    table = Table(title="Grounding Benchmark", header_style="bold yellow")
    table.add_column("#", justify="right")
    table.add_column("Query")
    table.add_column("Object", justify="right")
    table.add_column("IoU", justify="right")
    table.add_column("Error")
    for i, outcome in enumerate(report.outcomes, start=1):
        table.add_row(
            str(i),
            escape(outcome.query),
            "-" if outcome.object_id is None else str(outcome.object_id),
            f"{outcome.iou:.3f}",
            escape(outcome.error or ""),
        )
    table.add_section()
    for threshold, acc in sorted(report.accuracy.items()):
        table.add_row("", f"[bold]Acc@{threshold:g}[/bold]", "", f"[bold]{acc:.3f}[/bold]", "")
    return table


def f1_table(reports: Sequence[MatchReport]) -> Table:
    table = Table(title="Location F1", header_style="bold yellow")
    for name in ("δ", "TP", "FP", "FN", "Precision", "Recall", "F1"):
        table.add_column(name, justify="right")
    for r in reports:
        table.add_row(
            f"{r.delta:g}", str(r.tp), str(r.fp), str(r.fn), f"{r.precision:.3f}", f"{r.recall:.3f}", f"{r.f1:.3f}"
        )
    return table


def topk_table(report: TopkReport, grid: Sequence[int] = TOPK_GRID) -> Table:
    table = Table(title="Object Label Ranking", header_style="bold yellow")
    table.add_column("Metric")
    table.add_column("%", justify="right")
    table.add_row("AUC top-k", f"{report.auc:.2f}")
    for k in grid:
        table.add_row(f"top-{k}", f"{report.at(k):.2f}")
    return table


def render_graph_summary(console: Console, graph: SceneGraph) -> None:
    console.print(graph_summary_table(graph))
