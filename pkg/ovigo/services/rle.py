"""Row-major run-length encoding of boolean grids.

A mask is a list of rows; each row is a list of ``[value, start, length]``
triples covering the row left to right with no gaps. Every run is emitted,
zero runs included, so a decoder can check widths without knowing the frame.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from ovigo.models.errors import FrameMismatch, ParseError
from ovigo.models.geometry import BoolArray

type RleRows = list[list[list[int]]]


def encode_rle(values: BoolArray) -> RleRows:
    grid = np.asarray(values, dtype=bool)
    rows: RleRows = []
    for row in grid:
        # Run boundaries are where the value changes.
        change = np.flatnonzero(np.diff(row.astype(np.int8))) + 1
        starts = np.concatenate(([0], change))
        ends = np.concatenate((change, [row.shape[0]]))
        rows.append([[int(row[s]), int(s), int(e - s)] for s, e in zip(starts, ends, strict=True)])
    return rows


def decode_rle(rows: Any, h: int, w: int, *, where: str = "mask") -> BoolArray:
    if not isinstance(rows, list):
        raise ParseError(f"{where} must be a list of rows", path=where)
    if len(rows) != h:
        raise FrameMismatch(f"{where} has {len(rows)} rows, frame expects {h}", path=where)
    out = np.zeros((h, w), dtype=bool)
    for r, runs in enumerate(rows):
        cursor = 0
        if not isinstance(runs, list):
            raise ParseError(f"{where}[{r}] must be a list of runs", path=f"{where}[{r}]")
        for k, run in enumerate(runs):
            if not (isinstance(run, list) and len(run) == 3 and all(isinstance(v, int) for v in run)):
                raise ParseError(f"{where}[{r}][{k}] must be [value, start, length]", path=f"{where}[{r}][{k}]")
            value, start, length = run
            if value not in (0, 1) or start != cursor or length < 1:
                raise ParseError(f"{where}[{r}][{k}] breaks the run sequence", path=f"{where}[{r}][{k}]")
            if value:
                out[r, start : start + length] = True
            cursor = start + length
        if cursor != w:
            raise FrameMismatch(f"{where}[{r}] covers {cursor} columns, frame expects {w}", path=f"{where}[{r}]")
    return out
