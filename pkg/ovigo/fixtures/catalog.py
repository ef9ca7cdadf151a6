"""Furniture catalog of the synthetic apartment: what each room type holds and how groups are arranged."""

from __future__ import annotations

from dataclasses import dataclass

type Size = tuple[float, float, float]


@dataclass(slots=True, frozen=True)
class GroupPiece:
    tag: str
    size: Size
    # Footprint center relative to the block center, and the height the piece rests on.
    offset: tuple[float, float]
    base: float = 0.0


@dataclass(slots=True, frozen=True)
class RoomKind:
    name: str
    singletons: tuple[tuple[str, Size], ...]
    group: tuple[GroupPiece, ...] = ()
    # Cells (rows, cols) taken by the group inside the 3 x 3 grid.
    block: tuple[int, int] = (0, 0)
    location_tag: str = ""


CATALOG: dict[str, RoomKind] = {
    "living room": RoomKind(
        name="living room",
        singletons=(
            ("tv stand", (0.5, 0.4, 0.5)),
            ("potted plant", (0.4, 0.4, 0.9)),
            ("floor lamp", (0.3, 0.3, 1.2)),
            ("bookshelf", (0.5, 0.35, 1.2)),
            ("armchair", (0.5, 0.5, 0.8)),
        ),
        group=(
            GroupPiece("sofa", (2.0, 0.9, 0.8), (0.0, 0.45)),
            GroupPiece("pillow", (0.4, 0.4, 0.15), (-0.5, 0.45), base=0.8),
            GroupPiece("coffee table", (1.0, 0.6, 0.45), (0.0, -0.6)),
        ),
        block=(2, 2),
        location_tag="seating area",
    ),
    "kitchen": RoomKind(
        name="kitchen",
        singletons=(
            ("stove", (0.5, 0.5, 0.9)),
            ("fridge", (0.5, 0.5, 1.2)),
            ("sink cabinet", (0.5, 0.45, 0.9)),
            ("dining table", (0.5, 0.5, 0.75)),
            ("chair", (0.4, 0.4, 0.9)),
            ("trash can", (0.3, 0.3, 0.6)),
            ("vase", (0.2, 0.2, 0.4)),
            ("stool", (0.35, 0.35, 0.6)),
        ),
    ),
    "bedroom": RoomKind(
        name="bedroom",
        singletons=(
            ("dresser", (0.5, 0.4, 1.0)),
            ("chair", (0.4, 0.4, 0.9)),
            ("laundry basket", (0.4, 0.3, 0.5)),
            ("wardrobe", (0.5, 0.5, 1.2)),
            ("potted plant", (0.4, 0.4, 0.9)),
        ),
        group=(
            GroupPiece("bed", (1.4, 2.0, 0.5), (0.0, 0.0)),
            GroupPiece("bedside table", (0.4, 0.4, 0.55), (-1.0, 0.6)),
            GroupPiece("bedside table", (0.4, 0.4, 0.55), (1.0, 0.6)),
        ),
        block=(2, 2),
        location_tag="sleeping area",
    ),
    "office": RoomKind(
        name="office",
        singletons=(
            ("bookshelf", (0.5, 0.35, 1.2)),
            ("filing cabinet", (0.45, 0.5, 1.0)),
            ("printer stand", (0.5, 0.4, 0.7)),
            ("potted plant", (0.4, 0.4, 0.9)),
            ("armchair", (0.5, 0.5, 0.8)),
            ("trash can", (0.3, 0.3, 0.6)),
        ),
        group=(
            GroupPiece("desk", (1.2, 0.5, 0.75), (0.0, 0.3)),
            GroupPiece("office chair", (0.4, 0.4, 0.9), (0.0, -0.35)),
        ),
        block=(1, 2),
        location_tag="work area",
    ),
    "bathroom": RoomKind(
        name="bathroom",
        singletons=(
            ("toilet", (0.4, 0.5, 0.8)),
            ("sink", (0.5, 0.4, 0.85)),
            ("towel rack", (0.5, 0.2, 1.0)),
            ("trash can", (0.3, 0.3, 0.6)),
            ("laundry basket", (0.4, 0.3, 0.5)),
            ("cabinet", (0.5, 0.4, 1.0)),
            ("hamper", (0.4, 0.4, 0.6)),
            ("bucket", (0.3, 0.3, 0.35)),
        ),
    ),
}

# Keyword rules the scripted tagger applies to a "Contents:" list, first match wins.
ROOM_RULES: tuple[tuple[frozenset[str], str], ...] = (
    (frozenset({"toilet"}), "bathroom"),
    (frozenset({"stove", "fridge"}), "kitchen"),
    (frozenset({"bed", "bedside table"}), "bedroom"),
    (frozenset({"desk", "office chair"}), "office"),
    (frozenset({"sofa", "coffee table"}), "living room"),
)

LOCATION_RULES: tuple[tuple[frozenset[str], str], ...] = (
    (frozenset({"bed", "bedside table"}), "sleeping area"),
    (frozenset({"sofa", "coffee table", "pillow"}), "seating area"),
    (frozenset({"desk", "office chair"}), "work area"),
)


def objects_per_room(kind: RoomKind) -> int:
    return len(kind.singletons) + len(kind.group)
