from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any

from ovigo.models.enums import LocationSource
from ovigo.models.scene import HeightBand

# (json_key, attr_name, type, minimum, maximum), shared by from_dict and CLI --set overrides.
# Bounds are inclusive; None means unbounded.
_NUMERIC_FIELDS: tuple[tuple[str, str, type, float | None, float | None], ...] = (
    ("binH", "bin_h", float, 1e-4, None),
    ("deltaF", "delta_f", float, 1e-4, None),
    ("pH", "p_h", float, 1e-6, 1 - 1e-6),
    ("floorEps", "floor_eps", float, 1e-6, None),
    ("floorMinPts", "floor_min_pts", int, 1, None),
    ("metersPerPixel", "meters_per_pixel", float, 1e-3, None),
    ("deltaWall", "delta_wall", float, 1e-6, 1 - 1e-6),
    ("ceilingMargin", "ceiling_margin", float, 0.0, None),
    ("minSeedPixels", "min_seed_pixels", int, 1, None),
    ("minRoomArea", "min_room_area", float, 0.0, None),
    ("bandMin", "band_min", float, 0.0, 1.0),
    ("bandMax", "band_max", float, 0.0, 1.0),
    ("locationEps", "location_eps", float, 1e-6, None),
    ("locationMinPts", "location_min_pts", int, 1, None),
    ("minObjects", "min_objects", int, 1, None),
    ("compactnessMin", "compactness_min", float, 0.0, 1.0),
    ("minLocationArea", "min_location_area", float, 0.0, None),
    ("alpha", "alpha", float, 0.0, None),
    ("spatialIouMin", "spatial_iou_min", float, 0.0, 1.0),
    ("overlapMin", "overlap_min", float, 0.0, 1.0),
    ("minFragmentPoints", "min_fragment_points", int, 1, None),
    ("minDetectionScore", "min_detection_score", float, 0.0, 1.0),
    ("edgeDeltaAbove", "edge_delta_above", float, 0.0, None),
    ("temperature", "temperature", float, 0.0, 2.0),
    ("maxRetries", "max_retries", int, 1, None),
    ("requestTimeout", "request_timeout", float, 1e-3, None),
)

_OPTIONAL_FIELDS: tuple[tuple[str, str, type, float | None, float | None], ...] = (
    ("tagSimilarityMin", "tag_similarity_min", float, 0.0, 1.0),
    ("threads", "threads", int, 1, None),
)

_BOOL_FIELDS: tuple[tuple[str, str], ...] = (("forceExtend", "force_extend"),)

_STR_FIELDS: tuple[tuple[str, str], ...] = (
    ("llmEndpoint", "llm_endpoint"),
    ("llmModel", "llm_model"),
    ("buildingTag", "building_tag"),
)

_ENUM_FIELDS: tuple[tuple[str, str], ...] = (("locationSource", "location_source"),)


def _known_keys() -> dict[str, str]:
    keys: dict[str, str] = {}
    for json_key, attr, *_ in (*_NUMERIC_FIELDS, *_OPTIONAL_FIELDS):
        keys[json_key] = attr
    for json_key, attr in (*_BOOL_FIELDS, *_STR_FIELDS, *_ENUM_FIELDS):
        keys[json_key] = attr
    return keys


KNOWN_KEYS: dict[str, str] = _known_keys()


def _check_range(json_key: str, value: float, minimum: float | None, maximum: float | None) -> None:
    if minimum is not None and value < minimum:
        msg = f"{json_key}={value} is below the minimum {minimum}"
        raise ValueError(msg)
    if maximum is not None and value > maximum:
        msg = f"{json_key}={value} is above the maximum {maximum}"
        raise ValueError(msg)


def _coerce_number(json_key: str, raw: Any, kind: type) -> float | int:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        msg = f"{json_key} must be a number, got {raw!r}"
        raise ValueError(msg)
    if kind is int:
        if isinstance(raw, float) and not raw.is_integer():
            msg = f"{json_key} must be an integer, got {raw!r}"
            raise ValueError(msg)
        return int(raw)
    return float(raw)


@dataclass(slots=True)
class PipelineConfig:
    # floors
    bin_h: float = 0.01
    delta_f: float = 0.2
    p_h: float = 0.9
    floor_eps: float = 0.5
    floor_min_pts: int = 1
    force_extend: bool = False
    # rooms
    meters_per_pixel: float = 0.05
    delta_wall: float = 0.5
    ceiling_margin: float = 0.15
    min_seed_pixels: int = 4
    min_room_area: float = 1.0
    # locations
    band_min: float = 0.05
    band_max: float = 0.85
    location_eps: float = 0.5
    location_min_pts: int = 10
    min_objects: int = 2
    compactness_min: float = 0.3
    min_location_area: float = 0.25
    alpha: float = 0.5
    location_source: LocationSource = LocationSource.GEOMETRIC
    # objects
    spatial_iou_min: float = 0.25
    overlap_min: float = 0.5
    min_fragment_points: int = 20
    min_detection_score: float = 0.3
    tag_similarity_min: float | None = None
    # edges
    edge_delta_above: float = 0.5
    # llm
    llm_endpoint: str = ""
    llm_model: str = "gpt-4o-mini"
    temperature: float = 0.0
    max_retries: int = 3
    request_timeout: float = 60.0
    # runtime
    threads: int | None = None
    building_tag: str = "building"

    @property
    def band(self) -> HeightBand:
        return HeightBand(self.band_min, self.band_max)

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {}
        for json_key, attr in sorted(KNOWN_KEYS.items()):
            value = getattr(self, attr)
            payload[json_key] = value.value if isinstance(value, LocationSource) else value
        return payload

    @classmethod
    def from_dict(cls, data: dict[str, Any], defaults: PipelineConfig) -> PipelineConfig:
        """Overlay *data* onto *defaults*; raises ``ValueError`` on unknown keys or bad values."""
        unknown = sorted(set(data) - set(KNOWN_KEYS))
        if unknown:
            msg = f"Unknown config keys: {', '.join(unknown)}"
            raise ValueError(msg)

        kwargs: dict[str, Any] = {f.name: getattr(defaults, f.name) for f in fields(cls)}
        for json_key, attr, kind, minimum, maximum in _NUMERIC_FIELDS:
            if json_key in data:
                value = _coerce_number(json_key, data[json_key], kind)
                _check_range(json_key, value, minimum, maximum)
                kwargs[attr] = value
        for json_key, attr, kind, minimum, maximum in _OPTIONAL_FIELDS:
            if json_key in data:
                raw = data[json_key]
                if raw is None:
                    kwargs[attr] = None
                    continue
                value = _coerce_number(json_key, raw, kind)
                _check_range(json_key, value, minimum, maximum)
                kwargs[attr] = value
        for json_key, attr in _BOOL_FIELDS:
            if json_key in data:
                if not isinstance(data[json_key], bool):
                    msg = f"{json_key} must be true or false"
                    raise ValueError(msg)
                kwargs[attr] = data[json_key]
        for json_key, attr in _STR_FIELDS:
            if json_key in data:
                kwargs[attr] = str(data[json_key])
        if "locationSource" in data:
            kwargs["location_source"] = LocationSource(str(data["locationSource"]))

        config = cls(**kwargs)
        if not config.band_min < config.band_max:
            msg = f"bandMin ({config.band_min}) must be below bandMax ({config.band_max})"
            raise ValueError(msg)
        return config
