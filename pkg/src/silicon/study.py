"""Survey instruments, human participants and scale scoring."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

SUM = "sum"
DIFFERENCE = "difference_first_minus_second"
SCORING_RULES = (SUM, DIFFERENCE)

DEMOGRAPHIC_FIELDS = (
    "age",
    "gender",
    "country_residence",
    "education",
    "ethnicity",
    "income",
    "political_identity",
)
# Cells holding one of these are an explicit "missing" marker, not a blank.
MISSING_MARKERS = frozenset({"NA", "N/A", "<missing>"})

BUILTIN_SCALES = "scales.json"


class StudyError(ValueError):
    pass


class WrongArity(StudyError):
    pass


class OutOfRange(StudyError):
    def __init__(self, item_id, value, message=None):
        self.item_id = item_id
        self.value = value
        super().__init__(message or f"{item_id}: value {value} out of range")


class SchemaMismatch(StudyError):
    pass


class RowError(StudyError):
    """A validation failure tied to one data row (1-based, header is row 1)."""

    def __init__(self, row: int, column: str | None, message: str):
        self.row = row
        self.column = column
        super().__init__(f"row {row}" + (f", column {column}" if column else "") + f": {message}")


class ValueOutOfRange(RowError):
    pass


class DuplicateParticipantId(RowError):
    pass


class IncompleteRecord(RowError):
    pass


@dataclass(frozen=True)
class ItemDefinition:
    item_id: str
    prompt_text: str
    response_min: int
    response_max: int
    anchor_labels: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.response_min < self.response_max:
            raise StudyError(f"item {self.item_id}: response_min must be < response_max")
        for value in self.anchor_labels:
            if not self.response_min <= value <= self.response_max:
                raise StudyError(f"item {self.item_id}: anchor {value} outside response range")

    def contains(self, value: int) -> bool:
        return self.response_min <= value <= self.response_max


@dataclass(frozen=True)
class ScaleDefinition:
    scale_id: str
    name: str
    items: tuple[ItemDefinition, ...]
    scoring: str = SUM

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if self.scoring not in SCORING_RULES:
            raise StudyError(f"scale {self.scale_id}: unknown scoring rule {self.scoring!r}")
        if not self.items:
            raise StudyError(f"scale {self.scale_id}: no items")
        if self.scoring == DIFFERENCE and len(self.items) != 2:
            raise StudyError(f"scale {self.scale_id}: difference scoring needs exactly 2 items")
        ids = [item.item_id for item in self.items]
        if len(set(ids)) != len(ids):
            raise StudyError(f"scale {self.scale_id}: duplicate item ids")

    @property
    def score_min(self) -> int:
        if self.scoring == SUM:
            return sum(item.response_min for item in self.items)
        first, second = self.items
        return first.response_min - second.response_max

    @property
    def score_max(self) -> int:
        if self.scoring == SUM:
            return sum(item.response_max for item in self.items)
        first, second = self.items
        return first.response_max - second.response_min

    @property
    def item_ids(self) -> tuple[str, ...]:
        return tuple(item.item_id for item in self.items)


@dataclass(frozen=True)
class DemographicProfile:
    """Verbatim demographic categories; ``None`` marks an explicitly missing field."""

    age: int | None
    gender: str | None
    country_residence: str | None
    education: str | None
    ethnicity: str | None
    income: str | None
    political_identity: str | None

    def __post_init__(self):
        if self.age is not None and self.age <= 0:
            raise StudyError(f"age must be positive, got {self.age}")

    @property
    def complete(self) -> bool:
        return all(getattr(self, name) is not None for name in DEMOGRAPHIC_FIELDS)


@dataclass(frozen=True)
class ParticipantRecord:
    participant_id: str
    demographics: DemographicProfile
    # (scale_id, item_id) -> rating
    responses: Mapping[tuple[str, str], int]

    def item_responses(self, scale: ScaleDefinition) -> list[int]:
        return [self.responses[(scale.scale_id, item.item_id)] for item in scale.items]


@dataclass(frozen=True)
class ScaleScore:
    participant_id: str
    scale_id: str
    raw: int
    normalized: float


def score_scale(scale: ScaleDefinition, responses: Sequence[int]) -> int:
    """Raw score of one respondent on ``scale``; responses in item order."""
    if len(responses) != len(scale.items):
        raise WrongArity(
            f"scale {scale.scale_id} expects {len(scale.items)} responses, got {len(responses)}"
        )
    for item, value in zip(scale.items, responses):
        if not item.contains(value):
            raise OutOfRange(item.item_id, value)
    if scale.scoring == SUM:
        return sum(responses)
    return responses[0] - responses[1]


def normalize_score(raw: int, scale: ScaleDefinition) -> float:
    if not scale.score_min <= raw <= scale.score_max:
        raise OutOfRange(scale.scale_id, raw, f"{scale.scale_id}: score {raw} outside "
                         f"[{scale.score_min}, {scale.score_max}]")
    return (raw - scale.score_min) / (scale.score_max - scale.score_min)


def make_score(participant_id: str, scale: ScaleDefinition, responses: Sequence[int]) -> ScaleScore:
    raw = score_scale(scale, responses)
    return ScaleScore(participant_id, scale.scale_id, raw, normalize_score(raw, scale))


def score_participant(record: ParticipantRecord, scales: Iterable[ScaleDefinition]) -> dict[str, ScaleScore]:
    return {
        scale.scale_id: make_score(record.participant_id, scale, record.item_responses(scale))
        for scale in scales
    }


def score_participants(records: Iterable[ParticipantRecord], scales: Sequence[ScaleDefinition]):
    """participant_id -> scale_id -> ScaleScore, in record order."""
    return {record.participant_id: score_participant(record, scales) for record in records}


# -- scale documents ---------------------------------------------------------


def scales_from_dict(doc: Mapping) -> list[ScaleDefinition]:
    if doc.get("format") != "silicon-scales":
        raise SchemaMismatch("scale document must have format 'silicon-scales'")
    if doc.get("version") != 1:
        raise SchemaMismatch(f"unsupported scale document version {doc.get('version')!r}")
    scales = []
    for entry in doc["scales"]:
        items = tuple(
            ItemDefinition(
                item_id=item["item_id"],
                prompt_text=item["prompt_text"],
                response_min=int(item["response_min"]),
                response_max=int(item["response_max"]),
                anchor_labels={int(k): v for k, v in item.get("anchor_labels", {}).items()},
            )
            for item in entry["items"]
        )
        scale = ScaleDefinition(entry["scale_id"], entry["name"], items, entry["scoring"])
        for bound in ("score_min", "score_max"):
            if bound in entry and entry[bound] != getattr(scale, bound):
                raise SchemaMismatch(
                    f"scale {scale.scale_id}: declared {bound} {entry[bound]} does not match "
                    f"items ({getattr(scale, bound)})"
                )
        scales.append(scale)
    all_items = [item.item_id for scale in scales for item in scale.items]
    if len(set(all_items)) != len(all_items):
        raise SchemaMismatch("item ids must be unique across scales")
    return scales


def scales_to_dict(scales: Sequence[ScaleDefinition]) -> dict:
    return {
        "format": "silicon-scales",
        "version": 1,
        "scales": [
            {
                "scale_id": s.scale_id,
                "name": s.name,
                "scoring": s.scoring,
                "score_min": s.score_min,
                "score_max": s.score_max,
                "items": [
                    {
                        "item_id": i.item_id,
                        "prompt_text": i.prompt_text,
                        "response_min": i.response_min,
                        "response_max": i.response_max,
                        "anchor_labels": {str(k): v for k, v in sorted(i.anchor_labels.items())},
                    }
                    for i in s.items
                ],
            }
            for s in scales
        ],
    }


def load_scales(path: str | Path | None = None) -> list[ScaleDefinition]:
    """Load a scale document; ``None`` gives the built-in BJW and Gut Feelings scales."""
    if path is None:
        text = resources.files("silicon.data").joinpath(BUILTIN_SCALES).read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return scales_from_dict(json.loads(text))


def builtin_scales() -> list[ScaleDefinition]:
    return load_scales(None)


# -- human dataset -----------------------------------------------------------


def dataset_columns(scales: Sequence[ScaleDefinition]) -> list[str]:
    # item columns sorted within each scale: bjw_1..bjw_6, gf_african_americans, gf_european_americans
    return ["participant_id", *DEMOGRAPHIC_FIELDS] + [
        item_id for scale in scales for item_id in sorted(scale.item_ids)
    ]


@dataclass
class HumanDataset:
    """Complete participant records plus the row-level problems found while loading."""

    records: list[ParticipantRecord]
    errors: list[RowError] = field(default_factory=list)
    digest: str = ""

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, index):
        return self.records[index]


def _parse_row(lineno: int, row: Mapping[str, str], scales: Sequence[ScaleDefinition]) -> ParticipantRecord:
    pid = (row.get("participant_id") or "").strip()
    if not pid:
        raise IncompleteRecord(lineno, "participant_id", "empty participant id")

    demo = {}
    for name in DEMOGRAPHIC_FIELDS:
        cell = (row.get(name) or "").strip()
        if not cell:
            raise IncompleteRecord(lineno, name, "blank demographic field")
        if cell in MISSING_MARKERS:
            demo[name] = None
        elif name == "age":
            try:
                demo[name] = int(cell)
            except ValueError:
                raise ValueOutOfRange(lineno, name, f"age {cell!r} is not an integer") from None
            if demo[name] <= 0:
                raise ValueOutOfRange(lineno, name, f"age {cell!r} must be positive")
        else:
            demo[name] = cell

    responses = {}
    for scale in scales:
        for item in scale.items:
            cell = (row.get(item.item_id) or "").strip()
            if not cell or cell in MISSING_MARKERS:
                raise IncompleteRecord(lineno, item.item_id, "missing item response")
            try:
                value = int(cell)
            except ValueError:
                raise ValueOutOfRange(lineno, item.item_id, f"{cell!r} is not an integer") from None
            if not item.contains(value):
                raise ValueOutOfRange(
                    lineno, item.item_id,
                    f"{value} outside [{item.response_min}, {item.response_max}]",
                )
            responses[(scale.scale_id, item.item_id)] = value
    return ParticipantRecord(pid, DemographicProfile(**demo), responses)


def load_human_dataset(
    source: str | Path,
    scales: Sequence[ScaleDefinition] | None = None,
    strict: bool = False,
) -> HumanDataset:
    """Read the human ground-truth CSV.

    Rows that fail validation are dropped and reported in ``errors``; with
    ``strict=True`` the first such row raises instead. A header that does not
    carry every required column always raises ``SchemaMismatch``.
    """
    scales = builtin_scales() if scales is None else list(scales)
    raw = Path(source).read_bytes()
    text = raw.decode("utf-8-sig")
    reader = csv.DictReader(io.StringIO(text, newline=""))
    if reader.fieldnames is None:
        raise SchemaMismatch(f"{source}: missing header row")
    required = dataset_columns(scales)
    missing = [c for c in required if c not in reader.fieldnames]
    if missing:
        raise SchemaMismatch(f"{source}: missing columns {', '.join(missing)}")

    records: list[ParticipantRecord] = []
    errors: list[RowError] = []
    seen: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        try:
            record = _parse_row(lineno, row, scales)
            if record.participant_id in seen:
                raise DuplicateParticipantId(
                    lineno, "participant_id", f"duplicate id {record.participant_id!r}"
                )
        except RowError as exc:
            if strict:
                raise
            errors.append(exc)
            continue
        seen.add(record.participant_id)
        records.append(record)
    return HumanDataset(records, errors, hashlib.sha256(raw).hexdigest())


def write_human_dataset(path: str | Path, records: Iterable[ParticipantRecord],
                        scales: Sequence[ScaleDefinition]) -> None:
    columns = dataset_columns(scales)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            demo = rec.demographics
            row = [rec.participant_id]
            for name in DEMOGRAPHIC_FIELDS:
                value = getattr(demo, name)
                row.append("NA" if value is None else value)
            for scale in scales:
                row.extend(rec.responses[(scale.scale_id, i)] for i in sorted(scale.item_ids))
            writer.writerow(row)
