"""Turning raw completions into validated ratings and per-configuration datasets."""

from __future__ import annotations

import csv
import io
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .prompts import PromptUnit
from .study import ParticipantRecord, ScaleDefinition, ScaleScore, make_score

VALID = "valid"
REFUSAL = "refusal"
UNPARSEABLE = "unparseable"
OUT_OF_RANGE = "out_of_range"
NONSENSE = "nonsense"
OUTCOMES = (VALID, REFUSAL, UNPARSEABLE, OUT_OF_RANGE, NONSENSE)


class EmptyDataset(ValueError):
    pass


@dataclass(frozen=True)
class ParsedResponse:
    unit_id: str
    outcome: str
    ratings: Mapping[str, int] | None = None

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")
        if (self.outcome == VALID) != (self.ratings is not None):
            raise ValueError("ratings are present exactly when the outcome is valid")


# -- refusal phrases ---------------------------------------------------------


def load_refusal_patterns(path: str | Path | None = None) -> tuple[re.Pattern, ...]:
    if path is None:
        text = resources.files("silicon.data").joinpath("refusal_phrases.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return tuple(
        re.compile(line, re.IGNORECASE)
        for line in (raw.strip() for raw in text.splitlines())
        if line and not line.startswith("#")
    )


@lru_cache(maxsize=1)
def default_refusal_patterns() -> tuple[re.Pattern, ...]:
    return load_refusal_patterns()


def is_refusal(text: str, patterns: Sequence[re.Pattern] | None = None) -> bool:
    patterns = default_refusal_patterns() if patterns is None else patterns
    return any(p.search(text) for p in patterns)


# -- parsing -----------------------------------------------------------------

_INT = re.compile(r"(?<![\w.])(-?\d+)(?![\w]|\.\d)")
# scale references and list markers that carry digits but no rating
_NOISE = [
    re.compile(r"\b(?:on\s+)?(?:a|the)\s+scale\s+(?:of|from)\s+-?\d+\s*(?:to|-|–)\s*-?\d+", re.I),
    re.compile(r"\bfrom\s+-?\d+\s*\([^)]*\)\s*to\s+-?\d+\s*\([^)]*\)", re.I),
    re.compile(r"\b(?:between\s+)?-?\d+\s+(?:and|to)\s+-?\d+\b(?=[^\n]*\b(?:scale|range)\b)", re.I),
    re.compile(r"\bout\s+of\s+\d+", re.I),
    re.compile(r"/\s*\d+"),
    re.compile(r"\(\s*\d+\s*=[^)]*\)"),
    re.compile(r"\b(?:item|question|q|statement)\s*#?\s*\d+\b", re.I),
    re.compile(r"^\s*(?:\d+[.)]|[-*•])\s+", re.M),
]


# "between 5 and 7", "3 or 4", "5-7": a range, not a rating
_HEDGE = re.compile(r"\bbetween\s+-?\d+\s+and\s+-?\d+|\b\d+\s*(?:or|-|–|to)\s*\d+\b", re.I)
# a lenient pass found the answer but it is not usable; stop trying others
_REJECT = object()


def _as_int(value) -> int | None:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str) and re.fullmatch(r"\s*-?\d+\s*", value):
        return int(value)
    return None


def _strict(text: str, unit: PromptUnit) -> dict[str, int] | None:
    try:
        doc = json.loads(text.strip())
    except (json.JSONDecodeError, ValueError):
        return None
    if not isinstance(doc, dict) or set(doc) != set(unit.response_schema):
        return None
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in doc.values()):
        return None
    return {k: doc[k] for k in unit.item_ids}


def _embedded_json(text: str, unit: PromptUnit) -> dict[str, int] | None:
    start, end = text.find("{"), text.rfind("}")
    if start < 0 or end <= start:
        return None
    try:
        doc = json.loads(text[start:end + 1])
    except (json.JSONDecodeError, ValueError):
        return None
    if not isinstance(doc, dict):
        return None
    lowered = {str(k).strip().lower(): v for k, v in doc.items()}
    if not all(item_id.lower() in lowered for item_id in unit.item_ids):
        return None
    out = {}
    for item_id in unit.item_ids:
        value = _as_int(lowered[item_id.lower()])
        if value is None:
            # the object names every item but one answer is not an integer
            return _REJECT
        out[item_id] = value
    return out


def _aliases(item_id: str) -> list[str]:
    """Regexes naming an item: its id, the id with loose separators, and for
    ids like ``gf_european_americans`` the trailing words alone."""
    words = [w for w in item_id.split("_") if w]
    aliases = [re.escape(item_id)]
    if len(words) > 1:
        aliases.append(r"[\s_\-]*".join(map(re.escape, words)))
        tail = words[1:]
        if all(w.isalpha() for w in tail):
            aliases.append(r"[\s_\-]+".join(map(re.escape, tail)))
    return aliases


def _labeled(text: str, unit: PromptUnit) -> dict[str, int] | None:
    out = {}
    claimed = set()
    for item_id in unit.item_ids:
        for alias in _aliases(item_id):
            pattern = re.compile(
                rf"(?<![\w-])(?:{alias})(?![\w])"
                rf"[^\d\n]{{0,40}}?(?<![\w.])(-?\d+)(?![\w]|\.\d)",
                re.I,
            )
            m = pattern.search(text)
            if m:
                if m.start(1) in claimed:
                    return None  # one number cannot answer two items
                claimed.add(m.start(1))
                out[item_id] = int(m.group(1))
                break
        else:
            return None
    return out


def _ordinal(text: str, unit: PromptUnit) -> dict[str, int] | None:
    cleaned = text
    for item_id in unit.item_ids:
        cleaned = re.sub(re.escape(item_id), " ", cleaned, flags=re.I)
    for pattern in _NOISE:
        cleaned = pattern.sub(" ", cleaned)
    if _HEDGE.search(cleaned):
        return None
    values = [int(v) for v in _INT.findall(cleaned)]
    if len(values) != len(unit.item_ids):
        return None
    return dict(zip(unit.item_ids, values))


def _check_range(unit: PromptUnit, ratings: Mapping[str, int]) -> ParsedResponse:
    for item_id, value in ratings.items():
        lo, hi = unit.response_schema[item_id]
        if not lo <= value <= hi:
            return ParsedResponse(unit.unit_id, OUT_OF_RANGE)
    return ParsedResponse(unit.unit_id, VALID, dict(ratings))


def parse_ratings(raw_text: str, unit: PromptUnit,
                  refusal_patterns: Sequence[re.Pattern] | None = None) -> ParsedResponse:
    """Classify one completion.

    Order: strict JSON object with exactly the unit's keys, then refusal
    phrases, then the lenient passes (embedded JSON, labels near item ids,
    bare integers in item order). Anything else is ``nonsense`` when it holds
    no digits at all and ``unparseable`` otherwise.
    """
    text = raw_text or ""
    if not text.strip():
        return ParsedResponse(unit.unit_id, UNPARSEABLE)

    strict = _strict(text, unit)
    if strict is not None:
        return _check_range(unit, strict)

    if is_refusal(text, refusal_patterns):
        return ParsedResponse(unit.unit_id, REFUSAL)

    for lenient in (_embedded_json, _labeled, _ordinal):
        ratings = lenient(text, unit)
        if ratings is _REJECT:
            break
        if ratings is not None:
            return _check_range(unit, ratings)

    if not re.search(r"\d", text):
        return ParsedResponse(unit.unit_id, NONSENSE)
    return ParsedResponse(unit.unit_id, UNPARSEABLE)


# -- datasets ----------------------------------------------------------------


@dataclass(frozen=True)
class DatasetRow:
    participant_id: str
    ratings: Mapping[str, int]
    scores: Mapping[str, ScaleScore]


@dataclass
class ConfigDataset:
    config_id: str
    rows: list[DatasetRow]
    attempted: int
    # participant_id -> outcome -> count over that participant's units
    exclusion_annotations: dict[str, dict[str, int]] = field(default_factory=dict)
    template_version: str = ""

    @property
    def completeness_fraction(self) -> float:
        return len(self.rows) / self.attempted if self.attempted else 0.0

    def raw_scores(self, scale_id: str) -> list[int]:
        return [row.scores[scale_id].raw for row in self.rows]

    def normalized_scores(self, scale_id: str) -> list[float]:
        return [row.scores[scale_id].normalized for row in self.rows]

    def outcome_counts(self) -> dict[str, int]:
        total = Counter({o: 0 for o in OUTCOMES})
        for counts in self.exclusion_annotations.values():
            total.update(counts)
        return {o: total[o] for o in OUTCOMES}


def assemble_config_dataset(
    config_id: str,
    parsed: Mapping[str, Sequence[ParsedResponse]],
    participants: Sequence[ParticipantRecord],
    scales: Sequence[ScaleDefinition],
    template_version: str = "",
) -> ConfigDataset:
    """Keep a participant only if every one of their units parsed as valid.

    ``parsed`` maps participant_id to that participant's parsed units. Rows
    follow the order of ``participants``, whatever order units arrive in.
    """
    needed = [item.item_id for scale in scales for item in scale.items]
    rows = []
    notes = {}
    for participant in participants:
        responses = parsed.get(participant.participant_id, ())
        counts = Counter(r.outcome for r in responses)
        notes[participant.participant_id] = {o: counts[o] for o in OUTCOMES if counts[o]}
        if not responses or any(r.outcome != VALID for r in responses):
            continue
        ratings = {}
        for r in responses:
            ratings.update(r.ratings)
        if any(item_id not in ratings for item_id in needed):
            continue
        scores = {
            scale.scale_id: make_score(
                participant.participant_id, scale, [ratings[i] for i in scale.item_ids]
            )
            for scale in scales
        }
        rows.append(DatasetRow(participant.participant_id, {i: ratings[i] for i in needed}, scores))
    return ConfigDataset(config_id, rows, len(participants), notes, template_version)


def apply_config_threshold(datasets: Iterable[ConfigDataset], threshold: float = 0.5):
    """Split into (retained, excluded); retained means completeness >= threshold."""
    retained, excluded = [], []
    for ds in datasets:
        # compare counts, not a rounded fraction
        (retained if len(ds.rows) >= threshold * ds.attempted else excluded).append(ds)
    return retained, excluded


def flag_zero_variance(dataset: ConfigDataset, scale_ids: Sequence[str] | None = None) -> dict[str, bool]:
    if not dataset.rows:
        raise EmptyDataset(f"{dataset.config_id}: no retained rows")
    scale_ids = scale_ids or list(dataset.rows[0].scores)
    return {sid: len(set(dataset.raw_scores(sid))) <= 1 for sid in scale_ids}


@dataclass
class ExclusionReport:
    counts: dict[str, dict[str, int]]
    attempted_units: dict[str, int]
    completeness: dict[str, float]
    configs_excluded_by_threshold: list[str]
    zero_variance_flags: dict[str, dict[str, bool]]
    threshold: float

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "counts": self.counts,
            "attempted_units": self.attempted_units,
            "completeness": self.completeness,
            "configs_excluded_by_threshold": self.configs_excluded_by_threshold,
            "zero_variance_flags": self.zero_variance_flags,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ExclusionReport":
        return cls(
            counts=doc["counts"],
            attempted_units=doc["attempted_units"],
            completeness=doc["completeness"],
            configs_excluded_by_threshold=list(doc["configs_excluded_by_threshold"]),
            zero_variance_flags=doc["zero_variance_flags"],
            threshold=doc["threshold"],
        )


def build_exclusion_report(datasets: Sequence[ConfigDataset], threshold: float = 0.5) -> ExclusionReport:
    retained, excluded = apply_config_threshold(datasets, threshold)
    return ExclusionReport(
        counts={ds.config_id: ds.outcome_counts() for ds in datasets},
        attempted_units={ds.config_id: sum(ds.outcome_counts().values()) for ds in datasets},
        completeness={ds.config_id: ds.completeness_fraction for ds in datasets},
        configs_excluded_by_threshold=[ds.config_id for ds in excluded],
        zero_variance_flags={ds.config_id: flag_zero_variance(ds) for ds in retained if ds.rows},
        threshold=threshold,
    )


# -- per-configuration CSV ---------------------------------------------------


def dataset_csv_columns(scales: Sequence[ScaleDefinition]) -> list[str]:
    cols = ["participant_id"] + [i.item_id for s in scales for i in s.items]
    cols += [f"{s.scale_id}_raw" for s in scales]
    cols += [f"{s.scale_id}_normalized" for s in scales]
    return cols + ["template_version"]


def dataset_to_csv(dataset: ConfigDataset, scales: Sequence[ScaleDefinition]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(dataset_csv_columns(scales))
    for row in dataset.rows:
        writer.writerow(
            [row.participant_id]
            + [row.ratings[i.item_id] for s in scales for i in s.items]
            + [row.scores[s.scale_id].raw for s in scales]
            + [repr(row.scores[s.scale_id].normalized) for s in scales]
            + [dataset.template_version]
        )
    return buf.getvalue()


def dataset_from_csv(text: str, config_id: str, attempted: int,
                     scales: Sequence[ScaleDefinition]) -> ConfigDataset:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(dataset_csv_columns(scales)) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"{config_id}: dataset CSV lacks columns {sorted(missing)}")
    rows = []
    version = ""
    for rec in reader:
        ratings = {i.item_id: int(rec[i.item_id]) for s in scales for i in s.items}
        scores = {
            s.scale_id: make_score(rec["participant_id"], s, [ratings[i] for i in s.item_ids])
            for s in scales
        }
        rows.append(DatasetRow(rec["participant_id"], ratings, scores))
        version = rec["template_version"]
    return ConfigDataset(config_id, rows, attempted, {}, version)
