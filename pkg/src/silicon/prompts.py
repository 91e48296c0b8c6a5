"""Persona-conditioned prompt rendering for each presentation strategy."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from string import Template
from typing import Mapping, Sequence

from .grid import Configuration
from .study import DemographicProfile, ParticipantRecord, ScaleDefinition

DEFAULT_TEMPLATE = "default-v1"
SECTIONS = ("meta", "system", "persona", "item", "user")

PERSONA_LABELS = {
    "age": "Age",
    "gender": "Gender",
    "country_residence": "Country of residence",
    "education": "Education level",
    "ethnicity": "Ethnicity",
    "income": "Income level",
    "political_identity": "Political identity",
}
LEVEL_FIELDS = {
    "none": (),
    "age_gender": ("age", "gender"),
    "extensive": tuple(PERSONA_LABELS),
}


class MissingField(ValueError):
    def __init__(self, level, field_name):
        self.level = level
        self.field = field_name
        super().__init__(f"demographics level {level!r} needs {field_name!r}, which is missing")


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    text: str
    sections: Mapping[str, str]

    @property
    def version(self) -> str:
        """Content hash; any wording change yields a new version."""
        return f"{self.name}@{hashlib.sha256(self.text.encode()).hexdigest()[:12]}"

    @classmethod
    def parse(cls, text: str, name: str = "custom") -> "PromptTemplate":
        sections: dict[str, list[str]] = {}
        current = None
        for line in text.splitlines():
            if line.startswith("@@ "):
                current = line[3:].strip()
                sections[current] = []
            elif current is not None:
                sections[current].append(line)
        missing = [s for s in SECTIONS[1:] if s not in sections]
        if missing:
            raise ValueError(f"template {name!r} lacks sections: {', '.join(missing)}")
        body = {k: "\n".join(v).strip("\n") for k, v in sections.items()}
        meta = dict(
            line.split(":", 1) for line in body.get("meta", "").splitlines() if ":" in line
        )
        if "name" in meta:
            name = f"{meta['name'].strip()}-v{meta.get('version', '0').strip()}"
        return cls(name, text, body)


def load_template(source: str | Path | None = None) -> PromptTemplate:
    if source is None or str(source) == DEFAULT_TEMPLATE:
        text = resources.files("silicon.data").joinpath("templates", f"{DEFAULT_TEMPLATE}.txt")
        return PromptTemplate.parse(text.read_text("utf-8"), DEFAULT_TEMPLATE)
    path = Path(source)
    return PromptTemplate.parse(path.read_text("utf-8"), path.stem)


@dataclass(frozen=True)
class PromptUnit:
    unit_id: str
    covered_items: tuple[tuple[str, str], ...]
    system_text: str
    user_text: str
    # item_id -> (min, max)
    response_schema: Mapping[str, tuple[int, int]]

    @property
    def item_ids(self) -> tuple[str, ...]:
        return tuple(item_id for _, item_id in self.covered_items)


@dataclass(frozen=True)
class PromptPlan:
    config_id: str
    participant_id: str
    template_version: str
    units: tuple[PromptUnit, ...]


def render_demographics(profile: DemographicProfile, level: str) -> str:
    """Persona lines for ``level``; one ``Label: value`` line per field, fixed order."""
    try:
        fields = LEVEL_FIELDS[level]
    except KeyError:
        raise ValueError(f"unknown demographics level {level!r}") from None
    lines = []
    for name in fields:
        value = getattr(profile, name)
        if value is None:
            raise MissingField(level, name)
        if name == "age":
            value = f"{value} years"
        lines.append(f"{PERSONA_LABELS[name]}: {value}")
    return "\n".join(lines)


def _anchor_text(item) -> str:
    if not item.anchor_labels:
        return "higher numbers mean more"
    return ", ".join(f"{k} = {v}" for k, v in sorted(item.anchor_labels.items()))


def _render_unit(template: PromptTemplate, unit_id: str, items, persona_block: str) -> PromptUnit:
    item_tpl = Template(template.sections["item"])
    lines = [
        item_tpl.substitute(
            item_id=item.item_id,
            prompt_text=item.prompt_text,
            response_min=item.response_min,
            response_max=item.response_max,
            anchor_text=_anchor_text(item),
        )
        for _, item in items
    ]
    example = json.dumps({item.item_id: item.response_min for _, item in items})
    user = Template(template.sections["user"]).substitute(
        persona_block=persona_block,
        item_lines="\n".join(lines),
        example_json=example,
    )
    return PromptUnit(
        unit_id=unit_id,
        covered_items=tuple((scale_id, item.item_id) for scale_id, item in items),
        system_text=template.sections["system"],
        user_text=user,
        response_schema={item.item_id: (item.response_min, item.response_max) for _, item in items},
    )


def build_prompt_plan(
    config: Configuration,
    participant: ParticipantRecord,
    scales: Sequence[ScaleDefinition],
    template: PromptTemplate | None = None,
) -> PromptPlan:
    template = template or load_template()
    persona_lines = render_demographics(participant.demographics, config.demographics_level)
    persona_block = ""
    if persona_lines:
        persona_block = Template(template.sections["persona"]).substitute(
            persona_lines=persona_lines
        ) + "\n\n"

    all_items = [(scale.scale_id, item) for scale in scales for item in scale.items]
    if config.strategy == "all_in_one":
        groups = [("all", all_items)]
    elif config.strategy == "scale_by_scale":
        groups = [
            (f"scale-{scale.scale_id}", [(scale.scale_id, item) for item in scale.items])
            for scale in scales
        ]
    else:
        groups = [(f"item-{item.item_id}", [(scale_id, item)]) for scale_id, item in all_items]

    units = tuple(_render_unit(template, uid, items, persona_block) for uid, items in groups)
    return PromptPlan(config.config_id, participant.participant_id, template.version, units)


def units_per_plan(strategy: str, scales: Sequence[ScaleDefinition]) -> int:
    if strategy == "all_in_one":
        return 1
    if strategy == "scale_by_scale":
        return len(scales)
    return sum(len(scale.items) for scale in scales)
