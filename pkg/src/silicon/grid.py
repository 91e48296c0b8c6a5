"""Analytic-decision dimensions and the configuration cross-product."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

SAMPLING = "sampling"
REASONING = "reasoning"
MODEL_KINDS = (SAMPLING, REASONING)

EFFORTS = ("low", "high")
DEMOGRAPHICS_LEVELS = ("none", "age_gender", "extensive")
STRATEGIES = ("all_in_one", "scale_by_scale", "item_by_item")

PAPER_PRESET = "paper-2025-grid"

SEP = "__"
_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9.\-]*(?:_[A-Za-z0-9.\-]+)*$")


class GridError(ValueError):
    pass


class EmptyDimension(GridError):
    pass


class DuplicateValue(GridError):
    pass


def _check_id(kind: str, value: str) -> None:
    # config ids double as file names and use "__" as a separator
    if not _ID_RE.match(value) or SEP in value:
        raise GridError(f"invalid {kind} {value!r}")


@dataclass(frozen=True, order=True)
class ModelSpec:
    provider_id: str
    model_id: str
    kind: str = SAMPLING

    def __post_init__(self):
        _check_id("provider_id", self.provider_id)
        _check_id("model_id", self.model_id)
        if self.kind not in MODEL_KINDS:
            raise GridError(f"model {self.model_id}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class SamplingSetting:
    temperature: float | None = None
    reasoning_effort: str | None = None

    def __post_init__(self):
        if (self.temperature is None) == (self.reasoning_effort is None):
            raise GridError("a sampling setting is exactly one of temperature or reasoning_effort")
        if self.temperature is not None:
            object.__setattr__(self, "temperature", float(self.temperature))
            if self.temperature < 0:
                raise GridError(f"temperature must be >= 0, got {self.temperature}")
        elif self.reasoning_effort not in EFFORTS:
            raise GridError(f"unknown reasoning effort {self.reasoning_effort!r}")

    @property
    def kind(self) -> str:
        return SAMPLING if self.temperature is not None else REASONING

    @property
    def label(self) -> str:
        if self.temperature is not None:
            return f"t{self.temperature!r}"
        return f"e{self.reasoning_effort}"

    @property
    def display(self) -> str:
        if self.temperature is not None:
            return f"temperature {self.temperature:g}"
        return f"effort {self.reasoning_effort}"

    def sort_key(self):
        if self.temperature is not None:
            return (0, self.temperature)
        return (1, EFFORTS.index(self.reasoning_effort))

    @classmethod
    def parse(cls, label: str) -> "SamplingSetting":
        if label.startswith("t"):
            return cls(temperature=float(label[1:]))
        if label.startswith("e"):
            return cls(reasoning_effort=label[1:])
        raise GridError(f"bad sampling label {label!r}")


@dataclass(frozen=True)
class Configuration:
    model: ModelSpec
    sampling: SamplingSetting
    demographics_level: str
    strategy: str
    # Table-1 style decisions outside the four studied dimensions, as sorted (key, value) pairs
    extra: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.sampling.kind != self.model.kind:
            raise GridError(
                f"{self.model.model_id} is a {self.model.kind} model; "
                f"cannot use {self.sampling.display}"
            )
        if self.demographics_level not in DEMOGRAPHICS_LEVELS:
            raise GridError(f"unknown demographics level {self.demographics_level!r}")
        if self.strategy not in STRATEGIES:
            raise GridError(f"unknown strategy {self.strategy!r}")
        extra = tuple(sorted((str(k), str(v)) for k, v in dict(self.extra).items()))
        for k, v in extra:
            _check_id("extra decision key", k)
            _check_id("extra decision value", v)
        object.__setattr__(self, "extra", extra)

    @property
    def config_id(self) -> str:
        parts = [
            self.model.provider_id,
            self.model.model_id,
            self.model.kind,
            self.sampling.label,
            self.demographics_level,
            self.strategy,
        ]
        parts += [f"x.{k}.{v}" for k, v in self.extra]
        return SEP.join(parts)

    def sort_key(self):
        return (
            self.model.provider_id,
            self.model.model_id,
            self.sampling.sort_key(),
            DEMOGRAPHICS_LEVELS.index(self.demographics_level),
            STRATEGIES.index(self.strategy),
            self.extra,
        )

    def decisions(self) -> dict[str, str]:
        """Human-readable decision values keyed by dimension, for panels and tables."""
        out = {
            "model": self.model.model_id,
            "setting": self.sampling.display,
            "demographics": self.demographics_level,
            "strategy": self.strategy,
        }
        out.update({f"extra:{k}": v for k, v in self.extra})
        return out


def parse_config_id(config_id: str) -> Configuration:
    parts = config_id.split(SEP)
    if len(parts) < 6:
        raise GridError(f"malformed config id {config_id!r}")
    provider, model_id, kind, setting, level, strategy, *rest = parts
    extra = []
    for token in rest:
        if not token.startswith("x.") or token.count(".") < 2:
            raise GridError(f"malformed extra decision {token!r} in {config_id!r}")
        _, key, value = token.split(".", 2)
        extra.append((key, value))
    return Configuration(
        ModelSpec(provider, model_id, kind),
        SamplingSetting.parse(setting),
        level,
        strategy,
        tuple(extra),
    )


def config_sort_key(config_id: str):
    return parse_config_id(config_id).sort_key()


@dataclass(frozen=True)
class DecisionGrid:
    models: tuple[ModelSpec, ...]
    temperatures: tuple[float, ...] = ()
    efforts: tuple[str, ...] = ()
    demographics_levels: tuple[str, ...] = DEMOGRAPHICS_LEVELS
    strategies: tuple[str, ...] = STRATEGIES
    extra: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "temperatures", tuple(float(t) for t in self.temperatures))
        object.__setattr__(self, "efforts", tuple(self.efforts))
        object.__setattr__(self, "demographics_levels", tuple(self.demographics_levels))
        object.__setattr__(self, "strategies", tuple(self.strategies))

    def validate(self) -> None:
        if not self.models:
            raise EmptyDimension("models")
        if not self.demographics_levels:
            raise EmptyDimension("demographics_levels")
        if not self.strategies:
            raise EmptyDimension("strategies")
        kinds = {m.kind for m in self.models}
        if SAMPLING in kinds and not self.temperatures:
            raise EmptyDimension("temperatures (required by sampling models)")
        if REASONING in kinds and not self.efforts:
            raise EmptyDimension("efforts (required by reasoning models)")
        for name in ("temperatures", "efforts", "demographics_levels", "strategies"):
            values = getattr(self, name)
            if len(set(values)) != len(values):
                raise DuplicateValue(name)
        model_keys = [(m.provider_id, m.model_id) for m in self.models]
        if len(set(model_keys)) != len(model_keys):
            raise DuplicateValue("models")
        for effort in self.efforts:
            SamplingSetting(reasoning_effort=effort)
        for temperature in self.temperatures:
            SamplingSetting(temperature=temperature)
        for level in self.demographics_levels:
            if level not in DEMOGRAPHICS_LEVELS:
                raise GridError(f"unknown demographics level {level!r}")
        for strategy in self.strategies:
            if strategy not in STRATEGIES:
                raise GridError(f"unknown strategy {strategy!r}")

    def settings_for(self, model: ModelSpec) -> list[SamplingSetting]:
        if model.kind == REASONING:
            return [SamplingSetting(reasoning_effort=e) for e in self.efforts]
        return [SamplingSetting(temperature=t) for t in self.temperatures]

    def to_dict(self) -> dict:
        return {
            "format": "silicon-grid",
            "version": 1,
            "models": [
                {"provider_id": m.provider_id, "model_id": m.model_id, "kind": m.kind}
                for m in self.models
            ],
            "temperatures": list(self.temperatures),
            "efforts": list(self.efforts),
            "demographics_levels": list(self.demographics_levels),
            "strategies": list(self.strategies),
            "extra_decisions": dict(sorted(self.extra.items())),
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @classmethod
    def from_dict(cls, doc: Mapping) -> "DecisionGrid":
        if doc.get("format", "silicon-grid") != "silicon-grid":
            raise GridError("grid document must have format 'silicon-grid'")
        try:
            models = [ModelSpec(m["provider_id"], m["model_id"], m.get("kind", SAMPLING))
                      for m in doc["models"]]
        except KeyError as exc:
            raise GridError(f"grid model entry missing {exc}") from None
        grid = cls(
            models=models,
            temperatures=doc.get("temperatures", ()),
            efforts=doc.get("efforts", ()),
            demographics_levels=doc.get("demographics_levels", DEMOGRAPHICS_LEVELS),
            strategies=doc.get("strategies", STRATEGIES),
            extra=dict(doc.get("extra_decisions", {})),
        )
        grid.validate()
        return grid


def enumerate_configurations(grid: DecisionGrid) -> list[Configuration]:
    """Every valid configuration of ``grid`` in canonical order."""
    grid.validate()
    extra = tuple(grid.extra.items())
    configs = [
        Configuration(model, setting, level, strategy, extra)
        for model in grid.models
        for setting in grid.settings_for(model)
        for level in grid.demographics_levels
        for strategy in grid.strategies
    ]
    configs.sort(key=Configuration.sort_key)
    return configs


def expected_cell_count(grid: DecisionGrid, participants: int) -> int:
    return len(enumerate_configurations(grid)) * participants


# Model ids are current API names for the models used in the original grid;
# swap them for successors when a model is retired.
PAPER_MODELS = (
    ModelSpec("openai", "gpt-5-mini", REASONING),
    ModelSpec("openai", "gpt-5-nano", REASONING),
    ModelSpec("openai", "o3-mini", REASONING),
    ModelSpec("openai", "o4-mini", REASONING),
    ModelSpec("openai", "gpt-4o", SAMPLING),
    ModelSpec("openai", "gpt-4o-mini", SAMPLING),
    ModelSpec("openai", "gpt-3.5-turbo", SAMPLING),
    ModelSpec("groq", "llama-3.3-70b-versatile", SAMPLING),
    ModelSpec("groq", "deepseek-r1-distill-llama-70b", SAMPLING),
)


def paper_grid() -> DecisionGrid:
    return DecisionGrid(
        models=PAPER_MODELS,
        temperatures=(0.0, 0.5, 1.0, 1.5),
        efforts=EFFORTS,
    )


PRESETS = {PAPER_PRESET: paper_grid}


def load_grid(source: str | Path | Mapping) -> DecisionGrid:
    """A preset name, a path to a grid JSON document, or an already-parsed document."""
    if isinstance(source, Mapping):
        return DecisionGrid.from_dict(source)
    if str(source) in PRESETS:
        return PRESETS[str(source)]()
    return DecisionGrid.from_dict(json.loads(Path(source).read_text("utf-8")))
