"""Deterministic offline stand-in for an LLM provider.

A persona model decides which ratings a simulated participant emits, based on
that participant's true human responses. Every random draw is keyed on a hash
of the seed and the request fields, so outputs are reproducible and do not
depend on call order or on how items are grouped into prompt units.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .gateway import OK, REFUSAL, CompletionRequest, CompletionResult
from .grid import SamplingSetting, parse_config_id
from .study import DIFFERENCE, ParticipantRecord, ScaleDefinition, score_scale

PERSONAS = ("echo", "latent", "translate", "constant")
EFFORT_NOISE = {"low": 1.0, "high": 0.5}

REFUSAL_TEXT = "I'm sorry, but I can't provide ratings of people based on their racial group."
NONSENSE_WORDS = ("lorem", "quasi", "blorf", "zzt", "ipsum", "vex", "kharr", "plinth", "oolong")


@dataclass(frozen=True)
class PersonaConfig:
    persona: str = "echo"
    rho: float = 0.8
    shift: float = 0.1
    noise: float = 0.0
    refusal_rate: float = 0.0
    malformed_rate: float = 0.0
    nonsense_rate: float = 0.0

    def __post_init__(self):
        if self.persona not in PERSONAS:
            raise ValueError(f"unknown mock persona {self.persona!r}; choose from {PERSONAS}")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [-1, 1]")
        for name in ("refusal_rate", "malformed_rate", "nonsense_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    @classmethod
    def from_dict(cls, doc: Mapping) -> "PersonaConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown mock persona fields: {', '.join(sorted(unknown))}")
        return cls(**doc)

    @classmethod
    def load(cls, source: str | Path) -> "PersonaConfig":
        """A persona name (``echo``) or a path to a JSON persona document."""
        if str(source) in PERSONAS:
            return cls(persona=str(source))
        return cls.from_dict(json.loads(Path(source).read_text("utf-8")))

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _rng(*parts) -> random.Random:
    # one small generator per keyed draw; stdlib Random is far cheaper to seed than numpy's
    digest = hashlib.sha256("\x1f".join(map(str, parts)).encode()).digest()
    return random.Random(int.from_bytes(digest[:16], "little"))


def setting_noise(sampling: SamplingSetting) -> float:
    if sampling.temperature is not None:
        return sampling.temperature
    return EFFORT_NOISE[sampling.reasoning_effort]


def items_for_score(scale: ScaleDefinition, target: int, start: Sequence[int]) -> list[int]:
    """Item ratings scoring ``target`` on ``scale``, as close to ``start`` as possible.

    ``target`` is clamped into the scale's score range.
    """
    target = min(max(target, scale.score_min), scale.score_max)
    items = scale.items
    if scale.scoring == DIFFERENCE:
        first, second = items
        lo = max(second.response_min, first.response_min - target)
        hi = min(second.response_max, first.response_max - target)
        b = min(max(start[1], lo), hi)
        return [target + b, b]
    values = list(start)
    total = sum(values)
    i = 0
    # walk items in order, moving each one step toward the target
    while total != target:
        item = items[i % len(items)]
        if total < target and values[i % len(items)] < item.response_max:
            values[i % len(items)] += 1
            total += 1
        elif total > target and values[i % len(items)] > item.response_min:
            values[i % len(items)] -= 1
            total -= 1
        i += 1
    return values


class MockProvider:
    provider_id = "mock"

    def __init__(self, persona: PersonaConfig, participants: Sequence[ParticipantRecord],
                 scales: Sequence[ScaleDefinition], seed: int = 0):
        self.persona = persona
        self.seed = seed
        self.scales = list(scales)
        self.participants = {p.participant_id: p for p in participants}
        self._moments = {}
        self._memo: dict[tuple, list[int]] = {}
        for scale in self.scales:
            raws = np.array([score_scale(scale, p.item_responses(scale)) for p in participants], float)
            sd = raws.std() if len(raws) > 1 else 0.0
            self._moments[scale.scale_id] = (raws.mean() if len(raws) else 0.0, sd)

    # -- persona ---------------------------------------------------------

    def latent(self, config_id: str, participant_id: str, scale_id: str) -> float:
        """Standardized silicon latent for the ``latent`` persona.

        Equals ``rho * z_true + sqrt(1 - rho**2) * eps`` with ``eps`` a
        standard normal draw keyed on (seed, config, participant, scale).
        """
        scale = next(s for s in self.scales if s.scale_id == scale_id)
        mean, sd = self._moments[scale_id]
        raw = score_scale(scale, self.participants[participant_id].item_responses(scale))
        z_true = (raw - mean) / sd if sd > 0 else 0.0
        eps = _rng(self.seed, "latent", config_id, participant_id, scale_id).gauss(0.0, 1.0)
        rho = self.persona.rho
        return rho * z_true + math.sqrt(1.0 - rho * rho) * eps

    def scale_ratings(self, config_id: str, participant_id: str, scale: ScaleDefinition) -> list[int]:
        key = (config_id, participant_id, scale.scale_id)
        if key not in self._memo:
            self._memo[key] = self._scale_ratings(config_id, participant_id, scale)
        return list(self._memo[key])

    def _scale_ratings(self, config_id: str, participant_id: str, scale: ScaleDefinition) -> list[int]:
        truth = self.participants[participant_id].item_responses(scale)
        kind = self.persona.persona
        if kind == "echo":
            values = list(truth)
        elif kind == "constant":
            values = [(i.response_min + i.response_max) // 2 for i in scale.items]
        elif kind == "translate":
            raw = score_scale(scale, truth)
            step = round(self.persona.shift * (scale.score_max - scale.score_min))
            values = items_for_score(scale, raw + step, truth)
        else:
            mean, sd = self._moments[scale.scale_id]
            z = self.latent(config_id, participant_id, scale.scale_id)
            values = items_for_score(scale, int(round(mean + sd * z)), truth)

        sd_noise = self.persona.noise * setting_noise(parse_config_id(config_id).sampling)
        if sd_noise > 0:
            noisy = []
            for item, v in zip(scale.items, values):
                e = _rng(self.seed, "noise", config_id, participant_id, item.item_id).gauss(0.0, sd_noise)
                noisy.append(int(min(max(round(v + e), item.response_min), item.response_max)))
            values = noisy
        return values

    # -- provider surface ----------------------------------------------------

    def ratings_for(self, request: CompletionRequest) -> dict[str, int]:
        out = {}
        for scale in self.scales:
            wanted = [i.item_id for i in scale.items if i.item_id in request.prompt.response_schema]
            if not wanted:
                continue
            values = self.scale_ratings(request.config_id, request.participant_id, scale)
            by_id = dict(zip(scale.item_ids, values))
            out.update({item_id: by_id[item_id] for item_id in wanted})
        return {item_id: out[item_id] for item_id in request.prompt.item_ids}

    def send(self, request: CompletionRequest) -> tuple[str, str]:
        rng = _rng(self.seed, "fault", request.cache_key)
        fault = [rng.random() for _ in range(3)]
        p = self.persona
        if fault[0] < p.refusal_rate:
            return REFUSAL, REFUSAL_TEXT
        if fault[1] < p.nonsense_rate:
            words = _rng(self.seed, "words", request.cache_key).choices(NONSENSE_WORDS, k=8)
            return OK, " ".join(words)
        ratings = self.ratings_for(request)
        if fault[2] < p.malformed_rate:
            return OK, " ".join(f"For {k} my answer is {v}." for k, v in ratings.items())
        return OK, json.dumps(ratings)

    def complete(self, request: CompletionRequest) -> CompletionResult:
        status, text = self.send(request)
        return CompletionResult(status, text, 0, 1, "1970-01-01T00:00:00.000+00:00")


def mock_complete(request: CompletionRequest, persona: PersonaConfig,
                  participants: Sequence[ParticipantRecord], scales: Sequence[ScaleDefinition],
                  seed: int = 0) -> CompletionResult:
    return MockProvider(persona, participants, scales, seed).complete(request)
