import json
from pathlib import Path

import pytest
from hypothesis import settings

from silicon.grid import ModelSpec, REASONING, SAMPLING
from silicon.study import builtin_scales, write_human_dataset
from silicon.synthetic import make_participants

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture(scope="session")
def scales():
    return builtin_scales()


@pytest.fixture(scope="session")
def bjw(scales):
    return scales[0]


@pytest.fixture(scope="session")
def gf(scales):
    return scales[1]


@pytest.fixture(scope="session")
def participants():
    return make_participants(85, seed=0)


SMALL_GRID = {
    "format": "silicon-grid",
    "version": 1,
    "models": [
        {"provider_id": "openai", "model_id": "o4-mini", "kind": REASONING},
        {"provider_id": "openai", "model_id": "gpt-4o", "kind": SAMPLING},
    ],
    "temperatures": [0.0, 1.0],
    "efforts": ["low"],
    "demographics_levels": ["none", "extensive"],
    "strategies": ["all_in_one", "item_by_item"],
}


def write_study(tmp_path: Path, participants, grid=SMALL_GRID, **overrides) -> Path:
    """A dataset CSV plus a study spec next to it; returns the spec path."""
    data = tmp_path / "humans.csv"
    if not data.exists():
        write_human_dataset(data, participants, builtin_scales())
    doc = {
        "dataset": "humans.csv",
        "grid": grid,
        "seeds": {"bootstrap": 11, "mock": 5},
        "output_dir": "run",
        "thresholds": {"completeness": 0.5, "bootstrap_iterations": 500},
    }
    doc.update(overrides)
    spec = tmp_path / "study.json"
    spec.write_text(json.dumps(doc), "utf-8")
    return spec


def tiny_model(kind=SAMPLING):
    return ModelSpec("mockprov", "m1", kind)


# -- acceptance report ---------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, passed: bool | None, detail: str) -> None:
    """``passed=None`` marks a criterion that could not be run here."""
    status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
    line = f"[{status}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
