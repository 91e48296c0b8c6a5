import pytest

from silicon.grid import Configuration, ModelSpec, SamplingSetting
from silicon.prompts import (
    MissingField,
    PromptTemplate,
    build_prompt_plan,
    load_template,
    render_demographics,
    units_per_plan,
)
from silicon.study import DemographicProfile, ParticipantRecord


def config(level="none", strategy="all_in_one"):
    return Configuration(ModelSpec("openai", "gpt-4o"), SamplingSetting(temperature=1.0), level, strategy)


PROFILE = DemographicProfile(42, "woman", "Canada", "Doctorate", "Asian", "$50,000-$99,999", "Neutral")


def test_render_levels():
    assert render_demographics(PROFILE, "none") == ""
    assert render_demographics(PROFILE, "age_gender") == "Age: 42 years\nGender: woman"
    lines = render_demographics(PROFILE, "extensive").splitlines()
    assert lines == [
        "Age: 42 years", "Gender: woman", "Country of residence: Canada", "Education level: Doctorate",
        "Ethnicity: Asian", "Income level: $50,000-$99,999", "Political identity: Neutral",
    ]


def test_missing_field_only_matters_when_rendered():
    profile = DemographicProfile(42, "woman", "Canada", None, "Asian", "x", "y")
    assert render_demographics(profile, "age_gender")
    with pytest.raises(MissingField) as info:
        render_demographics(profile, "extensive")
    assert info.value.field == "education"


@pytest.mark.parametrize("strategy,count,ids", [
    ("all_in_one", 1, ["all"]),
    ("scale_by_scale", 2, ["scale-bjw", "scale-gf"]),
    ("item_by_item", 8, [f"item-bjw_{k}" for k in range(1, 7)]
     + ["item-gf_european_americans", "item-gf_african_americans"]),
])
def test_unit_partition(strategy, count, ids, participants, scales):
    plan = build_prompt_plan(config("extensive", strategy), participants[0], scales)
    assert [u.unit_id for u in plan.units] == ids
    assert units_per_plan(strategy, scales) == count
    covered = [pair for u in plan.units for pair in u.covered_items]
    expected = [(s.scale_id, i.item_id) for s in scales for i in s.items]
    assert covered == expected  # each item exactly once, in scale order


def test_rendering_is_deterministic(participants, scales):
    a = build_prompt_plan(config("extensive", "scale_by_scale"), participants[3], scales)
    b = build_prompt_plan(config("extensive", "scale_by_scale"), participants[3], scales)
    assert a == b


def test_persona_only_at_requested_level(participants, scales):
    p = participants[0]
    none = build_prompt_plan(config("none"), p, scales).units[0].user_text
    ag = build_prompt_plan(config("age_gender"), p, scales).units[0].user_text
    ext = build_prompt_plan(config("extensive"), p, scales).units[0].user_text
    assert "Age:" not in none
    assert f"Age: {p.demographics.age} years" in ag and "Education level" not in ag
    assert "Political identity" in ext
    assert none.startswith("Please answer")


def test_schema_and_item_text(participants, scales):
    plan = build_prompt_plan(config(strategy="all_in_one"), participants[0], scales)
    unit = plan.units[0]
    assert unit.response_schema["bjw_1"] == (1, 6)
    assert unit.response_schema["gf_african_americans"] == (1, 10)
    for scale in scales:
        for item in scale.items:
            assert item.prompt_text in unit.user_text
            assert f"[{item.item_id}]" in unit.user_text


def test_template_version_tracks_wording():
    base = load_template()
    assert base.version.startswith("default-v1@")
    changed = PromptTemplate.parse(base.text.replace("survey", "questionnaire"), "default-v1")
    assert changed.version != base.version


def test_template_needs_all_sections():
    with pytest.raises(ValueError):
        PromptTemplate.parse("@@ system\nhello\n")


def test_missing_demographic_at_plan_time(scales):
    p = ParticipantRecord("x", DemographicProfile(None, "man", "a", "b", "c", "d", "e"),
                          {(s.scale_id, i.item_id): i.response_min for s in scales for i in s.items})
    build_prompt_plan(config("none"), p, scales)
    with pytest.raises(MissingField):
        build_prompt_plan(config("age_gender"), p, scales)
