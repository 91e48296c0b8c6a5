import json
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from silicon.grid import STRATEGIES, Configuration, ModelSpec, SamplingSetting
from silicon.intake import (
    NONSENSE,
    OUT_OF_RANGE,
    REFUSAL,
    UNPARSEABLE,
    VALID,
    EmptyDataset,
    ParsedResponse,
    apply_config_threshold,
    assemble_config_dataset,
    build_exclusion_report,
    dataset_from_csv,
    dataset_to_csv,
    flag_zero_variance,
    is_refusal,
    parse_ratings,
)
from silicon.prompts import build_prompt_plan

CORPUS = Path(__file__).parent / "data" / "parse_corpus.json"


@pytest.fixture(scope="module")
def units(participants, scales):
    out = {}
    for strategy in STRATEGIES:
        config = Configuration(ModelSpec("a", "b"), SamplingSetting(temperature=0.0), "none", strategy)
        for unit in build_prompt_plan(config, participants[0], scales).units:
            out[unit.unit_id] = unit
    return out


def corpus():
    return json.loads(CORPUS.read_text("utf-8"))["fixtures"]


def classify_corpus(units):
    hits = []
    for fx in corpus():
        got = parse_ratings(fx["text"], units[fx["unit"]])
        ok = got.outcome == fx["expected"] and (fx["ratings"] is None or got.ratings == fx["ratings"])
        hits.append((ok, fx, got))
    return hits


def test_corpus_shape():
    fixtures = corpus()
    assert len(fixtures) == 100
    outcomes = {fx["expected"] for fx in fixtures}
    assert outcomes == {VALID, REFUSAL, UNPARSEABLE, OUT_OF_RANGE, NONSENSE}


def test_corpus_accuracy(units):
    hits = classify_corpus(units)
    misses = [(fx["text"], fx["expected"], got.outcome) for ok, fx, got in hits if not ok]
    assert sum(ok for ok, _, _ in hits) >= 95, misses


def test_strict_json_beats_refusal_phrases(units):
    # a well-formed answer that happens to contain refusal-like words stays valid
    unit = units["item-bjw_3"]
    got = parse_ratings('{"bjw_3": 2}', unit)
    assert got.outcome == VALID
    assert parse_ratings("I'm sorry, my answer is 2", unit).outcome == REFUSAL


def test_strict_requires_exact_keys(units):
    unit = units["scale-gf"]
    text = '{"gf_european_americans": 7, "gf_african_americans": 6, "extra": 1}'
    # not strict, but the lenient embedded-JSON pass still recovers it
    assert parse_ratings(text, unit).ratings == {"gf_european_americans": 7, "gf_african_americans": 6}


def test_boolean_is_not_a_rating(units):
    assert parse_ratings('{"bjw_3": true}', units["item-bjw_3"]).outcome != VALID


def test_range_boundaries(units):
    unit = units["item-bjw_3"]
    assert parse_ratings('{"bjw_3": 1}', unit).outcome == VALID
    assert parse_ratings('{"bjw_3": 6}', unit).outcome == VALID
    assert parse_ratings('{"bjw_3": 0}', unit).outcome == OUT_OF_RANGE
    assert parse_ratings('{"bjw_3": 7}', unit).outcome == OUT_OF_RANGE


def test_refusal_patterns_file():
    assert is_refusal("I'm not able to do that")
    assert is_refusal("AS AN AI I cannot")
    assert not is_refusal("I feel that people get what they deserve: 4")


@given(st.text(alphabet=st.characters(blacklist_categories=("Nd",)), max_size=60))
def test_digit_free_text_is_never_valid(text):
    from silicon.study import builtin_scales
    from silicon.synthetic import make_participants
    config = Configuration(ModelSpec("a", "b"), SamplingSetting(temperature=0.0), "none", "item_by_item")
    unit = build_prompt_plan(config, make_participants(1)[0], builtin_scales()).units[0]
    assert parse_ratings(text, unit).outcome in (REFUSAL, NONSENSE, UNPARSEABLE)


@given(st.lists(st.integers(-20, 20), min_size=8, max_size=8))
def test_strict_round_trip(values):
    from silicon.study import builtin_scales
    from silicon.synthetic import make_participants
    scales = builtin_scales()
    config = Configuration(ModelSpec("a", "b"), SamplingSetting(temperature=0.0), "none", "all_in_one")
    (unit,) = build_prompt_plan(config, make_participants(1)[0], scales).units
    doc = dict(zip(unit.item_ids, values))
    got = parse_ratings(json.dumps(doc), unit)
    in_range = all(lo <= doc[k] <= hi for k, (lo, hi) in unit.response_schema.items())
    assert got.outcome == (VALID if in_range else OUT_OF_RANGE)
    if in_range:
        assert got.ratings == doc


# -- assembly and exclusions --------------------------------------------------


def _valid_units(participant, scales, strategy="scale_by_scale"):
    config = Configuration(ModelSpec("a", "b"), SamplingSetting(temperature=0.0), "none", strategy)
    plan = build_prompt_plan(config, participant, scales)
    truth = {item_id: v for (_, item_id), v in participant.responses.items()}
    return [ParsedResponse(u.unit_id, VALID, {i: truth[i] for i in u.item_ids}) for u in plan.units]


def test_one_invalid_unit_drops_whole_participant(participants, scales):
    parsed = {p.participant_id: _valid_units(p, scales) for p in participants[:5]}
    # participant 2 answered BJW fine but refused the Gut Feelings unit
    parsed["P002"][1] = ParsedResponse("scale-gf", REFUSAL)
    ds = assemble_config_dataset("c", parsed, participants[:5], scales)
    ids = [r.participant_id for r in ds.rows]
    assert ids == ["P001", "P003", "P004", "P005"]
    assert ds.exclusion_annotations["P002"] == {VALID: 1, REFUSAL: 1}
    assert ds.completeness_fraction == pytest.approx(4 / 5)


@given(st.lists(st.sampled_from([VALID, REFUSAL, UNPARSEABLE, OUT_OF_RANGE, NONSENSE]),
                min_size=8, max_size=8))
def test_participant_kept_iff_all_units_valid(outcomes):
    from silicon.study import builtin_scales
    from silicon.synthetic import make_participants
    scales = builtin_scales()
    p = make_participants(1)[0]
    units = _valid_units(p, scales, "item_by_item")
    parsed = [u if o == VALID else ParsedResponse(u.unit_id, o) for u, o in zip(units, outcomes)]
    ds = assemble_config_dataset("c", {p.participant_id: parsed}, [p], scales)
    assert len(ds.rows) == (1 if all(o == VALID for o in outcomes) else 0)


def test_rows_follow_participant_order(participants, scales):
    parsed = {p.participant_id: list(reversed(_valid_units(p, scales, "item_by_item")))
              for p in reversed(participants[:6])}
    ds = assemble_config_dataset("c", parsed, participants[:6], scales)
    assert [r.participant_id for r in ds.rows] == [p.participant_id for p in participants[:6]]
    assert ds.rows[0].ratings["bjw_1"] == participants[0].responses[("bjw", "bjw_1")]


def _dataset_with(kept, participants, scales):
    parsed = {}
    for i, p in enumerate(participants):
        units = _valid_units(p, scales)
        if i >= kept:
            units[0] = ParsedResponse(units[0].unit_id, UNPARSEABLE)
        parsed[p.participant_id] = units
    return assemble_config_dataset(f"c{kept}", parsed, participants, scales)


def test_threshold_boundary_42_vs_43(participants, scales):
    assert len(participants) == 85
    d42 = _dataset_with(42, participants, scales)
    d43 = _dataset_with(43, participants, scales)
    retained, excluded = apply_config_threshold([d42, d43], 0.5)
    assert [d.config_id for d in retained] == ["c43"]
    assert [d.config_id for d in excluded] == ["c42"]
    report = build_exclusion_report([d42, d43], 0.5)
    assert report.configs_excluded_by_threshold == ["c42"]
    assert report.completeness["c43"] == pytest.approx(43 / 85)
    assert list(report.zero_variance_flags) == ["c43"]


@given(st.integers(0, 20), st.integers(1, 20))
def test_threshold_uses_counts(kept, attempted):
    from silicon.intake import ConfigDataset
    kept = min(kept, attempted)
    ds = ConfigDataset("c", [None] * kept, attempted)
    retained, _ = apply_config_threshold([ds], 0.5)
    assert bool(retained) == (2 * kept >= attempted)


def test_zero_variance_flags(participants, scales):
    parsed = {}
    for p in participants[:10]:
        units = _valid_units(p, scales)
        units[1] = ParsedResponse("scale-gf", VALID, {"gf_european_americans": 6, "gf_african_americans": 4})
        parsed[p.participant_id] = units
    ds = assemble_config_dataset("c", parsed, participants[:10], scales)
    assert flag_zero_variance(ds) == {"bjw": False, "gf": True}
    with pytest.raises(EmptyDataset):
        flag_zero_variance(assemble_config_dataset("e", {}, participants[:3], scales))


def test_dataset_csv_round_trip(participants, scales):
    parsed = {p.participant_id: _valid_units(p, scales) for p in participants[:7]}
    ds = assemble_config_dataset("c", parsed, participants[:7], scales, "tpl@1")
    text = dataset_to_csv(ds, scales)
    assert text.splitlines()[0] == (
        "participant_id,bjw_1,bjw_2,bjw_3,bjw_4,bjw_5,bjw_6,gf_european_americans,"
        "gf_african_americans,bjw_raw,gf_raw,bjw_normalized,gf_normalized,template_version"
    )
    back = dataset_from_csv(text, "c", 7, scales)
    assert back.rows == ds.rows
    assert back.template_version == "tpl@1"
