"""Stage functions behind the ``silicon`` command line: plan, run, score, curves,
consistency and report.

Every stage reads and writes a single run directory::

    grid.json  plan.json  responses.jsonl  config_data/<config_id>.csv
    exclusions.json  scores.csv  baselines.json  curves/<metric>.{svg,csv}
    consistency.{json,csv,txt}  report.md  manifest.json

Artifacts are write-once: rewriting a file with identical bytes is a no-op,
rewriting it with different bytes is an error.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from . import __version__
from .curves import FIGURE_METRICS, NoEligibleConfigurations, build_curve, render_curve
from .gateway import (
    CACHEABLE,
    REFUSAL as STATUS_REFUSAL,
    ChatCompletionsProvider,
    CompletionRequest,
    Gateway,
    RateLimiter,
    ResponseCache,
)
from .grid import PRESETS, DecisionGrid, enumerate_configurations, load_grid, parse_config_id
from .intake import (
    REFUSAL,
    ConfigDataset,
    ExclusionReport,
    ParsedResponse,
    assemble_config_dataset,
    build_exclusion_report,
    dataset_from_csv,
    dataset_to_csv,
    parse_ratings,
)
from .metrics import (
    SCORE_FIELDS,
    BaselineBand,
    ConfigScores,
    CorrelationEstimate,
    TooFewObservations,
    bootstrap_human_baseline,
    consistency_matrix,
    format_table,
    human_relationship,
    score_configuration,
)
from .mock import MockProvider, PersonaConfig
from .prompts import build_prompt_plan, load_template, units_per_plan
from .study import load_human_dataset, load_scales, scales_to_dict, score_participants

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARTIAL = 2
EXIT_MISSING = 3


class SpecValidation(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


class MissingPrerequisite(RuntimeError):
    pass


class ArtifactConflict(RuntimeError):
    pass


# -- study spec --------------------------------------------------------------


@dataclass
class StudySpec:
    dataset: Path
    grid: str | dict
    seeds: dict[str, int]
    output_dir: Path
    scales: Path | None = None
    template: str | None = None
    credentials: dict[str, str] = field(default_factory=dict)
    base_urls: dict[str, str] = field(default_factory=dict)
    completeness_threshold: float = 0.5
    bootstrap_iterations: int = 2000
    workers: int = 4
    rate_limits: dict[str, int] = field(default_factory=dict)
    correlation: str = "pearson"
    source: dict = field(default_factory=dict)

    def digest(self) -> str:
        doc = {k: v for k, v in self.source.items() if k != "output_dir"}
        doc["seeds"] = self.seeds
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def study_spec_from_dict(doc: Mapping, base_dir: Path = Path("."), out: str | None = None,
                         seed: int | None = None) -> StudySpec:
    errors = []

    def need(key, kind):
        if key not in doc:
            errors.append(f"{key}: required")
            return None
        if not isinstance(doc[key], kind):
            errors.append(f"{key}: expected {kind.__name__ if isinstance(kind, type) else 'value'}")
            return None
        return doc[key]

    dataset = need("dataset", str)
    grid = need("grid", (str, dict))
    seeds = need("seeds", dict)
    dataset_path = None
    if dataset is not None:
        dataset_path = _resolve(base_dir, dataset)
        if not dataset_path.is_file():
            errors.append(f"dataset: file not found: {dataset}")
    if isinstance(seeds, dict):
        for name in ("bootstrap", "mock"):
            if not isinstance(seeds.get(name), int) or isinstance(seeds.get(name), bool):
                errors.append(f"seeds.{name}: required integer (no wall-clock default)")
        seeds = dict(seeds)
        if seed is not None:
            seeds["bootstrap"] = seeds["mock"] = seed
    if isinstance(grid, str) and grid not in PRESETS:
        grid_path = _resolve(base_dir, grid)
        if not grid_path.is_file():
            errors.append(f"grid: not a preset ({', '.join(PRESETS)}) and no such file: {grid}")
        else:
            grid = str(grid_path)
    if isinstance(grid, (str, dict)) and not errors:
        try:
            load_grid(grid)
        except (ValueError, KeyError) as exc:
            errors.append(f"grid: {exc}")

    scales = None
    if doc.get("scales") is not None:
        scales = _resolve(base_dir, doc["scales"])
        if not scales.is_file():
            errors.append(f"scales: file not found: {doc['scales']}")
    template = doc.get("template")
    if template is not None and template != "default-v1":
        template_path = _resolve(base_dir, template)
        if not template_path.is_file():
            errors.append(f"template: file not found: {template}")
        template = str(template_path)

    thresholds = doc.get("thresholds", {})
    completeness = thresholds.get("completeness", 0.5)
    if not isinstance(completeness, (int, float)) or not 0 <= completeness <= 1:
        errors.append("thresholds.completeness: expected a number in [0, 1]")
    iterations = thresholds.get("bootstrap_iterations", 2000)
    if not isinstance(iterations, int) or iterations < 1:
        errors.append("thresholds.bootstrap_iterations: expected a positive integer")
    workers = doc.get("workers", 4)
    if not isinstance(workers, int) or workers < 1:
        errors.append("workers: expected a positive integer")
    correlation = doc.get("correlation", "pearson")
    if correlation not in ("pearson", "spearman"):
        errors.append("correlation: expected 'pearson' or 'spearman'")
    output_dir = out or doc.get("output_dir")
    if not output_dir:
        errors.append("output_dir: required (or pass --out)")
    if errors:
        raise SpecValidation(errors)

    return StudySpec(
        dataset=dataset_path,
        grid=grid,
        seeds=seeds,
        output_dir=Path(out) if out else _resolve(base_dir, output_dir),
        scales=scales,
        template=template,
        credentials=dict(doc.get("credentials", {})),
        base_urls=dict(doc.get("base_urls", {})),
        completeness_threshold=float(completeness),
        bootstrap_iterations=iterations,
        workers=workers,
        rate_limits=dict(doc.get("rate_limits", {})),
        correlation=correlation,
        source=dict(doc),
    )


def load_study_spec(path: str | Path, out: str | None = None, seed: int | None = None) -> StudySpec:
    path = Path(path)
    if not path.is_file():
        raise SpecValidation([f"spec: file not found: {path}"])
    try:
        doc = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise SpecValidation([f"spec: invalid JSON ({exc})"]) from None
    if not isinstance(doc, dict):
        raise SpecValidation(["spec: top level must be an object"])
    return study_spec_from_dict(doc, path.parent, out, seed)


# -- shared context ----------------------------------------------------------


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_json(doc) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")


class Study:
    """Loaded inputs for one spec, plus write-once helpers for its run directory."""

    def __init__(self, spec: StudySpec):
        self.spec = spec
        self.scales = load_scales(spec.scales)
        self.human = load_human_dataset(spec.dataset, self.scales)
        self.grid: DecisionGrid = load_grid(spec.grid)
        self.configs = enumerate_configurations(self.grid)
        self.template = load_template(spec.template)
        self.out = spec.output_dir

    @property
    def participants(self):
        return self.human.records

    def provenance(self, **extra) -> dict:
        doc = {
            "silicon_version": __version__,
            "spec_digest": self.spec.digest(),
            "template_version": self.template.version,
            "grid_digest": self.grid.digest(),
            "scales_digest": sha256_bytes(canonical_json(scales_to_dict(self.scales))),
            "dataset_digest": self.human.digest,
            "seeds": dict(self.spec.seeds),
        }
        doc.update(extra)
        return doc

    def path(self, rel: str) -> Path:
        return self.out / rel

    def write(self, rel: str, data: bytes | str) -> Path:
        if isinstance(data, str):
            data = data.encode("utf-8")
        target = self.path(rel)
        if target.exists():
            if target.read_bytes() == data:
                return target
            raise ArtifactConflict(
                f"{target} already exists with different content; use a fresh output directory"
            )
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.with_name(target.name + ".partial")
        tmp.write_bytes(data)
        tmp.replace(target)
        return target

    def read_json(self, rel: str) -> dict:
        target = self.path(rel)
        if not target.exists():
            raise MissingPrerequisite(f"{target} not found")
        return json.loads(target.read_text("utf-8"))

    def requests_for(self, config):
        for participant in self.participants:
            plan = build_prompt_plan(config, participant, self.scales, self.template)
            for unit in plan.units:
                yield CompletionRequest(
                    config.config_id, participant.participant_id, plan.template_version,
                    config.model, config.sampling, unit,
                )


# -- plan --------------------------------------------------------------------


@dataclass
class PlanSummary:
    configurations: int
    participants: int
    simulated_participants: int
    units: int
    cache_hits: int

    @property
    def expected_requests(self) -> int:
        return self.units - self.cache_hits

    def describe(self) -> str:
        return (
            f"{self.configurations:,} configurations, "
            f"{self.simulated_participants:,} simulated participants\n"
            f"{self.units:,} prompt units ({self.participants:,} participants); "
            f"{self.cache_hits:,} cached, {self.expected_requests:,} requests to issue"
        )


def plan_study(study: Study) -> PlanSummary:
    cache_path = study.path("responses.jsonl")
    cache = ResponseCache(cache_path) if cache_path.exists() else None
    n = len(study.participants)
    units = sum(units_per_plan(c.strategy, study.scales) * n for c in study.configs)
    hits = 0
    if cache is not None and len(cache):
        hits = sum(
            req.cache_key in cache for config in study.configs for req in study.requests_for(config)
        )
    summary = PlanSummary(len(study.configs), n, len(study.configs) * n, units, hits)
    grid_doc = study.grid.to_dict()
    grid_doc["configurations"] = [c.config_id for c in study.configs]
    grid_doc["provenance"] = study.provenance()
    study.write("grid.json", canonical_json(grid_doc))
    study.write("plan.json", canonical_json({
        "configurations": summary.configurations,
        "participants": summary.participants,
        "simulated_participants": summary.simulated_participants,
        "units": summary.units,
        "provenance": study.provenance(),
    }))
    return summary


# -- run ---------------------------------------------------------------------


@dataclass
class RunOutcome:
    exit_code: int
    requests_sent: int
    cache_hits: int
    failed_configs: list[str]
    retained: int = 0
    excluded: int = 0
    interrupted: bool = False


def make_gateway(study: Study, mock: PersonaConfig | None, sleep=None) -> Gateway:
    cache = ResponseCache(study.path("responses.jsonl"))
    if mock is not None:
        provider = MockProvider(mock, study.participants, study.scales, study.spec.seeds["mock"])
        providers: Callable | dict = lambda _pid: provider  # noqa: E731
    else:
        providers = {}
        for pid in sorted({c.model.provider_id for c in study.configs}):
            env = study.spec.credentials.get(pid)
            key = os.environ.get(env) if env else None
            providers[pid] = ChatCompletionsProvider(pid, api_key=key,
                                                     base_url=study.spec.base_urls.get(pid))
    kwargs = {"sleep": sleep} if sleep is not None else {}
    # provider rate limits do not apply to the in-process mock
    limits = {} if mock is not None else study.spec.rate_limits
    return Gateway(providers, cache, RateLimiter(limits), **kwargs)


def run_study(study: Study, mock: PersonaConfig | None = None, request_limit: int | None = None,
              gateway: Gateway | None = None) -> RunOutcome:
    """Issue every prompt unit (cache first), then parse and assemble datasets.

    ``request_limit`` stops after that many units have been processed, which
    leaves a resumable partial run behind.
    """
    study.out.mkdir(parents=True, exist_ok=True)
    plan_study(study)
    gateway = gateway or make_gateway(study, mock)
    all_requests = [(c, r) for c in study.configs for r in study.requests_for(c)]
    # the mock answers in-process, so a thread pool only adds overhead
    workers = 1 if mock is not None else study.spec.workers
    try:
        if request_limit is not None and request_limit < len(all_requests):
            gateway.complete_many([r for _, r in all_requests[:request_limit]], workers)
            return RunOutcome(EXIT_PARTIAL, gateway.stats.requests_sent, gateway.stats.cache_hits,
                              [], interrupted=True)
        results = gateway.complete_many([r for _, r in all_requests], workers)
    finally:
        gateway.cache.close()

    by_config: dict[str, dict[str, list[ParsedResponse]]] = defaultdict(lambda: defaultdict(list))
    failed: dict[str, int] = defaultdict(int)
    for (config, request), result in zip(all_requests, results):
        if result.status not in CACHEABLE:
            failed[config.config_id] += 1
            continue
        if result.status == STATUS_REFUSAL:
            parsed = ParsedResponse(request.unit_id, REFUSAL)
        else:
            parsed = parse_ratings(result.raw_text, request.prompt)
        by_config[config.config_id][request.participant_id].append(parsed)

    datasets = []
    for config in study.configs:
        if config.config_id in failed:
            continue
        ds = assemble_config_dataset(config.config_id, by_config[config.config_id],
                                     study.participants, study.scales, study.template.version)
        datasets.append(ds)
        study.write(f"config_data/{config.config_id}.csv", dataset_to_csv(ds, study.scales))

    report = build_exclusion_report(datasets, study.spec.completeness_threshold)
    doc = report.to_dict()
    doc["attempted_participants"] = len(study.participants)
    doc["failed_configs"] = {cid: failed[cid] for cid in sorted(failed)}
    doc["provider"] = {"mock": mock.to_dict()} if mock is not None else {"mock": None}
    doc["provenance"] = study.provenance()
    if not failed:
        study.write("exclusions.json", canonical_json(doc))
    else:
        # a partial run: keep a record but leave exclusions.json for the rerun
        study.path("exclusions.partial.json").write_bytes(canonical_json(doc))
    excluded = len(report.configs_excluded_by_threshold)
    return RunOutcome(
        EXIT_PARTIAL if failed else EXIT_OK,
        gateway.stats.requests_sent,
        gateway.stats.cache_hits,
        sorted(failed),
        retained=len(datasets) - excluded,
        excluded=excluded,
    )


# -- score -------------------------------------------------------------------

SCORE_COLUMNS = [
    "config_id", "provider", "model", "kind", "setting", "demographics", "strategy",
    "n", "completeness", "f1_bjw", "f1_gf", "f2_bjw", "f2_gf", "f3_r_hat", "f3_abs_error",
    "eligible_f1_bjw", "eligible_f1_gf", "eligible_f2_bjw", "eligible_f2_gf", "eligible_f3",
    "template_version",
]


def _num(value) -> str:
    return "" if value is None else repr(float(value))


def scores_to_csv(scores: list[ConfigScores], template_version: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCORE_COLUMNS)
    for s in scores:
        c = parse_config_id(s.config_id)
        writer.writerow([
            s.config_id, c.model.provider_id, c.model.model_id, c.model.kind,
            c.sampling.display, c.demographics_level, c.strategy,
            s.n, repr(s.completeness),
            _num(s.f1_bjw), _num(s.f1_gf), _num(s.f2_bjw), _num(s.f2_gf),
            _num(s.f3_r_hat), _num(s.f3_abs_error),
            int(s.f1_bjw is not None), int(s.f1_gf is not None),
            int(s.f2_bjw is not None), int(s.f2_gf is not None), int(s.f3_abs_error is not None),
            template_version,
        ])
    return buf.getvalue()


def scores_from_csv(text: str) -> list[ConfigScores]:
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        values = {k: (float(rec[k]) if rec[k] != "" else None)
                  for k in ("f1_bjw", "f1_gf", "f2_bjw", "f2_gf", "f3_r_hat", "f3_abs_error")}
        out.append(ConfigScores(rec["config_id"], n=int(rec["n"]),
                                completeness=float(rec["completeness"]), **values))
    return out


@dataclass
class ScoreOutcome:
    scores: list[ConfigScores]
    baselines: dict[str, BaselineBand]
    human_r: CorrelationEstimate
    eligibility: dict[str, int]


def score_study(study: Study) -> ScoreOutcome:
    exclusions = study.read_json("exclusions.json")
    report = ExclusionReport.from_dict(exclusions)
    attempted = exclusions["attempted_participants"]
    excluded = set(report.configs_excluded_by_threshold)
    retained_ids = [c.config_id for c in study.configs
                    if c.config_id in report.completeness and c.config_id not in excluded]
    if not retained_ids:
        raise MissingPrerequisite(
            "no configuration met the completeness threshold "
            f"({report.threshold:.0%}); nothing to score"
        )

    human = score_participants(study.participants, study.scales)
    human_r = human_relationship(human)
    baselines = {
        scale.scale_id: bootstrap_human_baseline(
            [s[scale.scale_id].normalized for s in human.values()],
            study.spec.bootstrap_iterations,
            study.spec.seeds["bootstrap"],
        )
        for scale in study.scales
    }

    scores = []
    for cid in retained_ids:
        path = study.path(f"config_data/{cid}.csv")
        if not path.exists():
            raise MissingPrerequisite(f"{path} not found")
        ds: ConfigDataset = dataset_from_csv(path.read_text("utf-8"), cid, attempted, study.scales)
        flags = report.zero_variance_flags.get(cid, {})
        scores.append(score_configuration(ds, human, human_r, flags, study.spec.correlation))

    eligibility = {
        "f1_bjw": sum(s.f1_bjw is not None for s in scores),
        "f1_gf": sum(s.f1_gf is not None for s in scores),
        "f2_bjw": sum(s.f2_bjw is not None for s in scores),
        "f2_gf": sum(s.f2_gf is not None for s in scores),
        "f3": sum(s.f3_abs_error is not None for s in scores),
        "complete_case": sum(s.complete for s in scores),
        "retained_configurations": len(scores),
        "configurations": len(study.configs),
    }
    study.write("scores.csv", scores_to_csv(scores, study.template.version))
    study.write("baselines.json", canonical_json({
        "baselines": {sid: b.to_dict() for sid, b in baselines.items()},
        "human_correlation": human_r.to_dict(),
        "eligibility": eligibility,
        "correlation_method": study.spec.correlation,
        "provenance": study.provenance(bootstrap_iterations=study.spec.bootstrap_iterations),
    }))
    return ScoreOutcome(scores, baselines, human_r, eligibility)


def _load_scores(study: Study):
    path = study.path("scores.csv")
    if not path.exists():
        raise MissingPrerequisite(f"{path} not found; run `silicon score` first")
    base = study.read_json("baselines.json")
    baselines = {sid: BaselineBand(**b) for sid, b in base["baselines"].items()}
    return scores_from_csv(path.read_text("utf-8")), baselines, CorrelationEstimate(**base["human_correlation"])


# -- curves / consistency / report --------------------------------------------


def curves_study(study: Study) -> dict[str, str | None]:
    """Write one SVG and one CSV per figure metric; returns metric -> svg path (None if empty)."""
    scores, baselines, human_r = _load_scores(study)
    references = {"f2_bjw": baselines.get("bjw"), "f2_gf": baselines.get("gf"), "f3": human_r}
    prov = json.dumps(study.provenance(), sort_keys=True)
    written = {}
    for metric in FIGURE_METRICS:
        try:
            model = build_curve(scores, metric, references.get(metric))
        except NoEligibleConfigurations:
            log.warning("no eligible configurations for %s; curve skipped", metric)
            written[metric] = None
            continue
        study.write(f"curves/{metric}.svg", render_curve(model, "svg", provenance=prov))
        study.write(f"curves/{metric}.csv", render_curve(model, "csv"))
        written[metric] = f"curves/{metric}.svg"
    return written


def consistency_study(study: Study, accuracy_orientation: bool = False):
    scores, _, _ = _load_scores(study)
    prov = study.provenance()
    try:
        matrix = consistency_matrix(scores, accuracy_orientation)
    except TooFewObservations as exc:
        study.write("consistency.json", canonical_json({"error": str(exc), "provenance": prov}))
        raise
    doc = matrix.to_dict()
    doc["provenance"] = prov
    study.write("consistency.json", canonical_json(doc))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["variable_a", "variable_b", "r", "ci_low", "ci_high", "p_value", "n"])
    for i, a in enumerate(matrix.variables):
        for j, b in enumerate(matrix.variables):
            if j >= i:
                continue
            c = matrix.cells[i][j]
            if c is None:
                writer.writerow([a, b, "", "", "", "", matrix.n])
            else:
                writer.writerow([a, b, repr(c.r), repr(c.ci_low), repr(c.ci_high), repr(c.p_value), c.n])
    study.write("consistency.csv", buf.getvalue())
    study.write("consistency.txt", format_table(matrix))
    return matrix


def _summary(values) -> str:
    values = [v for v in values if v is not None]
    if not values:
        return "no eligible configurations"
    arr = np.asarray(values)
    lo, hi = np.percentile(arr, [2.5, 97.5])
    return (f"mean {arr.mean():.3f}, 95% range [{lo:.3f}, {hi:.3f}], "
            f"min {arr.min():.3f}, max {arr.max():.3f} (k = {arr.size})")


def report_study(study: Study) -> Path:
    scores, baselines, human_r = _load_scores(study)
    curves = curves_study(study)
    try:
        matrix = consistency_study(study)
        table = format_table(matrix)
    except TooFewObservations as exc:
        table = f"Consistency matrix unavailable: {exc}\n"
    exclusions = study.read_json("exclusions.json")
    base = study.read_json("baselines.json")
    plan = study.read_json("plan.json")

    lines = [
        "# Silicon sample multiverse report",
        "",
        f"- configurations: {plan['configurations']}",
        f"- participants: {plan['participants']}",
        f"- simulated participants: {plan['simulated_participants']}",
        f"- retained simulated participants: {sum(s.n for s in scores)}",
        f"- configurations excluded by the {exclusions['threshold']:.0%} completeness threshold: "
        f"{len(exclusions['configs_excluded_by_threshold'])}",
        "",
        "## Eligibility",
        "",
    ]
    lines += [f"- {k}: {v}" for k, v in base["eligibility"].items()]
    lines += [
        "",
        "## Human reference",
        "",
        f"- BJW-Gut Feelings correlation: r = {human_r.r:.2f}, 95% CI "
        f"[{human_r.ci_low:.2f}, {human_r.ci_high:.2f}], n = {human_r.n}",
    ]
    for sid, b in baselines.items():
        lines.append(f"- human-human W ({sid}): {b.point:.3f}, 95% CI [{b.ci_low:.3f}, {b.ci_high:.3f}] "
                     f"(B = {b.iterations}, seed = {b.seed})")
    lines += ["", "## Scores across configurations", ""]
    for name in SCORE_FIELDS + ("f3_r_hat",):
        lines.append(f"- {name}: {_summary(s.value(name) for s in scores)}")
    lines += ["", "## Consistency across data features", "", "```", table.rstrip("\n"), "```", ""]
    lines += ["## Curves", ""]
    for metric, path in curves.items():
        lines.append(f"- {metric}: " + (f"[{path}]({path})" if path else "no eligible configurations"))

    lines += ["", "## Provenance", "", "```json",
              json.dumps(study.provenance(), indent=2, sort_keys=True), "```", ""]
    lines += ["## Artifacts", ""]
    artifacts = sorted(
        p for p in study.out.rglob("*")
        if p.is_file() and p.name not in ("report.md", "manifest.json") and not p.name.endswith(".partial")
    )
    manifest = {}
    for p in artifacts:
        rel = p.relative_to(study.out).as_posix()
        digest = sha256_bytes(p.read_bytes())
        manifest[rel] = digest
        if not rel.startswith("config_data/"):
            lines.append(f"- [{rel}]({rel}) `sha256:{digest[:16]}`")
    lines.append(f"- config_data/: {sum(r.startswith('config_data/') for r in manifest)} files "
                 "(digests in manifest.json)")
    study.write("manifest.json", canonical_json({"files": manifest, "provenance": study.provenance()}))
    return study.write("report.md", "\n".join(lines) + "\n")

