"""``silicon plan|run|score|curves|consistency|report --spec <path>``"""

from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline as P
from .gateway import CredentialMissing
from .metrics import TooFewObservations
from .mock import PersonaConfig


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="silicon", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("plan", "enumerate the grid and count prompt units; no network"),
        ("run", "issue prompt units (cached, resumable) and assemble per-config datasets"),
        ("score", "apply exclusions and compute the five scores and human baselines"),
        ("curves", "render specification curves"),
        ("consistency", "correlate scores across data features"),
        ("report", "write curves, consistency matrix and a summary report"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--spec", required=True, help="study spec JSON")
        p.add_argument("--out", help="run directory (overrides output_dir)")
        p.add_argument("--seed", type=int, help="override both bootstrap and mock seeds")
        p.add_argument("--mock", help="mock persona name (echo, latent, translate, constant) "
                                      "or persona JSON; replaces real providers")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "run":
            p.add_argument("--max-requests", type=int, metavar="N",
                           help="stop after N prompt units; rerun to resume from the cache")
        if name == "consistency":
            p.add_argument("--accuracy-orientation", action="store_true",
                           help="negate the Feature 3 error column so larger is better")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        spec = P.load_study_spec(args.spec, out=args.out, seed=args.seed)
        mock = PersonaConfig.load(args.mock) if args.mock else None
        study = P.Study(spec)
    except P.SpecValidation as exc:
        for err in exc.errors:
            print(f"spec error: {err}", file=sys.stderr)
        return P.EXIT_VALIDATION
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return P.EXIT_VALIDATION

    if study.human.errors:
        print(f"note: {len(study.human.errors)} dataset rows dropped "
              f"(first: {study.human.errors[0]})", file=sys.stderr)

    try:
        return _dispatch(args, study, mock)
    except (P.MissingPrerequisite, CredentialMissing) as exc:
        print(f"missing prerequisite: {exc}", file=sys.stderr)
        return P.EXIT_MISSING
    except P.ArtifactConflict as exc:
        print(f"error: {exc}", file=sys.stderr)
        return P.EXIT_VALIDATION


def _dispatch(args, study: P.Study, mock) -> int:
    cmd = args.command
    if cmd == "plan":
        print(P.plan_study(study).describe())
        return P.EXIT_OK
    if cmd == "run":
        outcome = P.run_study(study, mock, request_limit=args.max_requests)
        print(f"requests sent: {outcome.requests_sent}, cache hits: {outcome.cache_hits}")
        if outcome.interrupted:
            print("stopped early at --max-requests; rerun to continue", file=sys.stderr)
            return outcome.exit_code
        print(f"configurations retained: {outcome.retained}, excluded by threshold: {outcome.excluded}")
        if outcome.failed_configs:
            print(f"{len(outcome.failed_configs)} configurations had transport/provider "
                  "failures; rerun to retry them:", file=sys.stderr)
            for cid in outcome.failed_configs:
                print(f"  {cid}", file=sys.stderr)
        return outcome.exit_code
    if cmd == "score":
        result = P.score_study(study)
        for key, value in result.eligibility.items():
            print(f"{key}: {value}")
        return P.EXIT_OK
    if cmd == "curves":
        for metric, path in P.curves_study(study).items():
            print(f"{metric}: {path or 'no eligible configurations'}")
        return P.EXIT_OK
    if cmd == "consistency":
        try:
            matrix = P.consistency_study(study, args.accuracy_orientation)
        except TooFewObservations as exc:
            print(f"consistency: {exc}", file=sys.stderr)
            return P.EXIT_OK
        print(P.format_table(matrix), end="")
        return P.EXIT_OK
    if cmd == "report":
        print(P.report_study(study))
        return P.EXIT_OK
    raise AssertionError(cmd)


if __name__ == "__main__":
    sys.exit(main())
