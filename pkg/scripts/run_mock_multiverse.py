"""Run the full pipeline on the paper grid once per mock persona and summarise.

    python scripts/run_mock_multiverse.py scripts/examples/study_mock.json --out runs/multiverse

Each persona gets its own run directory under --out. The printed table gives,
per persona, how many configurations survived exclusion and the median of each
score, which is a quick sanity check that the harness recovers what the mock
was told to produce.
"""

import argparse
import json
import statistics
from pathlib import Path

from silicon import pipeline as P
from silicon.cli import main as cli

PERSONAS = {
    "echo": {"persona": "echo"},
    "latent-0.8": {"persona": "latent", "rho": 0.8, "noise": 0.3},
    "latent-0.3": {"persona": "latent", "rho": 0.3, "noise": 0.6, "refusal_rate": 0.03,
                   "malformed_rate": 0.1, "nonsense_rate": 0.01},
    "translate-0.1": {"persona": "translate", "shift": 0.1},
    "constant": {"persona": "constant"},
}
METRICS = ("f1_bjw", "f1_gf", "f2_bjw", "f2_gf", "f3_abs_error")


def median(values):
    values = [v for v in values if v is not None]
    return f"{statistics.median(values):.3f}" if values else "-"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("spec", type=Path)
    ap.add_argument("--out", type=Path, default=Path("runs/multiverse"))
    ap.add_argument("--only", nargs="*", choices=sorted(PERSONAS))
    args = ap.parse_args()

    rows = []
    for name in args.only or PERSONAS:
        out = args.out / name
        out.mkdir(parents=True, exist_ok=True)
        persona = out.parent / f"{name}.persona.json"
        persona.write_text(json.dumps(PERSONAS[name]))
        base = ["--spec", str(args.spec), "--out", str(out)]
        codes = [cli(["plan", *base]), cli(["run", *base, "--mock", str(persona)]),
                 cli(["score", *base]), cli(["report", *base])]
        if codes[2] != 0:
            rows.append([name, "0"] + ["-"] * len(METRICS))
            continue
        scores = P.scores_from_csv((out / "scores.csv").read_text())
        rows.append([name, str(len(scores))] + [median(s.value(m) for s in scores) for m in METRICS])

    header = ["persona", "configs"] + [m.replace("_abs_error", "") for m in METRICS]
    widths = [max(len(r[i]) for r in rows + [header]) for i in range(len(header))]
    for r in [header] + rows:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)))


if __name__ == "__main__":
    main()
