"""Synthetic corpus through the whole command line pipeline; prints the report summary."""
import json
import sys
import tempfile
from pathlib import Path

from mmfuse import cli

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    cli.main(["synth", "--corpus", "8", "--seed", "3", "--out", str(root)])
    code = cli.main(["run", "--config", str(root / "config.json")])
    if code:
        sys.exit(code)
    report = json.loads((root / "out/run-3/report.json").read_text())

print(f"chosen K = {report['chosen_K']}, class sizes {report['class_sizes']}")
for name, e in sorted(report["ena"].items()):
    for c in e["comparisons"]:
        print(f"{name:22s} {c['axis']:5s} U={c['U']:g} p={c['p']:.3g} r={c['r']:+.2f}")
