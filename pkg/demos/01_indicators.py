"""Render one scripted session and print its per-interval indicator bits."""
import sys
import tempfile
from pathlib import Path

from mmfuse import synthgen
from mmfuse.ingest import load_session
from mmfuse.model import default_catalog
from mmfuse.pipeline import IndicatorConfig, session_intervals

script_path = Path(sys.argv[1] if len(sys.argv) > 1 else
                   Path(__file__).parent.parent / "tests/data/scenarios/02_exact_ten_vs_eleven.json")
script = synthgen.ScenarioScript.load(script_path)
catalog = default_catalog()

with tempfile.TemporaryDirectory() as tmp:
    session_dir, _ = synthgen.synth_raw_session(script, Path(tmp), check=True)
    records = session_intervals(load_session(session_dir), IndicatorConfig(), catalog)

for r in records:
    present = [catalog.names[j] for j, v in enumerate(r.values) if v]
    print(f"{r.student_id} interval {r.interval_index}: {', '.join(present) or '-'}")
