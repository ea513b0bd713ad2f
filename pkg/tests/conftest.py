import copy
import json
from pathlib import Path

import pytest

from mmfuse import synthgen
from mmfuse.model import default_catalog

DATA = Path(__file__).parent / "data"
SCENARIOS = sorted((DATA / "scenarios").glob("*.json"))

BEDS = synthgen.CORPUS_ZONES
IDLE = {"s1": (4, 4), "s2": (6, 4), "s3": (4, 8), "s4": (6, 8)}


def basic_script(session_id="T01", end=240, **students):
    """Four idle students with flat heart rate; keyword args override a student's fields."""
    phases = [[0, 60], [60, 120], [120, 180], [180, end]]
    d = {"session_id": session_id, "zones": copy.deepcopy(BEDS), "phases": phases, "students": {}}
    for sid, (x, y) in IDLE.items():
        s = {"positions": [[0, end, x, y]],
             "heart_rate": [{"t0": 0, "t1": end, "kind": "constant", "bpm": 70}],
             "utterances": [], "survey": [5, 5]}
        s.update(students.get(sid, {}))
        d["students"][sid] = s
    return d


def write_session(tmp_path, script: dict) -> Path:
    return synthgen.write_script_files(synthgen.ScenarioScript.from_dict(script),
                                       Path(tmp_path) / script["session_id"])


@pytest.fixture
def catalog():
    return default_catalog()


@pytest.fixture
def session_dir(tmp_path):
    return write_session(tmp_path, basic_script())


def load_scenario(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
