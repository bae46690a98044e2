import os
import random
from pathlib import Path

import pytest

from ailspr.instance import Instance, build_neighbors, random_instance, read_instance

DATA = Path(__file__).resolve().parents[1] / "src" / "ailspr" / "data"


def data_file(name: str) -> Path | None:
    """Locate a benchmark file in the bundled data dir or $AILSPR_INSTANCE_DIR."""
    dirs = [DATA]
    if os.environ.get("AILSPR_INSTANCE_DIR"):
        dirs.insert(0, Path(os.environ["AILSPR_INSTANCE_DIR"]))
    for d in dirs:
        p = d / name
        if p.exists():
            return p
    return None


@pytest.fixture
def cmt1() -> Instance:
    return read_instance(DATA / "CMT1.vrp")


@pytest.fixture
def e22() -> Instance:
    return read_instance(DATA / "E-n22-k4.vrp")


@pytest.fixture
def small():
    rng = random.Random(7)
    inst = random_instance(12, rng, capacity=10, max_demand=4)
    return inst, build_neighbors(inst, 5)


def pytest_terminal_summary(terminalreporter):
    from tests_acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
