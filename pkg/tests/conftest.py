import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from inbuilding_rt.geometry import CONCRETE, GLASS, WindowSpec, build_box_scene  # noqa: E402
from inbuilding_rt.scenario import golden_path, load_scenario  # noqa: E402


@pytest.fixture(scope="session")
def box_scene():
    return build_box_scene((3.5, 3.0, 3.0), WindowSpec("x0", (1.5, 1.5), 1.75, 1.5), CONCRETE, GLASS)


@pytest.fixture(scope="session")
def case1():
    return load_scenario(golden_path("case1"))


@pytest.fixture(scope="session")
def case2():
    return load_scenario(golden_path("case2"))


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def _grid(sc):
    from inbuilding_rt.metrics import compute_coverage_grid
    return compute_coverage_grid(sc.scene, sc.donor, sc.repeater, sc.grid, sc.noise, sc.frequency_hz,
                                 sc.tracer)


@pytest.fixture(scope="session")
def grid1(case1):
    return _grid(case1)


@pytest.fixture(scope="session")
def grid2(case2):
    return _grid(case2)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is not None and acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in acceptance.RESULTS:
            terminalreporter.write_line(line)
