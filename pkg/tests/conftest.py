import io
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from etpa_toolkit import sample_path  # noqa: E402
from etpa_toolkit.atomic import parse_level_table, parse_line_table  # noqa: E402
from etpa_toolkit.populations import CollisionTable  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def ar_levels():
    return parse_level_table(sample_path("ar_ii_levels.csv"))


@pytest.fixture(scope="session")
def ar_lines(ar_levels):
    return parse_line_table(sample_path("ar_ii_lines.csv"), ar_levels)


@pytest.fixture(scope="session")
def ar_collisions(ar_levels):
    return CollisionTable.from_csv(sample_path("ar_ii_collisions.csv"), ar_levels)


def levels_from_text(text):
    return parse_level_table(io.StringIO(text))


def lines_from_text(text, levels):
    return parse_line_table(io.StringIO(text), levels)


THREE_LEVEL = """id,configuration,term,J,energy_cm1
g,s,2S,1/2,0
i,p,2P*,1/2,13000
e,s2,2S,1/2,26000
"""


@pytest.fixture
def three_level():
    return levels_from_text(THREE_LEVEL)


# one PASS/FAIL line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
