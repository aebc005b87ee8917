import pytest

from hcwalk.topology import WalkMode, WalkTopology

T = WalkTopology
PEN = WalkMode.PENETRATE

# Topologies small enough for the full-space oracle.
ORACLE_MATRIX = [
    T.bare(1),
    T.bare(2),
    T.bare(4),
    T.tails(2, 1, 1),
    T.tails(3, 2, 2),
    T.tails(1, 2, 3),
    T.concat([2, 2]),
    T.concat([2, 2], PEN),
    T.concat([2, 2, 2]),
    T.concat([2, 2, 2], PEN),
    T.concat([2, 3, 1]),
    T.concat([3, 2, 1], PEN),
    T.concat([1, 2], PEN),
    T.concat([3, 1]),
]


@pytest.fixture(params=ORACLE_MATRIX, ids=lambda t: t.key().replace(" ", "_"))
def small_topology(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, format_line

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(format_line(k))
