import math
import sys

import numpy as np
from hypothesis import strategies as st

from teleport_hv.spinor_core import Direction

angles = st.tuples(
    st.floats(0.0, math.pi, allow_nan=False),
    st.floats(0.0, 2 * math.pi, allow_nan=False),
)
directions = angles.map(lambda tp: Direction.from_angles(*tp))
labels = st.sampled_from([(1, 1), (1, -1), (-1, 1), (-1, -1)])


def rng(seed=0):
    return np.random.default_rng(seed)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS.values():
        terminalreporter.write_line(line)
