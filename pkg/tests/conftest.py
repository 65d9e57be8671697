import sys

import numpy as np
import pytest
from scipy.stats import unitary_group

from entgauge.fockspace import LOCAL_LABELS, GeneratorCombo


def random_unitary(rng, n=4):
    return unitary_group.rvs(n, random_state=rng)


def random_local(rng):
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = random_unitary(rng, 2)
    out[2:, 2:] = random_unitary(rng, 2)
    return out


def random_local_combo(rng, scale=1.0):
    return GeneratorCombo({label: scale * rng.normal() for label in LOCAL_LABELS})


@pytest.fixture
def rng():
    return np.random.default_rng(20260418)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda l: int(l.split("criterion")[1].split(":")[0])):
        terminalreporter.write_line(line)
