import math

import numpy as np
import pytest

from gsstep.synth import SynthSpec, synthesize

DELTA = math.pi / 3

_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def case1_pair():
    return synthesize(SynthSpec("I", DELTA))


@pytest.fixture(scope="session")
def case2_pair():
    return synthesize(SynthSpec("II", DELTA))


@pytest.fixture(scope="session")
def case3_pair():
    return synthesize(SynthSpec("III", DELTA))


def periodic_phase(n=256, kx=12, ky=5):
    """Tilted-plane phase with whole cycles across the field: no stationary point,
    and ||cos phi|| = ||sin phi|| exactly."""
    j = np.arange(n)
    jx, jy = np.meshgrid(j, j)
    return 2 * np.pi * (kx * jx + ky * jy) / n


def central(f, frac=0.8):
    h, w = f.shape
    mh, mw = int(round(h * (1 - frac) / 2)), int(round(w * (1 - frac) / 2))
    return f[mh:h - mh, mw:w - mw]


def rms(x):
    return float(np.sqrt(np.mean(np.square(x))))


def wrap(x):
    return np.angle(np.exp(1j * x))
