import cmath

import numpy as np
import pytest

from shadowlab.lft import SymbolTag


def draw_params(tag: SymbolTag, rng: np.random.Generator) -> dict:
    """Random canonical-family parameters, kept a safe margin inside each family."""
    if tag is SymbolTag.EA:
        theta = rng.uniform(0.05, np.pi) * rng.choice([-1, 1])
        return {"omega": cmath.exp(1j * theta)}
    if tag in (SymbolTag.HA, SymbolTag.HNA_I, SymbolTag.HNA_II):
        return {"r": rng.uniform(0.05, 0.95)}
    if tag is SymbolTag.LOX:
        while True:
            a = complex(*rng.uniform(-1, 1, 2))
            c = complex(*rng.uniform(-1, 1, 2))
            if abs(a) < 1 and abs(1 - a) >= 0.05 and abs(a) + abs(1 - a) * abs(c) <= 1:
                return {"a": a, "c": c}
    if tag is SymbolTag.PA:
        return {"a": 1j * rng.uniform(0.05, 5) * rng.choice([-1, 1])}
    if tag is SymbolTag.PNA:
        return {"a": complex(rng.uniform(0.05, 5), rng.uniform(-5, 5))}
    raise ValueError(tag)


def draw_automorphism_center(rng: np.random.Generator) -> complex:
    r, t = 0.8 * np.sqrt(rng.uniform()), rng.uniform(0, 2 * np.pi)
    return r * cmath.exp(1j * t)


FAMILIES = [t for t in SymbolTag if t is not SymbolTag.IDENTITY]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
