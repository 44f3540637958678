import numpy as np
import pytest
from hypothesis import settings

from gausspt.params import SystemParams

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""
    def _report(number, title, ok, detail):
        _ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} [{number:>2}] {title}: {detail}")
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def balanced():
    return SystemParams(kappa=1.0, s=1.0, coupling_G=1.5, n_th=0.0, squeeze_r=1.0)


@pytest.fixture
def unbalanced():
    return SystemParams(kappa=1.0, s=2.0, coupling_G=2.3, n_th=0.0, squeeze_r=1.0)


def random_physical_cm(rng, max_sq=1.0, max_nth=2.0):
    """Thermal product state sent through a random two-mode symplectic map."""
    from scipy.linalg import expm
    omega = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    h = rng.normal(size=(4, 4))
    h = max_sq * (h + h.T) / 2
    s = expm(omega @ h)
    nu = 0.5 + rng.uniform(0, max_nth, size=2)
    d = np.diag([nu[0], nu[0], nu[1], nu[1]])
    return s @ d @ s.T
