import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hamiltonian(n, statistics, rng, dense=True):
    """Dense random valid Hamiltonian (boson ones are shifted positive definite)."""
    from quadtomo.core import QuadraticHamiltonian, _raw_m

    eps = 1 if statistics == "fermion" else -1
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    A = (g + g.conj().T) / 2
    k = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    B = 0.5 * (k - eps * k.T)
    if not dense:
        A = np.triu(np.tril(A, 1), -1)
        B = np.triu(np.tril(B, 1), -1)
    if eps == -1:
        lowest = np.linalg.eigvalsh(_raw_m(QuadraticHamiltonian(A, B, statistics)))[0]
        A = A + (1.0 - lowest) * np.eye(n)
    return QuadraticHamiltonian(A, B, statistics)


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion_report():
    """Record one 'criterion N: PASS/FAIL ...' line, printed in the session summary."""

    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
        _ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
