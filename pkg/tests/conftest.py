import numpy as np
import pytest

from emflow import extract_currents, make_shape, significant_edges, sobel


def currents_of(image, percent=20.0):
    field = sobel(image)
    return extract_currents(field, significant_edges(field, percent))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key, (ok, detail) in test_acceptance.RESULTS.items():
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}: {detail}")
