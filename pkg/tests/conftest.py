import numpy as np
import pytest

from kazext.groups import (
    ActionHom,
    Cocycle,
    ExtensionData,
    make_cyclic,
    semidirect_product,
    trivial_action,
)


def carry_data(p):
    """C_{p^2} as an extension of C_p by C_p."""
    A, H = make_cyclic(p), make_cyclic(p)
    i = np.arange(p)
    sigma = (i[:, None] + i[None, :]) // p
    return ExtensionData(A, H, trivial_action(H, A), Cocycle(sigma))


def s3():
    """C_3 x| C_2 with the inversion action."""
    A, H = make_cyclic(3), make_cyclic(2)
    act = ActionHom(H, A, np.array([[0, 1, 2], [0, 2, 1]]))
    return semidirect_product(A, H, act, label="S_3")


@pytest.fixture
def S3():
    return s3()


ACCEPTANCE_LINES: list[str] = []


def record(criterion, ok, detail):
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def note(text):
    ACCEPTANCE_LINES.append(f"note        : {text}")
    print(text)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
