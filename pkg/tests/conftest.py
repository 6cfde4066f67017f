import sys

import numpy as np
import pytest

from aaqip.sysfile import data_path, load_system


def random_deviation(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = a + a.conj().T
    return h - np.trace(h) / dim * np.eye(dim)


def random_unitary(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture(scope="session")
def aaqst_system():
    return load_system(data_path("synthetic_3f_aaqst.json"))


@pytest.fixture(scope="session")
def sspt_system():
    return load_system(data_path("synthetic_3f_sspt.json"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
