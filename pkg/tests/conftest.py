import numpy as np
import pytest

from volclust.synthetic import fixture_dir

# Acceptance results collected by tests/test_acceptance.py, printed at the end of the run.
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")


@pytest.fixture(scope="session")
def fixture_path():
    return fixture_dir()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def blobs(seed, per=100, spread=0.3, centers=((0.0, 0.0), (10.0, 0.0), (5.0, 9.0))):
    """Three planted 2-D Gaussian blobs; returns (points, true labels)."""
    r = np.random.default_rng(seed)
    pts, lab = [], []
    for i, c in enumerate(centers):
        pts.append(r.normal(c, spread, size=(per, len(c))))
        lab += [i] * per
    return np.vstack(pts), np.array(lab)
