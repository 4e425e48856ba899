import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fairaudit import data, fetch

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = Path(os.environ.get("FAIRAUDIT_DATA", ROOT / "data"))


@pytest.fixture(scope="session")
def raw_data_dir() -> Path:
    """Raw Adult/COMPAS files, fetched (checksum-verified) on first use."""
    for dataset in ("adult", "compas"):
        fetch.fetch(dataset, DATA_DIR)
    return DATA_DIR


@pytest.fixture(scope="session")
def adult_raw(raw_data_dir):
    return data.read_adult(raw_data_dir / "adult")


@pytest.fixture(scope="session")
def compas_raw(raw_data_dir):
    return data.read_compas(raw_data_dir / "compas")


def make_dataset(labels, protected, features=None, weights=None):
    labels = np.asarray(labels)
    if features is None:
        features = np.arange(len(labels), dtype=float).reshape(-1, 1)
    return data.Dataset(features, labels, protected, weights)


@pytest.fixture
def ten_rows():
    # privileged: 4 positive, 2 negative; unprivileged: 1 positive, 3 negative
    labels = [1, 1, 1, 1, 0, 0, 1, 0, 0, 0]
    protected = [1, 1, 1, 1, 1, 1, 0, 0, 0, 0]
    return make_dataset(labels, protected)


# Acceptance verdicts, printed as one line per criterion after the run.
_VERDICTS: dict[int, tuple[bool, str]] = {}


def record_verdict(number: int, ok: bool, detail: str) -> None:
    _VERDICTS[number] = (ok, detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        ok, detail = _VERDICTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
