import os
from pathlib import Path

import numpy as np
import pytest

from pdportfolio import dataio
from pdportfolio.probspace import DiscreteSpace, ReturnsMatrix

DATA = Path(__file__).parent / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def sample_returns():
    return dataio.prices_to_returns(dataio.load_prices_csv(dataio.sample_path()))


def small_instance(seed=11, omega=50, n_assets=3):
    """Gaussian synthetic instance and a mid-range required return."""
    R = dataio.gen_synthetic(dataio.SyntheticSpec(seed, omega, n_assets, dataio.Gaussian()))
    mu_star = 0.5 * (float(R.mu.min()) + float(R.mu.max()))
    return R, mu_star


@pytest.fixture(scope="session")
def tiny():
    return small_instance()


def random_space(rng, n):
    p = rng.uniform(0.1, 1.0, n)
    return DiscreteSpace(p / p.sum())


def pytest_report_header(config):
    from pdportfolio import BACKEND

    return f"pdportfolio kernel backend: {BACKEND} (PDPORTFOLIO_PURE_PYTHON={os.environ.get('PDPORTFOLIO_PURE_PYTHON', '')})"


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
        terminalreporter.write_line(line)
