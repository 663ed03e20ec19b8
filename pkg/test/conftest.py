# test/conftest.py

import glob
import os

import pytest

from hcspdc.discharge import DischargeConfig
from hcspdc.evaluator import EvalConfig
from hcspdc.simulator import SimConfig
from hcspdc.utils import read_program

ROOT       = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS_DIR = os.path.join(ROOT, "corpus")
GOLDEN_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden")

# reduced loops by default; HCSP_FULL=1 runs the acceptance-scale versions
FULL = os.getenv("HCSP_FULL", "0") == "1"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale loop (reduced unless HCSP_FULL=1)")


def corpus_paths():
    return sorted(glob.glob(os.path.join(CORPUS_DIR, "*.hcsp")))


def corpus_path(name: str) -> str:
    return os.path.join(CORPUS_DIR, name)


@pytest.fixture
def sim_cfg():
    return SimConfig(seed=0, horizon=10.0)


@pytest.fixture
def eval_cfg():
    return EvalConfig()


@pytest.fixture
def discharge_cfg():
    return DischargeConfig(budget=200, seed=0)


@pytest.fixture
def program():
    """Load a corpus program by file name: program("07_clock.hcsp") -> (term, init)."""
    return lambda name: read_program(corpus_path(name))
