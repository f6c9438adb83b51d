import random
from pathlib import Path

import pytest

from kabcheck.parser import parse_formulas, parse_kab

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

KAB_FIXTURES = ["superhero", "superhero_small", "copyall", "forget"]
# fixture name -> formula file stem
MU_FIXTURES = {"superhero": "superhero", "superhero_small": "superhero", "copyall": "copyall", "forget": "forget"}


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=20240611, help="seed for randomized tests")


@pytest.fixture
def seed(request):
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed):
    return random.Random(seed)


def load(name: str):
    return parse_kab((FIXTURES / f"{name}.kab").read_text())


def load_formulas(name: str):
    return parse_formulas((FIXTURES / f"{name}.mu").read_text())


@pytest.fixture(scope="session")
def superhero():
    return load("superhero")
