import os
from pathlib import Path

import pytest
from hypothesis import settings

from treehom import TreeHomomorphism, parse_term
from treehom.cli import load_automaton, load_hom

settings.register_profile("suite", max_examples=50, derandomize=True, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "suite"))

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def doubling_chain():
    return load_automaton(DATA_DIR / "doubling_chain.aut")


@pytest.fixture(scope="session")
def duplicating_hom():
    return load_hom(DATA_DIR / "duplicating_hom.hom")


@pytest.fixture(scope="session")
def doubling_image():
    return load_automaton(DATA_DIR / "doubling_image.aut")


@pytest.fixture(scope="session")
def constrained_pair():
    return load_automaton(DATA_DIR / "constrained_pair.aut")


@pytest.fixture(scope="session")
def arctic_chain():
    return load_automaton(DATA_DIR / "arctic_chain.aut")


@pytest.fixture(scope="session")
def full_duplication():
    return load_hom(DATA_DIR / "full_duplication.hom")


@pytest.fixture(scope="session")
def shifted_duplication():
    return load_hom(DATA_DIR / "shifted_duplication.hom")


@pytest.fixture(scope="session")
def counting_chain():
    return load_automaton(DATA_DIR / "counting_chain.aut")


@pytest.fixture(scope="session")
def z6_chain():
    return load_automaton(DATA_DIR / "z6_chain.aut")


@pytest.fixture(scope="session")
def identity_hom(doubling_chain):
    sigma = doubling_chain.alphabet
    return TreeHomomorphism(sigma, sigma, {
        "a": parse_term("a", sigma),
        "g": parse_term("g(x1)", sigma, ext={"x1"}),
        "f": parse_term("f(x1)", sigma, ext={"x1"}),
    })
