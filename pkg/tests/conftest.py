import numpy as np
import pytest

from hypwalk.groups import Word, b3_sigma, hecke, psl2z_sigma


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_letters(rng, n_letters, length, involutions=()):
    """Random signed letters; involution letters are only used with a + sign."""
    out = []
    for _ in range(length):
        i = int(rng.integers(1, n_letters + 1))
        sign = 1 if i in involutions else (1 if rng.random() < 0.5 else -1)
        out.append(sign * i)
    return tuple(out)


@pytest.fixture(name="random_letters")
def random_letters_fixture():
    return random_letters


@pytest.fixture
def random_braid_word(rng):
    def make(length):
        return Word(random_letters(rng, 2, length), b3_sigma())
    return make


@pytest.fixture
def random_sigma_word(rng):
    def make(length):
        return Word(random_letters(rng, 2, length), psl2z_sigma())
    return make


@pytest.fixture
def random_h3_word(rng):
    def make(length):
        return Word(random_letters(rng, 2, length, involutions=(1,)), hecke(3))
    return make


def pytest_terminal_summary(terminalreporter):
    import sys

    results = {}
    for name, mod in list(sys.modules.items()):
        if name.split(".")[-1] == "test_acceptance":
            results.update(getattr(mod, "RESULTS", {}))
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n].line())
