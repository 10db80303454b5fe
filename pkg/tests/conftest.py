import random
import warnings
from fractions import Fraction as F

import pytest

from ifsconj.interval_ifs import AffineIfs, Mask, random_affine_triple
from ifsconj.kneading import solve_gamma
from ifsconj.symbolic import KneadingWarning, alpha_beta

MAIN = (F(7, 10), F(3, 5), F(11, 20))
TOUCH = (F(1, 2), F(1, 2), F(1, 2))
ACCEPTANCE_SEED = 2024


def build(triple):
    a, b, rho = triple
    return AffineIfs(a, b), Mask(rho)


def solved(triple, n=200):
    system, mask = build(triple)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KneadingWarning)
        alpha, beta = alpha_beta(system, mask, n)
    return system, mask, solve_gamma(alpha, beta)


def acceptance_triples():
    """The worked system plus two random admissible triples from a fixed seed.

    Slopes stay in (1/2, 5/6) so that gamma^200 is far below the solver tolerance.
    """
    rng = random.Random(ACCEPTANCE_SEED)
    box = (F(1, 2), F(5, 6))
    return [MAIN, random_affine_triple(rng, slope_range=box), random_affine_triple(rng, slope_range=box)]


@pytest.fixture(scope="session")
def main_system():
    return solved(MAIN)


@pytest.fixture(scope="session")
def touching_system():
    return solved(TOUCH)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
