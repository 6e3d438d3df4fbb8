import random

import numpy as np
import pytest

from wsne.auxgame import WinLoseGame


def matching_pennies():
    return WinLoseGame([[1, 0], [0, 1]], [[0, 1], [1, 0]])


def random_game(rng, m, n, density=0.5):
    A = (np.array([[rng.random() for _ in range(n)] for _ in range(m)]) < density).astype(int)
    B = (np.array([[rng.random() for _ in range(n)] for _ in range(m)]) < density).astype(int)
    return WinLoseGame(A, B)


@pytest.fixture
def pennies():
    return matching_pennies()


@pytest.fixture
def rng():
    return random.Random(20261019)
