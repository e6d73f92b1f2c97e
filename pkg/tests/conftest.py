import numpy as np
import pytest

from npdg import GameSpec, PlayerSpec, make_potential


def scalar_pair():
    """Identical-interest 2-player scalar game and its sum potential.

    Closed forms: p_i = 3**-0.5 (coupled), p_pot = 2**-0.5, so the gain
    distance is 2**-0.5 - 3**-0.5 and the loop matrices are -2/sqrt(3)
    and -sqrt(2).
    """
    players = (
        PlayerSpec(B=[[1.0]], Q=[[1.0]], R={0: [[1.0]], 1: [[0.0]]}),
        PlayerSpec(B=[[1.0]], Q=[[1.0]], R={0: [[0.0]], 1: [[1.0]]}),
    )
    game = GameSpec(n=1, A=[[0.0]], players=players, label="identical-interest scalar pair")
    pot = make_potential(game, [[1.0]], np.eye(2))
    return game, pot


SCALAR_D = 2**-0.5 - 3**-0.5  # per-player distance of the scalar pair
SCALAR_AC_NASH = -2.0 / np.sqrt(3.0)
SCALAR_AC_POT = -np.sqrt(2.0)


@pytest.fixture
def pair():
    return scalar_pair()


def single_player_game(a=0.0, b=1.0, q=1.0, r=1.0):
    player = PlayerSpec(B=[[b]], Q=[[q]], R={0: [[r]]})
    return GameSpec(n=1, A=[[a]], players=(player,))


def random_hurwitz(rng, n, margin=0.3):
    m = rng.normal(size=(n, n))
    shift = float(np.max(np.linalg.eigvals(m).real)) + margin
    return m - shift * np.eye(n)
