import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from npdg import (
    GameSpec,
    PlayerSpec,
    PotentialSpec,
    aggregate_inputs,
    make_potential,
    normalize_potential_scaling,
    rescale_player_cost,
    rescale_potential_cost,
    solve_care,
    validate_game,
    validate_potential,
)
from npdg.games import SCALING_MARGIN
from npdg.linalg import spectral_norm

from conftest import scalar_pair, single_player_game


def two_player_scalar():
    players = (
        PlayerSpec(B=[[1.0]], Q=[[2.0]], R={0: [[1.0]], 1: [[0.5]]}),
        PlayerSpec(B=[[1.0]], Q=[[1.0]], R={0: [[0.0]], 1: [[3.0]]}),
    )
    return GameSpec(n=1, A=[[0.0]], players=players)


class TestValidation:
    def test_well_formed(self):
        report = validate_game(two_player_scalar())
        assert report.ok
        assert report.violations == ()

    def test_self_penalty_must_be_definite(self):
        players = (PlayerSpec(B=[[1.0]], Q=[[1.0]], R={0: [[0.0]]}),)
        report = validate_game(GameSpec(n=1, A=[[0.0]], players=players))
        assert not report.ok
        assert any("R^{11} not positive definite" in m for m in report.messages())

    def test_state_penalty_sign(self):
        players = (PlayerSpec(B=[[1.0]], Q=[[-1.0]], R={0: [[1.0]]}),)
        report = validate_game(GameSpec(n=1, A=[[0.0]], players=players))
        assert any("Q^{1} not positive semi-definite" in m for m in report.messages())

    def test_cross_penalty_may_be_zero(self):
        game = two_player_scalar()
        assert validate_game(game).ok

    def test_cross_penalty_sign(self):
        players = (
            PlayerSpec(B=[[1.0]], Q=[[1.0]], R={0: [[1.0]], 1: [[-0.1]]}),
            PlayerSpec(B=[[1.0]], Q=[[1.0]], R={1: [[1.0]]}),
        )
        report = validate_game(GameSpec(n=1, A=[[0.0]], players=players))
        assert any("R^{12}" in m for m in report.messages())

    def test_nondiagonal_rejected_by_default(self):
        q = [[1.0, 0.1], [0.1, 1.0]]
        players = (PlayerSpec(B=[[1.0], [0.0]], Q=q, R={0: [[1.0]]}),)
        game = GameSpec(n=2, A=np.zeros((2, 2)), players=players)
        assert not validate_game(game).ok
        assert validate_game(game, allow_nondiagonal=True).ok

    def test_missing_self_penalty(self):
        players = (PlayerSpec(B=[[1.0]], Q=[[1.0]], R={}),)
        report = validate_game(GameSpec(n=1, A=[[0.0]], players=players))
        assert any("R^{11} missing" in m for m in report.messages())

    def test_b_row_count(self):
        players = (PlayerSpec(B=[[1.0]], Q=np.eye(2), R={0: [[1.0]]}),)
        report = validate_game(GameSpec(n=2, A=np.zeros((2, 2)), players=players))
        assert not report.ok

    def test_idempotent(self):
        game = two_player_scalar()
        assert validate_game(game) == validate_game(game)
        bad = GameSpec(n=1, A=[[0.0]], players=(PlayerSpec(B=[[1.0]], Q=[[-1.0]], R={0: [[1.0]]}),))
        assert validate_game(bad) == validate_game(bad)

    def test_potential_validation(self):
        game, pot = scalar_pair()
        assert validate_potential(game, pot).ok
        bad = PotentialSpec(Bp=pot.Bp, Qp=[[-1.0]], Rp=pot.Rp, blocks=pot.blocks)
        assert not validate_potential(game, bad).ok
        mismatched = PotentialSpec(Bp=pot.Bp, Qp=pot.Qp, Rp=pot.Rp, blocks=(2,))
        assert not validate_potential(game, mismatched).ok


class TestAggregation:
    def test_scalar_concatenation(self):
        game, _ = scalar_pair()
        bp, blocks = aggregate_inputs(game)
        assert np.array_equal(bp, np.array([[1.0, 1.0]]))
        assert blocks == (1, 1)

    def test_single_player_identity(self):
        game = single_player_game()
        bp, blocks = aggregate_inputs(game)
        assert np.array_equal(bp, game.players[0].B)
        assert blocks == (1,)

    def test_shape_arithmetic(self):
        players = (
            PlayerSpec(B=[[1.0], [0.0]], Q=np.eye(2), R={0: [[1.0]]}),
            PlayerSpec(B=[[1.0, 0.0], [0.0, 1.0]], Q=np.eye(2), R={1: np.eye(2)}),
        )
        game = GameSpec(n=2, A=np.zeros((2, 2)), players=players)
        bp, blocks = aggregate_inputs(game)
        assert bp.shape == (2, 3)
        assert blocks == (1, 2)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 4), st.data())
    def test_blocks_recover_inputs(self, n, data):
        widths = data.draw(st.lists(st.integers(1, 3), min_size=1, max_size=4))
        rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
        players = tuple(
            PlayerSpec(B=rng.normal(size=(n, w)), Q=np.eye(n), R={i: np.eye(w)})
            for i, w in enumerate(widths)
        )
        game = GameSpec(n=n, A=np.zeros((n, n)), players=players)
        bp, blocks = aggregate_inputs(game)
        assert blocks == tuple(widths)
        edges = np.concatenate(([0], np.cumsum(widths)))
        for i, pl in enumerate(players):
            assert np.array_equal(bp[:, edges[i] : edges[i + 1]], pl.B)


class TestRescaling:
    def test_identity(self):
        game = two_player_scalar()
        same = rescale_player_cost(game, 0, 1.0)
        assert np.array_equal(same.players[0].Q, game.players[0].Q)
        assert np.array_equal(same.players[0].R[1], game.players[0].R[1])

    def test_doubling(self):
        game = two_player_scalar()
        scaled = rescale_player_cost(game, 0, 2.0)
        assert scaled.players[0].Q[0, 0] == 4.0
        assert scaled.players[0].R[0][0, 0] == 2.0
        # other player untouched
        assert scaled.players[1].Q[0, 0] == 1.0

    def test_rejects_nonpositive(self):
        game = two_player_scalar()
        with pytest.raises(ValueError):
            rescale_player_cost(game, 0, 0.0)
        with pytest.raises(ValueError):
            rescale_potential_cost(scalar_pair()[1], -1.0)

    def test_gain_invariance_single_player(self):
        # P scales by kappa, so K = R^-1 B' P is unchanged
        rng = np.random.default_rng(1)
        a = rng.normal(size=(3, 3))
        b = rng.normal(size=(3, 1))
        q = np.diag(rng.uniform(0.5, 2.0, size=3))
        r = np.array([[1.3]])
        for kappa in (0.1, 3.0, 100.0):
            base = solve_care(a, b, q, r)
            scaled = solve_care(a, b, kappa * q, kappa * r)
            k0 = np.linalg.solve(r, b.T @ base.P[0])
            k1 = np.linalg.solve(kappa * r, b.T @ scaled.P[0])
            assert np.max(np.abs(k0 - k1)) <= 1e-9
            assert np.max(np.abs(scaled.P[0] - kappa * base.P[0])) <= 1e-7 * kappa

    def test_potential_rescale_arithmetic(self):
        _, pot = scalar_pair()
        pot03 = rescale_potential_cost(pot, 0.3)
        scaled = rescale_potential_cost(pot03, 4.0)
        assert np.allclose(np.diag(scaled.Rp), 1.2)
        assert spectral_norm(scaled.Rp) == pytest.approx(1.2, abs=1e-12)


class TestNormalizeScaling:
    def test_identity_norm_gets_bumped(self):
        _, pot = scalar_pair()  # Rp = I2, spectral norm exactly 1
        scaled, kappa = normalize_potential_scaling(pot)
        assert kappa == pytest.approx(1.0 + SCALING_MARGIN, rel=1e-12)
        assert spectral_norm(scaled.Rp) >= 1.0 + SCALING_MARGIN - 1e-12

    def test_already_large_untouched(self):
        game, _ = scalar_pair()
        pot = make_potential(game, [[1.0]], np.diag([2.0, 3.0]))
        scaled, kappa = normalize_potential_scaling(pot)
        assert kappa == 1.0
        assert np.array_equal(scaled.Rp, pot.Rp)

    def test_small_norm(self):
        game = single_player_game()
        pot = make_potential(game, [[1.0]], [[0.1]])
        scaled, kappa = normalize_potential_scaling(pot)
        assert kappa == pytest.approx((1.0 + SCALING_MARGIN) / 0.1, rel=1e-12)
        assert spectral_norm(scaled.Rp) >= 1.0 + SCALING_MARGIN - 1e-12

    @settings(max_examples=30, deadline=None)
    @given(st.floats(min_value=1e-3, max_value=10.0))
    def test_always_meets_margin(self, scale):
        game, _ = scalar_pair()
        pot = make_potential(game, [[1.0]], scale * np.eye(2))
        scaled, _ = normalize_potential_scaling(pot)
        assert spectral_norm(scaled.Rp) >= 1.0 + SCALING_MARGIN - 1e-12
