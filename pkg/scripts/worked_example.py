#!/usr/bin/env python3
"""End-to-end walkthrough of the identical-interest scalar pair.

Two players steer the same integrator x' = u1 + u2 with identical unit
costs; the candidate potential is the shared cost over the stacked input.
Every quantity the library computes has a closed form here, printed side
by side for eyeballing.
"""

import numpy as np

from npdg import (
    GameSpec,
    PlayerSpec,
    closed_loop_matrix_error,
    closed_loop_nash,
    closed_loop_potential,
    delta_star,
    deltaK_bound_chain,
    make_potential,
    normalize_potential_scaling,
    solve_care,
    solve_coupled_riccati,
    verify_bound,
)


def main():
    players = (
        PlayerSpec(B=[[1.0]], Q=[[1.0]], R={0: [[1.0]], 1: [[0.0]]}),
        PlayerSpec(B=[[1.0]], Q=[[1.0]], R={0: [[0.0]], 1: [[1.0]]}),
    )
    game = GameSpec(n=1, A=[[0.0]], players=players, label="identical-interest scalar pair")
    pot = make_potential(game, [[1.0]], np.eye(2))

    nash = solve_coupled_riccati(game)
    care = solve_care(game.A, pot.Bp, pot.Qp, pot.Rp)
    print(f"coupled P_i      {nash.P[0][0, 0]:.12f}   closed form 3^-1/2 = {3**-0.5:.12f}")
    print(f"potential P      {care.P[0][0, 0]:.12f}   closed form 2^-1/2 = {2**-0.5:.12f}")

    ln = closed_loop_nash(game, nash.P)
    lp = closed_loop_potential(game, pot, care.P[0])
    print(f"Nash loop        {ln.Ac[0, 0]:.12f}   closed form -2/sqrt(3) = {-2/np.sqrt(3):.12f}")
    print(f"potential loop   {lp.Ac[0, 0]:.12f}   closed form -sqrt(2)   = {-np.sqrt(2):.12f}")

    dist = delta_star(game, nash.P, pot, care.P[0])
    print(f"delta_star       {dist.delta_star:.12f}   closed form {2**-0.5 - 3**-0.5:.12f}")

    dk = closed_loop_matrix_error(ln.Ac, lp.Ac)
    pot_n, kappa = normalize_potential_scaling(pot)
    care_n = solve_care(game.A, pot_n.Bp, pot_n.Qp, pot_n.Rp)
    chain = deltaK_bound_chain(game, pot_n, nash.P, care_n.P[0]).bound_chain
    print(f"|deltaK|         {dk.norm2:.12f}   chain value {chain.chain_value:.12f} (kappa used {kappa:.2e})")

    report = verify_bound(game, pot, x0=[1.0], grid=np.linspace(0.0, 1.0, 101))
    print(f"error(1)         {report.error[-1]:.12f}   closed form {abs(np.exp(-2/np.sqrt(3)) - np.exp(-np.sqrt(2))):.12f}")
    print(f"bound(1)         {report.bound[-1]:.12f}   closed form {np.sqrt(2)*2*np.exp(np.sqrt(2))*(2**-0.5 - 3**-0.5):.12f}")
    print(f"margin(1)        {report.margin[-1]:.6f}")
    print(f"bound holds on [0, 1]: {report.holds}")


if __name__ == "__main__":
    main()
