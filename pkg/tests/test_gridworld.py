import itertools
import json

import numpy as np
import pytest

from laprep.errors import Disconnected, InvalidSize, SchemaError, TooManyWalls
from laprep.gridworld import GridEnv, adjacency_edges, build_grid, carve_walls, to_chain


def test_build_grid_small():
    env = build_grid(2, 2)
    assert env.num_cells == 4
    assert len(adjacency_edges(2, 2)) == 4
    assert env.goal == (1, 1)
    assert env.walls == 0


def test_build_grid_15():
    env = build_grid(15, 15)
    assert env.num_cells == 225
    assert len(env.open_edges()) == 15 * 14 + 15 * 14 == 420


def test_build_grid_rejects_thin():
    with pytest.raises(InvalidSize):
        build_grid(1, 5)


def test_carve_zero_walls_is_noop():
    env = build_grid(4, 4)
    assert carve_walls(env, 0, 3).removed_edges == env.removed_edges


def test_carve_fifty_walls_stays_connected():
    env = carve_walls(build_grid(15, 15), 50, 0)
    assert env.walls == 50
    assert len(env.open_edges()) == 370
    assert env.is_connected()


def test_two_by_two_every_single_removal_is_connected():
    base = build_grid(2, 2)
    for e in adjacency_edges(2, 2):
        assert GridEnv(2, 2, (1, 1), frozenset([e])).is_connected()
    for seed in range(10):
        env = carve_walls(base, 1, seed)
        assert len(env.open_edges()) == 3 and env.is_connected()


def test_two_by_two_two_removals_can_disconnect():
    disconnected = [
        pair for pair in itertools.combinations(adjacency_edges(2, 2), 2)
        if not GridEnv(2, 2, (1, 1), frozenset(pair)).is_connected()
    ]
    assert len(disconnected) == 6  # removing any two edges of a 4-cycle disconnects it
    with pytest.raises(TooManyWalls):
        carve_walls(build_grid(2, 2), 2, 0)


def test_carve_is_deterministic_and_nested():
    base = build_grid(15, 15)
    for seed in range(3):
        prev = frozenset()
        for w in range(0, 51, 7):
            env = carve_walls(base, w, seed)
            assert env.removed_edges == carve_walls(base, w, seed).removed_edges
            assert prev <= env.removed_edges
            prev = env.removed_edges
    assert carve_walls(base, 20, 0).removed_edges != carve_walls(base, 20, 1).removed_edges


def test_wilson_tree_is_uniform_on_2x3():
    """2x3 grid graph has 15 spanning trees; frequencies of the surviving edge set should be flat."""
    base = build_grid(2, 3)
    counts = {}
    trials = 6000
    for seed in range(trials):
        env = carve_walls(base, 2, seed)
        counts[env.removed_edges] = counts.get(env.removed_edges, 0) + 1
    # 7 edges, trees have 5, so w=2 removes exactly the non-tree edges
    assert len(counts) == 15
    freq = np.array(list(counts.values())) / trials
    assert np.all(np.abs(freq - 1 / 15) < 0.02)


def test_json_round_trip(tmp_path):
    env = carve_walls(build_grid(6, 5), 8, 11)
    path = tmp_path / "env.json"
    env.save(path)
    again = GridEnv.load(path)
    assert again == env
    assert again.to_json() == env.to_json()
    data = json.loads(path.read_text())
    assert data["format_version"] == 1
    assert data["goal"] == [5, 4]
    assert data["removed_edges"] == sorted(data["removed_edges"])


def test_json_rejects_non_adjacent():
    bad = {"n": 3, "m": 3, "goal": [2, 2], "removed_edges": [[[0, 0], [1, 1]]], "seed": 0}
    with pytest.raises(SchemaError):
        GridEnv.from_dict(bad)


def test_chain_2x2_rows():
    chain = to_chain(build_grid(2, 2))
    # state 0 = (0,0): up and left bounce, down -> (1,0), right -> (0,1)
    np.testing.assert_allclose(chain.P[0], [0.5, 0.25, 0.25, 0.0])
    np.testing.assert_allclose(chain.P[3], [0.25] * 4)


def test_chain_reward_next_to_goal():
    chain = to_chain(build_grid(3, 3))
    # (1,2) reaches the goal (2,2) with one of four actions
    s = 1 * 3 + 2
    assert chain.r[s] == pytest.approx(0.25 * 1 + 0.75 * -1)
    assert chain.r[0] == -1.0
    assert chain.r[8] == -1.0


def test_chain_wall_blocks_move():
    env = GridEnv(2, 2, (1, 1), frozenset([((0, 0), (0, 1))]))
    chain = to_chain(env)
    np.testing.assert_allclose(chain.P[0], [0.75, 0.0, 0.25, 0.0])


def test_chain_custom_policy():
    env = build_grid(2, 2)
    pi = np.tile([0.0, 0.0, 0.0, 1.0], (4, 1))  # always right
    pi[1] = [0.0, 1.0, 0.0, 0.0]  # (0,1) goes down into the goal
    pi[2] = [1.0, 0.0, 0.0, 0.0]  # (1,0) goes up
    chain = to_chain(env, pi)
    np.testing.assert_allclose(chain.P[1], [0, 0, 0, 1])
    assert chain.r[1] == 1.0


def test_chain_rows_stochastic_across_sweep():
    base = build_grid(15, 15)
    for w in (1, 25, 50):
        for seed in range(2):
            P = to_chain(carve_walls(base, w, seed)).P
            assert np.abs(P.sum(axis=1) - 1).max() <= 1e-12
            assert P.min() >= 0


def test_chain_rejects_disconnected():
    env = GridEnv(2, 2, (1, 1), frozenset([((0, 0), (0, 1)), ((0, 0), (1, 0))]))
    with pytest.raises(Disconnected):
        to_chain(env)
