import numpy as np
import pytest

from policyspace.envs.soccer import (Bot, MarkovSoccer, SoccerConfig,
                                     bot_action, bot_match_config)
from policyspace.errors import ConfigError

UP, DOWN, LEFT, RIGHT, STAND = range(5)


def fresh(seed=0, **cfg):
    cfg.setdefault("draw_prob", 0.0)
    env = MarkovSoccer(SoccerConfig(**cfg))
    env.reset(seed=seed)
    return env


def test_carrier_scores_by_entering_the_goal_mouth():
    env = fresh(initial_possession="left", start_left=(1, 4), start_right=(3, 0))
    _, rewards, dones = env.step({"left": RIGHT, "right": STAND})
    assert env.result == "left"
    assert rewards == {"left": 1.0, "right": -1.0}
    assert dones == {"left": True, "right": True}


def test_carrier_cannot_score_outside_goal_rows():
    env = fresh(initial_possession="left", start_left=(0, 4), start_right=(3, 0))
    env.step({"left": RIGHT, "right": STAND})
    assert env.result is None
    assert env.pos["left"] == (0, 4)  # blocked by the edge


def test_non_carrier_cannot_score():
    env = fresh(initial_possession="right", start_left=(1, 4), start_right=(3, 0))
    env.step({"left": RIGHT, "right": STAND})
    assert env.result is None


def test_right_player_scores_into_the_left_goal():
    env = fresh(initial_possession="right", start_left=(3, 4), start_right=(2, 0))
    _, rewards, _ = env.step({"left": STAND, "right": LEFT})
    assert env.result == "right"
    assert rewards["right"] == 1.0 and rewards["left"] == -1.0


def test_bumping_the_carrier_steals_possession():
    env = fresh(initial_possession="right", start_left=(1, 1), start_right=(1, 2))
    env.step({"left": RIGHT, "right": STAND})
    assert env.possession == "left"
    assert env.pos["left"] == (1, 1)      # the bumper does not move
    assert env.pos["right"] == (1, 2)


def test_carrier_bumping_defender_loses_the_ball():
    env = fresh(initial_possession="left", start_left=(1, 1), start_right=(1, 2))
    env.step({"left": RIGHT, "right": STAND})
    assert env.possession == "right"
    assert env.pos["left"] == (1, 1)


def test_draw_probability_one_ends_every_step_in_a_draw():
    env = fresh(draw_prob=1.0)
    _, rewards, dones = env.step({"left": RIGHT, "right": LEFT})
    assert env.result == "draw"
    assert rewards == {"left": 0.0, "right": 0.0}
    assert all(dones.values())


def test_tick_cap_forces_a_draw():
    env = fresh(max_episode_timesteps=3)
    for _ in range(3):
        env.step({"left": STAND, "right": STAND})
    assert env.result == "draw"
    assert env.finished


def test_no_teleporting_single_cell_moves_only():
    env = fresh(seed=4)
    rng = np.random.default_rng(1)
    prev = dict(env.pos)
    for _ in range(100):
        if env.finished:
            break
        env.step({"left": int(rng.integers(5)), "right": int(rng.integers(5))})
        for side in ("left", "right"):
            dist = abs(env.pos[side][0] - prev[side][0]) + abs(env.pos[side][1] - prev[side][1])
            assert dist <= 1
        prev = dict(env.pos)


def test_observation_is_side_invariant_under_mirroring():
    env_a = fresh(initial_possession="left", start_left=(2, 1), start_right=(0, 3))
    # the mirrored scenario: right player stands where left stood, mirrored
    env_b = fresh(initial_possession="right", start_left=(0, 1), start_right=(2, 3))
    assert np.array_equal(env_a.observe("left"), env_b.observe("right"))


def test_observation_pure_and_possession_flag_binary():
    env = fresh(seed=2)
    obs1 = env.observe("left")
    obs2 = env.observe("left")
    assert np.array_equal(obs1, obs2)
    assert obs1[-1] in (0.0, 1.0)
    assert obs1.shape == (41,)
    assert obs1.sum() == pytest.approx(2.0 + obs1[-1])


def test_execution_order_is_a_fair_coin():
    # both race for the same empty cell; the first mover wins it
    wins_left = 0
    trials = 10_000
    for seed in range(trials):
        env = fresh(seed=seed, initial_possession="left",
                    start_left=(1, 2), start_right=(3, 2))
        env.step({"left": DOWN, "right": UP})  # both want (2, 2)
        if env.pos["left"] == (2, 2):
            wins_left += 1
    assert abs(wins_left / trials - 0.5) < 0.02


def test_illegal_action_rejected():
    env = fresh()
    with pytest.raises(ConfigError):
        env.step({"left": 7, "right": STAND})


def test_same_seed_same_game():
    actions = [{"left": RIGHT, "right": LEFT}, {"left": DOWN, "right": UP}]
    def run():
        env = MarkovSoccer(SoccerConfig(draw_prob=0.1))
        env.reset(seed=33)
        trace = [dict(env.pos)]
        for acts in actions:
            if env.finished:
                break
            env.step(acts)
            trace.append((dict(env.pos), env.possession, env.result))
        return trace
    assert run() == run()


# -- bots ---------------------------------------------------------------------


def test_straight_bot_always_moves_right():
    env = fresh()
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert bot_action("straight", env, rng) == RIGHT
        env.step({"left": RIGHT, "right": STAND})
        if env.finished:
            break


def test_stand_bot_stands_every_tick():
    bot = Bot("stand")
    env = fresh(start_left=bot.start, initial_possession="right")
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert bot.action(env, rng) == STAND
        env.step({"left": STAND, "right": STAND})


def test_oscillate0_bounces_between_goal_adjacent_cells():
    env = fresh(start_left=(1, 0), initial_possession="right", start_right=(1, 3))
    rng = np.random.default_rng(0)
    assert bot_action("oscillate0", env, rng) == DOWN   # top blocking cell
    env.pos["left"] = (2, 0)
    assert bot_action("oscillate0", env, rng) == UP     # bottom blocking cell


def test_oscillate1_works_in_column_one():
    env = fresh(start_left=(1, 1), initial_possession="right", start_right=(1, 3))
    rng = np.random.default_rng(0)
    assert bot_action("oscillate1", env, rng) == DOWN
    env.pos["left"] = (2, 1)
    assert bot_action("oscillate1", env, rng) == UP


def test_rule_based_bot_advances_with_ball_and_blocks_without():
    env = fresh(start_left=(1, 1), start_right=(3, 3), initial_possession="left")
    rng = np.random.default_rng(0)
    assert bot_action("rule_based", env, rng) == RIGHT
    env.possession = "right"
    act = bot_action("rule_based", env, rng)
    assert act in (UP, DOWN, LEFT, RIGHT)  # heads toward the blocking cell
    env.pos["left"] = (2, 2)  # the blocking cell for opponent at (3, 3): row clipped
    assert bot_action("rule_based", env, rng) == STAND


def test_rule_based_sidesteps_a_blocker():
    env = fresh(start_left=(1, 1), start_right=(1, 2), initial_possession="left")
    rng = np.random.default_rng(0)
    assert bot_action("rule_based", env, rng) == DOWN


def test_bot_roles_fix_initial_possession():
    assert Bot("straight").role == "offense"
    assert Bot("oscillate0").role == "defense"
    assert Bot("rule_based").role == "mixed"
    cfg = bot_match_config(Bot("straight"))
    assert cfg.initial_possession == "left"
    cfg = bot_match_config(Bot("stand"))
    assert cfg.initial_possession == "right"
    assert cfg.start_left == (1, 0)
    with pytest.raises(ConfigError):
        Bot("psychic")


def test_random_bot_uses_all_actions():
    env = fresh()
    rng = np.random.default_rng(0)
    seen = {bot_action("random", env, rng) for _ in range(200)}
    assert seen == {0, 1, 2, 3, 4}


def test_render_marks_the_ball_carrier():
    env = fresh(initial_possession="left")
    board = env.render()
    assert "L*" in board and "R*" not in board
    env.possession = "right"
    board = env.render()
    assert "R*" in board and "L*" not in board
