"""Two-player gridworld soccer with simultaneous moves and possession stealing.

A 4x5 pitch; the goal mouths are the two middle rows just off the left and
right edges. The left player scores by carrying the ball off the right edge
through a goal cell, and vice versa. Both actions are submitted together,
executed in a uniformly random order; a mover stepping into the opponent's
cell stays put and possession switches. Every tick independently ends the
game in a draw with a small probability, which keeps games short.

Observations are side-invariant: both players see a board on which they
attack to the right (coordinates are mirrored for the right player), as
one-hot positions for self and opponent plus a possession flag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from .base import Environment

# actions: up, down, left, right, stand
ACTION_NAMES = ("up", "down", "left", "right", "stand")
DELTAS = {0: (-1, 0), 1: (1, 0), 2: (0, -1), 3: (0, 1), 4: (0, 0)}
STAND = 4


@dataclass
class SoccerConfig:
    rows: int = 4
    cols: int = 5
    draw_prob: float = 0.02
    max_episode_timesteps: int = 500
    start_left: tuple = (1, 1)
    start_right: tuple = (1, 3)
    initial_possession: str = "random"   # "left" | "right" | "random"

    def validate(self):
        if self.rows < 2 or self.cols < 2:
            raise ConfigError("soccer needs at least a 2x2 pitch")
        if not 0.0 <= self.draw_prob <= 1.0:
            raise ConfigError("draw_prob must be a probability")
        if self.initial_possession not in ("left", "right", "random"):
            raise ConfigError(f"bad initial_possession {self.initial_possession!r}")
        if tuple(self.start_left) == tuple(self.start_right):
            raise ConfigError("players cannot share a starting cell")

    def to_dict(self) -> dict:
        return {
            "name": "soccer",
            "rows": self.rows, "cols": self.cols,
            "draw_prob": self.draw_prob,
            "max_episode_timesteps": self.max_episode_timesteps,
            "start_left": list(self.start_left),
            "start_right": list(self.start_right),
            "initial_possession": self.initial_possession,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SoccerConfig":
        d = {k: v for k, v in d.items() if k != "name"}
        d["start_left"] = tuple(d.get("start_left", (1, 1)))
        d["start_right"] = tuple(d.get("start_right", (1, 3)))
        return cls(**d)


class MarkovSoccer(Environment):
    name = "soccer"
    num_actions = 5
    agent_ids = ("left", "right")

    def __init__(self, config: SoccerConfig | None = None):
        super().__init__()
        self.config = config or SoccerConfig()
        self.config.validate()
        self.max_episode_timesteps = self.config.max_episode_timesteps
        self.observation_size = 2 * self.config.rows * self.config.cols + 1

    def config_dict(self) -> dict:
        return self.config.to_dict()

    @property
    def goal_rows(self) -> tuple:
        mid = self.config.rows // 2
        return (mid - 1, mid)

    def living_agents(self) -> list[str]:
        return [] if self._finished else ["left", "right"]

    def _do_reset(self) -> dict:
        self.pos = {"left": tuple(self.config.start_left),
                    "right": tuple(self.config.start_right)}
        if self.config.initial_possession == "random":
            self.possession = "left" if self.rng.random() < 0.5 else "right"
        else:
            self.possession = self.config.initial_possession
        self.result = None       # None while ongoing, else "left" | "right" | "draw"
        self.last_order = None
        return {side: self.observe(side) for side in ("left", "right")}

    # -- observations ----------------------------------------------------------

    def _mirror(self, cell: tuple) -> tuple:
        return (cell[0], self.config.cols - 1 - cell[1])

    def observe(self, side: str) -> np.ndarray:
        """Board as seen by `side`, always attacking to the right."""
        own, opp = self.pos[side], self.pos["right" if side == "left" else "left"]
        if side == "right":
            own, opp = self._mirror(own), self._mirror(opp)
        n = self.config.rows * self.config.cols
        obs = np.zeros(2 * n + 1)
        obs[own[0] * self.config.cols + own[1]] = 1.0
        obs[n + opp[0] * self.config.cols + opp[1]] = 1.0
        obs[2 * n] = 1.0 if self.possession == side else 0.0
        return obs

    # -- dynamics ------------------------------------------------------------------

    def _try_move(self, side: str, action: int):
        if action == STAND:
            return
        other = "right" if side == "left" else "left"
        r, c = self.pos[side]
        dr, dc = DELTAS[action]
        nr, nc = r + dr, c + dc
        if self.possession == side and nr in self.goal_rows:
            if side == "left" and nc == self.config.cols:
                self.result = "left"
                return
            if side == "right" and nc == -1:
                self.result = "right"
                return
        if not (0 <= nr < self.config.rows and 0 <= nc < self.config.cols):
            return
        if (nr, nc) == self.pos[other]:
            # bump: mover stays, ball changes hands
            self.possession = other if self.possession == side else side
            return
        self.pos[side] = (nr, nc)

    def _do_step(self, actions: dict) -> tuple[dict, dict, dict]:
        if self.rng.random() < self.config.draw_prob:
            self.result = "draw"
        else:
            first = "left" if self.rng.random() < 0.5 else "right"
            second = "right" if first == "left" else "left"
            self.last_order = (first, second)
            self._try_move(first, actions[first])
            if self.result is None:
                self._try_move(second, actions[second])
        if self.result is None and self.tick + 1 >= self.max_episode_timesteps:
            self.result = "draw"

        rewards = {"left": 0.0, "right": 0.0}
        if self.result in ("left", "right"):
            loser = "right" if self.result == "left" else "left"
            rewards[self.result] = 1.0
            rewards[loser] = -1.0
        over = self.result is not None
        obs = {side: self.observe(side) for side in ("left", "right")}
        dones = {"left": over, "right": over}
        return obs, rewards, dones

    def render(self) -> str:
        rows = []
        for r in range(self.config.rows):
            cells = []
            for c in range(self.config.cols):
                mark = ". "
                if self.pos["left"] == (r, c):
                    mark = "L*" if self.possession == "left" else "L "
                elif self.pos["right"] == (r, c):
                    mark = "R*" if self.possession == "right" else "R "
                cells.append(mark)
            edge_l = "|" if r in self.goal_rows else " "
            edge_r = "|" if r in self.goal_rows else " "
            rows.append(f"{edge_l}{''.join(cells)}{edge_r}")
        rows.append(f"tick={self.tick} possession={self.possession} result={self.result}")
        return "\n".join(rows)


# -- scripted opponents ----------------------------------------------------------

BOT_KINDS = ("straight", "oscillate0", "oscillate1", "stand", "rule_based", "random")

BOT_ROLES = {
    "straight": "offense",
    "oscillate0": "defense",
    "oscillate1": "defense",
    "stand": "defense",
    "rule_based": "mixed",
    "random": "mixed",
}

# bots always play the left side; start cells chosen so the scripted motion
# begins in place (the stand bot really does stand every tick)
BOT_STARTS = {
    "straight": (1, 1),
    "oscillate0": (1, 0),
    "oscillate1": (1, 1),
    "stand": (1, 0),
    "rule_based": (1, 1),
    "random": (1, 1),
}

UP, DOWN, LEFT, RIGHT = 0, 1, 2, 3


@dataclass(frozen=True)
class Bot:
    kind: str

    def __post_init__(self):
        if self.kind not in BOT_KINDS:
            raise ConfigError(f"unknown bot {self.kind!r}")

    @property
    def role(self) -> str:
        return BOT_ROLES[self.kind]

    @property
    def start(self) -> tuple:
        return BOT_STARTS[self.kind]

    def initial_possession(self, rng: np.random.Generator) -> str:
        if self.role == "offense":
            return "left"       # bot starts with the ball
        if self.role == "defense":
            return "right"      # the learned policy starts with the ball
        return "left" if rng.random() < 0.5 else "right"

    def action(self, env: MarkovSoccer, rng: np.random.Generator) -> int:
        return bot_action(self.kind, env, rng)


def _toward(src: tuple, dst: tuple) -> int:
    """Deterministic approach: close the row gap first, then the column gap."""
    if src[0] < dst[0]:
        return DOWN
    if src[0] > dst[0]:
        return UP
    if src[1] > dst[1]:
        return LEFT
    if src[1] < dst[1]:
        return RIGHT
    return STAND


def bot_action(kind: str, env: MarkovSoccer, rng: np.random.Generator) -> int:
    """Scripted policies for the left side."""
    me = env.pos["left"]
    opp = env.pos["right"]
    top, bottom = env.goal_rows

    if kind == "straight":
        return RIGHT
    if kind == "random":
        return int(rng.integers(5))
    if kind in ("oscillate0", "oscillate1"):
        col = 0 if kind == "oscillate0" else 1
        if me == (top, col):
            return DOWN
        if me == (bottom, col):
            return UP
        return _toward(me, (top, col))
    if kind == "stand":
        return STAND
    # rule_based heuristic: with the ball run right, sidestepping a blocker;
    # without it, park between the opponent and our goal
    if env.possession == "left":
        if opp == (me[0], me[1] + 1):
            return DOWN if me[0] <= top else UP
        return RIGHT
    block = (min(max(opp[0], top), bottom), max(opp[1] - 1, 0))
    if me == block:
        return STAND
    return _toward(me, block)


def bot_match_config(bot: Bot, base: SoccerConfig | None = None) -> SoccerConfig:
    """Environment setup for a bot game: bot on the left, learned policy right."""
    cfg = base or SoccerConfig()
    possession = {"offense": "left", "defense": "right", "mixed": "random"}[bot.role]
    start_right = cfg.start_right
    if tuple(bot.start) == tuple(start_right):
        start_right = (2, 3)
    out = SoccerConfig(rows=cfg.rows, cols=cfg.cols, draw_prob=cfg.draw_prob,
                       max_episode_timesteps=cfg.max_episode_timesteps,
                       start_left=bot.start, start_right=start_right,
                       initial_possession=possession)
    out.validate()
    return out
