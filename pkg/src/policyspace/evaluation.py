"""Evaluation protocols: niche specialization, ablation adaptation sweeps,
scripted-bot gauntlets, and generator-vs-generator round robins.

Scores between policy families follow a two-pass selection: first pick the
opponent-side latent that does best against the *whole* family of the other
generator, then pick the reply latent that best exploits that fixed choice,
and only then play the scored series. Soccer series are reported as
wins - losses over the configured number of games.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .envs import Bot, MarkovSoccer, SoccerConfig, bot_match_config, build_ablation, make_env
from .envs.farmworld import Farmworld
from .errors import ConfigError
from .generator import PolicyGenerator, sample_latent, sample_latents
from .latent_search import SearchConfig, episode_score_fn, optimize_latents


def specialization(record: dict) -> float:
    """1 minus the normalized binary entropy of an agent's attack mix.

    `record` carries `chicken_attacks` and `tower_attacks`; an agent that
    never attacked either resource scores 0 (no evidence of a niche).
    """
    chicken = record["chicken_attacks"]
    tower = record["tower_attacks"]
    if chicken < 0 or tower < 0:
        raise ConfigError("attack counts must be non-negative")
    total = chicken + tower
    if total == 0:
        return 0.0
    p = tower / total
    if p == 0.0 or p == 1.0:
        return 1.0
    entropy = -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
    return float(1.0 - entropy)


# -- soccer matches ------------------------------------------------------------


class LatentPolicy:
    """A generator frozen at one latent, acting from side-invariant observations."""

    def __init__(self, gen: PolicyGenerator, latent: np.ndarray):
        self.gen = gen
        self.latent = np.asarray(latent, dtype=np.float64)

    def act(self, env: MarkovSoccer, side: str, rng: np.random.Generator) -> int:
        obs = env.observe(side)
        probs = self.gen.probs_np(obs[None], self.latent[None])[0]
        return int(np.searchsorted(np.cumsum(probs), rng.random() * probs.sum()))


class BotPolicy:
    def __init__(self, bot: Bot):
        self.bot = bot

    def act(self, env: MarkovSoccer, side: str, rng: np.random.Generator) -> int:
        if side != "left":
            raise ConfigError("scripted bots always play the left side")
        return self.bot.action(env, rng)


class RandomPolicy:
    def act(self, env: MarkovSoccer, side: str, rng: np.random.Generator) -> int:
        return int(rng.integers(env.num_actions))


@dataclass
class MatchScore:
    wins: int = 0
    losses: int = 0
    draws: int = 0

    @property
    def games(self) -> int:
        return self.wins + self.losses + self.draws

    @property
    def score(self) -> int:
        return self.wins - self.losses


def play_game(config: SoccerConfig, left, right, seed: int,
              rng: np.random.Generator) -> str:
    """One game; returns "left", "right", or "draw"."""
    env = MarkovSoccer(config)
    env.reset(seed)
    while not env.finished:
        actions = {"left": left.act(env, "left", rng),
                   "right": right.act(env, "right", rng)}
        env.step(actions)
    return env.result if env.result is not None else "draw"


def play_series(config: SoccerConfig, left, right, games: int,
                rng: np.random.Generator, perspective: str = "right") -> MatchScore:
    """A series of games scored from `perspective`'s side."""
    other = "left" if perspective == "right" else "right"
    score = MatchScore()
    for _ in range(games):
        result = play_game(config, left, right, int(rng.integers(2 ** 62)), rng)
        if result == perspective:
            score.wins += 1
        elif result == other:
            score.losses += 1
        else:
            score.draws += 1
    return score


# -- bot gauntlet ---------------------------------------------------------------


def select_latent_vs_bot(gen: PolicyGenerator, bot: Bot, search: SearchConfig,
                         rng: np.random.Generator,
                         base: SoccerConfig | None = None) -> tuple[np.ndarray, float]:
    """Latent-search the family for its best answer to one scripted bot."""
    config = bot_match_config(bot, base)

    def score(z: np.ndarray) -> float:
        total = 0.0
        for _ in range(search.episodes_per_latent):
            result = play_game(config, BotPolicy(bot), LatentPolicy(gen, z),
                               int(rng.integers(2 ** 62)), rng)
            total += 1.0 if result == "right" else (-1.0 if result == "left" else 0.0)
        return total / search.episodes_per_latent

    result = optimize_latents(score, rng, search, latent_dim=gen.latent_dim)
    return result.best_latent, result.best_score


def bot_gauntlet(gen: PolicyGenerator, bots: list[Bot], games: int = 1000,
                 search: SearchConfig | None = None,
                 rng: np.random.Generator | None = None,
                 base: SoccerConfig | None = None) -> dict:
    """Per-bot wins-losses of the searched family member over `games` games."""
    rng = rng or np.random.default_rng(0)
    search = search or SearchConfig(generations=10, episodes_per_latent=10)
    results = {}
    for bot in bots:
        latent, _ = select_latent_vs_bot(gen, bot, search, rng, base)
        config = bot_match_config(bot, base)
        series = play_series(config, BotPolicy(bot), LatentPolicy(gen, latent),
                             games, rng, perspective="right")
        results[bot.kind] = {"score": series, "latent": latent}
    return results


# -- round robin -------------------------------------------------------------------


def round_robin_pair(gen_one: PolicyGenerator, gen_two: PolicyGenerator,
                     search: SearchConfig, rng: np.random.Generator,
                     games: int = 1000, family_panel: int = 32,
                     config: SoccerConfig | None = None) -> tuple[MatchScore, dict]:
    """Score gen_one against gen_two (wins - losses for gen_one).

    gen_one plays left. Pass 1 selects gen_two's latent against a fixed
    panel of gen_one's family with common game seeds across candidates;
    pass 2 selects gen_one's best response to that fixed opponent.
    """
    config = config or SoccerConfig()
    panel = sample_latents(rng, family_panel, gen_one.latent_dim)
    panel_seeds = rng.integers(2 ** 62, size=search.episodes_per_latent)
    panel_order = rng.integers(len(panel), size=search.episodes_per_latent)

    def score_two(z: np.ndarray) -> float:
        total = 0.0
        for k in range(search.episodes_per_latent):
            opponent = LatentPolicy(gen_one, panel[panel_order[k]])
            game_rng = np.random.default_rng(int(panel_seeds[k]))
            result = play_game(config, opponent, LatentPolicy(gen_two, z),
                               int(panel_seeds[k]), game_rng)
            total += 1.0 if result == "right" else (-1.0 if result == "left" else 0.0)
        return total / search.episodes_per_latent

    pass_one = optimize_latents(score_two, rng, search, latent_dim=gen_two.latent_dim)
    z_two = pass_one.best_latent
    fixed_opponent = LatentPolicy(gen_two, z_two)

    reply_seeds = rng.integers(2 ** 62, size=search.episodes_per_latent)

    def score_one(z: np.ndarray) -> float:
        total = 0.0
        for k in range(search.episodes_per_latent):
            game_rng = np.random.default_rng(int(reply_seeds[k]))
            result = play_game(config, LatentPolicy(gen_one, z), fixed_opponent,
                               int(reply_seeds[k]), game_rng)
            total += 1.0 if result == "left" else (-1.0 if result == "right" else 0.0)
        return total / search.episodes_per_latent

    pass_two = optimize_latents(score_one, rng, search, latent_dim=gen_one.latent_dim)
    z_one = pass_two.best_latent

    series = play_series(config, LatentPolicy(gen_one, z_one), fixed_opponent,
                         games, rng, perspective="left")
    return series, {"latent_one": z_one, "latent_two": z_two}


def round_robin_matrix(generators: dict, search: SearchConfig,
                       rng: np.random.Generator, games: int = 1000,
                       config: SoccerConfig | None = None) -> tuple[list, np.ndarray]:
    """All-pairs tournament; each unordered pair is played once, so the
    returned wins-losses matrix is antisymmetric by construction."""
    names = list(generators)
    matrix = np.zeros((len(names), len(names)))
    for i, a in enumerate(names):
        for j, b in enumerate(names):
            if j <= i:
                continue
            series, _ = round_robin_pair(generators[a], generators[b], search,
                                         rng, games=games, config=config)
            matrix[i, j] = series.score
            matrix[j, i] = -series.score
    return names, matrix


# -- farmworld protocols -------------------------------------------------------------


def evaluate_final_health(gen: PolicyGenerator, env_factory, latent: np.ndarray,
                          episodes: int, rng: np.random.Generator) -> float:
    """Mean final agent health over episodes, every agent running `latent`."""
    finals = []
    for _ in range(episodes):
        env = env_factory()
        obs = env.reset(int(rng.integers(2 ** 62)))
        while not env.finished:
            agents = env.living_agents()
            obs_mat = np.asarray([obs[a] for a in agents])
            z_mat = np.repeat(latent[None], len(agents), axis=0)
            actions, _, _ = gen.act(obs_mat, z_mat, rng)
            obs, _, _ = env.step({a: int(x) for a, x in zip(agents, actions)})
        finals.append(env.mean_final_health())
    return float(np.mean(finals))


def ablation_sweep(gen: PolicyGenerator, ablations: list[str],
                   search: SearchConfig, rng: np.random.Generator,
                   eval_episodes: int = 5) -> list[dict]:
    """Latent-search each ablated environment, then report post-search health."""
    rows = []
    for name in ablations:
        cfg = build_ablation(name)
        factory = lambda c=cfg: Farmworld(c)
        score = episode_score_fn(gen, factory, search.episodes_per_latent, rng)
        result = optimize_latents(score, rng, search, latent_dim=gen.latent_dim)
        health = evaluate_final_health(gen, factory, result.best_latent,
                                       eval_episodes, rng)
        rows.append({
            "ablation": name,
            "post_search_health": health,
            "initial_health": cfg.agent_start_health,
            "best_latent": result.best_latent,
            "search_score": result.best_score,
        })
    return rows


def specialization_episode(gen: PolicyGenerator, env: Farmworld,
                           rng: np.random.Generator) -> tuple[list[float], list[float], int]:
    """One episode with per-agent latents; returns per-agent specialization,
    per-agent episode returns, and the blunder total."""
    obs = env.reset(int(rng.integers(2 ** 62)))
    latents = {a: sample_latent(rng, gen.latent_dim) for a in sorted(obs)}
    returns = {a: 0.0 for a in obs}
    while not env.finished:
        agents = env.living_agents()
        obs_mat = np.asarray([obs[a] for a in agents])
        z_mat = np.asarray([latents[a] for a in agents])
        actions, _, _ = gen.act(obs_mat, z_mat, rng)
        obs, rewards, _ = env.step({a: int(x) for a, x in zip(agents, actions)})
        for a, r in rewards.items():
            returns[a] += r
    records = env.specialization_counts()
    specs = [specialization(records[a]) for a in sorted(records)]
    rets = [returns[a] for a in sorted(returns)]
    blunders = sum(records[a]["blunders"] for a in records)
    return specs, rets, blunders


def specialization_eval(gen: PolicyGenerator, env_factory, episodes: int,
                        rng: np.random.Generator) -> dict:
    """Mean per-agent specialization and mean episode reward over episodes."""
    all_specs, all_returns, blunders = [], [], 0
    for _ in range(episodes):
        specs, rets, b = specialization_episode(gen, env_factory(), rng)
        all_specs.extend(specs)
        all_returns.extend(rets)
        blunders += b
    return {
        "mean_specialization": float(np.mean(all_specs)),
        "mean_episode_reward": float(np.mean(all_returns)),
        "blunders": blunders,
    }


# -- results files ---------------------------------------------------------------


def write_results_csv(path, rows: list[dict]):
    """One row per (method, seed, metric, value)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "seed", "metric", "value"])
        for row in rows:
            writer.writerow([row["method"], row["seed"], row["metric"], repr(row["value"])])


def read_results_csv(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append({"method": rec["method"], "seed": int(rec["seed"]),
                         "metric": rec["metric"], "value": float(rec["value"])})
    return rows
