"""Adaptation by searching the latent sphere with frozen generator weights.

A generation-based stochastic search: the first three quarters of the
generations explore (fresh uniform latents or mutations of a top-10
member, 50/50), the rest exploit (re-score a top-10 member into its
running mean, or prune the weakest of the top 10 and re-score it from
scratch, 50/50). Every generation evaluates exactly one candidate by its
mean return over a fixed number of episodes, so the episode budget is
generations * episodes_per_latent. Scoring never touches the generator's
parameters.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .generator import sample_latent

TRACE_ACTIONS = ("sample", "mutate", "replicate", "prune")


def mutate(z: np.ndarray, rng: np.random.Generator, scale: float = 0.1) -> np.ndarray:
    """Perturb each coordinate by Unif[-scale, scale], renormalized to the sphere."""
    while True:
        moved = z + rng.uniform(-scale, scale, size=z.shape)
        norm = np.linalg.norm(moved)
        if norm > 1e-12:
            return moved / norm


@dataclass
class SearchConfig:
    generations: int = 100
    episodes_per_latent: int = 1
    top_k: int = 10
    explore_fraction: float = 0.75
    mutation_scale: float = 0.1
    max_best: int = 100

    def validate(self):
        if self.generations < 1:
            raise ConfigError("need at least one generation")
        if self.episodes_per_latent < 1:
            raise ConfigError("need at least one episode per latent")


@dataclass
class Candidate:
    latent: np.ndarray
    score: float
    evals: int
    order: int


@dataclass
class SearchResult:
    best_latent: np.ndarray
    best_score: float
    best: list[Candidate]
    trace: list[dict] = field(repr=False)
    evaluations: int = 0


def optimize_latents(score_fn, rng: np.random.Generator,
                     config: SearchConfig | None = None, latent_dim: int = 3) -> SearchResult:
    """Run the search; `score_fn(z) -> float` already averages its episodes.

    Returns the best latent found, the (descending) candidate list, and a
    trace row per evaluation.
    """
    cfg = config or SearchConfig()
    cfg.validate()
    best: list[Candidate] = []
    trace: list[dict] = []
    order = 0

    def resort():
        best.sort(key=lambda c: (-c.score, c.order))
        del best[cfg.max_best:]

    def top_index() -> int:
        return int(rng.integers(min(cfg.top_k, len(best))))

    for generation in range(1, cfg.generations + 1):
        r = rng.random()
        exploring = (generation <= cfg.explore_fraction * cfg.generations
                     or len(best) <= cfg.top_k)
        if exploring:
            if r <= 0.5 or len(best) <= cfg.top_k:
                action = "sample"
                z = sample_latent(rng, latent_dim)
            else:
                action = "mutate"
                z = mutate(best[top_index()].latent, rng, cfg.mutation_scale)
            score = float(score_fn(z))
            best.append(Candidate(z, score, 1, order))
            order += 1
        elif r <= 0.5:
            action = "replicate"
            member = best[top_index()]
            z = member.latent
            score = float(score_fn(z))
            member.score = (member.score * member.evals + score) / (member.evals + 1)
            member.evals += 1
        else:
            action = "prune"
            stale = best.pop(min(cfg.top_k, len(best)) - 1)
            z = stale.latent
            score = float(score_fn(z))
            best.append(Candidate(z, score, 1, order))
            order += 1
        resort()
        trace.append({
            "generation": generation,
            "latent": [float(v) for v in z],
            "score": score,
            "action": action,
            "best_score": best[0].score,
        })

    return SearchResult(best_latent=best[0].latent.copy(), best_score=best[0].score,
                        best=best, trace=trace, evaluations=cfg.generations)


def episode_score_fn(gen, env_factory, episodes_per_latent: int, rng: np.random.Generator):
    """Score a latent by mean per-agent episode return, all agents sharing it."""

    def score(z: np.ndarray) -> float:
        returns = []
        for _ in range(episodes_per_latent):
            env = env_factory()
            obs = env.reset(int(rng.integers(2 ** 62)))
            totals = {a: 0.0 for a in obs}
            while not env.finished:
                agents = env.living_agents()
                obs_mat = np.asarray([obs[a] for a in agents])
                z_mat = np.repeat(z[None], len(agents), axis=0)
                actions, _, _ = gen.act(obs_mat, z_mat, rng)
                obs, rewards, _ = env.step({a: int(x) for a, x in zip(agents, actions)})
                for a, r in rewards.items():
                    totals[a] += r
            returns.extend(totals.values())
        return float(np.mean(returns))

    return score


def save_trace(path, trace: list[dict]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["generation", "z0", "z1", "z2", "score", "action"])
        for row in trace:
            writer.writerow([row["generation"], *[repr(v) for v in row["latent"]],
                             repr(row["score"]), row["action"]])


def load_trace(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append({
                "generation": int(rec["generation"]),
                "latent": [float(rec["z0"]), float(rec["z1"]), float(rec["z2"])],
                "score": float(rec["score"]),
                "action": rec["action"],
            })
    return rows
