"""On-policy training of the policy generator.

Each iteration collects a fixed budget of *agent steps* from parallel
environment instances (every agent episode gets a latent sampled once and
held fixed), computes GAE advantages, then runs several epochs of
minibatch updates maximizing

    clipped surrogate - c_v * value loss + c_e * entropy - alpha * diversity

with Adam and global-norm gradient clipping. With ``alpha = 0`` this is
plain PPO; the ``vanilla`` method is exactly that. The ``diayn_star``
baseline instead shapes rewards with the batch-centered error of a
discriminator that regresses each state's episode latent.

A numeric fault anywhere in the update phase rolls the weights and
optimizer back to the start of the iteration, so no partial update is
ever committed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor, constant
from .diversity import DiversityConfig, estimate_for_generator
from .errors import ConfigError, NumericError
from .generator import PolicyGenerator, sample_latent, sample_latents
from .nets import DenseNet
from .optim import SGD, Adam, clip_grad_norm

METHODS = ("adap", "vanilla", "diayn_star")


@dataclass
class TrainerConfig:
    batch_size: int = 4000          # in agent steps, not environment steps
    minibatch_size: int = 400
    sgd_iters: int = 10
    clip_epsilon: float = 0.2
    entropy_coef: float = 0.05
    value_coef: float = 0.5
    discount: float = 0.99
    gae_lambda: float = 1.0
    learning_rate: float = 3e-4
    grad_clip: float = 0.5
    optimizer: str = "adam"
    method: str = "adap"
    diversity: DiversityConfig = field(default_factory=DiversityConfig)
    resample_diversity_each_epoch: bool = False
    normalize_advantages: bool = True
    num_envs: int = 8
    intrinsic_coef: float = 0.05       # diayn_star reward scale
    discriminator_epochs: int = 3

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.batch_size < 1 or self.minibatch_size < 1 or self.sgd_iters < 1:
            raise ConfigError("batch_size, minibatch_size and sgd_iters must be positive")
        if not 0.0 < self.clip_epsilon < 1.0:
            raise ConfigError("clip_epsilon must be in (0, 1)")
        self.diversity.validate()

    @property
    def alpha(self) -> float:
        return 0.0 if self.method == "vanilla" else self.diversity.coef


@dataclass
class Trajectory:
    """One agent episode (or the truncated head of one)."""
    latent: np.ndarray
    obs: np.ndarray           # (T, obs_size)
    actions: np.ndarray       # (T,)
    log_probs: np.ndarray     # (T,) under the weights that generated them
    rewards: np.ndarray       # (T,)
    values: np.ndarray        # (T,)
    terminal: bool            # True if the episode actually ended
    bootstrap: float = 0.0    # value estimate past the last step (0 at terminal)

    def __len__(self):
        return len(self.actions)

    @property
    def episode_return(self) -> float:
        return float(self.rewards.sum())


def compute_gae(rewards: np.ndarray, values: np.ndarray, bootstrap: float,
                discount: float, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Generalized advantage estimates and value targets for one trajectory."""
    T = len(rewards)
    adv = np.zeros(T)
    next_value = bootstrap
    running = 0.0
    for t in range(T - 1, -1, -1):
        delta = rewards[t] + discount * next_value - values[t]
        running = delta + discount * lam * running
        adv[t] = running
        next_value = values[t]
    return adv, adv + values


@dataclass
class RolloutBatch:
    obs: np.ndarray
    latents: np.ndarray
    actions: np.ndarray
    log_probs_old: np.ndarray
    advantages: np.ndarray
    value_targets: np.ndarray
    rewards: np.ndarray

    def __len__(self):
        return len(self.actions)


def assemble_batch(trajectories: list[Trajectory], discount: float, lam: float,
                   normalize_advantages: bool) -> RolloutBatch:
    advantages, targets = [], []
    for traj in trajectories:
        adv, tgt = compute_gae(traj.rewards, traj.values, traj.bootstrap, discount, lam)
        advantages.append(adv)
        targets.append(tgt)
    adv = np.concatenate(advantages)
    if normalize_advantages and len(adv) > 1:
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    return RolloutBatch(
        obs=np.concatenate([t.obs for t in trajectories]),
        latents=np.concatenate([np.repeat(t.latent[None], len(t), axis=0)
                                for t in trajectories]),
        actions=np.concatenate([t.actions for t in trajectories]),
        log_probs_old=np.concatenate([t.log_probs for t in trajectories]),
        advantages=adv,
        value_targets=np.concatenate(targets),
        rewards=np.concatenate([t.rewards for t in trajectories]),
    )


class _EpisodeBuffer:
    __slots__ = ("latent", "obs", "actions", "log_probs", "rewards", "values")

    def __init__(self, latent):
        self.latent = latent
        self.obs, self.actions, self.log_probs, self.rewards, self.values = [], [], [], [], []

    def to_trajectory(self, terminal: bool, bootstrap: float = 0.0) -> Trajectory:
        return Trajectory(
            latent=self.latent,
            obs=np.asarray(self.obs), actions=np.asarray(self.actions, dtype=np.int64),
            log_probs=np.asarray(self.log_probs), rewards=np.asarray(self.rewards),
            values=np.asarray(self.values), terminal=terminal, bootstrap=bootstrap)


class RolloutState:
    """Environments plus the episodes currently in flight.

    Persists across training iterations so episodes continue where the
    previous batch cut them off: the batch boundary truncates the recorded
    *segment* (finalized with a bootstrap value), never the episode itself,
    and an agent keeps its episode latent across the boundary.
    """

    def __init__(self, envs: list):
        self.envs = envs
        self.obs: list[dict] = [{} for _ in envs]
        self.latents: list[dict] = [{} for _ in envs]
        self.buffers: list[dict] = [{} for _ in envs]
        self.episode_return: list[dict] = [{} for _ in envs]
        self.started = [False] * len(envs)


def collect_rollouts(gen: PolicyGenerator, state: RolloutState, steps: int,
                     rng: np.random.Generator) -> tuple[list[Trajectory], list[float]]:
    """Advance the in-flight episodes until `steps` agent steps are banked.

    Environments run in lockstep; each episode start draws a fresh seed and
    fresh per-agent latents from `rng`. Returns the trajectory segments plus
    the full returns of every agent episode that ended during this batch.
    """
    envs = state.envs
    segments: list[Trajectory] = []
    finished_returns: list[float] = []

    def start_episode(i):
        obs = envs[i].reset(int(rng.integers(2 ** 62)))
        state.latents[i] = {a: sample_latent(rng, gen.latent_dim) for a in sorted(obs)}
        state.buffers[i] = {a: _EpisodeBuffer(state.latents[i][a]) for a in sorted(obs)}
        state.episode_return[i] = {a: 0.0 for a in obs}
        state.obs[i] = obs
        state.started[i] = True

    for i in range(len(envs)):
        if not state.started[i]:
            start_episode(i)

    collected = 0
    while collected < steps:
        rows_obs, rows_z, owners = [], [], []
        for i, env in enumerate(envs):
            for agent in env.living_agents():
                rows_obs.append(state.obs[i][agent])
                rows_z.append(state.latents[i][agent])
                owners.append((i, agent))
        obs_mat = np.asarray(rows_obs)
        z_mat = np.asarray(rows_z)
        actions, log_probs, values = gen.act(obs_mat, z_mat, rng)

        per_env_actions: list[dict] = [{} for _ in envs]
        for row, (i, agent) in enumerate(owners):
            per_env_actions[i][agent] = int(actions[row])
            buf = state.buffers[i][agent]
            buf.obs.append(rows_obs[row])
            buf.actions.append(int(actions[row]))
            buf.log_probs.append(float(log_probs[row]))
            buf.values.append(float(values[row]))

        for i, env in enumerate(envs):
            obs, rewards, dones = env.step(per_env_actions[i])
            state.obs[i] = obs
            for agent, reward in rewards.items():
                state.buffers[i][agent].rewards.append(float(reward))
                state.episode_return[i][agent] += float(reward)
                collected += 1
                if dones[agent]:
                    segments.append(state.buffers[i][agent].to_trajectory(terminal=True))
                    finished_returns.append(state.episode_return[i][agent])
                    del state.buffers[i][agent]
            if env.finished:
                start_episode(i)

    # the batch boundary truncates open segments; the episodes live on
    leftovers = [(i, agent, buf) for i, bufs in enumerate(state.buffers)
                 for agent, buf in bufs.items() if buf.actions]
    if leftovers:
        obs_mat = np.asarray([state.obs[i][agent] for i, agent, _ in leftovers])
        z_mat = np.asarray([buf.latent for _, _, buf in leftovers])
        tail_values = gen.value_np(obs_mat, z_mat)
        for (i, agent, buf), v in zip(leftovers, tail_values):
            segments.append(buf.to_trajectory(terminal=False, bootstrap=float(v)))
            state.buffers[i][agent] = _EpisodeBuffer(buf.latent)
    return segments, finished_returns


# -- losses ------------------------------------------------------------------


def ppo_objective(gen: PolicyGenerator, obs, latents, actions, log_probs_old,
                  advantages, value_targets, clip_epsilon: float,
                  value_coef: float, entropy_coef: float):
    """The maximized PPO composite: surrogate - c_v * L_V + c_e * entropy.

    Returns (objective Tensor, metrics dict of floats).
    """
    logits = gen.logits(obs, latents)
    log_all = logits.log_softmax(axis=-1)
    log_taken = log_all.gather(actions)
    ratio = (log_taken - constant(log_probs_old)).exp()
    if not np.isfinite(ratio.data).all():
        bad = int(np.flatnonzero(~np.isfinite(ratio.data))[0])
        raise NumericError(f"non-finite policy ratio at batch sample {bad}")
    adv = constant(advantages)
    surrogate = (ratio * adv).minimum(ratio.clip(1.0 - clip_epsilon, 1.0 + clip_epsilon) * adv).mean()
    values = gen.value(obs, latents)
    value_loss = (values - constant(value_targets)).square().mean()
    probs = log_all.exp()
    entropy = -(probs * log_all).sum(axis=-1).mean()
    objective = surrogate - value_coef * value_loss + entropy_coef * entropy
    metrics = {
        "surrogate": float(surrogate.data),
        "value_loss": float(value_loss.data),
        "entropy": float(entropy.data),
    }
    return objective, metrics


# -- latent-regression baseline ------------------------------------------------


class Discriminator:
    """Maps an observation to a predicted episode latent (squared-error regression)."""

    def __init__(self, obs_size: int, latent_dim: int, rng: np.random.Generator,
                 hidden_dim: int = 64, lr: float = 3e-4):
        self.net = DenseNet.create(rng, [obs_size, hidden_dim, hidden_dim, latent_dim],
                                   ["relu", "relu", "identity"])
        self.opt = Adam(self.net.parameters(), lr=lr)

    def predict(self, obs: np.ndarray) -> np.ndarray:
        return self.net.forward_np(obs)

    def regression_loss(self, obs: np.ndarray, latents: np.ndarray) -> Tensor:
        pred = self.net.forward(obs)
        return (pred - constant(latents)).square().sum(axis=-1).mean()

    def train_batch(self, obs: np.ndarray, latents: np.ndarray, epochs: int) -> float:
        last = 0.0
        for _ in range(epochs):
            self.opt.zero_grad()
            loss = self.regression_loss(obs, latents)
            loss.backward()
            self.opt.step()
            last = float(loss.data)
        return last


def centered_intrinsic_errors(squared_errors: np.ndarray, intrinsic_coef: float) -> np.ndarray:
    """Batch-centered intrinsic reward: err_t = -coef * se_t - mean(raw errs)."""
    raw = -intrinsic_coef * squared_errors
    return raw - raw.mean()


def shape_rewards_with_discriminator(trajectories: list[Trajectory], disc: Discriminator,
                                     intrinsic_coef: float) -> np.ndarray:
    """Add centered discriminator error to every reward, in place; returns errs."""
    obs = np.concatenate([t.obs for t in trajectories])
    latents = np.concatenate([np.repeat(t.latent[None], len(t), axis=0) for t in trajectories])
    pred = disc.predict(obs)
    se = ((pred - latents) ** 2).sum(axis=-1)
    errs = centered_intrinsic_errors(se, intrinsic_coef)
    i = 0
    for traj in trajectories:
        traj.rewards = traj.rewards + errs[i:i + len(traj)]
        i += len(traj)
    return errs


# -- the trainer --------------------------------------------------------------


class Trainer:
    """Owns one generator, its optimizer state, and the rollout environments."""

    def __init__(self, gen: PolicyGenerator, env_factory, config: TrainerConfig, seed: int):
        config.validate()
        self.gen = gen
        self.config = config
        self.rng = np.random.default_rng(seed)
        self.rollouts = RolloutState([env_factory() for _ in range(config.num_envs)])
        opt_cls = Adam if config.optimizer == "adam" else SGD
        self.opt = opt_cls(gen.parameters(), lr=config.learning_rate)
        self.iteration = 0
        self.agent_steps = 0
        self.recent_returns: list[float] = []   # last 100 finished episodes
        self.discriminator = None
        if config.method == "diayn_star":
            self.discriminator = Discriminator(gen.obs_size, gen.latent_dim,
                                               np.random.default_rng(seed + 1),
                                               hidden_dim=gen.hidden_dim,
                                               lr=config.learning_rate)

    def _snapshot(self):
        return (self.gen.get_flat(),
                [m.copy() for m in self.opt.state_arrays()], self.opt.t)

    def _restore(self, snap):
        flat, moments, t = snap
        self.gen.set_flat(flat)
        self.opt.load_state(moments, t)

    def train_iteration(self) -> dict:
        cfg = self.config
        start = time.perf_counter()
        trajectories, finished = collect_rollouts(self.gen, self.rollouts,
                                                  cfg.batch_size, self.rng)
        self.recent_returns = (self.recent_returns + finished)[-100:]

        discriminator_loss = 0.0
        if cfg.method == "diayn_star":
            obs = np.concatenate([t.obs for t in trajectories])
            lats = np.concatenate([np.repeat(t.latent[None], len(t), axis=0)
                                   for t in trajectories])
            discriminator_loss = self.discriminator.train_batch(obs, lats,
                                                                cfg.discriminator_epochs)
            shape_rewards_with_discriminator(trajectories, self.discriminator,
                                             cfg.intrinsic_coef)

        batch = assemble_batch(trajectories, cfg.discount, cfg.gae_lambda,
                               cfg.normalize_advantages)
        self.agent_steps += len(batch)

        alpha = cfg.alpha
        div_latents = div_states = None
        if alpha > 0.0:
            div_latents, div_states = self._sample_diversity_inputs(batch)

        snap = self._snapshot()
        try:
            metrics = self._update(batch, alpha, div_latents, div_states)
        except NumericError:
            self._restore(snap)
            raise
        self.iteration += 1
        metrics.update({
            "iteration": self.iteration,
            "agent_steps": self.agent_steps,
            # running mean over the last 100 finished agent episodes; falls
            # back to in-flight partial returns before the first one finishes
            "mean_episode_reward": (float(np.mean(self.recent_returns))
                                    if self.recent_returns
                                    else float(np.mean([t.episode_return for t in trajectories]))),
            "episodes": len(finished),
            "discriminator_loss": discriminator_loss,
            "wall_seconds": time.perf_counter() - start,
        })
        return metrics

    def _sample_diversity_inputs(self, batch: RolloutBatch):
        div = self.config.diversity
        latents = sample_latents(self.rng, div.num_latents, self.gen.latent_dim)
        count = min(div.num_states, len(batch))
        idx = self.rng.choice(len(batch), size=count, replace=False)
        return latents, batch.obs[idx]

    def _update(self, batch: RolloutBatch, alpha: float, div_latents, div_states) -> dict:
        cfg = self.config
        n = len(batch)
        last = {"surrogate": 0.0, "value_loss": 0.0, "entropy": 0.0}
        l_div_value = 0.0
        params = self.gen.parameters()
        for _ in range(cfg.sgd_iters):
            if alpha > 0.0 and cfg.resample_diversity_each_epoch:
                div_latents, div_states = self._sample_diversity_inputs(batch)
            order = self.rng.permutation(n)
            for lo in range(0, n, cfg.minibatch_size):
                idx = order[lo:lo + cfg.minibatch_size]
                objective, parts = ppo_objective(
                    self.gen, batch.obs[idx], batch.latents[idx], batch.actions[idx],
                    batch.log_probs_old[idx], batch.advantages[idx],
                    batch.value_targets[idx], cfg.clip_epsilon, cfg.value_coef,
                    cfg.entropy_coef)
                loss = -objective
                if alpha > 0.0:
                    div = estimate_for_generator(self.gen, div_states, div_latents,
                                                 cfg.diversity.smoothing,
                                                 mode=cfg.diversity.mode)
                    l_div_value = float(div.data)
                    if cfg.diversity.mode == "raw_kl":
                        loss = loss - alpha * div   # maximize plain KL (ablation)
                    else:
                        loss = loss + alpha * div   # minimize exp(-KL)
                self.opt.zero_grad()
                loss.backward()
                clip_grad_norm(params, cfg.grad_clip)
                self.opt.step()
                last = parts
        return {
            "l_div": l_div_value,
            "entropy": last["entropy"],
            "value_loss": last["value_loss"],
            "surrogate": last["surrogate"],
        }
