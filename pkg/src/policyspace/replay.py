"""Episode replay logs: JSON-lines, one header then one record per agent-step.

Header: {"env": name, "seed": seed, "config_hash": hex, "config": {...}}
Step:   {"tick": t, "agent_id": a, "action": n, "reward": r, "done": bool}

Replaying a log rebuilds the environment from (config, seed), feeds the
logged actions back in, and must reproduce the logged rewards bit-exactly.
"""

from __future__ import annotations

import hashlib
import json

from .errors import ConfigError, IntegrityError


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


class ReplayWriter:
    """Accumulates one episode's records; write them with ``save``."""

    def __init__(self, env):
        self.header = {
            "env": env.name,
            "seed": env.seed,
            "config_hash": config_hash(env.config_dict()),
            "config": env.config_dict(),
        }
        self.records = []

    def record(self, tick: int, agent_id: str, action: int, reward: float, done: bool):
        self.records.append({
            "tick": int(tick),
            "agent_id": str(agent_id),
            "action": int(action),
            "reward": float(reward),
            "done": bool(done),
        })

    def record_step(self, tick: int, actions: dict, rewards: dict, dones: dict):
        for agent_id in sorted(actions):
            self.record(tick, agent_id, actions[agent_id], rewards[agent_id], dones[agent_id])

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(json.dumps(self.header) + "\n")
            for rec in self.records:
                fh.write(json.dumps(rec) + "\n")


def read_replay(path) -> tuple[dict, list[dict]]:
    """Parse a replay log; corrupt lines abort with their line number."""
    header = None
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IntegrityError(f"corrupt replay line {lineno}: {exc}") from exc
            if header is None:
                if "env" not in obj or "seed" not in obj:
                    raise IntegrityError(f"corrupt replay line {lineno}: missing header fields")
                header = obj
            else:
                missing = {"tick", "agent_id", "action", "reward", "done"} - set(obj)
                if missing:
                    raise IntegrityError(f"corrupt replay line {lineno}: missing {sorted(missing)}")
                records.append(obj)
    if header is None and records:
        raise IntegrityError("replay log has records but no header")
    return header or {}, records


def group_by_tick(records: list[dict]) -> list[tuple[int, dict]]:
    ticks: dict[int, dict] = {}
    for rec in records:
        ticks.setdefault(rec["tick"], {})[rec["agent_id"]] = rec
    return sorted(ticks.items())


def replay_episode(env, header: dict, records: list[dict], on_tick=None) -> int:
    """Drive `env` through a logged episode, checking rewards bit-exactly.

    `on_tick(env, tick)` is called after each step (rendering hook).
    Returns the number of ticks replayed.
    """
    if header.get("env") != env.name:
        raise ConfigError(f"log is for env {header.get('env')!r}, not {env.name!r}")
    env.reset(header["seed"])
    count = 0
    for tick, agent_records in group_by_tick(records):
        actions = {a: rec["action"] for a, rec in agent_records.items()}
        _, rewards, _ = env.step(actions)
        for agent_id, rec in agent_records.items():
            if rewards[agent_id] != rec["reward"]:
                raise IntegrityError(
                    f"replay diverged at tick {tick}, agent {agent_id}: "
                    f"recomputed reward {rewards[agent_id]!r} != logged {rec['reward']!r}")
        count += 1
        if on_tick is not None:
            on_tick(env, tick)
    return count
