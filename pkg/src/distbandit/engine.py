"""Round-based execution of the distributed bandit process.

Every replication follows the same loop: each player selects an arm using its
end-of-previous-round view, all rewards are drawn, views and global totals are
updated, and if the round is a communication round every view is merged into
the global history. Replications are vectorized along a leading axis, but the
random numbers are drawn from one stream per (seed, replication, player) --
``Generator(Philox(SeedSequence((seed, replication, player))))``, consuming
exactly one uniform per round in round order -- so a batched run and
``run_once`` of a single replication produce bit-identical trajectories, and
two configs sharing a seed share reward randomness round for round.

Aggregation works on exact integer totals, so it is independent of
replication order and of how replications are batched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import BernoulliArmModel, ExplorationFunction, exploration_value
from .policies import (
    DKLUCB,
    LN2T,
    PlayerView,
    PolicySpec,
    UCB,
    count_prediction_batch,
    klucb_index_batch,
)
from .schedule import CommunicationSchedule

_BLOCK_BYTES = 1 << 27  # uniform prefetch buffer budget (128 MiB)


class InvariantViolation(RuntimeError):
    """A state invariant that must hold on every reachable trace was broken."""


def _default_checkpoints(horizon: int) -> tuple[int, ...]:
    return tuple(2**k for k in range(horizon.bit_length()) if 2**k <= horizon)


@dataclass(frozen=True)
class RunConfig:
    """Everything a Monte Carlo run depends on; hashable and immutable."""

    arm_model: BernoulliArmModel
    players: int
    horizon: int
    schedule: CommunicationSchedule
    policy: PolicySpec
    seed: int
    checkpoints: tuple[int, ...] = ()
    replications: int = 1

    def __post_init__(self) -> None:
        if self.players < 1:
            raise ValueError("players must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        cps = tuple(int(t) for t in self.checkpoints)
        if not cps:
            cps = _default_checkpoints(self.horizon)
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError("checkpoints must be strictly increasing")
        if cps[0] < 1 or cps[-1] > self.horizon:
            raise ValueError("checkpoints must lie in [1, horizon]")
        object.__setattr__(self, "checkpoints", cps)


@dataclass
class WorldState:
    """Mutable per-batch simulation state; axis order is (replication, player, arm)."""

    t: int
    known_count: np.ndarray  # int64 [R, M, K]
    known_sum: np.ndarray  # int64 [R, M, K]
    snapshot_count: np.ndarray  # int64 [R, M, K]
    total_count: np.ndarray  # int64 [R, K]
    total_sum: np.ndarray  # int64 [R, K]
    last_merge: int
    streams: list
    means: np.ndarray  # float64 [K]
    last_actions: np.ndarray | None = None
    _block: np.ndarray | None = field(default=None, repr=False)
    _pos: int = 0


def init_state(cfg: RunConfig, replication_indices) -> WorldState:
    reps = [int(r) for r in replication_indices]
    r_n, m, k = len(reps), cfg.players, cfg.arm_model.k
    streams = [
        np.random.Generator(
            np.random.Philox(np.random.SeedSequence((cfg.seed, rep, p)))
        )
        for rep in reps
        for p in range(m)
    ]
    return WorldState(
        t=0,
        known_count=np.zeros((r_n, m, k), dtype=np.int64),
        known_sum=np.zeros((r_n, m, k), dtype=np.int64),
        snapshot_count=np.zeros((r_n, m, k), dtype=np.int64),
        total_count=np.zeros((r_n, k), dtype=np.int64),
        total_sum=np.zeros((r_n, k), dtype=np.int64),
        last_merge=0,
        streams=streams,
        means=np.asarray(cfg.arm_model.means, dtype=np.float64),
    )


def merge_views(state: WorldState) -> WorldState:
    """Give every player the full global history and refresh the snapshots.

    Idempotent; the caller is responsible for updating last_merge when this
    happens as part of a communication round.
    """
    state.known_count[:] = state.total_count[:, None, :]
    state.known_sum[:] = state.total_sum[:, None, :]
    state.snapshot_count[:] = state.total_count[:, None, :]
    return state


def view_of(state: WorldState, rep_slot: int, player: int) -> PlayerView:
    """Copy one player's view out of the batch (for inspection and tests)."""
    return PlayerView(
        known_count=state.known_count[rep_slot, player].copy(),
        known_sum=state.known_sum[rep_slot, player].copy(),
        snapshot_count=state.snapshot_count[rep_slot, player].copy(),
    )


def _next_uniforms(state: WorldState) -> np.ndarray:
    block = state._block
    if block is None or state._pos == block.shape[2]:
        r_n, m, _ = state.known_count.shape
        length = int(_BLOCK_BYTES // (8 * r_n * m))
        length = max(64, min(4096, length))
        block = np.empty((r_n, m, length))
        i = 0
        for r in range(r_n):
            for p in range(m):
                block[r, p] = state.streams[i].random(length)
                i += 1
        state._block = block
        state._pos = 0
    u = block[:, :, state._pos]
    state._pos += 1
    return u


def _check_claims(state: WorldState, n_prime: np.ndarray, cfg: RunConfig) -> None:
    m, alpha = cfg.players, cfg.policy.alpha
    bound = m / (1.0 + (m - 1) * alpha) * state.known_count
    if np.any(n_prime > bound + 1e-9):
        raise InvariantViolation(
            f"count prediction exceeded its per-player bound at round {state.t + 1}"
        )
    if np.any(n_prime.sum(axis=1) > m * state.total_count + 1e-9):
        raise InvariantViolation(
            f"summed count predictions exceeded M times the global count at round {state.t + 1}"
        )


def _select_batch(state: WorldState, cfg: RunConfig, t: int) -> np.ndarray:
    spec = cfg.policy
    counts = state.known_count
    total_known = (t - 1) + (cfg.players - 1) * state.last_merge
    if spec.rule == DKLUCB:
        f = exploration_value(
            ExplorationFunction.dklucb(cfg.players, spec.alpha), total_known
        )
    elif spec.exploration.variant == LN2T:
        f = exploration_value(spec.exploration, t)
    else:
        f = exploration_value(spec.exploration, total_known)
    counts_f = counts.astype(np.float64)
    mu_hat = state.known_sum / counts_f
    if spec.rule == UCB:
        indices = mu_hat + np.sqrt(f / (2.0 * counts_f))
    elif spec.rule == DKLUCB:
        n_prime = count_prediction_batch(
            counts, state.snapshot_count, cfg.players, spec.alpha
        )
        _check_claims(state, n_prime, cfg)
        indices = klucb_index_batch(mu_hat, f / n_prime)
    else:
        indices = klucb_index_batch(mu_hat, f / counts_f)
    return np.argmax(indices, axis=2)


def step(state: WorldState, cfg: RunConfig) -> WorldState:
    """Advance the batch by one round (in place); see the module docstring."""
    if state.t >= cfg.horizon:
        raise ValueError(f"horizon {cfg.horizon} already reached")
    t = state.t + 1
    r_n, m, k = state.known_count.shape
    if t <= k:
        # some arm is still unsampled, identically across the batch: the
        # unpulled-arm rule forces arm t-1 for every player
        actions = np.full((r_n, m), t - 1, dtype=np.int64)
    else:
        actions = _select_batch(state, cfg, t)
    u = _next_uniforms(state)
    rewards = (u < state.means[actions]).astype(np.int64)
    rr = np.arange(r_n)[:, None]
    pp = np.arange(m)[None, :]
    np.add.at(state.known_count, (rr, pp, actions), 1)
    np.add.at(state.known_sum, (rr, pp, actions), rewards)
    np.add.at(state.total_count, (np.broadcast_to(rr, (r_n, m)), actions), 1)
    np.add.at(state.total_sum, (np.broadcast_to(rr, (r_n, m)), actions), rewards)
    state.last_actions = actions
    if cfg.schedule.is_comm_round(t):
        merge_views(state)
        state.last_merge = t
    state.t = t
    return state


def run_once(cfg: RunConfig, replication_index: int, record_actions: bool = False):
    """Run a single replication; a pure function of (cfg.seed, replication_index).

    Returns the int64 array of global per-arm counts at cfg.checkpoints,
    shape (len(checkpoints), K); with record_actions also the (horizon, M)
    array of selected arms.
    """
    state = init_state(cfg, [replication_index])
    cp_slot = {t: i for i, t in enumerate(cfg.checkpoints)}
    counts_at = np.zeros((len(cfg.checkpoints), cfg.arm_model.k), dtype=np.int64)
    actions = (
        np.zeros((cfg.horizon, cfg.players), dtype=np.int64) if record_actions else None
    )
    for t in range(1, cfg.horizon + 1):
        step(state, cfg)
        if record_actions:
            actions[t - 1] = state.last_actions[0]
        slot = cp_slot.get(t)
        if slot is not None:
            counts_at[slot] = state.total_count[0]
    if record_actions:
        return counts_at, actions
    return counts_at


@dataclass(frozen=True)
class RunAggregate:
    """Monte Carlo summary: per-checkpoint, per-arm count statistics."""

    checkpoints: tuple[int, ...]
    mean_counts: np.ndarray  # float64 [C, K]
    stderr: np.ndarray  # float64 [C, K]
    regret: np.ndarray  # float64 [C]
    replications: int


def _aggregate(counts: np.ndarray, cfg: RunConfig) -> RunAggregate:
    # counts: int64 [C, R, K]; sums are exact, so the aggregate is independent
    # of replication order
    r_n = counts.shape[1]
    totals = counts.sum(axis=1)
    sumsq = (counts * counts).sum(axis=1)
    mean = totals / r_n
    if r_n > 1:
        var = np.maximum(sumsq - r_n * mean * mean, 0.0) / (r_n - 1)
        stderr = np.sqrt(var / r_n)
    else:
        stderr = np.zeros_like(mean)
    gaps = np.asarray(cfg.arm_model.gaps)
    return RunAggregate(
        checkpoints=cfg.checkpoints,
        mean_counts=mean,
        stderr=stderr,
        regret=mean @ gaps,
        replications=r_n,
    )


def run_monte_carlo(cfg: RunConfig) -> RunAggregate:
    """Aggregate cfg.replications independent runs of the configured process."""
    state = init_state(cfg, range(cfg.replications))
    cp_slot = {t: i for i, t in enumerate(cfg.checkpoints)}
    counts = np.zeros(
        (len(cfg.checkpoints), cfg.replications, cfg.arm_model.k), dtype=np.int64
    )
    for t in range(1, cfg.horizon + 1):
        step(state, cfg)
        slot = cp_slot.get(t)
        if slot is not None:
            counts[slot] = state.total_count
    return _aggregate(counts, cfg)


def regret(aggregate: RunAggregate, arm_model: BernoulliArmModel, t: int) -> float:
    """Gap-weighted expected pulls sum(gap_a * mean N_t(a)) at a checkpoint."""
    try:
        slot = aggregate.checkpoints.index(t)
    except ValueError:
        raise KeyError(f"round {t} is not a recorded checkpoint") from None
    return float(aggregate.mean_counts[slot] @ np.asarray(arm_model.gaps))
