"""Per-player arm-selection rules: UCB / KL-UCB index adaptations and the
DKLUCB count-prediction policy.

The index computations come in two equivalent forms: scalar operations on a
PlayerView (the reference semantics) and batched numpy kernels over arrays of
sufficient statistics (what the simulation engine calls). The batched KL
bisections are the only nontrivial numerics; they run a fixed number of
halvings, far below the 1e-9 tolerance the indices are specified at.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import LN2T, STANDARD, ExplorationFunction, exploration_value

UCB = "ucb"
KLUCB = "klucb"
DKLUCB = "dklucb"

_RULES = (UCB, KLUCB, DKLUCB)

_BISECTION_ITERATIONS = 40  # interval 1 -> final width 2**-40, well under 1e-9


@dataclass
class PlayerView:
    """One player's knowledge as per-arm sufficient statistics.

    known_count[a] is the number of rewards from arm a the player has seen
    (its own plus everything received in merges), known_sum[a] their sum, and
    snapshot_count[a] the global count of arm a at the last communication
    round (0 before the first one).
    """

    known_count: np.ndarray
    known_sum: np.ndarray
    snapshot_count: np.ndarray

    def __post_init__(self) -> None:
        self.known_count = np.asarray(self.known_count, dtype=np.int64)
        self.known_sum = np.asarray(self.known_sum, dtype=np.int64)
        self.snapshot_count = np.asarray(self.snapshot_count, dtype=np.int64)
        if not (
            self.known_count.shape == self.known_sum.shape == self.snapshot_count.shape
        ):
            raise ValueError("per-arm statistic arrays must share one shape")

    @property
    def total_known(self) -> int:
        return int(self.known_count.sum())

    def empirical_mean(self, a: int) -> float:
        if self.known_count[a] == 0:
            raise ValueError(f"arm {a} has no samples")
        return float(self.known_sum[a]) / float(self.known_count[a])


@dataclass(frozen=True)
class PolicySpec:
    """Which index rule to run, with its exploration function.

    The dklucb rule scales the standard exploration form by
    M / (1 + (M-1) alpha) internally, so its `exploration` field must be the
    standard variant; pairing dklucb with ln2t is rejected rather than
    silently ignored.
    """

    rule: str
    exploration: ExplorationFunction = field(
        default_factory=ExplorationFunction.standard
    )
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.rule not in _RULES:
            raise ValueError(f"unknown policy rule {self.rule!r}")
        if self.rule == DKLUCB:
            if not 0.0 <= self.alpha <= 1.0:
                raise ValueError(f"dklucb alpha must be in [0, 1], got {self.alpha!r}")
            if self.exploration.variant != STANDARD:
                raise ValueError(
                    "dklucb fixes its own exploration function; pass the standard variant"
                )


# -- batched kernels --------------------------------------------------------


def _bernoulli_entropy_terms(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(p, 1-p) entropy part p ln p + (1-p) ln(1-p) with 0 ln 0 = 0."""
    q = 1.0 - p
    ent = np.zeros_like(p)
    mask = p > 0.0
    ent[mask] += p[mask] * np.log(p[mask])
    mask = q > 0.0
    ent[mask] += q[mask] * np.log(q[mask])
    return ent, q


def klucb_index_batch(mu_hat, budget) -> np.ndarray:
    """Elementwise sup{q in [mu_hat, 1): K(mu_hat, q) <= budget}.

    Returns mu_hat when the budget is 0 and exactly 1.0 when mu_hat is 1.
    """
    p = np.asarray(mu_hat, dtype=np.float64)
    b = np.asarray(budget, dtype=np.float64)
    ent, one_minus_p = _bernoulli_entropy_terms(p)
    lo = p.copy()
    hi = np.ones_like(p)
    for _ in range(_BISECTION_ITERATIONS):
        mid = 0.5 * (lo + hi)
        # mid == 1 only where mu_hat == 1; clip the evaluation point so the
        # log is finite there (the interval update still uses mid itself).
        mid_eval = np.minimum(mid, 1.0 - 1e-16)
        kl = ent - p * np.log(mid_eval) - one_minus_p * np.log1p(-mid_eval)
        feasible = kl <= b
        lo = np.where(feasible, mid, lo)
        hi = np.where(feasible, hi, mid)
    # Near q == mu_hat the divergence evaluation is cancellation-limited, so a
    # zero budget is answered exactly rather than through the loop.
    return np.where(b <= 0.0, p, lo)


def klucb_lower_batch(mu_hat, budget) -> np.ndarray:
    """Elementwise inf{q in (0, mu_hat]: K(mu_hat, q) <= budget}.

    The lower confidence companion of klucb_index_batch; 0 when mu_hat is 0.
    """
    p = np.asarray(mu_hat, dtype=np.float64)
    b = np.asarray(budget, dtype=np.float64)
    ent, one_minus_p = _bernoulli_entropy_terms(p)
    lo = np.zeros_like(p)
    hi = p.copy()
    for _ in range(_BISECTION_ITERATIONS):
        mid = 0.5 * (lo + hi)
        mid_eval = np.clip(mid, 1e-300, 1.0 - 1e-16)
        kl = ent - p * np.log(mid_eval) - one_minus_p * np.log1p(-mid_eval)
        feasible = kl <= b
        hi = np.where(feasible, mid, hi)
        lo = np.where(feasible, lo, mid)
    return np.where(b <= 0.0, p, hi)


def ucb_index_batch(mu_hat, counts, f_value) -> np.ndarray:
    """Elementwise mu_hat + sqrt(f_value / (2 counts))."""
    n = np.asarray(counts, dtype=np.float64)
    return np.asarray(mu_hat, dtype=np.float64) + np.sqrt(f_value / (2.0 * n))


def count_prediction_batch(known_count, snapshot_count, m: int, alpha: float) -> np.ndarray:
    """Elementwise N' = N + (M-1) min(N - N_snapshot, u) with
    u = N_snapshot / M * (1/alpha - 1); alpha = 0 makes u infinite so the
    local increment wins the min."""
    n = np.asarray(known_count, dtype=np.float64)
    snap = np.asarray(snapshot_count, dtype=np.float64)
    local = n - snap
    if alpha <= 0.0:
        extra = local
    else:
        # 1/alpha may round to inf for subnormal alpha; the budget then
        # saturates (min picks the local increment), except that an empty
        # snapshot always means a zero budget, not 0 * inf.
        with np.errstate(over="ignore", invalid="ignore"):
            u = snap / m * (1.0 / alpha - 1.0)
        extra = np.minimum(local, np.where(snap == 0.0, 0.0, u))
    return n + (m - 1) * extra


# -- scalar reference operations --------------------------------------------


def ucb_index(view: PlayerView, a: int, f_value: float) -> float:
    """Mean-plus-bonus index mu_hat(a) + sqrt(f_value / (2 N(a)))."""
    if view.known_count[a] < 1:
        raise ValueError(f"arm {a} has no samples")
    return float(
        ucb_index_batch(view.empirical_mean(a), view.known_count[a], f_value)
    )


def klucb_index(view: PlayerView, a: int, f_value: float, denom: float) -> float:
    """Largest q with K(mu_hat(a), q) <= f_value / denom."""
    if denom < 1:
        raise ValueError(f"denominator must be >= 1, got {denom!r}")
    return float(klucb_index_batch(view.empirical_mean(a), f_value / denom))


def klucb_lower_index(view: PlayerView, a: int, f_value: float, denom: float) -> float:
    """Smallest q with K(mu_hat(a), q) <= f_value / denom."""
    if denom < 1:
        raise ValueError(f"denominator must be >= 1, got {denom!r}")
    return float(klucb_lower_batch(view.empirical_mean(a), f_value / denom))


def count_prediction(view: PlayerView, a: int, m: int, alpha: float) -> float:
    """Predicted global count N'(a) from the player's local statistics."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return float(
        count_prediction_batch(view.known_count[a], view.snapshot_count[a], m, alpha)
    )


def select_arm(
    view: PlayerView, spec: PolicySpec, m: int, round_index: int | None = None
) -> int:
    """Pick the next arm for one player.

    Any arm with zero samples is served first, lowest index winning; otherwise
    the rule's index is computed for every arm and the argmax returned, ties
    broken by lowest arm index. The ln2t exploration variant is evaluated at
    round_index (required then); the other variants use the player's total
    sample count.
    """
    counts = view.known_count
    if counts.size == 0:
        raise ValueError("policy needs at least one arm")
    zero = np.flatnonzero(counts == 0)
    if zero.size:
        return int(zero[0])
    total_known = view.total_known
    if spec.rule == DKLUCB:
        f = exploration_value(ExplorationFunction.dklucb(m, spec.alpha), total_known)
    elif spec.exploration.variant == LN2T:
        if round_index is None:
            raise ValueError("ln2t exploration is evaluated at the round index")
        f = exploration_value(spec.exploration, round_index)
    else:
        f = exploration_value(spec.exploration, total_known)
    mu_hat = view.known_sum / counts
    if spec.rule == UCB:
        indices = ucb_index_batch(mu_hat, counts, f)
    elif spec.rule == KLUCB:
        indices = klucb_index_batch(mu_hat, f / counts)
    else:
        n_prime = count_prediction_batch(counts, view.snapshot_count, m, spec.alpha)
        indices = klucb_index_batch(mu_hat, f / n_prime)
    return int(np.argmax(indices))
