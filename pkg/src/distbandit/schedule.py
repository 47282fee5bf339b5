"""Communication schedules: membership and last-round queries, counting, density.

A schedule describes the set of rounds at whose end every player's reward
history is merged. Grid families are generated lazily by rounding the real
grid points to integers and deduplicating, so the stored object stays small
no matter the horizon.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

NONE = "none"
FULL = "full"
ONESHOT = "oneshot"
LINEAR = "linear"
EXP = "exp"
DOUBLEEXP = "doubleexp"
EXPLICIT = "explicit"

_KINDS = (NONE, FULL, ONESHOT, LINEAR, EXP, DOUBLEEXP, EXPLICIT)


@dataclass(frozen=True)
class CommunicationSchedule:
    """Immutable description of a communication set; all queries are pure."""

    kind: str
    params: tuple = ()

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def none(cls) -> "CommunicationSchedule":
        return cls(NONE)

    @classmethod
    def full(cls) -> "CommunicationSchedule":
        return cls(FULL)

    @classmethod
    def oneshot(cls, round_: int) -> "CommunicationSchedule":
        if round_ < 1:
            raise ValueError(f"oneshot round must be >= 1, got {round_!r}")
        return cls(ONESHOT, (int(round_),))

    @classmethod
    def linear(cls, d: int) -> "CommunicationSchedule":
        if d < 1:
            raise ValueError(f"linear grid step must be >= 1, got {d!r}")
        return cls(LINEAR, (int(d),))

    @classmethod
    def exponential(cls, q: float) -> "CommunicationSchedule":
        if not q > 1.0:
            raise ValueError(f"exponential grid base must be > 1, got {q!r}")
        return cls(EXP, (float(q),))

    @classmethod
    def double_exponential(cls, q: float, eps: float) -> "CommunicationSchedule":
        if not q > 1.0:
            raise ValueError(f"double-exponential base must be > 1, got {q!r}")
        if not eps > 0.0:
            raise ValueError(f"double-exponential eps must be > 0, got {eps!r}")
        return cls(DOUBLEEXP, (float(q), float(eps)))

    @classmethod
    def explicit(cls, rounds) -> "CommunicationSchedule":
        rounds = tuple(int(r) for r in rounds)
        if not rounds:
            raise ValueError("explicit schedule needs at least one round")
        if rounds[0] < 1:
            raise ValueError(f"rounds must be >= 1, got {rounds[0]!r}")
        if any(b <= a for a, b in zip(rounds, rounds[1:])):
            raise ValueError("explicit rounds must be strictly increasing")
        return cls(EXPLICIT, rounds)

    # -- element generation ------------------------------------------------

    def elements_up_to(self, n: int) -> list[int]:
        """All communication rounds in {1..n}, ascending."""
        if self.kind == NONE:
            return []
        if self.kind == FULL:
            return list(range(1, n + 1))
        if self.kind == ONESHOT:
            (r,) = self.params
            return [r] if r <= n else []
        if self.kind == LINEAR:
            (d,) = self.params
            return list(range(d, n + 1, d))
        if self.kind == EXPLICIT:
            return list(self.params[: bisect_right(self.params, n)])
        out: list[int] = []
        if self.kind == EXP:
            (q,) = self.params
            k = 1
            while True:
                v = math.floor(q**k + 0.5)
                if v > n:
                    break
                if not out or v > out[-1]:
                    out.append(v)
                k += 1
        else:  # DOUBLEEXP: points q**((1+eps)**k) for k >= 1
            q, eps = self.params
            k = 1
            log_n = math.log(n + 0.5)
            while True:
                e = (1.0 + eps) ** k
                if e * math.log(q) > log_n:
                    break
                v = math.floor(q**e + 0.5)
                if v <= n and (not out or v > out[-1]):
                    out.append(v)
                k += 1
        return out

    # -- queries -----------------------------------------------------------

    def is_comm_round(self, t: int) -> bool:
        """True iff round t is a communication round."""
        if t < 1:
            raise ValueError(f"round index must be >= 1, got {t!r}")
        if self.kind == NONE:
            return False
        if self.kind == FULL:
            return True
        if self.kind == ONESHOT:
            return t == self.params[0]
        if self.kind == LINEAR:
            return t % self.params[0] == 0
        if self.kind == EXPLICIT:
            i = bisect_right(self.params, t)
            return i > 0 and self.params[i - 1] == t
        elems = self.elements_up_to(t)
        return bool(elems) and elems[-1] == t

    def last_comm_leq(self, t: int) -> int:
        """Largest communication round <= t, or 0 if there is none."""
        if t < 0:
            raise ValueError(f"round index must be >= 0, got {t!r}")
        if t == 0 or self.kind == NONE:
            return 0
        if self.kind == FULL:
            return t
        if self.kind == ONESHOT:
            (r,) = self.params
            return r if t >= r else 0
        if self.kind == LINEAR:
            (d,) = self.params
            return (t // d) * d
        if self.kind == EXPLICIT:
            i = bisect_right(self.params, t)
            return self.params[i - 1] if i > 0 else 0
        elems = self.elements_up_to(t)
        return elems[-1] if elems else 0

    def counting_function(self, n: int) -> int:
        """Number of communication rounds in {1..n}."""
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n!r}")
        if self.kind == NONE:
            return 0
        if self.kind == FULL:
            return n
        if self.kind == ONESHOT:
            return 1 if n >= self.params[0] else 0
        if self.kind == LINEAR:
            return n // self.params[0]
        if self.kind == EXPLICIT:
            return bisect_right(self.params, n)
        return len(self.elements_up_to(n))

    def comm_mask(self, horizon: int) -> np.ndarray:
        """Boolean array of length horizon+1; entry t is is_comm_round(t)."""
        mask = np.zeros(horizon + 1, dtype=bool)
        if self.kind == FULL:
            mask[1:] = True
        elif self.kind == LINEAR:
            (d,) = self.params
            mask[d :: d] = True
        elif self.kind != NONE:
            elems = self.elements_up_to(horizon)
            if elems:
                mask[np.asarray(elems)] = True
        return mask

    # -- density -----------------------------------------------------------

    @property
    def density_is_estimate(self) -> bool:
        return self.kind == EXPLICIT

    def density(self, burn_in: int | None = None) -> float:
        """Density of the communication set (liminf of ln C_k / ln C_{k+1}).

        Grid families have closed forms. Explicit sets return the minimum
        consecutive log-ratio past a burn-in index (default: the first
        quartile of the list) as a conservative liminf proxy; the result is
        an estimate, see density_is_estimate. None and full use the limit
        conventions 0 and 1.
        """
        if self.kind == NONE:
            return 0.0
        if self.kind in (FULL, LINEAR, EXP):
            return 1.0
        if self.kind == DOUBLEEXP:
            _, eps = self.params
            return 1.0 / (1.0 + eps)
        if self.kind == ONESHOT:
            raise ValueError("density is undefined for a single communication round")
        rounds = self.params
        if len(rounds) < 2:
            raise ValueError("density estimate needs at least two explicit rounds")
        if burn_in is None:
            burn_in = len(rounds) // 4
        burn_in = min(burn_in, len(rounds) - 2)
        ratios = [
            math.log(rounds[k]) / math.log(rounds[k + 1])
            for k in range(burn_in, len(rounds) - 1)
        ]
        return min(ratios)

    def spec_string(self) -> str:
        """Canonical form under the schedule grammar."""
        if self.kind in (NONE, FULL):
            return self.kind
        if self.kind == DOUBLEEXP:
            return f"{DOUBLEEXP}:{self.params[0]},{self.params[1]}"
        if self.kind == EXPLICIT:
            return EXPLICIT + ":" + ",".join(str(r) for r in self.params)
        return f"{self.kind}:{self.params[0]}"

    def __str__(self) -> str:
        return self.spec_string()


def over_exploration_schedule(horizon: int, players: int) -> CommunicationSchedule:
    """One-shot schedule communicating at round ceil(horizon**(1/players))."""
    if horizon < 1 or players < 1:
        raise ValueError("horizon and players must be >= 1")
    r = max(int(round(horizon ** (1.0 / players))), 1)
    # fix up float error so that r is exactly the smallest integer with r**players >= horizon
    while r**players < horizon:
        r += 1
    while r > 1 and (r - 1) ** players >= horizon:
        r -= 1
    return CommunicationSchedule.oneshot(r)


@dataclass(frozen=True)
class CountingGrowthReport:
    """Diagnostic comparing the counting function against its density-implied floor."""

    alpha: float
    rows: tuple  # (n, count, threshold, ratio) per sampled n


def counting_growth_report(
    s: CommunicationSchedule,
    n_max: int,
    points: int = 32,
    tolerance: float = 0.05,
) -> CountingGrowthReport:
    """Sample Z(n) / (ln(ln(n)) / ln(1/alpha)) over log-spaced n up to n_max.

    For 0 < alpha < 1 the counting function must asymptotically dominate
    ln(ln(n)) / ln(1/alpha); the report tabulates the ratio and raises if it
    falls below 1 - tolerance at the largest n.
    """
    alpha = s.density()
    if alpha <= 0.0 or alpha >= 1.0:
        raise ValueError(
            f"counting growth check needs density strictly inside (0, 1), got {alpha}"
        )
    if n_max < 16:
        raise ValueError("n_max must be >= 16")
    log_alpha_inv = math.log(1.0 / alpha)
    ns = sorted(set(np.geomspace(16, n_max, points).astype(int)) | {n_max})
    rows = []
    for n in ns:
        count = s.counting_function(int(n))
        threshold = math.log(math.log(n)) / log_alpha_inv
        rows.append((int(n), count, threshold, count / threshold))
    report = CountingGrowthReport(alpha=alpha, rows=tuple(rows))
    final_ratio = rows[-1][3]
    if final_ratio < 1.0 - tolerance:
        raise RuntimeError(
            f"counting function falls short of its density floor at n={n_max}: "
            f"ratio {final_ratio:.4f} < {1.0 - tolerance:.4f}"
        )
    return report


def parse_schedule(text: str) -> CommunicationSchedule:
    """Parse the schedule grammar:

    none | full | oneshot:<r> | linear:<d> | exp:<q> | doubleexp:<q>,<eps>
    | explicit:<r1>,<r2>,...
    """
    text = text.strip()
    if text == NONE:
        return CommunicationSchedule.none()
    if text == FULL:
        return CommunicationSchedule.full()
    kind, sep, arg = text.partition(":")
    if not sep or not arg:
        raise ValueError(f"malformed schedule {text!r}")
    try:
        if kind == ONESHOT:
            return CommunicationSchedule.oneshot(int(arg))
        if kind == LINEAR:
            return CommunicationSchedule.linear(int(arg))
        if kind == EXP:
            return CommunicationSchedule.exponential(float(arg))
        if kind == DOUBLEEXP:
            q, eps = arg.split(",")
            return CommunicationSchedule.double_exponential(float(q), float(eps))
        if kind == EXPLICIT:
            return CommunicationSchedule.explicit(int(r) for r in arg.split(","))
    except ValueError as exc:
        raise ValueError(f"malformed schedule {text!r}: {exc}") from None
    raise ValueError(f"unknown schedule kind {kind!r} in {text!r}")
