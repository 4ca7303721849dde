"""Integer sets, selector schedules, block schedules and base sequences.

The random sets studied here are obtained from a base sequence
``lambda_1 < lambda_2 < ...`` by keeping ``lambda_j`` independently with
probability ``delta_j`` (the *selector mean*).  This module holds the
deterministic ingredients (means, block boundaries, base sequences), the
seeded sampler, and regularity diagnostics for prescribed bases.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import mpmath
import numpy as np

from .errors import BlockOverflow, InvalidInput
from .rng import uniforms

INT64_MAX = (1 << 63) - 1


# ---------------------------------------------------------------------------
# IntegerSet
# ---------------------------------------------------------------------------


class IntegerSet:
    """A finite set of distinct positive integers, kept sorted.

    >>> s = IntegerSet([9, 1, 5])
    >>> list(s), 5 in s, len(s)
    ([1, 5, 9], True, 3)
    """

    __slots__ = ("_a",)

    def __init__(self, elements: Iterable[int] = ()):
        if isinstance(elements, IntegerSet):
            self._a = elements._a
            return
        a = np.asarray(list(elements) if not isinstance(elements, np.ndarray) else elements)
        if a.size == 0:
            a = np.zeros(0, dtype=np.int64)
        if a.dtype.kind not in "iu":
            if a.dtype == object or not np.all(np.floor(a) == a):
                raise InvalidInput("IntegerSet elements must be integers")
        if a.size and (int(a.max()) > INT64_MAX):
            raise BlockOverflow("element exceeds 64-bit range")
        a = np.unique(a.astype(np.int64))
        if a.size and a[0] < 1:
            raise InvalidInput("IntegerSet elements must be >= 1")
        a.setflags(write=False)
        self._a = a

    @classmethod
    def _trusted(cls, sorted_unique: np.ndarray) -> "IntegerSet":
        obj = cls.__new__(cls)
        a = np.ascontiguousarray(sorted_unique, dtype=np.int64)
        a.setflags(write=False)
        obj._a = a
        return obj

    @property
    def elements(self) -> np.ndarray:
        """Sorted read-only int64 array of the elements."""
        return self._a

    def __len__(self):
        return int(self._a.size)

    def __iter__(self):
        return (int(x) for x in self._a)

    def __contains__(self, x):
        i = np.searchsorted(self._a, x)
        return bool(i < self._a.size and self._a[i] == x)

    def __eq__(self, other):
        if not isinstance(other, IntegerSet):
            return NotImplemented
        return np.array_equal(self._a, other._a)

    def __hash__(self):
        return hash(self._a.tobytes())

    def __repr__(self):
        if len(self) <= 12:
            return f"IntegerSet({self.tolist()})"
        head = ", ".join(str(x) for x in self._a[:5])
        return f"IntegerSet([{head}, ...] n={len(self)})"

    def tolist(self) -> list[int]:
        return [int(x) for x in self._a]

    def issubset(self, other: "IntegerSet") -> bool:
        return bool(np.all(np.isin(self._a, other._a)))

    def union(self, other) -> "IntegerSet":
        return IntegerSet._trusted(np.union1d(self._a, IntegerSet(other)._a))

    def difference(self, other) -> "IntegerSet":
        return IntegerSet._trusted(np.setdiff1d(self._a, IntegerSet(other)._a))

    def count_upto(self, n) -> int:
        """``|set ∩ [1, n]|``."""
        return int(np.searchsorted(self._a, n, side="right"))

    def trace(self, lo, hi) -> "IntegerSet":
        return block_trace(self, lo, hi)


def block_trace(s: IntegerSet, lo, hi) -> IntegerSet:
    """Elements of ``s`` in the half-open interval ``[lo, hi)``."""
    if lo > hi:
        raise InvalidInput("block_trace requires lo <= hi")
    a = s.elements
    i, j = np.searchsorted(a, [lo, hi], side="left")
    return IntegerSet._trusted(a[i:j])


def save_set(path, s: IntegerSet, name="", schedule="", seed=None):
    """Write a set as a single-line JSON object."""
    obj = {"name": name, "schedule": schedule, "seed": seed, "elements": s.tolist()}
    with open(path, "w") as fh:
        fh.write(json.dumps(obj, separators=(",", ":")))
        fh.write("\n")


def load_set(path) -> tuple[IntegerSet, dict]:
    """Read a set written by :func:`save_set`; returns ``(set, metadata)``."""
    with open(path) as fh:
        obj = json.loads(fh.read())
    meta = {k: v for k, v in obj.items() if k != "elements"}
    return IntegerSet(obj.get("elements", [])), meta


# ---------------------------------------------------------------------------
# Selector mean schedules
# ---------------------------------------------------------------------------

MEAN_VARIANTS = ("t2_2", "p2_4", "t2_5", "t2_6", "t2_7", "t2_10", "katz_mall", "custom")


def alpha_from_p(p: float) -> float:
    """``alpha = 2(p-1)/(2-p)``."""
    if not 1 < p < 2:
        raise InvalidInput("p must lie in (1, 2)")
    return 2.0 * (p - 1.0) / (2.0 - p)


@dataclass(frozen=True)
class MeanSchedule:
    """A family of selector means ``delta_k``.

    Use the named constructors (:meth:`t2_2`, :meth:`t2_7`, ...) rather than
    the raw initializer.  ``start`` is the first index at which the formula is
    defined; smaller indices take the value at ``start``.
    """

    variant: str
    c: float = 1.0
    p: float | None = None
    tau: float | None = None
    table: tuple = ()

    def __post_init__(self):
        if self.variant not in MEAN_VARIANTS:
            raise InvalidInput(f"unknown mean schedule {self.variant!r}")
        if self.variant != "custom" and not self.c > 0:
            raise InvalidInput("schedule constant c must be positive")
        if self.variant in ("t2_5", "t2_6"):
            if self.p is None or not 1 < self.p < 4 / 3:
                raise InvalidInput(f"{self.variant} requires 1 < p < 4/3")
        if self.variant == "t2_10":
            if self.p is None or not 4 / 3 <= self.p < 2:
                raise InvalidInput("t2_10 requires 4/3 <= p < 2")
        if self.variant == "t2_7" and self.tau is not None and not 0 <= self.tau <= 1:
            raise InvalidInput("tau must lie in [0, 1]")

    # named constructors -------------------------------------------------
    @classmethod
    def t2_2(cls, c=1.0):
        return cls("t2_2", c=c)

    @classmethod
    def p2_4(cls, c=1.0):
        return cls("p2_4", c=c)

    @classmethod
    def t2_5(cls, c, p):
        return cls("t2_5", c=c, p=p)

    @classmethod
    def t2_6(cls, c, p):
        return cls("t2_6", c=c, p=p)

    @classmethod
    def t2_7(cls, c, tau=None):
        return cls("t2_7", c=c, tau=tau)

    @classmethod
    def t2_10(cls, c, p):
        return cls("t2_10", c=c, p=p)

    @classmethod
    def katz_mall(cls, c=1.0):
        return cls("katz_mall", c=c)

    @classmethod
    def custom(cls, table: Sequence[float]):
        t = tuple(float(x) for x in table)
        if any(not 0 <= x <= 1 for x in t):
            raise InvalidInput("custom means must lie in [0, 1]")
        return cls("custom", c=1.0, table=t)

    # ---------------------------------------------------------------------
    @property
    def alpha(self) -> float | None:
        return alpha_from_p(self.p) if self.p is not None else None

    @property
    def start(self) -> int:
        return {"t2_2": 3, "p2_4": 3, "t2_5": 4, "t2_6": 4, "t2_7": 4, "t2_10": 4}.get(
            self.variant, 1
        )

    @property
    def tag(self) -> str:
        parts = [self.variant]
        if self.variant != "custom":
            parts.append(f"c={self.c:g}")
        if self.p is not None:
            parts.append(f"p={self.p:g}")
        if self.tau is not None:
            parts.append(f"tau={self.tau:g}")
        if self.variant == "custom":
            parts.append(f"len={len(self.table)}")
        return ",".join(parts)

    def formula(self, x):
        """The unclipped mean formula at real arguments ``x >= start``.

        Used for integral tails; :meth:`means` is the exact per-index value.
        """
        x = np.asarray(x, dtype=np.float64)
        v = self.variant
        c = self.c
        if v in ("t2_2", "p2_4"):
            return c * np.log(np.log(x)) / x
        if v in ("t2_5", "t2_10"):
            a = self.alpha
            return c * np.log(x) ** a / (x * np.log(np.log(x)) ** (a + 1.0))
        if v == "t2_6":
            a = self.alpha
            return c * np.log(x) ** a * np.log(np.log(x)) / x
        if v == "t2_7":
            n = np.floor(np.log2(x))
            return c * n / np.exp2(n)
        if v == "katz_mall":
            return c / x
        raise InvalidInput("custom schedules have no closed-form tail")

    def means(self, k) -> np.ndarray:
        """Vectorised ``mean_at`` for an integer array ``k >= 1``."""
        k = np.asarray(k)
        if k.size and np.min(k) < 1:
            raise InvalidInput("selector indices start at 1")
        if self.variant == "custom":
            t = np.asarray(self.table, dtype=np.float64)
            out = np.zeros(k.shape, dtype=np.float64)
            inside = k <= t.size
            out[inside] = t[k[inside].astype(np.int64) - 1]
            return out
        kk = np.maximum(k.astype(np.float64), float(self.start))
        if self.variant == "t2_7":
            # exact block index for integers below 2**53
            n = (np.frexp(kk)[1] - 1).astype(np.float64)
            val = self.c * n / np.exp2(n)
        else:
            val = self.formula(kk)
        return np.clip(val, 0.0, 1.0)

    def secondary_means(self, k) -> np.ndarray:
        """Means of the second-stage selectors (constant ``tau``)."""
        if self.variant != "t2_7" or self.tau is None:
            raise InvalidInput("only t2_7 with tau has a secondary stage")
        return np.full(np.shape(k), float(self.tau))


def mean_at(schedule: MeanSchedule, k: int) -> float:
    """Selector mean ``delta_k`` (clipped to [0, 1])."""
    if k < 1:
        raise InvalidInput("k must be >= 1")
    return float(schedule.means(np.array([k]))[0])


_CHUNK = 1 << 20


def mean_prefix(schedule: MeanSchedule, n: int) -> np.ndarray:
    """Array ``[delta_1, ..., delta_n]``."""
    return schedule.means(np.arange(1, n + 1, dtype=np.int64))


def sigma(schedule: MeanSchedule, n: int) -> float:
    """``sigma_N = delta_1 + ... + delta_N`` (pairwise summation in chunks)."""
    if n < 1:
        raise InvalidInput("N must be >= 1")
    parts = []
    for lo in range(1, n + 1, _CHUNK):
        hi = min(n, lo + _CHUNK - 1)
        parts.append(float(np.sum(schedule.means(np.arange(lo, hi + 1, dtype=np.int64)))))
    return math.fsum(parts)


# ---------------------------------------------------------------------------
# Block schedules
# ---------------------------------------------------------------------------

BLOCK_VARIANTS = ("npown", "exploglogsq", "npowbetan", "dyadic")


@dataclass(frozen=True)
class BlockSchedule:
    """A rule ``n -> M_n`` cutting the integers into blocks ``[M_n, M_{n+1})``."""

    variant: str
    beta: float | None = None

    def __post_init__(self):
        if self.variant not in BLOCK_VARIANTS:
            raise InvalidInput(f"unknown block schedule {self.variant!r}")
        if self.variant == "npowbetan" and not (self.beta and self.beta > 0):
            raise InvalidInput("npowbetan requires beta > 0")

    @classmethod
    def npown(cls):
        return cls("npown")

    @classmethod
    def exploglogsq(cls):
        return cls("exploglogsq")

    @classmethod
    def npowbetan(cls, beta):
        return cls("npowbetan", beta=float(beta))

    @classmethod
    def dyadic(cls):
        return cls("dyadic")

    @property
    def start(self) -> int:
        """First index from which ``M_n`` is strictly increasing with ratio >= 2."""
        if self.variant == "exploglogsq":
            return 4
        if self.variant == "npowbetan":
            # n^(beta n) has ratio >= 2 once beta*log((n+1)^(n+1)/n^n) >= log 2
            n = 1
            while self.beta * ((n + 1) * math.log(n + 1) - n * math.log(n)) < math.log(2):
                n += 1
            return n
        return 1

    @property
    def tag(self) -> str:
        return f"npowbetan(beta={self.beta:g})" if self.variant == "npowbetan" else self.variant


def block_boundary(schedule: BlockSchedule, n: int) -> int:
    """Exact ``M_n``; raises :class:`BlockOverflow` beyond 64 bits."""
    if n < 1:
        raise InvalidInput("n must be >= 1")
    v = schedule.variant
    if v == "npown":
        m = n**n
    elif v == "dyadic":
        m = 2**n
    elif v == "exploglogsq":
        if n < 3:
            m = 1  # log log n is not positive here; e^0
        else:
            with mpmath.workdps(60):
                x = n * mpmath.log(mpmath.log(n)) ** 2
                if x > 44:
                    raise BlockOverflow(f"M_{n} exceeds 64-bit range")
                m = int(mpmath.floor(mpmath.exp(x)))
    else:
        beta = schedule.beta
        if float(beta).is_integer():
            m = n ** (int(beta) * n)
        else:
            with mpmath.workdps(60):
                x = mpmath.mpf(beta) * n * mpmath.log(n)
                if x > 44:
                    raise BlockOverflow(f"M_{n} exceeds 64-bit range")
                m = int(mpmath.ceil(mpmath.exp(x)))
    if m > INT64_MAX:
        raise BlockOverflow(f"M_{n} exceeds 64-bit range")
    return m


def iter_blocks(schedule: BlockSchedule, upto: int):
    """Yield ``(n, M_n, M_{n+1})`` for consecutive blocks meeting ``[1, upto]``.

    The first yielded block starts at ``schedule.start``; the last block is
    cut at ``INT64_MAX`` if ``M_{n+1}`` overflows.
    """
    n = schedule.start
    lo = block_boundary(schedule, n)
    while lo <= upto:
        try:
            hi = block_boundary(schedule, n + 1)
        except BlockOverflow:
            hi = INT64_MAX
        yield n, lo, hi
        if hi == INT64_MAX:
            return
        n, lo = n + 1, hi


# ---------------------------------------------------------------------------
# Base sequences
# ---------------------------------------------------------------------------


def prime_sieve(limit: int) -> np.ndarray:
    """All primes ``<= limit`` (Eratosthenes, odd-only)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    size = (limit - 1) // 2  # index i <-> 2i + 3
    odd = np.ones(size, dtype=bool)
    for i in range(int(math.isqrt(limit) - 3) // 2 + 1):
        if odd[i]:
            p = 2 * i + 3
            odd[(p * p - 3) // 2 :: p] = False
    return np.concatenate(([2], 2 * np.nonzero(odd)[0] + 3)).astype(np.int64)


def iroot(x: int, d: int) -> int:
    """``floor(x ** (1/d))`` for integers ``x >= 0``."""
    if x < 0:
        raise InvalidInput("iroot of negative number")
    if x < 2 or d == 1:
        return x
    r = int(round(x ** (1.0 / d)))
    while r**d > x:
        r -= 1
    while (r + 1) ** d <= x:
        r += 1
    return r


@dataclass(frozen=True)
class BaseSequence:
    """A prescribed increasing sequence ``lambda_1 < lambda_2 < ...``."""

    variant: str
    d: int = 1
    values: tuple = field(default=(), compare=True)

    def __post_init__(self):
        if self.variant not in ("naturals", "powers", "primes", "custom"):
            raise InvalidInput(f"unknown base sequence {self.variant!r}")
        if self.variant == "powers" and self.d < 1:
            raise InvalidInput("perfect powers need d >= 1")
        if self.variant == "custom":
            v = list(self.values)
            if any(b <= a for a, b in zip(v, v[1:])) or (v and v[0] < 1):
                raise InvalidInput("custom base must be strictly increasing positive")

    @classmethod
    def naturals(cls):
        return cls("naturals")

    @classmethod
    def powers(cls, d):
        return cls("powers", d=int(d))

    @classmethod
    def primes(cls):
        return cls("primes")

    @classmethod
    def custom(cls, values):
        return cls("custom", values=tuple(int(x) for x in values))

    @property
    def tag(self) -> str:
        if self.variant == "powers":
            return f"powers(d={self.d})"
        if self.variant == "custom":
            return f"custom(len={len(self.values)})"
        return self.variant

    def first(self, count: int) -> np.ndarray:
        """Array of ``lambda_1 .. lambda_count``."""
        if count < 1:
            raise InvalidInput("count must be >= 1")
        if self.variant == "naturals":
            return np.arange(1, count + 1, dtype=np.int64)
        if self.variant == "powers":
            if count ** self.d > INT64_MAX:
                raise BlockOverflow("perfect power exceeds 64-bit range")
            return np.arange(1, count + 1, dtype=np.int64) ** self.d
        if self.variant == "primes":
            n = max(count, 6)
            limit = int(n * (math.log(n) + math.log(math.log(n)))) + 10
            return prime_sieve(limit)[:count]
        if count > len(self.values):
            raise InvalidInput("custom base shorter than requested count")
        return np.asarray(self.values[:count], dtype=np.int64)

    def upto(self, bound: int) -> np.ndarray:
        """All base elements ``<= bound``."""
        if bound < 1:
            return np.zeros(0, dtype=np.int64)
        if self.variant == "naturals":
            return np.arange(1, bound + 1, dtype=np.int64)
        if self.variant == "powers":
            return np.arange(1, iroot(bound, self.d) + 1, dtype=np.int64) ** self.d
        if self.variant == "primes":
            return prime_sieve(bound)
        v = np.asarray(self.values, dtype=np.int64)
        return v[v <= bound]

    def count_upto(self, bound: int) -> int:
        """``nu([1, bound])``."""
        if bound < 1:
            return 0
        if self.variant == "naturals":
            return int(bound)
        if self.variant == "powers":
            return iroot(int(bound), self.d)
        if self.variant == "primes":
            return int(prime_sieve(int(bound)).size)
        return int(np.searchsorted(np.asarray(self.values, dtype=np.int64), bound, side="right"))


def base_sequence(base: BaseSequence, count: int) -> IntegerSet:
    """The first ``count`` terms of ``base`` as an :class:`IntegerSet`."""
    return IntegerSet._trusted(base.first(count))


def counting_nu(base: BaseSequence, lo: int, hi: int) -> int:
    """Number of base elements in ``[lo, hi)``."""
    if lo > hi:
        raise InvalidInput("counting_nu requires lo <= hi")
    return base.count_upto(hi - 1) - base.count_upto(lo - 1)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _selected(schedule, count, seed, stream=0):
    idx = np.arange(1, count + 1, dtype=np.int64)
    return uniforms(seed, idx, stream) < schedule.means(idx)


def sample_set(schedule: MeanSchedule, base: BaseSequence, count: int, seed) -> IntegerSet:
    """Random set ``{lambda_j : eps_j = 1, j <= count}``.

    ``eps_j`` is 1 iff the counter-based uniform attached to ``(seed, j)``
    falls below ``delta_j``; sets sampled with the same seed from different
    schedules are therefore coupled (pointwise smaller means give subsets).
    """
    if count < 1:
        raise InvalidInput("count must be >= 1")
    lam = base.first(count)
    return IntegerSet._trusted(lam[_selected(schedule, count, seed)])


def sample_coupled(schedules: Sequence[MeanSchedule], base: BaseSequence, count: int, seed):
    """Sample several schedules from shared uniforms (monotone coupling)."""
    lam = base.first(count)
    idx = np.arange(1, count + 1, dtype=np.int64)
    u = uniforms(seed, idx)
    return [IntegerSet._trusted(lam[u < s.means(idx)]) for s in schedules]


def sample_two_stage(schedule: MeanSchedule, base: BaseSequence, count: int, seed):
    """``(Lambda, Lambda')`` for the two-stage dyadic construction.

    ``Lambda'`` keeps an element of ``Lambda`` when an independent selector of
    mean ``tau`` (stream 1) fires.
    """
    if schedule.variant != "t2_7" or schedule.tau is None:
        raise InvalidInput("two-stage sampling requires a t2_7 schedule with tau")
    lam = base.first(count)
    idx = np.arange(1, count + 1, dtype=np.int64)
    first = uniforms(seed, idx, 0) < schedule.means(idx)
    second = uniforms(seed, idx, 1) < schedule.tau
    return (
        IntegerSet._trusted(lam[first]),
        IntegerSet._trusted(lam[first & second]),
    )


# ---------------------------------------------------------------------------
# Regularity of prescribed bases
# ---------------------------------------------------------------------------


@dataclass
class RegularityReport:
    grid: list
    nu_ratio: list  # nu([N, 2N)) / phi(N)
    phi_ratio: list  # phi(2N) / phi(N)
    growth_a: float  # nu([1, k]) >= a k^d on the grid
    growth_d: float
    doubling_ok: bool  # lambda_{8n} >= 2 lambda_n for all scanned n
    doubling_failures: list
    scanned: int
    worst_index: int
    worst_deviation: float


def regularity_report(
    base: BaseSequence, phi: Callable[[float], float], grid: Sequence[int]
) -> RegularityReport:
    """Check the regularity conditions of a base on a grid of scales ``N``.

    For every grid point the ratios ``nu([N,2N))/phi(N)`` and
    ``phi(2N)/phi(N)`` are reported; ``(a, d)`` is the least-squares slope of
    ``log nu([1,N])`` against ``log N`` with ``a`` lowered until the bound
    holds on the grid; the doubling property ``lambda_{8n} >= 2 lambda_n`` is
    scanned over all indices available below ``2 max(grid)``.
    """
    grid = [int(x) for x in grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidInput("grid must be nonempty and increasing")
    top = 2 * grid[-1]
    elems = base.upto(top)

    def nu(lo, hi):  # [lo, hi)
        return int(np.searchsorted(elems, hi, "left") - np.searchsorted(elems, lo, "left"))

    nu_ratio = [nu(N, 2 * N) / phi(N) for N in grid]
    phi_ratio = [phi(2 * N) / phi(N) for N in grid]
    counts = np.array([nu(1, N + 1) for N in grid], dtype=np.float64)
    ok = counts > 0
    if ok.sum() >= 2:
        x = np.log(np.asarray(grid, dtype=np.float64)[ok])
        d = float(np.polyfit(x, np.log(counts[ok]), 1)[0])
        a = float(np.min(counts[ok] / np.exp(d * x)))
    else:
        a, d = float("nan"), float("nan")
    m = elems.size // 8
    if m:
        n = np.arange(1, m + 1)
        bad = np.nonzero(elems[8 * n - 1] < 2 * elems[n - 1])[0] + 1
    else:
        bad = np.zeros(0, dtype=np.int64)
    dev = np.abs(np.asarray(nu_ratio) - 1.0)
    w = int(np.argmax(dev))
    return RegularityReport(
        grid=grid,
        nu_ratio=nu_ratio,
        phi_ratio=phi_ratio,
        growth_a=a,
        growth_d=d,
        doubling_ok=bad.size == 0,
        doubling_failures=[int(x) for x in bad[:50]],
        scanned=int(m),
        worst_index=grid[w],
        worst_deviation=float(dev[w]),
    )


# ---------------------------------------------------------------------------
# Relation-probability bound and the default schedule constant
# ---------------------------------------------------------------------------


def relation_constant(s: int, kind: str = "4e") -> float:
    """``(4e)^s / s^s`` (full integers) or ``(16e)^s / s^s`` (prescribed base)."""
    base = {"4e": 4.0, "16e": 16.0}[kind]
    return math.exp(s * (math.log(base) + 1.0 - math.log(s)))


def _tail_integral(schedule, x0, sigma0, s, span=None, points=40001):
    """Upper bound for ``sum_{j > x0} delta_j^2 sigma_j^(s-2)`` by an integral.

    For non-increasing ``delta`` and ``sigma~(x) = sigma0 + int_{x0}^x delta``
    one has ``delta_j <= delta(x)`` and ``sigma_j <= sigma~(x) + 1`` on
    ``[j-1, j]``; the integral is evaluated in ``u = log x`` by trapezoids.
    """
    from scipy.integrate import cumulative_trapezoid, trapezoid

    u0 = math.log(x0)
    span = span or 150.0 + 10.0 * s
    u = np.linspace(u0, u0 + span, points)
    d = np.minimum(schedule.formula(np.exp(u)), 1.0)
    dx = d * np.exp(u)
    sig = sigma0 + cumulative_trapezoid(dx, u, initial=0.0)
    h = d * dx * (sig + 1.0) ** (s - 2)
    return float(trapezoid(h, u))


def _sigma_at(schedule, x, tail_cap):
    """``sigma_x`` exactly up to ``tail_cap``; beyond, an integral upper bound."""
    if x <= tail_cap:
        return sigma(schedule, int(x))
    from scipy.integrate import trapezoid

    s0 = sigma(schedule, tail_cap)
    u = np.linspace(math.log(tail_cap), math.log(x), 20001)
    d = np.minimum(schedule.formula(np.exp(u)), 1.0)
    return s0 + float(trapezoid(d * np.exp(u), u))


def relation_sum(schedule: MeanSchedule, s: int, M: int, tail_cap: int = 10**6) -> float:
    """``sum_{j > M} delta_j^2 sigma_j^(s-2)``.

    Exact up to ``tail_cap``, then bounded by an integral (requires
    ``delta`` non-increasing beyond the cap).  Custom tables are summed
    exactly (means vanish past the table).
    """
    if s < 2:
        raise InvalidInput("s must be >= 2")
    M = max(int(M), 0)
    if schedule.variant == "custom":
        d = np.asarray(schedule.table, dtype=np.float64)
        if M >= d.size:
            return 0.0
        sig = np.cumsum(d)
        return math.fsum((d[M:] ** 2 * sig[M:] ** (s - 2)).tolist())
    if M < tail_cap:
        d = mean_prefix(schedule, tail_cap)
        sig = np.cumsum(d)
        head = math.fsum((d[M:] ** 2 * sig[M:] ** (s - 2)).tolist())
        return head + _tail_integral(schedule, tail_cap, float(sig[-1]), s)
    return _tail_integral(schedule, M, _sigma_at(schedule, M, tail_cap), s)


def relation_bound(
    schedule: MeanSchedule, s: int, M: int, tail_cap: int = 10**6, kind: str = "4e"
) -> float:
    """Upper bound on the probability of a length-``s`` relation above ``M``:
    ``C_s * sum_{j > M} delta_j^2 sigma_j^(s-2)`` with ``C_s`` from
    :func:`relation_constant`."""
    return relation_constant(s, kind) * relation_sum(schedule, s, M, tail_cap)


def default_c(
    n_range: Sequence[int] = range(3, 16),
    target: float = 0.5,
    blocks: BlockSchedule | None = None,
    tail_cap: int = 10**6,
) -> tuple[float, list]:
    """Largest ``c`` (3 significant digits, rounded down) for which
    ``sum_n P_n(c) <= target``, ``P_n`` the relation bound of length ``n``
    above ``M_n`` for ``delta_k = c loglog k / k``.

    ``P_n(c) = c^n P_n(1)`` as long as no mean is clipped, which holds for
    ``c <= 14``.  Returns ``(c, [P_n(1) for n in n_range])``.
    """
    blocks = blocks or BlockSchedule.npown()
    unit = MeanSchedule.t2_2(1.0)
    b1 = [relation_bound(unit, n, block_boundary(blocks, n), tail_cap) for n in n_range]
    ns = list(n_range)

    def total(c):
        return math.fsum(b * c**n for b, n in zip(b1, ns))

    lo, hi = 0.0, 14.0
    if total(hi) <= target:
        return hi, b1
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if total(mid) <= target:
            lo = mid
        else:
            hi = mid
    digits = 2 - int(math.floor(math.log10(lo)))
    c = math.floor(lo * 10**digits) / 10**digits
    return c, b1
