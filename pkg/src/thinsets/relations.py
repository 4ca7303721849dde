"""Signed relations, quasi-independence and extraction of independent subsets.

A *relation* of length ``s`` in a set ``A`` is a choice of ``s`` distinct
elements with signs ``theta_k = ±1`` such that ``sum theta_k k = 0``.  A set
without relations is quasi-independent: all its subset sums are distinct.

Exact searches use a meet-in-the-middle table of signed subset sums.  When a
table would exceed its budget, :class:`~thinsets.errors.ResourceExceeded` is
raised and the answer is unknown.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import INT64_MAX, BlockSchedule, IntegerSet, block_boundary, iter_blocks
from .errors import BlockOverflow, InvalidInput, ResourceExceeded, VerificationFailed

DEFAULT_TABLE_BUDGET = 4_000_000  # entries per half table
QI_EXACT_CAP = 24
MAX_QI_CAP = 20
SUBSET_SUM_CAP = 1 << 22


@dataclass(frozen=True)
class Relation:
    """``sum(sign * k for k, sign in zip(support, signs)) == 0``.

    ``support`` is increasing and the largest element carries sign ``-1``.
    """

    support: tuple
    signs: tuple

    def __post_init__(self):
        if not self.support or len(self.support) != len(self.signs):
            raise InvalidInput("relation needs a nonempty support with one sign each")
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise InvalidInput("relation support must be strictly increasing")
        if any(t not in (-1, 1) for t in self.signs):
            raise InvalidInput("signs must be +1 or -1")
        if sum(int(k) * int(t) for k, t in zip(self.support, self.signs)) != 0:
            raise InvalidInput("signed sum of the support is not zero")
        if self.signs[-1] != -1:
            raise InvalidInput("relation is not canonical (largest sign must be -1)")

    @classmethod
    def from_pairs(cls, pairs) -> "Relation":
        """Build a canonical relation from ``(element, sign)`` pairs."""
        pairs = sorted((int(k), int(t)) for k, t in pairs)
        if pairs and pairs[-1][1] == 1:
            pairs = [(k, -t) for k, t in pairs]
        return cls(tuple(k for k, _ in pairs), tuple(t for _, t in pairs))

    def __len__(self):
        return len(self.support)

    def to_json(self) -> str:
        return json.dumps({"support": list(self.support), "signs": list(self.signs)})

    @classmethod
    def from_json(cls, text: str) -> "Relation":
        obj = json.loads(text)
        return cls.from_pairs(zip(obj["support"], obj["signs"]))


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _as_array(A) -> np.ndarray:
    return IntegerSet(A).elements


def is_dissociated(a: np.ndarray) -> bool:
    """True if every element exceeds the sum of the smaller ones.

    Such a set is quasi-independent: in any relation the largest element
    would have to equal a signed sum of strictly smaller total.
    """
    total = 0
    for x in a.tolist():
        if x <= total:
            return False
        total += x
    return True


def _check_width(a: np.ndarray, s: int):
    top = sum(sorted(a.tolist())[-s:]) if s > 0 else 0
    if top > INT64_MAX:
        raise BlockOverflow("signed sums may exceed the 64-bit range")


def _table_size(h: int, s: int) -> int:
    return sum(math.comb(h, j) << j for j in range(min(h, s) + 1))


def _half_table(vals, s, offset):
    """Signed subset sums of ``vals`` using at most ``s`` elements.

    Returns ``(sums, counts, members)`` where ``members[r, :counts[r]]`` holds
    the signed 1-based indices ``±(offset + i + 1)`` of the entry.
    """
    sums = np.zeros(1, dtype=np.int64)
    cnt = np.zeros(1, dtype=np.int16)
    mem = np.zeros((1, max(s, 1)), dtype=np.int32)
    for i, x in enumerate(vals):
        ok = cnt < s
        ss, cc, mm = sums[ok], cnt[ok], mem[ok]
        rows = np.arange(cc.size)
        mp = mm.copy()
        mp[rows, cc] = offset + i + 1
        mn = mm.copy()
        mn[rows, cc] = -(offset + i + 1)
        sums = np.concatenate((sums, ss + x, ss - x))
        cnt = np.concatenate((cnt, cc + 1, cc + 1))
        mem = np.concatenate((mem, mp, mn))
    return sums, cnt, mem


def _signed_sums(vals) -> np.ndarray:
    """All ``3**len(vals)`` signed subset sums (with multiplicity)."""
    sums = np.zeros(1, dtype=np.int64)
    for x in vals:
        sums = np.concatenate((sums, sums + x, sums - x))
    return sums


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


def find_relation(A, s: int, M: int = 1, budget: int = DEFAULT_TABLE_BUDGET):
    """Find a relation of length exactly ``s`` among the elements ``>= M``.

    Parameters
    ----------
    A : IntegerSet or iterable of int
    s : int
        Relation length, ``s >= 2``.
    M : int
        Only elements ``>= M`` may enter the support.
    budget : int
        Maximal number of entries of each half table.

    Returns
    -------
    Relation or None
        ``None`` means no relation of that length exists.

    Raises
    ------
    ResourceExceeded
        If a half table would exceed ``budget``; the answer is then unknown.
    """
    if s < 2:
        raise InvalidInput("relation length must be >= 2")
    a = _as_array(A)
    a = a[a >= M]
    n = a.size
    if s > n or s == 2 or is_dissociated(a):
        return None
    _check_width(a, s)
    h = n // 2
    left, right = a[:h].tolist(), a[h:].tolist()
    if max(_table_size(len(left), s), _table_size(len(right), s)) > budget:
        raise ResourceExceeded(
            f"relation search of length {s} over {n} elements exceeds table budget {budget}"
        )
    ls, lc, lm = _half_table(left, s, 0)
    rs, rc, rm = _half_table(right, s, h)
    for c in range(s + 1):
        lsel = np.nonzero(lc == c)[0]
        rsel = np.nonzero(rc == s - c)[0]
        if lsel.size == 0 or rsel.size == 0:
            continue
        order = np.argsort(rs[rsel], kind="stable")
        rsorted = rs[rsel][order]
        target = -ls[lsel]
        pos = np.searchsorted(rsorted, target)
        pos_c = np.minimum(pos, rsorted.size - 1)
        hit = np.nonzero((pos < rsorted.size) & (rsorted[pos_c] == target))[0]
        if hit.size:
            i = lsel[hit[0]]
            j = rsel[order[pos_c[hit[0]]]]
            idx = np.concatenate((lm[i, :c], rm[j, : s - c]))
            return Relation.from_pairs((a[abs(t) - 1], 1 if t > 0 else -1) for t in idx.tolist())
    return None


def _has_any_relation(a: np.ndarray) -> bool:
    h = a.size // 2
    ls = _signed_sums(a[:h].tolist())
    rs = np.sort(_signed_sums(a[h:].tolist()))
    lo = np.searchsorted(rs, -ls, side="left")
    hi = np.searchsorted(rs, -ls, side="right")
    # the empty/empty pair is the one trivial solution
    return int(np.sum(hi - lo)) > 1


def is_quasi_independent(A, exact_cap: int = QI_EXACT_CAP, heuristic: bool = False):
    """Whether ``A`` contains no relation of any length.

    Exact (meet in the middle over ``3**(n/2)`` signed sums) up to
    ``exact_cap`` elements; dissociated sets are recognised at any size.
    Beyond the cap, ``heuristic=True`` searches short relations only and
    returns ``False`` if one is found, otherwise ``None`` (unknown).
    """
    a = _as_array(A)
    if a.size <= 1 or is_dissociated(a):
        return True
    _check_width(a, a.size)
    if a.size <= exact_cap:
        return not _has_any_relation(a)
    if not heuristic:
        raise ResourceExceeded(f"{a.size} elements exceed the exact cap {exact_cap}")
    for s in (3, 4):
        try:
            if find_relation(a, s) is not None:
                return False
        except ResourceExceeded:
            break
    return None


def count_relation_supports(A, s: int) -> int:
    """Number of ``s``-subsets of ``A`` admitting a zero signed sum.

    Brute force over subsets and sign patterns; limited to ``|A| <= 20`` and
    ``s <= 6``.
    """
    a = _as_array(A)
    if a.size > 20 or s > 6:
        raise ResourceExceeded("count_relation_supports is limited to |A| <= 20, s <= 6")
    if s < 3 or s > a.size:
        return 0
    _check_width(a, s)
    combos = np.array(list(itertools.combinations(a.tolist(), s)), dtype=np.int64)
    # the sign of the last (largest) element is fixed to -1
    signs = np.array(
        [p + (-1,) for p in itertools.product((1, -1), repeat=s - 1)], dtype=np.int64
    )
    return int(np.count_nonzero(np.any(combos @ signs.T == 0, axis=1)))


# ---------------------------------------------------------------------------
# extraction
# ---------------------------------------------------------------------------


def max_quasi_independent(A, exact_cap: int = MAX_QI_CAP, node_budget: int = 5_000_000):
    """A maximum quasi-independent subset; ties go to the lexicographically
    smallest sorted tuple.

    Depth-first search over increasing elements (include before exclude),
    keeping the set of subset sums of the current choice; a branch is cut as
    soon as it cannot beat the best size found so far.
    """
    a = _as_array(A)
    n = a.size
    if n > exact_cap:
        raise ResourceExceeded(f"{n} elements exceed the exact cap {exact_cap}")
    if n == 0:
        return IntegerSet()
    _check_width(a, n)
    vals = a.tolist()
    best: list = []
    nodes = 0

    def dfs(i, chosen, sums):
        nonlocal best, nodes
        nodes += 1
        if nodes > node_budget:
            raise ResourceExceeded("max_quasi_independent node budget exhausted")
        if len(chosen) > len(best):
            best = list(chosen)
        if i == n or len(chosen) + (n - i) <= len(best):
            return
        x = vals[i]
        shifted = sums + x
        if not np.any(np.isin(shifted, sums, assume_unique=True)):
            chosen.append(x)
            dfs(i + 1, chosen, np.union1d(sums, shifted))
            chosen.pop()
        if len(chosen) + (n - i - 1) > len(best):
            dfs(i + 1, chosen, sums)

    dfs(0, [], np.zeros(1, dtype=np.int64))
    return IntegerSet(best)


@dataclass
class GreedyResult:
    """Output of :func:`greedy_quasi_independent`.

    ``skipped_unverified`` lists elements dropped only because the exact
    check exceeded its budget (they might have been admissible).
    """

    subset: IntegerSet
    skipped_unverified: list = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.skipped_unverified


def greedy_quasi_independent(A, sum_cap: int = SUBSET_SUM_CAP) -> GreedyResult:
    """Quasi-independent subset built by scanning from the largest element down.

    An element is kept iff it creates no relation with the elements already
    kept, i.e. its translate of the current subset-sum set is disjoint from
    that set.  Once the subset-sum set would exceed ``sum_cap`` entries the
    check falls back to dissociation; elements that fail it are skipped and
    flagged.
    """
    a = _as_array(A)
    kept: list = []
    skipped: list = []
    sums = np.zeros(1, dtype=np.int64)
    exact = True
    if a.size:
        _check_width(a, a.size)
    for x in a[::-1].tolist():
        if exact and 2 * sums.size <= sum_cap:
            shifted = sums + x
            if not np.any(np.isin(shifted, sums, assume_unique=True)):
                kept.append(x)
                sums = np.union1d(sums, shifted)
            continue
        exact = False
        cand = np.array(sorted(kept + [x]), dtype=np.int64)
        if is_dissociated(cand):
            kept.append(x)
        else:
            skipped.append(x)
    return GreedyResult(IntegerSet(kept), skipped)


def _block_traces(a: np.ndarray, blocks: BlockSchedule):
    """Split sorted ``a`` along the schedule: ``[1, M_start)`` then ``[M_n, M_{n+1})``."""
    out = []
    if a.size == 0:
        return out
    first = block_boundary(blocks, blocks.start)
    lead = a[a < first]
    if lead.size:
        out.append(lead)
    for _, lo, hi in iter_blocks(blocks, int(a[-1])):
        part = a[(a >= lo) & (a < hi)]
        if part.size:
            out.append(part)
    return out


def extract_sqrt_block(A, blocks: BlockSchedule | None = None, check_cap: int = QI_EXACT_CAP):
    """Quasi-independent subset of size at least ``sqrt(|A|)/2``.

    If one block trace of ``A`` has at least ``sqrt(|A|)`` elements, that
    trace is returned.  Otherwise one element (the smallest) is taken from
    every other nonempty block; consecutive choices then differ by a factor
    of at least 2, so they are dissociated.

    Block traces are assumed quasi-independent; this is checked for traces
    with at most ``check_cap`` elements.
    """
    blocks = blocks or BlockSchedule.dyadic()
    a = _as_array(A)
    if a.size == 0:
        return IntegerSet()
    traces = _block_traces(a, blocks)
    for t in traces:
        if t.size <= check_cap and not is_quasi_independent(t):
            raise InvalidInput(f"block trace {t.tolist()} is not quasi-independent")
    root = math.sqrt(a.size)
    big = [t for t in traces if t.size >= root]
    if big:
        out = big[0]
    else:
        out = np.array([t[0] for t in traces[::2]], dtype=np.int64)
    assert out.size >= 0.5 * root, "extraction lost the square-root guarantee"
    return IntegerSet._trusted(out)


@dataclass
class Pruned:
    """``kept`` = block minus ``support`` of a longest relation.

    ``verified`` is False when the longest relation was only searched up to
    ``l_max`` (large block, precondition trusted).  ``precondition_ok`` is
    False when a relation longer than ``l_max`` was found.
    """

    kept: IntegerSet
    support: IntegerSet
    verified: bool
    precondition_ok: bool = True


def prune_block_max_relation(
    block, l_max: int, exact_cap: int = QI_EXACT_CAP, budget: int = DEFAULT_TABLE_BUDGET
) -> Pruned:
    """Remove the support of a longest relation from ``block``.

    What remains is quasi-independent: a relation there, disjoint from the
    removed one, could be added to it to give a longer relation.
    """
    a = _as_array(block)
    n = a.size
    verified = n <= exact_cap
    top = n if verified else min(n, max(int(l_max), 0))
    support = None
    for s in range(top, 2, -1):
        rel = find_relation(a, s, budget=budget)
        if rel is not None:
            support = rel.support
            break
    precondition_ok = support is None or len(support) <= l_max
    S = IntegerSet(support or ())
    E = IntegerSet._trusted(np.setdiff1d(a, S.elements))
    if len(E) <= exact_cap and not is_quasi_independent(E):
        raise VerificationFailed("remainder after pruning is not quasi-independent", E)
    return Pruned(E, S, verified, precondition_ok)
