"""Counting and enumerating beta-expansion prefixes.

The central object is the level-synchronous DP on remainders
r -> beta*r - eps, kept iff the result stays inside [0, (m-1)/(beta-1)].
States with equal value are merged with summed multiplicities, which keeps
the reachable state set small: constant-size for Pisot bases (Garsia
separation) and window-bounded for rational ones.  All membership decisions
are exact sign tests; no floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import CapExceededError, HypothesisError, InvalidInputError
from .numberfield import BetaSystem, FieldElement

DEFAULT_NODE_CAP = 500_000
DEFAULT_SUM_CAP = 5_000_000
GOLDEN_COEFFS = (-1, -1, 1)


# ---------------------------------------------------------------------------
# remainder DP
# ---------------------------------------------------------------------------

def _coerce_point(x, sys: BetaSystem) -> FieldElement:
    x = sys.element(x)
    if x.sign() < 0 or (sys.right_end - x).sign() < 0:
        raise InvalidInputError("x lies outside I_beta")
    return x


def _rational_params(sys: BetaSystem) -> tuple[int, int]:
    """(p, q) with beta = p/q for a degree-one system."""
    b = sys.beta.coeffs[0]
    return b.numerator, b.denominator


def _prefix_count_series_rational(x: FieldElement, n_max: int, sys: BetaSystem) -> list[int]:
    """Counts N_0..N_{n_max} for degree-one beta via pure integer DP.

    The level-k remainder is N / (q^k * b) with N an integer, where x = a/b.
    Admissibility 0 <= r <= (m-1)q/(p-q) becomes integer inequalities.
    """
    p, q = _rational_params(sys)
    xv = x.coeffs[0]
    a, b = xv.numerator, xv.denominator
    m = sys.m
    counts = [1]
    states: dict[int, int] = {a: 1}
    scale = b  # denominator q^k * b at the current level
    for _ in range(n_max):
        scale *= q
        # right-end test: N*(p-q) <= (m-1)*q*scale
        limit = (m - 1) * q * scale
        pq = p - q
        new: dict[int, int] = {}
        for state, cnt in states.items():
            base = p * state
            for eps in range(m):
                cand = base - eps * scale
                if cand < 0:
                    break  # larger eps only decreases cand
                if cand * pq <= limit:
                    if cand in new:
                        new[cand] += cnt
                    else:
                        new[cand] = cnt
        states = new
        counts.append(sum(states.values()))
    return counts


def _prefix_count_series_field(x: FieldElement, n_max: int, sys: BetaSystem) -> list[int]:
    fld = sys.field
    right = sys.right_end
    m = sys.m
    counts = [1]
    states: dict[FieldElement, int] = {x: 1}
    for _ in range(n_max):
        new: dict[FieldElement, int] = {}
        for r, cnt in states.items():
            shifted = r * sys.beta
            for eps in range(m):
                cand = shifted - eps if eps else shifted
                s = cand.sign()
                if s < 0:
                    break  # digits are tried in increasing order
                if (right - cand).sign() >= 0:
                    if cand in new:
                        new[cand] += cnt
                    else:
                        new[cand] = cnt
        states = new
        counts.append(sum(states.values()))
    return counts


def prefix_count_series(x, n_max: int, sys: BetaSystem) -> list[int]:
    """[N_0(x), N_1(x), ..., N_{n_max}(x)], all exact."""
    if n_max < 0:
        raise InvalidInputError("n must be nonnegative")
    x = _coerce_point(x, sys)
    if sys.degree == 1:
        return _prefix_count_series_rational(x, n_max, sys)
    return _prefix_count_series_field(x, n_max, sys)


def count_prefixes(x, n: int, sys: BetaSystem) -> int:
    """Number of admissible length-n prefixes of beta-expansions of x."""
    return prefix_count_series(x, n, sys)[n]


# ---------------------------------------------------------------------------
# branching tree
# ---------------------------------------------------------------------------

@dataclass
class BranchNode:
    digit: int | None
    depth: int
    children: list["BranchNode"] = field(default_factory=list)


@dataclass
class BranchTree:
    root: BranchNode
    depth: int
    node_count: int

    def level_counts(self) -> list[int]:
        """Number of nodes at each depth 0..depth."""
        counts = [0] * (self.depth + 1)
        stack = [self.root]
        while stack:
            node = stack.pop()
            counts[node.depth] += 1
            stack.extend(node.children)
        return counts

    def leaf_count(self) -> int:
        return self.level_counts()[self.depth]


def branch_tree(x, depth: int, sys: BetaSystem, node_cap: int = DEFAULT_NODE_CAP) -> BranchTree:
    """The tree of admissible digit choices down to the given depth."""
    x = _coerce_point(x, sys)
    right = sys.right_end
    m = sys.m
    root = BranchNode(None, 0)
    total = 1
    frontier: list[tuple[BranchNode, FieldElement]] = [(root, x)]
    for _ in range(depth):
        nxt: list[tuple[BranchNode, FieldElement]] = []
        for node, r in frontier:
            shifted = r * sys.beta
            for eps in range(m):
                cand = shifted - eps if eps else shifted
                if cand.sign() < 0:
                    break
                if (right - cand).sign() >= 0:
                    child = BranchNode(eps, node.depth + 1)
                    node.children.append(child)
                    nxt.append((child, cand))
                    total += 1
                    if total > node_cap:
                        raise CapExceededError(f"branch tree exceeds {node_cap} nodes")
        frontier = nxt
    return BranchTree(root, depth, total)


# ---------------------------------------------------------------------------
# kappa and the growth bound
# ---------------------------------------------------------------------------

def kappa(sys: BetaSystem) -> Fraction:
    """Universal lower-bound exponent for beta below the golden ratio.

    kappa = (1/2) / (floor(log_beta(1/delta)) + 1) with
    delta = (1+beta-beta^2)/(beta^2-1) for beta > sqrt(2), else beta-1.
    The floor is computed exactly by comparing powers of beta with 1/delta.
    """
    beta = sys.beta
    one = sys.field.one
    if (beta * beta - beta - one).sign() >= 0:
        raise HypothesisError("kappa requires 1 < beta < (1+sqrt(5))/2")
    if (beta * beta - 2).sign() > 0:
        ratio = (beta * beta - one) / (one + beta - beta * beta)
    else:
        ratio = one / (beta - one)
    t = 0
    power = beta
    while (ratio - power).sign() >= 0:  # beta^(t+1) <= ratio
        t += 1
        power = power * beta
    return Fraction(1, 2 * (t + 1))


def _count_meets_bound(count: int, kap: Fraction, n: int) -> bool:
    """count >= 2^(kappa*n - 1), decided with integer arithmetic."""
    num = kap.numerator * n - kap.denominator
    if num <= 0:
        return count >= 1
    return count ** kap.denominator >= 2 ** num


@dataclass(frozen=True)
class GrowthBoundRow:
    n: int
    count: int
    bound: float
    ok: bool


@dataclass(frozen=True)
class GrowthBoundReport:
    kappa: Fraction
    rows: tuple[GrowthBoundRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows)


def verify_growth_bound(sys: BetaSystem, x, n_max: int) -> GrowthBoundReport:
    """Check N_n(x) >= 2^(kappa*n - 1) for 1 <= n <= n_max, exactly."""
    kap = kappa(sys)
    x = _coerce_point(x, sys)
    if x.sign() <= 0 or (sys.right_end - x).sign() <= 0:
        raise InvalidInputError("growth bound requires interior x")
    counts = prefix_count_series(x, n_max, sys)
    rows = []
    for n in range(1, n_max + 1):
        bound = 2.0 ** (float(kap) * n - 1)
        rows.append(GrowthBoundRow(n, counts[n], bound, _count_meets_bound(counts[n], kap, n)))
    return GrowthBoundReport(kap, tuple(rows))


# ---------------------------------------------------------------------------
# switch regions and the random transformation K_beta
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SwitchGeometry:
    """Switch intervals S_k (closed) and the equality regions between them."""

    sys: BetaSystem
    floor_beta: int
    switch: tuple[tuple[FieldElement, FieldElement], ...]  # S_k, k = 1..floor(beta)

    def classify(self, x: FieldElement) -> tuple[str, int]:
        """('switch', k) when x in S_k; otherwise ('equal', k) with the
        forced digit k.  Boundary points of S_k count as switch points."""
        x = _coerce_point(x, self.sys)
        for k, (lo, hi) in enumerate(self.switch, start=1):
            if (x - lo).sign() >= 0 and (hi - x).sign() >= 0:
                return ("switch", k)
        # equality region: digit k for x between S_k and S_{k+1}
        if not self.switch:
            # integer base: plain digit cells [k/beta, (k+1)/beta)
            k = 0
            while k + 1 < self.sys.m and (x * self.sys.beta - (k + 1)).sign() >= 0:
                k += 1
            return ("equal", k)
        for k, (lo, _hi) in enumerate(self.switch, start=1):
            if (x - lo).sign() < 0:
                return ("equal", k - 1)
        return ("equal", self.floor_beta)


def switch_geometry(sys: BetaSystem) -> SwitchGeometry:
    """Exact switch/equality intervals of the random transformation K_beta.

    Requires the K_beta digit convention m = floor(beta) + 1 for non-integer
    beta.  An integer base (with m = beta) has no switch region at all.
    """
    fb = sys.beta_floor()
    if sys.is_integer_base():
        if sys.m != fb:
            raise InvalidInputError("integer base requires m = beta in K_beta mode")
        return SwitchGeometry(sys, fb, ())
    if sys.m != fb + 1:
        raise InvalidInputError("K_beta requires m = floor(beta) + 1")
    one = sys.field.one
    base = sys.field.rational(fb) / (sys.beta * (sys.beta - one))
    intervals = []
    for k in range(1, fb + 1):
        lo = sys.field.rational(k) / sys.beta
        hi = base + sys.field.rational(k - 1) / sys.beta
        if (hi - lo).sign() < 0:
            raise InvalidInputError("empty switch interval; is beta < m - 1?")
        intervals.append((lo, hi))
    return SwitchGeometry(sys, fb, tuple(intervals))


def step_k_beta(omega_head: int, x, sys: BetaSystem,
                geometry: SwitchGeometry | None = None) -> tuple[bool, int, FieldElement]:
    """One step of K_beta: (coin consumed?, emitted digit, beta*x - digit)."""
    geom = geometry if geometry is not None else switch_geometry(sys)
    x = _coerce_point(x, sys)
    kind, k = geom.classify(x)
    if kind == "equal":
        return False, k, x * sys.beta - k
    digit = k if omega_head else k - 1
    return True, digit, x * sys.beta - digit


def simulate_expansion(x, n: int, sys: BetaSystem, coin_bits: Iterable[int]) -> list[int]:
    """Digits emitted by n iterations of K_beta driven by the given coin bits."""
    geom = switch_geometry(sys)
    bits = iter(coin_bits)
    digits = []
    cur = _coerce_point(x, sys)
    for _ in range(n):
        kind, k = geom.classify(cur)
        if kind == "equal":
            digit = k
        else:
            digit = k if next(bits) else k - 1
        digits.append(digit)
        cur = cur * sys.beta - digit
    return digits


# ---------------------------------------------------------------------------
# distinct power sums (Garsia diagnostics)
# ---------------------------------------------------------------------------

class ScaledSumOps:
    """Key arithmetic for sums scaled by beta^level.

    For a monic integer minimal polynomial the scaled sums have integer
    coordinates and keys are plain int tuples, which keeps hashing cheap;
    a degree-one base uses (numerator, denominator-scale) integer pairs;
    anything else falls back to Fraction coefficient tuples.
    """

    def __init__(self, sys: BetaSystem):
        self.sys = sys
        fld = sys.field
        d = fld.degree
        if sys.minpoly.monic and d >= 2:
            row = tuple(int(-c) for c in sys.minpoly.coeffs[:-1])

            def mul_beta(t: tuple[int, ...]) -> tuple[int, ...]:
                top = t[-1]
                out = (0,) + t[:-1]
                if top:
                    out = tuple(o + top * r for o, r in zip(out, row))
                return out

            def add_eps(t, eps):
                if not eps:
                    return t
                return (t[0] + eps,) + t[1:]

            self.zero = (0,) * d
            self.kind = "monic"
        elif d == 1:
            p, q = _rational_params(sys)

            def mul_beta(t):  # t is (numerator, power-of-q scale)
                return (t[0] * p, t[1] * q)

            def add_eps(t, eps):
                if not eps:
                    return t
                return (t[0] + eps * t[1], t[1])

            self.zero = (0, 1)
            self.kind = "rational"
        else:
            def mul_beta(t):
                return fld._mul(t, sys.beta.coeffs)

            def add_eps(t, eps):
                if not eps:
                    return t
                return (t[0] + eps,) + t[1:]

            self.zero = fld.zero.coeffs
            self.kind = "generic"
        self.mul_beta = mul_beta
        self.add_eps = add_eps

    def to_element(self, key) -> FieldElement:
        """The scaled sum as a field element (still scaled by beta^level)."""
        if self.kind == "rational":
            return self.sys.field.rational(Fraction(key[0], key[1]))
        return self.sys.field.from_coeffs([Fraction(c) for c in key])

    def to_fraction(self, key) -> Fraction:
        if self.kind != "rational":
            raise InvalidInputError("exact fraction view only for degree-one bases")
        return Fraction(key[0], key[1])

    def float_fn(self):
        """A fast float evaluator for keys (safe: scaled gaps stay order 1)."""
        if self.kind == "rational":
            return lambda key: key[0] / key[1]
        powers = self.sys.field.beta_float_powers()
        return lambda key: sum(float(c) * p for c, p in zip(key, powers))


def _scaled_sum_levels(sys: BetaSystem, n: int, cap: int,
                       with_counts: bool):
    """Iterate levels of t -> beta*t + eps, t scaled by beta^level.

    Yields the state dict (key -> word count) or set for each level 1..n.
    """
    m = sys.m
    ops = ScaledSumOps(sys)
    mul_beta, add_eps, zero = ops.mul_beta, ops.add_eps, ops.zero
    if with_counts:
        states: dict = {zero: 1}
        for _ in range(n):
            new: dict = {}
            for t, cnt in states.items():
                base = mul_beta(t)
                for eps in range(m):
                    key = add_eps(base, eps)
                    if key in new:
                        new[key] += cnt
                    else:
                        new[key] = cnt
            if len(new) > cap:
                raise CapExceededError(f"distinct-sum state count exceeds {cap}")
            states = new
            yield states
    else:
        states_set: set = {zero}
        for _ in range(n):
            new_set = set()
            for t in states_set:
                base = mul_beta(t)
                for eps in range(m):
                    new_set.add(add_eps(base, eps))
            if len(new_set) > cap:
                raise CapExceededError(f"distinct-sum state count exceeds {cap}")
            states_set = new_set
            yield states_set


def distinct_sums_count(n: int, sys: BetaSystem, cap: int = DEFAULT_SUM_CAP) -> int:
    """Number of distinct values of sum_{j<=n} eps_j beta^-j, exact."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    last = None
    for level in _scaled_sum_levels(sys, n, cap, with_counts=False):
        last = level
    return len(last)


@dataclass(frozen=True)
class GarsiaRow:
    n: int
    count: int
    count_over_beta_n: float
    min_gap_scaled: float


def garsia_report(sys: BetaSystem, n_max: int, cap: int = DEFAULT_SUM_CAP) -> list[GarsiaRow]:
    """Distinct-sum counts and minimum normalized gaps for n = 1..n_max.

    The reported gap is beta^n * (smallest difference between distinct
    level-n sums); Garsia separation predicts a positive lower bound for
    Pisot beta.  The minimum is certified by exact comparisons among the
    candidates preselected with floats.
    """
    import numpy as np

    rows = []
    beta_f = float(sys.beta)
    ops = ScaledSumOps(sys)

    def summarize(n: int, keys, vals: "np.ndarray") -> GarsiaRow:
        order = np.argsort(vals, kind="stable")
        gaps = np.diff(vals[order])
        if not gaps.size:
            return GarsiaRow(n, len(keys), len(keys) / beta_f ** n, math.inf)
        gmin = float(gaps.min())
        # exact minimum among the float-preselected candidates; ties are
        # plentiful (gap values live in a discrete set), so a handful of
        # representatives suffices: float error here is ~1e-9, far below
        # the observed gap scale
        cands = np.argsort(gaps, kind="stable")[:16]
        cands = [i for i in cands if gaps[i] <= gmin * 1.5 + 1e-12]
        best = None
        for i in cands:
            a, b = keys[order[i]], keys[order[i + 1]]
            diff = ops.to_element(tuple(int(v) for v in b)) - ops.to_element(
                tuple(int(v) for v in a)
            )
            if diff.sign() <= 0:
                raise InvalidInputError("float presorting failed; duplicate sums?")
            if best is None or (diff - best).sign() < 0:
                best = diff
        return GarsiaRow(n, len(keys), len(keys) / beta_f ** n, float(best))

    if ops.kind == "monic":
        # vectorized set DP: rows of int64 coordinates, deduped per level
        d = sys.field.degree
        red = np.array([int(-c) for c in sys.minpoly.coeffs[:-1]], dtype=np.int64)
        powers = np.array(sys.field.beta_float_powers(), dtype=float)
        arr = np.zeros((1, d), dtype=np.int64)
        for n in range(1, n_max + 1):
            top = arr[:, -1:]
            shifted = np.concatenate([np.zeros_like(top), arr[:, :-1]], axis=1)
            shifted += top * red
            branches = [shifted]
            for eps in range(1, sys.m):
                b = shifted.copy()
                b[:, 0] += eps
                branches.append(b)
            arr = np.unique(np.concatenate(branches, axis=0), axis=0)
            if len(arr) > cap:
                raise CapExceededError(f"distinct-sum state count exceeds {cap}")
            if np.abs(arr).max() > 2 ** 55:
                raise CapExceededError("coordinates exceed the safe integer range")
            rows.append(summarize(n, arr, arr @ powers))
        return rows

    for n, level in enumerate(_scaled_sum_levels(sys, n_max, cap, with_counts=False), start=1):
        keys = list(level)
        if ops.kind == "rational":
            vals = np.array([k[0] for k in keys], dtype=float)
            vals /= float(keys[0][1])
            keys = [(k[0], k[1]) for k in keys]
        else:
            karr = np.array([[float(c) for c in k] for k in keys])
            powers = np.array(sys.field.beta_float_powers()[: karr.shape[1]])
            vals = karr @ powers
        rows.append(summarize(n, keys, vals))
    return rows


# ---------------------------------------------------------------------------
# golden-ratio block counts and the sparse construction
# ---------------------------------------------------------------------------

def _require_golden(sys: BetaSystem) -> None:
    if sys.minpoly.coeffs != GOLDEN_COEFFS or sys.m != 2:
        raise InvalidInputError("this operation is specific to the golden ratio with m=2")


def count_X_m(m_param: int, sys: BetaSystem) -> int:
    """Number of {0,1} words of one compensation block summing to 1/beta.

    A block of the sparse construction contributes the words of length
    2*m_param whose value sum_{j} eps_j beta^-j equals 1/beta exactly; there
    are m_param of them (the chain 10^(2m-1), 0110^(2m-3), 01011 0^..., ...).
    Counted by exhaustive enumeration.
    """
    _require_golden(sys)
    if m_param < 1:
        raise InvalidInputError("m_param must be >= 1")
    if m_param > 12:
        raise CapExceededError("enumeration cap: m_param <= 12")
    length = 2 * m_param
    target = sys.rho
    count = 0
    # depth-first enumeration with exact pruning against the attainable tail
    rho_pows = [sys.rho ** j for j in range(length + 1)]
    # max attainable tail after position j: sum_{i=j+1}^{length} rho^i
    tails = [None] * (length + 1)
    acc = sys.field.zero
    for j in range(length, 0, -1):
        acc = acc + rho_pows[j]
        tails[j - 1] = acc
    tails[length] = sys.field.zero

    def rec(j: int, partial: FieldElement) -> int:
        if j == length:
            return 1 if (partial - target).is_zero() else 0
        total = 0
        for eps in (0, 1):
            nxt = partial + rho_pows[j + 1] if eps else partial
            diff = target - nxt
            if diff.sign() < 0:
                continue
            if (diff - tails[j + 1]).sign() > 0:
                continue
            total += rec(j + 1, nxt)
        return total

    return rec(0, sys.field.zero)


@dataclass(frozen=True)
class SparseCheckpoint:
    n: int
    block_product: int
    prefix_count: int
    log_product_over_n: float
    log_prefix_over_n: float


def sparse_profile(m_seq: Sequence[int], sys: BetaSystem) -> list[SparseCheckpoint]:
    """Sparse-expansion checkpoints for x with expansion 1 0^(2m_1) 1 0^(2m_2) ...

    At checkpoint n_k = sum_{j<=k} (2 m_j + 1) reports the block-product
    count prod_j count_X_m(m_j) and, as a cross-check, the exact DP prefix
    count of the truncated point; the ratio log(count)/n should decay.
    """
    _require_golden(sys)
    if any(b <= a for a, b in zip(m_seq, m_seq[1:])):
        raise InvalidInputError("m_seq must be strictly increasing")
    if len(m_seq) > 8:
        raise CapExceededError("checkpoint cap: at most 8 blocks")
    positions = []
    pos = 1
    for mk in m_seq:
        positions.append(pos)
        pos += 2 * mk + 1
    x = sys.field.zero
    for p in positions:
        x = x + sys.rho ** p
    rows = []
    product = 1
    checkpoints = []
    n = 0
    for mk in m_seq:
        n += 2 * mk + 1
        checkpoints.append(n)
    counts = prefix_count_series(x, checkpoints[-1], sys)
    for mk, n_k in zip(m_seq, checkpoints):
        product *= count_X_m(mk, sys)
        dp = counts[n_k]
        rows.append(
            SparseCheckpoint(
                n=n_k,
                block_product=product,
                prefix_count=dp,
                log_product_over_n=math.log(product) / n_k,
                log_prefix_over_n=math.log(dp) / n_k,
            )
        )
    return rows
