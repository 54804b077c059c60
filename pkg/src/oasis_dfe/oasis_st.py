"""Closed-form importance samplers for GHZ and W targets (OASIS-ST).

Both estimators draw one of three branches per round:

* branch 0, probability ``1/d``: the identity, value 1, no measurement;
* branch 1: a computational-basis measurement scored against the target's
  diagonal;
* branch 2: a measurement in a random off-diagonal pivot basis, with the pivot
  redrawn for every shot.

The group catalogs are built from the known Pauli expansions of the two
targets, with no search over strings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .grouping import EstimateReport, GroupingResult, PauliGroup, ceil_tol
from .measurement import cdf_table, outcome_distribution, sample_from_table
from .pauli import PauliString, parity_table

KINDS = ("GHZ", "W")


@dataclass(frozen=True)
class StructuredTarget:
    kind: str
    n: int

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in KINDS:
            raise ValueError(f"unknown structured target {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.n < 2:
            raise ValueError(f"{kind} needs n >= 2, got {self.n}")

    @property
    def d(self) -> int:
        return 2**self.n


@dataclass(frozen=True)
class RoundOutcome:
    branch: int
    shots: int
    value: float

    def __post_init__(self):
        if self.branch not in (0, 1, 2):
            raise ValueError("branch must be 0, 1 or 2")
        if self.branch == 0 and (self.shots != 0 or self.value != 1.0):
            raise ValueError("branch 0 takes no shots and has value 1")


def _check_accuracy(epsilon: float, delta: float) -> None:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")


def rounds_for(epsilon: float, delta: float) -> int:
    _check_accuracy(epsilon, delta)
    return ceil_tol(1.0 / (epsilon**2 * delta))


def ghz_shots(l: int, epsilon: float, delta: float) -> int:
    """Shots per measured GHZ round: ``ceil(2 ln(2/delta) / (l eps^2))``."""
    _check_accuracy(epsilon, delta)
    return ceil_tol(2.0 / (l * epsilon**2) * math.log(2 / delta))


def w_shots(n: int, l: int, epsilon: float, delta: float) -> tuple[int, int]:
    """Shots ``(m1, m2)`` for the two measured W branches."""
    _check_accuracy(epsilon, delta)
    d = 2**n
    k = math.log(2 / delta) / (l * epsilon**2)
    # exact integers, so no overflow for large n
    ratio = (2 * math.comb(n - 1, n // 2) - 1) / (d - n)
    m1 = ceil_tol(2 * n * n * ratio**2 * k)
    m2 = ceil_tol(n * n / 2 * k)
    return max(m1, 1), max(m2, 1)


# ---------------------------------------------------------------- pivots


def _ghz_pivot_label(n: int, ymask: int) -> str:
    return "".join("Y" if ymask >> (n - 1 - q) & 1 else "X" for q in range(n))


def ghz_pivots(n: int) -> list[tuple[str, int]]:
    """The ``2**(n-1)`` strings in ``{X,Y}^n`` with an even number of Y, with their Y masks.

    Row ``w`` belongs to the (n-1)-bit word ``w`` for the first ``n-1`` qubits;
    the last qubit fixes the parity.
    """
    par = parity_table(n)
    out = []
    for w in range(2 ** (n - 1)):
        ymask = (w << 1) | int(par[w])
        out.append((_ghz_pivot_label(n, ymask), ymask))
    return out


def w_pivots(n: int) -> list[tuple[str, int, int]]:
    """``(label, i, j)`` for pivots with ``A`` in ``{X, Y}`` at ``i < j`` and Z elsewhere."""
    out = []
    for i, j in combinations(range(n), 2):
        for letter in "XY":
            label = ["Z"] * n
            label[i] = label[j] = letter
            out.append(("".join(label), i, j))
    return out


# --------------------------------------------------------------- catalogs


def _strings_with(n: int, fixed: dict, free: str = "IZ"):
    """All strings with ``fixed[q]`` on qubit ``q`` and a letter of ``free`` elsewhere."""
    rest = [q for q in range(n) if q not in fixed]
    for bits in range(2 ** len(rest)):
        label = [""] * n
        for q, ch in fixed.items():
            label[q] = ch
        for k, q in enumerate(rest):
            label[q] = free[bits >> (len(rest) - 1 - k) & 1]
        yield "".join(label)


def ghz_group_catalog(n: int) -> GroupingResult:
    """Analytic grouping of the GHZ characteristic support.

    One Z-group holding the even-weight ``{I,Z}`` strings and one singleton per
    even-Y string in ``{X,Y}^n``. Every nonzero ``|chi|`` equals ``1/sqrt(d)``.
    """
    StructuredTarget("GHZ", n)
    c = 1.0 / math.sqrt(2**n)
    zs = [
        (PauliString.from_label(s), c)
        for s in _strings_with(n, {})
        if s.count("Z") % 2 == 0 and s.count("Z") > 0
    ]
    groups = [PauliGroup("Z" * n, tuple(zs))]
    for label, ymask in ghz_pivots(n):
        sign = -1.0 if (bin(ymask).count("1") // 2) % 2 else 1.0
        groups.append(PauliGroup(label, ((PauliString.from_label(label), sign * c),)))
    return GroupingResult(n, tuple(groups))


def w_group_catalog(n: int) -> GroupingResult:
    """Analytic grouping of the W characteristic support.

    ``chi(Z_S) = (n - 2|S|) / (n sqrt(d))`` on the diagonal and
    ``2 / (n sqrt(d))`` for every string with ``X X`` or ``Y Y`` on one pair and
    ``{I, Z}`` elsewhere.
    """
    StructuredTarget("W", n)
    rd = math.sqrt(2**n)
    zs = []
    for s in _strings_with(n, {}):
        w = s.count("Z")
        if w and n != 2 * w:
            zs.append((PauliString.from_label(s), (n - 2 * w) / (n * rd)))
    groups = [PauliGroup("Z" * n, tuple(zs))] if zs else []
    off = 2.0 / (n * rd)
    for label, i, j in w_pivots(n):
        a = label[i]
        members = tuple((PauliString.from_label(s), off) for s in _strings_with(n, {i: a, j: a}))
        groups.append(PauliGroup(label, members))
    return GroupingResult(n, tuple(groups))


def group_catalog(target: StructuredTarget) -> GroupingResult:
    return ghz_group_catalog(target.n) if target.kind == "GHZ" else w_group_catalog(target.n)


# --------------------------------------------------------------- samplers


class StructuredSampler:
    """Outcome tables of one state for the GHZ or W estimator.

    Building the tables costs one basis change per pivot, so reuse the sampler
    across trials on the same state.
    """

    def __init__(self, target: StructuredTarget, rho: np.ndarray):
        rho = np.asarray(rho)
        d, n = target.d, target.n
        if rho.shape != (d, d):
            raise ValueError(f"state of shape {rho.shape} does not match {target.kind} on {n} qubits")
        self.target = target
        weight = np.bitwise_count(np.arange(d)).astype(np.int64)
        diag = np.clip(np.real(np.diag(rho)), 0.0, None)
        self.z_dist = diag / diag.sum()
        if target.kind == "GHZ":
            # branch 1 hits on 0...0 and 1...1
            self.z_values = np.full(d, -2.0 / (d - 2))
            self.z_values[[0, d - 1]] = 1.0
            pivots = ghz_pivots(n)
            labels = [p for p, _ in pivots]
            sign_b = 1 - 2 * (weight & 1)
            self.pivot_values = np.array(
                [(-1) ** ((bin(ymask).count("1") // 2) % 2) * sign_b for _, ymask in pivots], dtype=float
            )
        else:
            self.z_values = np.where(weight == 1, 1.0, -n / (d - n))
            pivots = w_pivots(n)
            labels = [p for p, _, _ in pivots]
            values = np.zeros((len(pivots), d))
            b = np.arange(d)
            for r, (_, i, j) in enumerate(pivots):
                bi, bj = 1 << (n - 1 - i), 1 << (n - 1 - j)
                rest_zero = (b & ~(bi | bj)) == 0
                sign = 1 - 2 * ((b & bi > 0).astype(int) ^ (b & bj > 0).astype(int))
                values[r] = np.where(rest_zero, 0.5 * n * sign, 0.0)
            self.pivot_values = values
        self.pivot_labels = labels
        self.pivot_dists = np.array([outcome_distribution(rho, p) for p in labels])
        self._z_cdf = cdf_table(self.z_dist[None, :])
        self._pivot_cdf = cdf_table(self.pivot_dists)

    @property
    def branch_probs(self) -> np.ndarray:
        d, n = self.target.d, self.target.n
        if self.target.kind == "GHZ":
            return np.array([1 / d, (d - 2) / (2 * d), 0.5])
        return np.array([1 / d, (d - n) / (n * d), (n - 1) / n])

    def draw_branches(self, l: int, rng: np.random.Generator) -> np.ndarray:
        """Branch labels of ``l`` rounds, drawn step by step as the algorithms do."""
        d, n = self.target.d, self.target.n
        if self.target.kind == "GHZ":
            heads = rng.random(l) < 0.5
            k = rng.integers(1, d + 1, size=l)
            return np.where(heads, np.where(k <= 2, 0, 1), 2)
        k = rng.integers(1, n + 1, size=l)
        k2 = rng.integers(1, d + 1, size=l)
        return np.where(k == 1, np.where(k2 <= n, 0, 1), 2)

    def sample_rounds(self, l: int, m1: int, m2: int, rng: np.random.Generator):
        """Branch, shot count and value of each of ``l`` rounds, as arrays."""
        branch = self.draw_branches(l, rng)
        values = np.ones(l)
        shots = np.zeros(l, dtype=np.int64)
        r1 = np.flatnonzero(branch == 1)
        if r1.size:
            b = sample_from_table(self._z_cdf, np.zeros(r1.size * m1, dtype=np.int64), rng)
            values[r1] = self.z_values[b].reshape(r1.size, m1).mean(axis=1)
            shots[r1] = m1
        r2 = np.flatnonzero(branch == 2)
        if r2.size:
            rows = rng.integers(0, len(self.pivot_labels), size=r2.size * m2)
            b = sample_from_table(self._pivot_cdf, rows, rng)
            values[r2] = self.pivot_values[rows, b].reshape(r2.size, m2).mean(axis=1)
            shots[r2] = m2
        return branch, shots, values

    def estimate(self, l: int, m1: int, m2: int, rng: np.random.Generator) -> EstimateReport:
        branch, shots, values = self.sample_rounds(l, m1, m2, rng)
        counts = np.bincount(branch, minlength=3)
        return EstimateReport(
            estimate=float(values.mean()),
            shots_used=int(shots.sum()),
            rounds=l,
            branch_counts={f"branch{k}": int(counts[k]) for k in range(3)},
        )

    def branch_moments(self) -> tuple[np.ndarray, np.ndarray]:
        """Single-shot mean and variance of each branch (branch 0 is the constant 1)."""
        mu1 = self.z_dist @ self.z_values
        s1 = self.z_dist @ self.z_values**2
        mu2 = np.mean(np.einsum("kb,kb->k", self.pivot_dists, self.pivot_values))
        s2 = np.mean(np.einsum("kb,kb->k", self.pivot_dists, self.pivot_values**2))
        return np.array([1.0, mu1, mu2]), np.array([0.0, s1 - mu1**2, s2 - mu2**2])

    def exact_moments(self, l: int, m1: int, m2: int) -> tuple[float, float, float]:
        probs = self.branch_probs
        mu, var = self.branch_moments()
        m = np.array([1, m1, m2])
        mean = probs @ mu
        second = probs @ (mu**2 + var / m)
        expected_shots = l * (probs[1] * m1 + probs[2] * m2)
        return float(mean), float(max(second - mean**2, 0.0) / l), float(expected_shots)


# ------------------------------------------------------------- front ends


def _budget(target: StructuredTarget, epsilon, delta, l, m1, m2) -> tuple[int, int, int]:
    if l is None:
        l = rounds_for(epsilon, delta)
    if l < 1:
        raise ValueError("l must be at least 1")
    if target.kind == "GHZ":
        if m1 is None:
            m1 = ghz_shots(l, epsilon, delta)
        m2 = m1 if m2 is None else m2
    else:
        if m1 is None or m2 is None:
            d1, d2 = w_shots(target.n, l, epsilon, delta)
            m1 = d1 if m1 is None else m1
            m2 = d2 if m2 is None else m2
    if m1 < 1 or m2 < 1:
        raise ValueError("shot counts must be at least 1")
    return int(l), int(m1), int(m2)


def ghz_estimate(
    rho: np.ndarray,
    n: int,
    epsilon: float = 0.1,
    delta: float = 0.1,
    rng: np.random.Generator | None = None,
    l: int | None = None,
    m: int | None = None,
    sampler: StructuredSampler | None = None,
) -> EstimateReport:
    """Estimate the GHZ fidelity of ``rho`` with ``l`` rounds of ``m`` shots.

    ``l`` and ``m`` default to the values fixed by ``(epsilon, delta)``.
    """
    target = StructuredTarget("GHZ", n)
    _check_accuracy(epsilon, delta)
    l, m, _ = _budget(target, epsilon, delta, l, m, None)
    sampler = sampler or StructuredSampler(target, rho)
    return sampler.estimate(l, m, m, rng if rng is not None else np.random.default_rng())


def w_estimate(
    rho: np.ndarray,
    n: int,
    epsilon: float = 0.1,
    delta: float = 0.1,
    rng: np.random.Generator | None = None,
    l: int | None = None,
    m1: int | None = None,
    m2: int | None = None,
    sampler: StructuredSampler | None = None,
) -> EstimateReport:
    """Estimate the W fidelity of ``rho``; ``m1`` and ``m2`` are the shots of branches 1 and 2."""
    target = StructuredTarget("W", n)
    _check_accuracy(epsilon, delta)
    l, m1, m2 = _budget(target, epsilon, delta, l, m1, m2)
    sampler = sampler or StructuredSampler(target, rho)
    return sampler.estimate(l, m1, m2, rng if rng is not None else np.random.default_rng())


def structured_budget(target: StructuredTarget, epsilon=0.1, delta=0.1, l=None, m=None) -> tuple[int, int, int]:
    """``(l, m1, m2)`` for ``target``; ``m`` is an int or a pair ``(m1, m2)``."""
    m1, m2 = (m if isinstance(m, tuple) else (m, m)) if m is not None else (None, None)
    return _budget(target, epsilon, delta, l, m1, m2)


def exact_moments_st(
    target: StructuredTarget, rho: np.ndarray, l: int, m
) -> tuple[float, float, float]:
    """Exact mean, variance and expected shots of the estimator.

    ``m`` is the GHZ shot count, or ``(m1, m2)`` for W (an int is used for both).
    """
    if target.n > 6:
        raise ValueError("exact moments are limited to n <= 6")
    m1, m2 = m if isinstance(m, tuple) else (m, m)
    return StructuredSampler(target, rho).exact_moments(l, m1, m2)


def ghz_variance_bound(f: float) -> float:
    """Upper bound ``1 - f**2`` on the single-shot GHZ variance at fidelity ``f``."""
    if not 0.0 <= f <= 1.0:
        raise ValueError("fidelity must lie in [0, 1]")
    return 1.0 - f * f


def ghz_single_shot_variance(f: float, q: float, n: int) -> float:
    """Closed form ``1 - f^2 - (q - f)(d - 4)/(d - 2)``.

    ``q`` is the probability that a branch-2 shot returns ``+1``.
    """
    d = 2**n
    return 1.0 - f * f - (q - f) * (d - 4) / (d - 2)


def ghz_success_probs(rho: np.ndarray, n: int) -> tuple[float, float]:
    """``(p, q)``: ``P(b in {0...0, 1...1})`` under Z, and ``P(S = +1)`` in branch 2."""
    s = StructuredSampler(StructuredTarget("GHZ", n), rho)
    p = float(s.z_dist[0] + s.z_dist[-1])
    q = float(np.mean(np.einsum("kb,kb->k", s.pivot_dists, s.pivot_values > 0)))
    return p, q


__all__ = [
    "StructuredTarget",
    "RoundOutcome",
    "StructuredSampler",
    "ghz_group_catalog",
    "w_group_catalog",
    "group_catalog",
    "ghz_pivots",
    "w_pivots",
    "ghz_estimate",
    "w_estimate",
    "ghz_shots",
    "w_shots",
    "rounds_for",
    "structured_budget",
    "exact_moments_st",
    "ghz_variance_bound",
    "ghz_single_shot_variance",
    "ghz_success_probs",
]
