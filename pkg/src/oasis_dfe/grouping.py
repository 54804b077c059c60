"""Sorted-insertion grouping and the grouped DFE baseline (G-DFE).

The identity string is never placed in a group: it is a zero-shot branch that
always contributes the value 1 with probability ``1/d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .measurement import cdf_table, outcome_distribution, sample_from_table
from .pauli import (
    PauliLike,
    PauliString,
    as_pauli,
    char_vector,
    merge_labels,
    sign_vector,
)

CHI_ZERO_TOL = 1e-12
_TIE_DECIMALS = 12


def ceil_tol(x: float) -> int:
    """Ceiling that ignores floating-point overshoot, e.g. ``1/(0.1**2 * 0.1)``."""
    return math.ceil(x - 1e-9 * max(1.0, abs(x)))


@dataclass(frozen=True)
class PauliGroup:
    pivot: str
    members: tuple  # of (PauliString, chi)

    def __post_init__(self):
        if not self.members:
            raise ValueError("empty group")
        if "I" in self.pivot:
            raise ValueError("pivot must have full support")

    @property
    def probability(self) -> float:
        return group_probability(self)

    @property
    def l1(self) -> float:
        return float(sum(abs(c) for _, c in self.members))

    def labels(self) -> list[str]:
        return [p.label for p, _ in self.members]


@dataclass(frozen=True)
class GroupingResult:
    n: int
    groups: tuple  # of PauliGroup

    @property
    def d(self) -> int:
        return 2**self.n

    @property
    def identity_weight(self) -> float:
        return 1.0 / self.d

    @property
    def group_probs(self) -> np.ndarray:
        return np.array([g.probability for g in self.groups])

    @property
    def num_groups(self) -> int:
        """Number of groups including the identity singleton."""
        return len(self.groups) + 1

    def partition(self) -> set:
        """Groups as a set of frozensets of member labels (identity included)."""
        out = {frozenset(g.labels()) for g in self.groups}
        out.add(frozenset(["I" * self.n]))
        return out

    def to_text(self) -> str:
        lines = [f"# n {self.n}", f"# identity {self.identity_weight!r}"]
        for g in self.groups:
            members = " ".join(f"{p.label}:{float(c)!r}" for p, c in g.members)
            lines.append(f"{g.pivot} {members}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GroupingResult":
        n = None
        groups = []
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(" ")
                if key == "n":
                    n = int(value)
                continue
            pivot, *members = line.split()
            parsed = []
            for item in members:
                label, chi = item.split(":")
                parsed.append((PauliString.from_label(label), float(chi)))
            groups.append(PauliGroup(pivot, tuple(parsed)))
        if n is None:
            raise ValueError("missing '# n' header")
        return cls(n, tuple(groups))


def group_probability(group: PauliGroup) -> float:
    return float(sum(c * c for _, c in group.members))


def sorted_insertion(strings: Sequence[PauliLike], chis: Sequence[float]) -> GroupingResult:
    """Greedy first-fit grouping of strings in decreasing ``|chi|``.

    Ties in ``|chi|`` are broken by string index (lexicographic, ``I<X<Y<Z``).
    A string joins the first group whose merged pivot it qubit-wise commutes
    with, which is the same as commuting with every member of that group.
    """
    strings = [as_pauli(s) for s in strings]
    chis = [float(c) for c in chis]
    if len(strings) != len(chis):
        raise ValueError("strings and chis have different lengths")
    if not strings:
        raise ValueError("nothing to group")
    n = strings[0].n
    if any(s.n != n for s in strings):
        raise ValueError("strings have different lengths")
    if any(s.is_identity() for s in strings):
        raise ValueError("the identity string is handled outside sorted insertion")

    order = sorted(range(len(strings)), key=lambda i: (-round(abs(chis[i]), _TIE_DECIMALS), strings[i].index))
    pivots = np.zeros((0, n), dtype=np.int8)
    members: list[list] = []
    for i in order:
        codes = strings[i].codes
        ok = np.all((pivots == 0) | (pivots == codes) | (codes == 0), axis=1)
        hit = np.flatnonzero(ok)
        if hit.size:
            j = hit[0]
            pivots[j] = np.where(codes != 0, codes, pivots[j])
            members[j].append((strings[i], chis[i]))
        else:
            pivots = np.vstack([pivots, codes[None, :]])
            members.append([(strings[i], chis[i])])
    groups = tuple(
        PauliGroup(merge_labels([p for p, _ in mem]).label, tuple(mem)) for mem in members
    )
    return GroupingResult(n, groups)


def target_support(O: np.ndarray) -> tuple[list[PauliString], np.ndarray]:
    """Non-identity strings with nonzero characteristic value for the target ``O``."""
    chi = char_vector(O)
    n = int(round(math.log2(O.shape[0])))
    idx = [i for i in np.flatnonzero(np.abs(chi) > CHI_ZERO_TOL) if i != 0]
    return [PauliString(int(i), n) for i in idx], chi[idx]


def group_target(O: np.ndarray) -> GroupingResult:
    """Sorted-insertion grouping of the characteristic support of ``O``."""
    strings, chis = target_support(O)
    return sorted_insertion(strings, chis)


def shots_for_group(group: PauliGroup, l: int, epsilon: float, delta: float, n: int | None = None) -> int:
    """Copies per sampled group: ``ceil(2 |chi|_1^2 / (|chi|^4 d l eps^2) ln(2/delta))``."""
    if l < 1 or epsilon <= 0 or not 0 < delta < 1:
        raise ValueError("need l >= 1, epsilon > 0 and 0 < delta < 1")
    n = n if n is not None else group.members[0][0].n
    d = 2**n
    prob = group.probability
    return max(1, ceil_tol(2 * group.l1**2 / (prob**2 * d * l * epsilon**2) * math.log(2 / delta)))


@dataclass(frozen=True)
class EstimationBudget:
    """Round count ``l`` plus the accuracy pair that fixes per-group shot counts.

    ``m`` overrides the per-group shot formula with a fixed count.
    """

    epsilon: float | None = None
    delta: float | None = None
    l: int | None = None
    m: int | None = None

    def __post_init__(self):
        if self.epsilon is not None and self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.l is None:
            if self.epsilon is None or self.delta is None:
                raise ValueError("give either l or both epsilon and delta")
            object.__setattr__(self, "l", ceil_tol(1.0 / (self.epsilon**2 * self.delta)))
        if self.l < 1:
            raise ValueError("l must be at least 1")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be at least 1")
        if self.m is None and (self.epsilon is None or self.delta is None):
            raise ValueError("per-group shot counts need epsilon and delta, or an explicit m")

    @property
    def log_factor(self) -> float:
        """``ln(2/delta) / (l eps^2)``, the common factor of every shot formula."""
        return math.log(2 / self.delta) / (self.l * self.epsilon**2)

    def shots(self, group: PauliGroup, n: int) -> int:
        if self.m is not None:
            return self.m
        return shots_for_group(group, self.l, self.epsilon, self.delta, n)


@dataclass
class EstimateReport:
    estimate: float
    shots_used: int
    rounds: int
    branch_counts: dict = field(default_factory=dict)


class _GroupTables:
    """Per-group outcome CDFs and single-shot values for one (rho, grouping) pair."""

    def __init__(self, rho: np.ndarray, grouping: GroupingResult, budget: EstimationBudget):
        d = grouping.d
        if rho.shape != (d, d):
            raise ValueError("state and grouping act on different systems")
        probs = grouping.group_probs
        if abs(probs.sum() + 1.0 / d - 1.0) > 1e-8:
            raise ValueError("group probabilities do not sum to 1 - 1/d; grouping/target mismatch")
        self.d = d
        self.probs = probs
        self.shots = np.array([budget.shots(g, grouping.n) for g in grouping.groups])
        self.dists = np.array([outcome_distribution(rho, g.pivot) for g in grouping.groups])
        self.values = np.array([shot_values(g, grouping.n) for g in grouping.groups])


def shot_values(group: PauliGroup, n: int) -> np.ndarray:
    """Single-shot estimator ``S(b)`` for every outcome ``b`` of the group's pivot."""
    d = 2**n
    acc = np.zeros(d)
    for p, chi in group.members:
        acc += chi * sign_vector(p)
    return acc / (math.sqrt(d) * group.probability)


def gdfe_estimate(
    rho: np.ndarray, grouping: GroupingResult, budget: EstimationBudget, rng: np.random.Generator
) -> EstimateReport:
    """Run ``l`` rounds of grouped DFE on ``rho``."""
    tables = _GroupTables(np.asarray(rho), grouping, budget)
    weights = np.concatenate([[1.0 / tables.d], tables.probs])
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    picks = np.minimum(np.searchsorted(cdf, rng.random(budget.l), side="right"), len(weights) - 1)
    counts = np.bincount(picks, minlength=len(weights))

    total = float(counts[0])  # identity rounds contribute R = 1
    shots = 0
    for g in np.flatnonzero(counts[1:]):
        k, m = int(counts[g + 1]), int(tables.shots[g])
        cdfs = cdf_table(tables.dists[g : g + 1])
        outcomes = sample_from_table(cdfs, np.zeros(k * m, dtype=np.int64), rng)
        total += tables.values[g][outcomes].reshape(k, m).mean(axis=1).sum()
        shots += k * m
    return EstimateReport(
        estimate=float(total / budget.l),
        shots_used=shots,
        rounds=budget.l,
        branch_counts={"identity": int(counts[0]), "measured": int(budget.l - counts[0])},
    )


def gdfe_exact_moments(
    rho: np.ndarray, grouping: GroupingResult, budget: EstimationBudget
) -> tuple[float, float, float]:
    """Exact mean, variance and expected shot count of :func:`gdfe_estimate`."""
    t = _GroupTables(np.asarray(rho), grouping, budget)
    means = np.einsum("gb,gb->g", t.dists, t.values)
    second = np.einsum("gb,gb->g", t.dists, t.values**2)
    p0 = 1.0 / t.d
    mean = p0 + t.probs @ means
    round_second = p0 + t.probs @ (means**2 + (second - means**2) / t.shots)
    var = (round_second - mean**2) / budget.l
    expected_shots = budget.l * float(t.probs @ t.shots)
    return float(mean), float(max(var, 0.0)), expected_shots


__all__ = [
    "PauliGroup",
    "GroupingResult",
    "EstimationBudget",
    "EstimateReport",
    "sorted_insertion",
    "group_target",
    "target_support",
    "group_probability",
    "shots_for_group",
    "shot_values",
    "gdfe_estimate",
    "gdfe_exact_moments",
    "ceil_tol",
]
