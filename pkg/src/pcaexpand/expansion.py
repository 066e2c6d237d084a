"""Truncated dimension-wise expansions and their a-priori error bounds.

A plan is a list of ``(weight, subset)`` pairs. Subsets are 1-based index
tuples into the eigenvalue vector; the approximation is the weighted sum of
the sub-problem values ``u^nu``, each of which only diffuses along the
coordinates in ``nu``. Weights are Python ints so that the sum-to-one
property holds exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterable, Mapping, Sequence

from .errors import ValidationError

__all__ = [
    "IndexSet",
    "ExpansionPlan",
    "MixedNormTable",
    "index_set",
    "first_order_plan",
    "second_order_plan",
    "general_plan",
    "combine",
    "bound_first_order",
    "bound_second_order",
    "bound_general",
    "cosine_norms",
    "format_plan",
]

IndexSet = tuple
MixedNormTable = Mapping[tuple, float]


def index_set(indices: Iterable[int], n: int | None = None) -> IndexSet:
    """Validate and normalise ``indices`` into a sorted tuple of 1-based ints."""
    idx = tuple(int(i) for i in indices)
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValidationError(f"index set must be strictly increasing: {idx}")
    if idx and idx[0] < 1:
        raise ValidationError(f"indices are 1-based: {idx}")
    if n is not None and idx and idx[-1] > n:
        raise ValidationError(f"index {idx[-1]} exceeds dimension {n}")
    return idx


def _canonical_key(term):
    weight, subset = term
    return (len(subset), subset)


@dataclass(frozen=True)
class ExpansionPlan:
    terms: tuple
    r: int
    m: int
    n: int

    def __post_init__(self):
        merged: dict[IndexSet, int] = {}
        for w, nu in self.terms:
            if int(w) != w:
                raise ValidationError(f"plan weights must be integers, got {w!r}")
            nu = index_set(nu, self.n)
            merged[nu] = merged.get(nu, 0) + int(w)
        terms = tuple(sorted(((w, nu) for nu, w in merged.items() if w != 0), key=_canonical_key))
        object.__setattr__(self, "terms", terms)

    @property
    def weight_sum(self) -> int:
        return sum(w for w, _ in self.terms)

    @property
    def subsets(self) -> list[IndexSet]:
        return [nu for _, nu in self.terms]

    @property
    def max_dimension(self) -> int:
        return max((len(nu) for nu in self.subsets), default=0)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)


def _check_rn(r: int, n: int) -> None:
    if r < 1:
        raise ValidationError(f"retained dimension r must be >= 1, got {r}")
    if n < 1:
        raise ValidationError(f"dimension n must be >= 1, got {n}")


def first_order_plan(r: int, n: int) -> ExpansionPlan:
    """``(1 + r - N) u^{1..r} + sum_k u^{1..r,k}`` for ``k = r+1..N``."""
    _check_rn(r, n)
    if r >= n:
        raise ValidationError(f"first-order plan needs r < n, got r={r}, n={n}")
    base = tuple(range(1, r + 1))
    terms = [(1 + r - n, base)]
    terms += [(1, base + (k,)) for k in range(r + 1, n + 1)]
    return ExpansionPlan(tuple(terms), r=r, m=1, n=n)


def second_order_plan(r: int, n: int) -> ExpansionPlan:
    _check_rn(r, n)
    if r > n - 2:
        raise ValidationError(f"second-order plan needs r <= n - 2, got r={r}, n={n}")
    d = n - r
    base = tuple(range(1, r + 1))
    terms = [(1 + d * (d - 3) // 2, base)]
    terms += [(2 - d, base + (k,)) for k in range(r + 1, n + 1)]
    terms += [(1, base + (k, l)) for k, l in itertools.combinations(range(r + 1, n + 1), 2)]
    return ExpansionPlan(tuple(terms), r=r, m=2, n=n)


def general_plan(r: int, m: int, n: int) -> ExpansionPlan:
    """Anchored-ANOVA truncation of order ``m`` around the first ``r`` coordinates.

    Summing the mixed differences over all ``|alpha| <= m`` gives a subset
    with ``s`` extra indices the weight
    ``sum_{j=s}^{m} C(n-r-s, j-s) (-1)^(j-s)``.
    """
    _check_rn(r, n)
    if m < 0:
        raise ValidationError(f"order m must be >= 0, got {m}")
    if r + m > n:
        raise ValidationError(f"r + m must not exceed n, got r={r}, m={m}, n={n}")
    d = n - r
    base = tuple(range(1, r + 1))
    terms = []
    for s in range(m + 1):
        w = sum(comb(d - s, j - s) * (-1) ** (j - s) for j in range(s, m + 1))
        if w == 0:
            continue
        for extra in itertools.combinations(range(r + 1, n + 1), s):
            terms.append((w, base + extra))
    return ExpansionPlan(tuple(terms), r=r, m=m, n=n)


def combine(plan: ExpansionPlan, term_values: Mapping[IndexSet, float]) -> float:
    """Weighted sum ``sum_w w * u^nu`` over the plan."""
    total = 0.0
    for w, nu in plan.terms:
        try:
            value = term_values[nu]
        except KeyError:
            raise ValidationError(f"missing sub-problem value for subset {set(nu)}") from None
        total += float(w) * float(value)
    return total


def _bound(t: float, lambdas: Sequence[float], r: int, norms: MixedNormTable, order: int) -> float:
    if t < 0:
        raise ValidationError("time must be nonnegative")
    lam = [float(x) for x in lambdas]
    if any(b > a for a, b in zip(lam, lam[1:])):
        raise ValidationError("eigenvalues must be sorted in decreasing order")
    n = len(lam)
    total = 0.0
    for combo in itertools.combinations(range(r + 1, n + 1), order):
        try:
            norm = norms[combo]
        except KeyError:
            raise ValidationError(f"missing mixed-derivative norm for indices {combo}") from None
        prod = 1.0
        for i in combo:
            prod *= lam[i - 1]
        total += prod * float(norm)
    return t**order * total


def bound_first_order(t: float, lambdas: Sequence[float], r: int, norms: MixedNormTable) -> float:
    """``t^2 sum_{r<i<k<=N} lambda_i lambda_k ||d^4 g / dz_i^2 dz_k^2||``."""
    return _bound(t, lambdas, r, norms, 2)


def bound_second_order(t: float, lambdas: Sequence[float], r: int, norms: MixedNormTable) -> float:
    """``t^3 sum_{r<i<j<k<=N} lambda_i lambda_j lambda_k ||d^6 g / dz_i^2 dz_j^2 dz_k^2||``."""
    return _bound(t, lambdas, r, norms, 3)


def bound_general(t: float, lambdas: Sequence[float], r: int, m: int, norms: MixedNormTable) -> float:
    """Order-``m`` analogue; unproven for ``m >= 3`` and only reported."""
    return _bound(t, lambdas, r, norms, m + 1)


def cosine_norms(n: int, r: int, order: int) -> dict[tuple, float]:
    """Norm table of ``prod_k cos(z_k)``: every mixed derivative has sup-norm 1."""
    return {c: 1.0 for c in itertools.combinations(range(r + 1, n + 1), order)}


def format_plan(plan: ExpansionPlan) -> str:
    lines = []
    for w, nu in plan.terms:
        inner = ", ".join(str(i) for i in nu)
        lines.append(f"({w}, {{{inner}}})")
    return "\n".join(lines)
