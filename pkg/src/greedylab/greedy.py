"""Greedy sets, projections and the two truncation operators."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable

from .errors import ContractError, InputError
from .spaces import CoeffVector


class Ties(str, enum.Enum):
    ALL = "all"
    FIRST = "first"


@dataclass(frozen=True)
class GreedySet:
    indices: tuple

    @property
    def m(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class SignPattern:
    """Unimodular scalars ``eps_n`` on a finite index set."""

    assignment: tuple

    def __post_init__(self):
        pairs = self.assignment.items() if isinstance(self.assignment, dict) else self.assignment
        pairs = tuple(sorted((int(n), s) for n, s in pairs))
        for n, s in pairs:
            if abs(abs(s) - 1.0) > 1e-12:
                raise InputError(f"sign at index {n} has modulus {abs(s)}")
        object.__setattr__(self, "assignment", pairs)

    @classmethod
    def ones(cls, A: Iterable[int]) -> "SignPattern":
        return cls(tuple((n, 1.0) for n in A))

    @property
    def indices(self) -> tuple:
        return tuple(n for n, _ in self.assignment)


def _indices(A) -> tuple:
    return tuple(sorted(set(int(n) for n in A)))


def _check_range(dimension: int, A: tuple):
    for n in A:
        if not 1 <= n <= dimension:
            raise InputError(f"index {n} outside 1..{dimension}")


def is_greedy_set(f: CoeffVector, A: Iterable[int]) -> bool:
    A = set(_indices(A))
    inside = [abs(f.coeff(n)) for n in A]
    outside = [abs(v) for n, v in f.entries if n not in A]
    return min(inside, default=float("inf")) >= max(outside, default=0.0)


def greedy_ordering(f: CoeffVector) -> tuple:
    """Lexicographically smallest greedy ordering of ``1..dimension``."""
    return tuple(sorted(range(1, f.dimension + 1), key=lambda n: (-abs(f.coeff(n)), n)))


def greedy_sets(f: CoeffVector, m: int, ties: Ties | str = Ties.ALL) -> list[GreedySet]:
    if not 0 <= m <= f.dimension:
        raise InputError(f"m = {m} outside 0..{f.dimension}")
    order = greedy_ordering(f)
    if Ties(ties) is Ties.FIRST or m == 0:
        return [GreedySet(_indices(order[:m]))]
    threshold = abs(f.coeff(order[m - 1]))
    forced = [n for n in order if abs(f.coeff(n)) > threshold]
    tied = sorted(n for n in order if abs(f.coeff(n)) == threshold)
    picks = itertools.combinations(tied, m - len(forced))
    return sorted((GreedySet(_indices(forced + list(c))) for c in picks), key=lambda g: g.indices)


def projection(f: CoeffVector, A: Iterable[int]) -> CoeffVector:
    A = _indices(A)
    _check_range(f.dimension, A)
    keep = set(A)
    return CoeffVector(f.dimension, [(n, v) for n, v in f.entries if n in keep])


def partial_sum(f: CoeffVector, k: int) -> CoeffVector:
    if not 0 <= k <= f.dimension:
        raise InputError(f"k = {k} outside 0..{f.dimension}")
    return CoeffVector(f.dimension, [(n, v) for n, v in f.entries if n <= k])


def indicator(dimension: int, A: Iterable[int], signs: SignPattern | None = None) -> CoeffVector:
    A = _indices(A)
    _check_range(dimension, A)
    if signs is None:
        return CoeffVector(dimension, [(n, 1.0) for n in A])
    if signs.indices != A:
        raise InputError("sign pattern is not defined on A")
    return CoeffVector(dimension, signs.assignment)


def greedy_sum(f: CoeffVector, m: int) -> CoeffVector:
    """``G_m(f)`` for the lexicographically smallest greedy ordering."""
    (A,) = greedy_sets(f, m, Ties.FIRST)
    return projection(f, A)


def greedy_sums(f: CoeffVector, m: int) -> list[CoeffVector]:
    return [projection(f, A) for A in greedy_sets(f, m, Ties.ALL)]


def _sgn(v):
    return v / abs(v)


def _check_truncation_args(f: CoeffVector, A) -> tuple:
    A = _indices(A)
    _check_range(f.dimension, A)
    if not is_greedy_set(f, A):
        raise ContractError(f"{list(A)} is not a greedy set of f")
    if not set(A) <= f.support:
        raise ContractError("truncations need A inside supp(f); padded greedy sets are not allowed")
    return A


def restricted_truncation(f: CoeffVector, A: Iterable[int]) -> CoeffVector:
    """``min_{n in A} |e_n^*(f)|`` times the sign indicator of ``f`` on ``A``."""
    A = _check_truncation_args(f, A)
    if not A:
        return CoeffVector.zero(f.dimension)
    level = min(abs(f.coeff(n)) for n in A)
    return CoeffVector(f.dimension, [(n, level * _sgn(f.coeff(n))) for n in A])


def truncation(f: CoeffVector, A: Iterable[int]) -> CoeffVector:
    A = _check_truncation_args(f, A)
    rest = [n for n in range(1, f.dimension + 1) if n not in set(A)]
    return restricted_truncation(f, A) + projection(f, rest)
