"""Analytic MAX-2-SAT class: 2-literal clauses, every variable in a fixed number of clauses.

Each clause is false with probability 1/4 under a uniform random
assignment, independently, so the cost (number of false clauses) is
binomial.  Flipping one variable touches exactly ``occurrences_per_var``
clauses: the false ones among them all become true, and each true one
becomes false with probability 1/3 (of the three satisfying assignments of
a 2-clause, one is broken by flipping a given variable).  The number of
false clauses among the touched ones is hypergeometric.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from ..core import CostDistribution, CostRange, NeighbourKernel


@dataclass(frozen=True)
class Sat2ClassSpec:
    num_vars: int = 50
    num_clauses: int = 100
    occurrences_per_var: int = 4

    def __post_init__(self) -> None:
        if self.num_vars * self.occurrences_per_var != 2 * self.num_clauses:
            raise ValueError("num_vars * occurrences_per_var must equal 2 * num_clauses")
        if self.occurrences_per_var > self.num_clauses:
            raise ValueError("a variable cannot appear in more clauses than exist")


CLAUSE_FALSE = Fraction(1, 4)
BREAK_TRUE = Fraction(1, 3)


def sat2_probabilities_exact(spec: Sat2ClassSpec = Sat2ClassSpec()) -> list[Fraction]:
    m = spec.num_clauses
    return [comb(m, c) * CLAUSE_FALSE**c * (1 - CLAUSE_FALSE) ** (m - c) for c in range(m + 1)]


def sat2_distribution(spec: Sat2ClassSpec = Sat2ClassSpec()) -> CostDistribution:
    p = np.array([float(x) for x in sat2_probabilities_exact(spec)])
    return CostDistribution(CostRange(0, spec.num_clauses), p / p.sum())


def sat2_transition_exact(spec: Sat2ClassSpec, c: int) -> dict[int, Fraction]:
    """Exact ``pn(c, .)`` as a sparse map from new cost to probability."""
    m, occ = spec.num_clauses, spec.occurrences_per_var
    total = comb(m, occ)
    row: dict[int, Fraction] = {}
    for f in range(occ + 1):
        ways = comb(c, f) * comb(m - c, occ - f)
        if ways == 0:
            continue
        hyper = Fraction(ways, total)
        true_touched = occ - f
        for g in range(true_touched + 1):
            broke = comb(true_touched, g) * BREAK_TRUE**g * (1 - BREAK_TRUE) ** (true_touched - g)
            row[c - f + g] = row.get(c - f + g, Fraction(0)) + hyper * broke
    return row


def sat2_kernel(spec: Sat2ClassSpec = Sat2ClassSpec()) -> NeighbourKernel:
    m = spec.num_clauses
    pn = np.zeros((m + 1, m + 1))
    for c in range(m + 1):
        for c2, prob in sat2_transition_exact(spec, c).items():
            pn[c, c2] = float(prob)
    return NeighbourKernel(CostRange(0, m), spec.num_vars, pn, np.ones(m + 1, bool))
