"""Greedy-algorithm constants of finite-dimensional p-normed spaces.

Exhaustive grid estimators for the quasi-greedy, partially-greedy,
conservative and truncation constants of a basis, an inequality ledger
relating them, and the partial-sum renorming ``||.||_a``.
"""

__version__ = "0.1.0"
REPORT_SCHEMA_VERSION = 1
