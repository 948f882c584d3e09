"""Dense factors over discrete variables and exact variable elimination."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np


@dataclass
class Factor:
    """A nonnegative table over an ordered scope of variables.

    ``table.shape`` matches the scope's domain sizes axis by axis.  A
    factor with empty scope is a scalar (0-d table).
    """

    scope: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self) -> None:
        self.scope = tuple(self.scope)
        self.table = np.asarray(self.table, dtype=np.float64)
        if self.table.ndim != len(self.scope):
            raise ValueError(
                f"table rank {self.table.ndim} does not match scope {self.scope}"
            )

    def restrict(self, evidence: Mapping[str, int]) -> "Factor":
        """Slice out evidence variables, dropping them from the scope."""
        if not any(v in evidence for v in self.scope):
            return self
        indexer = tuple(evidence.get(v, slice(None)) for v in self.scope)
        scope = tuple(v for v in self.scope if v not in evidence)
        return Factor(scope, self.table[indexer])

    def marginalize(self, var: str) -> "Factor":
        axis = self.scope.index(var)
        scope = self.scope[:axis] + self.scope[axis + 1 :]
        return Factor(scope, self.table.sum(axis=axis))


def _aligned(table: np.ndarray, scope: Sequence[str], out_scope: Sequence[str]) -> np.ndarray:
    """View ``table`` broadcastable against an array laid out as ``out_scope``."""
    missing = [v for v in out_scope if v not in scope]
    t = table.reshape(table.shape + (1,) * len(missing))
    current = list(scope) + missing
    perm = [current.index(v) for v in out_scope]
    return t.transpose(perm)


def multiply(a: Factor, b: Factor) -> Factor:
    out_scope = a.scope + tuple(v for v in b.scope if v not in a.scope)
    ta = _aligned(a.table, a.scope, out_scope)
    tb = _aligned(b.table, b.scope, out_scope)
    return Factor(out_scope, ta * tb)


def product(factors: Iterable[Factor]) -> Factor:
    result: Factor | None = None
    for f in factors:
        result = f if result is None else multiply(result, f)
    if result is None:
        return Factor((), np.ones(()))
    return result


def min_degree_order(
    scopes: Sequence[Sequence[str]],
    to_eliminate: Sequence[str],
    tiebreak: Sequence[str],
) -> list[str]:
    """Greedy min-degree elimination order over the factor interaction graph.

    Ties are broken by position in ``tiebreak`` so the order, and hence
    every downstream float, is reproducible run to run.
    """
    rank = {v: i for i, v in enumerate(tiebreak)}
    neighbors: dict[str, set[str]] = {v: set() for v in to_eliminate}
    cliques = [set(s) for s in scopes]
    for clique in cliques:
        for v in clique:
            if v in neighbors:
                neighbors[v] |= clique - {v}
    order = []
    remaining = set(to_eliminate)
    while remaining:
        best = min(remaining, key=lambda v: (len(neighbors[v] & remaining), rank.get(v, 0), v))
        order.append(best)
        remaining.remove(best)
        clique = neighbors[best] & remaining
        for v in clique:
            neighbors[v] |= clique - {v}
    return order


def eliminate(
    factors: Sequence[Factor],
    evidence: Mapping[str, int],
    keep: Sequence[str],
    order_mode: str = "min_degree",
    declared_order: Sequence[str] = (),
) -> Factor:
    """Sum out every variable not kept or fixed by evidence.

    Returns the unnormalized factor over ``keep`` (scalar for empty
    ``keep``); its total is the probability of the evidence.
    """
    live = [f.restrict(evidence) for f in factors]
    present: list[str] = []
    seen: set[str] = set()
    for f in live:
        for v in f.scope:
            if v not in seen:
                seen.add(v)
                present.append(v)
    to_eliminate = [v for v in present if v not in keep]
    if order_mode == "declared":
        order = [v for v in declared_order if v in to_eliminate]
        order += [v for v in to_eliminate if v not in order]
    elif order_mode == "min_degree":
        order = min_degree_order([f.scope for f in live], to_eliminate, declared_order)
    else:
        raise ValueError(f"unknown elimination order mode {order_mode!r}")

    for var in order:
        related = [f for f in live if var in f.scope]
        if not related:
            continue
        live = [f for f in live if var not in f.scope]
        live.append(product(related).marginalize(var))

    result = product(live)
    if set(result.scope) != set(keep):
        raise RuntimeError(f"elimination left scope {result.scope}, wanted {keep}")
    if tuple(result.scope) != tuple(keep):
        perm = [result.scope.index(v) for v in keep]
        result = Factor(tuple(keep), result.table.transpose(perm))
    return result
