"""Core representation of discrete influence diagrams.

Variables take finitely many labelled outcomes.  All numeric tables are
dense numpy arrays indexed positionally, with one axis per parent in
declared order and the node's own outcome axis last.  Diagrams are
immutable once built and safe to share; mutable session state (installed
decision behaviour, query counters) lives on the compiled network instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Iterator, Mapping, Sequence

import numpy as np

ROW_SUM_TOL = 1e-9


class DiagramError(Exception):
    """A diagram (or part of one) could not be constructed."""


@dataclass(frozen=True)
class Variable:
    """A named discrete variable with an ordered outcome domain."""

    name: str
    domain: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", tuple(self.domain))
        if not self.domain:
            raise DiagramError(f"variable {self.name!r} has an empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise DiagramError(f"variable {self.name!r} has duplicate outcome labels")

    @property
    def size(self) -> int:
        return len(self.domain)

    def index_of(self, label: str) -> int:
        try:
            return self.domain.index(label)
        except ValueError:
            raise KeyError(f"{label!r} is not an outcome of {self.name!r}") from None


@dataclass(frozen=True)
class ChanceNode:
    """A random variable with a conditional probability table.

    ``cpt`` has shape ``(*parent sizes, variable size)`` with parent axes
    in declared parent order; each row along the last axis is meant to be
    a probability distribution (checked by :func:`validate_diagram`).
    """

    variable: Variable
    parents: tuple[str, ...]
    cpt: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "cpt", np.asarray(self.cpt, dtype=np.float64))

    @property
    def name(self) -> str:
        return self.variable.name


@dataclass(frozen=True)
class DecisionNode:
    """A decision with its ordered information predecessors.

    The information predecessors are exactly as declared; missing
    no-forgetting arcs are reported as validator warnings, not errors.
    """

    variable: Variable
    info_predecessors: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "info_predecessors", tuple(self.info_predecessors))

    @property
    def name(self) -> str:
        return self.variable.name


@dataclass(frozen=True)
class ValueNode:
    """The single value node: a real-valued table over its parents."""

    name: str
    parents: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))


@dataclass(frozen=True)
class Context:
    """A partial assignment of outcome indices to variables.

    Bindings are stored canonically (sorted by variable name) so two
    contexts binding the same assignments compare equal regardless of the
    order they were accumulated in.
    """

    items: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        canon = tuple(sorted(self.items))
        names = [name for name, _ in canon]
        if len(set(names)) != len(names):
            raise DiagramError(f"context binds a variable twice: {names}")
        object.__setattr__(self, "items", canon)

    def bind(self, name: str, index: int) -> "Context":
        if name in self:
            raise DiagramError(f"context already binds {name!r}")
        return Context(self.items + ((name, int(index)),))

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.items)

    def __len__(self) -> int:
        return len(self.items)

    def get(self, name: str) -> int | None:
        for n, i in self.items:
            if n == name:
                return i
        return None

    def as_dict(self) -> dict[str, int]:
        return dict(self.items)


#: A full assignment to a decision's information predecessors,
#: as a mapping from variable name to outcome index.
InformationState = Mapping[str, int]


class InfluenceDiagram:
    """A DAG of chance nodes, temporally ordered decisions, and one value node."""

    def __init__(
        self,
        chance_nodes: Sequence[ChanceNode],
        decision_nodes: Sequence[DecisionNode],
        value_node: ValueNode,
        name: str = "diagram",
    ) -> None:
        self.name = name
        self.chance_nodes = tuple(chance_nodes)
        self.decision_nodes = tuple(decision_nodes)
        self.value_node = value_node

        names = [c.name for c in self.chance_nodes]
        names += [d.name for d in self.decision_nodes]
        names.append(value_node.name)
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise DiagramError(f"duplicate node name(s): {sorted(dupes)}")

        self.variables: dict[str, Variable] = {}
        for c in self.chance_nodes:
            self.variables[c.name] = c.variable
        for d in self.decision_nodes:
            self.variables[d.name] = d.variable

        self._chance_by_name = {c.name: c for c in self.chance_nodes}
        self._decision_index = {d.name: k for k, d in enumerate(self.decision_nodes)}

        known = set(self.variables) | {value_node.name}
        for node_name, parents in self._parent_lists():
            for p in parents:
                if p not in known:
                    raise DiagramError(f"node {node_name!r} references unknown parent {p!r}")

    def _parent_lists(self) -> Iterator[tuple[str, tuple[str, ...]]]:
        for c in self.chance_nodes:
            yield c.name, c.parents
        for d in self.decision_nodes:
            yield d.name, d.info_predecessors
        yield self.value_node.name, self.value_node.parents

    @property
    def n_decisions(self) -> int:
        return len(self.decision_nodes)

    def chance(self, name: str) -> ChanceNode:
        return self._chance_by_name[name]

    def is_decision(self, name: str) -> bool:
        return name in self._decision_index

    def decision_index(self, name: str) -> int:
        return self._decision_index[name]

    def domain_sizes(self, names: Sequence[str]) -> tuple[int, ...]:
        return tuple(self.variables[n].size for n in names)

    def arcs(self, temporal: bool = False) -> dict[str, set[str]]:
        """Predecessor sets for every node.  With ``temporal`` the implicit
        ordering arcs between consecutive decisions are included."""
        preds: dict[str, set[str]] = {n: set() for n, _ in self._parent_lists()}
        for node_name, parents in self._parent_lists():
            preds[node_name].update(parents)
        if temporal:
            for earlier, later in itertools.pairwise(self.decision_nodes):
                preds[later.name].add(earlier.name)
        return preds


def information_predecessors(diagram: InfluenceDiagram, k: int) -> tuple[str, ...]:
    """The declared information predecessors of decision ``k`` (0-based)."""
    if not 0 <= k < diagram.n_decisions:
        raise IndexError(f"decision index {k} out of range [0, {diagram.n_decisions})")
    return diagram.decision_nodes[k].info_predecessors


def iter_assignments(sizes: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All joint outcome-index tuples over the given domain sizes, row-major."""
    return itertools.product(*(range(s) for s in sizes))


@dataclass
class ValidationReport:
    """Findings from :func:`validate_diagram`: hard violations plus advisories."""

    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        lines = [f"violation: {v}" for v in self.violations]
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines) if lines else "ok"


class ValidationError(DiagramError):
    """Raised by operations that require a well-formed diagram."""

    def __init__(self, report: ValidationReport) -> None:
        super().__init__(str(report))
        self.report = report


def _row_label(diagram: InfluenceDiagram, parents: tuple[str, ...], idx: tuple[int, ...]) -> str:
    if not parents:
        return "()"
    labels = [diagram.variables[p].domain[i] for p, i in zip(parents, idx)]
    return "(" + ", ".join(f"{p}={l}" for p, l in zip(parents, labels)) + ")"


def validate_diagram(diagram: InfluenceDiagram) -> ValidationReport:
    """Check every structural and numeric invariant, reporting all findings.

    An empty ``violations`` list means the diagram is well-formed.  Missing
    no-forgetting arcs are downgraded to warnings so that deliberately
    small test diagrams stay legal.
    """
    report = ValidationReport()
    value_name = diagram.value_node.name

    # Tables: shape, range, normalization.
    for c in diagram.chance_nodes:
        if any(p == value_name for p in c.parents):
            continue  # shape is unknowable; the graph check below reports it
        expected = diagram.domain_sizes(c.parents) + (c.variable.size,)
        if c.cpt.shape != expected:
            report.violations.append(
                f"malformed table at {c.name!r}: expected shape {expected}, got {c.cpt.shape}"
            )
            continue
        if not np.all(np.isfinite(c.cpt)):
            report.violations.append(f"non-finite entry in table of {c.name!r}")
            continue
        if np.any(c.cpt < 0.0) or np.any(c.cpt > 1.0):
            report.violations.append(f"probability outside [0,1] in table of {c.name!r}")
        sums = c.cpt.sum(axis=-1)
        bad = np.argwhere(np.abs(sums - 1.0) > ROW_SUM_TOL)
        for idx in bad:
            row = _row_label(diagram, c.parents, tuple(idx))
            report.violations.append(f"row not normalized at {c.name!r}, row {row}: sums to {sums[tuple(idx)]:.12g}")

    v = diagram.value_node
    if not any(p == value_name for p in v.parents):
        expected_v = diagram.domain_sizes(v.parents)
        if v.values.shape != expected_v:
            report.violations.append(
                f"malformed table at value node {v.name!r}: expected shape {expected_v}, got {v.values.shape}"
            )
        elif not np.all(np.isfinite(v.values)):
            report.violations.append(f"non-finite entry in value table of {v.name!r}")

    # The value node must be a sink.
    for node_name, parents in diagram._parent_lists():
        if node_name != value_name and value_name in parents:
            report.violations.append(f"value node has child {node_name!r}")

    # Decisions: distinct predecessors.
    for d in diagram.decision_nodes:
        if len(set(d.info_predecessors)) != len(d.info_predecessors):
            report.violations.append(f"decision {d.name!r} lists a duplicate information predecessor")

    # Graph: acyclic, and decision order consistent with the DAG.
    def _acyclic(preds: dict[str, set[str]]) -> list[str] | None:
        try:
            TopologicalSorter(preds).static_order()
            return None
        except CycleError as e:
            return list(e.args[1])

    cycle = _acyclic(diagram.arcs(temporal=False))
    if cycle is not None:
        report.violations.append(f"cycle in diagram: {' -> '.join(cycle)}")
    else:
        cycle = _acyclic(diagram.arcs(temporal=True))
        if cycle is not None:
            report.violations.append(
                f"decision order inconsistent with DAG: {' -> '.join(cycle)}"
            )

    # No-forgetting advisory: each decision should see all earlier
    # observations and decisions.
    for j in range(1, diagram.n_decisions):
        earlier = diagram.decision_nodes[j - 1]
        later = diagram.decision_nodes[j]
        seen = set(later.info_predecessors)
        missing = [p for p in earlier.info_predecessors if p not in seen]
        if earlier.name not in seen:
            missing.append(earlier.name)
        if missing:
            report.warnings.append(
                f"decision {later.name!r} forgets {missing} observed by {earlier.name!r}"
            )

    return report
