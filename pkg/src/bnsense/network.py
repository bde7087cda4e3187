"""Data model and validation for discrete diagnostic Bayesian networks.

A network holds one hypothesis variable (its states are the competing
diagnoses, exactly one of which is assumed to hold) and any number of
finding variables. Every variable owns a single conditional table; arcs
are implied by the tables' parent lists. Networks are immutable once
built, so they can be queried concurrently and shared across replicated
experiments without copying.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

HYPOTHESIS = "hypothesis"
FINDING = "finding"

#: A table row counts as normalized when |sum - 1| is within this bound.
ROW_SUM_TOL = 1e-9

# Violation kinds reported by validate().
CYCLE = "CYCLE"
ROW_NOT_NORMALIZED = "ROW_NOT_NORMALIZED"
ENTRY_OUT_OF_RANGE = "ENTRY_OUT_OF_RANGE"
BAD_ROW_COUNT = "BAD_ROW_COUNT"
BAD_ROW_WIDTH = "BAD_ROW_WIDTH"
MISSING_HYPOTHESIS = "MISSING_HYPOTHESIS"
DUPLICATE_HYPOTHESIS = "DUPLICATE_HYPOTHESIS"
HYPOTHESIS_HAS_PARENTS = "HYPOTHESIS_HAS_PARENTS"
DANGLING_PARENT = "DANGLING_PARENT"
DUPLICATE_PARENT = "DUPLICATE_PARENT"
MISSING_TABLE = "MISSING_TABLE"
DUPLICATE_TABLE = "DUPLICATE_TABLE"
UNKNOWN_TABLE_OWNER = "UNKNOWN_TABLE_OWNER"
DUPLICATE_VARIABLE = "DUPLICATE_VARIABLE"
DUPLICATE_STATE = "DUPLICATE_STATE"
TOO_FEW_STATES = "TOO_FEW_STATES"
BAD_KIND = "BAD_KIND"

#: Evidence maps finding-variable names to observed state labels.
Evidence = Mapping[str, str]


def mixed_radix_index(digits: Sequence[int], sizes: Sequence[int]) -> int:
    """Encode per-parent state indices into a row index.

    The first digit is the most significant, i.e. rows iterate the last
    parent fastest.
    """
    index = 0
    for digit, size in zip(digits, sizes):
        index = index * size + digit
    return index


def mixed_radix_digits(index: int, sizes: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`mixed_radix_index`."""
    digits = [0] * len(sizes)
    for pos in range(len(sizes) - 1, -1, -1):
        digits[pos] = index % sizes[pos]
        index //= sizes[pos]
    return tuple(digits)


@dataclass(frozen=True)
class Variable:
    """A named discrete variable with ordered state labels."""

    name: str
    states: tuple[str, ...]
    kind: str = FINDING

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def n_states(self) -> int:
        return len(self.states)

    def state_index(self, label: str) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            raise KeyError(f"variable {self.name!r} has no state {label!r}") from None


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """Conditional distributions of one variable, one row per parent configuration.

    Row ``r`` holds P(variable | parents), where ``r`` is the mixed-radix
    encoding of the parents' state indices (first declared parent most
    significant). A parentless table has a single row; the hypothesis
    variable's single row is the prior over diagnoses.
    """

    variable: str
    parents: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        rows = np.array(self.rows, dtype=float, copy=True)
        if rows.ndim != 2:
            raise ValueError(
                f"table for {self.variable!r} must be a 2-d matrix of rows"
            )
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n_rows(self) -> int:
        return int(self.rows.shape[0])


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by validate(). Data, not an exception."""

    kind: str
    variable: str | None
    detail: str

    def __str__(self) -> str:
        where = f" [{self.variable}]" if self.variable else ""
        return f"{self.kind}{where}: {self.detail}"


@dataclass(frozen=True, eq=False)
class Distribution:
    """A probability distribution over one variable's states."""

    variable: str
    states: tuple[str, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        probs = np.array(self.probabilities, dtype=float, copy=True)
        probs.setflags(write=False)
        object.__setattr__(self, "probabilities", probs)

    def probability(self, label: str) -> float:
        return float(self.probabilities[self.states.index(label)])


@dataclass(frozen=True, eq=False)
class Network:
    """An immutable diagnostic network: variables plus one table per variable."""

    variables: tuple[Variable, ...]
    tables: tuple[ConditionalTable, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "tables", tuple(self.tables))

    @cached_property
    def variables_by_name(self) -> dict[str, Variable]:
        return {v.name: v for v in self.variables}

    @cached_property
    def tables_by_variable(self) -> dict[str, ConditionalTable]:
        return {t.variable: t for t in self.tables}

    @cached_property
    def hypothesis(self) -> Variable:
        for v in self.variables:
            if v.kind == HYPOTHESIS:
                return v
        raise ValueError("network has no hypothesis variable")

    @cached_property
    def findings(self) -> tuple[Variable, ...]:
        return tuple(v for v in self.variables if v.kind != HYPOTHESIS)

    def variable(self, name: str) -> Variable:
        return self.variables_by_name[name]

    def table(self, name: str) -> ConditionalTable:
        return self.tables_by_variable[name]

    def prior(self) -> np.ndarray:
        """The hypothesis variable's single table row."""
        return self.tables_by_variable[self.hypothesis.name].rows[0]

    def parent_sizes(self, name: str) -> tuple[int, ...]:
        return tuple(
            self.variables_by_name[p].n_states for p in self.tables_by_variable[name].parents
        )

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        """Variable names ordered parents-before-children.

        Assumes a structurally valid network; raises ValueError on a cycle.
        """
        indegree = {v.name: 0 for v in self.variables}
        children: dict[str, list[str]] = {v.name: [] for v in self.variables}
        for t in self.tables:
            if t.variable not in indegree:
                continue
            for p in t.parents:
                if p in indegree:
                    children[p].append(t.variable)
                    indegree[t.variable] += 1
        ready = [v.name for v in self.variables if indegree[v.name] == 0]
        order: list[str] = []
        while ready:
            name = ready.pop(0)
            order.append(name)
            for child in children[name]:
                indegree[child] -= 1
                if indegree[child] == 0:
                    ready.append(child)
        if len(order) != len(self.variables):
            raise ValueError("parent references contain a cycle")
        return tuple(order)

    def replace_tables(self, new_tables: Mapping[str, ConditionalTable]) -> "Network":
        """A copy of this network with some variables' tables swapped out."""
        return Network(
            self.variables,
            tuple(new_tables.get(t.variable, t) for t in self.tables),
        )


def validate(net: Network) -> list[Violation]:
    """Check every network and table invariant; return all violations found.

    Total by design: never raises, and an empty report means the network
    satisfies every invariant.
    """
    violations: list[Violation] = []

    seen_names: set[str] = set()
    for v in net.variables:
        if v.name in seen_names:
            violations.append(
                Violation(DUPLICATE_VARIABLE, v.name, "variable name declared twice")
            )
        seen_names.add(v.name)
        if len(v.states) < 2:
            violations.append(
                Violation(TOO_FEW_STATES, v.name, f"{len(v.states)} state(s), need at least 2")
            )
        if len(set(v.states)) != len(v.states):
            violations.append(Violation(DUPLICATE_STATE, v.name, "repeated state label"))
        if v.kind not in (HYPOTHESIS, FINDING):
            violations.append(Violation(BAD_KIND, v.name, f"unknown kind {v.kind!r}"))

    hypotheses = [v.name for v in net.variables if v.kind == HYPOTHESIS]
    if not hypotheses:
        violations.append(
            Violation(MISSING_HYPOTHESIS, None, "no variable has kind 'hypothesis'")
        )
    elif len(hypotheses) > 1:
        violations.append(
            Violation(
                DUPLICATE_HYPOTHESIS, None, f"{len(hypotheses)} hypothesis variables: {hypotheses}"
            )
        )

    by_name = {v.name: v for v in net.variables}
    table_owners: list[str] = []
    for t in net.tables:
        if t.variable not in by_name:
            violations.append(
                Violation(UNKNOWN_TABLE_OWNER, t.variable, "table for undeclared variable")
            )
            continue
        if t.variable in table_owners:
            violations.append(Violation(DUPLICATE_TABLE, t.variable, "more than one table"))
        table_owners.append(t.variable)
    for v in net.variables:
        if v.name not in table_owners:
            violations.append(Violation(MISSING_TABLE, v.name, "no conditional table"))

    for t in net.tables:
        owner = by_name.get(t.variable)
        if owner is None:
            continue
        ok_parents = True
        for p in t.parents:
            if p not in by_name:
                violations.append(
                    Violation(DANGLING_PARENT, t.variable, f"unknown parent {p!r}")
                )
                ok_parents = False
        if len(set(t.parents)) != len(t.parents):
            violations.append(Violation(DUPLICATE_PARENT, t.variable, "repeated parent"))
            ok_parents = False
        if owner.kind == HYPOTHESIS and t.parents:
            violations.append(
                Violation(HYPOTHESIS_HAS_PARENTS, t.variable, "hypothesis variable must be parentless")
            )
        if ok_parents:
            expected = 1
            for p in t.parents:
                expected *= by_name[p].n_states
            if t.n_rows != expected:
                violations.append(
                    Violation(
                        BAD_ROW_COUNT,
                        t.variable,
                        f"{t.n_rows} rows, expected {expected} for parents {list(t.parents)}",
                    )
                )
        if t.rows.shape[1] != owner.n_states:
            violations.append(
                Violation(
                    BAD_ROW_WIDTH,
                    t.variable,
                    f"rows have {t.rows.shape[1]} entries, owner has {owner.n_states} states",
                )
            )
        for r in range(t.n_rows):
            row = t.rows[r]
            if not np.all((row >= 0.0) & (row <= 1.0)):
                violations.append(
                    Violation(ENTRY_OUT_OF_RANGE, t.variable, f"row {r} has entries outside [0, 1]")
                )
            total = float(row.sum())
            if not abs(total - 1.0) <= ROW_SUM_TOL:
                violations.append(
                    Violation(ROW_NOT_NORMALIZED, t.variable, f"row {r} sums to {total!r}")
                )

    # Cycle check over arcs between declared variables.
    indegree = {v.name: 0 for v in net.variables}
    children: dict[str, list[str]] = {v.name: [] for v in net.variables}
    for t in net.tables:
        if t.variable not in indegree:
            continue
        for p in set(t.parents):
            if p in indegree:
                children[p].append(t.variable)
                indegree[t.variable] += 1
    ready = [name for name, deg in indegree.items() if deg == 0]
    visited = 0
    while ready:
        name = ready.pop()
        visited += 1
        for child in children[name]:
            indegree[child] -= 1
            if indegree[child] == 0:
                ready.append(child)
    if visited != len(net.variables):
        stuck = sorted(name for name, deg in indegree.items() if deg > 0)
        violations.append(Violation(CYCLE, None, f"cyclic parent references among {stuck}"))

    return violations


def validate_evidence(net: Network, evidence: Evidence) -> None:
    """Raise ValueError unless the evidence is well formed for this network."""
    for name, label in evidence.items():
        var = net.variables_by_name.get(name)
        if var is None:
            raise ValueError(f"evidence names unknown variable {name!r}")
        if var.kind == HYPOTHESIS:
            raise ValueError(f"evidence may not assign the hypothesis variable {name!r}")
        if label not in var.states:
            raise ValueError(f"variable {name!r} has no state {label!r}")
