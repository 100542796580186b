"""Core data model: inputs, treatments, exact per-treatment joint distributions.

An experiment has n inputs, each with a finite value set, one random output
per input with a finite outcome set, and a nonempty set of allowable
treatments (index tuples choosing one value per input).  A dataset attaches
to each treatment an exact joint distribution over outcome tuples.  All
probabilities are `fractions.Fraction`; floating point never enters a verdict.

Value and outcome indices are 1-based throughout.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import comb, prod
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import SizeGuardError

Treatment = tuple[int, ...]
OutcomeTuple = tuple[int, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def coerce_prob(value) -> Fraction:
    """Exact conversion; floats are rejected to keep every verdict exact."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(
        f"probabilities must be Fraction, int or exact string, got {type(value).__name__}"
    )


@dataclass(frozen=True)
class Input:
    """One input: a label and its ordered value labels (size k >= 1)."""

    label: str
    values: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(str(v) for v in self.values))
        if not self.values:
            raise ValueError(f"input {self.label!r} has no values")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"input {self.label!r} has duplicate value labels")

    @property
    def size(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Output:
    """One random output: a label and its ordered outcome labels (size m >= 1)."""

    label: str
    values: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(str(v) for v in self.values))
        if not self.values:
            raise ValueError(f"output {self.label!r} has no outcomes")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"output {self.label!r} has duplicate outcome labels")

    @property
    def size(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ExperimentDesign:
    """Inputs, outputs and the allowable treatment set.

    Treatments are stored in sorted order; that order is the canonical one
    used for flat vector indexing elsewhere.
    """

    inputs: tuple[Input, ...]
    outputs: tuple[Output, ...]
    treatments: tuple[Treatment, ...]
    _treatment_set: frozenset[Treatment] = field(
        init=False, repr=False, compare=False, default=frozenset()
    )

    def __post_init__(self):
        inputs = tuple(self.inputs)
        outputs = tuple(self.outputs)
        if not inputs:
            raise ValueError("design needs at least one input")
        if len(outputs) != len(inputs):
            raise ValueError("need exactly one output per input")
        if len({inp.label for inp in inputs}) != len(inputs):
            raise ValueError("duplicate input labels")
        if len({out.label for out in outputs}) != len(outputs):
            raise ValueError("duplicate output labels")
        treatments = []
        for tr in self.treatments:
            tr = tuple(int(j) for j in tr)
            if len(tr) != len(inputs):
                raise ValueError(f"treatment {tr} has wrong arity")
            for lam, j in enumerate(tr, start=1):
                if not 1 <= j <= inputs[lam - 1].size:
                    raise ValueError(f"treatment {tr} selects invalid value for input {lam}")
            treatments.append(tr)
        if not treatments:
            raise ValueError("treatment set must be nonempty")
        if len(set(treatments)) != len(treatments):
            raise ValueError("duplicate treatments")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "treatments", tuple(sorted(treatments)))
        object.__setattr__(self, "_treatment_set", frozenset(treatments))

    @property
    def n(self) -> int:
        return len(self.inputs)

    @property
    def input_sizes(self) -> tuple[int, ...]:
        return tuple(inp.size for inp in self.inputs)

    @property
    def outcome_sizes(self) -> tuple[int, ...]:
        return tuple(out.size for out in self.outputs)

    @property
    def is_factorial(self) -> bool:
        return len(self.treatments) == prod(self.input_sizes)

    def has_treatment(self, treatment) -> bool:
        return tuple(treatment) in self._treatment_set

    def all_outcomes(self) -> Iterator[OutcomeTuple]:
        """All outcome tuples in lexicographic order (first coordinate slowest)."""
        return product(*(range(1, m + 1) for m in self.outcome_sizes))

    def input_points(self) -> list[tuple[int, int]]:
        """All (input position, value index) pairs, 1-based."""
        return [(lam, w) for lam in range(1, self.n + 1) for w in range(1, self.inputs[lam - 1].size + 1)]


def make_design(
    input_sizes: Sequence[int],
    outcome_sizes: Sequence[int],
    treatments: Sequence[Sequence[int]] | None = None,
) -> ExperimentDesign:
    """Convenience constructor with generic labels; treatments default to the
    full factorial set."""
    if len(input_sizes) != len(outcome_sizes):
        raise ValueError("input_sizes and outcome_sizes must have equal length")
    inputs = tuple(
        Input(f"alpha{lam}", tuple(str(w) for w in range(1, k + 1)))
        for lam, k in enumerate(input_sizes, start=1)
    )
    outputs = tuple(
        Output(f"A{lam}", tuple(str(a) for a in range(1, m + 1)))
        for lam, m in enumerate(outcome_sizes, start=1)
    )
    if treatments is None:
        treatments = tuple(product(*(range(1, k + 1) for k in input_sizes)))
    return ExperimentDesign(inputs, outputs, tuple(tuple(t) for t in treatments))


@dataclass(frozen=True)
class Dataset:
    """A design plus one exact joint distribution table per treatment.

    Tables are normalized on construction: keys become int tuples, values
    exact Fractions, zero entries are dropped (absent keys mean probability
    zero).  No validity checking happens here; `validate_dataset` reports
    breaches without ever aborting.
    """

    design: ExperimentDesign
    tables: Mapping[Treatment, Mapping[OutcomeTuple, Fraction]]

    def __post_init__(self):
        norm: dict[Treatment, dict[OutcomeTuple, Fraction]] = {}
        for tr, table in self.tables.items():
            key = tuple(int(j) for j in tr)
            row: dict[OutcomeTuple, Fraction] = {}
            for outcome, p in table.items():
                p = coerce_prob(p)
                if p != 0:
                    row[tuple(int(a) for a in outcome)] = p
            norm[key] = row
        object.__setattr__(self, "tables", norm)

    def table(self, treatment) -> Mapping[OutcomeTuple, Fraction]:
        tr = tuple(treatment)
        if tr not in self.tables:
            raise ValueError(f"no table for treatment {tr}")
        return self.tables[tr]

    def prob(self, treatment, outcome) -> Fraction:
        return self.table(treatment).get(tuple(outcome), ZERO)


@dataclass(frozen=True)
class ValidationBreach:
    kind: str
    message: str
    treatment: Treatment | None = None


@dataclass(frozen=True)
class ValidationReport:
    breaches: tuple[ValidationBreach, ...]

    @property
    def valid(self) -> bool:
        return not self.breaches

    def summary(self) -> str:
        if self.valid:
            return "valid"
        return "; ".join(b.message for b in self.breaches)


def validate_dataset(dataset: Dataset) -> ValidationReport:
    """Report every invariant breach; never raises.

    Checked: a table exists for every treatment of the design and for no
    other, outcome keys have the right arity and range, probabilities are
    nonnegative, each table's mass is exactly 1.
    """
    design = dataset.design
    breaches: list[ValidationBreach] = []
    for tr in design.treatments:
        if tr not in dataset.tables:
            breaches.append(
                ValidationBreach("missing-table", f"no table for treatment {tr}", tr)
            )
    sizes = design.outcome_sizes
    for tr, table in dataset.tables.items():
        if not design.has_treatment(tr):
            breaches.append(
                ValidationBreach("unknown-treatment", f"treatment {tr} not in design", tr)
            )
            continue
        mass = ZERO
        for outcome, p in table.items():
            if len(outcome) != design.n:
                breaches.append(
                    ValidationBreach(
                        "bad-outcome", f"outcome {outcome} has wrong arity under {tr}", tr
                    )
                )
                continue
            if any(not 1 <= a <= m for a, m in zip(outcome, sizes)):
                breaches.append(
                    ValidationBreach(
                        "bad-outcome", f"outcome {outcome} out of range under {tr}", tr
                    )
                )
            if p < 0:
                breaches.append(
                    ValidationBreach(
                        "negative-probability", f"negative probability {p} at {outcome} under {tr}", tr
                    )
                )
            mass += p
        if mass != 1:
            diff = ONE - mass
            word = "deficit" if diff > 0 else "excess"
            breaches.append(
                ValidationBreach(
                    "mass", f"mass != 1 under {tr}, {word} {abs(diff)}", tr
                )
            )
    return ValidationReport(tuple(breaches))


def _subset_key(outcome: OutcomeTuple, lam_list: Sequence[int]) -> OutcomeTuple:
    return tuple(outcome[lam - 1] for lam in lam_list)


def marginal(dataset: Dataset, treatment, subset: Iterable[int]) -> dict[OutcomeTuple, Fraction]:
    """Exact marginal of one treatment's table over a nonempty subset of inputs.

    `subset` holds 1-based input positions; keys of the result are outcome
    sub-tuples ordered by ascending input position.
    """
    tr = tuple(treatment)
    if not dataset.design.has_treatment(tr):
        raise ValueError(f"unknown treatment {tr}")
    lam_list = sorted(set(int(l) for l in subset))
    if not lam_list:
        raise ValueError("subset must be nonempty")
    if lam_list[0] < 1 or lam_list[-1] > dataset.design.n:
        raise ValueError(f"subset {lam_list} out of range")
    out: dict[OutcomeTuple, Fraction] = defaultdict(lambda: ZERO)
    for outcome, p in dataset.table(tr).items():
        out[_subset_key(outcome, lam_list)] += p
    return {k: v for k, v in out.items() if v != 0}


@dataclass(frozen=True)
class MarginalViolation:
    subset: tuple[int, ...]
    treatment_a: Treatment
    treatment_b: Treatment
    discrepancy: Fraction


@dataclass(frozen=True)
class MarginalReport:
    violations: tuple[MarginalViolation, ...]
    comparisons: int
    max_subset_size: int

    @property
    def passed(self) -> bool:
        return not self.violations


def check_marginal_selectivity(
    dataset: Dataset,
    max_subset_size: int | None = None,
    comparison_guard: int = 10**6,
    force: bool = False,
) -> MarginalReport:
    """Compare, for every nonempty proper input subset up to `max_subset_size`
    and every pair of treatments agreeing on it, the exact subset marginals.

    Default `max_subset_size` is n-1 (all proper subsets).  If the number of
    (subset, pair) comparisons exceeds `comparison_guard`, raises
    SizeGuardError unless `force=True`.
    """
    design = dataset.design
    n = design.n
    if max_subset_size is None:
        max_subset_size = max(1, n - 1)
    if max_subset_size < 1:
        raise ValueError("max_subset_size must be >= 1")
    sizes = range(1, min(max_subset_size, n - 1) + 1)

    groups_per_subset: list[tuple[tuple[int, ...], list[list[Treatment]]]] = []
    total = 0
    for size in sizes:
        for lam_list in combinations(range(1, n + 1), size):
            groups: dict[tuple[int, ...], list[Treatment]] = defaultdict(list)
            for tr in design.treatments:
                groups[_subset_key(tr, lam_list)].append(tr)
            multi = [g for g in groups.values() if len(g) > 1]
            total += sum(comb(len(g), 2) for g in multi)
            if multi:
                groups_per_subset.append((lam_list, multi))
    if total > comparison_guard and not force:
        raise SizeGuardError(
            f"marginal-selectivity check needs {total} comparisons "
            f"(guard {comparison_guard}); pass force=True or raise the guard "
            f"(CLI: --marginal-guard) to run anyway"
        )

    violations: list[MarginalViolation] = []
    for lam_list, groups in groups_per_subset:
        for group in groups:
            margs = {tr: marginal(dataset, tr, lam_list) for tr in group}
            for ta, tb in combinations(group, 2):
                ma, mb = margs[ta], margs[tb]
                worst = ZERO
                for key in set(ma) | set(mb):
                    d = abs(ma.get(key, ZERO) - mb.get(key, ZERO))
                    if d > worst:
                        worst = d
                if worst != 0:
                    violations.append(MarginalViolation(lam_list, ta, tb, worst))
    return MarginalReport(tuple(violations), total, max_subset_size)


def transform_outputs(
    dataset: Dataset,
    maps: Mapping[tuple[int, int], Mapping[int, int]],
    new_outputs: Sequence[Output] | None = None,
) -> Dataset:
    """Push every table forward through input-value-specific outcome maps.

    `maps[(lam, w)]` recodes outcomes of output lam when input lam has value w;
    it must be total on 1..m_lam.  Missing (lam, w) keys mean identity.  Under
    treatment phi the map applied to coordinate lam is maps[(lam, phi(lam))].
    Probabilities are preserved exactly by summing over preimages.
    """
    design = dataset.design
    out_sizes = design.outcome_sizes
    new_out = tuple(new_outputs) if new_outputs is not None else design.outputs
    if len(new_out) != design.n:
        raise ValueError("need one output per input")
    new_sizes = tuple(o.size for o in new_out)

    for (lam, w), mp in maps.items():
        if not 1 <= lam <= design.n or not 1 <= w <= design.inputs[lam - 1].size:
            raise ValueError(f"map key ({lam}, {w}) outside design")
        dom = set(mp)
        if dom != set(range(1, out_sizes[lam - 1] + 1)):
            raise ValueError(
                f"map for input {lam} value {w} must be total on 1..{out_sizes[lam - 1]}"
            )
        for tgt in mp.values():
            if not 1 <= int(tgt) <= new_sizes[lam - 1]:
                raise ValueError(
                    f"map for input {lam} value {w} sends an outcome to {tgt}, "
                    f"outside 1..{new_sizes[lam - 1]}; pass new_outputs to enlarge"
                )

    new_tables: dict[Treatment, dict[OutcomeTuple, Fraction]] = {}
    for tr, table in dataset.tables.items():
        per_coord = [maps.get((lam, tr[lam - 1])) for lam in range(1, design.n + 1)]
        row: dict[OutcomeTuple, Fraction] = defaultdict(lambda: ZERO)
        for outcome, p in table.items():
            image = tuple(
                mp[a] if mp is not None else a for mp, a in zip(per_coord, outcome)
            )
            row[image] += p
        new_tables[tr] = dict(row)
    new_design = ExperimentDesign(design.inputs, new_out, design.treatments)
    return Dataset(new_design, new_tables)
