"""Linear feasibility test for selective influences.

The question "can a single hidden variable with deterministic responses per
input value reproduce every treatment's joint distribution?" becomes: does
MQ = P, Q >= 0 have a solution?  P stacks all observed probabilities, one
block per treatment (treatments in sorted order, outcome tuples lexicographic
within a block).  Q ranges over all deterministic assignments: one outcome
for every value of every input, mixed-radix indexed with input 1's first
value most significant.  M(r, c) = 1 exactly when column c's assignment
produces row r's outcomes under row r's treatment, so each column has one 1
per treatment.

A feasible witness converts into an explicit classical model (`Si2Model`)
whose forward simulation reproduces the dataset exactly; infeasibility comes
with a verified Farkas vector.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import prod
from typing import Sequence

from .errors import MarginalSelectivityError, SizeGuardError
from .experiment import (
    Dataset,
    ExperimentDesign,
    MarginalReport,
    MarginalViolation,
    OutcomeTuple,
    Treatment,
    ZERO,
    marginal,
    validate_dataset,
)
from .rational_lp import SparseMatrix, solve_equality_feasibility, verify_certificate

Assignment = tuple[int, ...]


def q_slot_offsets(design: ExperimentDesign) -> tuple[int, ...]:
    """Start position of each input's block of slots inside an assignment."""
    offs = []
    acc = 0
    for k in design.input_sizes:
        offs.append(acc)
        acc += k
    return tuple(offs)


def q_length(design: ExperimentDesign) -> int:
    return prod(m**k for m, k in zip(design.outcome_sizes, design.input_sizes))


def p_length(design: ExperimentDesign) -> int:
    return prod(design.outcome_sizes) * len(design.treatments)


@dataclass(frozen=True)
class PVector:
    """Flat vector of all observed probabilities with its index maps.

    Flat index = treatment block (sorted treatment order) * block size +
    lexicographic rank of the outcome tuple.
    """

    design: ExperimentDesign
    values: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))
        if len(self.values) != p_length(self.design):
            raise ValueError(
                f"P has length {len(self.values)}, design needs {p_length(self.design)}"
            )

    @property
    def block_size(self) -> int:
        return prod(self.design.outcome_sizes)

    def index_of(self, treatment, outcome) -> int:
        tr = tuple(treatment)
        block = self.design.treatments.index(tr)
        sizes = self.design.outcome_sizes
        pos = 0
        for a, m in zip(outcome, sizes):
            if not 1 <= a <= m:
                raise ValueError(f"outcome {tuple(outcome)} out of range")
            pos = pos * m + (a - 1)
        return block * self.block_size + pos

    def entry_at(self, flat: int) -> tuple[Treatment, OutcomeTuple]:
        if not 0 <= flat < len(self.values):
            raise ValueError("index out of range")
        block, pos = divmod(flat, self.block_size)
        sizes = self.design.outcome_sizes
        digits = []
        for m in reversed(sizes):
            pos, d = divmod(pos, m)
            digits.append(d + 1)
        return self.design.treatments[block], tuple(reversed(digits))


@dataclass(frozen=True)
class QVector:
    """Flat vector over deterministic assignments with its index maps.

    An assignment lists one outcome per (input, value) slot, slots ordered
    input 1 value 1, input 1 value 2, ..., input n value k_n.  The flat index
    is mixed radix with the first slot most significant.
    """

    design: ExperimentDesign
    values: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))
        if len(self.values) != q_length(self.design):
            raise ValueError(
                f"Q has length {len(self.values)}, design needs {q_length(self.design)}"
            )

    def slot_bases(self) -> tuple[int, ...]:
        return tuple(
            m
            for m, k in zip(self.design.outcome_sizes, self.design.input_sizes)
            for _ in range(k)
        )

    def index_of(self, assignment: Sequence[int]) -> int:
        bases = self.slot_bases()
        if len(assignment) != len(bases):
            raise ValueError("assignment has wrong number of slots")
        idx = 0
        for h, base in zip(assignment, bases):
            if not 1 <= h <= base:
                raise ValueError(f"assignment {tuple(assignment)} out of range")
            idx = idx * base + (h - 1)
        return idx

    def assignment_at(self, flat: int) -> Assignment:
        if not 0 <= flat < len(self.values):
            raise ValueError("index out of range")
        digits = []
        for base in reversed(self.slot_bases()):
            flat, d = divmod(flat, base)
            digits.append(d + 1)
        return tuple(reversed(digits))

    def support(self) -> list[tuple[Fraction, Assignment]]:
        return [
            (v, self.assignment_at(i)) for i, v in enumerate(self.values) if v != 0
        ]


def iter_assignments(design: ExperimentDesign):
    """All assignments in flat-index order."""
    bases = tuple(
        m for m, k in zip(design.outcome_sizes, design.input_sizes) for _ in range(k)
    )
    return product(*(range(1, b + 1) for b in bases))


def assignment_outcome(
    assignment: Assignment, treatment: Treatment, offsets: tuple[int, ...]
) -> OutcomeTuple:
    """Outcome tuple the assignment produces under the treatment."""
    return tuple(assignment[off + j - 1] for off, j in zip(offsets, treatment))


def build_p_vector(dataset: Dataset) -> PVector:
    """Stack the dataset's exact probabilities into canonical flat order."""
    report = validate_dataset(dataset)
    if not report.valid:
        raise ValueError(f"invalid dataset: {report.summary()}")
    design = dataset.design
    values = []
    for tr in design.treatments:
        table = dataset.tables[tr]
        for outcome in design.all_outcomes():
            values.append(table.get(outcome, ZERO))
    return PVector(design, tuple(values))


@dataclass(frozen=True)
class JdcMatrix:
    """The 0/1 compatibility matrix between observed rows and assignments."""

    design: ExperimentDesign
    matrix: SparseMatrix

    @property
    def nrows(self) -> int:
        return self.matrix.nrows

    @property
    def ncols(self) -> int:
        return self.matrix.ncols


def build_jdc_matrix(design: ExperimentDesign, column_guard: int = 10**6) -> JdcMatrix:
    """Build the compatibility matrix; refuses designs whose assignment count
    exceeds `column_guard` (override by passing a larger guard)."""
    ncols = q_length(design)
    if ncols > column_guard:
        raise SizeGuardError(
            f"assignment space has {ncols} columns, over the guard {column_guard}; "
            f"pass a larger column_guard (CLI: --column-guard) to proceed"
        )
    nrows = p_length(design)
    offsets = q_slot_offsets(design)
    sizes = design.outcome_sizes
    block = prod(sizes)

    rows_cols: list[list[int]] = [[] for _ in range(nrows)]
    for col, assignment in enumerate(iter_assignments(design)):
        for t_idx, tr in enumerate(design.treatments):
            pos = 0
            for off, j, m in zip(offsets, tr, sizes):
                pos = pos * m + (assignment[off + j - 1] - 1)
            rows_cols[t_idx * block + pos].append(col)
    one = Fraction(1)
    sparse = SparseMatrix(
        nrows, ncols, tuple(tuple((c, one) for c in cols) for cols in rows_cols)
    )
    return JdcMatrix(design, sparse)


@dataclass(frozen=True)
class LftVerdict:
    """Outcome of the linear feasibility test.

    Feasible means a classical (selective-influences) explanation exists and
    `witness` holds one; infeasible refutes it and `farkas` proves it.
    """

    design: ExperimentDesign
    feasible: bool
    witness: QVector | None
    farkas: tuple[Fraction, ...] | None
    pivots: int

    def to_json_dict(self) -> dict:
        def fmt(v: Fraction) -> str:
            return f"{v.numerator}/{v.denominator}"

        doc: dict = {
            "verdict": "feasible" if self.feasible else "infeasible",
            "pivots": self.pivots,
        }
        if self.feasible:
            doc["witness"] = [fmt(v) for v in self.witness.values]
            doc["witness_support"] = [
                {"weight": fmt(w), "assignment": list(a)} for w, a in self.witness.support()
            ]
            doc["index_legend"] = (
                "witness index is mixed radix over assignment slots "
                "(input 1 value 1 first and most significant); each slot holds the "
                "deterministic outcome for that input value"
            )
        else:
            doc["farkas"] = [fmt(v) for v in self.farkas]
            doc["index_legend"] = (
                "farkas index runs over (treatment, outcome tuple) rows: treatment "
                "blocks in sorted order, outcome tuples lexicographic within a block"
            )
        return doc


def run_lft(dataset: Dataset, column_guard: int = 10**6) -> LftVerdict:
    """Run the feasibility test on a valid dataset.

    The certificate is re-verified before returning; a verification failure
    would be an internal error and raises RuntimeError.
    """
    p = build_p_vector(dataset)
    jdc = build_jdc_matrix(dataset.design, column_guard)
    result = solve_equality_feasibility(jdc.matrix, list(p.values))
    if not verify_certificate(jdc.matrix, list(p.values), result):
        raise RuntimeError("solver produced a certificate that failed verification")
    witness = QVector(dataset.design, result.witness) if result.feasible else None
    return LftVerdict(dataset.design, result.feasible, witness, result.farkas, result.pivots)


@dataclass(frozen=True)
class Si2Model:
    """Explicit classical model: a hidden variable C ranging over weighted
    atoms, plus deterministic responses (the atom's assignment slot) for each
    input value."""

    design: ExperimentDesign
    atoms: tuple[tuple[Fraction, Assignment], ...]

    def response(self, lam: int, w: int, assignment: Assignment) -> int:
        off = q_slot_offsets(self.design)[lam - 1]
        return assignment[off + w - 1]

    def simulate(self) -> Dataset:
        """Forward-simulate every treatment; reproduces MQ exactly."""
        offsets = q_slot_offsets(self.design)
        tables: dict[Treatment, dict[OutcomeTuple, Fraction]] = {}
        for tr in self.design.treatments:
            row: dict[OutcomeTuple, Fraction] = defaultdict(lambda: ZERO)
            for weight, assignment in self.atoms:
                row[assignment_outcome(assignment, tr, offsets)] += weight
            tables[tr] = dict(row)
        return Dataset(self.design, tables)


def construct_si2(q: QVector, design: ExperimentDesign) -> Si2Model:
    """Turn a normalized nonnegative Q vector into an explicit model."""
    if q.design != design:
        raise ValueError("Q vector belongs to a different design")
    if any(v < 0 for v in q.values):
        raise ValueError("Q has negative components")
    if sum(q.values) != 1:
        raise ValueError("Q does not sum to 1")
    return Si2Model(design, tuple(q.support()))


def restrict_design(dataset: Dataset, subset) -> Dataset:
    """Project the experiment onto a subset of inputs.

    Treatments are projected (duplicates merged) and tables replaced by the
    subset marginals, which is well defined only when marginal selectivity
    holds on the subset; violations raise MarginalSelectivityError carrying
    the offending comparisons.
    """
    design = dataset.design
    lam_list = tuple(sorted(set(int(l) for l in subset)))
    if not lam_list:
        raise ValueError("subset must be nonempty")
    if lam_list[0] < 1 or lam_list[-1] > design.n:
        raise ValueError(f"subset {lam_list} out of range")

    groups: dict[Treatment, list[Treatment]] = defaultdict(list)
    for tr in design.treatments:
        groups[tuple(tr[l - 1] for l in lam_list)].append(tr)

    violations = []
    margs: dict[Treatment, dict[OutcomeTuple, Fraction]] = {}
    for proj, members in groups.items():
        per = {tr: marginal(dataset, tr, lam_list) for tr in members}
        ref_tr = members[0]
        ref = per[ref_tr]
        for tr in members[1:]:
            other = per[tr]
            worst = ZERO
            for key in set(ref) | set(other):
                d = abs(ref.get(key, ZERO) - other.get(key, ZERO))
                if d > worst:
                    worst = d
            if worst != 0:
                violations.append(MarginalViolation(lam_list, ref_tr, tr, worst))
        margs[proj] = ref
    if violations:
        report = MarginalReport(tuple(violations), len(violations), len(lam_list))
        raise MarginalSelectivityError(
            f"marginal selectivity fails on inputs {lam_list}", report
        )

    new_design = ExperimentDesign(
        tuple(design.inputs[l - 1] for l in lam_list),
        tuple(design.outputs[l - 1] for l in lam_list),
        tuple(groups.keys()),
    )
    return Dataset(new_design, {proj: margs[proj] for proj in groups})
