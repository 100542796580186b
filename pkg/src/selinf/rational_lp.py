"""Exact linear feasibility: does MQ = P, Q >= 0 have a solution?

Everything runs in rational arithmetic.  The solver is a phase-one simplex
on the standard-form system with artificial variables (minimize their sum)
under Bland's least-index anti-cycling rule, so it terminates on every input
and is deterministic: identical inputs give identical witnesses and pivot
counts.  Infeasibility comes with a Farkas vector y (y'M <= 0 componentwise,
y'P > 0) read off the optimal phase-one reduced-cost row, so every verdict is
self-verifying via `verify_certificate`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class SparseMatrix:
    """Row-major sparse matrix of exact rationals.

    Per row: sorted (column, entry) pairs, entries nonzero, columns unique.
    """

    nrows: int
    ncols: int
    rows: tuple[tuple[tuple[int, Fraction], ...], ...]

    def __post_init__(self):
        if self.nrows < 0 or self.ncols < 0:
            raise ValueError("negative dimension")
        if len(self.rows) != self.nrows:
            raise ValueError(f"expected {self.nrows} rows, got {len(self.rows)}")
        norm = []
        for i, row in enumerate(self.rows):
            seen = set()
            entries = []
            for col, val in row:
                col = int(col)
                if not 0 <= col < self.ncols:
                    raise ValueError(f"row {i}: column {col} out of range")
                if col in seen:
                    raise ValueError(f"row {i}: duplicate column {col}")
                seen.add(col)
                val = Fraction(val)
                if val == 0:
                    raise ValueError(f"row {i}: explicit zero entry at column {col}")
                entries.append((col, val))
            entries.sort()
            norm.append(tuple(entries))
        object.__setattr__(self, "rows", tuple(norm))

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "SparseMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        sparse = []
        for row in rows:
            if len(row) != ncols:
                raise ValueError("ragged dense matrix")
            sparse.append(
                tuple((j, Fraction(v)) for j, v in enumerate(row) if Fraction(v) != 0)
            )
        return cls(nrows, ncols, tuple(sparse))

    def to_dense(self) -> list[list[Fraction]]:
        dense = [[ZERO] * self.ncols for _ in range(self.nrows)]
        for i, row in enumerate(self.rows):
            for j, v in row:
                dense[i][j] = v
        return dense

    def mat_vec(self, q: Sequence[Fraction]) -> list[Fraction]:
        if len(q) != self.ncols:
            raise ValueError("dimension mismatch")
        return [sum((v * q[j] for j, v in row), ZERO) for row in self.rows]

    def vec_mat(self, y: Sequence[Fraction]) -> list[Fraction]:
        if len(y) != self.nrows:
            raise ValueError("dimension mismatch")
        out = [ZERO] * self.ncols
        for i, row in enumerate(self.rows):
            yi = y[i]
            if yi == 0:
                continue
            for j, v in row:
                out[j] += yi * v
        return out


@dataclass(frozen=True)
class FeasibilityResult:
    """Feasible with witness Q, or infeasible with Farkas vector y."""

    feasible: bool
    witness: tuple[Fraction, ...] | None
    farkas: tuple[Fraction, ...] | None
    pivots: int


def _int_row(values: list[Fraction], extra: list[Fraction]) -> tuple[list[int], int]:
    """Clear denominators: represent a rational row as (numerators, denominator)."""
    den = 1
    for v in values:
        den = den * v.denominator // gcd(den, v.denominator)
    for v in extra:
        den = den * v.denominator // gcd(den, v.denominator)
    nums = [v.numerator * (den // v.denominator) for v in values]
    nums += [v.numerator * (den // v.denominator) for v in extra]
    return nums, den


def _reduce_row(nums: list[int], den: int) -> tuple[list[int], int]:
    g = den
    for v in nums:
        if v:
            g = gcd(g, v)
            if g == 1:
                return nums, den
    if g > 1:
        return [v // g for v in nums], den // g
    return nums, den


def _phase_one(A: list[list[Fraction]], b: list[Fraction]) -> tuple[bool, list[Fraction], int]:
    """Phase-one simplex on AQ = b, Q >= 0 with b >= 0.

    Rows live as integer numerators over one positive denominator per row;
    this is plain exact simplex (Bland pivoting on the same values a Fraction
    tableau would hold), just cheaper per entry.  Returns (feasible, witness
    or phase-one dual y', pivot count).
    """
    m = len(A)
    n = len(A[0]) if m else 0
    total = n + m
    # tableau rows: original columns, artificial identity, rhs
    num: list[list[int]] = []
    den: list[int] = []
    for i in range(m):
        art = [ONE if k == i else ZERO for k in range(m)]
        nums, d = _int_row(A[i], art + [b[i]])
        num.append(nums)
        den.append(d)
    basis = list(range(n, n + m))
    # reduced costs of min sum(artificials), priced out for the artificial basis
    obj_frac = [-sum(A[i][j] for i in range(m)) for j in range(n)]
    obj_frac += [ZERO] * m + [-sum(b)]
    obj, obj_den = _int_row(obj_frac, [])

    pivots = 0
    while True:
        enter = -1
        for j in range(total):
            if obj[j] < 0:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        lead_num = lead_den = 0  # best ratio = lead_num / lead_den, lead_den > 0
        for i in range(m):
            a = num[i][enter]
            if a > 0:
                ri_num = num[i][total]
                cmp = ri_num * lead_den - lead_num * a
                if leave < 0 or cmp < 0 or (cmp == 0 and basis[i] < basis[leave]):
                    leave = i
                    lead_num, lead_den = ri_num, a
        if leave < 0:
            raise RuntimeError("phase-one objective unbounded; invariant violated")

        prow = num[leave]
        piv = prow[enter]
        for i in range(m):
            if i == leave:
                continue
            f = num[i][enter]
            if f:
                row = num[i]
                num[i], den[i] = _reduce_row(
                    [v * piv - f * pv for v, pv in zip(row, prow)], den[i] * piv
                )
        f = obj[enter]
        obj, obj_den = _reduce_row(
            [v * piv - f * pv for v, pv in zip(obj, prow)], obj_den * piv
        )
        num[leave], den[leave] = _reduce_row(prow, piv)
        basis[leave] = enter
        pivots += 1

    if obj[total] == 0:
        x = [ZERO] * n
        for i, bv in enumerate(basis):
            if bv < n:
                x[bv] = Fraction(num[i][total], den[i])
        return True, x, pivots
    y = [ONE - Fraction(obj[n + k], obj_den) for k in range(m)]
    return False, y, pivots


def solve_equality_feasibility(M: SparseMatrix, P: Sequence) -> FeasibilityResult:
    """Decide MQ = P, Q >= 0 exactly.

    Presolve: rows with no usable coefficients and P-component 0 are dropped
    (nonzero P-component: immediately infeasible); rows with P-component 0
    whose coefficients all share one sign force their columns to zero.  The
    phase-one simplex then runs on the reduced system, and certificates are
    mapped back to the full one.
    """
    P = [Fraction(p) for p in P]
    if len(P) != M.nrows:
        raise ValueError(f"P has length {len(P)}, matrix has {M.nrows} rows")

    m, n = M.nrows, M.ncols
    rows = M.rows
    # sign of each row over its ORIGINAL entries: +1 all-positive, -1 all-negative,
    # None mixed or empty (only uniform-sign rows may force columns to zero)
    row_sign: list[int | None] = []
    for row in rows:
        if row and all(v > 0 for _, v in row):
            row_sign.append(1)
        elif row and all(v < 0 for _, v in row):
            row_sign.append(-1)
        else:
            row_sign.append(None)

    dropped_col = [False] * n
    state = ["active"] * m  # active | empty | fired
    infeasible_row = -1
    changed = True
    while changed and infeasible_row < 0:
        changed = False
        for i in range(m):
            if state[i] != "active":
                continue
            act = [(c, v) for c, v in rows[i] if not dropped_col[c]]
            if not act:
                if P[i] != 0:
                    infeasible_row = i
                    break
                state[i] = "empty"
                changed = True
            elif P[i] == 0 and row_sign[i] is not None:
                for c, _ in act:
                    dropped_col[c] = True
                state[i] = "fired"
                changed = True

    def assemble_farkas(kept_y: dict[int, Fraction]) -> tuple[Fraction, ...]:
        # columns eliminated by fired rows need a uniform large multiplier -K
        # on those rows so that y'M <= 0 holds on them too
        firing = [z for z in range(m) if state[z] == "fired"]
        K = ONE
        if any(dropped_col):
            num = [ZERO] * n
            den = [ZERO] * n
            for i, yi in kept_y.items():
                for j, v in rows[i]:
                    if dropped_col[j]:
                        num[j] += yi * v
            for z in firing:
                for j, v in rows[z]:
                    if dropped_col[j]:
                        den[j] += abs(v)
            for j in range(n):
                if dropped_col[j] and num[j] > 0:
                    cand = num[j] / den[j]
                    if cand > K:
                        K = cand
        y = [ZERO] * m
        for i, yi in kept_y.items():
            y[i] = yi
        for z in firing:
            y[z] = -row_sign[z] * K
        return tuple(y)

    if infeasible_row >= 0:
        sign = ONE if P[infeasible_row] > 0 else -ONE
        return FeasibilityResult(False, None, assemble_farkas({infeasible_row: sign}), 0)

    kept_rows = [i for i in range(m) if state[i] == "active"]
    kept_cols = [j for j in range(n) if not dropped_col[j]]
    if not kept_rows:
        return FeasibilityResult(True, tuple([ZERO] * n), None, 0)

    col_pos = {j: k for k, j in enumerate(kept_cols)}
    flip = [1 if P[i] >= 0 else -1 for i in kept_rows]
    A = []
    b = []
    for i, s in zip(kept_rows, flip):
        dense = [ZERO] * len(kept_cols)
        for j, v in rows[i]:
            if not dropped_col[j]:
                dense[col_pos[j]] = s * v
        A.append(dense)
        b.append(s * P[i])

    feasible, vec, pivots = _phase_one(A, b)
    if feasible:
        witness = [ZERO] * n
        for k, j in enumerate(kept_cols):
            witness[j] = vec[k]
        return FeasibilityResult(True, tuple(witness), None, pivots)
    kept_y = {i: s * vec[k] for k, (i, s) in enumerate(zip(kept_rows, flip))}
    return FeasibilityResult(False, None, assemble_farkas(kept_y), pivots)


def verify_certificate(M: SparseMatrix, P: Sequence, result: FeasibilityResult) -> bool:
    """Re-check the certificate by direct exact arithmetic, independent of the
    solver: MQ = P with Q >= 0, or y'M <= 0 with y'P > 0."""
    P = [Fraction(p) for p in P]
    if len(P) != M.nrows:
        return False
    if result.feasible:
        q = result.witness
        if q is None or len(q) != M.ncols:
            return False
        if any(v < 0 for v in q):
            return False
        return M.mat_vec(list(q)) == P
    y = result.farkas
    if y is None or len(y) != M.nrows:
        return False
    if any(v > 0 for v in M.vec_mat(list(y))):
        return False
    return sum(yi * pi for yi, pi in zip(y, P)) > 0
