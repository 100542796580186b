"""Shared test utilities: an independent LP feasibility oracle and random
dataset samplers.  The oracle never calls the solver under test."""
from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from selinf.experiment import Dataset, ExperimentDesign, make_design

F = Fraction
ZERO = F(0)


def gauss_solve(rows: list[list[Fraction]], rhs: list[Fraction]):
    """Solve the overdetermined system rows * x = rhs exactly.

    Returns (consistent, unique, x): x is meaningful only when consistent and
    unique (columns linearly independent).
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    aug = [list(rows[i]) + [rhs[i]] for i in range(m)]
    pivot_cols = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if pr is None:
            continue
        aug[r], aug[pr] = aug[pr], aug[r]
        pv = aug[r][c]
        aug[r] = [v / pv for v in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [v - f * pv2 for v, pv2 in zip(aug[i], aug[r])]
        pivot_cols.append(c)
        r += 1
        if r == m:
            break
    # rows below the pivot rows are fully eliminated, so consistency is just
    # their right-hand sides being zero
    consistent = all(aug[i][n] == 0 for i in range(r, m))
    unique = len(pivot_cols) == n
    x = [ZERO] * n
    if consistent and unique:
        for i, c in enumerate(pivot_cols):
            x[c] = aug[i][n]
    return consistent, unique, x


def matrix_rank(rows: list[list[Fraction]]) -> int:
    m = len(rows)
    n = len(rows[0]) if m else 0
    work = [list(r) for r in rows]
    rank = 0
    for c in range(n):
        pr = next((i for i in range(rank, m) if work[i][c] != 0), None)
        if pr is None:
            continue
        work[rank], work[pr] = work[pr], work[rank]
        pv = work[rank][c]
        work[rank] = [v / pv for v in work[rank]]
        for i in range(m):
            if i != rank and work[i][c] != 0:
                f = work[i][c]
                work[i] = [v - f * pv2 for v, pv2 in zip(work[i], work[rank])]
        rank += 1
        if rank == m:
            break
    return rank


def lp_feasible_bruteforce(dense: list[list[Fraction]], P: list[Fraction]) -> bool:
    """Vertex-enumeration oracle for MQ = P, Q >= 0.

    If the system is feasible it has a basic feasible solution whose support
    extends to a linearly independent column set of size rank(M); enumerate
    those sets and solve each square-ish system exactly.
    """
    m = len(dense)
    n = len(dense[0]) if m else 0
    if all(p == 0 for p in P):
        return True
    if n == 0:
        return False
    r = matrix_rank(dense)
    if r == 0:
        return False  # M = 0 but P != 0
    cols = list(range(n))
    for subset in combinations(cols, r):
        sub = [[dense[i][j] for j in subset] for i in range(m)]
        consistent, unique, x = gauss_solve(sub, P)
        if consistent and unique and all(v >= 0 for v in x):
            return True
    return False


def rand_frac(rng: random.Random, lo=F(0), hi=F(1), denom: int = 24) -> Fraction:
    return lo + (hi - lo) * F(rng.randint(0, denom), denom)


def random_ms_chsh(rng: random.Random, denom: int = 24) -> Dataset:
    """Random marginally selective 2x2 binary dataset: random margins plus a
    p(1,1|i,j) drawn inside the Frechet bounds.  Covers the whole
    no-signaling region, classical and not."""
    r = {i: rand_frac(rng, denom=denom) for i in (1, 2)}
    c = {j: rand_frac(rng, denom=denom) for j in (1, 2)}
    tables = {}
    for i in (1, 2):
        for j in (1, 2):
            lo = max(ZERO, r[i] + c[j] - 1)
            hi = min(r[i], c[j])
            p11 = rand_frac(rng, lo, hi, denom)
            tables[(i, j)] = {
                (1, 1): p11,
                (1, 2): r[i] - p11,
                (2, 1): c[j] - p11,
                (2, 2): 1 - r[i] - c[j] + p11,
            }
    return Dataset(make_design((2, 2), (2, 2)), tables)


def random_tables_dataset(design: ExperimentDesign, rng: random.Random, denom: int = 12) -> Dataset:
    """Arbitrary valid dataset: independent random table per treatment (no
    marginal selectivity guarantee)."""
    outcomes = list(design.all_outcomes())
    tables = {}
    for tr in design.treatments:
        weights = [rng.randint(0, denom) for _ in outcomes]
        if sum(weights) == 0:
            weights[rng.randrange(len(weights))] = 1
        total = sum(weights)
        tables[tr] = {o: F(w, total) for o, w in zip(outcomes, weights) if w}
    return Dataset(design, tables)


def random_small_design(rng: random.Random, max_n=3, max_k=2, max_m=3, factorial=True) -> ExperimentDesign:
    n = rng.randint(1, max_n)
    k = tuple(rng.randint(1, max_k) for _ in range(n))
    m = tuple(rng.randint(1, max_m) for _ in range(n))
    design = make_design(k, m)
    if factorial or len(design.treatments) <= 2:
        return design
    full = list(design.treatments)
    size = rng.randint(2, len(full))
    subset = rng.sample(full, size)
    return make_design(k, m, treatments=subset)
