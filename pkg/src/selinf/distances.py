"""Order-distance chain tests and the Bell-CHSH-Fine inequality battery.

A total order on the pooled outcome labels of all outputs induces the
asymmetric distance D(X, Y) = Pr[X strictly below Y], a pseudo-quasi-metric.
For any chain of input points whose consecutive pairs (and endpoints) occur
together in treatments, a classical explanation forces the endpoint distance
to be at most the sum of the link distances.  Only irreducible chains need
checking; on full-factorial designs these are exactly the alternating
tetrads, and on the 2x2 binary design the two canonical orders reproduce the
four Bell-CHSH-Fine double inequalities.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import MarginalSelectivityError, SizeGuardError
from .experiment import (
    Dataset,
    ExperimentDesign,
    Treatment,
    ZERO,
    check_marginal_selectivity,
)

Point = tuple[int, int]  # (input position, value index), 1-based
Labeled = tuple[int, int]  # (variable key, outcome index)


@dataclass(frozen=True)
class OrderRelation:
    """Ranked partition of pooled outcome labels: classes in increasing order.

    Elements are (variable key, outcome index) pairs; for datasets the key is
    the 1-based input position.  Two labels in the same class are equivalent,
    labels in earlier classes strictly precede later ones.
    """

    classes: tuple[frozenset[Labeled], ...]
    name: str = ""
    _rank: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        classes = tuple(frozenset((int(k), int(a)) for k, a in cls) for cls in self.classes)
        if not classes or any(not cls for cls in classes):
            raise ValueError("order needs nonempty classes")
        rank: dict[Labeled, int] = {}
        for r, cls in enumerate(classes):
            for el in cls:
                if el in rank:
                    raise ValueError(f"label {el} appears in two classes")
                rank[el] = r
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "_rank", rank)

    def rank(self, key: int, outcome: int) -> int:
        try:
            return self._rank[(key, outcome)]
        except KeyError:
            raise ValueError(f"order does not cover outcome {outcome} of variable {key}") from None

    def covers(self, key: int, size: int) -> bool:
        return all((key, a) in self._rank for a in range(1, size + 1))


def preset_order(design: ExperimentDesign, name: str) -> OrderRelation:
    """The two canonical orders.

    "d1" ranks outcomes by index across all outputs (1 = 1' < 2 = 2' < ...);
    "d2" does the same for output 1 but reverses the index for every other
    output (1 = 2' < 2 = 1' on the binary 2-output design).
    """
    if name not in ("d1", "d2"):
        raise ValueError(f"unknown preset order {name!r}")
    sizes = design.outcome_sizes
    top = max(sizes)
    classes = []
    for r in range(1, top + 1):
        cls = set()
        for lam, m in enumerate(sizes, start=1):
            if r <= m:
                if name == "d1" or lam == 1:
                    cls.add((lam, r))
                else:
                    cls.add((lam, m + 1 - r))
        if cls:
            classes.append(frozenset(cls))
    return OrderRelation(tuple(classes), name=name)


def random_order(design: ExperimentDesign, rng: random.Random) -> OrderRelation:
    """A random ranked partition of all (output, outcome) labels."""
    pool = [
        (lam, a)
        for lam, m in enumerate(design.outcome_sizes, start=1)
        for a in range(1, m + 1)
    ]
    rng.shuffle(pool)
    classes: list[set[Labeled]] = [set([pool[0]])]
    for el in pool[1:]:
        if rng.random() < 0.5:
            classes.append({el})
        else:
            classes[-1].add(el)
    return OrderRelation(tuple(frozenset(c) for c in classes), name="random")


def order_distance(
    dataset: Dataset, treatment, lam1: int, lam2: int, order: OrderRelation
) -> Fraction:
    """Exact Pr[output lam1 strictly below output lam2] under one treatment."""
    design = dataset.design
    tr = tuple(treatment)
    if not design.has_treatment(tr):
        raise ValueError(f"unknown treatment {tr}")
    if lam1 == lam2:
        raise ValueError("order_distance needs two distinct outputs")
    for lam in (lam1, lam2):
        if not 1 <= lam <= design.n:
            raise ValueError(f"output {lam} out of range")
        if not order.covers(lam, design.outcome_sizes[lam - 1]):
            raise ValueError(f"order does not cover all outcomes of output {lam}")
    total = ZERO
    for outcome, p in dataset.table(tr).items():
        if order.rank(lam1, outcome[lam1 - 1]) < order.rank(lam2, outcome[lam2 - 1]):
            total += p
    return total


@dataclass(frozen=True)
class InputPointSequence:
    """A chain of input points x_1 ... x_l (l >= 3) with, when known, one
    realizing treatment per link: first the endpoint link {x_1, x_l}, then
    {x_1, x_2}, ..., {x_{l-1}, x_l}."""

    points: tuple[Point, ...]
    link_treatments: tuple[Treatment, ...] | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "points", tuple((int(l), int(w)) for l, w in self.points)
        )
        if len(self.points) < 3:
            raise ValueError("sequences need at least three points")
        if self.link_treatments is not None:
            lts = tuple(tuple(t) for t in self.link_treatments)
            if len(lts) != len(self.points):
                raise ValueError("need one treatment per link (endpoint link first)")
            object.__setattr__(self, "link_treatments", lts)

    def __len__(self) -> int:
        return len(self.points)

    def links(self) -> list[tuple[Point, Point]]:
        """Consecutive pairs, in chain order."""
        return [
            (self.points[i - 1], self.points[i]) for i in range(1, len(self.points))
        ]

    @property
    def endpoints(self) -> tuple[Point, Point]:
        return self.points[0], self.points[-1]


def _pair_realizers(design: ExperimentDesign, a: Point, b: Point) -> list[Treatment]:
    """Treatments containing both input points (a point is (input, value))."""
    want: dict[int, int] = {}
    for lam, w in (a, b):
        if want.get(lam, w) != w:
            return []
        want[lam] = w
    return [
        tr
        for tr in design.treatments
        if all(tr[lam - 1] == w for lam, w in want.items())
    ]


def _points_cooccur(design: ExperimentDesign, points: Iterable[Point]) -> bool:
    want: dict[int, int] = {}
    for lam, w in points:
        if want.get(lam, w) != w:
            return False
        want[lam] = w
    return any(
        all(tr[lam - 1] == w for lam, w in want.items()) for tr in design.treatments
    )


def enumerate_irreducible_sequences(
    design: ExperimentDesign, max_len: int = 6, sequence_guard: int = 10**5
) -> list[InputPointSequence]:
    """All irreducible treatment-realizable chains of length 3..max_len.

    Irreducible: distinct endpoints, and the only position subsets (of size
    above one) whose points fit inside a single treatment are the endpoint
    pair and the consecutive pairs.  A sequence and its reversal are distinct
    chains (the distance is asymmetric), so both are returned.  Output is
    deterministic: ordered by length, then lexicographically.
    """
    if max_len < 3:
        raise ValueError("max_len must be >= 3")
    points = design.input_points()
    pair_ok: dict[tuple[Point, Point], bool] = {}

    def cooccur(a: Point, b: Point) -> bool:
        key = (a, b)
        hit = pair_ok.get(key)
        if hit is None:
            hit = _points_cooccur(design, (a, b))
            pair_ok[key] = hit
            pair_ok[(b, a)] = hit
        return hit

    results: list[InputPointSequence] = []

    def attach_links(seq: tuple[Point, ...]) -> InputPointSequence:
        link_treatments = [_pair_realizers(design, seq[0], seq[-1])[0]]
        for i in range(1, len(seq)):
            link_treatments.append(_pair_realizers(design, seq[i - 1], seq[i])[0])
        return InputPointSequence(seq, tuple(link_treatments))

    def extend(seq: list[Point], target: int) -> None:
        j = len(seq) + 1  # position being filled, 1-based
        last = j == target
        for cand in points:
            if cand == seq[-1]:
                continue  # adjacent duplicates are always reducible
            if not cooccur(seq[-1], cand):
                continue
            ok = True
            for a in range(1, j - 1):  # positions 1..j-2 pair with position j
                must_cooccur = last and a == 1
                does = cooccur(seq[a - 1], cand)
                if must_cooccur:
                    if not does or seq[0] == cand:
                        ok = False
                        break
                elif does:
                    ok = False
                    break
            if not ok:
                continue
            if last:
                if target == 3 and _points_cooccur(design, (*seq, cand)):
                    continue  # a 3-chain inside one treatment is reducible
                if len(results) >= sequence_guard:
                    raise SizeGuardError(
                        f"more than {sequence_guard} irreducible sequences; raise "
                        f"sequence_guard (CLI: --sequence-guard) to enumerate them all"
                    )
                results.append(attach_links((*seq, cand)))
            else:
                seq.append(cand)
                extend(seq, target)
                seq.pop()

    for target in range(3, max_len + 1):
        for start in points:
            extend([start], target)
    return results


def enumerate_tetradic_sequences(design: ExperimentDesign) -> list[InputPointSequence]:
    """All alternating tetrads x, y, s, t (x, s on one input, y, t on another,
    x != s, y != t) for a full-factorial treatment set; both input orientations
    are produced since reversed chains are distinct tests."""
    if not design.is_factorial:
        raise ValueError(
            "tetradic enumeration needs the full factorial treatment set; "
            "use enumerate_irreducible_sequences for restricted treatment sets"
        )
    k = design.input_sizes
    out: list[InputPointSequence] = []
    for lam1 in range(1, design.n + 1):
        for lam2 in range(1, design.n + 1):
            if lam1 == lam2:
                continue
            for x_w in range(1, k[lam1 - 1] + 1):
                for s_w in range(1, k[lam1 - 1] + 1):
                    if s_w == x_w:
                        continue
                    for y_w in range(1, k[lam2 - 1] + 1):
                        for t_w in range(1, k[lam2 - 1] + 1):
                            if t_w == y_w:
                                continue
                            seq = ((lam1, x_w), (lam2, y_w), (lam1, s_w), (lam2, t_w))
                            links = [_pair_realizers(design, seq[0], seq[3])[0]]
                            for i in range(1, 4):
                                links.append(
                                    _pair_realizers(design, seq[i - 1], seq[i])[0]
                                )
                            out.append(InputPointSequence(seq, tuple(links)))
    out.sort(key=lambda s: s.points)
    return out


@dataclass(frozen=True)
class LinkEvaluation:
    """One chain link: the pair, the distance used, the treatment that
    realized it, and every (treatment, distance) realization evaluated."""

    pair: tuple[Point, Point]
    distance: Fraction
    treatment: Treatment
    evaluated: tuple[tuple[Treatment, Fraction], ...]


@dataclass(frozen=True)
class ChainRecord:
    sequence: InputPointSequence
    lhs: Fraction
    rhs: Fraction
    slack: Fraction
    endpoint: LinkEvaluation
    links: tuple[LinkEvaluation, ...]

    @property
    def passed(self) -> bool:
        return self.slack >= 0


@dataclass(frozen=True)
class ChainReport:
    order: OrderRelation
    records: tuple[ChainRecord, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> tuple[ChainRecord, ...]:
        return tuple(r for r in self.records if not r.passed)


def _link_distance_cached(
    dataset: Dataset,
    order: OrderRelation,
    cache: dict,
    tr: Treatment,
    a: Point,
    b: Point,
) -> Fraction:
    if a == b:
        return ZERO  # Pr[X strictly below X] for the same input point
    key = (tr, a[0], b[0])
    val = cache.get(key)
    if val is None:
        val = order_distance(dataset, tr, a[0], b[0], order)
        cache[key] = val
    return val


def chain_test(
    dataset: Dataset, order: OrderRelation, sequences: Sequence[InputPointSequence]
) -> ChainReport:
    """Evaluate the chain inequality for every sequence.

    Every realizing treatment of every link is evaluated.  The reported
    right-hand side takes, per link, the realization with the smallest
    distance, and the left-hand side the largest one: the inequality must
    hold for every realization, so this is the tightest necessary condition
    (under marginal selectivity all realizations coincide).
    """
    design = dataset.design
    cache: dict = {}
    records = []
    for seq in sequences:
        evals: list[LinkEvaluation] = []
        x1, xl = seq.endpoints
        for pair, pick_max in [((x1, xl), True)] + [(lk, False) for lk in seq.links()]:
            a, b = pair
            realizers = _pair_realizers(design, a, b)
            if not realizers:
                raise ValueError(f"no treatment realizes the pair {a}, {b}")
            ds = [
                (tr, _link_distance_cached(dataset, order, cache, tr, a, b))
                for tr in realizers
            ]
            if pick_max:
                tr, d = max(ds, key=lambda td: td[1])
            else:
                tr, d = min(ds, key=lambda td: td[1])
            evals.append(LinkEvaluation(pair, d, tr, tuple(ds)))
        endpoint = evals[0]
        links = tuple(evals[1:])
        rhs = sum((lk.distance for lk in links), ZERO)
        records.append(
            ChainRecord(seq, endpoint.distance, rhs, rhs - endpoint.distance, endpoint, links)
        )
    return ChainReport(order, tuple(records))


@dataclass(frozen=True)
class FineInequality:
    family: str
    expression: str
    value: Fraction
    bound: str  # "lower" (>= -1) or "upper" (<= 0)

    @property
    def satisfied(self) -> bool:
        return self.value >= -1 if self.bound == "lower" else self.value <= 0


@dataclass(frozen=True)
class FineReport:
    records: tuple[FineInequality, ...]

    @property
    def passed(self) -> bool:
        return all(r.satisfied for r in self.records)

    def families(self) -> dict[str, Fraction]:
        return {r.family: r.value for r in self.records if r.bound == "upper"}

    def violated_families(self) -> tuple[str, ...]:
        return tuple(
            sorted({r.family for r in self.records if not r.satisfied})
        )


def fine_inequalities(dataset: Dataset) -> FineReport:
    """The four double inequalities bounding, within [-1, 0], the sum of all
    p(1,1|i,j) minus twice one of them minus two marginals.

    Applies to the 2-input, 2-value, binary-outcome full-factorial design and
    needs marginal selectivity (checked; the marginals are otherwise
    ill-defined).  The family subtracting p(1,1|1,2) comes first; its two
    bounds are jointly equivalent to the canonical-tetrad chain pair under
    the two preset orders.
    """
    design = dataset.design
    if (
        design.n != 2
        or design.input_sizes != (2, 2)
        or design.outcome_sizes != (2, 2)
        or not design.is_factorial
    ):
        raise ValueError(
            "Fine battery needs the 2-input, 2-value, binary-outcome full factorial design"
        )
    ms = check_marginal_selectivity(dataset)
    if not ms.passed:
        raise MarginalSelectivityError(
            "Fine battery needs marginal selectivity", ms
        )

    p11 = {(i, j): dataset.prob((i, j), (1, 1)) for i in (1, 2) for j in (1, 2)}
    row = {i: dataset.prob((i, 1), (1, 1)) + dataset.prob((i, 1), (1, 2)) for i in (1, 2)}
    col = {j: dataset.prob((1, j), (1, 1)) + dataset.prob((1, j), (2, 1)) for j in (1, 2)}
    total = sum(p11.values())

    records = []
    for i0, j0 in ((1, 2), (1, 1), (2, 2), (2, 1)):
        oi, oj = 3 - i0, 3 - j0
        value = total - 2 * p11[(i0, j0)] - row[oi] - col[oj]
        plus = " + ".join(
            f"p11|{i}{j}" for i in (1, 2) for j in (1, 2) if (i, j) != (i0, j0)
        )
        expr = f"{plus} - p11|{i0}{j0} - p1.|{oi}. - p.1|.{oj}"
        family = f"p11|{i0}{j0}"
        records.append(FineInequality(family, f"-1 <= {expr}", value, "lower"))
        records.append(FineInequality(family, f"{expr} <= 0", value, "upper"))
    return FineReport(tuple(records))


def canonical_tetrad() -> InputPointSequence:
    """The chain (1,1), (2,1), (1,2), (2,2) whose inequality pair under the
    two preset orders matches the first Fine double inequality."""
    return InputPointSequence(((1, 1), (2, 1), (1, 2), (2, 2)))


@dataclass(frozen=True)
class AxiomReport:
    """Order-distance axiom check on one explicit joint distribution."""

    distances: dict[tuple[int, int], Fraction]
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def check_pq_metric_axioms(
    joint: Mapping[Sequence[int], object], order: OrderRelation
) -> AxiomReport:
    """Verify nonnegativity, zero self-distance, and every triangle
    inequality for the order-distance on an explicit joint distribution over
    at least three variables (keyed 1..v in the outcome tuples)."""
    items = [(tuple(int(a) for a in key), Fraction(p)) for key, p in joint.items()]
    if not items:
        raise ValueError("empty joint distribution")
    v = len(items[0][0])
    if v < 3:
        raise ValueError("need a joint over at least three variables")
    if any(len(key) != v for key, _ in items):
        raise ValueError("ragged outcome tuples")
    if any(p < 0 for _, p in items):
        raise ValueError("negative probability in joint")
    if sum(p for _, p in items) != 1:
        raise ValueError("joint distribution must sum to 1")

    dist: dict[tuple[int, int], Fraction] = {}
    for i in range(1, v + 1):
        for j in range(1, v + 1):
            d = ZERO
            for key, p in items:
                if p != 0 and order.rank(i, key[i - 1]) < order.rank(j, key[j - 1]):
                    d += p
            dist[(i, j)] = d

    violations = []
    for (i, j), d in dist.items():
        if d < 0:
            violations.append(f"d({i},{j}) = {d} < 0")
        if i == j and d != 0:
            violations.append(f"d({i},{i}) = {d} != 0")
    for i in range(1, v + 1):
        for j in range(1, v + 1):
            for k in range(1, v + 1):
                if dist[(i, k)] > dist[(i, j)] + dist[(j, k)]:
                    violations.append(
                        f"triangle fails: d({i},{k}) > d({i},{j}) + d({j},{k})"
                    )
    return AxiomReport(dist, tuple(violations))
