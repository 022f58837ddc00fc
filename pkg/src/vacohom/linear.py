"""Exact rational linear algebra and weight-graded sparse vectors.

Scalars are ``fractions.Fraction`` throughout.  Weights are also Fractions
(integral for algebras, rational for modules).  A GradedVector is a sparse
map (weight, basis index) -> coefficient together with a space tag and a
weight cutoff; components above the cutoff are dropped and flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

Q = Fraction


def qstr(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else "%d/%d" % (x.numerator, x.denominator)


def qparse(s) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    return Fraction(str(s))


@dataclass
class GradedVector:
    """Sparse vector in a weight-graded space, truncated at ``cutoff``.

    coeffs maps (weight, index) -> nonzero Fraction.  ``truncated`` records
    that some nonzero component above the cutoff was discarded by the
    operation that produced this vector.
    """

    space: str
    coeffs: dict = field(default_factory=dict)
    cutoff: Fraction = Q(10**9)
    truncated: bool = False

    def __post_init__(self):
        clean = {}
        trunc = self.truncated
        for (wt, idx), c in self.coeffs.items():
            c = Q(c)
            if c == 0:
                continue
            wt = Q(wt)
            if wt > self.cutoff:
                trunc = True
                continue
            clean[(wt, idx)] = c
        self.coeffs = clean
        self.truncated = trunc

    def is_zero(self) -> bool:
        return not self.coeffs

    def weights(self):
        return sorted({wt for (wt, _i) in self.coeffs})

    def add(self, other: "GradedVector") -> "GradedVector":
        assert self.space == other.space
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, Q(0)) + c
        return GradedVector(self.space, out, min(self.cutoff, other.cutoff),
                            self.truncated or other.truncated)

    def scale(self, c) -> "GradedVector":
        c = Q(c)
        if c == 0:
            return GradedVector(self.space, {}, self.cutoff, self.truncated)
        return GradedVector(self.space, {k: c * v for k, v in self.coeffs.items()},
                            self.cutoff, self.truncated)

    def sub(self, other: "GradedVector") -> "GradedVector":
        return self.add(other.scale(-1))

    def coeff(self, wt, idx) -> Fraction:
        return self.coeffs.get((Q(wt), idx), Q(0))

    def __eq__(self, other):
        return (isinstance(other, GradedVector) and self.space == other.space
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.space, tuple(sorted(self.coeffs.items()))))


def project(v: GradedVector, r) -> GradedVector:
    """Weight-r homogeneous component P_r(v)."""
    r = Q(r)
    return GradedVector(v.space, {k: c for k, c in v.coeffs.items() if k[0] == r},
                        v.cutoff, v.truncated)


def gv_items_sorted(v: GradedVector):
    return sorted(v.coeffs.items())


@dataclass
class LinearMapMatrix:
    """Sparse matrix over Q with explicit domain/codomain basis labels."""

    domain: list
    codomain: list
    entries: dict = field(default_factory=dict)  # (row, col) -> Fraction

    def apply(self, coords: list) -> list:
        assert len(coords) == len(self.domain)
        out = [Q(0)] * len(self.codomain)
        for (i, j), c in self.entries.items():
            if coords[j]:
                out[i] += c * coords[j]
        return out

    def dense_rows(self) -> list:
        rows = [[Q(0)] * len(self.domain) for _ in self.codomain]
        for (i, j), c in self.entries.items():
            rows[i][j] = Q(c)
        return rows


def row_echelon(rows):
    """In-place fraction-free-style Gaussian elimination; returns (rows, pivots).

    rows is a list of lists of Fraction.  Pivot columns come back in order.
    """
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for col in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank_of_rows(rows) -> int:
    _, pivots = row_echelon([list(r) for r in rows])
    return len(pivots)


def kernel_basis(M: LinearMapMatrix):
    """Exact basis of ker M as coordinate vectors over the domain basis."""
    ncols = len(M.domain)
    rows, pivots = row_echelon(M.dense_rows())
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Q(0)] * ncols
        vec[fc] = Q(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -rows[r][fc]
        basis.append(vec)
    return basis


def in_span(rows, vec) -> bool:
    base = rank_of_rows(rows) if rows else 0
    return rank_of_rows(list(rows) + [list(vec)]) == base if rows else all(x == 0 for x in vec)


def quotient_dimension(span_A, span_B) -> int:
    """dim span_A - dim span_B, after checking span_B is contained in span_A."""
    for vec in span_B:
        if not in_span(span_A, vec):
            raise ValueError("quotient_dimension: second span is not contained in the first")
    return rank_of_rows(span_A) - rank_of_rows(span_B)
