"""One- and two-cochains with polynomial time dependence.

A two-cochain assigns to every basis pair (a_i, a_j), i < j, a polynomial
Xi(a_i, a_j, t); the lower triangle is the negative by convention. A
one-cochain Lam assigns a polynomial to every generator.

Time grading. Generators act on the scalar time dependence of a cochain
through the pullback of their flow on the time axis. Only the designated
time generator moves time (t -> t + sigma under its flow), so its action is
(bold(tau) f)(t) = -df/dt, and every other generator acts as zero. Paired
with the ladder normalization [d, tau] = +d' of the built-in algebras, this
orientation is what produces the downstream integration recurrences with
plus signs; flipping either the grading sign or the ladder sign alone would
flip them.

Admissibility of one-cochains. Lam must pair constantly with each generator
along that generator's own flow. Flows of generators other than the time
generator keep t fixed, so their components are unconstrained polynomials;
the time generator's flow translates t, so its component must be constant.
Algebras without a time generator carry no constraint at all.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .lie import LieAlgebra
from .ratpoly import RatPoly, as_fraction

__all__ = ["TwoCochain", "OneCochain", "coboundary", "jacobi_residual", "is_cocycle",
           "time_grading"]


def time_grading(alg: LieAlgebra, gen_index: int, p: RatPoly) -> RatPoly:
    """bold(a_k) applied to a scalar value: -d/dt for the time generator, else 0."""
    if alg.time_index is not None and gen_index == alg.time_index:
        return -p.differentiate()
    return RatPoly.zero()


def _as_poly(value) -> RatPoly:
    if isinstance(value, RatPoly):
        return value
    if isinstance(value, (int, Fraction)):
        return RatPoly((value,))
    raise TypeError("RatPoly or exact rational expected, got %r" % (value,))


class TwoCochain:
    """Antisymmetric polynomial-valued bilinear form on an algebra's basis."""

    __slots__ = ("alg", "_entries")

    def __init__(self, alg: LieAlgebra,
                 entries: Optional[Dict[Tuple[int, int], RatPoly]] = None) -> None:
        table: Dict[Tuple[int, int], RatPoly] = {}
        n = alg.dim
        for (i, j), p in (entries or {}).items():
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError("entry index out of range: (%r, %r)" % (i, j))
            if i >= j:
                raise ValueError("entries are stored strictly upper-triangular")
            p = _as_poly(p)
            if not p.is_zero():
                table[(i, j)] = p
        self.alg = alg
        self._entries = table

    @classmethod
    def zero(cls, alg: LieAlgebra) -> "TwoCochain":
        return cls(alg)

    @classmethod
    def from_labels(cls, alg: LieAlgebra, entries: Dict[Tuple[str, str], object]) -> "TwoCochain":
        table: Dict[Tuple[int, int], RatPoly] = {}
        for (l1, l2), p in entries.items():
            i, j = alg.index(l1), alg.index(l2)
            p = _as_poly(p)
            if i == j:
                raise ValueError("diagonal entry (%s, %s)" % (l1, l2))
            if i > j:
                i, j, p = j, i, -p
            table[(i, j)] = table.get((i, j), RatPoly.zero()) + p
        return cls(alg, table)

    # -- access --------------------------------------------------------

    def entry(self, i: int, j: int) -> RatPoly:
        if i == j:
            return RatPoly.zero()
        if i < j:
            return self._entries.get((i, j), RatPoly.zero())
        return -self._entries.get((j, i), RatPoly.zero())

    def entry_by_labels(self, l1: str, l2: str) -> RatPoly:
        return self.entry(self.alg.index(l1), self.alg.index(l2))

    def nonzero_entries(self) -> Dict[Tuple[int, int], RatPoly]:
        return dict(self._entries)

    def is_zero(self) -> bool:
        return not self._entries

    def max_degree(self) -> int:
        return max((p.degree for p in self._entries.values()), default=-1)

    def pair_value(self, x: Sequence, y: Sequence) -> RatPoly:
        """Bilinear extension Xi(x, y) for coefficient vectors x, y."""
        if len(x) != self.alg.dim or len(y) != self.alg.dim:
            raise ValueError("vector length does not match algebra dimension")
        x = [as_fraction(c) for c in x]
        y = [as_fraction(c) for c in y]
        out = RatPoly.zero()
        for (i, j), p in self._entries.items():
            w = x[i] * y[j] - x[j] * y[i]
            if w != 0:
                out = out + p * w
        return out

    # -- linear structure ------------------------------------------------

    def _check_same_algebra(self, other: "TwoCochain") -> None:
        if self.alg is not other.alg and self.alg.labels != other.alg.labels:
            raise ValueError("cochains live on different algebras")

    def __add__(self, other: "TwoCochain") -> "TwoCochain":
        if not isinstance(other, TwoCochain):
            return NotImplemented
        self._check_same_algebra(other)
        keys = set(self._entries) | set(other._entries)
        return TwoCochain(self.alg, {k: self.entry(*k) + other.entry(*k) for k in keys})

    def __sub__(self, other: "TwoCochain") -> "TwoCochain":
        if not isinstance(other, TwoCochain):
            return NotImplemented
        return self.__add__(-other)

    def __neg__(self) -> "TwoCochain":
        return TwoCochain(self.alg, {k: -p for k, p in self._entries.items()})

    def __mul__(self, scalar) -> "TwoCochain":
        c = as_fraction(scalar)
        return TwoCochain(self.alg, {k: p * c for k, p in self._entries.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, TwoCochain):
            return NotImplemented
        return self.alg.labels == other.alg.labels and self._entries == other._entries

    def __hash__(self):
        return hash((self.alg.labels,
                     tuple(sorted((k, p.coeffs) for k, p in self._entries.items()))))

    # -- serialization -----------------------------------------------------

    def to_jsonable(self) -> List[dict]:
        out = []
        for (i, j) in sorted(self._entries):
            out.append({
                "i": self.alg.labels[i],
                "j": self.alg.labels[j],
                "poly": self._entries[(i, j)].to_strings(),
            })
        return out

    @classmethod
    def from_jsonable(cls, alg: LieAlgebra, data: Iterable[dict]) -> "TwoCochain":
        entries = {}
        for item in data:
            i, j = alg.index(item["i"]), alg.index(item["j"])
            if i >= j:
                raise ValueError("entries must be upper-triangular, got (%s, %s)"
                                 % (item["i"], item["j"]))
            entries[(i, j)] = RatPoly.from_strings(item["poly"])
        return cls(alg, entries)

    def __repr__(self) -> str:
        return "TwoCochain(%s, %d nonzero entries)" % (self.alg.name, len(self._entries))


class OneCochain:
    """Polynomial covector on the algebra basis, admissible for coboundaries."""

    __slots__ = ("alg", "components")

    def __init__(self, alg: LieAlgebra, components: Sequence) -> None:
        comps = tuple(_as_poly(p) for p in components)
        if len(comps) != alg.dim:
            raise ValueError("component count does not match algebra dimension")
        ti = alg.time_index
        if ti is not None and not comps[ti].is_constant():
            raise ValueError(
                "the time-generator component must be constant in t, got %s"
                % (comps[ti],))
        self.alg = alg
        self.components = comps

    @classmethod
    def zero(cls, alg: LieAlgebra) -> "OneCochain":
        return cls(alg, (RatPoly.zero(),) * alg.dim)

    @classmethod
    def from_labels(cls, alg: LieAlgebra, components: Dict[str, object]) -> "OneCochain":
        comps = [RatPoly.zero()] * alg.dim
        for label, p in components.items():
            comps[alg.index(label)] = _as_poly(p)
        return cls(alg, comps)

    def value(self, terms: Iterable[Tuple[int, Fraction]]) -> RatPoly:
        """Lam applied to a sum of basis terms ((index, coeff), ...)."""
        out = RatPoly.zero()
        for k, c in terms:
            out = out + self.components[k] * c
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, OneCochain):
            return NotImplemented
        return self.alg.labels == other.alg.labels and self.components == other.components

    def __repr__(self) -> str:
        nz = sum(1 for p in self.components if not p.is_zero())
        return "OneCochain(%s, %d nonzero components)" % (self.alg.name, nz)


def coboundary(lam: OneCochain) -> TwoCochain:
    """d[Lam](a_i, a_j) = bold(a_i)Lam_j - bold(a_j)Lam_i - Lam([a_i, a_j])."""
    alg = lam.alg
    entries: Dict[Tuple[int, int], RatPoly] = {}
    for (i, j) in alg.pairs():
        p = time_grading(alg, i, lam.components[j]) \
            - time_grading(alg, j, lam.components[i]) \
            - lam.value(alg.bracket_basis(i, j))
        if not p.is_zero():
            entries[(i, j)] = p
    return TwoCochain(alg, entries)


def jacobi_residual(xi: TwoCochain, i: int, j: int, k: int) -> RatPoly:
    """Cocycle defect on the basis triple (i, j, k); zero iff the condition holds there.

    Xi([a_i,a_j], a_k) + Xi([a_j,a_k], a_i) + Xi([a_k,a_i], a_j)
      - bold(a_i)Xi(a_j,a_k) - bold(a_j)Xi(a_k,a_i) - bold(a_k)Xi(a_i,a_j)
    """
    if len({i, j, k}) != 3:
        raise ValueError("indices must be distinct")
    alg = xi.alg
    out = RatPoly.zero()
    for (p, q, r) in ((i, j, k), (j, k, i), (k, i, j)):
        for m, c in alg.bracket_basis(p, q):
            out = out + xi.entry(m, r) * c
        out = out - time_grading(alg, p, xi.entry(q, r))
    return out


def is_cocycle(xi: TwoCochain) -> bool:
    """True iff the Jacobi residual vanishes identically on every basis triple."""
    n = xi.alg.dim
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if not jacobi_residual(xi, i, j, k).is_zero():
                    return False
    return True
