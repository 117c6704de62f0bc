"""Canonical Poisson (epsilon=0) and Schouten (epsilon=1) brackets.

A canonical chart carries conjugate pairs (q, p) with parity(p) = parity(q) +
epsilon.  The bracket is the biderivation fixed by {p, q} = +1 on every pair,
extended by graded Leibniz with left derivatives:

    {f,g} = sum_i  (-1)^((f+eps)(k_i+eps) + k_i(1+eps)) d_p_i f * d_q_i g
          - sum_i  (-1)^((f+eps)k_i)                    d_q_i f * d_p_i g

with k_i the parity of the position variable q_i.  Derived brackets, master
equation residuals, Jacobiators (via Delta^2 and via the shuffle sum) live
here too.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .algebra import Chart, GradedPolynomial, GradedVariable
from .errors import ChartMismatchError, ConventionError, ProjectorError


class CanonicalChart(Chart):
    """A chart with conjugate-pair data and a bracket parity epsilon."""

    def __init__(self, name: str, variables, pairs: Sequence[tuple], epsilon: int):
        super().__init__(name, variables)
        self.epsilon = epsilon & 1
        self.pairs = tuple(pairs)
        seen = set()
        w0 = None
        for q, p in self.pairs:
            qi, pi = self.index(q), self.index(p)
            if (self.parities[pi] - self.parities[qi] - self.epsilon) % 2 != 0:
                raise ConventionError(
                    f"chart {name}: pair ({q},{p}) breaks parity(p)=parity(q)+epsilon")
            w = -(self.weights[qi] + self.weights[pi])
            if w0 is None:
                w0 = w
            elif w0 != w:
                raise ConventionError(f"chart {name}: pairing weight is not uniform")
            seen.update((qi, pi))
        if len(seen) != 2 * len(self.pairs):
            raise ConventionError(f"chart {name}: a variable occurs in two pairs")
        self.central = tuple(v.name for i, v in enumerate(self.variables) if i not in seen)
        for n in self.central:
            v = self.var(n)
            if v.parity or v.weight:
                raise ConventionError(
                    f"chart {name}: unpaired variable {n} must be even of weight 0")
        self.pairing_weight = 0 if w0 is None else w0

    def momenta(self):
        return [p for _, p in self.pairs]

    def positions(self):
        return [q for q, _ in self.pairs]


def _sgn(e: int) -> int:
    return -1 if e & 1 else 1


def canonical_bracket(chart: CanonicalChart, f: GradedPolynomial,
                      g: GradedPolynomial) -> GradedPolynomial:
    if not isinstance(chart, CanonicalChart):
        raise ConventionError(f"chart {chart.name} carries no bracket")
    if f.chart is not chart or g.chart is not chart:
        raise ChartMismatchError("bracket arguments must live on the bracket chart")
    eps = chart.epsilon
    out = chart.zero()
    for a in (0, 1):
        fp = f.parity_part(a)
        if fp.is_zero():
            continue
        for q, p in chart.pairs:
            k = chart.parities[chart.index(q)]
            dfp = fp.derivative(p)
            if dfp:
                dgq = g.derivative(q)
                if dgq:
                    s = _sgn((a ^ eps) & (k ^ eps) ^ (k & (1 ^ eps)))
                    out = out + s * (dfp * dgq)
            dfq = fp.derivative(q)
            if dfq:
                dgp = g.derivative(p)
                if dgp:
                    s = -_sgn((a ^ eps) & k)
                    out = out + s * (dfq * dgp)
    return out


@dataclass(frozen=True)
class BracketReport:
    residual: GradedPolynomial
    holds: bool

    @staticmethod
    def of(residual: GradedPolynomial) -> "BracketReport":
        return BracketReport(residual, residual.is_zero())


def master_residual(chart: CanonicalChart, theta: GradedPolynomial) -> BracketReport:
    """Residual {theta, theta}; the structure closes iff it vanishes."""
    p = theta.parity()
    if theta and p != (chart.epsilon ^ 1):
        warnings.warn(
            f"master equation argument on {chart.name} has parity {p}, "
            f"expected {chart.epsilon ^ 1}", stacklevel=2)
    return BracketReport.of(canonical_bracket(chart, theta, theta))


class ZeroProjector:
    """Restriction to the zero section: substitute 0 for the named variables."""

    def __init__(self, chart: Chart, names: Iterable[str]):
        self.chart = chart
        self.names = frozenset(names)
        self._idx = frozenset(chart.index(n) for n in self.names)

    def __call__(self, f: GradedPolynomial) -> GradedPolynomial:
        return GradedPolynomial(
            f.chart, {k: c for k, c in f.terms.items()
                      if all(i not in self._idx for i, _ in k)})

    def admits(self, f: GradedPolynomial) -> bool:
        return f.free_of(self.names)


def momentum_projector(chart: CanonicalChart) -> ZeroProjector:
    return ZeroProjector(chart, chart.momenta())


def derived_bracket(chart: CanonicalChart, delta: GradedPolynomial,
                    args: Sequence[GradedPolynomial],
                    restrict: Optional[ZeroProjector] = None) -> GradedPolynomial:
    """(a_1,...,a_n) = restrict([...[[delta,a_1],a_2]...,a_n])."""
    if restrict is None:
        restrict = momentum_projector(chart)
    for a in args:
        if not restrict.admits(a):
            raise ProjectorError("derived-bracket argument is not in the abelian subalgebra")
    acc = delta
    for a in args:
        acc = canonical_bracket(chart, acc, a)
    return restrict(acc)


def jacobiator(chart: CanonicalChart, delta: GradedPolynomial,
               args: Sequence[GradedPolynomial],
               restrict: Optional[ZeroProjector] = None) -> GradedPolynomial:
    """n-th Jacobiator: the derived bracket generated by {delta,delta}/2."""
    half_sq = canonical_bracket(chart, delta, delta) * Fraction(1, 2)
    return derived_bracket(chart, half_sq, args, restrict)


def shuffle_jacobiator(chart: CanonicalChart, delta: GradedPolynomial,
                       args: Sequence[GradedPolynomial],
                       restrict: Optional[ZeroProjector] = None) -> GradedPolynomial:
    """n-th Jacobiator assembled from derived brackets over (k,l)-shuffles.

    Koszul signs are taken with the epsilon-shifted parities; arguments must be
    parity homogeneous.
    """
    if restrict is None:
        restrict = momentum_projector(chart)
    eps = chart.epsilon
    shifted = []
    for a in args:
        p = a.parity()
        if p is None:
            raise ConventionError("shuffle Jacobiator needs parity-homogeneous arguments")
        shifted.append((p + eps) & 1)
    n = len(args)
    out = chart.zero()
    for k in range(n + 1):
        for chosen in combinations(range(n), k):
            comp = [i for i in range(n) if i not in chosen]
            exp = 0
            for j in chosen:
                for i in comp:
                    if i < j:
                        exp ^= shifted[i] & shifted[j]
            inner = derived_bracket(chart, delta, [args[i] for i in chosen], restrict)
            term = derived_bracket(chart, delta, [inner] + [args[i] for i in comp], restrict)
            out = out + _sgn(exp) * term
    return out
