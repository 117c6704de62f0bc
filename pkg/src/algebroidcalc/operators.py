"""Normal-ordered differential operators on a polynomial chart.

An operator is a sum of terms (coefficient polynomial) * (derivative word);
the word is stored as a monomial over designated momentum variables of a
companion cotangent chart, read left to right as a composition of left
derivatives (first factor outermost).  Composition is exact via the operator
Leibniz rule, so graded commutators and total symbols come out symbolically.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

from .algebra import Chart, GradedPolynomial, key_parity, mul_keys
from .errors import ChartMismatchError, ConventionError


class OperatorAlgebra:
    """Wiring between a form chart and the momentum variables encoding derivatives.

    `deriv_map` sends each momentum name (on the cotangent chart) to the form
    chart variable it differentiates.  Momentum parities must match their form
    variables so that derivative words reorder exactly like momentum monomials.
    """

    def __init__(self, form_chart: Chart, cotangent: Chart, deriv_map: Mapping[str, str]):
        self.form_chart = form_chart
        self.cotangent = cotangent
        self.deriv_map = dict(deriv_map)
        self.momentum_idx: Dict[int, str] = {}
        for mom, var in self.deriv_map.items():
            mi = cotangent.index(mom)
            if cotangent.parities[mi] != form_chart.var(var).parity:
                raise ConventionError(f"momentum {mom} and variable {var} disagree in parity")
            self.momentum_idx[mi] = var
        for v in form_chart.variables:
            if not cotangent.has(v.name):
                raise ConventionError(f"cotangent chart must contain form variable {v.name}")

    def zero(self) -> "DiffOperator":
        return DiffOperator(self, {})

    def multiplication(self, f: GradedPolynomial) -> "DiffOperator":
        if f.chart is not self.form_chart:
            raise ChartMismatchError("multiplication operator wants a form-chart polynomial")
        return DiffOperator(self, {(): f} if f else {})

    def single_derivative(self, mom_name: str) -> "DiffOperator":
        key = ((self.cotangent.index(mom_name), 1),)
        return DiffOperator(self, {key: self.form_chart.one()})

    def word_parity(self, word) -> int:
        return key_parity(self.cotangent, word)


class DiffOperator:
    """terms: derivative word (momentum key) -> coefficient polynomial."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: OperatorAlgebra, terms: Mapping[Tuple, GradedPolynomial]):
        self.algebra = algebra
        self.terms = {w: c for w, c in terms.items() if c}

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return (isinstance(other, DiffOperator) and self.algebra is other.algebra
                and self.terms == other.terms)

    def parity(self) -> Optional[int]:
        p = None
        for w, c in self.terms.items():
            cp = c.parity()
            if cp is None:
                return None
            tp = (cp + self.algebra.word_parity(w)) & 1
            if p is None:
                p = tp
            elif p != tp:
                return None
        return 0 if p is None else p

    def parity_part(self, parity: int) -> "DiffOperator":
        out: Dict[Tuple, GradedPolynomial] = {}
        for w, c in self.terms.items():
            wp = self.algebra.word_parity(w)
            part = c.parity_part((parity + wp) & 1)
            if part:
                out[w] = part
        return DiffOperator(self.algebra, out)

    def order(self) -> int:
        return max((sum(e for _, e in w) for w in self.terms), default=0)

    # -- module structure ------------------------------------------------------

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        terms = dict(self.terms)
        for w, c in other.terms.items():
            n = terms.get(w)
            terms[w] = c if n is None else n + c
        return DiffOperator(self.algebra, terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "DiffOperator":
        c = Fraction(c)
        return DiffOperator(self.algebra, {w: v * c for w, v in self.terms.items()})

    def left_multiply(self, f: GradedPolynomial) -> "DiffOperator":
        """The operator (f *) o self; coefficients sit left of derivatives."""
        return DiffOperator(self.algebra, {w: f * c for w, c in self.terms.items()})

    # -- action and composition -------------------------------------------------

    def _word_derivative(self, word, f: GradedPolynomial) -> GradedPolynomial:
        """Apply the derivative word to a polynomial; first factor outermost."""
        names = []
        for i, e in word:
            names.extend([self.algebra.momentum_idx[i]] * e)
        for n in reversed(names):
            f = f.derivative(n)
            if f.is_zero():
                break
        return f

    def apply(self, f: GradedPolynomial) -> GradedPolynomial:
        if f.chart is not self.algebra.form_chart:
            raise ChartMismatchError("operator applied off its form chart")
        out = self.algebra.form_chart.zero()
        for w, c in self.terms.items():
            d = self._word_derivative(w, f)
            if d:
                out = out + c * d
        return out

    def __call__(self, f):
        return self.apply(f)

    def _derive_operator(self, mom_i: int, mom_parity: int) -> "DiffOperator":
        """The composition d_u o self, expanded by the operator Leibniz rule."""
        alg = self.algebra
        var = alg.momentum_idx[mom_i]
        out: Dict[Tuple, GradedPolynomial] = {}

        def add(w, c):
            if c:
                n = out.get(w)
                out[w] = c if n is None else n + c

        for w, c in self.terms.items():
            dc = c.derivative(var)
            if dc:
                add(w, dc)
            for cp in (0, 1):
                part = c.parity_part(cp)
                if not part:
                    continue
                s, nw = mul_keys(alg.cotangent, ((mom_i, 1),), w)
                if s == 0:
                    continue
                sign = s * (-1 if (mom_parity & cp) else 1)
                add(nw, part if sign == 1 else -part)
        return DiffOperator(alg, out)

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        """self o other (apply other first)."""
        if self.algebra is not other.algebra:
            raise ChartMismatchError("operators live on different algebras")
        alg = self.algebra
        result = alg.zero()
        for w, c in self.terms.items():
            acc = other
            factors = []
            for i, e in w:
                factors.extend([i] * e)
            for i in reversed(factors):
                acc = acc._derive_operator(i, alg.cotangent.parities[i])
                if acc.is_zero():
                    break
            if not acc.is_zero():
                result = result + acc.left_multiply(c)
        return result

    def commutator(self, other: "DiffOperator") -> "DiffOperator":
        """Graded commutator [self, other]; splits mixed parities as needed."""
        out = self.algebra.zero()
        for pa in (0, 1):
            a = self.parity_part(pa)
            if a.is_zero():
                continue
            for pb in (0, 1):
                b = other.parity_part(pb)
                if b.is_zero():
                    continue
                ab = a.compose(b)
                ba = b.compose(a)
                out = out + ab - (ba if not (pa & pb) else ba.scale(-1))
        return out

    # -- symbols -----------------------------------------------------------------

    def symbol(self) -> GradedPolynomial:
        """Total symbol: coefficient (injected) times momentum word, per term."""
        cot = self.algebra.cotangent
        inject = {v.name: cot.gen(v.name) for v in self.algebra.form_chart.variables}
        out = cot.zero()
        for w, c in self.terms.items():
            mono = GradedPolynomial(cot, {w: Fraction(1)})
            out = out + c.substitute(inject, cot) * mono
        return out

    def render(self) -> str:
        return self.symbol().render()

    def __repr__(self):
        return f"<operator {self.render()}>"
