"""Exact supercommutative polynomial arithmetic over the rationals.

Variables carry a Z2 parity and an integer weight.  Polynomials are stored
sparsely as canonical monomials; all reordering signs follow the Koszul rule
(transposing two odd factors negates the coefficient).  Derivatives are left
derivatives throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .errors import ChartMismatchError, ConventionError, DeclarationError

Key = tuple  # tuple of (variable index, exponent), sorted by index


@dataclass(frozen=True)
class GradedVariable:
    name: str
    parity: int
    weight: int = 0

    def __post_init__(self):
        if self.parity not in (0, 1):
            raise ConventionError(f"parity of {self.name} must be 0 or 1")


class Chart:
    """An ordered list of graded variables; the generators of one algebra."""

    def __init__(self, name: str, variables: Sequence[GradedVariable]):
        self.name = name
        self.variables = tuple(variables)
        self._index = {}
        for i, v in enumerate(self.variables):
            if v.name in self._index:
                raise DeclarationError(f"duplicate variable {v.name} on chart {name}")
            self._index[v.name] = i
        self.parities = tuple(v.parity for v in self.variables)
        self.weights = tuple(v.weight for v in self.variables)

    def __repr__(self):
        return f"Chart({self.name}, {[v.name for v in self.variables]})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise DeclarationError(f"unknown variable {name} on chart {self.name}") from None

    def has(self, name: str) -> bool:
        return name in self._index

    def var(self, name: str) -> GradedVariable:
        return self.variables[self.index(name)]

    # -- polynomial constructors -------------------------------------------

    def zero(self) -> "GradedPolynomial":
        return GradedPolynomial(self, {})

    def one(self) -> "GradedPolynomial":
        return self.scalar(1)

    def scalar(self, c) -> "GradedPolynomial":
        c = Fraction(c)
        return GradedPolynomial(self, {(): c} if c else {})

    def gen(self, name: str) -> "GradedPolynomial":
        return GradedPolynomial(self, {((self.index(name), 1),): Fraction(1)})

    def monomial(self, coeff, factors: Iterable[tuple]) -> "GradedPolynomial":
        """Build coeff * product of (name, exponent) factors, in the given order."""
        coeff = Fraction(coeff)
        if not coeff:
            return self.zero()
        idx_factors = [(self.index(n), e) for n, e in factors]
        sign, key = normalize_factors(self, idx_factors)
        if sign == 0:
            return self.zero()
        return GradedPolynomial(self, {key: coeff * sign})


# -- monomial key helpers ---------------------------------------------------


def key_parity(chart: Chart, key: Key) -> int:
    p = 0
    for i, e in key:
        p += chart.parities[i] * e
    return p & 1


def key_weight(chart: Chart, key: Key) -> int:
    return sum(chart.weights[i] * e for i, e in key)


def mul_keys(chart: Chart, k1: Key, k2: Key):
    """Merge two canonical keys; returns (sign, key), sign 0 when the product dies."""
    if not k1:
        return 1, k2
    if not k2:
        return 1, k1
    parities = chart.parities
    # parity of the suffix k1[i:]
    n1 = len(k1)
    suffix = [0] * (n1 + 1)
    for i in range(n1 - 1, -1, -1):
        idx, e = k1[i]
        suffix[i] = (suffix[i + 1] + parities[idx] * e) & 1
    out = []
    exp = 0
    i = j = 0
    while i < n1 and j < len(k2):
        i1, e1 = k1[i]
        i2, e2 = k2[j]
        if i1 < i2:
            out.append(k1[i])
            i += 1
        elif i1 > i2:
            exp ^= (parities[i2] & e2) & suffix[i]
            out.append(k2[j])
            j += 1
        else:
            if parities[i1]:
                return 0, None  # odd square
            out.append((i1, e1 + e2))
            i += 1
            j += 1
    out.extend(k1[i:])
    out.extend(k2[j:])
    return (-1 if exp else 1), tuple(out)


def normalize_factors(chart: Chart, factors: Sequence[tuple]):
    """Canonical form of an arbitrarily ordered factor list (index, exponent).

    Returns (sign, key); sign 0 when an odd variable repeats.
    """
    sign = 1
    key: Key = ()
    for i, e in factors:
        if e < 0:
            raise ConventionError("negative exponents are not supported")
        if e == 0:
            continue
        if chart.parities[i] and e > 1:
            return 0, None
        s, key = mul_keys(chart, key, ((i, e),))
        if s == 0:
            return 0, None
        sign *= s
    return sign, key


class GradedPolynomial:
    """Sparse exact polynomial on a chart; immutable by convention."""

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms: Mapping[Key, Fraction]):
        self.chart = chart
        self.terms = {k: c for k, c in terms.items() if c}

    # -- basic queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, GradedPolynomial):
            return NotImplemented
        return self.chart is other.chart and self.terms == other.terms

    def __hash__(self):
        return hash((id(self.chart), frozenset(self.terms.items())))

    def parity(self) -> Optional[int]:
        """Parity when homogeneous (0 for the zero polynomial), else None."""
        p = None
        for k in self.terms:
            kp = key_parity(self.chart, k)
            if p is None:
                p = kp
            elif p != kp:
                return None
        return 0 if p is None else p

    def parity_part(self, parity: int) -> "GradedPolynomial":
        return GradedPolynomial(
            self.chart,
            {k: c for k, c in self.terms.items() if key_parity(self.chart, k) == parity},
        )

    def weight(self) -> Optional[int]:
        """Weight when homogeneous (0 for the zero polynomial), else None."""
        w = None
        for k in self.terms:
            kw = key_weight(self.chart, k)
            if w is None:
                w = kw
            elif w != kw:
                return None
        return 0 if w is None else w

    def weights(self) -> set:
        return {key_weight(self.chart, k) for k in self.terms}

    def weight_component(self, w: int) -> "GradedPolynomial":
        return GradedPolynomial(
            self.chart,
            {k: c for k, c in self.terms.items() if key_weight(self.chart, k) == w},
        )

    def degree_in(self, names: Iterable[str]) -> int:
        """Largest total exponent of the named variables over all terms."""
        idxs = {self.chart.index(n) for n in names}
        best = 0
        for k in self.terms:
            best = max(best, sum(e for i, e in k if i in idxs))
        return best

    def degree_component(self, names: Iterable[str], d: int) -> "GradedPolynomial":
        idxs = {self.chart.index(n) for n in names}
        return GradedPolynomial(
            self.chart,
            {k: c for k, c in self.terms.items() if sum(e for i, e in k if i in idxs) == d},
        )

    def free_of(self, names: Iterable[str]) -> bool:
        idxs = {self.chart.index(n) for n in names}
        return all(i not in idxs for k in self.terms for i, _ in k)

    def variables_used(self) -> set:
        return {self.chart.variables[i].name for k in self.terms for i, _ in k}

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    # -- arithmetic ------------------------------------------------------------

    def _check_chart(self, other: "GradedPolynomial"):
        if self.chart is not other.chart:
            raise ChartMismatchError(
                f"operands live on different charts: {self.chart.name} vs {other.chart.name}"
            )

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.chart.scalar(other)
        self._check_chart(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            nc = terms.get(k, 0) + c
            if nc:
                terms[k] = nc
            else:
                terms.pop(k, None)
        return GradedPolynomial(self.chart, terms)

    __radd__ = __add__

    def __neg__(self):
        return GradedPolynomial(self.chart, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.chart.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if not c:
                return self.chart.zero()
            return GradedPolynomial(self.chart, {k: v * c for k, v in self.terms.items()})
        self._check_chart(other)
        chart = self.chart
        out: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                s, k = mul_keys(chart, k1, k2)
                if s == 0:
                    continue
                nc = out.get(k, 0) + c1 * c2 * s
                if nc:
                    out[k] = nc
                else:
                    out.pop(k, None)
        return GradedPolynomial(chart, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.__mul__(other)
        return NotImplemented

    def __truediv__(self, other):
        return self.__mul__(Fraction(1, 1) / Fraction(other))

    def __pow__(self, n: int):
        if n < 0:
            raise ConventionError("negative powers are not supported")
        result = self.chart.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- calculus ---------------------------------------------------------------

    def derivative(self, name: str) -> "GradedPolynomial":
        """Left derivative with respect to the named variable."""
        chart = self.chart
        vi = chart.index(name)
        vp = chart.parities[vi]
        out: dict = {}
        for k, c in self.terms.items():
            prefix_parity = 0
            for pos, (i, e) in enumerate(k):
                if i == vi:
                    sign = -1 if (vp and (prefix_parity & 1)) else 1
                    rest = ((i, e - 1),) if e > 1 else ()
                    nk = k[:pos] + rest + k[pos + 1:]
                    nc = out.get(nk, 0) + c * e * sign
                    if nc:
                        out[nk] = nc
                    else:
                        out.pop(nk, None)
                    break
                prefix_parity += chart.parities[i] * e
        return GradedPolynomial(chart, out)

    def substitute(self, assignment: Mapping[str, "GradedPolynomial"], target: Chart) -> "GradedPolynomial":
        """Algebra-map substitution: every variable used must be assigned."""
        out = target.zero()
        cache: dict = {}
        for k, c in self.terms.items():
            acc = target.scalar(c)
            for i, e in k:
                name = self.chart.variables[i].name
                if name not in assignment:
                    raise DeclarationError(f"no assignment for variable {name}")
                pk = (name, e)
                power = cache.get(pk)
                if power is None:
                    power = assignment[name] ** e
                    cache[pk] = power
                acc = acc * power
                if acc.is_zero():
                    break
            out = out + acc
        return out

    def coefficient_of(self, name: str, power: int) -> "GradedPolynomial":
        """Terms carrying the named variable to exactly `power`, with it removed."""
        vi = self.chart.index(name)
        out: dict = {}
        for k, c in self.terms.items():
            e = 0
            rest = []
            for i, ex in k:
                if i == vi:
                    e = ex
                else:
                    rest.append((i, ex))
            if e == power:
                # the variable is even/central in every use of this helper
                out[tuple(rest)] = out.get(tuple(rest), 0) + c
        return GradedPolynomial(self.chart, out)

    # -- rendering ---------------------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0])

    def render(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for k, c in self.sorted_terms():
            factors = []
            for i, e in k:
                n = self.chart.variables[i].name
                factors.append(n if e == 1 else f"{n}^{e}")
            body = "*".join(factors)
            mag = abs(c)
            if not factors:
                txt = str(mag)
            elif mag == 1:
                txt = body
            else:
                txt = f"{mag}*{body}"
            pieces.append(("- " if c < 0 else "+ ") + txt)
        first = pieces[0]
        out = ("-" + first[2:]) if first.startswith("- ") else first[2:]
        for p in pieces[1:]:
            out += " " + p
        return out

    def __repr__(self):
        return f"<{self.render()} on {self.chart.name}>"


# -- the spec-level operations ------------------------------------------------


def normalize(chart: Chart, coeff, factors: Sequence[tuple]) -> GradedPolynomial:
    """Canonical monomial from an unordered factor list of (name, exponent)."""
    return chart.monomial(coeff, factors)


def mul(f: GradedPolynomial, g: GradedPolynomial) -> GradedPolynomial:
    return f * g


def left_derivative(f: GradedPolynomial, v: str) -> GradedPolynomial:
    return f.derivative(v)


def weight_component(f: GradedPolynomial, w: int) -> GradedPolynomial:
    return f.weight_component(w)


def pullback(f: GradedPolynomial, m: "ChartMorphism") -> GradedPolynomial:
    return m.pullback(f)


# -- chart morphisms -----------------------------------------------------------


class ChartMorphism:
    """A map of charts source -> target, stored through its pullback data.

    `assignment` sends every generator of the target chart to a polynomial on
    the source chart.  Parity must match generator by generator; weight is
    checked and recorded (mismatches are reported, not fatal).
    """

    def __init__(self, source: Chart, target: Chart,
                 assignment: Mapping[str, GradedPolynomial], name: str = ""):
        self.source = source
        self.target = target
        self.name = name or f"{source.name}->{target.name}"
        self.assignment = {}
        mismatches = []
        for v in target.variables:
            if v.name not in assignment:
                raise DeclarationError(f"morphism {self.name}: no assignment for {v.name}")
            value = assignment[v.name]
            if value.chart is not source:
                raise ChartMismatchError(
                    f"morphism {self.name}: value for {v.name} lives off the source chart")
            p = value.parity()
            if value and (p is None or p != v.parity):
                raise ConventionError(
                    f"morphism {self.name}: assignment for {v.name} has parity {p}, "
                    f"expected {v.parity}")
            w = value.weight()
            if value and (w is None or w != v.weight):
                mismatches.append((v.name, v.weight, sorted(value.weights())))
            self.assignment[v.name] = value
        self.weight_mismatches = tuple(mismatches)

    def __repr__(self):
        return f"ChartMorphism({self.name})"

    @staticmethod
    def identity(chart: Chart) -> "ChartMorphism":
        return ChartMorphism(chart, chart, {v.name: chart.gen(v.name) for v in chart.variables},
                             name=f"id_{chart.name}")

    def pullback(self, f: GradedPolynomial) -> GradedPolynomial:
        if f.chart is not self.target:
            raise ChartMismatchError(
                f"pullback along {self.name} expects functions on {self.target.name}")
        return f.substitute(self.assignment, self.source)

    def then(self, other: "ChartMorphism") -> "ChartMorphism":
        """Geometric composition: self A->B followed by other B->C gives A->C."""
        if other.source is not self.target:
            raise ChartMismatchError(f"cannot compose {self.name} with {other.name}")
        assignment = {name: self.pullback(val) for name, val in other.assignment.items()}
        return ChartMorphism(self.source, other.target, assignment,
                             name=f"{other.name} o {self.name}")

    # -- invertibility (constant generator-linear assignments only) ----------

    def linear_matrix(self):
        """Constant matrix M with assignment(t_j) = sum_i M[j][i] s_i, or None."""
        n_t = len(self.target.variables)
        n_s = len(self.source.variables)
        if n_t != n_s:
            return None
        M = [[Fraction(0)] * n_s for _ in range(n_t)]
        for j, v in enumerate(self.target.variables):
            for k, c in self.assignment[v.name].terms.items():
                if len(k) != 1 or k[0][1] != 1:
                    return None
                M[j][k[0][0]] = c
        return M

    @property
    def invertible(self) -> bool:
        M = self.linear_matrix()
        return M is not None and _invert_matrix(M) is not None

    def inverse(self) -> "ChartMorphism":
        M = self.linear_matrix()
        N = _invert_matrix(M) if M is not None else None
        if N is None:
            raise ConventionError(f"morphism {self.name} is not constant-linear invertible")
        assignment = {}
        for i, s in enumerate(self.source.variables):
            val = self.target.zero()
            for j, t in enumerate(self.target.variables):
                if N[i][j]:
                    val = val + N[i][j] * self.target.gen(t.name)
            assignment[s.name] = val
        return ChartMorphism(self.target, self.source, assignment, name=f"{self.name}^-1")


def _invert_matrix(M):
    """Exact Gauss-Jordan inverse over Fraction; None when singular."""
    n = len(M)
    A = [row[:] + [Fraction(1) if i == j else Fraction(0) for j in range(n)]
         for i, row in enumerate(M)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r][col]), None)
        if pivot is None:
            return None
        A[col], A[pivot] = A[pivot], A[col]
        pv = A[col][col]
        A[col] = [x / pv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [row[n:] for row in A]


# -- derivations ----------------------------------------------------------------


class Derivation:
    """A graded derivation given by its values on generators (left coefficients).

    Acts as D(f) = sum_u D(u) * d_l f / du; generators without a value are
    annihilated.
    """

    def __init__(self, chart: Chart, values: Mapping[str, GradedPolynomial], parity: int,
                 name: str = ""):
        self.chart = chart
        self.parity = parity & 1
        self.name = name
        self.values = {}
        for n, v in values.items():
            chart.index(n)
            if v.chart is not chart:
                raise ChartMismatchError(f"derivation {name}: value for {n} off chart")
            p = v.parity()
            if v and (p is None or p != (chart.var(n).parity + self.parity) & 1):
                raise ConventionError(
                    f"derivation {name}: value for {n} breaks the declared parity")
            if v:
                self.values[n] = v

    def __call__(self, f: GradedPolynomial) -> GradedPolynomial:
        if f.chart is not self.chart:
            raise ChartMismatchError(f"derivation {self.name} applied off its chart")
        out = self.chart.zero()
        for n, v in self.values.items():
            d = f.derivative(n)
            if d:
                out = out + v * d
        return out

    def compose_on_generators(self) -> dict:
        """Values of D o D on every generator (the square as a derivation)."""
        return {v.name: self(self(self.chart.gen(v.name))) for v in self.chart.variables}
