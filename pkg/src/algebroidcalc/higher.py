"""Higher Poisson/Schouten structures, their lifts and derived bracket families.

A higher Poisson structure is an even multivector (a polynomial in x, eta on
the even-bracket chart); a higher Schouten structure is an odd fibrewise
polynomial in x, e on the odd-bracket chart.  Lifting pairs the structure with
S (or P) under the canonical bracket and transports it through the canonical
identification; base and form brackets are derived brackets of the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .algebra import Derivation, GradedPolynomial
from .algebroid import (AlgebroidData, ChartCatalog, StructureEncodings,
                        algebroid_bracket, build_charts, encode)
from .brackets import (BracketReport, ZeroProjector, canonical_bracket,
                       derived_bracket)
from .errors import CalibrationError, ChartMismatchError, ConventionError
from .tulczyjew import canonical_R


@dataclass(frozen=True)
class HigherStructure:
    kind: str            # "poisson" | "schouten"
    body: GradedPolynomial

    def __post_init__(self):
        if self.kind not in ("poisson", "schouten"):
            raise ConventionError(f"unknown higher-structure kind {self.kind!r}")
        want = 0 if self.kind == "poisson" else 1
        p = self.body.parity()
        if self.body and p != want:
            raise ConventionError(f"{self.kind} structure must have parity {want}")


@dataclass(frozen=True)
class LiftedStructure:
    hamiltonian: GradedPolynomial      # H on the cotangent-type chart
    forms_structure: GradedPolynomial  # its transport to the forms-side chart


def _check_body(data: AlgebroidData, cat: ChartCatalog, h: HigherStructure):
    if h.kind == "poisson":
        ch, momenta = cat.schouten, set(cat.schouten.momenta())
    else:
        ch, momenta = cat.poisson, set(cat.poisson.momenta())
    if h.body.chart is not ch:
        raise ChartMismatchError(f"{h.kind} structure must live on {ch.name}")
    if not h.body.free_of(momenta):
        raise ConventionError(f"{h.kind} structure must be free of the momenta")
    return ch


def higher_master_residual(data: AlgebroidData, h: HigherStructure,
                           catalog: Optional[ChartCatalog] = None,
                           encodings: Optional[StructureEncodings] = None) -> BracketReport:
    """[[P,P]]_S = 0 (poisson kind) or {S,S}_P = 0 (schouten kind)."""
    cat = catalog or build_charts(data)
    enc = encodings or encode(data, cat)
    _check_body(data, cat, h)
    side = "schouten" if h.kind == "poisson" else "poisson"
    return BracketReport.of(algebroid_bracket(data, side, h.body, h.body, cat, enc))


def lift(data: AlgebroidData, h: HigherStructure,
         catalog: Optional[ChartCatalog] = None,
         encodings: Optional[StructureEncodings] = None) -> LiftedStructure:
    """H = {S, P} (or [[P, S]]); forms structure via the canonical R.

    The construction identities {S, H} = 0 and [[P,P]]_S = {P, H} (and their
    odd twins) are verified on the way; a failure is a calibration fault.
    """
    cat = catalog or build_charts(data)
    enc = encodings or encode(data, cat)
    _check_body(data, cat, h)
    if h.kind == "poisson":
        ch, theta, side = cat.schouten, enc.S, "schouten"
    else:
        ch, theta, side = cat.poisson, enc.P, "poisson"
    H = canonical_bracket(ch, theta, h.body)
    structures_close = canonical_bracket(ch, theta, theta).is_zero()
    if structures_close and not canonical_bracket(ch, theta, H).is_zero():
        raise CalibrationError("lift", "{S, H} does not vanish on a closed algebroid")
    master = algebroid_bracket(data, side, h.body, h.body, cat, enc)
    pair = canonical_bracket(ch, h.body, H)
    if h.kind == "poisson":
        if master != pair:
            raise CalibrationError("lift", "[[P,P]]_S != {P, H_P}")
    else:
        if master != -pair:
            raise CalibrationError("lift", "{S,S}_P != -[[S, H_S]]")
    R = canonical_R(data, "schouten" if h.kind == "poisson" else "poisson", cat)
    forms = R.inverse().pullback(H)
    return LiftedStructure(hamiltonian=H, forms_structure=forms)


def linfty_field(data: AlgebroidData, h: HigherStructure,
                 catalog: Optional[ChartCatalog] = None,
                 encodings: Optional[StructureEncodings] = None) -> Derivation:
    """Q_P = -[[P, .]]_S on (x, eta), or Q_S = {S, .}_P on (x, e)."""
    cat = catalog or build_charts(data)
    enc = encodings or encode(data, cat)
    _check_body(data, cat, h)
    if h.kind == "poisson":
        ch, side, fiber_pre, sign = cat.schouten, "schouten", "eta_", -1
    else:
        ch, side, fiber_pre, sign = cat.poisson, "poisson", "e_", 1
    values = {}
    for A, _ in data.base:
        values[A] = sign * algebroid_bracket(data, side, h.body, ch.gen(A), cat, enc)
    for a, _ in data.fiber:
        n = fiber_pre + a
        values[n] = sign * algebroid_bracket(data, side, h.body, ch.gen(n), cat, enc)
    return Derivation(ch, values, parity=1, name="Q_" + h.kind)


def base_brackets(data: AlgebroidData, h: HigherStructure,
                  args: Sequence[GradedPolynomial],
                  catalog: Optional[ChartCatalog] = None,
                  encodings: Optional[StructureEncodings] = None) -> GradedPolynomial:
    """Nested algebroid brackets of base functions, restricted to the base."""
    cat = catalog or build_charts(data)
    enc = encodings or encode(data, cat)
    ch = _check_body(data, cat, h)
    side = "schouten" if h.kind == "poisson" else "poisson"
    fiber_pre = "eta_" if h.kind == "poisson" else "e_"
    fiber_names = [fiber_pre + a for a, _ in data.fiber]
    base_names = {A for A, _ in data.base}
    for a in args:
        if a.chart is not ch:
            raise ChartMismatchError("base-bracket arguments must live on the structure chart")
        if not all(n in base_names for n in a.variables_used()):
            raise ConventionError("base-bracket arguments must depend on base variables only")
    acc = h.body
    for a in args:
        acc = algebroid_bracket(data, side, acc, a, cat, enc)
    return ZeroProjector(ch, fiber_names)(acc)


def forms_brackets(data: AlgebroidData, h: HigherStructure,
                   args: Sequence[GradedPolynomial],
                   catalog: Optional[ChartCatalog] = None,
                   encodings: Optional[StructureEncodings] = None,
                   lifted: Optional[LiftedStructure] = None) -> GradedPolynomial:
    """Derived brackets of the lifted structure on the forms-side chart."""
    cat = catalog or build_charts(data)
    enc = encodings or encode(data, cat)
    _check_body(data, cat, h)
    lf = lifted or lift(data, h, cat, enc)
    ch = cat.hamiltonian if h.kind == "poisson" else cat.onevector
    proj = ZeroProjector(ch, ch.momenta())
    for a in args:
        if a.chart is not ch:
            raise ChartMismatchError(f"form arguments must live on {ch.name}")
        if not proj.admits(a):
            raise ConventionError("form arguments must be free of the momenta")
    return derived_bracket(ch, lf.forms_structure, args, proj)
