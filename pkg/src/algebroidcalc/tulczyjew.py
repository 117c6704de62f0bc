"""The two triples as pullback morphisms and their verification.

Both triples share the pattern: a canonical identification R between two
cotangent-type total spaces, an anchor map phi generated by the structure
polynomial, and the composite psi = phi o R^-1 into the tangent-type chart.
Symplectomorphism claims are checked as bracket preservation on generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .algebra import ChartMorphism, GradedPolynomial
from .algebroid import AlgebroidData, ChartCatalog, StructureEncodings, build_charts, encode
from .brackets import CanonicalChart, canonical_bracket
from .errors import ConventionError


def _sgn(e: int) -> int:
    return -1 if e & 1 else 1


def canonical_R(data: AlgebroidData, side: str,
                catalog: Optional[ChartCatalog] = None) -> ChartMorphism:
    """The canonical identification; independent of the algebroid structure."""
    cat = catalog or build_charts(data)
    if side == "schouten":
        src, tgt = cat.schouten, cat.hamiltonian
        assignment = {}
        for A, _ in data.base:
            assignment[A] = src.gen(A)
            assignment["p_" + A] = src.gen("p_" + A)
        for a, p in data.fiber:
            assignment["xi_" + a] = _sgn(p) * src.gen("pi_" + a)
            assignment["pim_" + a] = src.gen("eta_" + a)
        return ChartMorphism(src, tgt, assignment, name="R_schouten")
    if side == "poisson":
        src, tgt = cat.poisson, cat.onevector
        assignment = {}
        for A, _ in data.base:
            assignment[A] = src.gen(A)
            assignment["xs_" + A] = src.gen("xs_" + A)
        for a, _ in data.fiber:
            assignment["etau_" + a] = src.gen("es_" + a)
            assignment["etas_" + a] = -src.gen("e_" + a)
        return ChartMorphism(src, tgt, assignment, name="R_poisson")
    raise ConventionError(f"unknown side {side!r}")


def anchor(data: AlgebroidData, side: str,
           catalog: Optional[ChartCatalog] = None,
           encodings: Optional[StructureEncodings] = None) -> ChartMorphism:
    """The anchor map of the triple, generated by S (or P) via derivatives."""
    cat = catalog or build_charts(data)
    enc = encodings or encode(data, cat)
    if side == "schouten":
        src, tgt = cat.schouten, cat.schouten_tangent
        assignment = {}
        for A, _ in data.base:
            assignment[A] = src.gen(A)
            assignment["nu_" + A] = enc.S.derivative("p_" + A)
        for a, _ in data.fiber:
            assignment["eta_" + a] = src.gen("eta_" + a)
            assignment["theta_" + a] = enc.S.derivative("pi_" + a)
        return ChartMorphism(src, tgt, assignment, name="phi_S")
    if side == "poisson":
        src, tgt = cat.poisson, cat.poisson_tangent
        assignment = {}
        for A, p in data.base:
            assignment[A] = src.gen(A)
            assignment["xit_" + A] = _sgn(p ^ 1) * enc.P.derivative("xs_" + A)
        for a, p in data.fiber:
            assignment["e_" + a] = src.gen("e_" + a)
            assignment["theta_" + a] = _sgn(p ^ 1) * enc.P.derivative("es_" + a)
        return ChartMorphism(src, tgt, assignment, name="phi_P")
    raise ConventionError(f"unknown side {side!r}")


def tulczyjew_morphism(data: AlgebroidData, side: str,
                       catalog: Optional[ChartCatalog] = None,
                       encodings: Optional[StructureEncodings] = None) -> ChartMorphism:
    """psi = phi o R^-1, from the Hamiltonian-type chart to the tangent-type one."""
    cat = catalog or build_charts(data)
    R = canonical_R(data, side, cat)
    phi = anchor(data, side, cat, encodings)
    psi = R.inverse().then(phi)
    psi.name = "psi_S" if side == "schouten" else "psi_P"
    return psi


@dataclass(frozen=True)
class TripleCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class TripleReport:
    side: str
    checks: Tuple[TripleCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def named(self, name: str) -> TripleCheck:
        return next(c for c in self.checks if c.name == name)


def verify_triple(data: AlgebroidData, side: str,
                  catalog: Optional[ChartCatalog] = None,
                  encodings: Optional[StructureEncodings] = None) -> TripleReport:
    """Diagram commutativity, bracket preservation, potential matching,
    parity/weight preservation and fiber-linearity for one triple."""
    cat = catalog or build_charts(data)
    enc = encodings or encode(data, cat)
    R = canonical_R(data, side, cat)
    phi = anchor(data, side, cat, enc)
    psi = tulczyjew_morphism(data, side, cat, enc)
    checks = []

    composed = R.then(psi)
    ok = all(composed.assignment[v.name] == phi.assignment[v.name]
             for v in phi.target.variables)
    checks.append(TripleCheck("diagram-commutes", ok))

    src: CanonicalChart = R.source
    tgt: CanonicalChart = R.target
    ok = True
    bad = ""
    for u in tgt.variables:
        for v in tgt.variables:
            lhs = R.pullback(canonical_bracket(tgt, tgt.gen(u.name), tgt.gen(v.name)))
            rhs = canonical_bracket(src, R.assignment[u.name], R.assignment[v.name])
            if lhs != rhs:
                ok = False
                bad = f"{{{u.name},{v.name}}}"
                break
        if not ok:
            break
    checks.append(TripleCheck("bracket-preservation", ok, bad))

    if side == "schouten":
        pulled, target_struct = R.pullback(enc.H_Q), enc.S
        label = "R*H_Q = S"
    else:
        pulled, target_struct = R.pullback(enc.X_Q), enc.P
        label = "R*X_Q = P"
    checks.append(TripleCheck("potential-matches", pulled == target_struct, label))

    ok = True
    for m in (R, phi, psi):
        if m.weight_mismatches:
            ok = False
    checks.append(TripleCheck("parity-weight-preserved", ok))

    ok = True
    for m in (R, phi, psi):
        for v in m.target.variables:
            val = m.assignment[v.name]
            if val and (val.weight() is None):
                ok = False
    checks.append(TripleCheck("fiber-linear", ok))

    return TripleReport(side=side, checks=tuple(checks))


def middle_bracket_agreement(data: AlgebroidData, side: str,
                             catalog: Optional[ChartCatalog] = None,
                             encodings: Optional[StructureEncodings] = None) -> bool:
    """When phi and psi are invertible, the two induced brackets on the middle
    chart coincide on every generator pair."""
    cat = catalog or build_charts(data)
    enc = encodings or encode(data, cat)
    phi = anchor(data, side, cat, enc)
    psi = tulczyjew_morphism(data, side, cat, enc)
    if not (phi.invertible and psi.invertible):
        raise ConventionError("middle-chart brackets need invertible anchors")
    phi_inv = phi.inverse()
    psi_inv = psi.inverse()
    mid = phi.target
    for u in mid.variables:
        for v in mid.variables:
            via_phi = phi_inv.pullback(canonical_bracket(
                phi.source, phi.assignment[u.name], phi.assignment[v.name]))
            via_psi = psi_inv.pullback(canonical_bracket(
                psi.source, psi.assignment[u.name], psi.assignment[v.name]))
            if via_phi != via_psi:
                return False
    return True
