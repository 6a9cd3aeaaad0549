"""Canonical graded brackets and the derived n-ary brackets.

Two bracket structures live here:

* the odd bracket on multivector fields, i.e. polynomials in the base and
  antifiber variables (the canonical Schouten bracket), and
* the even bracket on polynomials in the base, fiber and momentum
  variables (the canonical Poisson bracket of the cotangent bundle of the
  parity-reversed tangent space).

Both are written as two-term coordinate expressions with left derivatives
and parity-dependent sign exponents.  The exponents below were calibrated
once against the defining identities (graded antisymmetry, the Leibniz
rule, the graded Jacobi identity, compatibility of the odd bracket with
the fiberwise pullback of the exterior differential, and the classical
coordinate formulas produced by a quadratic multivector field) and are
frozen; ``tests/test_calibration.py`` re-runs the search over all
candidate exponent functions and asserts this solution is the only one.
"""

from __future__ import annotations

from .chart import VarKind
from .poly import DomainError, GradedPoly, ParityError

_SCHOUTEN_KINDS = frozenset({VarKind.PARAM, VarKind.BASE, VarKind.ANTIFIBER})
_POISSON_KINDS = frozenset({VarKind.PARAM, VarKind.BASE, VarKind.FIBER,
                            VarKind.MOMENTUM_BASE, VarKind.MOMENTUM_FIBER})
_FORM_KINDS = frozenset({VarKind.PARAM, VarKind.BASE, VarKind.FIBER})
_FUNCTION_KINDS = frozenset({VarKind.PARAM, VarKind.BASE})


def _require_kinds(u: GradedPoly, allowed, what):
    extra = u.uses_kinds() - allowed
    if extra:
        names = ", ".join(k.name.lower() for k in sorted(extra))
        raise DomainError(f"{what} must not involve {names} variables")


# Frozen sign exponents (arguments are parities, values mod 2).

def _schouten_s1(p, a):
    return ((p + 1) * (a + 1)) & 1


def _schouten_s2(p, a):
    return (p * a + a + 1) & 1


def _poisson_t1(f, y):
    return (f * y + y) & 1


def _poisson_t2(f, y):
    return (f * y + 1) & 1


def _pair_bracket(u, v, pairs, s1, s2):
    """Two-term coordinate bracket over conjugate variable pairs.

    ``pairs`` is a list of ``(position_var, conjugate_var, position_parity)``;
    the bracket of parity-homogeneous u, v is

        sum (-1)^{s1(u~,y~)} du/dq dv/dy + (-1)^{s2(u~,y~)} du/dy dv/dq,

    extended bilinearly over parity-mixed inputs.
    """
    chart = u.chart
    out = GradedPoly.zero(chart)
    for pu, upart in u.homogeneous_parts():
        for _pv, vpart in v.homogeneous_parts():
            for y, q, py in pairs:
                du_q = upart.left_deriv(q)
                if du_q:
                    dv_y = vpart.left_deriv(y)
                    if dv_y:
                        t = du_q * dv_y
                        out = out - t if s1(pu, py) else out + t
                du_y = upart.left_deriv(y)
                if du_y:
                    dv_q = vpart.left_deriv(q)
                    if dv_q:
                        t = du_y * dv_q
                        out = out - t if s2(pu, py) else out + t
    return out


def _schouten_pairs(chart):
    return [(chart.base(a), chart.antifiber(a), chart.coord_parity(a))
            for a in range(chart.n)]


def _poisson_pairs(chart):
    pairs = [(chart.base(a), chart.momentum_base(a), chart.coord_parity(a))
             for a in range(chart.n)]
    pairs += [(chart.fiber(a), chart.momentum_fiber(a), chart.coord_parity(a) ^ 1)
              for a in range(chart.n)]
    return pairs


def schouten(P: GradedPoly, Q: GradedPoly) -> GradedPoly:
    """Canonical odd bracket of multivector fields.

    Inputs are polynomials in base and antifiber variables; the bracket of
    parity-homogeneous P, Q has parity P~+Q~+1 and satisfies

        [P,Q] = -(-1)^{(P~+1)(Q~+1)} [Q,P].
    """
    _require_kinds(P, _SCHOUTEN_KINDS, "schouten operand")
    _require_kinds(Q, _SCHOUTEN_KINDS, "schouten operand")
    return _pair_bracket(P, Q, _schouten_pairs(P.chart), _schouten_s1, _schouten_s2)


def canonical_poisson(F: GradedPoly, G: GradedPoly) -> GradedPoly:
    """Canonical even bracket on base, fiber and momentum variables.

    Conjugate pairs come out as (x^a, p_a) = delta and (dx^a, pi_a) =
    (-1)^{a~+1} delta under this convention.
    """
    _require_kinds(F, _POISSON_KINDS, "poisson operand")
    _require_kinds(G, _POISSON_KINDS, "poisson operand")
    return _pair_bracket(F, G, _poisson_pairs(F.chart), _poisson_t1, _poisson_t2)


def de_rham(omega: GradedPoly) -> GradedPoly:
    """Exterior differential d = sum_a dx^a d/dx^a on forms in (x, dx)."""
    _require_kinds(omega, _FORM_KINDS, "a differential form")
    chart = omega.chart
    out = GradedPoly.zero(chart)
    for a in range(chart.n):
        d = omega.left_deriv(chart.base(a))
        if d:
            out = out + GradedPoly.var(chart, chart.fiber(a)) * d
    return out


def lichnerowicz(P: GradedPoly, Q: GradedPoly) -> GradedPoly:
    """The derivation ad P = [P, .] of the odd bracket."""
    return schouten(P, Q)


def kappa(Q: GradedPoly, omega: GradedPoly) -> GradedPoly:
    """Derivation from forms into the joint (x, dx, x*) algebra induced by Q:

        kappa_Q = (-1)^{(Q~+1)(a~+1)} dQ/dx*_a d/d(dx^a).
    """
    _require_kinds(Q, _SCHOUTEN_KINDS, "kappa source")
    pq = Q.parity()
    if pq is None:
        if Q.is_zero():
            return GradedPoly.zero(Q.chart)
        raise ParityError("kappa source must be parity-homogeneous")
    chart = Q.chart
    out = GradedPoly.zero(chart)
    for a in range(chart.n):
        dq = Q.left_deriv(chart.antifiber(a))
        if not dq:
            continue
        dw = omega.left_deriv(chart.fiber(a))
        if not dw:
            continue
        t = dq * dw
        if ((pq ^ 1) * (chart.coord_parity(a) ^ 1)) & 1:
            out = out - t
        else:
            out = out + t
    return out


def restrict(u: GradedPoly, kinds) -> GradedPoly:
    """Set every variable of the listed kinds to zero."""
    return u.zero_at(kinds)


def higher_sign_exponent(parities) -> int:
    """Normalization exponent of the n-ary bracket of functions.

    For arguments of parities f~_1..f~_n the derived iterated bracket is
    rescaled by (-1) to this exponent; the value

        sum_{i<n} (n-i) f~_i + n(n+1)/2   (mod 2)

    is the unique multi-affine choice under which the binary bracket of
    the multivector field inverse to a symplectic form takes the classical
    coordinate shape and the unary/nullary brackets of a shifted quadratic
    field agree with the brackets generated by its odd potential.
    """
    n = len(parities)
    e = n * (n + 1) // 2
    for i, p in enumerate(parities):
        e += (n - 1 - i) * p
    return e & 1


def higher_poisson(P: GradedPoly, args) -> GradedPoly:
    """n-ary bracket of functions generated by an even multivector field:

    the iterated odd bracket [..[P, f_1], .., f_n] restricted to the base,
    times the calibrated normalization sign.  n = 0 returns P restricted
    to the base.
    """
    if not P.is_zero() and P.parity() != 0:
        raise ParityError("the bracket-generating multivector field must be even")
    parities = []
    acc = P
    for f in args:
        _require_kinds(f, _FUNCTION_KINDS, "a bracket argument")
        pf = f.parity()
        if pf is None and not f.is_zero():
            raise ParityError("bracket arguments must be parity-homogeneous")
        parities.append(pf or 0)
        acc = schouten(acc, f)
    out = restrict(acc, (VarKind.ANTIFIBER,))
    if higher_sign_exponent(parities):
        out = -out
    return out


def hamiltonian_multivector(P: GradedPoly, f: GradedPoly) -> GradedPoly:
    """[P, f]: the multivector field generated by a function."""
    _require_kinds(f, _FUNCTION_KINDS, "a function")
    return schouten(P, f)


__all__ = [
    "schouten", "canonical_poisson", "de_rham", "lichnerowicz", "kappa",
    "restrict", "higher_poisson", "higher_sign_exponent",
    "hamiltonian_multivector",
]
