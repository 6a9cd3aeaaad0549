"""Fiberwise duality between multivector fields and inhomogeneous forms.

An even multivector field P induces a bundle map of the parity-reversed
bundles whose pullback replaces each fiber coordinate:

    dx^a  ->  (-1)^{a~+1} dP/dx*_a        (phi direction)

and an even form omega induces the map in the other direction:

    x*_a  ->  d(omega)/d(dx^a)            (psi direction)

Inverting such a fiber map is a formal series problem; it is solved here
by an exact affine solve of the fiber-linear part at the origin followed
by fixed-point iteration under truncation.  The fiberwise Legendre
transform and its inverse are compositions of these pieces:

    omega = (phi inverse)(E(P) - P),   P = (psi inverse)(E(omega) - omega),

with E the fiberwise Euler (degree) operator of the corresponding fiber
family.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .chart import Chart, VarKind
from .poly import (DomainError, EngineError, GradedPoly, Grading, ParityError,
                   SubstitutionMap, Truncation, as_truncation)

_MULT_KINDS = frozenset({VarKind.PARAM, VarKind.BASE, VarKind.ANTIFIBER})
_FORM_KINDS = frozenset({VarKind.PARAM, VarKind.BASE, VarKind.FIBER})


class InversionError(EngineError):
    pass


class SingularLinearPartError(InversionError):
    pass


@dataclass
class FiberMap:
    """A fiber substitution induced by a multivector field or a form.

    ``direction`` is "phi" (multivector data, replaces fiber variables by
    antifiber expressions) or "psi" (form data, replaces antifiber
    variables by fiber expressions).
    """

    direction: str
    source: GradedPoly
    substitution: SubstitutionMap
    replaced: VarKind
    image: VarKind

    @property
    def chart(self) -> Chart:
        return self.source.chart


def _require_even(u: GradedPoly, what: str):
    if not u.is_zero() and u.parity() != 0:
        raise ParityError(f"{what} must be parity-even")


def _require_kinds(u, allowed, what):
    extra = u.uses_kinds() - allowed
    if extra:
        names = ", ".join(k.name.lower() for k in sorted(extra))
        raise DomainError(f"{what} must not involve {names} variables")


def phi_map(P: GradedPoly) -> FiberMap:
    _require_even(P, "the multivector field")
    _require_kinds(P, _MULT_KINDS, "the multivector field")
    chart = P.chart
    assignments = {}
    for a in range(chart.n):
        d = P.left_deriv(chart.antifiber(a))
        if chart.coord_parity(a) == 0:  # (-1)^{a~+1}
            d = -d
        assignments[chart.fiber(a)] = d
    sub = SubstitutionMap(chart, assignments)
    return FiberMap("phi", P, sub, VarKind.FIBER, VarKind.ANTIFIBER)


def psi_map(omega: GradedPoly) -> FiberMap:
    _require_even(omega, "the form")
    _require_kinds(omega, _FORM_KINDS, "the form")
    chart = omega.chart
    assignments = {chart.antifiber(a): omega.left_deriv(chart.fiber(a))
                   for a in range(chart.n)}
    sub = SubstitutionMap(chart, assignments)
    return FiberMap("psi", omega, sub, VarKind.ANTIFIBER, VarKind.FIBER)


def phi_pullback(P: GradedPoly, u: GradedPoly) -> GradedPoly:
    """Pullback along the map induced by P: replaces dx^a, fixes x and x*."""
    return phi_map(P).substitution.apply(u)


def psi_pullback(omega: GradedPoly, u: GradedPoly) -> GradedPoly:
    """Pullback along the map induced by omega: replaces x*_a."""
    return psi_map(omega).substitution.apply(u)


# -- non-degeneracy ----------------------------------------------------------


@dataclass
class NondegeneracyReport:
    ok: bool
    even_block: list
    odd_block: list
    det_even: Fraction
    det_odd: Fraction


def _det(mat) -> Fraction:
    n = len(mat)
    if n == 0:
        return Fraction(1)
    m = [row[:] for row in mat]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = Fraction(1) / m[col][col]
        for r in range(col + 1, n):
            if m[r][col]:
                f = m[r][col] * inv
                m[r] = [m[r][k] - f * m[col][k] for k in range(n)]
    return det


def _mat_inverse(mat):
    n = len(mat)
    m = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return None
        m[col], m[pivot] = m[pivot], m[col]
        inv = Fraction(1) / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [m[r][k] - f * m[col][k] for k in range(2 * n)]
    return [row[n:] for row in m]


def _origin_substitution(chart: Chart, base_point=None) -> SubstitutionMap:
    # Even base coordinates to the base point (default 0), everything else
    # that could carry fiber or parameter content to 0.
    point = dict(base_point or {})
    assignments = {}
    for a, (name, p) in enumerate(chart.coords):
        if p == 0:
            value = point.get(name, point.get(a, 0))
            assignments[chart.base(a)] = GradedPoly.const(chart, Fraction(value))
        else:
            assignments[chart.base(a)] = GradedPoly.zero(chart)
    for kind in (VarKind.FIBER, VarKind.ANTIFIBER, VarKind.MOMENTUM_BASE,
                 VarKind.MOMENTUM_FIBER):
        for v in chart.vars_of_kind(kind):
            assignments[v] = GradedPoly.zero(chart)
    for i in range(chart.n_params):
        assignments[chart.param(i)] = GradedPoly.zero(chart)
    return SubstitutionMap(chart, assignments)


def second_fiber_derivatives(src: GradedPoly, kind: VarKind):
    """Matrix of polynomials H[a][b] = d/dz_a d/dz_b src over the family."""
    chart = src.chart
    vids = chart.vars_of_kind(kind)
    first = [src.left_deriv(v) for v in vids]
    return [[first[b].left_deriv(vids[a]) for b in range(chart.n)]
            for a in range(chart.n)]


def hessian_nondegenerate(P: GradedPoly, base_point=None,
                          kind: VarKind = VarKind.ANTIFIBER) -> NondegeneracyReport:
    """Block-invertibility of the fiber Hessian at the zero section.

    Evaluates d^2 P / dz_a dz_b at zero fiber variables, zero odd base
    coordinates and the given rational values of the even ones, and tests
    the even-even and odd-odd coordinate blocks for invertibility.
    """
    chart = P.chart
    ev = _origin_substitution(chart, base_point)
    H = second_fiber_derivatives(P, kind)
    vals = [[ev.apply(H[a][b]).constant_term() for b in range(chart.n)]
            for a in range(chart.n)]
    even_idx = [a for a in range(chart.n) if chart.coord_parity(a) == 0]
    odd_idx = [a for a in range(chart.n) if chart.coord_parity(a) == 1]
    even_block = [[vals[a][b] for b in even_idx] for a in even_idx]
    odd_block = [[vals[a][b] for b in odd_idx] for a in odd_idx]
    det_even = _det(even_block)
    det_odd = _det(odd_block)
    return NondegeneracyReport(bool(det_even) and bool(det_odd),
                               even_block, odd_block, det_even, det_odd)


# -- formal inversion ----------------------------------------------------------


@dataclass
class InversionResult:
    """Inverse substitution of a fiber map together with its residuals.

    ``residual_forward[z]`` is (map then inverse applied to z) minus z and
    ``residual_backward[w]`` the composite in the other order, both
    truncated at the recorded truncation.  ``exact`` reports that the
    iteration stabilized without engaging the base-degree cutoff.
    """

    inverse: SubstitutionMap
    truncation: Truncation
    residual_forward: dict
    residual_backward: dict
    iterations: int
    exact: bool

    @property
    def ok(self) -> bool:
        return (all(r.is_zero() for r in self.residual_forward.values())
                and all(r.is_zero() for r in self.residual_backward.values()))


def invert_fiber_map(fmap: FiberMap, trunc) -> InversionResult:
    """Invert a fiber substitution as a truncated formal series.

    The fiber-linear part at the origin must be invertible over the
    rationals (the non-degeneracy condition).  Constant shifts and higher
    fiber-degree terms are handled by fixed-point iteration; when the
    iteration does not stabilize under the fiber and parameter cutoffs
    alone and a base cutoff is provided, base-degree truncation is engaged
    (``exact`` is False in that case).
    """
    trunc = as_truncation(trunc)
    chart = fmap.chart
    n = chart.n
    z_ids = chart.vars_of_kind(fmap.replaced)
    w_ids = chart.vars_of_kind(fmap.image)
    F = [fmap.substitution.assignments[z] for z in z_ids]

    c = [Fi.degree_slice(Grading.FIBER, 0) for Fi in F]
    lin = [Fi.degree_slice(Grading.FIBER, 1) for Fi in F]
    A0 = [[Fraction(0)] * n for _ in range(n)]
    N = []
    for i in range(n):
        rest = GradedPoly.zero(chart)
        for m, coeff in lin[i].terms.items():
            if len(m) == 1 and m[0][1] == 1 and m[0][0] in w_ids:
                A0[i][w_ids.index(m[0][0])] += coeff
            else:
                rest = rest + GradedPoly(chart, {m: coeff})
        N.append(rest)
    H = [F[i] - c[i] - lin[i] for i in range(n)]

    A0inv = _mat_inverse(A0)
    if A0inv is None:
        raise SingularLinearPartError(
            "fiber-linear part is singular at the origin; the map is not "
            "invertible near the zero section")

    loop_trunc = Truncation(fiber=trunc.fiber, lam=trunc.lam)
    z_polys = [GradedPoly.var(chart, z) for z in z_ids]

    def step(G, cutoff):
        sub = SubstitutionMap(chart, dict(zip(w_ids, G)))
        rhs = []
        for i in range(n):
            r = z_polys[i] - c[i]
            if N[i] or H[i]:
                r = r - sub.apply(N[i] + H[i])
            rhs.append(r)
        out = []
        for j in range(n):
            gj = GradedPoly.zero(chart)
            for i in range(n):
                if A0inv[j][i]:
                    gj = gj + rhs[i].scale(A0inv[j][i])
            out.append(gj.truncate(cutoff))
        return out

    G = [GradedPoly.zero(chart)] * n
    exact = True
    cutoff = loop_trunc
    max_iter = (trunc.fiber or 0) + (trunc.lam or 0) + 8
    iterations = 0
    stabilized = False
    for phase in (1, 2):
        for _ in range(max_iter):
            nxt = step(G, cutoff)
            iterations += 1
            if nxt == G:
                stabilized = True
                break
            G = nxt
        if stabilized:
            break
        if phase == 1 and trunc.base is not None:
            exact = False
            cutoff = trunc
            G = [g.truncate(trunc) for g in G]
        else:
            raise InversionError(
                "fixed-point inversion did not stabilize at the requested "
                "truncation; provide a base-degree cutoff or raise the orders")

    inverse = SubstitutionMap(chart, dict(zip(w_ids, G)))
    res_trunc = trunc if not exact else loop_trunc
    forward = {}
    for i, z in enumerate(z_ids):
        forward[z] = (inverse.apply(F[i]) - z_polys[i]).truncate(res_trunc)
    backward = {}
    for j, w in enumerate(w_ids):
        backward[w] = (fmap.substitution.apply(G[j])
                       - GradedPoly.var(chart, w)).truncate(res_trunc)
    return InversionResult(inverse, trunc, forward, backward, iterations, exact)


# -- Legendre transform ------------------------------------------------------


def legendre_transform(P: GradedPoly, trunc) -> GradedPoly:
    """Even form dual to an even multivector field: (phi inverse)(E(P) - P)."""
    trunc = as_truncation(trunc)
    inv = invert_fiber_map(phi_map(P), trunc)
    core = P.euler((VarKind.ANTIFIBER,)) - P
    return inv.inverse.apply(core).truncate(trunc)


def legendre_inverse(omega: GradedPoly, trunc) -> GradedPoly:
    """Even multivector field dual to an even form: (psi inverse)(E - 1)(omega)."""
    trunc = as_truncation(trunc)
    inv = invert_fiber_map(psi_map(omega), trunc)
    core = omega.euler((VarKind.FIBER,)) - omega
    return inv.inverse.apply(core).truncate(trunc)


def omega_prime(P: GradedPoly, trunc) -> GradedPoly:
    """The form obtained by pulling P itself through the inverse map."""
    trunc = as_truncation(trunc)
    inv = invert_fiber_map(phi_map(P), trunc)
    return inv.inverse.apply(P).truncate(trunc)
