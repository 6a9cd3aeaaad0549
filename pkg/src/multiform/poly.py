"""Exact arithmetic in the supercommutative polynomial algebra of a chart.

A :class:`GradedPoly` is a finite sum of monomials in chart variables with
rational coefficients.  Monomials are kept in a canonical form: factors
sorted by variable id (parameters, base, fiber, antifiber, momenta), odd
variables with exponent exactly one, and the sign produced by sorting odd
factors absorbed into the coefficient.  Equality is structural equality of
canonical forms; there is no floating point anywhere.

Derivatives are left derivatives throughout: for parity-homogeneous u,

    d(u v)/dz = (du/dz) v + (-1)^{z~ u~} u (dv/dz).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations

from .chart import Chart, VarKind

# Monomial = tuple[(var_id, exponent), ...] sorted by var_id.
_EMPTY = ()


class EngineError(Exception):
    pass


class ChartMismatchError(EngineError):
    pass


class ParityError(EngineError):
    pass


class DomainError(EngineError):
    """A polynomial uses variable kinds an operation does not accept."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"exact rational expected, got {type(x).__name__}")


def _mul_monomials(m1, m2, parity):
    """Merge two canonical factor tuples.

    Returns ``(factors, sign)``; ``(None, 0)`` when an odd variable repeats
    (its square vanishes).  The sign is the Koszul sign of interleaving the
    odd factors of ``m2`` into ``m1``.
    """
    if not m1:
        return m2, 1
    if not m2:
        return m1, 1
    res = []
    sign = 1
    i = j = 0
    n1, n2 = len(m1), len(m2)
    odd_rest = 0
    for v, _e in m1:
        if parity[v]:
            odd_rest += 1
    while i < n1 and j < n2:
        v1, e1 = m1[i]
        v2, e2 = m2[j]
        if v1 < v2:
            res.append(m1[i])
            if parity[v1]:
                odd_rest -= 1
            i += 1
        elif v1 > v2:
            if parity[v2] and (odd_rest & 1):
                sign = -sign
            res.append(m2[j])
            j += 1
        else:
            if parity[v1]:
                return None, 0
            res.append((v1, e1 + e2))
            i += 1
            j += 1
    res.extend(m1[i:])
    res.extend(m2[j:])
    return tuple(res), sign


def _deriv_monomial(m, z, parity):
    """Left derivative of a canonical monomial by variable ``z``.

    Returns ``(monomial, integer multiplier)`` or ``None`` when ``z`` does
    not occur.
    """
    pz = parity[z]
    odd_before = 0
    for idx, (v, e) in enumerate(m):
        if v == z:
            mult = e
            if pz and (odd_before & 1):
                mult = -mult
            if e == 1:
                return m[:idx] + m[idx + 1:], mult
            return m[:idx] + ((v, e - 1),) + m[idx + 1:], mult
        if parity[v]:
            odd_before += 1
    return None


def _mono_parity(m, parity):
    s = 0
    for v, e in m:
        if parity[v]:
            s ^= e & 1
    return s


def _flat(m):
    out = []
    for v, e in m:
        out.extend([v] * e)
    return tuple(out)


class Grading(Enum):
    """Degree gradings used for slicing and truncation."""

    FIBER = "fiber"      # total degree in fiber plus antifiber variables
    LAMBDA = "lambda"    # total degree in formal parameters
    BASE = "base"        # total degree in base coordinates

_GRADING_KINDS = {
    Grading.FIBER: (VarKind.FIBER, VarKind.ANTIFIBER),
    Grading.LAMBDA: (VarKind.PARAM,),
    Grading.BASE: (VarKind.BASE,),
}


@dataclass(frozen=True)
class TruncationSpec:
    """A single grading with a cutoff order."""

    grading: Grading
    order: int

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("truncation order must be non-negative")


@dataclass(frozen=True)
class Truncation:
    """A bundle of per-grading cutoffs applied jointly (None = no cutoff)."""

    fiber: int | None = None
    lam: int | None = None
    base: int | None = None

    def specs(self):
        out = []
        if self.fiber is not None:
            out.append(TruncationSpec(Grading.FIBER, self.fiber))
        if self.lam is not None:
            out.append(TruncationSpec(Grading.LAMBDA, self.lam))
        if self.base is not None:
            out.append(TruncationSpec(Grading.BASE, self.base))
        return tuple(out)

    def describe(self) -> str:
        parts = [f"{s.grading.value}<={s.order}" for s in self.specs()]
        return ",".join(parts) if parts else "none"


def as_truncation(t) -> Truncation:
    if t is None:
        return Truncation()
    if isinstance(t, Truncation):
        return t
    if isinstance(t, TruncationSpec):
        return Truncation(**{
            {Grading.FIBER: "fiber", Grading.LAMBDA: "lam", Grading.BASE: "base"}[t.grading]: t.order})
    raise TypeError("expected Truncation or TruncationSpec")


class GradedPoly:
    """Normalized finite sum of signed monomials over exact rationals."""

    __slots__ = ("chart", "terms")
    __hash__ = None

    def __init__(self, chart: Chart, terms=None):
        self.chart = chart
        if terms is None:
            self.terms = {}
        else:
            self.terms = {m: c for m, c in terms.items() if c}

    # -- constructors --------------------------------------------------

    @classmethod
    def zero(cls, chart):
        return cls(chart)

    @classmethod
    def const(cls, chart, c):
        c = _frac(c)
        return cls(chart, {_EMPTY: c} if c else {})

    @classmethod
    def var(cls, chart, vid, exp=1):
        if exp == 0:
            return cls.const(chart, 1)
        if chart.parity(vid) and exp > 1:
            return cls.zero(chart)
        return cls(chart, {((vid, exp),): Fraction(1)})

    @classmethod
    def monomial(cls, chart, factors, coeff=1):
        """Product of ``(vid, exp)`` factors in the given order, times coeff."""
        acc = cls.const(chart, coeff)
        for vid, exp in factors:
            for _ in range(exp):
                acc = acc * cls.var(chart, vid)
        return acc

    # -- basics ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GradedPoly.const(self.chart, other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def _check_chart(self, other):
        if self.chart != other.chart:
            raise ChartMismatchError(
                f"operands live on different charts: {self.chart.name!r} vs {other.chart.name!r}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GradedPoly.const(self.chart, other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        self._check_chart(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            nc = terms.get(m, 0) + c
            if nc:
                terms[m] = nc
            else:
                terms.pop(m, None)
        out = GradedPoly(self.chart)
        out.terms = terms
        return out

    __radd__ = __add__

    def __neg__(self):
        out = GradedPoly(self.chart)
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GradedPoly.const(self.chart, other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = _frac(c)
        out = GradedPoly(self.chart)
        if c:
            out.terms = {m: c * v for m, v in self.terms.items()}
        return out

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        self._check_chart(other)
        parity = self.chart.parities
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m, sg = _mul_monomials(m1, m2, parity)
                if m is None:
                    continue
                c = c1 * c2 if sg > 0 else -(c1 * c2)
                nc = terms.get(m, 0) + c
                if nc:
                    terms[m] = nc
                else:
                    terms.pop(m, None)
        out = GradedPoly(self.chart)
        out.terms = terms
        return out

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        acc = GradedPoly.const(self.chart, 1)
        for _ in range(k):
            acc = acc * self
        return acc

    # -- calculus ----------------------------------------------------------

    def left_deriv(self, vid) -> "GradedPoly":
        """Left derivative by the chart variable ``vid``."""
        parity = self.chart.parities
        terms = {}
        for m, c in self.terms.items():
            d = _deriv_monomial(m, vid, parity)
            if d is None:
                continue
            nm, mult = d
            nc = terms.get(nm, 0) + c * mult
            if nc:
                terms[nm] = nc
            else:
                terms.pop(nm, None)
        out = GradedPoly(self.chart)
        out.terms = terms
        return out

    def euler(self, kinds) -> "GradedPoly":
        """Degree operator sum_z z d/dz over the variable kinds given."""
        kinds = frozenset(kinds)
        chart = self.chart
        terms = {}
        for m, c in self.terms.items():
            d = 0
            for v, e in m:
                if chart.kind(v) in kinds:
                    d += e
            if d:
                terms[m] = c * d
        out = GradedPoly(chart)
        out.terms = terms
        return out

    # -- gradings ------------------------------------------------------------

    def _measure(self, kinds, m) -> int:
        chart = self.chart
        return sum(e for v, e in m if chart.kind(v) in kinds)

    def degree(self, grading: Grading) -> int:
        kinds = _GRADING_KINDS[grading]
        return max((self._measure(kinds, m) for m in self.terms), default=0)

    def kind_degree(self, kind: VarKind) -> int:
        return max((sum(e for v, e in m if self.chart.kind(v) == kind)
                    for m in self.terms), default=0)

    def degree_slice(self, grading: Grading, k: int) -> "GradedPoly":
        kinds = _GRADING_KINDS[grading]
        out = GradedPoly(self.chart)
        out.terms = {m: c for m, c in self.terms.items() if self._measure(kinds, m) == k}
        return out

    def truncate(self, t) -> "GradedPoly":
        t = as_truncation(t)
        specs = t.specs()
        if not specs:
            return self
        out_terms = self.terms
        for s in specs:
            kinds = _GRADING_KINDS[s.grading]
            out_terms = {m: c for m, c in out_terms.items()
                         if self._measure(kinds, m) <= s.order}
        out = GradedPoly(self.chart)
        out.terms = dict(out_terms)
        return out

    def zero_at(self, kinds) -> "GradedPoly":
        """Set every variable of the listed kinds to zero."""
        kinds = frozenset(kinds)
        chart = self.chart
        out = GradedPoly(chart)
        out.terms = {m: c for m, c in self.terms.items()
                     if all(chart.kind(v) not in kinds for v, _ in m)}
        return out

    def uses_kinds(self):
        chart = self.chart
        return frozenset(chart.kind(v) for m in self.terms for v, _ in m)

    # -- parity ----------------------------------------------------------------

    def parity(self):
        """0 or 1 for parity-homogeneous polynomials, None for mixed or zero."""
        parity = self.chart.parities
        seen = None
        for m in self.terms:
            p = _mono_parity(m, parity)
            if seen is None:
                seen = p
            elif seen != p:
                return None
        return seen

    def homogeneous_parts(self):
        """Split into [(parity, part)] with zero parts omitted."""
        parity = self.chart.parities
        even, odd = {}, {}
        for m, c in self.terms.items():
            (odd if _mono_parity(m, parity) else even)[m] = c
        out = []
        for p, d in ((0, even), (1, odd)):
            if d:
                part = GradedPoly(self.chart)
                part.terms = d
                out.append((p, part))
        return out

    def even_part(self):
        for p, part in self.homogeneous_parts():
            if p == 0:
                return part
        return GradedPoly.zero(self.chart)

    def odd_part(self):
        for p, part in self.homogeneous_parts():
            if p == 1:
                return part
        return GradedPoly.zero(self.chart)

    # -- inspection --------------------------------------------------------------

    def constant_term(self) -> Fraction:
        return self.terms.get(_EMPTY, Fraction(0))

    def coefficient(self, factors) -> Fraction:
        m = tuple(sorted(factors))
        return self.terms.get(m, Fraction(0))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda item: _flat(item[0]))

    # -- printing ----------------------------------------------------------------

    def canonical(self) -> str:
        if not self.terms:
            return "0"
        chart = self.chart
        parts = []
        for m, c in self.sorted_terms():
            body = "*".join(
                chart.token(v) if e == 1 else f"{chart.token(v)}^{e}" for v, e in m)
            mag = abs(c)
            if not m:
                s = str(mag)
            elif mag == 1:
                s = body
            else:
                s = f"{mag}*{body}"
            if not parts:
                parts.append(("-" if c < 0 else "") + s)
            else:
                parts.append((" - " if c < 0 else " + ") + s)
        return "".join(parts)

    def latex(self) -> str:
        if not self.terms:
            return "0"
        chart = self.chart
        parts = []
        for m, c in self.sorted_terms():
            body = r"\,".join(_latex_factor(chart, v, e) for v, e in m)
            mag = abs(c)
            if not m:
                s = _latex_frac(mag)
            elif mag == 1:
                s = body
            else:
                s = _latex_frac(mag) + r"\," + body
            if not parts:
                parts.append(("-" if c < 0 else "") + s)
            else:
                parts.append((" - " if c < 0 else " + ") + s)
        return "".join(parts)

    def __str__(self):
        return self.canonical()

    def __repr__(self):
        return f"<GradedPoly {self.canonical()} on {self.chart.name}>"


def _latex_frac(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return rf"\tfrac{{{q.numerator}}}{{{q.denominator}}}"


def _split_name(name: str):
    i = len(name)
    while i > 0 and name[i - 1].isdigit():
        i -= 1
    return name[:i], name[i:]


def _latex_var(chart: Chart, vid) -> str:
    kind = chart.kind(vid)
    if kind == VarKind.PARAM:
        name = chart.params[chart.coord_index(vid)]
        return r"\lambda" if name in ("lam", "lambda") else rf"\mathit{{{name}}}"
    cname, _ = chart.coords[chart.coord_index(vid)]
    stem, idx = _split_name(cname)
    up = rf"^{{{idx}}}" if idx else ""
    dn = rf"_{{{idx}}}" if idx else ""
    if kind == VarKind.BASE:
        return stem + up
    if kind == VarKind.FIBER:
        return "d" + stem + up
    if kind == VarKind.ANTIFIBER:
        return stem + "^*" + dn
    if kind == VarKind.MOMENTUM_BASE:
        return "p" + dn if idx else rf"p_{{{stem}}}"
    return rf"\pi{dn}" if idx else rf"\pi_{{{stem}}}"


def _latex_factor(chart, v, e):
    s = _latex_var(chart, v)
    if e == 1:
        return s
    return rf"\left({s}\right)^{{{e}}}"


# -- substitutions ------------------------------------------------------------


class SubstitutionMap:
    """Parity-consistent assignment of polynomials to chart variables.

    Unassigned variables map to themselves; applying the map is the algebra
    homomorphism extending the assignment.
    """

    __slots__ = ("chart", "assignments")

    def __init__(self, chart: Chart, assignments):
        self.chart = chart
        amap = {}
        for vid, value in assignments.items():
            if isinstance(value, (int, Fraction)):
                value = GradedPoly.const(chart, value)
            if value.chart != chart:
                raise ChartMismatchError("substitution image lives on a different chart")
            p = value.parity()
            if p is not None and p != chart.parity(vid):
                raise ParityError(
                    f"substitution for {chart.token(vid)} must have parity "
                    f"{chart.parity(vid)}, got {p}")
            if p is None and value.terms:
                raise ParityError(
                    f"substitution for {chart.token(vid)} is parity-mixed")
            amap[vid] = value
        self.assignments = amap

    @classmethod
    def identity(cls, chart):
        return cls(chart, {})

    def apply(self, u: GradedPoly) -> GradedPoly:
        if u.chart != self.chart:
            raise ChartMismatchError("substitution applied across charts")
        amap = self.assignments
        chart = self.chart
        acc = GradedPoly.zero(chart)
        for m, c in u.terms.items():
            if all(v not in amap for v, _ in m):
                part = GradedPoly(chart)
                part.terms = {m: c}
                acc = acc + part
                continue
            prod = GradedPoly.const(chart, c)
            for v, e in m:
                factor = amap.get(v)
                if factor is None:
                    factor = GradedPoly.var(chart, v)
                for _ in range(e):
                    prod = prod * factor
            acc = acc + prod
        return acc

    def __repr__(self):
        items = ", ".join(f"{self.chart.token(v)} -> {p.canonical()}"
                          for v, p in sorted(self.assignments.items()))
        return f"<SubstitutionMap {items}>"


def substitute(u: GradedPoly, s: SubstitutionMap) -> GradedPoly:
    return s.apply(u)


# -- fixtures ------------------------------------------------------------------


def monomial_basis(chart: Chart, kinds, max_degree: int, include_one=True):
    """All canonical monomials of total degree <= max_degree in the kinds given.

    Deterministic order; odd variables are never repeated.
    """
    vids = []
    for kind in sorted(kinds):
        vids.extend(chart.vars_of_kind(kind))
    evens = [v for v in vids if not chart.parity(v)]
    odds = [v for v in vids if chart.parity(v)]
    out = []
    seen = set()
    for d in range(0 if include_one else 1, max_degree + 1):
        for k_odd in range(0, min(d, len(odds)) + 1):
            d_even = d - k_odd
            for odd_choice in combinations(odds, k_odd):
                for even_mult in _even_multisets(evens, d_even):
                    factors = tuple(sorted(list(even_mult) + [(v, 1) for v in odd_choice]))
                    if factors in seen:
                        continue
                    seen.add(factors)
                    out.append(GradedPoly(chart, {factors: Fraction(1)}))
    return out


def _even_multisets(evens, d):
    if d == 0:
        yield ()
        return
    if not evens:
        return
    for combo in combinations(range(len(evens) + d - 1), d):
        counts = {}
        prev = -1
        var_idx = 0
        for c in combo:
            var_idx += c - prev - 1
            prev = c
            counts[evens[var_idx]] = counts.get(evens[var_idx], 0) + 1
        yield tuple(sorted(counts.items()))


def random_poly(chart: Chart, kinds, max_degree, parity=None, seed=0,
                terms=4, max_coeff=4, param_degree=0):
    """Deterministic pseudo-random polynomial, optionally parity-homogeneous.

    ``max_degree`` applies per kind (int) or per kind via a dict; odd
    variables are drawn without repetition.  Raises :class:`ParityError`
    when no monomial of the requested parity exists within the bounds.
    """
    rng = random.Random(seed)
    kinds = sorted(set(kinds))
    if isinstance(max_degree, int):
        degmap = {k: max_degree for k in kinds}
    else:
        degmap = {k: max_degree.get(k, 0) for k in kinds}
    chosen = {}
    attempts = 0
    limit = 400 * max(terms, 1)
    while len(chosen) < terms and attempts < limit:
        attempts += 1
        factors = []
        for kind in kinds:
            pool = list(chart.vars_of_kind(kind))
            d = rng.randint(0, degmap[kind])
            odd_pool = [v for v in pool if chart.parity(v)]
            even_pool = [v for v in pool if not chart.parity(v)]
            counts = {}
            for _ in range(d):
                pick_odd = odd_pool and (not even_pool or rng.random() < 0.5)
                if pick_odd:
                    v = odd_pool.pop(rng.randrange(len(odd_pool)))
                    counts[v] = 1
                elif even_pool:
                    v = rng.choice(even_pool)
                    counts[v] = counts.get(v, 0) + 1
            factors.extend(counts.items())
        if param_degree and chart.n_params:
            d = rng.randint(0, param_degree)
            if d:
                factors.append((chart.param(rng.randrange(chart.n_params)), d))
        mono = tuple(sorted(factors))
        if parity is not None and _mono_parity(mono, chart.parities) != parity:
            continue
        if mono in chosen:
            continue
        num = rng.randint(-max_coeff, max_coeff) or 1
        den = rng.choice((1, 1, 1, 2))
        chosen[mono] = Fraction(num, den)
    if not chosen:
        raise ParityError("no monomial of the requested parity within the degree bounds")
    out = GradedPoly(chart)
    out.terms = chosen
    return out
