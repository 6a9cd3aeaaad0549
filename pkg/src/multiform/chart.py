"""Charts with even and odd coordinates and their induced variables.

A chart declares base coordinates with parities.  Each coordinate ``x^a``
induces four further variables:

* the fiber coordinate ``dx^a`` (parity-reversed tangent bundle),
* the antifiber coordinate ``x*_a`` (parity-reversed cotangent bundle),
* the momenta ``p_a`` and ``pi_a`` conjugate to ``x^a`` and ``dx^a`` on the
  cotangent bundle of the parity-reversed tangent space.

Fiber, antifiber and ``pi`` variables carry the parity opposite to the base
coordinate; ``p_a`` carries the same parity.  Even formal parameters (used
for series expansions) are attached to the chart and act as central
variables.

Variables are identified by small integers; the integer order realises the
canonical monomial order: parameters, then base coordinates, then the fiber
families, each block in declaration order.
"""

from __future__ import annotations

from enum import IntEnum

EVEN = 0
ODD = 1


class VarKind(IntEnum):
    PARAM = 0
    BASE = 1
    FIBER = 2
    ANTIFIBER = 3
    MOMENTUM_BASE = 4
    MOMENTUM_FIBER = 5


class ChartError(ValueError):
    pass


def _token_core(name: str) -> str:
    # 'x1' -> '1' so that x*_1 prints as xs1, its momenta as p1/pi1
    if len(name) > 1 and name[0] == "x":
        return name[1:]
    return name


class Chart:
    """Immutable declaration of named, graded base coordinates."""

    __slots__ = ("name", "coords", "params", "_parity", "_token", "_by_token")

    def __init__(self, name, coords, params=()):
        coords = tuple((str(n), int(p) & 1) for n, p in coords)
        params = tuple(str(p) for p in params)
        if not coords:
            raise ChartError("a chart needs at least one coordinate")
        self.name = str(name)
        self.coords = coords
        self.params = params

        n = len(coords)
        parity = list(params and [EVEN] * len(params) or [])
        tokens = list(params)
        for kind in (VarKind.BASE, VarKind.FIBER, VarKind.ANTIFIBER,
                     VarKind.MOMENTUM_BASE, VarKind.MOMENTUM_FIBER):
            for cname, p in coords:
                core = _token_core(cname)
                if kind == VarKind.BASE:
                    parity.append(p)
                    tokens.append(cname)
                elif kind == VarKind.FIBER:
                    parity.append(p ^ 1)
                    tokens.append("d" + cname)
                elif kind == VarKind.ANTIFIBER:
                    parity.append(p ^ 1)
                    tokens.append("xs" + core)
                elif kind == VarKind.MOMENTUM_BASE:
                    parity.append(p)
                    tokens.append("p" + core)
                else:
                    parity.append(p ^ 1)
                    tokens.append("pi" + core)
        self._parity = tuple(parity)
        self._token = tuple(tokens)
        if len(set(tokens)) != len(tokens):
            raise ChartError("coordinate/parameter names induce colliding tokens")
        self._by_token = {t: i for i, t in enumerate(tokens)}
        _ = n

    # -- variable ids ------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def n_params(self) -> int:
        return len(self.params)

    @property
    def n_vars(self) -> int:
        return self.n_params + 5 * self.n

    def var(self, kind, index) -> int:
        if kind == VarKind.PARAM:
            if not 0 <= index < self.n_params:
                raise ChartError("parameter index out of range")
            return index
        if not 0 <= index < self.n:
            raise ChartError("coordinate index out of range")
        return self.n_params + (int(kind) - 1) * self.n + index

    def base(self, a):
        return self.var(VarKind.BASE, a)

    def fiber(self, a):
        return self.var(VarKind.FIBER, a)

    def antifiber(self, a):
        return self.var(VarKind.ANTIFIBER, a)

    def momentum_base(self, a):
        return self.var(VarKind.MOMENTUM_BASE, a)

    def momentum_fiber(self, a):
        return self.var(VarKind.MOMENTUM_FIBER, a)

    def param(self, i):
        return self.var(VarKind.PARAM, i)

    def kind(self, vid) -> VarKind:
        if vid < self.n_params:
            return VarKind.PARAM
        return VarKind((vid - self.n_params) // self.n + 1)

    def coord_index(self, vid) -> int:
        if vid < self.n_params:
            return vid
        return (vid - self.n_params) % self.n

    def parity(self, vid) -> int:
        return self._parity[vid]

    @property
    def parities(self):
        return self._parity

    def coord_parity(self, a) -> int:
        return self.coords[a][1]

    def vars_of_kind(self, kind):
        if kind == VarKind.PARAM:
            return tuple(range(self.n_params))
        base = self.n_params + (int(kind) - 1) * self.n
        return tuple(range(base, base + self.n))

    # -- naming ------------------------------------------------------

    def token(self, vid) -> str:
        return self._token[vid]

    def lookup(self, token: str) -> int:
        try:
            return self._by_token[token]
        except KeyError:
            raise ChartError(f"unknown variable {token!r} on chart {self.name!r}") from None

    def __eq__(self, other):
        return (isinstance(other, Chart) and self.name == other.name
                and self.coords == other.coords and self.params == other.params)

    def __hash__(self):
        return hash((self.name, self.coords, self.params))

    def __repr__(self):
        cs = ", ".join(f"{n}:{'odd' if p else 'even'}" for n, p in self.coords)
        ps = f", params={list(self.params)}" if self.params else ""
        return f"Chart({self.name!r}, [{cs}]{ps})"
