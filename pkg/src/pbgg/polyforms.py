"""Vector-valued polynomials and partially-defined polynomial forms.

A VPoly is a polynomial in the model variables (leaf variables x_1..x_n
first, then transverse variables y_1..y_kt) whose coefficients are
vectors over QQ.  Monomials are exponent tuples.  A PolyPartialForm of
degree j assigns a VPoly to every increasing j-subset of leaf indices;
the transverse variables only ever ride along as inert parameters, which
is the whole point of the "partial" calculus.
"""

from __future__ import annotations

from dataclasses import dataclass
from gmpy2 import mpq

from .linalg import ZERO, QQ


class DegreeCapError(Exception):
    """A polynomial exceeded the model's degree cap."""


def _add_vals(a, b):
    return tuple(x + y for x, y in zip(a, b))


class VPoly:
    """Polynomial with vector coefficients: dict {exponent tuple: value tuple}."""

    __slots__ = ("nvars", "vdim", "coeffs")

    def __init__(self, nvars, vdim, coeffs=None):
        self.nvars = nvars
        self.vdim = vdim
        self.coeffs = {}
        if coeffs:
            for mono, vals in coeffs.items():
                if len(mono) != nvars or len(vals) != vdim:
                    raise ValueError("bad monomial or value length")
                if any(vals):
                    self.coeffs[mono] = tuple(QQ(v) for v in vals)

    @classmethod
    def zero(cls, nvars, vdim):
        return cls(nvars, vdim)

    @classmethod
    def monomial(cls, nvars, vdim, mono, vals):
        return cls(nvars, vdim, {tuple(mono): tuple(vals)})

    def is_zero(self):
        return not self.coeffs

    def degree(self):
        """Largest total degree present, or -1 for the zero polynomial."""
        return max((sum(m) for m in self.coeffs), default=-1)

    def __eq__(self, other):
        return (isinstance(other, VPoly) and self.nvars == other.nvars
                and self.vdim == other.vdim and self.coeffs == other.coeffs)

    def __add__(self, other):
        out = dict(self.coeffs)
        for mono, vals in other.coeffs.items():
            if mono in out:
                s = _add_vals(out[mono], vals)
                if any(s):
                    out[mono] = s
                else:
                    del out[mono]
            else:
                out[mono] = vals
        res = VPoly(self.nvars, self.vdim)
        res.coeffs = out
        return res

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = QQ(c)
        res = VPoly(self.nvars, self.vdim)
        if c:
            res.coeffs = {m: tuple(c * v for v in vals)
                          for m, vals in self.coeffs.items()}
        return res

    def map_values(self, mat):
        """Apply a value matrix (vdim' x vdim) to every coefficient vector."""
        res = VPoly(self.nvars, mat.nrows)
        for mono, vals in self.coeffs.items():
            out = [ZERO] * mat.nrows
            for i, row in enumerate(mat.rows):
                s = ZERO
                for a, v in zip(row, vals):
                    if a and v:
                        s += a * v
                out[i] = s
            if any(out):
                res.coeffs[mono] = tuple(out)
        return res

    def diff(self, var):
        """Partial derivative with respect to variable index var."""
        res = VPoly(self.nvars, self.vdim)
        for mono, vals in self.coeffs.items():
            e = mono[var]
            if e:
                new = mono[:var] + (e - 1,) + mono[var + 1:]
                scaled = tuple(e * v for v in vals)
                if new in res.coeffs:
                    res.coeffs[new] = _add_vals(res.coeffs[new], scaled)
                else:
                    res.coeffs[new] = scaled
        res.coeffs = {m: v for m, v in res.coeffs.items() if any(v)}
        return res

    def mul_var(self, var):
        """Multiply by the variable with index var (degree goes up by 1)."""
        res = VPoly(self.nvars, self.vdim)
        res.coeffs = {m[:var] + (m[var] + 1,) + m[var + 1:]: v
                      for m, v in self.coeffs.items()}
        return res

    def evaluate(self, point):
        """Value at a rational point, as a list of mpq."""
        out = [ZERO] * self.vdim
        for mono, vals in self.coeffs.items():
            c = QQ(1)
            for e, p in zip(mono, point):
                if e:
                    c *= p ** e
            for i, v in enumerate(vals):
                if v:
                    out[i] += c * v
        return out

    def __repr__(self):
        return "VPoly(%d terms, deg %d)" % (len(self.coeffs), self.degree())


@dataclass(eq=False)
class PolyPartialForm:
    """Degree-j partial form with polynomial coefficients.

    comps maps increasing j-tuples of leaf indices to VPoly values; absent
    components are zero.  The degree-0 form has the single key ().
    """

    model: object
    degree: int
    comps: dict

    def __post_init__(self):
        clean = {}
        for key, poly in self.comps.items():
            key = tuple(key)
            if len(key) != self.degree or list(key) != sorted(set(key)):
                raise ValueError("component index %r is not an increasing "
                                 "%d-tuple" % (key, self.degree))
            if any(i >= self.model.n for i in key):
                raise ValueError("component index %r outside leaf range" % (key,))
            if not poly.is_zero():
                clean[key] = poly
        self.comps = clean
        self.model.check_degree_cap(self)

    def component(self, key):
        key = tuple(key)
        got = self.comps.get(key)
        if got is None:
            return VPoly.zero(self.model.nvars, self.model.value_dim)
        return got

    def is_zero(self):
        return not self.comps

    def max_poly_degree(self):
        return max((p.degree() for p in self.comps.values()), default=-1)

    def __add__(self, other):
        self._compat(other)
        out = dict(self.comps)
        for key, poly in other.comps.items():
            out[key] = out[key] + poly if key in out else poly
        return PolyPartialForm(self.model, self.degree, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return PolyPartialForm(self.model, self.degree,
                               {k: p.scale(c) for k, p in self.comps.items()})

    def __eq__(self, other):
        return (isinstance(other, PolyPartialForm)
                and self.model is other.model
                and self.degree == other.degree
                and self.comps == other.comps)

    def _compat(self, other):
        if other.model is not self.model or other.degree != self.degree:
            raise ValueError("forms are not compatible")

    def __repr__(self):
        return "PolyPartialForm(degree=%d, %d components)" % (
            self.degree, len(self.comps))
