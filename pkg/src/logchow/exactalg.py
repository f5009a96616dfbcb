"""Exact rational arithmetic, sparse multivariate polynomials and exact
linear algebra over the rationals.

Polynomials are immutable sparse maps from monomials to nonzero
:class:`fractions.Fraction` coefficients.  A monomial is a tuple of
``(variable, exponent)`` pairs sorted by the natural variable order, so two
polynomials never need to agree on an ambient variable list.  Terms are
rendered in graded-lexicographic order, which makes the text form canonical::

    >>> x, y = Poly.var("x0"), Poly.var("x1")
    >>> str(Fraction(3, 2) * x**2 * y - Poly.var("x2"))
    '3/2*x0^2*x1 - x2'
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Mapping, Sequence, Union

from .errors import MissingVariable, NotDivisible, ParseError

Monomial = tuple  # tuple[tuple[str, int], ...]
Scalar = Union[int, Fraction]

_CHUNK = re.compile(r"(\d+)")


def var_key(name: str) -> tuple:
    """Natural sort key for variable names: ``x2 < x10``."""
    parts = _CHUNK.split(name)
    return tuple((1, int(p)) if p.isdigit() else (0, p) for p in parts if p != "")


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items(), key=lambda t: var_key(t[0])))


def _mono_deg(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_order_key(m: Monomial) -> tuple:
    """Sort key placing larger monomials (graded lex) first."""
    return (-_mono_deg(m), tuple((var_key(v), -e) for v, e in m))


def _mono_div(a: Monomial, b: Monomial) -> Monomial | None:
    """Return a/b when b divides a, else ``None``."""
    d = dict(a)
    for v, e in b:
        have = d.get(v, 0)
        if have < e:
            return None
        if have == e:
            del d[v]
        else:
            d[v] = have - e
    return tuple(sorted(d.items(), key=lambda t: var_key(t[0])))


def _as_fraction(c: Scalar) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class Poly:
    """Immutable sparse polynomial with rational coefficients."""

    __slots__ = ("_t", "_h")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        t: dict = {}
        if terms:
            for m, c in terms.items():
                if c:
                    t[m] = _as_fraction(c)
        self._t = t
        self._h = None

    @classmethod
    def _raw(cls, t: dict) -> "Poly":
        p = cls.__new__(cls)
        p._t = t
        p._h = None
        return p

    # ----------------------------------------------------------- constructors
    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls._raw({((name, 1),): Fraction(1)})

    @classmethod
    def const(cls, c: Scalar) -> "Poly":
        return cls._raw({(): _as_fraction(c)} if c else {})

    @classmethod
    def zero(cls) -> "Poly":
        return cls._raw({})

    @classmethod
    def one(cls) -> "Poly":
        return cls._raw({(): Fraction(1)})

    @classmethod
    def monomial(cls, exps: Mapping[str, int], coeff: Scalar = 1) -> "Poly":
        m = tuple(sorted(((v, e) for v, e in exps.items() if e), key=lambda t: var_key(t[0])))
        return cls._raw({m: _as_fraction(coeff)} if coeff else {})

    @classmethod
    def linear(cls, coeffs: Mapping[str, Scalar]) -> "Poly":
        return cls._raw({((v, 1),): _as_fraction(c) for v, c in coeffs.items() if c})

    # ------------------------------------------------------------- accessors
    @property
    def terms(self) -> dict:
        return dict(self._t)

    def items(self):
        return self._t.items()

    @property
    def variables(self) -> tuple:
        vs = {v for m in self._t for v, _ in m}
        return tuple(sorted(vs, key=var_key))

    def exponent_vector(self, m: Monomial, variables: Sequence[str]) -> tuple:
        d = dict(m)
        return tuple(d.get(v, 0) for v in variables)

    def coeff(self, m: Monomial) -> Fraction:
        return self._t.get(m, Fraction(0))

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    def degree(self) -> int:
        return max((_mono_deg(m) for m in self._t), default=-1)

    def is_homogeneous(self, d: int | None = None) -> bool:
        degs = {_mono_deg(m) for m in self._t}
        if not degs:
            return True
        if len(degs) != 1:
            return False
        return d is None or degs == {d}

    def homogeneous_part(self, d: int) -> "Poly":
        return Poly._raw({m: c for m, c in self._t.items() if _mono_deg(m) == d})

    def constant_term(self) -> Fraction:
        return self._t.get((), Fraction(0))

    def sorted_terms(self) -> list:
        return sorted(self._t.items(), key=lambda mc: mono_order_key(mc[0]))

    def leading_term(self) -> tuple:
        if not self._t:
            raise ValueError("zero polynomial has no leading term")
        return min(self._t.items(), key=lambda mc: mono_order_key(mc[0]))

    def linear_coefficients(self) -> dict:
        """Coefficients of a homogeneous linear form, keyed by variable."""
        out = {}
        for m, c in self._t.items():
            if len(m) != 1 or m[0][1] != 1:
                raise ValueError(f"{self} is not a linear form")
            out[m[0][0]] = c
        return out

    # ------------------------------------------------------------ arithmetic
    @staticmethod
    def _coerce(other) -> "Poly":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(other)
        return NotImplemented

    def __add__(self, other) -> "Poly":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        t = dict(self._t)
        for m, c in o._t.items():
            s = t.get(m, 0) + c
            if s:
                t[m] = s
            else:
                t.pop(m, None)
        return Poly._raw(t)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw({m: -c for m, c in self._t.items()})

    def __sub__(self, other) -> "Poly":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            if not other:
                return Poly.zero()
            f = _as_fraction(other)
            return Poly._raw({m: c * f for m, c in self._t.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        if not self._t or not other._t:
            return Poly.zero()
        t: dict = {}
        for m1, c1 in self._t.items():
            for m2, c2 in other._t.items():
                m = _mono_mul(m1, m2)
                s = t.get(m, 0) + c1 * c2
                if s:
                    t[m] = s
                else:
                    t.pop(m, None)
        return Poly._raw(t)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / _as_fraction(other))
        if isinstance(other, Poly):
            return exact_divide(self, other)
        return NotImplemented

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative exponent")
        result = Poly.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self._t == o._t

    def __hash__(self) -> int:
        if self._h is None:
            self._h = hash(frozenset(self._t.items()))
        return self._h

    # ---------------------------------------------------------- substitution
    def substitute(self, mapping: Mapping[str, "Poly | Scalar"]) -> "Poly":
        """Replace every variable by its image and expand.

        Raises :class:`MissingVariable` when a variable has no image.
        """
        return substitute(self, mapping)

    def rename(self, mapping: Mapping[str, str]) -> "Poly":
        t = {}
        for m, c in self._t.items():
            d: dict = {}
            for v, e in m:
                w = mapping.get(v, v)
                d[w] = d.get(w, 0) + e
            mm = tuple(sorted(d.items(), key=lambda q: var_key(q[0])))
            t[mm] = t.get(mm, 0) + c
        return Poly(t)

    def evaluate(self, point: Mapping[str, Scalar]) -> Fraction:
        total = Fraction(0)
        for m, c in self._t.items():
            term = c
            for v, e in m:
                if v not in point:
                    raise MissingVariable(f"no value for variable {v!r}")
                term *= _as_fraction(point[v]) ** e
            total += term
        return total

    # ------------------------------------------------------------- rendering
    def __str__(self) -> str:
        if not self._t:
            return "0"
        out = []
        for i, (m, c) in enumerate(self.sorted_terms()):
            neg = c < 0
            a = -c if neg else c
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            if not mono:
                body = _fmt_fraction(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_fmt_fraction(a)}*{mono}"
            if i == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    def __repr__(self) -> str:
        return f"Poly({str(self)!r})"

    @classmethod
    def parse(cls, text: str) -> "Poly":
        return _Parser(text).parse()


def _fmt_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def substitute(f: Poly, mapping: Mapping[str, "Poly | Scalar"]) -> Poly:
    """Substitute polynomials (typically linear forms) for variables."""
    images: dict = {}
    for v in f.variables:
        if v not in mapping:
            raise MissingVariable(f"no image given for variable {v!r}")
        img = mapping[v]
        images[v] = img if isinstance(img, Poly) else Poly.const(img)
    powers: dict = {}

    def power(v: str, e: int) -> Poly:
        key = (v, e)
        if key not in powers:
            powers[key] = images[v] ** e
        return powers[key]

    acc: dict = {}
    for m, c in f.items():
        term = Poly.const(c)
        for v, e in m:
            term = term * power(v, e)
            if not term:
                break
        for mm, cc in term.items():
            s = acc.get(mm, 0) + cc
            if s:
                acc[mm] = s
            else:
                acc.pop(mm, None)
    return Poly._raw(acc)


def exact_divide(num: Poly, den: Poly) -> Poly:
    """Return ``q`` with ``q * den == num``; raise :class:`NotDivisible` otherwise.

    For a single divisor, leading-term division finds the quotient whenever
    one exists: every multiple of ``den`` has a leading monomial divisible by
    the leading monomial of ``den``.
    """
    if not den:
        raise ZeroDivisionError("division by the zero polynomial")
    lm_d, lc_d = den.leading_term()
    rem = dict(num._t)
    quot: dict = {}
    den_items = list(den.items())
    while rem:
        lm_r = min(rem, key=mono_order_key)
        q_m = _mono_div(lm_r, lm_d)
        if q_m is None:
            raise NotDivisible(f"{den} does not divide {num}")
        q_c = rem[lm_r] / lc_d
        quot[q_m] = quot.get(q_m, 0) + q_c
        for m, c in den_items:
            mm = _mono_mul(q_m, m)
            s = rem.get(mm, 0) - q_c * c
            if s:
                rem[mm] = s
            else:
                rem.pop(mm, None)
    return Poly(quot)


def prod(polys: Iterable[Poly]) -> Poly:
    return reduce(lambda a, b: a * b, polys, Poly.one())


def normalize_linear_form(form: Poly) -> tuple:
    """Split a nonzero linear form as ``scalar * primitive`` with the first
    variable (natural order) carrying a positive integer coefficient.

    Returns ``(scalar, key, primitive_poly)`` where ``key`` identifies the
    primitive form.
    """
    coeffs = form.linear_coefficients()
    if not coeffs:
        raise ValueError("zero linear form")
    vs = sorted(coeffs, key=var_key)
    den = reduce(lambda a, b: a * b // gcd(a, b), (coeffs[v].denominator for v in vs), 1)
    ints = [int(coeffs[v] * den) for v in vs]
    g = reduce(gcd, (abs(i) for i in ints))
    if ints[0] < 0:
        g = -g
    prim = tuple((v, i // g) for v, i in zip(vs, ints))
    scalar = Fraction(g, den)
    return scalar, prim, Poly.linear(dict(prim))


# --------------------------------------------------------------------- parser
_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_.']*)|(\*\*|[-+*/^()]))")


class _Parser:
    def __init__(self, text: str):
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"cannot parse polynomial near {text[pos:]!r}")
            num, name, op = m.groups()
            if num is not None:
                self.toks.append(("num", int(num)))
            elif name is not None:
                self.toks.append(("var", name))
            else:
                self.toks.append(("op", "^" if op == "**" else op))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> Poly:
        if not self.toks:
            raise ParseError("empty polynomial")
        p = self.expr()
        if self.i != len(self.toks):
            raise ParseError(f"trailing input in polynomial: {self.toks[self.i:]}")
        return p

    def expr(self) -> Poly:
        sign = 1
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        acc = self.term() * sign
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                acc = acc + t if val == "+" else acc - t
            else:
                return acc

    def term(self) -> Poly:
        acc = self.factor()
        while True:
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.take()
                acc = acc * self.factor()
            elif kind == "op" and val == "/":
                self.take()
                d = self.factor()
                if d.degree() > 0:
                    acc = exact_divide(acc, d)
                else:
                    acc = acc * (1 / d.constant_term())
            else:
                return acc

    def factor(self) -> Poly:
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            k, e = self.take()
            if k != "num":
                raise ParseError("exponent must be a nonnegative integer")
            return base ** e
        return base

    def atom(self) -> Poly:
        kind, val = self.take()
        if kind == "num":
            return Poly.const(val)
        if kind == "var":
            return Poly.var(val)
        if kind == "op" and val == "(":
            p = self.expr()
            k, v = self.take()
            if v != ")":
                raise ParseError("missing closing parenthesis")
            return p
        if kind == "op" and val == "-":
            return -self.factor()
        raise ParseError(f"unexpected token {val!r}")


# ------------------------------------------------------------- linear algebra
class RatMatrix:
    """Rectangular matrix of rationals (row-major, immutable by convention)."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Sequence[Sequence[Scalar]], ncols: int | None = None):
        self.rows = tuple(tuple(_as_fraction(x) for x in r) for r in rows)
        self.nrows = len(self.rows)
        if ncols is None:
            ncols = len(self.rows[0]) if self.rows else 0
        if any(len(r) != ncols for r in self.rows):
            raise ValueError("matrix rows have different lengths")
        self.ncols = ncols

    def transpose(self) -> "RatMatrix":
        return RatMatrix([list(c) for c in zip(*self.rows)] if self.rows else [], ncols=self.nrows)

    def __eq__(self, other) -> bool:
        return isinstance(other, RatMatrix) and self.rows == other.rows and self.ncols == other.ncols


def _integer_rows(rows: Sequence[Sequence[Scalar]]) -> list:
    out = []
    for r in rows:
        fr = [_as_fraction(x) for x in r]
        den = reduce(lambda a, b: a * b // gcd(a, b), (x.denominator for x in fr), 1)
        out.append([int(x * den) for x in fr])
    return out


def rank(m: "RatMatrix | Sequence[Sequence[Scalar]]") -> int:
    """Exact rank by fraction-free (Bareiss) elimination.

    Rows are first scaled to integers, which does not change the rank.
    """
    rows = m.rows if isinstance(m, RatMatrix) else m
    a = _integer_rows(rows)
    if not a or not a[0]:
        return 0
    nr, nc = len(a), len(a[0])
    r = 0
    prev = 1
    for c in range(nc):
        piv = next((i for i in range(r, nr) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, nr):
            aic = a[i][c]
            row_i = a[i]
            row_r = a[r]
            for j in range(c + 1, nc):
                row_i[j] = (p * row_i[j] - aic * row_r[j]) // prev
            row_i[c] = 0
        prev = p
        r += 1
        if r == nr:
            break
    return r


def rref(m: "RatMatrix | Sequence[Sequence[Scalar]]") -> tuple:
    """Reduced row echelon form over the rationals; returns (rows, pivots)."""
    rows = m.rows if isinstance(m, RatMatrix) else m
    a = [[_as_fraction(x) for x in r] for r in rows]
    if not a:
        return [], []
    nr, nc = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nr):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return a[:r], pivots


def nullspace(m: "RatMatrix | Sequence[Sequence[Scalar]]", ncols: int | None = None) -> list:
    """Basis of the right kernel, one vector per free column (ascending)."""
    rows = m.rows if isinstance(m, RatMatrix) else m
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    red, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[fc]
        basis.append(v)
    return basis


class SparseEchelon:
    """Incremental fraction-free echelon form of sparse integer rows.

    Rows are dictionaries ``column -> coefficient``.  Each stored row is
    primitive with a positive pivot at its smallest column; reducing a new
    row against the stored ones uses only integer cross-multiplication and
    content removal, so entries stay small for the sparse 0/±1 systems that
    arise from boundary relations.
    """

    def __init__(self):
        self.pivots: dict = {}

    @staticmethod
    def _primitive(row: dict) -> dict:
        g = reduce(gcd, (abs(v) for v in row.values()))
        lead = row[min(row)]
        if lead < 0:
            g = -g
        return {k: v // g for k, v in row.items()} if g != 1 else row

    @staticmethod
    def _to_int(row: Mapping) -> dict:
        items = [(k, _as_fraction(v)) for k, v in row.items() if v]
        if not items:
            return {}
        den = reduce(lambda a, b: a * b // gcd(a, b), (v.denominator for _, v in items), 1)
        return {k: int(v * den) for k, v in items}

    def reduce(self, row: Mapping) -> dict:
        r = self._to_int(row)
        while r:
            c = min(r)
            p = self.pivots.get(c)
            if p is None:
                return self._primitive(r)
            a, b = p[c], r[c]
            new = {k: a * v for k, v in r.items()}
            for k, v in p.items():
                s = new.get(k, 0) - b * v
                if s:
                    new[k] = s
                else:
                    new.pop(k, None)
            r = self._primitive(new) if new else new
        return r

    def add(self, row: Mapping) -> bool:
        """Insert a row; return True when it increased the rank."""
        r = self.reduce(row)
        if not r:
            return False
        self.pivots[min(r)] = r
        return True

    def contains(self, row: Mapping) -> bool:
        return not self.reduce(row)

    @property
    def rank(self) -> int:
        return len(self.pivots)


def sparse_rank(rows: Iterable[Mapping]) -> int:
    ech = SparseEchelon()
    for r in rows:
        ech.add(r)
    return ech.rank


def elementary_divisors(m: Sequence[Sequence[int]]) -> list:
    """Nonzero diagonal of the Smith normal form of an integer matrix."""
    a = [list(map(int, r)) for r in m]
    if not a or not a[0]:
        return []
    nr, nc = len(a), len(a[0])
    divisors = []
    t = 0
    while t < min(nr, nc):
        nz = [(abs(a[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if a[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        while True:
            changed = False
            for i in range(t + 1, nr):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                    if a[i][t]:
                        a[t], a[i] = a[i], a[t]
                        changed = True
            for j in range(t + 1, nc):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    for row in a:
                        row[j] -= q * row[t]
                    if a[t][j]:
                        for row in a:
                            row[t], row[j] = row[j], row[t]
                        changed = True
            if changed:
                continue
            bad = next(((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc)
                        if a[i][j] % a[t][t]), None)
            if bad is None:
                break
            i, _ = bad
            a[t] = [x + y for x, y in zip(a[t], a[i])]
        divisors.append(abs(a[t][t]))
        t += 1
    return divisors


def is_unimodular_system(vectors: Sequence[Sequence[int]]) -> bool:
    """True when the integer vectors are independent and span a saturated
    sublattice (all elementary divisors equal 1)."""
    if not vectors:
        return True
    d = elementary_divisors(vectors)
    return len(d) == len(vectors) and all(x == 1 for x in d)


def solve_square(m: Sequence[Sequence[Scalar]]) -> list:
    """Inverse of a square rational matrix (raises ValueError if singular)."""
    n = len(m)
    aug = [[_as_fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(m)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(red) < n:
        raise ValueError("singular matrix")
    return [row[n:] for row in red[:n]]
