"""Sparse truncated power series over Q.

A ``Series`` keeps the terms of total degree <= ``order``.  It also carries an
``exact`` flag: True means the stored terms are the whole function (it is a
polynomial and nothing has ever been dropped).  Translating a variable by a
nonzero constant is only meaningful for exact series, since it mixes all
degrees.
"""
from fractions import Fraction
from math import comb, gcd

DEFAULT_ORDER = 12


class SeriesError(ValueError):
    pass


class NonUnitError(SeriesError):
    pass


class RationalPowerError(SeriesError):
    pass


class DivergentSubstitution(SeriesError):
    pass


def glex_key(e):
    """Graded order: lower degree first, then x1-heavy before x2-heavy."""
    return (sum(e), tuple(-x for x in e))


def _add_exp(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _scaled(terms):
    """(d, {e: integer}) with terms[e] = integer / d."""
    d = 1
    for c in terms.values():
        q = c.denominator
        if d % q:
            d = d * q // gcd(d, q)
    return d, {e: c.numerator * (d // c.denominator) for e, c in terms.items()}


def rational_root(c, q):
    """Exact q-th root of a rational, or None."""
    c = Fraction(c)
    if c == 0:
        return Fraction(0)
    if c < 0:
        if q % 2 == 0:
            return None
        r = rational_root(-c, q)
        return None if r is None else -r
    num = _int_root(c.numerator, q)
    den = _int_root(c.denominator, q)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _int_root(n, q):
    if n < 2:
        return n
    lo, hi = 1, 1 << (n.bit_length() // q + 1)
    while lo <= hi:
        mid = (lo + hi) // 2
        p = mid ** q
        if p == n:
            return mid
        if p < n:
            lo = mid + 1
        else:
            hi = mid - 1
    return None


def rational_power(c, r):
    """c**r for rational r, exact or RationalPowerError."""
    c = Fraction(c)
    r = Fraction(r)
    if c == 0:
        if r > 0:
            return Fraction(0)
        raise RationalPowerError("zero to a non-positive power")
    root = rational_root(c, r.denominator)
    if root is None:
        raise RationalPowerError("%s^(%s) is not rational" % (c, r))
    return root ** r.numerator


def binom_frac(r, k):
    out = Fraction(1)
    for i in range(k):
        out *= (r - i)
    for i in range(2, k + 1):
        out /= i
    return out


class Series:
    __slots__ = ("nvars", "order", "terms", "exact", "_sorted")

    def __init__(self, nvars, terms=None, order=DEFAULT_ORDER, exact=True):
        self.nvars = nvars
        self.order = order
        clean = {}
        dropped = False
        if terms:
            for e, c in terms.items():
                if c == 0:
                    continue
                e = tuple(e)
                if len(e) != nvars:
                    raise SeriesError("exponent length %d in a %d-variable series" % (len(e), nvars))
                if sum(e) > order:
                    dropped = True
                    continue
                clean[e] = c if isinstance(c, Fraction) else Fraction(c)
        self.terms = clean
        self.exact = exact and not dropped
        self._sorted = None

    # construction helpers
    @classmethod
    def zero(cls, nvars, order=DEFAULT_ORDER):
        return cls(nvars, {}, order)

    @classmethod
    def const(cls, nvars, c, order=DEFAULT_ORDER):
        return cls(nvars, {(0,) * nvars: Fraction(c)}, order)

    @classmethod
    def var(cls, nvars, i, order=DEFAULT_ORDER):
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): Fraction(1)}, order)

    @classmethod
    def monomial(cls, exps, c=1, order=DEFAULT_ORDER):
        exps = tuple(int(x) for x in exps)
        if any(x < 0 for x in exps):
            raise SeriesError("negative exponent in a monomial")
        return cls(len(exps), {exps: Fraction(c)}, order)

    def _new(self, terms, exact, order=None):
        return Series(self.nvars, terms, self.order if order is None else order, exact)

    def copy_with(self, order=None, exact=None):
        order = self.order if order is None else order
        exact = self.exact if exact is None else exact
        return Series(self.nvars, self.terms, order, exact)

    # inspection
    def items(self):
        """Terms in graded-lex order."""
        if self._sorted is None:
            self._sorted = sorted(self.terms.items(), key=lambda t: glex_key(t[0]))
        return self._sorted

    def coefficient(self, e):
        return self.terms.get(tuple(e), Fraction(0))

    def constant(self):
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def is_zero(self):
        return not self.terms

    def is_unit(self):
        return self.constant() != 0

    def is_constant(self):
        return all(sum(e) == 0 for e in self.terms)

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def low_degree(self):
        return min((sum(e) for e in self.terms), default=None)

    def involves(self, i):
        return any(e[i] for e in self.terms)

    def variables(self):
        return sorted({i for e in self.terms for i, x in enumerate(e) if x})

    def min_exponent(self, indices=None):
        """Componentwise minimum exponent over the given variable indices."""
        idx = range(self.nvars) if indices is None else indices
        if not self.terms:
            return None
        return tuple(min(e[i] for e in self.terms) for i in idx)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Series.const(self.nvars, other, self.order)
        if not isinstance(other, Series):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        return "Series(%s)" % format_series(self)

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, Series):
            if other.nvars != self.nvars:
                raise SeriesError("frame mismatch: %d vs %d variables" % (self.nvars, other.nvars))
            return other
        return Series.const(self.nvars, Fraction(other), self.order)

    def __add__(self, other):
        other = self._coerce(other)
        order = min(self.order, other.order)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return Series(self.nvars, t, order, self.exact and other.exact)

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()}, self.exact)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return self._new({}, self.exact)
        return self._new({e: c * v for e, v in self.terms.items()}, self.exact)

    def __mul__(self, other):
        if not isinstance(other, Series):
            return self.scale(other)
        other = self._coerce(other)
        order = min(self.order, other.order)
        # integer numerators over a common denominator: Fraction arithmetic in
        # the inner loop dominates everything else otherwise
        da, A = _scaled(self.terms)
        db, Bt = _scaled(other.terms)
        buckets = {}
        for e, c in Bt.items():
            buckets.setdefault(sum(e), []).append((e, c))
        degs = sorted(buckets)
        out = {}
        dropped = False
        for e1, c1 in A.items():
            d1 = sum(e1)
            for d2 in degs:
                if d1 + d2 > order:
                    dropped = True
                    break
                for e2, c2 in buckets[d2]:
                    e = tuple(x + y for x, y in zip(e1, e2))
                    out[e] = out.get(e, 0) + c1 * c2
        den = da * db
        terms = {e: Fraction(c, den) for e, c in out.items() if c}
        return Series(self.nvars, terms, order, self.exact and other.exact and not dropped)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.inverse()
        return self.scale(Fraction(1) / Fraction(other))

    def __pow__(self, k):
        if isinstance(k, Fraction) and k.denominator != 1:
            return self.power(k)
        k = int(k)
        if k < 0:
            return self.inverse() ** (-k)
        result = Series.const(self.nvars, 1, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def truncate(self, order):
        return Series(self.nvars, self.terms, min(order, self.order), self.exact)

    def inverse(self):
        """Multiplicative inverse of a unit."""
        c = self.constant()
        if c == 0:
            raise NonUnitError("series has zero constant term")
        if self.is_constant():
            return Series.const(self.nvars, 1 / c, self.order)
        h = self.scale(1 / c) - 1          # zero constant term
        total = Series.const(self.nvars, 1, self.order)
        p = Series.const(self.nvars, 1, self.order)
        for _ in range(self.order):
            p = p * (-h)
            if p.is_zero():
                break
            total = total + p
        return total.scale(1 / c).copy_with(exact=False)

    def power(self, r):
        """a**r for rational r; needs a nonzero constant term c with c**r rational."""
        r = Fraction(r)
        if r.denominator == 1 and r >= 0:
            return self ** int(r)
        c = self.constant()
        if c == 0:
            raise NonUnitError("rational power of a non-unit")
        cr = rational_power(c, r)
        if self.is_constant():
            return Series.const(self.nvars, cr, self.order)
        h = self.scale(1 / c) - 1
        total = Series.const(self.nvars, 1, self.order)
        p = Series.const(self.nvars, 1, self.order)
        for k in range(1, self.order + 1):
            p = p * h
            if p.is_zero():
                break
            total = total + p.scale(binom_frac(r, k))
        return total.scale(cr).copy_with(exact=False)

    def derivative(self, i, k=1):
        out = {}
        for e, c in self.terms.items():
            if e[i] < k:
                continue
            f = 1
            for j in range(k):
                f *= e[i] - j
            e2 = list(e)
            e2[i] -= k
            out[tuple(e2)] = c * f
        return self._new(out, self.exact)

    def euler(self, weights):
        """Apply sum_j w_j x_j d/dx_j (weights indexed by variable)."""
        out = {}
        for e, c in self.terms.items():
            s = sum(Fraction(w) * x for w, x in zip(weights, e))
            if s:
                out[e] = c * s
        return self._new(out, self.exact)

    def divide_monomial(self, exps):
        out = {}
        for e, c in self.terms.items():
            e2 = tuple(a - b for a, b in zip(e, exps))
            if any(x < 0 for x in e2):
                raise SeriesError("series is not divisible by the monomial")
            out[e2] = c
        return self._new(out, self.exact)

    def shift_monomial(self, exps):
        """Multiply by a monomial."""
        out = {_add_exp(e, exps): c for e, c in self.terms.items()}
        return Series(self.nvars, out, self.order, self.exact)

    def filter(self, pred):
        """Sub-series of terms whose exponent satisfies pred."""
        return self._new({e: c for e, c in self.terms.items() if pred(e)}, self.exact)

    def v_coefficients(self, i):
        """[a_0, a_1, ...] with self = sum a_j x_i^j and a_j free of x_i."""
        parts = {}
        for e, c in self.terms.items():
            j = e[i]
            e2 = list(e)
            e2[i] = 0
            parts.setdefault(j, {})[tuple(e2)] = c
        if not parts:
            return [self._new({}, self.exact)]
        top = max(parts)
        return [self._new(parts.get(j, {}), self.exact) for j in range(top + 1)]

    def restrict(self, i, value=0):
        """Set x_i = value (value 0 keeps the series well defined at any order)."""
        if value == 0:
            return self._new({e: c for e, c in self.terms.items() if e[i] == 0}, self.exact)
        images = [Series.var(self.nvars, j, self.order) for j in range(self.nvars)]
        images[i] = Series.const(self.nvars, value, self.order)
        return self.substitute(images)

    def insert_var(self, pos):
        """Embed into a frame with one extra variable at index pos."""
        out = {e[:pos] + (0,) + e[pos:]: c for e, c in self.terms.items()}
        return Series(self.nvars + 1, out, self.order, self.exact)

    def remove_var(self, pos):
        if self.involves(pos):
            raise SeriesError("cannot drop a variable the series depends on")
        out = {e[:pos] + e[pos + 1:]: c for e, c in self.terms.items()}
        return Series(self.nvars - 1, out, self.order, self.exact)

    def permute(self, perm):
        """New variable j is old variable perm[j]."""
        out = {tuple(e[p] for p in perm): c for e, c in self.terms.items()}
        return Series(self.nvars, out, self.order, self.exact)

    def substitute(self, images):
        """Formal composition: x_i -> images[i].

        Images with a nonzero constant term are only allowed when ``self`` is
        exact, otherwise the unknown tail would feed every degree.
        """
        if len(images) != self.nvars:
            raise SeriesError("need one image per variable")
        target = images[0].nvars if images else 0
        order = min([self.order] + [im.order for im in images])
        used = {i for e in self.terms for i, x in enumerate(e) if x}
        for i in used:
            if images[i].nvars != target:
                raise SeriesError("frame mismatch among images")
            if images[i].constant() != 0 and not self.exact:
                raise DivergentSubstitution(
                    "translating variable %d of a truncated series is ambiguous" % i)
        cache = {}

        def pw(i, k):
            key = (i, k)
            if key not in cache:
                if k == 1:
                    cache[key] = images[i].truncate(order)
                else:
                    half = pw(i, k // 2)
                    sq = half * half
                    cache[key] = sq * pw(i, 1) if k % 2 else sq
            return cache[key]

        acc = {}
        exact = self.exact
        for e, c in self.items():
            # quick lower bound on the degree of the product
            low = 0
            for i, k in enumerate(e):
                if k:
                    ld = images[i].low_degree()
                    if ld is None:
                        low = None
                        break
                    low += ld * k
            if low is None:
                continue
            if low > order:
                exact = False
                continue
            term = Series.const(target, c, order)
            for i, k in enumerate(e):
                if k:
                    term = term * pw(i, k)
            if not term.exact:
                exact = False
            for e2, c2 in term.terms.items():
                acc[e2] = acc.get(e2, 0) + c2
        for i in used:
            if not images[i].exact:
                exact = False
        return Series(target, acc, order, exact)


def variables(nvars, order=DEFAULT_ORDER):
    return [Series.var(nvars, i, order) for i in range(nvars)]


def identity_images(nvars, order=DEFAULT_ORDER):
    return variables(nvars, order)


def monomial_of(exps, nvars=None, order=DEFAULT_ORDER, coeff=1):
    return Series.monomial(exps, coeff, order)


def product_power(factors, exps, nvars, order):
    """prod factors[i] ** exps[i] with rational exponents (units needed for non-integers)."""
    out = Series.const(nvars, 1, order)
    for f, r in zip(factors, exps):
        r = Fraction(r)
        if r == 0:
            continue
        out = out * f.power(r)
    return out


def _fmt_coeff(c):
    return str(c.numerator) if c.denominator == 1 else "%d/%d" % (c.numerator, c.denominator)


def format_series(s, names=None):
    """Deterministic text form, terms in graded-lex order."""
    if names is None:
        names = ["x%d" % (i + 1) for i in range(s.nvars)]
    if not s.terms:
        return "0"
    parts = []
    for e, c in s.items():
        factors = []
        for i, k in enumerate(e):
            if k == 1:
                factors.append(names[i])
            elif k:
                factors.append("%s^%d" % (names[i], k))
        mag = abs(c)
        if factors:
            body = "*".join(factors)
            if mag != 1:
                body = _fmt_coeff(mag) + "*" + body
        else:
            body = _fmt_coeff(mag)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first = parts[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        text += " %s %s" % (sign, body)
    return text


def center_shift(T, v, nu, max_iter=None):
    """Coordinate change v = v' + V(others) killing the v^(nu-1) coefficient of T.

    Returns (images, T') where images[v] = v' + V and the rest are identities.
    The equation d^(nu-1)/dv^(nu-1) T (.., V, ..) = 0 is solved by a fixed-point
    iteration with the constant slope, gaining one degree per round.
    """
    n, N = T.nvars, T.order
    G = T.derivative(v, nu - 1)
    slope = G.derivative(v).constant()
    if slope == 0:
        raise SeriesError("d^nu T / dv^nu is not a unit at the origin")
    if G.constant() != 0:
        raise SeriesError("the v^(nu-1) coefficient does not vanish at the origin")
    V = Series.zero(n, N)
    ident = variables(n, N)
    rounds = (N + 2) if max_iter is None else max_iter
    settled = False
    for _ in range(rounds):
        im = list(ident)
        im[v] = V
        resid = G.substitute(im)
        if resid.is_zero():
            settled = True
            break
        V = V - resid.scale(1 / slope)
    if not settled:
        V = V.copy_with(exact=False)
    images = list(ident)
    images[v] = ident[v] + V
    Tp = T.substitute(images)
    return images, Tp
