"""Problem files and series literals.

A problem file is a list of ``key = value`` lines (``#`` starts a comment):

    variables = u1 u2 w1
    u_block = u1 u2
    divisor = u1 u2
    first_integrals = 1 -1 ; 2 0
    generator = u1*w1 + u1^2
    generator = u2 - 1/2*u1*u2*w1
    trunc = 12
    samples = 5
    seed = 0

``variables``, ``u_block`` and at least one ``generator`` are required; the
remaining keys are optional (divisor defaults to the whole u-block, the
first-integral matrix to no rows).  ``v = name`` marks a free variable as the
distinguished one.  Series literals::

    series := ['-'] term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := coeff | name ['^' int]
    coeff  := int ['/' int]
"""
import random
import re
from fractions import Fraction

import sympy

from .foliation import ChartFrame, FrameError, LocalModel
from .linalg import ExpMatrix, LinalgError
from .series import DEFAULT_ORDER, Series, format_series


class ProblemError(ValueError):
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = "line %d" % line
            if column is not None:
                where += ", column %d" % column
            where += ": "
        super().__init__(where + message)

    def to_dict(self):
        return {"error": "parse", "message": self.message, "line": self.line,
                "column": self.column}


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^]))")


def _tokens(text, line, col0):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = len(text) - len(text[pos:].lstrip())
            raise ProblemError("unexpected character %r" % text[bad], line, col0 + bad)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), col0 + start))
        pos = m.end()
    return out


def parse_series(text, names, order=DEFAULT_ORDER, exact=True, line=None, col0=1):
    """Parse a series literal over the given variable names."""
    index = {n: i for i, n in enumerate(names)}
    nvars = len(names)
    toks = _tokens(text, line, col0)
    end_col = col0 + len(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def expect(kind, what):
        nonlocal pos
        t = peek()
        if t is None:
            raise ProblemError("expected %s at end of series" % what, line, end_col)
        if t[0] != kind:
            raise ProblemError("expected %s, found %r" % (what, t[1]), line, t[2])
        pos += 1
        return t

    def factor():
        nonlocal pos
        t = peek()
        if t is None:
            raise ProblemError("expected a number or variable at end of series", line, end_col)
        if t[0] == "num":
            pos += 1
            num = int(t[1])
            nt = peek()
            if nt is not None and nt[1] == "/":
                pos += 1
                den = int(expect("num", "a denominator")[1])
                if den == 0:
                    raise ProblemError("zero denominator", line, nt[2])
                return Fraction(num, den), None
            return Fraction(num), None
        if t[0] == "name":
            pos += 1
            if t[1] not in index:
                raise ProblemError("unknown variable %r" % t[1], line, t[2])
            k = 1
            nt = peek()
            if nt is not None and nt[1] == "^":
                pos += 1
                k = int(expect("num", "an exponent")[1])
            return Fraction(1), (index[t[1]], k)
        raise ProblemError("expected a number or variable, found %r" % t[1], line, t[2])

    def term(sign):
        nonlocal pos
        coeff = Fraction(sign)
        exps = [0] * nvars
        while True:
            c, var = factor()
            coeff *= c
            if var is not None:
                exps[var[0]] += var[1]
            t = peek()
            if t is not None and t[1] == "*":
                pos += 1
                continue
            return coeff, tuple(exps)

    terms = {}
    sign = 1
    t = peek()
    if t is None:
        raise ProblemError("empty series", line, col0)
    if t[1] == "-":
        sign = -1
        pos += 1
    while True:
        c, e = term(sign)
        if sum(e) <= order:
            terms[e] = terms.get(e, 0) + c
        else:
            exact = False
        t = peek()
        if t is None:
            break
        if t[1] not in "+-":
            raise ProblemError("expected '+' or '-', found %r" % t[1], line, t[2])
        sign = 1 if t[1] == "+" else -1
        pos += 1
    return Series(nvars, terms, order, exact)


class Problem:
    def __init__(self, names, u_block, divisor, B, generators, trunc=DEFAULT_ORDER,
                 samples=5, seed=0, v=None):
        self.names = list(names)
        self.u_block = list(u_block)
        self.divisor = list(divisor)
        self.B = B                      # list of rows over the u-block
        self.generators = list(generators)   # literal strings
        self.trunc = trunc
        self.samples = samples
        self.seed = seed
        self.v = v

    def frame(self):
        kinds = ["u" if n in self.u_block else "w" for n in self.names]
        div = [n in self.divisor for n in self.names]
        v = self.names.index(self.v) if self.v is not None else None
        return ChartFrame(self.names, kinds, div, v)

    def model(self, trunc=None):
        N = self.trunc if trunc is None else trunc
        gens = [parse_series(g, self.names, N) for g in self.generators]
        B = ExpMatrix(self.B, len(self.u_block)) if self.B else ExpMatrix.empty(len(self.u_block))
        return LocalModel(self.frame(), B, gens, N)

    def serialize(self):
        lines = ["variables = " + " ".join(self.names),
                 "u_block = " + " ".join(self.u_block),
                 "divisor = " + " ".join(self.divisor)]
        if self.v is not None:
            lines.append("v = " + self.v)
        if self.B:
            lines.append("first_integrals = " + " ; ".join(" ".join(str(x) for x in r)
                                                           for r in self.B))
        for g in self.generators:
            lines.append("generator = " + g)
        lines += ["trunc = %d" % self.trunc, "samples = %d" % self.samples,
                  "seed = %d" % self.seed]
        return "\n".join(lines) + "\n"


_KEYS = ("variables", "u_block", "divisor", "v", "first_integrals", "generator",
         "trunc", "samples", "seed")


def parse_problem(text):
    fields = {}
    gens = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            raise ProblemError("expected 'key = value'", ln, len(body) - len(body.lstrip()) + 1)
        key, value = body.split("=", 1)
        k = key.strip()
        vcol = len(key) + 2 + (len(value) - len(value.lstrip()))
        if k not in _KEYS:
            raise ProblemError("unknown key %r" % k, ln, len(key) - len(key.lstrip()) + 1)
        if k == "generator":
            gens.append((value.strip(), ln, vcol))
        else:
            if k in fields:
                raise ProblemError("duplicate key %r" % k, ln, 1)
            fields[k] = (value.strip(), ln, vcol)
    for req in ("variables", "u_block"):
        if req not in fields:
            raise ProblemError("missing required key %r" % req)
    if not gens:
        raise ProblemError("at least one generator is required")
    names = fields["variables"][0].split()
    if len(set(names)) != len(names) or not names:
        raise ProblemError("variable names must be distinct and nonempty", fields["variables"][1])
    for n in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", n):
            raise ProblemError("bad variable name %r" % n, fields["variables"][1])

    def name_list(key, default):
        if key not in fields:
            return default
        val, ln, _ = fields[key]
        out = val.split()
        for n in out:
            if n not in names:
                raise ProblemError("unknown variable %r in %s" % (n, key), ln)
        return out

    u_block = [n for n in names if n in name_list("u_block", [])]
    divisor = [n for n in names if n in name_list("divisor", u_block)]
    for n in divisor:
        if n not in u_block:
            raise ProblemError("divisor variable %r is not in the u-block" % n,
                               fields["divisor"][1])
    v = None
    if "v" in fields:
        vv = name_list("v", [])
        if len(vv) != 1 or vv[0] in u_block:
            raise ProblemError("v must name one variable outside the u-block", fields["v"][1])
        v = vv[0]

    def integer(key, default):
        if key not in fields:
            return default
        val, ln, col = fields[key]
        if not re.fullmatch(r"-?\d+", val):
            raise ProblemError("%s must be an integer" % key, ln, col)
        return int(val)

    trunc = integer("trunc", DEFAULT_ORDER)
    if trunc < 1:
        raise ProblemError("trunc must be positive", fields["trunc"][1])
    samples = integer("samples", 5)
    seed = integer("seed", 0)
    B = []
    if "first_integrals" in fields:
        val, ln, col = fields["first_integrals"]
        for chunk in val.split(";"):
            if not chunk.strip():
                continue
            try:
                row = [Fraction(x) for x in chunk.split()]
            except (ValueError, ZeroDivisionError):
                raise ProblemError("bad first-integral row %r" % chunk.strip(), ln, col)
            if len(row) != len(u_block):
                raise ProblemError("first-integral row has %d entries, the u-block has %d"
                                   % (len(row), len(u_block)), ln, col)
            B.append([int(x) if x.denominator == 1 else x for x in row])
    literals = []
    for text_, ln, col in gens:
        s = parse_series(text_, names, trunc, line=ln, col0=col)
        literals.append(format_series(s, names))
    prob = Problem(names, u_block, divisor, B, literals, trunc, samples, seed, v)
    try:
        model = prob.model()
    except (FrameError, LinalgError) as exc:
        raise ProblemError("problem does not define a valid model: %s" % exc)
    if model.is_exact() and generic_jacobian_rank(model.gens) < len(model.gens):
        raise ProblemError("generators are functionally dependent")
    return prob


def generic_jacobian_rank(gens, tries=3):
    """Rank of the Jacobian of polynomial generators at a few pseudo-random
    rational points (the generic rank with overwhelming probability)."""
    m = gens[0].nvars
    rng = random.Random(0)
    best = 0
    for _ in range(tries):
        point = [Fraction(rng.randint(-97, 97), rng.randint(1, 13)) for _ in range(m)]
        rows = []
        for g in gens:
            row = []
            for i in range(m):
                val = Fraction(0)
                for e, c in g.derivative(i).terms.items():
                    t = c
                    for x, k in zip(point, e):
                        t *= x ** k
                    val += t
                row.append(sympy.Rational(val.numerator, val.denominator))
            rows.append(row)
        best = max(best, sympy.Matrix(rows).rank())
        if best == len(gens):
            break
    return best


def load_problem(path):
    with open(path) as fh:
        return parse_problem(fh.read())
