"""Monomial singular distributions, stored as their lattice of monomial first
integrals, together with coordinate frames, local models, re-centering at
nearby points and Fitting-ideal admissibility of coordinate centers."""
from fractions import Fraction
from itertools import combinations

from .linalg import (ExpMatrix, LinalgError, as_matrix, first_independent_rows,
                     first_pivot_columns, inverse, primitive, rank, rref,
                     right_kernel_basis, right_solve, solve_left, vec_mat)
from .series import DEFAULT_ORDER, Series, format_series, rational_power


class FrameError(ValueError):
    pass


class ChartFrame:
    """Named coordinates.  kinds[i] is 'u' or 'w'; divisor flags only on u's.
    The distinguished v (if any) is a w-kind slot recorded in v_slot."""

    def __init__(self, names, kinds, divisor=None, v_slot=None):
        names = tuple(names)
        kinds = tuple(kinds)
        if divisor is None:
            divisor = tuple(False for _ in names)
        divisor = tuple(bool(x) for x in divisor)
        if not (len(names) == len(kinds) == len(divisor)):
            raise FrameError("frame fields have different lengths")
        if len(set(names)) != len(names):
            raise FrameError("duplicate variable names")
        for k, d in zip(kinds, divisor):
            if k not in ("u", "w"):
                raise FrameError("unknown variable kind %r" % k)
            if d and k != "u":
                raise FrameError("divisor-flagged variables must be in the u-block")
        if v_slot is not None and kinds[v_slot] != "w":
            raise FrameError("v must be a w-kind variable")
        self.names = names
        self.kinds = kinds
        self.divisor = divisor
        self.v_slot = v_slot

    @property
    def m(self):
        return len(self.names)

    @property
    def u_block(self):
        return [i for i, k in enumerate(self.kinds) if k == "u"]

    @property
    def w_block(self):
        return [i for i, k in enumerate(self.kinds) if k == "w" and i != self.v_slot]

    @property
    def free(self):
        """Variables whose coordinate derivation lies in the distribution."""
        return [i for i, k in enumerate(self.kinds) if k == "w"]

    def index(self, name):
        return self.names.index(name)

    def replace(self, names=None, kinds=None, divisor=None, v_slot="keep"):
        return ChartFrame(self.names if names is None else names,
                          self.kinds if kinds is None else kinds,
                          self.divisor if divisor is None else divisor,
                          self.v_slot if v_slot == "keep" else v_slot)

    def with_v(self, v):
        return self.replace(v_slot=v)

    def insert_var(self, pos, name, kind="w", divisor=False, as_v=False):
        names = self.names[:pos] + (name,) + self.names[pos:]
        kinds = self.kinds[:pos] + (kind,) + self.kinds[pos:]
        div = self.divisor[:pos] + (divisor,) + self.divisor[pos:]
        v = self.v_slot
        if v is not None and v >= pos:
            v += 1
        if as_v:
            v = pos
        return ChartFrame(names, kinds, div, v)

    def remove_var(self, pos):
        v = self.v_slot
        if v == pos:
            v = None
        elif v is not None and v > pos:
            v -= 1
        return ChartFrame(self.names[:pos] + self.names[pos + 1:],
                          self.kinds[:pos] + self.kinds[pos + 1:],
                          self.divisor[:pos] + self.divisor[pos + 1:], v)

    def to_dict(self):
        return {
            "names": list(self.names),
            "kinds": ["v" if i == self.v_slot else k for i, k in enumerate(self.kinds)],
            "divisor": [n for n, d in zip(self.names, self.divisor) if d],
        }

    def __eq__(self, other):
        return (isinstance(other, ChartFrame) and self.names == other.names
                and self.kinds == other.kinds and self.divisor == other.divisor
                and self.v_slot == other.v_slot)

    def __hash__(self):
        return hash((self.names, self.kinds, self.divisor, self.v_slot))

    def __repr__(self):
        return "ChartFrame(%s)" % self.to_dict()


def canonical_lattice(B, ncols):
    """Primitive integer rows (positive leading entry), sorted descending."""
    B = as_matrix(B, ncols)
    rows = sorted({primitive(r) for r in B.rows if any(x != 0 for x in r)}, reverse=True)
    return ExpMatrix(rows, ncols)


class VectorField:
    """Either a coordinate derivation d/dx_i or a diagonal field sum w_j x_j d/dx_j."""

    def __init__(self, index=None, weights=None):
        self.index = index
        self.weights = None if weights is None else tuple(Fraction(w) for w in weights)

    @property
    def regular(self):
        return self.index is not None

    def apply(self, s):
        if self.index is not None:
            return s.derivative(self.index)
        return s.euler(self.weights)

    def on_coordinate(self, j, nvars, order):
        """X(x_j) as a series."""
        if self.index is not None:
            return Series.const(nvars, 1 if j == self.index else 0, order)
        return Series.var(nvars, j, order).scale(self.weights[j])

    def coefficient_series(self, nvars, order):
        """Coefficients of the field in the coordinate basis."""
        if self.index is not None:
            return [Series.const(nvars, 1, order)]
        return [Series.var(nvars, j, order).scale(w) for j, w in enumerate(self.weights) if w]

    def describe(self, names):
        if self.index is not None:
            return "d/d%s" % names[self.index]
        parts = []
        for n, w in zip(names, self.weights):
            if w:
                parts.append("%s*%s*d/d%s" % (w, n, n))
        return " + ".join(parts)


class MonomialDistribution:
    """All logarithmic fields killing the monomials u^B (B over the u-block)."""

    def __init__(self, frame, B):
        k = len(frame.u_block)
        raw = as_matrix(B, k)
        B = canonical_lattice(raw, k)
        if rank(B) != B.nrows or B.nrows != sum(1 for r in raw.rows if any(r)):
            raise FrameError("first-integral matrix is rank deficient")
        self.frame = frame
        self.B = B
        self._rref, self._piv = rref(B)
        self._cache = {}

    @property
    def d(self):
        return self.frame.m - self.B.nrows

    def kernel(self):
        return right_kernel_basis(self.B)

    def generators(self):
        fr = self.frame
        out = [VectorField(index=i) for i in fr.free]
        ub = fr.u_block
        for alpha in self.kernel().rows:
            w = [Fraction(0)] * fr.m
            for j, a in zip(ub, alpha):
                w[j] = a
            out.append(VectorField(weights=w))
        return out

    def annihilates(self, gamma):
        """True iff u^gamma is a first integral (gamma over the u-block)."""
        key = tuple(gamma)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        vec = [Fraction(x) for x in gamma]
        for row, p in zip(self._rref.rows, self._piv):
            if vec[p]:
                f = vec[p]
                vec = [a - f * b for a, b in zip(vec, row)]
        res = all(x == 0 for x in vec)
        self._cache[key] = res
        return res

    def is_first_integral(self, e):
        """Full-frame exponent test: no free variable and u-part in the lattice."""
        fr = self.frame
        if any(e[i] for i in fr.free):
            return False
        return self.annihilates(tuple(e[i] for i in fr.u_block))


def distribution_from_first_integrals(frame, B):
    return MonomialDistribution(frame, B)


def annihilates(dist, gamma):
    return dist.annihilates(gamma)


def settle(frame, B):
    """Move non-divisor u's with a zero lattice column into the w-block.

    Their coordinate derivation kills every first integral, so maximality puts
    it in the distribution."""
    ub = frame.u_block
    B = as_matrix(B, len(ub))
    kinds = list(frame.kinds)
    keep = []
    for c, i in enumerate(ub):
        if not frame.divisor[i] and all(B.rows[r][c] == 0 for r in range(B.nrows)):
            kinds[i] = "w"
        else:
            keep.append(c)
    if len(keep) == len(ub):
        return frame, B
    return frame.replace(kinds=kinds), B.take(cols=keep)


def full_width(frame, B):
    """Lattice rows padded to the whole frame (zeros on w's)."""
    ub = frame.u_block
    B = as_matrix(B, len(ub))
    rows = []
    for r in B.rows:
        full = [Fraction(0)] * frame.m
        for j, x in zip(ub, r):
            full[j] = x
        rows.append(full)
    return ExpMatrix(rows, frame.m)


def restrict_width(frame, F):
    """Inverse of full_width; rows must vanish on w's."""
    ub = frame.u_block
    for r in F.rows:
        if any(r[i] for i in range(frame.m) if i not in ub):
            raise FrameError("lattice row involves a free variable")
    return F.take(cols=ub)


class LocalModel:
    def __init__(self, frame, B, gens, order=DEFAULT_ORDER, independent=True, labels=None):
        frame, B = settle(frame, B)
        self.frame = frame
        self.dist = MonomialDistribution(frame, B)
        self.gens = [g.truncate(order) for g in gens]
        for g in self.gens:
            if g.nvars != frame.m:
                raise FrameError("generator lives on %d variables, frame has %d" % (g.nvars, frame.m))
        if not self.gens:
            raise FrameError("a model needs at least one generator")
        self.order = order
        self.independent = independent
        self.labels = tuple(range(len(self.gens))) if labels is None else tuple(labels)

    @property
    def B(self):
        return self.dist.B

    @property
    def n(self):
        return len(self.gens)

    @property
    def m(self):
        return self.frame.m

    def replace(self, frame=None, B=None, gens=None, labels=None):
        return LocalModel(self.frame if frame is None else frame,
                          self.B if B is None else B,
                          self.gens if gens is None else gens,
                          self.order, self.independent,
                          self.labels if labels is None else labels)

    def transported(self, images, frame=None, B=None):
        gens = [g.substitute(images) for g in self.gens]
        return self.replace(frame=frame, B=B, gens=gens)

    def is_exact(self):
        return all(g.exact for g in self.gens)

    def __repr__(self):
        names = self.frame.names
        return "LocalModel(%s, B=%s, gens=%s)" % (self.frame.to_dict(), self.B.tolist(),
                                                  [format_series(g, names) for g in self.gens])

    def to_dict(self):
        from .series import format_series
        return {
            "frame": self.frame.to_dict(),
            "first_integrals": self.B.tolist(),
            "u_block": [self.frame.names[i] for i in self.frame.u_block],
            "generators": [format_series(g, self.frame.names) for g in self.gens],
            "labels": list(self.labels),
            "order": self.order,
        }


# ---------------------------------------------------------------------------
# multiplicative coordinates near a point off the coordinate origin


class MultiplicativeCoords:
    """Coordinates mu_j on a set of slots: mu_j = x_j on vanishing slots and
    mu_j = y_j + c_j on translated slots (y_j centred at the point).

    Every change of coordinates used when re-centering is monomial in the mu's:
    old mu = new mu ^ G.  We keep the accumulated G and the constants."""

    def __init__(self, slots, consts):
        # consts: dict slot -> nonzero constant for translated slots
        self.slots = list(slots)
        self.pos = {s: i for i, s in enumerate(self.slots)}
        self.consts = {s: Fraction(c) for s, c in consts.items() if c != 0}
        self.G = ExpMatrix.identity(len(self.slots))

    @property
    def xs(self):
        return [s for s in self.slots if s not in self.consts]

    @property
    def ys(self):
        return [s for s in self.slots if s in self.consts]

    def xi(self):
        return [self.pos[s] for s in self.xs]

    def yi(self):
        return [self.pos[s] for s in self.ys]

    def apply(self, G):
        """Compose a change old = new^G (G over all slots, X block identity)."""
        G = as_matrix(G)
        yi = self.yi()
        if yi:
            Gyy = G.take(yi, yi)
            H = inverse(Gyy)
            old = [self.consts[self.slots[i]] for i in yi]
            new = {}
            for a, i in enumerate(yi):
                val = Fraction(1)
                for b, cb in enumerate(old):
                    val *= rational_power(cb, H.rows[a][b])
                new[self.slots[i]] = val
            self.consts = new
        self.G = self.G @ G

    def split(self, row):
        """(x-part, y-part) of an exponent row over the slots."""
        return ([row[i] for i in self.xi()], [row[i] for i in self.yi()])

    def embed(self, xpart=None, ypart=None):
        row = [Fraction(0)] * len(self.slots)
        if xpart is not None:
            for i, x in zip(self.xi(), xpart):
                row[i] = Fraction(x)
        if ypart is not None:
            for i, y in zip(self.yi(), ypart):
                row[i] = Fraction(y)
        return row

    def change_x_by_y(self, M):
        """x_old = x_new * mu_y^(-M): M is (#x) x (#y)."""
        n = len(self.slots)
        rows = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
        for a, i in enumerate(self.xi()):
            for b, j in enumerate(self.yi()):
                rows[i][j] = -Fraction(M.rows[a][b])
        self.apply(ExpMatrix(rows, n))

    def change_y_monomial(self, targets):
        """Replace some y's by monomials in the y's.

        targets: list of (slot, exponent row over the y's) meaning the new
        mu at slot = product of old y-mu's to that row.  The chosen slots must
        make the square block invertible."""
        yi = self.yi()
        ys = self.ys
        n = len(self.slots)
        new_of_old = {s: [Fraction(1) if t == s else Fraction(0) for t in ys] for s in ys}
        for s, row in targets:
            new_of_old[s] = [Fraction(x) for x in row]
        # new = old^K with K rows indexed by new slots; old = new^(K^-1)
        K = ExpMatrix([new_of_old[s] for s in ys], len(ys))
        Kinv = inverse(K)
        rows = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
        for a, i in enumerate(yi):
            for b, j in enumerate(yi):
                rows[i][j] = Kinv.rows[a][b]
        self.apply(ExpMatrix(rows, n))

    def images(self, exprows, nvars, order):
        """Series for products mu^row (rows over slots in the final coordinates)."""
        out = []
        for row in exprows:
            s = Series.const(nvars, 1, order)
            xe = [0] * nvars
            for i, slot in enumerate(self.slots):
                r = Fraction(row[i])
                if r == 0:
                    continue
                if slot in self.consts:
                    base = Series.var(nvars, slot, order) + self.consts[slot]
                    s = s * base.power(r)
                else:
                    if r.denominator != 1 or r < 0:
                        raise FrameError("non-monomial exponent on a vanishing coordinate")
                    xe[slot] += int(r)
            out.append(s.shift_monomial(xe))
        return out


def coords_row(coords, row):
    """Express an exponent row given in the original slot coordinates in the current ones."""
    return list(vec_mat(row, coords.G))


def rectify_first_integrals(coords, fi_rows, keep_rows=()):
    """Change coordinates so that the first integrals become pure monomials.

    fi_rows: exponent rows over coords.slots, in the ORIGINAL coordinates, of a
    basis of first integrals.  keep_rows: rows (original coordinates) that are
    currently pure in the vanishing coordinates and must stay so.

    Two changes are made: the vanishing coordinates absorb unit factors so a
    maximal independent set of rows loses its translated part, then the
    remaining (purely translated) integrals replace some translated
    coordinates.  Returns (x-rows, y-slots): rows of the new lattice over the
    vanishing slots, and the translated slots whose coordinate is now itself a
    first integral."""
    nx, ny = len(coords.xs), len(coords.ys)

    def blocks(rows):
        parts = [coords.split(coords_row(coords, r)) for r in rows]
        return (ExpMatrix([p[0] for p in parts], nx), ExpMatrix([p[1] for p in parts], ny))

    C1, C2 = blocks(fi_rows)
    sel = first_independent_rows(C1) if C1.nrows else []
    if ny == 0:
        return [list(C1.rows[i]) for i in sel], []
    K1, K2 = blocks(keep_rows) if keep_rows else (ExpMatrix.empty(nx), ExpMatrix.empty(ny))
    # rows in sel lose their translated part; keep rows gain none
    lhs = C1.take(sel).vstack(K1)
    rhs = C2.take(sel).vstack(K2)
    if lhs.nrows:
        coords.change_x_by_y(right_solve(lhs, rhs))
    C1, C2 = blocks(fi_rows)
    xrows = [list(C1.rows[i]) for i in sel]
    rest = [i for i in range(C1.nrows) if i not in sel]
    delta = []
    base = C1.take(sel)
    for i in rest:
        R = solve_left(base, C1.rows[i]) if sel else ()
        if R is None:
            raise FrameError("selected rows do not span the vanishing part")
        delta.append([C2.rows[i][j] - sum((R[a] * C2.rows[sel[a]][j] for a in range(len(sel))),
                                          Fraction(0)) for j in range(ny)])
    yslots = []
    if delta:
        D = ExpMatrix(delta, ny)
        if rank(D) != D.nrows:
            raise FrameError("translated first integrals are dependent")
        piv = first_pivot_columns(D)
        ys = coords.ys
        coords.change_y_monomial([(ys[p], D.rows[a]) for a, p in enumerate(piv)])
        yslots = [ys[p] for p in piv]
    return xrows, yslots


def recenter(model, point, leave_divisor=False):
    """Move a monomial model to a nearby point.

    point: dict variable index (or name) -> rational value.  Divisor-flagged
    variables must stay at zero unless leave_divisor is set, in which case
    the hyperplanes through other points simply drop out of the divisor."""
    fr = model.frame
    vals = {}
    for key, val in point.items():
        i = fr.index(key) if isinstance(key, str) else key
        if Fraction(val) != 0:
            vals[i] = Fraction(val)
    for i in vals:
        if fr.kinds[i] == "u" and fr.divisor[i] and not leave_divisor:
            raise FrameError("point is off the chart domain: divisor variable %s nonzero" % fr.names[i])
    if not vals:
        return model
    N = model.order
    m = fr.m
    ub = fr.u_block
    coords = MultiplicativeCoords(ub, {i: vals[i] for i in ub if i in vals})
    B = model.B
    fi_orig = [[B.rows[r][c] for c in range(len(ub))] for r in range(B.nrows)]
    xrows, yslots = rectify_first_integrals(coords, fi_orig)
    # substitution images for the old u's
    G = coords.G
    uimg = coords.images([list(G.rows[i]) for i in range(len(ub))], m, N)
    images = [Series.var(m, j, N) for j in range(m)]
    for c, j in enumerate(ub):
        images[j] = uimg[c]
    for j in fr.free:
        if j in vals:
            images[j] = Series.var(m, j, N) + vals[j]
    gens = [g.substitute(images) for g in model.gens]
    kinds = list(fr.kinds)
    div = list(fr.divisor)
    xs = coords.xs
    for j in coords.ys:
        if j in yslots:
            kinds[j] = "u"
        else:
            kinds[j] = "w"
        div[j] = False
    new_frame = fr.replace(kinds=kinds, divisor=div)
    nub = new_frame.u_block
    rows = []
    for xr in xrows:
        full = {s: x for s, x in zip(xs, xr)}
        rows.append([full.get(j, 0) for j in nub])
    for s in yslots:
        rows.append([1 if j == s else 0 for j in nub])
    Bn = ExpMatrix(rows, len(nub)) if rows else ExpMatrix.empty(len(nub))
    return LocalModel(new_frame, Bn, gens, N, model.independent, model.labels)


# ---------------------------------------------------------------------------
# admissibility of coordinate centers


class Verdict:
    def __init__(self, admissible, d0=None, witness=None, detail=None):
        self.admissible = admissible
        self.d0 = d0
        self.witness = witness
        self.detail = detail

    def __repr__(self):
        if self.admissible:
            return "admissible(d0=%d)" % self.d0
        return "not_admissible(%s)" % (self.witness,)


def _det(mat):
    """Determinant of a small square matrix of series (Laplace expansion)."""
    n = len(mat)
    if n == 1:
        return mat[0][0]
    total = None
    for j in range(n):
        if mat[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in mat[1:]]
        term = mat[0][j] * _det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return mat[0][0] - mat[0][0]
    return total


def fitting_admissible(model, center):
    """Verdict for blowing up the coordinate subspace {x_c = 0, c in center}.

    Uses the matrix M[i][l] = X_i(x_l) over distribution generators X_i and
    center coordinates x_l; k-minors of M generate the Fitting ideals modulo the
    center's ideal."""
    fr = model.frame
    center = [fr.index(c) if isinstance(c, str) else c for c in center]
    if not center:
        raise FrameError("empty center")
    N, m = model.order, fr.m
    gens = model.dist.generators()
    M = [[X.on_coordinate(l, m, N) for l in center] for X in gens]
    kmax = min(len(gens), len(center), model.dist.d)

    def in_center(s):
        return all(any(e[c] for c in center) for e in s.terms)

    d0 = 0
    for k in range(1, kmax + 1):
        unit = False
        for rows in combinations(range(len(gens)), k):
            for cols in combinations(range(len(center)), k):
                if _det([[M[r][c] for c in cols] for r in rows]).is_unit():
                    unit = True
                    break
            if unit:
                break
        if not unit:
            break
        d0 = k
    for k in range(d0 + 1, kmax + 1):
        for rows in combinations(range(len(gens)), k):
            for cols in combinations(range(len(center)), k):
                minor = _det([[M[r][c] for c in cols] for r in rows])
                if not in_center(minor):
                    return Verdict(False, witness={"k": k, "rows": list(rows),
                                                   "center_columns": [fr.names[center[c]] for c in cols]})
    return Verdict(True, d0=d0)


def fitting_ideal_generators(model, ideal, k):
    """Generators of the k-th generalized Fitting ideal of an arbitrary ideal.

    Columns are X(f_j) and f_j * X(x_l); rows run over distribution generators."""
    fr = model.frame
    N, m = model.order, fr.m
    gens = model.dist.generators()
    cols = []
    for f in ideal:
        cols.append([X.apply(f) for X in gens])
        for l in range(m):
            col = [X.on_coordinate(l, m, N) * f for X in gens]
            if any(not c.is_zero() for c in col):
                cols.append(col)
    out = []
    for rows in combinations(range(len(gens)), k):
        for cs in combinations(range(len(cols)), k):
            d = _det([[cols[c][r] for c in cs] for r in rows])
            if not d.is_zero():
                out.append(d)
    return out


def fitting_admissible_ideal(model, ideal):
    """Admissibility of a center given by an arbitrary polynomial ideal.

    Ideal membership is decided with a Groebner basis in the polynomial ring,
    which is adequate for the small polynomial examples this is used on."""
    import sympy

    fr = model.frame
    syms = sympy.symbols(" ".join(fr.names))
    if not isinstance(syms, tuple):
        syms = (syms,)

    def to_sympy(s):
        expr = 0
        for e, c in s.terms.items():
            t = sympy.Rational(c.numerator, c.denominator)
            for x, k in zip(syms, e):
                t *= x ** k
            expr += t
        return expr

    I = [to_sympy(f) for f in ideal]
    GI = sympy.groebner(I, *syms, order="grevlex")
    d0 = 0
    report = {}
    for k in range(1, model.dist.d + 1):
        gk = fitting_ideal_generators(model, ideal, k)
        if any(g.is_unit() for g in gk):
            d0 = k
            report[k] = ["1"]
            continue
        polys = [to_sympy(g) for g in gk]
        basis = sympy.groebner(polys, *syms, order="grevlex") if polys else None
        report[k] = [str(b) for b in basis.exprs] if basis is not None else []
        bad = [p for p in polys if not GI.contains(p)]
        if bad:
            return Verdict(False, witness={"k": k, "fitting_basis": report[k],
                                           "outside_center": str(bad[0])}, detail=report)
    return Verdict(True, d0=d0, detail=report)
