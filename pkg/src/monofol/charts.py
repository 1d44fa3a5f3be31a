"""Charts of combinatorial blowups: pulling models back, classifying points on
the exceptional divisor, and the monomial coordinates at such points."""
from fractions import Fraction

from .foliation import (ChartFrame, FrameError, LocalModel, MultiplicativeCoords,
                        coords_row, full_width, rectify_first_integrals, restrict_width)
from .linalg import ExpMatrix, as_matrix, det, first_independent_rows, in_row_span, inverse, rank
from .series import Series


class TransitionError(ValueError):
    pass


class ChartTransition:
    """old x[slots[l]] = prod_c new x[slots[c]] ** matrix[l][c], optionally
    followed by a move to the point gamma (slot -> nonzero value) of the chart."""

    def __init__(self, slots, matrix, gamma=None, v_pos=None):
        self.slots = list(slots)
        self.matrix = as_matrix(matrix, len(self.slots))
        if self.matrix.nrows != len(self.slots):
            raise TransitionError("chart matrix must be square over its slots")
        if det(self.matrix) == 0:
            raise TransitionError("chart matrix is singular")
        for row in self.matrix.rows:
            for x in row:
                if x < 0 or Fraction(x).denominator != 1:
                    raise TransitionError("chart matrix entries must be nonnegative integers")
        self.gamma = {s: Fraction(c) for s, c in (gamma or {}).items() if Fraction(c) != 0}
        for s in self.gamma:
            if s not in self.slots:
                raise TransitionError("translation on a slot outside the chart")
        self.v_pos = v_pos          # position in slots of the distinguished v row

    @classmethod
    def identity(cls, slots, v_pos=None):
        return cls(slots, ExpMatrix.identity(len(slots)), None, v_pos)

    def then(self, other):
        """Transition equal to applying self and then other (monomial parts)."""
        if other.slots != self.slots:
            raise TransitionError("transitions act on different slots")
        return ChartTransition(self.slots, self.matrix @ other.matrix, other.gamma, self.v_pos)

    def exceptional(self):
        """Slots whose new coordinate is not the strict transform of an old one."""
        out = []
        for c, s in enumerate(self.slots):
            col = [self.matrix.rows[l][c] for l in range(len(self.slots))]
            if sorted(col) != [0] * (len(col) - 1) + [1]:
                out.append(s)
        return out

    def source_of(self, c):
        """Position l with column c = e_l, or None for exceptional columns."""
        col = [self.matrix.rows[l][c] for l in range(len(self.slots))]
        if sorted(col) == [0] * (len(col) - 1) + [1]:
            return col.index(1)
        return None

    def monomial_images(self, m, order):
        images = [Series.var(m, j, order) for j in range(m)]
        for l, s in enumerate(self.slots):
            e = [0] * m
            for c, t in enumerate(self.slots):
                e[t] += int(self.matrix.rows[l][c])
            images[s] = Series.monomial(e, 1, order)
        return images

    def full_matrix(self, m):
        rows = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
        for l, s in enumerate(self.slots):
            for c, t in enumerate(self.slots):
                rows[s][t] = self.matrix.rows[l][c]
        return ExpMatrix(rows, m)

    def to_dict(self, names):
        return {
            "slots": [names[s] for s in self.slots],
            "matrix": self.matrix.tolist(),
            "point": {names[s]: str(c) for s, c in sorted(self.gamma.items())},
        }


def exact_order(model, t):
    """Working order after the monomial map: polynomial generators are
    carried without loss, so the order grows to the largest image degree."""
    N = model.order
    if not model.is_exact():
        return N
    deg = [1] * model.m
    for l, s in enumerate(t.slots):
        deg[s] = int(sum(t.matrix.rows[l]))
    for g in model.gens:
        for e in g.terms:
            N = max(N, sum(x * d for x, d in zip(e, deg)))
    return N


def chart_frame(frame, t, declare_v=False):
    """Frame of the chart at its origin: exceptional slots become divisor
    u's, strict transforms keep the kind and flag of their source."""
    kinds = list(frame.kinds)
    div = list(frame.divisor)
    v_slot = frame.v_slot
    for c, s in enumerate(t.slots):
        l = t.source_of(c)
        if l is None:
            kinds[s], div[s] = "u", True
            if s == v_slot:
                v_slot = None
        else:
            src = t.slots[l]
            kinds[s] = frame.kinds[src] if src != frame.v_slot else "w"
            div[s] = frame.divisor[src]
            if src == frame.v_slot and s != frame.v_slot:
                raise TransitionError("chart permutes the v slot")
            if s == frame.v_slot and src != frame.v_slot:
                v_slot = None
    if declare_v and v_slot is not None:
        kinds[v_slot], div[v_slot] = "u", True
        v_slot = None
    # u-kind with a v source never happens: v rows stay w unless exceptional
    return frame.replace(kinds=kinds, divisor=div, v_slot=v_slot)


def pullback_model(model, t, declare_v=False):
    """Transport a model through a chart transition.

    Generators are composed with the monomial map (and the translation when
    the transition carries a point); first integrals transform by the matrix
    product u^B = x^(B A)."""
    fr = model.frame
    for s in t.slots:
        if fr.kinds[s] == "w" and s != fr.v_slot:
            raise TransitionError("chart slots must be u's or v")
    N = exact_order(model, t)
    images = t.monomial_images(fr.m, N)
    gens = [g.copy_with(order=N).substitute(images) for g in model.gens]
    F = full_width(fr, model.B) @ t.full_matrix(fr.m)
    new_frame = chart_frame(fr, t, declare_v)
    B = restrict_width(new_frame, F)
    out = LocalModel(new_frame, B, gens, N, model.independent, model.labels)
    if t.gamma:
        from .foliation import recenter
        out = recenter(out, t.gamma, leave_divisor=True)
    return out


def declare_divisor(model, slot):
    """Add the hyperplane {x_slot = 0} to the divisor (an identity chart)."""
    fr = model.frame
    kinds = list(fr.kinds)
    div = list(fr.divisor)
    kinds[slot], div[slot] = "u", True
    v_slot = None if fr.v_slot == slot else fr.v_slot
    new_frame = fr.replace(kinds=kinds, divisor=div, v_slot=v_slot)
    F = full_width(fr, model.B)
    return LocalModel(new_frame, restrict_width(new_frame, F), model.gens, model.order,
                      model.independent, model.labels)


# ---------------------------------------------------------------------------
# points off the chart origin


def _split(t):
    vanish = [c for c, s in enumerate(t.slots) if s not in t.gamma]
    moved = [c for c, s in enumerate(t.slots) if s in t.gamma]
    if t.v_pos is None:
        raise TransitionError("transition does not mark the v row")
    urows = [l for l in range(len(t.slots)) if l != t.v_pos]
    return vanish, moved, urows


def vanishing_block(t):
    vanish, _, urows = _split(t)
    return t.matrix.take(urows, vanish)


def classify_point(t):
    """'rank-full' when the block of u-rows over the vanishing columns has
    full column rank, 'rank-deficient' otherwise."""
    vanish, _, urows = _split(t)
    if not vanish:
        raise TransitionError("point is off the exceptional divisor (no vanishing coordinate)")
    A1 = t.matrix.take(urows, vanish)
    if all(x == 0 for r in A1.rows for x in r):
        raise TransitionError("point is off the exceptional divisor (vanishing block is zero)")
    return "rank-full" if rank(A1) == len(vanish) else "rank-deficient"


class MonomialClassification:
    """Which alternative holds for the total transform x^xi~ * U of a
    non-integrable monomial u^xi at the normalized point (computed per query)."""

    def __init__(self, source, t, coords, xrows, frame):
        self.source = source
        self.t = t
        self.coords = coords
        self.xrows = ExpMatrix(xrows, len(coords.xs)) if xrows else ExpMatrix.empty(len(coords.xs))
        self.frame = frame

    def exponent_row(self, xi):
        """Exponent row of u^xi over the slots, in the final coordinates."""
        _, _, urows = _split(self.t)
        row = [Fraction(0)] * len(self.t.slots)
        for x, l in zip(xi, urows):
            if x:
                for c in range(len(row)):
                    row[c] += x * self.t.matrix.rows[l][c]
        return coords_row(self.coords, row)

    def classify(self, xi):
        if self.source.dist.annihilates(xi):
            raise ValueError("u^xi is a first integral of the source distribution")
        row = self.exponent_row(xi)
        xpart, ypart = self.coords.split(row)
        if not in_row_span(xpart, self.xrows):
            return ("not-first-integral", None)
        for slot, y in zip(self.coords.ys, ypart):
            if y != 0 and self.frame.kinds[slot] == "w":
                return ("unit-derivative", slot)
        raise AssertionError("neither alternative holds for %s" % (list(xi),))


def normalize_point(source, t, declare_v=False):
    """Monomial coordinates at a point of a chart over the origin.

    source: the model before the blowups (its u-block plus v are the slots);
    t: composite chart matrix with the point.  Returns the model at the point,
    the monomial classification, the case name and the name of the slot
    carrying z (None in the rank-deficient case).

    rank-full: v = x^a1 (z - c) with d/dz in the distribution.
    rank-deficient: v = x^a1 exactly."""
    fr = source.frame
    N, m = source.order, fr.m
    case = classify_point(t)
    vanish, moved, urows = _split(t)
    slots = t.slots
    A = t.matrix
    coords = MultiplicativeCoords(slots, t.gamma)
    vrow = list(A.rows[t.v_pos])
    keep = []
    z = None
    if case == "rank-full":
        A1 = A.take(urows, vanish)
        sel = first_independent_rows(A1, target=len(vanish))
        lead = [urows[i] for i in sel]
        # x absorbs the translated part of the leading u's
        M = inverse(A.take(lead, vanish)) @ A.take(lead, moved)
        coords.change_x_by_y(M)
        rest = [l for l in urows if l not in lead] + [t.v_pos]
        ys = coords.ys
        targets = []
        for slot, l in zip(ys, rest):
            cur = coords_row(coords, list(A.rows[l]))
            targets.append((slot, coords.split(cur)[1]))
        coords.change_y_monomial(targets)
        z = ys[-1]
    else:
        cur = coords_row(coords, vrow)
        xp, yp = coords.split(cur)
        if all(x == 0 for x in xp):
            raise TransitionError("v does not vanish at the point")
        if any(y != 0 for y in yp):
            a = next(i for i, x in enumerate(xp) if x != 0)
            rows = [[Fraction(0)] * len(yp) for _ in xp]
            rows[a] = [Fraction(y) / xp[a] for y in yp]
            coords.change_x_by_y(ExpMatrix(rows, len(yp)))
        keep = [vrow]
    # first integrals u^B = mu^(B A) over the slots
    B = source.B
    fi_rows = []
    for b in B.rows:
        row = [Fraction(0)] * len(slots)
        for x, l in zip(b, urows):
            if x:
                for c in range(len(slots)):
                    row[c] += x * A.rows[l][c]
        fi_rows.append(row)
    xrows, yslots = rectify_first_integrals(coords, fi_rows, keep)
    if z is not None:
        cur = coords_row(coords, vrow)
        yp = coords.split(cur)[1]
        if yp[coords.ys.index(z)] != 1:
            raise FrameError("z lost its unit exponent in v")
        if any(y != 0 for s, y in zip(coords.ys, yp) if s != z):
            coords.change_y_monomial([(z, yp)])
    # substitution images for the source variables
    G_rows = [coords_row(coords, list(A.rows[l])) for l in range(len(slots))]
    ims = coords.images(G_rows, m, N)
    images = [Series.var(m, j, N) for j in range(m)]
    for l, s in enumerate(slots):
        images[s] = ims[l]
    gens = [g.substitute(images) for g in source.gens]
    base = chart_frame(fr, ChartTransition(slots, A, None, t.v_pos), declare_v)
    kinds = list(base.kinds)
    div = list(base.divisor)
    for c in vanish:
        kinds[slots[c]] = "u"
    for s in coords.ys:
        kinds[s] = "u" if s in yslots else "w"
        div[s] = False
    frame = ChartFrame(fr.names, kinds, div, None)
    nub = frame.u_block
    xs = coords.xs
    rows = []
    for xr in xrows:
        full = dict(zip(xs, xr))
        rows.append([full.get(j, 0) for j in nub])
    for s in yslots:
        rows.append([1 if j == s else 0 for j in nub])
    Bn = ExpMatrix(rows, len(nub)) if rows else ExpMatrix.empty(len(nub))
    model = LocalModel(frame, Bn, gens, N, source.independent, source.labels)
    cls = MonomialClassification(source, t, coords, xrows, model.frame)
    return model, cls, case, z, images


def normalize_case1(model, t, declare_v=False):
    if classify_point(t) != "rank-full":
        raise TransitionError("vanishing block is rank deficient")
    out, cls, _, z, _ = normalize_point(model, t, declare_v)
    return out, cls


def normalize_case2(model, t, declare_v=False):
    if classify_point(t) != "rank-deficient":
        raise TransitionError("vanishing block has full column rank")
    out, cls, _, _, _ = normalize_point(model, t, declare_v)
    return out, cls
