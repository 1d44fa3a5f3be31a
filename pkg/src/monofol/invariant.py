"""Splitting generators into first-integral part plus residual, and the
tangency order of the residual (two independent computations)."""
from fractions import Fraction

from .foliation import LocalModel
from .linalg import ExpMatrix, in_row_span
from .series import Series, glex_key


class TrivialModel(Exception):
    """Every generator is already a first integral."""


class PreconditionError(ValueError):
    pass


INF = None   # tangency order "infinite" is represented by None


class Decomposition:
    def __init__(self, g, delta, T, residual):
        self.g = g
        self.delta = delta          # over the u-block
        self.T = T
        self.residual = residual

    def delta_full(self, frame):
        e = [0] * frame.m
        for j, d in zip(frame.u_block, self.delta):
            e[j] = d
        return tuple(e)


def decompose(model):
    fr = model.frame
    dist = model.dist
    ub = fr.u_block
    g, res = [], []
    for f in model.gens:
        gi, ri = {}, {}
        for e, c in f.terms.items():
            (gi if dist.is_first_integral(e) else ri)[e] = c
        g.append(Series(f.nvars, gi, f.order, f.exact))
        res.append(Series(f.nvars, ri, f.order, f.exact))
    if all(r.is_zero() for r in res):
        raise TrivialModel("all generators are first integrals")
    delta = tuple(min(e[j] for r in res for e in r.terms) for j in ub)
    full = [0] * fr.m
    for j, d in zip(ub, delta):
        full[j] = d
    T = [r.divide_monomial(full) for r in res]
    return Decomposition(g, delta, T, res)


class TangencyOrder:
    def __init__(self, value, witness=None, bound=None):
        self.value = value          # int, or None for infinity
        self.witness = witness      # (i, exponent over the whole frame)
        self.bound = bound          # truncation order the scan ran to

    @property
    def finite(self):
        return self.value is not None

    def __repr__(self):
        if self.value is None:
            return "TangencyOrder(inf)"
        return "TangencyOrder(%d, witness=%s)" % (self.value, self.witness)


def tangency_order_scan(model, dec=None):
    """Smallest |lambda| with d^lambda_w T_i a unit, scanning the pure free
    monomials of each T_i (ties: smallest i, then graded-lex smallest lambda)."""
    if dec is None:
        dec = decompose(model)
    ub = model.frame.u_block
    best = None
    for i, T in enumerate(dec.T):
        for e in T.terms:
            if any(e[j] for j in ub):
                continue
            key = (sum(e), i, glex_key(e))
            if best is None or key < best[0]:
                best = (key, i, e)
    if best is None:
        return TangencyOrder(INF, bound=model.order)
    return TangencyOrder(best[0][0], (best[1], best[2]), bound=model.order)


class _Span:
    """Row-echelon basis of a Q-span of sparse vectors (dicts monomial -> coeff)."""

    def __init__(self):
        self.pivots = {}   # monomial -> vector with coefficient 1 there

    def reduce(self, vec):
        vec = dict(vec)
        changed = True
        while changed and vec:
            changed = False
            for mono in sorted(vec, key=glex_key):
                piv = self.pivots.get(mono)
                if piv is None:
                    continue
                f = vec[mono]
                for e, c in piv.items():
                    nv = vec.get(e, 0) - f * c
                    if nv:
                        vec[e] = nv
                    else:
                        vec.pop(e, None)
                changed = True
                break
        return vec

    def add(self, vec):
        vec = self.reduce(vec)
        if not vec:
            return False
        lead = min(vec, key=glex_key)
        inv = 1 / vec[lead]
        vec = {e: c * inv for e, c in vec.items()}
        # keep the basis reduced at the new pivot
        for mono, piv in list(self.pivots.items()):
            if lead in piv:
                f = piv[lead]
                for e, c in vec.items():
                    nv = piv.get(e, 0) - f * c
                    if nv:
                        piv[e] = nv
                    else:
                        piv.pop(e, None)
        self.pivots[lead] = vec
        return True

    def has_nonzero_at(self, mono):
        return any(mono in v for v in self.pivots.values())

    def vectors(self):
        return list(self.pivots.values())


def tangency_order_chain(model, max_steps=None):
    """Tangency order from the ascending chain of ideals

        I_0 = (non-integrable parts of the f_i),  I_{k+1} = I_k + theta[I_k].

    Every I_k lies in (u^delta); the answer is the first k with I_k = (u^delta),
    or None (infinity) once the chain stabilizes without reaching it.  I_k is
    generated by a finite-dimensional span of polynomials, so membership of
    u^delta reduces to a nonzero coefficient at that monomial."""
    for f in model.gens:
        if not f.exact:
            raise PreconditionError("the chain method needs polynomial generators")
    fr = model.frame
    ub = fr.u_block
    B = model.B
    free = set(fr.free)

    def integrable(e):
        if any(e[i] for i in free):
            return False
        return in_row_span([e[j] for j in ub], B)

    residuals = []
    for f in model.gens:
        r = {e: c for e, c in f.terms.items() if not integrable(e)}
        if r:
            residuals.append(r)
    if not residuals:
        raise TrivialModel("all generators are first integrals")
    delta = [min(e[j] for r in residuals for e in r) for j in range(fr.m)]
    for i in free:
        delta[i] = 0
    target = tuple(delta)
    fields = model.dist.generators()
    span = _Span()
    frontier = []
    for r in residuals:
        if span.add(r):
            frontier.append(r)
    k = 0
    limit = max_steps if max_steps is not None else 4 * model.order + 4
    while True:
        if span.has_nonzero_at(target):
            return k
        if not frontier or k >= limit:
            return INF
        new_front = []
        for h in frontier:
            s = Series(fr.m, h, model.order)
            for X in fields:
                d = X.apply(s).terms
                if d and span.add(d):
                    new_front.append(d)
        frontier = new_front
        k += 1


# ---------------------------------------------------------------------------


class ZeroOneResult:
    def __init__(self, i0, beta, eps, model, changed, images, w_slot=None, coeff=1):
        self.i0 = i0
        self.beta = beta            # exponent over the u-block of the input frame
        self.eps = eps
        self.model = model          # coordinates changed and lattice extended
        self.changed = changed      # coordinates changed only
        self.images = images        # old variables in terms of new ones
        self.w_slot = w_slot        # rectified variable when eps = 1
        self.coeff = coeff          # constant in front of u^beta when eps = 0


def _lift(s, order):
    # iterate at a raised order; the top degrees get fixed by the next pass
    return Series(s.nvars, s.terms, order, s.exact)


def _solve_units(model, U, kappa):
    """Images u = u~ * U(u, w)^(-kappa) obtained by fixed-point iteration.

    Each pass fixes at least one more degree, so the working order is raised
    one step at a time instead of iterating at full precision."""
    fr = model.frame
    m, N = fr.m, model.order
    ub = fr.u_block
    images = [Series.var(m, j, 1) for j in range(m)]
    work = 1
    for _ in range(3 * N + 4):
        ident = [Series.var(m, j, work) for j in range(m)]
        Ut = U.truncate(work).substitute([_lift(im, work) for im in images])
        new = list(ident)
        for j, kap in zip(ub, kappa):
            if kap:
                new[j] = ident[j] * Ut.power(-kap)
        if work == N and all(a == b for a, b in zip(new, images)):
            break
        images = new
        work = min(N, work + 1)
    return new


def _solve_linear(model, T, j, c):
    """Images making T the new j-th coordinate: x_j = (x~_j - R(.., x_j, ..)) / c."""
    fr = model.frame
    m, N = fr.m, model.order
    R = T - Series.var(m, j, N).scale(c)
    W = Series.var(m, j, 1).scale(1 / Fraction(c))
    work = 1
    for _ in range(3 * N + 4):
        ident = [Series.var(m, i, work) for i in range(m)]
        im = list(ident)
        im[j] = _lift(W, work)
        Wn = (ident[j] - R.truncate(work).substitute(im)).scale(1 / Fraction(c))
        settled = work == N and Wn == W
        W = Wn
        if settled:
            break
        work = min(N, work + 1)
    else:
        W = W.copy_with(exact=False)
    images = [Series.var(m, i, N) for i in range(m)]
    images[j] = W
    return images


def _closed_witness(model, dec, i0, changed, tail):
    """Replace the witness generator by its closed form g + u^delta * tail.

    The change of coordinates fixes every first-integral monomial and turns
    the residual into u^delta * tail exactly, so a polynomial witness stays a
    polynomial instead of inheriting the truncation of the change."""
    f = model.gens[i0]
    closed = dec.g[i0] + tail.shift_monomial(dec.delta_full(model.frame))
    closed = Series(f.nvars, closed.terms, f.order, f.exact and closed.exact)
    if closed.terms != changed.gens[i0].terms:
        raise AssertionError("witness generator is not in closed form after the change")
    gens = list(changed.gens)
    gens[i0] = closed
    return changed.replace(gens=gens)


def zero_one_normal_form(model, dec=None, tang=None):
    if dec is None:
        dec = decompose(model)
    if tang is None:
        tang = tangency_order_scan(model, dec)
    if tang.value not in (0, 1):
        raise PreconditionError("zero-one normal form needs tangency order 0 or 1")
    fr = model.frame
    ub = fr.u_block
    i0, lam = tang.witness
    T = dec.T[i0]
    delta = dec.delta
    if tang.value == 0:
        c0 = T.constant()
        U = T.scale(1 / c0)
        if U.is_constant():
            images = [Series.var(fr.m, j, model.order) for j in range(fr.m)]
            changed = model
        else:
            kernel = model.dist.kernel()
            alpha = None
            for row in kernel.rows:
                s = sum(Fraction(a) * d for a, d in zip(row, delta))
                if s != 0:
                    alpha = [Fraction(a) / s for a in row]
                    break
            if alpha is None:
                raise PreconditionError("residual monomial lies in the first-integral lattice")
            images = _solve_units(model, U, alpha)
            changed = _closed_witness(model, dec, i0, model.transported(images),
                                      Series.const(fr.m, c0, model.order))
        B = model.B.vstack([list(delta)])
        refined = changed.replace(B=B)
        return ZeroOneResult(i0, delta, 0, refined, changed, images, coeff=c0)
    j = next(i for i, x in enumerate(lam) if x)
    c = T.coefficient(lam)
    images = _solve_linear(model, T, j, c)
    changed = _closed_witness(model, dec, i0, model.transported(images),
                              Series.var(fr.m, j, model.order))
    kinds = list(fr.kinds)
    kinds[j] = "u"
    new_frame = fr.replace(kinds=kinds, v_slot=None if fr.v_slot == j else fr.v_slot)
    nub = new_frame.u_block
    old_pos = {jj: c_ for c_, jj in enumerate(ub)}
    rows = []
    for r in model.B.rows:
        rows.append([r[old_pos[jj]] if jj in old_pos else 0 for jj in nub])
    rows.append([delta[old_pos[jj]] if jj in old_pos else 1 for jj in nub])
    B = ExpMatrix(rows, len(nub))
    refined = changed.replace(frame=new_frame, B=B)
    return ZeroOneResult(i0, delta, 1, refined, changed, images, w_slot=j)
