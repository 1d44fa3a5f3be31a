"""The descent loop: tangency order down to zero or one, then one more
monomial first integral per round until every generator is integrated."""
import random
from fractions import Fraction
from itertools import combinations

from .charts import ChartTransition, declare_divisor, normalize_point, pullback_model
from .foliation import FrameError, LocalModel, fitting_admissible
from .invariant import (INF, PreconditionError, TrivialModel, decompose,
                        tangency_order_chain, tangency_order_scan, zero_one_normal_form)
from .linalg import ExpMatrix, rank, vec_mat
from .series import RationalPowerError, Series, center_shift, format_series, glex_key
from .toric import (MonIdeal, OracleFailure, chart_matrix, monomial_unit_part,
                    principalize_monomial, principalize_oracle, PLeaf)

POINT_POOL = (Fraction(1), Fraction(-1), Fraction(4), Fraction(9), Fraction(64),
              Fraction(-8), Fraction(1, 4))


class InternalError(AssertionError):
    """A claim the algorithm guarantees turned out false."""


class Settings:
    def __init__(self, samples=5, seed=0, max_depth=60):
        self.samples = samples
        self.seed = seed
        self.max_depth = max_depth
        self.drops = []             # (path, nu_in, nu_out)
        self.sample_log = []        # (path, ok)


class Transform:
    """Edge data: images[k] is the old variable k as a series in the new
    frame; perm[k] is the old index of new generator k."""

    def __init__(self, images, chart=None, perm=None):
        self.images = images
        self.chart = chart
        self.perm = perm

    def to_dict(self, names):
        out = {"images": {names[k]: format_series(s, names) for k, s in enumerate(self.images)
                          if not _is_var(s, k)}}
        if self.chart is not None:
            out["chart"] = self.chart.to_dict(names)
        if self.perm is not None:
            out["generator_order"] = list(self.perm)
        return out


def _is_var(s, k):
    e = [0] * s.nvars
    e[k] = 1
    return s.terms == {tuple(e): 1}


class Node:
    def __init__(self, model, label, transform=None):
        self.model = model
        self.label = label
        self.transform = transform
        self.children = []
        self.status = None
        self.detail = None
        self._nu = None
        self.nu_known = False
        self.info = {}
        self.path = "0"

    @property
    def nu(self):
        return self._nu

    @nu.setter
    def nu(self, value):
        self._nu = value
        self.nu_known = True

    def add(self, child):
        child.path = "%s.%d" % (self.path, len(self.children))
        self.children.append(child)
        return child

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def leaves(self):
        return [n for n in self.walk() if not n.children]


def nu_text(nu):
    if nu == "trivial":
        return "trivial"
    return "inf" if nu is None else nu


def measure(model):
    """(decomposition, tangency order) or (None, None) for a trivial model.

    An infinite scan on exact input is confirmed by the chain method."""
    try:
        dec = decompose(model)
    except TrivialModel:
        return None, None
    tang = tangency_order_scan(model, dec)
    if tang.value is INF and model.is_exact():
        if tangency_order_chain(model) is not INF:
            raise InternalError("scan and chain disagree on an infinite tangency order")
    return dec, tang


def _nu_value(model):
    dec, tang = measure(model)
    return "trivial" if dec is None else tang.value


def _less(nu, bound):
    if nu == "trivial":
        return True
    return nu is not None and nu < bound


# ---------------------------------------------------------------------------
# infinite tangency order


def coefficient_ideal(model, dec):
    """Coefficients of the residual over monomials in the free variables,
    split further by the eigenvalue vector of their u-monomials under the
    diagonal fields of the distribution."""
    fr = model.frame
    free = fr.free
    ub = fr.u_block
    kernel = model.dist.kernel()
    groups = {}
    for i, r in enumerate(dec.residual):
        for e, c in r.items():
            lam = tuple(e[j] for j in free)
            a = [e[j] for j in ub]
            K = tuple(sum(Fraction(k) * x for k, x in zip(row, a)) for row in kernel.rows)
            ue = tuple(0 if j in free else e[j] for j in range(fr.m))
            key = (i, lam, K)
            groups.setdefault(key, {})[ue] = c
    out = []
    for key in sorted(groups, key=lambda k: (k[0], glex_key(k[1]), k[2])):
        out.append(Series(fr.m, groups[key], model.order, dec.residual[key[0]].exact))
    return out


def resolve_infinite(node, dec, settings):
    """Blow up until the coefficient ideal of the residual is principal.
    Returns the new leaves (to be expanded again)."""
    model = node.model
    ideal = coefficient_ideal(model, dec)
    res = principalize_oracle(ideal, model, mode="invariant")
    if isinstance(res, OracleFailure):
        node.status = "oracle_failure"
        node.detail = res.detail
        return []
    root, _ = res
    variables = list(model.frame.u_block)
    out = []
    _grow_charts(node, root, variables, None, "infinite-order", out, settings,
                 done=lambda md: _nu_value(md) is not INF)
    return out


def _grow_charts(node, pnode, variables, v_pos, tag, out, settings, done=None):
    """Follow a principalization tree; done(model) cuts a branch short once
    its chart already has what the caller needs."""
    if isinstance(pnode, PLeaf) or (done is not None and done(node.model)):
        out.append((node, pnode))
        return
    model = node.model
    a, b = pnode.center
    center = [variables[a], variables[b]]
    verdict = fitting_admissible(model, center)
    if not verdict.admissible:
        raise InternalError("blowup center %s is not admissible" % center)
    names = model.frame.names
    for keep, sub in pnode.children:
        other = b if keep == a else a
        t = ChartTransition(variables, chart_matrix(len(variables), keep, other), v_pos=v_pos)
        child_model = pullback_model(model, t)
        label = "%s[blowup(%s,%s),chart %s]" % (tag, names[center[0]], names[center[1]],
                                                names[variables[keep]])
        child = node.add(Node(child_model, label,
                              Transform(t.monomial_images(model.m, model.order), chart=t)))
        child.info["center_fitting"] = {"admissible": True, "d0": verdict.d0}
        _grow_charts(child, sub, variables, v_pos, tag, out, settings, done)


# ---------------------------------------------------------------------------
# basic normal form


def _compose(first, second):
    """Images of first followed by second (old = first(second(new)))."""
    return [s.substitute(second) for s in first]


def basic_normal_form(model, tang):
    """Pick v and shift it so the witness generator reads v^nu * unit plus
    terms of v-degree at most nu - 2.  Returns (model, transform, v)."""
    fr = model.frame
    m, N = fr.m, model.order
    nu = tang.value
    if nu is INF or nu <= 1:
        raise PreconditionError("basic normal form needs 1 < nu < infinity")
    i, lam = tang.witness
    dec = decompose(model)
    T = dec.T[i]
    v = next(j for j, x in enumerate(lam) if x)
    ident = [Series.var(m, j, N) for j in range(m)]
    images = list(ident)
    if lam[v] != nu:
        # generic linear change among the free variables in the witness part
        others = [j for j in fr.free if j != v]
        top = {e: c for e, c in T.terms.items()
               if sum(e) == nu and all(e[j] == 0 for j in fr.u_block)}
        found = None
        for total in range(0, 4 * nu + 4):
            for combo in _compositions(total, len(others)):
                val = Fraction(0)
                for e, c in top.items():
                    p = c
                    for j, k in zip(others, combo):
                        p *= Fraction(k) ** e[j]
                    val += p
                if val != 0:
                    found = combo
                    break
            if found is not None:
                break
        if found is None:
            raise InternalError("no linear change isolates a pure power of v")
        for j, c in zip(others, found):
            if c:
                images[j] = ident[j] + ident[v].scale(c)
        T = T.substitute(images)
    shift, _ = center_shift(T, v, nu)
    total = _compose(images, shift)
    perm = [i] + [k for k in range(model.n) if k != i]
    moved = model.transported(total)
    gens = [moved.gens[k] for k in perm]
    labels = [moved.labels[k] for k in perm]
    new = LocalModel(fr.with_v(v), moved.B, gens, N, model.independent, labels)
    return new, Transform(total, perm=perm), v


def _compositions(total, parts):
    """Tuples of nonnegative ints with the given sum, in lexicographic order."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# prepared normal form


class PreparedForm:
    def __init__(self, nu, v, coeffs, r, beta, eps, i0, w_slot):
        self.nu = nu
        self.v = v
        self.coeffs = coeffs        # coeffs[i][j]: coefficient of v^j in T_i
        self.r = r                  # (i, j) -> exponent over the u-block, 0 < j < nu
        self.beta = beta            # over the u-block, None when all b_{i,0} vanish
        self.eps = eps
        self.i0 = i0
        self.w_slot = w_slot

    def to_dict(self, frame):
        names = frame.names
        ub = frame.u_block
        return {
            "nu": self.nu,
            "v": names[self.v],
            "intermediate": [{"generator": i, "power": j, "exponent": list(e)}
                             for (i, j), e in sorted(self.r.items())],
            "beta": None if self.beta is None else list(self.beta),
            "eps": self.eps,
            "base_generator": self.i0,
            "w": None if self.w_slot is None else names[self.w_slot],
            "u_block": [names[j] for j in ub],
        }


def _v_table(model, dec, v, nu):
    table = []
    for T in dec.T:
        cs = T.v_coefficients(v)
        cs = cs + [T.filter(lambda e: False)] * (nu - len(cs))
        table.append(cs)
    return table


def intermediate_exponents(model, dec, v, nu):
    """Exponents r with a_{i,j} = u^r * unit, 0 < j < nu; OracleFailure when
    some coefficient has another shape."""
    ub = model.frame.u_block
    r = {}
    table = _v_table(model, dec, v, nu)
    for i, cs in enumerate(table):
        for j in range(1, nu):
            a = cs[j]
            if a.is_zero():
                continue
            e = monomial_unit_part(a, set(ub))
            if e is None:
                return OracleFailure("oracle required: coefficient of v^%d in generator %d is "
                                     "not a monomial times a unit" % (j, i))
            r[(i, j)] = tuple(e[k] for k in ub)
    return r


def recognize_prepared(model):
    """Read off the prepared form of a model with v_slot set, or None."""
    fr = model.frame
    v = fr.v_slot
    dec, tang = measure(model)
    if dec is None or tang.value is INF:
        return None
    nu = tang.value
    r = intermediate_exponents(model, dec, v, nu)
    if isinstance(r, OracleFailure):
        return None
    ub = fr.u_block
    table = _v_table(model, dec, v, nu)
    b0 = [cs[0] for cs in table]
    nonzero = [b for b in b0 if not b.is_zero()]
    if not nonzero:
        return PreparedForm(nu, v, table, r, None, None, None, None)
    beta = tuple(min(e[j] for b in nonzero for e in b.terms) for j in ub)
    full = [0] * fr.m
    for j, x in zip(ub, beta):
        full[j] = x
    quot = [None if b.is_zero() else b.divide_monomial(full) for b in b0]
    for i, q in enumerate(quot):
        if q is not None and q.is_unit():
            return PreparedForm(nu, v, table, r, beta, 0, i, None)
    for i, q in enumerate(quot):
        if q is None:
            continue
        for w in fr.w_block:
            e = [0] * fr.m
            e[w] = 1
            if q.coefficient(e) != 0:
                return PreparedForm(nu, v, table, r, beta, 1, i, w)
    return None


def _lift_node(full_parent, base_node, v, name_v, settings):
    """Copy a base tree below full_parent, re-inserting v in every frame."""
    for bchild in base_node.children:
        bt = bchild.transform
        images = [s.insert_var(v) for s in bt.images]
        images.insert(v, Series.var(full_parent.model.m, v, full_parent.model.order))
        frame = bchild.model.frame.insert_var(v, name_v, "w", False, as_v=True)
        fm = full_parent.model.transported(images, frame=frame, B=bchild.model.B)
        chart = None
        if bt.chart is not None:
            slots = [s + (1 if s >= v else 0) for s in bt.chart.slots]
            chart = ChartTransition(slots, bt.chart.matrix)
        child = full_parent.add(Node(fm, "base:" + bchild.label, Transform(images, chart=chart)))
        for key, val in bchild.info.items():
            # drops and samples of the base refer to the base model
            child.info[key if key.startswith("base_") or key == "center_fitting"
                       else "base_" + key] = val
        if bchild.status is not None:
            child.status = bchild.status
            child.detail = bchild.detail
        if bchild.nu_known:
            child.info["base_nu"] = nu_text(bchild.nu)
        _lift_node(child, bchild, v, name_v, settings)


def prepare(node, settings, depth=0):
    """Bring a basic normal form into prepared form.  Returns a list of
    (node, PreparedForm); other leaves get a terminal status."""
    model = node.model
    fr = model.frame
    v = fr.v_slot
    dec, tang = measure(model)
    nu = tang.value
    r = intermediate_exponents(model, dec, v, nu)
    if isinstance(r, OracleFailure):
        node.status, node.detail = "oracle_failure", r.detail
        return []
    table = _v_table(model, dec, v, nu)
    if all(cs[0].is_zero() for cs in table):
        pf = recognize_prepared(model)
        node.info["prepared"] = pf.to_dict(fr)
        return [(node, pf)]
    # restrict to {v = 0} and run the descent there
    base_frame = fr.remove_var(v)
    base_gens = [f.restrict(v).remove_var(v) for f in model.gens]
    base = LocalModel(base_frame, model.B, base_gens, model.order, model.independent, model.labels)
    broot = Node(base, "base")
    broot.path = node.path + "/base"
    expand_step(broot, settings, depth + 1)
    for leaf in broot.leaves():
        if leaf.status != "ready":
            continue
        z = zero_one_normal_form(leaf.model)
        if not all(_is_var(s, k) for k, s in enumerate(z.images)):
            child = leaf.add(Node(z.changed, "prepare[base-zero-one,eps=%d]" % z.eps,
                                  Transform(z.images)))
            leaf.status = None
            child.status = "ready"
    _lift_node(node, broot, v, fr.names[v], settings)
    if not broot.children and broot.status != "ready":
        node.status, node.detail = broot.status, broot.detail
    out = []
    for leaf in node.leaves():
        if leaf.status not in (None, "ready"):
            continue
        leaf.status = None
        nu_leaf = _nu_value(leaf.model)
        if nu_leaf == "trivial" or nu_leaf is None or nu_leaf > nu:
            raise InternalError("tangency order went up during preparation")
        leaf.nu = nu_leaf
        if nu_leaf < nu:
            out.append((leaf, None))
            continue
        pf = recognize_prepared(leaf.model)
        if pf is None:
            raise InternalError("preparation did not reach the prepared form")
        leaf.info["prepared"] = pf.to_dict(leaf.model.frame)
        out.append((leaf, pf))
    return out


# ---------------------------------------------------------------------------
# dropping the tangency order


DROP_CASES = ("v-power", "intermediate", "base-monomial", "base-linear")


def drop_ideal(model, pf):
    """Tagged exponents over u-block + [v] of the ideal whose principalization
    lowers the tangency order."""
    k = len(model.frame.u_block)
    gens = [((0,) * k + (pf.nu,), "v-power")]
    for (i, j), e in sorted(pf.r.items()):
        gens.append((tuple(e) + (j,), "intermediate"))
    if pf.beta is not None:
        gens.append((tuple(pf.beta) + (0,), "base-linear" if pf.eps == 1 else "base-monomial"))
    return gens


def drop_invariant(node, pf, settings):
    """Blow up the drop ideal; returns the chart leaves (nu strictly lower)."""
    model = node.model
    fr = model.frame
    v = fr.v_slot
    nu_in = pf.nu
    variables = list(fr.u_block) + [v]
    tagged = drop_ideal(model, pf)
    ideal = MonIdeal([g for g, _ in tagged], variables)
    root, _ = principalize_monomial(ideal)
    pairs = []
    _grow_charts(node, root, variables, len(variables) - 1, "drop", pairs, settings)
    out = []
    for leaf, pleaf in pairs:
        A = pleaf.matrix
        gen = tuple(pleaf.generator)
        case = None
        best = None
        for g, tag in tagged:
            img = tuple(int(x) for x in vec_mat(list(g), A))
            if img == gen:
                # several tags can share an exponent; prefer the higher v power
                key = (g[-1], tag)
                if best is None or key > best:
                    best, case = key, tag
        if case is None:
            raise InternalError("no generator of the drop ideal pulls back to the principal one")
        declared = False
        lm = leaf.model
        if gen[-1] > 0 and lm.frame.v_slot == v:
            lm = declare_divisor(lm, v)
            declared = True
            m = lm.m
            leaf = leaf.add(Node(lm, "drop[declare-divisor,%s]" % fr.names[v],
                                 Transform([Series.var(m, j, lm.order) for j in range(m)])))
        nu_out = _nu_value(lm)
        leaf.nu = nu_out
        leaf.info["drop"] = {"case": "drop[rank-deficient,%s]" % case, "nu_in": nu_in,
                             "nu_out": nu_text(nu_out), "declared_v": declared,
                             "chart_matrix": A.tolist()}
        settings.drops.append((leaf.path, nu_in, nu_text(nu_out)))
        if not _less(nu_out, nu_in):
            if nu_out is None and not lm.is_exact():
                leaf.status = "truncation_ambiguous"
                leaf.detail = "tangency order not visible up to the truncation order"
                continue
            raise InternalError("tangency order did not drop (%s -> %s)" % (nu_in, nu_text(nu_out)))
        leaf.info["samples"] = sample_points(model, A, variables, declared, nu_in, leaf.path,
                                             settings)
        out.append(leaf)
    return out


def exceptional_subsets(A):
    """Vanishing sets X (nonempty, proper) whose points lie over the origin."""
    r = A.nrows
    out = []
    for size in range(1, r):
        for X in combinations(range(r), size):
            if all(any(A.rows[l][c] > 0 for c in X) for l in range(r)):
                out.append(X)
    return out


def sample_points(source, A, variables, declared, nu_in, path, settings):
    names = source.frame.names
    subsets = exceptional_subsets(A)
    if settings.samples <= 0:
        return {"points": [], "reason": "sampling disabled"}
    if not subsets:
        return {"points": [], "reason": "chart has no exceptional points off its origin"}
    rng = random.Random("%s:%s" % (settings.seed, path))
    v_pos = len(variables) - 1
    points = []
    for _ in range(settings.samples):
        rec = None
        for _attempt in range(25):
            X = rng.choice(subsets)
            gamma = {variables[c]: rng.choice(POINT_POOL) for c in range(len(variables))
                     if c not in X}
            t = ChartTransition(variables, A, gamma, v_pos)
            try:
                out, cls, case, z, _ = normalize_point(source, t, declared and v_pos in X)
            except RationalPowerError:
                continue
            nu_q = _nu_value(out)
            ok = _less(nu_q, nu_in)
            rec = {"vanishing": [names[variables[c]] for c in X],
                   "point": {names[s]: str(c) for s, c in sorted(gamma.items())},
                   "case": case, "nu": nu_text(nu_q), "ok": ok}
            break
        if rec is None:
            rec = {"ok": False, "reason": "no admissible point values found"}
        settings.sample_log.append((path, rec["ok"]))
        points.append(rec)
    return {"points": points}


# ---------------------------------------------------------------------------
# the step loop


def expand_step(node, settings, depth=0, after_resolve=False):
    """Grow the tree below node until every leaf has tangency order at most
    one (status 'ready') or a terminal status."""
    if depth > settings.max_depth:
        raise InternalError("descent exceeded the depth limit")
    model = node.model
    if any(g.is_zero() and not g.exact for g in model.gens):
        node.status = "truncation_ambiguous"
        node.detail = "a generator vanishes up to the truncation order"
        return
    dec, tang = measure(model)
    if dec is None:
        node.nu = "trivial"
        node.status = "trivial"
        return
    node.nu = tang.value
    if tang.value is not INF and tang.value <= 1:
        node.status = "ready"
        return
    if tang.value is INF:
        if after_resolve and not model.is_exact():
            node.status = "truncation_ambiguous"
            node.detail = "tangency order infinite up to the truncation order after blowing up"
            return
        for leaf, _ in resolve_infinite(node, dec, settings):
            expand_step(leaf, settings, depth + 1, after_resolve=True)
        return
    bmodel, tr, v = basic_normal_form(model, tang)
    bnode = node.add(Node(bmodel, "basic-normal-form[v=%s]" % model.frame.names[v], tr))
    bnode.nu = tang.value
    for pnode, pf in prepare(bnode, settings, depth):
        if pf is None:
            expand_step(pnode, settings, depth + 1)
            continue
        for leaf in drop_invariant(pnode, pf, settings):
            expand_step(leaf, settings, depth + 1)


def monomialize_step(model, settings=None):
    settings = settings or Settings()
    root = Node(model, "input")
    expand_step(root, settings)
    return root


def _clear_v(model):
    if model.frame.v_slot is None:
        return model
    return model.replace(frame=model.frame.with_v(None))


def monomialize(model, settings=None):
    """Rounds of descent plus zero-one refinement until every generator is a
    monomial first integral; leaves carry the lattice as certificate."""
    settings = settings or Settings()
    n = model.n
    rank0 = rank(model.B)
    root = Node(model, "input")

    def certify(node, rounds):
        B = node.model.B
        rk = rank(B)
        if rk != rank0 + rounds or rk < n:
            if not node.model.is_exact():
                # dependence may sit entirely above the truncation order
                node.status = "truncation_ambiguous"
                node.detail = ("generators look dependent up to the truncation order "
                               "(lattice rank %d, need %d)" % (rk, max(n, rank0 + rounds)))
                return
            raise InternalError("first-integral lattice has rank %d after %d rounds" % (rk, rounds))
        node.status = "monomialized"
        node.info["certificate"] = {"rank": rk, "rounds": rounds,
                                    "first_integrals": B.tolist()}

    def run(node, k):
        if k == n:
            if measure(node.model)[0] is not None:
                raise InternalError("generators left to integrate after %d rounds" % n)
            node.nu = "trivial"
            certify(node, k)
            return
        expand_step(node, settings)
        for leaf in node.leaves():
            if leaf.status == "trivial":
                certify(leaf, k)
            elif leaf.status == "ready":
                leaf.status = None
                z = zero_one_normal_form(_clear_v(leaf.model))
                label = "refine[zero-one,eps=%d,generator=%s]" % (z.eps, leaf.model.labels[z.i0])
                child = leaf.add(Node(z.model, label, Transform(z.images)))
                child.info["refinement"] = {"eps": z.eps, "beta": [int(x) for x in z.beta],
                                            "generator": leaf.model.labels[z.i0]}
                run(child, k + 1)

    run(root, 0)
    return root


def tree_status(root):
    statuses = [n.status for n in root.leaves()]
    if "oracle_failure" in statuses:
        return "oracle_failure"
    if "truncation_ambiguous" in statuses:
        return "truncation_ambiguous"
    return "ok"
