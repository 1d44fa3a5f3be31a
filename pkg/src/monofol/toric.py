"""Principalizing monomial ideals by blowing up codimension-two coordinate
subspaces, plus the monomial-times-unit gate in front of it."""
from collections import Counter

from .linalg import ExpMatrix
from .series import glex_key


def divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def minimal_generators(gens):
    gens = sorted({tuple(int(x) for x in g) for g in gens}, key=glex_key)
    out = []
    for g in gens:
        if not any(divides(h, g) for h in out):
            out.append(g)
    return out


def is_principal(gens):
    gens = list(gens)
    return any(all(divides(g, h) for h in gens) for g in gens)


class MonIdeal:
    def __init__(self, gens, variables):
        self.variables = list(variables)     # frame indices the exponents refer to
        gens = minimal_generators(gens)
        if not gens:
            raise ValueError("a monomial ideal needs a generator")
        for g in gens:
            if len(g) != len(self.variables):
                raise ValueError("generator length does not match the variable list")
        self.gens = gens

    def is_principal(self):
        return len(self.gens) == 1


def chart_matrix(r, a, b):
    """Chart of the blowup of {x_a = x_b = 0} in which x_a survives:
    x_b(old) = x_a * x_b(new).  Returned as old = new^E."""
    rows = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    rows[b][a] = 1
    return ExpMatrix(rows, r)


def _transform(g, a, b):
    g = list(g)
    g[a] = g[a] + g[b]
    return tuple(g)


def _incomparable_pairs(gens):
    for p in range(len(gens)):
        for q in range(p + 1, len(gens)):
            if not divides(gens[p], gens[q]) and not divides(gens[q], gens[p]):
                yield p, q


def _defect_key(defect):
    # the multiset order on sorted-descending lists is plain lexicographic order
    return tuple(defect)


def select_center(gens):
    """Blowup center for the incomparable generator pair of least crossing
    defect (first such pair on ties): among the variable pairs where the two
    exponents cross, the one with the largest smaller crossing gap, ties broken
    by the lexicographically smallest pair.

    Returns None when the generators are totally ordered by divisibility."""
    focus = None
    count = 0
    for p, q in _incomparable_pairs(gens):
        count += 1
        d = [x - y for x, y in zip(gens[p], gens[q])]
        defect = crossing_defect(d)
        if focus is None or _defect_key(defect) < _defect_key(focus[1]):
            focus = (d, defect)
    if focus is None:
        return None
    d, defect = focus
    best = None
    r = len(d)
    for i in range(r):
        for j in range(i + 1, r):
            if d[i] * d[j] < 0:
                gap = min(abs(d[i]), abs(d[j]))
                key = (-gap, i, j)
                if best is None or key < best:
                    best = key
    return (best[1], best[2]), count, defect


def crossing_defect(d):
    """One (smaller, larger) magnitude pair per variable pair where the
    exponent difference d changes sign."""
    out = []
    for k, x in enumerate(d):
        if x <= 0:
            continue
        for y in d:
            if y < 0:
                out.append((min(x, -y), max(x, -y)))
    return sorted(out, reverse=True)


def multiset_less(new, old):
    """Multiset ordering: every element gained is dominated by one lost."""
    n, o = Counter(new), Counter(old)
    lost, gained = o - n, n - o
    if not lost and not gained:
        return False
    return all(any(x > y for x in lost) for y in gained)


class PLeaf:
    def __init__(self, matrix, generator, path):
        self.matrix = matrix        # old = new^matrix over the ideal's variables
        self.generator = generator  # principal generator in leaf coordinates
        self.path = path            # sequence of (center, surviving variable)

    def to_dict(self, names=None):
        return {"chart_matrix": self.matrix.tolist(), "generator": list(self.generator),
                "path": [{"center": [names[c] if names else c for c in ctr],
                          "chart": names[s] if names else s} for ctr, s in self.path]}


class PNode:
    def __init__(self, center, children):
        self.center = center        # pair of positions in the variable list
        self.children = children    # list of (surviving position, subtree)


def principalize_monomial(ideal, max_depth=200):
    """Tree of blowups after which every chart sees a principal ideal.

    Termination: comparable pairs stay comparable, so in every chart either
    the number of incomparable pairs drops, or it stays and the least crossing
    defect drops in the multiset ordering.  The max-min center rule is what
    makes the focus pair's defect shrink: every crossing magnitude pair that
    the blowup touches is replaced by strictly smaller ones."""
    r = len(ideal.variables)
    gens0 = ideal.gens
    leaves = []

    def grow(gens, matrix, path, measure, depth):
        if depth > max_depth:
            raise RuntimeError("principalization did not terminate")
        sel = select_center(gens)
        if sel is None:
            gen = min(gens, key=lambda g: sum(g))
            assert all(divides(gen, h) for h in gens)
            leaf = PLeaf(matrix, gen, path)
            leaves.append(leaf)
            return leaf
        (a, b), count, defect = sel
        m_here = (count, defect)
        if measure is not None:
            prev_count, prev_defect = measure
            assert count < prev_count or (count == prev_count
                                          and multiset_less(defect, prev_defect)), \
                "principalization measure failed to decrease"
        children = []
        for keep, other in ((a, b), (b, a)):
            E = chart_matrix(r, keep, other)
            new = [_transform(g, keep, other) for g in gens]
            sub = grow(new, matrix @ E, path + [((a, b), keep)], m_here, depth + 1)
            children.append((keep, sub))
        return PNode((a, b), children)

    root = grow(list(gens0), ExpMatrix.identity(r), [], None, 0)
    return root, leaves


class OracleFailure:
    def __init__(self, detail):
        self.detail = detail

    def __repr__(self):
        return "OracleFailure(%s)" % self.detail


def monomial_unit_part(s, allowed):
    """Exponent m (over the whole frame) with s = x^m * unit, supported on the
    allowed variables; None when s is not of that shape."""
    if s.is_zero():
        return None
    m = s.min_exponent()
    if s.coefficient(m) == 0:
        return None
    if any(x and i not in allowed for i, x in enumerate(m)):
        return None
    return m


def principalize_oracle(ideal, model, mode="invariant", variables=None):
    """Principalize an ideal given by series.  Only the monomial-times-unit
    case is handled; anything else comes back as an OracleFailure value."""
    fr = model.frame
    if variables is None:
        variables = list(fr.u_block)
        if mode == "admissible" and fr.v_slot is not None:
            variables.append(fr.v_slot)
    allowed = set(variables)
    parts = []
    for s in ideal:
        if s.is_zero():
            continue
        m = monomial_unit_part(s, allowed)
        if m is None:
            return OracleFailure("oracle required: generator is not a monomial times a unit")
        parts.append(tuple(m[i] for i in variables))
    if not parts:
        return OracleFailure("oracle required: zero ideal")
    I = MonIdeal(parts, variables)
    return principalize_monomial(I)
