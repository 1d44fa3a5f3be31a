"""Exact rational linear algebra for exponent matrices.

Everything here works over ``fractions.Fraction``; nothing touches floats.
Matrices are small (a dozen rows at most) so clarity wins over speed.
"""
from fractions import Fraction
from functools import reduce
from math import gcd, lcm


class LinalgError(ValueError):
    pass


def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


class ExpMatrix:
    """Immutable rational matrix. ``ncols`` is kept explicitly so that
    matrices with zero rows still know their width."""

    __slots__ = ("rows", "ncols")

    def __init__(self, rows=(), ncols=None):
        rows = tuple(tuple(_frac(x) for x in r) for r in rows)
        if ncols is None:
            if not rows:
                raise LinalgError("cannot infer width of an empty matrix")
            ncols = len(rows[0])
        for r in rows:
            if len(r) != ncols:
                raise LinalgError("ragged matrix")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "ncols", ncols)

    def __setattr__(self, k, v):
        raise AttributeError("ExpMatrix is immutable")

    @classmethod
    def identity(cls, n):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def zeros(cls, r, c):
        return cls([[0] * c for _ in range(r)], c)

    @classmethod
    def empty(cls, ncols):
        return cls((), ncols)

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def shape(self):
        return (len(self.rows), self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        if not isinstance(other, ExpMatrix):
            return NotImplemented
        return self.ncols == other.ncols and self.rows == other.rows

    def __hash__(self):
        return hash((self.rows, self.ncols))

    def __repr__(self):
        return "ExpMatrix(%s)" % self.tolist()

    def tolist(self):
        """Entries as ints where integral, else 'p/q' strings (JSON friendly)."""
        out = []
        for r in self.rows:
            out.append([int(x) if x.denominator == 1 else str(x) for x in r])
        return out

    def is_integral(self):
        return all(x.denominator == 1 for r in self.rows for x in r)

    def int_rows(self):
        if not self.is_integral():
            raise LinalgError("matrix has non-integer entries")
        return tuple(tuple(int(x) for x in r) for r in self.rows)

    def transpose(self):
        return ExpMatrix([[self.rows[i][j] for i in range(self.nrows)]
                          for j in range(self.ncols)], self.nrows)

    def row(self, i):
        return self.rows[i]

    def col(self, j):
        return tuple(r[j] for r in self.rows)

    def take(self, rows=None, cols=None):
        rows = range(self.nrows) if rows is None else list(rows)
        cols = range(self.ncols) if cols is None else list(cols)
        return ExpMatrix([[self.rows[i][j] for j in cols] for i in rows], len(cols))

    def vstack(self, other):
        if isinstance(other, ExpMatrix):
            other_rows = other.rows
            width = other.ncols
        else:
            other_rows = tuple(tuple(_frac(x) for x in r) for r in other)
            width = len(other_rows[0]) if other_rows else self.ncols
        if width != self.ncols:
            raise LinalgError("width mismatch in vstack")
        return ExpMatrix(self.rows + tuple(other_rows), self.ncols)

    def hstack(self, other):
        if other.nrows != self.nrows:
            raise LinalgError("height mismatch in hstack")
        return ExpMatrix([a + b for a, b in zip(self.rows, other.rows)],
                         self.ncols + other.ncols)

    def __matmul__(self, other):
        return compose_exponents(self, other)

    def __add__(self, other):
        if self.shape != other.shape:
            raise LinalgError("shape mismatch")
        return ExpMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                         self.ncols)

    def __sub__(self, other):
        if self.shape != other.shape:
            raise LinalgError("shape mismatch")
        return ExpMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                         self.ncols)

    def scale(self, c):
        c = _frac(c)
        return ExpMatrix([[c * x for x in r] for r in self.rows], self.ncols)


def as_matrix(m, ncols=None):
    if isinstance(m, ExpMatrix):
        return m
    m = list(m)
    if not m and ncols is None:
        raise LinalgError("cannot infer width of an empty matrix")
    return ExpMatrix(m, ncols)


def vec_mat(v, M):
    """Row vector times matrix."""
    M = as_matrix(M)
    if len(v) != M.nrows:
        raise LinalgError("dimension mismatch")
    return tuple(sum((_frac(v[i]) * M.rows[i][j] for i in range(M.nrows)), Fraction(0))
                 for j in range(M.ncols))


def mat_vec(M, v):
    M = as_matrix(M)
    if len(v) != M.ncols:
        raise LinalgError("dimension mismatch")
    return tuple(sum((a * _frac(b) for a, b in zip(r, v)), Fraction(0)) for r in M.rows)


def compose_exponents(A, B):
    """Product AB.  If u = x^B then u^A = x^(AB)."""
    A = as_matrix(A)
    B = as_matrix(B)
    if A.ncols != B.nrows:
        raise LinalgError("inner dimensions disagree: %d vs %d" % (A.ncols, B.nrows))
    cols = [B.col(j) for j in range(B.ncols)]
    return ExpMatrix([[sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols]
                      for r in A.rows], B.ncols)


def _integer_rows(rows):
    out = []
    for r in rows:
        den = reduce(lcm, (x.denominator for x in r), 1)
        out.append([int(x * den) for x in r])
    return out


def bareiss_echelon(rows):
    """Fraction-free elimination on integer rows.  Returns (echelon rows, pivot columns)."""
    M = [list(r) for r in rows]
    if not M:
        return M, []
    nr, nc = len(M), len(M[0])
    prev = 1
    pivots = []
    r = 0
    for c in range(nc):
        if r >= nr:
            break
        p = next((i for i in range(r, nr) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        for i in range(r + 1, nr):
            for j in range(c + 1, nc):
                M[i][j] = (M[r][c] * M[i][j] - M[i][c] * M[r][j]) // prev
            M[i][c] = 0
        prev = M[r][c]
        pivots.append(c)
        r += 1
    return M, pivots


def rank(M):
    M = as_matrix(M)
    if M.nrows == 0 or M.ncols == 0:
        return 0
    _, piv = bareiss_echelon(_integer_rows(M.rows))
    return len(piv)


def det(M):
    M = as_matrix(M)
    n = M.nrows
    if n != M.ncols:
        raise LinalgError("determinant of a non-square matrix")
    if n == 0:
        return Fraction(1)
    scale = Fraction(1)
    rows = []
    for r in M.rows:
        den = reduce(lcm, (x.denominator for x in r), 1)
        scale /= den
        rows.append([int(x * den) for x in r])
    # track row swaps explicitly
    sign = 1
    prev = 1
    for c in range(n):
        p = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            sign = -sign
        for i in range(c + 1, n):
            for j in range(c + 1, n):
                rows[i][j] = (rows[c][c] * rows[i][j] - rows[i][c] * rows[c][j]) // prev
            rows[i][c] = 0
        prev = rows[c][c]
    return sign * Fraction(rows[n - 1][n - 1]) * scale


def rref(M):
    """Reduced row echelon form over Q.  Returns (rows, pivot columns); zero rows dropped."""
    M = as_matrix(M)
    A = [list(r) for r in M.rows]
    pivots = []
    r = 0
    for c in range(M.ncols):
        p = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return ExpMatrix(A[:r], M.ncols), pivots


def inverse(M):
    M = as_matrix(M)
    n = M.nrows
    if n != M.ncols:
        raise LinalgError("inverse of a non-square matrix")
    aug = M.hstack(ExpMatrix.identity(n))
    R, piv = rref(aug)
    if piv[:n] != list(range(n)) or R.nrows < n:
        raise LinalgError("singular matrix")
    return R.take(cols=range(n, 2 * n))


def primitive(v):
    """Scale a rational vector to integers with content 1 and positive leading entry."""
    v = [_frac(x) for x in v]
    if all(x == 0 for x in v):
        return tuple(0 for _ in v)
    den = reduce(lcm, (x.denominator for x in v), 1)
    ints = [int(x * den) for x in v]
    g = reduce(gcd, (abs(x) for x in ints), 0)
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x != 0)
    if lead < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def canonical_rows(M):
    """Canonical integer basis of the row space: RREF, primitive rows, sorted
    lexicographically from largest to smallest."""
    M = as_matrix(M)
    R, _ = rref(M)
    rows = sorted((primitive(r) for r in R.rows), reverse=True)
    return ExpMatrix(rows, M.ncols)


def right_kernel_basis(B):
    """Canonical integer basis of {a : B a^T = 0}."""
    B = as_matrix(B)
    k = B.ncols
    R, piv = rref(B)
    free = [j for j in range(k) if j not in piv]
    basis = []
    for f in free:
        vec = [Fraction(0)] * k
        vec[f] = Fraction(1)
        for i, p in enumerate(piv):
            vec[p] = -R.rows[i][f]
        basis.append(vec)
    if not basis:
        return ExpMatrix.empty(k)
    return canonical_rows(ExpMatrix(basis, k))


def in_row_span(v, B):
    B = as_matrix(B, len(v))
    if len(v) != B.ncols:
        raise LinalgError("length mismatch")
    if all(_frac(x) == 0 for x in v):
        return True
    return rank(B.vstack([v])) == rank(B)


def solve_left(B, v):
    """Coefficients c with c B = v, or None when v is outside the row span."""
    B = as_matrix(B, len(v))
    if B.nrows == 0:
        return () if all(_frac(x) == 0 for x in v) else None
    # columns of B^T; solve B^T c = v
    aug = B.transpose().hstack(ExpMatrix([[x] for x in v], 1))
    R, piv = rref(aug)
    if B.nrows in piv:
        return None
    c = [Fraction(0)] * B.nrows
    for i, p in enumerate(piv):
        c[p] = R.rows[i][B.nrows]
    return tuple(c)


def first_independent_rows(M, target=None):
    """Indices of the lexicographically first rows spanning the row space
    (or reaching ``target`` rank)."""
    M = as_matrix(M)
    chosen = []
    cur = 0
    goal = rank(M) if target is None else target
    for i in range(M.nrows):
        if cur == goal:
            break
        trial = M.take(rows=chosen + [i])
        if rank(trial) > cur:
            chosen.append(i)
            cur += 1
    return chosen


def first_pivot_columns(M):
    """Lexicographically first set of columns on which M has full row rank."""
    M = as_matrix(M)
    _, piv = rref(M)
    return list(piv)


def schur_split(M, pivot_cols, pivot_rows=None):
    """Block split of M around an invertible pivot block.

    Returns (A1', A1'', A2', A2'', L) where A1' = M[pr, pc], A1'' = M[other rows, pc],
    A2' = M[pr, other cols], A2'' = M[other rows, other cols] and
    L = A2'' - A1'' (A1')^-1 A2'.
    """
    M = as_matrix(M)
    pc = list(pivot_cols)
    if pivot_rows is None:
        pr = first_independent_rows(M.take(cols=pc), target=len(pc))
    else:
        pr = list(pivot_rows)
    if len(pr) != len(pc):
        raise LinalgError("pivot block is not square")
    oc = [j for j in range(M.ncols) if j not in pc]
    orows = [i for i in range(M.nrows) if i not in pr]
    A1p = M.take(pr, pc)
    if rank(A1p) != len(pc):
        raise LinalgError("singular pivot block")
    A1pp = M.take(orows, pc)
    A2p = M.take(pr, oc)
    A2pp = M.take(orows, oc)
    if A1pp.nrows and A2p.ncols:
        corr = A1pp @ inverse(A1p) @ A2p
        L = A2pp - corr
    else:
        L = A2pp
    return A1p, A1pp, A2p, A2pp, L


def right_solve(M, R):
    """Some X with M X = R, for M of full row rank (X supported on the first
    pivot columns of M)."""
    M = as_matrix(M)
    R = as_matrix(R)
    if M.nrows != R.nrows:
        raise LinalgError("row mismatch")
    if M.nrows == 0:
        return ExpMatrix.zeros(M.ncols, R.ncols)
    if rank(M) != M.nrows:
        raise LinalgError("matrix lacks full row rank")
    piv = first_pivot_columns(M)
    sub = inverse(M.take(cols=piv)) @ R
    rows = [[Fraction(0)] * R.ncols for _ in range(M.ncols)]
    for a, p in enumerate(piv):
        rows[p] = list(sub.rows[a])
    return ExpMatrix(rows, R.ncols)
