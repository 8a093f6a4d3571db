"""Exact linear algebra over the rationals.

Scalars are ``gmpy2.mpq`` throughout.  Matrices are small dense lists of
rows; elimination is done fraction-free over integers (with per-row gcd
stripping) so that entries never blow up the way naive rational pivoting
does.  Everything here is deterministic: fixed pivot order, fixed
tie-breaking, no randomness.
"""

from __future__ import annotations

from gmpy2 import mpq, mpz, gcd

QQ = mpq

ZERO = mpq(0)
ONE = mpq(1)


class LinAlgError(Exception):
    pass


class InconsistentSystem(LinAlgError):
    pass


def _q(x):
    return x if type(x) is mpq else mpq(x)


class Mat:
    """Dense rational matrix, row-major list of lists of mpq."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows, _copy=True, ncols=None):
        if _copy:
            self.rows = [[_q(x) for x in row] for row in rows]
        else:
            self.rows = rows
        self.nrows = len(self.rows)
        if self.nrows:
            self.ncols = len(self.rows[0])
        else:
            self.ncols = 0 if ncols is None else ncols
        for row in self.rows:
            if len(row) != self.ncols:
                raise LinAlgError("ragged rows")

    # -- constructors -------------------------------------------------

    @classmethod
    def zeros(cls, m, n):
        return cls([[ZERO] * n for _ in range(m)], _copy=False, ncols=n)

    @classmethod
    def identity(cls, n):
        rows = [[ZERO] * n for _ in range(n)]
        for i in range(n):
            rows[i][i] = ONE
        return cls(rows, _copy=False)

    @classmethod
    def from_columns(cls, cols, nrows=None):
        cols = [list(c) for c in cols]
        if not cols:
            if nrows is None:
                raise LinAlgError("from_columns needs nrows for an empty set")
            return cls.zeros(nrows, 0)
        m = len(cols[0])
        rows = [[_q(c[i]) for c in cols] for i in range(m)]
        return cls(rows, _copy=False)

    @classmethod
    def column(cls, vec):
        return cls([[_q(x)] for x in vec], _copy=False)

    # -- basics -------------------------------------------------------

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash(tuple(tuple(r) for r in self.rows))

    def copy(self):
        return Mat([row[:] for row in self.rows], _copy=False)

    def is_zero(self):
        return all(not x for row in self.rows for x in row)

    def col(self, j):
        return [row[j] for row in self.rows]

    def columns(self):
        return [self.col(j) for j in range(self.ncols)]

    def transpose(self):
        return Mat([[self.rows[i][j] for i in range(self.nrows)]
                    for j in range(self.ncols)], _copy=False)

    def submatrix(self, row_idx, col_idx):
        return Mat([[self.rows[i][j] for j in col_idx] for i in row_idx],
                   _copy=False)

    def hstack(self, other):
        if self.nrows != other.nrows:
            raise LinAlgError("hstack: row mismatch")
        return Mat([a + b for a, b in zip(self.rows, other.rows)], _copy=False)

    def vstack(self, other):
        if self.ncols != other.ncols:
            raise LinAlgError("vstack: column mismatch")
        return Mat([row[:] for row in self.rows]
                   + [row[:] for row in other.rows], _copy=False)

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        if self.shape != other.shape:
            raise LinAlgError("shape mismatch in +")
        return Mat([[a + b for a, b in zip(ra, rb)]
                    for ra, rb in zip(self.rows, other.rows)], _copy=False)

    def __sub__(self, other):
        if self.shape != other.shape:
            raise LinAlgError("shape mismatch in -")
        return Mat([[a - b for a, b in zip(ra, rb)]
                    for ra, rb in zip(self.rows, other.rows)], _copy=False)

    def __neg__(self):
        return Mat([[-a for a in row] for row in self.rows], _copy=False)

    def scale(self, c):
        c = _q(c)
        return Mat([[c * a for a in row] for row in self.rows], _copy=False)

    def __mul__(self, other):
        if isinstance(other, Mat):
            return self.matmul(other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def matmul(self, other):
        if self.ncols != other.nrows:
            raise LinAlgError("shape mismatch in matmul")
        out = [[ZERO] * other.ncols for _ in range(self.nrows)]
        orows = other.rows
        for i, arow in enumerate(self.rows):
            acc = out[i]
            for j, a in enumerate(arow):
                if a:
                    brow = orows[j]
                    for k, b in enumerate(brow):
                        if b:
                            acc[k] += a * b
        return Mat(out, _copy=False, ncols=other.ncols)

    def matvec(self, vec):
        if self.ncols != len(vec):
            raise LinAlgError("shape mismatch in matvec")
        out = [ZERO] * self.nrows
        for i, arow in enumerate(self.rows):
            s = ZERO
            for a, v in zip(arow, vec):
                if a and v:
                    s += a * v
            out[i] = s
        return out

    # -- elimination --------------------------------------------------

    def _int_rows(self):
        """Rows rescaled to integers (mpz), fraction-free."""
        out = []
        for row in self.rows:
            den = mpz(1)
            for x in row:
                if x:
                    d = x.denominator
                    den = den * d // gcd(den, d)
            out.append([mpz(x.numerator * (den // x.denominator)) if x else mpz(0)
                        for x in row])
        return out

    def rref(self):
        """Reduced row echelon form.

        Returns (R, pivots) with R a Mat over mpq whose pivot entries are 1
        and pivots the tuple of pivot column indices.  Deterministic.
        """
        m, n = self.nrows, self.ncols
        rows = self._int_rows()
        piv_cols = []
        r = 0
        for c in range(n):
            # pick the sparsest candidate row (least fill-in), break ties
            # by smallest |pivot| then lowest index
            best = None
            best_key = None
            for i in range(r, m):
                v = rows[i][c]
                if v:
                    nnz = sum(1 for x in rows[i] if x)
                    key = (nnz, abs(v), i)
                    if best_key is None or key < best_key:
                        best, best_key = i, key
            if best is None:
                continue
            rows[r], rows[best] = rows[best], rows[r]
            prow = rows[r]
            p = prow[c]
            for i in range(m):
                if i == r:
                    continue
                q = rows[i][c]
                if q:
                    ri = rows[i]
                    new = [p * x - q * y if y else p * x
                           for x, y in zip(ri, prow)]
                    g = mpz(0)
                    for x in new:
                        if x:
                            g = gcd(g, x)
                            if g == 1:
                                break
                    if g > 1:
                        new = [x // g for x in new]
                    rows[i] = new
            piv_cols.append(c)
            r += 1
            if r == m:
                break
        out = [[ZERO] * n for _ in range(m)]
        for k, c in enumerate(piv_cols):
            p = rows[k][c]
            out[k] = [mpq(x, p) if x else ZERO for x in rows[k]]
        return Mat(out, _copy=False), tuple(piv_cols)

    def rank(self):
        return len(self.rref()[1])

    def nullspace(self):
        """Basis of the right kernel, as columns of a Mat (ncols x nullity)."""
        R, pivots = self.rref()
        n = self.ncols
        pivset = set(pivots)
        free = [j for j in range(n) if j not in pivset]
        cols = []
        for f in free:
            v = [ZERO] * n
            v[f] = ONE
            for k, c in enumerate(pivots):
                v[c] = -R.rows[k][f]
            cols.append(v)
        return Mat.from_columns(cols, nrows=n)

    def column_space(self):
        """Basis of the column span: the pivot columns of self, verbatim."""
        _, pivots = self.rref()
        return Mat.from_columns([self.col(j) for j in pivots],
                                nrows=self.nrows)

    def solve(self, rhs):
        """Particular solution X of self @ X = rhs with free variables 0.

        rhs is a Mat; raises InconsistentSystem when no solution exists.
        The solution is linear in rhs for fixed left-hand side (free
        variables pinned to zero, pivots in fixed lexicographic column
        order), which is what the normalization code relies on.
        """
        if rhs.nrows != self.nrows:
            raise LinAlgError("solve: row mismatch")
        n = self.ncols
        aug = self.hstack(rhs)
        R, pivots = aug.rref()
        for c in pivots:
            if c >= n:
                raise InconsistentSystem("no exact solution")
        X = Mat.zeros(n, rhs.ncols)
        for k, c in enumerate(pivots):
            for j in range(rhs.ncols):
                X.rows[c][j] = R.rows[k][n + j]
        return X

    def solve_vec(self, vec):
        return self.solve(Mat.column(vec)).col(0)

    def inverse(self):
        if self.nrows != self.ncols:
            raise LinAlgError("inverse of non-square matrix")
        X = self.solve(Mat.identity(self.nrows))
        if (self.matmul(X)) != Mat.identity(self.nrows):
            raise LinAlgError("matrix is singular")
        return X

    def __repr__(self):
        return "Mat(%d x %d)" % (self.nrows, self.ncols)

    def pretty(self):
        return "\n".join("[" + "  ".join(str(x) for x in row) + "]"
                         for row in self.rows)


# -- span utilities ----------------------------------------------------

def span_contains(basis, vectors):
    """True iff every column of `vectors` lies in the column span of `basis`."""
    if vectors.ncols == 0:
        return True
    if basis.ncols == 0:
        return vectors.is_zero()
    return basis.hstack(vectors).rank() == basis.rank()


def spans_equal(a, b):
    return span_contains(a, b) and span_contains(b, a)


def intersect_trivially(a, b):
    """True iff the column spans of a and b meet only in 0."""
    if a.ncols == 0 or b.ncols == 0:
        return True
    return a.hstack(b).rank() == a.rank() + b.rank()


# -- sparse elimination --------------------------------------------------

def sparse_rref(rows, ncols):
    """Full reduction of sparse rows (dicts col -> mpq), in place.

    Returns (pivot list of (row_index, col), surviving row dicts).  Pivot
    choice is Markowitz-flavored: rows with fewest entries first, and
    within a row the column held by fewest other rows; ties break on the
    lowest column index so the result is deterministic.
    """
    rows = [dict(r) for r in rows]
    col_rows = {}
    for ri, r in enumerate(rows):
        for c in r:
            col_rows.setdefault(c, set()).add(ri)
    active = set(ri for ri, r in enumerate(rows) if r)
    pivots = []
    pivot_rows = set()
    while True:
        cand = [ri for ri in active if ri not in pivot_rows and rows[ri]]
        if not cand:
            break
        ri = min(cand, key=lambda r: (len(rows[r]), r))
        row = rows[ri]
        c = min(row, key=lambda cc: (len(col_rows.get(cc, ())), cc))
        piv = row[c]
        if piv != ONE:
            inv = 1 / piv
            for cc in list(row):
                row[cc] *= inv
        for rj in list(col_rows.get(c, ())):
            if rj == ri:
                continue
            other = rows[rj]
            f = other.get(c)
            if not f:
                continue
            for cc, v in row.items():
                nv = other.get(cc, ZERO) - f * v
                if nv:
                    if cc not in other:
                        col_rows.setdefault(cc, set()).add(rj)
                    other[cc] = nv
                else:
                    if cc in other:
                        del other[cc]
                        col_rows[cc].discard(rj)
        pivots.append((ri, c))
        pivot_rows.add(ri)
    return pivots, rows


def sparse_rank(rows, ncols):
    return len(sparse_rref(rows, ncols)[0])


def sparse_nullspace(rows, ncols):
    """Kernel basis of a sparse matrix given as row dicts.

    Returns a list of solution dicts (col -> mpq), one per free column,
    in increasing free-column order.
    """
    pivots, red = sparse_rref(rows, ncols)
    piv_cols = {c: ri for ri, c in pivots}
    free = [c for c in range(ncols) if c not in piv_cols]
    basis = []
    for f in free:
        sol = {f: ONE}
        for c, ri in piv_cols.items():
            v = red[ri].get(f)
            if v:
                sol[c] = -v
        basis.append(sol)
    return basis


# -- polynomials over QQ (ascending coefficient lists) ------------------

def poly_normalize(p):
    while p and not p[-1]:
        p.pop()
    return p


def poly_mul(p, q):
    if not p or not q:
        return []
    out = [ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                if b:
                    out[i + j] += a * b
    return poly_normalize(out)


def poly_divmod(p, q):
    p = list(p)
    q = poly_normalize(list(q))
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    quot = [ZERO] * max(0, len(p) - len(q) + 1)
    lead = q[-1]
    for i in range(len(p) - len(q), -1, -1):
        c = p[i + len(q) - 1] / lead
        if c:
            quot[i] = c
            for j, b in enumerate(q):
                p[i + j] -= c * b
    return poly_normalize(quot), poly_normalize(p)


def poly_gcd(p, q):
    p = poly_normalize(list(p))
    q = poly_normalize(list(q))
    while q:
        p, q = q, poly_divmod(p, q)[1]
    if p:
        lead = p[-1]
        p = [c / lead for c in p]
    return p


def poly_lcm(p, q):
    if not p or not q:
        return []
    g = poly_gcd(p, q)
    lcm, _ = poly_divmod(poly_mul(p, q), g)
    lead = lcm[-1]
    return [c / lead for c in lcm]


def poly_eval_matrix(p, M):
    """p(M) for a square Mat M, Horner form."""
    n = M.nrows
    acc = Mat.zeros(n, n)
    for c in reversed(p):
        acc = M.matmul(acc)
        if c:
            for i in range(n):
                acc.rows[i][i] += c
    return acc


def minimal_polynomial(M):
    """Monic minimal polynomial of a square rational matrix.

    Returned as an ascending coefficient list [c0, ..., c_{d-1}, 1].
    Computed from per-basis-vector Krylov annihilators, combined by lcm;
    each basis vector is checked against the running polynomial first, so
    the result annihilates all of QQ^n.
    """
    n = M.nrows
    if M.ncols != n:
        raise LinAlgError("minimal polynomial of non-square matrix")
    if n == 0:
        return [ONE]
    mp = [ONE]
    for s in range(n):
        e = [ZERO] * n
        e[s] = ONE
        # does mp already annihilate e?
        v = e
        acc = [mp[0] * x for x in v]
        for c in mp[1:]:
            v = M.matvec(v)
            if c:
                acc = [a + c * x for a, x in zip(acc, v)]
        if not any(acc):
            continue
        # Krylov chain from e until linear dependence
        chain = [e]
        v = e
        while True:
            v = M.matvec(v)
            K = Mat.from_columns(chain + [v], nrows=n)
            ker = K.nullspace()
            if ker.ncols:
                dep = ker.col(0)
                lead = dep[-1]
                local = [c / lead for c in dep[:-1]] + [ONE]
                break
            chain.append(v)
        mp = poly_lcm(mp, local)
        if len(mp) == n + 1:
            break
    return mp
