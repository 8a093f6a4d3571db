"""Matrix models of |1|-graded simple Lie algebras.

Two families are built in:

* ``conformal`` -- so(n+1,1) realized as (n+2)x(n+2) matrices preserving
  the quadratic form with anti-diagonal 1-blocks in the corners, so that
  the grading by block structure is visible:

      [  a     Z      0  ]        a       scalar      (grade 0)
      [  X     A    -Z^T ]        A=-A^T  so(n) block (grade 0)
      [  0   -X^T   -a   ]        X       column      (grade -1)
                                  Z       row         (grade +1)

* ``grassmannian`` -- sl(p+q) over the rationals with the block grading
  where the lower-left q x p block is grade -1 and the upper-right p x q
  block is grade +1.

Basis orderings are fixed once per family (see the builders below) so all
downstream matrices are reproducible bit for bit.  The degenerate cases
(n < 3, and p=1 or q=1, which lead to projective-type gradings) are
rejected.

All arithmetic is exact rational.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from gmpy2 import mpq

from .linalg import Mat, QQ, ZERO, ONE

SCHEMA_ALGEBRA = "pbgg.algebra/1"


class AlgebraError(Exception):
    pass


@dataclass(frozen=True)
class AlgebraElement:
    """Element of a graded Lie algebra, as coefficients over its basis."""

    algebra: "GradedLieAlgebra"
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.algebra.dim:
            raise AlgebraError("coefficient vector has wrong length")
        object.__setattr__(self, "coeffs", tuple(QQ(c) for c in self.coeffs))

    def matrix(self):
        m = Mat.zeros(self.algebra.msize, self.algebra.msize)
        for c, b in zip(self.coeffs, self.algebra.basis):
            if c:
                m = m + b.scale(c)
        return m

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra,
                              tuple(a + b for a, b in zip(self.coeffs,
                                                          other.coeffs)))

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.algebra,
                              tuple(a - b for a, b in zip(self.coeffs,
                                                          other.coeffs)))

    def scale(self, c):
        c = QQ(c)
        return AlgebraElement(self.algebra, tuple(c * a for a in self.coeffs))

    def is_zero(self):
        return not any(self.coeffs)

    def grade_component(self, j):
        """Projection onto the grade-j span, as an AlgebraElement."""
        coeffs = [c if g == j else ZERO
                  for c, g in zip(self.coeffs, self.algebra.grades)]
        return AlgebraElement(self.algebra, tuple(coeffs))

    def _check(self, other):
        if other.algebra is not self.algebra:
            raise AlgebraError("elements belong to different algebras")


@dataclass(eq=False)
class GradedLieAlgebra:
    """A |1|-graded simple Lie algebra in a fixed matrix realization.

    basis       ordered tuple of m x m rational matrices, grade -1 block
                first, then grade 0 (grading element first), then grade +1
    grades      grade label per basis element
    killing     Gram matrix of the ad-trace form on the basis
    dual_g1     n x n matrix C with Z^i = sum_a C[a][i] * (native g1 basis a),
                so that B(Z^i, X_j) = delta_ij
    """

    family: str
    params: tuple
    msize: int
    basis: tuple
    grades: tuple
    grading_element_index: int
    killing: Mat = field(init=False)
    dual_g1: Mat = field(init=False)
    # structure constants c[i][j] = coefficients of [b_i, b_j]
    _struct: list = field(init=False, repr=False)
    _ad: list = field(init=False, repr=False)
    _flat_rref: tuple = field(init=False, repr=False)

    def __post_init__(self):
        self.basis = tuple(self.basis)
        self.grades = tuple(self.grades)
        self._build_expansion_table()
        self._build_structure()
        self._build_killing()
        self._build_dual_basis()

    # -- block bookkeeping ---------------------------------------------

    @property
    def dim(self):
        return len(self.basis)

    def grade_indices(self, j):
        return tuple(i for i, g in enumerate(self.grades) if g == j)

    @property
    def n(self):
        """dim g_{-1}, the leaf dimension of any flat model over this algebra."""
        return len(self.grade_indices(-1))

    def basis_element(self, i):
        coeffs = [ZERO] * self.dim
        coeffs[i] = ONE
        return AlgebraElement(self, tuple(coeffs))

    def element(self, coeffs):
        return AlgebraElement(self, tuple(coeffs))

    def zero(self):
        return AlgebraElement(self, (ZERO,) * self.dim)

    @property
    def grading_element(self):
        return self.basis_element(self.grading_element_index)

    # -- construction internals ------------------------------------------

    def _build_expansion_table(self):
        m2 = self.msize * self.msize
        d = self.dim
        flat = Mat.from_columns(
            [[b.rows[i][j] for i in range(self.msize)
              for j in range(self.msize)] for b in self.basis],
            nrows=m2)
        aug = flat.hstack(Mat.identity(m2))
        R, pivots = aug.rref()
        coeff_rows = []
        check_rows = []
        for k, c in enumerate(pivots):
            tail = R.rows[k][d:]
            if c < d:
                coeff_rows.append((c, tail))
            else:
                check_rows.append(tail)
        if len(coeff_rows) != d:
            raise AlgebraError("basis matrices are linearly dependent")
        self._flat_rref = (tuple(coeff_rows), tuple(check_rows))

    def expand(self, mat):
        """Coefficients of an m x m matrix over the basis; error if outside."""
        coeff_rows, check_rows = self._flat_rref
        vec = [mat.rows[i][j] for i in range(self.msize)
               for j in range(self.msize)]

        def dot(row):
            s = ZERO
            for a, v in zip(row, vec):
                if a and v:
                    s += a * v
            return s

        for row in check_rows:
            if dot(row):
                raise AlgebraError("matrix does not lie in the algebra")
        coeffs = [ZERO] * self.dim
        for c, row in coeff_rows:
            coeffs[c] = dot(row)
        return AlgebraElement(self, tuple(coeffs))

    def _build_structure(self):
        d = self.dim
        self._struct = [[None] * d for _ in range(d)]
        for i in range(d):
            for j in range(i, d):
                bi, bj = self.basis[i], self.basis[j]
                comm = bi.matmul(bj) - bj.matmul(bi)
                cij = self.expand(comm).coeffs
                self._struct[i][j] = cij
                self._struct[j][i] = tuple(-x for x in cij)
        self._ad = []
        for i in range(d):
            cols = [list(self._struct[i][j]) for j in range(d)]
            self._ad.append(Mat.from_columns(cols, nrows=d))

    def ad(self, X):
        """Matrix of ad(X) on g, in basis coordinates."""
        d = self.dim
        out = Mat.zeros(d, d)
        for c, adb in zip(X.coeffs, self._ad):
            if c:
                out = out + adb.scale(c)
        return out

    def _build_killing(self):
        d = self.dim
        gram = Mat.zeros(d, d)
        for i in range(d):
            adi = self._ad[i]
            for j in range(i, d):
                adj = self._ad[j]
                tr = ZERO
                for r in range(d):
                    row = adi.rows[r]
                    for s in range(d):
                        if row[s]:
                            x = adj.rows[s][r]
                            if x:
                                tr += row[s] * x
                gram.rows[i][j] = tr
                gram.rows[j][i] = tr
        self.killing = gram

    def _build_dual_basis(self):
        minus = self.grade_indices(-1)
        plus = self.grade_indices(1)
        n = len(minus)
        K = Mat([[self.killing.rows[a][b] for b in minus] for a in plus])
        if K.rank() != n:
            raise AlgebraError("singular (g1, g-1) Killing pairing")
        # want C with sum_a C[a][i] K[a][j] = delta_ij, i.e. K^T C = I
        self.dual_g1 = K.transpose().inverse()

    # -- spec operations -------------------------------------------------

    def dual_basis_pair(self):
        """(X_i, Z^i) with B(Z^i, X_j) = delta_ij exactly.

        X_i is the native ordered g_{-1} basis; Z^i are rational
        combinations of the native g_1 basis obtained by inverting the
        (g_1, g_-1) block of the Killing form.
        """
        minus = self.grade_indices(-1)
        plus = self.grade_indices(1)
        xs = [self.basis_element(i) for i in minus]
        zs = []
        for i in range(len(minus)):
            coeffs = [ZERO] * self.dim
            for a, gi in enumerate(plus):
                coeffs[gi] = self.dual_g1.rows[a][i]
            zs.append(AlgebraElement(self, tuple(coeffs)))
        return xs, zs


def bracket(algebra, x, y):
    """Lie bracket [x, y], exact, via the structure-constant tables."""
    if x.algebra is not algebra or y.algebra is not algebra:
        raise AlgebraError("elements do not belong to the given algebra")
    d = algebra.dim
    out = [ZERO] * d
    for i, ci in enumerate(x.coeffs):
        if not ci:
            continue
        row = algebra._struct[i]
        for j, cj in enumerate(y.coeffs):
            if cj:
                cij = row[j]
                f = ci * cj
                for k, s in enumerate(cij):
                    if s:
                        out[k] += f * s
    return AlgebraElement(algebra, tuple(out))


def killing_form(algebra, x, y):
    """B(x, y) = trace(ad x . ad y), from the precomputed Gram matrix."""
    if x.algebra is not algebra or y.algebra is not algebra:
        raise AlgebraError("elements do not belong to the given algebra")
    s = ZERO
    for i, ci in enumerate(x.coeffs):
        if ci:
            row = algebra.killing.rows[i]
            for j, cj in enumerate(y.coeffs):
                if cj:
                    s += ci * cj * row[j]
    return s


def dual_basis_pair(algebra):
    return algebra.dual_basis_pair()


# -- builders ----------------------------------------------------------


def build_conformal_algebra(n):
    """so(n+1,1) with the block grading; requires n >= 3.

    Basis order: X_1..X_n (grade -1), E, A_{ab} for a<b (grade 0, so(n)
    rotations), Z_1..Z_n (grade +1).
    """
    if n < 3:
        raise AlgebraError("conformal family needs n >= 3")
    m = n + 2
    basis = []
    grades = []

    def unit(i, j, c=1):
        M = Mat.zeros(m, m)
        M.rows[i][j] = QQ(c)
        return M

    # grade -1: X_a = E_{1+a,0} - E_{n+1,1+a}
    for a in range(n):
        basis.append(unit(1 + a, 0) - unit(n + 1, 1 + a))
        grades.append(-1)
    # grade 0: grading element first, then rotations
    E = unit(0, 0) - unit(n + 1, n + 1)
    basis.append(E)
    grades.append(0)
    e_index = n
    for a in range(n):
        for b in range(a + 1, n):
            basis.append(unit(1 + a, 1 + b) - unit(1 + b, 1 + a))
            grades.append(0)
    # grade +1: Z_a = E_{0,1+a} - E_{1+a,n+1}
    for a in range(n):
        basis.append(unit(0, 1 + a) - unit(1 + a, n + 1))
        grades.append(1)

    return GradedLieAlgebra(
        family="conformal", params=(n,), msize=m,
        basis=tuple(basis), grades=tuple(grades),
        grading_element_index=e_index)


def build_grassmannian_algebra(p, q):
    """sl(p+q) with the (p,q) block grading; requires p, q >= 2.

    p=1 or q=1 would give the projective-type grading, which is excluded.
    Basis order: the q*p lower-left units (grade -1, row-major), E, then
    off-diagonal units within each diagonal block and the traceless
    diagonal differences (grade 0), then the p*q upper-right units
    (grade +1, row-major).
    """
    if p < 2 or q < 2:
        raise AlgebraError("grassmannian family needs p, q >= 2 "
                           "(p=1 or q=1 is the projective case)")
    m = p + q
    basis = []
    grades = []

    def unit(i, j, c=1):
        M = Mat.zeros(m, m)
        M.rows[i][j] = QQ(c)
        return M

    # grade -1: lower-left block E_{p+i, j}
    for i in range(q):
        for j in range(p):
            basis.append(unit(p + i, j))
            grades.append(-1)
    # grade 0: grading element
    E = Mat.zeros(m, m)
    for i in range(p):
        E.rows[i][i] = QQ(q, p + q)
    for i in range(q):
        E.rows[p + i][p + i] = QQ(-p, p + q)
    basis.append(E)
    grades.append(0)
    e_index = q * p
    # grade 0: off-diagonal units inside the two diagonal blocks
    for i in range(p):
        for j in range(p):
            if i != j:
                basis.append(unit(i, j))
                grades.append(0)
    for i in range(q):
        for j in range(q):
            if i != j:
                basis.append(unit(p + i, p + j))
                grades.append(0)
    # grade 0: traceless diagonal differences within each block
    for c in range(p - 1):
        basis.append(unit(c, c) - unit(c + 1, c + 1))
        grades.append(0)
    for c in range(q - 1):
        basis.append(unit(p + c, p + c) - unit(p + c + 1, p + c + 1))
        grades.append(0)
    # grade +1: upper-right block E_{i, p+j}
    for i in range(p):
        for j in range(q):
            basis.append(unit(i, p + j))
            grades.append(1)

    return GradedLieAlgebra(
        family="grassmannian", params=(p, q), msize=m,
        basis=tuple(basis), grades=tuple(grades),
        grading_element_index=e_index)


def build_algebra(family, *params):
    if family == "conformal":
        return build_conformal_algebra(*params)
    if family == "grassmannian":
        return build_grassmannian_algebra(*params)
    raise AlgebraError("unknown family %r" % (family,))


# -- invariant checking -------------------------------------------------


def check_invariants(algebra, jacobi_limit=None):
    """Run the structural invariants; returns a list of failure strings.

    Checks: grading closure of the bracket, the Jacobi identity on basis
    triples, [E, A] = j*A on each graded block, Killing = ad-trace (true
    by construction, revalidated on a sample), nonsingular Killing form,
    and the dual-basis pairing B(Z^i, X_j) = delta_ij.
    """
    failures = []
    d = algebra.dim
    grades = algebra.grades

    for i in range(d):
        for j in range(d):
            cij = algebra._struct[i][j]
            target = grades[i] + grades[j]
            for k, c in enumerate(cij):
                if c and grades[k] != target:
                    failures.append(
                        "grading: [b%d, b%d] leaks into grade %d"
                        % (i, j, grades[k]))

    triples = [(i, j, k) for i in range(d) for j in range(i + 1, d)
               for k in range(j + 1, d)]
    if jacobi_limit is not None:
        triples = triples[:jacobi_limit]
    for (i, j, k) in triples:
        x, y, z = (algebra.basis_element(t) for t in (i, j, k))
        s = (bracket(algebra, bracket(algebra, x, y), z)
             + bracket(algebra, bracket(algebra, y, z), x)
             + bracket(algebra, bracket(algebra, z, x), y))
        if not s.is_zero():
            failures.append("jacobi fails on basis triple (%d,%d,%d)"
                            % (i, j, k))

    E = algebra.grading_element
    for i in range(d):
        b = algebra.basis_element(i)
        lhs = bracket(algebra, E, b)
        rhs = b.scale(grades[i])
        if lhs.coeffs != rhs.coeffs:
            failures.append("[E, b%d] != %d * b%d" % (i, grades[i], i))

    if algebra.killing.rank() != d:
        failures.append("Killing form is singular")

    xs, zs = algebra.dual_basis_pair()
    for i, z in enumerate(zs):
        for j, x in enumerate(xs):
            want = ONE if i == j else ZERO
            if killing_form(algebra, z, x) != want:
                failures.append("dual pairing B(Z^%d, X_%d) != delta" % (i, j))

    return failures


# -- serialization ------------------------------------------------------


def _rat_str(x):
    return str(x)


def _mat_to_lists(m):
    return [[_rat_str(x) for x in row] for row in m.rows]


def _mat_from_lists(rows):
    return Mat([[QQ(x) for x in row] for row in rows])


def algebra_to_dict(algebra):
    """JSON-ready descriptor of the algebra (rationals as "p/q" strings)."""
    return {
        "schema": SCHEMA_ALGEBRA,
        "family": algebra.family,
        "params": list(algebra.params),
        "matrix_size": algebra.msize,
        "dim": algebra.dim,
        "grades": list(algebra.grades),
        "grading_element_index": algebra.grading_element_index,
        "basis": [_mat_to_lists(b) for b in algebra.basis],
        "killing": _mat_to_lists(algebra.killing),
        "dual_g1": _mat_to_lists(algebra.dual_g1),
    }


def algebra_from_dict(doc):
    if doc.get("schema") != SCHEMA_ALGEBRA:
        raise AlgebraError("unsupported algebra schema: %r"
                           % (doc.get("schema"),))
    alg = GradedLieAlgebra(
        family=doc["family"], params=tuple(doc["params"]),
        msize=doc["matrix_size"],
        basis=tuple(_mat_from_lists(b) for b in doc["basis"]),
        grades=tuple(doc["grades"]),
        grading_element_index=doc["grading_element_index"])
    if _mat_to_lists(alg.killing) != doc["killing"]:
        raise AlgebraError("stored Killing Gram disagrees with ad-trace")
    return alg
