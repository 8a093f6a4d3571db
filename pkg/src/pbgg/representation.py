"""Finite-dimensional graded representations of the built algebras.

A GradedRepresentation carries the action matrices together with the
eigenspace decomposition of the grading element: V = V_0 + ... + V_N,
where V_i is the eigenspace of rho(E) with eigenvalue i + s and s is the
minimal eigenvalue.  Grade-j algebra elements then map V_i into V_{i+j},
and V^i = V_i + V_{i+1} + ... is the invariant filtration used by all of
the Hodge/BGG machinery downstream.

Eigenvalues of rho(E) are found exactly: the minimal polynomial of the
matrix is computed and factored into rational linear factors (the spectra
here are rational but not integral -- the grassmannian grading element has
eigenvalues with denominator p+q).  Anything non-diagonalizable or with a
non-rational eigenvalue fails loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from gmpy2 import mpq, mpz

from .linalg import Mat, QQ, ZERO, ONE, minimal_polynomial
from .algebra import AlgebraError, SCHEMA_ALGEBRA, _mat_to_lists, _mat_from_lists

SCHEMA_REPRESENTATION = "pbgg.representation/1"


class RepresentationError(Exception):
    pass


def _divisors(n):
    n = abs(int(n))
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def rational_roots(poly):
    """All rational roots of a polynomial with mpq coefficients.

    poly is an ascending coefficient list.  Returns (roots, remainder):
    each root once per multiplicity, and the deflated polynomial with the
    rational roots divided out (length 1 means the polynomial split).
    """
    from math import lcm

    p = [QQ(c) for c in poly]
    while p and not p[-1]:
        p.pop()
    if not p:
        raise RepresentationError("zero polynomial has no well-defined roots")
    roots = []
    while len(p) > 1:
        if not p[0]:
            root = QQ(0)
        else:
            den = 1
            for c in p:
                den = lcm(den, int(c.denominator))
            ip = [int(c * den) for c in p]
            root = None
            for rnum in _divisors(ip[0]):
                for rden in _divisors(ip[-1]):
                    for sign in (1, -1):
                        cand = QQ(sign * rnum, rden)
                        val = ZERO
                        for c in reversed(p):
                            val = val * cand + c
                        if not val:
                            root = cand
                            break
                    if root is not None:
                        break
                if root is not None:
                    break
            if root is None:
                break
        roots.append(root)
        # synthetic division by (t - root)
        out = [ZERO] * (len(p) - 1)
        carry = p[-1]
        for i in range(len(p) - 2, -1, -1):
            out[i] = carry
            carry = p[i] + carry * root
        if carry:
            raise RepresentationError("deflation failed (not a root?)")
        p = out
    return roots, p


@dataclass(eq=False)
class GradedRepresentation:
    """Representation of a graded algebra with E-eigenspace decomposition.

    action       tuple of dim-V square matrices, one per algebra basis element
    subspaces    tuple of basis-column matrices for V_0 ... V_N
    shift        s with V_i = eigenspace of rho(E) for eigenvalue i + s
    """

    algebra: object
    name: str
    action: tuple
    dim: int = field(init=False)
    subspaces: tuple = field(init=False)
    shift: object = field(init=False)
    filtration_length: int = field(init=False)

    def __post_init__(self):
        self.action = tuple(self.action)
        if len(self.action) != self.algebra.dim:
            raise RepresentationError("need one action matrix per basis element")
        self.dim = self.action[0].nrows
        for m in self.action:
            if m.shape != (self.dim, self.dim):
                raise RepresentationError("action matrices must be square, same size")
        self._decompose()

    def _decompose(self):
        rhoE = self.action[self.algebra.grading_element_index]
        mp = minimal_polynomial(rhoE)
        roots, rem = rational_roots(mp)
        if len(rem) > 1:
            raise RepresentationError(
                "grading element has a non-rational eigenvalue")
        eigenspaces = []
        total = 0
        for lam in sorted(roots):
            shifted = rhoE - Mat.identity(self.dim).scale(lam)
            ker = shifted.nullspace()
            if ker.ncols == 0:
                raise RepresentationError("spurious eigenvalue %s" % lam)
            eigenspaces.append((lam, ker))
            total += ker.ncols
        if total != self.dim:
            raise RepresentationError(
                "grading element is not diagonalizable over QQ")
        lams = [lam for lam, _ in eigenspaces]
        self.shift = lams[0]
        # eigenvalues must be s, s+1, ..., s+N with no gaps for the
        # filtration indexing to make sense
        for i, lam in enumerate(lams):
            if lam != self.shift + i:
                raise RepresentationError(
                    "eigenvalues of the grading element are not consecutive: %s"
                    % (lams,))
        self.subspaces = tuple(ker for _, ker in eigenspaces)
        self.filtration_length = len(self.subspaces) - 1

    # -- queries --------------------------------------------------------

    @property
    def N(self):
        return self.filtration_length

    def graded_dims(self):
        return tuple(s.ncols for s in self.subspaces)

    def adapted_basis(self):
        """Column matrix P whose columns run through V_0, V_1, ..., V_N."""
        cols = []
        for s in self.subspaces:
            cols.extend(s.columns())
        return Mat.from_columns(cols, nrows=self.dim)

    def v_index_labels(self):
        """V-index of each adapted-basis column, in order."""
        labels = []
        for i, s in enumerate(self.subspaces):
            labels.extend([i] * s.ncols)
        return tuple(labels)

    def act_matrix(self, element):
        """Matrix of the action of an AlgebraElement, original coordinates."""
        out = Mat.zeros(self.dim, self.dim)
        for c, m in zip(element.coeffs, self.action):
            if c:
                out = out + m.scale(c)
        return out

    def filtration_subspace(self, i):
        """V^i = span of V_j for j >= i; V^{N+1} = 0."""
        if not (0 <= i <= self.N + 1):
            raise RepresentationError("filtration index out of range")
        cols = []
        for j in range(i, self.N + 1):
            cols.extend(self.subspaces[j].columns())
        return Mat.from_columns(cols, nrows=self.dim)


def act(rep, element, vec):
    """rho(element) applied to a vector of V, exact."""
    if element.algebra is not rep.algebra:
        raise RepresentationError("element belongs to a different algebra")
    if len(vec) != rep.dim:
        raise RepresentationError("vector has wrong length")
    out = [ZERO] * rep.dim
    for c, m in zip(element.coeffs, rep.action):
        if c:
            for i, row in enumerate(m.rows):
                s = ZERO
                for a, v in zip(row, vec):
                    if a and v:
                        s += a * v
                if s:
                    out[i] += c * s
    return out


def filtration_subspace(rep, i):
    return rep.filtration_subspace(i)


def standard_representation(algebra):
    """The defining representation: rho = inclusion as m x m matrices."""
    return GradedRepresentation(algebra=algebra, name="standard",
                                action=tuple(algebra.basis))


def adjoint_representation(algebra):
    """rho(b) = ad(b) on g itself; the graded pieces are g_{-1}, g_0, g_1."""
    action = tuple(algebra._ad[i] for i in range(algebra.dim))
    return GradedRepresentation(algebra=algebra, name="adjoint", action=action)


def dual_representation(rep):
    """Contragredient representation rho*(A) = -rho(A)^T."""
    action = tuple(m.transpose().scale(-1) for m in rep.action)
    return GradedRepresentation(algebra=rep.algebra,
                                name="dual-" + rep.name, action=action)


def representation_by_name(algebra, name):
    """Resolve 'standard' | 'adjoint' | 'dual-<name>' selectors."""
    if name.startswith("dual-"):
        return dual_representation(representation_by_name(algebra,
                                                          name[len("dual-"):]))
    if name == "standard":
        return standard_representation(algebra)
    if name == "adjoint":
        return adjoint_representation(algebra)
    raise RepresentationError("no representation named %r" % (name,))


def check_homomorphism(rep):
    """rho([a,b]) = [rho(a), rho(b)] on all basis pairs; failures returned."""
    from .algebra import bracket
    failures = []
    alg = rep.algebra
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            bi = alg.basis_element(i)
            bj = alg.basis_element(j)
            lhs = rep.act_matrix(bracket(alg, bi, bj))
            rhs = (rep.action[i].matmul(rep.action[j])
                   - rep.action[j].matmul(rep.action[i]))
            if lhs != rhs:
                failures.append((i, j))
    return failures


def check_grading_compatibility(rep):
    """rho(A) V_i lies inside V_{i+j} for A of grade j; failures returned."""
    failures = []
    alg = rep.algebra
    P = rep.adapted_basis()
    Pinv = P.inverse()
    labels = rep.v_index_labels()
    for b in range(alg.dim):
        j = alg.grades[b]
        ad_action = Pinv.matmul(rep.action[b]).matmul(P)
        for col in range(rep.dim):
            i = labels[col]
            for row in range(rep.dim):
                if ad_action.rows[row][col] and labels[row] != i + j:
                    failures.append((b, col, row))
    return failures


def representation_to_dict(rep):
    return {
        "schema": SCHEMA_REPRESENTATION,
        "algebra_schema": SCHEMA_ALGEBRA,
        "name": rep.name,
        "dim": rep.dim,
        "shift": str(rep.shift),
        "graded_dims": list(rep.graded_dims()),
        "action": [_mat_to_lists(m) for m in rep.action],
        "subspaces": [_mat_to_lists(s) for s in rep.subspaces],
    }


def representation_from_dict(algebra, doc):
    if doc.get("schema") != SCHEMA_REPRESENTATION:
        raise RepresentationError("unsupported representation schema")
    rep = GradedRepresentation(
        algebra=algebra, name=doc["name"],
        action=tuple(_mat_from_lists(m) for m in doc["action"]))
    if list(rep.graded_dims()) != doc["graded_dims"]:
        raise RepresentationError("stored eigen data disagrees")
    return rep
