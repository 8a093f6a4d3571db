"""Torsion/curvature normalization: the fiberwise linear algebra.

These are the exact solvable cores of the canonical-connection
construction: removing the im(d)-part of a torsion candidate so the rest
lies in ker(d*), and the unique g_1-valued correction that normalizes a
g_0-valued curvature candidate.  Everything happens inside the adjoint
cochain complex, where the value grades g_{-1}, g_0, g_1 are the graded
slices V_0, V_1, V_2.

The rigidity facts that make Step 4 solvable are exposed as an explicit
report: the kernel of d on maps g_{-1} -> g_0 is exactly { ad(Z) : Z in
g_1 }, and d is injective on maps g_{-1} -> g_1.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from itertools import combinations

from .linalg import Mat, ZERO, spans_equal
from .algebra import bracket
from .representation import adjoint_representation
from .kostant import CochainComplex


class NormalizationError(Exception):
    pass


_adjoint_cache = weakref.WeakKeyDictionary()


def adjoint_complex(algebra):
    """The cochain complex of the adjoint representation, cached per algebra."""
    if algebra not in _adjoint_cache:
        rep = adjoint_representation(algebra)
        _adjoint_cache[algebra] = CochainComplex(algebra, rep)
    return _adjoint_cache[algebra]


@dataclass(eq=False)
class FiberMap:
    """Element of L(Lambda^k g_{-1}, g_j) over the fixed bases.

    mat has one row per lexicographic k-subset of g_{-1} indices and one
    column per basis element of the grade-j block of g.
    """

    algebra: object
    form_degree: int
    value_grade: int
    mat: Mat

    def __post_init__(self):
        n = self.algebra.n
        nsub = len(list(combinations(range(n), self.form_degree)))
        ncols = len(self.algebra.grade_indices(self.value_grade))
        if self.mat.shape != (nsub, ncols):
            raise NormalizationError(
                "expected shape (%d, %d), got %r"
                % (nsub, ncols, self.mat.shape))

    @property
    def v_index(self):
        return self.value_grade + 1

    def is_zero(self):
        return self.mat.is_zero()

    def __add__(self, other):
        self._compat(other)
        return FiberMap(self.algebra, self.form_degree, self.value_grade,
                        self.mat + other.mat)

    def __sub__(self, other):
        self._compat(other)
        return FiberMap(self.algebra, self.form_degree, self.value_grade,
                        self.mat - other.mat)

    def _compat(self, other):
        if (other.algebra is not self.algebra
                or other.form_degree != self.form_degree
                or other.value_grade != self.value_grade):
            raise NormalizationError("incompatible fiber maps")

    # -- conversion to/from adjoint cochain slice coordinates -----------

    def to_slice_vector(self, cpx):
        space = cpx.space(self.form_degree)
        amb = space.slice_indices(self.v_index)
        grade_idx = self.algebra.grade_indices(self.value_grade)
        dim_g = self.algebra.dim
        vd = cpx.v_dim
        vec = [ZERO] * len(amb)
        pos = {a: p for p, a in enumerate(amb)}
        P = cpx.rep.adapted_basis()
        Pinv = P.inverse()
        for si in range(len(space.subsets)):
            raw = [ZERO] * dim_g
            for c, gi in enumerate(grade_idx):
                raw[gi] = self.mat.rows[si][c]
            adapted = Pinv.matvec(raw)
            base = si * vd
            for t in range(vd):
                if adapted[t]:
                    vec[pos[base + t]] = adapted[t]
        return vec

    @classmethod
    def from_slice_vector(cls, algebra, cpx, k, value_grade, vec):
        space = cpx.space(k)
        amb = space.slice_indices(value_grade + 1)
        if len(vec) != len(amb):
            raise NormalizationError("slice vector has wrong length")
        grade_idx = algebra.grade_indices(value_grade)
        col_of = {gi: c for c, gi in enumerate(grade_idx)}
        vd = cpx.v_dim
        P = cpx.rep.adapted_basis()
        nsub = len(space.subsets)
        mat = Mat.zeros(nsub, len(grade_idx))
        adapted_full = {}
        for p, a in enumerate(amb):
            si, t = divmod(a, vd)
            adapted_full.setdefault(si, [ZERO] * vd)[t] = vec[p]
        for si, adapted in adapted_full.items():
            raw = P.matvec(adapted)
            for gi, x in enumerate(raw):
                if x:
                    if gi not in col_of:
                        raise NormalizationError(
                            "slice vector leaks outside grade %d"
                            % value_grade)
                    mat.rows[si][col_of[gi]] = x
        return cls(algebra, k, value_grade, mat)


class TorsionCandidate(FiberMap):
    """Element of L(Lambda^2 g_{-1}, g_{-1})."""

    def __init__(self, algebra, mat):
        super().__init__(algebra, 2, -1, mat)


class CurvatureG0Candidate(FiberMap):
    """Element of L(Lambda^2 g_{-1}, g_0)."""

    def __init__(self, algebra, mat):
        super().__init__(algebra, 2, 0, mat)


def _slice_block(cpx, mat, k_target, i_target, k_source, i_source):
    rows = cpx.space(k_target).slice_indices(i_target)
    cols = cpx.space(k_source).slice_indices(i_source)
    return mat.submatrix(rows, cols)


def normalize_torsion(algebra, tau):
    """Split off the im(d)-part of a torsion candidate.

    Returns (psi, tau_normal) with psi in L(g_{-1}, g_0) such that
    d(psi) is exactly the im(d)-component of tau and
    tau_normal = tau - d(psi) lies in ker(d*).

    psi is produced by a fixed left inverse of d on its image: the
    rref-based particular solution with free variables pinned to zero
    under lexicographic pivot order, so the result is deterministic and
    linear in tau.  Applying the operation twice is the identity on the
    second pass.
    """
    if not isinstance(tau, FiberMap) or (tau.form_degree, tau.value_grade) != (2, -1):
        raise NormalizationError("expected a torsion candidate")
    cpx = adjoint_complex(algebra)
    v = tau.to_slice_vector(cpx)
    hodge = cpx.hodge(2)
    sl = hodge.slices[0]
    tau_im = sl.proj_im_d.matvec(v)
    D = _slice_block(cpx, cpx.differential_mat(1), 2, 0, 1, 1)
    psi_vec = D.solve_vec(tau_im)
    tau_normal_vec = [a - b for a, b in zip(v, D.matvec(psi_vec))]
    dstar = _slice_block(cpx, cpx.codifferential_mat(2), 1, 1, 2, 0)
    if any(dstar.matvec(tau_normal_vec)):
        raise NormalizationError("normalized torsion escaped ker(d*)")
    psi = FiberMap.from_slice_vector(algebra, cpx, 1, 0, psi_vec)
    tau_normal = TorsionCandidate(
        algebra,
        FiberMap.from_slice_vector(algebra, cpx, 2, -1, tau_normal_vec).mat)
    return psi, tau_normal


def solve_unique_extension(algebra, rho):
    """The unique psi in L(g_{-1}, g_1) with d*(rho + d psi) = 0."""
    if not isinstance(rho, FiberMap) or (rho.form_degree, rho.value_grade) != (2, 0):
        raise NormalizationError("expected a g_0-valued curvature candidate")
    cpx = adjoint_complex(algebra)
    v = rho.to_slice_vector(cpx)
    D = _slice_block(cpx, cpx.differential_mat(1), 2, 1, 1, 2)
    Dstar = _slice_block(cpx, cpx.codifferential_mat(2), 1, 2, 2, 1)
    A = Dstar.matmul(D)
    if A.nullspace().ncols:
        raise NormalizationError(
            "d* d is singular on L(g_{-1}, g_1); contradicts rigidity")
    rhs = [-x for x in Dstar.matvec(v)]
    psi_vec = A.solve_vec(rhs)
    residual = Dstar.matvec([a + b for a, b in zip(v, D.matvec(psi_vec))])
    if any(residual):
        raise NormalizationError("extension residual is nonzero")
    return FiberMap.from_slice_vector(algebra, cpx, 1, 1, psi_vec)


@dataclass(eq=False)
class RigidityReport:
    """Exact verification of the prolongation rigidity facts."""

    algebra_family: str
    algebra_params: tuple
    dim_ker_d_on_g0maps: int
    dim_g1: int
    kernel_equals_ad_g1: bool
    d_injective_on_g1maps: bool
    rank_d_on_g1maps: int
    expected_rank: int
    passed: bool
    witness: object = None


def check_prolongation_rigidity(algebra):
    """ker(d : L(g_{-1},g_0) -> ...) = ad(g_1), and d injective on L(g_{-1},g_1)."""
    cpx = adjoint_complex(algebra)
    n = algebra.n
    g1 = algebra.grade_indices(1)

    D0 = _slice_block(cpx, cpx.differential_mat(1), 2, 0, 1, 1)
    ker = D0.nullspace()

    ad_cols = []
    for zi in g1:
        Z = algebra.basis_element(zi)
        g0_idx = algebra.grade_indices(0)
        col_of = {gi: c for c, gi in enumerate(g0_idx)}
        mat = Mat.zeros(n, len(g0_idx))
        for j, xj in enumerate(algebra.grade_indices(-1)):
            X = algebra.basis_element(xj)
            val = bracket(algebra, Z, X)
            for gi, x in enumerate(val.coeffs):
                if x:
                    if gi not in col_of:
                        raise NormalizationError("[g_1, g_-1] escaped g_0")
                    mat.rows[j][col_of[gi]] = x
        fm = FiberMap(algebra, 1, 0, mat)
        ad_cols.append(fm.to_slice_vector(cpx))
    ad_basis = Mat.from_columns(ad_cols, nrows=ker.nrows)

    kernel_matches = spans_equal(ker, ad_basis)

    D1 = _slice_block(cpx, cpx.differential_mat(1), 2, 1, 1, 2)
    rank = D1.rank()
    expected = n * len(g1)
    injective = rank == expected

    passed = kernel_matches and injective and ker.ncols == len(g1)
    witness = None
    if not passed:
        witness = {"kernel_basis_columns": ker.columns()}
    return RigidityReport(
        algebra_family=algebra.family,
        algebra_params=tuple(algebra.params),
        dim_ker_d_on_g0maps=ker.ncols,
        dim_g1=len(g1),
        kernel_equals_ad_g1=kernel_matches,
        d_injective_on_g1maps=injective,
        rank_d_on_g1maps=rank,
        expected_rank=expected,
        passed=passed,
        witness=witness)


@dataclass(eq=False)
class NormalizedFiber:
    psi_torsion: FiberMap
    tau_normal: TorsionCandidate
    psi_extension: FiberMap


def normalized_connection_fiber(algebra, tau_raw):
    """One-call bundle of the two normalization steps on a single fiber.

    The extension step is applied to the zero g_0-curvature placeholder,
    so its output is the zero map; the torsion step is the real content.
    """
    psi, tau_normal = normalize_torsion(algebra, tau_raw)
    zero_rho = CurvatureG0Candidate(
        algebra, Mat.zeros(len(list(combinations(range(algebra.n), 2))),
                           len(algebra.grade_indices(0))))
    psi_ext = solve_unique_extension(algebra, zero_rho)
    return NormalizedFiber(psi_torsion=psi, tau_normal=tau_normal,
                           psi_extension=psi_ext)
