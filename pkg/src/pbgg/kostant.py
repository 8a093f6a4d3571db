"""Cochain spaces, the differentials, and the algebraic Hodge theory.

The space of k-cochains is modeled as Lambda^k g_1 tensor V, with the
Killing-dual basis Z^1..Z^n of g_1 indexing the wedge slots and the
adapted (grading-element eigen) basis of V indexing the values.  Via the
dual pairing B(Z^i, X_j) = delta_ij this is the same thing as the space
of alternating k-linear maps on g_{-1} with values in V; the translation
is used once, in the construction of the two differentials, and nowhere
else.

With X_b running through the native g_{-1} basis and Z^a through the dual
g_1 basis, the two differentials act on basis wedges by

    d (Z^S tensor v)   = sum_{b not in S} sign * Z^{S+b} tensor (X_b . v)
    d*(Z^S tensor v)   = sum_{a_i in S} (-1)^i * Z^{S-a_i} tensor (Z^{a_i} . v)

(signs are the usual positional Koszul signs; the second sum is 1-based).
Both square to zero; d lowers the V-index of values by one and d* raises
it by one, so the Laplacian box = d*d + dd* preserves each graded slice
Lambda^k tensor V_i.  All heavy computations (nullspaces, column spaces,
projectors, minimal polynomials) are therefore done slice by slice.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from itertools import combinations

from .linalg import (Mat, QQ, ZERO, ONE, minimal_polynomial,
                     poly_eval_matrix, span_contains, spans_equal,
                     intersect_trivially)

SCHEMA_HOMOLOGY = "pbgg.homology-table/1"


class KostantError(Exception):
    pass


class HodgeError(KostantError):
    pass


class NotInKernelError(KostantError):
    pass


@dataclass(eq=False)
class CochainSpace:
    """Basis-indexed model of Lambda^k g_{-1}* tensor V.

    Basis order: lexicographic increasing k-subsets of {0..n-1}, and for
    each subset the adapted V-basis slots in order.  Each basis element
    carries its V-index and total degree k + V-index.
    """

    degree: int
    n: int
    v_dim: int
    v_labels: tuple

    def __post_init__(self):
        k = self.degree
        if k < 0 or k > self.n:
            self.subsets = ()
        else:
            self.subsets = tuple(combinations(range(self.n), k))
        self.subset_index = {s: i for i, s in enumerate(self.subsets)}
        self.dimension = len(self.subsets) * self.v_dim

    def index(self, subset, slot):
        return self.subset_index[subset] * self.v_dim + slot

    def labels(self):
        """(subset, slot, v_index, total_degree) per basis element."""
        out = []
        for s in self.subsets:
            for t in range(self.v_dim):
                out.append((s, t, self.v_labels[t],
                            self.degree + self.v_labels[t]))
        return out

    def slice_indices(self, i):
        """Ambient indices of the Lambda^k tensor V_i slice."""
        out = []
        for si in range(len(self.subsets)):
            base = si * self.v_dim
            for t in range(self.v_dim):
                if self.v_labels[t] == i:
                    out.append(base + t)
        return tuple(out)


@dataclass(eq=False)
class LinearMap:
    source: CochainSpace
    target: CochainSpace
    mat: Mat

    def __post_init__(self):
        if self.mat.shape != (self.target.dimension, self.source.dimension):
            raise KostantError("matrix shape does not match spaces")

    def apply(self, vec):
        return self.mat.matvec(vec)


@dataclass(eq=False)
class SliceHodge:
    """Hodge data of one graded slice Lambda^k tensor V_i."""

    v_index: int
    ambient: tuple          # ambient indices of the slice
    im_d: Mat               # bases, in slice coordinates (columns)
    harmonic: Mat
    im_dstar: Mat
    proj_im_d: Mat          # projectors, slice coords, along the other two
    proj_harmonic: Mat
    proj_im_dstar: Mat
    harmonic_coords: Mat    # rows: harmonic-basis coordinates of a slice vector


@dataclass(eq=False)
class HodgeDecomposition:
    """im(d) + ker(box) + im(d*) inside one cochain space, with projectors."""

    degree: int
    space: CochainSpace
    slices: dict
    im_d: Mat = field(init=False)
    harmonic: Mat = field(init=False)
    im_dstar: Mat = field(init=False)
    proj_im_d: Mat = field(init=False)
    proj_harmonic: Mat = field(init=False)
    proj_im_dstar: Mat = field(init=False)
    harmonic_slice_ranges: dict = field(init=False)

    def __post_init__(self):
        dim = self.space.dimension
        cols_d, cols_h, cols_ds = [], [], []
        self.proj_im_d = Mat.zeros(dim, dim)
        self.proj_harmonic = Mat.zeros(dim, dim)
        self.proj_im_dstar = Mat.zeros(dim, dim)
        self.harmonic_slice_ranges = {}
        for i in sorted(self.slices):
            sl = self.slices[i]
            amb = sl.ambient
            for basis, cols in ((sl.im_d, cols_d), (sl.harmonic, cols_h),
                                (sl.im_dstar, cols_ds)):
                for c in range(basis.ncols):
                    v = [ZERO] * dim
                    for a, r in enumerate(amb):
                        v[r] = basis.rows[a][c]
                    cols.append(v)
            start = len(cols_h) - sl.harmonic.ncols
            self.harmonic_slice_ranges[i] = (start, len(cols_h))
            for proj, target in ((sl.proj_im_d, self.proj_im_d),
                                 (sl.proj_harmonic, self.proj_harmonic),
                                 (sl.proj_im_dstar, self.proj_im_dstar)):
                for a, ra in enumerate(amb):
                    prow = proj.rows[a]
                    trow = target.rows[ra]
                    for b, rb in enumerate(amb):
                        if prow[b]:
                            trow[rb] = prow[b]
        self.im_d = Mat.from_columns(cols_d, nrows=dim)
        self.harmonic = Mat.from_columns(cols_h, nrows=dim)
        self.im_dstar = Mat.from_columns(cols_ds, nrows=dim)

    def dims(self):
        return (self.im_d.ncols, self.harmonic.ncols, self.im_dstar.ncols)

    def harmonic_coordinate_matrix(self):
        """Rows map an ambient vector to its ker(box)-coordinates."""
        dim = self.space.dimension
        rows = []
        for i in sorted(self.slices):
            sl = self.slices[i]
            for r in range(sl.harmonic_coords.nrows):
                row = [ZERO] * dim
                for b, rb in enumerate(sl.ambient):
                    row[rb] = sl.harmonic_coords.rows[r][b]
                rows.append(row)
        return Mat(rows, _copy=False, ncols=dim)


@dataclass(eq=False)
class InverseLaplacianPoly:
    """Universal polynomial inverting box on im(d*) in one graded slice.

    coeffs is ascending; the zero polynomial (empty coeffs) is returned,
    flagged, when the slice meets im(d*) trivially.
    """

    degree_k: int
    v_index: int
    coeffs: tuple
    slice_dim: int
    exists: bool

    @property
    def poly_degree(self):
        return len(self.coeffs) - 1 if self.coeffs else None


class CochainComplex:
    """All chain-level data for one (algebra, representation) pair, cached.

    Pure and immutable after construction; per-degree results are computed
    once.
    """

    def __init__(self, algebra, rep):
        if rep.algebra is not algebra:
            raise KostantError("representation belongs to a different algebra")
        self.algebra = algebra
        self.rep = rep
        self.n = algebra.n
        P = rep.adapted_basis()
        Pinv = P.inverse()
        xs, zs = algebra.dual_basis_pair()
        self.act_x = tuple(Pinv.matmul(rep.act_matrix(x)).matmul(P)
                           for x in xs)
        self.act_z = tuple(Pinv.matmul(rep.act_matrix(z)).matmul(P)
                           for z in zs)
        self.v_labels = rep.v_index_labels()
        self.v_dim = rep.dim
        self.N = rep.N
        self._spaces = {}
        self._diff = {}
        self._codiff = {}
        self._lap = {}
        self._hodge = {}
        self._invpoly = {}

    # -- spaces ----------------------------------------------------------

    def space(self, k):
        if k not in self._spaces:
            self._spaces[k] = CochainSpace(degree=k, n=self.n,
                                           v_dim=self.v_dim,
                                           v_labels=self.v_labels)
        return self._spaces[k]

    def _check_degree(self, k):
        if not (0 <= k <= self.n):
            raise KostantError("degree %d out of range 0..%d" % (k, self.n))

    # -- differentials ----------------------------------------------------

    def differential(self, k):
        """d_k : Lambda^k -> Lambda^{k+1}; the zero map for k = n."""
        self._check_degree(k)
        if k not in self._diff:
            src = self.space(k)
            tgt = self.space(k + 1)
            mat = Mat.zeros(tgt.dimension, src.dimension)
            vd = self.v_dim
            for si, S in enumerate(src.subsets):
                sset = set(S)
                for b in range(self.n):
                    if b in sset:
                        continue
                    T = tuple(sorted(S + (b,)))
                    pos = T.index(b)
                    sign = -1 if pos % 2 else 1
                    act = self.act_x[b]
                    tbase = tgt.subset_index[T] * vd
                    sbase = si * vd
                    for t in range(vd):
                        col = sbase + t
                        for u in range(vd):
                            a = act.rows[u][t]
                            if a:
                                mat.rows[tbase + u][col] += sign * a
            self._diff[k] = LinearMap(source=src, target=tgt, mat=mat)
        return self._diff[k]

    def codifferential(self, k):
        """d*_k : Lambda^k -> Lambda^{k-1}; the zero map for k = 0."""
        self._check_degree(k)
        if k not in self._codiff:
            src = self.space(k)
            tgt = self.space(k - 1)
            mat = Mat.zeros(tgt.dimension, src.dimension)
            vd = self.v_dim
            for si, S in enumerate(src.subsets):
                for idx, a in enumerate(S):
                    sign = -1 if (idx + 1) % 2 else 1
                    T = S[:idx] + S[idx + 1:]
                    act = self.act_z[a]
                    tbase = tgt.subset_index[T] * vd
                    sbase = si * vd
                    for t in range(vd):
                        col = sbase + t
                        for u in range(vd):
                            x = act.rows[u][t]
                            if x:
                                mat.rows[tbase + u][col] += sign * x
            self._codiff[k] = LinearMap(source=src, target=tgt, mat=mat)
        return self._codiff[k]

    def laplacian(self, k):
        """box_k = d*_{k+1} d_k + d_{k-1} d*_k, exact."""
        self._check_degree(k)
        if k not in self._lap:
            src = self.space(k)
            mat = Mat.zeros(src.dimension, src.dimension)
            if k < self.n:
                mat = mat + self.codifferential_mat(k + 1).matmul(
                    self.differential(k).mat)
            if k > 0:
                mat = mat + self.differential_mat(k - 1).matmul(
                    self.codifferential(k).mat)
            self._lap[k] = LinearMap(source=src, target=src, mat=mat)
        return self._lap[k]

    def differential_mat(self, k):
        return self.differential(k).mat

    def codifferential_mat(self, k):
        return self.codifferential(k).mat

    # -- Hodge theory ------------------------------------------------------

    def _slice_block(self, mat, row_idx, col_idx):
        return mat.submatrix(row_idx, col_idx)

    def hodge(self, k):
        self._check_degree(k)
        if k in self._hodge:
            return self._hodge[k]
        space = self.space(k)
        box = self.laplacian(k).mat
        slices = {}
        for i in range(self.N + 1):
            amb = space.slice_indices(i)
            if not amb:
                continue
            sdim = len(amb)
            # im(d) in this slice comes from the (k-1, i+1) slice
            if k >= 1 and i + 1 <= self.N:
                src = self.space(k - 1).slice_indices(i + 1)
            else:
                src = ()
            if src:
                blk = self._slice_block(self.differential_mat(k - 1), amb, src)
                im_d = blk.column_space()
            else:
                im_d = Mat.zeros(sdim, 0)
            # im(d*) comes from the (k+1, i-1) slice
            if k <= self.n - 1 and i - 1 >= 0:
                src = self.space(k + 1).slice_indices(i - 1)
            else:
                src = ()
            if src:
                blk = self._slice_block(self.codifferential_mat(k + 1), amb, src)
                im_dstar = blk.column_space()
            else:
                im_dstar = Mat.zeros(sdim, 0)
            harm = self._slice_block(box, amb, amb).nullspace()

            if im_d.ncols + harm.ncols + im_dstar.ncols != sdim:
                raise HodgeError("slice (k=%d, i=%d): dimensions %d+%d+%d != %d"
                                 % (k, i, im_d.ncols, harm.ncols,
                                    im_dstar.ncols, sdim))
            # ker(d) restricted to the slice equals im(d) + ker(box)
            if k < self.n:
                tgt = self.space(k + 1).slice_indices(i - 1)
                if tgt:
                    dblk = self._slice_block(self.differential_mat(k), tgt, amb)
                    ker_d = dblk.nullspace()
                else:
                    ker_d = Mat.identity(sdim)
            else:
                ker_d = Mat.identity(sdim)
            if not spans_equal(ker_d,
                               im_d.hstack(harm) if im_d.ncols or harm.ncols
                               else Mat.zeros(sdim, 0)):
                raise HodgeError("slice (k=%d, i=%d): ker d != im d + ker box"
                                 % (k, i))
            # ker(d*) restricted to the slice equals ker(box) + im(d*)
            if k > 0:
                tgt = self.space(k - 1).slice_indices(i + 1)
                if tgt:
                    dsblk = self._slice_block(self.codifferential_mat(k),
                                              tgt, amb)
                    ker_ds = dsblk.nullspace()
                else:
                    ker_ds = Mat.identity(sdim)
            else:
                ker_ds = Mat.identity(sdim)
            if not spans_equal(ker_ds,
                               harm.hstack(im_dstar) if harm.ncols or im_dstar.ncols
                               else Mat.zeros(sdim, 0)):
                raise HodgeError("slice (k=%d, i=%d): ker d* != ker box + im d*"
                                 % (k, i))

            P = im_d.hstack(harm).hstack(im_dstar)
            Pinv = P.inverse()
            d_dim, h_dim, ds_dim = im_d.ncols, harm.ncols, im_dstar.ncols
            rows_d = Mat(Pinv.rows[:d_dim], ncols=sdim)
            rows_h = Mat(Pinv.rows[d_dim:d_dim + h_dim], ncols=sdim)
            rows_ds = Mat(Pinv.rows[d_dim + h_dim:], ncols=sdim)
            slices[i] = SliceHodge(
                v_index=i, ambient=amb,
                im_d=im_d, harmonic=harm, im_dstar=im_dstar,
                proj_im_d=im_d.matmul(rows_d),
                proj_harmonic=harm.matmul(rows_h),
                proj_im_dstar=im_dstar.matmul(rows_ds),
                harmonic_coords=rows_h)
        dec = HodgeDecomposition(degree=k, space=space, slices=slices)
        if sum(dec.dims()) != space.dimension:
            raise HodgeError("Hodge dimensions do not sum to the space")
        self._hodge[k] = dec
        return dec

    def homology_dimensions(self):
        """dim H_k for k = 0..n, cross-checked three ways."""
        dims = []
        for k in range(self.n + 1):
            h = self.hodge(k).harmonic.ncols
            dim_k = self.space(k).dimension
            rank_d_k = self.differential_mat(k).rank() if k < self.n else 0
            rank_d_km1 = self.differential_mat(k - 1).rank() if k > 0 else 0
            rank_ds_k = self.codifferential_mat(k).rank() if k > 0 else 0
            rank_ds_kp1 = (self.codifferential_mat(k + 1).rank()
                           if k < self.n else 0)
            via_d = (dim_k - rank_d_k) - rank_d_km1
            via_ds = (dim_k - rank_ds_k) - rank_ds_kp1
            if not (h == via_d == via_ds):
                raise KostantError(
                    "homology cross-check failed at k=%d: ker box %d, "
                    "d-route %d, d*-route %d" % (k, h, via_d, via_ds))
            dims.append(h)
        return tuple(dims)

    def harmonic_projection(self, k):
        """Matrix sending a ker(d*) vector to its harmonic-basis coordinates."""
        return self.hodge(k).harmonic_coordinate_matrix()

    def project_to_harmonic(self, k, vec):
        """Harmonic coordinates of vec; errors if vec is not in ker(d*)."""
        if any(self.codifferential_mat(k).matvec(vec)):
            raise NotInKernelError("vector is not in ker(d*)")
        return self.harmonic_projection(k).matvec(vec)

    def inverse_laplacian_polynomial(self, k, i):
        self._check_degree(k)
        if not (0 <= i <= self.N):
            raise KostantError("V-index %d out of range 0..%d" % (i, self.N))
        if (k, i) in self._invpoly:
            return self._invpoly[(k, i)]
        hodge = self.hodge(k)
        sl = hodge.slices.get(i)
        if sl is None or sl.im_dstar.ncols == 0:
            out = InverseLaplacianPoly(degree_k=k, v_index=i, coeffs=(),
                                       slice_dim=0, exists=False)
            self._invpoly[(k, i)] = out
            return out
        B = sl.im_dstar
        amb = sl.ambient
        box_slice = self.laplacian(k).mat.submatrix(amb, amb)
        M = B.solve(box_slice.matmul(B))
        mu = minimal_polynomial(M)
        c0 = mu[0]
        if not c0:
            raise KostantError(
                "box is singular on im(d*) at (k=%d, i=%d)" % (k, i))
        coeffs = tuple(-mu[j] / c0 for j in range(1, len(mu)))
        out = InverseLaplacianPoly(degree_k=k, v_index=i, coeffs=coeffs,
                                   slice_dim=B.ncols, exists=True)
        self._invpoly[(k, i)] = out
        return out


# -- module-level cache and the spec-facing operations -------------------

_complex_cache = weakref.WeakKeyDictionary()


def get_complex(algebra, rep):
    if rep not in _complex_cache:
        _complex_cache[rep] = CochainComplex(algebra, rep)
    return _complex_cache[rep]


def differential_partial(algebra, rep, k):
    return get_complex(algebra, rep).differential(k)


def codifferential(algebra, rep, k):
    return get_complex(algebra, rep).codifferential(k)


def kostant_laplacian(algebra, rep, k):
    return get_complex(algebra, rep).laplacian(k)


def hodge_decomposition(algebra, rep, k):
    return get_complex(algebra, rep).hodge(k)


def homology_dimensions(algebra, rep):
    return get_complex(algebra, rep).homology_dimensions()


def harmonic_projection(algebra, rep, k):
    return get_complex(algebra, rep).harmonic_projection(k)


def inverse_laplacian_polynomial(algebra, rep, k, i):
    return get_complex(algebra, rep).inverse_laplacian_polynomial(k, i)


def codifferential_by_dual_formula(algebra, rep, k):
    """d* built the other way: by contracting the first slot with the
    dual pair (X_i, Z^i) on the alternating-map picture, then translating
    back through the determinant identification.  Used as a cross-oracle
    against the wedge-basis construction; the two must agree entrywise.

    On an alternating map phi, the contraction formula reads

        (d* phi)(Y_2,...,Y_k) = -sum_i Z^i . phi(X_i, Y_2,...,Y_k)

    (the sign is what the determinant identification of wedges with
    alternating maps produces; kernels and images do not depend on it).
    """
    cpx = get_complex(algebra, rep)
    src = cpx.space(k)
    tgt = cpx.space(k - 1)
    mat = Mat.zeros(tgt.dimension, src.dimension)
    vd = cpx.v_dim
    if k == 0:
        return LinearMap(source=src, target=tgt, mat=mat)
    for si, S in enumerate(src.subsets):
        sbase = si * vd
        # phi = Z^S tensor v as an alternating map, evaluated on
        # (X_a, X_{T}) for each (k-1)-subset T: expand the determinant
        # along its first column.
        for idx, a in enumerate(S):
            T = S[:idx] + S[idx + 1:]
            sign = -1 if idx % 2 else 1          # cofactor sign (-1)^{idx}
            act = cpx.act_z[a]
            tbase = tgt.subset_index[T] * vd
            for t in range(vd):
                col = sbase + t
                for u in range(vd):
                    x = act.rows[u][t]
                    if x:
                        mat.rows[tbase + u][col] += -sign * x
    return LinearMap(source=src, target=tgt, mat=mat)
