"""Dense complex matrix subspaces, generated *-algebras, and span-defined *-maps.

Everything is a concrete subspace of an ambient N x N complex matrix space,
carried as a basis that is orthonormal for the Frobenius inner product
<A, B> = tr(A^* B).  Maps between two such algebras are defined on spanning
pairs, solved by least squares, and carry their own numerical certificates
(consistency and homomorphism residuals, rank).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Rank cutoff: singular values below RANK_RTOL x (top singular value) are zero.
RANK_RTOL = 1e-8
# Orthonormality / idempotence tolerance for constructed bases.
ORTHO_TOL = 1e-12
# Default certification tolerance for residuals.
DEFAULT_TOL = 1e-9

# All constructions involve small integers and roots of unity, so double
# precision leaves several orders of headroom over these cutoffs.

_CHUNK_ELEMENTS = 2_000_000  # complex entries per block in chunked passes


class LinalgError(ValueError):
    """Raised for structural failures: dimension mismatches, rank deficiency."""


def _as_matrix_stack(matrices) -> np.ndarray:
    """Stack a list of square matrices into a (k, N, N) complex array."""
    if len(matrices) == 0:
        raise LinalgError("empty matrix list")
    mats = [np.asarray(m, dtype=complex) for m in matrices]
    n = mats[0].shape[0]
    for m in mats:
        if m.shape != (n, n):
            raise LinalgError(
                f"ambient dimension mismatch: {m.shape} vs ({n}, {n})")
    return np.stack(mats)


class Subspace:
    """A linear subspace of N x N complex matrices with an orthonormal basis.

    basis is stored as a (dim, N, N) array; basis_flat as its (dim, N*N)
    row-major flattening.  Identity of subspaces is by orthogonal projector,
    not by basis.
    """

    def __init__(self, ambient_dim: int, basis: np.ndarray):
        basis = np.asarray(basis, dtype=complex).reshape(-1, ambient_dim, ambient_dim)
        self.ambient_dim = int(ambient_dim)
        self.basis = basis
        self.basis_flat = basis.reshape(len(basis), ambient_dim * ambient_dim)
        self._flat_conj_t = None
        if len(basis):
            gram = self.basis_flat @ self.flat_conj_t
            defect = np.abs(gram - np.eye(len(basis))).max()
            if defect > 1e-10:
                raise LinalgError(f"basis not orthonormal (Gram defect {defect:.2e})")

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def flat_conj_t(self) -> np.ndarray:
        if self._flat_conj_t is None:
            self._flat_conj_t = np.ascontiguousarray(self.basis_flat.conj().T)
        return self._flat_conj_t

    def coords(self, matrix: np.ndarray) -> np.ndarray:
        """Coefficients of the orthogonal projection of matrix onto the span."""
        return np.asarray(matrix, complex).reshape(-1) @ self.flat_conj_t

    def coords_many(self, matrices: np.ndarray) -> np.ndarray:
        flat = np.asarray(matrices, complex).reshape(len(matrices), -1)
        return flat @ self.flat_conj_t

    def from_coords(self, coeffs: np.ndarray) -> np.ndarray:
        return (np.asarray(coeffs, complex) @ self.basis_flat).reshape(
            self.ambient_dim, self.ambient_dim)

    def project(self, matrix: np.ndarray) -> np.ndarray:
        return self.from_coords(self.coords(matrix))

    def defect(self, matrix: np.ndarray) -> float:
        """Frobenius distance from matrix to the subspace."""
        return float(np.linalg.norm(matrix - self.project(matrix)))

    def contains(self, matrix: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
        return self.defect(matrix) <= tol

    def projector_distance(self, other: "Subspace") -> float:
        """Frobenius distance of the two orthogonal projectors.

        ||P - Q||_F^2 = sum_i ||(1-Q) a_i||^2 + sum_j ||(1-P) b_j||^2 over the
        two orthonormal bases; computing it from projection residuals avoids
        both the N^2 x N^2 projectors and cancellation error.
        """
        if self.ambient_dim != other.ambient_dim:
            raise LinalgError("projector comparison across different ambients")

        def resid_sq(rows: np.ndarray, onto: "Subspace") -> float:
            if onto.dim == 0:
                return float(np.sum(np.abs(rows) ** 2))
            resid = rows - (rows @ onto.flat_conj_t) @ onto.basis_flat
            return float(np.sum(np.abs(resid) ** 2))

        val = resid_sq(self.basis_flat, other) + resid_sq(other.basis_flat, self)
        return float(np.sqrt(val))

    def equals(self, other: "Subspace", tol: float = DEFAULT_TOL) -> bool:
        return self.dim == other.dim and self.projector_distance(other) <= tol

    def __repr__(self):
        return f"Subspace(ambient={self.ambient_dim}, dim={self.dim})"


def orthonormalize(vectors, ambient_dim: int | None = None) -> Subspace:
    """Span of the given matrices with an orthonormal basis (SVD rank).

    Rank = number of singular values above RANK_RTOL times the largest.
    Already-orthonormal inputs are kept verbatim.  An empty input with an
    explicit ambient_dim yields the zero subspace.
    """
    if len(vectors) == 0:
        if ambient_dim is None:
            raise LinalgError("empty input needs an explicit ambient_dim")
        return Subspace(ambient_dim, np.zeros((0, ambient_dim, ambient_dim)))
    stack = _as_matrix_stack(vectors)
    n = stack.shape[1]
    flat = stack.reshape(len(stack), -1)
    gram = flat @ flat.conj().T
    if np.abs(gram - np.eye(len(flat))).max() <= ORTHO_TOL:
        return Subspace(n, stack)
    _, svals, vh = np.linalg.svd(flat, full_matrices=False)
    if svals.size == 0 or svals[0] == 0.0:
        return Subspace(n, np.zeros((0, n, n)))
    rank = int(np.sum(svals > RANK_RTOL * svals[0]))
    return Subspace(n, vh[:rank].reshape(rank, n, n))


def _extend_basis(space: Subspace, new_flat: np.ndarray) -> Subspace:
    """Extend an orthonormal basis by the span of residual row vectors."""
    if len(new_flat) == 0:
        return space
    _, svals, vh = np.linalg.svd(new_flat, full_matrices=False)
    rank = int(np.sum(svals > RANK_RTOL * max(1.0, float(svals[0]))))
    if rank == 0:
        return space
    extra = vh[:rank]
    if space.dim:
        # One re-projection pass for numerical orthogonality to the old basis.
        extra = extra - (extra @ space.flat_conj_t) @ space.basis_flat
        extra /= np.linalg.norm(extra, axis=1)[:, None]
    merged = np.concatenate([space.basis_flat, extra])
    return Subspace(space.ambient_dim,
                    merged.reshape(-1, space.ambient_dim, space.ambient_dim))


def _residual_rows(space: Subspace, stack_flat: np.ndarray) -> np.ndarray:
    """Rows of stack_flat with a component outside the current span."""
    if space.dim:
        stack_flat = stack_flat - (stack_flat @ space.flat_conj_t) \
            @ space.basis_flat
    norms = np.linalg.norm(stack_flat, axis=1)
    return stack_flat[norms > RANK_RTOL]


def _pairwise_products(space: Subspace):
    """All basis_i @ basis_j products, chunked.

    Returns (coords, defect, new_rows): the (dim, dim, dim) projection
    coefficients, the worst off-span Frobenius norm, and any residual rows
    pointing outside the span.  Products are evaluated as one big GEMM per
    chunk — stacking the left factors vertically and the right factors
    horizontally — so the work runs at BLAS speed.
    """
    d, n = space.dim, space.ambient_dim
    coords = np.empty((d, d, d), dtype=complex)
    defect = 0.0
    new_rows = []
    if d == 0:
        return coords, defect, np.zeros((0, n * n))
    # right factors side by side: H[:, j*n + c] = basis[j][:, c]
    right = np.ascontiguousarray(space.basis.transpose(1, 0, 2)).reshape(
        n, d * n)
    rows_per_chunk = max(1, min(d, _CHUNK_ELEMENTS // max(d * n * n, 1)))
    for start in range(0, d, rows_per_chunk):
        left = space.basis[start:start + rows_per_chunk]
        k = len(left)
        # (k*n, n) @ (n, d*n) -> all products, block (i, j) at [i*n:, j*n:]
        out = left.reshape(k * n, n) @ right
        flat = np.ascontiguousarray(
            out.reshape(k, n, d, n).transpose(0, 2, 1, 3)).reshape(
            k * d, n * n)
        cc = flat @ space.flat_conj_t
        resid = flat - cc @ space.basis_flat
        norms = np.linalg.norm(resid, axis=1)
        if norms.size:
            defect = max(defect, float(norms.max()))
            mask = norms > RANK_RTOL
            if mask.any():
                new_rows.append(resid[mask])
        coords[start:start + k] = cc.reshape(k, d, d)
    rows = np.concatenate(new_rows) if new_rows else np.zeros((0, n * n))
    return coords, defect, rows


@dataclass
class CStarRealization:
    """A concrete matrix *-algebra: a product/adjoint-closed Subspace.

    When the algebra has a two-sided unit inside the carrier it is recorded;
    the unit need not be the ambient identity.
    """

    carrier: Subspace
    is_unital: bool
    unit: np.ndarray | None
    _product_coords: np.ndarray | None = field(default=None, repr=False)
    _adjoint_coords: np.ndarray | None = field(default=None, repr=False)
    _closure_defect: float | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.carrier.dim

    @property
    def ambient_dim(self) -> int:
        return self.carrier.ambient_dim

    def basis_products_coords(self) -> np.ndarray:
        """(dim, dim, dim) structure constants: coords of basis_i @ basis_j."""
        if self._product_coords is None:
            coords, defect, _ = _pairwise_products(self.carrier)
            self._product_coords = coords
            self._closure_defect = max(self._closure_defect or 0.0, defect,
                                       self._adjoint_defect())
        return self._product_coords

    def adjoint_coords(self) -> np.ndarray:
        """(dim, dim) matrix: coords of basis_i^* in the carrier."""
        if self._adjoint_coords is None:
            adj = self.carrier.basis.conj().transpose(0, 2, 1)
            self._adjoint_coords = self.carrier.coords_many(adj)
        return self._adjoint_coords

    def _adjoint_defect(self) -> float:
        if self.dim == 0:
            return 0.0
        adj = self.carrier.basis.conj().transpose(0, 2, 1).reshape(self.dim, -1)
        recon = self.adjoint_coords() @ self.carrier.basis_flat
        return float(np.linalg.norm(adj - recon, axis=1).max())

    def closure_defect(self) -> float:
        """Worst Frobenius defect of basis products and adjoints vs the carrier."""
        if self._closure_defect is None:
            self.basis_products_coords()
        return self._closure_defect

    def center_dimension(self) -> int:
        """Dimension of the center, via the commutant equations x b_i = b_i x."""
        d = self.dim
        if d == 0:
            return 0
        c = self.basis_products_coords()
        # x = sum_j x_j b_j is central iff sum_j x_j (c[j,i,:] - c[i,j,:]) = 0
        # for every i; the center is the null space of that linear system.
        op = (c - c.transpose(1, 0, 2)).reshape(d, d * d)
        svals = np.linalg.svd(op, compute_uv=False)
        top = max(float(svals[0]), 1.0) if svals.size else 1.0
        return d - int(np.sum(svals > RANK_RTOL * top))


def _solve_unit(real: CStarRealization) -> np.ndarray | None:
    """Two-sided unit of a closed matrix algebra, if one exists in the span."""
    d = real.dim
    if d == 0:
        return None
    c = real.basis_products_coords()
    # u = sum_j u_j b_j with u b_i = b_i and b_i u = b_i for all i, solved in
    # coordinates: sum_j u_j c[j,i,k] = delta_ik and sum_j u_j c[i,j,k] = delta_ik.
    left = c.transpose(1, 2, 0).reshape(d * d, d)    # rows (i,k), cols j
    right = c.transpose(0, 2, 1).reshape(d * d, d)   # rows (i,k), cols j
    target = np.eye(d, dtype=complex).reshape(d * d)
    system = np.concatenate([left, right])
    rhs = np.concatenate([target, target])
    sol, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    worst = float(np.abs(system @ sol - rhs).max())
    if worst <= 1e-9:
        return real.carrier.from_coords(sol)
    return None


def star_closure(generators) -> CStarRealization:
    """Smallest product- and adjoint-closed subspace containing the generators.

    Iterates span <- span + span*span + span^* until the dimension stabilizes,
    then solves for a two-sided unit inside the resulting algebra (marked
    non-unital when the solve fails).
    """
    stack = _as_matrix_stack(generators)
    space = orthonormalize(stack)
    coords = None
    while True:
        before = space.dim
        adj_flat = space.basis.conj().transpose(0, 2, 1).reshape(space.dim, -1)
        space = _extend_basis(space, _residual_rows(space, adj_flat))
        coords, defect, new_rows = _pairwise_products(space)
        if space.dim == before and len(new_rows) == 0:
            break
        space = _extend_basis(space, new_rows)
    real = CStarRealization(space, False, None)
    real._product_coords = coords
    real._closure_defect = max(defect, real._adjoint_defect())
    unit = _solve_unit(real)
    real.is_unital = unit is not None
    real.unit = unit
    return real


def realization_from_orthonormal(basis, unit: np.ndarray | None = None,
                                 check: bool = True) -> CStarRealization:
    """Wrap an already-orthonormal, already-closed basis as a realization."""
    stack = _as_matrix_stack(basis)
    space = Subspace(stack.shape[1], stack)
    real = CStarRealization(space, unit is not None, unit)
    if check and real.closure_defect() > DEFAULT_TOL:
        raise LinalgError("basis is not closed under product/adjoint")
    if unit is None:
        u = _solve_unit(real)
        real.is_unital = u is not None
        real.unit = u
    return real


def full_matrix_algebra(n: int) -> CStarRealization:
    """All of M_n, with the matrix-unit basis E_ij ordered lexicographically."""
    basis = np.zeros((n * n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            basis[i * n + j, i, j] = 1.0
    return CStarRealization(Subspace(n, basis), True, np.eye(n, dtype=complex))


def tensor_realization(a: CStarRealization, b: CStarRealization) -> CStarRealization:
    """Kronecker tensor product of two realizations.

    Basis = all Kronecker products a_i (x) b_j in lexicographic (i, j) order.
    Kronecker products of Frobenius-orthonormal bases are again orthonormal,
    so the basis is kept exactly as constructed; coordinates in the tensor
    carrier are then compatible with np.kron of coordinate matrices.
    """
    na, nb = a.ambient_dim, b.ambient_dim
    basis = np.einsum("iac,jbd->ijabcd", a.carrier.basis, b.carrier.basis)
    basis = basis.reshape(a.dim * b.dim, na * nb, na * nb)
    unit = None
    if a.is_unital and b.is_unital:
        unit = np.kron(a.unit, b.unit)
    return CStarRealization(Subspace(na * nb, basis), unit is not None, unit)


@dataclass
class StarMap:
    """A linear map between two realizations, given in carrier coordinates.

    matrix has shape (codomain.dim, domain.dim).  consistency_residual is the
    worst defect of the defining spanning-pair system (plus any off-carrier
    component of the supplied pairs); hom_residual is the worst multiplicativity
    or adjoint defect over all basis pairs.
    """

    domain: CStarRealization
    codomain: CStarRealization
    matrix: np.ndarray
    consistency_residual: float
    hom_residual: float

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        return self.codomain.carrier.from_coords(
            self.matrix @ self.domain.carrier.coords(matrix))

    def apply_coords(self, coeffs: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(coeffs, complex)

    def rank(self) -> int:
        svals = np.linalg.svd(self.matrix, compute_uv=False)
        if svals.size == 0 or svals[0] == 0.0:
            return 0
        return int(np.sum(svals > RANK_RTOL * svals[0]))

    def then(self, other: "StarMap") -> "StarMap":
        """Composition other . self, re-certified on the composed matrix."""
        if other.domain is not self.codomain and \
                not other.domain.carrier.equals(self.codomain.carrier):
            raise LinalgError("composition domain/codomain mismatch")
        return star_map_from_matrix(self.domain, other.codomain,
                                    other.matrix @ self.matrix,
                                    consistency=max(self.consistency_residual,
                                                    other.consistency_residual))

    def inverse(self) -> "StarMap":
        """Explicitly solved inverse (square, full-rank matrices only)."""
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise LinalgError("inverse of a non-square map")
        inv = np.linalg.inv(self.matrix)
        return star_map_from_matrix(self.codomain, self.domain, inv)


def _hom_residual(domain: CStarRealization, codomain: CStarRealization,
                  matrix: np.ndarray) -> float:
    """max over basis pairs of ||f(ab) - f(a)f(b)|| and ||f(a*) - f(a)*||."""
    d = domain.dim
    if d == 0:
        return 0.0
    c_dom = domain.basis_products_coords()
    c_cod = codomain.basis_products_coords()
    t = matrix
    dc = codomain.dim
    # f(ab): push the domain structure constants through the map.
    f_of_prod = c_dom.reshape(d * d, d) @ t.T
    # f(a)f(b): multiply the images using the codomain structure constants,
    # shaped as two GEMMs: first contract the left image, then the right.
    half = (t.T @ c_cod.reshape(dc, dc * dc)).reshape(d, dc, dc)
    prod_of_f = (np.ascontiguousarray(half.transpose(0, 2, 1)).reshape(
        d * dc, dc) @ t).reshape(d, dc, d).transpose(0, 2, 1)
    worst = float(np.linalg.norm(
        f_of_prod.reshape(d, d, dc) - prod_of_f, axis=2).max())
    f_of_adj = domain.adjoint_coords() @ t.T
    adj_of_f = t.conj().T @ codomain.adjoint_coords()
    worst = max(worst, float(np.linalg.norm(f_of_adj - adj_of_f, axis=1).max()))
    return worst


def star_map_from_matrix(domain: CStarRealization, codomain: CStarRealization,
                         matrix: np.ndarray, consistency: float = 0.0) -> StarMap:
    """Certify an explicitly given coordinate matrix as a StarMap."""
    matrix = np.asarray(matrix, dtype=complex)
    return StarMap(domain, codomain, matrix, consistency,
                   _hom_residual(domain, codomain, matrix))


def define_map_on_span(pairs, domain: CStarRealization,
                       codomain: CStarRealization) -> StarMap:
    """Least-squares linear extension of (x_i, y_i) spanning pairs.

    The x_i must span the domain carrier (rank deficiency is an error, not a
    silent acceptance).  The returned map is usable even when residuals are
    large; certification is the caller's decision via verify_isomorphism.
    """
    if len(pairs) == 0:
        raise LinalgError("no defining pairs")
    xs = _as_matrix_stack([p[0] for p in pairs])
    ys = _as_matrix_stack([p[1] for p in pairs])
    if xs.shape[1] != domain.ambient_dim or ys.shape[1] != codomain.ambient_dim:
        raise LinalgError("pair ambient dims do not match domain/codomain")
    xc = domain.carrier.coords_many(xs)
    yc = codomain.carrier.coords_many(ys)
    off_dom = float(np.abs(xs.reshape(len(xs), -1)
                           - xc @ domain.carrier.basis_flat).max())
    off_cod = float(np.abs(ys.reshape(len(ys), -1)
                           - yc @ codomain.carrier.basis_flat).max())
    svals = np.linalg.svd(xc, compute_uv=False)
    rank = int(np.sum(svals > RANK_RTOL * svals[0])) if svals.size else 0
    if rank < domain.dim:
        raise LinalgError(
            f"defining pairs span only {rank} of {domain.dim} domain dimensions")
    sol, *_ = np.linalg.lstsq(xc, yc, rcond=None)
    matrix = sol.T
    defects = np.linalg.norm(xc @ sol - yc, axis=1)
    consistency = max(float(defects.max()), off_dom, off_cod)
    return star_map_from_matrix(domain, codomain, matrix, consistency=consistency)


@dataclass
class IsomorphismReport:
    is_star_hom: bool
    is_injective: bool
    is_surjective: bool
    consistency_residual: float
    hom_residual: float
    rank: int
    dims: tuple[int, int]

    @property
    def is_isomorphism(self) -> bool:
        return self.is_star_hom and self.is_injective and self.is_surjective


def verify_isomorphism(map: StarMap, tol: float = DEFAULT_TOL) -> IsomorphismReport:
    """Certify a StarMap: *-homomorphism within tol, injective, surjective."""
    rank = map.rank()
    return IsomorphismReport(
        is_star_hom=(map.hom_residual <= tol and map.consistency_residual <= tol),
        is_injective=(rank == map.domain.dim),
        is_surjective=(rank == map.codomain.dim),
        consistency_residual=map.consistency_residual,
        hom_residual=map.hom_residual,
        rank=rank,
        dims=(map.domain.dim, map.codomain.dim),
    )
