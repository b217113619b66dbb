"""Section *-algebras of realized Fell bundles, and their C*-realizations.

A section assigns each arrow an element of its fiber.  With the counting Haar
system the convolution is the finite sum

    (f * g)(x) = sum over { y : r(y) = r(x) } of  f(y) g(y^-1 x)

and the involution is f^*(x) = f(x^-1)^* (the groupoid convention; finite
groups are unimodular, so no modular weight appears anywhere).

The enveloping C*-algebra is realized through the GNS construction of the
canonical trace tau(f) = sum over units of tr f(u): the trace is faithful
(tau(f^* * f) equals the total Frobenius mass of f), the left regular
representation h -> f * h is therefore injective, and in finite dimensions a
*-algebra with a faithful positive trace has a unique C*-norm — this replaces
the universal-norm construction, which is not computable as stated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundles import RealizedFellBundle
from .linalg import CStarRealization, realization_from_orthonormal

MEMBERSHIP_TOL = 1e-12


class SectionError(ValueError):
    pass


class Section:
    """An arrow-indexed assignment of fiber elements (dense storage)."""

    def __init__(self, bundle: RealizedFellBundle, values, check: bool = True):
        self.bundle = bundle
        n = bundle.base.n_arrows
        if len(values) != n:
            raise SectionError("need one value per arrow")
        self.values = [np.asarray(v, dtype=complex) for v in values]
        if check:
            for x, v in enumerate(self.values):
                if v.shape != (bundle.ambient_dim, bundle.ambient_dim):
                    raise SectionError(f"value at arrow {x} has wrong shape")
                scale = max(1.0, float(np.linalg.norm(v)))
                if bundle.fiber(x).defect(v) > MEMBERSHIP_TOL * scale:
                    raise SectionError(
                        f"value at arrow {x} is not in its fiber")

    @staticmethod
    def zero(bundle: RealizedFellBundle) -> "Section":
        n = bundle.ambient_dim
        return Section(bundle, [np.zeros((n, n))] * bundle.base.n_arrows,
                       check=False)

    @staticmethod
    def single_arrow(bundle: RealizedFellBundle, arrow: int,
                     value) -> "Section":
        vals = [np.zeros((bundle.ambient_dim, bundle.ambient_dim))
                for _ in range(bundle.base.n_arrows)]
        vals[arrow] = np.asarray(value, dtype=complex)
        return Section(bundle, vals)

    def __add__(self, other: "Section") -> "Section":
        self._same_bundle(other)
        return Section(self.bundle,
                       [a + b for a, b in zip(self.values, other.values)],
                       check=False)

    def __sub__(self, other: "Section") -> "Section":
        self._same_bundle(other)
        return Section(self.bundle,
                       [a - b for a, b in zip(self.values, other.values)],
                       check=False)

    def __rmul__(self, scalar) -> "Section":
        return Section(self.bundle, [scalar * v for v in self.values],
                       check=False)

    def _same_bundle(self, other: "Section"):
        if other.bundle is not self.bundle:
            raise SectionError("sections live over different bundles")

    def norm(self) -> float:
        """Total Frobenius mass across all arrows."""
        return float(np.sqrt(sum(np.linalg.norm(v) ** 2 for v in self.values)))


def convolve(f: Section, g: Section) -> Section:
    """Groupoid convolution with counting Haar weights."""
    if f.bundle is not g.bundle:
        raise SectionError("sections live over different bundles")
    base = f.bundle.base
    n = f.bundle.ambient_dim
    out = [np.zeros((n, n), dtype=complex) for _ in range(base.n_arrows)]
    for x in range(base.n_arrows):
        acc = out[x]
        for y in base.r_fibre(base.r(x)):
            y = int(y)
            acc += f.values[y] @ g.values[base.mul(base.inv(y), x)]
    return Section(f.bundle, out, check=False)


def involute(f: Section) -> Section:
    """f^*(x) = f(x^-1)^*."""
    base = f.bundle.base
    vals = [f.values[base.inv(x)].conj().T for x in range(base.n_arrows)]
    return Section(f.bundle, vals, check=False)


def canonical_trace(f: Section) -> complex:
    """tau(f) = sum over unit arrows of tr f(u); faithful on f^* * f."""
    return complex(sum(np.trace(f.values[int(u)]) for u in f.bundle.base.units))


class SectionAlgebra:
    """Gamma_c of a realized bundle in its single-arrow fiber basis.

    The basis section e_(x,k) is supported at arrow x with value the k-th
    orthonormal fiber basis matrix; structure constants are assembled from
    single-arrow convolutions (a product of two single-arrow sections is the
    single-arrow section at the composed arrow, or zero).
    """

    def __init__(self, bundle: RealizedFellBundle):
        self.bundle = bundle
        base = bundle.base
        self.basis_index = [(x, k) for x in range(base.n_arrows)
                            for k in range(bundle.fiber(x).dim)]
        self.offsets = {}
        pos = 0
        for x in range(base.n_arrows):
            self.offsets[x] = pos
            pos += bundle.fiber(x).dim
        self.dim = pos
        self._left_regular_stack = None
        self._check_trace_form()

    def _check_trace_form(self):
        """The Gram form tau(e_i^* * e_j) must be the identity matrix.

        For single-arrow sections the convolution e_i^* * e_j is supported on
        a unit only when the arrows coincide, where the trace reduces to the
        Frobenius pairing of the two fiber basis matrices; the Gram is
        therefore block diagonal and evaluated per arrow.
        """
        worst = 0.0
        for x in range(self.bundle.base.n_arrows):
            f = self.bundle.fiber(x)
            if f.dim == 0:
                continue
            gram = f.basis_flat @ f.basis_flat.conj().T
            worst = max(worst, float(np.abs(gram - np.eye(f.dim)).max()))
        if worst > 1e-10:
            raise SectionError(
                "canonical trace form is not the identity on the basis "
                "(invalid bundle?)")

    def basis_section(self, i: int) -> Section:
        x, k = self.basis_index[i]
        return Section.single_arrow(self.bundle, x,
                                    self.bundle.fiber(x).basis[k])

    def coefficients(self, f: Section) -> np.ndarray:
        """Coordinates of a section in the orthonormal single-arrow basis."""
        out = np.zeros(self.dim, dtype=complex)
        for i, (x, k) in enumerate(self.basis_index):
            out[i] = np.vdot(self.bundle.fiber(x).basis[k], f.values[x])
        return out

    def from_coefficients(self, coeffs: np.ndarray) -> Section:
        coeffs = np.asarray(coeffs, dtype=complex)
        n = self.bundle.ambient_dim
        vals = [np.zeros((n, n), dtype=complex)
                for _ in range(self.bundle.base.n_arrows)]
        for i, (x, k) in enumerate(self.basis_index):
            if coeffs[i] != 0:
                vals[x] = vals[x] + coeffs[i] * self.bundle.fiber(x).basis[k]
        return Section(self.bundle, vals, check=False)

    def left_regular_stack(self) -> np.ndarray:
        """(dim, dim, dim) array: L[i] is the matrix of h -> e_i * h.

        Columns of L[i] are the coefficients of e_i * e_j — these are the
        structure constants of the convolution algebra.
        """
        if self._left_regular_stack is not None:
            return self._left_regular_stack
        base = self.bundle.base
        d = self.dim
        L = np.zeros((d, d, d), dtype=complex)
        for x in range(base.n_arrows):
            fx = self.bundle.fiber(x)
            if fx.dim == 0:
                continue
            for y in range(base.n_arrows):
                if not base.composable(x, y):
                    continue
                fy = self.bundle.fiber(y)
                if fy.dim == 0:
                    continue
                z = base.mul(x, y)
                fz = self.bundle.fiber(z)
                prods = np.einsum("iab,jbc->ijac", fx.basis, fy.basis)
                coords = fz.coords_many(
                    prods.reshape(-1, self.bundle.ambient_dim,
                                  self.bundle.ambient_dim))
                coords = coords.reshape(fx.dim, fy.dim, fz.dim)
                oi, oj, oz = self.offsets[x], self.offsets[y], self.offsets[z]
                for k in range(fx.dim):
                    L[oi + k, oz:oz + fz.dim, oj:oj + fy.dim] = \
                        coords[k].T
        self._left_regular_stack = L
        return L

    def left_regular(self, f: Section) -> np.ndarray:
        """Matrix of h -> f * h on section coordinates."""
        return np.tensordot(self.coefficients(f), self.left_regular_stack(),
                            axes=1)

    def associativity_defect(self) -> float:
        """Worst |(e_i * e_j) * e_k - e_i * (e_j * e_k)| over basis triples."""
        L = self.left_regular_stack()
        # L[i] L[j] = L of (e_i * e_j) = sum_m c[i,j,m] L[m], where
        # c[i,j,m] = L[i][m, j]; associativity of convolution is exactly this.
        lhs = np.einsum("iab,jbc->ijac", L, L)
        rhs = np.einsum("imj,mac->ijac", L, L)
        return float(np.abs(lhs - rhs).max())


@dataclass
class EnvelopingCStar:
    """GNS realization of the section algebra from the canonical trace.

    realization.carrier is the star-closed span of the left regular images;
    gns maps a section (or its coefficient vector) to its carrier matrix.
    dim(realization) always equals dim(sections) — the kernel rank is checked
    to be zero on construction.
    """

    algebra: SectionAlgebra
    realization: CStarRealization

    def gns(self, f: Section) -> np.ndarray:
        return self.gns_coords(self.algebra.coefficients(f))

    def gns_single(self, arrow: int, value) -> np.ndarray:
        """Image of a single-arrow section; only that arrow's basis block of
        the left regular stack contributes."""
        alg = self.algebra
        bundle = alg.bundle
        value = np.asarray(value, dtype=complex)
        fiber = bundle.fiber(arrow)
        scale = max(1.0, float(np.linalg.norm(value)))
        if fiber.defect(value) > MEMBERSHIP_TOL * scale:
            raise SectionError(f"value at arrow {arrow} is not in its fiber")
        coords = fiber.coords(value)
        L = alg.left_regular_stack()
        off = alg.offsets[arrow]
        return np.tensordot(coords, L[off:off + fiber.dim], axes=1)

    def gns_coords(self, coeffs: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=complex)
        L = self.algebra.left_regular_stack()
        nonzero = np.flatnonzero(np.abs(coeffs) > 0.0)
        if len(nonzero) <= max(4, len(coeffs) // 8):
            out = np.zeros(L.shape[1:], dtype=complex)
            for i in nonzero:
                out += coeffs[i] * L[i]
            return out
        return np.tensordot(coeffs, L, axes=1)


def enveloping_cstar(alg: SectionAlgebra) -> EnvelopingCStar:
    """Faithful matrix realization of the section algebra via GNS of the trace."""
    L = alg.left_regular_stack()
    flat = L.reshape(alg.dim, -1)
    svals = np.linalg.svd(flat, compute_uv=False) if alg.dim else np.array([1.0])
    rank = int(np.sum(svals > 1e-8 * svals[0])) if alg.dim else 0
    if rank != alg.dim:
        raise SectionError(
            f"left regular representation has kernel rank {alg.dim - rank}")
    from .linalg import star_closure
    real = star_closure(list(L)) if alg.dim else None
    if real is None or real.dim != alg.dim:
        raise SectionError("GNS realization dimension disagrees with the "
                           "section algebra")
    return EnvelopingCStar(alg, real)


def left_multiplier(bundle: RealizedFellBundle, arrow: int, value,
                    alg: SectionAlgebra | None = None) -> np.ndarray:
    """The canonical multiplier of a fiber element on the section space.

    For a bundle over a group this is the left-translation operator
    (a_s f)(t) = a_s f(s^-1 t), returned as a matrix in the single-arrow
    section basis.  It coincides with the left regular image of the
    single-arrow section at (arrow, value).
    """
    if not bundle.base.is_group():
        raise SectionError("left multipliers are defined over group bases")
    alg = alg or SectionAlgebra(bundle)
    base = bundle.base
    value = np.asarray(value, dtype=complex)
    if bundle.fiber(arrow).defect(value) > MEMBERSHIP_TOL * max(
            1.0, float(np.linalg.norm(value))):
        raise SectionError("multiplier value is not in the stated fiber")
    d = alg.dim
    out = np.zeros((d, d), dtype=complex)
    s = arrow
    for j, (t, m) in enumerate(alg.basis_index):
        st = base.mul(s, t)
        img = value @ bundle.fiber(t).basis[m]
        coords = bundle.fiber(st).coords(img)
        oz = alg.offsets[st]
        out[oz:oz + bundle.fiber(st).dim, j] = coords
    return out
