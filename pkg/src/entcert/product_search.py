"""Product vectors in subspaces of an M (x) N space.

Two independent routes are provided and cross-checked in the tests:

* analytic: Pluecker coordinates of the subspace and, for the shapes
  where the product-vector locus is a hypersurface with a known
  equation (2x3 with 2-dim subspaces, 2x4 with 3-dim subspaces), a
  single polynomial whose vanishing is equivalent to the existence of
  a product vector;
* numeric: damped least squares on the 2x2 minors of the reshaped
  combination sum_i z_i basis_i, with random restarts and
  per-coordinate dehomogenization.  This is a semidecision procedure
  on shapes without a known equation: "not found" is a budget report,
  never a nonexistence proof.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from itertools import combinations

import numpy as np

from .linalg import DEFAULT_TOL, ToleranceConfig, numerical_rank
from .random_states import as_rng, complex_gaussian

__all__ = [
    "Subspace",
    "PlueckerCoords",
    "pluecker_coords",
    "hypersurface_2x3",
    "hypersurface_2x4",
    "hypersurface_value",
    "degree_scale",
    "ProductSearchResult",
    "find_product_vector",
    "rank_one_in_span",
    "random_subspace",
    "random_product_containing_subspace",
]

_QUARTIC_SHA256 = "3d09dcbe1e8fb326bfaeca63f24f094a75acc8c6715d02eeb6dbfca0db2c56c7"


@dataclass(frozen=True)
class Subspace:
    """k-dimensional subspace of C^M (x) C^N, spanned by the basis rows."""

    dim_a: int
    dim_b: int
    basis: np.ndarray
    tol: ToleranceConfig = field(default=DEFAULT_TOL)

    def __post_init__(self):
        basis = np.atleast_2d(np.asarray(self.basis, dtype=complex))
        if basis.shape[1] != self.dim_a * self.dim_b:
            raise ValueError("basis vector length does not match dims")
        rank, _ = numerical_rank(basis, self.tol)
        if rank != basis.shape[0]:
            raise ValueError(
                f"basis is numerically dependent: rank {rank} < {basis.shape[0]}")
        basis.flags.writeable = False
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def matrices(self) -> np.ndarray:
        """Basis vectors reshaped as M x N matrices, stacked on axis 0."""
        return self.basis.reshape(self.dim, self.dim_a, self.dim_b)

    def change_basis(self, g: np.ndarray) -> "Subspace":
        return Subspace(self.dim_a, self.dim_b, np.asarray(g) @ self.basis, self.tol)


@dataclass(frozen=True)
class PlueckerCoords:
    """All k x k minors of the k x (MN) basis matrix, keyed by the
    0-based strictly increasing column tuple."""

    order: int
    ambient: int
    coords: dict

    def vector(self) -> np.ndarray:
        return np.array([self.coords[t] for t in sorted(self.coords)])

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector()))


def pluecker_coords(subspace: Subspace) -> PlueckerCoords:
    """Compute every k x k minor of the basis matrix."""
    p = subspace.basis
    k, mn = p.shape
    coords = {}
    for cols in combinations(range(mn), k):
        coords[cols] = complex(np.linalg.det(p[:, cols]))
    return PlueckerCoords(order=k, ambient=mn, coords=coords)


# Degree-3 equation for a 2-dim subspace of a 2x3 space: the subspace
# contains a product vector iff this vanishes.  Pairs are 1-based
# column labels of the 2x6 basis matrix.
_CUBIC_2x3 = [
    (2, (1, 2), (3, 4), (5, 6)),
    (1, (1, 2), (2, 6), (4, 6)),
    (1, (1, 3), (1, 5), (5, 6)),
    (1, (2, 3), (2, 4), (4, 6)),
    (1, (1, 3), (3, 5), (4, 5)),
    (-1, (1, 3), (2, 5), (4, 6)),
    (-1, (1, 3), (2, 4), (5, 6)),
    (-1, (1, 2), (3, 5), (4, 6)),
    (-1, (1, 2), (1, 6), (5, 6)),
    (-1, (2, 3), (3, 4), (4, 5)),
]


def degree_scale(coords: PlueckerCoords, degree: int) -> float:
    """Natural scale of a degree-d polynomial in the Pluecker vector.

    Both the polynomial value and |p|^d pick up the same det(G)^d factor
    under a basis change, so value / degree_scale is a true invariant of
    the subspace.
    """
    return coords.norm() ** degree


def hypersurface_2x3(subspace: Subspace, coords: PlueckerCoords | None = None) -> complex:
    """Evaluate the cubic product-vector equation for a 2-dim subspace of 2x3."""
    if (subspace.dim_a, subspace.dim_b, subspace.dim) != (2, 3, 2):
        raise ValueError("hypersurface_2x3 needs a 2-dim subspace of a 2x3 space")
    p = coords or pluecker_coords(subspace)
    total = 0.0 + 0.0j
    for coef, *pairs in _CUBIC_2x3:
        term = complex(coef)
        for i, j in pairs:
            term *= p.coords[(i - 1, j - 1)]
        total += term
    return total


@lru_cache(maxsize=1)
def _quartic_terms():
    body = resources.files("entcert.data").joinpath("hypersurface_2x4.json").read_text()
    doc = json.loads(body)
    canon = json.dumps(doc, indent=1, sort_keys=True)
    digest = hashlib.sha256(canon.encode()).hexdigest()
    if digest != _QUARTIC_SHA256:
        raise RuntimeError(
            f"hypersurface_2x4.json checksum mismatch: {digest} != {_QUARTIC_SHA256}")
    if doc["degree"] != 4 or doc["shape"] != [2, 4] or len(doc["terms"]) != 149:
        raise RuntimeError("hypersurface_2x4.json header does not match its contract")
    return tuple(
        (int(t["c"]), tuple(tuple(i - 1 for i in triple) for triple in t["m"]))
        for t in doc["terms"]
    )


def hypersurface_2x4(subspace: Subspace, coords: PlueckerCoords | None = None) -> complex:
    """Evaluate the 149-monomial quartic for a 3-dim subspace of 2x4."""
    if (subspace.dim_a, subspace.dim_b, subspace.dim) != (2, 4, 3):
        raise ValueError("hypersurface_2x4 needs a 3-dim subspace of a 2x4 space")
    p = coords or pluecker_coords(subspace)
    total = 0.0 + 0.0j
    for coef, triples in _quartic_terms():
        term = complex(coef)
        for t in triples:
            term *= p.coords[t]
        total += term
    return total


def hypersurface_value(subspace: Subspace):
    """Dispatch to the known equation for this shape, or None.

    Returns (value, degree, scale) when an equation exists.
    """
    shape = (subspace.dim_a, subspace.dim_b, subspace.dim)
    if shape == (2, 3, 2):
        coords = pluecker_coords(subspace)
        return hypersurface_2x3(subspace, coords), 3, degree_scale(coords, 3)
    if shape == (2, 4, 3):
        coords = pluecker_coords(subspace)
        return hypersurface_2x4(subspace, coords), 4, degree_scale(coords, 4)
    return None


@dataclass(frozen=True)
class ProductSearchResult:
    found: bool
    a: np.ndarray | None
    b: np.ndarray | None
    coefficients: np.ndarray | None
    best_defect: float
    restarts: int

    def pair(self):
        return (self.a, self.b) if self.found else None


def _minor_indices(p, q):
    rows = list(combinations(range(p), 2))
    cols = list(combinations(range(q), 2))
    r1 = np.array([r[0] for r in rows for _ in cols])
    r2 = np.array([r[1] for r in rows for _ in cols])
    c1 = np.array([c[0] for _ in rows for c in cols])
    c2 = np.array([c[1] for _ in rows for c in cols])
    return r1, r2, c1, c2


def _lm_polish(mats, z0, free, iters=60):
    """Vectorized Levenberg-Marquardt on the 2x2 minors, batched starts.

    mats: (k, p, q); z0: (B, k) with the dehomogenized coordinate fixed.
    Returns the improved batch (B, k) and final costs (B,).
    """
    k, p, q = mats.shape
    r1, r2, c1, c2 = _minor_indices(p, q)
    a_free = mats[free]  # (kf, p, q)

    def minors(e):
        return e[:, r1, c1] * e[:, r2, c2] - e[:, r1, c2] * e[:, r2, c1]

    z = z0.copy()
    e = np.einsum("bk,kpq->bpq", z, mats)
    f = minors(e)
    cost = np.sum(np.abs(f) ** 2, axis=1)
    lam = np.full(z.shape[0], 1.0e-3)
    for _ in range(iters):
        # complex Jacobian of the minors w.r.t. the free coordinates
        j = (a_free[None, :, r1, c1] * e[:, None, r2, c2]
             + e[:, None, r1, c1] * a_free[None, :, r2, c2]
             - a_free[None, :, r1, c2] * e[:, None, r2, c1]
             - e[:, None, r1, c2] * a_free[None, :, r2, c1])  # (B, kf, nm)
        j = j.transpose(0, 2, 1)  # (B, nm, kf)
        jr = np.concatenate(
            [np.concatenate([j.real, -j.imag], axis=2),
             np.concatenate([j.imag, j.real], axis=2)], axis=1)  # (B, 2nm, 2kf)
        fr = np.concatenate([f.real, f.imag], axis=1)  # (B, 2nm)
        jtj = np.einsum("bri,brj->bij", jr, jr)
        g = np.einsum("bri,br->bi", jr, fr)
        eye = np.eye(jtj.shape[1])
        try:
            delta = np.linalg.solve(jtj + lam[:, None, None] * eye, -g[:, :, None])[..., 0]
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(
                jtj + lam[:, None, None] * eye, -g[:, :, None], rcond=None)[0][..., 0]
        kf = len(free)
        step = delta[:, :kf] + 1j * delta[:, kf:]
        z_try = z.copy()
        z_try[:, free] += step
        e_try = np.einsum("bk,kpq->bpq", z_try, mats)
        f_try = minors(e_try)
        cost_try = np.sum(np.abs(f_try) ** 2, axis=1)
        improved = cost_try < cost
        z[improved] = z_try[improved]
        e[improved] = e_try[improved]
        f[improved] = f_try[improved]
        cost[improved] = cost_try[improved]
        lam = np.where(improved, lam / 3.0, lam * 4.0)
        lam = np.clip(lam, 1.0e-12, 1.0e12)
        if np.min(cost) < 1.0e-30:
            break
    return z, cost


def rank_one_in_span(mats, restarts: int = 40, rng=7,
                     tol: ToleranceConfig = DEFAULT_TOL) -> ProductSearchResult:
    """Find z with sum_i z_i mats[i] of rank 1 (up to the defect tolerance).

    Minimizes the squared magnitudes of all 2x2 minors with `restarts`
    random starts for each dehomogenization z_j = 1.  Success means the
    second singular value of the combination is below residual_tol times
    the first.
    """
    mats = np.asarray(mats, dtype=complex)
    k, p, q = mats.shape
    scale = np.linalg.norm(mats.reshape(k, -1), axis=1)
    scale[scale == 0] = 1.0
    work = mats / scale[:, None, None]
    rng = as_rng(rng)

    if min(p, q) < 2:
        z = np.zeros(k, dtype=complex)
        z[0] = 1.0 / scale[0]
        e = np.einsum("k,kpq->pq", z, mats)
        u, s, vh = np.linalg.svd(e)
        a = u[:, 0] * np.sqrt(s[0])
        b = vh[0, :] * np.sqrt(s[0])
        return ProductSearchResult(True, a, b, z, 0.0, 0)

    best = (np.inf, None)
    for j in range(k):
        free = [i for i in range(k) if i != j]
        z0 = np.zeros((restarts, k), dtype=complex)
        z0[:, j] = 1.0
        if free:
            z0[:, free] = complex_gaussian(rng, (restarts, len(free)))
            z, _ = _lm_polish(work, z0, free)
        else:
            z = z0[:1]
        e = np.einsum("bk,kpq->bpq", z, work)
        s = np.linalg.svd(e, compute_uv=False)
        defect = s[:, 1] / np.maximum(s[:, 0], 1.0e-300)
        idx = int(np.argmin(defect))
        if defect[idx] < best[0]:
            best = (float(defect[idx]), z[idx] / scale)
        if best[0] <= tol.residual_tol:
            break

    defect, z = best
    if z is None or defect > tol.residual_tol:
        return ProductSearchResult(False, None, None, None, defect, restarts)
    e = np.einsum("k,kpq->pq", z, mats)
    u, s, vh = np.linalg.svd(e)
    a = u[:, 0] * np.sqrt(s[0])
    b = vh[0, :] * np.sqrt(s[0])
    return ProductSearchResult(True, a, b, z, defect, restarts)


def find_product_vector(subspace: Subspace, restarts: int = 40, rng=7) -> ProductSearchResult:
    """Search the subspace for a product vector a (x) b.

    On success the returned (a, b) satisfies a (x) b ~ sum_i z_i basis_i
    up to the rank-1 defect tolerance; membership in the subspace holds
    by construction.
    """
    return rank_one_in_span(subspace.matrices(), restarts=restarts,
                            rng=rng, tol=subspace.tol)


def random_subspace(dim_a, dim_b, dim, rng=0, tol=DEFAULT_TOL) -> Subspace:
    rng = as_rng(rng)
    return Subspace(dim_a, dim_b, complex_gaussian(rng, (dim, dim_a * dim_b)), tol)


def random_product_containing_subspace(dim_a, dim_b, dim, rng=0, tol=DEFAULT_TOL) -> Subspace:
    """Span of one random product vector and dim-1 random vectors."""
    rng = as_rng(rng)
    prod = np.kron(complex_gaussian(rng, dim_a), complex_gaussian(rng, dim_b))
    rows = [prod] + [complex_gaussian(rng, dim_a * dim_b) for _ in range(dim - 1)]
    # mix so the product direction is not a basis row
    g = np.eye(dim, dtype=complex) + 0.3 * complex_gaussian(rng, (dim, dim))
    return Subspace(dim_a, dim_b, g @ np.vstack(rows), tol)
