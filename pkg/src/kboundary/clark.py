"""Circle-measure machinery: Cauchy transforms, inner functions, the
de Branges-Rovnyak-type kernel with its exact finite-sum factorization,
kernel renormalization and density tests.

For a finite atomic probability measure mu on the circle the Cauchy
transform is the finite sum C(z) = sum_j w_j / (1 - z conj(e(x_j))).
The associated inner function is taken in the reciprocal form

    b(z) = 1 - 1 / C(z).

The alternative affine form 1 - C(z) is available behind the ``form``
flag for comparison, but it is not inner: for a unit point mass it gives
-z/(1-z), which is unbounded near z = 1, while the reciprocal form gives
b(z) = z, satisfies b(0) = 0 and |b| < 1 on the disk, matches the
Herglotz identity Re[(1+b)/(1-b)] = Poisson integral of mu, and makes
1 / E(K_z^*) = 1 - b(z) for Szego features averaged against mu.

At the atoms of mu the radial limit of b equals 1; the boundary feature

    k_z(x_j) = (1 - b(z)) / (1 - z conj(e(x_j)))

then factorizes K_b(z, w) = (1 - b(z) conj(b(w))) / (1 - z conj(w))
exactly as a finite sum against mu, and the features span L^2(mu) as
soon as there are at least as many distinct points z as atoms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BAtOne,
    CauchyZero,
    DomainViolation,
    InvalidMeasure,
    ShapeMismatch,
    ZeroExpectation,
)
from .factorization import BoundaryFactorization, apply_V
from .kernels import DISK_RADIUS_BOUND, FiniteKernel, PointSet, _hermitian_mirror
from .measures import CircleMeasure, DiscreteMeasure

CAUCHY_ZERO_TOL = 1e-14
EXPECTATION_TOL = 1e-12
ATOM_MATCH_TOL = 1e-15


def _require_interior(z) -> np.ndarray:
    zv = np.asarray(z, dtype=complex)
    if np.any(np.abs(zv) >= DISK_RADIUS_BOUND):
        raise DomainViolation(f"point {z!r} is not strictly inside the unit disk")
    return zv


def cauchy_transform(mu: CircleMeasure, z: complex) -> complex:
    """C(z) = sum_j w_j / (1 - z conj(e(x_j))) for z in the open disk."""
    zv = _require_interior(z)
    e = mu.boundary_points()
    return complex(np.sum(mu.weights / (1.0 - zv * np.conj(e))))


@dataclass(frozen=True)
class InnerFunctionB:
    """Inner function of a circle measure, b(z) = 1 - 1/C(z); b(0) = 0."""

    measure: CircleMeasure


def b_eval(B: InnerFunctionB, z: complex, form: str = "reciprocal") -> complex:
    """Evaluate b at an interior point.

    ``form="reciprocal"`` (default) gives 1 - 1/C(z); ``form="linear"``
    gives the affine variant 1 - C(z), exposed for comparison only (it is
    not an inner function).
    """
    C = cauchy_transform(B.measure, z)
    if form == "linear":
        return complex(1.0 - C)
    if form != "reciprocal":
        raise ShapeMismatch(f"unknown form {form!r}; use 'reciprocal' or 'linear'")
    if abs(C) < CAUCHY_ZERO_TOL:
        raise CauchyZero(f"Cauchy transform vanishes at z = {z!r}")
    return complex(1.0 - 1.0 / C)


def _b_many(B: InnerFunctionB, zs: np.ndarray) -> np.ndarray:
    e = B.measure.boundary_points()
    C = np.sum(
        B.measure.weights[None, :] / (1.0 - zs[:, None] * np.conj(e)[None, :]),
        axis=1,
    )
    if np.any(np.abs(C) < CAUCHY_ZERO_TOL):
        raise CauchyZero("Cauchy transform vanishes on the evaluation grid")
    return 1.0 - 1.0 / C


def inner_modulus_check(B: InnerFunctionB, thetas, r: float) -> float:
    """Max over the grid of | 1 - |b(r e(theta))| |.

    The grid must keep circular distance >= 1e-3 from every atom; the
    deviation decreases toward 0 as r increases toward 1.
    """
    if not (0.0 < r < 1.0):
        raise DomainViolation(f"radius must lie in (0,1), got {r!r}")
    th = np.asarray(thetas, dtype=float).ravel() % 1.0
    gaps = np.abs(th[:, None] - B.measure.atoms[None, :])
    gaps = np.minimum(gaps, 1.0 - gaps)
    if gaps.size and gaps.min() < 1e-3:
        raise DomainViolation("theta grid comes closer than 1e-3 to an atom")
    zs = r * np.exp(2j * np.pi * th)
    return float(np.abs(1.0 - np.abs(_b_many(B, zs))).max()) if th.size else 0.0


def kb_eval(B: InnerFunctionB, z: complex, w: complex) -> complex:
    """K_b(z, w) = (1 - b(z) conj(b(w))) / (1 - z conj(w))."""
    zv = complex(_require_interior(z))
    wv = complex(_require_interior(w))
    bz = b_eval(B, zv)
    bw = b_eval(B, wv)
    return (1.0 - bz * np.conj(bw)) / (1.0 - zv * np.conj(wv))


def _atom_index(mu: CircleMeasure, x: float) -> int:
    hits = np.where(np.abs(mu.atoms - float(x)) <= ATOM_MATCH_TOL)[0]
    if hits.size != 1:
        raise InvalidMeasure(f"{x!r} is not an atom of the measure")
    return int(hits[0])


def kb_feature(B: InnerFunctionB, z: complex, x: float) -> complex:
    """Boundary feature k_z(x) at an atom x, with b(e(x)) = 1 (radial limit)."""
    zv = complex(_require_interior(z))
    j = _atom_index(B.measure, x)
    e = B.measure.boundary_points()[j]
    return (1.0 - b_eval(B, zv)) / (1.0 - zv * np.conj(e))


def _kb_feature_matrix(B: InnerFunctionB, zs: np.ndarray) -> np.ndarray:
    e = B.measure.boundary_points()
    bz = _b_many(B, zs)
    return (1.0 - bz)[:, None] / (1.0 - zs[:, None] * np.conj(e)[None, :])


def _as_pointset(points) -> PointSet:
    if isinstance(points, PointSet):
        return points
    return PointSet.from_points(points)


def build_kb_factorization(B: InnerFunctionB, points) -> BoundaryFactorization:
    """Exact factorization of the K_b Gram matrix through the atoms of mu.

    The features span L^2(mu) (minimality) as soon as the number of
    distinct interior points is at least the number of atoms.
    """
    ps = _as_pointset(points)
    if ps.dim != 1:
        raise ShapeMismatch("K_b factorization needs 1-dim complex points")
    zs = _require_interior(ps.coords[:, 0])
    n = ps.size
    bz = _b_many(B, zs)
    gram = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            gram[i, j] = (1.0 - bz[i] * np.conj(bz[j])) / (
                1.0 - zs[i] * np.conj(zs[j])
            )
    gram = _hermitian_mirror(gram)
    kernel = FiniteKernel(points=ps, gram=gram, field_tag="complex")
    return BoundaryFactorization(
        kernel=kernel,
        measure=B.measure.as_discrete(),
        features=_kb_feature_matrix(B, zs),
    )


def build_szego_factorization(mu: CircleMeasure, points) -> BoundaryFactorization:
    """Factorization generated by Szego boundary features under mu.

    Features are k_z(x) = 1 / (1 - z conj(e(x))); the kernel is the one
    those features induce, K(z, w) = sum_j w_j k_z(x_j) conj(k_w(x_j)),
    so the factorization identity holds by construction.  Its feature
    means reproduce the Cauchy transform: E_i = C(z_i), hence
    1 / E_i = 1 - b(z_i).
    """
    ps = _as_pointset(points)
    if ps.dim != 1:
        raise ShapeMismatch("Szego features need 1-dim complex points")
    zs = _require_interior(ps.coords[:, 0])
    e = mu.boundary_points()
    features = 1.0 / (1.0 - zs[:, None] * np.conj(e)[None, :])
    gram = _hermitian_mirror((features * mu.weights[None, :]) @ np.conj(features).T)
    kernel = FiniteKernel(points=ps, gram=gram, field_tag="complex")
    return BoundaryFactorization(kernel=kernel, measure=mu.as_discrete(), features=features)


def herglotz_poisson_check(B: InnerFunctionB, z: complex) -> dict:
    """Herglotz real part against the Poisson integral of mu.

    lhs = Re[(1 + b(z)) / (1 - b(z))],
    rhs = sum_j w_j (1 - |z|^2) / |e(x_j) - z|^2.
    """
    zv = complex(_require_interior(z))
    bz = b_eval(B, zv)
    if abs(1.0 - bz) < CAUCHY_ZERO_TOL:
        raise BAtOne(f"b(z) = 1 within tolerance at z = {zv!r}")
    lhs = float(np.real((1.0 + bz) / (1.0 - bz)))
    e = B.measure.boundary_points()
    rhs = float(
        np.sum(B.measure.weights * (1.0 - abs(zv) ** 2) / np.abs(e - zv) ** 2)
    )
    return {"lhs": lhs, "rhs": rhs, "abs_error": abs(lhs - rhs)}


def expectation_vector(F: BoundaryFactorization) -> np.ndarray:
    """Feature means E_i = sum_x features[i, x] mu(x)."""
    return F.features @ F.measure.weights


@dataclass(frozen=True)
class RenormContext:
    """A factorization together with its mean-normalized companion.

    kren_gram[i, j] = gram[i, j] / (E_i conj(E_j)) and
    kren_features[i, x] = features[i, x] / E_i, so the factorization
    identity survives renormalization verbatim.
    """

    factorization: BoundaryFactorization
    expectations: np.ndarray
    kren_gram: np.ndarray
    kren_features: np.ndarray

    def __post_init__(self):
        E = np.asarray(self.expectations, dtype=complex).ravel()
        if E.size and np.abs(E).min() <= EXPECTATION_TOL:
            raise ZeroExpectation("renormalization context needs nonzero feature means")
        object.__setattr__(self, "expectations", E)

    def kren_kernel(self) -> FiniteKernel:
        return FiniteKernel(
            points=self.factorization.kernel.points,
            gram=self.kren_gram,
            field_tag="complex",
        )

    def kren_factorization(self) -> BoundaryFactorization:
        return BoundaryFactorization(
            kernel=self.kren_kernel(),
            measure=self.factorization.measure,
            features=self.kren_features,
            tol=self.factorization.tol,
        )


def renormalize(F: BoundaryFactorization) -> RenormContext:
    """Divide kernel and features by the feature means.

    Fails fast with ZeroExpectation when any feature mean vanishes
    (modulus <= 1e-12); renormalization is undefined there.
    """
    E = expectation_vector(F)
    if E.size and np.abs(E).min() <= EXPECTATION_TOL:
        worst = int(np.argmin(np.abs(E)))
        raise ZeroExpectation(
            f"feature mean for point index {worst} has modulus {abs(E[worst])!r}"
        )
    denom = np.outer(E, np.conj(E))
    kren_gram = _hermitian_mirror(F.kernel.gram / denom)
    kren_features = F.features / E[:, None]
    return RenormContext(
        factorization=F,
        expectations=E,
        kren_gram=kren_gram,
        kren_features=kren_features,
    )


def normalized_transform_V(ctx: RenormContext, g) -> np.ndarray:
    """(V_mu g)(s_i) = (1/conj(E_i)) sum_x g(x) conj(features[i, x]) mu(x).

    Identical to the plain adjoint transform applied to the renormalized
    factorization.
    """
    raw = apply_V(ctx.factorization, g)
    return raw / np.conj(ctx.expectations)


def density_criterion(obj, rank_tol: float | None = None) -> dict:
    """Do the (renormalized) features span L^2(mu)?

    Accepts a RenormContext or a BoundaryFactorization.  Density of the
    feature span is equivalent to the adjoint transform being defined on
    all of L^2(mu) as a co-isometry, and, in the finite model, to full
    feature rank.
    """
    from .factorization import minimality_test

    F = obj.kren_factorization() if isinstance(obj, RenormContext) else obj
    result = minimality_test(F, rank_tol=rank_tol)
    rank = result["feature_rank"]
    return {
        "is_dense": result["is_minimal"],
        "rank": rank,
        "deficiency": F.n_atoms - rank,
    }


def _density_atoms(measure) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(measure, CircleMeasure):
        return measure.atoms.reshape(-1, 1), np.asarray(measure.weights)
    if isinstance(measure, DiscreteMeasure):
        if measure.coords is None:
            raise InvalidMeasure("density test needs atom coordinates in [0,1)^k")
        return measure.coords, np.asarray(measure.weights)
    raise InvalidMeasure(f"unsupported measure type {type(measure).__name__}")


def polydisk_density_test(measure, max_degree: int | None = None) -> dict:
    """Rank growth of torus monomials e(n . x) evaluated at the atoms.

    For degrees d = 0..max_degree the monomials with multi-index entries
    in 0..d are evaluated at the atoms (sqrt-weighted, the L^2(mu)
    geometry); ``saturated`` records whether the rank reaches the number
    of atoms at some degree.  For k = 1 and m distinct atoms the
    Vandermonde structure guarantees saturation at degree m - 1.
    """
    coords, weights = _density_atoms(measure)
    m, k = coords.shape
    if max_degree is None:
        max_degree = m
    if max_degree < 0:
        raise ShapeMismatch("max_degree must be nonnegative")
    sqrt_w = np.sqrt(weights)
    ranks = []
    saturated = False
    for d in range(max_degree + 1):
        grids = np.meshgrid(*([np.arange(d + 1)] * k), indexing="ij")
        exponents = np.stack([g.ravel() for g in grids], axis=1)
        phases = exponents @ coords.T  # (n_monomials, m)
        rows = np.exp(2j * np.pi * phases) * sqrt_w[None, :]
        rank = int(np.linalg.matrix_rank(rows))
        ranks.append(rank)
        if rank == m:
            saturated = True
            break
    return {"rank_sequence": ranks, "saturated": saturated}
