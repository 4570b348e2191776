"""Boundary factorizations of a kernel and the isometry/co-isometry pair.

A boundary factorization of a finite kernel K is a finite atomic measure
mu on atoms B together with feature values k_{s_i}(x) satisfying

    K(s_i, s_j) = sum_x k_{s_i}(x) conj(k_{s_j}(x)) mu(x).

The transform W maps kernel sections to their features, W K(., s) = k_s,
and extends off the generators to an isometry of H(K) into L^2(mu); the
companion transform V is the integral operator
(V g)(s) = sum_x g(x) conj(k_s(x)) mu(x).  W is norm-preserving, V W
reproduces the factorization identity on generators, and W V is the
mu-orthogonal projection onto the span of the features inside L^2(mu).

The order relation between factorizations of the same kernel is checked
on finite atomic spaces: a map phi between atom sets must push the source
weights onto the target weights, must be injective (the power-set model
of pulling the target sigma-algebra back onto the source one), and must
intertwine the features.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BaseMismatch,
    LabelMismatch,
    NotAFactorization,
    ShapeMismatch,
)
from .kernels import FiniteKernel
from .measures import DiscreteMeasure
from .rkhs import ParsevalFrame, RkhsElement, default_rank_tol, same_base

DEFAULT_FACTORIZATION_TOL = 1e-9
MORPHISM_TOL = 1e-12


@dataclass(frozen=True)
class BoundaryFactorization:
    """(kernel, measure, features) with features[i, x] = k_{s_i}(atom x)."""

    kernel: FiniteKernel
    measure: DiscreteMeasure
    features: np.ndarray
    tol: float = DEFAULT_FACTORIZATION_TOL

    def __post_init__(self):
        phi = np.asarray(self.features, dtype=complex)
        if phi.shape != (self.kernel.size, self.measure.size):
            raise ShapeMismatch(
                f"features must be {self.kernel.size}x{self.measure.size}, "
                f"got {phi.shape}"
            )
        phi.setflags(write=False)
        object.__setattr__(self, "features", phi)
        if self.tol < 0:
            raise ShapeMismatch("tolerance must be nonnegative")

    @property
    def n_points(self) -> int:
        return self.kernel.size

    @property
    def n_atoms(self) -> int:
        return self.measure.size


@dataclass(frozen=True)
class MeasureMorphism:
    """Map phi from the atoms of ``source`` onto the atoms of ``target``."""

    source: DiscreteMeasure
    target: DiscreteMeasure
    map: dict = field(default_factory=dict)

    def __post_init__(self):
        mapping = dict(self.map)
        missing = [a for a in self.source.atoms if a not in mapping]
        if missing:
            raise LabelMismatch(f"map is not total on source atoms: missing {missing!r}")
        extra = [a for a in mapping if a not in self.source.atoms]
        if extra:
            raise LabelMismatch(f"map defined on unknown source atoms {extra!r}")
        bad = [v for v in mapping.values() if v not in self.target.atoms]
        if bad:
            raise LabelMismatch(f"map hits unknown target atoms {bad!r}")
        object.__setattr__(self, "map", mapping)

    def target_index_of_source(self) -> np.ndarray:
        """phi as an index array: position j holds the target index of source atom j."""
        return np.array(
            [self.target.index(self.map[a]) for a in self.source.atoms], dtype=int
        )


def l2_inner(g, h, measure: DiscreteMeasure) -> complex:
    """Weighted inner product <g, h> = sum_x g(x) conj(h(x)) mu(x)."""
    gv = np.asarray(g, dtype=complex).ravel()
    hv = np.asarray(h, dtype=complex).ravel()
    if gv.size != measure.size or hv.size != measure.size:
        raise ShapeMismatch("L2 vectors must have one entry per atom")
    return complex(np.sum(gv * np.conj(hv) * measure.weights))


def l2_norm_squared(g, measure: DiscreteMeasure) -> float:
    return l2_inner(g, g, measure).real


def verify_factorization(F: BoundaryFactorization) -> float:
    """Max-abs residual of the factorization identity Phi D Phi^* - G."""
    weighted = F.features * F.measure.weights[None, :]
    recon = weighted @ np.conj(F.features).T
    residual = float(np.abs(recon - F.kernel.gram).max()) if F.kernel.size else 0.0
    return residual


def is_factorization(F: BoundaryFactorization, tol: float | None = None) -> bool:
    """Membership check: the identity holds within ``tol`` (the declared
    tolerance when None)."""
    limit = F.tol if tol is None else tol
    return verify_factorization(F) <= limit


def minimality_test(
    F: BoundaryFactorization, rank_tol: float | None = None
) -> dict:
    """Finite model of tightness: do the features span L^2(mu)?

    The features k_{s_i} are rows of the feature matrix; they span the
    m-dimensional L^2(mu) exactly when the matrix has rank m.  Weights are
    strictly positive, so the rank is computed on the sqrt-weighted matrix,
    which is the actual L^2(mu) geometry.
    """
    weighted = F.features * np.sqrt(F.measure.weights)[None, :]
    if weighted.size == 0:
        rank = 0
    elif rank_tol is None:
        rank = int(np.linalg.matrix_rank(weighted))
    else:
        svals = np.linalg.svd(weighted, compute_uv=False)
        rank = int(np.sum(svals > rank_tol * svals[0])) if svals.size else 0
    return {"is_minimal": rank == F.n_atoms, "feature_rank": rank}


def _require_factorization(F: BoundaryFactorization) -> None:
    residual = verify_factorization(F)
    if residual > F.tol:
        raise NotAFactorization(
            f"factorization residual {residual!r} exceeds declared tolerance {F.tol!r}"
        )


def apply_W(F: BoundaryFactorization, f: RkhsElement) -> np.ndarray:
    """Isometry W: kernel sections to boundary features, as a vector over atoms.

    On generators W K(., s) = k_s; the extension off the generators is
    conjugate-linear, W f = sum_i conj(xi_i) k_{s_i}.  With sections taken
    in the first kernel argument this is the unique extension under which
    the factorization identity makes W norm-preserving: the mu-weighted
    squared norm of the output equals rkhs_inner(f, f) for every
    coefficient vector, not just real ones.
    """
    _require_factorization(F)
    if not same_base(f.base, F.kernel):
        raise BaseMismatch("element is not based on the factorized kernel")
    return F.features.T @ np.conj(f.coeffs)


def apply_V(F: BoundaryFactorization, g) -> np.ndarray:
    """Adjoint transform (V g)(s_i) = sum_x g(x) conj(k_{s_i}(x)) mu(x).

    Returns the values of V g at every base point.  On a verified
    factorization, feeding a feature row k_t back through V reproduces
    the factorization identity: the output is the Gram row of t.
    """
    gv = np.asarray(g, dtype=complex).ravel()
    if gv.size != F.n_atoms:
        raise ShapeMismatch(
            f"L2 vector has length {gv.size}, measure has {F.n_atoms} atoms"
        )
    return np.conj(F.features) @ (F.measure.weights * gv)


def _hermitian_pinv(M: np.ndarray, rank_tol: float) -> np.ndarray:
    eigs, vecs = np.linalg.eigh(M)
    lam_max = max(float(eigs[-1]), 0.0) if eigs.size else 0.0
    inv = np.zeros_like(eigs)
    keep = eigs > rank_tol * max(lam_max, 1e-300)
    inv[keep] = 1.0 / eigs[keep]
    return (vecs * inv[None, :]) @ np.conj(vecs).T


def range_projection(F: BoundaryFactorization, rank_tol: float | None = None) -> np.ndarray:
    """Matrix of P = W W^* on L^2(mu): mu-orthogonal projection onto span{k_s}.

    Built from the actual mu-Gram of the features (which equals conj(G)
    for an exact factorization), pseudo-inverted at the same relative rank
    threshold used for frames, so P is a projection even on degenerate or
    statistically factorized kernels.
    """
    if rank_tol is None:
        rank_tol = default_rank_tol(F.n_points)
    phi = F.features
    d = F.measure.weights
    # mu-Gram of the feature rows; equals conj(G) when the identity is exact.
    mu_gram = (np.conj(phi) * d[None, :]) @ phi.T
    return phi.T @ _hermitian_pinv(mu_gram, rank_tol) @ (np.conj(phi) * d[None, :])


def projection_spectrum(F: BoundaryFactorization, rank_tol: float | None = None) -> np.ndarray:
    """Eigenvalues of the range projection, computed on its Hermitian
    similarity transform D^(1/2) P D^(-1/2); they lie in {0, 1}."""
    if rank_tol is None:
        rank_tol = default_rank_tol(F.n_points)
    sqrt_w = np.sqrt(F.measure.weights)
    B = sqrt_w[:, None] * F.features.T
    mu_gram = np.conj(B).T @ B
    S = B @ _hermitian_pinv(mu_gram, rank_tol) @ np.conj(B).T
    return np.linalg.eigvalsh(S)


def check_isometry(F: BoundaryFactorization, rank_tol: float | None = None) -> dict:
    """Residuals for W^* W = I and for W W^* being a mu-self-adjoint projection.

    W^* W - I, read through Gram coordinates, reduces exactly to the
    factorization identity, so its residual is the verify_factorization
    residual.  The projection residual is the max of |P^2 - P| and
    |P_adj - P| entries, the adjoint taken in the mu-weighted inner
    product.
    """
    _require_factorization(F)
    wstar_w_residual = verify_factorization(F)
    P = range_projection(F, rank_tol)
    idem = float(np.abs(P @ P - P).max()) if P.size else 0.0
    d = F.measure.weights
    adj = (np.conj(P).T * d[None, :]) / d[:, None]
    self_adj = float(np.abs(adj - P).max()) if P.size else 0.0
    return {
        "wstar_w_residual": wstar_w_residual,
        "projection_residual": max(idem, self_adj),
    }


def schwarz_bound_check(F: BoundaryFactorization, g, xi) -> dict:
    """Cauchy-Schwarz bound for the transform pair.

    lhs = |sum_i xi_i (V g)(s_i)|^2,
    rhs = ||g||^2_{L2(mu)} * sum_{ij} xi_i conj(xi_j) K(s_i, s_j);
    holds iff lhs <= rhs * (1 + 1e-9).
    """
    xv = np.asarray(xi, dtype=complex).ravel()
    if xv.size != F.n_points:
        raise ShapeMismatch(
            f"coefficient vector has length {xv.size}, kernel has {F.n_points} points"
        )
    vg = apply_V(F, g)
    lhs = float(np.abs(np.sum(xv * vg)) ** 2)
    quad = np.real(np.conj(xv) @ (F.kernel.gram @ xv))
    rhs = float(l2_norm_squared(g, F.measure) * quad)
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs <= rhs * (1.0 + 1e-9) + 1e-300)}


def check_morphism(
    m: MeasureMorphism,
    F1: BoundaryFactorization,
    F2: BoundaryFactorization,
    tol: float = MORPHISM_TOL,
) -> dict:
    """Order-relation check for two factorizations of the same kernel.

    pushforward_ok: the source weights push onto the target weights.
    sigma_ok: phi is injective (power-set model of the sigma-algebra
    condition; on finite atomic spaces pulling back the target power set
    separates source atoms exactly when phi is injective).
    diagram_ok: features_2[i, x] = features_1[i, phi(x)], i.e. the source
    transform factors through composition with phi on generators.
    """
    if not same_base(F1.kernel, F2.kernel):
        raise LabelMismatch("factorizations do not share a base kernel")
    if m.source.atoms != F2.measure.atoms or not np.array_equal(
        m.source.weights, F2.measure.weights
    ):
        raise LabelMismatch("morphism source must be the measure of F2")
    if m.target.atoms != F1.measure.atoms or not np.array_equal(
        m.target.weights, F1.measure.weights
    ):
        raise LabelMismatch("morphism target must be the measure of F1")

    idx = m.target_index_of_source()
    pushed = np.zeros(m.target.size)
    np.add.at(pushed, idx, m.source.weights)
    pushforward_ok = bool(np.abs(pushed - m.target.weights).max() <= tol)

    sigma_ok = bool(len(set(idx.tolist())) == m.source.size)

    pulled = F1.features[:, idx]
    diagram_dev = (
        float(np.abs(F2.features - pulled).max()) if F2.features.size else 0.0
    )
    diagram_ok = bool(diagram_dev <= tol)

    return {
        "pushforward_ok": pushforward_ok,
        "sigma_ok": sigma_ok,
        "diagram_ok": diagram_ok,
    }


def pullback(F1: BoundaryFactorization, m: MeasureMorphism) -> BoundaryFactorization:
    """Factorization over the morphism source with features composed with phi."""
    if m.target.atoms != F1.measure.atoms:
        raise LabelMismatch("morphism target must be the measure of F1")
    idx = m.target_index_of_source()
    return BoundaryFactorization(
        kernel=F1.kernel,
        measure=m.source,
        features=F1.features[:, idx],
        tol=F1.tol,
    )


def pullback_isometry_residual(m: MeasureMorphism, f) -> float:
    """|  ||f o phi||^2_{mu_2} - ||f||^2_{mu_1} | for a function f on target atoms."""
    fv = np.asarray(f, dtype=complex).ravel()
    if fv.size != m.target.size:
        raise ShapeMismatch("f must have one value per target atom")
    idx = m.target_index_of_source()
    lhs = float(np.sum(np.abs(fv[idx]) ** 2 * m.source.weights))
    rhs = float(np.sum(np.abs(fv) ** 2 * m.target.weights))
    return abs(lhs - rhs)


def from_parseval_frame(frame: ParsevalFrame, tol: float = DEFAULT_FACTORIZATION_TOL) -> BoundaryFactorization:
    """Counting-measure factorization carried by a Parseval frame.

    Atoms are the frame indices with weight one; features are the frame
    rows transposed, so the factorization identity is the frame
    reconstruction identity.
    """
    m = frame.retained_rank
    return BoundaryFactorization(
        kernel=frame.base,
        measure=DiscreteMeasure.counting(m),
        features=frame.frame.T.copy(),
        tol=tol,
    )
