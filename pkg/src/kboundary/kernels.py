"""Kernel definitions, Gram assembly and positive definiteness checks.

A kernel here is a Hermitian positive definite function on S x S for a
finite point set S.  Closed forms cover the Szego kernel of the disk,
its k-fold polydisk product and the de Branges-Rovnyak-type kernel built
from a circle measure; arbitrary Hermitian tables are accepted as well.

All scalar storage is complex double precision.  Kernels whose values
are intrinsically real carry the field tag ``"real"`` so downstream
consumers (Gaussian sampling, densities) can pick the right convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainViolation,
    NotHermitian,
    ShapeMismatch,
)
from .measures import CircleMeasure

# Strict interior guard: points this close to the torus make 1/(1 - z w~)
# cancel catastrophically.
DISK_RADIUS_BOUND = 1.0 - 1e-15

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class PointSet:
    """Ordered finite point set with distinct labels and k-dim complex coords."""

    labels: tuple
    coords: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise ShapeMismatch("point labels must be pairwise distinct")
        c = np.asarray(self.coords, dtype=complex)
        if c.ndim == 1:
            c = c.reshape(-1, 1)
        if c.ndim != 2 or c.shape[0] != len(labels) or c.shape[1] < 1:
            raise ShapeMismatch(
                f"coords must be (n_points, k>=1), got shape {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return int(self.coords.shape[1])

    def index(self, label) -> int:
        from .errors import UnknownLabel

        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"unknown point label {label!r}") from None

    def restrict(self, indices) -> "PointSet":
        idx = list(indices)
        return PointSet(
            labels=tuple(self.labels[i] for i in idx),
            coords=self.coords[idx, :],
        )

    @classmethod
    def from_points(cls, points, labels=None) -> "PointSet":
        """Build from a sequence of scalars (k=1) or coordinate tuples."""
        arr = np.asarray(list(points), dtype=complex)
        if labels is None:
            labels = tuple(f"p{i}" for i in range(arr.shape[0]))
        return cls(labels=tuple(labels), coords=arr)


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel to evaluate, plus its domain constraint.

    Variants: ``szego`` (k=1 disk), ``polydisk-szego`` (k-fold product),
    ``debranges-rovnyak`` (needs a circle measure), ``table`` (explicit
    Hermitian matrix).
    """

    variant: str
    dim: int = 1
    measure: CircleMeasure | None = None
    table: np.ndarray | None = field(default=None)

    VARIANTS = ("szego", "polydisk-szego", "debranges-rovnyak", "table")

    def __post_init__(self):
        if self.variant not in self.VARIANTS:
            raise ShapeMismatch(f"unknown kernel variant {self.variant!r}")
        if self.variant == "debranges-rovnyak" and self.measure is None:
            raise ShapeMismatch("debranges-rovnyak variant requires a measure")
        if self.variant == "table":
            if self.table is None:
                raise ShapeMismatch("table variant requires a matrix")
            t = np.asarray(self.table, dtype=complex)
            if t.ndim != 2 or t.shape[0] != t.shape[1]:
                raise ShapeMismatch("table must be square")
            scale = max(1.0, float(np.abs(t).max()) if t.size else 1.0)
            if np.abs(t - t.conj().T).max() > HERMITIAN_TOL * scale:
                raise NotHermitian("table variant requires a Hermitian matrix")
            t.setflags(write=False)
            object.__setattr__(self, "table", t)
        if self.dim < 1:
            raise ShapeMismatch("kernel dimension must be >= 1")

    @classmethod
    def szego(cls) -> "KernelSpec":
        return cls(variant="szego")

    @classmethod
    def polydisk(cls, k: int) -> "KernelSpec":
        return cls(variant="polydisk-szego", dim=k)

    @classmethod
    def debranges_rovnyak(cls, measure: CircleMeasure) -> "KernelSpec":
        return cls(variant="debranges-rovnyak", measure=measure)

    @classmethod
    def from_table(cls, matrix) -> "KernelSpec":
        return cls(variant="table", table=matrix)


@dataclass(frozen=True)
class FiniteKernel:
    """Hermitian matrix of kernel values over a labeled point set."""

    points: PointSet
    gram: np.ndarray
    field_tag: str = "complex"

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=complex)
        n = self.points.size
        if g.shape != (n, n):
            raise ShapeMismatch(f"gram must be {n}x{n}, got {g.shape}")
        scale = max(1.0, float(np.abs(g).max()) if g.size else 1.0)
        if n and np.abs(g - g.conj().T).max() > HERMITIAN_TOL * scale:
            raise NotHermitian("gram matrix is not Hermitian")
        # Mirror the upper triangle so Hermitian symmetry holds bit for bit.
        g = _hermitian_mirror(g)
        g.setflags(write=False)
        object.__setattr__(self, "gram", g)
        if self.field_tag not in ("real", "complex"):
            raise ShapeMismatch(f"field_tag must be real or complex, got {self.field_tag!r}")

    @property
    def size(self) -> int:
        return self.points.size

    def restrict(self, indices) -> "FiniteKernel":
        idx = list(indices)
        return FiniteKernel(
            points=self.points.restrict(idx),
            gram=self.gram[np.ix_(idx, idx)],
            field_tag=self.field_tag,
        )


@dataclass(frozen=True)
class PsdReport:
    min_eigenvalue: float
    max_eigenvalue: float
    is_psd: bool


def _hermitian_mirror(g: np.ndarray) -> np.ndarray:
    out = np.array(g, dtype=complex)
    n = out.shape[0]
    iu = np.triu_indices(n, k=1)
    out[(iu[1], iu[0])] = np.conj(out[iu])
    di = np.diag_indices(n)
    out[di] = out[di].real
    return out


def _check_in_disk(z: np.ndarray) -> None:
    if np.any(np.abs(z) >= DISK_RADIUS_BOUND):
        worst = np.abs(z).max()
        raise DomainViolation(
            f"evaluation point has |z| = {worst!r}, outside the open disk guard"
        )


def szego_eval(z: complex, w: complex) -> complex:
    """Szego kernel of the disk, 1 / (1 - z conj(w))."""
    z = complex(z)
    w = complex(w)
    _check_in_disk(np.array([z, w]))
    return 1.0 / (1.0 - z * np.conj(w))


def polydisk_szego_eval(z, w) -> complex:
    """Product of 1-d Szego kernels over the coordinates of the polydisk."""
    zv = np.asarray(z, dtype=complex).ravel()
    wv = np.asarray(w, dtype=complex).ravel()
    if zv.size != wv.size:
        raise DimensionMismatch(
            f"point dimensions differ: {zv.size} vs {wv.size}"
        )
    _check_in_disk(zv)
    _check_in_disk(wv)
    return complex(np.prod(1.0 / (1.0 - zv * np.conj(wv))))


def _kernel_callable(spec: KernelSpec):
    if spec.variant == "szego":
        return lambda z, w: szego_eval(z[0], w[0])
    if spec.variant == "polydisk-szego":
        return polydisk_szego_eval
    if spec.variant == "debranges-rovnyak":
        # Imported here: clark builds on this module.
        from .clark import InnerFunctionB, kb_eval

        b = InnerFunctionB(measure=spec.measure)
        return lambda z, w: kb_eval(b, z[0], w[0])
    raise ShapeMismatch(f"no callable for variant {spec.variant!r}")


def assemble_gram(spec: KernelSpec, points: PointSet) -> FiniteKernel:
    """Evaluate the kernel pairwise over the point set.

    The upper triangle is evaluated once and mirrored, so the result is
    Hermitian exactly.  Disk-type kernels require every coordinate strictly
    inside the unit disk; the table variant requires a matrix of matching
    size.
    """
    n = points.size
    if spec.variant == "table":
        if spec.table.shape != (n, n):
            raise ShapeMismatch(
                f"table is {spec.table.shape}, point set has {n} points"
            )
        tag = "real" if np.abs(spec.table.imag).max(initial=0.0) == 0.0 else "complex"
        return FiniteKernel(points=points, gram=spec.table, field_tag=tag)

    expected_dim = spec.dim if spec.variant == "polydisk-szego" else 1
    if points.dim != expected_dim:
        raise DimensionMismatch(
            f"variant {spec.variant!r} expects {expected_dim}-dim points, "
            f"got {points.dim}"
        )
    _check_in_disk(points.coords)

    eval_pair = _kernel_callable(spec)
    gram = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            gram[i, j] = eval_pair(points.coords[i], points.coords[j])
            if j > i:
                gram[j, i] = np.conj(gram[i, j])
    return FiniteKernel(points=points, gram=gram, field_tag="complex")


def check_positive_definite(K: FiniteKernel, tol: float = 1e-10) -> PsdReport:
    """Eigenvalue-based PSD check with a relative tolerance.

    ``is_psd`` holds iff min_eig >= -tol * max(1, max_eig).  The report
    carries both extreme eigenvalues so callers can judge margins.
    """
    if tol < 0:
        raise ShapeMismatch("tolerance must be nonnegative")
    g = K.gram
    scale = max(1.0, float(np.abs(g).max()) if g.size else 1.0)
    if g.size and np.abs(g - g.conj().T).max() > HERMITIAN_TOL * scale:
        raise NotHermitian("gram matrix is not Hermitian")
    if K.size == 0:
        return PsdReport(min_eigenvalue=0.0, max_eigenvalue=0.0, is_psd=True)
    eigs = np.linalg.eigvalsh(g)
    lo = float(eigs[0])
    hi = float(eigs[-1])
    return PsdReport(
        min_eigenvalue=lo,
        max_eigenvalue=hi,
        is_psd=bool(lo >= -tol * max(1.0, hi)),
    )
