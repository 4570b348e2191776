"""Finite atomic measures: the computational stand-in for (B, ℬ, mu).

Two flavors are used throughout:

* ``DiscreteMeasure`` -- labeled atoms with positive weights, optionally
  carrying coordinates in [0,1)^k.  The sigma-algebra is always the full
  power set of the atoms.
* ``CircleMeasure`` -- atoms are points of [0,1) identified with the unit
  circle via e(x) = exp(i 2 pi x).  Finite atomic measures on the circle
  are automatically singular with respect to arc length.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidMeasure

NORMALIZATION_TOL = 1e-12


def _as_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise InvalidMeasure("weights must be a nonempty 1-d array")
    if np.any(w <= 0.0):
        raise InvalidMeasure("all weights must be strictly positive")
    return w


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite atomic positive measure on labeled atoms.

    ``coords`` is optional; when present it holds one coordinate tuple in
    [0,1)^k per atom (used by the polydisk density test) and the tuples
    must be pairwise distinct.
    """

    atoms: tuple
    weights: np.ndarray
    normalized: bool = True
    coords: np.ndarray | None = field(default=None)

    def __post_init__(self):
        atoms = tuple(self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if len(set(atoms)) != len(atoms):
            raise InvalidMeasure("atom labels must be pairwise distinct")
        w = _as_weights(self.weights)
        if w.size != len(atoms):
            raise InvalidMeasure("weights and atoms must have equal length")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.normalized and abs(w.sum() - 1.0) > NORMALIZATION_TOL:
            raise InvalidMeasure(
                f"normalized measure must have total mass 1, got {w.sum()!r}"
            )
        if self.coords is not None:
            c = np.atleast_2d(np.asarray(self.coords, dtype=float))
            if c.shape[0] != len(atoms):
                raise InvalidMeasure("coords must supply one tuple per atom")
            if np.any(c < 0.0) or np.any(c >= 1.0):
                raise InvalidMeasure("coords must lie in [0,1)^k")
            if len({tuple(row) for row in c}) != c.shape[0]:
                raise InvalidMeasure("coordinate tuples must be pairwise distinct")
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)

    @property
    def size(self) -> int:
        return len(self.atoms)

    def total_mass(self) -> float:
        return float(self.weights.sum())

    @classmethod
    def counting(cls, n: int) -> "DiscreteMeasure":
        """Counting measure on n atoms labeled 0..n-1 (weights 1, not normalized)."""
        return cls(atoms=tuple(range(n)), weights=np.ones(n), normalized=False)

    def index(self, atom) -> int:
        try:
            return self.atoms.index(atom)
        except ValueError:
            raise InvalidMeasure(f"unknown atom {atom!r}") from None


@dataclass(frozen=True)
class CircleMeasure:
    """Finite atomic probability measure on the circle, atoms in [0,1)."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.atoms, dtype=float)
        if x.ndim != 1 or x.size == 0:
            raise InvalidMeasure("atoms must be a nonempty 1-d array")
        if np.any(x < 0.0) or np.any(x >= 1.0):
            raise InvalidMeasure("atoms must lie in [0,1)")
        if len(set(x.tolist())) != x.size:
            raise InvalidMeasure("atoms must be pairwise distinct")
        w = _as_weights(self.weights)
        if w.size != x.size:
            raise InvalidMeasure("weights and atoms must have equal length")
        if abs(w.sum() - 1.0) > NORMALIZATION_TOL:
            raise InvalidMeasure(
                f"circle measure must be a probability measure, got mass {w.sum()!r}"
            )
        x.setflags(write=False)
        object.__setattr__(self, "atoms", x)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return int(self.atoms.size)

    def boundary_points(self) -> np.ndarray:
        """Atom positions on the unit circle, e(x) = exp(i 2 pi x)."""
        return np.exp(2j * np.pi * self.atoms)

    def as_discrete(self) -> DiscreteMeasure:
        """View as a labeled DiscreteMeasure with the atom coordinates attached."""
        return DiscreteMeasure(
            atoms=tuple(float(x) for x in self.atoms),
            weights=np.array(self.weights),
            normalized=True,
            coords=self.atoms.reshape(-1, 1),
        )
