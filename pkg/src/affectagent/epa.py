"""Affective-space primitives.

Sentiments live in the 3-D evaluation/potency/activity (EPA) space.  A full
interaction state stacks three EPA triples (actor, behaviour, object) into a
9-vector; both the slowly-changing fundamentals and the event-driven
transients use this layout.
"""

from __future__ import annotations

import warnings

import numpy as np

OBJECTS = ("a", "b", "c")  # actor (agent), behaviour, object (client)
DIMENSIONS = ("e", "p", "a")  # evaluation, potency, activity

# Index dictionaries mapping symbolic (object, dimension) pairs to vector
# positions: flat index = 3 * D_OBJECT[obj] + D_DIMENSION[dim].
D_OBJECT = {"a": 0, "b": 1, "c": 2}
D_DIMENSION = {"e": 0, "p": 1, "a": 2}

ACTOR = slice(0, 3)
BEHAVIOUR = slice(3, 6)
OBJECT = slice(6, 9)

# Conventional rating scale bound; dynamics may exceed it, so it is advisory.
EPA_RANGE = 4.3

# Permutation that swaps the actor and object blocks (self-inverse).
SWAP_AC = np.array([6, 7, 8, 3, 4, 5, 0, 1, 2])


class EpaRangeWarning(UserWarning):
    """Raised (as a warning) when a sentiment leaves the conventional scale."""


def flat_index(obj: str, dim: str) -> int:
    """Map an (object, dimension) pair to its 0..8 vector position."""
    try:
        return 3 * D_OBJECT[obj] + D_DIMENSION[dim]
    except KeyError:
        raise ValueError(f"unknown object/dimension pair ({obj!r}, {dim!r})") from None


def index_pair(k: int) -> tuple[str, str]:
    """Inverse of flat_index."""
    if not 0 <= k <= 8:
        raise ValueError(f"flat index out of range: {k}")
    return OBJECTS[k // 3], DIMENSIONS[k % 3]


def as_triple(value) -> np.ndarray:
    """Coerce to a finite 3-vector (one EPA point)."""
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"expected an EPA triple, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("EPA triple has non-finite components")
    return arr


def as_sentiment(value) -> np.ndarray:
    """Coerce to a finite 9-vector (actor, behaviour, object EPA blocks)."""
    arr = np.asarray(value, dtype=float)
    if arr.shape != (9,):
        raise ValueError(f"expected a 9-D sentiment vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sentiment vector has non-finite components")
    return arr


def check_range(value, label: str = "sentiment") -> np.ndarray:
    """Validate finiteness; warn (never raise) outside the +-4.3 convention."""
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{label} has non-finite components")
    if np.any(np.abs(arr) > EPA_RANGE):
        warnings.warn(
            f"{label} outside the conventional -{EPA_RANGE}..{EPA_RANGE} range",
            EpaRangeWarning,
            stacklevel=2,
        )
    return arr


def combine(identities, behaviour_source) -> np.ndarray:
    """Merge two 9-vectors: identity blocks from the first argument,
    behaviour block from the second."""
    w = as_sentiment(identities)
    z = as_sentiment(behaviour_source)
    out = w.copy()
    out[BEHAVIOUR] = z[BEHAVIOUR]
    return out


def swap_actor_object(vec: np.ndarray) -> np.ndarray:
    """Exchange actor and object blocks (used for turn-taking)."""
    return np.asarray(vec, dtype=float)[..., SWAP_AC]


class DeflectionWeights:
    """Weights for the squared-distance deflection.

    Either nine non-negative per-component weights (the classic diagonal
    form) or a full 9x9 symmetric positive-definite matrix ``sigma`` whose
    inverse weights the quadratic form.  ``diag(w)`` and ``sigma =
    diag(1/w)`` describe the same deflection.
    """

    def __init__(self, weights=None, sigma=None):
        if weights is not None and sigma is not None:
            raise ValueError("give either diagonal weights or a sigma matrix, not both")
        if sigma is not None:
            mat = np.asarray(sigma, dtype=float)
            if mat.shape != (9, 9):
                raise ValueError("sigma must be 9x9")
            if not np.allclose(mat, mat.T, atol=1e-12):
                raise ValueError("sigma must be symmetric")
            eigvals = np.linalg.eigvalsh(mat)
            if np.min(eigvals) <= 0:
                raise ValueError("sigma must be positive-definite")
            self.sigma = mat
            self.weights = None
        else:
            w = np.ones(9) if weights is None else np.asarray(weights, dtype=float)
            if w.shape != (9,):
                raise ValueError("need nine weights")
            if np.any(w < 0):
                raise ValueError("weights must be non-negative")
            self.weights = w
            self.sigma = None

    def apply(self, residual: np.ndarray) -> float:
        r = np.asarray(residual, dtype=float)
        if self.weights is not None:
            return float(np.sum(self.weights * r * r))
        return float(r @ np.linalg.solve(self.sigma, r))


def deflection(f, tau, weights: DeflectionWeights | None = None) -> float:
    """Weighted squared distance between fundamentals and transients.

    With unit weights this is the plain sum of squared differences over all
    nine components; zero exactly when the two vectors agree.
    """
    w = weights if weights is not None else DeflectionWeights()
    return w.apply(as_sentiment(f) - as_sentiment(tau))
