"""Catalog of closed convex sets with exact projection and reflection operators.

Every set knows its ambient dimension and exposes ``project``, ``reflect``
(``2 P - Id``) and ``contains``. Descriptors are immutable after construction
and all operations are pure, so shared instances are safe to use from
multiple threads.
"""

from __future__ import annotations

import numpy as np
from numpy import linalg as la

from .errors import DimensionMismatch, ParseError

__all__ = [
    "as_point",
    "ConvexSet",
    "Halfspace",
    "Hyperplane",
    "AffineSubspace",
    "Ball",
    "Box",
    "SecondOrderCone",
    "set_to_dict",
    "set_from_dict",
]


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float64 vector, optionally of length ``dim``.

    Raises
    ------
    DimensionMismatch
        If ``x`` is not 1-D or its length differs from ``dim``.
    ValueError
        If any entry is NaN or infinite.
    """
    p = np.asarray(x, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got array of shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite entries")
    if dim is not None and p.size != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {p.size}")
    return p


class ConvexSet:
    """A nonempty closed convex set in R^n with an exact orthogonal projector."""

    dim: int

    def _project(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project(self, x) -> np.ndarray:
        """Nearest point of the set to ``x``."""
        return self._project(as_point(x, self.dim))

    def reflect(self, x) -> np.ndarray:
        """Reflection ``2 P(x) - x`` across the set."""
        x = as_point(x, self.dim)
        return 2.0 * self._project(x) - x

    def contains(self, x, tol: float = 1e-10) -> bool:
        """True iff the distance from ``x`` to the set is at most ``tol``."""
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        x = as_point(x, self.dim)
        return float(la.norm(x - self._project(x))) <= tol


class Halfspace(ConvexSet):
    """Halfspace ``{x : a^T x <= b}`` with nonzero normal ``a``."""

    def __init__(self, a, b: float):
        self.a = as_point(a)
        if not np.any(self.a):
            raise ValueError("halfspace normal must be nonzero")
        self.b = float(b)
        self.dim = self.a.size
        self._a_sq = float(self.a @ self.a)

    def _project(self, x):
        r = float(self.a @ x) - self.b
        if r <= 0.0:
            return x
        return x - (r / self._a_sq) * self.a

    def __repr__(self):
        return f"Halfspace(dim={self.dim}, b={self.b})"


class Hyperplane(ConvexSet):
    """Hyperplane ``{x : a^T x = b}`` with nonzero normal ``a``."""

    def __init__(self, a, b: float):
        self.a = as_point(a)
        if not np.any(self.a):
            raise ValueError("hyperplane normal must be nonzero")
        self.b = float(b)
        self.dim = self.a.size
        self._a_sq = float(self.a @ self.a)

    def _project(self, x):
        r = float(self.a @ x) - self.b
        return x - (r / self._a_sq) * self.a

    def __repr__(self):
        return f"Hyperplane(dim={self.dim}, b={self.b})"


class AffineSubspace(ConvexSet):
    """Affine subspace ``{x : A x = b}``.

    The projector is cached at construction: a thin SVD of ``A`` yields an
    orthonormal basis ``V`` of the row space and the minimum-norm particular
    solution ``x_p``, and then ``P(x) = x - V V^T (x - x_p)``. Singular values
    below ``1e-12 * sigma_max`` are treated as zero, so rank-deficient (but
    consistent) systems are handled.

    Raises
    ------
    ValueError
        If the system ``A x = b`` is inconsistent (least-squares residual
        above ``1e-10 * (1 + ||b||)``).
    """

    RANK_TOL = 1e-12
    CONSISTENCY_TOL = 1e-10

    def __init__(self, A, b):
        A = np.asarray(A, dtype=float)
        if A.ndim == 1:
            A = A.reshape(1, -1)
        if A.ndim != 2:
            raise DimensionMismatch(f"A must be a matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("A has non-finite entries")
        self.A = A
        self.b = as_point(b, A.shape[0])
        self.dim = A.shape[1]

        U, s, Vt = la.svd(A, full_matrices=False)
        rank = int(np.sum(s > self.RANK_TOL * s[0])) if s.size else 0
        self._V = Vt[:rank].T  # n x r orthonormal basis of the row space
        self._xp = self._V @ ((U[:, :rank].T @ self.b) / s[:rank])
        residual = float(la.norm(A @ self._xp - self.b))
        if residual > self.CONSISTENCY_TOL * (1.0 + float(la.norm(self.b))):
            raise ValueError(f"inconsistent system A x = b (residual {residual:.3e})")

    def _project(self, x):
        d = x - self._xp
        return x - self._V @ (self._V.T @ d)

    @property
    def rank(self) -> int:
        return self._V.shape[1]

    def __repr__(self):
        return f"AffineSubspace(dim={self.dim}, rows={self.A.shape[0]}, rank={self.rank})"


class Ball(ConvexSet):
    """Closed Euclidean ball with given center and positive radius."""

    def __init__(self, center, radius: float):
        self.center = as_point(center)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        self.dim = self.center.size

    def _project(self, x):
        d = x - self.center
        dist = float(la.norm(d))
        if dist <= self.radius:
            return x
        return self.center + (self.radius / dist) * d

    def __repr__(self):
        return f"Ball(dim={self.dim}, radius={self.radius})"


class Box(ConvexSet):
    """Axis-aligned box ``{x : lower <= x <= upper}`` (componentwise)."""

    def __init__(self, lower, upper):
        self.lower = as_point(lower)
        self.upper = as_point(upper, self.lower.size)
        if np.any(self.lower > self.upper):
            raise ValueError("box requires lower <= upper componentwise")
        self.dim = self.lower.size

    def _project(self, x):
        return np.clip(x, self.lower, self.upper)

    def __repr__(self):
        return f"Box(dim={self.dim})"


class SecondOrderCone(ConvexSet):
    """Second-order (Lorentz) cone ``{(t, u) in R x R^(n-1) : ||u|| <= t}``.

    The projector is the standard closed form: points inside the cone are
    fixed, points inside the polar cone (``||u|| <= -t``) map to the origin,
    and all others map to ``((t + ||u||) / 2) * (1, u / ||u||)``.
    """

    def __init__(self, n: int):
        if int(n) != n or n < 2:
            raise ValueError("second-order cone needs integer dimension n >= 2")
        self.n = int(n)
        self.dim = self.n

    def _project(self, x):
        t, u = x[0], x[1:]
        nu = float(la.norm(u))
        if nu <= t:
            return x
        if nu <= -t:
            return np.zeros_like(x)
        s = 0.5 * (t + nu)
        out = np.empty_like(x)
        out[0] = s
        out[1:] = (s / nu) * u
        return out

    def __repr__(self):
        return f"SecondOrderCone(n={self.n})"


# --- JSON codec -------------------------------------------------------------
#
# One object per set: {"type": "halfspace", "a": [...], "b": ...} etc.
# This is the wire format used inside problem files.

def set_to_dict(s: ConvexSet) -> dict:
    """Serialize a set descriptor to a JSON-compatible dict."""
    if isinstance(s, Halfspace):
        return {"type": "halfspace", "a": s.a.tolist(), "b": s.b}
    if isinstance(s, Hyperplane):
        return {"type": "hyperplane", "a": s.a.tolist(), "b": s.b}
    if isinstance(s, AffineSubspace):
        return {"type": "affine", "A": s.A.tolist(), "b": s.b.tolist()}
    if isinstance(s, Ball):
        return {"type": "ball", "center": s.center.tolist(), "radius": s.radius}
    if isinstance(s, Box):
        return {"type": "box", "lower": s.lower.tolist(), "upper": s.upper.tolist()}
    if isinstance(s, SecondOrderCone):
        return {"type": "soc", "n": s.n}
    raise TypeError(f"cannot serialize set of type {type(s).__name__}")


def _require(d: dict, *fields: str) -> list:
    missing = [f for f in fields if f not in d]
    if missing:
        raise ParseError(f"set object missing field(s): {', '.join(missing)}")
    return [d[f] for f in fields]


def set_from_dict(d: dict) -> ConvexSet:
    """Rebuild a set descriptor from its dict form.

    Raises ``ParseError`` on unknown types or missing fields.
    """
    if not isinstance(d, dict) or "type" not in d:
        raise ParseError("set object must be a dict with a 'type' field")
    kind = d["type"]
    try:
        if kind == "halfspace":
            a, b = _require(d, "a", "b")
            return Halfspace(a, b)
        if kind == "hyperplane":
            a, b = _require(d, "a", "b")
            return Hyperplane(a, b)
        if kind == "affine":
            A, b = _require(d, "A", "b")
            return AffineSubspace(A, b)
        if kind == "ball":
            center, radius = _require(d, "center", "radius")
            return Ball(center, radius)
        if kind == "box":
            lower, upper = _require(d, "lower", "upper")
            return Box(lower, upper)
        if kind == "soc":
            (n,) = _require(d, "n")
            return SecondOrderCone(n)
    except (ValueError, DimensionMismatch) as exc:
        raise ParseError(f"invalid '{kind}' set object: {exc}") from exc
    raise ParseError(f"unknown set type {kind!r}")
