"""Single-step operators and iteration drivers for the two-set problem K ∩ U.

``K`` is any closed convex set from the catalog and ``U`` an affine subspace
(or any set with an affine projector, such as the diagonal subspace of the
product-space reformulation). Three families are provided:

* CRM: ``z -> circumcenter{z, R_K(z), R_U R_K(z)}``, for ``z in U``;
* MAP: ``z -> P_U(P_K(z))``;
* DRM: ``z -> (z + R_U(R_K(z))) / 2``.

plus serial and weighted-average compositions of CRM over several sets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy import linalg as la

from .circumcenter import circumcenter
from .errors import (
    DegenerateConfiguration,
    InconsistentIntersection,
    NotInAffine,
    WeightError,
)
from .sets import ConvexSet, as_point

__all__ = [
    "Method",
    "Status",
    "SolverConfig",
    "IterationTrace",
    "crm_step",
    "map_step",
    "drm_step",
    "serial_crm_step",
    "averaged_crm_step",
    "gap",
    "run",
]

# Below this (relative) distance between z and R_K(z) the circumcenter system
# is near-singular and z is already a fixed point for practical purposes.
FIXED_POINT_TOL = 1e-14
# Allowed drift of an iterate from U before crm_step refuses to proceed.
AFFINE_TOL = 1e-8


class Method(str, enum.Enum):
    CRM = "CRM"
    MAP = "MAP"
    DRM = "DRM"
    SERIAL_CRM = "SerialCRM"
    AVERAGED_CRM = "AveragedCRM"


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class SolverConfig:
    """Driver configuration.

    ``tol`` is the gap tolerance of the stopping rule (default ``1e-6``),
    ``weights`` applies to :data:`Method.AVERAGED_CRM` only and must be
    strictly positive and sum to 1.
    """

    tol: float = 1e-6
    max_iter: int = 100_000
    method: Method = Method.CRM
    weights: tuple[float, ...] | None = None
    record_trace: bool = False

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter <= 0:
            raise ValueError("max_iter must be positive")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.size == 0 or np.any(w <= 0):
                raise WeightError("weights must be strictly positive")
            if abs(float(w.sum()) - 1.0) > 1e-12:
                raise WeightError("weights must sum to 1")


@dataclass
class IterationTrace:
    """Record of one solver run.

    ``gaps`` holds one value per visited iterate (length ``iterations + 1``);
    ``iterates`` is populated only when the run was configured with
    ``record_trace=True``.
    """

    gaps: list[float]
    iterations: int
    status: Status
    final_point: np.ndarray
    iterates: list[np.ndarray] | None = field(default=None)


def _check_in_affine(U: ConvexSet, z: np.ndarray) -> None:
    if float(la.norm(z - U.project(z))) > AFFINE_TOL * (1.0 + float(la.norm(z))):
        raise NotInAffine("iterate is not in the affine set U")


def _crm_from_projection(z: np.ndarray, pk: np.ndarray, U: ConvexSet) -> np.ndarray:
    """CRM update given ``pk = P_K(z)``; assumes z in U."""
    rk = 2.0 * pk - z
    if float(la.norm(z - rk)) < FIXED_POINT_TOL * (1.0 + float(la.norm(z))):
        return z
    return circumcenter((z, rk, U.reflect(rk))).center


def crm_step(K: ConvexSet, U: ConvexSet, z) -> np.ndarray:
    """One circumcentered-reflection step ``circ{z, R_K(z), R_U R_K(z)}``.

    Requires ``z in U`` (within ``1e-8`` relative); the result again lies in
    ``U``, and ``z`` is a fixed point exactly when ``z in K ∩ U``.
    """
    z = as_point(z, U.dim)
    _check_in_affine(U, z)
    return _crm_from_projection(z, K.project(z), U)


def map_step(K: ConvexSet, U: ConvexSet, z) -> np.ndarray:
    """One alternating-projections step ``P_U(P_K(z))``."""
    z = as_point(z, U.dim)
    return U.project(K.project(z))


def drm_step(K: ConvexSet, U: ConvexSet, z) -> np.ndarray:
    """One Douglas-Rachford step ``(z + R_U(R_K(z))) / 2``.

    Unlike CRM and MAP, the result need not lie in ``U``.
    """
    z = as_point(z, U.dim)
    return 0.5 * (z + U.reflect(K.reflect(z)))


def serial_crm_step(Ks, U: ConvexSet, z) -> np.ndarray:
    """CRM steps applied through ``Ks`` in order; stays in ``U``."""
    for K in Ks:
        z = crm_step(K, U, z)
    return z


def averaged_crm_step(Ks, U: ConvexSet, weights, z) -> np.ndarray:
    """Convex combination ``sum_i w_i * crm_step(K_i, U, z)``."""
    Ks = list(Ks)
    if weights is None:
        raise WeightError("weights are required")
    w = np.asarray(weights, dtype=float)
    if w.size != len(Ks):
        raise WeightError(f"{len(Ks)} sets but {w.size} weights")
    if np.any(w <= 0) or abs(float(w.sum()) - 1.0) > 1e-12:
        raise WeightError("weights must be strictly positive and sum to 1")
    z = as_point(z, U.dim)
    out = np.zeros_like(z)
    for wi, K in zip(w, Ks):
        out += wi * crm_step(K, U, z)
    return out


def gap(K: ConvexSet, U: ConvexSet, z) -> float:
    """Infeasibility measure ``||P_U(z) - P_K(z)||`` used for stopping."""
    z = as_point(z)
    return float(la.norm(U.project(z) - K.project(z)))


def _normalize_sets(K, method: Method):
    if isinstance(K, ConvexSet):
        Ks = [K]
    else:
        Ks = list(K)
        if not Ks:
            raise ValueError("need at least one set")
    if method in (Method.CRM, Method.MAP, Method.DRM) and len(Ks) != 1:
        raise ValueError(f"{method.value} takes a single set; got {len(Ks)}")
    return Ks


def run(K, U: ConvexSet, z0, config: SolverConfig) -> IterationTrace:
    """Iterate the configured method from ``z0`` until the gap drops below tol.

    ``z0`` is projected onto ``U`` before the first step for every method
    (CRM requires it; MAP and DRM share the start for a fair comparison). The
    stopping gap is evaluated on the raw iterate for all methods, even though
    DRM iterates may leave ``U``. Gap projections are reused by the next step
    so the stopping test adds no extra projection cost for CRM/MAP/DRM.

    ``K`` is a single set for CRM/MAP/DRM and a sequence of sets for
    SerialCRM/AveragedCRM (stopping then uses the worst per-set gap).
    """
    method = config.method
    Ks = _normalize_sets(K, method)
    z = U.project(as_point(z0, U.dim))

    gaps: list[float] = []
    iterates: list[np.ndarray] | None = [z] if config.record_trace else None
    iterations = 0
    status = Status.MAX_ITER
    single = Ks[0] if len(Ks) == 1 else None

    while True:
        pu = U.project(z)
        if single is not None:
            pk = single.project(z)
            g = float(la.norm(pu - pk))
        else:
            pk = None
            g = max(float(la.norm(pu - Ki.project(z))) for Ki in Ks)
        gaps.append(g)
        if g < config.tol:
            status = Status.CONVERGED
            break
        if iterations >= config.max_iter:
            status = Status.MAX_ITER
            break
        try:
            if method is Method.CRM:
                z = _crm_from_projection(z, pk, U)
            elif method is Method.MAP:
                z = U.project(pk)
            elif method is Method.DRM:
                z = 0.5 * (z + U.reflect(2.0 * pk - z))
            elif method is Method.SERIAL_CRM:
                z = serial_crm_step(Ks, U, z)
            else:
                z = averaged_crm_step(Ks, U, config.weights, z)
        except (DegenerateConfiguration, InconsistentIntersection, NotInAffine):
            status = Status.DEGENERATE
            break
        iterations += 1
        if iterates is not None:
            iterates.append(z)

    return IterationTrace(
        gaps=gaps,
        iterations=iterations,
        status=status,
        final_point=z,
        iterates=iterates,
    )
