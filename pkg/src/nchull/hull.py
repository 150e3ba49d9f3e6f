"""Witnessed construction of hull points and the operations on them.

A hull point is a tuple of the form V*(I_m tensor X^level)V for an isometry V
into an amplified truncation; the witness (level, multiplicity, V) is kept
with the point so membership can be re-verified at any time.  Matrix convex
combinations assemble a new witness constructively, contractions lift to
isometries once a finite-interior witness is available, and convergence
sweeps compare a fixed compression across truncation levels against the
certified tail bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TOL, GuardError, InvariantBreach
from .linalg import (
    SelfAdjointTuple,
    as_complex_matrix,
    hermitize,
    kron,
    opnorm,
    sqrt_psd,
)
from .model import CompactTupleModel, FiniteInteriorWitness, embed_witness

__all__ = [
    "HullPoint",
    "IsometryLiftResult",
    "SweepRow",
    "hull_point",
    "verify_hull_point",
    "matrix_convex_combine",
    "lift_contraction_to_isometry",
    "convergence_sweep",
]


@dataclass(frozen=True, eq=False)
class HullPoint:
    """A tuple Y together with the isometry that witnesses its membership.

    Y = V*(I_multiplicity tensor X^level)V up to witness_residual, where X is
    the model's truncation at `level` and V is an (multiplicity*level) x dim(Y)
    isometry.  weakly_proper is set only for points built by
    :func:`matrix_convex_combine` and records whether every block was nonzero.
    """

    model: CompactTupleModel
    Y: SelfAdjointTuple
    level: int
    multiplicity: int
    V: np.ndarray
    witness_residual: float
    weakly_proper: bool | None = None

    def __post_init__(self):
        v = as_complex_matrix(self.V).copy()
        m, l, n = self.multiplicity, self.level, self.Y.dim
        if v.shape != (m * l, n):
            raise ValueError(f"V has shape {v.shape}, expected ({m * l}, {n})")
        v.flags.writeable = False
        object.__setattr__(self, "V", v)

    @property
    def dim(self) -> int:
        return self.Y.dim


def _ambient(model: CompactTupleModel, level: int, multiplicity: int) -> list[np.ndarray]:
    x = model.truncate(level)
    eye = np.eye(multiplicity)
    return [kron(eye, m) for m in x]


def _isometry_defect(v: np.ndarray) -> float:
    return opnorm(v.conj().T @ v - np.eye(v.shape[1]))


def hull_point(
    model: CompactTupleModel,
    level: int,
    multiplicity: int,
    V,
    iso_tol: float = TOL.iso_tol,
) -> HullPoint:
    """Compress the amplified truncation by an isometry, keeping the witness.

    V must be an (multiplicity*level) x n isometry with n <= multiplicity*level.
    The stored residual is recomputed from the constructed point, so it is
    roundoff-level by construction.
    """
    v = as_complex_matrix(V)
    if multiplicity < 1:
        raise ValueError("multiplicity must be positive")
    rows = multiplicity * level
    if v.shape[0] != rows or v.shape[1] > rows:
        raise ValueError(
            f"V has shape {v.shape}, expected ({rows}, n) with n <= {rows}"
        )
    defect = _isometry_defect(v)
    if defect > iso_tol:
        raise ValueError(f"V is not an isometry (defect {defect:.3e})")
    amb = _ambient(model, level, multiplicity)
    raw = [v.conj().T @ a @ v for a in amb]
    y = SelfAdjointTuple(tuple(hermitize(r) for r in raw))
    residual = max(opnorm(yk - r) for yk, r in zip(y, raw))
    return HullPoint(model, y, level, multiplicity, v, residual)


def verify_hull_point(point: HullPoint) -> float:
    """Recompute ||Y - V*(I tensor X^level)V|| from the stored fields."""
    amb = _ambient(point.model, point.level, point.multiplicity)
    v = point.V
    return max(
        opnorm(yk - v.conj().T @ a @ v) for yk, a in zip(point.Y, amb)
    )


def matrix_convex_combine(
    points: list[HullPoint],
    Vs: list,
    partition_tol: float = TOL.partition_tol,
) -> HullPoint:
    """Matrix convex combination sum_i V_i* Y^i V_i with witness assembly.

    The V_i map C^n into the constituent dimensions and must satisfy
    sum_i V_i* V_i = I_n.  Membership of the result is preserved
    constructively: stacking the maps (witness of Y^i) composed with V_i gives
    an isometry into the direct sum of the constituent ambient copies, so the
    new multiplicity is the sum of the old ones.  A combination containing a
    zero block is still valid but flagged as not weakly proper.
    """
    if not points:
        raise ValueError("need at least one point")
    if len(points) != len(Vs):
        raise ValueError(f"{len(points)} points but {len(Vs)} maps")
    model, level = points[0].model, points[0].level
    for p in points:
        if p.level != level:
            raise ValueError(f"level mismatch: {p.level} != {level}")
        if p.model != model:
            raise ValueError("points must share the same model")
    vs = [as_complex_matrix(v) for v in Vs]
    n = vs[0].shape[1]
    for p, v in zip(points, vs):
        if v.shape != (p.dim, n):
            raise ValueError(
                f"map has shape {v.shape}, expected ({p.dim}, {n})"
            )
    total = sum(v.conj().T @ v for v in vs)
    defect = opnorm(total - np.eye(n))
    if defect > partition_tol:
        raise ValueError(f"maps do not sum to the identity (defect {defect:.3e})")
    weakly_proper = all(opnorm(v) > 0.0 for v in vs)

    y = SelfAdjointTuple(
        tuple(
            hermitize(
                sum(v.conj().T @ p.Y[i] @ v for p, v in zip(points, vs))
            )
            for i in range(points[0].Y.g)
        )
    )
    stacked = np.vstack([p.V @ v for p, v in zip(points, vs)])
    multiplicity = sum(p.multiplicity for p in points)
    out = HullPoint(model, y, level, multiplicity, stacked, 0.0, weakly_proper)
    residual = verify_hull_point(out)
    return HullPoint(model, y, level, multiplicity, stacked, residual, weakly_proper)


@dataclass(frozen=True, eq=False)
class IsometryLiftResult:
    """Isometry T replacing a contraction W without changing the compression.

    T stacks the zero-witness block over W; zero_block_multiplicity counts the
    extra ambient copies consumed by that block, and equality_residual bounds
    ||T*(I tensor X)T - W*(I tensor X)W|| over the coordinates.
    """

    T: np.ndarray
    zero_block_multiplicity: int
    equality_residual: float


def lift_contraction_to_isometry(
    model: CompactTupleModel,
    level: int,
    W,
    witness: FiniteInteriorWitness,
    equality_tol: float = TOL.equality_tol,
    iso_tol: float = TOL.iso_tol,
) -> IsometryLiftResult:
    """Replace a contraction by an isometry with the same compression.

    Writes T as [Z (I - W*W)^(1/2); W] where Z sends e_j to e_j tensor v for
    the witness vector v.  Because v annihilates the amplified truncation, the
    added block contributes nothing to T*(I tensor X)T, while (I - W*W)^(1/2)
    restores exact isometry.  Requires ||W|| <= 1 and a witness residual small
    enough to certify the equality at `equality_tol`.
    """
    w = as_complex_matrix(W)
    if w.shape[0] % level != 0:
        raise ValueError(f"W has {w.shape[0]} rows, not a multiple of level {level}")
    m = w.shape[0] // level
    n = w.shape[1]
    wnorm = opnorm(w)
    if wnorm > 1.0 + 1e-12:
        raise ValueError(f"W is not a contraction (norm {wnorm!r})")
    if witness.level > level:
        raise ValueError(
            f"witness lives at level {witness.level}, cannot certify level {level}"
        )
    witness = embed_witness(witness, level, model)
    if witness.residual > equality_tol:
        raise GuardError(
            f"witness residual {witness.residual:.3e} too large to certify "
            f"equality at {equality_tol:.1e}"
        )
    d = witness.d
    zcol = witness.vector.reshape(-1, 1)
    zblock = kron(np.eye(n), zcol)
    gap = sqrt_psd(np.eye(n) - w.conj().T @ w, tol=1e-10)
    t = np.vstack([zblock @ gap, w])

    iso_defect = _isometry_defect(t)
    if iso_defect > iso_tol:
        raise InvariantBreach(f"lifted T is not an isometry (defect {iso_defect:.3e})")
    x = model.truncate(level)
    lhs = [t.conj().T @ kron(np.eye(n * d + m), xi) @ t for xi in x]
    rhs = [w.conj().T @ kron(np.eye(m), xi) @ w for xi in x]
    equality_residual = max(opnorm(a - b) for a, b in zip(lhs, rhs))
    if equality_residual > equality_tol:
        raise InvariantBreach(
            f"two-sided equality fails: residual {equality_residual:.3e}"
        )
    return IsometryLiftResult(
        T=t, zero_block_multiplicity=n * d, equality_residual=equality_residual
    )


@dataclass(frozen=True)
class SweepRow:
    level: int
    error: float
    bound: float


def convergence_sweep(
    model: CompactTupleModel,
    V,
    levels: list[int],
    sweep_slack: float = TOL.sweep_slack,
    iso_tol: float = TOL.iso_tol,
) -> list[SweepRow]:
    """Truncation-convergence sweep for a fixed compression.

    V is an isometry into the amplified truncation at L = max(levels); lower
    levels are evaluated by compressing the level-L truncation with the
    coordinate projection, i.e. Y^l = V*(I tensor P_l X^L P_l)V.  Each row
    reports error(l) = max_i ||Y^l_i - Y^L_i|| next to the certified tail
    bound.  The sweep asserts error(l) <= 2 * tail_bound(l) and that the error
    column is nonincreasing within `sweep_slack`; a violation raises
    InvariantBreach.  The monotonicity assertion is guaranteed for square V
    (where the error equals the ambient tail norm) but can genuinely fire for
    thin compressions.
    """
    if not levels:
        raise ValueError("levels must be nonempty")
    levels = sorted(set(int(l) for l in levels))
    top = levels[-1]
    if levels[0] < 1 or top > model.max_level:
        raise ValueError(f"levels outside 1..{model.max_level}")
    v = as_complex_matrix(V)
    if v.shape[0] % top != 0:
        raise ValueError(f"V has {v.shape[0]} rows, not a multiple of L = {top}")
    m = v.shape[0] // top
    defect = _isometry_defect(v)
    if defect > iso_tol:
        raise ValueError(f"V is not an isometry (defect {defect:.3e})")

    x_top = model.truncate(top)
    eye = np.eye(m)
    vh = v.conj().T
    y_top = [hermitize(vh @ kron(eye, xi) @ v) for xi in x_top]

    rows = []
    for l in levels:
        compressed = []
        for xi in x_top:
            xc = np.array(xi)
            xc[l:, :] = 0.0
            xc[:, l:] = 0.0
            compressed.append(xc)
        y_l = [hermitize(vh @ kron(eye, xc) @ v) for xc in compressed]
        error = max(opnorm(a - b) for a, b in zip(y_l, y_top))
        rows.append(SweepRow(level=l, error=error, bound=model.tail_bound(l)))

    for row in rows:
        if row.error > 2.0 * row.bound:
            raise InvariantBreach(
                f"error {row.error:.3e} exceeds twice the tail bound "
                f"{row.bound:.3e} at level {row.level}"
            )
    for prev, cur in zip(rows, rows[1:]):
        if cur.error > prev.error + sweep_slack:
            raise InvariantBreach(
                f"error increases from level {prev.level} ({prev.error:.3e}) "
                f"to level {cur.level} ({cur.error:.3e})"
            )
    return rows
