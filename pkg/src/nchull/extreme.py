"""Dilation of hull points and refutation of absolute extremeness.

The pipeline mirrors, at a fixed truncation level, the obstruction that rules
out absolute extreme points: completing a witness isometry to a unitary
produces a dilation of the point that is unitarily equivalent to the ambient
amplified truncation, whose minimal reducing subspaces all have the
truncation dimension once the truncation itself is irreducible.  A point of
dimension n that is not a plain multiple of the truncation therefore cannot
split off as a direct summand, and the certificate records every fact needed
to re-check that argument independently.  The pipeline refutes; it never
certifies that a point IS absolute extreme.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TOL, InvariantBreach
from .linalg import (
    CommutantReport,
    SelfAdjointTuple,
    as_complex_matrix,
    commutant,
    complete_to_unitary,
    equivalence_probe,
    hermitize,
    kron,
    opnorm,
    random_isometry,
)
from .hull import HullPoint, hull_point
from .model import CompactTupleModel

__all__ = [
    "DilationCertificate",
    "RefutationReasons",
    "RefutationCertificate",
    "EscapeRow",
    "NOT_ABSOLUTE_EXTREME",
    "INCONCLUSIVE",
    "canonical_dilation",
    "reducing_dimensions",
    "refute_absolute_extreme",
    "diag_invariant_support",
    "escape_experiment",
]

NOT_ABSOLUTE_EXTREME = "not_absolute_extreme"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, eq=False)
class DilationCertificate:
    """A hull point dilated to the full ambient amplified truncation.

    U is the unitary completion [V | V_perp] of the point's witness, dilation
    is U*(I tensor X^level)U, whose leading corner reproduces the point within
    compression_residual.  equivalence_to_ambient records that the dilation
    agrees with the conjugated ambient within 1e-10, which holds by
    construction.
    """

    point: HullPoint
    dilation: SelfAdjointTuple
    U: np.ndarray
    compression_residual: float
    equivalence_to_ambient: bool


def canonical_dilation(
    point: HullPoint,
    iso_tol: float = TOL.iso_tol,
    corner_tol: float = 1e-9,
) -> DilationCertificate:
    """Complete the witness isometry to a unitary and conjugate the ambient."""
    u = complete_to_unitary(point.V, iso_tol=iso_tol)
    x = point.model.truncate(point.level)
    eye = np.eye(point.multiplicity)
    raw = [u.conj().T @ kron(eye, xi) @ u for xi in x]
    dilation = SelfAdjointTuple(tuple(hermitize(r) for r in raw))
    ambient_residual = max(opnorm(d - r) for d, r in zip(dilation, raw))
    n = point.dim
    corner_residual = max(
        opnorm(d[:n, :n] - y) for d, y in zip(dilation, point.Y)
    )
    if corner_residual > corner_tol:
        raise InvariantBreach(
            f"dilation corner misses the point by {corner_residual:.3e}"
        )
    return DilationCertificate(
        point=point,
        dilation=dilation,
        U=u,
        compression_residual=corner_residual,
        equivalence_to_ambient=bool(ambient_residual <= 1e-10),
    )


def reducing_dimensions(
    t: SelfAdjointTuple, rank_tol: float = TOL.rank_tol, seed: int = 0
) -> tuple[int, ...]:
    """Sorted dimensions of the minimal reducing subspaces of a tuple."""
    return commutant(t, rank_tol=rank_tol, seed=seed).minimal_block_dims


@dataclass(frozen=True, eq=False)
class RefutationReasons:
    """Structured facts backing a refutation verdict.

    Every field can be recomputed from the point's model, level and
    multiplicity alone, so serialized certificates re-verify independently.
    embedded_reducing_residual measures how far range(V) is from being a
    reducing subspace of the ambient tuple; were the point to split off as a
    direct summand this residual would vanish, which the block structure
    forbids whenever the point dimension is not a multiple of the level.
    """

    base_commutant_dim: int
    base_block_dims: tuple[int, ...]
    base_residual: float
    ambient_commutant_dim: int | None
    ambient_block_dims: tuple[int, ...] | None
    ambient_residual: float | None
    blocks_all_equal_level: bool | None
    n_mod_level: int
    embedded_reducing_residual: float | None
    probe_ran: bool
    probe_not_distinguished: bool | None
    probe_trials: int


@dataclass(frozen=True, eq=False)
class RefutationCertificate:
    point: HullPoint
    verdict: str
    reasons: RefutationReasons


def refute_absolute_extreme(
    point: HullPoint,
    rank_tol: float = TOL.rank_tol,
    probe_trials: int = 8,
    probe_tol: float = TOL.probe_tol,
    seed: int = 0,
) -> RefutationCertificate:
    """Run the dilation-plus-reducing-subspace refutation on a hull point.

    Steps: verify the truncation is irreducible; build the canonical
    dilation; verify the minimal reducing subspaces of the ambient tuple all
    have the truncation dimension (this is checked against the commutant
    oracle per instance, never assumed); conclude not_absolute_extreme when
    the point dimension is not a multiple of the level, otherwise fall back
    to the spectra probe against the plain multiple of the truncation.  Any
    step that cannot be certified yields an inconclusive verdict, never a
    refutation.
    """
    n, l, m = point.dim, point.level, point.multiplicity
    x = point.model.truncate(l)
    base = commutant(x, rank_tol=rank_tol, seed=seed)
    n_mod = n % l
    if base.commutant_dim != 1:
        reasons = RefutationReasons(
            base_commutant_dim=base.commutant_dim,
            base_block_dims=base.minimal_block_dims,
            base_residual=base.residual,
            ambient_commutant_dim=None,
            ambient_block_dims=None,
            ambient_residual=None,
            blocks_all_equal_level=None,
            n_mod_level=n_mod,
            embedded_reducing_residual=None,
            probe_ran=False,
            probe_not_distinguished=None,
            probe_trials=probe_trials,
        )
        return RefutationCertificate(point, INCONCLUSIVE, reasons)

    canonical_dilation(point)

    ambient = SelfAdjointTuple(tuple(kron(np.eye(m), xi) for xi in x))
    amb = commutant(ambient, rank_tol=rank_tol, seed=seed)
    blocks_ok = (
        amb.minimal_block_dims == (l,) * m and amb.commutant_dim == m * m
    )

    proj = point.V @ point.V.conj().T
    embedded_residual = max(
        opnorm((np.eye(m * l) - proj) @ a @ proj) for a in ambient
    )

    probe_ran = False
    probe_result: bool | None = None
    if blocks_ok and n_mod == 0:
        reference = SelfAdjointTuple(
            tuple(kron(np.eye(n // l), xi) for xi in x)
        )
        probe_ran = True
        probe_result = equivalence_probe(
            point.Y, reference, trials=probe_trials, tol=probe_tol, seed=seed
        )

    reasons = RefutationReasons(
        base_commutant_dim=base.commutant_dim,
        base_block_dims=base.minimal_block_dims,
        base_residual=base.residual,
        ambient_commutant_dim=amb.commutant_dim,
        ambient_block_dims=amb.minimal_block_dims,
        ambient_residual=amb.residual,
        blocks_all_equal_level=blocks_ok,
        n_mod_level=n_mod,
        embedded_reducing_residual=embedded_residual,
        probe_ran=probe_ran,
        probe_not_distinguished=probe_result,
        probe_trials=probe_trials,
    )
    if not blocks_ok:
        return RefutationCertificate(point, INCONCLUSIVE, reasons)
    if n_mod != 0:
        return RefutationCertificate(point, NOT_ABSOLUTE_EXTREME, reasons)
    if probe_result is False:
        return RefutationCertificate(point, NOT_ABSOLUTE_EXTREME, reasons)
    return RefutationCertificate(point, INCONCLUSIVE, reasons)


def diag_invariant_support(
    t: SelfAdjointTuple,
    basis: list,
    dist_tol: float = TOL.dist_tol,
    ortho_tol: float = 1e-10,
    invariance_tol: float = 1e-9,
    support_tol: float = 1e-9,
) -> tuple[int, ...] | None:
    """Coordinate support of an invariant subspace of a distinct-norm diagonal.

    The first coordinate of t must be diagonal with entries of pairwise
    distinct absolute values (gap at least `dist_tol`); basis must be
    orthonormal.  If span(basis) is invariant under that coordinate, its
    support J (0-based indices of coordinates any basis vector touches above
    `support_tol`) is returned after checking that the span equals the sum of
    the coordinate subspaces over J.  Returns None when the span is not
    invariant.
    """
    d = t[0]
    dim = t.dim
    off = d - np.diag(np.diagonal(d))
    if opnorm(off) > 1e-12:
        raise ValueError("first coordinate is not diagonal")
    entries = tuple(float(x.real) for x in np.diagonal(d))
    from .model import _distinct_abs_violation

    collision = _distinct_abs_violation(entries, dist_tol)
    if collision is not None:
        raise ValueError(
            f"diagonal entries {collision[0]} and {collision[1]} have "
            "colliding absolute values"
        )
    b = np.column_stack([as_complex_matrix(v).reshape(-1) for v in basis])
    if b.shape[0] != dim:
        raise ValueError(f"basis vectors live in C^{b.shape[0]}, tuple is {dim}-dimensional")
    gram_defect = opnorm(b.conj().T @ b - np.eye(b.shape[1]))
    if gram_defect > ortho_tol:
        raise ValueError(f"basis is not orthonormal (defect {gram_defect:.3e})")

    proj = b @ b.conj().T
    image = d @ b
    if opnorm(image - proj @ image) > invariance_tol:
        return None

    support = np.nonzero(np.abs(b).max(axis=1) > support_tol)[0]
    j = tuple(int(i) for i in support)
    if len(j) != b.shape[1]:
        raise InvariantBreach(
            f"support size {len(j)} does not match span dimension {b.shape[1]}"
        )
    eye = np.eye(dim)
    for idx in j:
        if float(np.linalg.norm(eye[:, idx] - proj @ eye[:, idx])) > invariance_tol:
            raise InvariantBreach(
                f"coordinate {idx} is in the support but not in the span"
            )
    return j


@dataclass(frozen=True)
class EscapeRow:
    level: int
    seed: int
    verdict: str
    min_reducing_dim: int


def escape_experiment(
    model: CompactTupleModel,
    n: int,
    levels: list[int],
    multiplicity: int,
    seeds: list[int],
    rank_tol: float = TOL.rank_tol,
    probe_trials: int = 8,
) -> list[EscapeRow]:
    """Sample hull points across levels and refute each one.

    For every (level, seed) pair a random witness isometry produces an
    n-dimensional hull point, which then runs through
    :func:`refute_absolute_extreme`.  Rows are emitted in (level, seed) order.
    An empty seed list yields an empty report.
    """
    rows = []
    for level in sorted(set(int(l) for l in levels)):
        for seed in seeds:
            v = random_isometry(n, multiplicity * level, seed)
            point = hull_point(model, level, multiplicity, v)
            cert = refute_absolute_extreme(
                point, rank_tol=rank_tol, probe_trials=probe_trials, seed=seed
            )
            dims = cert.reasons.ambient_block_dims
            rows.append(
                EscapeRow(
                    level=level,
                    seed=int(seed),
                    verdict=cert.verdict,
                    min_reducing_dim=min(dims) if dims else 0,
                )
            )
    return rows
