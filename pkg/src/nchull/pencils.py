"""Linear pencils, free-spectrahedron membership and affine-structure checks.

A linear pencil maps a tuple Y to A_0 tensor I - sum_i A_i tensor Y_i.  This
module evaluates pencils, tests spectrahedron membership, measures how far a
map is from being matrix affine, reconstructs pencil coefficients from scalar
samples, and verifies the exact block decomposition that pencil evaluation
satisfies on zero-padded corners.  Block identities are checked against
explicitly constructed permutations, never up to unspecified reordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .config import TOL, GuardError
from .linalg import (
    SelfAdjointTuple,
    as_complex_matrix,
    herm_defect,
    hermitize,
    is_psd,
    kron,
    opnorm,
    random_hermitian,
)
from .model import CompactTupleModel

__all__ = [
    "LinearPencil",
    "identity_pencil",
    "random_symmetric_pencil",
    "eval_pencil",
    "eval_at_scalars",
    "in_spectrahedron",
    "map_affine_residual",
    "matrix_affine_residual",
    "reconstruct_pencil_from_affine",
    "shuffle_permutation",
    "ucp_eval",
    "ucp_decomposition_residual",
]


@dataclass(frozen=True, eq=False)
class LinearPencil:
    """Coefficients (A0, A_1, ..., A_g) of the map y -> A0 - sum A_i y_i.

    The symmetric flag (all coefficients self-adjoint) and the monic flag
    (A0 exactly the identity) are derived from the data at construction.
    """

    A0: np.ndarray
    A: tuple[np.ndarray, ...]
    symmetric: bool = field(init=False)
    monic: bool = field(init=False)

    def __post_init__(self):
        a0 = as_complex_matrix(self.A0).copy()
        coeffs = tuple(as_complex_matrix(a).copy() for a in self.A)
        if not coeffs:
            raise ValueError("a pencil needs at least one coordinate coefficient")
        d = a0.shape[0]
        if a0.shape != (d, d):
            raise ValueError(f"A0 must be square, got {a0.shape}")
        for k, a in enumerate(coeffs):
            if a.shape != (d, d):
                raise ValueError(f"coefficient {k} has shape {a.shape}, expected ({d}, {d})")
        a0.flags.writeable = False
        for a in coeffs:
            a.flags.writeable = False
        object.__setattr__(self, "A0", a0)
        object.__setattr__(self, "A", coeffs)
        symmetric = herm_defect(a0) <= TOL.herm_tol and all(
            herm_defect(a) <= TOL.herm_tol for a in coeffs
        )
        monic = bool(np.array_equal(a0, np.eye(d)))
        object.__setattr__(self, "symmetric", symmetric)
        object.__setattr__(self, "monic", monic)

    @property
    def g(self) -> int:
        return len(self.A)

    @property
    def d(self) -> int:
        return self.A0.shape[0]


def identity_pencil(g: int) -> LinearPencil:
    """The unit of the pencil space: constant 1 with zero coordinate terms."""
    return LinearPencil(np.eye(1), tuple(np.zeros((1, 1)) for _ in range(g)))


def random_symmetric_pencil(
    g: int, d: int, seed, monic: bool = True, coeff_norm: float = 1.0
) -> LinearPencil:
    """Seeded random symmetric pencil with coefficient norms `coeff_norm`."""
    coeffs = tuple(random_hermitian(d, [seed, i], norm=coeff_norm) for i in range(g))
    a0 = np.eye(d) if monic else random_hermitian(d, [seed, g], norm=coeff_norm)
    return LinearPencil(a0, coeffs)


def eval_pencil(p: LinearPencil, y: SelfAdjointTuple) -> np.ndarray:
    """Evaluate on a tuple: A0 tensor I_n - sum_i A_i tensor Y_i.

    Symmetric pencils on self-adjoint tuples give self-adjoint output, which
    is re-symmetrized.
    """
    if p.g != y.g:
        raise ValueError(f"pencil has g={p.g} but tuple has g={y.g}")
    n = y.dim
    out = kron(p.A0, np.eye(n))
    for a, m in zip(p.A, y):
        out = out - kron(a, m)
    return hermitize(out) if p.symmetric else out


def eval_at_scalars(p: LinearPencil, y) -> np.ndarray:
    """Evaluate at a real g-vector (dimension-one tuples): A0 - sum y_i A_i."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != p.g:
        raise ValueError(f"pencil has g={p.g} but point has {y.shape[0]} entries")
    return eval_pencil(p, SelfAdjointTuple(tuple([[v]] for v in y)))


def in_spectrahedron(
    p: LinearPencil, y: SelfAdjointTuple, tol: float = TOL.psd_tol
) -> bool:
    """Membership of Y in the free spectrahedron of a monic symmetric pencil."""
    if not (p.monic and p.symmetric):
        raise ValueError("spectrahedron membership needs a monic symmetric pencil")
    return is_psd(eval_pencil(p, y), tol=tol)


def _check_partition(vs: list[np.ndarray], n: int, partition_tol: float) -> None:
    total = sum(v.conj().T @ v for v in vs)
    defect = opnorm(total - np.eye(n))
    if defect > partition_tol:
        raise ValueError(f"maps do not sum to the identity (defect {defect:.3e})")


def map_affine_residual(
    theta,
    d: int,
    points: list[SelfAdjointTuple],
    Vs: list,
    partition_tol: float = TOL.partition_tol,
) -> float:
    """How far a map is from respecting one matrix convex combination.

    theta sends a tuple of dimension n to a (d*n) x (d*n) matrix.  Returns
    ``||theta(sum V_i* Y^i V_i) - sum (I_d tensor V_i)* theta(Y^i) (I_d tensor V_i)||``
    for maps that are built from a genuine pencil this is roundoff-level, and
    a nonzero value certifies non-affineness.
    """
    if len(points) != len(Vs) or not points:
        raise ValueError("need matching nonempty lists of points and maps")
    vs = [as_complex_matrix(v) for v in Vs]
    n = vs[0].shape[1]
    g = points[0].g
    for y, v in zip(points, vs):
        if y.g != g:
            raise ValueError("points must share g")
        if v.shape != (y.dim, n):
            raise ValueError(f"map has shape {v.shape}, expected ({y.dim}, {n})")
    _check_partition(vs, n, partition_tol)
    combined = SelfAdjointTuple(
        tuple(
            hermitize(sum(v.conj().T @ y[i] @ v for y, v in zip(points, vs)))
            for i in range(g)
        )
    )
    lhs = theta(combined)
    eye = np.eye(d)
    rhs = sum(
        kron(eye, v).conj().T @ theta(y) @ kron(eye, v)
        for y, v in zip(points, vs)
    )
    return opnorm(lhs - rhs)


def matrix_affine_residual(
    p: LinearPencil,
    points: list[SelfAdjointTuple],
    Vs: list,
    partition_tol: float = TOL.partition_tol,
) -> float:
    """:func:`map_affine_residual` specialized to pencil evaluation."""
    return map_affine_residual(
        lambda y: eval_pencil(p, y), p.d, points, Vs, partition_tol=partition_tol
    )


def reconstruct_pencil_from_affine(
    samples: list[tuple[np.ndarray, np.ndarray]],
    cond_limit: float = 1e10,
    fit_tol: float = 1e-10,
) -> LinearPencil:
    """Recover pencil coefficients from scalar-level samples.

    samples are pairs (y, value) with y a real g-vector and value the d x d
    evaluation at y.  Solving needs at least g+1 affinely independent points
    (the canonical choice includes 0); dependence is detected through the
    condition number of the design matrix.  The returned pencil reproduces
    every sample within `fit_tol`, otherwise the data was not affine.
    """
    if not samples:
        raise ValueError("need at least one sample")
    ys = [np.asarray(y, dtype=float).reshape(-1) for y, _ in samples]
    vals = [as_complex_matrix(v) for _, v in samples]
    g = ys[0].shape[0]
    d = vals[0].shape[0]
    for y, v in zip(ys, vals):
        if y.shape[0] != g or v.shape != (d, d):
            raise ValueError("inconsistent sample shapes")
    if len(samples) < g + 1:
        raise GuardError(f"need at least g+1 = {g + 1} samples, got {len(samples)}")
    design = np.column_stack([np.ones(len(ys)), -np.array(ys)])
    cond = np.linalg.cond(design)
    if cond > cond_limit:
        raise GuardError(
            f"affinely dependent sample set (condition number {cond:.3e})"
        )
    flat = np.array([v.reshape(-1) for v in vals])
    coeffs, *_ = np.linalg.lstsq(design, flat, rcond=None)
    a0 = coeffs[0].reshape(d, d)
    a = tuple(coeffs[1 + i].reshape(d, d) for i in range(g))
    pencil = LinearPencil(a0, a)
    worst = max(
        opnorm(eval_at_scalars(pencil, y) - v) for y, v in zip(ys, vals)
    )
    if worst > fit_tol:
        raise GuardError(
            f"samples are not affine: best pencil misses by {worst:.3e}"
        )
    return pencil


def shuffle_permutation(p: int, q: int) -> np.ndarray:
    """Permutation S with S (x tensor y) = y tensor x for x in C^p, y in C^q."""
    s = np.zeros((p * q, p * q))
    for a in range(p):
        for b in range(q):
            s[b * p + a, a * q + b] = 1.0
    return s


def _corner_split_permutation(d: int, n: int, tail: int) -> np.ndarray:
    """Permutation taking C^d tensor C^(n+tail) to (C^d tensor C^n) + (C^d tensor C^tail)."""
    total = n + tail
    s = np.zeros((d * total, d * total))
    for i in range(d):
        for k in range(total):
            new = i * n + k if k < n else d * n + i * tail + (k - n)
            s[new, i * total + k] = 1.0
    return s


def ucp_eval(z: SelfAdjointTuple, p: LinearPencil) -> np.ndarray:
    """Pencil evaluation read as the unital map induced by a fixed tuple.

    The map sends a pencil to its evaluation at z; applied to the identity
    pencil it returns the identity, which is the unitality check.
    """
    return eval_pencil(p, z)


def ucp_decomposition_residual(
    p: LinearPencil, model: CompactTupleModel, n: int, top_level: int
) -> float:
    """Residual of the block decomposition of evaluation on a padded corner.

    Evaluating any pencil on corner_n(X^L) padded with L - n zero rows and
    columns equals, after an explicit permutation, the block-diagonal sum of
    the evaluation on the corner and I_(L-n) tensor the evaluation at 0.  This
    is an exact algebraic identity, so the residual is roundoff-level for
    every pencil and every model.
    """
    if not 1 <= n < top_level <= model.max_level:
        raise ValueError(
            f"need 1 <= n < top_level <= {model.max_level}, got n={n}, top={top_level}"
        )
    corner = model.truncate(n)
    tail = top_level - n
    padded = SelfAdjointTuple(
        tuple(
            scipy.linalg.block_diag(m, np.zeros((tail, tail))) for m in corner
        )
    )
    lhs = eval_pencil(p, padded)
    split = _corner_split_permutation(p.d, n, tail)
    swap_tail = shuffle_permutation(p.d, tail)
    reorder = scipy.linalg.block_diag(np.eye(p.d * n), swap_tail) @ split
    at_zero = eval_pencil(p, SelfAdjointTuple(tuple([[0.0]] for _ in range(p.g))))
    rhs = scipy.linalg.block_diag(eval_pencil(p, corner), kron(np.eye(tail), at_zero))
    return opnorm(reorder @ lhs @ reorder.conj().T - rhs)
