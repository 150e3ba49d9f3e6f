"""Dense complex-matrix kernel shared by every other module.

Self-adjoint tuples, Kronecker and direct-sum algebra, compressions, PSD
tests, isometry completion and joint-commutant computation.  All matrices are
``numpy`` arrays coerced to complex128.  Every function is a pure function of
its arguments; randomness always enters through an explicit seed, so results
are deterministic and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import TOL, InvariantBreach

__all__ = [
    "SelfAdjointTuple",
    "CommutantReport",
    "as_complex_matrix",
    "herm_defect",
    "hermitize",
    "opnorm",
    "kron",
    "direct_sum",
    "compress",
    "is_psd",
    "sqrt_psd",
    "complete_to_unitary",
    "random_isometry",
    "random_hermitian",
    "random_contraction",
    "commutant",
    "equivalence_probe",
]


def as_complex_matrix(a) -> np.ndarray:
    """Coerce to a 2-d complex128 array, rejecting non-finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array with ndim={m.ndim}")
    if m.size and not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def herm_defect(a: np.ndarray) -> float:
    """Max-abs deviation of a square matrix from its own adjoint."""
    if a.size == 0:
        return 0.0
    return float(np.abs(a - a.conj().T).max())


def hermitize(a: np.ndarray) -> np.ndarray:
    """Self-adjoint part (A + A*)/2."""
    return (a + a.conj().T) / 2


def opnorm(a: np.ndarray) -> float:
    """Spectral norm; 0 for empty matrices."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True, eq=False)
class SelfAdjointTuple:
    """A g-tuple of same-size complex self-adjoint matrices.

    This is the universal currency of the package: truncated operators, hull
    points, combination outputs and pencil coefficients all live here.  Each
    coordinate must be square, of the common dimension, with max-abs deviation
    from its adjoint at most ``herm_tol`` (validated at construction with the
    package default; re-symmetrize with :func:`hermitize` first if your data
    is noisier).  Real input is embedded into complex.  The stored arrays are
    copies marked read-only.
    """

    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(as_complex_matrix(m).copy() for m in self.matrices)
        if not mats:
            raise ValueError("a tuple needs at least one coordinate")
        dim = mats[0].shape[0]
        for k, m in enumerate(mats):
            if m.shape != (dim, dim):
                raise ValueError(
                    f"coordinate {k} has shape {m.shape}, expected ({dim}, {dim})"
                )
            defect = herm_defect(m)
            if defect > TOL.herm_tol:
                raise ValueError(
                    f"coordinate {k} is not self-adjoint (defect {defect:.3e})"
                )
        for m in mats:
            m.flags.writeable = False
        object.__setattr__(self, "matrices", mats)

    @property
    def g(self) -> int:
        return len(self.matrices)

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]

    def __len__(self) -> int:
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.matrices[i]

    def norms(self) -> tuple[float, ...]:
        """Spectral norm of each coordinate."""
        return tuple(opnorm(m) for m in self.matrices)

    def allclose(self, other: "SelfAdjointTuple", tol: float = 1e-12) -> bool:
        """True when dims agree and every coordinate matches within `tol` (spectral)."""
        if self.g != other.g or self.dim != other.dim:
            return False
        return all(opnorm(a - b) <= tol for a, b in zip(self, other))


def kron(a, b) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def direct_sum(tuples: list[SelfAdjointTuple]) -> SelfAdjointTuple:
    """Coordinate-wise block-diagonal sum of tuples sharing the same g."""
    if not tuples:
        raise ValueError("direct_sum needs at least one tuple")
    g = tuples[0].g
    for t in tuples:
        if t.g != g:
            raise ValueError(f"mismatched tuple lengths: {t.g} != {g}")
    return SelfAdjointTuple(
        tuple(
            scipy.linalg.block_diag(*(t[i] for t in tuples)) for i in range(g)
        )
    )


def compress(t: SelfAdjointTuple, v) -> SelfAdjointTuple:
    """Conjugate each coordinate by v: returns (v* M_1 v, ..., v* M_g v).

    v must have dim(t) rows.  The result is re-symmetrized to stop
    self-adjointness drift from accumulating across nested compressions.
    """
    v = as_complex_matrix(v)
    if v.shape[0] != t.dim:
        raise ValueError(f"v has {v.shape[0]} rows, tuple dimension is {t.dim}")
    vh = v.conj().T
    return SelfAdjointTuple(tuple(hermitize(vh @ m @ v) for m in t))


def is_psd(h, tol: float = TOL.psd_tol, herm_tol: float = TOL.herm_tol) -> bool:
    """True iff the smallest eigenvalue of self-adjoint h is >= -tol."""
    h = as_complex_matrix(h)
    defect = herm_defect(h)
    if defect > herm_tol:
        raise ValueError(f"matrix is not self-adjoint (defect {defect:.3e})")
    w = np.linalg.eigvalsh(h)
    return bool(w[0] >= -tol)


def sqrt_psd(h, tol: float = TOL.psd_tol, herm_tol: float = TOL.herm_tol) -> np.ndarray:
    """Self-adjoint PSD square root of a PSD matrix.

    Eigenvalues in [-tol, 0) are clamped to 0; anything below -tol raises.
    The output S satisfies ``opnorm(S @ S - h) <= 1e-10 * (1 + opnorm(h))``.
    """
    h = as_complex_matrix(h)
    defect = herm_defect(h)
    if defect > herm_tol:
        raise ValueError(f"matrix is not self-adjoint (defect {defect:.3e})")
    w, u = np.linalg.eigh(h)
    if w[0] < -tol:
        raise ValueError(f"matrix is not PSD within tol: min eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    return hermitize((u * np.sqrt(w)) @ u.conj().T)


def _check_isometry(v: np.ndarray, iso_tol: float, what: str = "V") -> None:
    if v.shape[0] < v.shape[1]:
        raise ValueError(f"{what} has more columns than rows: {v.shape}")
    defect = opnorm(v.conj().T @ v - np.eye(v.shape[1]))
    if defect > iso_tol:
        raise ValueError(f"{what} is not an isometry (defect {defect:.3e})")


def complete_to_unitary(v, iso_tol: float = TOL.iso_tol) -> np.ndarray:
    """Extend an isometry to a square unitary [v | v_perp].

    The first columns of the result are exactly (bitwise) the columns of v;
    the complement columns are an orthonormal basis of range(v)^perp.
    """
    v = as_complex_matrix(v)
    _check_isometry(v, iso_tol)
    n, k = v.shape
    if n == k:
        return v
    perp = scipy.linalg.null_space(v.conj().T)
    u = np.hstack([v, perp])
    defect = opnorm(u.conj().T @ u - np.eye(n))
    if u.shape != (n, n) or defect > 1e-10:
        raise InvariantBreach(f"unitary completion failed (defect {defect:.3e})")
    return u


def random_isometry(n_from: int, n_to: int, seed: int) -> np.ndarray:
    """Seeded random n_to x n_from isometry.

    Orthonormalizes a complex Gaussian matrix by QR; the column phases are
    fixed so the factorization is canonical.  Deterministic per seed.
    """
    if n_from < 1 or n_to < n_from:
        raise ValueError(f"need 1 <= n_from <= n_to, got {n_from}, {n_to}")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n_to, n_from)) + 1j * rng.standard_normal((n_to, n_from))
    q, r = np.linalg.qr(a)
    d = np.diagonal(r).copy()
    d[d == 0] = 1.0
    return q * (d / np.abs(d)).conj()


def random_hermitian(dim: int, seed, norm: float = 1.0) -> np.ndarray:
    """Seeded random self-adjoint matrix scaled to the given spectral norm."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = hermitize(a)
    nrm = opnorm(h)
    if nrm > 0:
        h = h * (norm / nrm)
    return h


def random_contraction(rows: int, cols: int, seed, norm: float | None = None) -> np.ndarray:
    """Seeded random rows x cols matrix with spectral norm `norm` (or a random
    norm drawn uniformly from (0, 1) when omitted)."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    target = rng.uniform(0.05, 1.0) if norm is None else norm
    return a * (target / opnorm(a))


@dataclass(frozen=True, eq=False)
class CommutantReport:
    """Joint commutant of a tuple plus the reducing-subspace structure.

    basis is orthonormal under the trace inner product; minimal_block_dims is
    the sorted multiset of dimensions of the minimal reducing subspaces, read
    off from the eigenvalue clusters of a generic self-adjoint commutant
    element.  residual bounds ``max_i opnorm(B M_i - M_i B)`` over the basis.
    """

    tuple_dim: int
    commutant_dim: int
    basis: tuple[np.ndarray, ...]
    minimal_block_dims: tuple[int, ...]
    residual: float


def _cluster_sizes(w: np.ndarray, gap: float) -> list[list[int]]:
    """Group sorted eigenvalues into clusters separated by at least `gap`."""
    clusters = [[0]]
    for j in range(1, len(w)):
        if w[j] - w[j - 1] < gap:
            clusters[-1].append(j)
        else:
            clusters.append([j])
    return clusters


def _split_minimal_blocks(
    t: SelfAdjointTuple,
    basis: tuple[np.ndarray, ...],
    commutant_dim: int,
    seed: int,
    gap: float,
    retries: int = 5,
) -> tuple[int, ...]:
    """Minimal reducing-subspace dimensions via a random self-adjoint
    commutant element.

    A generic element splits the space into eigenspaces that are exactly the
    minimal reducing subspaces.  Each draw is validated: cluster projections
    must commute with every coordinate, the commutant dimension must be
    consistent with the cluster-size multiset, and an independent second draw
    must reproduce the multiset.  Degenerate draws are retried.
    """
    d = t.dim
    comm_tol = 1e-7 * (1.0 + max(opnorm(m) for m in t))

    def one_split(rng) -> tuple[tuple[int, ...], list[np.ndarray]] | None:
        c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        h = hermitize(sum(cj * bj for cj, bj in zip(c, basis)))
        nrm = opnorm(h)
        if nrm == 0:
            return None
        w, u = np.linalg.eigh(h / nrm)
        clusters = _cluster_sizes(w, gap)
        projections = [
            u[:, idx] @ u[:, idx].conj().T for idx in clusters
        ]
        return tuple(sorted(len(idx) for idx in clusters)), projections

    for attempt in range(retries):
        rng = np.random.default_rng([seed, attempt])
        first = one_split(rng)
        if first is None:
            continue
        sizes, projections = first
        if sum(sizes) != d:
            continue
        if any(
            opnorm(p @ m - m @ p) > comm_tol for p in projections for m in t
        ):
            continue
        counts: dict[int, int] = {}
        for s in sizes:
            counts[s] = counts.get(s, 0) + 1
        if not (len(sizes) <= commutant_dim <= sum(c * c for c in counts.values())):
            continue
        second = one_split(np.random.default_rng([seed, attempt, 1]))
        if second is None or second[0] != sizes:
            continue
        return sizes
    raise InvariantBreach(
        f"could not certify a minimal-block splitting in {retries} attempts"
    )


def commutant(
    t: SelfAdjointTuple,
    rank_tol: float = TOL.rank_tol,
    max_dim: int = 64,
    seed: int = 0,
    cluster_gap: float = 1e-6,
) -> CommutantReport:
    """Joint commutant {B : B M_i = M_i B for all i} of a self-adjoint tuple.

    Computed as the nullspace of the stacked commutator maps, with singular
    values below ``rank_tol * sigma_max`` treated as zero.  The dimension cap
    bounds the dim^2-variable solve.
    """
    d = t.dim
    if d > max_dim:
        raise ValueError(f"tuple dimension {d} exceeds the configured cap {max_dim}")
    eye = np.eye(d)
    stacked = np.vstack([np.kron(m, eye) - np.kron(eye, m.T) for m in t])
    _, s, vh = np.linalg.svd(stacked)
    cutoff = rank_tol * (s[0] if s.size else 0.0)
    null_rows = np.nonzero(s <= cutoff)[0]
    basis = tuple(vh[j].conj().reshape(d, d) for j in null_rows)
    residual = max(
        opnorm(b @ m - m @ b) for b in basis for m in t
    )
    blocks = _split_minimal_blocks(t, basis, len(basis), seed, cluster_gap)
    return CommutantReport(
        tuple_dim=d,
        commutant_dim=len(basis),
        basis=basis,
        minimal_block_dims=blocks,
        residual=residual,
    )


def equivalence_probe(
    y: SelfAdjointTuple,
    z: SelfAdjointTuple,
    trials: int = 8,
    tol: float = TOL.probe_tol,
    seed: int = 0,
) -> bool:
    """Necessary-condition probe for unitary equivalence of two tuples.

    Compares the sorted spectra of random real linear combinations of the
    coordinates.  False is conclusive (the tuples are inequivalent); True
    only means "not distinguished in `trials` trials" and is NOT a proof of
    equivalence.
    """
    if y.g != z.g:
        raise ValueError(f"tuples have different lengths: {y.g} != {z.g}")
    if y.dim != z.dim:
        return False
    for k in range(trials):
        rng = np.random.default_rng([seed, k])
        c = rng.standard_normal(y.g)
        wy = np.linalg.eigvalsh(sum(cj * m for cj, m in zip(c, y)))
        wz = np.linalg.eigvalsh(sum(cj * m for cj, m in zip(c, z)))
        if np.abs(wy - wz).max() > tol:
            return False
    return True
