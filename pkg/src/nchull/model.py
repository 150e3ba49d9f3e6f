"""Finite certified stand-ins for compact self-adjoint operator tuples.

A :class:`CompactTupleModel` stores scalar sequences that determine a compact
tuple together with analytic tail bounds, so truncations come with a
certificate of how far they sit from the full operator.  The module also
builds the canonical diagonal-plus-shift example (two coordinates whose
leading corner is offset so that a unit vector annihilates both) and searches
for finite-interior witnesses on arbitrary models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .config import TOL, GuardError
from .linalg import SelfAdjointTuple, as_complex_matrix, kron

__all__ = [
    "MODEL_KINDS",
    "CompactTupleModel",
    "FiniteInteriorWitness",
    "build_diag_shift_example",
    "finite_interior_witness",
    "embed_witness",
]

MODEL_KINDS = ("diagonal", "weighted_shift_sym", "shifted_sum", "custom_sequence")


def _tridiagonal(w: tuple[float, ...], level: int) -> np.ndarray:
    m = np.zeros((level, level), dtype=np.complex128)
    if level > 1:
        off = np.asarray(w[: level - 1], dtype=np.complex128)
        m += np.diag(off, 1) + np.diag(off, -1)
    return m


def _abs_tail_max(seq: tuple[float, ...], start: int) -> float:
    tail = seq[start:]
    return max(abs(x) for x in tail) if tail else 0.0


@dataclass(frozen=True)
class CompactTupleModel:
    """Generator of nested truncations of a compact self-adjoint tuple.

    kind selects how the stored sequences are interpreted:

    - ``diagonal``: one coordinate, diag(lam).
    - ``weighted_shift_sym``: one coordinate, S_w + S_w* for the weighted
      forward shift with weights w.
    - ``shifted_sum``: two coordinates, diag(lam) and S_w + S_w*, each offset
      on its leading 2x2 corner by alpha = (a1, a2).
    - ``custom_sequence``: one diagonal coordinate per entry of `sequences`.

    Truncations at different levels share stored data, so nesting is exact:
    ``truncate(l)`` is bitwise the leading corner of ``truncate(l')`` for
    l <= l'.  Tail bounds are computed analytically from the sequences, never
    from a dense representation of the full operator.
    """

    kind: str
    max_level: int
    lam: tuple[float, ...] = ()
    w: tuple[float, ...] = ()
    alpha: tuple[float, float] | None = None
    sequences: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(float(x) for x in self.lam))
        object.__setattr__(self, "w", tuple(float(x) for x in self.w))
        if self.alpha is not None:
            object.__setattr__(
                self, "alpha", (float(self.alpha[0]), float(self.alpha[1]))
            )
        object.__setattr__(
            self,
            "sequences",
            tuple(tuple(float(x) for x in s) for s in self.sequences),
        )
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.max_level < 1:
            raise ValueError("max_level must be positive")
        if self.kind == "diagonal" and len(self.lam) < self.max_level:
            raise ValueError("diagonal model needs lam up to max_level")
        if self.kind == "weighted_shift_sym" and len(self.w) < self.max_level - 1:
            raise ValueError("shift model needs max_level - 1 weights")
        if self.kind == "shifted_sum":
            if self.alpha is None:
                raise ValueError("shifted_sum model needs alpha = (a1, a2)")
            if len(self.lam) < self.max_level or len(self.w) < self.max_level - 1:
                raise ValueError("shifted_sum model needs lam and w up to max_level")
        if self.kind == "custom_sequence":
            if not self.sequences:
                raise ValueError("custom_sequence model needs at least one sequence")
            if any(len(s) < self.max_level for s in self.sequences):
                raise ValueError("every custom sequence must reach max_level")

    @classmethod
    def diagonal(cls, lam, max_level: int | None = None) -> "CompactTupleModel":
        lam = tuple(float(x) for x in lam)
        return cls("diagonal", max_level or len(lam), lam=lam)

    @classmethod
    def weighted_shift(cls, w, max_level: int | None = None) -> "CompactTupleModel":
        w = tuple(float(x) for x in w)
        return cls("weighted_shift_sym", max_level or len(w), w=w)

    @classmethod
    def custom(cls, sequences, max_level: int | None = None) -> "CompactTupleModel":
        sequences = tuple(tuple(float(x) for x in s) for s in sequences)
        level = max_level or min(len(s) for s in sequences)
        return cls("custom_sequence", level, sequences=sequences)

    @property
    def g(self) -> int:
        if self.kind == "shifted_sum":
            return 2
        if self.kind == "custom_sequence":
            return len(self.sequences)
        return 1

    def shifted_diag_sequence(self) -> tuple[float, ...]:
        """The diagonal sequence with the corner offset folded in."""
        if self.kind != "shifted_sum":
            raise ValueError("only shifted_sum models carry a corner offset")
        a1 = self.alpha[0]
        return (self.lam[0] + a1, self.lam[1] + a1) + self.lam[2:]

    def truncate(self, level: int) -> SelfAdjointTuple:
        """Leading level x level compression of each coordinate."""
        if not 1 <= level <= self.max_level:
            raise ValueError(f"level {level} outside 1..{self.max_level}")
        if self.kind == "diagonal":
            return SelfAdjointTuple((np.diag(np.asarray(self.lam[:level], dtype=np.complex128)),))
        if self.kind == "weighted_shift_sym":
            return SelfAdjointTuple((_tridiagonal(self.w, level),))
        if self.kind == "custom_sequence":
            return SelfAdjointTuple(
                tuple(np.diag(np.asarray(s[:level], dtype=np.complex128)) for s in self.sequences)
            )
        lam = self.shifted_diag_sequence()
        x1 = np.diag(np.asarray(lam[:level], dtype=np.complex128))
        x2 = _tridiagonal(self.w, level)
        for j in range(min(2, level)):
            x2[j, j] += self.alpha[1]
        return SelfAdjointTuple((x1, x2))

    def tail_bound(self, level: int) -> float:
        """Certified upper bound on max_i ||X_i - P_level X_i P_level||.

        Analytic per kind: diagonal tails are the sup of the remaining
        entries, symmetrized-shift tails are twice the sup of the remaining
        weights, and the two-coordinate model adds its component bounds.
        Nonincreasing in level.
        """
        if not 1 <= level <= self.max_level:
            raise ValueError(f"level {level} outside 1..{self.max_level}")
        if self.kind == "diagonal":
            return _abs_tail_max(self.lam, level)
        if self.kind == "weighted_shift_sym":
            return 2.0 * _abs_tail_max(self.w, level - 1)
        if self.kind == "custom_sequence":
            return max(_abs_tail_max(s, level) for s in self.sequences)
        diag_part = _abs_tail_max(self.shifted_diag_sequence(), level)
        shift_part = 2.0 * _abs_tail_max(self.w, level - 1)
        if level < 2:
            shift_part += abs(self.alpha[1])
        return diag_part + shift_part


@dataclass(frozen=True, eq=False)
class FiniteInteriorWitness:
    """A unit vector annihilating every coordinate of an amplified truncation.

    vector lives in C^(d * level); residual records
    ``max_i |v* (I_d tensor X^level_i) v|``.
    """

    d: int
    level: int
    vector: np.ndarray
    residual: float

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.complex128).reshape(-1).copy()
        if v.shape[0] != self.d * self.level:
            raise ValueError(
                f"vector has length {v.shape[0]}, expected d*level = {self.d * self.level}"
            )
        nrm = float(np.linalg.norm(v))
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"witness vector is not unit (norm {nrm!r})")
        v.flags.writeable = False
        object.__setattr__(self, "vector", v)

    def recompute_residual(self, model: CompactTupleModel) -> float:
        """Independent re-evaluation of the stored residual."""
        x = model.truncate(self.level)
        eye = np.eye(self.d)
        v = self.vector
        return max(
            abs(float((v.conj() @ (kron(eye, m) @ v)).real)) for m in x
        )


def _distinct_abs_violation(
    values: tuple[float, ...], gap: float
) -> tuple[int, int] | None:
    """First pair of indices whose absolute values collide within `gap`."""
    order = sorted(range(len(values)), key=lambda j: abs(values[j]))
    for a, b in zip(order, order[1:]):
        if abs(abs(values[b]) - abs(values[a])) < gap:
            return (min(a, b), max(a, b))
    return None


def build_diag_shift_example(
    lam,
    w,
    scan_steps: int = 2,
    max_level: int | None = None,
    dist_tol: float = TOL.dist_tol,
) -> tuple[CompactTupleModel, float, float, FiniteInteriorWitness]:
    """Build the canonical two-coordinate example with corner offsets.

    Coordinate one is diag(lam), coordinate two is S_w + S_w*.  The builder
    scans real unit vectors v0 = (cos t, sin t) over `scan_steps` interior
    grid points t = (pi/2) * k / (scan_steps + 1) and picks the first t for
    which offsetting the leading two diagonal entries by
    a1 = -<diag(lam_1, lam_2) v0, v0> leaves the diagonal sequence nonzero
    with pairwise distinct absolute values (gap at least `dist_tol`).  The
    second offset a2 = -<corner_2(S_w + S_w*) v0, v0> then makes v0 annihilate
    both offset corners, which is exactly a level-2 finite-interior witness
    with d = 1.

    Returns (model, a1, a2, witness).
    """
    lam = tuple(float(x) for x in lam)
    w = tuple(float(x) for x in w)
    if len(lam) < 2 or len(w) < 1:
        raise GuardError("need at least two diagonal entries and one weight")
    zero = [j for j, x in enumerate(lam) if x == 0.0]
    if zero:
        raise GuardError(f"diagonal entries must be nonzero; zero at indices {zero}")
    collision = _distinct_abs_violation(lam, dist_tol)
    if collision is not None:
        raise GuardError(
            "diagonal entries must have pairwise distinct absolute values; "
            f"|lam[{collision[0]}]| collides with |lam[{collision[1]}]|"
        )
    if any(x == 0.0 for x in w):
        raise GuardError("shift weights must be nonzero")
    if max_level is None:
        max_level = min(len(lam) - 1, len(w))
    if max_level < 2:
        raise GuardError("sequences too short: the model needs max_level >= 2")

    if scan_steps < 1:
        raise GuardError("scan_steps must be positive")
    for k in range(1, scan_steps + 1):
        t = (math.pi / 2) * k / (scan_steps + 1)
        c, s = math.cos(t), math.sin(t)
        a1 = -(lam[0] * c * c + lam[1] * s * s)
        shifted = (lam[0] + a1, lam[1] + a1) + lam[2:]
        if any(abs(x) < dist_tol for x in shifted):
            continue
        if _distinct_abs_violation(shifted, dist_tol) is not None:
            continue
        a2 = -(2.0 * w[0] * c * s)
        model = CompactTupleModel(
            "shifted_sum", max_level, lam=lam, w=w, alpha=(a1, a2)
        )
        v0 = np.array([c, s], dtype=np.complex128)
        v0 = v0 / np.linalg.norm(v0)
        corner = model.truncate(2)
        residual = max(
            abs(float((v0.conj() @ (m @ v0)).real)) for m in corner
        )
        witness = FiniteInteriorWitness(d=1, level=2, vector=v0, residual=residual)
        return model, a1, a2, witness
    raise GuardError(
        f"no admissible scan point among {scan_steps} candidates in (0, pi/2)"
    )


def embed_witness(
    witness: FiniteInteriorWitness, level: int, model: CompactTupleModel | None = None
) -> FiniteInteriorWitness:
    """Zero-pad a witness into a higher truncation level.

    Each of the d blocks of the vector is padded from C^(old level) to
    C^(level).  Because truncations nest, the quadratic form only ever sees
    the old corner, so the residual is unchanged; when `model` is given the
    residual is recomputed from scratch instead of copied.
    """
    if level < witness.level:
        raise ValueError(f"cannot embed a level-{witness.level} witness into level {level}")
    if level == witness.level:
        return witness
    blocks = witness.vector.reshape(witness.d, witness.level)
    padded = np.zeros((witness.d, level), dtype=np.complex128)
    padded[:, : witness.level] = blocks
    vec = padded.reshape(-1)
    out = FiniteInteriorWitness(witness.d, level, vec, witness.residual)
    if model is not None:
        out = FiniteInteriorWitness(witness.d, level, vec, out.recompute_residual(model))
    return out


def _witness_search_residuals(ops: list[np.ndarray], n: int):
    """Objective and Jacobian for the normalized quadratic-form residuals."""

    def fun(x: np.ndarray) -> np.ndarray:
        v = x[:n] + 1j * x[n:]
        n2 = float(x @ x)
        return np.array([float((v.conj() @ (a @ v)).real) / n2 for a in ops])

    def jac(x: np.ndarray) -> np.ndarray:
        v = x[:n] + 1j * x[n:]
        n2 = float(x @ x)
        rows = []
        for a in ops:
            av = a @ v
            q = float((v.conj() @ av).real)
            grad_q = np.concatenate([2.0 * av.real, 2.0 * av.imag])
            rows.append((grad_q - (q / n2) * 2.0 * x) / n2)
        return np.array(rows)

    return fun, jac


def finite_interior_witness(
    model: CompactTupleModel,
    level: int,
    d_max: int = 4,
    witness_tol: float = TOL.interior_witness_tol,
    seed: int = 0,
    starts: int = 8,
) -> FiniteInteriorWitness:
    """Search for a finite-interior witness at the given truncation level.

    For d = 1, ..., d_max the residual max_i |v*(I_d tensor X^level)v| is
    minimized over unit vectors by seeded multi-start least squares; the
    first vector with residual at most `witness_tol` is returned.  Failure
    to find one signals that the zero-in-the-finite-interior hypothesis is
    not certified for this model at this level.
    """
    if not 1 <= level <= model.max_level:
        raise ValueError(f"level {level} outside 1..{model.max_level}")
    x = model.truncate(level)
    for d in range(1, d_max + 1):
        eye = np.eye(d)
        ops = [kron(eye, m) for m in x]
        n = d * level
        fun, jac = _witness_search_residuals(ops, n)
        for start in range(starts):
            rng = np.random.default_rng([seed, d, start])
            x0 = rng.standard_normal(2 * n)
            sol = least_squares(
                fun, x0, jac=jac, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15
            )
            v = sol.x[:n] + 1j * sol.x[n:]
            v = v / np.linalg.norm(v)
            residual = max(abs(float((v.conj() @ (a @ v)).real)) for a in ops)
            if residual <= witness_tol:
                return FiniteInteriorWitness(d=d, level=level, vector=v, residual=residual)
    raise GuardError(
        f"no finite-interior witness found up to multiplicity {d_max} at level {level}"
    )
