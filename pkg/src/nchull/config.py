"""Central defaults for numerical tolerances and the shared error types.

Every tolerance used anywhere in the package is declared here once and passed
explicitly through function signatures; no module keeps hidden mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    """Bundle of the package-wide tolerance defaults.

    herm_tol             max-abs deviation from self-adjointness accepted on input
    iso_tol              spectral-norm bound on ``V*V - I`` for isometry checks
    psd_tol              eigenvalue floor for PSD tests and PSD square roots
    interior_witness_tol residual accepted for a finite-interior witness
    hull_witness_tol     residual accepted for a hull-membership witness
    equality_tol         two-sided equality bound in the contraction lift
    rank_tol             relative singular-value cutoff for commutant nullspaces
    dist_tol             minimal gap certifying "pairwise distinct absolute values"
    probe_tol            spectra mismatch threshold in the equivalence probe
    partition_tol        bound on ``sum V_i* V_i - I`` for matrix convex combinations
    affine_tol           residual accepted for the matrix-affine identity
    ucp_tol              residual accepted for the block decomposition identity
    sweep_slack          slack for the monotonicity assertion in convergence sweeps
    """

    herm_tol: float = 1e-12
    iso_tol: float = 1e-10
    psd_tol: float = 1e-10
    interior_witness_tol: float = 1e-10
    hull_witness_tol: float = 1e-9
    equality_tol: float = 1e-9
    rank_tol: float = 1e-8
    dist_tol: float = 1e-6
    probe_tol: float = 1e-8
    partition_tol: float = 1e-10
    affine_tol: float = 1e-10
    ucp_tol: float = 1e-10
    sweep_slack: float = 1e-12


TOL = Tolerances()

TOLERANCE_NAMES = tuple(f.name for f in fields(Tolerances))


def with_overrides(base: Tolerances = TOL, **overrides: float) -> Tolerances:
    """Return a copy of `base` with named tolerances replaced.

    Unknown names raise ValueError; this is the validation point for
    user-supplied ``--tol name=value`` pairs.
    """
    for name in overrides:
        if name not in TOLERANCE_NAMES:
            raise ValueError(
                f"unknown tolerance {name!r}; known names: {', '.join(TOLERANCE_NAMES)}"
            )
    return replace(base, **overrides)


class GuardError(Exception):
    """Input or model fails a documented hypothesis (not a numerical bug)."""


class InvariantBreach(Exception):
    """A numerical contract that should hold by construction was violated."""
