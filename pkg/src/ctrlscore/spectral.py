"""Spectrum classification and the (-, 0, +) block diagonalization of A.

The transform ``R = R1 @ R2`` combines the ordered real Schur basis ``R1``
with a unit lower block-triangular ``R2`` whose off-diagonal blocks solve
three Sylvester equations, so that ``R^{-1} A R = blkdiag(A_-, A_0, A_+)``.
Everything stays in real arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionViolation
from .linalg import (
    ZERO,
    ZERO_TOL,
    SchurFactorization,
    SpectrumClassification,
    as_matrix,
    ordered_real_schur,
    solve_sylvester,
)

__all__ = [
    "AssumptionReport",
    "SpectralSplit",
    "SpectrumClassification",
    "SEMISIMPLE_TOL",
    "check_assumptions",
    "assess",
    "block_diagonalize",
    "modal_vectors",
]

SEMISIMPLE_TOL = 1e-8


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of the structural checks on A.

    ``assumption1``: at least one eigenvalue with negative real part.
    ``assumption2``: zero is the only imaginary-axis eigenvalue and it is
    semisimple (numerically: the zero-class Schur block is negligible).
    """

    assumption1: bool
    assumption2: bool
    imaginary_eigenvalues: tuple = ()
    zero_block_norm: float = 0.0
    semisimple: bool | None = True
    messages: tuple = ()


def check_assumptions(cls: SpectrumClassification, zero_block=None,
                      semisimple_tol: float = SEMISIMPLE_TOL) -> AssumptionReport:
    """Evaluate both assumptions from a classification and the undeflated zero Schur block."""
    thresh = cls.zero_tol * cls.scale
    imag = tuple(z for z in cls.of_class(ZERO) if abs(z.imag) > thresh)
    if zero_block is None or np.size(zero_block) == 0:
        zero_norm = 0.0
    else:
        zero_norm = float(np.linalg.norm(zero_block))
    # with imaginary pairs present the zero-class block also holds them: undecided
    semisimple = None if imag else bool(zero_norm <= semisimple_tol * cls.scale)
    messages = []
    a1 = cls.n_minus >= 1
    if not a1:
        messages.append("no eigenvalue with negative real part (n_minus = 0)")
    if imag:
        listing = ", ".join(f"{z.real:.6g}{z.imag:+.6g}i" for z in imag)
        messages.append(f"purely imaginary nonzero eigenvalues: {listing}")
    if semisimple is False:
        messages.append(
            f"zero eigenvalue is not semisimple: ||A_0|| = {zero_norm:.3e} exceeds "
            f"{semisimple_tol:g} * ||A||"
        )
    return AssumptionReport(
        assumption1=a1,
        assumption2=not imag and bool(semisimple),
        imaginary_eigenvalues=imag,
        zero_block_norm=zero_norm,
        semisimple=semisimple,
        messages=tuple(messages),
    )


def assess(A, zero_tol: float = ZERO_TOL, semisimple_tol: float = SEMISIMPLE_TOL):
    """Classify the spectrum of ``A`` and report on both assumptions without raising."""
    schur, cls = ordered_real_schur(A, zero_tol)
    a, b = cls.n_minus, cls.n_minus + cls.n_zero
    zero_block = schur.quasi_triangular[a:b, a:b]
    return cls, check_assumptions(cls, zero_block, semisimple_tol)


@dataclass(frozen=True)
class SpectralSplit:
    """Block diagonalization ``R_inv @ A @ R = blkdiag(A_minus, A_zero, A_plus)``.

    ``A_zero`` is stored as the exact zero matrix (deflated after the
    semisimplicity check); ``zero_block_norm`` keeps the norm it had before.
    """

    matrix: np.ndarray
    schur: SchurFactorization
    classification: SpectrumClassification
    R: np.ndarray
    R_inv: np.ndarray
    A_minus: np.ndarray
    A_zero: np.ndarray
    A_plus: np.ndarray
    zero_block_norm: float = 0.0
    report: AssumptionReport = field(default=None)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def sizes(self) -> tuple:
        c = self.classification
        return c.n_minus, c.n_zero, c.n_plus

    def block_diagonal(self) -> np.ndarray:
        n_m, n_0, n_p = self.sizes
        out = np.zeros((self.n, self.n))
        out[:n_m, :n_m] = self.A_minus
        out[n_m + n_0:, n_m + n_0:] = self.A_plus
        return out


def _sylvester_or_empty(C1, C2, P):
    # C1 Y + Y C2 + P = 0, tolerating empty blocks
    if P.size == 0:
        return np.zeros(P.shape)
    return solve_sylvester(C1, C2, P)


def block_diagonalize(A, zero_tol: float = ZERO_TOL,
                      semisimple_tol: float = SEMISIMPLE_TOL) -> SpectralSplit:
    """Block-diagonalize ``A`` into its stable, zero and unstable parts.

    Raises
    ------
    AssumptionViolation
        If A has a purely imaginary nonzero eigenvalue or a non-semisimple
        zero eigenvalue.
    """
    A = as_matrix(A, "A", square=True)
    n = A.shape[0]
    schur, cls = ordered_real_schur(A, zero_tol)
    a, b = cls.n_minus, cls.n_minus + cls.n_zero
    L = schur.quasi_triangular
    report = check_assumptions(cls, L[a:b, a:b], semisimple_tol)
    if not report.assumption2:
        raise AssumptionViolation("; ".join(report.messages), report.imaginary_eigenvalues)

    A_m = L[:a, :a].copy()
    A_0 = np.zeros((b - a, b - a))
    A_p = L[b:, b:].copy()
    A_0m = L[a:b, :a]
    A_pm = L[b:, :a]
    A_p0 = L[b:, a:b]

    # A_0 X - X A_- = -A_{0,-}
    R_0m = _sylvester_or_empty(A_0, -A_m, A_0m)
    # A_+ X - X A_0 = -A_{+,0}
    R_p0 = _sylvester_or_empty(A_p, -A_0, A_p0)
    # A_+ X - X A_- = -(A_{+,-} + A_{+,0} R_{0,-})
    R_pm = _sylvester_or_empty(A_p, -A_m, A_pm + A_p0 @ R_0m)

    R2 = np.eye(n)
    R2[a:b, :a] = R_0m
    R2[b:, :a] = R_pm
    R2[b:, a:b] = R_p0
    R2_inv = np.eye(n)
    R2_inv[a:b, :a] = -R_0m
    R2_inv[b:, :a] = -R_pm + R_p0 @ R_0m
    R2_inv[b:, a:b] = -R_p0

    Z = schur.orthogonal
    return SpectralSplit(
        matrix=A,
        schur=schur,
        classification=cls,
        R=Z @ R2,
        R_inv=R2_inv @ Z.T,
        A_minus=A_m,
        A_zero=A_0,
        A_plus=A_p,
        zero_block_norm=report.zero_block_norm,
        report=report,
    )


def modal_vectors(split: SpectralSplit, i: int):
    """Return ``(r_minus, r_zero, r_plus)``, the partition of ``R^{-1} e_i`` (0-based ``i``)."""
    if not 0 <= i < split.n:
        raise IndexError(f"node index {i} out of range for n = {split.n}")
    n_m, n_0, _ = split.sizes
    col = split.R_inv[:, i]
    return col[:n_m].copy(), col[n_m:n_m + n_0].copy(), col[n_m + n_0:].copy()
