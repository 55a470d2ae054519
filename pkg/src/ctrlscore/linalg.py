"""Dense real linear-algebra kernels.

Matrices are plain ``numpy.ndarray`` objects (float64, 2-D, finite).  The
factorizations themselves (Hessenberg QR, SVD, Pade exponential) are
delegated to LAPACK through :mod:`scipy.linalg`; the eigenvalue-class
ordering of the Schur form and the Sylvester back-substitution live here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NotHurwitzError, SchurConvergenceError, SylvesterError

__all__ = [
    "SchurFactorization",
    "SpectrumClassification",
    "as_matrix",
    "diagonal_blocks",
    "matrix_exponential",
    "ordered_real_schur",
    "solve_sylvester",
    "solve_lyapunov",
    "numerical_rank",
    "ZERO_TOL",
]

ZERO_TOL = 1e-9

MINUS, ZERO, PLUS = "minus", "zero", "plus"


def as_matrix(M, name: str = "matrix", square: bool = False) -> np.ndarray:
    """Validate and return ``M`` as a finite float64 2-D array with positive dimensions."""
    arr = np.array(M, dtype=float, ndmin=2)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"{name} must have positive dimensions, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


@dataclass(frozen=True)
class SchurFactorization:
    """Ordered real Schur form ``A = orthogonal @ quasi_triangular @ orthogonal.T``.

    ``quasi_triangular`` is block *lower* triangular.  ``blocks`` lists the
    ``(start, size)`` of each 1x1/2x2 diagonal block and ``block_eigenvalues``
    holds the eigenvalues in diagonal order (a 2x2 block contributes its
    conjugate pair).
    """

    orthogonal: np.ndarray
    quasi_triangular: np.ndarray
    block_eigenvalues: tuple
    blocks: tuple


@dataclass(frozen=True)
class SpectrumClassification:
    """Split of the spectrum into negative, zero and positive real parts.

    ``labels[k]`` is one of ``"minus"``, ``"zero"``, ``"plus"`` for
    ``eigenvalues[k]``.  ``scale`` is the Frobenius norm of the classified
    matrix; the zero class means ``|Re z| <= zero_tol * scale``.
    """

    n_minus: int
    n_zero: int
    n_plus: int
    eigenvalues: tuple
    labels: tuple
    zero_tol: float
    scale: float

    @property
    def n(self) -> int:
        return self.n_minus + self.n_zero + self.n_plus

    def of_class(self, label: str) -> list:
        return [z for z, lab in zip(self.eigenvalues, self.labels) if lab == label]


def matrix_exponential(M) -> np.ndarray:
    """Return ``e^M`` (scaling and squaring with a Pade approximant).

    Raises
    ------
    OverflowError
        If the result is not representable in float64.
    """
    M = as_matrix(M, "M", square=True)
    with np.errstate(over="ignore", invalid="ignore"):
        E = sla.expm(M)
    if not np.all(np.isfinite(E)):
        raise OverflowError("horizon too large for direct exponential: exp(M) overflows float64")
    return E


def diagonal_blocks(T: np.ndarray, lower: bool = False) -> list:
    """Return ``(start, size)`` of the 1x1 and 2x2 diagonal blocks of a quasi-triangular matrix."""
    n = T.shape[0]
    blocks = []
    k = 0
    while k < n:
        coupled = k + 1 < n and (T[k, k + 1] if lower else T[k + 1, k]) != 0.0
        size = 2 if coupled else 1
        blocks.append((k, size))
        k += size
    return blocks


def _block_eigenvalues(T: np.ndarray, blocks) -> list:
    eigs = []
    for start, size in blocks:
        if size == 1:
            eigs.append(complex(T[start, start]))
        else:
            pair = np.linalg.eigvals(T[start:start + 2, start:start + 2])
            pair = sorted(pair, key=lambda z: z.imag)
            eigs.extend(complex(z) for z in pair)
    return eigs


def _classify(z: complex, thresh: float) -> str:
    if z.real < -thresh:
        return MINUS
    if z.real > thresh:
        return PLUS
    return ZERO


def _schur(M, sort=None):
    try:
        if sort is None:
            T, Z = sla.schur(M, output="real")
            return T, Z, 0
        return sla.schur(M, output="real", sort=sort)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SchurConvergenceError(f"real Schur decomposition failed: {exc}") from exc


def ordered_real_schur(A, zero_tol: float = ZERO_TOL):
    """Real Schur form of ``A`` with lower block-triangular factor ordered (-, 0, +).

    The upper real Schur form of ``A.T`` is reordered in two passes of
    orthogonal block swaps (LAPACK ``trsen``): negative real parts first, then
    within the trailing part zero real parts first.  Transposing gives
    ``Z.T @ A @ Z`` block lower-triangular with the same diagonal order.

    Parameters
    ----------
    A : array_like, shape (n, n)
    zero_tol : float
        Eigenvalues with ``|Re z| <= zero_tol * ||A||_F`` form the zero class.

    Returns
    -------
    schur : SchurFactorization
    classification : SpectrumClassification
    """
    A = as_matrix(A, "A", square=True)
    n = A.shape[0]
    scale = float(np.linalg.norm(A))
    thresh = zero_tol * scale

    T, Z, n_minus = _schur(A.T, sort=lambda re, im: re < -thresh)
    if n_minus < n:
        T22, Z2, _ = _schur(T[n_minus:, n_minus:], sort=lambda re, im: abs(re) <= thresh)
        Z = Z.copy()
        Z[:, n_minus:] = Z[:, n_minus:] @ Z2
        T = T.copy()
        T[:n_minus, n_minus:] = T[:n_minus, n_minus:] @ Z2
        T[n_minus:, n_minus:] = T22
        T[np.tril_indices(n, -2)] = 0.0

    L = np.ascontiguousarray(T.T)
    blocks = diagonal_blocks(L, lower=True)
    eigs = _block_eigenvalues(L, blocks)
    labels = [_classify(z, thresh) for z in eigs]
    order = {MINUS: 0, ZERO: 1, PLUS: 2}
    ranks = [order[lab] for lab in labels]
    if ranks != sorted(ranks):
        # trsen's swaps can move an eigenvalue across the class boundary by rounding
        raise SchurConvergenceError(
            "eigenvalue ordering of the Schur form is inconsistent; an eigenvalue lies "
            "within rounding of the zero-class boundary (adjust zero_tol)"
        )
    classification = SpectrumClassification(
        n_minus=labels.count(MINUS),
        n_zero=labels.count(ZERO),
        n_plus=labels.count(PLUS),
        eigenvalues=tuple(eigs),
        labels=tuple(labels),
        zero_tol=zero_tol,
        scale=scale,
    )
    schur = SchurFactorization(
        orthogonal=Z, quasi_triangular=L, block_eigenvalues=tuple(eigs), blocks=tuple(blocks)
    )
    return schur, classification


class _BartelsStewart:
    """Reusable solver for ``C1 Y + Y C2 + P = 0`` with fixed ``C1``, ``C2``.

    Both coefficients are reduced once to upper real Schur form; each solve
    back-substitutes over the 1x1/2x2 diagonal blocks.  Right-hand sides may
    carry leading batch dimensions, which are solved simultaneously.
    """

    def __init__(self, C1: np.ndarray, C2: np.ndarray, zero_tol: float = ZERO_TOL):
        self.S, self.U, _ = _schur(C1)
        self.T, self.V, _ = _schur(C2)
        self.row_blocks = diagonal_blocks(self.S)
        self.col_blocks = diagonal_blocks(self.T)
        lam = np.array(_block_eigenvalues(self.S, self.row_blocks))
        mu = np.array(_block_eigenvalues(self.T, self.col_blocks))
        scale = np.linalg.norm(C1) + np.linalg.norm(C2)
        sums = np.abs(lam[:, None] + mu[None, :])
        gap = float(sums.min())
        if gap <= zero_tol * scale or gap == 0.0:
            raise SylvesterError(
                f"eigenvalues of C1 and -C2 nearly coincide (min |lambda + mu| = {gap:.3e}); "
                "the Sylvester equation has no unique solution"
            )
        # per-block-pair operators I (x) S_ii + T_jj^T (x) I acting on column-major vec
        self._ops = {}
        for i, (si, a) in enumerate(self.row_blocks):
            Sii = self.S[si:si + a, si:si + a]
            for j, (tj, b) in enumerate(self.col_blocks):
                Tjj = self.T[tj:tj + b, tj:tj + b]
                self._ops[i, j] = np.kron(np.eye(b), Sii) + np.kron(Tjj.T, np.eye(a))

    def solve(self, P: np.ndarray) -> np.ndarray:
        S, T, U, V = self.S, self.T, self.U, self.V
        F = -(U.T @ P @ V)
        Z = np.zeros_like(F)
        batch = F.shape[:-2]
        for j, (tj, b) in enumerate(self.col_blocks):
            cols = slice(tj, tj + b)
            rhs = F[..., :, cols] - Z[..., :, :tj] @ T[:tj, cols]
            for i in range(len(self.row_blocks) - 1, -1, -1):
                si, a = self.row_blocks[i]
                rows = slice(si, si + a)
                r = rhs[..., rows, :] - S[rows, si + a:] @ Z[..., si + a:, cols]
                vec = np.swapaxes(r, -1, -2).reshape(batch + (a * b,))
                x = np.linalg.solve(self._ops[i, j], vec[..., None])[..., 0]
                Z[..., rows, cols] = np.swapaxes(x.reshape(batch + (b, a)), -1, -2)
        return U @ Z @ V.T


def solve_sylvester(C1, C2, P, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Solve ``C1 @ Y + Y @ C2 + P = 0`` by a Bartels-Stewart reduction.

    ``P`` may be a stack of shape ``(k, m, n)``; every slice is solved with
    the same Schur forms.

    Raises
    ------
    SylvesterError
        If some eigenvalue of ``C1`` plus some eigenvalue of ``C2`` is zero to
        within ``zero_tol * (||C1|| + ||C2||)``.
    """
    C1 = as_matrix(C1, "C1", square=True)
    C2 = as_matrix(C2, "C2", square=True)
    P = np.asarray(P, dtype=float)
    if P.shape[-2:] != (C1.shape[0], C2.shape[0]):
        raise ValueError(f"P has shape {P.shape}, expected (..., {C1.shape[0]}, {C2.shape[0]})")
    if not np.all(np.isfinite(P)):
        raise ValueError("P contains NaN or Inf entries")
    return _BartelsStewart(C1, C2, zero_tol).solve(P)


def solve_lyapunov(C, P, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Solve ``C @ Y + Y @ C.T + P = 0`` for Hurwitz ``C`` and symmetric ``P``.

    The result is symmetrized.  ``P`` may be a stack of shape ``(k, n, n)``.
    """
    C = as_matrix(C, "C", square=True)
    eigs = np.linalg.eigvals(C)
    if np.any(eigs.real >= 0):
        worst = eigs[np.argmax(eigs.real)]
        raise NotHurwitzError(f"C is not Hurwitz (eigenvalue {worst:.6g} has Re >= 0)")
    P = np.asarray(P, dtype=float)
    Y = solve_sylvester(C, C.T, P, zero_tol=zero_tol)
    return 0.5 * (Y + np.swapaxes(Y, -1, -2))


def numerical_rank(M, rel_tol: float = 1e-8) -> int:
    """Number of singular values above ``rel_tol`` times the largest one."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))
