"""Controllability Gramians on finite and infinite horizons.

Finite horizon
    ``W(B; T) = int_0^T e^{At} B e^{A^T t} dt`` from one augmented
    exponential on a short base step followed by exact doubling
    ``W(2t) = W(t) + e^{At} W(t) e^{A^T t}``.

Infinite horizon
    Per-node modal blocks in the block-diagonalizing basis of
    :func:`ctrlscore.spectral.block_diagonalize`: Lyapunov solutions for the
    stable and (time-reversed) unstable parts and a rank-one outer product for
    the zero part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import HorizonOverflowError
from .linalg import as_matrix, matrix_exponential, solve_lyapunov
from .spectral import SpectralSplit

__all__ = [
    "FiniteGramianSet",
    "ModalGramianSet",
    "as_allocation",
    "uniform_allocation",
    "finite_gramian",
    "finite_gramians",
    "modal_gramians",
    "scaled_finite_gramian",
    "assemble",
    "symmetrize",
]

SIMPLEX_TOL = 1e-12


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def as_allocation(p, n: int | None = None, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Validate ``p`` as a point of the standard simplex and return it as a float array."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if n is not None and p.size != n:
        raise ValueError(f"allocation has {p.size} entries, expected {n}")
    if not np.all(np.isfinite(p)):
        raise ValueError("allocation contains NaN or Inf")
    if np.any(p < 0):
        raise ValueError(f"allocation has negative entries (min {p.min():.3e})")
    if abs(p.sum() - 1.0) > tol * max(1, p.size):
        raise ValueError(f"allocation sums to {p.sum():.15g}, not 1")
    return p


def uniform_allocation(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


@dataclass(frozen=True)
class FiniteGramianSet:
    """Per-node Gramians ``W(e_i e_i^T; T)`` stacked as ``matrices[i]``."""

    horizon: float
    matrices: np.ndarray

    @property
    def n(self) -> int:
        return self.matrices.shape[0]

    def family(self) -> np.ndarray:
        return self.matrices


@dataclass(frozen=True)
class ModalGramianSet:
    """Per-node modal blocks ``minus[i]``, ``zero[i]``, ``plus[i]`` and their split."""

    minus: np.ndarray
    zero: np.ndarray
    plus: np.ndarray
    split: SpectralSplit

    @property
    def n(self) -> int:
        return self.minus.shape[0]

    def full(self) -> np.ndarray:
        """Stack of ``blkdiag(V_-i, V_0i, V_+i)``, shape ``(n, n, n)``."""
        n = self.n
        n_m, n_0, _ = self.split.sizes
        b = n_m + n_0
        out = np.zeros((n, n, n))
        out[:, :n_m, :n_m] = self.minus
        out[:, n_m:b, n_m:b] = self.zero
        out[:, b:, b:] = self.plus
        return out

    def stable(self) -> np.ndarray:
        return self.minus

    def family(self, which: str = "full") -> np.ndarray:
        if which == "full":
            return self.full()
        if which == "stable":
            return self.stable()
        raise ValueError(f"unknown family {which!r}; expected 'full' or 'stable'")


def _overflow_horizon(A: np.ndarray) -> float | None:
    growth = float(np.max(np.linalg.eigvals(A).real))
    if growth <= 0:
        return None
    # ||e^{At} W e^{A^T t}|| ~ e^{2 growth t}
    return math.log(np.finfo(float).max) / (2.0 * growth)


def _gramian_stack(A: np.ndarray, Bs: np.ndarray, T: float) -> np.ndarray:
    """Gramians of a stack of input weights ``Bs`` (shape ``(k, n, n)``) at horizon ``T``."""
    if not (np.isfinite(T) and T > 0):
        raise ValueError(f"horizon must be a positive finite number, got {T!r}")
    n = A.shape[0]
    norm_t = float(np.linalg.norm(A)) * T
    doublings = 0 if norm_t <= 1.0 else int(math.ceil(math.log2(norm_t)))
    t0 = T / 2.0 ** doublings

    aug = np.zeros((2 * n, 2 * n))
    aug[:n, :n] = -A * t0
    aug[n:, n:] = A.T * t0
    E = matrix_exponential(A * t0)
    W = np.empty_like(Bs)
    for k, B in enumerate(Bs):
        aug[:n, n:] = B * t0
        F = sla.expm(aug)
        W[k] = E @ F[:n, n:]
    W = symmetrize(W)

    t = t0
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(doublings):
            W = symmetrize(W + E @ W @ E.T)
            E = E @ E
            t *= 2.0
            if not (np.all(np.isfinite(E)) and np.all(np.isfinite(W))):
                safe = _overflow_horizon(A)
                hint = f"; largest safe horizon is about {safe:.4g}" if safe else ""
                raise HorizonOverflowError(
                    f"Gramian overflows float64 before reaching T = {T:g} (at t = {t:g}){hint}",
                    safe_horizon=safe,
                )
    return W


def finite_gramian(A, i: int, T: float) -> np.ndarray:
    """Gramian ``W(e_i e_i^T; T)`` of node ``i`` (0-based)."""
    A = as_matrix(A, "A", square=True)
    n = A.shape[0]
    if not 0 <= i < n:
        raise IndexError(f"node index {i} out of range for n = {n}")
    B = np.zeros((1, n, n))
    B[0, i, i] = 1.0
    return _gramian_stack(A, B, float(T))[0]


def finite_gramians(A, T: float) -> FiniteGramianSet:
    """All per-node Gramians at horizon ``T``."""
    A = as_matrix(A, "A", square=True)
    n = A.shape[0]
    Bs = np.zeros((n, n, n))
    Bs[np.arange(n), np.arange(n), np.arange(n)] = 1.0
    return FiniteGramianSet(horizon=float(T), matrices=_gramian_stack(A, Bs, float(T)))


def modal_gramians(split: SpectralSplit) -> ModalGramianSet:
    """Infinite-horizon modal Gramian blocks for every node.

    ``V_-i`` solves ``A_- V + V A_-^T + r_-i r_-i^T = 0``, ``V_+i`` solves the
    same equation with ``-A_+``, and ``V_0i = r_0i r_0i^T``.
    """
    n = split.n
    n_m, n_0, _ = split.sizes
    R_inv = split.R_inv
    r_m = R_inv[:n_m, :].T           # row i is r_{-,i}
    r_0 = R_inv[n_m:n_m + n_0, :].T
    r_p = R_inv[n_m + n_0:, :].T

    def outer(r):
        return r[:, :, None] * r[:, None, :]

    V_m = solve_lyapunov(split.A_minus, outer(r_m)) if n_m else np.zeros((n, 0, 0))
    V_p = solve_lyapunov(-split.A_plus, outer(r_p)) if r_p.shape[1] else np.zeros((n, 0, 0))
    return ModalGramianSet(minus=V_m, zero=outer(r_0), plus=V_p, split=split)


def scaled_finite_gramian(split: SpectralSplit, p, T: float) -> np.ndarray:
    """Finite-horizon Gramian of ``diag(p)`` scaled toward its infinite-horizon limit.

    Returns ``D(T)^{-1} R^{-1} W(diag(p); T) R^{-T} D(T)^{-T}`` with
    ``D(T) = blkdiag(I, sqrt(T) I, e^{A_+ T})``.  As ``T`` grows this tends to
    ``blkdiag(V_-(p), V_0(p), V_+(p))``.

    ``W`` itself is never formed.  In the block basis the scaled Gramian
    ``Y(t)`` doubles as ``Y(2t) = S1 Y(t) S1^T + S2 Y(t) S2^T`` with
    ``S1 = blkdiag(I, I/sqrt 2, e^{-A_+ t})`` and
    ``S2 = blkdiag(e^{A_- t}, I/sqrt 2, I)``; every factor is bounded, so
    unstable growth never enters the arithmetic.
    """
    n = split.n
    p = as_allocation(p, n)
    T = float(T)
    if not (np.isfinite(T) and T > 0):
        raise ValueError(f"horizon must be a positive finite number, got {T!r}")
    n_m, n_0, n_p = split.sizes
    b = n_m + n_0
    Lam = split.block_diagonal()
    Q = symmetrize(split.R_inv @ (p[:, None] * split.R_inv.T))

    norm_t = float(np.linalg.norm(Lam)) * T
    doublings = 0 if norm_t <= 1.0 else int(math.ceil(math.log2(norm_t)))
    t = T / 2.0 ** doublings
    Y = _gramian_stack(Lam, Q[None], t)[0]
    s0 = np.ones(n)
    s0[n_m:b] = 1.0 / math.sqrt(t)
    Y = Y * s0[:, None] * s0[None, :]
    Ep = matrix_exponential(-split.A_plus * t) if n_p else np.zeros((0, 0))
    Y[b:, :] = Ep @ Y[b:, :]
    Y[:, b:] = Y[:, b:] @ Ep.T
    Em = matrix_exponential(split.A_minus * t) if n_m else np.zeros((0, 0))
    half = 1.0 / math.sqrt(2.0)
    for _ in range(doublings):
        S1 = np.eye(n)
        S1[n_m:b, n_m:b] *= half
        S1[b:, b:] = Ep
        S2 = np.eye(n)
        S2[:n_m, :n_m] = Em
        S2[n_m:b, n_m:b] *= half
        Y = symmetrize(S1 @ Y @ S1.T + S2 @ Y @ S2.T)
        Ep = Ep @ Ep
        Em = Em @ Em
    return symmetrize(Y)


def assemble(family, p, which: str = "full"):
    """Return ``(G(p), G_i)`` where ``G(p) = sum_i p_i G_i``.

    ``family`` is a :class:`ModalGramianSet` (``which`` selects ``"full"`` or
    ``"stable"`` blocks), a :class:`FiniteGramianSet`, or an ``(n, m, m)``
    array.
    """
    if isinstance(family, ModalGramianSet):
        G = family.family(which)
    elif isinstance(family, FiniteGramianSet):
        G = family.matrices
    else:
        G = np.asarray(family, dtype=float)
    p = as_allocation(p, G.shape[0])
    return symmetrize(np.tensordot(p, G, axes=1)), G
