"""Uniqueness certificates, exceptional horizons, baselines and rank checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gramian import finite_gramians
from .linalg import ZERO_TOL, as_matrix, numerical_rank
from .spectral import SEMISIMPLE_TOL, SpectralSplit, assess, block_diagonalize

__all__ = [
    "UniquenessCertificate",
    "ThetaPrimeWitness",
    "BaselineCentralities",
    "DiagnosticsReport",
    "uniqueness_matrices",
    "uniqueness_certificates",
    "theta_prime_check",
    "baseline_centralities",
    "controllability_matrix",
    "controllability_rank",
    "diagnose",
]


@dataclass(frozen=True)
class UniquenessCertificate:
    rank_vcs: int
    rank_aecs: int
    vcs_certified: bool
    aecs_certified: bool


@dataclass(frozen=True)
class ThetaPrimeWitness:
    """A horizon ``T`` with ``T * theta / (2 pi) = ell`` for a purely imaginary pair sum ``i theta``."""

    theta: float
    ell: int
    T: float
    pair: tuple


@dataclass(frozen=True)
class BaselineCentralities:
    """Per-node Gramian centralities at horizon ``T``: trace, log-volume and energy baselines."""

    T: float
    ac: np.ndarray
    vce: np.ndarray
    ace: np.ndarray
    ranks: np.ndarray


@dataclass(frozen=True)
class DiagnosticsReport:
    assumption1: bool
    assumption2: bool
    n_minus: int
    n_zero: int
    n_plus: int
    vcs_unique_certified: bool | None = None
    aecs_unique_certified: bool | None = None
    rank_vcs: int | None = None
    rank_aecs: int | None = None
    theta_prime_hit: ThetaPrimeWitness | None = None
    baseline_scores: BaselineCentralities | None = None
    violations: tuple = ()
    eigenvalues: tuple = ()


def uniqueness_matrices(split: SpectralSplit):
    """Columns ``r_-i (x) r_-i`` (AECS) and their stack with the zero and unstable parts (VCS).

    These are the Jordan-basis uniqueness matrices multiplied on the left by
    the invertible ``S (x) S`` block maps relating the real block basis to a
    Jordan basis, so they have the same ranks.  Only meaningful when the
    zero eigenvalue is semisimple.
    """
    n_m, n_0, _ = split.sizes
    R_inv = split.R_inv
    parts = [R_inv[:n_m], R_inv[n_m:n_m + n_0], R_inv[n_m + n_0:]]
    cols = [np.einsum("ai,bi->abi", r, r).reshape(r.shape[0] ** 2, split.n) for r in parts]
    return np.vstack(cols), cols[0]


def uniqueness_certificates(split: SpectralSplit, rel_tol: float = 1e-8) -> UniquenessCertificate:
    M_vcs, M_aecs = uniqueness_matrices(split)
    n = split.n
    r_vcs = numerical_rank(M_vcs, rel_tol)
    r_aecs = numerical_rank(M_aecs, rel_tol) if M_aecs.size else 0
    return UniquenessCertificate(r_vcs, r_aecs, r_vcs == n, r_aecs == n)


def theta_prime_check(eigs, T: float, tol: float = 1e-9):
    """Return a :class:`ThetaPrimeWitness` if ``T`` is an exceptional horizon, else ``None``.

    Every ordered pair sum ``lambda_i + lambda_j`` is examined; a sum with
    ``|Re| <= tol * max(1, max|lambda|)`` and nonzero imaginary part ``theta``
    flags ``T`` when ``T * |theta| / (2 pi)`` is within ``tol`` of a nonzero integer.
    """
    if not (np.isfinite(T) and T > 0):
        raise ValueError(f"horizon must be a positive finite number, got {T!r}")
    eigs = np.asarray(eigs, dtype=complex).reshape(-1)
    if eigs.size == 0:
        return None
    scale = max(1.0, float(np.abs(eigs).max()))
    sums = eigs[:, None] + eigs[None, :]
    for i, j in zip(*np.nonzero((np.abs(sums.real) <= tol * scale) & (np.abs(sums.imag) > tol * scale))):
        theta = abs(float(sums[i, j].imag))
        cycles = T * theta / (2 * math.pi)
        ell = round(cycles)
        if ell != 0 and abs(cycles - ell) <= tol:
            return ThetaPrimeWitness(theta=theta, ell=int(ell), T=float(T),
                                     pair=(complex(eigs[i]), complex(eigs[j])))
    return None


def baseline_centralities(A, T: float, rel_cutoff: float = 1e-10) -> BaselineCentralities:
    """Gramian-trace (AC), log-volume (VCE) and energy (ACE) centralities per node.

    VCE and ACE only use the positive eigenvalues of each node Gramian, those
    above ``rel_cutoff`` times the largest one.
    """
    gram = finite_gramians(A, T).matrices
    n = gram.shape[0]
    ac = np.trace(gram, axis1=1, axis2=2)
    vce = np.empty(n)
    ace = np.empty(n)
    ranks = np.empty(n, dtype=int)
    for i, W in enumerate(gram):
        lam = np.linalg.eigvalsh(W)
        pos = lam[lam > rel_cutoff * lam.max()] if lam.max() > 0 else lam[:0]
        ranks[i] = pos.size
        vce[i] = np.sum(np.log(pos))
        ace[i] = -np.sum(1.0 / pos)
    return BaselineCentralities(T=float(T), ac=ac, vce=vce, ace=ace, ranks=ranks)


def controllability_matrix(A, B) -> np.ndarray:
    """``[B, AB, ..., A^{n-1} B]``."""
    A = as_matrix(A, "A", square=True)
    blocks = [np.asarray(B, dtype=float)]
    for _ in range(A.shape[0] - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def controllability_rank(A, p, rel_tol: float = 1e-8) -> int:
    """Rank of the controllability matrix with input matrix ``diag(sqrt(p))``."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if np.any(p < 0):
        raise ValueError("allocation has negative entries")
    return numerical_rank(controllability_matrix(A, np.diag(np.sqrt(p))), rel_tol)


def diagnose(A, T: float | None = None, zero_tol: float = ZERO_TOL,
             semisimple_tol: float = SEMISIMPLE_TOL, split: SpectralSplit | None = None
             ) -> DiagnosticsReport:
    """Assumption flags, spectrum split and uniqueness evidence for ``A``.

    Infinite-horizon certificates are filled in when both assumptions hold
    (they need the block split).  With a finite ``T`` the exceptional-horizon
    check and the baseline centralities at ``T`` are included as well.
    """
    A = as_matrix(A, "A", square=True)
    cls, rep = assess(A, zero_tol, semisimple_tol)
    fields = dict(
        assumption1=rep.assumption1,
        assumption2=rep.assumption2,
        n_minus=cls.n_minus,
        n_zero=cls.n_zero,
        n_plus=cls.n_plus,
        violations=rep.messages,
        eigenvalues=tuple(complex(z) for z in cls.eigenvalues),
    )
    if rep.assumption2:
        if split is None:
            split = block_diagonalize(A, zero_tol, semisimple_tol)
        cert = uniqueness_certificates(split)
        fields.update(
            rank_vcs=cert.rank_vcs,
            rank_aecs=cert.rank_aecs,
            vcs_unique_certified=cert.vcs_certified,
            aecs_unique_certified=cert.aecs_certified and rep.assumption1,
        )
    if T is not None:
        fields["theta_prime_hit"] = theta_prime_check(cls.eigenvalues, T)
        fields["baseline_scores"] = baseline_centralities(A, T)
    return DiagnosticsReport(**fields)
