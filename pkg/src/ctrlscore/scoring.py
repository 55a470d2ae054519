"""Controllability scoring problems and their projected-gradient solver.

Two objectives over the standard simplex, for a family of PSD matrices
``G_i`` with ``G(p) = sum_i p_i G_i``:

* ``logdet``   : ``-log det G(p)``  (volumetric score, VCS)
* ``traceinv`` : ``tr G(p)^{-1}``   (average-energy score, AECS)

The family is chosen by horizon: finite-horizon Gramians ``W(e_i e_i^T; T)``
for both objectives; on the infinite horizon the full modal blocks for VCS
and the stable blocks ``V_-i`` only for AECS.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg as sla

from .errors import AssumptionViolation, NotPositiveDefinite, StagnationError
from .gramian import finite_gramians, modal_gramians, symmetrize, uniform_allocation
from .linalg import ZERO_TOL, as_matrix
from .spectral import SEMISIMPLE_TOL, block_diagonalize

__all__ = [
    "ScoreProblem",
    "ScoreReport",
    "SolverOptions",
    "objective",
    "gradient",
    "project_simplex",
    "armijo_step",
    "solve",
    "score_finite",
    "score_infinite",
    "KINDS",
]

KINDS = {"vcs": "logdet", "aecs": "traceinv"}

# relative pivot floor below which G(p) counts as singular
PD_TOL = 1e-13
ALPHA_MIN = 1e-16


@dataclass(frozen=True)
class SolverOptions:
    eps: float = 1e-8
    sigma: float = 1e-4
    rho: float = 0.5
    alpha0: float = 1.0
    max_iter: int = 100_000

    def __post_init__(self):
        if not (0 < self.sigma < 1 and 0 < self.rho < 1):
            raise ValueError("sigma and rho must lie in (0, 1)")
        if self.alpha0 <= 0 or self.eps < 0 or self.max_iter < 1:
            raise ValueError("alpha0 must be positive, eps nonnegative, max_iter >= 1")


class ScoreProblem:
    """A family of symmetric PSD matrices and the objective to minimize over the simplex.

    Parameters
    ----------
    family : array_like, shape (n, m, m)
        ``family[i]`` is the contribution of node ``i``.
    objective_kind : {"logdet", "traceinv"}
    """

    def __init__(self, family, objective_kind: str):
        if objective_kind not in ("logdet", "traceinv"):
            raise ValueError(f"objective_kind must be 'logdet' or 'traceinv', got {objective_kind!r}")
        G = np.asarray(family, dtype=float)
        if G.ndim != 3 or G.shape[1] != G.shape[2] or G.shape[0] == 0 or G.shape[1] == 0:
            raise ValueError(f"family must have shape (n, m, m), got {G.shape}")
        if not np.all(np.isfinite(G)):
            raise ValueError("family contains NaN or Inf entries")
        scale = np.linalg.norm(G, axis=(1, 2))
        asym = np.linalg.norm(G - np.swapaxes(G, 1, 2), axis=(1, 2))
        if np.any(asym > 1e-8 * np.maximum(scale, 1e-300)):
            raise ValueError("family members must be symmetric")
        G = symmetrize(G)
        low = np.linalg.eigvalsh(G).min(axis=1)
        if np.any(low < -1e-10 * scale):
            raise ValueError("family members must be positive semidefinite")
        self.family = G
        self.objective_kind = objective_kind
        self.n = G.shape[0]
        if _factor(self.combine(uniform_allocation(self.n))) is None:
            raise NotPositiveDefinite("G(p) is singular at the uniform allocation")

    def combine(self, p) -> np.ndarray:
        return symmetrize(np.tensordot(np.asarray(p, dtype=float), self.family, axes=1))


def _factor(G: np.ndarray):
    """Lower Cholesky factor of ``G`` or ``None`` when ``G`` is not safely positive definite."""
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        return None
    d = np.diag(L)
    if not np.all(np.isfinite(d)) or d.min() ** 2 <= PD_TOL * np.diag(G).max():
        return None
    return L


def _value(prob: ScoreProblem, L: np.ndarray) -> float:
    if prob.objective_kind == "logdet":
        return float(-2.0 * np.sum(np.log(np.diag(L))))
    Linv = sla.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    return float(np.sum(Linv * Linv))


def _gradient(prob: ScoreProblem, L: np.ndarray) -> np.ndarray:
    Linv = sla.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    Ginv = Linv.T @ Linv
    if prob.objective_kind == "logdet":
        H = Ginv
    else:
        H = Ginv @ Ginv
    return -np.einsum("jk,ijk->i", H, prob.family)


def _evaluate(prob: ScoreProblem, p) -> float:
    """Objective at ``p``, or ``+inf`` where ``G(p)`` is not positive definite."""
    L = _factor(prob.combine(p))
    return math.inf if L is None else _value(prob, L)


def objective(prob: ScoreProblem, p) -> float:
    """``-log det G(p)`` or ``tr G(p)^{-1}``.

    Raises
    ------
    NotPositiveDefinite
        If ``G(p)`` is not positive definite.
    """
    L = _factor(prob.combine(p))
    if L is None:
        raise NotPositiveDefinite("G(p) is not positive definite at this allocation")
    return _value(prob, L)


def gradient(prob: ScoreProblem, p) -> np.ndarray:
    """Gradient of :func:`objective`: ``-tr(G^{-1} G_i)`` or ``-tr(G^{-1} G_i G^{-1})``."""
    L = _factor(prob.combine(p))
    if L is None:
        raise NotPositiveDefinite("G(p) is not positive definite at this allocation")
    return _gradient(prob, L)


def project_simplex(x) -> np.ndarray:
    """Euclidean projection onto the standard simplex (sort-and-threshold)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot project a vector with NaN or Inf entries")
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, x.size + 1)
    active = np.nonzero(u * k > css)[0]
    rho = active[-1] if active.size else 0
    tau = css[rho] / (rho + 1)
    return np.maximum(x - tau, 0.0)


def _line_search(prob, p, f_p, grad, sigma, rho, alpha0, eps=None):
    """Backtrack to an Armijo step; returns ``(alpha, q, f_q, settled)``.

    With ``eps`` given, a rejected candidate within ``eps`` of ``p`` ends the
    search with ``settled=True`` and ``q = p``: any admissible step would be
    shorter still and satisfy the outer stopping rule, while the decrease it
    could certify is below the rounding level of ``f``.
    """
    alpha = alpha0
    while alpha >= ALPHA_MIN:
        q = project_simplex(p - alpha * grad)
        f_q = _evaluate(prob, q)
        # min(0, .) keeps rounding in a vanishing step from admitting an increase
        if f_q <= f_p + sigma * min(0.0, float(grad @ (q - p))):
            return alpha, q, f_q, False
        if eps is not None and np.linalg.norm(q - p) <= eps:
            return alpha, p, f_p, True
        alpha *= rho
    raise StagnationError(f"Armijo step fell below {ALPHA_MIN:g} without sufficient decrease")


def armijo_step(prob: ScoreProblem, p, grad=None, sigma: float = 1e-4, rho: float = 0.5,
                alpha0: float = 1.0) -> float:
    """Largest ``alpha0 * rho**k`` satisfying the Armijo condition along the projection arc."""
    p = np.asarray(p, dtype=float)
    f_p = objective(prob, p)
    if grad is None:
        grad = gradient(prob, p)
    alpha, _, _, _ = _line_search(prob, p, f_p, np.asarray(grad, dtype=float), sigma, rho, alpha0)
    return alpha


@dataclass
class ScoreReport:
    """Result of one projected-gradient run."""

    allocation: np.ndarray
    objective: float
    iterations: int
    converged: bool
    terminal_gap: float
    stop_reason: str
    objectives: tuple = ()
    step_sizes: tuple = ()
    kind: str | None = None
    horizon: float | None = None
    uniqueness_warning: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["allocation"] = [float(v) for v in self.allocation]
        d["objectives"] = [float(v) for v in self.objectives]
        d["step_sizes"] = [float(v) for v in self.step_sizes]
        d["horizon"] = "inf" if self.horizon == math.inf else self.horizon
        return d


def solve(prob: ScoreProblem, eps: float = 1e-8, sigma: float = 1e-4, rho: float = 0.5,
          alpha0: float = 1.0, max_iter: int = 100_000) -> ScoreReport:
    """Projected gradient with Armijo steps from the uniform allocation.

    Stops once ``||p_k - p_{k+1}|| <= eps``.  Hitting ``max_iter`` or an
    Armijo underflow returns a report with ``converged=False``.
    """
    SolverOptions(eps, sigma, rho, alpha0, max_iter)
    p = uniform_allocation(prob.n)
    f_p = objective(prob, p)
    objectives = [f_p]
    steps = []
    gap = math.inf
    reason = "max_iter"
    for _ in range(max_iter):
        grad = gradient(prob, p)
        try:
            alpha, q, f_q, settled = _line_search(prob, p, f_p, grad, sigma, rho, alpha0, eps)
        except StagnationError:
            reason = "stagnation"
            break
        if settled:
            gap = 0.0
            reason = "converged"
            break
        gap = float(np.linalg.norm(p - q))
        p, f_p = q, f_q
        objectives.append(f_p)
        steps.append(alpha)
        if gap <= eps:
            reason = "converged"
            break
    return ScoreReport(
        allocation=p,
        objective=f_p,
        iterations=len(steps),
        converged=reason == "converged",
        terminal_gap=gap,
        stop_reason=reason,
        objectives=tuple(objectives),
        step_sizes=tuple(steps),
    )


def _kind(kind: str) -> str:
    try:
        return KINDS[kind]
    except KeyError:
        raise ValueError(f"objective must be 'vcs' or 'aecs', got {kind!r}") from None


def score_finite(A, T: float, kind: str, options: SolverOptions | None = None) -> ScoreReport:
    """Finite-horizon VCS or AECS of the system matrix ``A``."""
    from .diagnostics import theta_prime_check

    opts = options or SolverOptions()
    A = as_matrix(A, "A", square=True)
    gram = finite_gramians(A, T)
    report = solve(ScoreProblem(gram.matrices, _kind(kind)), **asdict(opts))
    report.kind, report.horizon = kind, float(T)
    hit = theta_prime_check(np.linalg.eigvals(A), T)
    if hit is not None:
        report.uniqueness_warning = (
            f"T = {T:g} is an exceptional horizon (theta = {hit.theta:g}, l = {hit.ell}); "
            "the score may not be unique"
        )
    return report


def score_infinite(A, kind: str, options: SolverOptions | None = None,
                   zero_tol: float = ZERO_TOL, semisimple_tol: float = SEMISIMPLE_TOL,
                   split=None) -> ScoreReport:
    """Infinite-horizon VCS or AECS through the Schur/Sylvester block split.

    Raises
    ------
    AssumptionViolation
        If zero is not the only, semisimple, imaginary-axis eigenvalue, or (AECS)
        there is no stable eigenvalue.
    """
    from .diagnostics import uniqueness_certificates

    opts = options or SolverOptions()
    if split is None:
        split = block_diagonalize(A, zero_tol, semisimple_tol)
    objective_kind = _kind(kind)
    if kind == "aecs" and split.classification.n_minus == 0:
        raise AssumptionViolation("infinite-horizon AECS needs at least one stable eigenvalue")
    modal = modal_gramians(split)
    family = modal.full() if kind == "vcs" else modal.stable()
    report = solve(ScoreProblem(family, objective_kind), **asdict(opts))
    report.kind, report.horizon = kind, math.inf
    cert = uniqueness_certificates(split)
    certified = cert.vcs_certified if kind == "vcs" else cert.aecs_certified
    if not certified:
        rank = cert.rank_vcs if kind == "vcs" else cert.rank_aecs
        report.uniqueness_warning = (
            f"uniqueness not certified: rank {rank} < n = {split.n}; other optimal "
            "allocations may exist"
        )
    return report
