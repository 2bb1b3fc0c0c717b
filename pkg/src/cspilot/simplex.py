"""Dense tableau simplex solver for small linear programs.

Solves ``min c @ x  subject to  A_ub @ x <= b_ub, x >= 0``.

Two pivoting paths share one tableau core:

* when ``c >= 0`` the all-slack basis is dual feasible, so a dual simplex
  run starting from it reaches the optimum directly — this is the fast path
  for l1-minimization embeddings, whose optima are sparse vertices;
* otherwise a standard two-phase primal simplex is used.

Anti-cycling: after an initial phase of steepest-decrease pivots the solver
permanently switches to Bland's smallest-index rule, which cannot cycle.
The iteration cap defaults to ``50 *`` the total variable count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_BLAND_AFTER_FACTOR = 5  # switch to Bland's rule after this many times (m+n) pivots


@dataclass
class LpResult:
    x: np.ndarray | None
    objective: float | None
    status: str  # optimal | infeasible | unbounded | iteration-limit
    iterations: int


def _pivot(T: np.ndarray, r: int, q: int) -> None:
    # Gauss-Jordan step on the full tableau (cost row included as last row).
    T[r] /= T[r, q]
    col = T[:, q].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[:, q] = 0.0
    T[r, q] = 1.0


def _dual_simplex(T, basis, n_total, tol, max_iter, bland_after):
    """Dual simplex on a dual-feasible tableau; returns (status, iterations)."""
    it = 0
    while True:
        rhs = T[:-1, -1]
        if it >= bland_after:
            viol = np.flatnonzero(rhs < -tol)
            if viol.size == 0:
                return "optimal", it
            r = viol[np.argmin(basis[viol])]
        else:
            r = int(np.argmin(rhs))
            if rhs[r] >= -tol:
                return "optimal", it
        if it >= max_iter:
            return "iteration-limit", it
        row = T[r, :-1]
        eligible = row < -tol
        if not eligible.any():
            # row reads sum(nonneg terms) = negative: no feasible point
            return "infeasible", it
        ratios = np.where(eligible, T[-1, :-1] / np.where(eligible, -row, 1.0), np.inf)
        q = int(np.argmin(ratios))  # argmin takes the smallest index on ties
        _pivot(T, r, q)
        basis[r] = q
        it += 1


def _primal_simplex(T, basis, allowed, tol, max_iter, bland_after, it0=0):
    """Primal simplex on a primal-feasible tableau; returns (status, iterations)."""
    it = it0
    while True:
        red = T[-1, :-1]
        candidates = np.flatnonzero((red < -tol) & allowed)
        if candidates.size == 0:
            return "optimal", it
        if it >= max_iter:
            return "iteration-limit", it
        if it >= bland_after:
            q = int(candidates[0])
        else:
            q = int(candidates[np.argmin(red[candidates])])
        col = T[:-1, q]
        pos = col > tol
        if not pos.any():
            return "unbounded", it
        ratios = np.where(pos, T[:-1, -1] / np.where(pos, col, 1.0), np.inf)
        rmin = ratios.min()
        tied = np.flatnonzero(ratios <= rmin + tol)
        r = int(tied[np.argmin(basis[tied])])
        _pivot(T, r, q)
        basis[r] = q
        it += 1


def solve_lp(c, A_ub, b_ub, *, tol: float = 1e-9, max_iter: int | None = None) -> LpResult:
    """Minimize ``c @ x`` subject to ``A_ub @ x <= b_ub`` and ``x >= 0``.

    Parameters
    ----------
    c, A_ub, b_ub : array_like
        Dense problem data; `A_ub` has shape (m, n).
    tol : float
        Feasibility/optimality tolerance.
    max_iter : int, optional
        Pivot cap; defaults to ``50 * (n + m)``.

    Returns
    -------
    LpResult
        ``x`` holds the n structural variables when status is ``optimal``,
        otherwise None.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A_ub, dtype=float)
    b = np.asarray(b_ub, dtype=float)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("inconsistent LP dimensions")
    if max_iter is None:
        max_iter = 50 * (n + m)
    bland_after = _BLAND_AFTER_FACTOR * (n + m)

    if (c >= 0).all():
        # slack basis is dual feasible: run dual simplex straight away
        T = np.zeros((m + 1, n + m + 1))
        T[:m, :n] = A
        T[:m, n : n + m] = np.eye(m)
        T[:m, -1] = b
        T[-1, :n] = c
        basis = np.arange(n, n + m)
        status, it = _dual_simplex(T, basis, n + m, tol, max_iter, bland_after)
        if status != "optimal":
            return LpResult(x=None, objective=None, status=status, iterations=it)
        x = np.zeros(n + m)
        x[basis] = T[:-1, -1]
        xs = x[:n]
        return LpResult(x=xs, objective=float(c @ xs), status="optimal", iterations=it)

    # General costs: two-phase primal with artificials on rows that start infeasible.
    neg = b < 0
    A1 = np.where(neg[:, None], -A, A)
    b1 = np.where(neg, -b, b)
    slack_sign = np.where(neg, -1.0, 1.0)
    n_art = int(neg.sum())
    width = n + m + n_art + 1
    T = np.zeros((m + 1, width))
    T[:m, :n] = A1
    T[:m, n : n + m] = np.diag(slack_sign)
    art_cols = n + m + np.arange(n_art)
    T[np.flatnonzero(neg), art_cols] = 1.0
    T[:m, -1] = b1
    basis = np.arange(n, n + m)
    basis[neg] = art_cols
    # phase-1 objective: sum of artificials, expressed in reduced-cost form
    T[-1] = -T[np.flatnonzero(neg)].sum(axis=0) if n_art else 0.0
    T[-1, art_cols] = 0.0
    allowed = np.ones(width - 1, dtype=bool)
    status, it = _primal_simplex(T, basis, allowed, tol, max_iter, bland_after)
    if status != "optimal":
        return LpResult(x=None, objective=None, status=status, iterations=it)
    if T[-1, -1] < -tol * max(1.0, abs(b).max()):
        return LpResult(x=None, objective=None, status="infeasible", iterations=it)

    # drive any residual (degenerate) artificials out of the basis
    for r in range(m):
        if basis[r] >= n + m:
            pivot_cols = np.flatnonzero(np.abs(T[r, : n + m]) > tol)
            if pivot_cols.size:
                _pivot(T, r, int(pivot_cols[0]))
                basis[r] = int(pivot_cols[0])
            # else: redundant row; harmless to leave, artificial stays at zero

    # phase 2: rebuild the cost row for the true objective
    allowed[n + m :] = False
    T[-1, :] = 0.0
    T[-1, :n] = c
    for r in range(m):
        if basis[r] < n and c[basis[r]] != 0.0:
            T[-1] -= c[basis[r]] * T[r]
    status, it = _primal_simplex(T, basis, allowed, tol, max_iter, bland_after, it0=it)
    if status != "optimal":
        return LpResult(x=None, objective=None, status=status, iterations=it)
    x = np.zeros(width - 1)
    x[basis] = T[:-1, -1]
    xs = x[:n]
    return LpResult(x=xs, objective=float(c @ xs), status="optimal", iterations=it)
