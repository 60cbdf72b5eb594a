"""Limited-memory quasi-Newton descent on a linear subspace with a feasibility oracle.

The caller supplies a reduced gradient (already projected onto the admissible
subspace), an initial inverse-Hessian approximation and a feasibility test.
Steps that leave the feasible set are shortened; that is how a box is kept.
Close to the optimum the objective changes by less than its rounding error,
so a step is also accepted when the value is flat to rounding and the
gradient norm drops.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np


@dataclass
class OptimResult:
    x: np.ndarray
    value: float
    grad: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool
    boundary_hits: int
    message: str


def lbfgs(
    fun,
    x0,
    *,
    precondition=None,
    project=None,
    feasible=None,
    grad_norm=None,
    tol=1e-9,
    max_iter=500,
    memory=10,
    c1=1e-4,
    noise_rel=1e-13,
    max_backtracks=60,
):
    """Minimize ``fun`` starting from ``x0``.

    Parameters
    ----------
    fun : callable
        ``fun(x) -> (value, reduced_gradient)``.
    precondition : callable, optional
        Applies the initial inverse-Hessian approximation to a vector.
    project : callable, optional
        Orthogonal projection onto the search subspace.
    feasible : callable, optional
        ``feasible(x) -> bool``; infeasible trial points are shortened.
    grad_norm : callable, optional
        Norm used for the stopping test (default: max norm).
    """
    precondition = precondition or (lambda v: v)
    project = project or (lambda v: v)
    feasible = feasible or (lambda x: True)
    grad_norm = grad_norm or (lambda g: float(np.max(np.abs(g))))

    x = project(np.asarray(x0, dtype=float).copy())
    f, g = fun(x)
    gn = grad_norm(g)
    pairs = deque(maxlen=memory)
    hits = 0
    for it in range(max_iter):
        if gn < tol:
            return OptimResult(x, f, g, gn, it, True, hits, "gradient below tolerance")
        p = -_two_loop(g, pairs, precondition, project)
        slope = float(g @ p)
        if slope >= 0:
            pairs.clear()
            p = -project(precondition(g))
            slope = float(g @ p)
        alpha = 1.0
        accepted = False
        for _ in range(max_backtracks):
            x_new = project(x + alpha * p)
            if not feasible(x_new):
                hits += 1
                alpha *= 0.5
                continue
            f_new, g_new = fun(x_new)
            if f_new <= f + c1 * alpha * slope:
                accepted = True
                break
            flat = abs(f_new - f) <= noise_rel * max(1.0, abs(f))
            if flat and grad_norm(g_new) < gn:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            return OptimResult(x, f, g, gn, it, False, hits, "line search stalled")
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            pairs.append((s, y, 1.0 / sy))
        x, f, g = x_new, f_new, g_new
        gn = grad_norm(g)
    converged = gn < tol
    return OptimResult(
        x, f, g, gn, max_iter, converged, hits, "converged" if converged else "iteration cap reached"
    )


def _two_loop(g, pairs, precondition, project):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * float(s @ q)
        alphas.append(a)
        q = q - a * y
    r = project(precondition(q))
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * float(y @ r)
        r = r + (a - b) * s
    return project(r)
