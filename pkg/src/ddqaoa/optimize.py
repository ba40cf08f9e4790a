"""QAOA angle optimization: multistart Newton ascent, COBYLA refinement and the FOURIER ladder.

All optimizers maximize the cut expectation.  Exact-mode objectives are
batched: a function taking an ``(B, 2p)`` array of ``[gamma..., beta...]``
rows and returning ``B`` values.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .graph import WeightedGraph
from .maxcut import brute_force_maxcut
from .simulator import QaoaEvaluator, QaoaParams

log = logging.getLogger(__name__)

FD_STEP = 1e-4
MAX_STARTS = 200


@dataclass
class OptimizeResult:
    params: QaoaParams
    value: float
    ratio: float
    evaluations: int
    starts_used: int = 1
    converged: bool = True


@dataclass
class FourierCoeffs:
    u: np.ndarray
    v: np.ndarray

    @property
    def q(self) -> int:
        return len(self.u)


def _fourier_basis(q: int, p: int):
    i = np.arange(1, p + 1)[:, None] - 0.5
    k = np.arange(1, q + 1)[None, :] - 0.5
    arg = k * i * np.pi / p
    return np.sin(arg), np.cos(arg)


def fourier_to_params(coeffs: FourierCoeffs, p: int) -> QaoaParams:
    """``gamma_i = sum_k u_k sin((k-1/2)(i-1/2) pi/p)`` and the cosine analogue for beta."""
    if coeffs.q > p:
        raise ValueError(f"q={coeffs.q} frequencies exceed p={p}")
    S, C = _fourier_basis(coeffs.q, p)
    return QaoaParams(S @ np.asarray(coeffs.u, float), C @ np.asarray(coeffs.v, float))


def params_to_fourier(params: QaoaParams) -> FourierCoeffs:
    """Inverse of :func:`fourier_to_params` with ``q = p`` (both bases are invertible)."""
    S, C = _fourier_basis(params.p, params.p)
    return FourierCoeffs(np.linalg.solve(S, params.gamma), np.linalg.solve(C, params.beta))


def fd_gradient_hessian(f_batch: Callable, x: np.ndarray, h: float = FD_STEP):
    """Central-difference value, gradient and Hessian from one batched call."""
    d = x.size
    E = np.eye(d) * h
    pts = [x]
    pts += [x + E[i] for i in range(d)]
    pts += [x - E[i] for i in range(d)]
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    for i, j in pairs:
        pts += [x + E[i] + E[j], x + E[i] - E[j], x - E[i] + E[j], x - E[i] - E[j]]
    vals = f_batch(np.array(pts))
    f0 = vals[0]
    fp = vals[1 : d + 1]
    fm = vals[d + 1 : 2 * d + 1]
    grad = (fp - fm) / (2 * h)
    H = np.diag((fp - 2 * f0 + fm) / h**2)
    for t, (i, j) in enumerate(pairs):
        a, b, c, e = vals[2 * d + 1 + 4 * t : 2 * d + 5 + 4 * t]
        H[i, j] = H[j, i] = (a - b - c + e) / (4 * h * h)
    return f0, grad, H


def fd_gradient(f_batch: Callable, x: np.ndarray, h: float = FD_STEP):
    d = x.size
    E = np.eye(d) * h
    vals = f_batch(np.vstack([x[None, :], x + E, x - E]))
    return vals[0], (vals[1 : d + 1] - vals[d + 1 :]) / (2 * h)


# damping multipliers tried in one batch per Newton iteration
_DAMPING = np.array([0.0, 1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3])


def newton_ascent(
    f_batch: Callable,
    x0,
    h: float = FD_STEP,
    max_iter: int = 200,
    ftol: float = 1e-8,
    gtol: float = 1e-6,
    max_step: float = 0.5,
):
    """Damped finite-difference Newton ascent.

    Each iteration solves ``(lam I - H) d = g`` for a ladder of damping values
    ``lam`` above the largest Hessian eigenvalue, so the step moves from pure
    Newton towards a short gradient step, evaluates all candidates at once and
    keeps the best one if it improves the objective.

    Returns ``(x, f, grad_norm, iterations, converged)``.
    """
    x = np.asarray(x0, dtype=float).copy()
    f0, g, H = fd_gradient_hessian(f_batch, x, h)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        gnorm = np.linalg.norm(g)
        if gnorm < gtol:
            converged = True
            break
        lam_e, Q = np.linalg.eigh(H)
        qg = Q.T @ g
        scale = max(np.abs(lam_e).max(), gnorm, 1e-8)
        base = max(0.0, lam_e.max() + 1e-8 * scale)
        steps = []
        for mu in _DAMPING:
            lam = base + mu * scale
            d = Q @ (qg / (lam - lam_e))
            nd = np.linalg.norm(d)
            if nd > max_step:
                d *= max_step / nd
            steps.append(d)
        steps.append(g * (max_step / gnorm) * 1e-3)
        trial = x + np.array(steps)
        vals = f_batch(trial)
        best = int(np.argmax(vals))
        if vals[best] <= f0:
            converged = gnorm < 1e-4
            break
        gain = vals[best] - f0
        x = trial[best]
        f0, g, H = fd_gradient_hessian(f_batch, x, h)
        if gain < ftol and np.linalg.norm(g) < 1e-5:
            converged = True
            break
    return x, f0, float(np.linalg.norm(g)), it, converged


def default_n_starts(g: WeightedGraph, p: int, c: float = 1.0) -> int:
    """Start count ``c * p * (n + m)`` capped at :data:`MAX_STARTS`."""
    return int(min(MAX_STARTS, max(1, round(c * p * (g.n + g.m)))))


def _wrap(x, period):
    # into (-period/2, period/2]
    return period / 2 - np.mod(period / 2 - x, period)


def equivalent_small_angles(params: QaoaParams, integer_weights: bool) -> QaoaParams:
    """Smallest-angle member of the parameter class with the same expectation.

    Exact symmetries used: each ``beta_k`` has period ``pi/2`` (the shift is a
    global bit flip), ``(gamma, beta) -> (-gamma, -beta)`` conjugates the
    state, and with integer weights each ``gamma_k`` has period ``2 pi``.
    The sign is fixed so the first non-negligible ``gamma`` is positive.
    """
    gam = _wrap(params.gamma, 2 * np.pi) if integer_weights else params.gamma.copy()
    bet = _wrap(params.beta, np.pi / 2)
    lead = gam[np.abs(gam) > 1e-12]
    if lead.size and lead[0] < 0:
        gam, bet = -gam, -bet
        bet = _wrap(bet, np.pi / 2)
    return QaoaParams(gam, bet)


def has_integer_weights(g: WeightedGraph) -> bool:
    return bool(g.m) and bool(np.all(g.weights == np.round(g.weights)))


def _resolve_optimum(g: WeightedGraph, optimum):
    return brute_force_maxcut(g).value if optimum is None else optimum


def random_starts(p: int, n_starts: int, rng_seed: int) -> np.ndarray:
    """Uniform starts in ``[0, 2 pi]^p x [0, pi]^p``; prefixes are shared across counts."""
    rng = np.random.default_rng(rng_seed)
    X = np.empty((n_starts, 2 * p))
    for s in range(n_starts):
        X[s, :p] = rng.uniform(0.0, 2 * np.pi, p)
        X[s, p:] = rng.uniform(0.0, np.pi, p)
    return X


def multistart_optimize(
    g: WeightedGraph,
    p: int,
    n_starts: int | None = None,
    rng_seed: int = 0,
    optimum: float | None = None,
    evaluator: QaoaEvaluator | None = None,
    h: float = FD_STEP,
    screen_iter: int = 30,
    polish: int = 5,
) -> OptimizeResult:
    """Best local optimum of the exact expectation over uniformly drawn starts.

    Every start gets ``screen_iter`` Newton iterations; the ``polish`` best
    are then run to convergence.  Slow ridge-crawling starts rarely overtake
    the leaders, so this keeps the answer and cuts most of the cost.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    optimum = _resolve_optimum(g, optimum)
    ev = evaluator or QaoaEvaluator(g, optimum=optimum)
    n_starts = default_n_starts(g, p) if n_starts is None else int(n_starts)
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    before = ev.evaluations
    screened = [newton_ascent(ev.vector_batch, x0, h=h, max_iter=screen_iter)
                for x0 in random_starts(p, n_starts, rng_seed)]
    order = sorted(range(n_starts), key=lambda k: -screened[k][1])
    best = None
    for k in order[: max(1, polish)]:
        x, f, _, _, conv = newton_ascent(ev.vector_batch, screened[k][0], h=h)
        if best is None or f > best[1]:
            best = (x, f, conv)
    x, f, conv = best
    params = QaoaParams.from_vector(x)
    return OptimizeResult(params, float(f), float(f) / optimum, ev.evaluations - before, n_starts, conv)


def local_optimize(
    g: WeightedGraph,
    init: QaoaParams,
    optimum: float | None = None,
    evaluator: QaoaEvaluator | None = None,
    h: float = FD_STEP,
) -> OptimizeResult:
    """Single Newton ascent from ``init`` on the exact expectation."""
    optimum = _resolve_optimum(g, optimum)
    ev = evaluator or QaoaEvaluator(g, optimum=optimum)
    before = ev.evaluations
    x, f, _, _, conv = newton_ascent(ev.vector_batch, init.to_vector(), h=h)
    return OptimizeResult(QaoaParams.from_vector(x), float(f), float(f) / optimum, ev.evaluations - before, 1, conv)


def _bfgs_ascent(f_batch: Callable, x0: np.ndarray, h: float = FD_STEP, gtol: float = 1e-6, maxiter: int = 2000):
    cache = {}

    def fun(x):
        key = x.tobytes()
        if key not in cache:
            cache.clear()
            f, gr = fd_gradient(f_batch, x, h)
            cache[key] = (-f, -gr)
        return cache[key]

    res = minimize(
        lambda x: fun(x)[0], x0, jac=lambda x: fun(x)[1], method="BFGS",
        options={"gtol": gtol, "maxiter": maxiter},
    )
    return res.x, -res.fun, bool(res.success)


def fourier_optimize(
    g: WeightedGraph,
    p_target: int,
    optimum: float | None = None,
    evaluator: QaoaEvaluator | None = None,
    p1_starts: int | None = None,
    rng_seed: int = 0,
    polish: bool = True,
) -> list[OptimizeResult]:
    """FOURIER[q=p, R=0] ladder from p=1 up to ``p_target``.

    Depth 1 comes from :func:`multistart_optimize`.  Each later depth ascends
    in coefficient space from two warm starts: the previous coefficients
    padded with a zero frequency, and the previous angles with an appended
    zero layer (same state, so the ladder never regresses).  The better
    ascent is kept.
    """
    if p_target < 1:
        raise ValueError("p_target must be >= 1")
    optimum = _resolve_optimum(g, optimum)
    ev = evaluator or QaoaEvaluator(g, optimum=optimum)
    first = multistart_optimize(g, 1, n_starts=p1_starts, rng_seed=rng_seed, optimum=optimum, evaluator=ev)
    ladder = [first]
    coeffs = params_to_fourier(first.params)
    for p in range(2, p_target + 1):
        before = ev.evaluations
        S, C = _fourier_basis(p, p)

        def f_uv(UV, S=S, C=C, p=p):
            UV = np.atleast_2d(UV)
            return ev.expectation_batch(UV[:, :p] @ S.T, UV[:, p:] @ C.T)

        padded = np.concatenate((coeffs.u, [0.0], coeffs.v, [0.0]))
        prev = ladder[-1].params
        extended = params_to_fourier(QaoaParams(np.append(prev.gamma, 0.0), np.append(prev.beta, 0.0)))
        cands = []
        for start in (padded, np.concatenate((extended.u, extended.v))):
            x, f, ok = _bfgs_ascent(f_uv, start)
            cands.append((f, x, ok))
        f, x, ok = max(cands, key=lambda t: t[0])
        params = QaoaParams(S @ x[:p], C @ x[p:])
        if polish:
            x2, f2, _, _, ok2 = newton_ascent(ev.vector_batch, params.to_vector())
            if f2 >= f:
                params, f, ok = QaoaParams.from_vector(x2), f2, ok2
        coeffs = params_to_fourier(params)
        value = ev.expectation(params)
        ladder.append(OptimizeResult(params, value, value / optimum, ev.evaluations - before, 2, ok))
    return ladder


def cobyla_optimize(
    objective: Callable[[QaoaParams], float],
    init: QaoaParams,
    budget: int = 200,
    rhobeg: float = 0.2,
    rhoend: float = 1e-3,
    optimum: float | None = None,
) -> OptimizeResult:
    """Derivative-free refinement of a (possibly noisy) objective to maximize.

    Wraps scipy's COBYLA, which keeps a linear model on a simplex of ``2p+1``
    points inside a shrinking trust region.  The best objective value seen is
    returned; ``converged`` is False when the evaluation budget ran out
    before the trust radius fell below ``rhoend``.
    """
    p = init.p
    if budget < 2 * p + 2:
        raise ValueError(f"budget must be at least 2p+2 = {2 * p + 2}")
    best = {"f": -np.inf, "x": init.to_vector(), "n": 0}

    def neg(x):
        val = float(objective(QaoaParams.from_vector(x)))
        best["n"] += 1
        if val > best["f"]:
            best["f"], best["x"] = val, np.array(x, dtype=float)
        return -val

    res = minimize(neg, init.to_vector(), method="COBYLA",
                   options={"rhobeg": rhobeg, "tol": rhoend, "maxiter": budget})
    converged = bool(res.status == 1) and best["n"] < budget
    ratio = best["f"] / optimum if optimum else float("nan")
    return OptimizeResult(QaoaParams.from_vector(best["x"]), best["f"], ratio, best["n"], 1, converged)
