"""Zero-mode (bifurcation) equation for the free constant ``zeta``.

For fixed ``eps`` the range equation is solved at every trial ``zeta``; the
remaining zero-mode condition

    H(zeta, eps) = A zeta + [N(zeta + u(zeta))]_0 = 0

(the zero Fourier mode of the equation divided by ``eps``) is then solved by
Newton's method with a finite-difference Jacobian. At ``zeta = 0`` and small
``eps`` the Jacobian is close to ``A``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import NonConvergence
from .fourier import FourierMap
from .model import SystemSpec, TaylorTensors
from .series import NON_CONVERGENT, bifurcation_value, build_form, full_field, solve_range


@dataclass
class SeriesParams:
    """How the range equation is solved inside the bifurcation loop."""

    K_max: int = 8
    N_trunc: int | None = None
    method: str = "series"
    tol_picard: float = 1e-14
    max_iter_picard: int = 200


@dataclass
class BifurcationSolveRecord:
    epsilon: float
    zeta: np.ndarray
    H_residual: float
    newton_iters: int
    u_sup_norm: float
    converged: bool = True
    message: str = ""
    u: FourierMap | None = field(default=None, repr=False)
    diagnostics: object = field(default=None, repr=False)


def _range(zeta, eps, spec, tensors, params: SeriesParams):
    return solve_range(eps, spec, tensors, zeta, K_max=params.K_max, N_trunc=params.N_trunc,
                       method=params.method, tol_picard=params.tol_picard,
                       max_iter=params.max_iter_picard)


def _H_and_u(zeta, eps, spec, tensors, params, form):
    u, diag = _range(zeta, eps, spec, tensors, params)
    val = bifurcation_value(form, full_field(u, zeta))
    return np.real(val), u, diag


def residual_H(zeta, eps, spec: SystemSpec, tensors: TaylorTensors, series_params: SeriesParams | None = None):
    """``H(zeta, eps)`` as a real m-vector.

    Raises
    ------
    NonConvergence
        propagated from the range solver.
    """
    params = SeriesParams() if series_params is None else series_params
    zeta = np.asarray(zeta, dtype=float).reshape(spec.m)
    return _H_and_u(zeta, eps, spec, tensors, params, build_form(spec, tensors))[0]


def jacobian_H(zeta, eps, spec, tensors, series_params=None, form=None) -> np.ndarray:
    """Central differences with step ``1e-6 (1 + |zeta_j|)``."""
    params = SeriesParams() if series_params is None else series_params
    form = build_form(spec, tensors) if form is None else form
    zeta = np.asarray(zeta, dtype=float).reshape(spec.m)
    J = np.zeros((spec.m, spec.m))
    for j in range(spec.m):
        h = 1e-6 * (1.0 + abs(zeta[j]))
        e = np.zeros(spec.m)
        e[j] = h
        hp = _H_and_u(zeta + e, eps, spec, tensors, params, form)[0]
        hm = _H_and_u(zeta - e, eps, spec, tensors, params, form)[0]
        J[:, j] = (hp - hm) / (2 * h)
    return J


def sup_norm_on_torus(u: FourierMap, n_grid: int | None = None) -> float:
    """``max_psi |u(psi)|``: grid search followed by local refinement."""
    d = u.d
    if not len(u):
        return 0.0
    n = n_grid or (256 if d == 1 else 64 if d == 2 else 16)
    axes = [np.linspace(0.0, 2 * np.pi, n, endpoint=False)] * d
    psi = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    vals = np.linalg.norm(u.evaluate(psi).real, axis=-1)
    best = float(np.max(vals))
    for start in psi[np.argsort(vals)[-3:]]:
        res = optimize.minimize(lambda p: -np.linalg.norm(u.evaluate(p).real), start,
                                method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-16})
        best = max(best, float(-res.fun))
    return best


def solve_zeta(eps, spec: SystemSpec, tensors: TaylorTensors, guess=None, tol: float = 1e-10,
               max_iter: int = 50, series_params: SeriesParams | None = None,
               compute_sup: bool = True) -> BifurcationSolveRecord:
    """Newton iteration on ``H(., eps)`` from ``guess`` (default 0).

    Steps are halved up to 20 times until ``|H|`` decreases.

    Raises
    ------
    NonConvergence
        if ``|H| <= tol`` is not reached in ``max_iter`` iterations, the
        damped step cannot decrease ``|H|``, or the range series at the
        final ``zeta`` is flagged divergent.
    """
    params = SeriesParams() if series_params is None else series_params
    form = build_form(spec, tensors)
    zeta = np.zeros(spec.m) if guess is None else np.asarray(guess, dtype=float).reshape(spec.m).copy()
    H, u, diag = _H_and_u(zeta, eps, spec, tensors, params, form)
    norm = float(np.linalg.norm(H))
    iters = 0
    while norm > tol:
        if iters >= max_iter:
            raise NonConvergence(f"bifurcation Newton: |H| = {norm:.3e} after {max_iter} iterations")
        iters += 1
        J = jacobian_H(zeta, eps, spec, tensors, params, form)
        try:
            step = np.linalg.solve(J, -H)
        except np.linalg.LinAlgError:
            raise NonConvergence("singular bifurcation Jacobian") from None
        t = 1.0
        for _ in range(21):
            trial = zeta + t * step
            Ht, ut, dt = _H_and_u(trial, eps, spec, tensors, params, form)
            nt = float(np.linalg.norm(Ht))
            if nt < norm:
                break
            t *= 0.5
        else:
            raise NonConvergence(f"bifurcation Newton: no decrease from |H| = {norm:.3e}")
        zeta, H, u, diag, norm = trial, Ht, ut, dt, nt
    if diag is not None and NON_CONVERGENT in diag.flags:
        raise NonConvergence(f"range series diverges at eps = {eps:g} (order ratio {diag.ratio:.3g})")
    sup = sup_norm_on_torus(u) if compute_sup else float("nan")
    return BifurcationSolveRecord(epsilon=float(eps), zeta=zeta, H_residual=norm, newton_iters=iters,
                                  u_sup_norm=sup, u=u, diagnostics=diag)


def sweep_epsilon(eps_list, spec: SystemSpec, tensors: TaylorTensors, tol: float = 1e-10,
                  series_params: SeriesParams | None = None, guess=None, warm_start: bool = True,
                  max_iter: int = 50) -> list[BifurcationSolveRecord]:
    """Solve at each ``eps`` in turn, seeding Newton with the previous ``zeta``.

    A failed entry is recorded (``converged=False``) and the sweep goes on.
    """
    records = []
    seed = None if guess is None else np.asarray(guess, dtype=float)
    for eps in eps_list:
        try:
            rec = solve_zeta(eps, spec, tensors, guess=seed, tol=tol, max_iter=max_iter,
                             series_params=series_params)
        except NonConvergence as exc:
            rec = BifurcationSolveRecord(epsilon=float(eps), zeta=np.full(spec.m, np.nan),
                                         H_residual=float("nan"), newton_iters=max_iter,
                                         u_sup_norm=float("nan"), converged=False, message=str(exc))
        records.append(rec)
        if warm_start and rec.converged:
            seed = rec.zeta
    return records
