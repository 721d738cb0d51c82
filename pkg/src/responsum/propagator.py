"""Frequency-domain matrices ``D(eps, s)``, their norm bounds, small divisors.

``D(eps, s) = -eps s^2 M + i s Gamma + eps A`` is the symbol of the linear
part of the equation at frequency ``s = omega . nu``. With ``Gamma = K^2``,
``kappa`` the eigenvalues of ``K`` and ``b`` those of ``K^-1 A K^-1``, the
inverse satisfies for ``0 < eps < alpha / b_1``::

    ||D^-1|| <= kappa_1^-2 min(2 / (b_1 eps), max(1 / alpha, 1 / |s|))

where ``alpha`` is any radius such that for ``|s| <= alpha`` the eigenvalues
of ``eps K^-1 (A - s^2 M) K^-1`` stay within ``b_1 eps / 2`` of ``b_k eps``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import EpsilonTooLarge, NotPositiveDefinite, SingularMatrix


@dataclass(frozen=True)
class SpectralData:
    """Spectral quantities of ``(Gamma, A, M)`` entering the propagator bound."""

    K: np.ndarray
    kappa: np.ndarray
    b: np.ndarray
    alpha: float
    damping: np.ndarray
    A: np.ndarray
    mass: np.ndarray

    @property
    def eps1(self) -> float:
        """Upper end ``alpha / b_1`` of the range where the bound is valid."""
        return self.alpha / self.b[0]

    @property
    def slow_rate(self) -> float:
        """Decay rate ``eps b_1 / kappa_m^2`` per unit ``eps`` of the slowest mode."""
        return float(self.b[0] / self.kappa[-1] ** 2)


def _spd_sqrt(mat: np.ndarray, name: str):
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotPositiveDefinite(f"{name} is not square")
    sym = 0.5 * (mat + mat.T)
    if np.max(np.abs(mat - sym)) > 1e-12 * max(np.max(np.abs(mat)), 1e-300):
        raise NotPositiveDefinite(f"{name} is not symmetric")
    w, V = np.linalg.eigh(sym)
    if w[0] <= 0:
        raise NotPositiveDefinite(f"{name} has non-positive eigenvalue {w[0]:.3e}")
    K = (V * np.sqrt(w)) @ V.T
    Kinv = (V / np.sqrt(w)) @ V.T
    return 0.5 * (K + K.T), 0.5 * (Kinv + Kinv.T), np.sqrt(w)


def spectral_data(damping, A, mass=None, alpha: float | None = None) -> SpectralData:
    """Principal square root of ``Gamma`` and the eigenvalues ``kappa``, ``b``.

    ``alpha`` is estimated with :func:`estimate_alpha` unless given.

    Raises
    ------
    NotPositiveDefinite
        if ``Gamma``, ``A`` or ``M`` is not symmetric positive definite.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    mass = np.eye(m) if mass is None else np.asarray(mass, dtype=float)
    K, Kinv, kappa = _spd_sqrt(damping, "damping")
    _spd_sqrt(A, "A")
    _spd_sqrt(mass, "mass")
    B = Kinv @ A @ Kinv
    b = np.linalg.eigvalsh(0.5 * (B + B.T))
    if alpha is None:
        alpha = estimate_alpha(damping, A, mass)
    return SpectralData(K=K, kappa=np.sort(kappa), b=b, alpha=float(alpha),
                        damping=np.asarray(damping, dtype=float), A=A, mass=mass)


def _alpha_condition(B, P, b, s) -> bool:
    # eigenvalues of S / eps = B - s^2 P against b, both ascending
    lam = np.linalg.eigvalsh(B - s * s * P)
    return bool(np.all(np.abs(lam - b) <= 0.5 * b[0]))


def estimate_alpha(damping, A, mass=None, eps_grid=None, s_grid=None, safety: float = 0.9) -> float:
    """Numerical radius ``alpha`` for the propagator bound.

    The eigenvalue condition is homogeneous in ``eps`` (``S`` is ``eps``
    times an ``eps``-free matrix), so ``eps_grid`` is accepted but unused.
    The scan walks ``s_grid`` (default 2001 points up to a radius where the
    condition is guaranteed to fail), bisects the first failure and returns ``safety``
    times the result. If even the first grid point fails, the Weyl estimate
    ``sqrt(b_1 / (2 ||K^-1 M K^-1||))`` is returned instead.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    mass = np.eye(m) if mass is None else np.asarray(mass, dtype=float)
    _, Kinv, _ = _spd_sqrt(damping, "damping")
    B = Kinv @ A @ Kinv
    B = 0.5 * (B + B.T)
    P = Kinv @ mass @ Kinv
    P = 0.5 * (P + P.T)
    b = np.linalg.eigvalsh(B)
    pev = np.linalg.eigvalsh(P)
    weyl = float(np.sqrt(b[0] / (2.0 * pev[-1])))
    s_max = 2.0 * np.sqrt(b[0] / pev[0])
    grid = np.linspace(0.0, s_max, 2001) if s_grid is None else np.sort(np.abs(np.asarray(s_grid, float)))
    last_ok = None
    for s in grid:
        if _alpha_condition(B, P, b, s):
            last_ok = s
            continue
        if last_ok is None:
            return weyl
        lo, hi = last_ok, s
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if _alpha_condition(B, P, b, mid):
                lo = mid
            else:
                hi = mid
        return safety * lo
    return safety * grid[-1] if last_ok else weyl


def assemble_D(eps: float, s: float, damping, A, mass=None) -> np.ndarray:
    """``-eps s^2 M + i s Gamma + eps A`` (``M`` defaults to the identity)."""
    A = np.asarray(A, dtype=float)
    mass = np.eye(A.shape[0]) if mass is None else np.asarray(mass, dtype=float)
    return -eps * s * s * mass + 1j * s * np.asarray(damping, dtype=float) + eps * A


def assemble_D_batch(eps: float, s, damping, A, mass=None) -> np.ndarray:
    """Stack of ``D(eps, s_j)`` for an array of frequencies, shape ``(n, m, m)``."""
    s = np.asarray(s, dtype=float).reshape(-1, 1, 1)
    A = np.asarray(A, dtype=float)
    mass = np.eye(A.shape[0]) if mass is None else np.asarray(mass, dtype=float)
    return -eps * s * s * mass + 1j * s * np.asarray(damping, dtype=float) + eps * A


def apply_D_inverse(D, v) -> np.ndarray:
    """Solve ``D u = v`` directly.

    Raises
    ------
    SingularMatrix
        if ``D`` is singular or the result is not finite.
    """
    D = np.atleast_2d(np.asarray(D, dtype=complex))
    v = np.asarray(v, dtype=complex)
    try:
        u = np.linalg.solve(D, v)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(f"D is singular: {exc}") from None
    if not np.all(np.isfinite(u)):
        raise SingularMatrix("D is numerically singular")
    return u


def norm_bound(eps: float, s: float, sd: SpectralData) -> float:
    """Right-hand side of the propagator bound.

    Raises
    ------
    EpsilonTooLarge
        if ``eps >= alpha / b_1``.
    """
    if not 0 < eps < sd.eps1:
        raise EpsilonTooLarge(f"eps = {eps:g} outside (0, alpha/b_1 = {sd.eps1:g})")
    inv_s = np.inf if s == 0 else 1.0 / abs(s)
    return float(min(2.0 / (sd.b[0] * eps), max(1.0 / sd.alpha, inv_s)) / sd.kappa[0] ** 2)


def inverse_norm(eps: float, s: float, sd: SpectralData) -> float:
    """Spectral norm of ``D(eps, s)^-1``."""
    D = assemble_D(eps, s, sd.damping, sd.A, sd.mass)
    smin = np.linalg.svd(D, compute_uv=False)[-1]
    return float(np.inf if smin == 0 else 1.0 / smin)


@dataclass(frozen=True)
class SmallDivisorReport:
    N: int
    sN: float
    argmin: tuple
    rN: float
    deltaN: float

    def to_dict(self):
        return {"N": self.N, "sN": self.sN, "argmin": list(self.argmin), "rN": self.rN, "deltaN": self.deltaN}


def small_divisor_scan(omega, N: int, xi: float, alpha: float | None = None) -> SmallDivisorReport:
    """Exhaustive ``s_N = min{|omega.nu| : 0 < |nu|_1 <= N}``.

    Only one of each pair ``+-nu`` is visited (first nonzero component
    positive); exact ties are broken by the lexicographically smallest mode.
    ``r_N = min(s_N, alpha)`` (``alpha`` defaults to ``+inf``) and
    ``delta_N = exp(-xi N / 4)``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    omega = np.asarray(omega, dtype=float).reshape(-1)
    best, arg = np.inf, None
    for nu in itertools.product(range(-N, N + 1), repeat=len(omega)):
        first = next((n for n in nu if n), 0)
        if first <= 0 or sum(abs(n) for n in nu) > N:
            continue
        val = abs(float(np.dot(omega, nu)))
        if val < best:
            best, arg = val, nu
    alpha = np.inf if alpha is None else alpha
    return SmallDivisorReport(N=int(N), sN=best, argmin=tuple(int(n) for n in arg),
                              rN=float(min(best, alpha)), deltaN=float(np.exp(-xi * N / 4.0)))


def bound_samples(sd: SpectralData, n_eps: int = 8, n_s: int = 16, s_max: float = 10.0) -> list[dict]:
    """Deterministic grid comparing ``||D^-1||`` with :func:`norm_bound`."""
    out = []
    for eps in sd.eps1 * np.linspace(0.05, 0.95, n_eps):
        for s in np.linspace(0.0, s_max, n_s):
            out.append({
                "epsilon": float(eps),
                "s": float(s),
                "inverse_norm": inverse_norm(eps, s, sd),
                "bound": norm_bound(eps, s, sd),
            })
    return out
