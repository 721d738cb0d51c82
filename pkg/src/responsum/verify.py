"""Independent checks of a computed response solution.

* :func:`ode_residual` substitutes ``x = c + zeta + u`` into the equation of
  motion using the original (unshifted) polynomials and exact Fourier
  products, without going through the Taylor tensors.
* :func:`integrate_reference` integrates the equation in time with an
  L-stable implicit Runge-Kutta method, so the attractor can be compared
  with the Fourier solution (:func:`attractor_compare`).
* :func:`decay_report` summarises decay of the coefficients and the size
  constants that enter the a priori bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.signal import get_window

from .errors import InsufficientData, StepFailure
from .fourier import FourierMap, convolve_boxes, mode_grid
from .model import PolyField, SystemSpec, TaylorTensors, gradient
from .propagator import SpectralData, small_divisor_scan, spectral_data
from .series import OrderSeries, evaluate, full_field, sum_series

# ---------------------------------------------------------------------------
# Fourier-space residual


@dataclass
class ResidualReport:
    per_mode: FourierMap
    sup_norm: float
    l2_norm: float
    dominant_mode: tuple

    @property
    def zero_mode(self) -> np.ndarray:
        return self.per_mode.zero_mode


def _polys_on_field(terms: dict, x: FourierMap, coef_radius: int) -> FourierMap:
    """``sum_e coef_e x^e`` where ``coef_e`` is a vector trigonometric polynomial.

    ``terms`` maps an exponent to a box ``(m,) + (2 coef_radius + 1,)*d``.
    Products are exact (the radius grows with the degree).
    """
    m, d = x.m, x.d
    deg = max((sum(e) for e in terms), default=0)
    R = coef_radius + deg * x.radius
    out = np.zeros((m,) + (2 * R + 1,) * d, dtype=complex)
    cache = {(0,) * x.m: (np.ones((1,) * d, dtype=complex), 0)}

    def power(e):
        if e not in cache:
            j = next(i for i, a in enumerate(e) if a)
            prev = tuple(a - (i == j) for i, a in enumerate(e))
            q, r = power(prev)
            cache[e] = (convolve_boxes(x.data[j], x.radius, q, r), r + x.radius)
        return cache[e]

    for e, box in terms.items():
        q, r = power(e)
        for i in range(m):
            if np.any(box[i]):
                out[i] += convolve_boxes(box[i], coef_radius, q, r, R)
    return FourierMap(m, d, R, out)


def _force_terms(spec: SystemSpec):
    """Exponent -> box of the Fourier coefficients of ``g`` (or ``h``), and radius."""
    m, d = spec.m, spec.d
    if spec.is_forced:
        S = spec.potential.support_radius
        table = spec.potential.modes
    else:
        S = 0
        table = {(0,) * d: spec.potential}
    terms: dict = {}
    for nu, poly in table.items():
        pos = tuple(n + S for n in nu)
        for i, gi in enumerate(gradient(poly)):
            for e, cf in gi.terms.items():
                box = terms.setdefault(e, np.zeros((m,) + (2 * S + 1,) * d, dtype=complex))
                box[(i,) + pos] += cf
    return terms, S


def ode_residual(u: FourierMap, zeta, c, eps, spec: SystemSpec, tensors: TaylorTensors | None = None) -> ResidualReport:
    """Fourier coefficients of ``eps M x'' + Gamma x' + eps F(x, psi)`` at ``x = c + zeta + u``.

    ``F = g - f`` (autonomous) or ``h`` (forced). For ``nu != 0`` this is the
    range-equation defect ``D u_nu + eps [N]_nu``; the zero mode equals
    ``eps H(zeta, eps)``. ``tensors`` is accepted for interface symmetry and
    not used.
    """
    x = full_field(u, np.asarray(zeta, dtype=float) + np.asarray(c, dtype=float))
    terms, S = _force_terms(spec)
    gx = _polys_on_field(terms, x, S)
    R = gx.radius
    xr = x.truncate(R)
    s = mode_grid(spec.d, R) @ spec.omega
    lin = (-eps * s[..., None, None] ** 2 * spec.mass + 1j * s[..., None, None] * spec.damping)
    xv = np.moveaxis(xr.data, 0, -1)[..., None]
    lin_part = np.moveaxis((lin @ xv)[..., 0], -1, 0)
    res = lin_part + eps * gx.data
    if not spec.is_forced:
        fmap = FourierMap.from_dict(spec.m, spec.d, spec.forcing.modes, radius=R)
        res = res - eps * fmap.data
    per = FourierMap(spec.m, spec.d, R, res)
    return ResidualReport(per_mode=per, sup_norm=per.sup_norm(), l2_norm=per.l2_norm(),
                          dominant_mode=per.dominant_mode())


# ---------------------------------------------------------------------------
# time integration


class _ForceModel:
    """Fast real evaluation of ``F(x, psi)`` (right-hand side force) and its Jacobian."""

    def __init__(self, spec: SystemSpec):
        self.spec = spec
        m = spec.m
        if spec.is_forced:
            table = spec.potential.modes
        else:
            table = {(0,) * spec.d: spec.potential}
        self.modes = np.array(list(table), dtype=float).reshape(len(table), spec.d)
        polys, hess = [], []
        for poly in table.values():
            g = gradient(poly)
            polys.extend(g)
            hess.extend(q for gi in g for q in gradient(gi))
        self.grad = PolyField(polys)
        self.hess = PolyField(hess)
        self.nmodes = len(table)
        fm = spec.forcing.modes
        self.fmodes = np.array(list(fm), dtype=float).reshape(len(fm), spec.d)
        self.fcoef = np.array(list(fm.values()), dtype=complex).reshape(len(fm), m)

    def _phases(self, psi):
        return np.exp(1j * (self.modes @ psi))

    def force(self, x, psi):
        """``f(psi) - g(x)`` or ``-h(x, psi)``."""
        m = self.spec.m
        g = self.grad(x).reshape(self.nmodes, m)
        out = -np.real(self._phases(psi) @ g) if self.spec.is_forced else -np.real(g[0])
        if len(self.fmodes):
            out = out + np.real(np.exp(1j * (self.fmodes @ psi)) @ self.fcoef)
        return out

    def dforce(self, x, psi):
        m = self.spec.m
        h = self.hess(x).reshape(self.nmodes, m, m)
        if self.spec.is_forced:
            return -np.real(np.tensordot(self._phases(psi), h, axes=1))
        return -np.real(h[0])

    def potential_energy(self, x):
        if self.spec.is_forced:
            raise ValueError("energy is defined for the autonomous kind only")
        return float(np.real(self.spec.potential(np.asarray(x, dtype=float))))


# L-stable, stiffly accurate SDIRK of order 4 with an embedded order-3 solution
_G = 0.25
_A = np.array([
    [1 / 4, 0, 0, 0, 0],
    [1 / 2, 1 / 4, 0, 0, 0],
    [17 / 50, -1 / 25, 1 / 4, 0, 0],
    [371 / 1360, -137 / 2720, 15 / 544, 1 / 4, 0],
    [25 / 24, -49 / 48, 125 / 16, -85 / 12, 1 / 4],
])
_C = _A.sum(axis=1)
_B = _A[-1]
_BHAT = np.array([59 / 48, -17 / 96, 225 / 32, -85 / 12, 0.0])
_E = _B - _BHAT


@dataclass
class Trajectory:
    """Accepted steps of a reference integration."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    steps: int
    rejected: int
    epsilon: float
    omega: np.ndarray = field(repr=False, default=None)

    def resample(self, times) -> np.ndarray:
        """Cubic Hermite interpolation of ``x`` (using ``v`` as the slope)."""
        spline = CubicHermiteSpline(self.t, self.x, self.v, axis=0)
        return spline(np.asarray(times, dtype=float))


def integrate_reference(eps, spec: SystemSpec, x0, v0, t_end: float, step_tol: float = 1e-6,
                        t0: float = 0.0, h0: float | None = None, h_min: float = 1e-14,
                        max_steps: int = 10_000_000) -> Trajectory:
    """Integrate ``eps M x'' + Gamma x' = eps F(x, omega t)`` from ``t0`` to ``t_end``.

    First-order form ``y = (x, v)``; five-stage SDIRK (order 4, L-stable,
    embedded order 3) with simplified Newton inner iterations and
    mixed absolute/relative error control at level ``step_tol``.

    Raises
    ------
    StepFailure
        if a step is rejected at the minimum step size.
    """
    m = spec.m
    model = _ForceModel(spec)
    Minv = np.linalg.inv(spec.mass)
    MinvG = Minv @ spec.damping / eps
    omega = spec.omega

    def rhs(t, y):
        x, v = y[:m], y[m:]
        return np.concatenate([v, Minv @ model.force(x, omega * t) - MinvG @ v])

    def jac(t, y):
        J = np.zeros((2 * m, 2 * m))
        J[:m, m:] = np.eye(m)
        J[m:, :m] = Minv @ model.dforce(y[:m], omega * t)
        J[m:, m:] = -MinvG
        return J

    y = np.concatenate([np.asarray(x0, float).reshape(m), np.asarray(v0, float).reshape(m)])
    t = float(t0)
    h = min(1e-3 * eps, t_end - t0) if h0 is None else h0
    atol = rtol = step_tol
    ts, ys = [t], [y.copy()]
    steps = rejected = 0
    eye = np.eye(2 * m)
    fn = rhs(t, y)
    while t < t_end - 1e-14 * max(1.0, abs(t_end)):
        if steps >= max_steps:
            raise StepFailure(f"step budget {max_steps} exhausted at t = {t:g}")
        h = min(h, t_end - t)
        J = jac(t, y)
        Winv = np.linalg.inv(eye - _G * h * J)
        scale = atol + rtol * np.abs(y)
        K = np.zeros((5, 2 * m))
        ok = True
        for i in range(5):
            base = y + h * (_A[i, :i] @ K[:i])
            ti = t + _C[i] * h
            Y = base + _G * h * (K[i - 1] if i else fn)
            for it in range(10):
                delta = Winv @ (base + _G * h * rhs(ti, Y) - Y)
                Y = Y + delta
                if np.sqrt(np.mean((delta / scale) ** 2)) < 1e-3:
                    break
            else:
                ok = False
                break
            K[i] = (Y - base) / (_G * h)
        if ok:
            y_new = y + h * (_B @ K)
            est = Winv @ (h * (_E @ K))
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.sqrt(np.mean((est / sc) ** 2)))
        else:
            err = np.inf
        if err <= 1.0:
            t += h
            y = y_new
            fn = K[-1]
            steps += 1
            ts.append(t)
            ys.append(y.copy())
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.25))
            h *= fac
        else:
            rejected += 1
            if h <= h_min:
                raise StepFailure(f"step rejected at minimum step size {h:g} (t = {t:g})")
            h = max(h_min, h * (0.25 if not ok else max(0.2, 0.9 * err ** -0.25)))
    Y = np.array(ys)
    return Trajectory(t=np.array(ts), x=Y[:, :m], v=Y[:, m:], steps=steps, rejected=rejected,
                      epsilon=float(eps), omega=omega)


def transient_time(eps, spec: SystemSpec, A, factor: float = 20.0) -> float:
    """``factor / (eps b_1 / kappa_m^2)``: time for the slowest mode to settle."""
    sd = spectral_data(spec.damping, A, spec.mass, alpha=1.0)
    return float(factor / (eps * sd.b[0] / sd.kappa[-1] ** 2))


def solution_state(u: FourierMap, zeta, c, omega, t: float = 0.0):
    """Position and velocity of ``c + zeta + u(omega t)`` at time ``t``."""
    omega = np.asarray(omega, dtype=float)
    psi = omega * t
    x = np.asarray(c, dtype=float) + np.asarray(zeta, dtype=float) + u.evaluate(psi).real
    v = np.zeros(u.m)
    for nu, coef in u.items():
        rate = float(np.dot(omega, nu))
        v += (1j * rate * coef * np.exp(1j * np.dot(nu, psi))).real
    return x, v


def attractor_compare(trajectory: Trajectory, u: FourierMap, zeta, c, omega, transient_fraction: float = 0.75) -> float:
    """Largest ``|x(t) - (c + zeta + u(omega t))|`` over the retained samples.

    The first ``transient_fraction`` of the time span is discarded.
    """
    t = trajectory.t
    cut = t[0] + transient_fraction * (t[-1] - t[0])
    keep = t >= cut
    psi = np.outer(t[keep], np.asarray(omega, dtype=float))
    ref = evaluate(u, zeta, c, psi)
    return float(np.max(np.linalg.norm(trajectory.x[keep] - ref, axis=1)))


def energy(trajectory: Trajectory, spec: SystemSpec) -> np.ndarray:
    """``(eps/2) v.M v + eps V(x)`` along the trajectory (autonomous kind)."""
    eps = trajectory.epsilon
    kin = 0.5 * np.einsum("ni,ij,nj->n", trajectory.v, spec.mass, trajectory.v)
    pot = np.real(spec.potential(trajectory.x))
    return eps * (kin + pot)


def frequency_content(trajectory: Trajectory, u: FourierMap, omega, transient_fraction: float = 0.75,
                      n_samples: int = 2 ** 15, guard: int = 8, min_amp: float = 1e-12) -> dict:
    """Spectrum of the settled trajectory against the frequencies of ``u``.

    The retained window is resampled uniformly, multiplied by a
    Blackman-Harris window and transformed. Bins within ``guard`` of any
    ``|omega . nu|`` with ``|u_nu| > min_amp`` (or of zero frequency) are
    attributed to the solution; the largest remaining peak is reported
    relative to the main peak.
    """
    t = trajectory.t
    t0 = t[0] + transient_fraction * (t[-1] - t[0])
    times = np.linspace(t0, t[-1], n_samples, endpoint=False)
    x = trajectory.resample(times)
    x = x - x.mean(axis=0)
    win = get_window("blackmanharris", n_samples)
    spec = np.abs(np.fft.rfft(x * win[:, None], axis=0))
    spec = np.linalg.norm(spec, axis=1)
    dt = times[1] - times[0]
    freqs = 2 * np.pi * np.fft.rfftfreq(n_samples, dt)
    df = freqs[1]
    allowed = np.zeros(len(freqs), dtype=bool)
    allowed |= freqs <= guard * df
    expected = sorted({abs(float(np.dot(omega, nu))) for nu, val in u.items() if np.linalg.norm(val) > min_amp})
    for f in expected:
        allowed |= np.abs(freqs - f) <= guard * df
    main = float(np.max(spec))
    other = float(np.max(spec[~allowed], initial=0.0))
    return {"main_peak": main, "max_spurious": other, "ratio": other / main if main else 0.0,
            "frequencies": expected}


# ---------------------------------------------------------------------------
# decay and bound constants


@dataclass
class DecayReport:
    xi_fit: float
    per_order_norms: list
    ratio: float
    Phi: float
    Delta: float
    C0_diag: float
    support_radius: list
    order_rate: float
    rho: float
    xi: float

    def to_dict(self) -> dict:
        return {
            "xi_fit": self.xi_fit, "per_order_norms": list(self.per_order_norms), "ratio": self.ratio,
            "Phi": self.Phi, "Delta": self.Delta, "C0_diag": self.C0_diag,
            "support_radius": list(self.support_radius), "order_rate": self.order_rate,
            "rho": self.rho, "xi": self.xi,
        }


def default_xi(spec: SystemSpec) -> float:
    return math.log(10.0) / max(1, spec.support_radius)


def size_constants(spec: SystemSpec, tensors: TaylorTensors, rho: float = 1.0, xi: float | None = None):
    """``Phi = sum |f_nu| e^(xi|nu|)`` and the smallest admissible ``Delta``.

    ``Delta`` bounds every tensor entry as ``Delta rho^-p e^(-xi|nu|)``
    (orders ``p >= 1``; the forced kind also includes ``p = 0``).
    """
    xi = default_xi(spec) if xi is None else xi
    zero = (0,) * spec.d
    if spec.is_forced:
        drive = {nu: t for (p, nu), t in tensors.tensors.items() if p == 0 and nu != zero}
    else:
        drive = {nu: f for nu, f in spec.forcing.modes.items()}
    Phi = float(sum(np.linalg.norm(v) * math.exp(xi * sum(map(abs, nu))) for nu, v in drive.items()))
    Delta = 0.0
    for (p, nu), T in tensors.tensors.items():
        if p == 0 and not spec.is_forced:
            continue
        Delta = max(Delta, float(np.max(np.abs(T))) * rho ** p * math.exp(xi * sum(map(abs, nu))))
    return Phi, Delta


def c0_constant(spec, tensors, sd: SpectralData, rho: float = 1.0, xi: float | None = None) -> float:
    """``m^2/rho max{Phi, 1, 2 Delta/(kappa_1^2 b_1)}``; the forced kind drops ``Phi``."""
    Phi, Delta = size_constants(spec, tensors, rho, xi)
    cands = [1.0, 2.0 * Delta / (sd.kappa[0] ** 2 * sd.b[0])]
    if not spec.is_forced:
        cands.append(Phi)
    return spec.m ** 2 / rho * max(cands)


def chain_bound_constants(eps, spec, tensors, N: int, xi: float | None = None, rho: float = 1.0,
                          sd: SpectralData | None = None) -> dict:
    """Constants of the chain-value bound: ``C0``, ``delta``, ``r_N`` and ``beta``."""
    xi = default_xi(spec) if xi is None else xi
    sd = spectral_data(spec.damping, tensors.A, spec.mass) if sd is None else sd
    scan = small_divisor_scan(spec.omega, N, xi, sd.alpha)
    C0 = c0_constant(spec, tensors, sd, rho, xi)
    beta = max(scan.deltaN, 2 * abs(eps * sd.b[0]) / scan.rN)
    return {"C0": C0, "delta": scan.deltaN, "rN": scan.rN, "beta": beta, "xi": xi, "rho": rho}


def _slope(xs, ys):
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    if len(xs) < 2:
        return float("nan")
    return float(np.polyfit(xs, ys, 1)[0])


def decay_report(orders: OrderSeries, spec: SystemSpec, rho: float = 1.0, xi: float | None = None,
                 tensors: TaylorTensors | None = None, sd: SpectralData | None = None) -> DecayReport:
    """Empirical decay rates of the coefficients and the bound constants.

    ``xi_fit`` is minus the slope of ``log max_{|nu|=n} |u_nu|`` against
    ``n`` for shells beyond the driving support; ``order_rate`` is the slope
    of ``log a_k`` against ``k`` over nonzero orders.

    Raises
    ------
    InsufficientData
        with fewer than two nonzero orders.
    """
    u, diag = sum_series(orders)
    nz = [(k, a) for k, a in enumerate(diag.norms, start=1) if a > 0]
    if len(nz) < 2:
        raise InsufficientData("decay needs at least two nonzero orders")
    xi = default_xi(spec) if xi is None else xi
    shells = u.shell_maxima()
    F = max(1, spec.support_radius)
    pts = [(n, math.log(a)) for n, a in enumerate(shells) if n >= F and a > 1e-300]
    xi_fit = -_slope(*zip(*pts)) if len(pts) >= 2 else float("nan")
    order_rate = _slope([k for k, _ in nz], [math.log(a) for _, a in nz])
    Phi = Delta = C0 = float("nan")
    if tensors is not None:
        Phi, Delta = size_constants(spec, tensors, rho, xi)
        sd = spectral_data(spec.damping, tensors.A, spec.mass) if sd is None else sd
        C0 = c0_constant(spec, tensors, sd, rho, xi)
    support = [o.without_zero_mode().support_radius() for o in orders.orders]
    return DecayReport(xi_fit=xi_fit, per_order_norms=list(diag.norms), ratio=diag.ratio, Phi=Phi,
                       Delta=Delta, C0_diag=C0, support_radius=support, order_rate=order_rate,
                       rho=rho, xi=xi)
