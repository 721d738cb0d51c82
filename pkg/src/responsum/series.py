"""Perturbation series for the range equation in Fourier space.

Write the solution as ``x = c + w`` with ``w = zeta + u`` (``u`` without zero
mode) and the force as ``F(c + w) = A w + N(w)`` where, in monomial form,

    N(w) = drive + sum_alpha coef_alpha w^alpha .

The drive is ``g(c) - f`` (autonomous) or ``h(c, psi)`` (forced); the
monomials are the degree >= 2 Taylor terms together with, in the forced kind,
the oscillating part of the linear term. Coefficients are trigonometric
polynomials, stored as Fourier boxes. The range equation reads
``D(eps, omega.nu) u_nu = -eps [N(w)]_nu`` for ``nu != 0``.

Putting a bookkeeping parameter ``mu`` in front of the right-hand side and
expanding ``u = sum_k mu^k u^(k)`` gives

    D u^(1)_nu = -eps drive_nu,     D u^(k)_nu = -eps [mu^(k-1)] N(w),

with ``u^(1)_0 = zeta`` and ``u^(k)_0 = 0`` for ``k >= 2``. The powers
``w^alpha`` are cached as graded pieces ``[mu^n] w^alpha`` so each new order
costs one convolution per (monomial, lower order) pair.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ComplexLeak, NonConvergence, SingularMatrix
from .fourier import FourierMap, convolve_boxes, crop, l1_mask, mode_grid
from .model import SystemSpec, TaylorTensors

NON_CONVERGENT = "NON_CONVERGENT"


# ---------------------------------------------------------------------------
# monomial form of the nonlinearity


@dataclass
class NonlinearForm:
    """``N(w) = drive + sum_alpha coef[alpha] * w^alpha`` on the torus.

    ``coef[alpha]`` is a box of shape ``(m,) + (2S+1,)*d`` holding the
    Fourier coefficients (radius ``S``) of the monomial's vector coefficient.
    """

    m: int
    d: int
    drive: FourierMap
    coef: dict
    S: int
    A: np.ndarray

    @property
    def max_degree(self) -> int:
        return max((sum(a) for a in self.coef), default=0)


def build_form(spec: SystemSpec, tensors: TaylorTensors) -> NonlinearForm:
    """Collect the tensors into monomial coefficients."""
    m, d = spec.m, spec.d
    zero = (0,) * d
    S = spec.potential.support_radius if spec.is_forced else 0
    F = max(S, spec.forcing.support_radius)
    drive = FourierMap(m, d, F)
    if spec.is_forced:
        for (p, nu), t in tensors.tensors.items():
            if p == 0:
                drive[nu] = drive[nu] + t
    else:
        drive[zero] = tensors.get(0) - spec.forcing[zero]
        for nu, f in spec.forcing.modes.items():
            if nu != zero:
                drive[nu] = -f
    coef: dict[tuple, np.ndarray] = {}
    for (p, nu), t in tensors.tensors.items():
        if p == 0 or (p == 1 and (not spec.is_forced or nu == zero)):
            continue
        pos = (slice(None),) + tuple(n + S for n in nu)
        for idx in itertools.product(range(m), repeat=p):
            alpha = tuple(idx.count(j) for j in range(m))
            box = coef.setdefault(alpha, np.zeros((m,) + (2 * S + 1,) * d, dtype=complex))
            box[pos] += t[(slice(None),) + idx]
    coef = {a: b for a, b in sorted(coef.items()) if np.any(b != 0)}
    return NonlinearForm(m=m, d=d, drive=drive, coef=coef, S=S, A=tensors.A)


def _apply_coef(coef_box, S, scalar_box, R, radius):
    """Vector field ``coef * scalar`` cropped to ``radius``; shape (m, box)."""
    if S == 0:
        # constant coefficient: plain scaling
        return coef_box * crop(scalar_box[None], R, radius)
    return np.stack([convolve_boxes(coef_box[i], S, scalar_box, R, radius) for i in range(coef_box.shape[0])])


def evaluate_form(form: NonlinearForm, w: FourierMap, radius: int | None = None) -> FourierMap:
    """Exact Fourier coefficients of ``N(w)``; cropped to ``radius`` if given."""
    deg = form.max_degree
    R_out = form.S + deg * w.radius if radius is None else radius
    full = max(R_out, form.drive.radius)
    out = crop(form.drive.data, form.drive.radius, full)
    powers: dict[tuple, tuple] = {(0,) * form.m: (_delta(form.d), 0)}

    def power(alpha):
        if alpha not in powers:
            j = next(i for i, a in enumerate(alpha) if a)
            beta = tuple(a - (i == j) for i, a in enumerate(alpha))
            qb, rb = power(beta)
            powers[alpha] = (convolve_boxes(w.data[j], w.radius, qb, rb), rb + w.radius)
        return powers[alpha]

    for alpha, box in form.coef.items():
        q, rq = power(alpha)
        out = out + _apply_coef(box, form.S, q, rq, full)
    res = FourierMap(form.m, form.d, full, out)
    return res if radius is None or radius == full else res.truncate(radius)


def _delta(d):
    return np.ones((1,) * d, dtype=complex)


def bifurcation_value(form: NonlinearForm, w: FourierMap) -> np.ndarray:
    """``A zeta + [N(w)]_0`` (real part) for the full field ``w = zeta + u``."""
    zero = (0,) * form.d
    val = form.A @ w[zero] + evaluate_form(form, w, radius=0)[zero]
    return val


# ---------------------------------------------------------------------------
# linear solves


class PropagatorStack:
    """All ``D(eps, omega.nu)`` for ``|nu|_1 <= radius``, solved in one batch."""

    def __init__(self, eps: float, spec: SystemSpec, A, radius: int):
        self.eps, self.radius, self.m, self.d = float(eps), int(radius), spec.m, spec.d
        grid = mode_grid(spec.d, radius).reshape(-1, spec.d)
        s = grid @ spec.omega
        self.D = (-eps * s[:, None, None] ** 2 * spec.mass + 1j * s[:, None, None] * spec.damping
                  + eps * np.asarray(A, dtype=float))
        self.mask = l1_mask(spec.d, radius).reshape(-1)
        self.mask[grid.shape[0] // 2] = False  # zero mode

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """``D^-1 rhs`` mode by mode for ``nu != 0``; zero mode set to 0."""
        flat = rhs.reshape(self.m, -1).T[..., None]
        try:
            sol = np.linalg.solve(self.D, flat)[..., 0]
        except np.linalg.LinAlgError as exc:
            raise SingularMatrix(f"propagator solve failed: {exc}") from None
        if not np.all(np.isfinite(sol)):
            raise SingularMatrix("propagator solve produced non-finite values")
        sol[~self.mask] = 0
        return sol.T.reshape(rhs.shape)


# ---------------------------------------------------------------------------
# graded series


@dataclass
class OrderSeries:
    """Orders ``u^(k)``, ``k = 1..K``; ``orders[0]`` carries ``zeta`` as its zero mode."""

    orders: list
    zeta: np.ndarray
    epsilon: float
    K_max: int
    N_trunc: int

    def __len__(self):
        return len(self.orders)

    def __getitem__(self, k: int) -> FourierMap:
        """Order ``k`` (1-based)."""
        return self.orders[k - 1]


@dataclass
class RatioDiagnostics:
    norms: list
    ratio: float
    flags: list = field(default_factory=list)


def default_truncation(spec: SystemSpec, K_max: int) -> int:
    """``K_max`` times the largest driving mode: exact up to order ``K_max``."""
    return int(K_max) * max(1, spec.support_radius)


class SeriesEngine:
    """Order-by-order solver with cached graded powers of ``w``."""

    def __init__(self, eps, spec: SystemSpec, tensors: TaylorTensors, zeta, N_trunc: int,
                 form: NonlinearForm | None = None):
        self.eps, self.spec, self.tensors = float(eps), spec, tensors
        self.zeta = np.asarray(zeta, dtype=float).reshape(spec.m)
        self.N = int(N_trunc)
        self.form = build_form(spec, tensors) if form is None else form
        self.stack = PropagatorStack(eps, spec, tensors.A, self.N)
        self.orders: list[FourierMap] = []
        self._q: dict[tuple, np.ndarray] = {}
        self._zero_box = np.zeros((2 * self.N + 1,) * spec.d, dtype=complex)

    # graded powers ---------------------------------------------------------
    def _w(self, j, a):
        if a > len(self.orders):
            raise IndexError(f"order {a} not yet computed")
        return self.orders[a - 1].data[j]

    def _Q(self, alpha, n):
        key = (alpha, n)
        if key in self._q:
            return self._q[key]
        size = sum(alpha)
        if size == 0:
            out = self._zero_box.copy()
            if n == 0:
                out[(self.N,) * self.spec.d] = 1.0
        elif n < size:
            out = self._zero_box
        else:
            j = next(i for i, a in enumerate(alpha) if a)
            beta = tuple(a - (i == j) for i, a in enumerate(alpha))
            out = self._zero_box.copy()
            for a in range(1, n - sum(beta) + 1):
                wj = self._w(j, a)
                qb = self._Q(beta, n - a)
                if not (np.any(wj) and np.any(qb)):
                    continue
                out += convolve_boxes(wj, self.N, qb, self.N, self.N)
        self._q[key] = out
        return out

    # orders ------------------------------------------------------------------
    def first_order(self) -> FourierMap:
        rhs = -self.eps * self.form.drive.truncate(self.N).data
        u1 = FourierMap(self.spec.m, self.spec.d, self.N, self.stack.solve(rhs))
        u1[(0,) * self.spec.d] = self.zeta
        return u1

    def compose(self, k: int) -> FourierMap:
        """``[mu^(k-1)] (N(w) - drive)`` from the stored orders ``1..k-1``."""
        out = np.zeros((self.spec.m,) + self._zero_box.shape, dtype=complex)
        for alpha, box in self.form.coef.items():
            q = self._Q(alpha, k - 1)
            if np.any(q):
                out += _apply_coef(box, self.form.S, q, self.N, self.N)
        return FourierMap(self.spec.m, self.spec.d, self.N, out)

    def next_order(self) -> FourierMap:
        k = len(self.orders) + 1
        if k == 1:
            uk = self.first_order()
        else:
            uk = FourierMap(self.spec.m, self.spec.d, self.N, self.stack.solve(-self.eps * self.compose(k).data))
        self.orders.append(uk)
        return uk

    def run(self, K_max: int) -> OrderSeries:
        while len(self.orders) < K_max:
            self.next_order()
        return OrderSeries(orders=list(self.orders), zeta=self.zeta.copy(), epsilon=self.eps,
                           K_max=int(K_max), N_trunc=self.N)

    @classmethod
    def from_orders(cls, orders: OrderSeries, spec, tensors):
        eng = cls(orders.epsilon, spec, tensors, orders.zeta, orders.N_trunc)
        eng.orders = [o.truncate(orders.N_trunc) for o in orders.orders]
        return eng


# ---------------------------------------------------------------------------
# functional interface


def first_order(eps, spec, tensors, zeta, N_trunc: int | None = None) -> FourierMap:
    """``u^(1)``: propagated drive on ``nu != 0``, ``zeta`` on the zero mode."""
    N = default_truncation(spec, 1) if N_trunc is None else N_trunc
    return SeriesEngine(eps, spec, tensors, zeta, N).first_order()


def compose_nonlinearity(orders: OrderSeries, spec, tensors, k: int | None = None) -> FourierMap:
    """Order ``k - 1`` coefficient of the nonlinearity (default ``k = len + 1``)."""
    k = len(orders) + 1 if k is None else k
    eng = SeriesEngine.from_orders(orders, spec, tensors)
    eng.orders = eng.orders[: k - 1]
    return eng.compose(k)


def next_order(k: int, orders: OrderSeries, eps, spec, tensors) -> FourierMap:
    """``u^(k) = -eps D^-1 [compose]`` on ``nu != 0``, zero mode 0."""
    if k < 2:
        raise ValueError("next_order needs k >= 2; use first_order")
    eng = SeriesEngine.from_orders(orders, spec, tensors)
    eng.eps = float(eps)
    eng.stack = PropagatorStack(eps, spec, tensors.A, eng.N)
    eng.orders = eng.orders[: k - 1]
    return FourierMap(spec.m, spec.d, eng.N, eng.stack.solve(-eng.eps * eng.compose(k).data))


def compute_orders(eps, spec, tensors, zeta, K_max: int = 8, N_trunc: int | None = None) -> OrderSeries:
    N = default_truncation(spec, K_max) if N_trunc is None else N_trunc
    return SeriesEngine(eps, spec, tensors, zeta, N).run(K_max)


def order_norms(orders: OrderSeries) -> list[float]:
    return [o.without_zero_mode().sup_norm() for o in orders.orders]


def sum_series(orders: OrderSeries, mu: float = 1.0):
    """``u = sum_k mu^k u^(k)`` without zero mode, plus ratio diagnostics.

    The ratio is ``a_K / a_K'`` for the last two nonzero orders ``K' < K``
    (0 if fewer than two orders are nonzero); ratio >= 1 sets the
    ``NON_CONVERGENT`` flag.
    """
    first = orders.orders[0]
    total = FourierMap(first.m, first.d, orders.N_trunc)
    for k, uk in enumerate(orders.orders, start=1):
        total = total + uk.truncate(orders.N_trunc) * (mu ** k)
    total = total.without_zero_mode()
    norms = order_norms(orders)
    nz = [a for a in norms if a > 0]
    ratio = nz[-1] / nz[-2] if len(nz) >= 2 else 0.0
    flags = [NON_CONVERGENT] if ratio >= 1 else []
    return total, RatioDiagnostics(norms=norms, ratio=float(ratio), flags=flags)


def picard_solve(eps, spec, tensors, zeta, tol: float = 1e-14, max_iter: int = 200,
                 N_trunc: int | None = None, u0: FourierMap | None = None) -> FourierMap:
    """Fixed-point iteration ``u <- -eps D^-1 [N(zeta + u)]`` on ``nu != 0``.

    Products are formed exactly and truncated to ``N_trunc`` afterwards.
    Stops when the largest coefficient change is ``<= tol``.

    Raises
    ------
    NonConvergence
        after ``max_iter`` iterations or on overflow.
    """
    N = default_truncation(spec, 8) if N_trunc is None else N_trunc
    form = build_form(spec, tensors)
    stack = PropagatorStack(eps, spec, tensors.A, N)
    zeta = np.asarray(zeta, dtype=float).reshape(spec.m)
    zero = (0,) * spec.d
    u = FourierMap(spec.m, spec.d, N) if u0 is None else u0.truncate(N).without_zero_mode()
    for it in range(1, max_iter + 1):
        w = u.copy()
        w[zero] = zeta
        with np.errstate(over="ignore", invalid="ignore"):
            rhs = evaluate_form(form, w, radius=N)
            new = FourierMap(spec.m, spec.d, N, stack.solve(-eps * rhs.data))
        change = (new - u).sup_norm()
        if not np.isfinite(change) or new.sup_norm() > 1e100:
            raise NonConvergence(f"Picard iteration diverged at iteration {it}")
        u = new
        if change <= tol:
            return u
    raise NonConvergence(f"Picard iteration did not reach {tol:g} in {max_iter} iterations (last change {change:.3e})")


def evaluate(u: FourierMap, zeta, c, psi) -> np.ndarray:
    """Real state ``c + zeta + u(psi)``; ``psi`` of shape ``(d,)`` or ``(n, d)``.

    Raises
    ------
    ComplexLeak
        if the imaginary part exceeds 1e-9.
    """
    val = u.without_zero_mode().evaluate(psi)
    leak = float(np.max(np.abs(val.imag), initial=0.0))
    if leak > 1e-9:
        raise ComplexLeak(f"imaginary part {leak:.3e} in evaluated field")
    return np.asarray(c, dtype=float) + np.asarray(zeta, dtype=float) + val.real


def full_field(u: FourierMap, zeta) -> FourierMap:
    """``w = zeta + u`` as one Fourier map."""
    w = u.without_zero_mode()
    w[(0,) * u.d] = np.asarray(zeta, dtype=float)
    return w


def solve_range(eps, spec, tensors, zeta, K_max: int = 8, N_trunc: int | None = None,
                method: str = "series", tol_picard: float = 1e-14, max_iter: int = 200):
    """Range-equation solution ``u`` (no zero mode) and its diagnostics."""
    if method == "series":
        orders = compute_orders(eps, spec, tensors, zeta, K_max, N_trunc)
        u, diag = sum_series(orders)
        return u, diag
    if method == "picard":
        u = picard_solve(eps, spec, tensors, zeta, tol_picard, max_iter,
                         default_truncation(spec, K_max) if N_trunc is None else N_trunc)
        return u, None
    raise ValueError(f"unknown method {method!r}")
