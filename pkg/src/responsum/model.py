"""Problem instances: polynomial potentials, trigonometric forcings, matrices.

Two kinds of system are supported.

``gradient-autonomous``
    ``eps M x'' + Gamma x' + eps grad V(x) = eps f(omega t)`` with a polynomial
    potential ``V`` and a trigonometric-polynomial forcing ``f``.

``gradient-forced``
    ``eps M x'' + Gamma x' + eps grad_x W(x, omega t) = 0`` where ``W`` is a
    trigonometric polynomial in the angles whose Fourier coefficients are
    polynomials in ``x``.

Multi-indices ``nu`` are tuples of ints; their size is always the l1 norm.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateMinimum,
    HypothesisViolation,
    NonConvergence,
    ValidationError,
)

AUTONOMOUS = "gradient-autonomous"
FORCED = "gradient-forced"
KINDS = (AUTONOMOUS, FORCED)

Mode = tuple  # tuple[int, ...]


def l1(nu) -> int:
    return int(sum(abs(int(n)) for n in nu))


def _clean_coeff(c):
    c = complex(c)
    if c.imag == 0.0:
        return float(c.real)
    return c


class Polynomial:
    """Sparse multivariate polynomial ``sum_e coeff_e * x**e``.

    Parameters
    ----------
    nvars : int
        Number of variables ``m``.
    terms : mapping or iterable, optional
        ``{exponent: coeff}`` or ``[(exponent, coeff), ...]``. Exponents are
        length-``nvars`` tuples of non-negative ints. Repeated exponents in an
        iterable are summed; zero coefficients are dropped.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms=None):
        if nvars < 1:
            raise ValidationError("a polynomial needs at least one variable")
        self.nvars = int(nvars)
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        merged: dict[tuple, complex] = {}
        for exp, coeff in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.nvars or any(e < 0 for e in exp):
                raise ValidationError(f"bad exponent {exp} for {self.nvars} variables")
            if not np.isfinite(complex(coeff)):
                raise ValidationError(f"non-finite coefficient at exponent {exp}")
            merged[exp] = merged.get(exp, 0.0) + complex(coeff)
        self.terms = {e: _clean_coeff(c) for e, c in sorted(merged.items()) if c != 0}

    @classmethod
    def from_terms(cls, nvars, terms):
        """Like the constructor but rejects duplicate exponents."""
        seen = set()
        for exp, _ in terms:
            exp = tuple(int(e) for e in exp)
            if exp in seen:
                raise ValidationError(f"duplicate exponent {exp}")
            seen.add(exp)
        return cls(nvars, terms)

    @classmethod
    def constant(cls, nvars, value=1.0):
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def linear(cls, coeffs):
        """``sum_i coeffs[i] * x_i``."""
        n = len(coeffs)
        return cls(n, {tuple(int(j == i) for j in range(n)): c for i, c in enumerate(coeffs)})

    @classmethod
    def parse(cls, text: str, nvars: int) -> "Polynomial":
        """Read the small notation ``"0.5 x1^2 + x1^2 x2 - 3*x2"``.

        Variables are ``x1 .. xm`` (1-based). Only real coefficients.
        """
        src = text.replace("**", "^").replace("-", " - ").replace("+", " + ")
        # restore exponents in scientific notation, e.g. 1e - 3
        src = re.sub(r"(\d[eE])\s+([+-])\s+(\d)", r"\1\2\3", src)
        tokens = src.replace("*", " ").split()
        terms: list[tuple[tuple, float]] = []
        sign, coeff, exp, seen_factor = 1.0, None, [0] * nvars, False

        def flush():
            if coeff is None and not seen_factor:
                return
            terms.append((tuple(exp), sign * (1.0 if coeff is None else coeff)))

        for tok in tokens:
            if tok in "+-":
                flush()
                sign, coeff, exp, seen_factor = (1.0 if tok == "+" else -1.0), None, [0] * nvars, False
                continue
            m = re.fullmatch(r"x(\d+)(?:\^(\d+))?", tok)
            if m:
                i = int(m.group(1)) - 1
                if not 0 <= i < nvars:
                    raise ValidationError(f"variable {tok!r} out of range for m={nvars}")
                exp[i] += int(m.group(2) or 1)
                seen_factor = True
                continue
            try:
                value = float(tok)
            except ValueError:
                raise ValidationError(f"cannot read polynomial token {tok!r} in {text!r}") from None
            coeff = value if coeff is None else coeff * value
        flush()
        return cls(nvars, terms)

    # ------------------------------------------------------------------ algebra
    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.nvars, other)
        self._check(other)
        return Polynomial(self.nvars, list(self.terms.items()) + list(other.terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            out = []
            for (e1, c1), (e2, c2) in itertools.product(self.terms.items(), other.terms.items()):
                out.append((tuple(a + b for a, b in zip(e1, e2)), c1 * c2))
            return Polynomial(self.nvars, out)
        return Polynomial(self.nvars, {e: c * other for e, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, tuple(self.terms.items())))

    def __repr__(self):
        return f"Polynomial({self.nvars}, {self.terms})"

    def _check(self, other):
        if other.nvars != self.nvars:
            raise ValidationError("polynomials in different numbers of variables")

    def conj(self):
        return Polynomial(self.nvars, {e: np.conj(c) for e, c in self.terms.items()})

    def close_to(self, other, rtol=1e-14) -> bool:
        keys = set(self.terms) | set(other.terms)
        scale = max([abs(c) for c in self.terms.values()] + [abs(c) for c in other.terms.values()] + [0.0])
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= rtol * scale for k in keys)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_real(self) -> bool:
        return all(not isinstance(c, complex) for c in self.terms.values())

    # ----------------------------------------------------------------- calculus
    def diff(self, i: int) -> "Polynomial":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return Polynomial(self.nvars, out)

    def gradient(self) -> list["Polynomial"]:
        return [self.diff(i) for i in range(self.nvars)]

    def shift(self, c) -> "Polynomial":
        """The polynomial ``y -> self(c + y)``, expanded exactly."""
        c = np.asarray(c)
        out = []
        for e, coeff in self.terms.items():
            ranges = [range(k + 1) for k in e]
            for a in itertools.product(*ranges):
                w = coeff
                for j, (ej, aj) in enumerate(zip(e, a)):
                    if ej > aj:
                        w = w * math.comb(ej, aj) * c[j] ** (ej - aj)
                out.append((a, w))
        return Polynomial(self.nvars, out)

    def __call__(self, x):
        x = np.asarray(x)
        total = 0.0
        for e, c in self.terms.items():
            total = total + c * np.prod(x ** np.asarray(e), axis=-1)
        if np.ndim(total) == 0 and np.ndim(x) > 1:
            total = np.full(x.shape[:-1], total)
        return total

    # ---------------------------------------------------------------- transport
    def to_terms(self) -> list[dict]:
        out = []
        for e, c in self.terms.items():
            coeff = [c.real, c.imag] if isinstance(c, complex) else c
            out.append({"exp": list(e), "coeff": coeff})
        return out

    @classmethod
    def from_json(cls, obj, nvars: int) -> "Polynomial":
        if isinstance(obj, str):
            return cls.parse(obj, nvars)
        if isinstance(obj, Mapping):
            obj = obj.get("terms", [])
        terms = []
        for t in obj:
            c = t["coeff"]
            if isinstance(c, (list, tuple)):
                c = complex(c[0], c[1])
            terms.append((t["exp"], c))
        return cls.from_terms(nvars, terms)


class PolyField:
    """Vectorised evaluator for a list of polynomials (a map R^m -> C^n)."""

    def __init__(self, polys: Sequence[Polynomial]):
        self.nvars = polys[0].nvars
        exps = sorted({e for p in polys for e in p.terms})
        self.exponents = np.array(exps, dtype=int).reshape(len(exps), self.nvars)
        index = {e: k for k, e in enumerate(exps)}
        coef = np.zeros((len(polys), len(exps)), dtype=complex)
        for i, p in enumerate(polys):
            for e, c in p.terms.items():
                coef[i, index[e]] = c
        self.real = not np.any(coef.imag)
        self.coef = coef.real if self.real else coef

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if not len(self.exponents):
            return np.zeros(self.coef.shape[:1] + x.shape[:-1])
        mono = np.prod(x[..., None, :] ** self.exponents, axis=-1)
        return mono @ self.coef.T


# ---------------------------------------------------------------------------
# trigonometric data


def _as_mode(nu, d) -> Mode:
    nu = tuple(int(n) for n in np.atleast_1d(nu))
    if len(nu) != d:
        raise ValidationError(f"mode {nu} does not have {d} components")
    return nu


def _neg(nu) -> Mode:
    return tuple(-n for n in nu)


class TrigVectorField:
    """Real vector field ``f(psi) = sum_nu exp(i nu.psi) f_nu`` on the d-torus.

    ``modes`` maps ``nu`` to a complex m-vector and must satisfy
    ``f_{-nu} = conj(f_nu)``. With ``complete=True`` missing partners are
    filled in; inconsistent pairs still raise.
    """

    def __init__(self, m: int, d: int, modes: Mapping, complete: bool = False, rtol: float = 1e-13):
        self.m, self.d = int(m), int(d)
        table: dict[Mode, np.ndarray] = {}
        for nu, c in modes.items():
            nu = _as_mode(nu, self.d)
            c = np.asarray(c, dtype=complex).reshape(-1)
            if c.shape != (self.m,):
                raise ValidationError(f"coefficient at {nu} is not an {self.m}-vector")
            if not np.all(np.isfinite(c)):
                raise ValidationError(f"non-finite coefficient at mode {nu}")
            table[nu] = c
        for nu in list(table):
            partner = _neg(nu)
            if partner not in table:
                if not complete:
                    raise ValidationError(f"mode {partner} missing: the field would not be real")
                table[partner] = np.conj(table[nu])
        for nu, c in table.items():
            scale = max(np.max(np.abs(c)), 1e-300)
            if np.max(np.abs(table[_neg(nu)] - np.conj(c))) > rtol * scale:
                raise ValidationError(f"modes {nu} and {_neg(nu)} are not complex conjugate")
        self.modes = {nu: c for nu, c in sorted(table.items()) if np.any(c != 0)}

    @classmethod
    def zero(cls, m, d):
        return cls(m, d, {})

    def __getitem__(self, nu):
        return self.modes.get(tuple(nu), np.zeros(self.m, dtype=complex))

    @property
    def mean(self) -> np.ndarray:
        return self[(0,) * self.d].real.copy()

    @property
    def support_radius(self) -> int:
        return max((l1(nu) for nu in self.modes), default=0)

    def evaluate(self, psi):
        psi = np.asarray(psi, dtype=float)
        out = np.zeros(psi.shape[:-1] + (self.m,), dtype=complex)
        for nu, c in self.modes.items():
            out = out + np.exp(1j * (psi @ np.asarray(nu, dtype=float)))[..., None] * c
        return out


class TrigPolynomialFamily:
    """``W(x, psi) = sum_nu exp(i nu.psi) W_nu(x)`` with polynomial ``W_nu``.

    Hermitian symmetry ``W_{-nu} = conj(W_nu)`` makes ``W`` real.
    """

    def __init__(self, m: int, d: int, modes: Mapping, complete: bool = False):
        self.m, self.d = int(m), int(d)
        table: dict[Mode, Polynomial] = {}
        for nu, poly in modes.items():
            nu = _as_mode(nu, self.d)
            if poly.nvars != self.m:
                raise ValidationError(f"polynomial at mode {nu} is not in {self.m} variables")
            table[nu] = poly
        for nu in list(table):
            if _neg(nu) not in table:
                if not complete:
                    raise ValidationError(f"mode {_neg(nu)} missing: the potential would not be real")
                table[_neg(nu)] = table[nu].conj()
        for nu, poly in table.items():
            if not table[_neg(nu)].close_to(poly.conj()):
                raise ValidationError(f"polynomials at {nu} and {_neg(nu)} are not conjugate")
        self.modes = {nu: p for nu, p in sorted(table.items()) if not p.is_zero}

    def __getitem__(self, nu):
        return self.modes.get(tuple(nu), Polynomial(self.m))

    @property
    def degree(self) -> int:
        return max((p.degree for p in self.modes.values()), default=0)

    @property
    def support_radius(self) -> int:
        return max((l1(nu) for nu in self.modes), default=0)

    def __call__(self, x, psi):
        psi = np.asarray(psi, dtype=float)
        total = 0.0
        for nu, p in self.modes.items():
            total = total + np.exp(1j * (psi @ np.asarray(nu, dtype=float))) * p(x)
        return np.real(total)


# ---------------------------------------------------------------------------
# the problem instance


def _check_spd(name: str, mat: np.ndarray, m: int) -> None:
    if mat.shape != (m, m):
        raise ValidationError(f"{name} must be {m}x{m}, got {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValidationError(f"{name} has non-finite entries")
    scale = np.max(np.abs(mat))
    if np.max(np.abs(mat - mat.T)) > 1e-14 * scale:
        raise ValidationError(f"{name} not symmetric")
    if np.linalg.eigvalsh(0.5 * (mat + mat.T))[0] <= 0:
        raise ValidationError(f"{name} not positive definite")


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """One quasi-periodically forced dissipative system.

    ``mass`` defaults to the identity. For the autonomous kind ``potential`` is
    a :class:`Polynomial` and ``forcing`` a :class:`TrigVectorField`; for the
    forced kind ``potential`` is a :class:`TrigPolynomialFamily` and
    ``forcing`` must be left empty.

    Rational independence of ``omega`` is not checked (it cannot be decided in
    floating point); use :func:`responsum.propagator.small_divisor_scan` to
    look for near-resonances.
    """

    m: int
    d: int
    omega: np.ndarray
    damping: np.ndarray
    potential: object
    kind: str = AUTONOMOUS
    forcing: TrigVectorField | None = None
    mass: np.ndarray | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        m, d = int(self.m), int(self.d)
        if m < 1 or d < 1:
            raise ValidationError("m and d must be at least 1")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "d", d)
        omega = np.asarray(self.omega, dtype=float).reshape(-1)
        if omega.shape != (d,):
            raise ValidationError(f"omega must have {d} components")
        if np.any(omega == 0) or not np.all(np.isfinite(omega)):
            raise ValidationError("all components of omega must be finite and nonzero")
        object.__setattr__(self, "omega", omega)
        damping = np.asarray(self.damping, dtype=float)
        _check_spd("damping", damping, m)
        object.__setattr__(self, "damping", damping)
        mass = np.eye(m) if self.mass is None else np.asarray(self.mass, dtype=float)
        _check_spd("mass", mass, m)
        object.__setattr__(self, "mass", mass)
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}")
        if self.kind == AUTONOMOUS:
            if not isinstance(self.potential, Polynomial) or self.potential.nvars != m:
                raise ValidationError(f"potential must be a polynomial in {m} variables")
            if not self.potential.is_real:
                raise ValidationError("potential must have real coefficients")
            forcing = self.forcing if self.forcing is not None else TrigVectorField.zero(m, d)
            if (forcing.m, forcing.d) != (m, d):
                raise ValidationError("forcing has the wrong shape")
            object.__setattr__(self, "forcing", forcing)
        else:
            pot = self.potential
            if not isinstance(pot, TrigPolynomialFamily) or (pot.m, pot.d) != (m, d):
                raise ValidationError("potential must be a trigonometric polynomial family")
            if self.forcing is not None and self.forcing.modes:
                raise ValidationError("forced kind takes its forcing from the potential")
            object.__setattr__(self, "forcing", TrigVectorField.zero(m, d))

    @property
    def is_forced(self) -> bool:
        return self.kind == FORCED

    def effective_potential(self) -> Polynomial:
        """``V - <f_0, x>`` (autonomous) or the angular mean ``W_0`` (forced)."""
        if self.is_forced:
            return Polynomial(self.m, {e: float(np.real(c)) for e, c in self.potential[(0,) * self.d].terms.items()})
        return build_U(self.potential, self.forcing.mean)

    @property
    def support_radius(self) -> int:
        """Largest l1 norm among the modes that drive the system."""
        if self.is_forced:
            return self.potential.support_radius
        return self.forcing.support_radius

    @property
    def degree(self) -> int:
        return self.potential.degree

    def force(self, x, psi):
        """Right-hand side ``f(psi) - g(x)`` (or ``-h(x, psi)``), real."""
        x = np.asarray(x, dtype=float)
        if self.is_forced:
            out = 0.0
            psi = np.asarray(psi, dtype=float)
            for nu, p in self.potential.modes.items():
                phase = np.exp(1j * (psi @ np.asarray(nu, dtype=float)))
                out = out + phase * np.array([q(x) for q in p.gradient()])
            return -np.real(out)
        g = np.array([q(x) for q in gradient(self.potential)])
        return np.real(self.forcing.evaluate(psi)) - g


# ---------------------------------------------------------------------------
# operations


def gradient(poly: Polynomial) -> list[Polynomial]:
    """Exact partial derivatives of ``poly``, one polynomial per variable."""
    return poly.gradient()


def build_U(V: Polynomial, f0) -> Polynomial:
    """Effective potential ``U(x) = V(x) - <f0, x>``."""
    f0 = np.asarray(f0, dtype=float).reshape(-1)
    if f0.shape != (V.nvars,):
        raise ValidationError("f0 has the wrong length")
    return V - Polynomial.linear(f0)


def find_minimum(U: Polynomial, guess, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Newton iteration on ``grad U`` from ``guess``.

    Iterates until the gradient is below ``tol`` *and* the Newton step has
    stalled at rounding level, so that a degenerate minimum (linear
    convergence) is driven close enough to expose its vanishing curvature.

    Raises
    ------
    NonConvergence
        if ``max_iter`` iterations do not bring ``|grad U|`` below ``tol``.
    DegenerateMinimum
        if the smallest Hessian eigenvalue is below ``1e-10 * max(1, largest)``
        or the Hessian is not positive definite.
    """
    x = np.array(guess, dtype=float).reshape(-1)
    grad = PolyField(gradient(U))
    hess = PolyField([q for p in gradient(U) for q in gradient(p)])
    m = U.nvars

    def H(y):
        h = np.real(hess(y)).reshape(m, m)
        return 0.5 * (h + h.T)

    gnorm = np.inf
    for _ in range(max_iter):
        g = np.real(grad(x))
        gnorm = np.linalg.norm(g)
        if gnorm == 0.0:
            break
        try:
            step = np.linalg.solve(H(x), g)
        except np.linalg.LinAlgError:
            if gnorm <= tol:
                break
            raise NonConvergence("singular Hessian during minimisation") from None
        # backtrack on the gradient norm
        t = 1.0
        for _ in range(30):
            trial = x - t * step
            if np.linalg.norm(np.real(grad(trial))) < gnorm or t < 1e-6:
                break
            t *= 0.5
        x = x - t * step
        if gnorm <= tol and np.linalg.norm(t * step) <= 1e-14 * (1.0 + np.linalg.norm(x)):
            break
    gnorm = np.linalg.norm(np.real(grad(x)))
    if not gnorm <= tol:
        raise NonConvergence(f"minimisation stopped with |grad U| = {gnorm:.3e} > {tol:.1e}")
    ev = np.linalg.eigvalsh(H(x))
    if ev[0] <= 1e-10 * max(1.0, abs(ev[-1])):
        raise DegenerateMinimum(
            f"critical point {x} is not a strict minimum (Hessian eigenvalues {ev})"
        )
    return x


@dataclass
class TaylorTensors:
    """Taylor tensors of the force at ``center``.

    ``tensors[(p, nu)]`` has shape ``(m,) * (p + 1)`` and components
    ``(1/p!) d^p F_i / dx_{i1} .. dx_{ip}`` where ``F`` is ``g`` (autonomous,
    ``nu`` always the zero mode) or the Fourier coefficient ``h_nu`` of the
    forced kind. Zero tensors are not stored.
    """

    center: np.ndarray
    tensors: dict
    p_max: int
    kind: str
    m: int
    d: int

    @property
    def zero(self) -> Mode:
        return (0,) * self.d

    def get(self, p: int, nu=None) -> np.ndarray:
        nu = self.zero if nu is None else tuple(nu)
        t = self.tensors.get((p, nu))
        return np.zeros((self.m,) * (p + 1)) if t is None else t

    def G(self, p: int) -> np.ndarray:
        return self.get(p)

    def H(self, p: int, nu) -> np.ndarray:
        return self.get(p, nu)

    @property
    def A(self) -> np.ndarray:
        return np.real(self.get(1))

    @property
    def modes(self) -> list[Mode]:
        return sorted({nu for (_, nu) in self.tensors})

    def nonzero(self, p: int, nu=None) -> bool:
        nu = self.zero if nu is None else tuple(nu)
        return (p, nu) in self.tensors

    def evaluate(self, x, psi=None):
        """Reassemble the force from its tensors (exact for polynomials)."""
        y = np.asarray(x, dtype=float) - self.center
        out = np.zeros(self.m, dtype=complex)
        for (p, nu), t in self.tensors.items():
            term = t
            for _ in range(p):
                term = term @ y
            phase = 1.0 if psi is None else np.exp(1j * np.dot(nu, psi))
            out += phase * term
        return out


def _tensor_of(polys: Sequence[Polynomial], c: np.ndarray, p: int) -> np.ndarray:
    m = len(polys)
    t = np.zeros((m,) * (p + 1), dtype=complex)
    for i, poly in enumerate(polys):
        cache: dict[tuple, complex] = {}
        for idx in itertools.product(range(m), repeat=p):
            key = tuple(sorted(idx))
            if key not in cache:
                q = poly
                for j in key:
                    q = q.diff(j)
                cache[key] = complex(q(c)) / math.factorial(p) if not q.is_zero else 0.0
            t[(i,) + idx] = cache[key]
    return t


def taylor_tensors(spec: SystemSpec, c, check: bool = True) -> TaylorTensors:
    """Exact Taylor tensors of the force at ``c`` and the Hypothesis check.

    Raises
    ------
    HypothesisViolation
        when the linear part ``A`` is not symmetric positive definite.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.shape != (spec.m,):
        raise ValidationError(f"center must have {spec.m} components")
    if spec.is_forced:
        fields = {nu: gradient(p) for nu, p in spec.potential.modes.items()}
    else:
        fields = {(0,) * spec.d: gradient(spec.potential)}
    p_max = max(spec.degree - 1, 1)
    tensors = {}
    for nu, polys in fields.items():
        for p in range(p_max + 1):
            t = _tensor_of(polys, c, p)
            if np.any(t != 0):
                tensors[(p, nu)] = t.real.copy() if not np.any(t.imag) else t
    tt = TaylorTensors(center=c, tensors=tensors, p_max=p_max, kind=spec.kind, m=spec.m, d=spec.d)
    if check:
        check_hypothesis(tt.get(1))
    return tt


def check_hypothesis(A) -> None:
    A = np.asarray(A)
    if np.any(np.imag(A)):
        raise HypothesisViolation("linear part is not real")
    A = np.real(A)
    scale = max(np.max(np.abs(A)), 1e-300)
    if np.max(np.abs(A - A.T)) > 1e-12 * scale:
        raise HypothesisViolation("linear part A is not symmetric")
    ev = np.linalg.eigvalsh(A)
    if ev[0] <= 1e-10 * max(1.0, abs(ev[-1])):
        raise HypothesisViolation(f"A is not positive definite (eigenvalues {ev})")


def locate_center(spec: SystemSpec, guess=None, tol: float = 1e-13) -> np.ndarray:
    """Strict local minimum of the effective potential, from ``guess`` (default 0)."""
    guess = np.zeros(spec.m) if guess is None else guess
    return find_minimum(spec.effective_potential(), guess, tol=tol)
