"""Truncated Fourier fields on the d-torus with complex vector coefficients.

A :class:`FourierMap` stores the coefficients ``u_nu`` for ``|nu|_1 <= radius``
in a dense box ``(m,) + (2*radius + 1,) * d``. Entries outside the l1 ball are
kept at zero. The mapping interface (``__getitem__``, :meth:`items`) hides the
box, so callers can treat a map as a sparse ``nu -> vector`` dictionary.

Products of fields are direct (non-FFT) convolutions, so they are exact up to
rounding and independent of any grid size.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy import signal

PRUNE = 1e-300


def l1_mask(d: int, radius: int) -> np.ndarray:
    """Boolean box ``(2r+1,)*d`` selecting ``|nu|_1 <= r``."""
    axis = np.abs(np.arange(-radius, radius + 1))
    total = np.zeros((2 * radius + 1,) * d, dtype=int)
    for j in range(d):
        shape = [1] * d
        shape[j] = -1
        total = total + axis.reshape(shape)
    return total <= radius


def mode_grid(d: int, radius: int) -> np.ndarray:
    """Integer modes of the box, shape ``(2r+1,)*d + (d,)``."""
    axes = [np.arange(-radius, radius + 1)] * d
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def crop(arr: np.ndarray, radius: int, new_radius: int) -> np.ndarray:
    """Resize the trailing ``d`` axes of a centred box, padding with zeros."""
    d = arr.ndim - 1
    if new_radius <= radius:
        lo = radius - new_radius
        sl = (slice(None),) + (slice(lo, lo + 2 * new_radius + 1),) * d
        return arr[sl].copy()
    pad = new_radius - radius
    return np.pad(arr, [(0, 0)] + [(pad, pad)] * d)


def convolve_boxes(a: np.ndarray, ra: int, b: np.ndarray, rb: int, radius: int | None = None):
    """Convolve scalar boxes ``a`` (radius ``ra``) and ``b`` (radius ``rb``).

    Returns the product box at ``radius`` (default ``ra + rb``, exact), masked
    to the l1 ball.
    """
    full = signal.convolve(a, b, mode="full", method="direct")
    rfull = ra + rb
    radius = rfull if radius is None else radius
    out = crop(full[None], rfull, radius)[0]
    out[~l1_mask(a.ndim, radius)] = 0
    return out


class FourierMap:
    """Mapping ``nu -> complex m-vector`` for ``|nu|_1 <= radius``.

    Parameters
    ----------
    m, d : int
        Vector dimension and number of angles.
    radius : int
        l1 truncation radius (``N_trunc``).
    data : ndarray, optional
        Dense box of shape ``(m,) + (2*radius+1,)*d``; copied.
    """

    __slots__ = ("m", "d", "radius", "data")

    def __init__(self, m: int, d: int, radius: int, data=None):
        self.m, self.d, self.radius = int(m), int(d), int(radius)
        shape = (self.m,) + (2 * self.radius + 1,) * self.d
        if data is None:
            self.data = np.zeros(shape, dtype=complex)
        else:
            data = np.asarray(data, dtype=complex)
            if data.shape != shape:
                raise ValueError(f"data has shape {data.shape}, expected {shape}")
            self.data = data.copy()
            self.data[:, ~l1_mask(self.d, self.radius)] = 0

    # ------------------------------------------------------------ construction
    @classmethod
    def from_dict(cls, m, d, entries, radius=None) -> "FourierMap":
        entries = {tuple(int(n) for n in nu): v for nu, v in dict(entries).items()}
        if radius is None:
            radius = max((sum(abs(n) for n in nu) for nu in entries), default=0)
        out = cls(m, d, radius)
        for nu, v in entries.items():
            if sum(abs(n) for n in nu) <= radius:
                out[nu] = v
        return out

    @classmethod
    def constant(cls, vec, d, radius=0) -> "FourierMap":
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        out = cls(len(vec), d, radius)
        out[(0,) * d] = vec
        return out

    def copy(self) -> "FourierMap":
        return FourierMap(self.m, self.d, self.radius, self.data)

    def _index(self, nu):
        nu = tuple(int(n) for n in nu)
        if len(nu) != self.d:
            raise KeyError(f"mode {nu} does not have {self.d} components")
        if sum(abs(n) for n in nu) > self.radius:
            return None
        return (slice(None),) + tuple(n + self.radius for n in nu)

    def __getitem__(self, nu) -> np.ndarray:
        idx = self._index(nu)
        if idx is None:
            return np.zeros(self.m, dtype=complex)
        return self.data[idx].copy()

    def __setitem__(self, nu, value):
        idx = self._index(nu)
        if idx is None:
            raise KeyError(f"mode {tuple(nu)} outside truncation radius {self.radius}")
        self.data[idx] = np.broadcast_to(np.asarray(value, dtype=complex), (self.m,))

    def __contains__(self, nu):
        idx = self._index(nu)
        return idx is not None and bool(np.any(np.abs(self.data[idx]) > PRUNE))

    def items(self):
        """Stored ``(nu, vector)`` pairs in lexicographic order, pruned."""
        nz = np.argwhere(np.any(np.abs(self.data) > PRUNE, axis=0))
        for pos in nz:  # argwhere is lexicographic in the box index
            nu = tuple(int(p) - self.radius for p in pos)
            yield nu, self.data[(slice(None),) + tuple(pos)].copy()

    def keys(self):
        return [nu for nu, _ in self.items()]

    def to_dict(self) -> dict:
        return dict(self.items())

    def __len__(self):
        return int(np.count_nonzero(np.any(np.abs(self.data) > PRUNE, axis=0)))

    def __repr__(self):
        return f"FourierMap(m={self.m}, d={self.d}, radius={self.radius}, modes={len(self)})"

    # -------------------------------------------------------------- structure
    @property
    def zero_mode(self) -> np.ndarray:
        return self[(0,) * self.d]

    def without_zero_mode(self) -> "FourierMap":
        out = self.copy()
        out[(0,) * self.d] = 0
        return out

    def truncate(self, radius: int) -> "FourierMap":
        return FourierMap(self.m, self.d, radius, crop(self.data, self.radius, radius))

    def support_radius(self) -> int:
        return max((sum(abs(n) for n in nu) for nu, _ in self.items()), default=0)

    def reflect(self) -> "FourierMap":
        """The map ``nu -> conj(u_{-nu})``; equal to ``self`` for real fields."""
        sl = (slice(None),) + (slice(None, None, -1),) * self.d
        return FourierMap(self.m, self.d, self.radius, np.conj(self.data[sl]))

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.data - self.reflect().data), initial=0.0))

    def symmetrize(self) -> "FourierMap":
        return FourierMap(self.m, self.d, self.radius, 0.5 * (self.data + self.reflect().data))

    # ---------------------------------------------------------------- algebra
    def _aligned(self, other):
        if (other.m, other.d) != (self.m, self.d):
            raise ValueError("incompatible Fourier maps")
        r = max(self.radius, other.radius)
        return crop(self.data, self.radius, r), crop(other.data, other.radius, r), r

    def __add__(self, other):
        a, b, r = self._aligned(other)
        return FourierMap(self.m, self.d, r, a + b)

    def __sub__(self, other):
        a, b, r = self._aligned(other)
        return FourierMap(self.m, self.d, r, a - b)

    def __neg__(self):
        return FourierMap(self.m, self.d, self.radius, -self.data)

    def __mul__(self, scalar):
        return FourierMap(self.m, self.d, self.radius, self.data * scalar)

    __rmul__ = __mul__

    def sup_norm(self) -> float:
        """``max_nu |u_nu|`` (Euclidean norm of each coefficient vector)."""
        return float(np.max(np.linalg.norm(self.data.reshape(self.m, -1), axis=0), initial=0.0))

    def l1_norm(self) -> float:
        """``sum_nu |u_nu|``; bounds the sup norm of the field on the torus."""
        return float(np.sum(np.linalg.norm(self.data.reshape(self.m, -1), axis=0)))

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def dominant_mode(self):
        norms = np.linalg.norm(self.data.reshape(self.m, -1), axis=0)
        pos = np.unravel_index(int(np.argmax(norms)), self.data.shape[1:])
        return tuple(int(p) - self.radius for p in pos)

    def shell_maxima(self) -> np.ndarray:
        """``max_{|nu|_1 = n} |u_nu|`` for ``n = 0..radius``."""
        norms = np.linalg.norm(self.data, axis=0)
        shells = np.sum(np.abs(mode_grid(self.d, self.radius)), axis=-1)
        return np.array([np.max(norms[shells == n], initial=0.0) for n in range(self.radius + 1)])

    def component(self, i: int) -> np.ndarray:
        return self.data[i]

    def product(self, other: "FourierMap", radius=None) -> "FourierMap":
        """Componentwise product of the two fields (exact by default)."""
        radius = self.radius + other.radius if radius is None else radius
        out = np.stack([
            convolve_boxes(self.data[i], self.radius, other.data[i], other.radius, radius)
            for i in range(self.m)
        ])
        return FourierMap(self.m, self.d, radius, out)

    def evaluate(self, psi) -> np.ndarray:
        """``sum_nu exp(i nu.psi) u_nu`` at phases ``psi`` (shape ``(..., d)``)."""
        psi = np.asarray(psi, dtype=float)
        modes, coeffs = [], []
        for nu, v in self.items():
            modes.append(nu)
            coeffs.append(v)
        if not modes:
            return np.zeros(psi.shape[:-1] + (self.m,), dtype=complex)
        phase = np.exp(1j * (psi @ np.asarray(modes, dtype=float).T))
        return phase @ np.asarray(coeffs)

    def allclose(self, other, atol=0.0, rtol=1e-12) -> bool:
        a, b, _ = self._aligned(other)
        scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0))
        return bool(np.max(np.abs(a - b), initial=0.0) <= atol + rtol * scale)


def ball_modes(d: int, radius: int, include_zero: bool = True) -> list[tuple]:
    """All ``nu`` with ``|nu|_1 <= radius`` in lexicographic order."""
    out = []
    for nu in itertools.product(range(-radius, radius + 1), repeat=d):
        if sum(abs(n) for n in nu) <= radius and (include_zero or any(nu)):
            out.append(nu)
    return out
