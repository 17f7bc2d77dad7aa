"""Frequency-side profiles: indicator bumps, exact B-splines, semigroup and Duhamel.

A profile is a sum of compactly supported pieces. Each piece lives in local
coordinates zeta = xi - anchor around an anchor (an integer for all
constructed data), so frequencies near 2^56 keep full resolution in zeta.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import BSpline as _ScipyBSpline
from scipy.interpolate import PPoly

from .errors import ArgumentError

logger = logging.getLogger(__name__)

# exp(-x) for x beyond this is stored as an exact zero
UNDERFLOW_EXPONENT = 700.0

Anchor = int | float
Forcing = Callable[[np.ndarray, np.ndarray], np.ndarray]


def attenuation(time: float, abs_xi: np.ndarray) -> np.ndarray:
    """Multiplier exp(-2 pi time |xi|) with exponents above 700 mapped to 0."""
    exponent = 2.0 * math.pi * time * np.asarray(abs_xi, dtype=float)
    clipped = np.minimum(exponent, UNDERFLOW_EXPONENT)
    return np.where(exponent > UNDERFLOW_EXPONENT, 0.0, np.exp(-clipped))


def _ones(zeta: np.ndarray) -> np.ndarray:
    return np.ones_like(zeta, dtype=float)


@dataclass(frozen=True)
class ProfilePiece:
    """One compactly supported term of a profile.

    ``amplitude`` maps local coordinates to base values; the piece value is
    weight * amplitude(zeta) * exp(-2 pi (decay + t) |anchor + zeta|) on
    [lo, hi] and zero elsewhere.
    """

    anchor: Anchor
    lo: float
    hi: float
    knots: tuple[float, ...]
    amplitude: Callable[[np.ndarray], np.ndarray] = _ones
    weight: complex | float = 1.0
    decay: float = 0.0
    kind: str = "indicator"
    underflow: bool = False
    label: str = ""

    @property
    def absolute_support(self) -> tuple[Anchor, Anchor]:
        """Support endpoints in absolute frequency, exact for integer data."""
        return _shift(self.anchor, self.lo), _shift(self.anchor, self.hi)

    def min_abs_xi(self) -> float:
        """Smallest |xi| over the support."""
        a, b = self.absolute_support
        if a <= 0 <= b:
            return 0.0
        return float(min(abs(a), abs(b)))

    def abs_xi(self, zeta: np.ndarray) -> np.ndarray:
        """|anchor + zeta| in floating point."""
        return np.abs(float(self.anchor) + zeta)

    def evaluate(self, zeta: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Values at local coordinates ``zeta`` after extra semigroup time ``t``."""
        zeta = np.asarray(zeta, dtype=float)
        if self.underflow:
            return np.zeros(zeta.shape, dtype=complex)
        inside = (zeta >= self.lo) & (zeta <= self.hi)
        values = np.zeros(zeta.shape, dtype=complex)
        if not inside.any():
            return values
        z = zeta[inside]
        base = self.weight * self.amplitude(z)
        total_time = self.decay + t
        if total_time > 0:
            base = base * attenuation(total_time, self.abs_xi(z))
        values[inside] = base
        return values


def _shift(anchor: Anchor, offset: float) -> Anchor:
    if isinstance(anchor, int) and float(offset).is_integer():
        return anchor + int(offset)
    return anchor + offset


@dataclass(frozen=True)
class SpectralProfile:
    """Sum of pieces; the Fourier transform of a (real) physical function."""

    pieces: tuple[ProfilePiece, ...] = ()
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __add__(self, other: "SpectralProfile") -> "SpectralProfile":
        return SpectralProfile(self.pieces + other.pieces, self.notes + other.notes)

    def __len__(self) -> int:
        return len(self.pieces)

    @property
    def live_pieces(self) -> tuple[ProfilePiece, ...]:
        """Pieces not flagged as underflowed."""
        return tuple(p for p in self.pieces if not p.underflow)

    @property
    def underflowed(self) -> int:
        """Number of pieces stored as exact zeros."""
        return sum(1 for p in self.pieces if p.underflow)

    def scaled(self, factor: complex | float) -> "SpectralProfile":
        """Profile multiplied by a constant."""
        return SpectralProfile(
            tuple(replace(p, weight=p.weight * factor) for p in self.pieces), self.notes
        )

    def evaluate_local(
        self, anchor: Anchor, zeta: np.ndarray, t: float = 0.0
    ) -> np.ndarray:
        """Profile at xi = anchor + zeta, with the offset formed exactly."""
        zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
        values = np.zeros(zeta.shape, dtype=complex)
        if zeta.size == 0:
            return values
        zmin, zmax = float(zeta.min()), float(zeta.max())
        for piece in self.live_pieces:
            offset = anchor - piece.anchor
            if offset + zmax < piece.lo or offset + zmin > piece.hi:
                continue
            values += piece.evaluate(float(offset) + zeta, t)
        return values

    def __call__(self, xi: np.ndarray, t: float = 0.0) -> np.ndarray:
        return self.evaluate_local(0, xi, t)

    def is_hermitian(self, samples: int = 33, rtol: float = 1e-12) -> bool:
        """Check f(-xi) == conj(f(xi)) at sample points inside every piece."""
        for piece in self.live_pieces:
            zeta = np.linspace(piece.lo, piece.hi, samples)
            plus = self.evaluate_local(piece.anchor, zeta)
            minus = self.evaluate_local(-piece.anchor, -zeta)
            scale = max(float(np.max(np.abs(plus))), float(np.max(np.abs(minus))))
            if scale == 0.0:
                continue
            if np.max(np.abs(minus - np.conj(plus))) > rtol * scale:
                return False
        return True


def indicator_piece(center: Anchor, weight: complex | float = 1.0) -> ProfilePiece:
    """chi_c: the indicator of [c - 1, c + 1]."""
    return ProfilePiece(
        anchor=center,
        lo=-1.0,
        hi=1.0,
        knots=(-1.0, 1.0),
        weight=weight,
        label=f"chi({center})",
    )


def pair_profile(A: Anchor, weight: float = 1.0) -> SpectralProfile:
    """P_A = chi_A + chi_{-A} scaled by ``weight``."""
    return SpectralProfile((indicator_piece(A, weight), indicator_piece(-A, weight)))


def indicator_profile(
    terms: Sequence[tuple[Anchor, complex | float]],
) -> SpectralProfile:
    """Profile of weighted indicator bumps given as (center, weight) pairs."""
    return SpectralProfile(tuple(indicator_piece(c, w) for c, w in terms))


class BSpline:
    """Exact piecewise polynomial chi_{c_1} * ... * chi_{c_n}.

    Stored in local coordinates zeta = xi - sum(c): degree n - 1 with
    breakpoints -n, -n + 2, ..., n. The value is 2^(n-1) times the
    partition-of-unity B-spline on those knots.
    """

    def __init__(self, centers: Sequence[Anchor]):
        if len(centers) < 1:
            raise ArgumentError("convolve_indicators needs at least one centre")
        self.centers = tuple(centers)
        self.n = len(self.centers)
        if all(isinstance(c, int) for c in self.centers):
            self.total: Anchor = sum(self.centers)
        else:
            self.total = math.fsum(float(c) for c in self.centers)
        n = self.n
        self.knots = tuple(float(v) for v in range(-n, n + 1, 2))
        if n == 1:
            breaks = np.array([-1.0, 1.0])
            self.poly = PPoly(np.array([[1.0]]), breaks, extrapolate=False)
        else:
            knots = np.array(self.knots)
            element = _ScipyBSpline.basis_element(knots, extrapolate=False)
            poly = PPoly.from_spline(element, extrapolate=False)
            self.poly = PPoly(poly.c * 2.0 ** (n - 1), poly.x, extrapolate=False)

    def __repr__(self) -> str:
        return f"BSpline(centers={self.centers})"

    @property
    def support(self) -> tuple[Anchor, Anchor]:
        """[sum(c) - n, sum(c) + n]."""
        return _shift(self.total, -self.n), _shift(self.total, self.n)

    def local(self, zeta: np.ndarray) -> np.ndarray:
        """Values at zeta = xi - sum(c)."""
        zeta = np.asarray(zeta, dtype=float)
        return np.nan_to_num(self.poly(zeta), nan=0.0)

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return self.local(xi - float(self.total))

    def integral(self) -> float:
        """Exact polynomial integral over the support (equals 2^n)."""
        return float(self.poly.integrate(-self.n, self.n))

    def as_piece(self, weight: complex | float = 1.0) -> ProfilePiece:
        """The spline as a profile piece anchored at sum(c)."""
        return ProfilePiece(
            anchor=self.total,
            lo=-float(self.n),
            hi=float(self.n),
            knots=self.knots,
            amplitude=self.local,
            weight=weight,
            kind="bspline",
            label=f"h{self.centers}",
        )


def convolve_indicators(centers: Sequence[Anchor]) -> BSpline:
    """Exact convolution of the unit-width bumps chi_{c_i}.

    Examples:
        - (0, 0) -> triangle max(2 - |xi|, 0)
        - (0, 0, 0) -> value 3 at 0
        - (5, -2, 4) -> support [4, 10], peak 3 at 7
    """
    return BSpline(centers)


@dataclass(frozen=True)
class BoundsResult:
    """Outcome of the pointwise envelope check."""

    passed: bool
    residual: float
    points: int


def bspline_bounds_check(b: BSpline, points: int = 2001) -> BoundsResult:
    """Verify chi(xi - S) <= b(xi) <= 2^n chi((xi - S)/n) on a grid.

    The grid spans the support plus half a unit on each side. The lower bound
    is tested on |xi - S| < 1, where chi equals one.
    """
    n = b.n
    zeta = np.linspace(-n - 0.5, n + 0.5, max(points, 1000))
    values = b.local(zeta)
    lower = np.where(np.abs(zeta) < 1.0, 1.0, 0.0)
    upper = np.where(np.abs(zeta) <= n, 2.0**n, 0.0)
    violation = max(
        float(np.max(lower - values)), float(np.max(values - upper)), 0.0
    )
    return BoundsResult(violation <= 1e-12, violation, zeta.size)


def semigroup_apply(profile: SpectralProfile, t: float) -> SpectralProfile:
    """Apply exp(-t Lambda), the multiplier exp(-2 pi t |xi|).

    Pieces whose attenuation exponent exceeds 700 on the whole support are
    flagged and evaluate to exact zeros.

    Raises:
        ArgumentError: If ``t < 0``
    """
    if t < 0:
        raise ArgumentError(f"semigroup time must be non-negative, got {t}")
    if t == 0:
        return profile
    pieces = []
    flagged = 0
    for piece in profile.pieces:
        decay = piece.decay + t
        underflow = piece.underflow or (
            2.0 * math.pi * decay * piece.min_abs_xi() > UNDERFLOW_EXPONENT
        )
        flagged += underflow and not piece.underflow
        pieces.append(replace(piece, decay=decay, underflow=underflow))
    if flagged:
        logger.debug(f"semigroup t={t}: {flagged} piece(s) underflowed to zero")
    return SpectralProfile(tuple(pieces), profile.notes)


def duhamel_exponential(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    """int_0^t exp(-2 pi (t - tau) a) exp(-2 pi tau b) d tau in closed form.

    Symmetric in (a, b); evaluated as exp(-2 pi t lo) (1 - exp(-x)) / x * t with
    x = 2 pi t (hi - lo) through ``expm1``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = np.minimum(a, b)
    gap = np.abs(a - b)
    x = 2.0 * math.pi * t * gap
    safe = np.where(x > 0, x, 1.0)
    shape = np.where(x > 0, -np.expm1(-safe) / safe, 1.0)
    return t * shape * attenuation(t, lo)


def gauss_legendre(lo: float, hi: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (hi - lo)
    return 0.5 * (hi + lo) + half * x, half * w


def duhamel_E(
    forcing: Forcing, t: float, time_nodes: int = 64, t_start: float = 0.0
) -> Callable[[np.ndarray], np.ndarray]:
    """Frequency-side Duhamel operator E on [t_start, t].

    E(g)(xi) = int exp(-2 pi (t - tau) |xi|) g(xi, tau) d tau with Gauss-Legendre
    nodes in tau. ``forcing(xi, tau)`` receives xi of shape (m,) and tau of
    shape (T,) and returns an (m, T) array.

    Raises:
        ArgumentError: If ``t < t_start`` or ``t_start < 0``
    """
    if t_start < 0 or t < t_start:
        raise ArgumentError(f"Duhamel window [{t_start}, {t}] is invalid")
    if t == t_start:
        return lambda xi: np.zeros(np.shape(xi), dtype=complex)
    tau, weights = gauss_legendre(t_start, t, time_nodes)

    def evaluate(xi: np.ndarray) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        kernel = attenuation(1.0, np.abs(xi)[:, None] * (t - tau)[None, :])
        return (kernel * forcing(xi, tau)) @ weights

    return evaluate
