"""Physical-space cross check of the frequency-side iterate.

Fields are inverse Fourier transforms of profiles,

    F(x) = int f(xi) exp(2 pi i x xi) d xi,

with closed forms for undecayed or semigroup-damped indicator bumps. T_k is
evaluated directly from its principal-value alpha-integral,

    T_k F(x) = (-1)^k / pi  p.v. int d_x delta_a F(x) / a * (delta_a F(x) / a)^(2k) da,

and the Duhamel integral propagates T_k by convolution with a band-limited
Poisson kernel sampled on a uniform grid.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArgumentError, ToleranceError
from .schemas import OracleSettings, QuadratureSpec
from .second_iterate import assemble_bumps
from .spline_profiles import ProfilePiece, SpectralProfile, gauss_legendre, pair_profile

logger = logging.getLogger(__name__)

_SERIES_RADIUS = 1e-2
_PANEL_NODES = 16
_CHUNK_ELEMENTS = 2_000_000


def _phi(w: np.ndarray, order: int) -> np.ndarray:
    """sum_n w^n / (n + order)!.

    This is (e^w - 1)/w for order 1 and (e^w - 1 - w)/w^2 for order 2.
    """
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < _SERIES_RADIUS
    safe = np.where(small, 1.0, w)
    if order == 1:
        direct = (np.exp(safe) - 1.0) / safe
    else:
        direct = (np.exp(safe) - 1.0 - safe) / safe**2
    series = sum(w**n / math.factorial(n + order) for n in range(8))
    return np.where(small, series, direct)


def _exponential_segment(
    a: float, b: float, decay: float, x: np.ndarray, derivative: bool
) -> np.ndarray:
    """int_a^b exp(-2 pi decay |xi|) exp(2 pi i x xi) (2 pi i xi)^derivative d xi."""
    sign = 1.0 if a + b >= 0 else -1.0
    w = 2.0 * math.pi * (-sign * decay + 1j * x)
    width = b - a
    base = np.exp(w * a) * width
    if not derivative:
        return base * _phi(w * width, 1)
    return 2j * math.pi * base * (b * _phi(w * width, 1) - width * _phi(w * width, 2))


def _closed_form(
    piece: ProfilePiece, t: float, x: np.ndarray, derivative: bool
) -> np.ndarray:
    a = float(piece.anchor) + piece.lo
    b = float(piece.anchor) + piece.hi
    decay = piece.decay + t
    segments = [(a, 0.0), (0.0, b)] if a < 0 < b else [(a, b)]
    total = sum(
        _exponential_segment(lo, hi, decay, x, derivative) for lo, hi in segments
    )
    return piece.weight * total


def _quadrature(
    piece: ProfilePiece, t: float, x: np.ndarray, derivative: bool
) -> np.ndarray:
    inner = (k for k in piece.knots if piece.lo < k < piece.hi)
    edges = sorted({piece.lo, piece.hi, *inner})
    reach = 1.0 + float(np.max(np.abs(x))) if x.size else 1.0
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        panels = max(1, math.ceil((hi - lo) * reach))
        bounds = np.linspace(lo, hi, panels + 1)
        for p, q in zip(bounds[:-1], bounds[1:]):
            z, w = gauss_legendre(p, q, 24)
            nodes.append(z)
            weights.append(w)
    zeta = np.concatenate(nodes)
    values = piece.evaluate(zeta, t) * np.concatenate(weights)
    xi = float(piece.anchor) + zeta
    if derivative:
        values = values * (2j * math.pi * xi)
    flat = x.reshape(-1)
    phase = np.exp(2j * math.pi * flat[:, None] * xi[None, :])
    return (phase @ values).reshape(x.shape)


@dataclass(frozen=True)
class PhysicalField:
    """x -> F(x) for a profile after extra semigroup time ``t``."""

    profile: SpectralProfile
    t: float = 0.0
    provenance: str = ""

    @property
    def bandwidth(self) -> float:
        """Largest |xi| in the support."""
        edges = [
            abs(float(v)) for p in self.profile.live_pieces for v in p.absolute_support
        ]
        return max(edges, default=0.0)

    def complex_values(self, x: np.ndarray, derivative: bool = False) -> np.ndarray:
        """Un-truncated complex transform; its imaginary part is rounding only."""
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape, dtype=complex)
        for piece in self.profile.live_pieces:
            if piece.kind == "indicator":
                total += _closed_form(piece, self.t, x, derivative)
            else:
                total += _quadrature(piece, self.t, x, derivative)
        return total

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.complex_values(x).real

    def derivative(self, x: np.ndarray) -> np.ndarray:
        """d/dx F from the transform of 2 pi i xi f."""
        return self.complex_values(x, derivative=True).real


def field_from_profile(profile: SpectralProfile, t: float = 0.0) -> PhysicalField:
    """Physical field of ``exp(-t Lambda)`` applied to a profile.

    Raises:
        ArgumentError: If ``t < 0`` or a piece is unbounded
    """
    if t < 0:
        raise ArgumentError(f"time must be non-negative, got {t}")
    for piece in profile.live_pieces:
        if not (math.isfinite(piece.lo) and math.isfinite(piece.hi)):
            raise ArgumentError("profile support must be bounded")
    closed = all(p.kind == "indicator" for p in profile.live_pieces)
    provenance = "closed form" if closed else "Gauss-Legendre per piece"
    return PhysicalField(profile, t, provenance)


def _symmetric_integrand(
    field: PhysicalField, k: int, x: np.ndarray, alpha: np.ndarray
) -> np.ndarray:
    """G(a) + G(-a) for G(a) = d_x delta_a F / a * (delta_a F / a)^(2k)."""
    value = field(x)[:, None]
    slope = field.derivative(x)[:, None]
    total = np.zeros((x.size, alpha.size))
    for a in (alpha, -alpha):
        shifted = x[:, None] - a[None, :]
        quotient = (value - field(shifted)) / a
        total += (slope - field.derivative(shifted)) / a * quotient ** (2 * k)
    return total


def _alpha_panels(lo: float, hi: float, width: float) -> tuple[np.ndarray, np.ndarray]:
    panels = max(1, math.ceil((hi - lo) / width))
    bounds = np.linspace(lo, hi, panels + 1)
    rules = [
        gauss_legendre(p, q, _PANEL_NODES) for p, q in zip(bounds[:-1], bounds[1:])
    ]
    return np.concatenate([r[0] for r in rules]), np.concatenate([r[1] for r in rules])


def _integrate(
    field: PhysicalField, k: int, x: np.ndarray, lo: float, hi: float, width: float
) -> tuple[np.ndarray, int]:
    nodes, weights = _alpha_panels(lo, hi, width)
    out = np.zeros(x.size)
    step = max(1, _CHUNK_ELEMENTS // max(nodes.size, 1))
    for start in range(0, x.size, step):
        chunk = x[start : start + step]
        values = _symmetric_integrand(field, k, chunk, nodes)
        out[start : start + step] = values @ weights
    return out, nodes.size


def tk_apply_many(
    field: PhysicalField,
    k: int,
    xs: Sequence[float] | np.ndarray,
    alpha_quad: QuadratureSpec | None = None,
) -> np.ndarray:
    """T_k F at many points; see ``tk_apply``."""
    if not isinstance(k, int) or k < 1:
        raise ArgumentError(f"order k must be a positive integer, got {k!r}")
    quad = alpha_quad or QuadratureSpec()
    x = np.atleast_1d(np.asarray(xs, dtype=float))
    if not field.profile.live_pieces or x.size == 0:
        return np.zeros(x.size)
    width = min(1.0, 2.0 / max(field.bandwidth, 1.0))
    h = quad.pv_exclusion
    total = np.zeros(x.size)
    if h > 0:
        # the integrand is regular at 0: midpoint rule on the excluded interval
        total += h * (_symmetric_integrand(field, k, x, np.array([0.5 * h])) @ [1.0])
    lo = h
    hi = min(quad.cutoff, float(np.max(np.abs(x))) + 16.0)
    used = 0
    for stretch in itertools.count():
        part, count = _integrate(field, k, x, lo, hi, width)
        used += count
        total += part
        scale = max(float(np.max(np.abs(total))), 1e-300)
        if stretch > 0 and float(np.max(np.abs(part))) <= quad.rtol * scale:
            break
        if hi >= quad.cutoff or used > quad.max_nodes:
            raise ToleranceError(
                "T_k alpha-integral did not settle before the cutoff",
                float(total[0]) * (-1) ** k / math.pi,
                float(np.max(np.abs(part))) / math.pi,
            )
        lo, hi = hi, min(2.0 * hi, quad.cutoff)
    logger.debug(f"T_{k} alpha-integral settled at cutoff {hi} for {x.size} point(s)")
    return (-1.0) ** k / math.pi * total


def tk_apply(
    field: PhysicalField,
    k: int,
    x: float,
    alpha_quad: QuadratureSpec | None = None,
) -> float:
    """Evaluate T_k F(x) by direct alpha-quadrature.

    The integrand is combined at +-a, which cancels the odd tail, and
    integrated on (0, L] with L doubling until the last added stretch is
    below ``rtol`` of the running value. With ``pv_exclusion`` h > 0, (0, h] is
    replaced by its midpoint value.

    Raises:
        ToleranceError: If ``cutoff`` is reached first
    """
    return float(tk_apply_many(field, k, [x], alpha_quad)[0])


def smoothed_poisson_kernel(
    s: float, z: np.ndarray, inner: float, outer: float
) -> np.ndarray:
    """Inverse transform of W(xi) exp(-2 pi s |xi|).

    W is 1 on [-inner, inner] and falls to 0 at +-outer along a raised cosine,
    so the kernel agrees with the Poisson kernel on functions band-limited to
    ``inner`` and decays like |z|^-2.
    """
    z = np.asarray(z, dtype=float)
    w = 2.0 * math.pi * (-s + 1j * z)
    taper = outer - inner
    shift = math.pi / taper
    ramp = np.exp(w * inner) * taper
    half = inner * _phi(w * inner, 1) + 0.5 * ramp * _phi(w * taper, 1)
    half += 0.25 * ramp * (
        _phi((w + 1j * shift) * taper, 1) + _phi((w - 1j * shift) * taper, 1)
    )
    return 2.0 * half.real


def duhamel_oracle(
    profile: SpectralProfile,
    k: int,
    t: float,
    x_samples: Sequence[float],
    alpha_quad: QuadratureSpec | None = None,
    *,
    time_nodes: int = 16,
    window: float = 24.0,
) -> list[float]:
    """f_k(x, t) = int_0^t exp(-(t - tau) Lambda) T_k(exp(-tau Lambda) phi)(x) d tau.

    T_k is sampled on a uniform grid of spacing below 1/(B + B'), where B is the
    band limit of T_k and B' that of the smoothed Poisson kernel; on such a
    grid the trapezoid sum of the convolution is exact apart from truncation
    at |x - y| > ``window``. The tau-integral uses Gauss-Legendre.

    Args:
        profile: Initial data, a few bumps
        k: Order of T_k
        t: Time
        x_samples: Evaluation points
        alpha_quad: Budget for the alpha-integrals
        time_nodes: Gauss-Legendre order in tau
        window: Half-width of the convolution truncation

    Returns:
        f_k at each sample
    """
    if t < 0:
        raise ArgumentError(f"time must be non-negative, got {t}")
    xs = np.asarray(list(x_samples), dtype=float)
    if t == 0 or not profile.live_pieces:
        return [0.0] * xs.size
    band = (2 * k + 1) * field_from_profile(profile).bandwidth
    outer = 1.5 * band
    h = 1.0 / (1.1 * (band + outer))
    first = math.floor((float(xs.min()) - window) / h)
    last = math.ceil((float(xs.max()) + window) / h)
    y = h * np.arange(first, last + 1)
    taus, weights = gauss_legendre(0.0, t, time_nodes)
    result = np.zeros(xs.size)
    for tau, weight in zip(taus, weights):
        forcing = tk_apply_many(field_from_profile(profile, tau), k, y, alpha_quad)
        for i, x in enumerate(xs):
            near = np.abs(y - x) <= window
            kernel = smoothed_poisson_kernel(t - tau, x - y[near], band, outer)
            result[i] += weight * h * float(forcing[near] @ kernel)
        logger.debug(f"Duhamel oracle: tau={tau:.6g} done ({y.size} grid points)")
    return result.tolist()


def oracle_compare(
    settings: OracleSettings,
    k: int = 1,
    quad: QuadratureSpec | None = None,
    exact_time: bool = True,
) -> dict:
    """Compare frequency-side f_k with the physical-space oracle on gamma P_c data.

    The relative difference is max|oracle - assembled| / max|oracle| over the
    samples; evenness is checked on the assembled field at +-x.
    """
    c, g = settings.center, settings.weight
    alpha_quad = quad or QuadratureSpec(rtol=min(1e-6, 1e-2 * settings.tolerance))
    xs = np.linspace(-settings.x_range, settings.x_range, settings.samples)
    oracle = np.array(
        duhamel_oracle(
            pair_profile(c, g),
            k,
            settings.t,
            xs,
            alpha_quad,
            time_nodes=settings.time_nodes,
            window=settings.window,
        )
    )
    assembled_profile = assemble_bumps(
        [(c, g), (-c, g)],
        k,
        settings.t,
        quad,
        exact_time=exact_time,
        prefactor_mode="pi",
    )
    assembled_field = field_from_profile(assembled_profile)
    assembled = assembled_field(xs)
    residue = float(np.max(np.abs(assembled_field.complex_values(xs).imag)))
    scale = float(np.max(np.abs(oracle)))
    difference = float(np.max(np.abs(oracle - assembled))) / scale if scale else 0.0
    evenness = float(np.max(np.abs(assembled - assembled_field(-xs))))
    logger.info(f"oracle compare k={k}: relative difference {difference:.3e}")
    return {
        "k": k,
        "center": c,
        "weight": g,
        "t": settings.t,
        "x": xs.tolist(),
        "oracle": oracle.tolist(),
        "assembled": assembled.tolist(),
        "relative_difference": difference,
        "imaginary_residue": residue,
        "evenness_residual": evenness,
        "tolerance": settings.tolerance,
        "passed": difference <= settings.tolerance,
    }
