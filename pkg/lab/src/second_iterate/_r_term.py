"""R-terms: the (2k+1)-fold interaction integral for one frequency tuple.

With xi = sum(c) + zeta and difference variables u_i = c_i + v_i, v_i in [-1, 1],
sum(v) = zeta, and |c_i| > 1,

    R_c(xi, tau) = 2 pi xi exp(-2 pi tau sum|c|)
                   * int Gamma_{2k+1}(c + v) exp(-2 pi tau sum sgn(c_i) v_i) dv

where the integral runs over the (2k)-dimensional slice of the cube. The slice
is covered breadth first: each variable's interval is split where the inner
integral has kinks and filled with Gauss-Legendre nodes.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from ..errors import ArgumentError, CapacityError
from ..gamma_kernel import GammaKernel, closed_form_grid
from ..schemas import QuadratureSpec
from ..sequences import FrequencyTuple
from ..spline_profiles import Anchor, attenuation, duhamel_exponential, gauss_legendre

logger = logging.getLogger(__name__)

# elements of the (tuples, nodes, subsets) work array per chunk
_CHUNK_ELEMENTS = 2_000_000

TimeFactor = Callable[[np.ndarray, np.ndarray], np.ndarray]


@lru_cache(maxsize=4096)
def slice_rule(n: int, zeta: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature over {v in [-1, 1]^n : sum(v) = zeta}.

    The first n - 1 coordinates are integrated, the last is eliminated. Given
    the remaining sum r and m later variables, the inner integral has kinks
    at v = r - m + 2q, so every coordinate range is cut there.

    Returns:
        (V, W) with V of shape (P, n) and W of shape (P,); sum(W) equals the
        value at zeta of the n-fold convolution of indicators of [-1, 1]
    """
    if abs(zeta) >= n:
        return np.zeros((0, n)), np.zeros(0)
    x, w = np.polynomial.legendre.leggauss(nodes)
    points = np.zeros((1, 0))
    weights = np.ones(1)
    remaining = np.array([float(zeta)])
    for i in range(n - 1):
        m = n - 1 - i
        base = remaining - m
        q0 = np.clip(np.floor((-1.0 - base) / 2.0), 0, m - 1)
        new_points, new_weights, new_remaining = [], [], []
        for dq in (0, 1):
            q = q0 + dq
            lo = np.maximum(-1.0, base + 2.0 * q)
            hi = np.minimum(1.0, base + 2.0 * q + 2.0)
            keep = (q <= m - 1) & (hi > lo)
            if not keep.any():
                continue
            half = 0.5 * (hi[keep] - lo[keep])
            mid = 0.5 * (hi[keep] + lo[keep])
            v = mid[:, None] + half[:, None] * x[None, :]
            ww = (weights[keep] * half)[:, None] * w[None, :]
            prefix = np.repeat(points[keep], nodes, axis=0)
            new_points.append(np.column_stack([prefix, v.ravel()]))
            new_weights.append(ww.ravel())
            new_remaining.append((remaining[keep][:, None] - v).ravel())
        if not new_points:
            return np.zeros((0, n)), np.zeros(0)
        points = np.concatenate(new_points)
        weights = np.concatenate(new_weights)
        remaining = np.concatenate(new_remaining)
    V = np.column_stack([points, remaining])
    V.setflags(write=False)
    weights.setflags(write=False)
    return V, weights


def check_tensor_budget(k: int, quad: QuadratureSpec) -> None:
    """Raise CapacityError when tensor_nodes^(2k) exceeds the node budget."""
    needed = quad.tensor_nodes ** (2 * k)
    if needed > quad.max_nodes:
        raise CapacityError(
            f"tensor quadrature needs {needed} nodes for k={k}, budget {quad.max_nodes}"
        )


def slice_integrals(
    freqs: Sequence[FrequencyTuple],
    zeta: float,
    nodes: int,
    time_factor: TimeFactor,
) -> np.ndarray:
    """2 pi xi * int Gamma(c + v) time_factor(a, b) dv for each tuple.

    Evaluated at xi = sum(c) + zeta.

    ``time_factor`` receives a = |xi| with shape (T, 1) and b = sum|c| + sgn(c).v
    with shape (T, P) and returns the time weight of shape (T, P). All tuples
    must share one order; same-sign tuples give exact zeros.
    """
    out = np.zeros(len(freqs))
    if not freqs:
        return out
    k = freqs[0].order
    V, W = slice_rule(2 * k + 1, float(zeta), nodes)
    live = [i for i, f in enumerate(freqs) if not f.same_sign]
    if W.size == 0 or not live:
        return out
    step = max(1, _CHUNK_ELEMENTS // (W.size * (2 ** (2 * k + 1) - 1)))
    for start in range(0, len(live), step):
        chunk = [freqs[i] for i in live[start : start + step]]
        gamma = closed_form_grid(k, [f.entries for f in chunk], V)
        signs = np.array([[1.0 if c > 0 else -1.0 for c in f.entries] for f in chunk])
        abs_totals = np.array([float(f.abs_total) for f in chunk])
        xi = np.array([float(f.total) for f in chunk]) + zeta
        b = abs_totals[:, None] + signs @ V.T
        weights = time_factor(np.abs(xi)[:, None], b)
        integral = (gamma * weights) @ W
        out[live[start : start + step]] = 2.0 * math.pi * xi * integral
    return out


def instant_factor(tau: float) -> TimeFactor:
    """exp(-2 pi tau b): the attenuation of the interaction at time tau."""
    return lambda a, b: attenuation(tau, b)


def duhamel_factor(
    t: float, t_start: float = 0.0, exact: bool = True, time_nodes: int = 64
) -> TimeFactor:
    """int_{t_start}^t exp(-2 pi (t - tau) a) exp(-2 pi tau b) d tau."""
    if t_start < 0 or t < t_start:
        raise ArgumentError(f"Duhamel window [{t_start}, {t}] is invalid")
    width = t - t_start
    if exact:

        def factor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
            values = duhamel_exponential(a, b, width)
            return values if t_start == 0 else values * attenuation(t_start, b)

        return factor
    tau, weights = gauss_legendre(t_start, t, time_nodes)

    def quadrature(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        total = np.zeros(np.broadcast(a, b).shape)
        for s, w in zip(tau, weights):
            total += w * attenuation(t - s, a) * attenuation(s, b)
        return total

    return quadrature


@dataclass(frozen=True)
class RTerm:
    """R_c for one tuple; values are real and vanish outside the support."""

    freq: FrequencyTuple
    tensor_nodes: int = 24

    @property
    def k(self) -> int:
        return self.freq.order

    @property
    def width(self) -> int:
        """Half-width 2k+1 of the support."""
        return len(self.freq.entries)

    @property
    def support(self) -> tuple[Anchor, Anchor]:
        """[sum(c) - (2k+1), sum(c) + (2k+1)]."""
        return self.freq.total - self.width, self.freq.total + self.width

    @property
    def vanishes(self) -> bool:
        """Same-sign tuples are identically zero."""
        return self.freq.same_sign

    def _apply(self, zeta: np.ndarray, factor: TimeFactor) -> np.ndarray:
        zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
        values = np.zeros(zeta.shape)
        if self.vanishes:
            return values
        for i, z in enumerate(zeta):
            if abs(z) < self.width:
                row = slice_integrals([self.freq], z, self.tensor_nodes, factor)
                values[i] = row[0]
        return values

    def local(self, zeta: np.ndarray, tau: float = 0.0) -> np.ndarray:
        """R at xi = sum(c) + zeta and time tau."""
        if tau < 0:
            raise ArgumentError(f"time must be non-negative, got {tau}")
        return self._apply(zeta, instant_factor(tau))

    def __call__(self, xi: np.ndarray, tau: float = 0.0) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return self.local(xi - float(self.freq.total), tau)

    def duhamel(
        self,
        zeta: np.ndarray,
        t: float,
        t_start: float = 0.0,
        exact: bool = True,
        time_nodes: int = 64,
    ) -> np.ndarray:
        """E(R) on the window [t_start, t] at xi = sum(c) + zeta."""
        return self._apply(zeta, duhamel_factor(t, t_start, exact, time_nodes))


def assemble_r_term(
    freq: FrequencyTuple,
    gamma: GammaKernel,
    quad: QuadratureSpec | None = None,
) -> RTerm:
    """Build the R-term of a tuple.

    Args:
        freq: Tuple of length 2k+1
        gamma: Kernel whose order must match the tuple
        quad: Tensor order and node budget

    Raises:
        ArgumentError: If the kernel order does not match the tuple
        CapacityError: If tensor_nodes^(2k) exceeds ``quad.max_nodes``
    """
    quad = quad or QuadratureSpec()
    if freq.order != gamma.k or len(freq.entries) != gamma.arity:
        raise ArgumentError(
            f"tuple of length {len(freq.entries)} does not fit Gamma_{gamma.arity}"
        )
    if any(abs(c) <= 1 for c in freq.entries):
        raise ArgumentError("tuple entries must satisfy |c_i| > 1")
    check_tensor_budget(freq.order, quad)
    return RTerm(freq, quad.tensor_nodes)
