"""Homogeneous dyadic-block norm of a spectral profile.

    ||f|| = ( sum_b ( int_{B_b} |xi|^(s p) |f(xi)|^p dxi )^(q/p) )^(1/q)

with dyadic blocks B_b = {2^b <= |xi| < 2^(b+1)}.

Overlapping pieces are grouped into clusters that share a local coordinate
system; every cluster is cut at piece knots and block boundaries and each
segment is integrated by composite Gauss-Legendre.
"""

import logging
import math
from collections import defaultdict
from fractions import Fraction

import numpy as np

from .errors import ArgumentError
from .schemas import NormParams, QuadratureSpec
from .sequences import SequenceFamily, build_initial_data
from .spline_profiles import (
    Anchor,
    BSpline,
    ProfilePiece,
    SpectralProfile,
    gauss_legendre,
)

logger = logging.getLogger(__name__)

# Gauss-Legendre points per unit-length panel
PANEL_NODES = 24


def dyadic_index(x: Anchor | Fraction) -> int:
    """floor(log2 |x|), exact for integers and rationals."""
    value = abs(Fraction(x))
    if value == 0:
        raise ArgumentError("dyadic index of zero is undefined")
    e = value.numerator.bit_length() - value.denominator.bit_length()
    if Fraction(2) ** e > value:
        e -= 1
    elif Fraction(2) ** (e + 1) <= value:
        e += 1
    return e


def _absolute(ref: Anchor, z: float) -> Fraction:
    return Fraction(ref) + Fraction(z)


def _clusters(pieces: tuple[ProfilePiece, ...]) -> list[list[ProfilePiece]]:
    """Group pieces whose absolute supports overlap."""
    ordered = sorted(pieces, key=lambda p: Fraction(p.absolute_support[0]))
    clusters: list[list[ProfilePiece]] = []
    end = None
    for piece in ordered:
        start, stop = (Fraction(v) for v in piece.absolute_support)
        if clusters and start <= end:
            clusters[-1].append(piece)
            end = max(end, stop)
        else:
            clusters.append([piece])
            end = stop
    return clusters


def _block_boundaries(lo: Fraction, hi: Fraction) -> list[Fraction]:
    """Points +-2^b strictly inside (lo, hi)."""
    points = []
    for sign in (1, -1):
        a, b = (lo, hi) if sign > 0 else (-hi, -lo)
        a = max(a, Fraction(0))
        if b <= 0 or b <= a:
            continue
        first = dyadic_index(a) + 1 if a > 0 else dyadic_index(b) - 60
        for e in range(first, dyadic_index(b) + 1):
            point = Fraction(2) ** e
            if a < point < b:
                points.append(sign * point)
    return points


def _cluster_blocks(
    cluster: list[ProfilePiece], params: NormParams, panel_nodes: int
) -> dict[int, float]:
    ref = cluster[0].anchor
    offsets = [float(p.anchor - ref) for p in cluster]
    local_lo = min(o + p.lo for o, p in zip(offsets, cluster))
    local_hi = max(o + p.hi for o, p in zip(offsets, cluster))
    abs_lo, abs_hi = _absolute(ref, local_lo), _absolute(ref, local_hi)
    if abs_lo <= 0 <= abs_hi:
        raise ArgumentError("profile support must stay away from xi = 0")

    cuts = {local_lo, local_hi}
    for o, p in zip(offsets, cluster):
        cuts.update(o + knot for knot in p.knots)
        cuts.update((o + p.lo, o + p.hi))
    boundaries = _block_boundaries(abs_lo, abs_hi)
    cuts.update(float(point - Fraction(ref)) for point in boundaries)
    edges = sorted(c for c in cuts if local_lo <= c <= local_hi)

    sp = params.s * params.p
    blocks: dict[int, list[float]] = defaultdict(list)
    for z0, z1 in zip(edges[:-1], edges[1:]):
        if z1 <= z0:
            continue
        block = dyadic_index(_absolute(ref, 0.5 * (z0 + z1)))
        panels = max(1, math.ceil(z1 - z0))
        bounds = np.linspace(z0, z1, panels + 1)
        for a, b in zip(bounds[:-1], bounds[1:]):
            z, w = gauss_legendre(a, b, panel_nodes)
            values = np.zeros(z.shape, dtype=complex)
            for o, p in zip(offsets, cluster):
                values += p.evaluate(z - o)
            weight = np.abs(float(ref) + z) ** sp
            blocks[block].append(float(np.dot(w, weight * np.abs(values) ** params.p)))
    return {b: math.fsum(parts) for b, parts in blocks.items()}


def _indicator_blocks(piece: ProfilePiece, params: NormParams) -> dict[int, float]:
    """Closed-form block integrals of |w|^p |xi|^(sp) over one undecayed bump."""
    lo, hi = (Fraction(v) for v in piece.absolute_support)
    if lo <= 0 <= hi:
        raise ArgumentError("profile support must stay away from xi = 0")
    if hi < 0:
        lo, hi = -hi, -lo
    edges = [lo] + [b for b in _block_boundaries(lo, hi) if b > 0] + [hi]
    r = params.s * params.p + 1.0
    amplitude = abs(piece.weight) ** params.p
    blocks: dict[int, float] = {}
    for a, b in zip(edges[:-1], edges[1:]):
        fa, width = float(a), float(b - a)
        if r == 0:
            integral = math.log1p(width / fa)
        else:
            integral = fa**r * math.expm1(r * math.log1p(width / fa)) / r
        blocks[dyadic_index((a + b) / 2)] = amplitude * integral
    return blocks


def blocks_disjoint(profile: SpectralProfile) -> bool:
    """True when every dyadic block meets the support of at most one +-pair of bumps."""
    owners: dict[int, set] = defaultdict(set)
    for piece in profile.live_pieces:
        lo, hi = (Fraction(v) for v in piece.absolute_support)
        if lo <= 0 <= hi:
            return False
        if hi < 0:
            lo, hi = -hi, -lo
        key = abs(Fraction(piece.anchor))
        for block in range(dyadic_index(lo), dyadic_index(hi) + 1):
            if dyadic_index(hi) == block and hi == Fraction(2) ** block:
                continue
            owners[block].add(key)
    return all(len(keys) <= 1 for keys in owners.values())


def block_integrals(
    profile: SpectralProfile,
    params: NormParams,
    quad: QuadratureSpec | None = None,
    fast_path: bool = True,
) -> dict[int, float]:
    """Per-block integrals int_{C_b} |xi|^(sp) |f|^p, keyed by block index b.

    The closed-form path is taken only when the profile consists of undecayed
    indicator bumps and ``blocks_disjoint`` holds.
    """
    pieces = profile.live_pieces
    for piece in pieces:
        if not (math.isfinite(piece.lo) and math.isfinite(piece.hi)):
            raise ArgumentError("profile support must be bounded")
    if not pieces:
        return {}
    plain = all(p.kind == "indicator" and p.decay == 0 for p in pieces)
    totals: dict[int, list[float]] = defaultdict(list)
    if fast_path and plain and blocks_disjoint(profile):
        logger.debug(f"block-disjoint fast path for {len(pieces)} bumps")
        for piece in pieces:
            for block, value in _indicator_blocks(piece, params).items():
                totals[block].append(value)
    else:
        panel_nodes = PANEL_NODES
        if quad is not None:
            panel_nodes = max(PANEL_NODES, quad.tensor_nodes)
        for cluster in _clusters(pieces):
            for block, value in _cluster_blocks(cluster, params, panel_nodes).items():
                totals[block].append(value)
    return {b: math.fsum(v) for b, v in sorted(totals.items())}


def aggregate_blocks(blocks: dict[int, float], params: NormParams) -> float:
    """l^q sum of block L^p norms in descending magnitude order."""
    norms = [v ** (1.0 / params.p) for v in blocks.values() if v > 0]
    if not norms:
        return 0.0
    if math.isinf(params.q):
        return max(norms)
    powers = sorted((v**params.q for v in norms), reverse=True)
    return math.fsum(powers) ** (1.0 / params.q)


def besov_norm(
    profile: SpectralProfile,
    params: NormParams,
    quad: QuadratureSpec | None = None,
    fast_path: bool = True,
) -> float:
    """Dyadic-block norm of a profile.

    Args:
        profile: Profile with bounded support away from xi = 0
        params: Indices (s, p, q)
        quad: Optional quadrature budget (raises the per-panel order)
        fast_path: Allow closed-form evaluation of block-disjoint bump data

    Returns:
        Non-negative norm; 0.0 for an empty profile

    Raises:
        ArgumentError: If the support is unbounded or touches xi = 0

    Examples:
        - chi_4 + chi_-4, s=0, p=1, q=1 -> 4
        - chi_4 + chi_-4, s=1, p=1, q=1 -> 16
    """
    return aggregate_blocks(block_integrals(profile, params, quad, fast_path), params)


def comparison_sum(family: SequenceFamily) -> float:
    """(sum_j gamma_j^q k_j^(m q))^(1/q), the initial-data size bound."""
    m = family.m
    q = family.q
    terms = [g**q * float(k) ** (m * q) for g, k in zip(family.gamma_seq, family.k_seq)]
    return math.fsum(terms) ** (1.0 / q)


def norm_upper_bound_check(family: SequenceFamily, N: int | None = None) -> dict:
    """Ratio of ||phi^(N)|| at s = m to the size bound of the initial data.

    Also returns both sides of the identity
    sum_j gamma_j^q k_j^(m q) = sum_j j^-(1+eps).
    """
    if N is not None and N != family.N:
        raise ArgumentError(f"family was generated for N={family.N}, not {N}")
    params = NormParams(s=family.m, p=family.p, q=family.q)
    norm = besov_norm(build_initial_data(family), params)
    bound = comparison_sum(family)
    lhs = bound**family.q
    rhs = math.fsum(j ** -(1.0 + family.epsilon) for j in family.indices)
    return {
        "N": family.N,
        "norm": norm,
        "comparison": bound,
        "ratio": norm / bound,
        "identity_lhs": lhs,
        "identity_rhs": rhs,
    }


def bspline_norm_check(b: BSpline, params: NormParams) -> dict:
    """Measured constant in ||chi_c1 * ... * chi_cn|| <= C |sum(c) + n|^s.

    Raises:
        ArgumentError: Unless |sum(c)| > n + 1
    """
    if not abs(b.total) > b.n + 1:
        raise ArgumentError("the norm bound needs |sum(c)| > n + 1")
    norm = besov_norm(SpectralProfile((b.as_piece(),)), params)
    scale = abs(b.total + b.n) ** params.s
    return {"norm": norm, "scale": scale, "constant": norm / scale}
