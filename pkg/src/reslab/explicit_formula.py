"""Compactly supported test functions built from iterated box convolutions,
their Fourier decay envelope, and geodesic-side sums over closed geodesics
weighted by unitary character values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import schottky as sk
from .schottky import SchottkyData

__all__ = [
    "TestFunction",
    "build_test_function",
    "fourier_envelope_check",
    "geodesic_sum",
    "abelian_character",
]

MAX_GRID = 1 << 16
_TAIL_SUM_CUTOFF = 2_000_000


def _width_normalizer(eps: float) -> float:
    """1 / sum_{j>=1} 1/(j * log(1+j)^{1+eps}), infinite sum approximated
    by a long partial sum plus the integral remainder."""
    j = np.arange(1, _TAIL_SUM_CUTOFF + 1, dtype=float)
    head = float(np.sum(1.0 / (j * np.log(1.0 + j) ** (1.0 + eps))))
    tail = (math.log(_TAIL_SUM_CUTOFF + 1.5) ** (-eps)) / eps
    return 1.0 / (head + tail)


def _widths(eps: float, J: int) -> np.ndarray:
    c = _width_normalizer(eps)
    j = np.arange(1, J + 1, dtype=float)
    return c / (j * np.log(1.0 + j) ** (1.0 + eps))


@dataclass(frozen=True)
class TestFunction:
    """Nonnegative even function of mass 1 supported strictly inside
    [-1, 1]: the convolution of J mass-1 boxes of decreasing widths."""

    widths: tuple[float, ...]
    x: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    J: int
    eps: float
    tail_deficit: float

    @property
    def support_radius(self) -> float:
        return float(sum(self.widths))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.x, self.values, left=0.0, right=0.0)
        out = np.where(np.abs(t) > self.support_radius, 0.0, out)
        return out if out.ndim else float(out)

    def mass(self) -> float:
        h = self.x[1] - self.x[0]
        return float(np.sum(self.values) * h)

    def fourier(self, xi) -> np.ndarray:
        """Exact transform of the ideal convolution: a product of sinc
        factors, one per box (normalization: hat(0) = mass = 1)."""
        xi = np.asarray(xi, dtype=float)
        out = np.ones_like(xi)
        for mu in self.widths:
            out = out * np.sinc(mu * xi / np.pi)
        return out

    def fourier_grid(self, xi) -> np.ndarray:
        """Direct quadrature transform of the sampled values; reliable only
        for moderate |xi| (used as an oracle against fourier())."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        h = self.x[1] - self.x[0]
        return np.array([np.sum(self.values * np.exp(-1j * w * self.x)) * h
                         for w in xi])


def build_test_function(eps: float, J: int, grid_size: int = 1 << 14) -> TestFunction:
    if J < 1:
        raise ValueError("J must be >= 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if grid_size > MAX_GRID:
        raise ValueError(f"grid_size capped at {MAX_GRID}")
    if grid_size % 2 == 0:
        # an odd point count centers the grid at 0 so the kernels sit
        # symmetrically and phi0 stays exactly even
        grid_size += 1
    mu = _widths(eps, J)
    tail_deficit = 1.0 - float(mu.sum())
    x = np.linspace(-1.0, 1.0, grid_size)
    h = x[1] - x[0]
    if mu[-1] < 2 * h:
        raise ValueError(
            f"grid too coarse: spacing {h:.3e} vs smallest width {mu[-1]:.3e}")
    # discrete mass-1 kernels; renormalizing after sampling keeps the
    # discrete mass exactly 1 under direct convolution
    vals = None
    for m in mu:
        half = int(np.floor(m / h))
        kern = np.ones(2 * half + 1)
        kern[0] = kern[-1] = 0.5 + (m / h - half)
        kern /= kern.sum()
        if vals is None:
            vals = kern / h
            pad = (grid_size - len(kern)) // 2
            vals = np.concatenate([np.zeros(pad), vals,
                                   np.zeros(grid_size - pad - len(kern))])
        else:
            vals = np.convolve(vals, kern, mode="same")
    return TestFunction(widths=tuple(float(m) for m in mu), x=x, values=vals,
                        J=J, eps=eps, tail_deficit=tail_deficit)


def fourier_envelope_check(tf: TestFunction, xi_min: float = 10.0,
                           xi_max: float = 1.0e4, alpha: float = 0.5,
                           n_xi: int = 600, shape_ratio_min: float = 0.2) -> dict:
    """Fits log of the transform's oscillation-free upper envelope against
    -C2 * xi / (log xi)^{1+alpha} and certifies the largest C2 for which
    the bound holds with C1 = 1 across the whole range.

    A function with only slow polynomial decay (a single box) has a
    certified constant that collapses towards zero at the top of the range;
    the check fails when the top-decade constant is below shape_ratio_min
    times the bottom-decade constant."""
    xi = np.logspace(math.log10(xi_min), math.log10(xi_max), n_xi)
    u = xi / np.log(xi) ** (1.0 + alpha)
    mu = np.array(tf.widths)
    log_env = np.minimum(0.0, -np.log(np.outer(xi, mu))).sum(axis=1)
    A = np.vstack([np.ones_like(u), -u]).T
    (log_c1, c2_fit), *_ = np.linalg.lstsq(A, log_env, rcond=None)
    pointwise = -log_env / u
    certified = float(pointwise.min())
    ratio = float(pointwise[-1] / pointwise[0])
    passed = certified > 0.0 and ratio >= shape_ratio_min
    return {
        "alpha": alpha,
        "xi_range": (xi_min, xi_max),
        "C2_fit": float(c2_fit),
        "log_C1_fit": float(log_c1),
        "C2_certified": certified,
        "shape_ratio": ratio,
        "shape_ratio_min": shape_ratio_min,
        "passed": bool(passed),
    }


def abelian_character(theta: Sequence[float]) -> Callable:
    """chi(C^k) = exp(2 pi i k <theta, homology(C)>)."""
    th = np.asarray(theta, dtype=float)

    def chi(geo: sk.GeodesicClass, k: int) -> complex:
        return complex(np.exp(2j * np.pi * k * float(th @ np.array(geo.homology))))

    return chi


def geodesic_sum(data: SchottkyData, T: float, phi0: Callable,
                 character: Optional[Callable] = None,
                 depth_cap: int = 24) -> complex:
    """I(rho, T) = sum over classes (C, k), k*l(C) <= T, of
    chi(C^k) * l(C) / (1 - e^{-k l(C)}) * phi0(k l(C) / T).

    The positive-denominator convention makes the trivial-character sum
    real and positive; supp phi0 in [-1, 1] truncates exactly at T."""
    warn: list = []
    prims = sk.primitive_geodesics(data, T, depth_cap=depth_cap, warn=warn)
    if warn:
        raise ValueError(
            f"geodesic table incomplete to length {T}: raise depth_cap "
            f"above {depth_cap} ({warn[0]})")
    total = 0.0 + 0.0j
    for c in prims:
        k = 1
        while k * c.length <= T:
            w = float(phi0(k * c.length / T))
            if w != 0.0:
                chi = 1.0 + 0.0j if character is None else character(c, k)
                total += chi * (c.length / (1.0 - math.exp(-k * c.length))) * w
            k += 1
    return total
