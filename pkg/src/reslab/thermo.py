"""Topological pressure and the critical exponent via the leading eigenvalue
of the truncated untwisted transfer matrix at real parameter values."""

from __future__ import annotations

from dataclasses import dataclass

from scipy.optimize import brentq

from . import transfer
from .schottky import SchottkyData

__all__ = ["PressureCurve", "pressure", "critical_exponent", "pressure_curve"]

import math

DEFAULT_LMAX = 16


def pressure(data: SchottkyData, sigma: float, lmax: int = DEFAULT_LMAX) -> float:
    """log of the spectral radius of the truncated untwisted operator at the
    real parameter sigma; strictly decreasing and convex in sigma."""
    if lmax < 4:
        raise ValueError("lmax must be >= 4")
    M = transfer.assemble(data, float(sigma), transfer.TwistSpec.trivial(), lmax)
    r = transfer.spectral_radius(M)
    if not r > 0:
        raise ArithmeticError("spectral radius collapsed to zero")
    return math.log(r)


def critical_exponent(data: SchottkyData, lmax: int = DEFAULT_LMAX,
                      tol: float = 1e-12) -> float:
    """Root of sigma -> pressure(sigma) in [0, 1]."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    p0 = pressure(data, 0.0, lmax)
    if abs(p0) < max(tol, 1e-10):
        # elementary (cylinder) case: the pressure vanishes at zero already
        return 0.0
    p1 = pressure(data, 1.0, lmax)
    if p0 < 0 or p1 > 0:
        raise ArithmeticError(f"no sign change of pressure on [0,1]: P(0)={p0}, P(1)={p1}")
    delta = brentq(lambda x: pressure(data, x, lmax), 0.0, 1.0, xtol=tol)
    if abs(pressure(data, delta, lmax)) > max(1e-8, 10 * tol):
        raise ArithmeticError("pressure root did not converge")
    return float(delta)


@dataclass(frozen=True)
class PressureCurve:
    samples: tuple[tuple[float, float], ...]
    delta: float


def pressure_curve(data: SchottkyData, sigmas, lmax: int = DEFAULT_LMAX) -> PressureCurve:
    samples = tuple((float(s), pressure(data, s, lmax)) for s in sigmas)
    return PressureCurve(samples=samples, delta=critical_exponent(data, lmax))
