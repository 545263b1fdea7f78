"""Euler-product oracle for twisted L-functions, argument-principle zero
counting in rectangles, Newton refinement, and resonance-set assembly."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from . import schottky as sk
from . import thermo, transfer
from .transfer import TwistSpec

__all__ = [
    "ResonanceSet",
    "ContourError",
    "euler_product",
    "count_zeros",
    "refine_zero",
    "resonances",
    "make_det",
]

EULER_MARGIN = 0.1
CONTOUR_MIN_MODULUS = 1e-6
NEWTON_STEP = 1e-6
NEWTON_TOL = 1e-10
NEWTON_MAXITER = 50


class ContourError(RuntimeError):
    """Raised when the contour passes too close to a zero."""

    def __init__(self, point: complex, modulus: float):
        super().__init__(f"contour too close to zero at {point} (|det|={modulus:.3e})")
        self.point = point
        self.modulus = modulus


@dataclass(frozen=True)
class ResonanceSet:
    rectangle: tuple[float, float, float, float]
    zeros: tuple[tuple[complex, int], ...]
    contour_count: int
    residuals: tuple[float, ...]
    unresolved: tuple[tuple[float, float, float, float], ...] = ()

    @property
    def total_multiplicity(self) -> int:
        return sum(mult for _, mult in self.zeros)


@lru_cache(maxsize=32)
def _delta_of(data: sk.SchottkyData) -> float:
    return thermo.critical_exponent(data)


def euler_product(data: sk.SchottkyData, s: complex, twist: TwistSpec,
                  max_word_len: int = 8, kmax: int = 60,
                  delta: Optional[float] = None) -> complex:
    """Truncated product over primitive classes C and shifts k of
    det(I - rho(C) e^{-(s+k) l(C)}); valid only right of the critical line."""
    if delta is None:
        delta = _delta_of(data)
    if s.real <= delta + EULER_MARGIN:
        raise ValueError(
            f"euler_product requires Re(s) > delta + {EULER_MARGIN} "
            f"(Re(s)={s.real}, delta={delta})")
    classes = sk.primitive_classes_up_to_depth(data, max_word_len)
    umats = twist.letter_matrices(data.m)
    total = 0.0 + 0.0j  # accumulate log of the product
    for c in classes:
        if twist.dim == 1:
            lam = np.array([complex(np.prod([umats[k - 1][0, 0] for k in c.word]))])
        else:
            u = np.eye(twist.dim, dtype=complex)
            for k in c.word:
                u = u @ umats[k - 1]
            lam = np.linalg.eigvals(u)
        for k in range(kmax + 1):
            q = np.exp(-(s + k) * c.length)
            if np.max(np.abs(lam * q)) < 1e-18:
                break
            total += np.sum(np.log1p(-lam * q))
    return complex(np.exp(total))


def make_det(data: sk.SchottkyData, twist: TwistSpec, lmax: int = 16) -> Callable:
    """Cached evaluator of s -> det(I - L_{rho,s}) at the given truncation."""
    cache: dict[complex, complex] = {}

    def det(s: complex) -> complex:
        s = complex(s)
        if s not in cache:
            cache[s] = transfer.fredholm_det(transfer.assemble(data, s, twist, lmax))
        return cache[s]

    return det


def _winding(det: Callable, corners: Sequence[complex],
             max_depth: int = 48, base_segments: int = 16) -> int:
    """Winding number of det along the closed polygon through corners,
    by adaptive phase accumulation with steps kept below pi/2.

    Each edge starts from a fixed base subdivision: the pi/2 criterion alone
    cannot see a full phase turn hiding between two in-phase samples.
    """
    vals = {}

    def f(s):
        if s not in vals:
            v = det(s)
            if abs(v) < CONTOUR_MIN_MODULUS:
                raise ContourError(s, abs(v))
            vals[s] = v
        return vals[s]

    def seg_phase(a: complex, b: complex, fa: complex, fb: complex,
                  depth: int) -> float:
        d = cmath.phase(fb / fa)
        if abs(d) < math.pi / 2:
            return d
        if depth >= max_depth:
            raise ContourError((a + b) / 2, abs(fa))
        mid = (a + b) / 2
        fm = f(mid)
        return seg_phase(a, mid, fa, fm, depth + 1) + seg_phase(mid, b, fm, fb, depth + 1)

    total = 0.0
    pts = list(corners) + [corners[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        nodes = [a + (b - a) * t / base_segments for t in range(base_segments + 1)]
        fs = [f(s) for s in nodes]
        for (p, q, fp, fq) in zip(nodes[:-1], nodes[1:], fs[:-1], fs[1:]):
            total += seg_phase(p, q, fp, fq, 0)
    return int(round(total / (2 * math.pi)))


def _rect_corners(rect) -> list[complex]:
    x0, x1, y0, y1 = rect
    return [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]


def count_zeros(data: sk.SchottkyData, twist: TwistSpec, rectangle,
                lmax: int = 16, det: Optional[Callable] = None) -> int:
    """Number of zeros (with multiplicity) of det(I - L_{rho,s}) inside the
    rectangle (re_min, re_max, im_min, im_max), by the argument principle."""
    if det is None:
        det = make_det(data, twist, lmax)
    return _winding(det, _rect_corners(rectangle))


def refine_zero(data: sk.SchottkyData, twist: TwistSpec, s0: complex,
                lmax: int = 16, det: Optional[Callable] = None,
                mult: int = 1) -> tuple[complex, float, bool]:
    """Newton iteration on det with central finite differences.

    For a zero of known multiplicity the step is scaled by mult, which
    restores quadratic convergence; otherwise plain Newton crawls linearly
    into a multiple zero and stalls short of locating it precisely.
    Returns (s, |det(s)|, converged)."""
    if det is None:
        det = make_det(data, twist, lmax)
    s = complex(s0)
    h = NEWTON_STEP
    converged = False
    for _ in range(NEWTON_MAXITER):
        v = det(s)
        dv = (det(s + h) - det(s - h)) / (2 * h)
        if dv == 0:
            break
        step = max(1, mult) * v / dv
        if abs(step) > 1.0:
            step *= 1.0 / abs(step)
        s = s - step
        if abs(v) < NEWTON_TOL and abs(step) < 1e-9:
            converged = True
            break
    v = det(s)
    return s, abs(v), converged or abs(v) < NEWTON_TOL


def _split_positions(lo: float, hi: float):
    """Deterministic split candidates, off-center jitters as fallbacks."""
    for frac in (0.5, 0.5 + 0.5 / 1.618, 0.5 - 0.5 / 1.618, 0.382, 0.618):
        yield lo + frac * (hi - lo)


def resonances(data: sk.SchottkyData, twist: TwistSpec, rectangle,
               lmax: int = 16, min_cell: float = 1e-3, pad: float = 1e-3,
               det: Optional[Callable] = None) -> ResonanceSet:
    """Locate the zeros of det(I - L_{rho,s}) in the rectangle, with
    multiplicities from winding counts on isolating boxes.

    The working rectangle is padded slightly so that zeros sitting exactly on
    the requested boundary (the cylinder lattice starts at Im(s) = 0) are
    neither split nor missed.
    """
    x0, x1, y0, y1 = (float(v) for v in rectangle)
    work = (x0 - pad, x1 + pad, y0 - pad, y1 + pad)
    if det is None:
        det = make_det(data, twist, lmax)

    def counted(rect) -> int:
        return _winding(det, _rect_corners(rect))

    total = counted(work)
    zeros: list[tuple[complex, int]] = []
    residuals: list[float] = []
    unresolved: list[tuple[float, float, float, float]] = []

    def split(rect, count):
        rx0, rx1, ry0, ry1 = rect
        horizontal = (rx1 - rx0) >= (ry1 - ry0)
        lo, hi = (rx0, rx1) if horizontal else (ry0, ry1)
        for pos in _split_positions(lo, hi):
            if horizontal:
                a, b = (rx0, pos, ry0, ry1), (pos, rx1, ry0, ry1)
            else:
                a, b = (rx0, rx1, ry0, pos), (rx0, rx1, pos, ry1)
            try:
                ca = counted(a)
            except ContourError:
                continue
            cb = count - ca
            return a, ca, b, cb
        raise ContourError(complex((rx0 + rx1) / 2, (ry0 + ry1) / 2), 0.0)

    def solve(rect, count):
        if count == 0:
            return
        rx0, rx1, ry0, ry1 = rect
        size = max(rx1 - rx0, ry1 - ry0)
        if count == 1 or size < min_cell:
            center = complex((rx0 + rx1) / 2, (ry0 + ry1) / 2)
            s, res, ok = refine_zero(data, twist, center, det=det, mult=count)
            inside = (rx0 - min_cell <= s.real <= rx1 + min_cell
                      and ry0 - min_cell <= s.imag <= ry1 + min_cell)
            if not ok or not inside:
                unresolved.append(rect)
                zeros.append((center, count))
                residuals.append(res)
                return
            zeros.append((s, count))
            residuals.append(res)
            return
        a, ca, b, cb = split(rect, count)
        solve(a, ca)
        solve(b, cb)

    solve(work, total)
    # merge duplicates found from adjacent cells that refined to one point
    merged: list[tuple[complex, int]] = []
    merged_res: list[float] = []
    for (z, mult), res in sorted(zip(zeros, residuals),
                                 key=lambda t: (t[0][0].real, t[0][0].imag)):
        for i, (zm, mm) in enumerate(merged):
            if abs(z - zm) < 1e-6:
                merged[i] = (zm, mm + mult)
                merged_res[i] = max(merged_res[i], res)
                break
        else:
            merged.append((z, mult))
            merged_res.append(res)
    return ResonanceSet(
        rectangle=(x0, x1, y0, y1),
        zeros=tuple(merged),
        contour_count=total,
        residuals=tuple(merged_res),
        unresolved=tuple(unresolved),
    )
