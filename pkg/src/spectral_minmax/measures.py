"""Compactly supported probability measures, distribution and quantile functions.

A measure is a finite list of atoms plus piecewise-linear density segments.
The distribution function is left-continuous, ``F(t) = mu((-inf, t))``, and
the quantile function is its generalized inverse ``X(s) = inf{t : F(t) > s}``
on ``[0, 1)``.  Both are stored exactly: quantile pieces over a density
segment invert the quadratic CDF in closed form, so round trips and partial
integrals carry no sampling error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MASS_TOL = 1e-12


class MeasureValidationError(ValueError):
    """A measure, distribution or quantile violates one of its invariants."""


@dataclass(frozen=True)
class CompactMeasure:
    """Atoms ``(location, weight)`` plus density segments ``(t_lo, t_hi, d_lo, d_hi)``.

    The density is linear on each segment, from ``d_lo`` at ``t_lo`` to
    ``d_hi`` at ``t_hi``.  ``support`` defaults to the hull of all atoms and
    segments.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    segments: tuple[tuple[float, float, float, float], ...] = ()
    support: tuple[float, float] | None = None

    def __post_init__(self):
        atoms = tuple((float(c), float(w)) for c, w in self.atoms)
        segments = tuple(tuple(float(v) for v in seg) for seg in self.segments)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "segments", segments)
        if not atoms and not segments:
            raise MeasureValidationError("measure has neither atoms nor segments")

        for i, (c, w) in enumerate(atoms):
            if not math.isfinite(c):
                raise MeasureValidationError(f"atoms[{i}]: location {c} is not finite")
            if not (0.0 < w <= 1.0 + MASS_TOL):
                raise MeasureValidationError(f"atoms[{i}]: weight {w} not in (0, 1]")
        for i, seg in enumerate(segments):
            if len(seg) != 4:
                raise MeasureValidationError(f"segments[{i}]: expected 4 values, got {len(seg)}")
            lo, hi, dl, dh = seg
            if not all(math.isfinite(v) for v in seg):
                raise MeasureValidationError(f"segments[{i}]: non-finite value")
            if not lo < hi:
                raise MeasureValidationError(f"segments[{i}]: t_lo={lo} must be < t_hi={hi}")
            if dl < 0 or dh < 0:
                raise MeasureValidationError(f"segments[{i}]: negative density")
            if i > 0 and segments[i - 1][1] > lo:
                raise MeasureValidationError(
                    f"segments[{i}]: overlaps or precedes segments[{i - 1}]")

        mass = self.total_mass()
        if abs(mass - 1.0) > MASS_TOL:
            raise MeasureValidationError(f"total mass {mass!r} differs from 1 by more than {MASS_TOL}")

        lo = min([c for c, _ in atoms] + [s[0] for s in segments])
        hi = max([c for c, _ in atoms] + [s[1] for s in segments])
        if self.support is None:
            object.__setattr__(self, "support", (lo, hi))
        else:
            alpha, beta = (float(v) for v in self.support)
            if not (alpha <= lo and hi <= beta):
                raise MeasureValidationError(
                    f"support [{alpha}, {beta}] does not contain [{lo}, {hi}]")
            object.__setattr__(self, "support", (alpha, beta))

    def total_mass(self) -> float:
        mass = math.fsum(w for _, w in self.atoms)
        return mass + math.fsum(0.5 * (hi - lo) * (dl + dh) for lo, hi, dl, dh in self.segments)

    def mean(self) -> float:
        """First moment, computed directly from atoms and segments."""
        total = math.fsum(c * w for c, w in self.atoms)
        # exact for linear densities (Simpson on a cubic integrand)
        return total + math.fsum(
            (hi - lo) / 6.0 * (lo * (2 * dl + dh) + hi * (dl + 2 * dh))
            for lo, hi, dl, dh in self.segments)

    @property
    def is_atomic(self) -> bool:
        return not self.segments

    def to_json(self) -> dict:
        return {
            "atoms": [list(a) for a in self.atoms],
            "segments": [list(s) for s in self.segments],
            "support": list(self.support),
        }


def measure_from_json(obj: dict | str) -> CompactMeasure:
    """Build a measure from ``{"atoms": [[loc, w], ...], "segments": [[lo, hi, dl, dh], ...]}``."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise MeasureValidationError("measure JSON must be an object")
    unknown = set(obj) - {"atoms", "segments", "support"}
    if unknown:
        raise MeasureValidationError(f"unknown keys in measure JSON: {sorted(unknown)}")
    atoms = obj.get("atoms", [])
    for i, a in enumerate(atoms):
        if not isinstance(a, (list, tuple)) or len(a) != 2:
            raise MeasureValidationError(f"atoms[{i}]: expected [location, weight]")
    support = obj.get("support")
    return CompactMeasure(
        atoms=tuple(tuple(a) for a in atoms),
        segments=tuple(tuple(s) for s in obj.get("segments", [])),
        support=tuple(support) if support is not None else None,
    )


def load_measure(path: str | Path) -> CompactMeasure:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MeasureValidationError(f"{path}: invalid JSON ({exc})") from exc
    return measure_from_json(obj)


# -- named measures ---------------------------------------------------------

def point_mass(c: float) -> CompactMeasure:
    return CompactMeasure(atoms=((c, 1.0),))


def uniform(lo: float = 0.0, hi: float = 1.0) -> CompactMeasure:
    d = 1.0 / (hi - lo)
    return CompactMeasure(segments=((lo, hi, d, d),))


def semicircle(radius: float = 2.0, panels: int = 4096) -> CompactMeasure:
    """Wigner semicircle on ``[-radius, radius]`` as a piecewise-linear density.

    Node values of the exact density are joined linearly, then rescaled so
    the trapezoidal mass is exactly one.
    """
    t = np.linspace(-radius, radius, panels + 1)
    t[0], t[-1] = -radius, radius
    d = np.sqrt(np.clip(radius * radius - t * t, 0.0, None)) * 2.0 / (math.pi * radius * radius)
    mass = math.fsum(0.5 * (t[1:] - t[:-1]) * (d[1:] + d[:-1]))
    d = d / mass
    segs = tuple((float(t[i]), float(t[i + 1]), float(d[i]), float(d[i + 1]))
                 for i in range(panels))
    return CompactMeasure(segments=segs, support=(-radius, radius))


# -- distribution function --------------------------------------------------

@dataclass(frozen=True, eq=False)
class Cdf:
    """Left-continuous distribution function.

    ``t`` are the sorted breakpoints, ``left[k] = F(t[k]) = mu((-inf, t[k]))``,
    ``right[k] = mu((-inf, t[k]])``.  ``dens[k]`` holds the density at both
    ends of the open gap ``(t[k], t[k+1])``; the density is linear in between.
    """

    t: np.ndarray
    left: np.ndarray
    right: np.ndarray
    dens: np.ndarray
    support: tuple[float, float]

    @property
    def breakpoints(self) -> list[tuple[float, float, float]]:
        return list(zip(self.t.tolist(), self.left.tolist(), self.right.tolist()))

    @property
    def jumps(self) -> np.ndarray:
        return self.right - self.left

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        x = np.atleast_1d(t_arr)
        k = np.searchsorted(self.t, x, side="left")
        out = np.empty_like(x)
        below = k == 0
        above = k == len(self.t)
        inside = ~below & ~above
        out[below] = 0.0
        out[above] = 1.0
        ki = k[inside]
        xi = x[inside]
        at_break = self.t[ki] == xi
        j = ki - 1
        h = self.t[ki] - self.t[j]
        u = xi - self.t[j]
        d0 = self.dens[j, 0]
        d1 = self.dens[j, 1]
        gap = self.right[j] + d0 * u + 0.5 * (d1 - d0) * u * u / h
        out[inside] = np.where(at_break, self.left[ki], gap)
        # F vanishes at and below the left end of the support
        out[x <= self.t[0]] = 0.0
        return out.reshape(t_arr.shape) if t_arr.ndim else float(out[0])


def cdf_of(measure: CompactMeasure) -> Cdf:
    """Distribution function ``F(t) = mu((-inf, t))`` of ``measure``."""
    pts = sorted({c for c, _ in measure.atoms}
                 | {s[0] for s in measure.segments} | {s[1] for s in measure.segments})
    t = np.array(pts, dtype=float)
    nbreak = len(t)
    jump = np.zeros(nbreak)
    for c, w in measure.atoms:
        jump[np.searchsorted(t, c)] += w
    dens = np.zeros((max(nbreak - 1, 0), 2))
    for lo, hi, dl, dh in measure.segments:
        i0, i1 = np.searchsorted(t, lo), np.searchsorted(t, hi)
        # atoms inside a segment split it; interpolate the density there
        slope = (dh - dl) / (hi - lo)
        for k in range(i0, i1):
            dens[k, 0] = dl + slope * (t[k] - lo) if k > i0 else dl
            dens[k, 1] = dl + slope * (t[k + 1] - lo) if k + 1 < i1 else dh
    gap_mass = 0.5 * np.diff(t) * (dens[:, 0] + dens[:, 1])
    left = np.zeros(nbreak)
    right = np.zeros(nbreak)
    acc = 0.0
    for k in range(nbreak):
        left[k] = acc
        acc += jump[k]
        right[k] = acc
        if k < nbreak - 1:
            acc += gap_mass[k]
    if abs(right[-1] - 1.0) > MASS_TOL:
        raise MeasureValidationError(f"distribution reaches {right[-1]!r}, not 1")
    return Cdf(t=t, left=left, right=right, dens=dens, support=measure.support)


# -- quantile function ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Quantile:
    """Right-continuous non-decreasing function on ``[0, 1)``.

    Piece ``i`` covers ``[s[i], s[i+1])``.  If ``t0[i] == t1[i]`` the piece
    is a plateau (an atom).  Otherwise it is the inverse of the CDF of a
    linear density running from ``d0[i]`` at ``t0[i]`` to ``d1[i]`` at
    ``t1[i]``; that inverse is linear when ``d0 == d1`` and the root of a
    quadratic otherwise.
    """

    s: np.ndarray
    t0: np.ndarray
    t1: np.ndarray
    d0: np.ndarray
    d1: np.ndarray

    def __post_init__(self):
        if len(self.s) != len(self.t0) + 1:
            raise MeasureValidationError("quantile needs one more s-breakpoint than pieces")
        if self.s[0] != 0.0 or abs(self.s[-1] - 1.0) > MASS_TOL:
            raise MeasureValidationError("quantile pieces must cover [0, 1)")
        if np.any(np.diff(self.s) < 0) or np.any(self.t1 < self.t0) or np.any(self.t0[1:] < self.t1[:-1]):
            raise MeasureValidationError("quantile pieces are not non-decreasing")

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Quantile":
        """Step quantile taking ``values[i]`` on ``[i/n, (i+1)/n)``; values must ascend."""
        v = np.asarray(values, dtype=float)
        n = len(v)
        s = np.arange(n + 1) / n
        z = np.zeros(n)
        return cls(s=s, t0=v.copy(), t1=v.copy(), d0=z, d1=z.copy())

    @property
    def npieces(self) -> int:
        return len(self.t0)

    @property
    def kinds(self) -> list[str]:
        return ["constant" if a == b else ("linear" if p == q else "quadratic")
                for a, b, p, q in zip(self.t0, self.t1, self.d0, self.d1)]

    @property
    def breakpoints(self) -> list[tuple[float, float]]:
        """``(s, X(s))`` at the start of every piece."""
        return list(zip(self.s[:-1].tolist(), self.t0.tolist()))

    @property
    def support(self) -> tuple[float, float]:
        return float(self.t0[0]), float(self.t1[-1])

    def _offset(self, i, u):
        """Distance ``x`` into piece ``i`` that carries mass ``u``."""
        h = self.t1[i] - self.t0[i]
        d0 = self.d0[i]
        slope = np.divide(self.d1[i] - d0, h, out=np.zeros_like(h, dtype=float), where=h > 0)
        disc = np.sqrt(np.maximum(d0 * d0 + 2.0 * slope * u, 0.0))
        denom = d0 + disc
        x = np.divide(2.0 * u, denom, out=np.zeros_like(denom, dtype=float), where=denom > 0)
        return np.clip(x, 0.0, h)

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=float)
        x = np.atleast_1d(s_arr)
        if np.any(x < 0) or np.any(x > 1):
            raise ValueError("quantile argument outside [0, 1]")
        i = np.clip(np.searchsorted(self.s, x, side="right") - 1, 0, self.npieces - 1)
        out = self.t0[i] + self._offset(i, np.maximum(x - self.s[i], 0.0))
        return out.reshape(s_arr.shape) if s_arr.ndim else float(out[0])

    def _piece_integral(self, i, ua, ub):
        """Integral of X over masses ``[ua, ub]`` measured from the start of piece ``i``."""
        xa = self._offset(i, ua)
        xb = self._offset(i, ub)
        h = self.t1[i] - self.t0[i]
        slope = np.divide(self.d1[i] - self.d0[i], h, out=np.zeros_like(h, dtype=float), where=h > 0)
        return (self.t0[i] * (ub - ua) + 0.5 * self.d0[i] * (xb * xb - xa * xa)
                + slope * (xb ** 3 - xa ** 3) / 3.0)

    @cached_property
    def _cumulative(self) -> np.ndarray:
        idx = np.arange(self.npieces)
        full = self._piece_integral(idx, np.zeros(self.npieces), np.diff(self.s))
        return np.concatenate([[0.0], np.cumsum(full)])

    def _integral_to(self, s: float) -> float:
        if s <= 0:
            return 0.0
        if s >= self.s[-1]:
            return float(self._cumulative[-1])
        i = int(np.searchsorted(self.s, s, side="right") - 1)
        part = self._piece_integral(np.array([i]), np.zeros(1), np.array([s - self.s[i]]))
        return float(self._cumulative[i] + part[0])

    def integral(self, s0: float, s1: float) -> float:
        return partial_quantile_integral(self, s0, s1)

    def mean(self) -> float:
        return float(self._cumulative[-1])


def quantile_of(cdf: Cdf) -> Quantile:
    """Generalized inverse ``X(s) = inf{t : F(t) > s}`` of ``cdf``."""
    if abs(cdf.right[-1] - 1.0) > MASS_TOL:
        raise MeasureValidationError(f"distribution reaches {cdf.right[-1]!r}, not 1")
    starts, t0, t1, d0, d1 = [], [], [], [], []
    nbreak = len(cdf.t)
    for k in range(nbreak):
        if cdf.right[k] > cdf.left[k]:
            starts.append(cdf.left[k])
            t0.append(cdf.t[k]); t1.append(cdf.t[k]); d0.append(0.0); d1.append(0.0)
        if k < nbreak - 1:
            a, b = cdf.dens[k]
            if a > 0 or b > 0:
                starts.append(cdf.right[k])
                t0.append(cdf.t[k]); t1.append(cdf.t[k + 1]); d0.append(a); d1.append(b)
    s = np.array(starts + [1.0])
    s[0] = 0.0
    return Quantile(s=s, t0=np.array(t0), t1=np.array(t1), d0=np.array(d0), d1=np.array(d1))


def cdf_from_quantile(q: Quantile, t_grid: Iterable[float]) -> np.ndarray:
    """Push Lebesgue measure forward through ``q``: ``m({s : X(s) < t})`` per grid point."""
    t = np.asarray(list(t_grid) if not isinstance(t_grid, np.ndarray) else t_grid, dtype=float)
    # pieces with t0 < t; all but the last of them lie entirely below t
    j = np.searchsorted(q.t0, t, side="left")
    out = np.zeros_like(t)
    some = j > 0
    i = j[some] - 1
    tt = t[some]
    base = q.s[i]
    mass = q.s[i + 1] - base
    h = q.t1[i] - q.t0[i]
    x = np.minimum(tt - q.t0[i], h)
    slope = np.divide(q.d1[i] - q.d0[i], h, out=np.zeros_like(h), where=h > 0)
    partial = np.where(tt >= q.t1[i], mass, q.d0[i] * x + 0.5 * slope * x * x)
    partial = np.where(h == 0, mass, np.minimum(partial, mass))
    out[some] = base + partial
    return out


def partial_quantile_integral(q: Quantile, s0: float, s1: float) -> float:
    """Exact ``int_{s0}^{s1} X(s) ds`` for ``0 <= s0 <= s1 <= 1``."""
    if not (0.0 <= s0 <= s1 <= 1.0):
        raise ValueError(f"need 0 <= s0 <= s1 <= 1, got s0={s0}, s1={s1}")
    return q._integral_to(s1) - q._integral_to(s0)


def discretize(measure: CompactMeasure, n: int) -> CompactMeasure:
    """``n`` atoms of weight ``1/n`` at the quantile midpoints ``X((j + 1/2)/n)``."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    q = quantile_of(cdf_of(measure))
    locs = q((np.arange(n) + 0.5) / n)
    return CompactMeasure(atoms=tuple((float(c), 1.0 / n) for c in locs),
                          support=measure.support)


def quantile_of_measure(measure: CompactMeasure) -> Quantile:
    return quantile_of(cdf_of(measure))


def random_mixed_measure(seed, max_atoms: int = 4, max_segments: int = 4) -> CompactMeasure:
    """Random measure with a few atoms and disjoint linear-density segments on ``[-3, 3]``."""
    rng = np.random.default_rng(seed)
    n_atoms = int(rng.integers(0, max_atoms + 1))
    n_segs = int(rng.integers(0 if n_atoms else 1, max_segments + 1))
    edges = np.sort(rng.uniform(-3.0, 3.0, size=2 * n_segs))
    raw = [(edges[2 * i], edges[2 * i + 1], *rng.uniform(0.0, 1.0, size=2)) for i in range(n_segs)]
    raw = [(lo, hi, dl, dh) for lo, hi, dl, dh in raw if hi > lo and dl + dh > 0]
    if not raw and n_atoms == 0:
        n_atoms = 1
    atom_share = float(rng.uniform(0.2, 0.8)) if raw and n_atoms else (1.0 if n_atoms else 0.0)
    seg_mass = math.fsum(0.5 * (hi - lo) * (dl + dh) for lo, hi, dl, dh in raw)
    scale = (1.0 - atom_share) / seg_mass if raw else 0.0
    segments = tuple((lo, hi, dl * scale, dh * scale) for lo, hi, dl, dh in raw)
    weights = rng.uniform(0.1, 1.0, size=n_atoms)
    weights = weights / weights.sum() * atom_share if n_atoms else weights
    atoms = [(float(c), float(w)) for c, w in zip(rng.uniform(-3.0, 3.0, size=n_atoms), weights)]
    # put the rounding residue on the largest atom so the mass is 1 to working precision
    mass = math.fsum(w for _, w in atoms) + math.fsum(0.5 * (hi - lo) * (dl + dh) for lo, hi, dl, dh in segments)
    if atoms:
        k = int(np.argmax([w for _, w in atoms]))
        atoms[k] = (atoms[k][0], atoms[k][1] + (1.0 - mass))
    return CompactMeasure(atoms=tuple(atoms), segments=segments)
