"""Entry distributions for the random matrix rows.

An :class:`EntrySpec` names a mean-zero unit-variance family together
with the moment exponent ``gamma`` and the moment constant it certifies.
:func:`sample_entries` draws a row ``a_0 .. a_n`` (the last element is
the auxiliary wrap variable, an independent copy from the same law), and
:func:`truncate_center` / :func:`rescale_unit_variance` apply the
level-``n**(1/gamma)`` truncation transforms.  All truncated moments are
computed from the population law, never from samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate, special, stats

from .seeding import index_uniforms

FAMILIES = ("gaussian", "rademacher", "uniform", "student_t", "table")

_SQRT3 = math.sqrt(3.0)
_MOMENT_TOL = 1e-12


class InadmissibleSpec(ValueError):
    """Entry family fails the mean-0 / variance-1 / gamma > 2 contract."""


@dataclass(frozen=True)
class EntrySpec:
    family: str
    gamma: float = 4.0
    moment_bound: float | None = None
    df: float | None = None                       # student_t only
    table: tuple[tuple[float, float], ...] | None = None  # (value, prob) pairs

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InadmissibleSpec(f"unknown family {self.family!r}")
        if not self.gamma > 2.0:
            raise InadmissibleSpec(f"gamma must exceed 2, got {self.gamma}")
        if self.family == "student_t":
            if self.df is None or not self.df > 4.0:
                raise InadmissibleSpec("student_t requires df > 4")
            if not self.gamma < self.df:
                raise InadmissibleSpec(
                    f"student_t moment E|a|^gamma is infinite for gamma={self.gamma} >= df={self.df}")
        if self.family == "table":
            if not self.table:
                raise InadmissibleSpec("table family requires (value, probability) pairs")
            probs = np.array([p for _, p in self.table], float)
            vals = np.array([v for v, _ in self.table], float)
            if np.any(probs < 0) or abs(probs.sum() - 1.0) > _MOMENT_TOL:
                raise InadmissibleSpec("table probabilities must be nonnegative and sum to 1")
            if abs(float(probs @ vals)) > _MOMENT_TOL:
                raise InadmissibleSpec(f"table mean {probs @ vals:.3e} != 0")
            if abs(float(probs @ vals**2) - 1.0) > _MOMENT_TOL:
                raise InadmissibleSpec(f"table variance {probs @ vals ** 2:.6f} != 1")
        mom = self.abs_moment(self.gamma)
        if not math.isfinite(mom):
            raise InadmissibleSpec("E|a|^gamma is not finite")
        bound = self.moment_bound if self.moment_bound is not None else mom * (1.0 + 1e-9)
        if mom > bound:
            raise InadmissibleSpec(f"E|a|^gamma = {mom:.6g} exceeds declared bound {bound:.6g}")
        object.__setattr__(self, "moment_bound", bound)

    # -- population moments -------------------------------------------------

    def mean(self) -> float:
        return 0.0

    def variance(self) -> float:
        return 1.0

    def abs_moment(self, p: float) -> float:
        """E|a|^p for the raw law, in closed form (quadrature for student_t)."""
        if self.family == "gaussian":
            return 2.0 ** (p / 2.0) * special.gamma((p + 1.0) / 2.0) / math.sqrt(math.pi)
        if self.family == "rademacher":
            return 1.0
        if self.family == "uniform":
            return _SQRT3**p / (p + 1.0)
        if self.family == "student_t":
            df = self.df
            raw = (df ** (p / 2.0) * special.gamma((p + 1.0) / 2.0)
                   * special.gamma((df - p) / 2.0)
                   / (math.sqrt(math.pi) * special.gamma(df / 2.0)))
            return raw * self._t_scale()**p
        probs = np.array([q for _, q in self.table], float)
        vals = np.array([v for v, _ in self.table], float)
        return float(probs @ np.abs(vals)**p)

    def _t_scale(self) -> float:
        # standard t has variance df/(df-2); rescale to variance 1
        return math.sqrt((self.df - 2.0) / self.df)

    def truncated_moments(self, level: float) -> tuple[float, float]:
        """(mean, variance) of ``a * 1{|a| <= level}``, from the population law."""
        if level <= 0:
            return 0.0, 0.0
        if self.family == "gaussian":
            # symmetric, so the truncated mean vanishes; second moment in closed form
            s = 1.0 - 2.0 * stats.norm.cdf(-level) - 2.0 * level * stats.norm.pdf(level)
            return 0.0, s
        if self.family == "rademacher":
            if level >= 1.0:
                return 0.0, 1.0
            return 0.0, 0.0
        if self.family == "uniform":
            if level >= _SQRT3:
                return 0.0, 1.0
            return 0.0, level**3 / (3.0 * _SQRT3)
        if self.family == "student_t":
            scale = self._t_scale()
            pdf = lambda x: stats.t.pdf(x / scale, self.df) / scale
            s, err = integrate.quad(lambda x: x * x * pdf(x), 0.0, level,
                                    epsabs=1e-14, epsrel=1e-13, limit=200)
            if err > 1e-12:
                raise ValueError(f"truncated second moment quadrature error {err:.2e} > 1e-12")
            return 0.0, 2.0 * s  # symmetric law: truncated mean vanishes
        probs = np.array([q for _, q in self.table], float)
        vals = np.array([v for v, _ in self.table], float)
        keep = np.abs(vals) <= level
        m = float(probs[keep] @ vals[keep])
        s = float(probs[keep] @ vals[keep]**2)
        return m, s - m * m

    # -- sampling ------------------------------------------------------------

    def ppf(self, u: np.ndarray) -> np.ndarray:
        """Inverse CDF, the bridge from counter-based uniforms to the law."""
        if self.family == "gaussian":
            return special.ndtri(u)
        if self.family == "rademacher":
            return np.where(u < 0.5, -1.0, 1.0)
        if self.family == "uniform":
            return (2.0 * u - 1.0) * _SQRT3
        if self.family == "student_t":
            return stats.t.ppf(u, self.df) * self._t_scale()
        probs = np.array([q for _, q in self.table], float)
        vals = np.array([v for v, _ in self.table], float)
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        return vals[np.searchsorted(cum, u, side="right").clip(0, len(vals) - 1)]

    def label(self) -> str:
        if self.family == "student_t":
            return f"student_t(df={self.df:g})"
        if self.family == "table":
            pairs = ",".join(f"{v:g}:{p:g}" for v, p in self.table)
            return f"table({pairs})"
        return self.family


@dataclass(frozen=True)
class EntryArray:
    """One row ``a_0 .. a_n`` with its provenance.

    ``values`` has length ``n + 1``; the final slot is the auxiliary wrap
    variable drawn independently from the same law.
    """

    n: int
    values: np.ndarray
    spec: EntrySpec
    seed: int
    transform_tag: str = "raw"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if len(self.values) != self.n + 1:
            raise ValueError(f"expected {self.n + 1} values, got {len(self.values)}")
        if self.transform_tag not in ("raw", "truncated", "rescaled"):
            raise ValueError(f"bad transform_tag {self.transform_tag!r}")
        if self.transform_tag != "raw":
            cap = 4.0 * self.truncation_level()
            worst = float(np.max(np.abs(self.values)))
            if worst > cap:
                raise ValueError(f"|value| = {worst:.4g} exceeds 4 n^(1/gamma) = {cap:.4g}")

    def truncation_level(self) -> float:
        return float(self.n) ** (1.0 / self.spec.gamma)


def sample_entries(spec: EntrySpec, n: int, seed: int) -> EntryArray:
    """Draw ``n + 1`` independent entries; the i-th depends only on (spec, seed, i)."""
    if n < 1:
        raise ValueError("n must be positive")
    u = index_uniforms(seed, 0, n + 1)
    return EntryArray(n=n, values=spec.ppf(u), spec=spec, seed=seed)


def sample_entries_block(spec: EntrySpec, n: int, seeds: np.ndarray) -> np.ndarray:
    """Vectorized sampler for Monte-Carlo sweeps: one row per seed.

    Row ``t`` is bit-identical to ``sample_entries(spec, n, seeds[t]).values``.
    """
    return spec.ppf(index_uniforms(np.asarray(seeds, dtype=np.uint64), 0, n + 1))


def truncate_center(entries: EntryArray) -> EntryArray:
    """Zero out entries above the truncation level, subtract the population
    mean of the truncated variable."""
    if entries.transform_tag != "raw":
        raise ValueError("truncate_center expects a raw array")
    level = entries.truncation_level()
    mean, _ = entries.spec.truncated_moments(level)
    v = np.where(np.abs(entries.values) <= level, entries.values, 0.0) - mean
    return replace(entries, values=v, transform_tag="truncated")


def rescale_unit_variance(entries: EntryArray) -> EntryArray:
    """Divide by the population standard deviation of the truncated-centered law."""
    if entries.transform_tag != "truncated":
        raise ValueError("rescale_unit_variance expects a truncated array")
    level = entries.truncation_level()
    _, var = entries.spec.truncated_moments(level)
    if var <= 0.0:
        raise ValueError("law degenerates to a point mass after truncation")
    v = entries.values / math.sqrt(var)
    return replace(entries, values=v, transform_tag="rescaled")
