"""Covariance intersection fusion of the gated per-variation estimates,
plus the Smart Fusion baselines (SF3/SF5).

The covariance of a rate estimate is one minus its noise index (floored at a
small epsilon, since a perfect noise index would make the inverse-covariance
terms blow up). With the constraint that all weighted covariances are equal,

    w1*C1 = w2*C2 = ... = wn*Cn,   sum(w) = 1,

the weights have the closed form w_i = (1/C_i) / sum_j (1/C_j), and the fused
estimate follows from the convex information-space combination

    1/C_f = sum_i w_i / C_i,
    x_f   = C_f * sum_i w_i * x_i / C_i.

Smart Fusion instead averages a fixed set of variations (RIIV/RIAV/RIFV for
SF3, all five for SF5) and discards the window when any of them is missing,
artifact-skipped, or when the sample standard deviation across them exceeds
4 breaths/min. It applies no noise-index gating.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyFusionError
from .riv import ALL_KINDS, RivKind

COVARIANCE_FLOOR = 1e-6
SF_SD_LIMIT_BPM = 4.0


@dataclass(frozen=True)
class SfConfig:
    """Which variations a Smart Fusion baseline averages."""

    kinds: tuple[RivKind, ...]
    sd_limit: float = SF_SD_LIMIT_BPM


SF3 = SfConfig(kinds=(RivKind.RIIV, RivKind.RIAV, RivKind.RIFV))
SF5 = SfConfig(kinds=ALL_KINDS)


@dataclass(frozen=True)
class FusionResult:
    """Fused rate for one window; ``retained`` False marks a gap."""

    window_index: int
    rr_fusion: float | None
    c_fusion: float | None
    weights: dict[RivKind, float]
    contributors: tuple[RivKind, ...]
    retained: bool


def cif_weights(covariances) -> np.ndarray:
    """Weights satisfying the equal-product condition and summing to one."""
    c = np.asarray(covariances, dtype=float)
    if c.size < 1:
        raise ValueError("need at least one covariance")
    if np.any(c <= 0):
        raise ValueError(f"covariances must be positive, got {c}")
    inv = 1.0 / c
    return inv / inv.sum()


def cif_fuse(estimates) -> tuple[float, float]:
    """Fuse (rate, noise index) pairs; returns (x_fusion, c_fusion).

    Covariances are 1 - ni floored at COVARIANCE_FLOOR. Raises
    :class:`EmptyFusionError` on empty input so the caller records a gap.
    """
    pairs = list(estimates)
    if not pairs:
        raise EmptyFusionError("no estimates to fuse")
    x = np.array([p[0] for p in pairs], dtype=float)
    ni = np.array([p[1] for p in pairs], dtype=float)
    if np.any((ni < 0) | (ni > 1)):
        raise ValueError("noise indices must lie in [0, 1]")
    c = np.maximum(1.0 - ni, COVARIANCE_FLOOR)
    w = cif_weights(c)
    c_fusion = 1.0 / np.sum(w / c)
    x_fusion = c_fusion * np.sum(w * x / c)
    return float(x_fusion), float(c_fusion)


def fuse_window(estimates, t: float) -> FusionResult:
    """Covariance-intersection fusion of one window's estimates at gate t.

    An estimate contributes when it carries a rate and its noise index is at
    least t; the gate is re-applied here so the same extracted estimates can
    be fused at any threshold.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold t must lie in [0, 1], got {t}")
    estimates = list(estimates)
    window_index = estimates[0].window_index if estimates else -1
    usable = [e for e in estimates if e.rr is not None and e.ni is not None and e.ni >= t]
    if not usable:
        return FusionResult(window_index, None, None, {}, (), retained=False)
    c = np.maximum(1.0 - np.array([e.ni for e in usable]), COVARIANCE_FLOOR)
    w = cif_weights(c)
    c_fusion = 1.0 / np.sum(w / c)
    x_fusion = c_fusion * np.sum(w * np.array([e.rr for e in usable]) / c)
    return FusionResult(
        window_index=window_index,
        rr_fusion=float(x_fusion),
        c_fusion=float(c_fusion),
        weights={e.kind: float(wi) for e, wi in zip(usable, w)},
        contributors=tuple(e.kind for e in usable),
        retained=True,
    )


def smart_fusion(estimates, config: SfConfig) -> FusionResult:
    """Smart Fusion baseline: mean of a fixed set, discarded on disagreement.

    The window is dropped when any configured variation is missing or
    artifact-skipped, or when the sample standard deviation (ddof=1) of the
    configured rates exceeds the 4 breaths/min limit. Noise indices are
    ignored.
    """
    estimates = list(estimates)
    window_index = estimates[0].window_index if estimates else -1
    by_kind = {e.kind: e for e in estimates}
    rates = []
    for kind in config.kinds:
        e = by_kind.get(kind)
        if e is None or e.rr is None:
            return FusionResult(window_index, None, None, {}, (), retained=False)
        rates.append(e.rr)
    rates = np.array(rates)
    if float(np.std(rates, ddof=1)) > config.sd_limit:
        return FusionResult(window_index, None, None, {}, (), retained=False)
    share = 1.0 / len(config.kinds)
    return FusionResult(
        window_index=window_index,
        rr_fusion=float(np.mean(rates)),
        c_fusion=None,
        weights={kind: share for kind in config.kinds},
        contributors=tuple(config.kinds),
        retained=True,
    )
