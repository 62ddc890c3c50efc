"""Frame-to-frame Pearson correlation of subcarrier gains.

The correlation of adjacent frames compares the *shape* of the gain
curve across subcarriers; it is invariant under linear transforms of
either frame, which makes it insensitive to receiver gain control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TooFewFrames, ZeroVariance
from .preprocess import AmplitudeSeries


@dataclass(eq=False)
class PccSeries:
    """Correlations of adjacent frame pairs: value i is for rows (i, i+1).

    Length is one less than the amplitude series it came from. All
    values lie in [-1, 1]. ``degenerate_count`` counts pairs where a
    constant frame forced the correlation to the 1.0 fallback.
    """

    values: np.ndarray
    rate: float
    t0: float = 0.0
    degenerate_count: int = 0

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("values must be a non-empty vector")
        if not np.isfinite(arr).all():
            raise ValueError("values contain non-finite entries")
        if arr.min() < -1.0 or arr.max() > 1.0:
            raise ValueError("correlation values outside [-1, 1]")
        self.values = arr

    def __len__(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) / self.rate


#: Rows whose centered peak is below this fraction of their magnitude
#: are treated as constant: the deviation is mean-subtraction roundoff,
#: not signal, and correlating it would flip signs arbitrarily.
_FLAT_ROW_RTOL = 1e-14


def _pairwise_pcc(x: np.ndarray, y: np.ndarray):
    """Row-wise correlation of two equally shaped matrices.

    Uses population moments throughout; the normalization cancels, so
    sample moments would give the identical ratio. Rows are rescaled by
    their centered peak before the quadratic forms, which keeps the
    arithmetic in range for any finite input. Returns (values, degenerate)
    where degenerate flags rows that are constant to within roundoff on
    either side; those get the 1.0 fallback.
    """
    xc = x - x.mean(axis=1, keepdims=True)
    yc = y - y.mean(axis=1, keepdims=True)
    xpeak = np.abs(xc).max(axis=1, keepdims=True)
    ypeak = np.abs(yc).max(axis=1, keepdims=True)
    xflat = xpeak <= _FLAT_ROW_RTOL * np.abs(x).max(axis=1, keepdims=True)
    yflat = ypeak <= _FLAT_ROW_RTOL * np.abs(y).max(axis=1, keepdims=True)
    degenerate = xflat | yflat
    xn = np.divide(xc, xpeak, out=np.zeros_like(xc), where=~xflat)
    yn = np.divide(yc, ypeak, out=np.zeros_like(yc), where=~yflat)
    # normalized entries lie in [-1, 1], so the quadratic forms stay small
    # and sqrt(vx * vy) is exact for identical rows (sqrt of a square)
    num = (xn * yn).sum(axis=1)
    den = np.sqrt((xn * xn).sum(axis=1) * (yn * yn).sum(axis=1))
    values = np.divide(num, den, out=np.ones_like(num), where=den != 0)
    return np.clip(values, -1.0, 1.0), degenerate.ravel()


def pcc_pair(x, y, strict: bool = False) -> float:
    """Pearson correlation of two gain vectors, clamped to [-1, 1].

    A constant vector has zero deviation and leaves the correlation
    undefined; the fallback treats it as fully correlated (1.0), since a
    flat frame carries no movement-induced variation. Pass strict=True
    to raise ZeroVariance instead.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("expected two equal-length vectors of at least 2 entries")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("inputs contain non-finite entries")
    values, degenerate = _pairwise_pcc(x[None, :], y[None, :])
    if degenerate[0] and strict:
        raise ZeroVariance("constant frame: correlation undefined")
    return float(values[0])


def pcc_series(series: AmplitudeSeries) -> PccSeries:
    """Correlation of every adjacent row pair of an amplitude series."""
    if len(series) < 2:
        raise TooFewFrames("need at least 2 samples for adjacent correlations")
    values, degenerate = _pairwise_pcc(series.data[:-1], series.data[1:])
    return PccSeries(
        values=values,
        rate=series.rate,
        t0=series.t0,
        degenerate_count=int(degenerate.sum()),
    )


def sti(pcc: float, n: int) -> float:
    """Distance-like transform sqrt(2 * n * (1 - pcc)) of a correlation.

    n is the number of subcarriers per frame. Zero for perfectly
    correlated frames and strictly decreasing in pcc. Kept for
    comparison with threshold-on-distance detectors; the detection path
    uses the correlation directly.
    """
    if not -1.0 <= pcc <= 1.0:
        raise ValueError(f"pcc {pcc} outside [-1, 1]")
    if n < 2:
        raise ValueError("n must be at least 2")
    return math.sqrt(2.0 * n * (1.0 - pcc))


def sti_series(pcc: PccSeries, n: int) -> np.ndarray:
    """Vectorized sti over a whole correlation series."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return np.sqrt(2.0 * n * (1.0 - pcc.values))
