"""Price ingestion, universe alignment, feature and label construction.

The raw input is a long-format CSV of closing prices. Alignment intersects
calendars (no imputation), features are the normalized close plus four
moving averages of it, and the label is the horizon-h return ratio. The
first 30 timesteps of every stock are warm-up and never carry a label.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import (
    InsufficientHistoryError,
    ParseError,
    UniverseTooSmallError,
    ValidationError,
    WindowInvalidError,
)

# Moving-average spans fed to the encoder alongside the normalized close.
MA_SPANS = (5, 10, 20, 30)
FEATURE_DIM = 1 + len(MA_SPANS)
# First timestep that may carry a label; everything earlier is warm-up.
WARMUP = 30
# History filter default: one training window + one test window + warm-up.
DEFAULT_MIN_LENGTH = 2230

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


@dataclass(frozen=True)
class PriceSeries:
    """Per-ticker, date-ordered closing prices."""

    ticker: str
    dates: tuple[date, ...]
    closes: np.ndarray  # (T,) float64, strictly positive

    def __post_init__(self):
        closes = np.asarray(self.closes, dtype=np.float64)
        object.__setattr__(self, "closes", closes)
        if len(self.dates) != closes.shape[0]:
            raise ValidationError(
                f"{self.ticker}: {len(self.dates)} dates vs {closes.shape[0]} closes"
            )
        if np.any(closes <= 0.0):
            t = int(np.argmax(closes <= 0.0))
            raise ValidationError(
                f"{self.ticker}: non-positive close {closes[t]} at {self.dates[t]}"
            )
        for a, b in zip(self.dates, self.dates[1:]):
            if a >= b:
                raise ValidationError(f"{self.ticker}: dates not strictly increasing at {b}")

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True)
class AlignedPanel:
    """Stock universe on a common calendar: N tickers x T dates."""

    tickers: tuple[str, ...]
    dates: tuple[date, ...]
    closes: np.ndarray  # (N, T) float64

    def __post_init__(self):
        closes = np.asarray(self.closes, dtype=np.float64)
        object.__setattr__(self, "closes", closes)
        n, t = closes.shape
        if n != len(self.tickers) or t != len(self.dates):
            raise ValidationError("panel shape does not match tickers/dates")
        if n < 2:
            raise UniverseTooSmallError(f"need at least 2 tickers, have {n}")
        if t < WARMUP + 1:
            raise InsufficientHistoryError(f"need at least {WARMUP + 1} timesteps, have {t}")
        if np.any(closes <= 0.0):
            raise ValidationError("panel contains non-positive closes")

    @property
    def n_stocks(self) -> int:
        return self.closes.shape[0]

    @property
    def n_steps(self) -> int:
        return self.closes.shape[1]


@dataclass(frozen=True)
class FeatureTensor:
    """Per-stock, per-timestep feature vectors plus horizon return labels.

    features[i, t] = [normalized close, MA5, MA10, MA20, MA30], NaN where a
    moving average is not yet defined. labels[i, t] is the horizon-h return
    ratio, NaN outside valid_mask. valid_mask marks anchors where all five
    features and the label are defined (t >= WARMUP and t + h < T).
    """

    features: np.ndarray  # (N, T, 5) float64
    labels: np.ndarray  # (N, T) float64
    valid_mask: np.ndarray  # (N, T) bool
    horizon: int
    norm_factors: np.ndarray  # (N,) float64

    @property
    def n_stocks(self) -> int:
        return self.features.shape[0]

    @property
    def n_steps(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class SequenceBatch:
    """Fixed-length input window per stock, anchored at one labelled step."""

    inputs: np.ndarray  # (N, L, 5) float64
    targets: np.ndarray  # (N,) float64
    anchor_t: int


def ingest_prices(path) -> list[PriceSeries]:
    """Read the price CSV into one PriceSeries per ticker, sorted by ticker.

    Format: header ``date,ticker,close``; ISO dates; rows in any order.
    Raises ParseError (with line number) on malformed rows, ValidationError
    on non-positive prices or duplicate (ticker, date) pairs.
    """
    per_ticker: dict[str, dict[date, float]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        if [c.strip() for c in header] != ["date", "ticker", "close"]:
            raise ParseError(f"expected header 'date,ticker,close', got {header!r}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
            raw_date, ticker, raw_close = (field.strip() for field in row)
            if not _DATE_RE.match(raw_date):
                raise ParseError(f"bad date {raw_date!r}", line=lineno)
            try:
                d = date.fromisoformat(raw_date)
            except ValueError:
                raise ParseError(f"bad date {raw_date!r}", line=lineno) from None
            if not ticker:
                raise ParseError("empty ticker", line=lineno)
            try:
                close = float(raw_close)
            except ValueError:
                raise ParseError(f"bad close {raw_close!r}", line=lineno) from None
            if not np.isfinite(close) or close <= 0.0:
                raise ValidationError(f"line {lineno}: non-positive close {close} for {ticker}")
            bucket = per_ticker.setdefault(ticker, {})
            if d in bucket:
                raise ValidationError(f"line {lineno}: duplicate date {d} for {ticker}")
            bucket[d] = close

    out = []
    for ticker in sorted(per_ticker):
        dates = tuple(sorted(per_ticker[ticker]))
        closes = np.array([per_ticker[ticker][d] for d in dates], dtype=np.float64)
        out.append(PriceSeries(ticker=ticker, dates=dates, closes=closes))
    return out


def align_universe(series: list[PriceSeries], min_length: int = DEFAULT_MIN_LENGTH) -> AlignedPanel:
    """Intersect calendars across tickers with at least ``min_length`` history.

    Tickers are ordered lexicographically. Raises UniverseTooSmallError when
    fewer than two tickers survive the length filter.
    """
    kept = sorted((s for s in series if len(s) >= min_length), key=lambda s: s.ticker)
    if len(kept) < 2:
        raise UniverseTooSmallError(
            f"{len(kept)} ticker(s) with >= {min_length} timesteps; need at least 2"
        )
    common = set(kept[0].dates)
    for s in kept[1:]:
        common &= set(s.dates)
    axis = tuple(sorted(common))
    if len(axis) < WARMUP + 1:
        raise InsufficientHistoryError(
            f"common calendar has {len(axis)} dates; need at least {WARMUP + 1}"
        )
    closes = np.empty((len(kept), len(axis)), dtype=np.float64)
    for i, s in enumerate(kept):
        lookup = dict(zip(s.dates, s.closes))
        closes[i] = [lookup[d] for d in axis]
    return AlignedPanel(tickers=tuple(s.ticker for s in kept), dates=axis, closes=closes)


def _moving_average(values: np.ndarray, span: int) -> np.ndarray:
    """Trailing mean over ``span`` steps along the last axis; NaN before t = span - 1."""
    n, t = values.shape
    out = np.full((n, t), np.nan)
    if t >= span:
        c = np.cumsum(values, axis=1)
        out[:, span - 1] = c[:, span - 1] / span
        out[:, span:] = (c[:, span:] - c[:, :-span]) / span
    return out


def build_features(
    panel: AlignedPanel, horizon: int, norm_window: tuple[int, int] | None = None
) -> FeatureTensor:
    """Build the feature tensor and horizon-h return labels for a panel.

    ``norm_window`` is a half-open [t0, t1) range of panel timesteps; each
    stock's normalization factor is its maximum close over that range (the
    full history when omitted). Moving averages are computed on normalized
    closes so all five features share scale.
    """
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    n, t = panel.closes.shape
    if t < WARMUP + horizon:
        raise InsufficientHistoryError(
            f"need at least {WARMUP + horizon} timesteps for horizon {horizon}, have {t}"
        )
    if norm_window is None:
        norm_window = (0, t)
    w0, w1 = norm_window
    if not (0 <= w0 < w1 <= t):
        raise ValidationError(f"bad norm window {norm_window} for T={t}")

    norm_factors = panel.closes[:, w0:w1].max(axis=1)
    normalized = panel.closes / norm_factors[:, None]

    features = np.full((n, t, FEATURE_DIM), np.nan)
    features[:, :, 0] = normalized
    for col, span in enumerate(MA_SPANS, start=1):
        features[:, :, col] = _moving_average(normalized, span)

    labels = np.full((n, t), np.nan)
    labels[:, : t - horizon] = (panel.closes[:, horizon:] - panel.closes[:, :-horizon]) / panel.closes[
        :, :-horizon
    ]
    step = np.arange(t)
    anchor_ok = (step >= WARMUP) & (step + horizon <= t - 1)
    labels[:, ~anchor_ok] = np.nan
    valid_mask = np.broadcast_to(anchor_ok, (n, t)).copy()

    return FeatureTensor(
        features=features,
        labels=labels,
        valid_mask=valid_mask,
        horizon=horizon,
        norm_factors=norm_factors,
    )


def slice_sequence(feat: FeatureTensor, anchor_t: int, seq_len: int) -> SequenceBatch:
    """Cut the length-``seq_len`` input window ending at ``anchor_t``.

    Every window position must be valid for every stock; otherwise raises
    WindowInvalidError naming the first offending stock index and timestep.
    """
    if seq_len < 1:
        raise ValidationError(f"seq_len must be >= 1, got {seq_len}")
    t0 = anchor_t - seq_len + 1
    if t0 < 0 or anchor_t >= feat.n_steps:
        raise WindowInvalidError(
            f"window [{t0}, {anchor_t}] falls outside the time axis [0, {feat.n_steps})"
        )
    window_mask = feat.valid_mask[:, t0 : anchor_t + 1]
    if not window_mask.all():
        stock, offset = np.argwhere(~window_mask)[0]
        raise WindowInvalidError(
            f"stock {int(stock)} invalid at t={int(t0 + offset)} "
            f"(window [{t0}, {anchor_t}], valid anchors start at {WARMUP})"
        )
    inputs = feat.features[:, t0 : anchor_t + 1, :].copy()
    targets = feat.labels[:, anchor_t].copy()
    return SequenceBatch(inputs=inputs, targets=targets, anchor_t=anchor_t)
