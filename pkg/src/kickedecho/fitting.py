"""Decay-law fitting and classification for fidelity series.

Three model families cover the observed phenomenology:

* gaussian        F(t) = exp(-gamma * t^2)          fit on (t^2, -ln F)
* power_law       F(t) = c * t^(-alpha)             fit on (ln t, ln F)
* exponential     F(t) = c * exp(-beta * t)         fit on (t, ln F)

plus the two-stage composites gaussian->exponential and power_law->gaussian
joined at a fitted breakpoint.  All fits are ordinary least squares in the
linearizing coordinates, so they are deterministic and need no starting
values.  Fit windows exclude saturation plateaus and anything at or past the
first fidelity revival.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .echo import SaturationEstimate, detect_recurrences, saturation_estimate
from .numerics import linear_least_squares

# Acceptance thresholds on r^2 in the linearized coordinates.
SINGLE_MODEL_R2 = 0.98
STAGE_R2 = 0.95
UNDETERMINED_FLOOR = 0.9

# A series that never leaves [FROZEN_BAND, 1] is oscillatory_frozen.
FROZEN_BAND = 0.9

# Fit-window construction.  Power-law and exponential regimes are asymptotic,
# so their default windows are chosen from a short deterministic ladder of
# onset levels by best fit; the gaussian window starts at t=1 by definition.
ONSET_LADDER = (0.9, 0.8, 0.7, 0.6, 0.5)
GAUSSIAN_FLOOR = 0.01      # gaussian window closes where F first drops below
PLATEAU_MULTIPLE = 5.0     # windows close at PLATEAU_MULTIPLE * saturation
PLATEAU_CAP = 0.5          # a floor this high is not saturation, ignore it
RECURRENCE_THRESHOLD = 0.5
MIN_WINDOW_POINTS = 5
BREAKPOINT_CANDIDATES = 20
_R2_TIE = 1e-9             # r^2 improvements below this do not switch windows

_SINGLE_MODELS = ("gaussian", "power_law", "exponential")
_STAGE_PAIRS = (
    ("two_stage_gaussian_exponential", "gaussian", "exponential"),
    ("two_stage_power_gaussian", "power_law", "gaussian"),
)


@dataclass(frozen=True)
class DecayFit:
    """One fitted decay law over a half-open time window [start, end)."""

    model: str
    params: dict
    window: tuple[int, int]
    r_squared: float


@dataclass(frozen=True)
class DecayClassification:
    """Outcome of the model-selection cascade for one fidelity series."""

    label: str
    stages: tuple[DecayFit, ...]
    saturation: SaturationEstimate
    recurrence_times: np.ndarray = field(repr=False)
    breakpoint: int | None = None


@dataclass(frozen=True)
class ScalingFit:
    """Power-law or linear scaling of a rate against a parameter.

    In 'log' mode the fit is ln(rate) ~ exponent * ln(x) + intercept and
    prefactor = e^intercept.  In 'linear' mode the fit is rate ~ slope * x,
    reported with exponent fixed at 1 and prefactor = slope.
    """

    mode: str
    exponent: float
    prefactor: float
    intercept: float
    r_squared: float


def _as_series(series) -> np.ndarray:
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 1 or arr.size < 8:
        raise ValueError("fidelity series must be 1-d with at least 8 samples")
    return arr


def _first_below(series: np.ndarray, level: float, start: int = 0) -> int | None:
    below = np.nonzero(series[start:] < level)[0]
    return None if below.size == 0 else start + int(below[0])


def _tail_floor(series: np.ndarray) -> float:
    """5x the late-time mean when that is low enough to be a tail at all."""
    floor = PLATEAU_MULTIPLE * saturation_estimate(series).value
    return floor if floor < PLATEAU_CAP else 0.0


def _plateau_floor(series: np.ndarray) -> float:
    """Like :func:`_tail_floor`, but only when the tail has actually flattened.

    A slowly decaying tail (a power law, say) has a low late-time mean without
    being saturated, and truncating fits there would cut off exactly the
    asymptotic region of interest.  An exhausted tail instead fluctuates with
    spread comparable to its level, or shows no net trend at all.  The floor
    is therefore refused only when the final quarter is both smooth
    (scatter below half its mean) and significantly trending (net change of a
    line fit above twice the residual scatter): that signature is a decaying
    signal, everything else is saturation.
    """
    floor = _tail_floor(series)
    if floor == 0.0:
        return 0.0
    tail = series[-(series.size // 4):]
    mean = float(tail.mean())
    if mean <= 0.0 or float(tail.std()) > 0.5 * mean:
        return floor
    t = np.arange(tail.size, dtype=float)
    try:
        line = linear_least_squares(t, tail)
    except ValueError:
        return floor
    drift = abs(line.slope) * (tail.size - 1)
    scatter = float(np.sqrt(np.mean((tail - line.slope * t - line.intercept) ** 2)))
    return floor if drift <= 2.0 * scatter else 0.0


def _analysis_end(series: np.ndarray) -> int:
    """End (exclusive) of the fittable region: before saturation and revivals."""
    end = series.size
    floor = _plateau_floor(series)
    if floor > 0.0:
        hit = _first_below(series, floor)
        if hit is not None:
            end = min(end, hit)
    revivals = detect_recurrences(series, RECURRENCE_THRESHOLD)
    if revivals.size:
        onset = int(np.argmin(series[: revivals[0] + 1]))
        end = min(end, onset + 1)
    return end


def _window_fit(model: str, series: np.ndarray, start: int, end: int) -> DecayFit:
    if not 0 <= start < end <= series.size:
        raise ValueError(f"window [{start}, {end}) out of range for series of {series.size}")
    t = np.arange(start, end, dtype=float)
    f = series[start:end]
    keep = f > 0.0
    t, f = t[keep], f[keep]
    if t.size < MIN_WINDOW_POINTS:
        raise ValueError(f"window [{start}, {end}) leaves too few points to fit")
    if model == "gaussian":
        fit = linear_least_squares(t**2, -np.log(f))
        params = {"gamma": fit.slope, "intercept": fit.intercept}
    elif model == "power_law":
        if start < 1:
            raise ValueError("power-law window must start at t >= 1")
        fit = linear_least_squares(np.log(t), np.log(f))
        params = {"prefactor": float(np.exp(fit.intercept)), "exponent": -fit.slope}
    elif model == "exponential":
        fit = linear_least_squares(t, np.log(f))
        params = {"prefactor": float(np.exp(fit.intercept)), "rate": -fit.slope}
    else:
        raise ValueError(f"unknown decay model {model!r}")
    return DecayFit(model, params, (start, end), fit.r_squared)


def _gaussian_window(series: np.ndarray, end: int) -> tuple[int, int]:
    # The 5x-saturation cutoff applies here even when the tail is still
    # drifting; it just trims the deep tail off the early-decay fit.
    start = 1
    cutoff = max(_tail_floor(series), GAUSSIAN_FLOOR)
    hit = _first_below(series, cutoff, start)
    return start, min(end, hit if hit is not None else series.size)


def _ladder_fit(model: str, series: np.ndarray, end: int) -> DecayFit:
    """Best fit of an asymptotic model over the onset-level ladder.

    The window opens where the series first drops below each ladder level and
    always closes at `end`; the window with the highest r^2 wins, with ties
    (within _R2_TIE) going to the earliest onset.  For a series that follows
    the model exactly every candidate fits perfectly and the widest window is
    reported.
    """
    best: DecayFit | None = None
    seen = set()
    for level in ONSET_LADDER:
        start = _first_below(series, level, 1)
        if start is None or start in seen:
            continue
        seen.add(start)
        try:
            fit = _window_fit(model, series, start, end)
        except ValueError:
            continue
        if best is None or fit.r_squared > best.r_squared + _R2_TIE:
            best = fit
    if best is None:
        raise ValueError(f"no usable {model} window before t = {end}")
    return best


def fit_gaussian(series, window: tuple[int, int] | None = None) -> DecayFit:
    """Fit F = exp(-gamma t^2 - intercept); params carry gamma and the intercept.

    The default window runs from t = 1 until F first drops below
    max(5 * saturation, 0.01), and never into a revival.  The intercept is a
    diagnostic; for a clean gaussian decay it sits near zero.
    """
    series = _as_series(series)
    if window is None:
        window = _gaussian_window(series, _analysis_end(series))
    return _window_fit("gaussian", series, *window)


def fit_power_law(series, window: tuple[int, int] | None = None) -> DecayFit:
    """Fit F = prefactor * t^(-exponent) on (ln t, ln F).

    A power law is an asymptotic statement, so the default window is chosen
    by :func:`_ladder_fit`: it closes at the end of the pre-saturation,
    pre-revival region and opens at the best-fitting of a short ladder of
    onset levels.
    """
    series = _as_series(series)
    if window is None:
        return _ladder_fit("power_law", series, _analysis_end(series))
    return _window_fit("power_law", series, *window)


def fit_exponential(series, window: tuple[int, int] | None = None) -> DecayFit:
    """Fit F = prefactor * exp(-rate * t) on (t, ln F).

    The default window mirrors :func:`fit_power_law`; when used as the second
    stage of a composite fit the breakpoint search supplies the window.
    """
    series = _as_series(series)
    if window is None:
        return _ladder_fit("exponential", series, _analysis_end(series))
    return _window_fit("exponential", series, *window)


def _combined_r2(first: DecayFit, second: DecayFit) -> float:
    n1 = first.window[1] - first.window[0]
    n2 = second.window[1] - second.window[0]
    return (n1 * first.r_squared + n2 * second.r_squared) / (n1 + n2)


_SMOOTH_HALF_WIDTH = 2
_STAGE_DEPTH_FRACTIONS = (0.0, 0.25, 1.0 / 3.0, 0.5)


def _log_smooth(series: np.ndarray, half_width: int = _SMOOTH_HALF_WIDTH) -> np.ndarray:
    """Centered moving average of ln F, shrinking at the array edges.

    Quasi-integrable series oscillate by factors of several around a clean
    decay envelope (the initial state straddles an orbit of the underlying
    map).  Stage decomposition works on this envelope; fitting the raw points
    would reject visually unambiguous composite decays.  The filter is linear
    in ln F, so window slopes, and with them fitted rates, are unbiased.
    """
    y = np.log(np.maximum(series, 1e-300))
    padded = np.concatenate([np.zeros(1), np.cumsum(y)])
    n = y.size
    idx = np.arange(n)
    lo = np.maximum(0, idx - half_width)
    hi = np.minimum(n, idx + half_width + 1)
    return np.exp((padded[hi] - padded[lo]) / (hi - lo))


def _refine_tail_stage(model: str, smoothed: np.ndarray, breakpoint: int, end: int) -> DecayFit:
    """Re-open the second-stage window at the best-fitting asymptotic depth.

    The contiguous window starting right at the breakpoint mixes the
    crossover region into the asymptotic law.  Candidate onsets at fixed
    fractions of the stage's logarithmic drop move the window into the tail
    when, and only when, that measurably improves the fit; clean composite
    series keep the breakpoint onset exactly.  Earliest onset wins ties.
    """
    base = _window_fit(model, smoothed, breakpoint, end)
    top = np.log(max(smoothed[breakpoint], 1e-300))
    span = top - np.log(max(smoothed[end - 1], 1e-300))
    if span <= 0.0:
        return base
    best = base
    for fraction in _STAGE_DEPTH_FRACTIONS[1:]:
        level = np.exp(top - fraction * span)
        onset = _first_below(smoothed[:end], level, breakpoint)
        if onset is None or onset >= end - MIN_WINDOW_POINTS:
            continue
        try:
            fit = _window_fit(model, smoothed, onset, end)
        except ValueError:
            continue
        if fit.r_squared > best.r_squared + _R2_TIE:
            best = fit
    return best


def _best_breakpoint(series, model1, model2, start, end):
    """Best (fit1, fit2, breakpoint) by combined r^2; earliest wins ties.

    Coarse scan over BREAKPOINT_CANDIDATES evenly spaced times, then an
    exhaustive local pass one coarse step around the winner.
    """
    lo = start + MIN_WINDOW_POINTS
    hi = end - MIN_WINDOW_POINTS
    if hi <= lo:
        return None
    coarse = np.unique(np.linspace(lo, hi, BREAKPOINT_CANDIDATES).astype(int))
    best = None

    def consider(b: int):
        nonlocal best
        try:
            fit1 = _window_fit(model1, series, start, b)
            fit2 = _window_fit(model2, series, b, end)
        except ValueError:
            return
        score = _combined_r2(fit1, fit2)
        if best is None or score > best[0]:
            best = (score, b, fit1, fit2)

    for b in coarse:
        consider(int(b))
    if best is None:
        return None
    step = max(1, int(np.ceil((hi - lo) / max(1, BREAKPOINT_CANDIDATES - 1))))
    for b in range(max(lo, best[1] - step), min(hi, best[1] + step) + 1):
        if b not in coarse:
            consider(b)
    return best


def classify_decay(series) -> DecayClassification:
    """Assign a decay label and its stage fits to a fidelity series.

    Cascade: a series confined to [0.9, 1] is `oscillatory_frozen`; otherwise
    the three single models compete first (accepted at r^2 >= 0.98 on the
    pre-saturation, pre-revival window), then the two-stage composites
    (accepted at r^2 >= 0.95 per stage, breakpoint chosen by combined r^2).
    If no fit reaches its gate, the best candidate above 0.9 supplies the
    label; below that the series is `undetermined`.

    Single-model fits run on the raw series.  Stage decomposition runs on an
    oscillation-smoothed copy (see :func:`_log_smooth`), and the asymptotic
    second stage is refined into the tail (:func:`_refine_tail_stage`).
    """
    series = _as_series(series)
    sat = saturation_estimate(series)
    revivals = detect_recurrences(series, RECURRENCE_THRESHOLD)
    if series.min() >= FROZEN_BAND:
        return DecayClassification("oscillatory_frozen", (), sat, revivals)

    end = _analysis_end(series)
    candidates = []  # (score, order, label, stages, breakpoint)
    order = 0
    for model in _SINGLE_MODELS:
        try:
            if model == "gaussian":
                fit = _window_fit(model, series, *_gaussian_window(series, end))
            else:
                fit = _ladder_fit(model, series, end)
        except ValueError:
            continue
        candidates.append((fit.r_squared, order, model, (fit,), None))
        order += 1

    best_single = max(candidates, key=lambda c: (c[0], -c[1]), default=None)
    if best_single is not None and best_single[0] >= SINGLE_MODEL_R2:
        _, _, label, stages, _ = best_single
        return DecayClassification(label, stages, sat, revivals)

    smoothed = _log_smooth(series)
    for label, model1, model2 in _STAGE_PAIRS:
        if model1 == "gaussian":
            start = 1
        else:
            start = _first_below(series, ONSET_LADDER[0], 1)
            if start is None:
                continue
        found = _best_breakpoint(smoothed, model1, model2, start, end)
        if found is None:
            continue
        score, breakpoint, fit1, fit2 = found
        fit2 = _refine_tail_stage(model2, smoothed, breakpoint, end)
        if fit1.r_squared >= STAGE_R2 and fit2.r_squared >= STAGE_R2:
            return DecayClassification(label, (fit1, fit2), sat, revivals, breakpoint)
        candidates.append((_combined_r2(fit1, fit2), order, label, (fit1, fit2), breakpoint))
        order += 1

    best = max(candidates, key=lambda c: (c[0], -c[1]), default=None)
    if best is not None and best[0] >= UNDETERMINED_FLOOR:
        score, _, label, stages, breakpoint = best
        return DecayClassification(label, stages, sat, revivals, breakpoint)
    return DecayClassification("undetermined", (), sat, revivals)


def scaling_exponent(x, rates, mode: str = "log") -> ScalingFit:
    """Scaling of fitted rates against a control parameter.

    Args:
        x: parameter values (perturbation sizes, spins, ...), at least 3.
        rates: fitted decay rates, same length.
        mode: 'log' for a power law rate ~ prefactor * x^exponent, 'linear'
            for rate ~ prefactor * x.
    """
    x = np.asarray(x, dtype=float)
    rates = np.asarray(rates, dtype=float)
    if x.shape != rates.shape or x.ndim != 1 or x.size < 3:
        raise ValueError("need matching 1-d arrays of at least 3 points")
    if mode == "log":
        if np.any(x <= 0.0) or np.any(rates <= 0.0):
            raise ValueError("log-mode scaling needs positive parameters and rates")
        fit = linear_least_squares(np.log(x), np.log(rates))
        return ScalingFit("log", fit.slope, float(np.exp(fit.intercept)), fit.intercept, fit.r_squared)
    if mode == "linear":
        fit = linear_least_squares(x, rates)
        return ScalingFit("linear", 1.0, fit.slope, fit.intercept, fit.r_squared)
    raise ValueError(f"unknown scaling mode {mode!r}, expected 'log' or 'linear'")


def gamma_g_normalized(gamma: float, j: float, delta: float) -> float:
    """Gaussian rate with the spin and squared perturbation scaled out."""
    if j <= 0:
        raise ValueError("spin must be positive")
    if delta == 0.0:
        raise ValueError("perturbation must be nonzero")
    return float(gamma) / (float(j) * float(delta) ** 2)
