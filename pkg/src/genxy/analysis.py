"""Post-processing of Monte Carlo time series.

Error bars use the integrated autocorrelation time from automatic
windowing and a jackknife over blocks a few ``tau_int`` long.  Order
classification looks for stable double-peaked energy histograms.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.signal import find_peaks

CSV_SCHEMA = "genxy-scan/1"
VERDICT_SCHEMA = "genxy-verdict/1"
SCAN_COLUMNS = (
    "theta", "beta", "n",
    "u", "u_err", "m_xy", "m_xy_err", "m_p", "m_p_err", "rho", "rho_err",
    "C", "V", "tau_u",
)


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class SeriesStats:
    mean: float
    tau_int: float
    error: float
    count: int
    window: int = 0


def autocorrelation(x: np.ndarray) -> np.ndarray:
    """Normalized autocorrelation function via zero-padded FFT."""
    x = np.asarray(x, dtype=float)
    n = x.size
    d = x - x.mean()
    f = np.fft.rfft(d, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n]
    if acf[0] <= 0:
        return np.zeros(n)
    return acf / acf[0]


def integrated_time(x, c: float = 6.0) -> tuple[float, int]:
    """``tau_int = 1/2 + sum_{t=1}^{W} rho(t)`` with the smallest ``W >= c tau(W)``."""
    rho = autocorrelation(x)
    if not np.any(rho):
        return 0.5, 0
    taus = 0.5 + np.cumsum(rho[1:])
    w = np.arange(1, rho.size)
    ok = np.flatnonzero(w >= c * taus)
    k = int(ok[0]) if ok.size else taus.size - 1
    return max(0.5, float(taus[k])), int(w[k])


def jackknife(values: np.ndarray, block: int, estimator=np.mean) -> float:
    """Delete-one-block jackknife error of ``estimator``."""
    values = np.asarray(values, dtype=float)
    nb = values.size // block
    if nb < 2:
        return math.nan
    v = values[: nb * block]
    blocks = v.reshape(nb, block)
    if estimator is np.mean:
        sums = blocks.sum(axis=1)
        loo = (sums.sum() - sums) / ((nb - 1) * block)
    else:
        loo = np.array(
            [estimator(np.concatenate([v[: i * block], v[(i + 1) * block:]])) for i in range(nb)]
        )
    return float(math.sqrt((nb - 1) / nb * np.sum((loo - loo.mean()) ** 2)))


def block_size(tau: float) -> int:
    return max(1, int(math.ceil(4.0 * tau)))


def series_stats(samples: Sequence[float], c: float = 6.0) -> SeriesStats:
    x = np.asarray(samples, dtype=float)
    if x.size < 100:
        raise AnalysisError(f"need at least 100 samples, got {x.size}")
    tau, w = integrated_time(x, c)
    if np.ptp(x) == 0:
        return SeriesStats(float(x[0]), 0.5, 0.0, int(x.size), 0)
    b = block_size(tau)
    if x.size // b < 10:
        b = max(1, x.size // 10)
    return SeriesStats(float(x.mean()), tau, jackknife(x, b), int(x.size), w)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    mass: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def width(self) -> float:
        return float(self.edges[1] - self.edges[0])


def energy_histogram(samples, bins: int = 40) -> Histogram:
    """Unit-mass histogram over the sample range."""
    x = np.asarray(samples, dtype=float)
    if x.size < 1000:
        raise AnalysisError(f"need at least 1000 samples, got {x.size}")
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        hi = lo + 1e-12 * max(1.0, abs(lo))
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    return Histogram(edges, counts / counts.sum())


@dataclass(frozen=True)
class Thresholds:
    valley_ratio: float = 0.5
    min_separation: int = 3
    bins: int = 40
    smoothing: float = 1.0
    prominence: float = 0.1


@dataclass(frozen=True)
class Bimodality:
    bimodal: bool
    ratio: float
    peaks: tuple[float, ...]
    weights: tuple[float, float] = (math.nan, math.nan)


def local_maxima(hist: Histogram, th: Thresholds = Thresholds()) -> np.ndarray:
    h = gaussian_filter1d(hist.mass, th.smoothing, mode="constant") if th.smoothing else hist.mass
    padded = np.concatenate([[0.0], h, [0.0]])
    idx, _ = find_peaks(padded, prominence=th.prominence * h.max())
    return idx - 1


def bimodality(hist: Histogram, th: Thresholds = Thresholds()) -> Bimodality:
    """Valley-to-peak ratio between the two highest separated maxima."""
    h = gaussian_filter1d(hist.mass, th.smoothing, mode="constant") if th.smoothing else hist.mass
    peaks = local_maxima(hist, th)
    if peaks.size < 2:
        return Bimodality(False, 1.0, tuple(hist.centers[peaks]))
    order = peaks[np.argsort(h[peaks])[::-1]]
    first = order[0]
    rest = [p for p in order[1:] if abs(p - first) >= th.min_separation]
    if not rest:
        return Bimodality(False, 1.0, (float(hist.centers[first]),))
    a, b = sorted((first, rest[0]))
    k = a + int(np.argmin(h[a : b + 1]))
    ratio = float(h[k] / min(h[a], h[b]))
    weights = (float(hist.mass[: k + 1].sum()), float(hist.mass[k + 1:].sum()))
    return Bimodality(
        ratio < th.valley_ratio, ratio, (float(hist.centers[a]), float(hist.centers[b])), weights
    )


def stable_bimodality(samples, th: Thresholds = Thresholds()) -> Bimodality:
    """Bimodal overall and in both halves of the series, on a common binning."""
    x = np.asarray(samples, dtype=float)
    full = bimodality(energy_histogram(x, th.bins), th)
    if not full.bimodal:
        return full
    edges = energy_histogram(x, th.bins).edges
    for half in (x[: x.size // 2], x[x.size // 2:]):
        counts, _ = np.histogram(half, bins=edges)
        if not bimodality(Histogram(edges, counts / max(counts.sum(), 1)), th).bimodal:
            return Bimodality(False, full.ratio, full.peaks, full.weights)
    return full


def specific_heat(u, beta: float, site_count: int) -> float:
    """``C = beta^2 N var(u)`` for energy per site ``u``."""
    return float(beta**2 * site_count * np.var(np.asarray(u, dtype=float)))


def binder_energy_cumulant(u) -> float:
    e = np.asarray(u, dtype=float)
    m2 = np.mean(e**2)
    return float(1.0 - np.mean(e**4) / (3.0 * m2**2)) if m2 > 0 else math.nan


@dataclass(frozen=True)
class ScanPoint:
    theta: float
    u: np.ndarray
    site_count: int
    m_xy: Optional[np.ndarray] = None
    m_p: Optional[np.ndarray] = None
    rho: Optional[np.ndarray] = None


@dataclass(frozen=True)
class OrderVerdict:
    classification: str
    theta_star: float
    delta_u: Optional[float]
    bimodality: float
    theta_bimodal: Optional[float]
    binder_min: float
    thresholds: Thresholds = field(default_factory=Thresholds)
    notes: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema"] = VERDICT_SCHEMA
        return d


def classify_order(scan: Sequence[ScanPoint], th: Thresholds = Thresholds()) -> OrderVerdict:
    """First order if some temperature shows a stable double-peaked histogram.

    ``delta_u`` is the peak separation at the most equal-weight bimodal
    temperature, which also refines ``theta_star``.  Without bimodality
    the verdict is second order when the specific-heat maximum is interior
    to the scan, undecided otherwise.
    """
    if not scan:
        raise AnalysisError("empty scan")
    pts = sorted(scan, key=lambda s: s.theta)
    heats = np.array([specific_heat(s.u, 1.0 / s.theta, s.site_count) for s in pts])
    binder = float(min(binder_energy_cumulant(s.u) for s in pts))
    i_max = int(np.argmax(heats))
    theta_c = pts[i_max].theta
    best = None
    best_ratio = 1.0
    for s in pts:
        b = stable_bimodality(s.u, th)
        best_ratio = min(best_ratio, b.ratio)
        if b.bimodal:
            balance = abs(b.weights[0] - b.weights[1])
            if best is None or balance < best[0]:
                best = (balance, s.theta, b)
    if best is not None:
        _, theta_b, b = best
        return OrderVerdict(
            "first_order", theta_b, float(abs(b.peaks[1] - b.peaks[0])), b.ratio, theta_b, binder, th,
            notes=f"specific-heat maximum at theta={theta_c:.6g}",
        )
    interior = 0 < i_max < len(pts) - 1
    return OrderVerdict(
        "second_order" if interior else "undecided", theta_c, None, best_ratio, None, binder, th,
        notes="unimodal at every temperature"
        + ("" if interior else "; specific-heat maximum on the scan edge"),
    )


def scan_row(theta: float, site_count: int, samples: dict) -> dict:
    """One CSV row of means, errors and response functions."""
    beta = 1.0 / theta
    row = {"theta": theta, "beta": beta, "n": int(samples["u"].size)}
    for name in ("u", "m_xy", "m_p", "rho"):
        x = np.asarray(samples.get(name, []), dtype=float)
        if x.size < 100 or np.all(np.isnan(x)):
            row[name] = row[f"{name}_err"] = math.nan
            continue
        st = series_stats(x)
        row[name], row[f"{name}_err"] = st.mean, st.error
        if name == "u":
            row["tau_u"] = st.tau_int
    u = np.asarray(samples["u"], dtype=float)
    row["C"] = specific_heat(u, beta, site_count)
    row["V"] = binder_energy_cumulant(u)
    row.setdefault("tau_u", math.nan)
    return row


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else repr(v)


def rows_to_csv(rows: Sequence[dict], meta: Optional[dict] = None, columns=SCAN_COLUMNS) -> str:
    """CSV text with ``# key: value`` header lines and LF endings."""
    buf = io.StringIO()
    buf.write(f"# schema: {CSV_SCHEMA if columns is SCAN_COLUMNS else 'genxy-table/1'}\n")
    for k, v in (meta or {}).items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) if r.get(c) is not None else "" for c in columns])
    return buf.getvalue()
