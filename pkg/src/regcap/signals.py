"""Regulation-signal trajectories: parsing, rearrangement, aggregation.

A trajectory is one hour of dimensionless dispatch ratios in [-1, 1],
one per 2-second interval (1800 samples by default; the count is a
parameter so tests can use tiny hours). All operations are pure.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

DEFAULT_SAMPLES_PER_HOUR = 1800


class SignalError(ValueError):
    pass


@dataclass(frozen=True)
class SignalTrajectory:
    """One hour of regulation signals."""

    samples: np.ndarray
    hour_id: str = ""
    samples_per_hour: int = DEFAULT_SAMPLES_PER_HOUR

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", arr)
        if arr.ndim != 1 or arr.size != self.samples_per_hour:
            raise SignalError(
                f"hour {self.hour_id!r}: expected {self.samples_per_hour} "
                f"samples, got {arr.size}")
        if np.any(np.abs(arr) > 1.0 + 1e-12):
            raise SignalError(f"hour {self.hour_id!r}: sample out of [-1, 1]")

    @property
    def delta_d(self):
        """Interval length in hours."""
        return 1.0 / self.samples_per_hour


@dataclass(frozen=True)
class HourlyAggregate:
    """Two-block approximation of an hour of signals plus summaries.

    dt_up/dt_dn are in hours and sum to exactly 1; s_up >= 0 >= s_dn.
    """

    s_up: float
    s_dn: float
    dt_up: float
    dt_dn: float
    mileage: float
    s_first: float
    s_mean: float
    hour_id: str = ""


def parse_trajectories(source, samples_per_hour: int = DEFAULT_SAMPLES_PER_HOUR):
    """Read the signals CSV (`hour_id,step,signal`) into trajectories.

    Rows for an hour must be contiguous, 1-based in `step`, and complete;
    partial hours are rejected.
    """
    if isinstance(source, (bytes, bytearray)):
        source = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        source = io.StringIO(source)
    elif hasattr(source, "read") and isinstance(source.read(0), bytes):
        source = io.TextIOWrapper(source, encoding="utf-8")
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or [h.strip() for h in header[:3]] != ["hour_id", "step", "signal"]:
        raise SignalError("missing or malformed header; expected hour_id,step,signal")
    out = []
    cur_id = None
    cur = []
    seen = set()

    def _close():
        if cur_id is None:
            return
        if len(cur) != samples_per_hour:
            raise SignalError(f"incomplete hour {cur_id!r}: {len(cur)} rows")
        out.append(SignalTrajectory(np.array(cur), cur_id, samples_per_hour))

    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) < 3:
            raise SignalError(f"line {lineno}: malformed row")
        hid = row[0].strip()
        try:
            step = int(row[1])
            val = float(row[2])
        except ValueError as exc:
            raise SignalError(f"line {lineno}: malformed row") from exc
        if abs(val) > 1.0:
            raise SignalError(f"line {lineno}: signal {val} out of [-1, 1]")
        if hid != cur_id:
            _close()
            if hid in seen:
                raise SignalError(f"line {lineno}: hour {hid!r} not contiguous")
            seen.add(hid)
            cur_id = hid
            cur = []
        if step != len(cur) + 1:
            raise SignalError(f"line {lineno}: step {step} out of order in hour {hid!r}")
        cur.append(val)
    _close()
    return out


def rearrange(traj: SignalTrajectory) -> SignalTrajectory:
    """Stable partition: nonnegative samples first, negatives after."""
    s = traj.samples
    up = s[s >= 0.0]
    dn = s[s < 0.0]
    return SignalTrajectory(np.concatenate([up, dn]), traj.hour_id,
                            traj.samples_per_hour)


def mileage(traj: SignalTrajectory) -> float:
    """Absolute summation of signal movement, no normalization."""
    return float(np.sum(np.abs(np.diff(traj.samples))))


def aggregate(traj: SignalTrajectory) -> HourlyAggregate:
    """Collapse an hour into the four-parameter aggregate model.

    Samples equal to zero count as regulation-up, making the partition
    total and deterministic. Empty groups give a 0 mean with dt = 0.
    """
    s = traj.samples
    n = traj.samples_per_hour
    up_mask = s >= 0.0
    d_star = int(np.count_nonzero(up_mask))
    s_up = float(s[up_mask].mean()) if d_star else 0.0
    s_dn = float(s[~up_mask].mean()) if d_star < n else 0.0
    dt_up = d_star / n
    return HourlyAggregate(
        s_up=s_up,
        s_dn=s_dn,
        dt_up=dt_up,
        dt_dn=1.0 - dt_up,
        mileage=mileage(traj),
        s_first=float(s[0]),
        s_mean=float(s.mean()),
        hour_id=traj.hour_id,
    )


def unconstrained_energy(traj: SignalTrajectory, p_grid_base: float, r: float,
                         eta_c: float, eta_d: float) -> float:
    """Resource-side cumulative energy (kWh) with no power/energy limits.

    Grid power each step is y = base - s*r; charge passes through eta_c,
    discharge through 1/eta_d.
    """
    if not (0.0 < eta_c <= 1.0 and 0.0 < eta_d <= 1.0):
        raise ValueError("efficiencies must be in (0, 1]")
    y = p_grid_base - traj.samples * r
    inc = eta_c * np.maximum(y, 0.0) + np.minimum(y, 0.0) / eta_d
    return float(np.sum(inc) * traj.delta_d)


def synthesize_trajectories(n_hours: int, seed: int,
                            samples_per_hour: int = DEFAULT_SAMPLES_PER_HOUR,
                            mean_std: float = 0.05, ar: float = 0.9,
                            noise_std: float = 0.30):
    """Synthetic Gaussian-ish signal archive (no market data shipped).

    Each hour draws a Gaussian hourly level and an AR(1) path around it,
    clipped to [-1, 1]; hourly means come out approximately Gaussian.
    Defaults mimic energy-neutral regulation dispatch: wide 2-second
    swings but hourly means concentrated near zero.
    """
    rng = np.random.default_rng(seed)
    out = []
    for h in range(n_hours):
        level = rng.normal(0.0, mean_std)
        eps = rng.normal(0.0, noise_std, size=samples_per_hour)
        path = np.empty(samples_per_hour)
        x = 0.0
        # lfilter-style AR(1); loop kept simple, n is small
        fac = np.sqrt(1.0 - ar * ar)
        for d in range(samples_per_hour):
            x = ar * x + fac * eps[d]
            path[d] = x
        sig = np.clip(level + path, -1.0, 1.0)
        out.append(SignalTrajectory(sig, f"h{h:05d}", samples_per_hour))
    return out


def write_signals_csv(trajs, fh):
    """Inverse of parse_trajectories, for fixtures and round-trips."""
    w = csv.writer(fh)
    w.writerow(["hour_id", "step", "signal"])
    for t in trajs:
        for d, v in enumerate(t.samples, start=1):
            w.writerow([t.hour_id, d, f"{v:.9g}"])
