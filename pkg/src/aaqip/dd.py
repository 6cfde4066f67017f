"""Dynamical-decoupling sequences and filter-function analysis.

Times are in seconds, angular frequencies in rad/s and pulse amplitudes in
Hz (a pi pulse of duration d has amplitude 1 / (2 d)).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .quadrature import QuadratureError, adaptive_simpson

DEFAULT_TAU = 2e-6
DEFAULT_TAU_PI = 4.3e-6
DEFAULT_WINDOW = (1.0, 1e8)
RTOL = 1e-8


class NegativeDelayError(ValueError):
    def __init__(self, j: int, delay: float):
        super().__init__(f"delay {j} is negative ({delay:.6g} s); pulses overlap")
        self.j = j
        self.delay = delay


@dataclass(frozen=True)
class DDSequence:
    total_T: float
    centers: np.ndarray
    durations: np.ndarray
    amplitudes: np.ndarray
    phases: tuple
    scheme: str = "custom"

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.centers, dtype=float))
        d = np.atleast_1d(np.asarray(self.durations, dtype=float))
        if c.size == 0:
            c, d = np.zeros(0), np.zeros(0)
        a = self.amplitudes
        a = np.full(c.size, np.inf) if a is None else np.atleast_1d(np.asarray(a, dtype=float))
        if not (c.shape == d.shape == a.shape) or len(self.phases) != c.size:
            raise ValueError("centers, durations, amplitudes and phases must have equal length")
        for p in self.phases:
            if p not in ("x", "-x"):
                raise ValueError(f"pulse phase must be 'x' or '-x', got {p!r}")
        if self.total_T <= 0:
            raise ValueError("total duration must be positive")
        if np.any(d < 0):
            raise ValueError("pulse durations must be non-negative")
        if np.any(np.diff(c) <= 0):
            raise ValueError("pulse centers must be strictly increasing")
        if c.size and (c[0] <= 0 or c[-1] >= self.total_T):
            raise ValueError("pulse centers must lie inside (0, T)")
        for arr in (c, d, a):
            arr.flags.writeable = False
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "durations", d)
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "phases", tuple(self.phases))

    @property
    def n_pulses(self) -> int:
        return self.centers.size

    def delays(self) -> np.ndarray:
        """Free intervals between pulse edges, N + 1 values."""
        edges_lo = self.centers - self.durations / 2
        edges_hi = self.centers + self.durations / 2
        return np.diff(np.concatenate([[0.0], np.ravel(np.column_stack([edges_lo, edges_hi])),
                                       [self.total_T]]))[::2]

    def free_segments(self):
        """(start, end, sign) of every interval between pulses."""
        starts = np.concatenate([[0.0], self.centers + self.durations / 2])
        ends = np.concatenate([self.centers - self.durations / 2, [self.total_T]])
        signs = (-1.0) ** np.arange(self.n_pulses + 1)
        return starts, ends, signs

    def signed_free_time(self) -> float:
        s, e, sg = self.free_segments()
        return float(np.sum(sg * (e - s)))

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "T": self.total_T,
                "pulses": [{"t": float(t), "dur": float(d), "amp": float(a), "phase": p}
                           for t, d, a, p in zip(self.centers, self.durations, self.amplitudes,
                                                 self.phases)]}

    @classmethod
    def from_dict(cls, data: dict) -> "DDSequence":
        pulses = data.get("pulses", [])
        return cls(float(data["T"]), [p["t"] for p in pulses], [p["dur"] for p in pulses],
                   [p.get("amp", np.inf) for p in pulses], tuple(p.get("phase", "x") for p in pulses),
                   data.get("scheme", "custom"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _phases(n: int, alternate: bool) -> tuple:
    return tuple("-x" if alternate and j % 2 else "x" for j in range(n))


def _amplitudes(durations: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 1.0 / (2.0 * durations)


def _check_delays(seq: DDSequence, strict: bool) -> DDSequence:
    if strict:
        for j, dl in enumerate(seq.delays(), start=1):
            if dl < -1e-15 * seq.total_T:
                raise NegativeDelayError(j, dl)
    return seq


def free_evolution(T: float) -> DDSequence:
    return DDSequence(T, [], [], [], (), "free")


def make_cpmg(N: int, tau: float = DEFAULT_TAU, tau_pi: float = DEFAULT_TAU_PI,
              alternate_phase: bool = False) -> DDSequence:
    """N repetitions of the tau - pi - tau block; T = N (2 tau + tau_pi)."""
    if N < 1 or tau < 0 or tau_pi <= 0:
        raise ValueError("need N >= 1, tau >= 0 and tau_pi > 0")
    block = 2 * tau + tau_pi
    centers = (np.arange(N) + 0.5) * block
    durations = np.full(N, float(tau_pi))
    return DDSequence(N * block, centers, durations, _amplitudes(durations),
                      _phases(N, alternate_phase), "cpmgp" if alternate_phase else "cpmg")


def udd_instants(N: int, T: float) -> np.ndarray:
    j = np.arange(1, N + 1)
    return T * np.sin(np.pi * j / (2 * N + 2)) ** 2


def make_udd(N: int, T: float, tau_pi: float = DEFAULT_TAU_PI, alternate_phase: bool = False,
             strict: bool = True) -> DDSequence:
    """Pulses centered at T sin^2(pi j / (2N + 2)), all of duration tau_pi.

    With ``strict`` a negative free delay raises NegativeDelayError naming
    the delay index (1 is the leading delay).
    """
    if N < 1 or T <= 0 or tau_pi < 0:
        raise ValueError("need N >= 1, T > 0 and tau_pi >= 0")
    durations = np.full(N, float(tau_pi))
    seq = DDSequence(T, udd_instants(N, T), durations, _amplitudes(durations),
                     _phases(N, alternate_phase), "uddp" if alternate_phase else "udd")
    return _check_delays(seq, strict)


def rudd_durations(N: int, T: float, tau_pi_min: float) -> np.ndarray:
    sin_tp = tau_pi_min / (T * np.sin(np.pi / (N + 1)))
    if not 0 < sin_tp <= 1:
        raise ValueError(f"infeasible pulse-width profile: sin(theta_p) = {sin_tp:.6g} must lie in (0, 1]")
    j = np.arange(1, N + 1)
    return T * np.sin(np.pi * j / (N + 1)) * sin_tp


def make_rudd(N: int, T: float, tau_pi_min: float = DEFAULT_TAU_PI,
              alternate_phase: bool = False, strict: bool = True) -> DDSequence:
    """UDD instants with durations growing toward the middle of the sequence.

    The first and last pulses have the minimum duration ``tau_pi_min``;
    amplitudes keep every pulse a pi rotation.
    """
    if N < 1 or T <= 0 or tau_pi_min <= 0:
        raise ValueError("need N >= 1, T > 0 and tau_pi_min > 0")
    durations = rudd_durations(N, T, tau_pi_min)
    seq = DDSequence(T, udd_instants(N, T), durations, _amplitudes(durations),
                     _phases(N, alternate_phase), "ruddp" if alternate_phase else "rudd")
    return _check_delays(seq, strict)


def make_sequence(scheme: str, N: int, tau: float = DEFAULT_TAU, tau_pi: float = DEFAULT_TAU_PI,
                  alternate_phase: bool = False, strict: bool = True) -> DDSequence:
    """Build a scheme with the total duration of the matching CPMG."""
    T = N * (2 * tau + tau_pi)
    scheme = scheme.lower()
    if scheme == "cpmg":
        return make_cpmg(N, tau, tau_pi, alternate_phase)
    if scheme == "udd":
        return make_udd(N, T, tau_pi, alternate_phase, strict)
    if scheme == "rudd":
        return make_rudd(N, T, tau_pi, alternate_phase, strict)
    raise ValueError(f"unknown scheme {scheme!r}")


def _amplitude_mp(seq: DDSequence, w: float) -> float:
    """|F|^(1/2) in extended precision, for points where doubles cancel."""
    N = seq.n_pulses
    for dps in (50, 100, 200):
        with mp.workdps(dps):
            wm = mp.mpf(float(w))
            amp = 1 + (-1) ** (N + 1) * mp.expj(wm * mp.mpf(seq.total_T))
            for j, (t, d) in enumerate(zip(seq.centers, seq.durations), start=1):
                amp += 2 * (-1) ** j * mp.expj(wm * mp.mpf(float(t))) * mp.cos(wm * mp.mpf(float(d)) / 2)
            mag = abs(amp)
            if mag > mp.mpf(10) ** (15 - dps) * (2 + 2 * N) or mag == 0:
                return float(mag)
    return float(mag)


def filter_function(seq: DDSequence, omega, precise: bool = True) -> np.ndarray:
    """|1 + (-1)^(N+1) e^{i w T} + 2 sum_j (-1)^j e^{i w t_j} cos(w d_j / 2)|^2.

    Each pulse uses its own duration d_j.  When the terms cancel to below
    1e-3 of their magnitude the sum is redone in extended precision, so
    the result keeps its relative accuracy deep in the stop band.
    """
    w0 = np.asarray(omega, dtype=float)
    w = np.atleast_1d(w0)
    N = seq.n_pulses
    j = np.arange(1, N + 1)
    wf = w[..., None]
    c = np.cos(wf * seq.durations / 2)
    terms = (-1.0) ** j * np.exp(1j * wf * seq.centers) * c
    amp = 1 + (-1) ** (N + 1) * np.exp(1j * w * seq.total_T) + 2 * terms.sum(axis=-1)
    out = np.abs(amp) ** 2
    if precise and N:
        scale = 2 + 2 * np.abs(c).sum(axis=-1)
        bad = (np.abs(amp) < 1e-3 * scale) & (w != 0)
        for idx in zip(*np.nonzero(bad)):
            out[idx] = _amplitude_mp(seq, w[idx]) ** 2
    return out.reshape(w0.shape)


def filter_over_omega2(seq: DDSequence, omega) -> np.ndarray:
    """F(w) / w^2 with the finite w -> 0 limit (signed free time squared)."""
    w = np.asarray(omega, dtype=float)
    out = np.empty_like(w)
    small = np.abs(w) * seq.total_T < 1e-4
    big = ~small
    out[big] = filter_function(seq, w[big], precise=False) / w[big] ** 2
    out[small] = seq.signed_free_time() ** 2
    return out


@dataclass(frozen=True)
class SpectralDensity:
    """Bath spectrum S(w).

    kinds: gaussian (width sigma), lorentzian (width gamma), sharp-cutoff
    (cutoff wc), tabulated (grid of (w, S) pairs, linear interpolation).
    """

    kind: str
    amplitude: float = 1.0
    width: float = 1.0
    grid: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "lorentzian", "sharp-cutoff", "tabulated", "white"):
            raise ValueError(f"unknown spectral density {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError("spectral density amplitude must be non-negative")
        if self.kind == "tabulated":
            g = np.asarray(self.grid, dtype=float)
            if g.ndim != 2 or g.shape[1] != 2 or np.any(np.diff(g[:, 0]) <= 0) or np.any(g[:, 1] < 0):
                raise ValueError("tabulated spectrum needs increasing w and non-negative S")
        elif self.width <= 0:
            raise ValueError("spectral width must be positive")

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        a = self.amplitude
        if self.kind == "gaussian":
            return a * np.exp(-0.5 * (w / self.width) ** 2)
        if self.kind == "lorentzian":
            return a * self.width ** 2 / (w ** 2 + self.width ** 2)
        if self.kind == "sharp-cutoff":
            return np.where(np.abs(w) <= self.width, a, 0.0)
        if self.kind == "white":
            return np.full_like(w, a)
        g = np.asarray(self.grid, dtype=float)
        return a * np.interp(w, g[:, 0], g[:, 1], left=0.0, right=0.0)

    def breakpoints(self) -> tuple:
        if self.kind == "sharp-cutoff":
            return (self.width,)
        if self.kind == "tabulated":
            return tuple(np.asarray(self.grid, dtype=float)[:, 0])
        return ()


def _integrate(seq, weight, lo, hi, rtol, breakpoints=()):
    f = lambda w: weight(w) * filter_over_omega2(seq, w)
    # keep panels narrower than a quarter period of the slowest oscillation
    width = 0.5 * np.pi / seq.total_T
    try:
        return adaptive_simpson(f, lo, hi, rtol=rtol, atol=1e-300, breakpoints=breakpoints,
                                max_width=width)
    except QuadratureError as exc:
        raise QuadratureError(f"{seq.scheme} sequence, N={seq.n_pulses}: {exc}") from None


def ff_area(seq: DDSequence, band=DEFAULT_WINDOW, rtol: float = RTOL) -> float:
    lo, hi = band
    if lo == hi:
        return 0.0
    if not 0 <= lo < hi:
        raise ValueError("band must satisfy 0 <= lo < hi")
    return _integrate(seq, lambda w: np.ones_like(w), lo, hi, rtol).value


def coherence_decay(seq: DDSequence, S: SpectralDensity, window=DEFAULT_WINDOW,
                    rtol: float = RTOL) -> tuple[float, float]:
    """chi = (2 / pi) int S(w) F(w) / w^2 dw and W = exp(-chi)."""
    if S.amplitude == 0:
        return 0.0, 1.0
    r = _integrate(seq, S, window[0], window[1], rtol, S.breakpoints())
    chi = 2 / np.pi * r.value
    return chi, float(np.exp(-chi))
