"""Closed-form time dependence of expectation values and variances.

Everything here is Heisenberg-picture: the moments at time t come from the
initial state's coherence parameters plus the drive's phase integrals, with
no state ever evolved. The two equivalent parameterizations are kept side
by side as a cross-check:

    <K>_t  = e^{-i eta_t} <K>_0                      (variance of K constant)
    <N>_t  = <N>_0 - 2 Im(chi_t K)  =  <N>_0 + v_t <C>_0 - u_t <S>_0
    <N^2>_t = <N^2>_0 - 2 Im(chi_t J) - 2 Re(chi_t^2 L) + 2 |chi_t|^2
    Var_N(t) = Var_N(0) + 2 v D_CN - 2 u D_SN + v^2 D_CC + u^2 D_SS
               - 2 u v D_CS

with D_AB the covariances of (C, S, N) at t = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bessel import bessel_zero
from .drives import DriveProtocol, HarmonicDrive, FourierDrive
from .lattice import CoherenceParameters, LatticeState

__all__ = [
    "ObservableSeries",
    "ModeReport",
    "LocalizationReport",
    "expect_K",
    "variance_K",
    "expect_N",
    "variance_N",
    "observable_series",
    "classify_mode",
    "localization_report",
    "expect_N_single_band",
]


def expect_K(coh: CoherenceParameters, protocol: DriveProtocol, t):
    """<K>_t = e^{-i eta_t} <K>_0."""
    return np.exp(-1j * np.asarray(protocol.eta(t))) * coh.K


def variance_K(coh: CoherenceParameters) -> float:
    """|<K^2>_t - <K>_t^2|, which the evolution leaves constant."""
    return coh.var_K


def expect_N(coh: CoherenceParameters, protocol: DriveProtocol, t,
             form: str = "cs"):
    """<N>_t from the initial coherence parameters.

    form="cs" uses <N>_0 + v <C>_0 - u <S>_0; form="k" uses the equivalent
    <N>_0 - 2 Im(chi <K>_0). Both are exposed so tests can pin their
    agreement.
    """
    if form == "cs":
        u, v = protocol.uv(t)
        return coh.n_mean + v * coh.c_mean - u * coh.s_mean
    if form == "k":
        chi = np.asarray(protocol.chi(t))
        return coh.n_mean - 2.0 * np.imag(chi * coh.K)
    raise ValueError(f"unknown form {form!r}")


def variance_N(coh: CoherenceParameters, protocol: DriveProtocol, t,
               form: str = "covariance"):
    """Var_N(t) from the initial coherence parameters.

    form="covariance" uses the (C, S, N) covariance matrix with (u, v);
    form="moments" uses <N^2>_t - <N>_t^2 built from (K, J, L).
    """
    if form == "covariance":
        u, v = protocol.uv(t)
        u = np.asarray(u)
        v = np.asarray(v)
        d = coh.cs_covariances
        return (d[2, 2] + 2.0 * v * d[0, 2] - 2.0 * u * d[1, 2]
                + v * v * d[0, 0] + u * u * d[1, 1] - 2.0 * u * v * d[0, 1])
    if form == "moments":
        chi = np.asarray(protocol.chi(t))
        n2_t = (coh.n2_mean - 2.0 * np.imag(chi * coh.J)
                - 2.0 * np.real(chi * chi * coh.L) + 2.0 * np.abs(chi) ** 2)
        n_t = coh.n_mean - 2.0 * np.imag(chi * coh.K)
        return n2_t - n_t ** 2
    raise ValueError(f"unknown form {form!r}")


@dataclass(frozen=True)
class ObservableSeries:
    """Closed-form moment evolution sampled on a time grid."""

    times: np.ndarray
    eta: np.ndarray
    chi: np.ndarray
    u: np.ndarray
    v: np.ndarray
    expect_K: np.ndarray
    expect_N: np.ndarray
    var_N: np.ndarray
    var_K: np.ndarray


def observable_series(coh: CoherenceParameters, protocol: DriveProtocol,
                      times) -> ObservableSeries:
    times = np.asarray(times, dtype=float)
    u, v = protocol.uv(times)
    return ObservableSeries(
        times=times,
        eta=np.asarray(protocol.eta(times), dtype=float),
        chi=np.asarray(protocol.chi(times), dtype=complex),
        u=np.broadcast_to(u, times.shape).astype(float),
        v=np.broadcast_to(v, times.shape).astype(float),
        expect_K=np.asarray(expect_K(coh, protocol, times), dtype=complex),
        expect_N=np.asarray(expect_N(coh, protocol, times), dtype=float),
        var_N=np.asarray(variance_N(coh, protocol, times), dtype=float),
        var_K=np.full(times.shape, variance_K(coh)),
    )


@dataclass(frozen=True)
class ModeReport:
    """Oscillating vs breathing classification with the raw numbers attached.

    "oscillating": sharp momentum distribution, the packet translates
    rigidly. "breathing": flat momentum distribution, the center freezes
    and the width pulses. Anything in between is "mixed". The thresholds
    are reporting conveniences, not physics; re-threshold from the raw
    covariances if needed.
    """

    mode: str
    c_mean: float
    s_mean: float
    covariances: np.ndarray = field(repr=False)

    @property
    def d_cc(self) -> float:
        return float(self.covariances[0, 0])

    @property
    def d_ss(self) -> float:
        return float(self.covariances[1, 1])

    @property
    def d_cs(self) -> float:
        return float(self.covariances[0, 1])


def classify_mode(coh: CoherenceParameters) -> ModeReport:
    """Classify the initial state per its momentum localization."""
    d = coh.cs_covariances
    cc, ss, cs = d[0, 0], d[1, 1], d[0, 1]
    if cc < 0.05 and ss < 0.05 and abs(cs) < 0.05:
        mode = "oscillating"
    elif (abs(coh.c_mean) < 0.05 and abs(coh.s_mean) < 0.05
          and 0.45 <= cc <= 0.55 and 0.45 <= ss <= 0.55):
        mode = "breathing"
    else:
        mode = "mixed"
    return ModeReport(mode=mode, c_mean=coh.c_mean, s_mean=coh.s_mean,
                      covariances=d.copy())


@dataclass(frozen=True)
class LocalizationReport:
    """Secular-spreading prediction for a resonant drive.

    ``gamma`` is the drift rate of chi (variance grows like
    gamma^2 D_SS t^2 for broad, position-symmetric states); dynamic
    localization is gamma = 0. ``nearest_zeros`` brackets the drive's
    f1/omega between the adjacent Bessel zeros where that happens
    (harmonic drives only). ``degenerate`` marks the trivial f1 = 0 case.
    """

    order: int
    gamma: float
    localized: bool
    degenerate: bool
    var_slope_coefficient: float | None
    nearest_zeros: tuple


def localization_report(protocol: DriveProtocol,
                        coh: CoherenceParameters | None = None) -> LocalizationReport:
    """Evaluate the dynamic-localization condition for a resonant protocol."""
    n = protocol.resonance_order()
    if n is None:
        raise ValueError("localization report requires a resonant periodic protocol")
    gamma = protocol.drift_rate()
    localized = abs(gamma) < 1e-10

    degenerate = False
    if isinstance(protocol, HarmonicDrive):
        degenerate = protocol.f1 == 0.0 and n >= 1
    elif isinstance(protocol, FourierDrive):
        degenerate = all(m == 0.0 for m in protocol.modes) and n >= 1

    nearest: tuple = ()
    if isinstance(protocol, HarmonicDrive) and n <= 50:
        x = abs(protocol.f1 / protocol.omega)
        zeros = []
        for k in range(1, 51):
            zeros.append(bessel_zero(n, k))
            if zeros[-1] > x:
                break
        below = [z for z in zeros if z <= x]
        above = [z for z in zeros if z > x]
        nearest = tuple(([below[-1]] if below else []) + above[:1])

    slope = None if coh is None else gamma ** 2 * float(coh.cs_covariances[1, 1])
    return LocalizationReport(order=n, gamma=gamma, localized=localized,
                              degenerate=degenerate,
                              var_slope_coefficient=slope,
                              nearest_zeros=nearest)


def expect_N_single_band(state: LatticeState, dispersion, protocol: DriveProtocol,
                         t, convention: str = "index"):
    """<N>_t for an arbitrary band, from generalized coherence moments.

    <N>_t = <N>_0 - 2 sum_m m Im(chi_m(t) <K^m>_0) with <K^m>_0 =
    sum_n c*_{n-m} c_n. The weight m is the commutator factor of K^m with N.
    """
    from .propagator import _dispersion_chis  # local import avoids a cycle

    c = state.amplitudes
    p = np.abs(c) ** 2
    n_sites = state.sites.astype(float)
    out = float(np.sum(n_sites * p))
    chis = _dispersion_chis(dispersion, protocol, t, convention)
    for m, chi in chis.items():
        if m == 0:
            continue
        k_m = complex(np.sum(np.conj(c[:-m]) * c[m:])) if m < c.size else 0.0
        out = out - 2.0 * m * np.imag(np.asarray(chi) * k_m)
    return out
