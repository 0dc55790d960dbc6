"""Harmonic retrieval on difference signals and assembly of surface data.

Frequencies come from a matrix pencil on the uniformly sampled series
(Hankel matrix, rank cut by singular values), amplitudes from a linear least
squares fit with the frequencies held fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import Statistics, complex_from_json, complex_to_json
from .diag import BogoliubovDecomposition, anchor_gauge
from .errors import CollinearProbes, InconsistentSurface, ParseError, RankDeficient

NEG_P_TOL = 1e-6


@dataclass(frozen=True)
class SpectralData:
    freqs: np.ndarray
    amps: np.ndarray
    delta_c: complex | None = None
    residual: float = 0.0

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        a = np.asarray(self.amps, dtype=np.complex128)
        order = np.argsort(f)
        object.__setattr__(self, "freqs", f[order])
        object.__setattr__(self, "amps", a[order])

    @property
    def modes(self):
        return list(zip(self.freqs.tolist(), self.amps.tolist()))

    def to_dict(self) -> dict:
        return {
            "delta_c": None if self.delta_c is None else complex_to_json(self.delta_c),
            "modes": [{"freq": float(f), "amp": complex_to_json(a)} for f, a in self.modes],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SpectralData":
        try:
            dc = doc.get("delta_c")
            modes = doc["modes"]
            return cls(
                np.array([m["freq"] for m in modes], dtype=float),
                np.array([complex_from_json(m["amp"]) for m in modes]),
                None if dc is None else complex_from_json(dc),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed spectral document: {exc}") from exc


@dataclass(frozen=True)
class SurfaceData:
    """Energies plus rows <l|E_k>, <l+N|E_k> for every accessed site l."""

    energies: np.ndarray
    rows: dict = field(default_factory=dict)
    statistics: Statistics = Statistics.FERMION
    anchor: int = 1

    def __post_init__(self):
        object.__setattr__(self, "energies", np.asarray(self.energies, dtype=float))
        object.__setattr__(self, "statistics", Statistics.parse(self.statistics))
        rows = {int(k): (np.asarray(u, dtype=np.complex128), np.asarray(v, dtype=np.complex128)) for k, (u, v) in self.rows.items()}
        object.__setattr__(self, "rows", rows)

    @property
    def n_sites(self) -> int:
        return self.energies.shape[0] // 2

    @property
    def eps(self) -> int:
        return self.statistics.eps

    @property
    def sites(self):
        return sorted(self.rows)

    def to_dict(self) -> dict:
        return {
            "statistics": self.statistics.value,
            "anchor": self.anchor,
            "energies": [float(e) for e in self.energies],
            "rows": {
                str(s): {"upper": [complex_to_json(z) for z in u], "lower": [complex_to_json(z) for z in v]}
                for s, (u, v) in sorted(self.rows.items())
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SurfaceData":
        try:
            rows = {
                int(s): (
                    np.array([complex_from_json(z) for z in r["upper"]]),
                    np.array([complex_from_json(z) for z in r["lower"]]),
                )
                for s, r in doc["rows"].items()
            }
            out = cls(np.array(doc["energies"], dtype=float), rows, doc["statistics"], int(doc.get("anchor", 1)))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"malformed surface document: {exc}") from exc
        if any(u.shape != out.energies.shape or v.shape != out.energies.shape for u, v in out.rows.values()):
            raise ParseError("surface rows must have one entry per energy")
        return out


def surface_from_decomposition(d: BogoliubovDecomposition, sites=(1,), anchor: int | None = None) -> SurfaceData:
    """Exact surface data in the anchor gauge (anchor entries >= 0)."""
    anchor = sites[0] if anchor is None else anchor
    g = anchor_gauge(d, anchor)
    n = d.n_sites
    rows = {s: (g.eigvecs[s - 1].copy(), g.eigvecs[s - 1 + n].copy()) for s in sites}
    return SurfaceData(d.energies.copy(), rows, d.statistics, anchor)


# ------------------------------------------------------------ harmonic retrieval

def _uniform_step(times: np.ndarray) -> float:
    dt = np.diff(times)
    if dt.size == 0:
        raise ValueError("need at least two samples")
    step = dt.mean()
    if np.max(np.abs(dt - step)) > 1e-9 * max(abs(step), 1.0):
        raise ValueError("samples must be uniformly spaced")
    return float(step)


def fit_amplitudes(series, times, freqs) -> np.ndarray:
    basis = np.exp(-1j * np.outer(np.asarray(times, dtype=float), np.asarray(freqs, dtype=float)))
    amps, *_ = np.linalg.lstsq(basis, np.asarray(series, dtype=np.complex128), rcond=None)
    return amps


def _rms(series, times, freqs, amps) -> float:
    return float(np.sqrt(np.mean(np.abs(series - kernels.synthesize(freqs, amps, times)) ** 2)))


def pencil_frequencies(series, times, max_modes: int, tol: float = 1e-10, noise_sigma: float = 0.0) -> np.ndarray:
    series = np.asarray(series, dtype=np.complex128)
    times = np.asarray(times, dtype=float)
    step = _uniform_step(times)
    n = series.size
    pencil = n // 2
    rows = n - pencil
    hankel = np.lib.stride_tricks.sliding_window_view(series, pencil + 1)[:rows]
    _, sv, vh = np.linalg.svd(hankel, full_matrices=False)
    if sv[0] == 0:
        return np.zeros(0)
    threshold = max(tol * sv[0], noise_sigma * np.sqrt(n))
    rank = min(int(np.count_nonzero(sv > threshold)), max_modes)
    if rank == 0:
        return np.zeros(0)
    # rows of vh span the row space, whose vectors are (z^j)_j
    vr = vh[:rank].T
    z = np.linalg.eigvals(np.linalg.pinv(vr[:-1]) @ vr[1:])
    return -np.angle(z) / step


def estimate_harmonics(
    series,
    times,
    max_modes: int,
    tol: float = 1e-10,
    noise_sigma: float = 0.0,
    amp_floor: float = 1e-10,
    strict: bool = False,
) -> SpectralData:
    """Frequencies and amplitudes with ``series ~ sum_k amp_k exp(-i f_k t)``.

    ``amp_floor`` is relative to the largest amplitude. With ``strict`` a
    signal supporting fewer than ``max_modes`` modes raises RankDeficient.
    """
    series = np.asarray(series, dtype=np.complex128)
    times = np.asarray(times, dtype=float)
    if series.size < 2 * max_modes:
        raise ValueError(f"need at least {2 * max_modes} samples for {max_modes} modes")
    freqs = pencil_frequencies(series, times, max_modes, tol, noise_sigma)
    if strict and freqs.size < max_modes:
        raise RankDeficient(f"signal supports {freqs.size} modes, {max_modes} requested")
    if freqs.size == 0:
        return SpectralData(freqs, np.zeros(0, complex), residual=float(np.sqrt(np.mean(np.abs(series) ** 2))))
    amps = fit_amplitudes(series, times, freqs)
    keep = np.abs(amps) > amp_floor * np.max(np.abs(amps))
    if strict and np.count_nonzero(keep) < max_modes:
        raise RankDeficient(f"only {np.count_nonzero(keep)} modes above the amplitude floor")
    freqs = freqs[keep]
    amps = fit_amplitudes(series, times, freqs)
    return SpectralData(freqs, amps, residual=_rms(series, times, freqs, amps))


def fft_peaks(series, times, count: int) -> np.ndarray:
    """Coarse cross-check: the ``count`` strongest zero-padded FFT bins."""
    series = np.asarray(series, dtype=np.complex128)
    step = _uniform_step(np.asarray(times, dtype=float))
    pad = 16 * series.size
    # Hann window keeps sidelobes of strong modes below weak main lobes
    spec = np.abs(np.fft.fft(series * np.hanning(series.size), pad))
    # x ~ exp(-i f t) peaks at angular frequency -f
    omega = -2 * np.pi * np.fft.fftfreq(pad, d=step)
    peaks = [i for i in range(pad) if spec[i] >= spec[i - 1] and spec[i] >= spec[(i + 1) % pad]]
    peaks.sort(key=lambda i: -spec[i])
    return np.sort(omega[peaks[:count]])


# --------------------------------------------------- from spectra to surface data

def consolidate_energies(spectra, n_sites: int, merge_tol: float | None = None) -> np.ndarray:
    """Fold all retrieved frequencies to |f| and merge them into N energies.

    Closest values are merged first; each cluster is represented by its
    |amp|^2-weighted mean. With ``merge_tol`` only clusters closer than it
    merge, and if more than N remain the N heaviest are kept, which drops
    weak spurious poles fitted to noise. Returns the 2N paired energies
    (positives ascending, then their negatives).
    """
    vals, weights = [], []
    for sd in spectra:
        vals.extend(np.abs(sd.freqs).tolist())
        weights.extend((np.abs(sd.amps) ** 2).tolist())
    if len(vals) < n_sites:
        raise RankDeficient(f"{len(vals)} frequencies retrieved, {n_sites} energies needed")
    limit = np.inf if merge_tol is None else merge_tol
    order = np.argsort(vals)
    # clusters hold [representative, total weight, weighted sum]
    clusters = [[float(vals[i]), float(weights[i]) + 1e-300, float(vals[i]) * (float(weights[i]) + 1e-300)] for i in order]
    while len(clusters) > n_sites:
        gaps = [clusters[i + 1][0] - clusters[i][0] for i in range(len(clusters) - 1)]
        i = int(np.argmin(gaps))
        if gaps[i] >= limit:
            break
        a, b = clusters[i], clusters[i + 1]
        w = a[1] + b[1]
        s = a[2] + b[2]
        clusters[i : i + 2] = [[s / w, w, s]]
    if len(clusters) > n_sites:
        clusters = sorted(clusters, key=lambda c: -c[1])[:n_sites]
    pos = np.sort([c[0] for c in clusters])
    return np.concatenate([pos, -pos])


def refine_energies(signals, times, positive, max_nfev: int = 200) -> np.ndarray:
    """Joint least-squares polish of the N positive energies.

    Every signal is modelled as a sum over the 2N frequencies +-E_k with free
    amplitudes; the amplitudes are projected out (variable projection) and
    the summed residual is minimised over E. Returns the 2N paired energies.
    """
    from scipy.optimize import least_squares

    times = np.asarray(times, dtype=float)
    stack = np.column_stack([np.asarray(s, dtype=np.complex128) for s in signals])
    positive = np.sort(np.abs(np.asarray(positive, dtype=float)))

    def residual(e):
        f = np.concatenate([e, -e])
        basis = np.exp(-1j * np.outer(times, f))
        coef, *_ = np.linalg.lstsq(basis, stack, rcond=None)
        r = (stack - basis @ coef).ravel()
        return np.concatenate([r.real, r.imag])

    span = times[-1] - times[0]
    sol = least_squares(residual, positive, x_scale=1.0 / span, max_nfev=max_nfev, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    e = np.sort(np.abs(sol.x))
    if sol.cost > 0.5 * np.sum(residual(positive) ** 2):
        e = positive
    return np.concatenate([e, -e])


def recover_delta_c(sd: SpectralData, eps: int) -> complex:
    """Completeness sum over the amplitudes of one probe difference signal.

    A measured amplitude at a negative frequency carries a factor eps
    relative to the bracket ``dc |T_1k|^2 + dc^* eps T_1k (T^-1)^+_{k,N+1}``;
    the weighted sum of brackets collapses to dc.
    """
    pos = sd.freqs > 0
    bracket = np.where(pos, sd.amps, eps * sd.amps)
    return complex(bracket[pos].sum() + eps * bracket[~pos].sum())


def solve_probe_pair(amps1, dc1: complex, amps2, dc2: complex, energies, eps: int, collinear_tol: float = 1e-9):
    """Split the amplitudes of two probes at sites (m, l) into their two parts.

    Per mode, ``amp = dc s(m,k) x_k + dc^* s(N+m,k) y_k`` with
    ``x_k = <l|E_k><m|E_k>^*`` and ``y_k = <l|E_k><N+m|E_k>^*``.
    """
    amps1 = np.asarray(amps1, dtype=np.complex128)
    amps2 = np.asarray(amps2, dtype=np.complex128)
    dc1, dc2 = complex(dc1), complex(dc2)
    if abs((dc2 * dc1.conjugate()).imag) <= collinear_tol * abs(dc1) * abs(dc2):
        raise CollinearProbes(f"probe differences {dc1} and {dc2} are real multiples")
    upper = np.asarray(energies) > 0
    s_same = np.where(upper, 1, eps)
    s_other = np.where(upper, eps, 1)
    det = (dc1 * dc2.conjugate() - dc2 * dc1.conjugate()) * s_same * s_other
    x = (amps1 * dc2.conjugate() - amps2 * dc1.conjugate()) * s_other / det
    y = (dc1 * amps2 - dc2 * amps1) * s_same / det
    return x, y


def disentangle_amplitudes(amps1, dc1: complex, amps2, dc2: complex, energies, eps: int, neg_tol: float = NEG_P_TOL, collinear_tol: float = 1e-9):
    """Per-mode ``p_k = |<1|E_k>|^2`` and ``q_k = <1|E_k> <N+1|E_k>^*``.

    ``amps1``/``amps2`` are amplitudes of two probe pairs at the paired
    ``energies``; each mode gives a 2x2 complex linear system.
    """
    x, q = solve_probe_pair(amps1, dc1, amps2, dc2, energies, eps, collinear_tol)
    p = x.real
    if np.any(p < -neg_tol):
        raise InconsistentSurface(f"negative weight |<1|E_k>|^2 = {p.min():.3g}")
    return np.clip(p, 0.0, None), q


def build_surface(p, energies, statistics, q=None, real: bool = False, floor: float = 1e-12) -> SurfaceData:
    """Anchor rows from mode weights.

    ``<1|E_k> = sqrt(p_k)``. When cross terms ``q`` are supplied the lower row
    follows from the mirror relation: modulus ``sqrt(p_{k+-N})`` and the phase
    of ``q_k^*``. With ``real`` that phase is snapped to +-1.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p < -NEG_P_TOL):
        raise InconsistentSurface(f"negative weight {p.min():.3g}")
    p = np.clip(p, 0.0, None)
    energies = np.asarray(energies, dtype=float)
    n = p.size // 2
    upper = np.sqrt(p).astype(np.complex128)
    if q is None:
        lower = np.zeros_like(upper)
    else:
        q = np.asarray(q, dtype=np.complex128)
        partner = np.roll(np.arange(2 * n), n)
        mag = np.sqrt(p[partner])
        big = np.abs(q) > floor
        phase = np.ones(2 * n, dtype=np.complex128)
        phase[big] = q[big].conj() / np.abs(q[big])
        if real:
            phase = np.where(phase.real < 0, -1.0, 1.0).astype(np.complex128)
        lower = mag * phase
    return SurfaceData(energies, {1: (upper, lower)}, statistics, 1)
