"""Heisenberg-picture expectation values and simulated measurement records."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import QuadraticHamiltonian, complex_from_json, complex_to_json
from .diag import BogoliubovDecomposition, diagonalize
from .errors import MismatchedRecords, ParseError

CONJ_TOL = 1e-12
DEFAULT_KAPPA = 4.0
DEFAULT_SAMPLES_PER_MODE = 8


def sign_function(n_sites: int, eps: int) -> np.ndarray:
    """s(m, k): 1 when m and k lie in the same half, eps otherwise."""
    half = np.arange(2 * n_sites) >= n_sites
    return np.where(half[:, None] == half[None, :], 1, eps)


@dataclass(frozen=True)
class InitialExpectations:
    """<alpha_m(0)>: entries N..2N-1 are the conjugates of entries 0..N-1."""

    alpha0: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha0, dtype=np.complex128)
        n = a.shape[0] // 2
        if a.ndim != 1 or a.shape[0] != 2 * n:
            raise ValueError("alpha0 must have even length 2N")
        if np.max(np.abs(a[n:] - a[:n].conj()), initial=0.0) > CONJ_TOL:
            raise ValueError("alpha0 violates <a^+> = <a>*")
        object.__setattr__(self, "alpha0", a)

    @classmethod
    def from_annihilators(cls, values) -> "InitialExpectations":
        v = np.asarray(values, dtype=np.complex128)
        return cls(np.concatenate([v, v.conj()]))

    @classmethod
    def random(cls, n_sites: int, rng: np.random.Generator, scale: float = 1.0) -> "InitialExpectations":
        v = scale * (rng.normal(size=n_sites) + 1j * rng.normal(size=n_sites)) / np.sqrt(2)
        return cls.from_annihilators(v)

    def with_site(self, site: int, c: complex) -> "InitialExpectations":
        n = self.alpha0.shape[0] // 2
        a = self.alpha0.copy()
        a[site - 1] = c
        a[site - 1 + n] = np.conj(c)
        return InitialExpectations(a)


@dataclass(frozen=True)
class MeasurementRecord:
    site: int
    init_site: int
    c: complex
    times: np.ndarray
    values: np.ndarray
    noise_sigma: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.complex128)
        if times.shape != values.shape:
            raise ValueError("times and values differ in length")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "c", complex(self.c))

    def to_dict(self) -> dict:
        return {
            "site": self.site,
            "init_site": self.init_site,
            "c": complex_to_json(self.c),
            "noise_sigma": self.noise_sigma,
            "times": [float(t) for t in self.times],
            "values": [complex_to_json(v) for v in self.values],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MeasurementRecord":
        try:
            return cls(
                site=int(doc["site"]),
                init_site=int(doc["init_site"]),
                c=complex_from_json(doc["c"]),
                times=np.array(doc["times"], dtype=float),
                values=np.array([complex_from_json(v) for v in doc["values"]]),
                noise_sigma=float(doc.get("noise_sigma", 0.0)),
                seed=doc.get("seed"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed record document: {exc}") from exc


def propagator(d: BogoliubovDecomposition, t: float) -> np.ndarray:
    """Matrix with entries sum_k s(m,k) e^{-iE_k t} T^-1_{nk} (T^-1_{mk})^*."""
    V = d.eigvecs
    return (V * np.exp(-1j * d.energies * t)[None, :]) @ d.transform()


def evolve_expectations(d: BogoliubovDecomposition, x0: InitialExpectations, t: float) -> np.ndarray:
    return propagator(d, t) @ x0.alpha0


def site_series(d: BogoliubovDecomposition, x0: InitialExpectations, site: int, times) -> np.ndarray:
    """<a_site(t_j)> for every sample time, as a sum of 2N harmonics."""
    weights = d.transform() @ x0.alpha0
    amps = d.eigvecs[site - 1] * weights
    return kernels.synthesize(d.energies, amps, np.asarray(times, dtype=float))


def energy_scale(h: QuadraticHamiltonian) -> float:
    """Gershgorin bound on the spectral radius of eta*M (never below it)."""
    a = np.abs(h.A).sum(axis=1) + np.abs(h.B).sum(axis=1)
    return float(max(a.max(), 1e-12))


def default_times(
    n_sites: int,
    e_scale: float,
    kappa: float = DEFAULT_KAPPA,
    samples_per_mode: int = DEFAULT_SAMPLES_PER_MODE,
) -> np.ndarray:
    """Uniform grid on [0, kappa N^2 / e_scale].

    The sample count is ``samples_per_mode * 2N`` raised, when needed, so the
    step stays below pi / (2 e_scale) and no frequency aliases.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if samples_per_mode < 2:
        raise ValueError("samples_per_mode must be >= 2")
    t_max = kappa * n_sites**2 / e_scale
    count = samples_per_mode * 2 * n_sites
    nyquist = int(np.ceil(t_max * e_scale / (np.pi / 2))) + 1
    return np.linspace(0.0, t_max, max(count, nyquist))


def simulate_record(
    h: QuadraticHamiltonian,
    background: InitialExpectations,
    init_site: int,
    c: complex,
    site: int,
    times,
    noise_sigma: float = 0.0,
    seed: int | None = None,
    decomposition: BogoliubovDecomposition | None = None,
) -> MeasurementRecord:
    d = decomposition if decomposition is not None else diagonalize(h)
    x0 = background.with_site(init_site, c)
    times = np.asarray(times, dtype=float)
    values = site_series(d, x0, site, times)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        values = values + noise_sigma * (rng.normal(size=times.size) + 1j * rng.normal(size=times.size))
    return MeasurementRecord(site, init_site, c, times, values, float(noise_sigma), seed)


def difference_signal(rec1: MeasurementRecord, rec2: MeasurementRecord):
    """(c1 - c2, values1 - values2); the background state drops out."""
    if rec1.site != rec2.site or rec1.init_site != rec2.init_site:
        raise MismatchedRecords("records probe different sites")
    if rec1.times.shape != rec2.times.shape or np.any(rec1.times != rec2.times):
        raise MismatchedRecords("records use different sample times")
    return rec1.c - rec2.c, rec1.values - rec2.values
