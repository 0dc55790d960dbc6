"""Rebuild A and B from surface data.

Rows of T^-1 (one row vector over the modes k per basis state) are resolved
site by site. At a resolved site v with a single unresolved neighbour u the
eigen equations of rows v and v+N, with every known term moved to the left,
read

    y = a r_u + b r_{N+u},        z = -eps b* r_u - eps a* r_{N+u}

with a = A_vu and b = B_vu. The eta-weighted Gram matrix of (y, z) fixes the
coupling magnitudes, known phases fix the rest, and the rows of u follow.

Conventions that single-site data cannot decide on its own:

* fermions, distinct couplings: a partial particle-hole map swaps |A_vu| and
  |B_vu|; the larger magnitude is assigned to A unless ``dominant="B"``.
* equal couplings: the sign of each unmeasured field A_nn is a phase; it is
  read from ``phases`` (default +1).
* bosons: local squeezing of unmeasured modes leaves the data unchanged; the
  reconstruction returns the representative with B_nn = 0 off the anchor.
* an equal-coupling bond followed by a distinct-coupling bond is not
  determined locally (UnidentifiableRegimeSwitch).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import CouplingGraph, QuadraticHamiltonian, Statistics, is_chain, path_graph
from .errors import (
    BrokenChain,
    DistinctCouplingBond,
    EqualCouplingBond,
    EqualCouplingEdge,
    InconsistentSurface,
    NoTransverseField,
    NotInfecting,
    UnidentifiableRegimeSwitch,
    ZeroAnchorEntry,
)
from .spectral import SurfaceData, solve_probe_pair

REGIME_TOL = 1e-6
VANISH_TOL = 1e-10
SQRT2 = np.sqrt(2.0)


@dataclass
class InfectionPlan:
    steps: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.steps)

    def __len__(self):
        return len(self.steps)


def is_infecting(g: CouplingGraph, access=None):
    """Run the infection rule from ``access`` (default ``g.access``).

    Among all available (infecting, infected) steps the lexicographically
    smallest is taken. Returns ``(all_infected, plan)``.
    """
    infected = set(g.access if access is None else access)
    nbrs = {v: g.neighbors(v) for v in range(1, g.n_sites + 1)}
    plan = InfectionPlan()
    while True:
        best = None
        for v in sorted(infected):
            healthy = [u for u in nbrs[v] if u not in infected]
            if len(healthy) == 1 and (best is None or (v, healthy[0]) < best):
                best = (v, healthy[0])
        if best is None:
            break
        plan.steps.append(best)
        infected.add(best[1])
    return len(infected) == g.n_sites, plan


def phases_from(h: QuadraticHamiltonian, tol: float = 1e-12) -> dict:
    """Unit phases of every nonzero entry of A and B (upper triangle + diagonal)."""
    out = {}
    for name, mat in (("A", h.A), ("B", h.B)):
        n = mat.shape[0]
        for i in range(n):
            for j in range(i, n):
                z = mat[i, j]
                if abs(z) > tol:
                    out[(name, i + 1, j + 1)] = complex(z / abs(z))
    return out


def _phase(phases, name, i, j):
    if phases is None:
        return 1.0 + 0j
    if (name, i, j) in phases:
        return complex(phases[(name, i, j)])
    if i != j and (name, j, i) in phases:
        # A_ji = A_ij^*, B_ji = -eps B_ij: only the A rule is needed here
        return complex(phases[(name, j, i)]).conjugate() if name == "A" else None
    return 1.0 + 0j


class _Engine:
    def __init__(self, surface: SurfaceData, graph: CouplingGraph, phases, dominant, regime_tol):
        self.n = surface.n_sites
        self.eps = surface.eps
        self.E = surface.energies
        self.w = np.concatenate([np.ones(self.n), self.eps * np.ones(self.n)])
        self.rows = np.zeros((2 * self.n, 2 * self.n), dtype=np.complex128)
        self.resolved = set()
        self.bonds = set()
        self.A = np.zeros((self.n, self.n), dtype=np.complex128)
        self.B = np.zeros((self.n, self.n), dtype=np.complex128)
        self.graph = graph
        self.phases = phases
        self.dominant = dominant
        self.regime_tol = regime_tol
        self.regimes = {}
        self.norm_residuals = {}
        for s, (upper, lower) in surface.rows.items():
            self.rows[s - 1] = upper
            self.rows[self.n + s - 1] = lower
        for s in surface.rows:
            self.resolved.add(s)
        for s in sorted(surface.rows):
            self._fill_entries(s)

    # eta-weighted inner product over modes
    def ip(self, x, y):
        return np.sum(self.w * x.conj() * y)

    def upper(self, s):
        return self.rows[s - 1]

    def lower(self, s):
        return self.rows[self.n + s - 1]

    def _set_bond(self, v, u, a, b):
        self.A[v - 1, u - 1] = a
        self.A[u - 1, v - 1] = np.conj(a)
        self.B[v - 1, u - 1] = b
        self.B[u - 1, v - 1] = -self.eps * b
        self.bonds.add(frozenset((v, u)))

    def _fill_entries(self, s):
        """Diagonal of s and couplings to resolved neighbours from rows."""
        E, ru, rl = self.E, self.upper(s), self.lower(s)
        self.A[s - 1, s - 1] = self.ip(ru, E * ru).real
        self.B[s - 1, s - 1] = 0.0 if self.eps == 1 else self.eps * self.ip(rl, E * ru)
        for j in self.graph.neighbors(s):
            if j in self.resolved and frozenset((s, j)) not in self.bonds:
                a = self.ip(self.upper(j), E * ru)
                b = self.eps * self.ip(self.lower(j), E * ru)
                self._set_bond(s, j, a, b)
        self.norm_residuals[s] = float(
            max(
                abs(self.ip(ru, ru) - 1),
                abs(self.ip(rl, rl) - self.eps),
                abs(self.ip(ru, rl)),
            )
        )

    def residuals(self, v):
        """Known-term-subtracted eigen equations of rows v and v+N."""
        E, eps = self.E, self.eps
        y = E * self.upper(v)
        z = eps * E * self.lower(v)
        for j in [v] + self.graph.neighbors(v):
            if j not in self.resolved:
                continue
            a = self.A[v - 1, j - 1]
            b = self.B[v - 1, j - 1]
            y = y - a * self.upper(j) - b * self.lower(j)
            z = z + eps * np.conj(b) * self.upper(j) + eps * np.conj(a) * self.lower(j)
        return y, z

    def scale(self, v):
        return float(np.sqrt(np.sum(np.abs(self.E * self.upper(v)) ** 2 + np.abs(self.E * self.lower(v)) ** 2)))

    def equal_indicator(self, y, z):
        """Relative gap between |a| and |b| (fermions) or the rank-1 defect of (y, z)."""
        if self.eps == 1:
            s = self.ip(y, y).real
            p = abs(self.ip(y, z)) / 2
            disc = np.sqrt(max(s * s - 4 * p * p, 0.0))
            big = np.sqrt(max((s + disc) / 2, 0.0))
            small = np.sqrt(max((s - disc) / 2, 0.0))
            return (big - small) / big if big > 0 else 0.0
        sv = np.linalg.svd(np.vstack([y, z]), compute_uv=False)
        return sv[1] / sv[0] if sv[0] > 0 else 0.0

    # ---------------------------------------------------------- distinct step
    def step_distinct(self, v, u, y, z):
        eps = self.eps
        ph_a = _phase(self.phases, "A", v, u)
        ph_b = _phase(self.phases, "B", v, u)
        if ph_b is None:
            ph_b = -eps * complex(self.phases[("B", u, v)])
        if eps == 1:
            s = self.ip(y, y).real
            p = abs(self.ip(y, z)) / 2
            disc = np.sqrt(max(s * s - 4 * p * p, 0.0))
            big = np.sqrt(max((s + disc) / 2, 0.0))
            small = np.sqrt(max((s - disc) / 2, 0.0))
            mag_a, mag_b = (big, small) if self.dominant == "A" else (small, big)
        else:
            c = self.ip(y, y).real
            yy = self.ip(y, self.E * y)
            zz = self.ip(z, self.E * z)
            yz = self.ip(y, self.E * z)
            s1 = (yy + zz).real
            q = (ph_a * ph_b * yz).real
            # gauge B_uu = 0: rho^2 q - rho s1 + q = 0 for rho = |b| / |a|
            if abs(q) <= 1e-14 * max(abs(s1), 1e-300):
                rho = 0.0
            else:
                root = np.sqrt(max(s1 * s1 - 4 * q * q, 0.0))
                r1, r2 = (s1 - root) / (2 * q), (s1 + root) / (2 * q)
                rho = min(r1, r2, key=abs) if c > 0 else max(r1, r2, key=abs)
            if rho < -1e-9:
                raise InconsistentSurface(f"bond ({v}, {u}): supplied phases contradict the data")
            rho = max(rho, 0.0)
            denom = 1 - rho * rho
            if abs(denom) < 1e-14 or c / denom <= 0:
                raise InconsistentSurface(f"bond ({v}, {u}): no positive-definite solution")
            mag_a = np.sqrt(c / denom)
            mag_b = rho * mag_a
        a = mag_a * ph_a
        b = mag_b * ph_b
        g = np.array([[a, b], [-eps * np.conj(b), -eps * np.conj(a)]])
        if abs(np.linalg.det(g)) < 1e-14 * max(abs(a), abs(b), 1e-300) ** 2:
            raise InconsistentSurface(f"bond ({v}, {u}): |A| and |B| coincide, rows cannot be separated")
        new = np.linalg.solve(g, np.vstack([y, z]))
        self._set_bond(v, u, a, b)
        self.rows[u - 1] = new[0]
        self.rows[self.n + u - 1] = new[1]

    # ------------------------------------------------------------- equal step
    def step_equal(self, v, u, y, z):
        eps, E = self.eps, self.E
        ph_a = _phase(self.phases, "A", v, u)
        ph_b = _phase(self.phases, "B", v, u)
        if ph_b is None or abs(ph_b - ph_a) > 1e-12 or abs(ph_a.imag) > 1e-12:
            raise ValueError("equal-coupling reconstruction needs real A_vu = B_vu")
        if eps == 1:
            s = np.sqrt(max(self.ip(y, y).real, 0.0))
        else:
            m1 = self.ip(y, E * y).real
            m3 = self.ip(y, E**3 * y).real
            if m1 <= 0 or m3 <= 0:
                raise InconsistentSurface(f"bond ({v}, {u}): non-physical moments")
            s = (m1**3 / m3) ** 0.25
        a = ph_a.real * s / SQRT2
        self._set_bond(v, u, a, a)
        x = y / (SQRT2 * a)
        w = E * x
        for j in self.graph.neighbors(u):
            if j in self.resolved:
                amb = self.A[u - 1, j - 1] - self.B[u - 1, j - 1]
                w = w - amb * (self.upper(j) - self.lower(j)) / SQRT2
        if eps == 1:
            mag = np.sqrt(max(self.ip(w, w).real, 0.0))
        else:
            mag = abs(self.ip(x, w).real)
        if mag < VANISH_TOL * max(self.scale(v), 1.0):
            raise NoTransverseField(u)
        ph_d = _phase(self.phases, "A", u, u)
        d = mag * (1.0 if ph_d.real >= 0 else -1.0)
        pvec = w / d
        self.rows[u - 1] = (x + pvec) / SQRT2
        self.rows[self.n + u - 1] = (x - pvec) / SQRT2

    def run(self, plan, mode, chain_errors=True):
        previous_equal = False
        for v, u in plan:
            y, z = self.residuals(v)
            scale = self.scale(v)
            if np.sqrt(np.sum(np.abs(y) ** 2 + np.abs(z) ** 2)) <= VANISH_TOL * max(scale, 1.0):
                raise BrokenChain(v)
            equal = self.equal_indicator(y, z) < self.regime_tol
            if mode == "equal":
                if not equal:
                    raise DistinctCouplingBond(v)
            elif equal and mode == "distinct":
                if chain_errors:
                    raise EqualCouplingBond(v)
                raise EqualCouplingEdge(f"edge ({v}, {u}) has |A| == |B|")
            if previous_equal and not equal:
                raise UnidentifiableRegimeSwitch(
                    f"bond ({v}, {u}) has distinct couplings after an equal-coupling bond"
                )
            if equal:
                self.step_equal(v, u, y, z)
            else:
                self.step_distinct(v, u, y, z)
            self.regimes[(v, u)] = "equal" if equal else "distinct"
            previous_equal = equal
            self.resolved.add(u)
            self._fill_entries(u)

    def result(self, statistics):
        A = 0.5 * (self.A + self.A.conj().T)
        B = 0.5 * (self.B - self.eps * self.B.T)
        return QuadraticHamiltonian(A, B, statistics)

    def diagnostics(self):
        tail = 0.0
        for v in sorted(self.resolved):
            y, z = self.residuals(v)
            unresolved = [u for u in self.graph.neighbors(v) if u not in self.resolved]
            if not unresolved:
                tail = max(tail, float(np.max(np.abs(np.concatenate([y, z])))))
        return {
            "max_residual": tail,
            "per_site_errors": [self.norm_residuals.get(s, float("nan")) for s in range(1, self.n + 1)],
            "regime_per_bond": [self.regimes[k] for k in sorted(self.regimes)],
        }


def diagonal_at_anchor(surface: SurfaceData):
    """(A_11, B_11) from the anchor rows by completeness."""
    s = surface.anchor
    eng = _Engine(SurfaceData(surface.energies, {s: surface.rows[s]}, surface.statistics, s), CouplingGraph(surface.n_sites), None, "A", REGIME_TOL)
    return float(eng.A[s - 1, s - 1].real), complex(eng.B[s - 1, s - 1])


def _chain(surface, phases, mode, dominant, regime_tol, with_diagnostics):
    n = surface.n_sites
    anchor_only = SurfaceData(surface.energies, {1: surface.rows[1]}, surface.statistics, 1)
    eng = _Engine(anchor_only, path_graph(n), phases, dominant, regime_tol)
    eng.run([(i, i + 1) for i in range(1, n)], mode)
    h = eng.result(surface.statistics)
    return (h, eng.diagnostics()) if with_diagnostics else h


def chain_distinct(surface: SurfaceData, phases=None, dominant="A", regime_tol=REGIME_TOL, diagnostics=False):
    """Chain with |A_{n,n+1}| != |B_{n,n+1}| on every bond."""
    return _chain(surface, phases, "distinct", dominant, regime_tol, diagnostics)


def chain_equal(surface: SurfaceData, phases=None, diagnostics=False):
    """Real chain with A_{n,n+1} = B_{n,n+1} on every bond."""
    return _chain(surface, phases, "equal", "A", REGIME_TOL, diagnostics)


def chain_auto(surface: SurfaceData, phases=None, dominant="A", regime_tol=REGIME_TOL, diagnostics=False):
    """Pick the distinct or equal step per bond from the data."""
    return _chain(surface, phases, "auto", dominant, regime_tol, diagnostics)


def reconstruct_graph(surface: SurfaceData, g: CouplingGraph, phases=None, dominant="A", regime_tol=REGIME_TOL, diagnostics=False):
    """Walk the infection plan of ``g`` from the accessed sites of ``surface``."""
    access = frozenset(surface.rows)
    ok, plan = is_infecting(g, access)
    if not ok:
        raise NotInfecting(f"access set {sorted(access)} does not infect the graph")
    eng = _Engine(surface, g, phases, dominant, regime_tol)
    eng.run(plan, "distinct", chain_errors=False)
    h = eng.result(surface.statistics)
    return (h, eng.diagnostics()) if diagnostics else h


def graph_surface(energies, statistics, probes: dict, anchor: int = 1, floor: float = 1e-10) -> SurfaceData:
    """Surface rows on the accessed set from probe-pair amplitudes.

    ``probes[(m, l)]`` is ``(amps1, dc1, amps2, dc2)``: amplitudes at the
    paired ``energies`` of two difference signals with initialisation at site
    m and measurement at site l. Needs ``(anchor, anchor)`` plus, for every
    other accessed l, both ``(anchor, l)`` and ``(l, anchor)``.
    """
    stats = Statistics.parse(statistics)
    eps = stats.eps
    energies = np.asarray(energies, dtype=float)
    n2 = energies.size
    n = n2 // 2
    partner = np.roll(np.arange(n2), n)

    x, y = solve_probe_pair(*probes[(anchor, anchor)], energies, eps)
    p = np.clip(x.real, 0.0, None)
    va = np.sqrt(p).astype(np.complex128)
    big = np.abs(va) > floor
    vna = np.zeros(n2, dtype=np.complex128)
    vna[big] = np.conj(y[big]) / va[big]
    # mirror gauge: V_{N+i,k} = theta_k conj(V_{i,kbar}) for every row i
    theta = np.ones(n2, dtype=np.complex128)
    for k in range(n2):
        kb = partner[k]
        if abs(va[kb]) > floor and abs(vna[k]) > floor:
            theta[k] = vna[k] / np.conj(va[kb])
        elif abs(va[k]) > floor and abs(vna[kb]) > floor:
            theta[k] = vna[kb] / np.conj(va[k])
    theta /= np.abs(theta)
    for k in range(n2):
        if not big[k]:
            vna[k] = theta[k] * np.conj(va[partner[k]])
    rows = {anchor: (va, vna)}

    for l in sorted({m for m, _ in probes} | {ll for _, ll in probes}):
        if l == anchor:
            continue
        x1, _ = solve_probe_pair(*probes[(anchor, l)], energies, eps)
        _, y2 = solve_probe_pair(*probes[(l, anchor)], energies, eps)
        up = np.zeros(n2, dtype=np.complex128)
        lo = np.zeros(n2, dtype=np.complex128)
        up[big] = x1[big] / va[big]
        lo[big] = np.conj(y2[big]) / va[big]
        for k in np.flatnonzero(~big):
            kb = partner[k]
            if not big[kb]:
                raise ZeroAnchorEntry(k + 1)
            up[k] = theta[k] * np.conj(lo[kb])
            lo[k] = theta[k] * np.conj(up[kb])
        rows[l] = (up, lo)
    return SurfaceData(energies, rows, stats, anchor)


def graph_surface_checked(surface: SurfaceData, floor: float = 1e-10):
    """Raise ZeroAnchorEntry when an anchor entry and its mirror partner both vanish."""
    n = surface.n_sites
    va = surface.rows[surface.anchor][0]
    partner = np.roll(np.arange(2 * n), n)
    for k in range(2 * n):
        if abs(va[k]) <= floor and abs(va[partner[k]]) <= floor:
            raise ZeroAnchorEntry(k + 1)
    return surface


__all__ = [
    "InfectionPlan",
    "is_infecting",
    "phases_from",
    "diagonal_at_anchor",
    "chain_distinct",
    "chain_equal",
    "chain_auto",
    "reconstruct_graph",
    "graph_surface",
    "is_chain",
]
