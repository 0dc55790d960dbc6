"""Hot numeric kernels with a numba path and a pure-numpy path.

Both implementations are always importable as :data:`numba_impl` and
:data:`numpy_impl`; the module-level names dispatch to numba unless the
environment variable ``QUADTOMO_DISABLE_NUMBA`` is set to a truthy value or
numba cannot be imported.
"""

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def _env_disabled():
    return os.environ.get("QUADTOMO_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = HAVE_NUMBA and not _env_disabled()


# ---------------------------------------------------------------- numpy path

def _synthesize_np(freqs, amps, times):
    phase = np.exp(-1j * np.outer(times, freqs))
    return phase @ amps


def _many_body_levels_np(energies, constant):
    levels = np.array([constant], dtype=np.float64)
    for e in energies:
        levels = np.concatenate([levels, levels + e])
    return levels


def _infection_closure_np(adj, start):
    n = adj.shape[0]
    bits = 1 << np.arange(n, dtype=np.int64)
    infected = start
    while True:
        inf_nodes = (infected & bits) != 0
        healthy = ~infected & adj
        counts = np.array([bin(int(h)).count("1") for h in healthy])
        spreading = inf_nodes & (counts == 1)
        new = infected
        for h in healthy[spreading]:
            new |= int(h)
        if new == infected:
            return infected
        infected = new


def _closure_all_subsets_np(adj_batch):
    g, n = adj_batch.shape
    state = np.broadcast_to(np.arange(1 << n, dtype=np.int64), (g, 1 << n)).copy()
    adj = adj_batch[:, :, None]
    while True:
        new = state.copy()
        for v in range(n):
            healthy = adj[:, v] & ~state
            single = (healthy != 0) & ((healthy & (healthy - 1)) == 0)
            new |= np.where(((state >> v) & 1).astype(bool) & single, healthy, 0)
        if np.array_equal(new, state):
            return state
        state = new


_SP = np.array([[0.0, 1.0], [0.0, 0.0]])
_SM = _SP.T
_SZ = np.diag([0.5, -0.5])


def _site_op(op, site, n):
    out = np.ones((1, 1))
    for m in range(n):
        out = np.kron(out, op if m == site else np.eye(2))
    return out


def _xy_chain_hamiltonian_np(c, gamma, b):
    n = b.shape[0]
    dim = 1 << n
    h = np.zeros((dim, dim))
    sp = [_site_op(_SP, m, n) for m in range(n)]
    sm = [_site_op(_SM, m, n) for m in range(n)]
    for m in range(n):
        h += b[m] * _site_op(_SZ, m, n)
    for m in range(n - 1):
        hop = sp[m] @ sm[m + 1] + sm[m] @ sp[m + 1]
        pair = sp[m] @ sp[m + 1] + sm[m] @ sm[m + 1]
        h += 0.5 * c[m] * hop + 0.5 * gamma[m] * c[m] * pair
    return h


numpy_impl = SimpleNamespace(
    synthesize=_synthesize_np,
    many_body_levels=_many_body_levels_np,
    infection_closure=_infection_closure_np,
    closure_all_subsets=_closure_all_subsets_np,
    xy_chain_hamiltonian=_xy_chain_hamiltonian_np,
)


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _synthesize_nb(freqs, amps, times):
        out = np.zeros(times.shape[0], dtype=np.complex128)
        for j in range(times.shape[0]):
            acc = 0j
            t = times[j]
            for k in range(freqs.shape[0]):
                ph = -freqs[k] * t
                acc += amps[k] * complex(np.cos(ph), np.sin(ph))
            out[j] = acc
        return out

    @numba.njit(cache=True)
    def _many_body_levels_nb(energies, constant):
        n = energies.shape[0]
        out = np.empty(1 << n, dtype=np.float64)
        for s in range(1 << n):
            acc = constant
            for k in range(n):
                if (s >> k) & 1:
                    acc += energies[k]
            out[s] = acc
        return out

    @numba.njit(cache=True)
    def _popcount(x):
        c = 0
        while x:
            x &= x - 1
            c += 1
        return c

    @numba.njit(cache=True)
    def _infection_closure_nb(adj, start):
        n = adj.shape[0]
        infected = start
        changed = True
        while changed:
            changed = False
            new = infected
            for v in range(n):
                if (infected >> v) & 1:
                    healthy = adj[v] & ~infected
                    if _popcount(healthy) == 1:
                        new |= healthy
            if new != infected:
                infected = new
                changed = True
        return infected

    @numba.njit(cache=True)
    def _closure_all_subsets_nb(adj_batch):
        g, n = adj_batch.shape
        out = np.empty((g, 1 << n), dtype=np.int64)
        for i in range(g):
            for s in range(1 << n):
                out[i, s] = _infection_closure_nb(adj_batch[i], s)
        return out

    @numba.njit(cache=True)
    def _xy_chain_hamiltonian_nb(c, gamma, b):
        n = b.shape[0]
        dim = 1 << n
        h = np.zeros((dim, dim))
        for s in range(dim):
            diag = 0.0
            for m in range(n):
                # site m lives on bit n-1-m; bit 0 is spin up
                if (s >> (n - 1 - m)) & 1:
                    diag -= 0.5 * b[m]
                else:
                    diag += 0.5 * b[m]
            h[s, s] = diag
            for m in range(n - 1):
                i = n - 1 - m
                j = n - 2 - m
                bi = (s >> i) & 1
                bj = (s >> j) & 1
                t = s ^ ((1 << i) | (1 << j))
                if bi != bj:
                    h[t, s] += 0.5 * c[m]
                else:
                    h[t, s] += 0.5 * gamma[m] * c[m]
        return h

    numba_impl = SimpleNamespace(
        synthesize=_synthesize_nb,
        many_body_levels=_many_body_levels_nb,
        infection_closure=_infection_closure_nb,
        closure_all_subsets=_closure_all_subsets_nb,
        xy_chain_hamiltonian=_xy_chain_hamiltonian_nb,
    )
else:  # pragma: no cover
    numba_impl = numpy_impl


_active = numba_impl if USE_NUMBA else numpy_impl


def synthesize(freqs, amps, times):
    """Evaluate ``sum_k amps[k] * exp(-1j * freqs[k] * t)`` on every time."""
    return _active.synthesize(
        np.ascontiguousarray(freqs, dtype=np.float64),
        np.ascontiguousarray(amps, dtype=np.complex128),
        np.ascontiguousarray(times, dtype=np.float64),
    )


def many_body_levels(energies, constant=0.0):
    """All ``constant + sum_k n_k E_k`` for occupations n in {0,1}^N (unsorted)."""
    return _active.many_body_levels(np.ascontiguousarray(energies, dtype=np.float64), float(constant))


def infection_closure(adj, start):
    """Fixpoint of the infection rule on bitmask adjacency ``adj``."""
    return int(_active.infection_closure(np.ascontiguousarray(adj, dtype=np.int64), np.int64(start)))


def closure_all_subsets(adj_batch):
    """Infection fixpoint for every start mask of every graph in ``adj_batch``.

    ``adj_batch`` has shape (graphs, n) of neighbour bitmasks; the result has
    shape (graphs, 2**n) and entry [g, s] is the closure of start mask s.
    """
    return _active.closure_all_subsets(np.ascontiguousarray(adj_batch, dtype=np.int64))


def xy_chain_hamiltonian(c, gamma, b):
    """Dense 2^N matrix of the open XY chain with S = sigma/2 and fields on S^z."""
    return _active.xy_chain_hamiltonian(
        np.ascontiguousarray(c, dtype=np.float64),
        np.ascontiguousarray(gamma, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64),
    )
