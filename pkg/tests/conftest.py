"""Shared builders for solver test instances."""

import numpy as np

from stsad.graphs import ModeGraph, build_mode_graphs
from stsad.logss import LogssParams, SolverState
from stsad.synth import builtin_template
from stsad.tensor import mode_n_product


def stub_graphs(dims, ranks, seed=0):
    """Mode graphs with random orthonormal eigenbases and ascending eigvals."""
    rng = np.random.default_rng(seed)
    graphs = []
    for mode, (size, rank) in enumerate(zip(dims, ranks), start=1):
        Q, _ = np.linalg.qr(rng.normal(size=(size, size)))
        eigvals = np.sort(rng.uniform(0.0, 2.0, size=size))
        eigvals[0] = 0.0
        graphs.append(
            ModeGraph(
                mode=mode,
                weights=np.zeros((size, size)),
                laplacian=np.zeros((size, size)),
                eigvals=eigvals,
                eigvecs=Q,
                rank=rank,
            )
        )
    return graphs


def random_state(dims, params, graphs, seed=0):
    """SolverState filled with random iterates (for single-update oracles)."""
    rng = np.random.default_rng(seed)
    state = SolverState.zeros(np.zeros(dims), params, graphs)
    state.L = rng.normal(size=dims)
    state.S = rng.normal(size=dims)
    state.W = rng.normal(size=dims)
    state.Z = rng.normal(size=dims)
    state.gamma1 = rng.normal(size=dims)
    state.gamma2 = rng.normal(size=dims)
    state.gamma3 = rng.normal(size=dims)
    state.gamma4 = [rng.normal(size=dims) for _ in dims]
    state.G = [rng.normal(size=g.shape) for g in state.G]
    return state


def spike_instance(dims=(12, 6, 8, 5), spike=50.0, seed=0):
    """Exactly graph-low-frequency tensor plus one large spike.

    Graphs are built on the smooth base; the base is then projected onto the
    retained eigenbases so it is representable without residual, and a single
    spike is added at a fixed interior entry.
    """
    base = builtin_template(dims)
    noise = np.random.default_rng(seed).normal(0, 0.05 * base.std(), size=dims)
    graphs = build_mode_graphs(base + noise, k=5)
    low = base
    for g in graphs:
        projector = g.basis @ g.basis.T
        low = mode_n_product(low, projector, g.mode)
    spike_idx = tuple(d // 2 for d in dims)
    Y = low.copy()
    Y[spike_idx] += spike
    return Y, graphs, spike_idx, low
