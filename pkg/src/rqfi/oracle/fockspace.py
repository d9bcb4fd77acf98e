"""Truncated multimode Fock spaces and passive linear maps between them.

A basis state is an occupation tuple; tuples are ordered by total photon
number first, so the states with total <= n form a prefix of the basis with
cap n_max >= n.  A linear map ``M`` on creation operators
(``a_j^+ -> sum_i M_ij b_i^+``) is lifted to the Fock space sector by sector.
For isometric ``M`` the lift is an isometry.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=64)
def fock_basis(modes: int, n_max: int) -> tuple[tuple[int, ...], ...]:
    """All occupation tuples of ``modes`` modes with total <= ``n_max``."""
    if modes < 1 or n_max < 0:
        raise ValueError(f"need modes >= 1 and n_max >= 0, got {modes}, {n_max}")
    return tuple(t for n in range(n_max + 1) for t in _compositions(n, modes))


@lru_cache(maxsize=64)
def basis_index(modes: int, n_max: int) -> dict[tuple[int, ...], int]:
    return {t: i for i, t in enumerate(fock_basis(modes, n_max))}


def fock_dim(modes: int, n_max: int) -> int:
    return math.comb(n_max + modes, modes)


def sector_size(modes: int, n: int) -> int:
    """Number of basis states with total <= n."""
    return fock_dim(modes, n)


@lru_cache(maxsize=64)
def _raising_tables(modes: int, n_max: int):
    """Per mode: (source indices, destination indices, sqrt(n+1) factors)."""
    basis = fock_basis(modes, n_max)
    index = basis_index(modes, n_max)
    below = sector_size(modes, n_max - 1) if n_max > 0 else 0
    tables = []
    for i in range(modes):
        src = np.arange(below)
        dst = np.empty(below, dtype=np.intp)
        fac = np.empty(below)
        for k in range(below):
            t = basis[k]
            up = t[:i] + (t[i] + 1,) + t[i + 1:]
            dst[k] = index[up]
            fac[k] = math.sqrt(t[i] + 1)
        tables.append((src, dst, fac))
    return tables


def raise_mode(x: np.ndarray, modes: int, n_max: int, weights: np.ndarray) -> np.ndarray:
    """Apply ``sum_i weights[i] a_i^+`` to ``x``; components pushed past the cap are dropped."""
    y = np.zeros_like(x)
    for w, (src, dst, fac) in zip(weights, _raising_tables(modes, n_max)):
        if w != 0:
            # destinations are distinct for a single mode, so fancy indexing is safe
            y[dst] += w * fac * x[src]
    return y


def passive_map(M: np.ndarray, n_max: int) -> np.ndarray:
    """Fock-space lift of ``a_j^+ -> sum_i M_ij b_i^+``, restricted to total <= ``n_max``.

    Returns the ``(dim_out, dim_in)`` matrix with ``dim_in`` over ``M.shape[1]``
    modes and ``dim_out`` over ``M.shape[0]`` modes.
    """
    M = np.asarray(M)
    m_out, m_in = M.shape
    basis_in = fock_basis(m_in, n_max)
    index_in = basis_index(m_in, n_max)
    out = np.zeros((fock_dim(m_out, n_max), len(basis_in)), dtype=np.result_type(M, float))
    out[0, 0] = 1.0
    for k, t in enumerate(basis_in[1:], start=1):
        j = next(i for i, n in enumerate(t) if n)
        parent = index_in[t[:j] + (t[j] - 1,) + t[j + 1:]]
        out[:, k] = raise_mode(out[:, parent], m_out, n_max, M[:, j]) / math.sqrt(t[j])
    return out


def grid_from_list(rho: np.ndarray, n_max: int, cap: int | None = None) -> np.ndarray:
    """Two-mode density matrix (list basis) to a tensor ``T[a1, a2, b1, b2]``."""
    cap = n_max if cap is None else cap
    basis = fock_basis(2, n_max)
    a1 = np.array([t[0] for t in basis])
    a2 = np.array([t[1] for t in basis])
    T = np.zeros((cap + 1,) * 4, dtype=rho.dtype)
    T[a1[:, None], a2[:, None], a1[None, :], a2[None, :]] = rho
    return T


def list_from_grid(T: np.ndarray, n_max: int) -> np.ndarray:
    """Inverse of :func:`grid_from_list`, keeping states with total <= ``n_max``."""
    basis = fock_basis(2, n_max)
    a1 = np.array([t[0] for t in basis])
    a2 = np.array([t[1] for t in basis])
    return T[a1[:, None], a2[:, None], a1[None, :], a2[None, :]]
