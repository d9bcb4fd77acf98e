"""Exact image-plane states of the two sources in a truncated Fock space.

Image-plane modes are Hermite-Gauss functions of the Gaussian PSF.  A
source shifted by ``-/+ s/2`` is a displaced ground state, so its image
mode has coefficients ``c_k(-/+alpha) = exp(-alpha^2/2) (-/+alpha)^k / sqrt(k!)``
with ``alpha = s / (4 x_R)``.  The channel maps ``c_j^+ -> sqrt(eta) u_j . a^+``
plus loss.  Writing ``L = sqrt(eta) [u_1, u_2] = W diag(sigma) V^T``, it
splits into a rotation of the sources, pure loss ``sigma_i^2`` on each
rotated mode and an isometric embedding ``W`` of two modes into ``K``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.special import gammainc, gammaln

from ..beamsplitter import ImagingSystem
from ..errors import TruncationBudgetExceeded, UnsupportedPsf, UnsupportedState
from ..psf import GAUSSIAN
from ..sources import CorrThermal, FockPM, SourceSpec, Thermal, Tmsv
from .fockspace import (
    basis_index,
    fock_basis,
    fock_dim,
    grid_from_list,
    list_from_grid,
    passive_map,
)

BASIS_BUDGET = 1e-8
SOURCE_BUDGET = 1e-12
IMAGE_BUDGET = 1e-10
MIN_K = 6
MAX_K = 64
MAX_SOURCE_PHOTONS = 60
MAX_PURE_SOURCE_PHOTONS = 160
MAX_IMAGE_PHOTONS = 40
DENSE_LIMIT = 4000

_PM = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)  # columns: c_+, c_- in terms of c_1, c_2


def hg_coefficients(alpha: float, K: int) -> tuple[np.ndarray, float]:
    """Normalised first ``K`` coefficients of a displaced ground state and the
    discarded weight."""
    c = np.zeros(K)
    if alpha == 0:
        c[0] = 1.0
        return c, 0.0
    k = np.arange(K)
    c = np.sign(alpha) ** k * np.exp(-0.5 * alpha**2 + k * math.log(abs(alpha)) - 0.5 * gammaln(k + 1))
    # weight beyond K is a Poisson(alpha^2) tail
    residual = float(gammainc(K, alpha**2))
    return c / np.linalg.norm(c), residual


def basis_residual(s: float, x_r: float, K: int) -> float:
    return hg_coefficients(s / (4 * x_r), K)[1]


def choose_K(points, x_r: float, budget: float = BASIS_BUDGET) -> int:
    """Smallest ``K >= 6`` whose Hermite-Gauss truncation meets ``budget`` at every point."""
    for K in range(MIN_K, MAX_K + 1):
        if max(basis_residual(s, x_r, K) for s in points) < budget:
            return K
    raise TruncationBudgetExceeded("basis_residual", max(basis_residual(s, x_r, MAX_K) for s in points), budget)


def image_modes(s: float, x_r: float, K: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Image-mode coefficient vectors of the two sources."""
    alpha = s / (4 * x_r)
    u2, res = hg_coefficients(alpha, K)
    u1, _ = hg_coefficients(-alpha, K)
    return u1, u2, res


# -- source states on the (c_1, c_2) two-mode space -------------------------------


def _geometric(mean: float, n: int) -> np.ndarray:
    if mean == 0:
        p = np.zeros(n + 1)
        p[0] = 1.0
        return p
    q = mean / (1 + mean)
    return (1 - q) * q ** np.arange(n + 1)


def source_cap(source: SourceSpec, budget: float = SOURCE_BUDGET) -> int:
    """Total-photon cap on the source modes with tail weight below ``budget``."""
    if isinstance(source, FockPM):
        return source.N_plus + source.N_minus
    if isinstance(source, Tmsv):
        if source.xi == 0:
            return 0
        t2 = math.tanh(source.xi) ** 2
        pairs = max(0, math.ceil(math.log(budget) / math.log(t2)) - 1)
        if 2 * pairs > MAX_PURE_SOURCE_PHOTONS:
            raise TruncationBudgetExceeded("source_tail", t2 ** (MAX_PURE_SOURCE_PHOTONS // 2 + 1), budget)
        return 2 * pairs
    n_plus, n_minus = source.mode_photons()
    n = MAX_SOURCE_PHOTONS
    total = np.convolve(_geometric(n_plus, n), _geometric(n_minus, n))[: n + 1]
    tail = 1 - np.cumsum(total)
    ok = np.nonzero(tail < budget)[0]
    if ok.size == 0:
        raise TruncationBudgetExceeded("source_tail", float(tail[-1]), budget)
    return int(ok[0])


def _source_in_d_basis(source: SourceSpec, Vt: np.ndarray, cap: int) -> np.ndarray:
    """Source state with modes rotated by ``d = Vt c``, total <= cap.

    Pure states come back as a vector, mixed ones as a density matrix.
    """
    if isinstance(source, Tmsv):
        psi = np.zeros(fock_dim(2, cap))
        idx = basis_index(2, cap)
        th = math.tanh(source.xi)
        for n in range(cap // 2 + 1):
            psi[idx[(n, n)]] = th**n / math.cosh(source.xi)
        psi = passive_map(Vt, cap) @ psi
        return psi / np.linalg.norm(psi)
    P = passive_map(Vt @ _PM, cap)
    if isinstance(source, FockPM):
        return P[:, basis_index(2, cap)[(source.N_plus, source.N_minus)]]
    if isinstance(source, (Thermal, CorrThermal)):
        n_plus, n_minus = source.mode_photons()
        gp, gm = _geometric(n_plus, cap), _geometric(n_minus, cap)
        w = np.array([gp[a] * gm[b] for a, b in fock_basis(2, cap)])
        rho = (P * w) @ P.T
        return rho / np.trace(rho)
    raise UnsupportedState(f"no Fock-space construction for {source!r}")


def _log_kraus(t: float, cap: int) -> np.ndarray:
    """``log <n-l| A_l |n>`` for pure loss with transmissivity ``t``, indexed ``[n, l]``."""
    logt = math.log(t) if t > 0 else -math.inf
    log1t = math.log1p(-t) if t < 1 else -math.inf
    out = np.full((cap + 1, cap + 1), -np.inf)
    for a in range(cap + 1):
        for l in range(a + 1):
            lt = (a - l) * logt if a > l else 0.0
            ll = l * log1t if l else 0.0
            out[a, l] = 0.5 * (gammaln(a + 1) - gammaln(l + 1) - gammaln(a - l + 1) + lt + ll)
    return out


def _loss_superop(t: float, cap: int) -> sparse.csr_matrix:
    """Pure loss on one mode acting on ``(a, b)`` index pairs of a density matrix."""
    logk = _log_kraus(t, cap)
    rows, cols, vals = [], [], []
    for a in range(cap + 1):
        for b in range(cap + 1):
            for l in range(min(a, b) + 1):
                v = logk[a, l] + logk[b, l]
                if v > -700:
                    rows.append((a - l) * (cap + 1) + (b - l))
                    cols.append(a * (cap + 1) + b)
                    vals.append(math.exp(v))
    size = (cap + 1) ** 2
    return sparse.csr_matrix((vals, (rows, cols)), shape=(size, size))


def _kraus_tensor(t: float, cap: int, keep: int) -> np.ndarray:
    """``A[l, x, a] = <x| A_l |a>`` with output photon number ``x <= keep``."""
    logk = _log_kraus(t, cap)
    A = np.zeros((cap + 1, keep + 1, cap + 1))
    for a in range(cap + 1):
        for l in range(a + 1):
            if a - l <= keep:
                A[l, a - l, a] = math.exp(logk[a, l])
    return A


def _loss_mixed(rho: np.ndarray, t1: float, t2: float, cap: int) -> np.ndarray:
    T = grid_from_list(rho, cap)  # [a1, a2, b1, b2]
    c = cap + 1
    X = T.transpose(0, 2, 1, 3).reshape(c * c, c * c)  # (a1 b1), (a2 b2)
    X = _loss_superop(t1, cap) @ X
    X = (_loss_superop(t2, cap) @ X.T).T
    return list_from_grid(X.reshape(c, c, c, c).transpose(0, 2, 1, 3), cap)


def _loss_pure(psi: np.ndarray, t1: float, t2: float, cap: int, keep: int) -> np.ndarray:
    """Image density matrix (total <= keep) of a pure two-mode state after loss."""
    basis = fock_basis(2, cap)
    G = np.zeros((cap + 1, cap + 1))
    for (a, b), v in zip(basis, psi):
        G[a, b] = v
    A1 = _kraus_tensor(t1, cap, keep)
    A2 = _kraus_tensor(t2, cap, keep)
    # out[l1, l2, x, y]: image amplitude after l1, l2 photons went to the environment
    out = np.einsum("kxa,myb,ab->kmxy", A1, A2, G, optimize=True)
    kept = fock_basis(2, keep)
    x = np.array([t[0] for t in kept])
    y = np.array([t[1] for t in kept])
    M = out[:, :, x, y].reshape(-1, len(kept))
    M = M[np.any(M != 0, axis=1)]
    return M.T @ M


@dataclass(frozen=True)
class ImageCore:
    """Image state as a two-mode density matrix plus the modes it lives in.

    ``modes`` is ``K x 2`` with orthonormal columns.  ``rho`` covers every
    image photon number up to ``cap``; heavier states are cut there and the
    missing weight shows up in :meth:`tail`.
    """

    s: float
    u1: np.ndarray
    u2: np.ndarray
    modes: np.ndarray
    rho: np.ndarray  # two-mode list basis, total <= cap
    cap: int
    basis_residual: float

    def tail(self, n_max: int) -> float:
        kept = np.trace(self.rho[: fock_dim(2, min(n_max, self.cap))]
                        [:, : fock_dim(2, min(n_max, self.cap))])
        return max(0.0, 1.0 - float(kept))

    def truncated(self, n_max: int) -> np.ndarray:
        if n_max > self.cap:
            padded = np.zeros((fock_dim(2, n_max),) * 2)
            padded[: self.rho.shape[0], : self.rho.shape[1]] = self.rho
            rho = padded
        else:
            d = fock_dim(2, n_max)
            rho = self.rho[:d, :d]
        return rho / np.trace(rho)


def image_core(source: SourceSpec, system: ImagingSystem, s: float, K: int) -> ImageCore:
    if system.psf.kind != GAUSSIAN:
        raise UnsupportedPsf("the Fock-space oracle needs a Gaussian PSF")
    u1, u2, res = image_modes(s, system.x_r, K)
    L = math.sqrt(system.eta) * np.column_stack([u1, u2])
    W, sig, Vt = np.linalg.svd(L, full_matrices=False)
    cap = source_cap(source)
    state = _source_in_d_basis(source, Vt, cap)
    t = np.clip(sig**2, 0.0, 1.0)
    if state.ndim == 1:
        keep = min(cap, MAX_IMAGE_PHOTONS)
        rho = _loss_pure(state, t[0], t[1], cap, keep)
    else:
        keep = cap
        rho = _loss_mixed(state, t[0], t[1], cap)
    return ImageCore(s, u1, u2, W, rho, keep, res)


def choose_n_max(cores, source: SourceSpec, budget: float = IMAGE_BUDGET) -> int:
    """Photon cap on the image plane: exact for Fock sources, else by tail weight."""
    if isinstance(source, FockPM):
        return source.N_plus + source.N_minus
    cap = max(c.cap for c in cores)
    for n in range(cap + 1):
        if max(c.tail(n) for c in cores) < budget:
            return n
    return cap


@dataclass(frozen=True, eq=False)
class TruncatedState:
    """Image state ``rho = E core E^T`` with ``E`` the Fock lift of the image modes.

    ``rho`` is only materialised on request since the ``K``-mode space grows
    quickly; all oracle computations use ``core`` and the mode matrix.
    """

    K: int
    n_max: int
    modes: np.ndarray
    core: np.ndarray
    tail_mass: float
    basis_residual: float
    u1: np.ndarray
    u2: np.ndarray

    @property
    def dim(self) -> int:
        return fock_dim(self.K, self.n_max)

    @property
    def index_map(self) -> dict[tuple[int, ...], int]:
        return basis_index(self.K, self.n_max)

    @cached_property
    def embedding(self) -> np.ndarray:
        if self.dim > DENSE_LIMIT * 25:
            raise MemoryError(f"K={self.K}, n_max={self.n_max}: {self.dim} states is too many to embed")
        return passive_map(self.modes, self.n_max)

    @cached_property
    def rho(self) -> np.ndarray:
        if self.dim > DENSE_LIMIT:
            raise MemoryError(f"dense rho with {self.dim} states refused (limit {DENSE_LIMIT})")
        E = self.embedding
        return E @ self.core @ E.T

    def number_distribution(self, A: np.ndarray) -> np.ndarray:
        """Joint photon-number distribution in two orthonormal modes ``A`` (``K x 2``)
        whose span contains the image modes."""
        C = A.T @ self.modes
        if np.linalg.norm(A @ C - self.modes) > 1e-9:
            raise ValueError("requested modes do not span the image modes")
        G = passive_map(C, self.n_max)
        rho = G @ self.core @ G.T
        out = np.zeros((self.n_max + 1, self.n_max + 1))
        for (a, b), v in zip(fock_basis(2, self.n_max), np.diag(rho)):
            out[a, b] = v
        return out

    def symmetric_modes(self) -> np.ndarray:
        """Normalised ``(u1 + u2, u1 - u2)`` image modes (columns)."""
        plus = self.u1 + self.u2
        minus = self.u1 - self.u2
        cols = [plus / np.linalg.norm(plus)]
        nm = np.linalg.norm(minus)
        if nm < 1e-14:
            # s = 0: any unit vector orthogonal to the common mode
            e = np.zeros(self.K)
            e[1] = 1.0
            minus, nm = e, 1.0
        cols.append(minus / nm)
        return np.column_stack(cols)


def build_image_state(source: SourceSpec, system: ImagingSystem, s: float,
                      K: int | None = None, n_max: int | None = None,
                      tail_budget: float = IMAGE_BUDGET) -> TruncatedState:
    """Reduced state of the ``K`` image modes at separation ``s``."""
    if K is None:
        K = choose_K([s], system.x_r)
    elif K < 2:
        raise ValueError(f"K must be >= 2, got {K}")
    core = image_core(source, system, s, K)
    if core.basis_residual > BASIS_BUDGET:
        raise TruncationBudgetExceeded("basis_residual", core.basis_residual, BASIS_BUDGET)
    if n_max is None:
        n_max = choose_n_max([core], source, tail_budget)
    tail = core.tail(n_max)
    if tail > tail_budget:
        raise TruncationBudgetExceeded("image_tail", tail, tail_budget)
    return TruncatedState(K, n_max, core.modes, core.truncated(n_max), tail,
                          core.basis_residual, core.u1, core.u2)
