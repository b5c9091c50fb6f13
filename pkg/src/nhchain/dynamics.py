"""Non-unitary time evolution and entanglement diagnostics.

Two propagators are provided.  `evolve_exact` expands the initial state
over the biorthogonal modes, attaches e^{-i eps_n t} factors and resums;
with renormalization on, the exponentials are rescaled by the largest
imaginary part before resummation so arbitrarily long times never
overflow (the rescaling is a positive factor and drops out of the
normalized state).  `arnoldi_step` advances one time step in a Krylov
subspace: it orthonormalizes {psi, H psi, ..., H^{M-1} psi} by full
Gram-Schmidt with one reorthogonalization pass, exponentiates the small
Hessenberg matrix, and maps back.  Both renormalize after every step,
mirroring how a non-unitary evolution is turned into a physical state.

The half-chain entanglement entropy of a fixed-N state is computed by
reshaping amplitudes into a (left pattern) x (right pattern) matrix and
reading singular values.  Splitting an occupation word at the cut needs
a fermionic reordering sign in general; with the ascending site ordering
used throughout, left-block operators already precede right-block ones,
so the sign is +1 for every word (asserted here once in the comment
rather than recomputed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np
import scipy.linalg

from .model import FockBasis, HamiltonianMatrix, ModelParams, build_fock_basis, build_many_body, build_single_particle
from .spectral import SpectralDecomposition, decompose, density_profile, fock_ipr, ipr

EXPM_COND_CAP = 1e8
BREAKDOWN_TOL = 1e-14

OBSERVABLE_NAMES = ("density", "ipr", "fock_ipr", "s_ee", "rmax_overlap")


@dataclass(frozen=True)
class EvolverConfig:
    method: str = "krylov"           # "exact" | "krylov"
    M: int = 15                      # Krylov dimension (25 is the many-body default)
    dt: float = 0.2
    renormalize: bool = True
    t_max: float = 10.0
    record_stride: int = 1

    def __post_init__(self) -> None:
        if self.method not in ("exact", "krylov"):
            raise ValueError(f"method must be 'exact' or 'krylov', got {self.method!r}")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


@dataclass
class ObservableSeries:
    """Records (t, name, site_or_scalar_index, value) plus provenance."""

    records: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def append(self, t: float, name: str, index: int, value: float) -> None:
        self.records.append((t, name, index, value))

    def values(self, name: str) -> "np.ndarray":
        """(t, value) pairs of a scalar observable."""
        return np.array([(t, v) for t, n, _, v in self.records if n == name])

    def profile_at(self, name: str, t: float, atol: float = 1e-9) -> np.ndarray:
        rows = [(i, v) for tt, n, i, v in self.records if n == name and abs(tt - t) < atol]
        rows.sort()
        return np.array([v for _, v in rows])

    def write_csv(self, path: str) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "observable", "index", "value"])
            for row in self.records:
                writer.writerow(row)


@dataclass
class EvolverState:
    psi: np.ndarray
    t: float
    history: ObservableSeries


def initial_localized(L: int, j0: int) -> np.ndarray:
    """Delta state at site j0."""
    if not 0 <= j0 < L:
        raise ValueError(f"j0 must be in 0..{L - 1}, got {j0}")
    psi = np.zeros(L, dtype=complex)
    psi[j0] = 1.0
    return psi


def initial_domain_wall(basis: FockBasis) -> np.ndarray:
    """Product state with the N highest-index sites occupied."""
    if basis.L % 2 or basis.N != basis.L // 2:
        raise ValueError(f"domain wall needs half filling, got L={basis.L}, N={basis.N}")
    word = sum(1 << j for j in range(basis.L // 2, basis.L))
    psi = np.zeros(basis.dim, dtype=complex)
    psi[basis.index_of[word]] = 1.0
    return psi


def evolve_exact(
    decomp: SpectralDecomposition,
    psi0: np.ndarray,
    t: float,
    renormalize: bool = True,
) -> np.ndarray:
    """Biorthogonal mode expansion: sum_n c_n e^{-i eps_n t} |n>."""
    c = decomp.left @ psi0
    w = decomp.eigenvalues
    if renormalize:
        growth = w.imag * t
        growth = growth - growth.max()   # positive rescale, dropped by normalization
        amps = np.exp(growth) * np.exp(-1j * w.real * t)
        psi = decomp.right @ (c * amps)
        norm = np.linalg.norm(psi)
        if norm < 1e-300 or not np.isfinite(norm):
            raise FloatingPointError(
                "evolved state norm left the representable range; mode "
                "coefficients span too many orders (use the Krylov stepper)")
        return psi / norm
    return decomp.right @ (c * np.exp(-1j * w * t))


def _expm_small(Ht: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i dt Ht) via eigendecomposition, Pade fallback near defectiveness."""
    try:
        lam, vecs = scipy.linalg.eig(Ht)
        cond = np.linalg.cond(vecs)
        if np.isfinite(cond) and cond < EXPM_COND_CAP:
            return (vecs * np.exp(-1j * dt * lam)) @ np.linalg.inv(vecs)
    except np.linalg.LinAlgError:
        pass
    return scipy.linalg.expm(-1j * dt * np.asarray(Ht))


def arnoldi_step(
    H,
    psi: np.ndarray,
    M: int,
    dt: float,
    renormalize: bool = True,
) -> np.ndarray:
    """One Krylov step psi -> V_M exp(-i dt H~) V_M^dagger psi.

    H may be a HamiltonianMatrix, dense array, or sparse matrix; only
    mat-vec products are taken.  The recursion stops early when the
    Arnoldi residual drops below 1e-14 (invariant subspace reached, the
    truncated propagator is then exact).  dt=0 returns the input state.
    """
    if dt < 0:
        raise ValueError("dt must be >= 0")
    op = H.entries if isinstance(H, HamiltonianMatrix) else H
    n = len(psi)
    if dt == 0:
        return np.array(psi, dtype=complex, copy=True)
    M = min(M, n)
    V = np.zeros((n, M), dtype=complex)
    h = np.zeros((M + 1, M), dtype=complex)
    norm0 = np.linalg.norm(psi)
    if norm0 < 1e-300:
        raise ValueError("zero state")
    V[:, 0] = np.asarray(psi, dtype=complex) / norm0
    m_eff = M
    for j in range(M):
        w = op @ V[:, j]
        for i in range(j + 1):
            h[i, j] = np.vdot(V[:, i], w)
            w -= h[i, j] * V[:, i]
        for i in range(j + 1):   # second pass recovers orthogonality lost to cancellation
            corr = np.vdot(V[:, i], w)
            w -= corr * V[:, i]
            h[i, j] += corr
        beta = np.linalg.norm(w)
        if j + 1 < M:
            if beta < BREAKDOWN_TOL:
                m_eff = j + 1
                break
            h[j + 1, j] = beta
            V[:, j + 1] = w / beta
    small = _expm_small(h[:m_eff, :m_eff], dt)
    out = V[:, :m_eff] @ small[:, 0]
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite entries in Krylov step")
    if renormalize:
        return out / np.linalg.norm(out)
    return norm0 * out


def entanglement_entropy(psi: np.ndarray, basis: FockBasis, cut: Optional[int] = None) -> float:
    """Half-chain (or custom-cut) von Neumann entanglement entropy."""
    psi = np.asarray(psi)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state norm {norm:.3e} deviates from 1 beyond 1e-8")
    if cut is None:
        cut = basis.L // 2
    if not 0 < cut < basis.L:
        raise ValueError(f"cut must be in 1..{basis.L - 1}")
    left_dim, right_dim = 1 << cut, 1 << (basis.L - cut)
    mask = (1 << cut) - 1
    A = np.zeros((left_dim, right_dim), dtype=complex)
    # Ascending Jordan-Wigner ordering: the left-block creation operators
    # already precede the right-block ones in every word, so the split
    # sign is +1 throughout.
    left_patterns = basis.states & mask
    right_patterns = basis.states >> cut
    A[left_patterns, right_patterns] = psi
    s2 = scipy.linalg.svdvals(A) ** 2
    s2 = s2[s2 > 1e-16]
    return float(-np.sum(s2 * np.log(s2)) + 0.0)   # + 0.0 folds -0.0 into 0.0


def run(
    params: ModelParams,
    config: EvolverConfig,
    initial: np.ndarray,
    observables: Iterable[str] = ("density",),
    basis: Optional[FockBasis] = None,
    sink: Optional[Callable] = None,
) -> ObservableSeries:
    """Evolve `initial` to t_max, recording observables on a time grid.

    Records are appended (and handed to `sink`, when given) as they are
    produced, so a partial run still leaves usable output.  The grid is
    t = k * dt for k = 0, stride, 2*stride, ..., plus the final step.
    """
    names = list(observables)
    unknown = set(names) - set(OBSERVABLE_NAMES)
    if unknown:
        raise ValueError(f"unknown observables: {sorted(unknown)}")
    if params.many_body and basis is None:
        basis = build_fock_basis(params.L, params.N)
    if not params.many_body and ("s_ee" in names or "fock_ipr" in names):
        raise ValueError("s_ee and fock_ipr need a many-body state")
    if "rmax_overlap" in names and config.method != "exact":
        raise ValueError("rmax_overlap needs the exact spectrum; use method='exact'")

    if params.many_body:
        H = build_many_body(params, basis)
    else:
        H = build_single_particle(params)
        basis = None

    series = ObservableSeries(metadata={
        "params": params, "config": config, "observables": names,
    })

    decomp = None
    r_max = None
    if config.method == "exact" or "rmax_overlap" in names:
        decomp = decompose(H)
        k_max = int(np.argmax(decomp.eigenvalues.imag))
        r_max = decomp.right[:, k_max]
        r_max = r_max / np.linalg.norm(r_max)

    def record(t: float, psi: np.ndarray) -> None:
        for name in names:
            if name == "density":
                for j, value in enumerate(density_profile(psi, basis)):
                    series.append(t, "density", j, float(value))
            elif name == "ipr":
                series.append(t, "ipr", 0, ipr(psi))
            elif name == "fock_ipr":
                series.append(t, "fock_ipr", 0, fock_ipr(psi))
            elif name == "s_ee":
                series.append(t, "s_ee", 0, entanglement_entropy(psi, basis))
            elif name == "rmax_overlap":
                series.append(t, "rmax_overlap", 0, float(abs(np.vdot(r_max, psi))))
        if sink is not None:
            sink(series.records[-1])

    psi0 = np.asarray(initial, dtype=complex)
    psi0 = psi0 / np.linalg.norm(psi0)
    n_steps = int(round(config.t_max / config.dt))
    record_at = {k for k in range(0, n_steps + 1, config.record_stride)}
    record_at.add(n_steps)

    if config.method == "exact":
        for k in sorted(record_at):
            psi = evolve_exact(decomp, psi0, k * config.dt, config.renormalize) if k else psi0
            record(k * config.dt, psi)
    else:
        psi = psi0
        record(0.0, psi)
        for k in range(1, n_steps + 1):
            psi = arnoldi_step(H, psi, config.M, config.dt, config.renormalize)
            if k in record_at:
                record(k * config.dt, psi)
    return series
