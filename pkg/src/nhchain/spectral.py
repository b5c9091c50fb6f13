"""Biorthogonal eigendecomposition and static observables.

`decompose` returns eigenvalues sorted by (Re, Im) together with right
eigenvectors (unit columns) and left eigenvectors stored as rows scaled
so that left @ right = I.  Three routes are dispatched on the model
parameters:

* Hermitian (g = 0): one symmetric solve, left = conjugate of right.
* Open boundaries with g != 0: the chain is gauge equivalent to a
  Hermitian one via the diagonal similarity D = diag(e^{-g S}), with S
  the site index (single-particle) or the summed occupied-site index
  (many-body).  Solving the transformed Hermitian problem gives an
  exactly real spectrum and an exactly biorthogonal left/right pair,
  where a general solver would return spurious complex parts.
* Everything else (periodic, g != 0): a general complex solve with the
  left/right overlap rescaled; eigenvalue collisions below 1e-12 are
  reported instead of silently mispairing.

Observables: IPR, Fock-space IPR, imaginary-eigenvalue fraction f_im,
per-site density (right-vector expectation by default, biorthogonal
variant behind a flag), and the staggered charge-density-wave order
parameter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .model import FockBasis, HamiltonianMatrix, build_fock_basis

# Eigenvalue pairs closer than this cannot be reliably biorthogonalized
# (proximity to an exceptional point).
COLLISION_GAP = 1e-12

IM_THRESHOLD = 1e-13


class BiorthogonalizationError(RuntimeError):
    """Left/right pairing failed: eigenvalues collide or overlaps vanish."""


@dataclass(frozen=True)
class SpectralDecomposition:
    """Sorted eigen-triplets: eigenvalues[n], right[:, n], left[n, :]."""

    eigenvalues: np.ndarray     # complex, ascending (Re, then Im)
    right: np.ndarray           # columns, unit 2-norm
    left: np.ndarray            # rows, scaled so left @ right = I

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def mode_coefficients(self, psi: np.ndarray) -> np.ndarray:
        """Expansion coefficients c_n = <<n|psi> of a state over modes."""
        return self.left @ psi


@dataclass(frozen=True)
class StaticObservables:
    """Bundle of the static diagnostics used by sweeps."""

    ipr_per_state: np.ndarray
    f_im: float
    density: np.ndarray         # eigenstate-averaged per-site occupation
    o_dw: float


def _decompose_hermitian(H: np.ndarray) -> SpectralDecomposition:
    w, v = scipy.linalg.eigh(H)
    return SpectralDecomposition(
        eigenvalues=w.astype(complex), right=v, left=v.conj().T
    )


def _decompose_similarity(H: np.ndarray, g: float, S: np.ndarray) -> SpectralDecomposition:
    # D^{-1} H D with D = diag(e^{-g S}) is Hermitian for the open chain.
    H_sym = H * np.exp(g * (S[:, None] - S[None, :]))
    H_sym = 0.5 * (H_sym + H_sym.conj().T)
    w, v = scipy.linalg.eigh(H_sym)
    d = np.exp(-g * (S - S.min()))       # offset only rescales columns
    right = d[:, None] * v
    norms = np.linalg.norm(right, axis=0)
    right = right / norms
    left = (v / d[:, None]).T * norms[:, None]
    return SpectralDecomposition(eigenvalues=w.astype(complex), right=right, left=left)


def _decompose_general(H: np.ndarray) -> SpectralDecomposition:
    w, vl, vr = scipy.linalg.eig(H, left=True, right=True)
    order = np.lexsort((w.imag, w.real))
    w, vl, vr = w[order], vl[:, order], vr[:, order]
    gaps = np.abs(w[1:] - w[:-1])
    if len(gaps) and gaps.min() < COLLISION_GAP:
        raise BiorthogonalizationError(
            f"eigenvalue gap {gaps.min():.3e} below {COLLISION_GAP:.0e}; "
            "pairing ambiguous (near an exceptional point)"
        )
    overlap = np.sum(vl.conj() * vr, axis=0)
    if np.abs(overlap).min() < COLLISION_GAP:
        raise BiorthogonalizationError(
            "left/right overlap underflow; cannot rescale to biorthogonality"
        )
    left = vl.conj().T / overlap[:, None]
    return SpectralDecomposition(eigenvalues=w, right=vr, left=left)


def decompose(H: HamiltonianMatrix) -> SpectralDecomposition:
    """Full eigendecomposition with biorthogonal left/right pairing."""
    if H.dim < 2:
        raise ValueError("need dim >= 2")
    dense = H.dense()
    p = H.params
    if p.g == 0.0:
        # Hermitian for any W and flux: the twist enters conjugately.
        return _decompose_hermitian(dense)
    if p.bc == "obc":
        if p.many_body:
            S = build_fock_basis(p.L, p.N).site_weight()
        else:
            S = np.arange(p.L, dtype=float)
        return _decompose_similarity(dense, p.g, S)
    return _decompose_general(dense)


def ipr(state: np.ndarray) -> float:
    """Inverse participation ratio sum_j |psi_j|^4 (defensively normalized)."""
    p = np.abs(np.asarray(state)) ** 2
    total = p.sum()
    if total < 1e-300:
        raise ValueError("zero vector has no participation ratio")
    p = p / total
    return float(np.sum(p * p))


def fock_ipr(state: np.ndarray) -> float:
    """IPR of many-body amplitudes over occupation basis states."""
    return ipr(state)


def ipr_per_state(decomp: SpectralDecomposition) -> np.ndarray:
    p = np.abs(decomp.right) ** 2
    p = p / p.sum(axis=0, keepdims=True)
    return np.sum(p * p, axis=0)


def imag_fraction(decomp: SpectralDecomposition, threshold: float = IM_THRESHOLD) -> float:
    """Fraction of eigenvalues with |Im eps| above the threshold."""
    return float(np.mean(np.abs(decomp.eigenvalues.imag) > threshold))


def density_profile(
    state: np.ndarray,
    basis: Optional[FockBasis] = None,
    left_state: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Per-site occupation of a normalized state.

    Single-particle (no basis): |psi_j|^2.  Many-body: sum of |c_s|^2
    over states occupying site j.  Passing `left_state` (the matching
    left eigenvector) switches to the biorthogonal expectation
    Re(sum_s l_s c_s n_j(s)) instead of the right-vector default.
    """
    state = np.asarray(state)
    if basis is None:
        if left_state is not None:
            w = (np.asarray(left_state) * state).real
        else:
            w = np.abs(state) ** 2
            w = w / w.sum()
        return w
    if left_state is not None:
        weights = (np.asarray(left_state) * state).real
    else:
        weights = np.abs(state) ** 2
        weights = weights / weights.sum()
    return basis.occupations().T @ weights


def cdw_order(density: np.ndarray) -> float:
    """Staggered density amplitude (1/L)|sum_j (-1)^j n_j|."""
    density = np.asarray(density)
    signs = (-1.0) ** np.arange(len(density))
    return float(abs(np.sum(signs * density)) / len(density))


def static_observables(
    decomp: SpectralDecomposition,
    basis: Optional[FockBasis] = None,
    threshold: float = IM_THRESHOLD,
) -> StaticObservables:
    """Eigenstate-averaged diagnostics of one decomposition."""
    per_state = ipr_per_state(decomp)
    if basis is not None:
        occ = basis.occupations()
        p = np.abs(decomp.right) ** 2
        p = p / p.sum(axis=0, keepdims=True)
        density = (occ.T @ p).mean(axis=1)
    else:
        p = np.abs(decomp.right) ** 2
        p = p / p.sum(axis=0, keepdims=True)
        density = p.mean(axis=1)
    return StaticObservables(
        ipr_per_state=per_state,
        f_im=imag_fraction(decomp, threshold),
        density=density,
        o_dw=cdw_order(density),
    )
