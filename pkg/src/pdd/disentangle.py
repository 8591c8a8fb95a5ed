"""Spectral disentanglement of the AR matrix.

The ARV is symmetric, so its principal components are eigenpairs. Each
eigenpair ``(lam, u)`` reprojects to the rank-one matrix ``lam * u u^T``
(the RARV of that space); summing all of them gives back the ARV. No
centering is applied, which keeps that identity exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pdd.association import ArvMatrix, AvIndex
from pdd.errors import NumericInput

DEFAULT_TAU = 1.96
DEFAULT_MAX_DS = 5
# loadings closer than this to the largest magnitude count as tied for the sign rule
_SIGN_TIE = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # descending |lambda|
    eigenvectors: np.ndarray  # column k pairs with eigenvalues[k]
    arv: ArvMatrix

    @property
    def T(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.T


@dataclass(frozen=True)
class DisentangledSpace:
    ds_id: int
    eigenvalue: float
    loading: np.ndarray
    rarv: np.ndarray
    av_index: AvIndex | None = field(default=None, compare=False, repr=False)

    @property
    def name(self) -> str:
        return f"DS{self.ds_id}"

    def cross_mask(self) -> np.ndarray:
        if self.av_index is not None:
            return self.av_index.cross_mask()
        return ~np.eye(self.rarv.shape[0], dtype=bool)

    def significant(self, tau: float) -> np.ndarray:
        """Cross-attribute cells whose RAR exceeds tau."""
        return self.cross_mask() & (self.rarv > tau)


def _orient(u: np.ndarray) -> np.ndarray:
    mags = np.abs(u)
    if not mags.size or mags.max() == 0:
        return u
    lead = int(np.flatnonzero(mags >= mags.max() - _SIGN_TIE)[0])
    return -u if u[lead] < 0 else u


def eigendecompose(arv: ArvMatrix) -> SpectralDecomposition:
    """Eigenpairs of the ARV ordered by descending |lambda|.

    A positive eigenvalue precedes a negative one of equal magnitude. Each
    eigenvector is flipped so its largest-magnitude component is positive
    (lowest index wins among ties).
    """
    a = np.asarray(arv.values, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NumericInput(f"ARV must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericInput("ARV contains non-finite entries")
    if not np.array_equal(a, a.T):
        raise NumericInput("ARV is not symmetric")
    if a.shape[0] == 0:
        return SpectralDecomposition(np.zeros(0), np.zeros((0, 0)), arv)

    lam, vec = np.linalg.eigh(a)
    order = np.lexsort((-lam, -np.abs(lam)))
    lam = lam[order]
    vec = vec[:, order]
    vec = np.column_stack([_orient(vec[:, k]) for k in range(vec.shape[1])])
    return SpectralDecomposition(eigenvalues=lam, eigenvectors=vec, arv=arv)


def reproject(decomp: SpectralDecomposition, k: int) -> DisentangledSpace:
    """Rank-one RARV of the k-th (1-based) principal component."""
    if not 1 <= k <= decomp.T:
        raise IndexError(f"component {k} out of range 1..{decomp.T}")
    lam = float(decomp.eigenvalues[k - 1])
    u = decomp.eigenvectors[:, k - 1].copy()
    return DisentangledSpace(
        ds_id=k,
        eigenvalue=lam,
        loading=u,
        rarv=lam * np.outer(u, u),
        av_index=decomp.arv.av_index,
    )


def select_spaces(
    decomp: SpectralDecomposition, tau: float = DEFAULT_TAU, max_ds: int = DEFAULT_MAX_DS
) -> list[DisentangledSpace]:
    """Keep, in |lambda| order, up to ``max_ds`` spaces with a cross-attribute RAR above tau.

    ``ds_id`` is the component's rank in the full spectrum, so a skipped
    component leaves a gap in the numbering.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    if max_ds < 1:
        raise ValueError("max_ds must be >= 1")
    if decomp.T == 0:
        return []
    kept = []
    for k in range(1, decomp.T + 1):
        space = reproject(decomp, k)
        if space.significant(tau).any():
            kept.append(space)
            if len(kept) == max_ds:
                break
    return kept
