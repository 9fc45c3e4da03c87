"""Dense complex linear algebra helpers.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Subsystem
shapes are sequences of positive integers whose product is the matrix
dimension; the first factor is the most significant index (row-major
Kronecker convention).
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

TOL_HERM = 1e-9
TOL_PSD = 1e-9
TOL_RECON = 1e-10

_EPS = np.finfo(float).eps


class DimensionError(ValueError):
    """Raised when matrix or subsystem dimensions are inconsistent."""


class ValidationError(ValueError):
    """Raised when an input violates a structural requirement.

    ``field`` names the offending quantity (e.g. ``"trace"``) so that
    front ends can report it.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class NotPSDError(ValidationError):
    """Raised when a matrix has an eigenvalue below ``-TOL_PSD``."""


def as_matrix(m, *, square: bool = False) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError("matrix dimensions must be positive")
    if square and a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries", field="entries")
    return a


def max_abs(m) -> float:
    """Largest absolute entry; the norm used for all residuals here."""
    a = np.asarray(m)
    return float(np.max(np.abs(a))) if a.size else 0.0


def kron(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats: Iterable) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, as_matrix(m))
    return out


def _check_shape(dim: int, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimensionError(f"subsystem dimensions must be positive, got {dims}")
    if int(np.prod(dims)) != dim:
        raise DimensionError(
            f"subsystem dimensions {dims} do not multiply to matrix dimension {dim}"
        )
    return dims


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every factor of ``dims`` not listed in ``keep``.

    Args:
        m: square matrix on the composite space.
        dims: subsystem dimensions, product equal to ``m.shape[0]``.
        keep: index or collection of indices of the factors to keep.
            Kept factors appear in ascending order in the result.

    Returns:
        The reduced matrix on the kept factors. Keeping nothing returns
        the 1x1 matrix holding the full trace.
    """
    m = as_matrix(m, square=True)
    dims = _check_shape(m.shape[0], dims)
    if isinstance(keep, (int, np.integer)):
        keep = [keep]
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} factors")

    t = m.reshape(dims + dims)
    # Contract traced factors one at a time, highest index first so the
    # remaining axis numbers stay valid.
    nleft = n
    for i in reversed(range(n)):
        if i in keep:
            continue
        t = np.trace(t, axis1=i, axis2=i + nleft)
        nleft -= 1
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


def is_hermitian(m, tol: float = TOL_HERM) -> bool:
    a = np.asarray(m)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and max_abs(a - a.conj().T) <= tol


def herm_eig(m, tol: float = TOL_HERM) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, v)`` with real eigenvalues ``w`` in descending order and
    the matching orthonormal eigenvectors as the columns of ``v``.

    Raises:
        ValidationError: if ``m`` is not Hermitian within ``tol``.
    """
    a = as_matrix(m, square=True)
    if max_abs(a - a.conj().T) > tol:
        raise ValidationError("matrix is not Hermitian", field="hermiticity")
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    return w[::-1].copy(), v[:, ::-1].copy()


def _noise_floor(w: np.ndarray) -> float:
    # Eigenvalues this small relative to the spectrum are rounding noise.
    return 10.0 * len(w) * _EPS * max(float(np.max(np.abs(w))), 1.0)


def clamp_spectrum(w: np.ndarray, tol: float = TOL_PSD) -> np.ndarray:
    """Clamp tiny eigenvalues of a PSD spectrum to zero.

    Raises:
        NotPSDError: if some eigenvalue is below ``-tol``.
    """
    w = np.asarray(w, dtype=float)
    if w.size and float(np.min(w)) < -tol:
        raise NotPSDError(
            f"matrix is not positive semidefinite (min eigenvalue {np.min(w):.3e})",
            field="eigenvalues",
        )
    w = w.copy()
    w[w <= _noise_floor(w)] = 0.0
    return w


def sqrt_psd(m, tol: float = TOL_PSD) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-tol, 0)`` and eigenvalues at the rounding-noise level
    are set to zero before taking roots, so rank-deficient inputs (pure
    states) get an exactly rank-deficient root.
    """
    w, v = herm_eig(m)
    w = clamp_spectrum(w, tol)
    return (v * np.sqrt(w)) @ v.conj().T


def numerical_rank(w: np.ndarray, tol: float = TOL_PSD) -> int:
    """Number of eigenvalues strictly above ``tol``."""
    return int(np.sum(np.asarray(w) > tol))


def is_unitary(u, tol: float = 1e-8) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return max_abs(u.conj().T @ u - np.eye(u.shape[0])) <= tol


def polar_isometry(g: np.ndarray) -> np.ndarray:
    """Closest isometry to a tall matrix ``g`` (orthonormalizes its columns).

    Uses the polar factor ``U V†`` of the thin SVD, which depends smoothly
    on ``g`` away from rank deficiency.
    """
    u, _, vh = np.linalg.svd(g, full_matrices=False)
    return u @ vh


def haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random isometry of shape ``(rows, cols)``, ``rows >= cols``.

    QR of a complex Ginibre matrix, with columns rephased so that the
    diagonal of ``R`` is real positive.
    """
    if rows < cols:
        raise DimensionError(f"isometry needs rows >= cols, got {rows}x{cols}")
    z = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    phases = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return q * phases


def complete_to_unitary(cols: np.ndarray, positions: Sequence[int], dim: int) -> np.ndarray:
    """Build a ``dim x dim`` unitary with prescribed orthonormal columns.

    Column ``positions[j]`` of the result is ``cols[:, j]``; the remaining
    columns are filled by modified Gram-Schmidt over the canonical basis,
    taken in index order.
    """
    cols = np.asarray(cols, dtype=complex)
    u = np.zeros((dim, dim), dtype=complex)
    basis = [cols[:, j] for j in range(cols.shape[1])]
    filled = set()
    for j, p in enumerate(positions):
        u[:, p] = cols[:, j]
        filled.add(p)
    free = [p for p in range(dim) if p not in filled]
    candidate = 0
    for p in free:
        while True:
            if candidate >= dim:
                raise ValidationError("prescribed columns are not orthonormal")
            v = np.zeros(dim, dtype=complex)
            v[candidate] = 1.0
            candidate += 1
            # Two passes of MGS for numerical orthogonality.
            for _ in range(2):
                for b in basis:
                    v = v - (b.conj() @ v) * b
            nv = np.linalg.norm(v)
            if nv > 1e-8:
                v = v / nv
                break
        basis.append(v)
        u[:, p] = v
    return u
