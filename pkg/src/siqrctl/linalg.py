"""Small dense real linear algebra (matrices up to 4x8).

Matrices are plain 2-D float ndarrays. Products and transposes go through
numpy with shape checking; the characteristic polynomial, eigenvalues,
rank and Routh-Hurwitz test are implemented here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    DegreeUnsupported,
    NoConvergence,
    NotSquare,
    ShapeMismatch,
)

DK_MAX_ITER = 1000
DK_STEP_TOL = 1e-12


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ShapeMismatch(m.shape, ("rows", "cols"), "matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def matmul(a, b) -> np.ndarray:
    a, b = _as_matrix(a), _as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(a.shape, b.shape, "matmul")
    return a @ b


def transpose(a) -> np.ndarray:
    return _as_matrix(a).T.copy()


def horzcat(blocks) -> np.ndarray:
    blocks = [_as_matrix(b) for b in blocks]
    rows = blocks[0].shape[0]
    for b in blocks[1:]:
        if b.shape[0] != rows:
            raise ShapeMismatch(blocks[0].shape, b.shape, "horzcat")
    return np.hstack(blocks)


def identity(n: int) -> np.ndarray:
    return np.eye(n)


def frobenius_norm(a) -> float:
    return float(np.sqrt(np.sum(_as_matrix(a) ** 2)))


def _square(a) -> np.ndarray:
    m = _as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise NotSquare(m.shape)
    return m


def char_poly(a) -> np.ndarray:
    """Monic coefficients of det(lambda*I - A), highest degree first.

    Faddeev-LeVerrier: M_k = A M_{k-1} + c_{n-k+1} I,
    c_{n-k} = -tr(A M_k) / k.
    """
    a = _square(a)
    n = a.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(a @ m) / k
    return coeffs


def companion(coeffs) -> np.ndarray:
    """Companion matrix whose characteristic polynomial is ``coeffs``."""
    c = np.asarray(coeffs, dtype=float)
    c = c / c[0]
    n = c.size - 1
    comp = np.zeros((n, n))
    comp[0, :] = -c[1:]
    comp[1:, :-1] = np.eye(n - 1)
    return comp


def poly_eval(coeffs, z) -> complex:
    return complex(kernels.poly_eval(np.asarray(coeffs, dtype=float), complex(z)))


def _poly_derivative(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.size - 1
    return coeffs[:-1] * np.arange(n, 0, -1)


@dataclass(frozen=True)
class EigenSet:
    """Multiplicity-counted eigenvalues sorted by (real, imag)."""

    values: tuple[complex, ...]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @property
    def max_real(self) -> float:
        return max(z.real for z in self.values)

    def contains(self, target: complex, tol: float) -> bool:
        return any(abs(z - target) <= tol for z in self.values)

    def to_list(self) -> list[list[float]]:
        return [[z.real, z.imag] for z in self.values]


def _pair_conjugates(roots: list[complex], scale: float) -> list[complex]:
    snap = 1e-10 * scale
    roots = [complex(z.real, 0.0) if abs(z.imag) <= snap else z for z in roots]
    upper = sorted((z for z in roots if z.imag > 0), key=lambda z: (z.real, z.imag))
    lower = [z for z in roots if z.imag < 0]
    out = [z for z in roots if z.imag == 0]
    for z in upper:
        # nearest conjugate partner from the lower half-plane
        j = min(range(len(lower)), key=lambda k: abs(lower[k] - z.conjugate()), default=None)
        if j is None:
            out.append(complex(z.real, 0.0))
            continue
        w = lower.pop(j)
        re = 0.5 * (z.real + w.real)
        im = 0.5 * (z.imag - w.imag)
        out.extend([complex(re, im), complex(re, -im)])
    out.extend(complex(w.real, 0.0) for w in lower)
    return out


def _merge_clusters(
    roots: list[complex], coeffs: np.ndarray, scale: float, bound: float
) -> tuple[list[complex], list[bool]]:
    # An m-fold root comes back as m points spread by ~eps**(1/m); their
    # centroid is well conditioned.
    eps = np.finfo(float).eps
    n = len(roots)
    wide = 10.0 * eps ** (1.0 / max(n, 2)) * scale
    parent = list(range(n))

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for a in range(n):
        for b in range(a + 1, n):
            if abs(roots[a] - roots[b]) <= wide:
                parent[find(a)] = find(b)
    groups: dict[int, list[int]] = {}
    for k in range(n):
        groups.setdefault(find(k), []).append(k)
    out = list(roots)
    merged = [False] * n
    for members in groups.values():
        m = len(members)
        if m < 2:
            continue
        pts = [roots[k] for k in members]
        diameter = max(abs(x - y) for x in pts for y in pts)
        if diameter > 10.0 * eps ** (1.0 / m) * scale:
            continue
        centre = sum(pts) / m
        # an m-fold root is a simple root of the (m-1)-th derivative
        d = coeffs
        for _ in range(m - 1):
            d = _poly_derivative(d)
        dd = _poly_derivative(d)
        for _ in range(5):
            fz, dz = poly_eval(d, centre), poly_eval(dd, centre)
            if dz == 0 or fz == 0:
                break
            cand = centre - fz / dz
            if abs(poly_eval(d, cand)) >= abs(fz):
                break
            centre = cand
        if abs(poly_eval(coeffs, centre)) > bound:
            continue
        for k in members:
            out[k] = centre
            merged[k] = True
    return out, merged


def poly_roots(coeffs, tol: float = 1e-8) -> EigenSet:
    c = np.asarray(coeffs, dtype=float)
    if c[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    c = c / c[0]
    n = c.size - 1
    if n == 0:
        return EigenSet(())
    roots, iterations, converged = kernels.durand_kerner(c, DK_MAX_ITER, DK_STEP_TOL)
    roots = [complex(z) for z in roots]
    scale = 1.0 + float(np.max(np.abs(c)))
    bound = tol * scale
    if converged:
        merged = [False] * n
    else:
        # stalling is the signature of a multiple root
        roots, merged = _merge_clusters(roots, c, scale, bound)

    # Newton polish of simple roots; a step is kept only if it lowers the residual.
    dc = _poly_derivative(c)
    for k, z in enumerate(roots):
        if merged[k]:
            continue
        for _ in range(3):
            pz = poly_eval(c, z)
            dz = poly_eval(dc, z)
            if dz == 0:
                break
            cand = z - pz / dz
            if abs(poly_eval(c, cand)) < abs(pz):
                z = cand
            else:
                break
        roots[k] = z

    if not converged and any(abs(poly_eval(c, z)) > bound for z in roots):
        raise NoConvergence(iterations)
    roots = _pair_conjugates(roots, scale)
    return EigenSet(tuple(sorted(roots, key=lambda z: (z.real, z.imag))))


def eigenvalues(a, tol: float = 1e-8) -> EigenSet:
    """Eigenvalues as the Durand-Kerner roots of the characteristic polynomial."""
    a = _square(a)
    if a.shape[0] > 4:
        raise NotSquare(a.shape)
    return poly_roots(char_poly(a), tol)


def rank(a, tol: float = 1e-10) -> int:
    """Pivot count of a partially pivoted row echelon form."""
    m = np.array(_as_matrix(a), dtype=float)
    rows, cols = m.shape
    biggest = float(np.max(np.abs(m))) if m.size else 0.0
    if biggest == 0.0:
        return 0
    threshold = tol * max(rows, cols) * biggest
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = r + int(np.argmax(np.abs(m[r:, c])))
        if abs(m[piv, c]) <= threshold:
            continue
        m[[r, piv]] = m[[piv, r]]
        m[r + 1 :] -= np.outer(m[r + 1 :, c] / m[r, c], m[r])
        r += 1
    return r


def routh_array(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    n = c.size - 1
    width = n // 2 + 1
    table = np.zeros((n + 1, width))
    first = c[0::2]
    second = c[1::2]
    table[0, : first.size] = first
    table[1, : second.size] = second
    for row in range(2, n + 1):
        pivot = table[row - 1, 0]
        if pivot == 0:
            # degenerate array: caller treats as not strictly stable
            table[row:, 0] = 0.0
            break
        for col in range(width - 1):
            table[row, col] = (
                pivot * table[row - 2, col + 1] - table[row - 2, 0] * table[row - 1, col + 1]
            ) / pivot
    return table


def routh_hurwitz_stable(coeffs) -> bool:
    """True iff every root has negative real part."""
    c = np.asarray(coeffs, dtype=float)
    n = c.size - 1
    if n < 1 or n > 4:
        raise DegreeUnsupported(n)
    if c[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    if c[0] < 0:
        c = -c
    if not np.all(c > 0):
        return False
    if n <= 2:
        return True
    return bool(np.all(routh_array(c)[:, 0] > 0))
