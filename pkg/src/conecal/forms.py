"""Pointwise exterior algebra over an n-dimensional coordinate patch with a
position-dependent metric.

Alternating k-forms are stored sparsely as maps from canonical multi-indices
(strictly increasing tuples of 1-based coordinate indices) to coefficients.
The inner product on k-forms is the Gram determinant of the inverse metric,
and the Hodge star is obtained by solving its defining relation
``a ^ (star b) = <a, b> * volume`` against the coordinate basis, so every
sign below is derived from wedge parities rather than hard-coded.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

import numpy as np

__all__ = [
    "MetricAtPoint",
    "KForm",
    "multi_indices",
    "sort_index",
    "wedge",
    "form_inner",
    "form_norm",
    "volume_form",
    "hodge_star",
    "flat",
    "sharp",
    "interior_product",
    "numeric_exterior_derivative",
    "numeric_divergence",
]

Index = tuple[int, ...]


@dataclass(frozen=True)
class MetricAtPoint:
    """Metric matrix g, its inverse, and det g at one point of the patch."""

    g: np.ndarray
    g_inv: np.ndarray
    det_g: float

    @property
    def n(self) -> int:
        return self.g.shape[0]


def multi_indices(n: int, k: int) -> Iterator[Index]:
    """Canonical degree-k multi-indices over coordinates 1..n."""
    return itertools.combinations(range(1, n + 1), k)


def sort_index(idx: Index) -> tuple[int, Index]:
    """Sort an index tuple, returning (parity sign, canonical tuple).

    The sign is 0 when the tuple contains a repeated index.
    """
    lst = list(idx)
    sign = 1
    for i in range(1, len(lst)):
        j = i
        while j > 0 and lst[j - 1] > lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            sign = -sign
            j -= 1
        if j > 0 and lst[j - 1] == lst[j]:
            return 0, ()
    return sign, tuple(lst)


@dataclass(frozen=True)
class KForm:
    """Alternating k-form at a point, sparse over canonical multi-indices."""

    n: int
    degree: int
    coeffs: Mapping[Index, float]

    def __post_init__(self):
        for idx in self.coeffs:
            if len(idx) != self.degree:
                raise ValueError(f"index {idx} does not have degree {self.degree}")
            if any(not 1 <= a <= self.n for a in idx):
                raise ValueError(f"index {idx} out of range 1..{self.n}")
            if any(idx[i] >= idx[i + 1] for i in range(len(idx) - 1)):
                raise ValueError(f"index {idx} is not strictly increasing")

    @classmethod
    def zero(cls, n: int, degree: int) -> "KForm":
        return cls(n, degree, {})

    @classmethod
    def basis(cls, n: int, idx: Index) -> "KForm":
        """The basis form dx_idx (idx must be canonical)."""
        return cls(n, len(idx), {tuple(idx): 1.0})

    @classmethod
    def from_terms(cls, n: int, degree: int, terms: Mapping[Index, float]) -> "KForm":
        """Build a form from possibly unsorted index tuples, resolving parities."""
        out: dict[Index, float] = {}
        for idx, c in terms.items():
            sign, canon = sort_index(tuple(idx))
            if sign != 0 and c != 0.0:
                out[canon] = out.get(canon, 0.0) + sign * c
        return cls(n, degree, out)

    def coefficient(self, idx: Index) -> float:
        return self.coeffs.get(tuple(idx), 0.0)

    def __add__(self, other: "KForm") -> "KForm":
        self._check_compatible(other)
        out = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            out[idx] = out.get(idx, 0.0) + c
        return KForm(self.n, self.degree, out)

    def __sub__(self, other: "KForm") -> "KForm":
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> "KForm":
        return KForm(self.n, self.degree, {i: scalar * c for i, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "KForm":
        return -1.0 * self

    def max_abs(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def _check_compatible(self, other: "KForm"):
        if self.n != other.n or self.degree != other.degree:
            raise ValueError("forms live in different spaces or degrees")


def wedge(a: KForm, b: KForm) -> KForm:
    """Exterior product; graded-anticommutative and bilinear."""
    if a.n != b.n:
        raise ValueError("forms live over different dimensions")
    degree = a.degree + b.degree
    if degree > a.n:
        raise ValueError(f"degree overflow: {a.degree} + {b.degree} > n = {a.n}")
    out: dict[Index, float] = {}
    for ia, ca in a.coeffs.items():
        for ib, cb in b.coeffs.items():
            sign, canon = sort_index(ia + ib)
            if sign != 0:
                out[canon] = out.get(canon, 0.0) + sign * ca * cb
    return KForm(a.n, degree, out)


def _gram_entry(m: MetricAtPoint, alpha: Index, beta: Index) -> float:
    """<dx_alpha, dx_beta> as the determinant of the inverse-metric submatrix."""
    k = len(alpha)
    if k == 0:
        return 1.0
    rows = np.array(alpha) - 1
    cols = np.array(beta) - 1
    return float(np.linalg.det(m.g_inv[np.ix_(rows, cols)]))


def form_inner(a: KForm, b: KForm, m: MetricAtPoint) -> float:
    """Inner product of equal-degree forms via Gram determinants."""
    if a.degree != b.degree:
        raise ValueError(f"degree mismatch: {a.degree} vs {b.degree}")
    if a.n != b.n or a.n != m.n:
        raise ValueError("dimension mismatch between forms and metric")
    total = 0.0
    for ia, ca in a.coeffs.items():
        for ib, cb in b.coeffs.items():
            total += ca * cb * _gram_entry(m, ia, ib)
    return total


def form_norm(a: KForm, m: MetricAtPoint) -> float:
    return math.sqrt(max(form_inner(a, a, m), 0.0))


def volume_form(m: MetricAtPoint) -> KForm:
    """Riemannian volume form sqrt(det g) dx_1 ^ ... ^ dx_n."""
    n = m.n
    return KForm(n, n, {tuple(range(1, n + 1)): math.sqrt(m.det_g)})


def hodge_star(a: KForm, m: MetricAtPoint, volume: KForm | None = None) -> KForm:
    """Hodge star determined by dx_alpha ^ (star a) = <dx_alpha, a> * volume.

    For each degree-k basis index alpha the wedge with the complementary
    basis form pins down one coefficient of the result; the pairing sign is
    read off from ``wedge`` itself.
    """
    n, k = a.n, a.degree
    vol = volume_form(m) if volume is None else volume
    top = tuple(range(1, n + 1))
    vol_coeff = vol.coefficient(top)
    out: dict[Index, float] = {}
    for alpha in multi_indices(n, k):
        comp = tuple(i for i in top if i not in alpha)
        pairing = wedge(KForm.basis(n, alpha), KForm.basis(n, comp)).coefficient(top)
        inner = 0.0
        for beta, cb in a.coeffs.items():
            inner += cb * _gram_entry(m, alpha, beta)
        c = vol_coeff * inner / pairing
        if c != 0.0:
            out[comp] = c
    return KForm(n, n - k, out)


def flat(v: np.ndarray, m: MetricAtPoint) -> KForm:
    """Musical isomorphism vector -> 1-form, components g @ v."""
    w = m.g @ np.asarray(v, dtype=float)
    return KForm(m.n, 1, {(j + 1,): float(w[j]) for j in range(m.n) if w[j] != 0.0})


def sharp(a: KForm, m: MetricAtPoint) -> np.ndarray:
    """Musical isomorphism 1-form -> vector, components g_inv @ a."""
    if a.degree != 1:
        raise ValueError("sharp acts on 1-forms")
    w = np.zeros(m.n)
    for (j,), c in a.coeffs.items():
        w[j - 1] = c
    return m.g_inv @ w


def interior_product(v: np.ndarray, a: KForm) -> KForm:
    """Contraction of a k-form with a vector (in the coordinate frame)."""
    if a.degree < 1:
        raise ValueError("interior product needs degree >= 1")
    v = np.asarray(v, dtype=float)
    out: dict[Index, float] = {}
    for idx, c in a.coeffs.items():
        for pos, comp in enumerate(idx):
            coef = ((-1.0) ** pos) * v[comp - 1] * c
            if coef != 0.0:
                rest = idx[:pos] + idx[pos + 1 :]
                out[rest] = out.get(rest, 0.0) + coef
    return KForm(a.n, a.degree - 1, out)


FormField = Callable[[np.ndarray], KForm]
VectorField = Callable[[np.ndarray], np.ndarray]


def numeric_exterior_derivative(field: FormField, x: np.ndarray, step: float) -> KForm:
    """Central-difference exterior derivative of a form field at x.

    Converges at order step^2 for smooth fields; the caller is responsible
    for keeping the stencil x +/- step*e_i inside the field's domain.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    sample = field(x)
    degree = sample.degree + 1
    if degree > n:
        raise ValueError("derivative degree overflow")
    out = KForm.zero(n, degree)
    for i in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        diff = (field(xp) - field(xm)) * (0.5 / step)
        out = out + wedge(KForm.basis(n, (i + 1,)), diff)
    return out


def numeric_divergence(
    field: VectorField,
    x: np.ndarray,
    step: float,
    sqrt_det: Callable[[np.ndarray], float] | None = None,
) -> float:
    """Coordinate divergence (1/sqrt(det g)) sum_i d_i(sqrt(det g) X_i) by
    central differences, for a field given in coordinate-frame components."""
    if not step > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    weight = sqrt_det if sqrt_det is not None else (lambda _: 1.0)
    total = 0.0
    for i in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        total += (weight(xp) * field(xp)[i] - weight(xm) * field(xm)[i]) / (2.0 * step)
    return total / weight(x)
