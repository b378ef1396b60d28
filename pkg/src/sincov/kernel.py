"""Value algebra, finite kernels, example generators, and kernel file I/O.

A kernel is a fully materialized square table F(u, v) over a finite labeled
point set.  Values live in one of two normed algebras: complex scalars
("complex") or real 2x2 matrices ("mat2", normed by the largest singular
value).  Everything here is immutable after construction and safe to share
between threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

COMPLEX = "complex"
MAT2 = "mat2"
VALUE_KINDS = (COMPLEX, MAT2)

GENERATOR_VARIANTS = (
    "constant",
    "ratio",
    "e1",
    "e0",
    "mat2_ratio",
    "moszner",
    "perturbed_ratio",
)


class KernelError(ValueError):
    """Invalid kernel data, kernel file, or generator parameters."""


class KindMismatchError(KernelError):
    """Operation mixing values of different kinds."""


class KernelFormatError(KernelError):
    """Malformed kernel document; message carries the offending location."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class UnknownLabelError(KernelError):
    """Label not present in the kernel."""


# Arithmetic used by both the scalar value type and the vectorized analysis
# scans is decomposed into single ufunc applications (multiply, add,
# subtract, hypot, sqrt).  Each of those is correctly rounded per element,
# so scalar and array evaluations agree bit for bit; fused expressions such
# as numpy's SIMD complex multiply do not.

def _cmul(ar, ai, br, bi):
    """Complex product in component form."""
    return ar * br - ai * bi, ar * bi + ai * br


def _mul2x2(a00, a01, a10, a11, b00, b01, b10, b11):
    """2x2 matrix product in component form."""
    return (
        a00 * b00 + a01 * b10,
        a00 * b01 + a01 * b11,
        a10 * b00 + a11 * b10,
        a10 * b01 + a11 * b11,
    )


def _norm2x2(m00, m01, m10, m11):
    """Largest singular value of a real 2x2 matrix, in component form.

    Closed form from the two Frobenius invariants (squared Frobenius norm
    and determinant); no iterative factorization.
    """
    q = m00 * m00 + m01 * m01 + m10 * m10 + m11 * m11
    det = m00 * m11 - m01 * m10
    disc = np.sqrt(np.maximum(q * q - 4.0 * (det * det), 0.0))
    return np.sqrt(0.5 * (q + disc))


def _finite(x: float) -> bool:
    return math.isfinite(x)


@dataclass(frozen=True)
class AlgebraValue:
    """One element of the value algebra: a complex scalar or a real 2x2 matrix.

    The payload is a Python complex for kind "complex" and a nested pair of
    row tuples for kind "mat2".  Values are immutable, compare exactly, and
    support +, -, *, scaling by a real, and the algebra norm.
    """

    kind: str
    payload: complex | tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        if self.kind == COMPLEX:
            z = complex(self.payload)
            if not (_finite(z.real) and _finite(z.imag)):
                raise KernelError("non-finite complex value")
            object.__setattr__(self, "payload", z)
        elif self.kind == MAT2:
            m = np.asarray(self.payload, dtype=np.float64)
            if m.shape != (2, 2):
                raise KernelError(f"mat2 payload must be 2x2, got shape {m.shape}")
            if not np.all(np.isfinite(m)):
                raise KernelError("non-finite matrix entry")
            rows = ((float(m[0, 0]), float(m[0, 1])), (float(m[1, 0]), float(m[1, 1])))
            object.__setattr__(self, "payload", rows)
        else:
            raise KernelError(f"unknown value kind {self.kind!r}")

    @classmethod
    def of_complex(cls, z: complex) -> "AlgebraValue":
        return cls(COMPLEX, complex(z))

    @classmethod
    def of_mat2(cls, m) -> "AlgebraValue":
        return cls(MAT2, m)

    @classmethod
    def one(cls, kind: str) -> "AlgebraValue":
        if kind == COMPLEX:
            return cls(COMPLEX, 1.0 + 0.0j)
        if kind == MAT2:
            return cls(MAT2, ((1.0, 0.0), (0.0, 1.0)))
        raise KernelError(f"unknown value kind {kind!r}")

    def as_complex(self) -> complex:
        if self.kind != COMPLEX:
            raise KindMismatchError("not a complex value")
        return self.payload

    def as_mat2(self) -> np.ndarray:
        if self.kind != MAT2:
            raise KindMismatchError("not a mat2 value")
        return np.array(self.payload, dtype=np.float64)

    def _same_kind(self, other: "AlgebraValue") -> None:
        if self.kind != other.kind:
            raise KindMismatchError(f"mixed value kinds {self.kind!r} and {other.kind!r}")

    def __add__(self, other: "AlgebraValue") -> "AlgebraValue":
        self._same_kind(other)
        if self.kind == COMPLEX:
            return AlgebraValue(COMPLEX, self.payload + other.payload)
        a, b = self.payload, other.payload
        return AlgebraValue(
            MAT2,
            (
                (a[0][0] + b[0][0], a[0][1] + b[0][1]),
                (a[1][0] + b[1][0], a[1][1] + b[1][1]),
            ),
        )

    def __sub__(self, other: "AlgebraValue") -> "AlgebraValue":
        self._same_kind(other)
        if self.kind == COMPLEX:
            return AlgebraValue(COMPLEX, self.payload - other.payload)
        a, b = self.payload, other.payload
        return AlgebraValue(
            MAT2,
            (
                (a[0][0] - b[0][0], a[0][1] - b[0][1]),
                (a[1][0] - b[1][0], a[1][1] - b[1][1]),
            ),
        )

    def __mul__(self, other: "AlgebraValue") -> "AlgebraValue":
        self._same_kind(other)
        if self.kind == COMPLEX:
            a, b = self.payload, other.payload
            re, im = _cmul(a.real, a.imag, b.real, b.imag)
            return AlgebraValue(COMPLEX, complex(re, im))
        a, b = self.payload, other.payload
        c00, c01, c10, c11 = _mul2x2(
            a[0][0], a[0][1], a[1][0], a[1][1], b[0][0], b[0][1], b[1][0], b[1][1]
        )
        return AlgebraValue(MAT2, ((c00, c01), (c10, c11)))

    def scale(self, factor: float) -> "AlgebraValue":
        lam = float(factor)
        if self.kind == COMPLEX:
            return AlgebraValue(COMPLEX, complex(lam * self.payload.real, lam * self.payload.imag))
        a = self.payload
        return AlgebraValue(
            MAT2,
            ((lam * a[0][0], lam * a[0][1]), (lam * a[1][0], lam * a[1][1])),
        )

    @property
    def norm(self) -> float:
        if self.kind == COMPLEX:
            return float(np.hypot(self.payload.real, self.payload.imag))
        a = self.payload
        return float(_norm2x2(a[0][0], a[0][1], a[1][0], a[1][1]))


def defect_term(ax: AlgebraValue, xb: AlgebraValue, ab: AlgebraValue) -> float:
    """Composition defect |ax * xb - ab| of one triple of kernel values."""
    if not (ax.kind == xb.kind == ab.kind):
        raise KindMismatchError(
            f"mixed value kinds {ax.kind!r}, {xb.kind!r}, {ab.kind!r}"
        )
    return (ax * xb - ab).norm


@dataclass(frozen=True, eq=False)
class FiniteKernel:
    """Square table of kernel values, entries[i][j] = F(labels[i], labels[j]).

    The table is stored as a read-only numpy array: complex128 of shape
    (n, n) for kind "complex", float64 of shape (n, n, 2, 2) for "mat2".
    """

    labels: tuple[str, ...]
    value_kind: str
    table: np.ndarray

    def __post_init__(self):
        labels = tuple(str(lab) for lab in self.labels)
        if not labels:
            raise KernelError("kernel needs at least one label")
        if len(set(labels)) != len(labels):
            raise KernelError("duplicate labels")
        if self.value_kind not in VALUE_KINDS:
            raise KernelError(f"unknown value kind {self.value_kind!r}")
        n = len(labels)
        if self.value_kind == COMPLEX:
            table = np.array(self.table, dtype=np.complex128)
            if table.shape != (n, n):
                raise KernelError(
                    f"table shape {table.shape} does not match {n} labels"
                )
            finite = np.isfinite(table.real) & np.isfinite(table.imag)
        else:
            table = np.array(self.table, dtype=np.float64)
            if table.shape != (n, n, 2, 2):
                raise KernelError(
                    f"table shape {table.shape} does not match {n} labels (need (n, n, 2, 2))"
                )
            finite = np.isfinite(table)
        if not finite.all():
            idx = np.argwhere(~finite)[0]
            raise KernelError(f"non-finite entry at index {tuple(int(i) for i in idx[:2])}")
        table.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownLabelError(f"unknown label {label!r}") from None

    def entry(self, i: int, j: int) -> AlgebraValue:
        if self.value_kind == COMPLEX:
            return AlgebraValue(COMPLEX, complex(self.table[i, j]))
        return AlgebraValue(MAT2, self.table[i, j])

    def value_at(self, a: str, b: str) -> AlgebraValue:
        return self.entry(self.index(a), self.index(b))

    def entry_norms(self) -> np.ndarray:
        """Norms of all entries as an (n, n) float array."""
        if self.value_kind == COMPLEX:
            return np.hypot(self.table.real, self.table.imag)
        t = self.table
        return _norm2x2(t[..., 0, 0], t[..., 0, 1], t[..., 1, 0], t[..., 1, 1])

    def max_norm(self) -> float:
        return float(self.entry_norms().max())

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteKernel):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.value_kind == other.value_kind
            and np.array_equal(self.table, other.table)
        )


def point_label(x: float) -> str:
    """Shortest round-trip decimal label for a numeric sample point."""
    xf = float(x)
    if xf.is_integer():
        return str(int(xf))
    return repr(xf)


def _as_points(samples, variant: str) -> tuple[np.ndarray, tuple[str, ...]]:
    pts = np.asarray([float(s) for s in samples], dtype=np.float64)
    if pts.size == 0:
        raise KernelError(f"{variant}: needs at least one sample")
    if not np.all(np.isfinite(pts)):
        raise KernelError(f"{variant}: non-finite sample")
    labels = tuple(point_label(p) for p in pts)
    if len(set(labels)) != len(labels):
        raise KernelError(f"{variant}: duplicate sample points")
    return pts, labels


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters for one of the built-in example kernels.

    Variants and their parameters:
      constant        value, size        F identically equal to value
      ratio           samples[, f_values]  F(u, v) = f(u) / f(v)
      e1              n, c               X = {n, ..., n^2}, F(a, b) = a / (b + c)
      e0              samples            F(x, y) = x / y on points from [1, inf)
      mat2_ratio      c0, samples        F(u, v) = [[u/v, 0], [0, c0]]
      moszner         n, size            F identically equal to 1/n
      perturbed_ratio samples[, f_values], eps, seed
                                         F(u, v) = f(u)/f(v) * (1 + delta(u, v)),
                                         delta uniform on [-eps, eps], seeded
    """

    variant: str
    value: complex | None = None
    size: int | None = None
    n: int | None = None
    c: float | None = None
    c0: float | None = None
    samples: tuple[float, ...] | None = None
    f_values: tuple[complex, ...] | None = None
    eps: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.variant not in GENERATOR_VARIANTS:
            raise KernelError(f"unknown generator variant {self.variant!r}")
        if self.samples is not None:
            object.__setattr__(self, "samples", tuple(float(s) for s in self.samples))
        if self.f_values is not None:
            object.__setattr__(self, "f_values", tuple(complex(v) for v in self.f_values))
        getattr(self, f"_validate_{self.variant}")()

    def _need(self, field: str):
        val = getattr(self, field)
        if val is None:
            raise KernelError(f"{self.variant}: parameter {field!r} is required")
        return val

    def _positive_int(self, field: str, minimum: int) -> int:
        raw = self._need(field)
        val = int(raw)
        if val != raw or val < minimum:
            raise KernelError(f"{self.variant}: {field} must be an integer >= {minimum}")
        return val

    def _validate_constant(self):
        v = complex(self._need("value"))
        if not (_finite(v.real) and _finite(v.imag)):
            raise KernelError("constant: value must be finite")
        self._positive_int("size", 1)

    def _ratio_values(self) -> tuple[complex, ...]:
        samples = self._need("samples")
        values = self.f_values if self.f_values is not None else tuple(complex(s) for s in samples)
        if len(values) != len(samples):
            raise KernelError(f"{self.variant}: f_values must match samples in length")
        for v in values:
            if not (_finite(v.real) and _finite(v.imag)):
                raise KernelError(f"{self.variant}: non-finite f value")
            if v == 0:
                raise KernelError(f"{self.variant}: f values must be nonzero")
        return values

    def _validate_ratio(self):
        _as_points(self._need("samples"), self.variant)
        self._ratio_values()

    def _validate_e1(self):
        self._positive_int("n", 2)
        c = float(self._need("c"))
        if not (_finite(c) and c > 0):
            raise KernelError("e1: c must be a positive finite real")

    def _validate_e0(self):
        pts, _ = _as_points(self._need("samples"), self.variant)
        if np.any(pts < 1.0):
            raise KernelError("e0: samples must lie in [1, inf)")

    def _validate_mat2_ratio(self):
        c0 = float(self._need("c0"))
        if not (_finite(c0) and c0 > 0):
            raise KernelError("mat2_ratio: c0 must be a positive finite real")
        pts, _ = _as_points(self._need("samples"), self.variant)
        if np.any(pts <= 0.0):
            raise KernelError("mat2_ratio: samples must be positive")

    def _validate_moszner(self):
        self._positive_int("n", 1)
        self._positive_int("size", 1)

    def _validate_perturbed_ratio(self):
        _as_points(self._need("samples"), self.variant)
        self._ratio_values()
        eps = float(self._need("eps"))
        if not (_finite(eps) and eps >= 0):
            raise KernelError("perturbed_ratio: eps must be a nonnegative finite real")


def _index_labels(count: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(count))


def generate(spec: GeneratorSpec) -> FiniteKernel:
    """Materialize the kernel described by a GeneratorSpec."""
    v = spec.variant
    if v == "constant":
        size = int(spec.size)
        table = np.full((size, size), complex(spec.value), dtype=np.complex128)
        return FiniteKernel(_index_labels(size), COMPLEX, table)
    if v == "moszner":
        size = int(spec.size)
        table = np.full((size, size), 1.0 / int(spec.n), dtype=np.complex128)
        return FiniteKernel(_index_labels(size), COMPLEX, table)
    if v == "e1":
        n, c = int(spec.n), float(spec.c)
        pts = np.arange(n, n * n + 1, dtype=np.float64)
        labels = tuple(point_label(p) for p in pts)
        table = (pts[:, None] / (pts[None, :] + c)).astype(np.complex128)
        return FiniteKernel(labels, COMPLEX, table)
    if v == "e0":
        pts, labels = _as_points(spec.samples, v)
        table = (pts[:, None] / pts[None, :]).astype(np.complex128)
        return FiniteKernel(labels, COMPLEX, table)
    if v == "mat2_ratio":
        pts, labels = _as_points(spec.samples, v)
        size = pts.size
        table = np.zeros((size, size, 2, 2), dtype=np.float64)
        table[..., 0, 0] = pts[:, None] / pts[None, :]
        table[..., 1, 1] = float(spec.c0)
        return FiniteKernel(labels, MAT2, table)
    if v in ("ratio", "perturbed_ratio"):
        _, labels = _as_points(spec.samples, v)
        f = np.asarray(spec._ratio_values(), dtype=np.complex128)
        table = f[:, None] / f[None, :]
        if v == "perturbed_ratio":
            rng = np.random.default_rng(0 if spec.seed is None else int(spec.seed))
            delta = rng.uniform(-float(spec.eps), float(spec.eps), table.shape)
            table = table * (1.0 + delta)
        return FiniteKernel(labels, COMPLEX, table)
    raise KernelError(f"unknown generator variant {v!r}")


# Kernel file format: a UTF-8 JSON document
#   { "labels": [...], "value_kind": "complex" | "mat2",
#     "entries": [[ {"re": r, "im": i} | {"m": [[a, b], [c, d]]}, ...], ...] }
# entries is row-major, entries[i][j] = F(labels[i], labels[j]).  Unknown
# top-level keys are rejected; all reals must be finite.

_TOP_KEYS = ("labels", "value_kind", "entries")


def save_kernel(kernel: FiniteKernel) -> bytes:
    """Serialize deterministically: fixed key order, shortest round-trip reals."""
    if kernel.value_kind == COMPLEX:
        entries = [
            [{"re": float(z.real), "im": float(z.imag)} for z in row]
            for row in kernel.table
        ]
    else:
        entries = [
            [
                {"m": [[float(m[0, 0]), float(m[0, 1])], [float(m[1, 0]), float(m[1, 1])]]}
                for m in row
            ]
            for row in kernel.table
        ]
    doc = {"labels": list(kernel.labels), "value_kind": kernel.value_kind, "entries": entries}
    text = json.dumps(doc, ensure_ascii=False, allow_nan=False, separators=(",", ":"))
    return (text + "\n").encode("utf-8")


def _real_at(obj, location: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise KernelFormatError("expected a real number", location)
    val = float(obj)
    if not _finite(val):
        raise KernelFormatError("non-finite value", location)
    return val


def _parse_complex_entry(obj, location: str) -> complex:
    if not isinstance(obj, dict) or set(obj.keys()) != {"re", "im"}:
        raise KernelFormatError('complex entry must be {"re": ..., "im": ...}', location)
    return complex(_real_at(obj["re"], location + ".re"), _real_at(obj["im"], location + ".im"))


def _parse_mat2_entry(obj, location: str) -> list:
    if not isinstance(obj, dict) or set(obj.keys()) != {"m"}:
        raise KernelFormatError('mat2 entry must be {"m": [[a, b], [c, d]]}', location)
    m = obj["m"]
    if not isinstance(m, list) or len(m) != 2 or any(
        not isinstance(row, list) or len(row) != 2 for row in m
    ):
        raise KernelFormatError("m must be a 2x2 array", location + ".m")
    return [
        [_real_at(m[i][j], f"{location}.m[{i}][{j}]") for j in (0, 1)]
        for i in (0, 1)
    ]


def load_kernel(data: bytes) -> FiniteKernel:
    """Parse and validate a kernel document; inverse of save_kernel."""
    try:
        text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else str(data)
    except UnicodeDecodeError as exc:
        raise KernelFormatError(f"not valid UTF-8: {exc}") from None

    def _reject_constant(token):
        raise KernelFormatError(f"non-finite literal {token!r} not allowed")

    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise KernelFormatError(f"invalid JSON: {exc}") from None

    if not isinstance(doc, dict):
        raise KernelFormatError("top level must be an object")
    unknown = set(doc.keys()) - set(_TOP_KEYS)
    if unknown:
        raise KernelFormatError(f"unknown top-level keys {sorted(unknown)}")
    for key in _TOP_KEYS:
        if key not in doc:
            raise KernelFormatError(f"missing top-level key {key!r}")

    labels = doc["labels"]
    if not isinstance(labels, list) or not labels or any(not isinstance(s, str) for s in labels):
        raise KernelFormatError("labels must be a non-empty array of strings", "labels")
    if len(set(labels)) != len(labels):
        raise KernelFormatError("duplicate labels", "labels")

    kind = doc["value_kind"]
    if kind not in VALUE_KINDS:
        raise KernelFormatError(f"unknown value_kind {kind!r}", "value_kind")

    entries = doc["entries"]
    n = len(labels)
    if not isinstance(entries, list) or len(entries) != n:
        raise KernelFormatError(f"entries must have {n} rows", "entries")
    for i, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != n:
            raise KernelFormatError(f"row must have {n} entries", f"entries[{i}]")

    if kind == COMPLEX:
        table = np.empty((n, n), dtype=np.complex128)
        for i, row in enumerate(entries):
            for j, obj in enumerate(row):
                table[i, j] = _parse_complex_entry(obj, f"entries[{i}][{j}]")
    else:
        table = np.empty((n, n, 2, 2), dtype=np.float64)
        for i, row in enumerate(entries):
            for j, obj in enumerate(row):
                table[i, j] = _parse_mat2_entry(obj, f"entries[{i}][{j}]")

    return FiniteKernel(tuple(labels), kind, table)
