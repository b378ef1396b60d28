"""Defect reports, reference-point and geometric-mean factorizations, bound checks.

The central quantity is the composition defect of a kernel: the maximum of
|F(a, x) * F(x, b) - F(a, b)| over all label triples.  Every bound check in
this module compares a derived quantity against that defect (or an explicit
constant) and reports the two sides plus a witness.

Triple enumeration runs one x-slab at a time as vectorized array work; the
SINCOV_THREADS environment variable caps how many slabs are processed
concurrently (0 = auto).  The max reduction breaks ties toward the
lexicographically smallest (a, x, b) index triple, so results are identical
for any chunking or thread count.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .kernel import (
    COMPLEX,
    MAT2,
    FiniteKernel,
    KernelError,
    UnknownLabelError,
    _cmul,
    _mul2x2,
    _norm2x2,
)

TOL_SCALE = 1e-12
_PARALLEL_MIN_SIZE = 64


def thread_limit() -> int:
    """Analysis parallelism cap from SINCOV_THREADS (0 or unset = auto)."""
    raw = os.environ.get("SINCOV_THREADS", "0").strip()
    try:
        value = int(raw)
    except ValueError:
        raise KernelError(f"SINCOV_THREADS must be a nonnegative integer, got {raw!r}") from None
    if value < 0:
        raise KernelError("SINCOV_THREADS must be a nonnegative integer")
    if value == 0:
        return os.cpu_count() or 1
    return value


def check_tolerance(kernel: FiniteKernel, tol: float | None = None) -> float:
    """Absolute tolerance for "must hold" checks: 1e-12 scaled by the largest
    entry norm (floored at one so near-zero kernels keep a usable slack)."""
    if tol is not None:
        if tol < 0:
            raise KernelError("tolerance must be nonnegative")
        return float(tol)
    return TOL_SCALE * max(1.0, kernel.max_norm())


@dataclass(frozen=True)
class DefectReport:
    """Worst and mean composition defect over all |X|^3 triples."""

    defect: float
    argmax_triple: tuple[str, str, str]
    triple_count: int
    mean_defect: float

    def to_dict(self) -> dict:
        return {
            "defect": self.defect,
            "argmax_triple": list(self.argmax_triple),
            "triple_count": self.triple_count,
            "mean_defect": self.mean_defect,
        }


@dataclass(frozen=True)
class Factorization:
    """Point maps f, g extracted from a kernel plus their quality metrics.

    gauge_error = max |f(x) g(x) - 1|; residual = max |F(u, v) - f(u)/f(v)|,
    infinite when f has a zero entry.  reference is None for factorizations
    that are not anchored at a single point.
    """

    reference: str | None
    f: dict[str, complex]
    g: dict[str, complex]
    gauge_error: float
    residual: float

    def to_dict(self) -> dict:
        def cmap(values: dict[str, complex]) -> dict:
            return {k: [v.real, v.imag] for k, v in values.items()}

        return {
            "reference": self.reference,
            "f": cmap(self.f),
            "g": cmap(self.g),
            "gauge_error": self.gauge_error,
            "residual": "inf" if math.isinf(self.residual) else self.residual,
        }


@dataclass(frozen=True)
class BoundCheck:
    """One verified inequality: lhs <= rhs + tol, with the attaining labels."""

    name: str
    lhs: float
    rhs: float
    holds: bool
    witness: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "holds": self.holds,
            "witness": list(self.witness),
        }


def _complex_parts(kernel: FiniteKernel) -> tuple[np.ndarray, np.ndarray]:
    return (
        np.ascontiguousarray(kernel.table.real),
        np.ascontiguousarray(kernel.table.imag),
    )


def _slab_complex(Fr: np.ndarray, Fi: np.ndarray, x: int) -> np.ndarray:
    """Defect terms |F(a, x) F(x, b) - F(a, b)| for all (a, b) at fixed x."""
    pre, pim = _cmul(
        Fr[:, x][:, None], Fi[:, x][:, None], Fr[x, :][None, :], Fi[x, :][None, :]
    )
    return np.hypot(pre - Fr, pim - Fi)


def _slab_mat2(T: np.ndarray, x: int) -> np.ndarray:
    col = tuple(T[:, x, i, j][:, None] for i in (0, 1) for j in (0, 1))
    row = tuple(T[x, :, i, j][None, :] for i in (0, 1) for j in (0, 1))
    p00, p01, p10, p11 = _mul2x2(*col, *row)
    return _norm2x2(
        p00 - T[..., 0, 0], p01 - T[..., 0, 1], p10 - T[..., 1, 0], p11 - T[..., 1, 1]
    )


def _slab_function(kernel: FiniteKernel):
    if kernel.value_kind == COMPLEX:
        Fr, Fi = _complex_parts(kernel)
        return lambda x: _slab_complex(Fr, Fi, x)
    T = kernel.table
    return lambda x: _slab_mat2(T, x)


def sincov_defect(kernel: FiniteKernel) -> DefectReport:
    """Exhaustive maximum of the composition defect over all triples.

    Deterministic: ties in the argmax go to the lexicographically smallest
    (a, x, b) index triple regardless of chunking or thread count.
    """
    n = kernel.n
    slab = _slab_function(kernel)
    sums = np.empty(n, dtype=np.float64)

    def scan(xs: range) -> tuple[float, int]:
        best_val, best_flat = -1.0, n * n * n
        for x in xs:
            D = slab(x)
            flat_ab = int(D.argmax())
            val = float(D.flat[flat_ab])
            a, b = divmod(flat_ab, n)
            flat = (a * n + x) * n + b
            if val > best_val or (val == best_val and flat < best_flat):
                best_val, best_flat = val, flat
            sums[x] = D.sum()
        return best_val, best_flat

    workers = min(thread_limit(), n)
    if workers > 1 and n >= _PARALLEL_MIN_SIZE:
        step = -(-n // workers)
        chunks = [range(lo, min(lo + step, n)) for lo in range(0, n, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(scan, chunks))
    else:
        results = [scan(range(n))]

    best_val, best_flat = -1.0, n * n * n
    for val, flat in results:
        if val > best_val or (val == best_val and flat < best_flat):
            best_val, best_flat = val, flat

    ax, b = divmod(best_flat, n)
    a, x = divmod(ax, n)
    total = float(np.sum(sums))
    mean = min(total / (n * n * n), best_val)
    return DefectReport(
        defect=best_val,
        argmax_triple=(kernel.labels[a], kernel.labels[x], kernel.labels[b]),
        triple_count=n * n * n,
        mean_defect=mean,
    )


def is_exact(kernel: FiniteKernel, tol: float) -> bool:
    """Whether the kernel composes exactly, up to tol."""
    if tol < 0:
        raise KernelError("tol must be nonnegative")
    return sincov_defect(kernel).defect <= tol


def _resolve_defect(kernel: FiniteKernel, defect: float | None) -> float:
    return sincov_defect(kernel).defect if defect is None else float(defect)


def slice_residual(
    kernel: FiniteKernel,
    x0: str,
    *,
    defect: float | None = None,
    tol: float | None = None,
) -> BoundCheck:
    """The x = x0 slice of the defect: max |F(a, b) - F(a, x0) F(x0, b)|.

    Always bounded by the full defect, since every slice term is one of the
    enumerated triples.
    """
    i0 = kernel.index(x0)
    D = _slab_function(kernel)(i0)
    flat = int(D.argmax())
    a, b = divmod(flat, kernel.n)
    lhs = float(D.flat[flat])
    rhs = _resolve_defect(kernel, defect)
    tolv = check_tolerance(kernel, tol)
    return BoundCheck(
        name="slice_residual",
        lhs=lhs,
        rhs=rhs,
        holds=lhs <= rhs + tolv,
        witness=(kernel.labels[a], kernel.labels[b]),
    )


def _require_complex(kernel: FiniteKernel, operation: str) -> None:
    if kernel.value_kind != COMPLEX:
        raise KernelError(f"{operation} requires a complex-valued kernel")


def factorize(kernel: FiniteKernel, x0: str) -> Factorization:
    """Reference-point factorization: f = F(., x0), g = F(x0, .).

    The f values are the kernel column at x0 verbatim.  residual is the
    worst deviation of F from the pairwise ratio f(u)/f(v); it is reported
    as infinity when f vanishes somewhere.
    """
    _require_complex(kernel, "factorize")
    i0 = kernel.index(x0)
    f_vec = kernel.table[:, i0]
    g_vec = kernel.table[i0, :]
    gauge_error = float(np.abs(f_vec * g_vec - 1.0).max())
    if float(np.abs(f_vec).min()) == 0.0:
        residual = math.inf
    else:
        residual = float(np.abs(kernel.table - f_vec[:, None] / f_vec[None, :]).max())
    labels = kernel.labels
    return Factorization(
        reference=x0,
        f={lab: complex(v) for lab, v in zip(labels, f_vec)},
        g={lab: complex(v) for lab, v in zip(labels, g_vec)},
        gauge_error=gauge_error,
        residual=residual,
    )


def _slice_norms(kernel: FiniteKernel, i0: int) -> tuple[np.ndarray, np.ndarray]:
    absT = np.abs(kernel.table)
    return absT[:, i0], absT[i0, :]


def gauge_error_bound(kernel: FiniteKernel, x0: str, x: str, c: float) -> float:
    """Smallest over (a, b) of the defect-driven bound on |g(x) f(x) - 1|:

        (c^2 + 2c) / (|f(a)| |g(b)|) + c |f(x)|/|f(a)| + c |g(x)|/|g(b)|

    with f = F(., x0) and g = F(x0, .).  Requires nonvanishing slices.
    """
    _require_complex(kernel, "gauge_error_bound")
    if c < 0:
        raise KernelError("c must be nonnegative")
    i0, ix = kernel.index(x0), kernel.index(x)
    absf, absg = _slice_norms(kernel, i0)
    if float(absf.min()) == 0.0 or float(absg.min()) == 0.0:
        raise KernelError("gauge_error_bound: slice maps must not vanish")
    grid = (
        (c * c + 2.0 * c) / np.outer(absf, absg)
        + (c * absf[ix]) / absf[:, None]
        + (c * absg[ix]) / absg[None, :]
    )
    return float(grid.min())


def gauge_bound(
    kernel: FiniteKernel,
    x0: str,
    x: str,
    *,
    defect: float | None = None,
    tol: float | None = None,
) -> BoundCheck:
    """Check |g(x) f(x) - 1| against its defect-driven bound at (x0, x)."""
    _require_complex(kernel, "gauge_bound")
    i0, ix = kernel.index(x0), kernel.index(x)
    c = _resolve_defect(kernel, defect)
    rhs = gauge_error_bound(kernel, x0, x, c)
    lhs = float(np.abs(kernel.table[ix, i0] * kernel.table[i0, ix] - 1.0))
    tolv = check_tolerance(kernel, tol)
    return BoundCheck(
        name=f"gauge[{x}]",
        lhs=lhs,
        rhs=rhs,
        holds=lhs <= rhs + tolv,
        witness=(x,),
    )


def _pair_argmax(grid: np.ndarray, labels: tuple[str, ...]) -> tuple[float, tuple[str, str]]:
    flat = int(grid.argmax())
    i, j = divmod(flat, grid.shape[1])
    return float(grid.flat[flat]), (labels[i], labels[j])


def diagonal_report(
    kernel: FiniteKernel,
    *,
    defect: float | None = None,
    tol: float | None = None,
) -> list[BoundCheck]:
    """Three diagonal consequences of the defect bound, any value kind:

      diag_spread   max |F(a,a) - F(x,x)|            <= 2c
      diag_product  max |F(a,x) F(x,a) - F(a,a)|     <= c
      diag_bound    max |F(x,x)| <= min |F(a,a)| + 2c

    diag_product is itself a defect term.  The other two follow by the
    triangle inequality when values commute; for mat2 kernels they are
    computed and reported all the same.
    """
    c = _resolve_defect(kernel, defect)
    tolv = check_tolerance(kernel, tol)
    labels = kernel.labels
    n = kernel.n
    idx = np.arange(n)

    if kernel.value_kind == COMPLEX:
        T = kernel.table
        dre, dim = T.real[idx, idx], T.imag[idx, idx]
        spread = np.hypot(dre[:, None] - dre[None, :], dim[:, None] - dim[None, :])
        pre, pim = _cmul(T.real, T.imag, T.real.T, T.imag.T)
        product = np.hypot(pre - dre[:, None], pim - dim[:, None])
        diag_norm = np.hypot(dre, dim)
    else:
        T = kernel.table
        d = tuple(T[idx, idx, i, j] for i in (0, 1) for j in (0, 1))
        spread = _norm2x2(*(dij[:, None] - dij[None, :] for dij in d))
        a_parts = tuple(T[:, :, i, j] for i in (0, 1) for j in (0, 1))
        b_parts = tuple(T[:, :, i, j].T for i in (0, 1) for j in (0, 1))
        p00, p01, p10, p11 = _mul2x2(*a_parts, *b_parts)
        product = _norm2x2(
            p00 - d[0][:, None], p01 - d[1][:, None], p10 - d[2][:, None], p11 - d[3][:, None]
        )
        diag_norm = _norm2x2(*d)

    spread_lhs, spread_wit = _pair_argmax(spread, labels)
    prod_lhs, prod_wit = _pair_argmax(product, labels)
    mag_lhs = float(diag_norm.max())
    mag_wit = (labels[int(diag_norm.argmax())],)
    mag_rhs = float(diag_norm.min()) + 2.0 * c

    return [
        BoundCheck("diag_spread", spread_lhs, 2.0 * c, spread_lhs <= 2.0 * c + tolv, spread_wit),
        BoundCheck("diag_product", prod_lhs, c, prod_lhs <= c + tolv, prod_wit),
        BoundCheck("diag_bound", mag_lhs, mag_rhs, mag_lhs <= mag_rhs + tolv, mag_wit),
    ]


def unit_diag_bound(
    kernel: FiniteKernel,
    *,
    defect: float | None = None,
    tol: float | None = None,
) -> list[BoundCheck]:
    """Per reference point x0: a slice can only be large if F(x0, x0) is
    close to one, i.e. max |F(x0, b)| * |F(x0, x0) - 1| <= c, and the same
    for the column slice F(., x0)."""
    _require_complex(kernel, "unit_diag_bound")
    c = _resolve_defect(kernel, defect)
    tolv = check_tolerance(kernel, tol)
    T = kernel.table
    labels = kernel.labels
    n = kernel.n
    idx = np.arange(n)
    absT = np.abs(T)
    dev = np.abs(T[idx, idx] - 1.0)

    checks = []
    row_max, row_arg = absT.max(axis=1), absT.argmax(axis=1)
    for i, lab in enumerate(labels):
        lhs = float(row_max[i] * dev[i])
        checks.append(
            BoundCheck(
                name=f"unit_diag_row[{lab}]",
                lhs=lhs,
                rhs=c,
                holds=lhs <= c + tolv,
                witness=(lab, labels[int(row_arg[i])]),
            )
        )
    col_max, col_arg = absT.max(axis=0), absT.argmax(axis=0)
    for i, lab in enumerate(labels):
        lhs = float(col_max[i] * dev[i])
        checks.append(
            BoundCheck(
                name=f"unit_diag_col[{lab}]",
                lhs=lhs,
                rhs=c,
                holds=lhs <= c + tolv,
                witness=(labels[int(col_arg[i])], lab),
            )
        )
    return checks


def growth_witness(
    kernel: FiniteKernel,
    y0: str,
    *,
    defect: float | None = None,
    tol: float | None = None,
) -> list[BoundCheck]:
    """Finite form of the growth argument: the largest |F(., y0)| value,
    less the defect, never exceeds |F(y, y0)| * max |F(., y)| for any y."""
    _require_complex(kernel, "growth_witness")
    j0 = kernel.index(y0)
    c = _resolve_defect(kernel, defect)
    tolv = check_tolerance(kernel, tol)
    absT = np.abs(kernel.table)
    col0 = absT[:, j0]
    lhs = float(col0.max()) - c
    a_star = kernel.labels[int(col0.argmax())]
    rhs_all = absT[:, j0] * absT.max(axis=0)
    return [
        BoundCheck(
            name=f"growth[{lab}]",
            lhs=lhs,
            rhs=float(rhs_all[i]),
            holds=lhs <= float(rhs_all[i]) + tolv,
            witness=(a_star,),
        )
        for i, lab in enumerate(kernel.labels)
    ]


def gm_factorize(kernel: FiniteKernel) -> Factorization:
    """Geometric-mean factorization for strictly positive real kernels.

    f(u) = exp(mean over v of ln F(u, v)), the row geometric mean; g = 1/f.
    For an exact positive ratio kernel this recovers f up to one
    multiplicative constant.
    """
    _require_complex(kernel, "gm_factorize")
    T = kernel.table
    bad = (T.imag != 0.0) | (T.real <= 0.0)
    if bad.any():
        i, j = (int(v) for v in np.argwhere(bad)[0])
        raise KernelError(
            f"gm_factorize: non-positive or non-real entry at "
            f"({kernel.labels[i]!r}, {kernel.labels[j]!r})"
        )
    f_vec = np.exp(np.log(T.real).mean(axis=1))
    g_vec = 1.0 / f_vec
    gauge_error = float(np.abs(f_vec * g_vec - 1.0).max())
    residual = float(np.abs(T - (f_vec[:, None] / f_vec[None, :])).max())
    labels = kernel.labels
    return Factorization(
        reference=None,
        f={lab: complex(v) for lab, v in zip(labels, f_vec)},
        g={lab: complex(v) for lab, v in zip(labels, g_vec)},
        gauge_error=gauge_error,
        residual=residual,
    )


def bound_suite(
    kernel: FiniteKernel,
    ref: str,
    *,
    defect: float | None = None,
    tol: float | None = None,
) -> list[BoundCheck]:
    """All applicable bound checks for one kernel, sharing one defect pass.

    mat2 kernels get the kind-agnostic checks (slice residual, diagonal
    report); complex kernels additionally get the unit-diagonal, growth,
    and gauge checks.  Gauge checks need nonvanishing slices at ref and are
    skipped otherwise.
    """
    c = _resolve_defect(kernel, defect)
    checks = [slice_residual(kernel, ref, defect=c, tol=tol)]
    checks.extend(diagonal_report(kernel, defect=c, tol=tol))
    if kernel.value_kind == COMPLEX:
        checks.extend(unit_diag_bound(kernel, defect=c, tol=tol))
        checks.extend(growth_witness(kernel, ref, defect=c, tol=tol))
        absf, absg = _slice_norms(kernel, kernel.index(ref))
        if float(absf.min()) > 0.0 and float(absg.min()) > 0.0:
            for lab in kernel.labels:
                checks.append(gauge_bound(kernel, ref, lab, defect=c, tol=tol))
    return checks


def render_report(doc: dict) -> bytes:
    """Deterministic JSON bytes for a report document."""
    return (json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n").encode("utf-8")
