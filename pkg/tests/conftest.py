import numpy as np

from sincov import FiniteKernel


def brute_force_defect(kernel: FiniteKernel) -> float:
    """Independent defect oracle: plain triple loop, numpy SVD for matrix norms."""
    n = kernel.n
    worst = 0.0
    if kernel.value_kind == "complex":
        t = [[complex(kernel.table[i, j]) for j in range(n)] for i in range(n)]
        for a in range(n):
            for x in range(n):
                for b in range(n):
                    worst = max(worst, abs(t[a][x] * t[x][b] - t[a][b]))
    else:
        t = kernel.table
        for a in range(n):
            for x in range(n):
                for b in range(n):
                    m = t[a, x] @ t[x, b] - t[a, b]
                    worst = max(worst, float(np.linalg.norm(m, 2)))
    return worst


def random_complex_kernel(rng: np.random.Generator, n: int) -> FiniteKernel:
    table = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return FiniteKernel(tuple(f"p{i}" for i in range(n)), "complex", table)


def random_mat2_kernel(rng: np.random.Generator, n: int) -> FiniteKernel:
    table = rng.standard_normal((n, n, 2, 2))
    return FiniteKernel(tuple(f"p{i}" for i in range(n)), "mat2", table)
