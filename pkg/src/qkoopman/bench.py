"""Complexity and backend benchmark for the evolution kernels.

Per qubit count n the one-shot circuit always has exactly n gates, the dense
diagonal matrix-vector application costs O(2^n), and a single lazy
per-amplitude phase query costs O(n).  The table reports wall times for both
the numba-compiled kernels and the pure-numpy fallbacks so the two backends
can be compared directly; dense columns beyond the oracle cap are skipped.
"""

import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .unitary import DENSE_ORACLE_MAX_QUBITS

__all__ = ["BenchRow", "run_bench", "bench_csv"]

SKIP = "skip"


@dataclass(frozen=True)
class BenchRow:
    n: int
    gate_count: int
    dense_jit_s: Optional[float]
    dense_numpy_s: Optional[float]
    lazy_jit_s: Optional[float]
    lazy_numpy_s: Optional[float]


def _time_call(fn, reps: int) -> float:
    # warm-up (also triggers jit compilation)
    fn()
    best = np.inf
    for _ in range(max(1, reps)):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run_bench(
    n_values: Sequence[int],
    reps: int = 5,
    dense_cap: int = DENSE_ORACLE_MAX_QUBITS,
    seed: int = 0,
    lazy_queries: int = 2000,
):
    rng = np.random.default_rng(seed)
    rows = []
    for n in n_values:
        alphas = np.ascontiguousarray(rng.uniform(-1.0, 1.0, n))
        t = 0.37
        dense_jit = dense_numpy = None
        if n <= dense_cap:
            size = 1 << n
            eigs = kernels.eigenvalue_table_numpy(alphas, n)
            amps = np.exp(1j * rng.uniform(-np.pi, np.pi, size)) / np.sqrt(size)
            dense_numpy = _time_call(
                lambda: kernels.apply_diag_phases_numpy(amps, eigs, t), reps
            )
            if kernels.apply_diag_phases_jit is not None:
                dense_jit = _time_call(
                    lambda: kernels.apply_diag_phases_jit(amps, eigs, t), reps
                )
        queries = rng.integers(0, 1 << n, size=lazy_queries)

        def _lazy_numpy():
            for l in queries:
                kernels._lazy_phase_loop(int(l), alphas, n, t)

        lazy_numpy = _time_call(_lazy_numpy, reps) / lazy_queries
        lazy_jit = None
        if kernels.lazy_phase_jit is not None:

            def _lazy_jit():
                for l in queries:
                    kernels.lazy_phase_jit(int(l), alphas, n, t)

            lazy_jit = _time_call(_lazy_jit, reps) / lazy_queries
        rows.append(
            BenchRow(
                n=n,
                gate_count=n,  # one R_z per qubit, independent of step count
                dense_jit_s=dense_jit,
                dense_numpy_s=dense_numpy,
                lazy_jit_s=lazy_jit,
                lazy_numpy_s=lazy_numpy,
            )
        )
    return rows


def bench_csv(rows) -> str:
    def fmt(v):
        return SKIP if v is None else f"{v:.9g}"

    lines = ["n,gate_count,dense_jit_s,dense_numpy_s,lazy_jit_s,lazy_numpy_s"]
    lines.extend(
        f"{r.n},{r.gate_count},{fmt(r.dense_jit_s)},{fmt(r.dense_numpy_s)},"
        f"{fmt(r.lazy_jit_s)},{fmt(r.lazy_numpy_s)}"
        for r in rows
    )
    return "\n".join(lines) + "\n"
