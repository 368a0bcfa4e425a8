"""Agreement between the numba kernels and their pure-numpy fallbacks.

The jit flavours only exist when numba is enabled, so every comparison is
guarded; with QKM_BACKEND=numpy the module degrades to the subprocess check
that the fallback path imports and works on its own.
"""

import os
import subprocess
import sys

import numpy as np
import pytest

from qkoopman import kernels

needs_numba = pytest.mark.skipif(
    not kernels.NUMBA_ENABLED, reason="numba backend disabled"
)


@needs_numba
class TestKernelParity:
    def test_eigenvalue_table(self):
        rng = np.random.default_rng(1)
        for n in range(1, 13):
            alphas = rng.normal(size=n)
            a = kernels.eigenvalue_table_numpy(alphas, n)
            b = kernels.eigenvalue_table_jit(alphas, n)
            # dot-product vs sequential accumulation differ by at most 1 ulp
            np.testing.assert_allclose(a, b, atol=1e-14)

    def test_lazy_phase_matches_table(self):
        rng = np.random.default_rng(2)
        n, t = 10, 0.73
        alphas = rng.normal(size=n)
        table = kernels.eigenvalue_table_numpy(alphas, n)
        for l in rng.integers(0, 1 << n, 50):
            jit_val = kernels.lazy_phase_jit(int(l), alphas, n, t)
            np_val = kernels.lazy_phase_numpy(int(l), alphas, n, t)
            assert jit_val == np_val
            assert jit_val == pytest.approx(table[l] * t, abs=1e-12)

    def test_apply_diag_phases(self):
        rng = np.random.default_rng(3)
        amps = rng.normal(size=256) + 1j * rng.normal(size=256)
        eig = rng.normal(size=256)
        a = kernels.apply_diag_phases_numpy(amps, eig, 1.37)
        b = kernels.apply_diag_phases_jit(amps, eig, 1.37)
        np.testing.assert_allclose(a, b, atol=1e-15)

    def test_gray_scott_steps(self):
        rng = np.random.default_rng(4)
        A = rng.uniform(0.3, 1.0, (24, 24))
        B = rng.uniform(0.0, 0.4, (24, 24))
        args = (2.1e-5, 1.1e-5, 0.029, 0.057, 0.01, 20, 1.0 / (2.0 / 24) ** 2)
        a1, b1 = kernels.gray_scott_steps_numpy(A.copy(), B.copy(), *args)
        a2, b2 = kernels.gray_scott_steps_jit(A.copy(), B.copy(), *args)
        # FMA contraction in compiled code allows tiny per-step differences
        np.testing.assert_allclose(a1, a2, atol=1e-12)
        np.testing.assert_allclose(b1, b2, atol=1e-12)


def test_numpy_backend_subprocess():
    env = dict(os.environ, QKM_BACKEND="numpy")
    code = (
        "import qkoopman, numpy as np\n"
        "from qkoopman import kernels\n"
        "assert not kernels.NUMBA_ENABLED\n"
        "assert kernels.eigenvalue_table is kernels.eigenvalue_table_numpy\n"
        "out = kernels.eigenvalue_table(np.array([1.0, 2.0]), 2)\n"
        "assert np.allclose(out, [-1.5, 0.5, -0.5, 1.5])\n"
        "print('ok')\n"
    )
    proc = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "ok"


def test_qkm_numba_zero_flag_subprocess():
    env = dict(os.environ, QKM_NUMBA="0")
    code = "from qkoopman import kernels; assert not kernels.NUMBA_ENABLED; print('ok')"
    proc = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr


def test_cli_runs_on_numpy_backend(tmp_path):
    env = dict(os.environ, QKM_BACKEND="numpy")
    out = tmp_path / "t.qkt"
    proc = subprocess.run(
        [sys.executable, "-m", "qkoopman.cli", "generate", "--out", str(out),
         "--system", "torus", "--d", "8", "--T", "3"],
        env=env, capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
