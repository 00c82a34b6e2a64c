import random

import numpy as np
import pytest

from fclogic import kernels


def naive_lce(text: str) -> np.ndarray:
    n = len(text)
    table = np.zeros((n + 2, n + 2), dtype=np.int32)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            k = 0
            while i + k <= n and j + k <= n and text[i + k - 1] == text[j + k - 1]:
                k += 1
            table[i, j] = k
    return table


def codes_of(text: str) -> np.ndarray:
    return np.frombuffer(text.encode("utf-32-le"), dtype=np.int32).copy()


@pytest.mark.parametrize("text", ["", "a", "aaaa", "abab", "banana", "mississippi"])
def test_numpy_kernel_matches_naive(text):
    assert np.array_equal(kernels.lce_table_numpy(codes_of(text)), naive_lce(text))


def test_numpy_kernel_matches_naive_random():
    rng = random.Random(11)
    for _ in range(20):
        text = "".join(rng.choice("ab") for _ in range(rng.randrange(0, 40)))
        assert np.array_equal(kernels.lce_table_numpy(codes_of(text)), naive_lce(text))


def test_numba_kernel_matches_numpy():
    codes = codes_of("abracadabra" * 5)
    try:
        got = kernels.lce_table_numba(codes)
    except RuntimeError:
        pytest.skip("numba not installed")
    assert np.array_equal(got, kernels.lce_table_numpy(codes))


def test_kernel_selection_env(monkeypatch):
    monkeypatch.setenv("FC_KERNEL", "numpy")
    assert kernels.active_kernel() == "numpy"
    monkeypatch.setenv("FC_KERNEL", "numba")
    assert kernels.active_kernel() == "numba"
    monkeypatch.delenv("FC_KERNEL")
    assert kernels.active_kernel() in ("numba", "numpy")
