"""Numeric kernels for the equality oracle.

The longest-common-extension table is the one numeric hot loop in the
package.  Two interchangeable implementations are provided: a numba
@njit double loop and a pure-numpy row-vectorized fallback.  Selection
is controlled by the environment variable ``FC_KERNEL``:

  * ``FC_KERNEL=numba`` — force the numba kernel (error if numba missing)
  * ``FC_KERNEL=numpy`` — force the numpy kernel
  * unset             — numba when importable, else numpy

``python -m fclogic.bench`` benchmarks both.
"""

import os

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    _HAVE_NUMBA = False


def lce_table_numpy(codes: np.ndarray) -> np.ndarray:
    """LCE table via a backward dynamic program, one vectorized row per position.

    codes: int32 array of the word's symbol codes, length n.
    Returns an (n+2) x (n+2) int32 array T with T[i, j] = length of the
    longest common prefix of the suffixes starting at 1-based positions
    i and j (positions n+1 denote the empty suffix).
    """
    n = codes.shape[0]
    table = np.zeros((n + 2, n + 2), dtype=np.int32)
    for i in range(n, 0, -1):
        row = np.where(codes[i - 1] == codes, table[i + 1, 2 : n + 2] + 1, 0)
        table[i, 1 : n + 1] = row
    return table


def _lce_table_loop(codes, table):
    n = codes.shape[0]
    for i in range(n, 0, -1):
        for j in range(n, 0, -1):
            if codes[i - 1] == codes[j - 1]:
                table[i, j] = table[i + 1, j + 1] + 1
    return table


if _HAVE_NUMBA:
    _lce_table_loop_jit = numba.njit(cache=True)(_lce_table_loop)


def lce_table_numba(codes: np.ndarray) -> np.ndarray:
    if not _HAVE_NUMBA:
        raise RuntimeError("numba is not installed; set FC_KERNEL=numpy")
    n = codes.shape[0]
    table = np.zeros((n + 2, n + 2), dtype=np.int32)
    return _lce_table_loop_jit(codes, table)


def active_kernel() -> str:
    choice = os.environ.get("FC_KERNEL", "").strip().lower()
    if choice in ("numba", "numpy"):
        return choice
    return "numba" if _HAVE_NUMBA else "numpy"


def lce_table(codes: np.ndarray) -> np.ndarray:
    if active_kernel() == "numba":
        return lce_table_numba(codes)
    return lce_table_numpy(codes)
