"""Hot numeric kernels: numba-compiled with a pure-numpy fallback.

The fallback is selected by the environment variable ``VIBMOSS_NUMBA``
(set it to ``0`` to force numpy) or automatically when numba is not
importable.  Both paths evaluate the same sums; they agree to floating
point roundoff.  ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("VIBMOSS_NUMBA", "").strip().lower()
if _env in ("0", "false", "off", "no"):
    HAS_NUMBA = False
else:
    try:
        import numba

        HAS_NUMBA = True
    except ImportError:  # pragma: no cover - environment dependent
        HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA


def active_backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# --------------------------------------------------------------------------
# Dense inverse transform: out[i] = sum_j values[j] * exp(-1j*u[j]*tau[i])
# --------------------------------------------------------------------------

def _ndft_numpy(values, u, tau, chunk=64):
    out = np.empty(tau.size, dtype=np.complex128)
    for i0 in range(0, tau.size, chunk):
        block = tau[i0 : i0 + chunk, None] * u[None, :]
        out[i0 : i0 + chunk] = np.exp(-1j * block) @ values
    return out


if HAS_NUMBA:

    @numba.njit(parallel=True, cache=True)
    def _ndft_numba(values, u, tau):  # pragma: no cover - jitted
        out = np.empty(tau.size, dtype=np.complex128)
        for i in numba.prange(tau.size):
            acc = 0.0 + 0.0j
            t = tau[i]
            for j in range(u.size):
                ph = u[j] * t
                acc += values[j] * complex(np.cos(ph), -np.sin(ph))
            out[i] = acc
        return out


def nonuniform_dft(values: np.ndarray, u: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Direct evaluation of sum_j values[j]*exp(-i*u[j]*tau[i]).

    O(len(u)*len(tau)); exact for arbitrary (also nonuniform) ``tau``.
    """
    values = np.ascontiguousarray(values, dtype=np.complex128)
    u = np.ascontiguousarray(u, dtype=np.float64)
    tau = np.ascontiguousarray(tau, dtype=np.float64)
    if USE_NUMBA:
        return _ndft_numba(values, u, tau)
    return _ndft_numpy(values, u, tau)


# --------------------------------------------------------------------------
# Causal convolution of a tabulated kernel with the exact incident field
#
#   out[i] = sum_k w[k] * kv[k] * E(tau[i] - s[k])   over s[k] < tau[i]
#   E(x)   = exp(-gr*x) * exp(i*(dw*x + p*sin(om*x + th0)))  for x > 0
#
# Node set: composite Gauss-Legendre panels of uniform width over
# [0, max(tau)], plus per-tau nodes for the partial panel ending at tau[i].
# nfull[i] is the number of whole-panel nodes lying inside [0, tau[i]].
# --------------------------------------------------------------------------

def _conv_numpy(tau, s, kv, w, nfull, ps, pkv, pw, gr, dw, p, om, th0):
    out = np.zeros(tau.size, dtype=np.complex128)
    for i in range(tau.size):
        n = nfull[i]
        if n > 0:
            x = tau[i] - s[:n]
            ph = dw * x + p * np.sin(om * x + th0)
            out[i] = np.sum(w[:n] * kv[:n] * np.exp(-gr * x) * np.exp(1j * ph))
        if ps.shape[1] > 0:
            x = tau[i] - ps[i]
            good = x > 0
            if np.any(good):
                ph = dw * x + p * np.sin(om * x + th0)
                contrib = pw[i] * pkv[i] * np.exp(-gr * x) * np.exp(1j * ph)
                out[i] += np.sum(contrib[good])
    return out


if HAS_NUMBA:

    @numba.njit(parallel=True, cache=True)
    def _conv_numba(tau, s, kv, w, nfull, ps, pkv, pw, gr, dw, p, om, th0):  # pragma: no cover
        out = np.zeros(tau.size, dtype=np.complex128)
        for i in numba.prange(tau.size):
            acc = 0.0 + 0.0j
            for k in range(nfull[i]):
                x = tau[i] - s[k]
                ph = dw * x + p * np.sin(om * x + th0)
                acc += w[k] * kv[k] * np.exp(-gr * x) * complex(np.cos(ph), np.sin(ph))
            for k in range(ps.shape[1]):
                x = tau[i] - ps[i, k]
                if x > 0.0:
                    ph = dw * x + p * np.sin(om * x + th0)
                    acc += pw[i, k] * pkv[i, k] * np.exp(-gr * x) * complex(
                        np.cos(ph), np.sin(ph)
                    )
            out[i] = acc
        return out


def causal_convolution(
    tau, s, kv, w, nfull, ps, pkv, pw, gr, dw, p, om, th0
) -> np.ndarray:
    """Dispatch the convolution quadrature to the active backend."""
    args = (
        np.ascontiguousarray(tau, dtype=np.float64),
        np.ascontiguousarray(s, dtype=np.float64),
        np.ascontiguousarray(kv, dtype=np.complex128),
        np.ascontiguousarray(w, dtype=np.float64),
        np.ascontiguousarray(nfull, dtype=np.int64),
        np.ascontiguousarray(ps, dtype=np.float64),
        np.ascontiguousarray(pkv, dtype=np.complex128),
        np.ascontiguousarray(pw, dtype=np.float64),
        float(gr),
        float(dw),
        float(p),
        float(om),
        float(th0),
    )
    if USE_NUMBA:
        return _conv_numba(*args)
    return _conv_numpy(*args)
