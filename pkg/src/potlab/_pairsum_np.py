"""Pure-numpy pair-sum kernels (fallback backend).

Chunked broadcasting versions of the O(M*T) direct sums. Signatures match
the compiled module in ``_pairsum_cy``; results agree up to floating-point
reassociation.
"""

from __future__ import annotations

import numpy as np

from .specfun import bessel_k1

_CHUNK = 2048


def pair_quadratic_form(pos: np.ndarray, vec: np.ndarray, shift: float,
                        skip_below: float) -> float:
    """sum over pairs a != b of (omega.v_a)(omega.v_b) - shift (v_a.v_b)."""
    m = pos.shape[0]
    total = 0.0
    for a0 in range(0, m, _CHUNK):
        d = pos[a0:a0 + _CHUNK, None, :] - pos[None, :, :]
        r = np.sqrt((d * d).sum(-1))
        safe = np.where(r <= skip_below, np.inf, r)
        om = d / safe[..., None]
        dots = (om * vec[a0:a0 + _CHUNK, None, :]).sum(-1) * (om * vec[None, :, :]).sum(-1)
        sums = dots
        if shift != 0.0:
            vv = (vec[a0:a0 + _CHUNK, None, :] * vec[None, :, :]).sum(-1)
            sums = dots - shift * np.where(r <= skip_below, 0.0, vv)
        total += float(sums.sum())
    return total


def pair_quadratic_form_bessel(pos: np.ndarray, vec: np.ndarray,
                               skip_below: float) -> float:
    """sum over pairs a != b of (omega.v_a)(omega.v_b) t K1(t), t = |x_a - x_b|."""
    m = pos.shape[0]
    total = 0.0
    for a0 in range(0, m, _CHUNK):
        d = pos[a0:a0 + _CHUNK, None, :] - pos[None, :, :]
        r = np.sqrt((d * d).sum(-1))
        near = r <= skip_below
        safe = np.where(near, np.inf, r)
        om = d / safe[..., None]
        dots = (om * vec[a0:a0 + _CHUNK, None, :]).sum(-1) * (om * vec[None, :, :]).sum(-1)
        tk1 = np.zeros_like(r)
        far = ~near
        tk1[far] = r[far] * bessel_k1(r[far])
        total += float((dots * tk1).sum())
    return total


def kernel_apply(src_pos: np.ndarray, src_vec: np.ndarray, tgt_pos: np.ndarray,
                 shift: float, skip_below: float) -> np.ndarray:
    """out_t = sum_b omega (omega.v_b) - shift v_b over sources x_b != t."""
    t = tgt_pos.shape[0]
    n = tgt_pos.shape[1]
    out = np.zeros((t, n))
    for a0 in range(0, t, _CHUNK):
        d = tgt_pos[a0:a0 + _CHUNK, None, :] - src_pos[None, :, :]
        r = np.sqrt((d * d).sum(-1))
        near = r <= skip_below
        safe = np.where(near, np.inf, r)
        om = d / safe[..., None]
        dots = (om * src_vec[None, :, :]).sum(-1)
        acc = (om * dots[..., None]).sum(1)
        if shift != 0.0:
            mask = (~near)[..., None].astype(float)
            acc = acc - shift * (mask * src_vec[None, :, :]).sum(1)
        out[a0:a0 + _CHUNK] = acc
    return out


def potential_sum(src_pos: np.ndarray, weights: np.ndarray, tgt_pos: np.ndarray,
                  n: int, skip_below: float) -> np.ndarray:
    """Newtonian kernel sum: -log r / (2 pi) for n = 2, 1/(4 pi r) for n = 3."""
    t = tgt_pos.shape[0]
    out = np.zeros(t)
    for a0 in range(0, t, _CHUNK):
        d = tgt_pos[a0:a0 + _CHUNK, None, :] - src_pos[None, :, :]
        r = np.sqrt((d * d).sum(-1))
        near = r <= skip_below
        safe = np.where(near, 1.0, r)
        if n == 2:
            vals = -np.log(safe) / (2 * np.pi)
        else:
            vals = 1.0 / (4 * np.pi * safe)
        vals[near] = 0.0
        out[a0:a0 + _CHUNK] = vals @ weights
    return out


def gradient_sum(src_pos: np.ndarray, weights: np.ndarray, tgt_pos: np.ndarray,
                 skip_below: float) -> np.ndarray:
    """sum_y (y - x) / |y - x|^n w(y); the 1/|S^{n-1}| factor is the caller's."""
    t, n = tgt_pos.shape
    out = np.zeros((t, n))
    for a0 in range(0, t, _CHUNK):
        d = src_pos[None, :, :] - tgt_pos[a0:a0 + _CHUNK, None, :]
        r = np.sqrt((d * d).sum(-1))
        near = r <= skip_below
        safe = np.where(near, np.inf, r)
        out[a0:a0 + _CHUNK] = ((d / safe[..., None] ** n) * weights[None, :, None]).sum(1)
    return out
