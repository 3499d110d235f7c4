"""Pure-numpy GRU time-step kernels (fallback backend).

The input-to-hidden projections (x @ W_g + b_g) are precomputed by the
caller for the whole sequence, so these kernels only run the serial
recurrence. The compiled backend in _gru_cy.pyx implements the same
contract; both must produce numerically equal results up to libm rounding.

Gate equations, for each step t with previous hidden state h:

    z = sigmoid(xz[t] + h @ Uz)
    r = sigmoid(xr[t] + h @ Ur)
    c = tanh(xh[t] + (r * h) @ Uh)
    h' = (1 - z) * h + z * c
"""

from __future__ import annotations

import numpy as np


def _sigmoid(a: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-a))


def gru_forward_seq(xz, xr, xh, uz, ur, uh, h0):
    """Run the recurrence over a full sequence.

    Args:
        xz, xr, xh: (m, H) precomputed input projections, bias included.
        uz, ur, uh: (H, H) recurrent weights.
        h0: (H,) initial hidden state.

    Returns:
        (hs, zs, rs, cs): each (m, H); hs holds the hidden states, the
        rest are the gate activations cached for the backward pass.
    """
    m, n = xz.shape
    hs = np.empty((m, n))
    zs = np.empty((m, n))
    rs = np.empty((m, n))
    cs = np.empty((m, n))
    h = np.asarray(h0, dtype=np.float64).copy()
    for t in range(m):
        z = _sigmoid(xz[t] + h @ uz)
        r = _sigmoid(xr[t] + h @ ur)
        c = np.tanh(xh[t] + (r * h) @ uh)
        h = (1.0 - z) * h + z * c
        zs[t] = z
        rs[t] = r
        cs[t] = c
        hs[t] = h
    return hs, zs, rs, cs


def gru_backward_seq(hs, zs, rs, cs, uz, ur, uh, h0, dh):
    """Backpropagate through the recurrence.

    Args:
        hs, zs, rs, cs: forward caches from gru_forward_seq.
        uz, ur, uh: (H, H) recurrent weights.
        h0: (H,) initial hidden state.
        dh: (m, H) loss gradient w.r.t. each hidden state output.

    Returns:
        (dxz, dxr, dxh, duz, dur, duh, dh0): gradients w.r.t. the input
        projections, the recurrent weights and the initial state.
    """
    m, n = hs.shape
    dxz = np.empty((m, n))
    dxr = np.empty((m, n))
    dxh = np.empty((m, n))
    duz = np.zeros((n, n))
    dur = np.zeros((n, n))
    duh = np.zeros((n, n))
    carry = np.zeros(n)
    for t in range(m - 1, -1, -1):
        g = dh[t] + carry
        hp = hs[t - 1] if t > 0 else np.asarray(h0, dtype=np.float64)
        z, r, c = zs[t], rs[t], cs[t]
        dc = g * z
        dz = g * (c - hp)
        carry = g * (1.0 - z)
        dah = dc * (1.0 - c * c)
        drh = dah @ uh.T
        dr = drh * hp
        carry = carry + drh * r
        daz = dz * z * (1.0 - z)
        dar = dr * r * (1.0 - r)
        carry = carry + daz @ uz.T + dar @ ur.T
        dxz[t] = daz
        dxr[t] = dar
        dxh[t] = dah
        duz += np.outer(hp, daz)
        dur += np.outer(hp, dar)
        duh += np.outer(r * hp, dah)
    return dxz, dxr, dxh, duz, dur, duh, carry
