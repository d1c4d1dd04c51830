"""Pure numpy implementation of the hot kernels.

Mirrors the compiled extension in ``_core.pyx`` function for function; the
package selects one of the two at import time. Everything here operates on
C-contiguous float64 arrays and returns freshly allocated outputs.
"""

import numpy as np

# Truncated Taylor parameters. With the input scaled to infinity norm <= 0.5
# the order-16 remainder is below 1e-18, far under the doubling-identity
# target of 1e-12.
TAYLOR_ORDER = 16
SCALE_LIMIT = 0.5

_TAYLOR_COEFF = np.cumprod([1.0] + [1.0 / k for k in range(1, TAYLOR_ORDER + 1)])


def expm(a):
    """Matrix exponential by scaling and squaring of a truncated Taylor sum."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    n = a.shape[0]
    norm = np.abs(a).sum(axis=1).max() if n else 0.0
    squarings = 0
    if norm > SCALE_LIMIT:
        squarings = int(np.ceil(np.log2(norm / SCALE_LIMIT)))
        a = a / (2.0 ** squarings)
    eye = np.eye(n)
    # Horner evaluation of sum_k a^k / k!
    out = eye * _TAYLOR_COEFF[TAYLOR_ORDER]
    for k in range(TAYLOR_ORDER - 1, -1, -1):
        out = a @ out + eye * _TAYLOR_COEFF[k]
    for _ in range(squarings):
        out = out @ out
    return out


def chain_product(gens, dts):
    """Product exp(gens[m-1]*dts[m-1]) @ ... @ exp(gens[0]*dts[0])."""
    gens = np.ascontiguousarray(gens, dtype=np.float64)
    n = gens.shape[1]
    out = np.eye(n)
    for g, dt in zip(gens, dts):
        out = expm(g * dt) @ out
    return out


def forward_states(steps, init):
    """Cumulative left products: result[0]=init, result[j]=steps[j-1] @ result[j-1]."""
    steps = np.ascontiguousarray(steps, dtype=np.float64)
    m, n = steps.shape[0], steps.shape[1]
    out = np.empty((m + 1, n, n))
    out[0] = init
    for j in range(m):
        out[j + 1] = steps[j] @ out[j]
    return out


def backward_states(steps):
    """Cumulative right products: result[m]=I, result[j]=result[j+1] @ steps[j]."""
    steps = np.ascontiguousarray(steps, dtype=np.float64)
    m, n = steps.shape[0], steps.shape[1]
    out = np.empty((m + 1, n, n))
    out[m] = np.eye(n)
    for j in range(m - 1, -1, -1):
        out[j] = out[j + 1] @ steps[j]
    return out


def series_levels(steps, widths, couplings, order):
    """Nested-integral series levels, evaluated at the final grid node.

    The grid is a chain of N steps: ``steps[i]`` propagates node i to node
    i+1 under the nonnegative part of the flow, ``widths[i]`` is the step
    length and ``couplings[i]`` the antagonistic coupling, constant across
    the step (the caller aligns steps with the switching segments). Level
    zero is the plain propagation of the identity; each further level is the
    running trapezoidal integral of the previous one against the coupling,
    advanced with the one-step propagators so the value at node N equals the
    composite trapezoid rule over the whole grid.

    Returns an array of shape (order+1, n, n) with the level values at the
    final node.
    """
    steps = np.ascontiguousarray(steps, dtype=np.float64)
    widths = np.ascontiguousarray(widths, dtype=np.float64)
    couplings = np.ascontiguousarray(couplings, dtype=np.float64)
    m, n = steps.shape[0], steps.shape[1]
    out = np.empty((order + 1, n, n))

    prev = np.empty((m + 1, n, n))
    prev[0] = np.eye(n)
    for j in range(m):
        prev[j + 1] = steps[j] @ prev[j]
    out[0] = prev[m]

    for level in range(1, order + 1):
        at_left = np.einsum("jab,jbc->jac", couplings, prev[:-1])
        at_right = np.einsum("jab,jbc->jac", couplings, prev[1:])
        cur = np.empty((m + 1, n, n))
        cur[0] = 0.0
        for j in range(m):
            half = 0.5 * widths[j]
            cur[j + 1] = steps[j] @ (cur[j] + half * at_left[j]) + half * at_right[j]
        out[level] = cur[m]
        prev = cur
    return out


def trapezoid_triple(left, mid, right, widths):
    """Trapezoid rule for the integral of left(s) @ mid(s) @ right(s).

    ``left`` and ``right`` hold the N+1 node values, ``mid`` the per-step
    coupling (constant across each step), ``widths`` the step lengths.
    """
    left = np.ascontiguousarray(left, dtype=np.float64)
    mid = np.ascontiguousarray(mid, dtype=np.float64)
    right = np.ascontiguousarray(right, dtype=np.float64)
    widths = np.ascontiguousarray(widths, dtype=np.float64)
    at_left = np.einsum("jab,jbc,jcd->jad", left[:-1], mid, right[:-1])
    at_right = np.einsum("jab,jbc,jcd->jad", left[1:], mid, right[1:])
    return np.einsum("j,jab->ab", 0.5 * widths, at_left + at_right)
