"""Periodic spectral calculus on uniformly sampled closed curves.

Everything here works on samples ``f[j] = f(2*pi*j/n)`` of a smooth periodic
function and treats them as a trigonometric interpolant.  Odd derivatives drop
the Nyquist mode so that the differentiation matrix is real and skew-symmetric.
"""

import numpy as np


def wavenumbers(n):
    """Integer wavenumbers in FFT order."""
    return np.fft.fftfreq(n, d=1.0 / n)


def derivative(f, order=1, period=2 * np.pi, axis=0):
    """Spectral derivative of periodic samples along ``axis``."""
    f = np.asarray(f, dtype=float)
    n = f.shape[axis]
    k = wavenumbers(n) * (2 * np.pi / period)
    ik = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        ik[n // 2] = 0.0
    shape = [1] * f.ndim
    shape[axis] = n
    fh = np.fft.fft(f, axis=axis)
    return np.real(np.fft.ifft(fh * ik.reshape(shape), axis=axis))


def derivative_matrix(n, order=1, period=2 * np.pi):
    """Dense spectral differentiation matrix (columns are derivatives of unit vectors)."""
    return np.ascontiguousarray(derivative(np.eye(n), order=order, period=period, axis=0))


def inverse_laplacian(f, period):
    """Mean-zero solution ``v`` of ``-v'' = f - mean(f)`` on a circle of given length.

    Columns of a 2-d ``f`` are solved independently.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    k = wavenumbers(n) * (2 * np.pi / period)
    fh = np.fft.fft(f, axis=0)
    vh = np.zeros_like(fh)
    scale = 1.0 / k[1:] ** 2
    vh[1:] = fh[1:] * scale.reshape((-1,) + (1,) * (f.ndim - 1))
    return np.real(np.fft.ifft(vh, axis=0))


def _rfft_weights(n):
    m = n // 2 + 1
    w = np.full(m, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    return w


def evaluate(samples, t):
    """Evaluate the trigonometric interpolant of periodic samples at points ``t``.

    ``samples`` has shape ``(n,)`` or ``(n, d)``; ``t`` is in radians with
    period ``2*pi``.  Returns an array of shape ``t.shape + samples.shape[1:]``.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    t = np.asarray(t, dtype=float)
    c = np.fft.rfft(samples, axis=0) / n
    c = c * _rfft_weights(n).reshape((-1,) + (1,) * (samples.ndim - 1))
    k = np.arange(c.shape[0])
    basis = np.exp(1j * np.multiply.outer(t.ravel(), k))
    out = np.real(basis @ c.reshape(c.shape[0], -1))
    return out.reshape(t.shape + samples.shape[1:])


def evaluate_with_derivatives(samples, t, orders=(0, 1)):
    """Evaluate the interpolant and its parameter derivatives at ``t``."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    t = np.asarray(t, dtype=float)
    c = np.fft.rfft(samples, axis=0) / n
    c = c * _rfft_weights(n).reshape((-1,) + (1,) * (samples.ndim - 1))
    c = c.reshape(c.shape[0], -1)
    k = np.arange(c.shape[0])
    basis = np.exp(1j * np.multiply.outer(t.ravel(), k))
    result = []
    for order in orders:
        ck = c * ((1j * k) ** order)[:, None]
        if order % 2 == 1 and n % 2 == 0:
            ck[-1] = 0.0
        val = np.real(basis @ ck)
        result.append(val.reshape(t.shape + samples.shape[1:]))
    return result


def integrate_periodic(f, period):
    """Trapezoidal rule for a periodic integrand (spectrally accurate)."""
    f = np.asarray(f, dtype=float)
    return np.sum(f, axis=0) * (period / f.shape[0])


def resample_arclength(points, n_out, newton_tol=1e-14, max_newton=30):
    """Resample a smooth closed curve at uniform arclength.

    ``points`` are samples at uniform values of an arbitrary smooth periodic
    parameter.  The first output node coincides with ``points[0]``.
    Returns ``(nodes, length)``.
    """
    points = np.asarray(points, dtype=float)
    m = points.shape[0]
    dx = derivative(points, 1, axis=0)
    speed = np.hypot(dx[:, 0], dx[:, 1])
    length = float(np.mean(speed) * 2 * np.pi)
    # s(t) = mean_speed * t + periodic part; integrate the periodic part spectrally
    mean_speed = np.mean(speed)
    k = wavenumbers(m)
    sh = np.fft.fft(speed - mean_speed)
    ph = np.zeros_like(sh)
    nz = k != 0
    ph[nz] = sh[nz] / (1j * k[nz])
    if m % 2 == 0:
        ph[m // 2] = 0.0
    periodic = np.real(np.fft.ifft(ph))
    periodic = periodic - periodic[0]

    targets = np.arange(n_out) * (length / n_out)
    # initial guess by inverting the sampled arclength table
    t_grid = 2 * np.pi * np.arange(m) / m
    s_grid = mean_speed * t_grid + periodic
    t = np.interp(targets, np.append(s_grid, length), np.append(t_grid, 2 * np.pi))
    table = np.stack([periodic, speed], axis=1)
    for _ in range(max_newton):
        per, sp = evaluate(table, t).T
        step = (mean_speed * t + per - targets) / sp
        step[0] = 0.0
        t = t - step
        if np.max(np.abs(step)) < newton_tol:
            break
    t[0] = 0.0
    nodes = evaluate(points, t)
    nodes[0] = points[0]
    return nodes, length
