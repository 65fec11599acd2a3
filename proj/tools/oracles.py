#!/usr/bin/env python3
"""Regenerates tests/golden/oracles.json with mpmath quadrature and a numpy
Monte-Carlo reference for the averaging error.

Usage: python3 tools/oracles.py > tests/golden/oracles.json
"""
import json

import numpy as np
from mpmath import exp, expm1, inf, log1p, mp, quad, sqrt

mp.dps = 30


def fou_variance(h):
    # Var of int_{-inf}^0 e^s dB_s = int int e^{-s-t} Cov(B_s, B_t) ds dt on [0, inf)^2
    h = mp.mpf(h)
    cov = lambda s, t: 0.5 * (s ** (2 * h) + t ** (2 * h) - abs(t - s) ** (2 * h))
    return quad(lambda s: quad(lambda t: exp(-s - t) * cov(s, t), [0, s, inf]), [0, inf])


def mvn_alpha(h):
    h = mp.mpf(h)
    # 1/alpha^2 = int_0^inf ((1+s)^{h-1/2} - s^{h-1/2})^2 ds + 1/(2h)
    e = h - mp.mpf(1) / 2
    # stable difference, integrated in x = log s because the tail decays like s^{2h-3}
    g = lambda x: (exp(x * e) * expm1(e * log1p(exp(-x)))) ** 2 * exp(x)
    inv = quad(g, [-inf, -40, -10, 0, 10, 40, 100, 200, 400, 800, 1600, inf]) + 1 / (2 * h)
    return 1 / sqrt(inv)


def fgn(k, h):
    return 0.5 * (abs(k + 1) ** (2 * h) - 2 * abs(k) ** (2 * h) + abs(k - 1) ** (2 * h))


def davies_harte_fgn(n, h, rng, size):
    # exact fractional Gaussian noise (unit step) by circulant embedding
    k = np.arange(n + 1)
    g = 0.5 * (np.abs(k + 1) ** (2 * h) - 2 * np.abs(k) ** (2 * h) + np.abs(k - 1) ** (2 * h))
    lam = np.clip(np.fft.fft(np.concatenate([g, g[-2:0:-1]])).real, 0, None)
    m = len(lam)
    z = rng.standard_normal((size, m)) + 1j * rng.standard_normal((size, m))
    return np.fft.fft(np.sqrt(lam / m) * z, axis=1).real[:, :n]


def linear_averaging_error(eps, h_fast=0.6, n_paths=4000, n=8000, chunk=500, seed=2024):
    # dX = (-X + Y) dt + dB, dY = -Y dt/eps + eps^{-h} dB_hat, Y_0 = 0, against
    # X_bar with f_bar = -x: the difference e solves e' = -e + Y, so B drops out.
    # Returns the median of sup |e| over [0, 1] and its bootstrap SE.
    rng = np.random.default_rng(seed)
    dt = 1.0 / n
    sups = []
    for _ in range(n_paths // chunk):
        inc = davies_harte_fgn(n, h_fast, rng, chunk) * dt ** h_fast
        y = np.zeros(chunk)
        e = np.zeros(chunk)
        sup = np.zeros(chunk)
        for k in range(n):
            e = e + (-e + y) * dt
            y = y - y * dt / eps + eps ** (-h_fast) * inc[:, k]
            sup = np.maximum(sup, np.abs(e))
        sups.append(sup)
    sups = np.concatenate(sups)
    boot = [np.median(rng.choice(sups, sups.size)) for _ in range(400)]
    return {"median": float(np.median(sups)), "se": float(np.std(boot, ddof=1))}


out = {
    "version": 1,
    "note": "Frozen constants computed by independent quadrature before the build; regenerate with tools/oracles.py.",
    "fou_stationary_variance": {"0.5": 0.5, **{str(h): float(fou_variance(h)) for h in (0.6, 0.7, 0.8)}},
    "mvn_alpha": {str(h): float(mvn_alpha(h)) for h in (0.55, 0.6, 0.7, 0.75, 0.9)},
    "fgn_lag1_covariance": {"0.75": float(fgn(1, mp.mpf("0.75")))},
    "linear_averaging_median_sup": {str(e): linear_averaging_error(e) for e in (0.1, 0.01)},
}
print(json.dumps(out, indent=2))
