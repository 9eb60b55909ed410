"""Deterministic synthetic fixtures for demos and tests.

Everything here is seeded and pure, so a fixture regenerates bit for bit.
"""

import numpy as np

from .timeseries import make_ensemble
from .util import rng_from_seed

__all__ = [
    "textured_image",
    "correlated_ensemble",
    "candle_frames",
    "candle_noise_stack",
    "pattern_noise_stack",
]


def textured_image(size=100):
    """Color test chart mixing plaid, checker blocks, and gradients."""
    y, x = np.mgrid[0:size, 0:size].astype(np.float64) / size
    r = 0.5 + 0.3 * np.sin(14 * x) * np.cos(10 * y)
    g = 0.4 + 0.3 * ((np.floor(x * 8) + np.floor(y * 8)) % 2)
    b = 0.3 + 0.5 * x * y + 0.2 * np.sin(20 * (x + y))
    return np.clip(np.stack([r, g, b], axis=2), 0.0, 1.0)


def correlated_ensemble(m=4, length=300, seed=0, period=12.0, noise=2.0):
    """Seasonal temperature-like series sharing one cycle, offset per series."""
    rng = rng_from_seed(seed)
    t = np.arange(length)
    base = 60.0 + 15.0 * np.sin(2.0 * np.pi * t / period)
    offsets = np.linspace(-6.0, 9.0, m)
    values = np.stack([base + off + rng.normal(0.0, noise, length) for off in offsets])
    return make_ensemble(values)


def candle_frames(h=80, w=30, T=75):
    """Candle-like smooth frames: four stacked glowing structures whose
    amplitudes pulse on different cycles, all peaking at the final frame."""
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)

    def blob(cy, cx, sy, sx):
        return np.exp(-(((xx - cx) / sx) ** 2 + ((yy - cy) / sy) ** 2))

    parts = [
        blob(h * 0.15, w * 0.5, h * 0.11, w * 0.20),
        blob(h * 0.40, w * 0.5, h * 0.12, w * 0.18),
        blob(h * 0.66, w * 0.5, h * 0.12, w * 0.16),
        blob(h * 0.90, w * 0.5, h * 0.10, w * 0.28),
    ]
    periods = (25.0, 19.0, 15.0, 33.0)
    frames = []
    for t in range(T):
        img = np.zeros((h, w))
        for part, period in zip(parts, periods):
            c = np.cos(2.0 * np.pi * (t - (T - 1)) / period)
            img += 0.95 * max(0.0, c) ** 2 * part
        frames.append(np.clip(img, 0.0, 1.0))
    return np.stack(frames, axis=2)


def candle_noise_stack(h=80, w=30, t_candle=75, t_noise=75, seed=0):
    """Candle frames followed by uniform [0, 1] white-noise frames."""
    rng = rng_from_seed(seed)
    noise = rng.random((h, w, t_noise))
    return np.concatenate([candle_frames(h, w, t_candle), noise], axis=2)


def pattern_noise_stack(h=40, w=30, t_pattern=20, t_noise=20, seed=0,
                        noise_amp=0.2):
    """A fixed smooth bright spot over uniform noise, then the noise alone.

    The pattern frames are blob + noise_amp * uniform; the trailing frames
    drop the blob and keep the same noise process, planting a structural
    transition at boundary t_pattern - 1.
    """
    rng = rng_from_seed(seed)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    blob = np.exp(-(((xx - w / 2) / (w / 6)) ** 2 + ((yy - h / 2.5) / (h / 5)) ** 2))
    frames = [
        np.clip(0.9 * blob + noise_amp * rng.random((h, w)), 0.0, 1.0)
        for _ in range(t_pattern)
    ]
    frames += [noise_amp * rng.random((h, w)) for _ in range(t_noise)]
    return np.stack(frames, axis=2)
