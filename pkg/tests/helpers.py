"""
Test helpers
"""
import numpy as np


def random_channels(rng: np.random.Generator, d: int, k: int) -> np.ndarray:
    """d x K matrix of CN(0, 1) entries"""
    return (rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))) / np.sqrt(2.0)


def grid_oracle_d2(channels: np.ndarray, power: float = 1.0, points: int = 720) -> float:
    """
    Brute-force max-min SNR for d = 2 and identity gram.

    w = sqrt(P) (cos a, e^{jb} sin a) with a in [0, pi/2], b in [0, 2 pi) covers every
    unit-power beamformer up to a common phase.
    """
    a = np.linspace(0.0, np.pi / 2, points)
    b = np.linspace(0.0, 2 * np.pi, points, endpoint=False)
    aa, bb = np.meshgrid(a, b, indexing="ij")
    w0 = np.cos(aa)
    w1 = np.exp(1j * bb) * np.sin(aa)
    h = channels.conj()
    # |h_k^H w|^2 on the whole grid, shape (points, points, K)
    gains = np.abs(h[0][None, None, :] * w0[..., None] + h[1][None, None, :] * w1[..., None]) ** 2
    return float(power * np.max(np.min(gains, axis=-1)))
