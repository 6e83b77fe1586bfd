"""Translation-invariant scattering features from a 2-D Morlet filter bank.

The transform cascades FFT-domain wavelet convolutions with complex-modulus
nonlinearities, averages every path with a Gaussian low-pass, and subsamples
the result by 2^J. Channels are laid out order-0 first, then order-1 by
(j1, l1), then order-2 by (j1, l1, j2, l2) restricted to j2 > j1, each channel
a (size/2^J) x (size/2^J) grid flattened row-major.

Filter parameterization: center frequency 3*pi/4 / 2^j, Gaussian width
0.8 * 2^j, envelope slant 4/L along the rotation axis, orientations
theta_l = pi*l/L; the low-pass is the scale-2^J Gaussian of the same width
formula. Each Morlet gets a scaled-Gaussian subtraction so its DC response is
exactly zero, and the low-pass is normalized to unit DC gain.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
import scipy.fft as fft

from .datasets import ImageSet
from .errors import DimensionError, FormatError, ParameterError
from .subspace import FeatureMatrix

CACHE_MAGIC = b"SCATF001"


@dataclass(frozen=True)
class FilterBank:
    """Frequency-domain Morlet wavelets psi[j][l] plus one low-pass phi."""

    size: int
    J: int
    L: int
    psi: tuple            # psi[j][l]: (size, size) complex128 FFT
    phi: np.ndarray       # (size, size) float64 FFT, unit DC gain

    @property
    def n_wavelets(self) -> int:
        return self.J * self.L

    def n_coefficients(self) -> int:
        """Scattering vector length for this bank:
        (1 + J*L + L^2 * J*(J-1)/2) * (size/2^J)^2."""
        J, L = self.J, self.L
        n_paths = 1 + J * L + L * L * (J * (J - 1)) // 2
        grid = (self.size // 2 ** J) ** 2
        return n_paths * grid


def _gabor_2d(size, sigma, theta, xi, slant):
    """Periodized 2-D Gabor sampled on the size x size integer grid.

    theta is measured from the horizontal image axis (x = columns), so theta=0
    modulates along x. The filter is centered at pixel (0, 0) in the circular
    sense; summing the 2x2 wrapped copies keeps tails from leaking across the
    canvas boundary.
    """
    rot = np.array([[np.cos(theta), -np.sin(theta)],
                    [np.sin(theta), np.cos(theta)]])
    scale = np.diag([1.0, slant ** 2])
    curv = rot @ scale @ rot.T / (2.0 * sigma ** 2)

    gab = np.zeros((size, size), dtype=np.complex128)
    for ex in (-size, 0):
        for ey in (-size, 0):
            rows, cols = np.mgrid[ey:ey + size, ex:ex + size].astype(np.float64)
            x, y = cols, rows
            arg = (-(curv[0, 0] * x * x + (curv[0, 1] + curv[1, 0]) * x * y
                     + curv[1, 1] * y * y)
                   + 1j * xi * (x * np.cos(theta) + y * np.sin(theta)))
            gab += np.exp(arg)
    return gab / (2.0 * np.pi * sigma ** 2 / slant)


def _morlet_2d(size, sigma, theta, xi, slant):
    """Zero-mean Morlet: Gabor minus its envelope scaled to cancel the DC."""
    gabor = _gabor_2d(size, sigma, theta, xi, slant)
    envelope = _gabor_2d(size, sigma, theta, 0.0, slant)
    kappa = gabor.sum() / envelope.sum()
    return gabor - kappa * envelope


def build_filter_bank(size: int, J: int, L: int) -> FilterBank:
    """Construct the J*L band-pass wavelets and the scale-2^J low-pass."""
    if size <= 0 or (size & (size - 1)) != 0:
        raise ParameterError(f"canvas size must be a power of two, got {size}")
    if J < 1 or L < 1:
        raise ParameterError(f"J and L must be >= 1, got J={J}, L={L}")
    if 2 ** J > size:
        raise ParameterError(f"2^J = {2 ** J} exceeds canvas size {size}")

    psi = []
    for j in range(J):
        row = []
        for l in range(L):
            theta = np.pi * l / L
            wavelet = _morlet_2d(size, 0.8 * 2 ** j, theta,
                                 3.0 * np.pi / 4.0 / 2 ** j, 4.0 / L)
            row.append(np.fft.fft2(wavelet))
        psi.append(tuple(row))

    phi_spatial = _gabor_2d(size, 0.8 * 2 ** J, 0.0, 0.0, 1.0).real
    phi_spatial /= phi_spatial.sum()
    phi = np.fft.fft2(phi_spatial).real
    return FilterBank(size=size, J=J, L=L, psi=tuple(psi), phi=phi)


def _scatter_batch(images: np.ndarray, bank: FilterBank) -> np.ndarray:
    """Scattering coefficients for a (B, size, size) image stack -> (D, B)."""
    B = images.shape[0]
    size = bank.size
    step = 2 ** bank.J
    low = size // step
    phi = bank.phi

    def lowpass_subsample(u_hat):
        # Striding the smoothed signal by `step` equals periodizing its
        # spectrum into a low x low grid, so invert only the small FFT.
        prod = u_hat * phi
        folded = prod.reshape(B, step, low, step, low).sum(axis=(1, 3))
        return fft.ifft2(folded).real.reshape(B, -1) / (step * step)

    x_hat = fft.fft2(np.asarray(images, dtype=np.float64))
    out = [lowpass_subsample(x_hat)]

    order1_hats = []
    for j1 in range(bank.J):
        for l1 in range(bank.L):
            u1 = np.abs(fft.ifft2(x_hat * bank.psi[j1][l1]))
            u1_hat = fft.fft2(u1)
            order1_hats.append((j1, u1_hat))
            out.append(lowpass_subsample(u1_hat))

    for j1, u1_hat in order1_hats:
        for j2 in range(j1 + 1, bank.J):
            for l2 in range(bank.L):
                u2 = np.abs(fft.ifft2(u1_hat * bank.psi[j2][l2]))
                out.append(lowpass_subsample(fft.fft2(u2)))

    return np.concatenate(out, axis=1).T


def scatter_image(image: np.ndarray, bank: FilterBank) -> np.ndarray:
    """Flat coefficient vector of one image; length bank.n_coefficients()."""
    image = np.asarray(image, dtype=np.float64)
    if image.shape != (bank.size, bank.size):
        raise DimensionError(
            f"image shape {image.shape} does not match bank size {bank.size}"
        )
    return _scatter_batch(image[None], bank)[:, 0]


def scatter_dataset(image_set: ImageSet, bank: FilterBank,
                    batch_size: int = 256) -> FeatureMatrix:
    """Column-per-sample matrix of scattering vectors, sample order preserved."""
    n = len(image_set)
    if n and (image_set.height, image_set.width) != (bank.size, bank.size):
        raise DimensionError(
            f"images are {image_set.height}x{image_set.width}, "
            f"bank expects {bank.size}x{bank.size}"
        )
    d = bank.n_coefficients()
    data = np.empty((d, n), dtype=np.float64)
    for start in range(0, n, batch_size):
        stop = min(start + batch_size, n)
        data[:, start:stop] = _scatter_batch(image_set.images[start:stop], bank)
    return FeatureMatrix(data, domain="scattering")


def save_feature_cache(matrix: FeatureMatrix, path) -> None:
    """Write the documented flat binary cache: magic, D, N (little-endian
    uint64), then D*N float64 values in column-major order."""
    d, n = matrix.data.shape
    with open(path, "wb") as f:
        f.write(CACHE_MAGIC)
        f.write(struct.pack("<QQ", d, n))
        f.write(np.asfortranarray(matrix.data).tobytes(order="F"))


def load_feature_cache(path, domain: str = "scattering") -> FeatureMatrix:
    with open(path, "rb") as f:
        magic = f.read(len(CACHE_MAGIC))
        if magic != CACHE_MAGIC:
            raise FormatError(f"{path}: bad cache magic {magic!r}")
        d, n = struct.unpack("<QQ", f.read(16))
        payload = f.read()
    if len(payload) != 8 * d * n:
        raise FormatError(
            f"{path}: payload holds {len(payload)} bytes, expected {8 * d * n}"
        )
    data = np.frombuffer(payload, dtype="<f8").reshape((d, n), order="F")
    return FeatureMatrix(np.ascontiguousarray(data), domain=domain)
