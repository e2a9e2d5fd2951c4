"""Retrospective rigid-motion corruption of 2D images in k-space.

Phase-encode lines are the rows of the centred 2D spectrum, acquired
sequentially from -ky_max to +ky_max.  A trajectory assigns one rigid state
(tx, ty, theta) to every line; the lines of each state are copied from the
spectrum of the correspondingly transformed image, so inconsistencies
between lines show up as ghosting and blurring after the inverse transform.

Translations are applied as linear phase ramps (exact, circular); rotations
are applied in image space with bilinear resampling and zero fill before the
forward transform.  The magnitude of the inverse transform is returned, as
for magnitude MR images.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# peak |translation| in pixels and |rotation| in degrees per severity level
TRANSLATION_AMPLITUDE = (0.0, 2.0, 5.0)
ROTATION_AMPLITUDE = (0.0, 2.0, 5.0)

# number of sudden movement events per trajectory (inclusive bounds)
_MIN_EVENTS, _MAX_EVENTS = 2, 5

# fraction of central lines kept motion-free so gross contrast survives
_PROTECTED_FRACTION = 0.10


@dataclass
class MotionTrajectory:
    """Per-line rigid parameters; all arrays share length == image height."""

    tx: np.ndarray
    ty: np.ndarray
    theta: np.ndarray
    severity: int
    seed: int

    @property
    def n_lines(self) -> int:
        return len(self.tx)

    def states(self) -> np.ndarray:
        """Distinct (tx, ty, theta) rows, in lexicographic order."""
        params = np.stack([self.tx, self.ty, self.theta], axis=1)
        return np.unique(params, axis=0)


def _protected_band(n_lines: int) -> tuple[int, int]:
    # half-open [lo, hi) covering at least the central _PROTECTED_FRACTION
    half = _PROTECTED_FRACTION / 2.0
    lo = int(np.floor(n_lines * (0.5 - half)))
    hi = int(np.ceil(n_lines * (0.5 + half)))
    return lo, hi


def make_trajectory(severity: int, seed: int, n_lines: int) -> MotionTrajectory:
    """Draw a piecewise-constant rigid trajectory over ``n_lines`` lines.

    A random number of movement events splits the acquisition into segments
    of constant (tx, ty, theta), drawn uniformly within the severity bounds.
    Every segment that touches the central 10% of lines is forced to zero
    motion so the k-space centre stays consistent.
    """
    if severity not in (0, 1, 2):
        raise ValueError(f"severity must be 0, 1 or 2, got {severity!r}")
    if n_lines < 8:
        raise ValueError(f"need at least 8 lines, got {n_lines}")

    tx = np.zeros(n_lines)
    ty = np.zeros(n_lines)
    theta = np.zeros(n_lines)
    if severity == 0:
        return MotionTrajectory(tx, ty, theta, severity, seed)

    rng = np.random.default_rng(seed)
    n_events = int(rng.integers(_MIN_EVENTS, _MAX_EVENTS + 1))
    events = np.sort(rng.choice(np.arange(1, n_lines), size=n_events, replace=False))
    bounds = np.concatenate([[0], events, [n_lines]])

    amp_t = TRANSLATION_AMPLITUDE[severity]
    amp_r = ROTATION_AMPLITUDE[severity]
    lo, hi = _protected_band(n_lines)
    for start, stop in zip(bounds[:-1], bounds[1:]):
        if start < hi and stop > lo:
            continue  # overlaps the protected k-space centre
        tx[start:stop] = rng.uniform(-amp_t, amp_t)
        ty[start:stop] = rng.uniform(-amp_t, amp_t)
        theta[start:stop] = rng.uniform(-amp_r, amp_r)
    return MotionTrajectory(tx, ty, theta, severity, seed)


def rotate_bilinear(image: np.ndarray, angle_deg: float) -> np.ndarray:
    """Rotate about the image centre (bilinear sampling, zero fill).

    Positive angles match the sign convention of scipy.ndimage.rotate on
    (row, col) arrays.
    """
    h, w = image.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    rad = np.deg2rad(angle_deg)
    cos_a, sin_a = np.cos(rad), np.sin(rad)

    rows, cols = np.meshgrid(
        np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij"
    )
    dy, dx = rows - cy, cols - cx
    src_r = cos_a * dy - sin_a * dx + cy
    src_c = sin_a * dy + cos_a * dx + cx

    r0 = np.floor(src_r).astype(np.int64)
    c0 = np.floor(src_c).astype(np.int64)
    fr = src_r - r0
    fc = src_c - c0

    def sample(ri, ci):
        valid = (ri >= 0) & (ri < h) & (ci >= 0) & (ci < w)
        out = np.zeros_like(src_r)
        out[valid] = image[ri[valid], ci[valid]]
        return out

    return (
        (1 - fr) * (1 - fc) * sample(r0, c0)
        + (1 - fr) * fc * sample(r0, c0 + 1)
        + fr * (1 - fc) * sample(r0 + 1, c0)
        + fr * fc * sample(r0 + 1, c0 + 1)
    )


def apply_motion(image: np.ndarray, traj: MotionTrajectory) -> np.ndarray:
    """Corrupt a 2D image with the given trajectory.

    For each distinct motion state the image is rotated, transformed to
    k-space, phase-ramped for the translation, and the rows acquired during
    that state are copied into a composite spectrum.  Returns the magnitude
    of the inverse transform, clipped to [0, 1], in the input dtype.
    """
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValueError(f"expected a 2D image, got shape {img.shape}")
    h, w = img.shape
    if h != traj.n_lines:
        raise ValueError(
            f"image height {h} does not match trajectory length {traj.n_lines}"
        )
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    if img.min() < -1e-6 or img.max() > 1 + 1e-6:
        raise ValueError("image intensities must lie in [0, 1]")

    work = img.astype(np.float64)
    params = np.stack([traj.tx, traj.ty, traj.theta], axis=1)
    fy = np.fft.fftshift(np.fft.fftfreq(h))[:, None]
    fx = np.fft.fftshift(np.fft.fftfreq(w))[None, :]

    composite = np.empty((h, w), dtype=np.complex128)
    for state in traj.states():
        lines = np.all(params == state, axis=1)
        tx, ty, theta = state
        moved = rotate_bilinear(work, theta) if theta != 0.0 else work
        spectrum = np.fft.fftshift(np.fft.fft2(moved))
        if tx != 0.0 or ty != 0.0:
            spectrum = spectrum * np.exp(-2j * np.pi * (fx * tx + fy * ty))
        composite[lines] = spectrum[lines]

    out = np.abs(np.fft.ifft2(np.fft.ifftshift(composite)))
    return np.clip(out, 0.0, 1.0).astype(img.dtype)


def corrupt_stack(stack: np.ndarray, traj: MotionTrajectory) -> np.ndarray:
    """Corrupt every channel of a (C, H, W) stack with the same trajectory."""
    stack = np.asarray(stack)
    if stack.ndim != 3:
        raise ValueError(f"expected a (C, H, W) stack, got shape {stack.shape}")
    return np.stack([apply_motion(channel, traj) for channel in stack])
