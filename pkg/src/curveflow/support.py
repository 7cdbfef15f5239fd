"""Convex plane curves as truncated support-function Fourier spectra.

A strictly convex closed curve is encoded by the Fourier coefficients of
its support function in the outward normal angle theta:

    u(theta) = mean + sum_{n=1}^{N} a_n cos(n theta) + b_n sin(n theta)

Everything geometric follows from u: the radius of curvature is
u'' + u, the length is 2*pi*mean, and area / curvature integrals have
closed forms in the coefficients. Quadratures, where needed, live on
uniform theta grids where the trapezoid rule is spectrally accurate.

Angles are normalized to [0, 2*pi); uniform grids use theta_j = 2*pi*j/M.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

# Strict positivity threshold for min(u'' + u) on the validation grid.
CONVEXITY_EPS = 1e-9


class ConvexityError(ValueError):
    """Raised when an operation requires a strictly convex spectrum."""


def _coeff_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a one-dimensional sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class SupportSpectrum:
    """Immutable truncated Fourier representation of a support function.

    ``cos_coeffs`` and ``sin_coeffs`` hold a_1..a_N and b_1..b_N; the
    truncation N must be at least 2 so that the mean, translation and
    lowest elliptic modes are all representable. Convexity is *not*
    implied by construction; run :func:`validate_convexity`.
    """

    mean: float
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray

    def __post_init__(self):
        cos_arr = _coeff_array(self.cos_coeffs, "cos_coeffs")
        sin_arr = _coeff_array(self.sin_coeffs, "sin_coeffs")
        if len(cos_arr) != len(sin_arr):
            raise ValueError("cos_coeffs and sin_coeffs must have equal length")
        if len(cos_arr) < 2:
            raise ValueError("truncation must be at least 2")
        if not np.isfinite(self.mean):
            raise ValueError("mean must be finite")
        cos_arr.flags.writeable = False
        sin_arr.flags.writeable = False
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "cos_coeffs", cos_arr)
        object.__setattr__(self, "sin_coeffs", sin_arr)

    @property
    def truncation(self) -> int:
        return len(self.cos_coeffs)

    def __eq__(self, other):
        if not isinstance(other, SupportSpectrum):
            return NotImplemented
        return (
            self.mean == other.mean
            and np.array_equal(self.cos_coeffs, other.cos_coeffs)
            and np.array_equal(self.sin_coeffs, other.sin_coeffs)
        )

    def __hash__(self):
        return hash((self.mean, self.cos_coeffs.tobytes(), self.sin_coeffs.tobytes()))


@dataclass(frozen=True)
class CurveSamples:
    """Points of a reconstructed curve on a uniform normal-angle grid."""

    thetas: np.ndarray
    points: np.ndarray  # shape (M, 2)

    def __post_init__(self):
        thetas = np.array(self.thetas, dtype=float)
        points = np.array(self.points, dtype=float)
        if thetas.ndim != 1 or points.shape != (len(thetas), 2):
            raise ValueError("thetas must be (M,) and points (M, 2)")
        if not (np.all(np.isfinite(thetas)) and np.all(np.isfinite(points))):
            raise ValueError("curve samples contain non-finite entries")
        thetas.flags.writeable = False
        points.flags.writeable = False
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "points", points)


@dataclass(frozen=True)
class GeometricSummary:
    """Scalar geometry of one curve: lengths, areas and curvature extrema.

    ``k_min``, ``k_max`` and ``sq_curv_integral`` are NaN when the
    spectrum fails strict convexity (curvature is undefined there).
    """

    length: float
    area: float
    ipd: float
    ipr: float
    k_min: float
    k_max: float
    inv_curv_integral: float
    sq_curv_integral: float


def theta_grid(size: int) -> np.ndarray:
    """Uniform grid theta_j = 2*pi*j/size, j = 0..size-1."""
    return TWO_PI * np.arange(size) / size


def _mode_angles(theta, truncation: int) -> np.ndarray:
    th = np.asarray(theta, dtype=float)
    return np.multiply.outer(th, np.arange(1, truncation + 1))


def evaluate_support(spec: SupportSpectrum, theta):
    """u(theta) by direct series summation; accepts scalars or arrays."""
    ang = _mode_angles(theta, spec.truncation)
    vals = spec.mean + np.cos(ang) @ spec.cos_coeffs + np.sin(ang) @ spec.sin_coeffs
    return float(vals) if np.ndim(theta) == 0 else vals


def support_derivative(spec: SupportSpectrum, theta, order: int = 1):
    """d^m u / d theta^m by term-wise differentiation of the series."""
    if order < 0:
        raise ValueError("order must be non-negative")
    if order == 0:
        return evaluate_support(spec, theta)
    n = np.arange(1, spec.truncation + 1)
    ang = _mode_angles(theta, spec.truncation) + order * (np.pi / 2.0)
    scale = n.astype(float) ** order
    vals = np.cos(ang) @ (scale * spec.cos_coeffs) + np.sin(ang) @ (scale * spec.sin_coeffs)
    return float(vals) if np.ndim(theta) == 0 else vals


def radius_of_curvature(spec: SupportSpectrum, theta):
    """1/k = u'' + u; mode n is weighted by (1 - n^2), so mode 1 drops out.

    A non-positive value is the singularity signal, not an error.
    """
    n = np.arange(1, spec.truncation + 1)
    w = 1.0 - n.astype(float) ** 2
    ang = _mode_angles(theta, spec.truncation)
    vals = spec.mean + np.cos(ang) @ (w * spec.cos_coeffs) + np.sin(ang) @ (w * spec.sin_coeffs)
    return float(vals) if np.ndim(theta) == 0 else vals


def default_validation_grid(truncation: int) -> int:
    return max(4 * truncation, 512)


def validate_convexity(spec: SupportSpectrum, grid_size: int | None = None) -> float:
    """Minimum of u'' + u over a uniform grid; positive means convex.

    The grid must have at least 4N points so a band-limited minimum
    cannot hide between nodes.
    """
    if grid_size is None:
        grid_size = default_validation_grid(spec.truncation)
    elif grid_size < 4 * spec.truncation:
        raise ValueError("grid_size must be at least 4 * truncation")
    return float(np.min(radius_of_curvature(spec, theta_grid(grid_size))))


def radius_extrema(spec: SupportSpectrum, grid_size: int | None = None) -> tuple[float, float]:
    """(min, max) of the radius of curvature over the validation grid."""
    if grid_size is None:
        grid_size = default_validation_grid(spec.truncation)
    rho = radius_of_curvature(spec, theta_grid(grid_size))
    return float(np.min(rho)), float(np.max(rho))


def require_convex(spec: SupportSpectrum, grid_size: int | None = None) -> float:
    rho_min = validate_convexity(spec, grid_size)
    if rho_min <= CONVEXITY_EPS:
        raise ConvexityError(
            f"spectrum fails strict convexity: min radius of curvature {rho_min:.3e}"
        )
    return rho_min


def curve_length(spec: SupportSpectrum) -> float:
    """L = integral of u over the circle = 2*pi*mean, exactly."""
    return TWO_PI * spec.mean


def enclosed_area(spec: SupportSpectrum) -> float:
    """A = (1/2) * integral of u (u'' + u).

    Closed form pi*mean^2 - (pi/2) * sum (n^2 - 1)(a_n^2 + b_n^2);
    the translation mode n = 1 contributes nothing.
    """
    n = np.arange(1, spec.truncation + 1).astype(float)
    power = spec.cos_coeffs**2 + spec.sin_coeffs**2
    return float(np.pi * spec.mean**2 - (np.pi / 2.0) * np.sum((n**2 - 1.0) * power))


def total_inverse_curvature(spec: SupportSpectrum) -> float:
    """integral (1/k) ds = integral (u'' + u)^2 dtheta.

    Closed form L^2/(2*pi) + pi * sum (n^2 - 1)^2 (a_n^2 + b_n^2).
    """
    n = np.arange(1, spec.truncation + 1).astype(float)
    power = spec.cos_coeffs**2 + spec.sin_coeffs**2
    length = curve_length(spec)
    return float(length**2 / TWO_PI + np.pi * np.sum((n**2 - 1.0) ** 2 * power))


def sq_curvature_integral(spec: SupportSpectrum, grid_size: int = 2048) -> float:
    """integral k^2 ds = integral dtheta / (u'' + u), by trapezoid quadrature.

    No closed form exists; the uniform-grid trapezoid rule converges
    spectrally for the smooth positive integrand. Rejects non-convex input.
    """
    require_convex(spec)
    rho = radius_of_curvature(spec, theta_grid(grid_size))
    return float(np.mean(1.0 / rho) * TWO_PI)


def curve_position(spec: SupportSpectrum, thetas) -> CurveSamples:
    """Reconstruct curve points P = u*(cos, sin) + u'*(-sin, cos)."""
    th = np.asarray(thetas, dtype=float)
    u = evaluate_support(spec, th)
    du = support_derivative(spec, th, order=1)
    x = u * np.cos(th) - du * np.sin(th)
    y = u * np.sin(th) + du * np.cos(th)
    return CurveSamples(thetas=th, points=np.column_stack([x, y]))


def project_from_samples(u_values, truncation: int) -> SupportSpectrum:
    """Discrete Fourier projection of support samples on a uniform grid.

    Trapezoid-rule projections are exact for band-limited input with
    highest mode <= truncation, provided M >= 2*truncation + 2.
    """
    u = _coeff_array(u_values, "u_values")
    m = len(u)
    if truncation < 2:
        raise ValueError("truncation must be at least 2")
    if m < 2 * truncation + 2:
        raise ValueError(
            f"need at least {2 * truncation + 2} samples for truncation {truncation}, got {m}"
        )
    coeffs = np.fft.rfft(u)
    mean = coeffs[0].real / m
    cos_coeffs = 2.0 * coeffs[1 : truncation + 1].real / m
    sin_coeffs = -2.0 * coeffs[1 : truncation + 1].imag / m
    return SupportSpectrum(mean=mean, cos_coeffs=cos_coeffs, sin_coeffs=sin_coeffs)


def polygon_support_samples(vertices, grid_size: int) -> np.ndarray:
    """h(theta_j) = max_i <v_i, (cos theta_j, sin theta_j)> on the uniform grid."""
    verts = np.asarray(vertices, dtype=float)
    th = theta_grid(grid_size)
    return np.max(verts @ np.vstack([np.cos(th), np.sin(th)]), axis=0)


def spectrum_from_polygon(vertices, truncation: int = 16, grid_size: int = 1024) -> SupportSpectrum:
    """Project the support function of a convex polygon onto a spectrum.

    The truncation of a polygon's (non-smooth) support function is
    approximate and may fail strict convexity; callers must run
    :func:`validate_convexity` before using the result geometrically.
    Vertices must be in convex position, counterclockwise.
    """
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
        raise ValueError("need at least 3 two-dimensional vertices")
    if not np.all(np.isfinite(verts)):
        raise ValueError("vertices contain non-finite entries")
    m = len(verts)
    for i in range(m):
        a, b, c = verts[i], verts[(i + 1) % m], verts[(i + 2) % m]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if cross <= 0.0:
            raise ConvexityError(
                "vertices are not in strictly convex counterclockwise position: "
                f"triple ({tuple(a)}, {tuple(b)}, {tuple(c)}) has cross product {cross:.3e}"
            )
    return project_from_samples(polygon_support_samples(verts, grid_size), truncation)


def spectrum_to_dict(spec: SupportSpectrum) -> dict:
    return {
        "mean": spec.mean,
        "cos": [float(v) for v in spec.cos_coeffs],
        "sin": [float(v) for v in spec.sin_coeffs],
    }


def spectrum_from_dict(record: dict) -> SupportSpectrum:
    cos = [float(v) for v in record.get("cos", [])]
    sin = [float(v) for v in record.get("sin", [])]
    n = max(len(cos), len(sin), 2)
    cos += [0.0] * (n - len(cos))
    sin += [0.0] * (n - len(sin))
    return SupportSpectrum(mean=float(record["mean"]), cos_coeffs=cos, sin_coeffs=sin)


def spectrum_to_json(spec: SupportSpectrum) -> str:
    return json.dumps(spectrum_to_dict(spec))


def spectrum_from_json(text: str) -> SupportSpectrum:
    return spectrum_from_dict(json.loads(text))


def curve_samples_to_csv(samples: CurveSamples) -> str:
    lines = ["theta,x,y"]
    for th, (x, y) in zip(samples.thetas, samples.points):
        lines.append(f"{float(th)!r},{float(x)!r},{float(y)!r}")
    return "\n".join(lines) + "\n"
