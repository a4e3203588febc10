"""Paraxial multimode propagation through the confocal telescope and film.

The telescope-plus-film transfer matrix connecting a normally incident plane
wave to the output mode q3, in the lab (x, y) basis, is

    T(q3) = Int_{|q2| <= k sin(theta_ap)} dq2
            exp(i a |q2 - mag q3|^2) F_lab(q2, lambda)

In mode-aligned (p, s) bases the same matrix carries an extra rotation by the
azimuth of q3 (the paraxial p direction of mode q3 is the unit vector along
q3); that factor is pure bookkeeping between bases and must not act on
lab-frame fields, polarizers or detectors, so everything here stays in the
lab basis throughout.

with a = (n - 1) Delta / (2 n k) and angular magnification
mag = n f / ((n - 1) Delta).  The integral is evaluated by a midpoint rule on
a square grid masked to the aperture disc; the grid is symmetric under the
square-lattice point group so that the symmetry properties of the film carry
over to T exactly up to floating point.  A stationary-phase shortcut replaces
the integral by the analytic Gaussian prefactor times F_lab at the stationary
point q2* = mag q3 when that point lies safely inside the aperture.

The overall scalar normalization of T is arbitrary (one global constant per
setup); all downstream observables are invariant under it.

Units: nm, nm^-1, radians.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .film import FilmModel, default_film, film_matrix, film_matrix_grid
from .jones import ellipse_arrays, rotation
from .kernels import accumulate_transfer

__all__ = [
    "SetupParams",
    "GridSpec",
    "FieldMap",
    "QuadratureConvergenceError",
    "StationaryPointError",
    "lens_matrix",
    "propagation_phase",
    "telescope_matrix",
    "telescope_matrix_sp",
    "field_map",
    "write_field_map_csv",
    "write_field_map_pgm",
]

DEFAULT_QUAD_POINTS = 201
PARAXIAL_LIMIT_RAD = 0.3


class QuadratureConvergenceError(RuntimeError):
    """Refining the quadrature grid changed the result by more than the tolerance."""

    def __init__(self, coarse, fine, rel_change):
        super().__init__(
            f"telescope quadrature not converged: relative change {rel_change:.3e} "
            "on grid refinement")
        self.coarse = coarse
        self.fine = fine
        self.rel_change = rel_change


class StationaryPointError(ValueError):
    """Stationary phase point outside (or too close to) the aperture edge."""


@dataclass(frozen=True)
class SetupParams:
    """Geometry of the telescope, substrate and film.

    lam : wavelength in nm
    f : lens focal length in nm
    n : substrate refractive index
    delta : substrate thickness in nm
    theta_ap : telescope semiaperture in radians, measured at the film (on q2)
    film : hole-array film model
    """

    lam: float
    f: float
    n: float
    delta: float
    theta_ap: float
    film: FilmModel

    def __post_init__(self):
        if self.lam <= 0 or self.f <= 0 or self.delta <= 0:
            raise ValueError("lam, f and delta must be positive")
        if self.n <= 1.0:
            raise ValueError("substrate index must exceed 1")
        if not 0.0 <= self.theta_ap <= PARAXIAL_LIMIT_RAD:
            raise ValueError(
                f"semiaperture {self.theta_ap} rad outside paraxial range "
                f"[0, {PARAXIAL_LIMIT_RAD}]")

    @property
    def k(self) -> float:
        return 2.0 * np.pi / self.lam

    @property
    def magnification(self) -> float:
        """Angular magnification theta2 / theta3 = n f / ((n - 1) Delta)."""
        return self.n * self.f / ((self.n - 1.0) * self.delta)

    @property
    def alpha(self) -> float:
        """Quadratic phase coefficient (n - 1) Delta / (2 n k), in nm^2."""
        return (self.n - 1.0) * self.delta / (2.0 * self.n * self.k)

    @property
    def q2_max(self) -> float:
        """Aperture disc radius k sin(theta_ap) in nm^-1."""
        return self.k * np.sin(self.theta_ap)

    @staticmethod
    def paper_defaults(lam: float = 797.0, theta_ap_deg: float = 8.0,
                       film: FilmModel | None = None) -> "SetupParams":
        """f = 15 mm, n = 1.52, Delta = 0.5 mm, default calibrated film."""
        return SetupParams(
            lam=lam, f=15e6, n=1.52, delta=0.5e6,
            theta_ap=np.deg2rad(theta_ap_deg),
            film=film if film is not None else default_film(),
        )


@dataclass(frozen=True)
class GridSpec:
    """Output q3 grid: n x n points, half-extent theta3_max_deg (None = mapped aperture)."""

    n: int = 41
    theta3_max_deg: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("grid size must be at least 1")


@dataclass(frozen=True)
class FieldMap:
    """Output Jones field on a square q3 grid with derived polarization data.

    fields[i, j] is the Jones vector at (q3x_axis[i], q3y_axis[j]).  The
    relative phases between grid points are carried along but are not
    physically meaningful for coincidence observables.
    """

    q3x_axis: np.ndarray
    q3y_axis: np.ndarray
    fields: np.ndarray
    intensity: np.ndarray
    psi: np.ndarray
    axis_ratio: np.ndarray
    input_pol: np.ndarray
    lam: float
    theta3_max_deg: float


def _azimuth(q) -> float:
    """Azimuth of a transverse wavevector; 0 for the zero vector by convention."""
    if q[0] == 0.0 and q[1] == 0.0:
        return 0.0
    return float(np.arctan2(q[1], q[0]))


def lens_matrix(q_out, q_in, setup: SetupParams) -> np.ndarray:
    """Paraxial thin-lens transfer matrix between plane-wave modes.

    (f / (2 pi k i)) exp(i (f / 2k) |q_out - q_in|^2) R(phi_out) R(-phi_in).
    """
    k = setup.k
    dq2 = (q_out[0] - q_in[0]) ** 2 + (q_out[1] - q_in[1]) ** 2
    scalar = setup.f / (2.0 * np.pi * k * 1j) * np.exp(1j * setup.f / (2.0 * k) * dq2)
    return scalar * (rotation(_azimuth(q_out)) @ rotation(-_azimuth(q_in)))


def propagation_phase(q, z: float, setup: SetupParams) -> complex:
    """Paraxial free-propagation phase exp(-i z |q|^2 / 2k) over distance z."""
    return complex(np.exp(-1j * z * (q[0] ** 2 + q[1] ** 2) / (2.0 * setup.k)))


def _quadrature_grid(setup: SetupParams, n_grid: int):
    """Midpoint-rule points covering the aperture disc, masked and flattened.

    The point set is symmetric under the square-lattice point group for any
    n_grid, which makes T(0, 0) proportional to the identity up to floating
    point rather than up to quadrature error.
    """
    r = setup.q2_max
    if r <= 0.0:
        raise ValueError("telescope quadrature needs a positive semiaperture")
    h = 2.0 * r / n_grid
    axis = -r + (np.arange(n_grid) + 0.5) * h
    qx, qy = np.meshgrid(axis, axis, indexing="ij")
    mask = qx ** 2 + qy ** 2 <= r * r
    return qx[mask], qy[mask], h * h


class TelescopeSolver:
    """Precomputed quadrature grid and film samples for one setup.

    Evaluating many q3 points amortizes the film-model evaluation over the
    aperture; the per-point phase sums run in the compiled kernel.
    """

    def __init__(self, setup: SetupParams, n_grid: int = DEFAULT_QUAD_POINTS):
        self.setup = setup
        self.n_grid = n_grid
        self.q2x, self.q2y, self.cell_area = _quadrature_grid(setup, n_grid)
        self.fxx, self.fxy, self.fyx, self.fyy = film_matrix_grid(
            setup.film, self.q2x, self.q2y, setup.lam)

    def evaluate(self, q3_points: np.ndarray) -> np.ndarray:
        """T(q3) for each row of ``q3_points``; returns shape (P, 2, 2)."""
        q3_points = np.atleast_2d(np.asarray(q3_points, dtype=float))
        centers = self.setup.magnification * q3_points
        sums = accumulate_transfer(
            self.q2x, self.q2y, self.fxx, self.fxy, self.fyx, self.fyy,
            centers, self.setup.alpha)
        return sums.reshape(q3_points.shape[0], 2, 2) * self.cell_area


def telescope_matrix(q3, setup: SetupParams, n_grid: int = DEFAULT_QUAD_POINTS,
                     check_convergence: bool = False, tol: float = 1e-4,
                     max_refinements: int = 1) -> np.ndarray:
    """Telescope-plus-film transfer matrix T(q3, 0) by aperture quadrature.

    With ``check_convergence`` the grid density is doubled (up to
    ``max_refinements`` times) until no entry moves by more than ``tol``
    relative to the matrix scale; if the budget runs out unconverged, a
    QuadratureConvergenceError carrying the last two results is raised.
    """
    current = TelescopeSolver(setup, n_grid).evaluate([q3])[0]
    if not check_convergence:
        return current
    for level in range(1, max_refinements + 1):
        previous = current
        current = TelescopeSolver(setup, 2 ** level * n_grid).evaluate([q3])[0]
        scale = np.max(np.abs(current))
        rel = np.max(np.abs(current - previous)) / scale if scale > 0 else 0.0
        if rel <= tol:
            return current
    raise QuadratureConvergenceError(previous, current, rel)


def telescope_matrix_sp(q3, setup: SetupParams, margin: float = 0.05) -> np.ndarray:
    """Stationary-phase approximation of the telescope matrix.

    Valid when the stationary point q2* = mag q3 lies inside the aperture
    disc by the relative ``margin``; the Gaussian prefactor i pi / a makes
    the result constant-factor-comparable to ``telescope_matrix``.
    """
    q3 = np.asarray(q3, dtype=float)
    q2_star = setup.magnification * q3
    r = np.hypot(q2_star[0], q2_star[1])
    if r >= (1.0 - margin) * setup.q2_max:
        raise StationaryPointError(
            f"stationary point |q2*| = {r:.4e} nm^-1 not inside the aperture "
            f"(limit {(1.0 - margin) * setup.q2_max:.4e})")
    prefactor = 1j * np.pi / setup.alpha
    return prefactor * film_matrix(setup.film, q2_star, setup.lam)


def field_map(input_pol: np.ndarray, grid_spec: GridSpec, setup: SetupParams,
              n_grid: int = DEFAULT_QUAD_POINTS) -> FieldMap:
    """Output field T(q3) input_pol over a symmetric square q3 grid."""
    input_pol = np.asarray(input_pol, dtype=complex)
    norm = np.sqrt(np.real(np.vdot(input_pol, input_pol)))
    if not np.isclose(norm, 1.0, atol=1e-9):
        raise ValueError("input polarization must be normalized")

    if grid_spec.theta3_max_deg is None:
        theta3_max = setup.theta_ap / setup.magnification
    else:
        theta3_max = np.deg2rad(grid_spec.theta3_max_deg)
    q3_max = setup.k * np.sin(theta3_max)
    axis = np.linspace(-q3_max, q3_max, grid_spec.n) if grid_spec.n > 1 \
        else np.zeros(1)

    qx, qy = np.meshgrid(axis, axis, indexing="ij")
    points = np.column_stack([qx.ravel(), qy.ravel()])
    mats = TelescopeSolver(setup, n_grid).evaluate(points)
    fields = np.einsum("pij,j->pi", mats, input_pol).reshape(grid_spec.n, grid_spec.n, 2)

    intensity, psi, ratio = ellipse_arrays(fields[..., 0], fields[..., 1])
    return FieldMap(
        q3x_axis=axis, q3y_axis=axis.copy(), fields=fields,
        intensity=intensity, psi=psi, axis_ratio=ratio,
        input_pol=input_pol, lam=setup.lam,
        theta3_max_deg=float(np.rad2deg(theta3_max)),
    )


# ---------------------------------------------------------------------------
# field map export
# ---------------------------------------------------------------------------

def write_field_map_csv(fmap: FieldMap, path) -> None:
    """Write the map as CSV rows q3x,q3y,theta3x_deg,theta3y_deg,intensity,psi_rad,axis_ratio."""
    k = 2.0 * np.pi / fmap.lam
    lines = ["q3x,q3y,theta3x_deg,theta3y_deg,intensity,psi_rad,axis_ratio"]
    for i, q3x in enumerate(fmap.q3x_axis):
        for j, q3y in enumerate(fmap.q3y_axis):
            tx = np.rad2deg(np.arcsin(q3x / k))
            ty = np.rad2deg(np.arcsin(q3y / k))
            lines.append(",".join(f"{v:.8e}" for v in (
                q3x, q3y, tx, ty,
                fmap.intensity[i, j], fmap.psi[i, j], fmap.axis_ratio[i, j])))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_field_map_pgm(fmap: FieldMap, path, channel: str = "intensity") -> None:
    """Write one channel as a 16-bit binary PGM image.

    ``intensity`` scales [0, max] to [0, 65535]; ``axis_ratio`` maps the
    signed range [-1, 1] to [0, 65535] so mid-gray is linear polarization.
    """
    if channel == "intensity":
        data = fmap.intensity
        top = data.max()
        scaled = data / top if top > 0 else np.zeros_like(data)
    elif channel == "axis_ratio":
        scaled = (fmap.axis_ratio + 1.0) / 2.0
    else:
        raise ValueError(f"unknown field-map channel {channel!r}")
    pixels = np.round(np.clip(scaled, 0.0, 1.0) * 65535).astype(">u2")
    # image rows run along +y (axis index j), columns along +x
    pixels = pixels.T[::-1]
    with open(path, "wb") as fh:
        fh.write(f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n65535\n".encode())
        fh.write(pixels.tobytes())
