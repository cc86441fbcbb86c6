"""Biphoton transverse amplitude on 2D momentum grids.

The full transverse problem is four-dimensional — (q_sx, q_sy) for the
signal and (q_ix, q_iy) for the idler.  Everything here works on 2D
slices of it: one transverse axis at a time, the orthogonal components
held fixed (at zero unless a probe value is requested).  The x-plane
slice sees no walk-off; the y-plane slice carries the walk-off tilt of
the pump, which lives in the y-z plane by convention.

All mismatch components are reported **relative to the aligned
operating point** (collinear emission at the nominal wavelengths): the
constant transverse carrier of the tilted pump and the collinear
longitudinal offset are subtracted out, mirroring how a real source is
aligned before data is taken.  Without that re-centering the constant
walk-off offset would extinguish collinear emission entirely for any
realistic waist.  The aligned point therefore sits at exactly zero
mismatch, and off-nominal spectral slices retain their genuine
longitudinal detuning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from spdcsim.dispersion import (
    CrystalSetup,
    SpdcWavelengths,
    effective_index,
    wavevector_magnitude,
)

__all__ = [
    "PumpSpec",
    "TransverseSlice",
    "PhaseMismatch",
    "EvanescentInputError",
    "GridMemoryError",
    "mismatch",
    "sinc_efficiency",
    "pump_envelope",
    "amplitude",
    "evaluate_grid",
    "DEFAULT_GRID_N",
    "DEFAULT_MEMORY_BUDGET_BYTES",
]

DEFAULT_GRID_N = 1024

#: Default ceiling on evaluate_grid working memory.  A dense evaluation
#: holds roughly ten matrix-sized float64 temporaries at peak.
DEFAULT_MEMORY_BUDGET_BYTES = 2 * 1024**3

_TEMPORARIES_PER_GRID = 10


class EvanescentInputError(ValueError):
    """A transverse momentum at or beyond the free propagation cone |q| >= k."""


class GridMemoryError(RuntimeError):
    """A requested grid evaluation exceeds the configured memory budget."""


@dataclass(frozen=True)
class PumpSpec:
    """Pump beam: wavelength, waist, and wavevector decomposition.

    The pump propagates at the crystal angle ``theta_p``; its wavevector
    (magnitude ``k_mag``, set by the angle-dependent extraordinary index)
    splits into a longitudinal part ``k_z = k cos(rho)`` and a transverse
    carrier ``k_y = k sin(rho)`` along the walk-off axis.  ``k_x`` is
    identically zero under the y-z optic-axis convention.
    """

    wavelength_nm: float
    waist_m: float
    k_mag: float
    k_y: float
    k_z: float

    def __post_init__(self) -> None:
        if self.waist_m <= 0:
            raise ValueError(f"pump waist must be positive, got {self.waist_m}")
        if not math.isclose(
            self.k_y**2 + self.k_z**2, self.k_mag**2, rel_tol=1e-10
        ):
            raise ValueError("pump wavevector components do not compose to k_mag")

    @property
    def k_x(self) -> float:
        return 0.0

    @classmethod
    def from_crystal(
        cls, wavelength_nm: float, waist_m: float, crystal: CrystalSetup
    ) -> "PumpSpec":
        n = effective_index(crystal.sellmeier, crystal.theta_p, wavelength_nm)
        k = wavevector_magnitude(n, wavelength_nm)
        return cls(
            wavelength_nm=wavelength_nm,
            waist_m=waist_m,
            k_mag=k,
            k_y=k * math.sin(crystal.rho),
            k_z=k * math.cos(crystal.rho),
        )


@dataclass(frozen=True)
class TransverseSlice:
    """One 2D slice of the transverse problem: an axis tag, the signal
    and idler momentum grids along that axis, the wavelength pair of the
    spectral slice being evaluated, and the (fixed) orthogonal momentum
    component, zero by default.

    Grids must be uniform and symmetric about zero — in the re-centered
    coordinates of this package the correlation ridge passes through the
    origin, so symmetric grids keep it centered.
    """

    axis: str
    q_signal: np.ndarray
    q_idler: np.ndarray
    lambda_signal_nm: float
    lambda_idler_nm: float
    q_orthogonal: float = 0.0

    def __post_init__(self) -> None:
        if self.axis not in ("x", "y"):
            raise ValueError(f"axis must be 'x' or 'y', got {self.axis!r}")
        for name, grid in (("q_signal", self.q_signal), ("q_idler", self.q_idler)):
            if grid.ndim != 1 or grid.size < 2:
                raise ValueError(f"{name} must be a 1D grid with >= 2 points")
            steps = np.diff(grid)
            if not (steps[0] > 0 and np.allclose(steps, steps[0], rtol=1e-9)):
                raise ValueError(f"{name} must be uniform and increasing")
            if abs(grid[0] + grid[-1]) > 1e-9 * abs(grid[-1] - grid[0]):
                raise ValueError(f"{name} must be symmetric about zero")

    @property
    def dq_signal(self) -> float:
        return float(self.q_signal[1] - self.q_signal[0])

    @property
    def dq_idler(self) -> float:
        return float(self.q_idler[1] - self.q_idler[0])

    def with_pair(self, lambda_signal_nm: float, lambda_idler_nm: float) -> "TransverseSlice":
        """Same grids, different spectral slice."""
        return replace(
            self,
            lambda_signal_nm=lambda_signal_nm,
            lambda_idler_nm=lambda_idler_nm,
        )

    @classmethod
    def centered(
        cls,
        axis: str,
        wl: SpdcWavelengths,
        crystal: CrystalSetup,
        pump: PumpSpec,
        *,
        n: int = DEFAULT_GRID_N,
        sum_halfwidth: float | None = None,
        diff_halfwidth: float | None = None,
    ) -> "TransverseSlice":
        """Build default grids sized from the two physical correlation scales.

        The pump envelope confines the *sum* coordinate q_s + q_i to a
        width ~2/w0, while the phase-matching kernel confines the
        *difference* coordinate to the much larger main-lobe width
        ~sqrt(4 pi k / L); the two differ by two orders of magnitude at
        typical parameters, so the square grid must be sized from both.
        Default half-extents are 5x each scale (truncated mass < 1e-5);
        a square grid accommodating sum extent S and difference extent D
        needs per-axis half-extent (S + D) / 2.
        """
        sell = crystal.sellmeier
        k_s = wavevector_magnitude(sell.index_ordinary(wl.signal_nm), wl.signal_nm)
        k_i = wavevector_magnitude(sell.index_ordinary(wl.idler_nm), wl.idler_nm)
        k_bar = 0.5 * (k_s + k_i)
        if sum_halfwidth is None:
            sum_halfwidth = 5.0 * (2.0 / pump.waist_m)
        if diff_halfwidth is None:
            diff_halfwidth = 5.0 * math.sqrt(4.0 * math.pi * k_bar / crystal.length_m)
        half = 0.5 * (sum_halfwidth + diff_halfwidth)
        q = np.linspace(-half, half, n)
        return cls(
            axis=axis,
            q_signal=q,
            q_idler=q.copy(),
            lambda_signal_nm=wl.signal_nm,
            lambda_idler_nm=wl.idler_nm,
        )


@dataclass(frozen=True)
class PhaseMismatch:
    """Mismatch components (rad/m), relative to the aligned operating point."""

    dk_x: np.ndarray | float
    dk_y: np.ndarray | float
    dk_z: np.ndarray | float


def _ordinary_k(crystal: CrystalSetup, wavelength_nm: float) -> float:
    return wavevector_magnitude(
        crystal.sellmeier.index_ordinary(wavelength_nm), wavelength_nm
    )


def mismatch(
    q_s: tuple,
    q_i: tuple,
    wl: SpdcWavelengths,
    crystal: CrystalSetup,
    pump: PumpSpec,
    *,
    pair: tuple[float, float] | None = None,
) -> PhaseMismatch:
    """Phase mismatch for transverse momenta ``q_s = (q_sx, q_sy)`` and
    ``q_i = (q_ix, q_iy)`` (scalars or broadcastable arrays, rad/m).

    ``wl`` fixes the nominal operating point; ``pair`` optionally gives
    the (signal, idler) wavelengths of the spectral slice actually being
    evaluated (defaults to the nominal pair).  Components returned are
    re-centered on the aligned operating point:

        dk_x = -(q_sx + q_ix)
        dk_y = -(q_sy + q_iy)
        dk_z = [k_s0 - k_zs] + [k_i0 - k_zi] + (q_sy + q_iy) tan(rho)

    with k_zs = sqrt(k_s^2 - |q_s|^2) (exact, no paraxial expansion),
    k_s evaluated at the slice wavelength and k_s0 at the nominal one.
    At the aligned point (q = 0, nominal wavelengths) all three vanish;
    detuned slices keep their genuine longitudinal offset.
    """
    if pair is None:
        pair = (wl.signal_nm, wl.idler_nm)
    lam_s, lam_i = pair
    k_s = _ordinary_k(crystal, lam_s)
    k_i = _ordinary_k(crystal, lam_i)
    k_s0 = _ordinary_k(crystal, wl.signal_nm)
    k_i0 = _ordinary_k(crystal, wl.idler_nm)

    q_sx, q_sy = q_s
    q_ix, q_iy = q_i
    qs_sq = np.asarray(q_sx) ** 2 + np.asarray(q_sy) ** 2
    qi_sq = np.asarray(q_ix) ** 2 + np.asarray(q_iy) ** 2
    if np.any(qs_sq >= k_s * k_s) or np.any(qi_sq >= k_i * k_i):
        raise EvanescentInputError(
            "transverse momentum at or beyond the propagation cone |q| >= k"
        )

    dk_x = -(np.asarray(q_sx) + np.asarray(q_ix))
    dk_y = -(np.asarray(q_sy) + np.asarray(q_iy))
    dk_z = (
        (k_s0 - np.sqrt(k_s * k_s - qs_sq))
        + (k_i0 - np.sqrt(k_i * k_i - qi_sq))
        + (np.asarray(q_sy) + np.asarray(q_iy)) * math.tan(crystal.rho)
    )
    return PhaseMismatch(dk_x=dk_x, dk_y=dk_y, dk_z=dk_z)


def sinc_efficiency(dk_z, length_m: float):
    """Phase-matching efficiency sinc^2(dk_z L / 2), in [0, 1].

    sinc(u) = sin(u)/u with sinc(0) = 1; the first zero falls at
    dk_z = 2 pi / L.
    """
    if length_m <= 0:
        raise ValueError(f"crystal length must be positive, got {length_m}")
    u = np.asarray(dk_z) * (length_m / 2.0)
    s = np.sinc(u / np.pi)
    return s * s


def pump_envelope(dk_x, dk_y, waist_m: float):
    """Gaussian pump angular spectrum at the transverse mismatch:
    exp[-w0^2 (dk_x^2 + dk_y^2) / 4].

    This is the transfer of the pump's angular spectrum to the pair: the
    emission amplitude at sum coordinate q_s + q_i is the pump amplitude
    at that transverse momentum.  Peak 1 at zero mismatch, 1/e at
    |dk| = 2/w0.
    """
    if waist_m <= 0:
        raise ValueError(f"pump waist must be positive, got {waist_m}")
    r2 = np.asarray(dk_x) ** 2 + np.asarray(dk_y) ** 2
    return np.exp(-(waist_m * waist_m) * r2 / 4.0)


def _kernel(u, kind: str):
    if kind == "sinc":
        return np.sinc(np.asarray(u) / np.pi)
    if kind == "gauss":
        # Curvature-matched Gaussian stand-in: exp(-u^2/6) agrees with
        # sinc(u) through O(u^2), turning width computations analytic.
        return np.exp(-np.asarray(u) ** 2 / 6.0)
    raise ValueError(f"unknown phase-matching kernel {kind!r}")


def amplitude(
    q_signal,
    q_idler,
    sl: TransverseSlice,
    crystal: CrystalSetup,
    pump: PumpSpec,
    wl: SpdcWavelengths,
    *,
    kernel: str = "sinc",
):
    """Real biphoton amplitude at active-axis momenta (q_signal, q_idler).

    Psi = pump_envelope(dk_x, dk_y) * kernel(dk_z L / 2), evaluated with
    the slice's wavelength pair against the nominal operating point
    ``wl``.  The intensity |Psi|^2 is the per-slice far-field JID.  No
    propagation phase is attached: with the kernel real the amplitude is
    real, and only |Psi|^2 enters every downstream quantity.
    """
    q_signal = np.asarray(q_signal, dtype=float)
    q_idler = np.asarray(q_idler, dtype=float)
    orth = sl.q_orthogonal
    if sl.axis == "x":
        q_s, q_i = (q_signal, orth), (q_idler, orth)
    else:
        q_s, q_i = (orth, q_signal), (orth, q_idler)
    mm = mismatch(
        q_s, q_i, wl, crystal, pump,
        pair=(sl.lambda_signal_nm, sl.lambda_idler_nm),
    )
    env = pump_envelope(mm.dk_x, mm.dk_y, pump.waist_m)
    u = np.asarray(mm.dk_z) * (crystal.length_m / 2.0)
    return env * _kernel(u, kernel)


def evaluate_grid(
    sl: TransverseSlice,
    crystal: CrystalSetup,
    pump: PumpSpec,
    wl: SpdcWavelengths,
    *,
    kernel: str = "sinc",
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET_BYTES,
) -> np.ndarray:
    """Dense amplitude matrix over the slice grids, signal-major.

    Output[k, l] = amplitude(q_signal[k], q_idler[l]).  Evaluation is a
    single fixed-order broadcast (rows are independent, so the work is
    embarrassingly parallel, but the output is bitwise identical however
    it is scheduled).  Peak working memory is estimated up front and
    checked against ``memory_budget_bytes``.
    """
    n_s, n_i = sl.q_signal.size, sl.q_idler.size
    needed = n_s * n_i * 8 * _TEMPORARIES_PER_GRID
    if needed > memory_budget_bytes:
        raise GridMemoryError(
            f"{n_s} x {n_i} grid needs ~{needed / 2**20:.0f} MiB "
            f"(budget {memory_budget_bytes / 2**20:.0f} MiB)"
        )
    return amplitude(
        sl.q_signal[:, None],
        sl.q_idler[None, :],
        sl,
        crystal,
        pump,
        wl,
        kernel=kernel,
    )
