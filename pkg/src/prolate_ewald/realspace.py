"""Short-range (near-field) energy, forces, and pressure in one fused pass."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PPoly

from .kernel import SplitKernel, far_field, fn_weight, near_field
from .system import NeighborList, ParticleSystem, minimum_image


class RealspaceError(Exception):
    pass


class SingularPairError(RealspaceError):
    """Coincident particles; physical configurations never need them."""


@dataclass(frozen=True)
class ShortRangeResult:
    energy: float
    forces: np.ndarray
    pressure: np.ndarray
    pair_count: int


@dataclass(frozen=True)
class PairTable:
    """Fast near-field evaluation: smooth polynomial below r_in, spline above.

    The near field is 1/r minus the smooth far field, so only smooth pieces
    are tabulated; the 1/r singularity is added back exactly.
    """

    r_in: float
    r_c: float
    smooth_coeffs: np.ndarray  # far_field(r) on [0, r_in], ascending powers
    fn_coeffs: np.ndarray      # fn_weight(r) on [0, r_in], ascending powers
    smooth_spline: PPoly       # far_field on [r_in, r_c]
    fn_spline: PPoly           # fn_weight on [r_in, r_c]
    resolution: int

    def near_field(self, r):
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        lo = r <= self.r_in
        out[lo] = 1.0 / r[lo] - np.polynomial.polynomial.polyval(
            r[lo], self.smooth_coeffs)
        hi = ~lo
        rc = np.minimum(r[hi], self.r_c)
        out[hi] = 1.0 / r[hi] - self.smooth_spline(rc)
        out[r >= self.r_c] = 0.0
        return out

    def fn_weight(self, r):
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        lo = r <= self.r_in
        out[lo] = np.polynomial.polynomial.polyval(r[lo], self.fn_coeffs)
        hi = ~lo
        out[hi] = self.fn_spline(np.minimum(r[hi], self.r_c))
        out[r > self.r_c] = 0.0
        return out


def build_pair_table(kern: SplitKernel, r_in: float | None = None,
                     resolution: int = 4096, order: int = 8) -> PairTable:
    """Tabulate the near-field kernel and its force weight.

    The low-r polynomial order defaults to 8; r_in shrinks automatically from
    0.1 r_c until the fit reaches 1e-11 relative, which large bandwidths need.
    """
    r_c = kern.r_c
    if r_in is None:
        r_in = 0.1 * r_c
    if not (0.0 < r_in < r_c):
        raise RealspaceError(f"inner cutoff r_in={r_in} not in (0, r_c)")

    # Chebyshev fit of the two smooth pieces on [0, r_in].
    s = np.cos(np.pi * (2.0 * np.arange(order + 1) + 1.0) / (2.0 * (order + 1)))
    for _ in range(12):
        r_nodes = 0.5 * r_in * (s + 1.0)
        smooth = np.polynomial.Polynomial.fit(
            r_nodes, far_field(kern, r_nodes), order, domain=[0.0, r_in]
        ).convert().coef
        fnc = np.polynomial.Polynomial.fit(
            r_nodes, fn_weight(kern, np.maximum(r_nodes, 1e-300)), order,
            domain=[0.0, r_in]
        ).convert().coef
        probe = np.linspace(1e-6 * r_c, r_in, 512)
        err = np.max(np.abs(
            np.polynomial.polynomial.polyval(probe, smooth) - far_field(kern, probe)
        )) / far_field(kern, 0.0)
        if err <= 1e-11:
            break
        r_in *= 0.5
    else:
        raise RealspaceError("inner-cutoff polynomial fit did not converge")

    knots = np.linspace(r_in, r_c, resolution)
    smooth_spline = CubicSpline(knots, far_field(kern, knots))
    fn_spline = CubicSpline(knots, fn_weight(kern, knots))
    pad = np.zeros(order + 1)
    pad[: smooth.size] = smooth
    fpad = np.zeros(order + 1)
    fpad[: fnc.size] = fnc
    return PairTable(r_in=float(r_in), r_c=r_c, smooth_coeffs=pad, fn_coeffs=fpad,
                     smooth_spline=smooth_spline, fn_spline=fn_spline,
                     resolution=int(resolution))


def short_range(sys: ParticleSystem, kern: SplitKernel, neighbors: NeighborList,
                table: PairTable | None = None) -> ShortRangeResult:
    """Fused near-field pass: energy, forces, and pressure tensor.

    energy  = sum_{pairs} q_i q_j N^c(r)
    force_i = sum_j q_i q_j F_N(r) dr_ij / r^3          (repulsive for qq > 0)
    P_N     = (1/V) sum_{pairs} q_i q_j F_N(r) dr (x) dr / r^3
    """
    n = sys.n
    forces = np.zeros((n, 3))
    pressure = np.zeros((3, 3))
    if neighbors.n_pairs == 0:
        return ShortRangeResult(0.0, forces, pressure, 0)

    i, j = neighbors.i, neighbors.j
    dr = minimum_image(sys.cell, sys.positions[i] - sys.positions[j])
    r2 = np.einsum("ij,ij->i", dr, dr)
    r = np.sqrt(r2)
    if np.any(r < 1e-12 * kern.r_c):
        bad = int(np.argmin(r))
        raise SingularPairError(
            f"coincident particles {i[bad]} and {j[bad]} (r={r[bad]:.3e})")

    within = r <= kern.r_c
    i, j, dr, r = i[within], j[within], dr[within], r[within]
    qq = sys.charges[i] * sys.charges[j]

    if table is not None:
        nvals = table.near_field(r)
        fvals = table.fn_weight(r)
    else:
        nvals = near_field(kern, r)
        fvals = fn_weight(kern, r)

    energy = float(np.sum(qq * nvals))
    fmag = qq * fvals / r**3
    pair_force = fmag[:, None] * dr
    np.add.at(forces, i, pair_force)
    np.add.at(forces, j, -pair_force)
    pressure = (dr.T * fmag) @ dr / sys.cell.volume
    pressure = 0.5 * (pressure + pressure.T)  # exact symmetry against roundoff
    return ShortRangeResult(energy=energy, forces=forces, pressure=pressure,
                            pair_count=int(r.size))
