"""FFT particle-mesh pipeline for the long-range (far-field) contribution.

The pipeline is: spread charges through a separable prolate window onto a
uniform mesh, take one forward FFT, apply diagonal (mode-by-mode) scaling,
and either reduce over modes (energy, global pressure: no inverse transform)
or inverse-transform and gather (forces, per-particle pressure).

Conventions.  Continuum Fourier pair on the periodic cell:
f_hat(k) = int f(r) exp(-i k r) dr,  f(r) = (1/V) sum_k f_hat(k) exp(i k r).
Grid arrays relate by f_hat(k_m) = h_x h_y h_z * fftn(f)[m] (trapezoidal,
exact for band-limited fields up to aliasing).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernel import SplitKernel, ZeroModeError
from .pswf import PswfBasis, WindowTable, build_pswf, solve_bandwidth, tabulate_window
from .system import Cell, ParticleSystem


class PlanningError(Exception):
    """A grid invariant cannot be satisfied; the message names it."""


class MeshError(Exception):
    pass


class TransformProvider:
    """Pluggable 3D periodic FFT contract with call counters.

    ``forward`` maps a real-space array to (unnormalized) DFT coefficients;
    ``inverse`` is its exact inverse.  Counters make transform economy
    claims testable.
    """

    def __init__(self):
        self.forward_count = 0
        self.inverse_count = 0

    def forward(self, values: np.ndarray) -> np.ndarray:
        self.forward_count += 1
        return np.fft.fftn(values)

    def inverse(self, values: np.ndarray) -> np.ndarray:
        self.inverse_count += 1
        return np.fft.ifftn(values)

    def reset(self):
        self.forward_count = 0
        self.inverse_count = 0


@dataclass(frozen=True)
class GridSpec:
    """Mesh geometry plus the spreading window for one orthorhombic cell."""

    M: tuple
    spacing: tuple
    P: int
    omega: tuple
    spread_basis: PswfBasis
    window: WindowTable
    delta_spread: float
    oversampling: float
    lengths: tuple

    @property
    def n_grid(self) -> int:
        return int(np.prod(self.M))

    @property
    def cell_volume_element(self) -> float:
        return float(np.prod(self.spacing))


def plan_grid(cell: Cell, kern: SplitKernel, delta_spread: float, P: int,
              oversampling: float = 1.0,
              spread_basis: PswfBasis | None = None,
              fixed_M: tuple | None = None,
              window: WindowTable | None = None) -> GridSpec:
    """Choose mesh sizes and build the spreading window.

    M_d is the smallest even integer >= oversampling * kmax * L_d / pi,
    unless ``fixed_M`` pins the counts (barostat replanning keeps the grid
    fixed between replans).  Raises PlanningError naming the violated
    invariant if the window band, Nyquist, or support constraints cannot
    hold.
    """
    if not cell.is_orthorhombic:
        raise PlanningError("mesh pipeline requires an orthorhombic cell")
    if oversampling < 1.0:
        raise PlanningError("oversampling factor must be >= 1")
    if P < 2:
        raise PlanningError("spreading order P must be >= 2")

    lengths = np.diag(cell.h)
    kmax = kern.kmax
    if fixed_M is not None:
        M = np.asarray(fixed_M, dtype=int)
    else:
        M = np.ceil(oversampling * kmax * lengths / np.pi).astype(int)
        M += M % 2
        M = np.maximum(M, 2)
    spacing = lengths / M
    omega = P * spacing / 2.0

    if spread_basis is None:
        c_spread = solve_bandwidth(delta_spread)
        spread_basis = build_pswf(c_spread)
    c_spread = spread_basis.c

    for d in range(3):
        if np.pi / spacing[d] < kmax * (1.0 - 1e-12):
            raise PlanningError(
                f"Nyquist coverage violated in dimension {d}: "
                f"pi/h={np.pi / spacing[d]:.4g} < kmax={kmax:.4g}")
        if c_spread / omega[d] < kmax * (1.0 - 1e-12):
            raise PlanningError(
                f"window band coverage violated in dimension {d}: "
                f"c_spread/omega={c_spread / omega[d]:.4g} < kmax={kmax:.4g}; "
                f"decrease P or delta_spread, or increase oversampling")
        if 2.0 * omega[d] >= lengths[d]:
            raise PlanningError(
                f"window support 2*omega={2 * omega[d]:.4g} not below box "
                f"length {lengths[d]:.4g} in dimension {d}")

    if window is None:
        window = tabulate_window(spread_basis, P)
    elif window.P != P or window.basis_c != spread_basis.c:
        raise PlanningError("supplied window table does not match P and basis")
    return GridSpec(M=tuple(int(m) for m in M),
                    spacing=tuple(float(s) for s in spacing),
                    P=int(P), omega=tuple(float(w) for w in omega),
                    spread_basis=spread_basis, window=window,
                    delta_spread=float(delta_spread),
                    oversampling=float(oversampling),
                    lengths=tuple(float(x) for x in lengths))


@dataclass
class GridField:
    """Scalar field on the periodic mesh, in real or Fourier space."""

    values: np.ndarray
    spec: GridSpec
    space: str = "real"


def _stencil(positions_d: np.ndarray, M: int, h: float, P: int):
    """Per-dimension stencil indices and grid-unit offsets.

    Nearest grid point anchors an odd-P stencil; the midpoint of the two
    nearest grid points anchors an even-P stencil.
    """
    u = positions_d / h
    if P % 2 == 1:
        # Stencil centered on the nearest grid point.
        base = np.round(u)
        p = np.arange(-(P // 2), P // 2 + 1)
    else:
        # Stencil centered on the midpoint of the two nearest grid points.
        base = np.floor(u)
        p = np.arange(-(P // 2 - 1), P // 2 + 1)
    nodes = base[:, None] + p[None, :]
    idx = np.mod(nodes.astype(np.int64), M)
    t = u[:, None] - nodes
    return idx, t


def _window_weights(sys: ParticleSystem, spec: GridSpec, derivative_dim: int = -1):
    """Stencil indices and separable window weights for every particle.

    With ``derivative_dim`` >= 0 the weight along that dimension is the
    window derivative with respect to the physical coordinate.
    """
    idx, wgt = [], []
    for d in range(3):
        i_d, t_d = _stencil(sys.positions[:, d], spec.M[d], spec.spacing[d], spec.P)
        if d == derivative_dim:
            w_d = spec.window(t_d, derivative=1) / spec.spacing[d]
        else:
            w_d = spec.window(t_d)
        idx.append(i_d)
        wgt.append(w_d)
    return idx, wgt


def _flat_indices(idx, M) -> np.ndarray:
    ix, iy, iz = idx
    return ((ix[:, :, None, None] * M[1] + iy[:, None, :, None]) * M[2]
            + iz[:, None, None, :])


def _combined_weights(wgt) -> np.ndarray:
    wx, wy, wz = wgt
    return wx[:, :, None, None] * wy[:, None, :, None] * wz[:, None, None, :]


def spread_charges(sys: ParticleSystem, spec: GridSpec) -> GridField:
    """Deposit q_j W(r_g - r_j) on the mesh, periodized across boundaries."""
    idx, wgt = _window_weights(sys, spec)
    flat = _flat_indices(idx, spec.M).reshape(sys.n, -1)
    w = _combined_weights(wgt).reshape(sys.n, -1) * sys.charges[:, None]
    rho = np.bincount(flat.ravel(), weights=w.ravel(), minlength=spec.n_grid)
    return GridField(values=rho.reshape(spec.M), spec=spec, space="real")


def _gather(field_values: np.ndarray, sys: ParticleSystem, spec: GridSpec,
            derivative_dim: int = -1) -> np.ndarray:
    idx, wgt = _window_weights(sys, spec, derivative_dim)
    flat = _flat_indices(idx, spec.M).reshape(sys.n, -1)
    w = _combined_weights(wgt).reshape(sys.n, -1)
    return np.einsum("np,np->n", field_values.reshape(-1)[flat], w)


def forward_density(sys: ParticleSystem, spec: GridSpec,
                    provider: TransformProvider) -> GridField:
    """Spread and forward-transform; values carry continuum normalization."""
    rho = spread_charges(sys, spec)
    rho_hat = provider.forward(rho.values) * spec.cell_volume_element
    return GridField(values=rho_hat, spec=spec, space="fourier")


class ModeWorkspace:
    """Per-(spec, cell) mode arrays: wavevectors, kernel, window deconvolution.

    Modes outside |k| <= kmax are zeroed; the k = 0 mode is always excluded.
    A guard rejects retained modes where the window transform underflows,
    which indicates a planning failure rather than a numerical accident.
    """

    def __init__(self, spec: GridSpec, kern: SplitKernel, cell: Cell):
        if not cell.is_orthorhombic:
            raise PlanningError("mesh pipeline requires an orthorhombic cell")
        lengths = np.diag(cell.h)
        self.volume = cell.volume
        ks = [2.0 * np.pi * np.fft.fftfreq(spec.M[d], d=1.0 / spec.M[d]) / lengths[d]
              for d in range(3)]
        kx = ks[0][:, None, None]
        ky = ks[1][None, :, None]
        kz = ks[2][None, None, :]
        k2 = kx**2 + ky**2 + kz**2
        kmag = np.sqrt(k2)
        mask = (kmag <= kern.kmax) & (k2 > 0.0)
        self.mask = mask
        self.kvec = [np.broadcast_to(kx, spec.M)[mask],
                     np.broadcast_to(ky, spec.M)[mask],
                     np.broadcast_to(kz, spec.M)[mask]]
        self.k2 = k2[mask]
        kmag = kmag[mask]

        sb = spec.spread_basis
        what = np.ones_like(kmag)
        for d in range(3):
            arg = spec.omega[d] * self.kvec[d] / sb.c
            what *= spec.omega[d] * sb.lambda0 * sb.psi_series(np.clip(arg, -1, 1))
        w0 = float(np.prod([w * sb.lambda0 * sb.psi0_at_zero for w in spec.omega]))
        if np.any(np.abs(what) < 1e-13 * abs(w0)):
            raise PlanningError(
                "window transform underflow on a retained mode; the plan does "
                "not cover the kernel band")
        self.w_inv2 = 1.0 / (what * what)

        b = kern.basis
        x = np.clip(kmag * kern.r_c / b.c, 0.0, 1.0)
        pref = 2.0 * np.pi * b.lambda0 / b.C0
        self.fhat = pref * b.psi_series(x) / self.k2
        # Scalar pieces of the pressure kernel: fhat * (delta_ab - 2 ka kb / k2)
        # + dterm * ka kb, with dterm = pref * x * psi'(x) / k2^2.
        self.dterm = pref * x * b.psi_series(x, derivative=1) / self.k2**2

    def pressure_kernel_component(self, a: int, b: int) -> np.ndarray:
        kk = self.kvec[a] * self.kvec[b]
        out = self.dterm * kk - 2.0 * self.fhat * kk / self.k2
        if a == b:
            out = out + self.fhat
        return out


def long_range_energy(rho_hat: GridField, kern: SplitKernel, spec: GridSpec,
                      cell: Cell, modes: ModeWorkspace | None = None) -> float:
    """U_F = (1/2V) sum_{k != 0} Fhat(k) What(k)^-2 |rho_hat(k)|^2."""
    if rho_hat.space != "fourier":
        raise MeshError("long_range_energy expects a spectral density")
    m = modes or ModeWorkspace(spec, kern, cell)
    amp2 = np.abs(rho_hat.values[m.mask]) ** 2
    return float(np.sum(m.fhat * m.w_inv2 * amp2) / (2.0 * m.volume))


def long_range_pressure(rho_hat: GridField, kern: SplitKernel, spec: GridSpec,
                        cell: Cell, modes: ModeWorkspace | None = None) -> np.ndarray:
    """Global far-field pressure tensor by diagonal scaling and reduction.

    No inverse transform: one forward FFT (already performed to obtain
    rho_hat) suffices.
    """
    if rho_hat.space != "fourier":
        raise MeshError("long_range_pressure expects a spectral density")
    m = modes or ModeWorkspace(spec, kern, cell)
    amp2 = np.abs(rho_hat.values[m.mask]) ** 2
    scaled = m.w_inv2 * amp2 / (2.0 * m.volume**2)
    out = np.empty((3, 3))
    for a in range(3):
        for b in range(a, 3):
            val = float(np.sum(m.pressure_kernel_component(a, b) * scaled))
            out[a, b] = out[b, a] = val
    return out


def long_range_forces(rho_hat: GridField, sys: ParticleSystem, kern: SplitKernel,
                      spec: GridSpec, cell: Cell, mode: str = "ik",
                      provider: TransformProvider | None = None,
                      modes: ModeWorkspace | None = None) -> np.ndarray:
    """Far-field forces by spectral differentiation and window gathering.

    ``ik``: three inverse transforms of i k_d Fhat What^-2 rho_hat, gathered
    with the window (momentum-conserving).  ``analytic``: one inverse
    transform of Fhat What^-2 rho_hat, gathered with the window gradient
    (energy-conserving for small steps).
    """
    if rho_hat.space != "fourier":
        raise MeshError("long_range_forces expects a spectral density")
    if mode not in ("ik", "analytic"):
        raise MeshError(f"unknown differentiation mode {mode!r}")
    provider = provider or TransformProvider()
    m = modes or ModeWorkspace(spec, kern, cell)
    h3 = spec.cell_volume_element
    scale = m.fhat * m.w_inv2 * rho_hat.values[m.mask]

    forces = np.empty((sys.n, 3))
    if mode == "ik":
        for d in range(3):
            spec_arr = np.zeros(spec.M, dtype=complex)
            spec_arr[m.mask] = 1j * m.kvec[d] * scale
            # Real-space field with the 1/V inverse-transform convention.
            fld = provider.inverse(spec_arr).real / h3
            forces[:, d] = -sys.charges * h3 * _gather(fld, sys, spec)
    else:
        spec_arr = np.zeros(spec.M, dtype=complex)
        spec_arr[m.mask] = scale
        fld = provider.inverse(spec_arr).real / h3
        for d in range(3):
            forces[:, d] = -sys.charges * h3 * _gather(fld, sys, spec,
                                                       derivative_dim=d)
    return forces


def local_pressure(rho_hat: GridField, sys: ParticleSystem, kern: SplitKernel,
                   spec: GridSpec, cell: Cell,
                   provider: TransformProvider | None = None,
                   modes: ModeWorkspace | None = None) -> np.ndarray:
    """Per-particle far-field pressure tensors (N x 3 x 3).

    Six inverse transforms (one per independent tensor component) followed
    by a trapezoidal window gather; the sum over particles reproduces the
    global far-field pressure up to gather aliasing.
    """
    if rho_hat.space != "fourier":
        raise MeshError("local_pressure expects a spectral density")
    provider = provider or TransformProvider()
    m = modes or ModeWorkspace(spec, kern, cell)
    h3 = spec.cell_volume_element
    base = m.w_inv2 * rho_hat.values[m.mask]

    out = np.empty((sys.n, 3, 3))
    for a in range(3):
        for b in range(a, 3):
            spec_arr = np.zeros(spec.M, dtype=complex)
            spec_arr[m.mask] = m.pressure_kernel_component(a, b) * base
            fld = provider.inverse(spec_arr).real / h3
            gathered = _gather(fld, sys, spec)
            comp = sys.charges * h3 * gathered / (2.0 * m.volume)
            out[:, a, b] = out[:, b, a] = comp
    return out
