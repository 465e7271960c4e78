"""Spatial stencils in flux (divergence) form on the Neumann grid.

Every operator here is built from face fluxes that vanish on the domain
walls, so the discrete integral of any divergence output telescopes to
zero and mass conservation is structural rather than incidental.

Layout conventions: cell arrays are (ny, nx); x-face arrays are
(ny, nx+1) with columns 0 and nx on the walls; y-face arrays are
(ny+1, nx) likewise. Mirror ghost cells make every wall-normal
difference zero, which is why wall fluxes are simply zero.
"""

from __future__ import annotations

import numpy as np

from .grid import Field, GridSpec


class StencilWorkspace:
    """Preallocated face and cell scratch arrays for one grid.

    The time loop reuses one workspace to keep the hot path free of
    repeated large allocations. Not safe for concurrent use; parallel
    runs need one workspace each.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        ny, nx = grid.shape
        self.fx = np.zeros((ny, nx + 1))
        self.fy = np.zeros((ny + 1, nx))
        self.qx = np.zeros((ny, nx + 1))
        self.qy = np.zeros((ny + 1, nx))
        self.cell_a = np.zeros((ny, nx))
        self.cell_b = np.zeros((ny, nx))


def laplacian_arrays(f: np.ndarray, dx: float, dy: float, ws: StencilWorkspace,
                     out: np.ndarray) -> np.ndarray:
    """5-point Neumann Laplacian via face differences; writes into out."""
    fx, fy = ws.fx, ws.fy
    np.subtract(f[:, 1:], f[:, :-1], out=fx[:, 1:-1])
    np.subtract(f[1:, :], f[:-1, :], out=fy[1:-1, :])
    # wall columns/rows of fx, fy stay zero (mirror ghosts)
    np.subtract(fx[:, 1:], fx[:, :-1], out=out)
    out *= 1.0 / (dx * dx)
    np.subtract(fy[1:, :], fy[:-1, :], out=ws.cell_a)
    ws.cell_a *= 1.0 / (dy * dy)
    out += ws.cell_a
    return out


def laplacian(field: Field, ws: StencilWorkspace | None = None) -> Field:
    """Field-level Neumann Laplacian; integral of the result is zero."""
    g = field.grid
    ws = ws or StencilWorkspace(g)
    out = np.empty(g.shape)
    laplacian_arrays(field.values, g.dx, g.dy, ws, out)
    return Field(out, g)


def _face_average_x(c: np.ndarray, out: np.ndarray) -> None:
    """Arithmetic average of cell values onto interior x-faces."""
    np.add(c[:, 1:], c[:, :-1], out=out[:, 1:-1])
    out[:, 1:-1] *= 0.5
    out[:, 0] = 0.0
    out[:, -1] = 0.0


def _face_average_y(c: np.ndarray, out: np.ndarray) -> None:
    np.add(c[1:, :], c[:-1, :], out=out[1:-1, :])
    out[1:-1, :] *= 0.5
    out[0, :] = 0.0
    out[-1, :] = 0.0


def taxis_velocities(coeff: np.ndarray, signal: np.ndarray, dx: float, dy: float,
                     qx: np.ndarray, qy: np.ndarray, ws: StencilWorkspace) -> float:
    """Face velocities q = coeff_face * (signal difference)/h; returns max |q|.

    coeff is averaged arithmetically onto faces; wall faces carry zero
    velocity (no-flux).
    """
    np.subtract(signal[:, 1:], signal[:, :-1], out=qx[:, 1:-1])
    qx[:, 1:-1] *= 1.0 / dx
    _face_average_x(coeff, ws.fx)
    qx[:, 1:-1] *= ws.fx[:, 1:-1]
    qx[:, 0] = 0.0
    qx[:, -1] = 0.0

    np.subtract(signal[1:, :], signal[:-1, :], out=qy[1:-1, :])
    qy[1:-1, :] *= 1.0 / dy
    _face_average_y(coeff, ws.fy)
    qy[1:-1, :] *= ws.fy[1:-1, :]
    qy[0, :] = 0.0
    qy[-1, :] = 0.0
    return max(float(np.max(np.abs(qx))), float(np.max(np.abs(qy))))


def upwind_divergence_arrays(c: np.ndarray, qx: np.ndarray, qy: np.ndarray,
                             dx: float, dy: float, ws: StencilWorkspace,
                             out: np.ndarray, accumulate: bool = False) -> np.ndarray:
    """div(c * q) with c taken from the upwind side of each face.

    Split-flux form F = max(q,0)*c_left + min(q,0)*c_right: exact upwind
    selection, and a zero-velocity face carries exactly zero flux (which
    is what the tie-averaging convention evaluates to anyway).
    """
    fx, fy = ws.fx, ws.fy
    q = qx[:, 1:-1]
    np.multiply(np.maximum(q, 0.0), c[:, :-1], out=fx[:, 1:-1])
    fx[:, 1:-1] += np.minimum(q, 0.0) * c[:, 1:]
    fx[:, 0] = 0.0
    fx[:, -1] = 0.0

    q = qy[1:-1, :]
    np.multiply(np.maximum(q, 0.0), c[:-1, :], out=fy[1:-1, :])
    fy[1:-1, :] += np.minimum(q, 0.0) * c[1:, :]
    fy[0, :] = 0.0
    fy[-1, :] = 0.0

    if accumulate:
        np.subtract(fx[:, 1:], fx[:, :-1], out=ws.cell_b)
        ws.cell_b *= 1.0 / dx
        out += ws.cell_b
    else:
        np.subtract(fx[:, 1:], fx[:, :-1], out=out)
        out *= 1.0 / dx
    np.subtract(fy[1:, :], fy[:-1, :], out=ws.cell_b)
    ws.cell_b *= 1.0 / dy
    out += ws.cell_b
    return out


def taxis_divergence(density: Field, coeff: Field | float, signal: Field,
                     ws: StencilWorkspace | None = None) -> Field:
    """Conservative upwind discretization of div(density * coeff * grad signal).

    Operator-level entry point; the time integrator calls the array
    kernels directly to reuse velocities across the CFL check.
    """
    g = density.grid
    ws = ws or StencilWorkspace(g)
    coeff_arr = coeff.values if isinstance(coeff, Field) else np.full(g.shape, float(coeff))
    taxis_velocities(coeff_arr, signal.values, g.dx, g.dy, ws.qx, ws.qy, ws)
    out = np.empty(g.shape)
    upwind_divergence_arrays(density.values, ws.qx, ws.qy, g.dx, g.dy, ws, out)
    return Field(out, g)


def diffusion_matvec_arrays(f: np.ndarray, diffusivity: float, dt: float,
                            dx: float, dy: float, ws: StencilWorkspace,
                            out: np.ndarray) -> np.ndarray:
    """(I - dt*D*Lap) f, the backward-Euler diffusion operator, into out."""
    laplacian_arrays(f, dx, dy, ws, out)
    out *= -dt * diffusivity
    out += f
    return out


def nonneg_diffusion_matvec(field: Field, diffusivity: float, dt: float,
                            ws: StencilWorkspace | None = None) -> Field:
    """Field-level (I - dt*D*Lap).

    With constant isotropic diffusivity the 5-point Neumann stencil has
    nonpositive off-diagonal entries and strictly dominant positive
    diagonal, i.e. the operator is an M-matrix: inverting it (the
    implicit solve) maps nonnegative data to nonnegative data. This is
    the isotropic reduction of the anisotropy-capable nonnegative
    discretizations; the general tensor case is out of scope.
    """
    g = field.grid
    ws = ws or StencilWorkspace(g)
    out = np.empty(g.shape)
    diffusion_matvec_arrays(field.values, diffusivity, dt, g.dx, g.dy, ws, out)
    return Field(out, g)


def weighted_diffusion_matvec_arrays(f: np.ndarray, cell_weight: np.ndarray,
                                     face_wx: np.ndarray, face_wy: np.ndarray,
                                     dt: float, dx: float, dy: float,
                                     ws: StencilWorkspace, out: np.ndarray) -> np.ndarray:
    """(diag(cell_weight) - dt * div(face_weight * grad)) f, into out.

    Symmetric positive definite for positive weights; used by the
    transformed-variable step where the weights are exp(Xi).
    """
    fx, fy = ws.fx, ws.fy
    np.subtract(f[:, 1:], f[:, :-1], out=fx[:, 1:-1])
    fx[:, 1:-1] *= face_wx[:, 1:-1]
    fx[:, 0] = 0.0
    fx[:, -1] = 0.0
    np.subtract(f[1:, :], f[:-1, :], out=fy[1:-1, :])
    fy[1:-1, :] *= face_wy[1:-1, :]
    fy[0, :] = 0.0
    fy[-1, :] = 0.0

    np.subtract(fx[:, 1:], fx[:, :-1], out=out)
    out *= -dt / (dx * dx)
    np.subtract(fy[1:, :], fy[:-1, :], out=ws.cell_a)
    ws.cell_a *= -dt / (dy * dy)
    out += ws.cell_a
    out += cell_weight * f
    return out


def weighted_diffusion_diagonal(cell_weight: np.ndarray, face_wx: np.ndarray,
                                face_wy: np.ndarray, dt: float, dx: float,
                                dy: float) -> np.ndarray:
    """Diagonal of the weighted implicit operator, for Jacobi preconditioning."""
    diag = cell_weight.copy()
    diag += (dt / (dx * dx)) * (face_wx[:, 1:] + face_wx[:, :-1])
    diag += (dt / (dy * dy)) * (face_wy[1:, :] + face_wy[:-1, :])
    return diag


def neumann_mode(k: int, n: int) -> np.ndarray:
    """cos(k*pi*(i+1/2)/n), i = 0..n-1: an exact discrete Neumann eigenmode.

    The mirror ghost extension of this vector coincides with the cosine's
    own even extension, so the 5-point stencil sees an exact eigenvector
    including the wall rows.
    """
    return np.cos(k * np.pi * (np.arange(n) + 0.5) / n)


def neumann_eigenvalue(k: int, n: int, dx: float) -> float:
    """Discrete eigenvalue: Lap(mode) = -mu * mode, mu = 2(1-cos(k*pi/n))/dx^2.

    Equivalently (2/dx^2)(1 - cos(k*pi*dx/L)) with L = n*dx.
    """
    return 2.0 * (1.0 - np.cos(k * np.pi / n)) / (dx * dx)
