"""Cell-centered rectangular grid, scalar fields, and initial data.

The domain is [0, length_x] x [0, length_y], split into nx x ny cells of
size dx x dy. A Field samples one scalar unknown at cell centers and is
stored as a (ny, nx) float64 array, C-order, so the flattened view is
row-major with index j*nx + i.

No-flux (homogeneous Neumann) walls are realized with mirror ghost cells:
the ghost value one cell outside equals the adjacent interior value, which
makes every one-sided normal difference across a wall exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ValidationError

MIN_CELLS = 4


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the uniform cell-centered grid.

    dx and dy are primary (they are what the snapshot format stores);
    the physical extents follow as nx*dx and ny*dy.
    """

    nx: int
    ny: int
    dx: float
    dy: float

    @property
    def length_x(self) -> float:
        return self.nx * self.dx

    @property
    def length_y(self) -> float:
        return self.ny * self.dy

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def cell_centers_x(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    def cell_centers_y(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinates as (ny, nx) arrays (X, Y)."""
        return np.meshgrid(self.cell_centers_x(), self.cell_centers_y())


def make_grid(nx: int, ny: int, length_x: float = 100.0, length_y: float = 100.0) -> GridSpec:
    """Build a GridSpec, rejecting undersized or nonpositive arguments."""
    problems = []
    if int(nx) != nx or int(ny) != ny:
        problems.append("nx and ny must be integers")
    if nx < MIN_CELLS or ny < MIN_CELLS:
        problems.append(f"grid must be at least {MIN_CELLS}x{MIN_CELLS} cells (got {nx}x{ny})")
    if not (length_x > 0 and length_y > 0):
        problems.append("domain lengths must be positive")
    if problems:
        raise ValidationError(problems)
    return GridSpec(nx=int(nx), ny=int(ny), dx=length_x / nx, dy=length_y / ny)


@dataclass
class Field:
    """One scalar unknown at cell centers: (ny, nx) float64 values."""

    values: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValidationError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @classmethod
    def full(cls, grid: GridSpec, value: float) -> "Field":
        return cls(np.full(grid.shape, float(value)), grid)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(np.zeros(grid.shape), grid)

    @classmethod
    def from_flat(cls, flat, grid: GridSpec) -> "Field":
        """Build from a row-major flat vector of length nx*ny."""
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != grid.n_cells:
            raise ValidationError(
                f"flat field has {flat.size} entries, grid needs {grid.n_cells}"
            )
        return cls(flat.reshape(grid.shape).copy(), grid)

    @property
    def flat(self) -> np.ndarray:
        """Row-major view, index j*nx + i."""
        return self.values.reshape(-1)

    def copy(self) -> "Field":
        return Field(self.values.copy(), self.grid)

    def check_finite(self, name: str = "field") -> None:
        if not np.all(np.isfinite(self.values)):
            raise ValidationError(f"{name} contains non-finite values")


def ghost_value(fld: Field, i: int, j: int) -> float:
    """Value at cell (i, j), extended one cell past the walls by mirroring.

    Interior indices return the stored value; indices exactly one cell
    outside return the mirror-reflected interior value (ghost(-1, j) =
    value(0, j) etc.), which encodes the homogeneous Neumann condition.
    Anything further out is rejected.
    """
    nx, ny = fld.grid.nx, fld.grid.ny
    if not (-1 <= i <= nx and -1 <= j <= ny):
        raise IndexError(f"({i}, {j}) is more than one cell outside the {nx}x{ny} grid")
    ii = 0 if i == -1 else nx - 1 if i == nx else i
    jj = 0 if j == -1 else ny - 1 if j == ny else j
    return float(fld.values[jj, ii])


@dataclass(frozen=True)
class FieldIC:
    """Initial-condition recipe for one field.

    kind is one of "uniform" (level), "gaussian" (amplitude, center_x,
    center_y, width) or "file" (path to a whitespace text matrix with ny
    rows and nx columns).
    """

    kind: str
    params: dict = field(default_factory=dict)

    def build(self, grid: GridSpec) -> Field:
        if self.kind == "uniform":
            level = float(self.params["level"])
            if level < 0:
                raise ValidationError("uniform level must be nonnegative")
            return Field.full(grid, level)
        if self.kind == "gaussian":
            amp = float(self.params["amplitude"])
            if amp < 0:
                raise ValidationError("gaussian amplitude must be nonnegative")
            cx = float(self.params.get("center_x", 0.75 * grid.length_x))
            cy = float(self.params.get("center_y", 0.75 * grid.length_y))
            width = float(self.params.get("width", 10.0))
            if width <= 0:
                raise ValidationError("gaussian width must be positive")
            X, Y = grid.meshgrid()
            vals = amp * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2.0 * width**2))
            return Field(vals, grid)
        if self.kind == "file":
            vals = np.loadtxt(self.params["path"], dtype=np.float64, ndmin=2)
            if vals.shape != grid.shape:
                raise ValidationError(
                    f"file IC shape {vals.shape} does not match grid {grid.shape}"
                )
            if np.any(vals < 0):
                raise ValidationError("file IC must be nonnegative")
            return Field(vals, grid)
        raise ValidationError(f"unknown initial-condition kind '{self.kind}'")


# Uniform EC / tissue levels and the localized tumor/VEGF bumps are not
# stated in the source material; these defaults are echoed into the run
# metadata so results stay reproducible.
def default_ics(grid: GridSpec) -> dict[str, FieldIC]:
    bump = {
        "amplitude": 1.0,
        "center_x": 0.75 * grid.length_x,
        "center_y": 0.75 * grid.length_y,
        "width": 10.0,
    }
    return {
        "u": FieldIC("gaussian", dict(bump)),
        "v": FieldIC("uniform", {"level": 0.5}),
        "w": FieldIC("uniform", {"level": 1.0}),
        "z": FieldIC("gaussian", dict(bump)),
    }


@dataclass
class State:
    """The four coupled unknowns at one time level.

    u: tumor cell density, v: endothelial cell density, w: tissue density,
    z: VEGF concentration. All four share one grid.
    """

    u: Field
    v: Field
    w: Field
    z: Field
    t: float = 0.0

    def __post_init__(self):
        g = self.u.grid
        for name in ("v", "w", "z"):
            if getattr(self, name).grid != g:
                raise ValidationError("all four fields must share one grid")

    @property
    def grid(self) -> GridSpec:
        return self.u.grid

    def fields(self) -> dict[str, Field]:
        return {"u": self.u, "v": self.v, "w": self.w, "z": self.z}

    def copy(self) -> "State":
        return State(self.u.copy(), self.v.copy(), self.w.copy(), self.z.copy(), self.t)

    def check_finite(self) -> None:
        for name, fld in self.fields().items():
            fld.check_finite(name)


def build_initial_state(grid: GridSpec, ics: dict[str, FieldIC] | None = None) -> State:
    """Construct the t=0 state from per-field recipes.

    u, v and z must not be identically zero (w may be); all fields must be
    nonnegative. Missing recipes fall back to the defaults.
    """
    recipes = default_ics(grid)
    if ics:
        recipes.update(ics)
    missing = {"u", "v", "w", "z"} - set(recipes)
    if missing:
        raise ValidationError(f"initial condition missing fields: {sorted(missing)}")
    built = {name: recipes[name].build(grid) for name in ("u", "v", "w", "z")}
    problems = []
    for name, fld in built.items():
        if np.any(fld.values < 0):
            problems.append(f"initial {name} has negative values")
    for name in ("u", "v", "z"):
        if not np.any(built[name].values > 0):
            problems.append(f"initial {name} must not be identically zero")
    if problems:
        raise ValidationError(problems)
    return State(built["u"], built["v"], built["w"], built["z"], t=0.0)


def state_like(state: State, **updates) -> State:
    return replace(state, **updates)
