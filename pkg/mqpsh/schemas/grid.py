from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from mqpsh.models.grid import BoxGrid


class GridSpec(BaseModel):
    """
    Box grid description, used both in scenario files and as the `.grid.json`
    sidecar next to every field CSV.

    Either give lo/hi/counts per real axis, or the cube shorthand
    half_width/count (optionally around `center`).
    """

    model_config = ConfigDict(extra="forbid")

    dim_complex: int = Field(ge=1)
    lo: Optional[list[float]] = None
    hi: Optional[list[float]] = None
    counts: Optional[list[int]] = None
    half_width: Optional[float] = Field(None, gt=0)
    count: Optional[int] = Field(None, ge=2)
    center: Optional[list[float]] = None

    @model_validator(mode="after")
    def _one_form(self):
        explicit = self.lo is not None or self.hi is not None or self.counts is not None
        cube = self.half_width is not None or self.count is not None
        if explicit == cube:
            raise ValueError("give either lo/hi/counts or half_width/count")
        if explicit and None in (self.lo, self.hi, self.counts):
            raise ValueError("lo, hi and counts must be given together")
        if cube and None in (self.half_width, self.count):
            raise ValueError("half_width and count must be given together")
        return self

    def to_grid(self) -> BoxGrid:
        if self.half_width is not None:
            return BoxGrid.cube(self.dim_complex, self.half_width, self.count, self.center)
        return BoxGrid(self.dim_complex, tuple(self.lo), tuple(self.hi), tuple(self.counts))

    @classmethod
    def from_grid(cls, grid: BoxGrid) -> "GridSpec":
        return cls(dim_complex=grid.dim_complex, lo=list(grid.lo), hi=list(grid.hi), counts=list(grid.counts))


class FieldSidecar(BaseModel):
    """Contents of `<field>.grid.json`."""

    grid: GridSpec
    upper_bound: Optional[float] = None
    approximate: bool = False
