from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mqpsh.models.grid import BoxGrid, ScalarField


@dataclass(frozen=True, eq=False)
class EnvelopeResult:
    """
    A sup-convolution on a query grid.

    argmax_index holds a source node index per query node, -1 where the
    supremum is not attained (all candidates NEG_INF).
    """

    values: ScalarField
    argmax_index: np.ndarray
    attained: np.ndarray
    proper_interior_mask: np.ndarray
    source_grid: BoxGrid
    engine: str = "bruteforce"

    @property
    def query_grid(self) -> BoxGrid:
        return self.values.grid

    @property
    def proper_interior_count(self) -> int:
        return int(np.count_nonzero(self.proper_interior_mask))

    def deep_mask(self, reach: int) -> np.ndarray:
        """
        Query nodes at least `reach` nodes inside the query box whose maximizer
        is at least `reach` nodes inside the source box.
        """
        query_ok = self.query_grid.margin_mask(reach)
        source_ok = np.zeros(self.argmax_index.shape, dtype=bool)
        hit = self.attained
        if hit.any():
            source_margin = self.source_grid.margin_mask(reach)
            source_ok[hit] = source_margin[self.argmax_index[hit]]
        return self.proper_interior_mask & query_ok & source_ok
