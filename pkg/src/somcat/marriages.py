"""Built-in demonstration dataset: 270 couples cross-classified by the
socio-professional category of each spouse (6 categories per spouse).

The data ship as a 6 x 6 contingency table; ``marriage_dataset`` expands it
to one individual per couple so the full pipeline (disjunctive coding,
corrections, map training) can run on it out of the box.
"""

from __future__ import annotations

import numpy as np

from .dataset import CategoricalDataset, expand_from_contingency

HUSBAND = ("MFARM", "MCRAF", "MMANA", "MINTO", "MCLER", "MWORK")
WIFE = ("FFARM", "FCRAF", "FMANA", "FINTO", "FCLER", "FWORK")

# Rows: husband's category.  Columns: wife's category.
COUNTS = (
    (16, 0, 0, 0, 0, 0),
    (0, 15, 0, 0, 12, 0),
    (0, 0, 13, 15, 12, 0),
    (0, 0, 0, 25, 35, 0),
    (0, 0, 0, 0, 25, 0),
    (0, 0, 0, 10, 60, 32),
)


def marriage_counts() -> np.ndarray:
    return np.array(COUNTS, dtype=np.int64)


def marriage_dataset() -> CategoricalDataset:
    return expand_from_contingency(
        marriage_counts(),
        row_labels=list(HUSBAND),
        col_labels=list(WIFE),
        var_names=("husband", "wife"),
    )
