"""Four-coefficient reweighing.

Each (label, group) cell gets the weight ``P(group) * P(label) / P(group, label)``
estimated from row counts, which makes label and group independent under the
weighted distribution while keeping the total mass equal to the row count.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, GroupCounts, count_groups
from .errors import DegenerateGroupError


@dataclass(frozen=True)
class FourWeights:
    w_pp: float
    w_pup: float
    w_np: float
    w_nup: float

    def for_rows(self, labels: np.ndarray, protected: np.ndarray) -> np.ndarray:
        """Coefficient of each row's (label, group) cell."""
        y = np.asarray(labels).astype(bool)
        s = np.asarray(protected).astype(bool)
        return np.where(
            y,
            np.where(s, self.w_pp, self.w_pup),
            np.where(s, self.w_np, self.w_nup),
        )


def compute_weights(counts: GroupCounts) -> FourWeights:
    for cell in ("n_pp", "n_pup", "n_np", "n_nup"):
        if getattr(counts, cell) <= 0:
            raise DegenerateGroupError(cell)
    total = counts.n_total
    # The negative-unprivileged weight divides by n_nup, not n_up: only then do
    # mass preservation and weighted independence hold.
    return FourWeights(
        w_pp=counts.n_p * counts.n_pos / (total * counts.n_pp),
        w_pup=counts.n_up * counts.n_pos / (total * counts.n_pup),
        w_np=counts.n_p * counts.n_neg / (total * counts.n_np),
        w_nup=counts.n_up * counts.n_neg / (total * counts.n_nup),
    )


def apply(ds: Dataset) -> Dataset:
    """Multiply each row's weight by its cell coefficient.

    Coefficients come from unweighted row counts, so applying twice squares
    them rather than leaving the weights unchanged.
    """
    coef = compute_weights(count_groups(ds))
    return ds.with_weights(ds.weights * coef.for_rows(ds.labels, ds.protected))
