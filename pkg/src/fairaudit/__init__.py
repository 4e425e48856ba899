"""Reweighing-based bias mitigation audits on tabular data."""
from .data import Dataset, GroupCounts, SyntheticSpec, count_groups, split, synthesize
from .metrics import FairnessReport, full_report
from .oracle import naive_oracle
from .reweighing import FourWeights, apply, compute_weights

__all__ = [
    "Dataset", "GroupCounts", "SyntheticSpec", "count_groups", "split", "synthesize",
    "FairnessReport", "full_report", "naive_oracle",
    "FourWeights", "apply", "compute_weights",
]
__version__ = "0.1.0"
