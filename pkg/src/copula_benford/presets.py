"""Named marginal pairings and the default dependence sweeps."""

from __future__ import annotations

from .marginals import Exponential, LogMarginal, Normal, ParetoLog

PAIRING_LABELS = ("A", "B", "C")

SWEEP_ALPHAS = {
    "clayton": (-0.5, 0.5, 1.0, 2.0, 5.0),
    "amh": (-0.9, -0.5, 0.0, 0.5, 0.9),
    "gumbel_barnett": (0.1, 0.25, 0.5, 0.75, 1.0),
}


def pairing(label: str, base: int = 10) -> tuple[LogMarginal, LogMarginal]:
    """(A) normal x exponential, (B) pareto x normal, (C) pareto x exponential."""
    label = label.upper()
    if label == "A":
        return Normal(base=base), Exponential(base=base)
    if label == "B":
        return ParetoLog(base=base), Normal(base=base)
    if label == "C":
        return ParetoLog(base=base), Exponential(base=base)
    raise ValueError(f"unknown pairing {label!r}; expected one of {PAIRING_LABELS}")
