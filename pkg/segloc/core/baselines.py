"""
SegLoc Project - Baselines
Weighted-centroid localization (WCL) and its modified and genius-aided variants.
"""

import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np

from .propagation import MeasurementSet, to_linear_watts

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WclConfig:
    """Weights are linear-scale RSS raised to ``weight_exponent``."""

    weight_exponent: float = 1.0
    los_only: bool = False

    def __post_init__(self):
        if not self.weight_exponent > 0.0:
            raise ValueError(
                f"weight_exponent must be positive, got {self.weight_exponent}"
            )


WCL_METHODS: Dict[str, WclConfig] = {
    "wcl": WclConfig(weight_exponent=1.0),
    "wcl-mod": WclConfig(weight_exponent=0.6),
    "wcl-genius": WclConfig(weight_exponent=1.0, los_only=True),
}


def wcl(measurements: MeasurementSet, config: WclConfig = WclConfig()) -> np.ndarray:
    """
    Weighted centroid of the horizontal measurement positions.

    Args:
        measurements: Measurement set; the genius-aided variant needs LOS labels
        config: Weight exponent and LOS filtering

    Returns:
        Estimate ``(x, y, 0)``
    """
    positions = measurements.positions
    rss = measurements.rss_db

    if config.los_only:
        los = measurements.truth_los
        if los is None:
            raise ValueError("Genius-aided WCL needs ground-truth LOS labels")
        positions, rss = positions[los], rss[los]

    if len(rss) == 0:
        raise ValueError("WCL needs at least one qualifying measurement")

    # w = (10^(rss/10))^p, scaled by the strongest sample to stay representable
    weights = to_linear_watts(config.weight_exponent * (rss - rss.max()))
    centroid = weights @ positions[:, :2] / weights.sum()
    return np.array([centroid[0], centroid[1], 0.0])
