"""
SegLoc Project - Map-assisted RSS source localization.

This package provides:
- Building maps, LOS/NLOS occlusion and azimuthal sectorization
- A seeded RSS channel simulator over 2D building maps
- Segmented regression with support-vector angles and grid search localization
- Weighted-centroid baselines and a Monte-Carlo RMSE benchmark harness
"""

__version__ = "1.0.0"
__author__ = "SegLoc Team"
__description__ = "Segmented-regression source localization with 2D maps"
