# sphereview/models/enums.py

from enum import Enum


class Interpolation(str, Enum):
    NEAREST = "nearest"
    BILINEAR = "bilinear"


class BranchKind(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    ZOOM = "zoom"


class ThresholdPolicy(str, Enum):
    ADAPTIVE = "adaptive"
    FIXED = "fixed"


class Subset(str, Enum):
    ALL = "all"
    EDGE_DISC = "edge_disc"
    CONTINUOUS = "continuous"
