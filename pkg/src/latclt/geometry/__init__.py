"""Counting regions: product domains, volumes and angular targets."""

from latclt.geometry.angular import (
    AngularFactor,
    AngularTarget,
    ArcFactor,
    CapFactor,
    FullFactor,
    SignFactor,
    angular_volume,
    parse_target,
    serialize_target,
)
from latclt.geometry.domains import (
    BlockSystem,
    DomainError,
    ProductDomain,
    QuadratureError,
    UndefinedDirectionError,
    VolumeEstimate,
    angular_coords,
    contains,
    domain_mask,
    domain_volume,
    product_value,
    product_values,
    unit_ball_volume,
    volume_monte_carlo,
    volume_quadrature,
)

__all__ = [
    # Domains
    "BlockSystem",
    "ProductDomain",
    "DomainError",
    "UndefinedDirectionError",
    "QuadratureError",
    "VolumeEstimate",
    "angular_coords",
    "contains",
    "domain_mask",
    "domain_volume",
    "product_value",
    "product_values",
    "unit_ball_volume",
    "volume_monte_carlo",
    "volume_quadrature",
    # Angular targets
    "AngularFactor",
    "AngularTarget",
    "FullFactor",
    "SignFactor",
    "ArcFactor",
    "CapFactor",
    "angular_volume",
    "parse_target",
    "serialize_target",
]
