"""Desk-scale numerical certificates for optimal L2-extension on tube domains,
the minimal extension property, and convexity of Prekopa marginals."""

from .bergman import ExtensionCertificate, gram_matrix, kernel_diag, min_extension
from .marginal import (ConvexityReport, MarginalGrid, convexity_check, marginal_at,
                       marginal_grid, marginal_lift, prekopa_suite)
from .mep import mean_value_check, mep_check, mep_sweep, tube_certificate
from .quadrature import DiskRule, disk_rule, integrate_box, integrate_disk, integrate_exhausted
from .smoothing import constants_audit, convolve, make_bump, unit_ball_volume, young_bound_check
from .weights import (DomainSpec, PlanarWeight, WeightSpec, catalog, constant_weight, from_kv,
                      lift_eval, lookup, planar_weight, quadratic, real_part_weight, to_kv)

__version__ = "0.1.0"
