"""Regions of 2+1 Minkowski space seen from the space of null geodesics.

The package computes, for a region ``K`` with a strongly null convex
boundary, the torus of null geodesics tangent to ``K``, the characteristic
foliation the contact structure induces on it, and the rotation angle of the
return map between its two singular circles, a conformal invariant of ``K``.
"""

__version__ = "0.1.0"

from .boundary import (BoundaryClass, check_strong_null_convexity,
                       classify_boundary_point, lightlike_latitudes,
                       null_tangent_directions, tangency_point)
from .foliation import (Branch, TorusPoint, boundary_torus,
                        chart_foliation_direction, dividing_set, integrate_leaf,
                        singular_set)
from .geometry import (ConformalMap, Event, NullRay, apply_conformal,
                       causal_character, chart_of_geodesic, contact_form_eval,
                       sky)
from .invariants import (CircleMap, CompareVerdict, RotationResult,
                         compare_regions, rotation_angle_quadrature,
                         rotation_angle_traced, rotation_number_of_circle_map)
from .regions import (DiamondRegion, ImplicitRegion, RevolutionRegion,
                      ellipsoid, make_revolution, polynomial, transform)
from .regionspec import load_region, parse_region
