"""Spaces, maps between them, and domains of pairs."""
from .spaces import (EPS_SPACE, Box, Product, Quotient, Space, Sphere, as_point, get_space,
                     product_space, quotient_project, space_distance, space_names)
from .maps import (MapSpec, compose, constant, custom, cylinder_inclusion, cylinder_projection,
                   identity, linear_isometry, map_from_descriptor, quotient_projection,
                   rotation_s1, swap_t2)
from .domains import (FIBER_TOL, Domain, FiberedDomain, FullProduct, RegionDomain,
                      band_domain, base_neighborhood_domain, based_domain, diagonal_domain,
                      fibered_domain_membership, quotient_domain, require_member,
                      sample_fibered_domain)
