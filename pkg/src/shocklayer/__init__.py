"""Inverse blunt-body solutions: flow field and body shape from a prescribed bow shock."""
from .errors import (DegenerateInput, InvalidShape, NegativeRadicand, NoOverlap,
                     NonConvergence, OutOfDomain, OutOfHull, ParseError, ShockLayerError,
                     ValidationError, WeakShock)
from .gas import (AXISYMMETRIC, PLANE, FreestreamConditions, PostShockState,
                  inverse_compression_ratio, pitot_pressure, post_shock_state)
from .geometry import (MoeckelShock, PolyShock, ShockShape, ShockStation, SplineShock,
                       fit_spline_shock, load_spline_shock, locate_S, sample_stations)
from .optimize import (BodyError, OptimizationResult, body_error, optimize_family,
                       optimize_poly, optimize_shape, optimize_z0)
from .reference import (ReferenceField, interpolate, load_reference, max_density_error,
                        surface_pressure_error)
from .solver import (BodyPoint, LayerSample, StationSolution, body_shape, density_at,
                     integrated_surface_pressure, pressure_at, solve_field, solve_station,
                     u_at, y_profile)

__version__ = "0.1.0"
