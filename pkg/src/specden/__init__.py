"""Spectral density laboratory for the renormalized magnetic Laplacian."""

__version__ = "0.1.0"

from .fields import ChartField, ScalarField, chart_from_dict, chart_from_json
from .frame import DiagonalFrame, QCoeffs, build_frame, q_coefficients
from .geometry import (GeometryJet, PointEndos, christoffel, covariant_jet,
                       endos_at, mu0_estimate, riemann, riemann_lowered)

from .oracle import OracleBreakdown, rho_oracle
from .rho import (RhoBreakdown, rho_almost_kahler, rho_closed,
                  rho_kahler_case, rho_polar)
from .torus import ClusterReport, TorusConfig, density_compare, flux_field

__all__ = [
    "ChartField", "ScalarField", "chart_from_dict", "chart_from_json",
    "DiagonalFrame", "QCoeffs", "build_frame", "q_coefficients",
    "GeometryJet", "PointEndos", "christoffel", "covariant_jet",
    "endos_at", "mu0_estimate", "riemann", "riemann_lowered",
    "RhoBreakdown", "rho_closed", "rho_polar", "rho_almost_kahler",
    "rho_kahler_case", "OracleBreakdown", "rho_oracle",
    "TorusConfig", "ClusterReport", "density_compare", "flux_field",
]
