"""Mean curvature of unit vector fields as submanifolds of the unit tangent bundle."""

__version__ = "0.1.0"
