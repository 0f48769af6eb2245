from .quadplane import QuadplaneParams, quadplane_as_system
from .quadrotor import quadrotor_system

__all__ = ["QuadplaneParams", "quadplane_as_system", "quadrotor_system"]
