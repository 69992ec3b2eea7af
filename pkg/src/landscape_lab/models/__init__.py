"""Problem families that produce (distribution, kernel) pairs."""

from .benchmark import BenchmarkClassSpec, benchmark_counts, benchmark_distribution, benchmark_space
from .lipschitz import LipschitzSpaceSpec, lipschitz_kernel, lipschitz_space, toy_space, uniform_distribution
from .sat2 import Sat2ClassSpec, sat2_distribution, sat2_kernel, sat2_transition_exact
from .tsp import TspInstance, TspLandscape, read_instance, tsp_enumerate, tsp_generate, tsp_sample, write_instance

__all__ = [
    "BenchmarkClassSpec",
    "LipschitzSpaceSpec",
    "Sat2ClassSpec",
    "TspInstance",
    "TspLandscape",
    "benchmark_counts",
    "benchmark_distribution",
    "benchmark_space",
    "lipschitz_kernel",
    "lipschitz_space",
    "read_instance",
    "sat2_distribution",
    "sat2_kernel",
    "sat2_transition_exact",
    "toy_space",
    "tsp_enumerate",
    "tsp_generate",
    "tsp_sample",
    "uniform_distribution",
    "write_instance",
]
