"""Generating-function engine: power series, component series, kernels, exact counts."""
from .components import ComponentSeries, component_series, simple_adjust_V
from .counting import exact_by_excess, exact_count, exact_count_log, exact_total, kernel_series
from .kernels import Kernel, cubic_base_series, cubic_kernel_weight, enumerate_kernels
from .series import PowerSeries, cayley_series, series_pow

__all__ = [
    "ComponentSeries", "Kernel", "PowerSeries", "cayley_series", "component_series",
    "cubic_base_series", "cubic_kernel_weight", "enumerate_kernels", "exact_by_excess",
    "exact_count", "exact_count_log", "exact_total", "kernel_series", "series_pow",
    "simple_adjust_V",
]
