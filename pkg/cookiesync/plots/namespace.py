from .plots_sar import plot_response_timeline, plot_workload
from .plots_trends import plot_trend

__all__ = ['plot_trend', 'plot_response_timeline', 'plot_workload']
