"""
Rendering components: text tables and Arrhenius plots.
"""

from .arrhenius_plot import ArrheniusPlot
from .tables import SummaryTable

__all__ = ["ArrheniusPlot", "SummaryTable"]
