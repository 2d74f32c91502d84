"""esgkit: hierarchical multi-agent ESG analysis and its benchmark harness."""

__version__ = "0.1.0"
