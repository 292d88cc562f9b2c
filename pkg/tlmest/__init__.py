"""Transfer learning for high-dimensional M-estimators.

Pooling / fine-tuning transfer, truncated-penalty source selection, the simulation
generators and the experiment harness.
"""

__version__ = "0.1.0"
