"""magprec: precision engine for noisy quantum frequency estimation.

Error-propagation precision, optimal schedules and no-go bounds for squeezed,
coherent and GHZ probes under directional dephasing.
"""

__version__ = "0.1.0"
