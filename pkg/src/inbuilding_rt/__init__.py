"""Image-method indoor ray tracing for window-donor / indoor-repeater coverage.

The donor antenna sits in a window with its beam pointing outdoors; its back
lobe reaches the room as interference to the indoor repeater's signal.
"""

__version__ = "0.1.0"
