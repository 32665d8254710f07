"""Traffic-light recognition toolkit: prior-map construction from replayed
sensor logs and online recognition of the relevant light's state.
"""

__version__ = "0.1.0"
