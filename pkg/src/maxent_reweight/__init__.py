"""Maximum-entropy importance reweighting of a base distribution onto a target
distribution for a scalar derived parameter."""
__version__ = "0.1.0"
