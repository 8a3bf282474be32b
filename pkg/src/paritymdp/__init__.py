"""Sure-cost solving for parity-MDPs."""

__version__ = "0.1.0"
