"""Swarm Deconflict - delay-robust asynchronous trajectory deconfliction simulator"""

__version__ = "0.1.0"
