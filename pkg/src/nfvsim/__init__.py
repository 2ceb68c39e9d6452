"""Online admission, routing and NF placement for NFV service chains."""

__version__ = "0.1.0"
