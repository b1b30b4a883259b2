"""Shared record types."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TradeoffPoint:
    """A point on the sensing/communication distortion boundary.

    All information quantities are in nats. ``budget`` carries the resource
    cost actually spent (expected symbol cost for discrete models, Gram
    trace for the Gaussian example).
    """

    d_s: float
    d_c: float
    d_total: float
    rate: float
    capacity: float
    budget: float

    def __post_init__(self):
        if abs(self.d_total - (self.d_s + self.d_c)) > 1e-9:
            raise ValueError("d_total must equal d_s + d_c")
        if self.rate < -1e-12:
            raise ValueError("rate must be nonnegative")
        if self.capacity < -1e-12:
            raise ValueError("capacity must be nonnegative")

    def as_dict(self) -> dict:
        return {
            "d_s": self.d_s,
            "d_c": self.d_c,
            "d_total": self.d_total,
            "rate": self.rate,
            "capacity": self.capacity,
            "budget": self.budget,
        }
