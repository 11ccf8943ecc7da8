"""FTP model 3 traffic: Poisson file arrivals per STA, split 50/50 between
downlink and uplink, segmented into 1500-byte MPDUs at the MAC SAP.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class FlowConfig:
    file_size_bytes: int = 500_000
    offered_load_bps: float = 75e6
    dl_fraction: float = 0.5
    mpdu_payload_bytes: int = 1500

    @property
    def arrival_rate_hz(self) -> float:
        """Total file arrival rate per STA (files/s)."""
        return self.offered_load_bps / (self.file_size_bytes * 8)

    def rate_for(self, direction: str) -> float:
        frac = self.dl_fraction if direction == "DL" else 1.0 - self.dl_fraction
        return self.arrival_rate_hz * frac

    def mpdus_per_file(self) -> int:
        return math.ceil(self.file_size_bytes / self.mpdu_payload_bytes)


def next_arrival_s(flow: FlowConfig, direction: str, rng: np.random.Generator) -> float:
    """Exponential inter-arrival time for one STA and direction."""
    rate = flow.rate_for(direction)
    if rate <= 0:
        return math.inf
    return float(rng.exponential(1.0 / rate))


def file_batches(flow: FlowConfig) -> list[tuple[int, int]]:
    """Segment one file into (payload_bytes, mpdu_count) batches.

    Full 1500-byte MPDUs plus one trailing partial MPDU when the file size
    is not a multiple of the payload size.
    """
    full, rem = divmod(flow.file_size_bytes, flow.mpdu_payload_bytes)
    out = []
    if full:
        out.append((flow.mpdu_payload_bytes, full))
    if rem:
        out.append((rem, 1))
    return out
