"""Service-request model and seeded random workload generators.

All sampling goes through numpy's PCG64 generator using integer-only draws, so
a given (spec, substrate, seed) triple reproduces the same request sequence on
any platform.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional

import numpy as np

from .substrate import Substrate


class InfeasibleSpec(ValueError):
    pass


class ChainNf(NamedTuple):
    nf_type: int
    mandatory: bool


class ServiceRequest(NamedTuple):
    """One unicast/multicast service request (arrives online).

    Generator output is valid by construction; data read from external files
    goes through validate().
    """

    id: int
    source: int
    destinations: tuple[int, ...]          # sorted, never contains source
    chain: tuple[ChainNf, ...]             # traversal order
    rate: float                            # d, packet/s
    per_nf_proc: float                     # processing per NF instance, packet/s
    eta_m: float
    eta_b: float

    def validate(self) -> "ServiceRequest":
        if not self.destinations:
            raise ValueError("request needs at least one destination")
        if self.source in self.destinations:
            raise ValueError("destinations must exclude the source")
        if self.rate <= 0 or self.per_nf_proc < 0:
            raise ValueError("rate must be > 0 and per-NF processing >= 0")
        if not (1 <= self.eta_m <= self.eta_b):
            raise ValueError("need 1 <= eta_m <= eta_b")
        return self

    @property
    def mandatory_chain(self) -> tuple[ChainNf, ...]:
        return tuple(nf for nf in self.chain if nf.mandatory)

    @property
    def best_effort_count(self) -> int:
        return sum(1 for nf in self.chain if not nf.mandatory)

    def chain_for(self, include_best_effort: bool) -> tuple[ChainNf, ...]:
        return self.chain if include_best_effort else self.mandatory_chain

    def to_json(self, catalog: tuple[str, ...]) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "destinations": list(self.destinations),
            "chain": [
                {"nf_type": catalog[nf.nf_type], "mandatory": nf.mandatory}
                for nf in self.chain
            ],
            "rate": self.rate,
            "per_nf_proc": self.per_nf_proc,
            "eta_m": self.eta_m,
            "eta_b": self.eta_b,
        }

    @classmethod
    def from_json(cls, doc: dict, catalog: tuple[str, ...]) -> "ServiceRequest":
        index = {name: i for i, name in enumerate(catalog)}
        return cls(
            id=doc["id"],
            source=doc["source"],
            destinations=tuple(sorted(doc["destinations"])),
            chain=tuple(
                ChainNf(index[c["nf_type"]], bool(c["mandatory"])) for c in doc["chain"]
            ),
            rate=float(doc["rate"]),
            per_nf_proc=float(doc["per_nf_proc"]),
            eta_m=float(doc["eta_m"]),
            eta_b=float(doc["eta_b"]),
        ).validate()


@dataclass(frozen=True)
class UniformInt:
    """Inclusive integer range; lo == hi degenerates to a constant."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise InfeasibleSpec(f"empty support [{self.lo}, {self.hi}]")

    def sample(self, rng: np.random.Generator) -> int:
        if self.lo == self.hi:
            return self.lo
        return int(rng.integers(self.lo, self.hi + 1))

    @classmethod
    def constant(cls, v: int) -> "UniformInt":
        return cls(v, v)


@dataclass(frozen=True)
class WorkloadSpec:
    """Distributions for request randomization (all finite integer supports).

    eta_policy is either ("constant", value) with eta_m = eta_b = value, or
    ("counted", None): eta_b = |chain| and eta_m = max(1, |mandatory part|).
    """

    rate: UniformInt = UniformInt(1, 20)
    chain_len: UniformInt = UniformInt.constant(3)
    best_effort: UniformInt = UniformInt(0, 3)
    dest_count: UniformInt = UniformInt.constant(1)
    eta_policy: str = "constant"
    eta_value: float = 1.0
    proc_equals_rate: bool = True
    per_nf_proc: float = 0.0        # used only when proc_equals_rate is False
    seed: int = 0

    def validate(self) -> None:
        if self.eta_policy not in ("constant", "counted"):
            raise InfeasibleSpec(f"unknown eta policy {self.eta_policy!r}")
        if self.eta_policy == "constant" and self.eta_value < 1:
            raise InfeasibleSpec("constant eta must be >= 1")
        if self.best_effort.hi > self.chain_len.lo:
            raise InfeasibleSpec(
                "best-effort count support exceeds the minimum chain length"
            )
        if self.dest_count.lo < 1:
            raise InfeasibleSpec("requests need at least one destination")

    def eta_support(self) -> tuple[float, float]:
        """(eta_min, eta_max) over the declared support, not a realized run."""
        if self.eta_policy == "constant":
            return (self.eta_value, self.eta_value)
        eta_max = float(max(1, self.chain_len.hi))
        eta_min = float(max(1, self.chain_len.lo - self.best_effort.hi))
        return (eta_min, eta_max)

    def max_dest_count(self) -> int:
        return self.dest_count.hi

    def max_chain_len(self) -> int:
        return self.chain_len.hi

    def to_json(self) -> dict:
        return {
            "rate": [self.rate.lo, self.rate.hi],
            "chain_len": [self.chain_len.lo, self.chain_len.hi],
            "best_effort": [self.best_effort.lo, self.best_effort.hi],
            "dest_count": [self.dest_count.lo, self.dest_count.hi],
            "eta_policy": self.eta_policy,
            "eta_value": self.eta_value,
            "proc_equals_rate": self.proc_equals_rate,
            "per_nf_proc": self.per_nf_proc,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "WorkloadSpec":
        def rng_of(key, default):
            if key in doc:
                lo, hi = doc[key]
                return UniformInt(int(lo), int(hi))
            return default

        return cls(
            rate=rng_of("rate", UniformInt(1, 20)),
            chain_len=rng_of("chain_len", UniformInt.constant(3)),
            best_effort=rng_of("best_effort", UniformInt(0, 3)),
            dest_count=rng_of("dest_count", UniformInt.constant(1)),
            eta_policy=doc.get("eta_policy", "constant"),
            eta_value=float(doc.get("eta_value", 1.0)),
            proc_equals_rate=bool(doc.get("proc_equals_rate", True)),
            per_nf_proc=float(doc.get("per_nf_proc", 0.0)),
            seed=int(doc.get("seed", 0)),
        )


def _sample_without_replacement(rng: np.random.Generator, n: int, k: int) -> list[int]:
    # Fisher-Yates shuffle prefix (numpy permutation; integer draws only).
    if k == 0:
        return []
    return rng.permutation(n)[:k].tolist()


class WorkloadGenerator:
    """Streams ServiceRequests for a substrate; deterministic given the seed.

    rate_cap / proc_cap (optional) truncate the rate support so that every
    emitted request satisfies the admission caps of the approximation
    algorithm; the truncation is reported via the `truncated_rate_hi`
    attribute for run metadata.
    """

    def __init__(
        self,
        spec: WorkloadSpec,
        substrate: Substrate,
        rate_cap: Optional[float] = None,
        proc_cap: Optional[float] = None,
    ):
        spec.validate()
        if substrate.num_nodes < 2:
            raise InfeasibleSpec("substrate needs at least 2 nodes")
        if spec.dest_count.hi > substrate.num_nodes - 1:
            raise InfeasibleSpec("destination count exceeds available nodes")
        for t in range(len(substrate.nf_catalog)):
            if len(substrate.hosts(t)) == 0:
                raise InfeasibleSpec(f"NF type {substrate.nf_catalog[t]!r} has no host")
        if spec.chain_len.hi > len(substrate.nf_catalog):
            raise InfeasibleSpec("chain length exceeds NF catalog size")

        rate_hi = spec.rate.hi
        cap = None
        if rate_cap is not None:
            cap = rate_cap
        if proc_cap is not None and spec.proc_equals_rate:
            cap = proc_cap if cap is None else min(cap, proc_cap)
        if cap is not None:
            rate_hi = min(rate_hi, math.floor(cap))
            if rate_hi < spec.rate.lo:
                raise InfeasibleSpec(
                    f"rate cap {cap:.3f} empties the rate support "
                    f"[{spec.rate.lo}, {spec.rate.hi}]"
                )
        self.truncated_rate_hi = rate_hi if rate_hi != spec.rate.hi else None
        self._rate = UniformInt(spec.rate.lo, rate_hi)
        self.spec = spec
        self.substrate = substrate

    def stream(self) -> Iterator[ServiceRequest]:
        rng = np.random.Generator(np.random.PCG64(self.spec.seed))
        spec = self.spec
        n_nodes = self.substrate.num_nodes
        catalog_size = len(self.substrate.nf_catalog)
        rid = 0
        while True:
            picks = _sample_without_replacement(rng, n_nodes, spec.dest_count.hi + 1)
            n_dest = spec.dest_count.sample(rng)
            source = picks[0]
            destinations = tuple(sorted(picks[1 : 1 + n_dest]))

            chain_len = spec.chain_len.sample(rng)
            nf_types = _sample_without_replacement(rng, catalog_size, chain_len)
            n_be = min(spec.best_effort.sample(rng), chain_len)
            be_positions = set(_sample_without_replacement(rng, chain_len, n_be))
            chain = tuple(
                ChainNf(nf_types[i], i not in be_positions) for i in range(chain_len)
            )

            rate = float(self._rate.sample(rng))
            proc = rate if spec.proc_equals_rate else spec.per_nf_proc

            if spec.eta_policy == "constant":
                eta_m = eta_b = spec.eta_value
            else:
                eta_b = float(max(1, chain_len))
                eta_m = float(max(1, chain_len - n_be))

            yield ServiceRequest(
                id=rid,
                source=source,
                destinations=destinations,
                chain=chain,
                rate=rate,
                per_nf_proc=proc,
                eta_m=eta_m,
                eta_b=eta_b,
            )
            rid += 1


def generate(
    spec: WorkloadSpec,
    substrate: Substrate,
    count: int,
    rate_cap: Optional[float] = None,
    proc_cap: Optional[float] = None,
) -> list[ServiceRequest]:
    """First `count` requests of the stream for (spec, substrate, spec.seed)."""
    gen = WorkloadGenerator(spec, substrate, rate_cap=rate_cap, proc_cap=proc_cap)
    out = []
    for req in gen.stream():
        out.append(req)
        if len(out) == count:
            return out
    return out


def save_jsonl(requests: list[ServiceRequest], catalog: tuple[str, ...], path: str) -> None:
    with open(path, "w") as fh:
        for req in requests:
            fh.write(json.dumps(req.to_json(catalog), sort_keys=True) + "\n")


def load_jsonl(path: str, catalog: tuple[str, ...]) -> list[ServiceRequest]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(ServiceRequest.from_json(json.loads(line), catalog))
    return out
