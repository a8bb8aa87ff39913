"""Gas schedule and per-transaction meter."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields


class OutOfGas(Exception):
    pass


@dataclass(frozen=True)
class GasSchedule:
    """Fee constants, EVM-compatible values (Frontier/Homestead era)."""

    tx_base: int = 21000
    create_base: int = 32000
    code_deposit_per_byte: int = 200
    storage_write_new_slot: int = 20000
    storage_write_existing_slot: int = 5000
    storage_read: int = 200
    log_base: int = 375
    log_per_topic: int = 375
    log_per_data_byte: int = 8
    compute_per_step: int = 1

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, int) or value <= 0:
                raise ValueError(f"gas schedule entry {f.name} must be a positive integer")

    def log_cost(self, n_topics: int, n_data_bytes: int) -> int:
        return self.log_base + n_topics * self.log_per_topic + n_data_bytes * self.log_per_data_byte

    def to_dict(self) -> dict[str, int]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, int]) -> "GasSchedule":
        return cls(**data)


class GasMeter:
    def __init__(self, limit: int, schedule: GasSchedule):
        self.limit = limit
        self.schedule = schedule
        self.used = 0

    @property
    def remaining(self) -> int:
        return self.limit - self.used

    def consume(self, amount: int, reason: str = "") -> None:
        if amount < 0:
            raise ValueError("negative gas amount")
        if self.used + amount > self.limit:
            self.used = self.limit
            raise OutOfGas(reason or "out of gas")
        self.used += amount


class FreeMeter(GasMeter):
    """Meter for read-only queries: counts but never runs out."""

    def __init__(self, schedule: GasSchedule):
        super().__init__(limit=0, schedule=schedule)

    def consume(self, amount: int, reason: str = "") -> None:
        self.used += amount
