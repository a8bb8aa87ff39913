"""Deterministic ledger: accounts, metered contracts, hash-chained blocks."""

from .abi import decode_args, encode_call
from .chain import (
    DEFAULT_BLOCK_GAS_LIMIT,
    DEFAULT_BLOCK_INTERVAL,
    OUT_OF_GAS,
    REVERTED,
    SUCCESS,
    Block,
    ChainVerification,
    Ledger,
    QueryError,
    Receipt,
    Transaction,
    TransactionRejected,
    verify_chain,
)
from .contract import CallContext, LogEvent, NativeContract, ReadOnlyViolation, Registry, Revert, external, view
from .export import dumps_chain, export_chain, import_chain, loads_chain
from .gas import GasMeter, GasSchedule, OutOfGas
from .keys import Account, KeyPair, SealedBoxError, address_from_public_key, create_account, open_sealed, seal
from .state import ContractInstance, WorldState

__all__ = [
    "Account", "Block", "CallContext", "ChainVerification", "ContractInstance", "DEFAULT_BLOCK_GAS_LIMIT",
    "DEFAULT_BLOCK_INTERVAL", "GasMeter", "GasSchedule", "KeyPair", "Ledger", "LogEvent", "NativeContract",
    "OUT_OF_GAS", "OutOfGas", "QueryError", "REVERTED", "ReadOnlyViolation", "Receipt", "Registry", "Revert",
    "SUCCESS", "SealedBoxError", "Transaction", "TransactionRejected", "WorldState", "address_from_public_key",
    "create_account", "decode_args", "dumps_chain", "encode_call", "export_chain", "external", "import_chain",
    "loads_chain", "open_sealed", "seal", "verify_chain", "view",
]
