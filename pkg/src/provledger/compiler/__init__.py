"""Policy compiler: obfuscated operator trees with compact per-node state."""

from .blueprint import CompileError, ContractBlueprint, Layout, NodeSpec, compile_mechanism, horizon
from .obfuscation import (
    ObfuscatedEvent,
    ObfuscatedPattern,
    activity_digest,
    match_obfuscated,
    name_digest,
    obfuscate_event,
    obfuscate_pattern,
    value_digest,
)
from .runtime import PolicyRuntime, PolicyRuntimeError, initial_words
from .simulate import CompiledPolicy

__all__ = [
    "CompileError", "CompiledPolicy", "ContractBlueprint", "Layout", "NodeSpec", "ObfuscatedEvent", "ObfuscatedPattern",
    "PolicyRuntime", "PolicyRuntimeError", "activity_digest", "compile_mechanism", "horizon", "initial_words",
    "match_obfuscated", "name_digest", "obfuscate_event", "obfuscate_pattern", "value_digest",
]
