"""Scenario runner and gas reporting, plus the supervisory audit."""

from .audit import CONSISTENT, MISMATCH, VIOLATION, AuditBundle, Disclosure, Verdict, audit_disclosure, audit_verify
from .report import GasReport, GasRow, build_gas_report, gas_to_eth, gas_to_eur
from .runner import (
    CensorshipDetected,
    DecisionEntry,
    HarnessError,
    OracleMismatch,
    RunResult,
    Runner,
    run_scenario,
    write_outputs,
)
from .scenario import PUBLISHED_BASELINES, Scenario, ScenarioError, load_scenario, parse_scenario

__all__ = [
    "AuditBundle", "CONSISTENT", "CensorshipDetected", "DecisionEntry", "Disclosure", "GasReport", "GasRow",
    "HarnessError", "MISMATCH", "OracleMismatch", "PUBLISHED_BASELINES", "RunResult", "Runner", "Scenario",
    "ScenarioError", "VIOLATION", "Verdict", "audit_disclosure", "audit_verify", "build_gas_report",
    "gas_to_eth", "gas_to_eur", "load_scenario", "parse_scenario", "run_scenario", "write_outputs",
]
