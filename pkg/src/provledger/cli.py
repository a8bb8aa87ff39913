"""Run usage-control scenarios on a simulated ledger and audit the results.

    provledger run <scenario> [--seed N] [--gas-report out] [--export-chain out] [--bundle out]
    provledger audit verify --chain <file> --bundle <file>
    provledger policy compile <file> [--nonce hex]
    provledger chain inspect <file> [--logs topic]

Exit status is 0 only when every in-run check passes.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from pathlib import Path

from .compiler import CompileError, compile_mechanism
from .hashing import topic
from .harness import (
    AuditBundle,
    CensorshipDetected,
    HarnessError,
    OracleMismatch,
    ScenarioError,
    audit_verify,
    load_scenario,
    run_scenario,
    write_outputs,
)
from .ledger.export import import_chain
from .policy import Mechanism, PolicyError, parse_document

TOPIC_NAMES = (
    "UsageEventRecord", "TransferEvent", "ViolationEvent", "ChildLinked", "Joined", "Left", "DataReference",
    "BulkEvent",
)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
        result = run_scenario(scenario, seed=args.seed)
    except ScenarioError as exc:
        print(exc, file=sys.stderr)
        return 2
    except OracleMismatch as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return 1
    except CensorshipDetected as exc:
        print(f"censorship detected: {exc}", file=sys.stderr)
        return 1
    except HarnessError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    write_outputs(result, args.export_chain, args.gas_report, args.bundle)
    summary = result.summary()
    summary["gas"] = result.gas_report.to_dict()["rows"]
    if args.table:
        print(result.gas_report.table())
    else:
        _emit(summary)
    return 0 if result.checks["chainValid"] and result.checks["unlinkable"] else 1


def cmd_audit_verify(args: argparse.Namespace) -> int:
    blocks = import_chain(args.chain)
    bundle = AuditBundle.load(args.bundle)
    report = audit_verify(blocks, bundle)
    _emit(report)
    clean = report["chainValid"] and report["chainHeadMatches"]
    return 0 if clean and report["summary"]["consistent"] == len(report["verdicts"]) else 1


def cmd_policy_compile(args: argparse.Namespace) -> int:
    nonce = bytes.fromhex(args.nonce) if args.nonce else secrets.token_bytes(32)
    try:
        policies = parse_document(Path(args.file).read_text())
        out = []
        for p in policies:
            if not isinstance(p, Mechanism):
                out.append({"template": p.name, "note": "templates compile once instantiated"})
                continue
            bp = compile_mechanism(p, nonce)
            out.append({"mechanism": p.name, "digest": bp.digest().hex(), **bp.inspect()})
    except (OSError, PolicyError, CompileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit({"nonce": nonce.hex(), "policies": out})
    return 0


def _topic(text: str) -> bytes:
    if text in TOPIC_NAMES:
        return topic(text)
    return bytes.fromhex(text.removeprefix("0x"))


def cmd_chain_inspect(args: argparse.Namespace) -> int:
    from .ledger.chain import verify_chain

    blocks = import_chain(args.file)
    check = verify_chain(blocks)
    out = {
        "blocks": len(blocks),
        "head": blocks[-1].block_hash.hex(),
        "transactions": sum(len(b.transactions) for b in blocks),
        "gasUsed": sum(b.gas_used for b in blocks),
        "valid": bool(check),
        "badIndex": check.bad_index,
        "reason": check.reason,
    }
    if args.logs:
        want = _topic(args.logs)
        out["logs"] = [
            {"block": b.number, **log.to_dict()}
            for b in blocks
            for r in b.receipts
            for log in r.logs
            if want in log.topics
        ]
    _emit(out)
    return 0 if check else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="provledger", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario file")
    run.add_argument("scenario")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--gas-report", metavar="OUT")
    run.add_argument("--export-chain", metavar="OUT")
    run.add_argument("--bundle", metavar="OUT", help="write an audit bundle for every subject contract")
    run.add_argument("--table", action="store_true", help="print the gas table instead of JSON")
    run.set_defaults(func=cmd_run)

    audit = sub.add_parser("audit", help="supervisory audit")
    audit_sub = audit.add_subparsers(dest="audit_command", required=True)
    verify = audit_sub.add_parser("verify")
    verify.add_argument("--chain", required=True)
    verify.add_argument("--bundle", required=True)
    verify.set_defaults(func=cmd_audit_verify)

    policy = sub.add_parser("policy", help="policy tools")
    policy_sub = policy.add_subparsers(dest="policy_command", required=True)
    comp = policy_sub.add_parser("compile")
    comp.add_argument("file")
    comp.add_argument("--nonce", help="32-byte nonce as hex (random if omitted)")
    comp.set_defaults(func=cmd_policy_compile)

    chain = sub.add_parser("chain", help="chain tools")
    chain_sub = chain.add_subparsers(dest="chain_command", required=True)
    inspect = chain_sub.add_parser("inspect")
    inspect.add_argument("file")
    inspect.add_argument("--logs", metavar="TOPIC", help="list logs carrying this topic (event name or hex)")
    inspect.set_defaults(func=cmd_chain_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
