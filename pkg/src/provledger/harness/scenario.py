"""Scenario files: YAML documents describing actors and a timeline of steps.

Schema (all keys camelCase)::

    name: model-a-billing
    seed: 7
    chain: {blockGasLimit, blockInterval, tickSeconds, difficulty,
            censorWithdrawals, inclusionDeadline}
    calibration: {subjectCodeSize, controllerCodeSize}
    baselines: {label: gas}            # optional, defaults to the published figures
    dataModel: {primitives, composites, roots}
    actors: [{id, role, seed, data: {path: value}}]
    policies: {name: relative/path.policy}
    timeline: [{tick, action, ...}]

Event attribute values written ``@path`` are replaced by the subject's
value for that data path when the step runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..policy.ast import Mechanism, MechanismTemplate, Policy, PolicyError
from ..policy.parser import parse_document
from ..provenance import DataModel, ProvenanceError

ROLES = ("subject", "controller", "processor")

# action -> (required keys, optional keys)
ACTIONS: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "deploy": (("subject", "controller", "policy", "contract"), ("data", "storageMode", "label", "baseline", "parent")),
    "grantData": (("contract", "data"), ("label", "baseline")),
    "usageEvent": (("contract", "event"), ("dishonest", "label", "baseline", "expect")),
    "transfer": (("contract", "processor", "event", "newContract", "policy"), ("data", "storageMode", "label", "baseline")),
    "timeStep": (("contract",), ("by", "label", "baseline", "expectViolation")),
    "addChild": (("contract", "child"), ("by", "label", "baseline")),
    "withdraw": (("contract",), ("label", "baseline")),
    "deployController": (("controller", "policy", "contract"), ("joinMode", "parent", "label", "baseline")),
    "join": (("contract",), ("subjects", "count", "label", "baseline")),
    "leave": (("contract",), ("subjects", "count", "label", "baseline")),
    "restrict": (("contract", "subjects"), ("label", "baseline")),
    "bulkEvent": (("contract", "template"), ("params", "label", "baseline")),
    "linkChild": (("contract", "child"), ("label", "baseline")),
}

PUBLISHED_BASELINES = {
    "subjectDeployBaseline": 820_000,
    "subjectDeployEvents": 890_000,
    "subjectDeployStateVars": 1_250_000,
    "notifyEvent": 23_000,
    "controllerDeploy": 340_000,
    "join": 40_000,
}


class ScenarioError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("invalid scenario:\n  " + "\n  ".join(problems))
        self.problems = problems


@dataclass
class ChainConfig:
    block_gas_limit: int = 4_000_000
    block_interval: int = 10
    tick_seconds: int = 86_400
    difficulty: int = 0
    censor_withdrawals: bool = False
    inclusion_deadline: int = 3


@dataclass
class ActorSpec:
    id: str
    role: str
    seed: str
    data: dict[str, Any] = field(default_factory=dict)


@dataclass
class Step:
    index: int
    tick: int
    action: str
    params: dict[str, Any]

    def get(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)


@dataclass
class Scenario:
    name: str
    seed: int
    chain: ChainConfig
    calibration: dict[str, int]
    baselines: dict[str, int]
    model: DataModel
    actors: dict[str, ActorSpec]
    policies: dict[str, list[Policy]]
    policy_texts: dict[str, str]
    timeline: list[Step]
    source: Path | None = None

    def actors_with_role(self, role: str) -> list[ActorSpec]:
        return [a for a in self.actors.values() if a.role == role]


_CHAIN_KEYS = {
    "blockGasLimit": "block_gas_limit",
    "blockInterval": "block_interval",
    "tickSeconds": "tick_seconds",
    "difficulty": "difficulty",
    "censorWithdrawals": "censor_withdrawals",
    "inclusionDeadline": "inclusion_deadline",
}


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except FileNotFoundError:
        raise ScenarioError([f"scenario file not found: {path}"]) from None
    except yaml.YAMLError as exc:
        raise ScenarioError([f"{path}: not valid YAML: {exc}"]) from None
    return parse_scenario(doc, base_dir=path.parent, source=path)


def parse_scenario(doc: Any, base_dir: Path = Path("."), source: Path | None = None) -> Scenario:
    problems: list[str] = []
    if not isinstance(doc, dict):
        raise ScenarioError(["scenario must be a mapping"])

    chain = ChainConfig()
    for key, value in (doc.get("chain") or {}).items():
        if key not in _CHAIN_KEYS:
            problems.append(f"chain: unknown key {key!r}")
        else:
            setattr(chain, _CHAIN_KEYS[key], value)

    try:
        model = DataModel.from_dict(doc.get("dataModel") or {"primitives": {}})
    except ProvenanceError as exc:
        problems.append(f"dataModel: {exc}")
        model = DataModel({})

    actors: dict[str, ActorSpec] = {}
    seeds: set[str] = set()
    for i, raw in enumerate(doc.get("actors") or []):
        aid = raw.get("id")
        if not aid:
            problems.append(f"actors[{i}]: missing id")
            continue
        if aid in actors:
            problems.append(f"actors[{i}]: duplicate actor id {aid!r}")
        role = raw.get("role")
        if role not in ROLES:
            problems.append(f"actor {aid}: unknown role {role!r}")
        seed = str(raw.get("seed", aid))
        if seed in seeds:
            problems.append(f"actor {aid}: key seed {seed!r} reused")
        seeds.add(seed)
        data = dict(raw.get("data") or {})
        for p, v in data.items():
            try:
                model.instance(p, v)
            except ProvenanceError as exc:
                problems.append(f"actor {aid}: {exc}")
        actors[aid] = ActorSpec(aid, role, seed, data)

    policies: dict[str, list[Policy]] = {}
    texts: dict[str, str] = {}
    for name, rel in (doc.get("policies") or {}).items():
        ppath = base_dir / rel
        try:
            text = ppath.read_text()
        except OSError:
            problems.append(f"policy {name}: file not found: {ppath}")
            continue
        try:
            policies[name] = parse_document(text)
            texts[name] = text
        except PolicyError as exc:
            problems.append(f"policy {name} ({ppath}): {exc}")

    timeline: list[Step] = []
    contracts: dict[str, str] = {}
    last_tick = 0
    for i, raw in enumerate(doc.get("timeline") or []):
        where = f"timeline[{i}]"
        if not isinstance(raw, dict):
            problems.append(f"{where}: step must be a mapping")
            continue
        action = raw.get("action")
        tick = raw.get("tick")
        if action not in ACTIONS:
            problems.append(f"{where}: unknown action {action!r}")
            continue
        if not isinstance(tick, int) or tick < 0:
            problems.append(f"{where}: tick must be a non-negative integer")
            tick = last_tick
        elif tick < last_tick:
            problems.append(f"{where}: tick {tick} goes backwards (previous {last_tick})")
        last_tick = max(last_tick, tick)
        params = {k: v for k, v in raw.items() if k not in ("tick", "action")}
        required, optional = ACTIONS[action]
        for key in required:
            if key not in params:
                problems.append(f"{where} ({action}): missing {key!r}")
        for key in params:
            if key not in required and key not in optional:
                problems.append(f"{where} ({action}): unexpected key {key!r}")
        problems.extend(_check_refs(where, action, params, actors, policies, contracts, model))
        timeline.append(Step(i, tick, action, params))

    calibration = {k: int(v) for k, v in (doc.get("calibration") or {}).items()}
    baselines = dict(PUBLISHED_BASELINES)
    baselines.update(doc.get("baselines") or {})
    if problems:
        raise ScenarioError(problems)
    return Scenario(
        name=str(doc.get("name", source.stem if source else "scenario")),
        seed=int(doc.get("seed", 0)),
        chain=chain,
        calibration=calibration,
        baselines=baselines,
        model=model,
        actors=actors,
        policies=policies,
        policy_texts=texts,
        timeline=timeline,
        source=source,
    )


def _check_refs(where, action, params, actors, policies, contracts, model) -> list[str]:
    out = []

    def actor(key: str, role: str) -> None:
        aid = params.get(key)
        if aid is None:
            return
        if aid not in actors:
            out.append(f"{where}: unknown actor {aid!r}")
        elif actors[aid].role != role:
            out.append(f"{where}: actor {aid!r} is a {actors[aid].role}, expected {role}")

    def contract(key: str, kind: str | None = None) -> None:
        cid = params.get(key)
        if cid is None:
            return
        if cid not in contracts:
            out.append(f"{where}: unknown contract {cid!r}")
        elif kind and contracts[cid] != kind:
            out.append(f"{where}: contract {cid!r} is a {contracts[cid]} contract")

    def define(key: str, kind: str) -> None:
        cid = params.get(key)
        if cid in contracts:
            out.append(f"{where}: contract id {cid!r} defined twice")
        elif cid is not None:
            contracts[cid] = kind

    def policy(kind: type | None = None) -> None:
        name = params.get("policy")
        if name is None:
            return
        if name not in policies:
            out.append(f"{where}: unknown policy {name!r}")
        elif kind is not None and not any(isinstance(p, kind) for p in policies[name]):
            out.append(f"{where}: policy {name!r} has no {kind.__name__}")

    if action == "deploy":
        actor("subject", "subject")
        actor("controller", "controller")
        policy()
        contract("parent", "subject")
        define("contract", "subject")
        subject = actors.get(params.get("subject"))
        for p in params.get("data") or []:
            if subject is not None and p not in subject.data:
                out.append(f"{where}: subject {subject.id} has no data at {p!r}")
    elif action == "transfer":
        contract("contract", "subject")
        actor("processor", "processor")
        policy()
        define("newContract", "subject")
    elif action == "deployController":
        actor("controller", "controller")
        policy(MechanismTemplate)
        contract("parent", "controller")
        define("contract", "controller")
    elif action in ("join", "leave", "restrict", "bulkEvent", "linkChild"):
        contract("contract", "controller")
        if action == "linkChild":
            contract("child", "controller")
        for s in params.get("subjects") or []:
            if s not in actors or actors[s].role != "subject":
                out.append(f"{where}: unknown subject {s!r}")
        if action in ("join", "leave") and ("subjects" in params) == ("count" in params):
            out.append(f"{where}: give exactly one of 'subjects' or 'count'")
    else:
        contract("contract", "subject")
        if action == "addChild":
            contract("child", "subject")
    if action in ("usageEvent", "transfer"):
        ev = params.get("event")
        if not isinstance(ev, dict) or "activity" not in ev:
            out.append(f"{where}: event needs an activity")
    if "storageMode" in params and params["storageMode"] not in ("stateVariables", "eventLogs"):
        out.append(f"{where}: unknown storage mode {params['storageMode']!r}")
    return out


def first_mechanism(policies: list[Policy]) -> Policy:
    for p in policies:
        if isinstance(p, (Mechanism, MechanismTemplate)):
            return p
    raise ScenarioError(["policy document is empty"])
