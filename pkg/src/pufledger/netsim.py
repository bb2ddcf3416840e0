"""Deterministic discrete-event network simulation.

Time is an integer millisecond counter. Every message send samples a link
latency, every handler charges a processing cost, and all draws come from
named generator streams derived from the single simulation seed, so one
(config, scenario) pair always produces one event log, byte for byte.

Broadcast is unicast fan-out: the sender schedules one delivery per peer.
There are no sockets and no wall-clock reads anywhere in this module.

Adversaries are part of the scenario. Four kinds are understood:

* tamper          - flips one bit of a chosen field in a transaction's
                    origin broadcast, in flight, for every receiver,
* replay          - re-delivers a previously broadcast origin block to the
                    trusted node at scheduled times,
* fake-device     - fabricates blocks claiming a device id that was never
                    enrolled and sends them to the trusted node,
* forge-validator - fabricates blocks that merely claim a validator id,
                    with a made-up validation tag, and sends them to every
                    client.

Adversarial sends use the normal latency model but are never dropped, so
each injection is judged by its target and shows up in the result exactly
once per receiver.
"""

from __future__ import annotations

import copy
import heapq
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import consensus
from .consensus import (
    ROLE_CLIENT,
    ROLE_TRUSTED,
    REASON_NOT_FROM_TRUSTED,
    NodeState,
    WireBlock,
)
from .errors import ScenarioError
from .ledger import AuthTag, BlockData, HASH_BYTES
from .puf import DEVICE_ID_BITS, format_device_id
from .registry import Registry, TrustedView, trusted_view

ADVERSARY_KINDS = ("tamper", "replay", "fake-device", "forge-validator")
_TAMPER_FIELDS = ("payload", "auth_tag", "device_id")

# named sub-streams of the simulation seed
_STREAM_LATENCY = 1
_STREAM_DROP = 2
_STREAM_COST = 3
_STREAM_ADVERSARY = 4


@dataclass(frozen=True)
class LatencyModel:
    """Per-link latency: base_ms plus a uniform integer jitter in [0, jitter_ms]."""

    base_ms: int
    jitter_ms: int

    def __post_init__(self) -> None:
        if self.base_ms < 0 or self.jitter_ms < 0:
            raise ScenarioError("latency parameters must be >= 0")


@dataclass(frozen=True)
class CostModel:
    """Per-node processing costs in ms, drawn Normal(mean, sd), floored at 0.

    init_* applies when the node signs and broadcasts its own block,
    handle_* when it judges an incoming one.
    """

    init_mean_ms: float = 6.0
    init_sd_ms: float = 1.0
    handle_mean_ms: float = 50.0
    handle_sd_ms: float = 3.0

    def __post_init__(self) -> None:
        if min(self.init_mean_ms, self.init_sd_ms, self.handle_mean_ms, self.handle_sd_ms) < 0:
            raise ScenarioError("cost parameters must be >= 0")


@dataclass(frozen=True)
class NodeSpec:
    node_id: int
    role: str
    link_class: str = "default"
    cost: CostModel = CostModel()


@dataclass(frozen=True)
class SimConfig:
    seed: int
    latency: dict[str, LatencyModel]
    drop_rate: float
    roster: tuple[NodeSpec, ...]
    demotion_threshold: Optional[int] = 3

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ScenarioError("seed must be >= 0")
        if not 0.0 <= self.drop_rate < 1.0:
            raise ScenarioError(f"drop_rate must be in [0, 1), got {self.drop_rate}")
        if not self.roster:
            raise ScenarioError("roster must not be empty")
        ids = [spec.node_id for spec in self.roster]
        if len(set(ids)) != len(ids):
            raise ScenarioError("roster node ids must be unique")
        if not any(spec.role == ROLE_TRUSTED for spec in self.roster):
            raise ScenarioError("roster needs at least one trusted node")
        for spec in self.roster:
            if spec.role not in (ROLE_TRUSTED, ROLE_CLIENT):
                raise ScenarioError(f"unknown role {spec.role!r}")
            if spec.link_class not in self.latency:
                raise ScenarioError(f"no latency model for link class {spec.link_class!r}")
        if self.demotion_threshold is not None and self.demotion_threshold < 1:
            raise ScenarioError("demotion_threshold must be >= 1 or None")


@dataclass(frozen=True)
class Initiation:
    """One scheduled transaction: node_id signs payload at t_ms."""

    t_ms: int
    node_id: int
    payload: bytes
    challenge_index: int


@dataclass(frozen=True)
class Adversary:
    kind: str
    target: dict
    schedule: tuple[int, ...] = ()


@dataclass(frozen=True)
class World:
    """Initial node states plus the enrollment registry. run() never mutates
    these; it works on copies."""

    nodes: tuple[NodeState, ...]
    registry: Registry


@dataclass(frozen=True)
class Scenario:
    world: World
    initiations: tuple[Initiation, ...]
    adversaries: tuple[Adversary, ...] = ()
    horizon_ms: Optional[int] = None

    def horizon(self) -> int:
        if self.horizon_ms is not None:
            return self.horizon_ms
        latest = max((i.t_ms for i in self.initiations), default=0)
        return latest + 60_000


def inject(adversary: Adversary, scenario: Scenario) -> Scenario:
    """Validate an adversary against the scenario and return the extended
    scenario. The original scenario is untouched."""
    if adversary.kind not in ADVERSARY_KINDS:
        raise ScenarioError(f"unknown adversary kind {adversary.kind!r}")
    horizon = scenario.horizon()
    for t in adversary.schedule:
        if not 0 <= t <= horizon:
            raise ScenarioError(f"adversary event time {t} outside scenario horizon {horizon}")
    n_tx = len(scenario.initiations)
    target = adversary.target
    if adversary.kind == "tamper":
        tx_ids = target.get("tx_ids")
        if not tx_ids or any(not 0 <= t < n_tx for t in tx_ids):
            raise ScenarioError("tamper target needs valid tx_ids")
        if target.get("field", "payload") not in _TAMPER_FIELDS:
            raise ScenarioError(f"tamper field must be one of {_TAMPER_FIELDS}")
    elif adversary.kind == "replay":
        tx_id = target.get("tx_id")
        if tx_id is None or not 0 <= tx_id < n_tx:
            raise ScenarioError("replay target needs a valid tx_id")
        if not adversary.schedule:
            raise ScenarioError("replay needs at least one scheduled time")
    elif adversary.kind == "fake-device":
        if not adversary.schedule:
            raise ScenarioError("fake-device needs at least one scheduled time")
    elif adversary.kind == "forge-validator":
        claim = target.get("claim", "trusted")
        if claim != "trusted" and not isinstance(claim, int):
            raise ScenarioError("forge-validator claim must be 'trusted' or a node id")
        if not adversary.schedule:
            raise ScenarioError("forge-validator needs at least one scheduled time")
    return replace(scenario, adversaries=scenario.adversaries + (adversary,))


@dataclass(frozen=True)
class LogEvent:
    t_ms: int
    kind: str
    node: Optional[int]
    block_ref: str
    detail: dict


def event_to_json_line(event: LogEvent) -> str:
    obj = {
        "t_ms": event.t_ms,
        "kind": event.kind,
        "node": format_device_id(event.node) if event.node is not None else "",
        "block_ref": event.block_ref,
        "detail": event.detail,
    }
    return json.dumps(obj, separators=(",", ":"))


def save_events(path: str | Path, events: tuple[LogEvent, ...]) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        for event in events:
            fh.write(event_to_json_line(event) + "\n")


@dataclass
class ClientOutcome:
    t_recv: int
    t_done: int
    accepted: bool
    reason: Optional[str]


@dataclass
class TxRecord:
    """Complete timing picture of one initiated transaction."""

    tx_id: int
    origin: int
    device_id: int
    seq: int
    t_init: int
    t_send: int
    t_recv_trusted: Optional[int] = None
    t_validated: Optional[int] = None
    accepted: Optional[bool] = None
    reason: Optional[str] = None
    client_outcomes: dict[int, ClientOutcome] = field(default_factory=dict)


@dataclass(frozen=True)
class AdvOutcome:
    """How one adversarial delivery was judged."""

    kind: str
    msg_id: int
    receiver: int
    receiver_role: str
    t_ms: int
    accepted: bool
    reason: Optional[str]


@dataclass
class SimResult:
    events: tuple[LogEvent, ...]
    nodes: dict[int, NodeState]
    registry: Registry
    tx_records: tuple[TxRecord, ...]
    adversarial: tuple[AdvOutcome, ...]
    final_time_ms: int


@dataclass(frozen=True)
class _Message:
    msg_id: int
    block: WireBlock
    sender: Optional[int]
    receiver: int
    tx_id: Optional[int]
    provenance: str  # "normal" or an adversary kind


class _Sim:
    def __init__(self, config: SimConfig, scenario: Scenario) -> None:
        self.config = config
        self.scenario = scenario
        roster_ids = sorted(spec.node_id for spec in config.roster)
        world_ids = sorted(node.node_id for node in scenario.world.nodes)
        if roster_ids != world_ids:
            raise ScenarioError("roster and world disagree on node ids")
        self.spec_by_id = {spec.node_id: spec for spec in config.roster}
        for node in scenario.world.nodes:
            if node.role != self.spec_by_id[node.node_id].role:
                raise ScenarioError(f"role mismatch for node {format_device_id(node.node_id)}")
        # run() works on private copies so a scenario can be re-run
        self.nodes: dict[int, NodeState] = {
            node.node_id: copy.deepcopy(node) for node in scenario.world.nodes
        }
        self.order: list[int] = [spec.node_id for spec in config.roster]
        self.registry: Registry = scenario.world.registry
        self.view: TrustedView = trusted_view(self.registry)
        self.trusted_live: list[int] = [
            spec.node_id for spec in config.roster if spec.role == ROLE_TRUSTED
        ]

        self.rng_latency = np.random.default_rng([config.seed, _STREAM_LATENCY])
        self.rng_drop = np.random.default_rng([config.seed, _STREAM_DROP])
        self.rng_cost = np.random.default_rng([config.seed, _STREAM_COST])
        self.rng_adv = np.random.default_rng([config.seed, _STREAM_ADVERSARY])

        self.heap: list[tuple[int, int, tuple]] = []
        self.push_counter = 0
        self.msg_counter = 0
        self.now = 0
        self.events: list[LogEvent] = []
        self.free_at: dict[int, int] = {node_id: 0 for node_id in self.order}
        self.tx_records: list[TxRecord] = []
        self.adversarial: list[AdvOutcome] = []
        self.captured_origin: dict[int, WireBlock] = {}
        self.penalties: dict[int, int] = {}
        self.fake_seq = 0

        tamper_by_tx: dict[int, tuple[str, Adversary]] = {}
        for adv in scenario.adversaries:
            if adv.kind == "tamper":
                for tx in adv.target["tx_ids"]:
                    tamper_by_tx[tx] = (adv.target.get("field", "payload"), adv)
        self.tamper_by_tx = tamper_by_tx

    # -- plumbing ------------------------------------------------------------

    def push(self, t: int, item: tuple) -> None:
        heapq.heappush(self.heap, (t, self.push_counter, item))
        self.push_counter += 1

    def log(self, t: int, kind: str, node: Optional[int], block_ref: str, detail: dict) -> None:
        self.events.append(LogEvent(t, kind, node, block_ref, detail))

    def latency_to(self, receiver: int) -> int:
        model = self.config.latency[self.spec_by_id[receiver].link_class]
        jitter = int(self.rng_latency.integers(0, model.jitter_ms + 1)) if model.jitter_ms else 0
        return model.base_ms + jitter

    def cost(self, node_id: int, which: str) -> int:
        model = self.spec_by_id[node_id].cost
        if which == "init":
            mean, sd = model.init_mean_ms, model.init_sd_ms
        else:
            mean, sd = model.handle_mean_ms, model.handle_sd_ms
        if sd == 0:
            return max(0, int(round(mean)))
        return max(0, int(round(self.rng_cost.normal(mean, sd))))

    def occupy(self, node_id: int, arrival: int, cost_ms: int) -> int:
        start = max(arrival, self.free_at[node_id])
        done = start + cost_ms
        self.free_at[node_id] = done
        return done

    def send(self, block: WireBlock, sender: Optional[int], receivers: list[int],
             t_send: int, tx_id: Optional[int], provenance: str,
             droppable: bool = True) -> None:
        for receiver in receivers:
            if droppable and self.config.drop_rate > 0.0:
                if float(self.rng_drop.random()) < self.config.drop_rate:
                    self.log(t_send, "lose", receiver, "", {
                        "tx": tx_id if tx_id is not None else -1,
                        "from": format_device_id(sender) if sender is not None else "",
                    })
                    continue
            msg = _Message(self.msg_counter, block, sender, receiver, tx_id, provenance)
            self.msg_counter += 1
            self.push(t_send + self.latency_to(receiver), ("deliver", msg))

    def peers_of(self, node_id: int) -> list[int]:
        return [other for other in self.order if other != node_id]

    def role_of(self, node_id: int) -> str:
        return self.nodes[node_id].role

    # -- adversary helpers -----------------------------------------------------

    def tampered_copy(self, block: WireBlock, fld: str) -> WireBlock:
        if fld == "payload" and len(block.data.payload) == 0:
            fld = "auth_tag"  # nothing to flip in an empty payload
        if fld == "payload":
            bit = int(self.rng_adv.integers(0, len(block.data.payload) * 8))
            raw = bytearray(block.data.payload)
            raw[bit // 8] ^= 1 << (bit % 8)
            data = replace(block.data, payload=bytes(raw))
            return replace(block, data=data)
        if fld == "auth_tag":
            bit = int(self.rng_adv.integers(0, HASH_BYTES * 8))
            raw = bytearray(block.auth_tag.h)
            raw[bit // 8] ^= 1 << (bit % 8)
            return replace(block, auth_tag=AuthTag(bytes(raw)))
        bit = int(self.rng_adv.integers(0, DEVICE_ID_BITS))
        data = replace(block.data, device_id=block.data.device_id ^ (1 << bit))
        return replace(block, data=data)

    def unenrolled_device_id(self) -> int:
        while True:
            candidate = int(self.rng_adv.integers(0, 1 << DEVICE_ID_BITS))
            if not self.registry.has_device(candidate):
                return candidate

    def random_tag(self) -> bytes:
        return self.rng_adv.bytes(HASH_BYTES)

    # -- handlers --------------------------------------------------------------

    def handle_initiation(self, t: int, tx_id: int) -> None:
        init = self.scenario.initiations[tx_id]
        node = self.nodes[init.node_id]
        block = consensus.initiate(node, init.payload, init.challenge_index, now=t)
        t_send = self.occupy(init.node_id, t, self.cost(init.node_id, "init"))
        record = TxRecord(
            tx_id=tx_id, origin=init.node_id, device_id=block.data.device_id,
            seq=block.data.seq, t_init=t, t_send=t_send,
        )
        self.tx_records.append(record)
        self.log(t, "initiate", init.node_id, "", {
            "tx": tx_id, "seq": block.data.seq,
            "device_id": format_device_id(block.data.device_id),
            "challenge_index": init.challenge_index,
        })
        provenance = "normal"
        out_block = block
        if tx_id in self.tamper_by_tx:
            fld, _adv = self.tamper_by_tx[tx_id]
            out_block = self.tampered_copy(block, fld)
            provenance = "tamper"
            self.log(t_send, "tamper", None, "", {"tx": tx_id, "field": fld})
        self.captured_origin[tx_id] = out_block
        self.send(out_block, init.node_id, self.peers_of(init.node_id), t_send, tx_id, provenance)

    def handle_delivery(self, t: int, msg: _Message) -> None:
        receiver = msg.receiver
        role = self.role_of(receiver)
        self.log(t, "deliver", receiver, "", {
            "msg": msg.msg_id,
            "tx": msg.tx_id if msg.tx_id is not None else -1,
            "from": format_device_id(msg.sender) if msg.sender is not None else "",
            "validated": msg.block.is_validated,
            "adv": msg.provenance,
        })
        if msg.block.is_validated:
            if role == ROLE_TRUSTED:
                # a trusted node replicates nothing; it already holds its own entry
                self.log(t, "ignore", receiver, "", {"msg": msg.msg_id})
                return
            claimed = msg.block.validated_by
            if claimed not in self.trusted_live:
                # structural drop at arrival: the header names nobody trusted,
                # so no validation work is spent on it
                self.record_outcome(msg, t, False, REASON_NOT_FROM_TRUSTED)
                self.log(t, "reject", receiver, "", {
                    "msg": msg.msg_id, "tx": msg.tx_id if msg.tx_id is not None else -1,
                    "reason": REASON_NOT_FROM_TRUSTED, "adv": msg.provenance,
                })
                return
            self.schedule_judgment(t, msg)
        else:
            if role == ROLE_TRUSTED:
                self.schedule_judgment(t, msg)
            else:
                # clients act only on blocks a trusted node has validated
                self.record_outcome(msg, t, False, REASON_NOT_FROM_TRUSTED)
                self.log(t, "reject", receiver, "", {
                    "msg": msg.msg_id, "tx": msg.tx_id if msg.tx_id is not None else -1,
                    "reason": REASON_NOT_FROM_TRUSTED, "adv": msg.provenance,
                })

    def schedule_judgment(self, t: int, msg: _Message) -> None:
        """Reserve the receiver and let the verdict land when the work ends.

        State changes (appends, penalties, demotions) happen at completion
        time, in global time order, never retroactively."""
        done = self.occupy(msg.receiver, t, self.cost(msg.receiver, "handle"))
        self.push(done, ("judge", msg, t))

    def handle_judgment(self, done: int, msg: _Message, arrival: int) -> None:
        if msg.block.is_validated:
            self.client_finishes(done, arrival, msg)
        else:
            self.trusted_finishes(done, arrival, msg)

    def trusted_finishes(self, done: int, arrival: int, msg: _Message) -> None:
        receiver = msg.receiver
        node = self.nodes[receiver]
        if node.role != ROLE_TRUSTED:
            # demoted while this block sat in its queue: authority is gone
            self.record_outcome(msg, done, False, REASON_NOT_FROM_TRUSTED)
            self.log(done, "reject", receiver, "", {
                "msg": msg.msg_id, "tx": msg.tx_id if msg.tx_id is not None else -1,
                "reason": REASON_NOT_FROM_TRUSTED, "adv": msg.provenance,
            })
            return
        result = consensus.authenticate(node, msg.block, self.registry, now=done)
        if msg.tx_id is not None and msg.provenance == "normal":
            record = self.tx_records[msg.tx_id]
            if record.accepted is None:
                record.t_recv_trusted = arrival
                record.t_validated = done
                record.accepted = result.accepted
                record.reason = result.reason
        self.record_outcome(msg, done, result.accepted, result.reason)
        if result.accepted:
            entry = result.entry
            self.log(done, "accept", receiver, entry.entry_hash.hex(), {
                "tx": msg.tx_id if msg.tx_id is not None else -1,
                "seq": entry.data.seq, "height": entry.height,
                "role": ROLE_TRUSTED, "hashes": result.hashes_tried,
                "adv": msg.provenance,
            })
            self.log(done, "rebroadcast", receiver, entry.entry_hash.hex(), {
                "tx": msg.tx_id if msg.tx_id is not None else -1,
            })
            self.send(result.rebroadcast, receiver, self.peers_of(receiver),
                      done, msg.tx_id, "normal")
        else:
            self.log(done, "reject", receiver, "", {
                "msg": msg.msg_id, "tx": msg.tx_id if msg.tx_id is not None else -1,
                "reason": result.reason, "hashes": result.hashes_tried,
                "adv": msg.provenance,
            })

    def client_finishes(self, done: int, arrival: int, msg: _Message) -> None:
        receiver = msg.receiver
        node = self.nodes[receiver]
        claimed = msg.block.validated_by
        result = consensus.accept_validated(node, msg.block, self.view, now=done)
        self.record_outcome(msg, done, result.accepted, result.reason)
        if result.accepted:
            if msg.tx_id is not None and msg.provenance == "normal":
                record = self.tx_records[msg.tx_id]
                record.client_outcomes[receiver] = ClientOutcome(arrival, done, True, None)
            self.log(done, "accept", receiver, result.entry.entry_hash.hex(), {
                "tx": msg.tx_id if msg.tx_id is not None else -1,
                "seq": result.entry.data.seq, "height": result.entry.height,
                "role": ROLE_CLIENT, "hashes": result.hashes_tried,
                "adv": msg.provenance,
            })
        else:
            if msg.tx_id is not None and msg.provenance == "normal":
                record = self.tx_records[msg.tx_id]
                record.client_outcomes[receiver] = ClientOutcome(arrival, done, False, result.reason)
            self.log(done, "reject", receiver, "", {
                "msg": msg.msg_id, "tx": msg.tx_id if msg.tx_id is not None else -1,
                "reason": result.reason, "hashes": result.hashes_tried,
                "adv": msg.provenance,
            })
            if result.reason == consensus.REASON_NO_MATCH:
                self.penalize(done, claimed)

    def penalize(self, t: int, trusted_id: int) -> None:
        """A client caught a bad validation under this trusted node's name."""
        self.penalties[trusted_id] = self.penalties.get(trusted_id, 0) + 1
        node = self.nodes[trusted_id]
        node.trust_value -= 1
        self.log(t, "penalize", trusted_id, "", {
            "penalties": self.penalties[trusted_id], "trust_value": node.trust_value,
        })
        threshold = self.config.demotion_threshold
        if threshold is not None and self.penalties[trusted_id] >= threshold \
                and trusted_id in self.trusted_live:
            self.trusted_live.remove(trusted_id)
            node.role = ROLE_CLIENT
            self.log(t, "demote", trusted_id, "", {"trust_value": node.trust_value})

    def record_outcome(self, msg: _Message, t: int, accepted: bool, reason: Optional[str]) -> None:
        if msg.provenance != "normal":
            self.adversarial.append(AdvOutcome(
                kind=msg.provenance, msg_id=msg.msg_id, receiver=msg.receiver,
                receiver_role=self.role_of(msg.receiver), t_ms=t,
                accepted=accepted, reason=reason,
            ))

    def handle_injection(self, t: int, adv_index: int) -> None:
        adv = self.scenario.adversaries[adv_index]
        if adv.kind == "replay":
            tx_id = adv.target["tx_id"]
            block = self.captured_origin.get(tx_id)
            if block is None:
                self.log(t, "inject-noop", None, "", {"kind": adv.kind, "tx": tx_id})
                return
            receivers = list(self.trusted_live) or [self.order[0]]
            self.log(t, "inject", None, "", {"kind": adv.kind, "tx": tx_id})
            self.send(block, None, receivers, t, tx_id, "replay", droppable=False)
        elif adv.kind == "fake-device":
            data = BlockData(
                device_id=self.unenrolled_device_id(),
                seq=self.fake_seq, t_init=t,
                payload=bytes(self.rng_adv.bytes(8)),
            )
            self.fake_seq += 1
            block = WireBlock(data=data, auth_tag=AuthTag(self.random_tag()), origin=data.device_id)
            receivers = list(self.trusted_live) or [self.order[0]]
            self.log(t, "inject", None, "", {
                "kind": adv.kind, "device_id": format_device_id(data.device_id),
            })
            self.send(block, None, receivers, t, None, "fake-device", droppable=False)
        elif adv.kind == "forge-validator":
            claim = adv.target.get("claim", "trusted")
            if claim == "trusted":
                claim_id = self.trusted_live[0] if self.trusted_live else self.order[0]
            else:
                claim_id = claim
            victim = self.order[-1]  # an enrolled device id to put in the block
            data = BlockData(
                device_id=victim,
                seq=(1 << 32) + self.fake_seq,  # far past any honest sequence number
                t_init=t,
                payload=bytes(self.rng_adv.bytes(8)),
            )
            self.fake_seq += 1
            block = WireBlock(
                data=data, auth_tag=AuthTag(self.random_tag()), origin=claim_id,
                validated_by=claim_id, t_validated=t, validation_tag=self.random_tag(),
            )
            clients = [n for n in self.order if self.role_of(n) == ROLE_CLIENT]
            self.log(t, "inject", None, "", {
                "kind": adv.kind, "claim": format_device_id(claim_id),
            })
            self.send(block, None, clients, t, None, "forge-validator", droppable=False)

    def run(self) -> SimResult:
        for tx_id in range(len(self.scenario.initiations)):
            self.push(self.scenario.initiations[tx_id].t_ms, ("init", tx_id))
        for adv_index, adv in enumerate(self.scenario.adversaries):
            for t in adv.schedule:
                self.push(t, ("inject", adv_index))
        final_time = 0
        while self.heap:
            t, _, item = heapq.heappop(self.heap)
            self.now = t
            final_time = max(final_time, t)
            if item[0] == "init":
                self.handle_initiation(t, item[1])
            elif item[0] == "deliver":
                self.handle_delivery(t, item[1])
            elif item[0] == "judge":
                self.handle_judgment(t, item[1], item[2])
            else:
                self.handle_injection(t, item[1])
        if self.events:
            final_time = max(final_time, max(e.t_ms for e in self.events))
        # a stable sort puts the log in simulated-time order; entries sharing
        # a timestamp keep their processing order
        self.events.sort(key=lambda event: event.t_ms)
        return SimResult(
            events=tuple(self.events),
            nodes=self.nodes,
            registry=self.registry,
            tx_records=tuple(self.tx_records),
            adversarial=tuple(self.adversarial),
            final_time_ms=final_time,
        )


def run(config: SimConfig, scenario: Scenario) -> SimResult:
    """Execute the scenario and return the full result; result.events is the
    event log and is a pure function of (config, scenario)."""
    for adv in scenario.adversaries:
        if adv.kind not in ADVERSARY_KINDS:
            raise ScenarioError(f"unknown adversary kind {adv.kind!r}")
    for init in scenario.initiations:
        if init.t_ms < 0:
            raise ScenarioError("initiation times must be >= 0")
    return _Sim(config, scenario).run()
