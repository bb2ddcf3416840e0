"""Authentication-based consensus over PUF-backed blocks.

A device initiates a transaction by hashing its block data together with
one of its enrolled responses; only the hash travels. A trusted node
authenticates by linearly scanning the device's stored responses and
recomputing the tag for each until one matches, then appends the block to
its chain and rebroadcasts it with a validation tag of its own. Clients
drop anything not validated by a trusted node, recompute the trusted
node's validation tag against that node's stored responses, and append an
entry identical to the trusted node's.

No response ever crosses the network in any direction: origin blocks carry
the authentication tag, rebroadcasts add a validation tag, both are
SHA-256 outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import UnknownDeviceError
from .ledger import (
    AuthTag,
    BlockData,
    Chain,
    ChainEntry,
    HASH_BYTES,
    append,
    canonical_bytes,
    make_auth_tag,
    make_entry,
    sha256,
)
from .puf import Challenge, PufDevice, format_device_id, parse_device_id, reference_response
from .registry import Registry, TrustedView, lookup

ROLE_TRUSTED = "trusted"
ROLE_CLIENT = "client"

REASON_NO_MATCH = "no-match"
REASON_UNKNOWN_DEVICE = "unknown-device"
REASON_REPLAY = "replay"
REASON_NOT_FROM_TRUSTED = "not-from-trusted"


@dataclass(frozen=True)
class WireBlock:
    """Exactly what crosses the (simulated) network for one block.

    The three validation fields appear together on rebroadcasts from a
    trusted node and are absent on origin blocks.
    """

    data: BlockData
    auth_tag: AuthTag
    origin: int
    validated_by: Optional[int] = None
    t_validated: Optional[int] = None
    validation_tag: Optional[bytes] = None

    def __post_init__(self) -> None:
        fields = (self.validated_by, self.t_validated, self.validation_tag)
        present = [f is not None for f in fields]
        if any(present) and not all(present):
            raise ValueError(
                "validated_by, t_validated and validation_tag must appear together"
            )
        if self.validation_tag is not None and len(self.validation_tag) != HASH_BYTES:
            raise ValueError(f"validation_tag must be {HASH_BYTES} bytes")

    @property
    def is_validated(self) -> bool:
        return self.validated_by is not None


def wire_to_json(block: WireBlock) -> str:
    obj = {
        "device_id": format_device_id(block.data.device_id),
        "seq": block.data.seq,
        "t_init": block.data.t_init,
        "payload": block.data.payload.hex(),
        "auth_tag": block.auth_tag.hex(),
        "origin": format_device_id(block.origin),
    }
    if block.is_validated:
        obj["validated_by"] = format_device_id(block.validated_by)
        obj["t_validated"] = block.t_validated
        obj["validation_tag"] = block.validation_tag.hex()
    return json.dumps(obj, separators=(",", ":"))


def wire_from_json(line: str) -> WireBlock:
    obj = json.loads(line)
    base = ("device_id", "seq", "t_init", "payload", "auth_tag", "origin")
    extra = ("validated_by", "t_validated", "validation_tag")
    keys = tuple(obj.keys())
    if keys != base and keys != base + extra:
        raise ValueError("wire block has an unexpected key set")
    data = BlockData(
        device_id=parse_device_id(obj["device_id"]),
        seq=int(obj["seq"]),
        t_init=int(obj["t_init"]),
        payload=bytes.fromhex(obj["payload"]),
    )
    kwargs = {}
    if len(keys) == len(base) + len(extra):
        kwargs = {
            "validated_by": parse_device_id(obj["validated_by"]),
            "t_validated": int(obj["t_validated"]),
            "validation_tag": bytes.fromhex(obj["validation_tag"]),
        }
    return WireBlock(
        data=data,
        auth_tag=AuthTag(bytes.fromhex(obj["auth_tag"])),
        origin=parse_device_id(obj["origin"]),
        **kwargs,
    )


@dataclass
class NodeState:
    """Everything one network participant owns: its device, its enrolled
    challenge list, its replica of the chain, and its bookkeeping."""

    node_id: int
    role: str
    device: PufDevice
    challenges: tuple[Challenge, ...]
    chain: Chain = field(default_factory=Chain)
    next_seq: int = 0
    trust_value: int = 0
    last_seq_accepted: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.role not in (ROLE_TRUSTED, ROLE_CLIENT):
            raise ValueError(f"role must be {ROLE_TRUSTED!r} or {ROLE_CLIENT!r}, got {self.role!r}")


@dataclass(frozen=True)
class AuthResult:
    """Outcome of a trusted node judging one origin block."""

    accepted: bool
    reason: Optional[str]
    entry: Optional[ChainEntry]
    rebroadcast: Optional[WireBlock]
    hashes_tried: int


@dataclass(frozen=True)
class AcceptResult:
    """Outcome of a client judging one validated block."""

    accepted: bool
    reason: Optional[str]
    entry: Optional[ChainEntry]
    hashes_tried: int


def initiate(node: NodeState, payload: bytes, challenge_index: int, now: int) -> WireBlock:
    """Build and sign the next block for this node's device.

    The device re-derives the enrolled response noiselessly on the spot;
    only the resulting tag is placed on the wire. Advances next_seq.
    """
    if not 0 <= challenge_index < len(node.challenges):
        raise ValueError(
            f"challenge_index {challenge_index} out of range for {len(node.challenges)} enrolled"
        )
    data = BlockData(device_id=node.device.device_id, seq=node.next_seq, t_init=now, payload=payload)
    response = reference_response(node.device, node.challenges[challenge_index])
    tag = make_auth_tag(data, response)
    node.next_seq += 1
    return WireBlock(data=data, auth_tag=tag, origin=node.node_id)


def _validation_tag(entry_hash: bytes, response) -> bytes:
    return sha256(entry_hash + response.packed())


def authenticate(trusted: NodeState, block: WireBlock, registry: Registry, now: int) -> AuthResult:
    """Judge an origin block: scan the device's stored responses for one
    whose recomputed tag matches, guard against stale sequence numbers,
    then append and rebroadcast with this node's validation tag.

    Work is bounded by one tag recomputation per stored response."""
    if trusted.role != ROLE_TRUSTED:
        raise ValueError("authenticate requires a trusted node")
    if block.is_validated:
        raise ValueError("authenticate judges origin blocks, not rebroadcasts")
    try:
        stored = lookup(registry, trusted.node_id, block.data.device_id)
    except UnknownDeviceError:
        return AuthResult(False, REASON_UNKNOWN_DEVICE, None, None, 0)

    hashes = 0
    matched = False
    for response in stored:
        hashes += 1
        if make_auth_tag(block.data, response) == block.auth_tag:
            matched = True
            break
    if not matched:
        return AuthResult(False, REASON_NO_MATCH, None, None, hashes)

    last = trusted.last_seq_accepted.get(block.data.device_id)
    if last is not None and block.data.seq <= last:
        return AuthResult(False, REASON_REPLAY, None, None, hashes)

    trusted.chain = append(trusted.chain, block.data, block.auth_tag, trusted.node_id, now)
    entry = trusted.chain.entries[-1]
    trusted.last_seq_accepted[block.data.device_id] = block.data.seq
    trusted.trust_value += 1

    if not trusted.challenges:
        raise ValueError("trusted node has no enrolled challenges to validate with")
    pick = entry.height % len(trusted.challenges)
    own_response = reference_response(trusted.device, trusted.challenges[pick])
    rebroadcast = WireBlock(
        data=block.data,
        auth_tag=block.auth_tag,
        origin=trusted.node_id,
        validated_by=trusted.node_id,
        t_validated=now,
        validation_tag=_validation_tag(entry.entry_hash, own_response),
    )
    return AuthResult(True, None, entry, rebroadcast, hashes)


def accept_validated(client: NodeState, block: WireBlock, view: TrustedView, now: int) -> AcceptResult:
    """Judge a rebroadcast: check it names a trusted node, guard against
    replays, then recompute the validation tag against that trusted node's
    stored responses. On success the appended entry is bit-identical to
    the trusted node's entry."""
    if client.role != ROLE_CLIENT:
        raise ValueError("accept_validated requires a client node")
    if not block.is_validated:
        return AcceptResult(False, REASON_NOT_FROM_TRUSTED, None, 0)
    stored = view.responses_for(block.validated_by)
    if stored is None:
        return AcceptResult(False, REASON_NOT_FROM_TRUSTED, None, 0)

    last = client.last_seq_accepted.get(block.data.device_id)
    if last is not None and block.data.seq <= last:
        return AcceptResult(False, REASON_REPLAY, None, 0)

    candidate = make_entry(
        height=len(client.chain),
        prev_hash=client.chain.tip_hash,
        data=block.data,
        auth_tag=block.auth_tag,
        trusted_node_id=block.validated_by,
        t_validated=block.t_validated,
    )
    hashes = 0
    for response in stored:
        hashes += 1
        if _validation_tag(candidate.entry_hash, response) == block.validation_tag:
            client.chain = Chain(client.chain.entries + (candidate,))
            client.last_seq_accepted[block.data.device_id] = block.data.seq
            return AcceptResult(True, None, candidate, hashes)
    return AcceptResult(False, REASON_NO_MATCH, None, hashes)


def leading_zero_bits(digest: bytes) -> int:
    value = int.from_bytes(digest, "big")
    return len(digest) * 8 - value.bit_length()


def pow_mine_baseline(data: BlockData, difficulty_bits: int) -> tuple[int, bytes]:
    """Find the smallest nonce whose SHA-256(canonical || nonce) starts with
    difficulty_bits zero bits. The throwaway work against which
    authentication is benchmarked."""
    if not 0 <= difficulty_bits <= 32:
        raise ValueError(f"difficulty_bits must be in [0, 32], got {difficulty_bits}")
    prefix = canonical_bytes(data)
    n_zero_bytes, rem = divmod(difficulty_bits, 8)
    zero_prefix = bytes(n_zero_bytes)
    limit = 1 << (8 - rem) if rem else 0x100
    _sha256 = hashlib.sha256
    nonce = 0
    while True:
        digest = _sha256(prefix + nonce.to_bytes(8, "big")).digest()
        if digest.startswith(zero_prefix) and digest[n_zero_bytes] < limit:
            return nonce, digest
        nonce += 1
