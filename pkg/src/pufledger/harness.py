"""Scenario harness: builds worlds, runs them, measures them.

Everything here is driven by one flat ScenarioConfig whose field names are
exactly the keys accepted in a config file (one `key=value` per line, `#`
comments). A scenario derives every random draw from the single seed
through named substreams, so identical configs produce byte-identical
chains, registries, event logs and metrics.

The default cost model mirrors a small hardware testbed: one fast
validator board around 120 ms per block add, two mid clients around 46.5
ms and three slow clients around 72.3 ms, plus a few ms to sign and
broadcast. With the default latency model the mean end-to-end transaction
time lands near 198 ms.
"""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import consensus, fom, ledger, netsim, registry as registry_mod
from .consensus import ROLE_CLIENT, ROLE_TRUSTED, NodeState
from .errors import ConfigError, ScenarioError
from .fom import FomReport, ScreeningPolicy
from .ledger import BlockData
from .netsim import (
    Adversary,
    CostModel,
    Initiation,
    LatencyModel,
    NodeSpec,
    Scenario,
    SimConfig,
    SimResult,
    World,
    inject,
)
from .puf import (
    DEVICE_ID_BITS,
    PufConfig,
    format_device_id,
    manufacture,
    random_challenge,
    reference_response,
)
from .registry import Registry, enroll

# named substreams of the scenario seed
_STREAM_DEVICE_IDS = 10
_STREAM_ENROLL = 11
_STREAM_PAYLOAD = 12
_STREAM_FOM_POOL = 20
_STREAM_FOM_SCREEN = 21
_STREAM_FOM_RELIABILITY = 22

_ADVERSARY_CHOICES = ("none",) + netsim.ADVERSARY_KINDS

CSV_HEADER = "tx,seq,device_id,dt_sa_ms,dt_ca_ms,dt_tx_ms,result,reason"


@dataclass(frozen=True)
class ScenarioConfig:
    """One flat bag of knobs; field names double as config file keys."""

    seed: int = 42
    n_transactions: int = 300
    n_clients: int = 5
    n_fast_clients: int = 2
    n_candidates: int = 500
    tx_spacing_ms: int = 250
    payload_bytes: int = 64
    drop_rate: float = 0.0
    latency_base_ms: int = 4
    latency_jitter_ms: int = 2
    demotion_threshold: int = 3  # 0 disables demotion
    adversary: str = "none"
    adversary_events: int = 0
    pow_difficulty_bits: int = 20
    bench_trials: int = 100
    puf_n_oscillators: int = 512
    puf_response_bits: int = 128
    puf_freq_mean_mhz: float = 250.0
    puf_freq_sigma_mhz: float = 5.0
    puf_noise_sigma_mhz: float = 0.245
    screen_randomness_low_pct: float = 45.0
    screen_randomness_high_pct: float = 55.0
    screen_max_unreliable_bits: int = 3
    screen_n_reevals: int = 11
    fom_n_devices: int = 6
    fom_n_challenges: int = 100
    fom_pool_size: int = 500
    fom_n_reevals: int = 11
    cost_trusted_mean_ms: float = 120.03
    cost_trusted_sd_ms: float = 3.44
    cost_client_fast_mean_ms: float = 46.5
    cost_client_fast_sd_ms: float = 2.66
    cost_client_slow_mean_ms: float = 72.27
    cost_client_slow_sd_ms: float = 18.07
    cost_init_mean_ms: float = 6.0
    cost_init_sd_ms: float = 1.0
    out_dir: str = "out"

    def __post_init__(self) -> None:
        if self.n_transactions < 0:
            raise ConfigError("n_transactions must be >= 0")
        if self.n_clients < 1:
            raise ConfigError("n_clients must be >= 1")
        if not 0 <= self.n_fast_clients <= self.n_clients:
            raise ConfigError("n_fast_clients must be in [0, n_clients]")
        if self.n_candidates < 1:
            raise ConfigError("n_candidates must be >= 1")
        if self.tx_spacing_ms < 1:
            raise ConfigError("tx_spacing_ms must be >= 1")
        if self.payload_bytes < 0 or self.payload_bytes > ledger.MAX_PAYLOAD_BYTES:
            raise ConfigError("payload_bytes out of range")
        if self.adversary not in _ADVERSARY_CHOICES:
            raise ConfigError(f"adversary must be one of {_ADVERSARY_CHOICES}")
        if self.adversary != "none" and self.adversary_events < 1:
            raise ConfigError("adversary_events must be >= 1 when an adversary is set")
        if self.demotion_threshold < 0:
            raise ConfigError("demotion_threshold must be >= 0 (0 disables)")
        if self.bench_trials < 1:
            raise ConfigError("bench_trials must be >= 1")

    def puf_config(self) -> PufConfig:
        return PufConfig(
            n_oscillators=self.puf_n_oscillators,
            response_bits=self.puf_response_bits,
            freq_mean_mhz=self.puf_freq_mean_mhz,
            freq_sigma_mhz=self.puf_freq_sigma_mhz,
            noise_sigma_mhz=self.puf_noise_sigma_mhz,
            rng_seed=self.seed,
        )

    def screening_policy(self) -> ScreeningPolicy:
        return ScreeningPolicy(
            randomness_band=(self.screen_randomness_low_pct, self.screen_randomness_high_pct),
            max_unreliable_bits=self.screen_max_unreliable_bits,
            n_screen_reevals=self.screen_n_reevals,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def parse_config_text(text: str) -> ScenarioConfig:
    """Parse `key=value` lines into a ScenarioConfig; unknown keys are errors."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        kind = _FIELD_TYPES[key]
        try:
            if kind == "int":
                values[key] = int(value)
            elif kind == "float":
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return ScenarioConfig(**values)


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


# --- world construction -----------------------------------------------------

@dataclass(frozen=True)
class BuiltWorld:
    sim_config: SimConfig
    scenario: Scenario
    node_ids: tuple[int, ...]  # trusted first, then clients in roster order
    records: dict[int, registry_mod.CrpRecord]


def _draw_node_ids(seed: int, count: int) -> list[int]:
    rng = np.random.default_rng([seed, _STREAM_DEVICE_IDS])
    ids: list[int] = []
    seen: set[int] = set()
    while len(ids) < count:
        candidate = int(rng.integers(0, 1 << DEVICE_ID_BITS))
        if candidate not in seen:
            seen.add(candidate)
            ids.append(candidate)
    return ids


def build_world(cfg: ScenarioConfig) -> BuiltWorld:
    """Manufacture, enroll and wire up the roster described by the config.

    Derivations from the seed: node ids from substream 10; enrollment
    randomness from substream 11 (one child seed per node, in roster
    order); transaction payloads from substream 12. Device seeds are
    roster indices.
    """
    puf_config = cfg.puf_config()
    policy = cfg.screening_policy()
    n_nodes = 1 + cfg.n_clients
    node_ids = _draw_node_ids(cfg.seed, n_nodes)
    trusted_id = node_ids[0]

    devices = [manufacture(puf_config, node_ids[i], i) for i in range(n_nodes)]
    reg = Registry(trusted_node_ids=[trusted_id])
    enroll_rng = np.random.default_rng([cfg.seed, _STREAM_ENROLL])
    records = {}
    for device in devices:
        enroll_seed = int(enroll_rng.integers(0, 1 << 63))
        records[device.device_id] = enroll(
            reg, device, cfg.n_candidates, policy, enroll_seed,
            enrolled_at=0, response_bits=cfg.puf_response_bits,
        )

    trusted_cost = CostModel(cfg.cost_init_mean_ms, cfg.cost_init_sd_ms,
                             cfg.cost_trusted_mean_ms, cfg.cost_trusted_sd_ms)
    fast_cost = CostModel(cfg.cost_init_mean_ms, cfg.cost_init_sd_ms,
                          cfg.cost_client_fast_mean_ms, cfg.cost_client_fast_sd_ms)
    slow_cost = CostModel(cfg.cost_init_mean_ms, cfg.cost_init_sd_ms,
                          cfg.cost_client_slow_mean_ms, cfg.cost_client_slow_sd_ms)
    roster = [NodeSpec(trusted_id, ROLE_TRUSTED, "default", trusted_cost)]
    nodes = [NodeState(trusted_id, ROLE_TRUSTED, devices[0],
                       records[trusted_id].challenges)]
    for i in range(cfg.n_clients):
        node_id = node_ids[1 + i]
        cost = fast_cost if i < cfg.n_fast_clients else slow_cost
        roster.append(NodeSpec(node_id, ROLE_CLIENT, "default", cost))
        nodes.append(NodeState(node_id, ROLE_CLIENT, devices[1 + i],
                               records[node_id].challenges))

    sim_config = SimConfig(
        seed=cfg.seed,
        latency={"default": LatencyModel(cfg.latency_base_ms, cfg.latency_jitter_ms)},
        drop_rate=cfg.drop_rate,
        roster=tuple(roster),
        demotion_threshold=cfg.demotion_threshold or None,
    )

    payload_rng = np.random.default_rng([cfg.seed, _STREAM_PAYLOAD])
    initiations = []
    used_per_client: dict[int, int] = {}
    for tx in range(cfg.n_transactions):
        client_pos = tx % cfg.n_clients
        node_id = node_ids[1 + client_pos]
        n_enrolled = len(records[node_id].pairs)
        used = used_per_client.get(node_id, 0)
        initiations.append(Initiation(
            t_ms=(tx + 1) * cfg.tx_spacing_ms,
            node_id=node_id,
            payload=bytes(payload_rng.bytes(cfg.payload_bytes)),
            challenge_index=used % n_enrolled,
        ))
        used_per_client[node_id] = used + 1

    scenario = Scenario(
        world=World(nodes=tuple(nodes), registry=reg),
        initiations=tuple(initiations),
    )
    scenario = _apply_config_adversary(cfg, scenario)
    return BuiltWorld(sim_config, scenario, tuple(node_ids), records)


def _apply_config_adversary(cfg: ScenarioConfig, scenario: Scenario) -> Scenario:
    if cfg.adversary == "none":
        return scenario
    n_tx = len(scenario.initiations)
    after = (n_tx + 1) * cfg.tx_spacing_ms
    times = tuple(after + k * cfg.tx_spacing_ms for k in range(cfg.adversary_events))
    horizon = times[-1] + 60_000 if times else None
    scenario = replace(scenario, horizon_ms=horizon)
    if cfg.adversary == "tamper":
        if n_tx == 0:
            raise ConfigError("tamper adversary needs transactions to tamper with")
        tx_ids = list(range(min(cfg.adversary_events, n_tx)))
        adv = Adversary("tamper", {"tx_ids": tx_ids, "field": "payload"})
    elif cfg.adversary == "replay":
        if n_tx == 0:
            raise ConfigError("replay adversary needs a transaction to replay")
        adv = Adversary("replay", {"tx_id": 0}, times)
    elif cfg.adversary == "fake-device":
        adv = Adversary("fake-device", {}, times)
    else:
        adv = Adversary("forge-validator", {"claim": "trusted"}, times)
    return inject(adv, scenario)


# --- metrics ----------------------------------------------------------------

@dataclass
class MetricsReport:
    """Everything measured in one scenario run, serializable as one JSON doc."""

    n_transactions: int
    n_adversarial: int
    accepted: int
    rejected_by_reason: dict[str, int]
    adversarial_accepted: int
    adversarial_rejected_by_reason: dict[str, int]
    dt_sa_ms: dict[str, float]
    dt_ca_ms: dict[str, float]
    dt_tx_ms: dict[str, float]
    per_node: dict[str, dict]
    pop_pow_ratio: Optional[float]
    transactions: list[dict]

    def to_dict(self) -> dict:
        return {
            "n_transactions": self.n_transactions,
            "n_adversarial": self.n_adversarial,
            "accepted": self.accepted,
            "rejected_by_reason": self.rejected_by_reason,
            "adversarial_accepted": self.adversarial_accepted,
            "adversarial_rejected_by_reason": self.adversarial_rejected_by_reason,
            "dt_sa_ms": self.dt_sa_ms,
            "dt_ca_ms": self.dt_ca_ms,
            "dt_tx_ms": self.dt_tx_ms,
            "per_node": self.per_node,
            "pop_pow_ratio": self.pop_pow_ratio,
            "transactions": self.transactions,
        }


def _stats(values: list[int | float]) -> dict[str, float]:
    if not values:
        return {"mean": 0.0, "sd": 0.0, "n": 0}
    mean = float(statistics.fmean(values))
    sd = float(statistics.pstdev(values)) if len(values) > 1 else 0.0
    return {"mean": mean, "sd": sd, "n": len(values)}


def build_metrics(result: SimResult, roster: tuple[NodeSpec, ...]) -> MetricsReport:
    trusted_ids = [spec.node_id for spec in roster if spec.role == ROLE_TRUSTED]
    rejected: dict[str, int] = {}
    accepted = 0
    transactions = []
    dt_sa_all: list[int] = []
    dt_ca_all: list[int] = []
    dt_tx_all: list[int] = []
    per_node_sa: dict[int, list[int]] = {}
    per_node_ca: dict[int, list[int]] = {}
    per_node_tx: dict[int, list[int]] = {}

    for record in result.tx_records:
        entry = {
            "tx": record.tx_id,
            "seq": record.seq,
            "device_id": format_device_id(record.device_id),
            "origin": format_device_id(record.origin),
            "t_init": record.t_init,
            "t_send": record.t_send,
            "t_recv_trusted": record.t_recv_trusted,
            "t_validated": record.t_validated,
            "result": "lost" if record.accepted is None
                      else ("accepted" if record.accepted else "rejected"),
            "reason": record.reason,
            "clients": {},
        }
        if record.accepted is None:
            rejected["lost"] = rejected.get("lost", 0) + 1
        elif record.accepted:
            accepted += 1
            dt_sa = record.t_validated - record.t_recv_trusted
            dt_sa_all.append(dt_sa)
            per_node_sa.setdefault(trusted_ids[0], []).append(dt_sa)
        else:
            rejected[record.reason] = rejected.get(record.reason, 0) + 1
        for node_id, outcome in record.client_outcomes.items():
            entry["clients"][format_device_id(node_id)] = {
                "t_recv": outcome.t_recv,
                "t_done": outcome.t_done,
                "accepted": outcome.accepted,
                "reason": outcome.reason,
            }
            if outcome.accepted:
                dt_ca = outcome.t_done - outcome.t_recv
                dt_tx = outcome.t_done - record.t_init
                dt_ca_all.append(dt_ca)
                dt_tx_all.append(dt_tx)
                per_node_ca.setdefault(node_id, []).append(dt_ca)
                per_node_tx.setdefault(node_id, []).append(dt_tx)
        transactions.append(entry)

    adv_accepted = 0
    adv_rejected: dict[str, int] = {}
    for outcome in result.adversarial:
        if outcome.accepted:
            adv_accepted += 1
        else:
            adv_rejected[outcome.reason] = adv_rejected.get(outcome.reason, 0) + 1

    per_node = {}
    for spec in roster:
        stats: dict[str, object] = {"role": spec.role}
        if spec.node_id in per_node_sa:
            stats["dt_sa_ms"] = _stats(per_node_sa[spec.node_id])
        if spec.node_id in per_node_ca:
            stats["dt_ca_ms"] = _stats(per_node_ca[spec.node_id])
            stats["dt_tx_ms"] = _stats(per_node_tx[spec.node_id])
        per_node[format_device_id(spec.node_id)] = stats

    return MetricsReport(
        n_transactions=len(result.tx_records),
        n_adversarial=len(result.adversarial),
        accepted=accepted,
        rejected_by_reason=rejected,
        adversarial_accepted=adv_accepted,
        adversarial_rejected_by_reason=adv_rejected,
        dt_sa_ms=_stats(dt_sa_all),
        dt_ca_ms=_stats(dt_ca_all),
        dt_tx_ms=_stats(dt_tx_all),
        per_node=per_node,
        pop_pow_ratio=None,
        transactions=transactions,
    )


def timings_csv_lines(report: MetricsReport) -> list[str]:
    """One row per transaction. Client-side columns reflect the last client
    to finish replicating the block (the moment the transaction is fully
    settled); rows for unaccepted transactions leave them blank."""
    lines = [CSV_HEADER]
    for entry in report.transactions:
        dt_sa = ""
        if entry["t_validated"] is not None and entry["t_recv_trusted"] is not None:
            dt_sa = str(entry["t_validated"] - entry["t_recv_trusted"])
        dt_ca = ""
        dt_tx = ""
        best: Optional[tuple[int, int]] = None
        for outcome in entry["clients"].values():
            if outcome["accepted"] and (best is None or outcome["t_done"] > best[0]):
                best = (outcome["t_done"], outcome["t_recv"])
        if best is not None:
            dt_ca = str(best[0] - best[1])
            dt_tx = str(best[0] - entry["t_init"])
        reason = entry["reason"] or ""
        lines.append(
            f'{entry["tx"]},{entry["seq"]},{entry["device_id"]},'
            f'{dt_sa},{dt_ca},{dt_tx},{entry["result"]},{reason}'
        )
    return lines


@dataclass
class ScenarioOutput:
    config: ScenarioConfig
    built: BuiltWorld
    result: SimResult
    report: MetricsReport
    files: dict[str, Path]


def run_scenario(cfg: ScenarioConfig, write_outputs: bool = True) -> ScenarioOutput:
    """Build the world, run the simulation, assemble metrics, write artifacts.

    Writes one chain file per node plus the registry, the event log, the
    metrics JSON and the per-transaction timing CSV into cfg.out_dir.
    """
    built = build_world(cfg)
    result = netsim.run(built.sim_config, built.scenario)
    report = build_metrics(result, built.sim_config.roster)
    files: dict[str, Path] = {}
    if write_outputs:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for node_id in built.node_ids:
            path = out / f"chain_{format_device_id(node_id)}.ndjson"
            ledger.save_chain(path, result.nodes[node_id].chain)
            files[f"chain_{format_device_id(node_id)}"] = path
        files["registry"] = out / "registry.ndjson"
        registry_mod.save_registry(files["registry"], result.registry)
        files["events"] = out / "events.ndjson"
        netsim.save_events(files["events"], result.events)
        files["metrics"] = out / "metrics.json"
        files["metrics"].write_text(
            json.dumps(report.to_dict(), indent=1) + "\n", encoding="ascii")
        files["timings"] = out / "timings.csv"
        files["timings"].write_text(
            "\n".join(timings_csv_lines(report)) + "\n", encoding="ascii")
    return ScenarioOutput(cfg, built, result, report, files)


# --- figure-of-merit calibration --------------------------------------------

def run_fom_calibration(cfg: ScenarioConfig) -> dict:
    """Measure uniqueness, reliability and randomness over a device population.

    Each device screens the same candidate pool; its figures are computed
    over its own accepted challenges (capped at fom_n_challenges), with
    uniqueness comparing its responses to every other device's responses on
    that same set. The population rows average the per-device figures.
    """
    if cfg.fom_n_devices < 2:
        raise ConfigError("fom_n_devices must be >= 2")
    puf_config = cfg.puf_config()
    policy = cfg.screening_policy()
    devices = [manufacture(puf_config, device_id, i)
               for i, device_id in enumerate(_draw_node_ids(cfg.seed, cfg.fom_n_devices))]

    pool_rng = np.random.default_rng([cfg.seed, _STREAM_FOM_POOL])
    pool = [random_challenge(puf_config.bank_size, puf_config.response_bits, pool_rng)
            for _ in range(cfg.fom_pool_size)]
    screen_rng = np.random.default_rng([cfg.seed, _STREAM_FOM_SCREEN])
    screen_seeds = screen_rng.integers(0, 1 << 63, size=(cfg.fom_pool_size, policy.n_screen_reevals))
    rel_rng = np.random.default_rng([cfg.seed, _STREAM_FOM_RELIABILITY])

    per_device = []
    accepted_counts = []
    all_uni, all_rel, all_rnd = [], [], []
    screened_refs_common: list[list] = [[] for _ in devices]
    common_set = None
    for d, device in enumerate(devices):
        screened = []
        for c, challenge in enumerate(pool):
            outcome = fom.screen_challenge(device, challenge, policy, screen_seeds[c].tolist())
            if outcome.accepted:
                screened.append((challenge, outcome.reference))
        accepted_counts.append(len(screened))
        if not screened:
            raise ScenarioError(
                f"device {device.device_id_hex} accepted no challenges from the pool")
        screened = screened[: cfg.fom_n_challenges]
        challenges = [challenge for challenge, _ in screened]
        refs = [ref for _, ref in screened]
        if d == 0:
            common_set = challenges
        # responses of every device on this device's screened set
        matrix = []
        for other in devices:
            if other is device:
                matrix.append(refs)
            else:
                matrix.append([reference_response(other, challenge) for challenge in challenges])
        uni = fom.uniqueness(matrix)
        rel_seeds = rel_rng.integers(0, 1 << 63, size=(len(challenges), cfg.fom_n_reevals))
        rel = float(np.mean([
            fom.reliability(device, challenge, cfg.fom_n_reevals, rel_seeds[i].tolist())
            for i, challenge in enumerate(challenges)
        ]))
        rnd = float(np.mean([fom.randomness(ref) for ref in refs]))
        all_uni.append(uni)
        all_rel.append(rel)
        all_rnd.append(rnd)
        report = FomReport(uni, rel, rnd, len(devices), len(challenges), cfg.fom_n_reevals)
        per_device.append({"device_id": device.device_id_hex, **report.to_dict()})

    for d, device in enumerate(devices):
        screened_refs_common[d] = [reference_response(device, challenge)
                                   for challenge in common_set]
    correlation = fom.mean_abs_correlation(screened_refs_common)
    population = FomReport(
        uniqueness_pct=float(np.mean(all_uni)),
        reliability_pct=float(np.mean(all_rel)),
        randomness_pct=float(np.mean(all_rnd)),
        n_devices=len(devices),
        n_challenges=int(round(float(np.mean([min(c, cfg.fom_n_challenges) for c in accepted_counts])))),
        n_reevaluations=cfg.fom_n_reevals,
        correlation_abs_mean=correlation,
    )
    return {
        "population": population.to_dict(),
        "per_device": per_device,
        "screening": {
            "pool_size": cfg.fom_pool_size,
            "accepted_by_device": accepted_counts,
        },
    }


# --- benchmark ---------------------------------------------------------------

def run_benchmark(cfg: ScenarioConfig) -> dict:
    """Wall-clock medians: authenticate against a realistic stored-response
    set versus mining the toy proof-of-work at the configured difficulty.
    The timing fields are wall-clock measurements and are the one part of
    the harness that is not bit-reproducible."""
    small = replace(cfg, n_clients=1, n_fast_clients=0, n_transactions=0,
                    adversary="none", adversary_events=0)
    built = build_world(small)
    trusted_id = built.node_ids[0]
    client_id = built.node_ids[1]
    world_nodes = {node.node_id: node for node in built.scenario.world.nodes}
    trusted = world_nodes[trusted_id]
    client = world_nodes[client_id]
    reg = built.scenario.world.registry
    n_enrolled = len(built.records[client_id].pairs)
    payload_rng = np.random.default_rng([cfg.seed, _STREAM_PAYLOAD])

    auth_times = []
    for trial in range(cfg.bench_trials):
        block = consensus.initiate(
            client, bytes(payload_rng.bytes(cfg.payload_bytes)),
            trial % n_enrolled, now=trial)
        start = time.perf_counter()
        result = consensus.authenticate(trusted, block, reg, now=trial)
        auth_times.append(time.perf_counter() - start)
        if not result.accepted:
            raise ScenarioError("benchmark authentication unexpectedly failed")

    pow_times = []
    for trial in range(cfg.bench_trials):
        data = BlockData(
            device_id=client_id, seq=trial, t_init=trial,
            payload=bytes(payload_rng.bytes(cfg.payload_bytes)))
        start = time.perf_counter()
        consensus.pow_mine_baseline(data, cfg.pow_difficulty_bits)
        pow_times.append(time.perf_counter() - start)

    auth_median = statistics.median(auth_times)
    pow_median = statistics.median(pow_times)
    return {
        "n_trials": cfg.bench_trials,
        "stored_responses": n_enrolled,
        "pow_difficulty_bits": cfg.pow_difficulty_bits,
        "auth_median_ms": auth_median * 1e3,
        "pow_median_ms": pow_median * 1e3,
        "pop_pow_ratio": auth_median / pow_median if pow_median > 0 else None,
    }
