import json
from dataclasses import replace

import pytest

from pufledger import (
    CSV_HEADER,
    ConfigError,
    ScenarioConfig,
    build_world,
    load_chain,
    load_config,
    load_registry,
    parse_config_text,
    run_benchmark,
    run_fom_calibration,
    run_scenario,
    timings_csv_lines,
    verify,
)
from pufledger.cli import main
from pufledger.consensus import ROLE_CLIENT, ROLE_TRUSTED


def small_config(**overrides) -> ScenarioConfig:
    base = dict(
        seed=11,
        n_transactions=10,
        n_clients=3,
        n_fast_clients=1,
        n_candidates=60,
        tx_spacing_ms=120,
        payload_bytes=24,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


# --- config parsing ---------------------------------------------------------------

def test_empty_config_text_gives_defaults():
    assert parse_config_text("") == ScenarioConfig()


def test_config_text_parses_types_and_comments():
    cfg = parse_config_text(
        "# full line comment\n"
        "\n"
        "seed = 7\n"
        "drop_rate = 0.25   # trailing comment\n"
        "adversary = replay\n"
        "adversary_events=2\n"
    )
    assert cfg.seed == 7
    assert cfg.drop_rate == 0.25
    assert cfg.adversary == "replay"
    assert cfg.adversary_events == 2
    # untouched keys keep their defaults
    assert cfg.n_transactions == ScenarioConfig().n_transactions


@pytest.mark.parametrize("text,fragment", [
    ("mystery_knob = 3", "unknown config key"),
    ("seed", "expected key=value"),
    ("seed = banana", "bad value"),
    ("n_clients = 0", "n_clients"),
    ("n_clients = 2\nn_fast_clients = 5", "n_fast_clients"),
    ("adversary = gremlin", "adversary"),
    ("adversary = tamper", "adversary_events"),
    ("payload_bytes = 999999", "payload_bytes"),
    ("demotion_threshold = -1", "demotion_threshold"),
    ("bench_trials = 0", "bench_trials"),
])
def test_bad_config_text_is_rejected(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config_text(text)


def test_load_config_round_trip(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("seed=99\nn_transactions=5\n", encoding="utf-8")
    cfg = load_config(path)
    assert cfg.seed == 99
    assert cfg.n_transactions == 5


# --- world construction ------------------------------------------------------------

def test_build_world_shape():
    cfg = small_config()
    built = build_world(cfg)
    assert len(built.node_ids) == 1 + cfg.n_clients
    assert len(set(built.node_ids)) == len(built.node_ids)

    roster = built.sim_config.roster
    assert roster[0].role == ROLE_TRUSTED
    assert all(spec.role == ROLE_CLIENT for spec in roster[1:])
    assert [spec.node_id for spec in roster] == list(built.node_ids)

    for node in built.scenario.world.nodes:
        assert node.device.device_id == node.node_id
        assert node.challenges == built.records[node.node_id].challenges
    assert built.scenario.world.registry.trusted_node_ids == frozenset({built.node_ids[0]})

    # one fast client then slow ones: handle cost means differ
    handle_means = [spec.cost.handle_mean_ms for spec in roster[1:]]
    assert handle_means[0] == cfg.cost_client_fast_mean_ms
    assert set(handle_means[1:]) == {cfg.cost_client_slow_mean_ms}


def test_build_world_schedules_round_robin():
    cfg = small_config(n_transactions=8)
    built = build_world(cfg)
    inits = built.scenario.initiations
    assert [i.t_ms for i in inits] == [(k + 1) * cfg.tx_spacing_ms for k in range(8)]
    clients = built.node_ids[1:]
    assert [i.node_id for i in inits] == [clients[k % len(clients)] for k in range(8)]
    assert all(len(i.payload) == cfg.payload_bytes for i in inits)
    # challenge indices rotate within each client's enrolled list
    for node_id in clients:
        n_enrolled = len(built.records[node_id].pairs)
        own = [i.challenge_index for i in inits if i.node_id == node_id]
        assert own == [k % n_enrolled for k in range(len(own))]


def test_build_world_zero_threshold_disables_demotion():
    built = build_world(small_config(demotion_threshold=0))
    assert built.sim_config.demotion_threshold is None


def test_config_adversary_is_scheduled_after_traffic():
    cfg = small_config(adversary="fake-device", adversary_events=3)
    built = build_world(cfg)
    (adv,) = built.scenario.adversaries
    assert adv.kind == "fake-device"
    last_tx = max(i.t_ms for i in built.scenario.initiations)
    assert len(adv.schedule) == 3
    assert min(adv.schedule) > last_tx
    assert built.scenario.horizon() >= max(adv.schedule)


# --- scenario runs ------------------------------------------------------------------

def test_run_scenario_writes_consistent_artifacts(tmp_path):
    cfg = small_config(out_dir=str(tmp_path / "run"))
    output = run_scenario(cfg)

    report = output.report
    assert report.n_transactions == cfg.n_transactions
    assert report.accepted + sum(report.rejected_by_reason.values()) == cfg.n_transactions
    assert report.accepted == cfg.n_transactions  # clean network, everything lands

    assert sorted(p.name for p in (tmp_path / "run").iterdir()) == sorted(
        [f"chain_{nid:012x}.ndjson" for nid in built_ids(output)]
        + ["registry.ndjson", "events.ndjson", "metrics.json", "timings.csv"]
    )

    chains = [load_chain(output.files[f"chain_{nid:012x}"]) for nid in built_ids(output)]
    assert all(verify(chain) is None for chain in chains)
    raws = {output.files[f"chain_{nid:012x}"].read_bytes() for nid in built_ids(output)}
    assert len(raws) == 1  # every replica wrote the same bytes

    reg = load_registry(output.files["registry"])
    assert reg.trusted_node_ids == output.built.scenario.world.registry.trusted_node_ids

    metrics = json.loads(output.files["metrics"].read_text())
    assert metrics["accepted"] == report.accepted
    assert metrics["dt_tx_ms"]["n"] > 0

    csv_lines = output.files["timings"].read_text().splitlines()
    assert csv_lines[0] == CSV_HEADER
    assert len(csv_lines) == 1 + cfg.n_transactions


def built_ids(output):
    return output.built.node_ids


def test_csv_rows_match_metrics_timestamps(tmp_path):
    output = run_scenario(small_config(out_dir=str(tmp_path)), write_outputs=False)
    rows = timings_csv_lines(output.report)[1:]
    for row, entry in zip(rows, output.report.transactions):
        tx, seq, device_id, dt_sa, dt_ca, dt_tx, result, reason = row.split(",")
        assert int(tx) == entry["tx"]
        assert int(seq) == entry["seq"]
        assert device_id == entry["device_id"]
        assert result == "accepted" and reason == ""
        assert int(dt_sa) == entry["t_validated"] - entry["t_recv_trusted"]
        last_done = max(c["t_done"] for c in entry["clients"].values())
        last = [c for c in entry["clients"].values() if c["t_done"] == last_done][0]
        assert int(dt_ca) == last["t_done"] - last["t_recv"]
        assert int(dt_tx) == last["t_done"] - entry["t_init"]


def test_run_scenario_is_reproducible(tmp_path):
    cfg_a = small_config(out_dir=str(tmp_path / "a"))
    cfg_b = small_config(out_dir=str(tmp_path / "b"))
    out_a = run_scenario(cfg_a)
    out_b = run_scenario(cfg_b)
    for name in out_a.files:
        assert out_a.files[name].read_bytes() == out_b.files[name].read_bytes(), name


def test_run_scenario_with_drops_accounts_for_every_transaction(tmp_path):
    cfg = small_config(n_transactions=30, drop_rate=0.5, out_dir=str(tmp_path))
    report = run_scenario(cfg, write_outputs=False).report
    assert report.rejected_by_reason.get("lost", 0) > 0
    assert report.accepted + sum(report.rejected_by_reason.values()) == 30
    # lost rows leave the timing columns blank
    lost_rows = [line for line in timings_csv_lines(report)[1:] if ",lost," in line]
    assert lost_rows and all(row.split(",")[3:6] == ["", "", ""] for row in lost_rows)


def test_run_scenario_tamper_adversary_end_to_end(tmp_path):
    cfg = small_config(adversary="tamper", adversary_events=2, out_dir=str(tmp_path))
    output = run_scenario(cfg, write_outputs=False)
    report = output.report
    assert report.adversarial_accepted == 0
    assert report.n_adversarial > 0
    # the two tampered origin broadcasts swallowed transactions 0 and 1
    assert report.rejected_by_reason.get("lost") == 2
    assert report.accepted == cfg.n_transactions - 2


# --- figures of merit ----------------------------------------------------------------

def test_run_fom_calibration_structure():
    cfg = small_config(fom_n_devices=3, fom_pool_size=60, fom_n_challenges=20,
                       fom_n_reevals=5)
    doc = run_fom_calibration(cfg)
    assert set(doc) == {"population", "per_device", "screening"}
    assert len(doc["per_device"]) == 3
    assert doc["screening"]["pool_size"] == 60
    assert len(doc["screening"]["accepted_by_device"]) == 3
    pop = doc["population"]
    assert 30.0 < pop["uniqueness_pct"] < 70.0
    assert pop["reliability_pct"] < 10.0
    assert 30.0 < pop["randomness_pct"] < 70.0
    assert 0.0 <= pop["correlation_abs_mean"] <= 1.0


def test_run_fom_calibration_needs_two_devices():
    with pytest.raises(ConfigError):
        run_fom_calibration(small_config(fom_n_devices=1))


# --- benchmark ----------------------------------------------------------------------

def test_run_benchmark_reports_medians():
    cfg = small_config(bench_trials=5, pow_difficulty_bits=4, n_candidates=40)
    doc = run_benchmark(cfg)
    assert doc["n_trials"] == 5
    assert doc["pow_difficulty_bits"] == 4
    assert doc["stored_responses"] > 0
    assert doc["auth_median_ms"] > 0.0
    assert doc["pow_median_ms"] > 0.0
    assert doc["pop_pow_ratio"] == pytest.approx(
        doc["auth_median_ms"] / doc["pow_median_ms"])


# --- command line --------------------------------------------------------------------

def write_cfg(tmp_path, **keys) -> str:
    lines = [f"{k}={v}" for k, v in keys.items()]
    path = tmp_path / "cli.cfg"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


CLI_KEYS = dict(seed=11, n_transactions=6, n_clients=2, n_fast_clients=1,
                n_candidates=50, tx_spacing_ms=100, payload_bytes=16)


def test_cli_scenario_runs_and_writes(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path, **CLI_KEYS)
    out_dir = tmp_path / "cli-out"
    assert main(["scenario", "--config", cfg_path, "--out", str(out_dir)]) == 0
    stdout = capsys.readouterr().out
    assert "6 tx, 6 accepted" in stdout
    assert (out_dir / "metrics.json").exists()
    chain_files = sorted(out_dir.glob("chain_*.ndjson"))
    assert len(chain_files) == 3

    assert main(["verify-chain", str(chain_files[0])]) == 0
    assert capsys.readouterr().out.strip().endswith("ok")

    raw = bytearray(chain_files[0].read_bytes())
    raw[5] ^= 0x01
    chain_files[0].write_bytes(bytes(raw))
    assert main(["verify-chain", str(chain_files[0])]) == 1
    assert "invalid at height 0" in capsys.readouterr().out


def test_cli_seed_sweep(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path, **CLI_KEYS)
    out_dir = tmp_path / "sweep"
    rc = main(["scenario", "--config", cfg_path, "--out", str(out_dir),
               "--seeds", "3,4", "--parallel", "1"])
    assert rc == 0
    assert (out_dir / "seed-3" / "metrics.json").exists()
    assert (out_dir / "seed-4" / "metrics.json").exists()
    assert len(capsys.readouterr().out.splitlines()) == 2


def test_cli_rejects_bad_seed_list(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path, **CLI_KEYS)
    assert main(["scenario", "--config", cfg_path, "--seeds", "3,x"]) == 2
    assert "bad --seeds" in capsys.readouterr().err


def test_cli_bad_config_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("mystery_knob=1\n", encoding="utf-8")
    assert main(["scenario", "--config", str(path)]) == 2
    assert "unknown config key" in capsys.readouterr().err


def test_cli_missing_chain_exits_2(tmp_path, capsys):
    assert main(["verify-chain", str(tmp_path / "nope.ndjson")]) == 2
    assert "error:" in capsys.readouterr().err


def test_cli_fom_report_to_file(tmp_path):
    cfg_path = write_cfg(tmp_path, seed=5, fom_n_devices=2, fom_pool_size=40,
                         fom_n_challenges=10, fom_n_reevals=5)
    report_path = tmp_path / "fom.json"
    assert main(["fom", "--config", cfg_path, "--out", str(report_path)]) == 0
    doc = json.loads(report_path.read_text())
    assert "population" in doc and len(doc["per_device"]) == 2


def test_cli_bench_report_to_stdout(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path, seed=5, bench_trials=3, pow_difficulty_bits=4,
                         n_candidates=40)
    assert main(["bench", "--config", cfg_path]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_trials"] == 3 and doc["pop_pow_ratio"] > 0


def test_cli_requires_a_subcommand():
    with pytest.raises(SystemExit):
        main([])


def test_cli_seed_override_changes_artifacts(tmp_path):
    cfg_path = write_cfg(tmp_path, **CLI_KEYS)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["scenario", "--config", cfg_path, "--out", str(out_a)]) == 0
    assert main(["scenario", "--config", cfg_path, "--out", str(out_b),
                 "--seed", "12"]) == 0
    a = (out_a / "events.ndjson").read_bytes()
    b = (out_b / "events.ndjson").read_bytes()
    assert a != b
