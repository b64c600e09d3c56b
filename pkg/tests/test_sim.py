import math

import numpy as np
import pytest

from pnc_forge import sim
from pnc_forge.errors import ConfigError, ContractViolation
from pnc_forge.sim import (
    ExperimentConfig,
    ResultRecord,
    crossing_snr,
    emit_csv,
    load_config,
    make_config,
    parse_config_text,
    parse_csv,
    run_ber,
    run_mismap,
)


def cfg(**kw):
    base = dict(mods=("qpsk", "bpsk"), snr_db=(10.0,), trials=8, seed=3)
    base.update(kw)
    return make_config(base)


@pytest.mark.parametrize(
    "text, field",
    [
        ("mods = qpsk", "mods"),
        ("mods = qpsk,psk8", "mods"),
        ("scheme = comp", "scheme"),
        ("scheme = comp-quant(4)", "scheme"),
        ("snr_db = ", "snr_db"),
        ("trials = 0", "trials"),
        ("trials = many", "trials"),
        ("path_loss_db = 0,3", "path_loss_db"),
        ("pilot_len = -1", "pilot_len"),
        ("fec = ldpc", "fec"),
        ("block_len = 101", "block_len"),
        ("workers = 0", "workers"),
        ("pool = best", "pool"),
        ("colour = blue", "colour"),
        ("timing = maybe", "timing"),
    ],
)
def test_config_errors_name_the_field(text, field):
    with pytest.raises(ConfigError) as exc:
        make_config(parse_config_text(text))
    assert exc.value.field == field


def test_config_file_and_overrides(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# sweep\nmods = qpsk,qpsk\nsnr_db = 0:10:5  # grid\npath_loss_db = 0,3; 0,3\nscheme = comp-quant(24)\n")
    c = load_config(p, {"trials": "7", "pilot-len": "2"})
    assert c.mods == ("qpsk", "qpsk")
    assert c.snr_db == (0.0, 5.0, 10.0)
    assert c.path_loss_db == ((0.0, 3.0), (0.0, 3.0))
    assert (c.trials, c.pilot_len, c.bits_per_llr) == (7, 2, 3)
    assert load_config(p, {"snr_db": "1,4"}).snr_db == (1.0, 4.0)
    p.write_text("mods qpsk\n")
    with pytest.raises(ConfigError):
        load_config(p)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


def test_quant_budget_mapping():
    assert [cfg(scheme=f"comp-quant({b})").bits_per_llr for b in (48, 24, 8)] == [8, 4, 1]
    assert cfg(scheme="comp-ideal").bits_per_llr is None


def test_csv_round_trip_and_shape(tmp_path):
    recs = [
        ResultRecord(0.0, 12, 1000, 3.0, None, 0.0),
        ResultRecord(1.5, 1, 3, 24.0, 0.123456789012345, 1.25),
        ResultRecord(3.0, 0, 700, math.inf, 0.0, 0.0),
    ]
    p = tmp_path / "r.csv"
    emit_csv(recs, p)
    lines = p.read_text().splitlines()
    assert len(lines) == 4
    assert lines[0] == "snr_db,ber,bit_errors,bits_simulated,backhaul_bits_per_symbol,mismap_prob,wallclock_s"
    back = parse_csv(p)
    assert back == recs
    for a, b in zip(recs, back):
        assert float(f"{a.ber:.12g}") == float(f"{b.ber:.12g}")
    with pytest.raises(ContractViolation):
        emit_csv([], tmp_path / "e.csv")


def test_record_flags():
    r = ResultRecord(0.0, 99, 1000, 3.0)
    assert r.ber == 0.099 and r.low_confidence
    assert not ResultRecord(0.0, 100, 1000, 3.0).low_confidence
    assert ResultRecord(0.0, 500, 1000, 3.0, blocks=20, error_events=20).low_confidence


def test_high_snr_is_error_free():
    for scheme in ("pnc", "comp-ideal"):
        recs = run_ber(cfg(snr_db=(60.0,), trials=25, scheme=scheme, fec="none"))
        assert recs[0].bit_errors == 0 and recs[0].bits_simulated >= 7500
    recs = run_ber(cfg(snr_db=(60.0,), trials=25))
    assert recs[0].bit_errors == 0


def test_uncoded_high_snr_over_1e5_bits():
    recs = run_ber(cfg(snr_db=(60.0,), trials=334, fec="none", mods=("qpsk", "bpsk")))
    assert recs[0].bits_simulated >= 100_000 and recs[0].bit_errors == 0


def test_backhaul_column_per_scheme():
    assert run_ber(cfg(scheme="pnc"))[0].backhaul_bits_per_symbol == 3.0
    assert run_ber(cfg(mods=("qpsk", "qpsk")))[0].backhaul_bits_per_symbol == 4.0
    assert run_ber(cfg(scheme="comp-ideal"))[0].backhaul_bits_per_symbol == math.inf
    for b in (48, 24, 8):
        expect = 2 * 3 * (b // 6)
        assert run_ber(cfg(scheme=f"comp-quant({b})"))[0].backhaul_bits_per_symbol == expect


def test_stops_at_target_error_events():
    recs = run_ber(cfg(snr_db=(0.0,), trials=500, target_errors=5, chunk_blocks=4))
    assert recs[0].error_events >= 5
    assert recs[0].blocks < 500 and recs[0].blocks % 4 == 0
    assert recs[0].bits_simulated == recs[0].blocks * 3 * 44


def test_seed_changes_outcome_and_same_seed_repeats():
    a = run_ber(cfg(snr_db=(5.0,), trials=10))
    assert run_ber(cfg(snr_db=(5.0,), trials=10)) == a
    assert run_ber(cfg(snr_db=(5.0,), trials=10, seed=4)) != a


def test_workers_do_not_change_results(tmp_path, monkeypatch):
    c = cfg(snr_db=(6.0, 12.0), trials=24, chunk_blocks=5, target_errors=7)
    paths = []
    for w in ("1", "3"):
        monkeypatch.setenv("PNC_FORGE_WORKERS", w)
        paths.append(tmp_path / f"w{w}.csv")
        emit_csv(run_ber(c), paths[-1])
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_worker_env_validation(monkeypatch):
    monkeypatch.setenv("PNC_FORGE_WORKERS", "x")
    with pytest.raises(ConfigError):
        sim.effective_workers(cfg())
    monkeypatch.setenv("PNC_FORGE_WORKERS", "0")
    with pytest.raises(ConfigError):
        sim.effective_workers(cfg())
    monkeypatch.setenv("PNC_FORGE_WORKERS", "")
    assert sim.effective_workers(cfg(workers=2)) == 2


def test_mismap_long_pilots_high_snr():
    recs = run_mismap(cfg(snr_db=(40.0,), trials=30, pilot_len=64))
    assert recs[0].mismap_prob == 0.0
    assert recs[0].blocks == 30


def test_mismap_short_pilots_low_snr_mismaps_often():
    recs = run_mismap(cfg(snr_db=(0.0,), trials=60, pilot_len=1))
    assert recs[0].mismap_prob > 0.2


def test_mismap_requires_pilots():
    with pytest.raises(ConfigError):
        run_mismap(cfg(pilot_len=0))


def test_cpu_side_decoding_option_runs():
    recs = run_ber(cfg(snr_db=(60.0,), trials=5, pnc_decode="cpu"))
    assert recs[0].bit_errors == 0


def test_crossing_snr_interpolation():
    recs = [ResultRecord(0.0, 100, 10_000, 3.0), ResultRecord(10.0, 1, 10_000, 3.0)]
    assert crossing_snr(recs) == pytest.approx(5.0)
    assert crossing_snr(recs, target=1e-6) is None


def test_timing_flag():
    assert run_ber(cfg(trials=2))[0].wallclock_s == 0.0
    assert run_ber(cfg(trials=2, timing=True))[0].wallclock_s > 0.0
