"""Monte Carlo experiments: BER sweeps and mis-mapping probability.

Every fading block draws from its own RNG stream keyed by ``(seed, snr index,
block index)``. Blocks are processed in fixed-size chunks and the stopping
rule is checked only between chunks, so results do not depend on how many
worker processes share the chunk.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import detect, fec, phy
from .errors import ConfigError, ContractViolation, PncError
from .mapper import CandidateStore, SelectionResult, cached_store, select_or_fallback
from .modem import parse_mods
from .superposition import partition_clusters, superimpose

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "snr_db", "ber", "bit_errors", "bits_simulated",
    "backhaul_bits_per_symbol", "mismap_prob", "wallclock_s",
)
CONFIDENT_ERRORS = 100
WORKERS_ENV = "PNC_FORGE_WORKERS"

_QUANT_RE = re.compile(r"^comp-quant\((\d+)\)$")


@dataclass(frozen=True)
class ExperimentConfig:
    mods: tuple[str, ...] = ("qpsk", "bpsk")
    scheme: str = "pnc"  # pnc | comp-ideal | comp-quant(B), B = total backhaul bits per symbol
    snr_db: tuple[float, ...] = (0.0, 5.0, 10.0)
    trials: int = 1000  # fading blocks per SNR point, upper bound
    target_errors: int = CONFIDENT_ERRORS  # error events = blocks with at least one bit error
    path_loss_db: tuple[tuple[float, ...], ...] = ((0.0, 3.0), (0.0, 3.0))
    pilot_len: int = 0  # 0 = genie channel knowledge
    block_len: int = 100
    fec: str = "conv_k7"
    seed: int = 1
    workers: int = 1
    pool: str = "nearest"
    pnc_decode: str = "ap"  # ap: soft decoding of NCV codewords at each AP; cpu: hard NCVs, decode after recovery
    llr_clip: float = detect.LLR_MAX
    quant_range: float = detect.QUANT_RANGE
    chunk_blocks: int = 16
    timing: bool = False

    def __post_init__(self):
        validate(self)

    @property
    def n_aps(self) -> int:
        return len(self.path_loss_db)

    @property
    def m_s(self) -> int:
        return cached_store(self.mods).m_s

    @property
    def quant_budget(self) -> int | None:
        m = _QUANT_RE.match(self.scheme)
        return int(m.group(1)) if m else None

    @property
    def bits_per_llr(self) -> int | None:
        budget = self.quant_budget
        return None if budget is None else budget // (self.n_aps * self.m_s)

    @property
    def payload_len(self) -> int:
        return fec.K7.payload_length(self.block_len) if self.fec == "conv_k7" else self.block_len


def validate(cfg: ExperimentConfig) -> None:
    if len(cfg.mods) != 2:
        raise ConfigError("exactly two MTs are supported", "mods")
    parse_mods(cfg.mods)
    if cfg.scheme not in ("pnc", "comp-ideal") and not _QUANT_RE.match(cfg.scheme):
        raise ConfigError(f"unknown scheme {cfg.scheme!r}", "scheme")
    if not cfg.snr_db:
        raise ConfigError("SNR grid is empty", "snr_db")
    if any(not math.isfinite(s) for s in cfg.snr_db):
        raise ConfigError("SNR values must be finite", "snr_db")
    if cfg.trials < 1:
        raise ConfigError("need at least one trial", "trials")
    if cfg.target_errors < 1:
        raise ConfigError("target must be positive", "target_errors")
    if cfg.n_aps != 2 or any(len(row) != len(cfg.mods) for row in cfg.path_loss_db):
        raise ConfigError("need one row per AP (2) and one entry per MT", "path_loss_db")
    if cfg.pilot_len < 0:
        raise ConfigError("pilot length cannot be negative", "pilot_len")
    if cfg.fec not in ("none", "conv_k7"):
        raise ConfigError(f"unknown FEC mode {cfg.fec!r}", "fec")
    if cfg.block_len < 1:
        raise ConfigError("block length must be positive", "block_len")
    if cfg.fec == "conv_k7":
        try:
            fec.K7.payload_length(cfg.block_len)
        except ContractViolation as exc:
            raise ConfigError(str(exc), "block_len") from None
    if cfg.workers < 1:
        raise ConfigError("need at least one worker", "workers")
    if cfg.pool not in ("nearest", "all", "free"):
        raise ConfigError(f"unknown pool {cfg.pool!r}", "pool")
    if cfg.pnc_decode not in ("ap", "cpu"):
        raise ConfigError(f"unknown decode point {cfg.pnc_decode!r}", "pnc_decode")
    if not cfg.llr_clip > 0:
        raise ConfigError("must be positive", "llr_clip")
    if not cfg.quant_range > 0:
        raise ConfigError("must be positive", "quant_range")
    if cfg.chunk_blocks < 1:
        raise ConfigError("must be positive", "chunk_blocks")
    budget = cfg.quant_budget
    if budget is not None:
        per_symbol = cfg.n_aps * sum(_order(m) for m in cfg.mods)
        if budget < per_symbol:
            raise ConfigError(f"budget {budget} is below one bit per LLR ({per_symbol})", "scheme")


def _order(mod: str) -> int:
    from .modem import SCHEMES, scheme_name

    return SCHEMES[scheme_name(mod)]


# -- config text ---------------------------------------------------------------


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(" ", "").split(",") if x)


def _grid(text: str) -> tuple[float, ...]:
    """Comma list, or ``start:stop:step`` with stop included."""
    if ":" in text:
        a, b, s = (float(x) for x in text.split(":"))
        n = int(math.floor((b - a) / s + 1e-9)) + 1
        return tuple(round(a + i * s, 10) for i in range(max(n, 0)))
    return _floats(text)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_PARSERS = {
    "mods": parse_mods,
    "scheme": str.strip,
    "snr_db": _grid,
    "trials": int,
    "target_errors": int,
    "path_loss_db": lambda t: tuple(_floats(row) for row in t.split(";") if row.strip()),
    "pilot_len": int,
    "block_len": int,
    "fec": str.strip,
    "seed": int,
    "workers": int,
    "pool": str.strip,
    "pnc_decode": str.strip,
    "llr_clip": float,
    "quant_range": float,
    "chunk_blocks": int,
    "timing": _bool,
}
CONFIG_KEYS = tuple(f.name for f in dataclasses.fields(ExperimentConfig))
assert set(CONFIG_KEYS) == set(_PARSERS)


def parse_config_text(text: str) -> dict[str, object]:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        values.update(parse_overrides({key: val}))
    return values


def parse_overrides(raw: dict[str, str]) -> dict[str, object]:
    out = {}
    for key, val in raw.items():
        key = key.replace("-", "_")
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", key)
        try:
            out[key] = _PARSERS[key](val)
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"cannot parse {val!r}: {exc}", key) from None
    return out


def make_config(values: dict[str, object]) -> ExperimentConfig:
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", "config") from None
    values = parse_config_text(text)
    values.update(parse_overrides(overrides or {}))
    return make_config(values)


def effective_workers(cfg: ExperimentConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env is None or not env.strip():
        return cfg.workers
    try:
        n = int(env)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer", "workers") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be positive", "workers")
    return n


# -- records ---------------------------------------------------------------------


@dataclass(frozen=True)
class ResultRecord:
    snr_db: float
    bit_errors: int
    bits_simulated: int
    backhaul_bits_per_symbol: float
    mismap_prob: float | None = None
    wallclock_s: float = 0.0
    blocks: int = field(default=0, compare=False)
    error_events: int = field(default=0, compare=False)

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_simulated if self.bits_simulated else math.nan

    @property
    def low_confidence(self) -> bool:
        """Fewer than 100 bit errors, or (when known) fewer than 100 erroneous blocks."""
        return self.bit_errors < CONFIDENT_ERRORS or (self.blocks > 0 and self.error_events < CONFIDENT_ERRORS)


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_csv(records: Sequence[ResultRecord], path: str | Path) -> None:
    if not records:
        raise ContractViolation("refusing to write a CSV with no records")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([
                _fmt(r.snr_db), _fmt(r.ber), r.bit_errors, r.bits_simulated,
                _fmt(r.backhaul_bits_per_symbol),
                "" if r.mismap_prob is None else _fmt(r.mismap_prob),
                _fmt(r.wallclock_s),
            ])


def parse_csv(path: str | Path) -> list[ResultRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ContractViolation("not a result CSV")
    out = []
    for row in rows[1:]:
        d = dict(zip(CSV_COLUMNS, row))
        out.append(ResultRecord(
            snr_db=float(d["snr_db"]),
            bit_errors=int(d["bit_errors"]),
            bits_simulated=int(d["bits_simulated"]),
            backhaul_bits_per_symbol=float(d["backhaul_bits_per_symbol"]),
            mismap_prob=float(d["mismap_prob"]) if d["mismap_prob"] else None,
            wallclock_s=float(d["wallclock_s"]),
        ))
    return out


# -- one fading block -----------------------------------------------------------


@dataclass(frozen=True)
class BlockOutcome:
    bit_errors: int
    bits: int
    backhaul: float
    mismapped: bool | None = None


def block_rng(seed: int, snr_idx: int, block_idx: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(snr_idx, block_idx)))


def _backhaul(cfg: ExperimentConfig, sel: SelectionResult | None, m_s: int) -> float:
    if cfg.scheme == "pnc":
        return float(detect.pnc_backhaul_bits(sel.rows_per_ap))
    if cfg.scheme == "comp-ideal":
        return math.inf
    return float(detect.comp_backhaul_bits(cfg.n_aps, m_s, cfg.bits_per_llr))


def _source_bits(cfg: ExperimentConfig, rng, m_s: int) -> tuple[np.ndarray, np.ndarray]:
    """(payload bits, coded bits), both one row per joint-message bit position."""
    u = rng.integers(0, 2, size=(m_s, cfg.payload_len), dtype=np.uint8)
    c = fec.conv_encode(u) if cfg.fec == "conv_k7" else u
    return u, c


def _decode_streams(llrs: np.ndarray, cfg: ExperimentConfig) -> np.ndarray:
    """Per-stream decisions from (streams, block_len) LLRs."""
    if cfg.fec == "conv_k7":
        return fec.viterbi_decode(llrs)
    return detect.ncv_hard(llrs)


def simulate_block(cfg: ExperimentConfig, snr_idx: int, block_idx: int, mismap: bool = False) -> BlockOutcome:
    store = cached_store(cfg.mods)
    table = store.table
    m_s = store.m_s
    rng = block_rng(cfg.seed, snr_idx, block_idx)
    noise = phy.NoiseModel(phy.sigma2_for_snr(cfg.snr_db[snr_idx], cfg.path_loss_db))
    H = phy.draw_channel(rng, cfg.path_loss_db, cfg.n_aps, len(cfg.mods), cfg.block_len).h
    H_hat = phy.estimate_channel(cfg.pilot_len, H, noise, rng) if cfg.pilot_len > 0 else H

    u, c = _source_bits(cfg, rng, m_s)
    weights = 1 << np.arange(m_s - 1, -1, -1)
    b = (weights @ c.astype(np.int64))  # joint message per symbol
    symbols = table.symbols[b]
    received = [phy.transmit(symbols, H[j], noise, rng) for j in range(cfg.n_aps)]

    sel = None
    mismapped = None
    if cfg.scheme == "pnc" or mismap:
        sel = select_or_fallback(list(H_hat), store, pool=cfg.pool)
        if mismap:
            genie = select_or_fallback(list(H), store, pool=cfg.pool)
            mismapped = genie.key != sel.key

    if cfg.scheme == "pnc":
        ncvs = []
        for j, G in enumerate(sel.matrices):
            sc = superimpose(H_hat[j], table)
            llr = detect.ncv_llr(received[j], sc, partition_clusters(G, table), noise.sigma2, clip=cfg.llr_clip).T
            if cfg.fec == "conv_k7" and cfg.pnc_decode == "ap":
                ncvs.append(fec.viterbi_decode(llr))
            else:
                ncvs.append(detect.ncv_hard(llr))
        b_hat = detect.cpu_decode(ncvs, sel.global_matrix)
        if cfg.fec == "conv_k7" and cfg.pnc_decode == "cpu":
            b_hat = fec.viterbi_decode(fec.hard_to_llr(b_hat))
    else:
        total = np.zeros((cfg.block_len, m_s))
        for j in range(cfg.n_aps):
            llr = detect.comp_source_llr(received[j], H_hat[j], table, noise.sigma2, clip=cfg.llr_clip)
            if cfg.bits_per_llr is not None:
                llr, _ = detect.quantize_llr(llr, cfg.bits_per_llr, cfg.quant_range)
            total += llr
        b_hat = _decode_streams(total.T, cfg)

    errors = int(np.count_nonzero(b_hat != u))
    return BlockOutcome(errors, int(u.size), _backhaul(cfg, sel, m_s), mismapped)


def _block_task(args) -> BlockOutcome:
    cfg, snr_idx, block_idx, mismap = args
    return simulate_block(cfg, snr_idx, block_idx, mismap)


# -- sweeps -----------------------------------------------------------------------


def _sweep(cfg: ExperimentConfig, mismap: bool) -> list[ResultRecord]:
    workers = effective_workers(cfg)
    cached_store(cfg.mods)  # build before forking
    executor = ProcessPoolExecutor(workers) if workers > 1 else None
    records = []
    try:
        for si, snr in enumerate(cfg.snr_db):
            t0 = time.perf_counter()
            errors = bits = blocks = mism = events = 0
            backhaul = None
            while blocks < cfg.trials:
                chunk = range(blocks, min(blocks + cfg.chunk_blocks, cfg.trials))
                tasks = [(cfg, si, k, mismap) for k in chunk]
                if executor is None:
                    outcomes = [_block_task(t) for t in tasks]
                else:
                    outcomes = list(executor.map(_block_task, tasks, chunksize=max(1, len(tasks) // workers)))
                for o in outcomes:
                    errors += o.bit_errors
                    events += o.bit_errors > 0
                    bits += o.bits
                    mism += bool(o.mismapped)
                    # PNC load is m_s whatever the split, so every block reports the same value
                    backhaul = o.backhaul if backhaul is None else max(backhaul, o.backhaul)
                blocks += len(chunk)
                if not mismap and events >= cfg.target_errors:
                    break
            elapsed = time.perf_counter() - t0 if cfg.timing else 0.0
            records.append(ResultRecord(
                snr_db=float(snr), bit_errors=errors, bits_simulated=bits,
                backhaul_bits_per_symbol=float(backhaul),
                mismap_prob=mism / blocks if mismap else None,
                wallclock_s=elapsed, blocks=blocks, error_events=events,
            ))
            log.info("snr %.2f dB: %d errors / %d bits, %d of %d blocks in error", snr, errors, bits, events, blocks)
    finally:
        if executor is not None:
            executor.shutdown()
    return records


def run_ber(cfg: ExperimentConfig) -> list[ResultRecord]:
    """BER per SNR point; stops at ``trials`` blocks or ``target_errors`` erroneous blocks."""
    return _sweep(cfg, mismap=False)


def run_mismap(cfg: ExperimentConfig) -> list[ResultRecord]:
    """Fraction of blocks whose pilot-based selection differs from the genie one.

    Always runs the full ``trials`` blocks so the probability estimate has a
    fixed sample size; the data chain runs with the estimated channel too, so
    the BER columns show the estimation penalty.
    """
    if cfg.pilot_len < 1:
        raise ConfigError("mis-mapping needs pilot_len >= 1", "pilot_len")
    return _sweep(cfg, mismap=True)


def crossing_snr(records: Iterable[ResultRecord], target: float = 1e-3) -> float | None:
    """SNR where the BER curve first drops to ``target``, interpolated in log-BER."""
    pts = sorted((r.snr_db, r.ber) for r in records)
    prev = None
    for snr, ber in pts:
        if ber <= target:
            if prev is None:
                return snr
            s0, b0 = prev
            if b0 <= 0:
                return snr
            lo = math.log10(max(ber, 1e-12))
            frac = (math.log10(b0) - math.log10(target)) / (math.log10(b0) - lo)
            return s0 + frac * (snr - s0)
        prev = (snr, ber)
    return None


__all__ = [
    "ExperimentConfig", "ResultRecord", "CONFIG_KEYS", "PncError",
    "load_config", "make_config", "parse_config_text", "parse_overrides",
    "run_ber", "run_mismap", "emit_csv", "parse_csv", "simulate_block", "crossing_snr",
]
