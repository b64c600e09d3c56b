"""Command-line entry point ``pnc-forge``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import mapper, sfs, sim
from .errors import ConfigError, ContractViolation, InvalidChannelError, PncError
from .modem import parse_mods

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _complex_pair(text: str) -> tuple[complex, complex]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse channel {text!r}", "h") from None
    if len(vals) != 4:
        raise ConfigError("channel needs re,im,re,im", "h")
    return complex(vals[0], vals[1]), complex(vals[2], vals[3])


def cmd_sfs_enumerate(args) -> int:
    table = sfs.build_sfs_table(parse_mods(args.mods))
    print("index,re,im,witness_count,representative_index")
    for i, st in enumerate(table.extended_states):
        rep = table.image_map[i]
        if args.reduced and rep != i:
            continue
        print(f"{i},{st.ratio.real + 0.0!r},{st.ratio.imag + 0.0!r},{len(st.witnesses)},{rep}")
    return EXIT_OK


def cmd_search_offline(args) -> int:
    store = mapper.offline_search(parse_mods(args.mods))
    mapper.save_store(store, args.out)
    n = sum(len(v) for by_l in store.candidates.values() for v in by_l.values())
    print(f"wrote {n} candidates for {len(store.representatives)} states to {args.out}")
    return EXIT_OK


def cmd_select(args) -> int:
    store = mapper.load_store(args.store)
    hs = [_complex_pair(args.h1), _complex_pair(args.h2)]
    res = mapper.select_or_fallback(hs, store, pool=args.pool)
    print(f"fallback={res.fallback}")
    for j, (G, d, k) in enumerate(zip(res.matrices, res.dmins, res.sfs_index), 1):
        print(f"ap{j} sfs={k} dmin={d!r} G={G.to_hex()}")
        for line in str(G).splitlines():
            print(f"  {line}")
    print(f"global={res.global_matrix.to_hex()}")
    return EXIT_OK


def _overrides(pairs: list[str] | None, flags: dict[str, str]) -> dict[str, str]:
    out = dict(flags)
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_simulate(args) -> int:
    flags = {k: getattr(args, k) for k in sim.CONFIG_KEYS if getattr(args, k, None) is not None}
    cfg = sim.load_config(args.config, _overrides(args.set, flags))
    runner = sim.run_ber if args.kind == "ber" else sim.run_mismap
    records = runner(cfg)
    sim.emit_csv(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pnc-forge", description="Adaptive binary PNC for two-stage N-MIMO uplinks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sfs", help="singular fade states")
    ss = s.add_subparsers(dest="action", required=True, parser_class=_Parser)
    e = ss.add_parser("enumerate")
    e.add_argument("--mods", required=True)
    e.add_argument("--reduced", action="store_true")
    e.set_defaults(func=cmd_sfs_enumerate)

    s = sub.add_parser("search", help="off-line candidate search")
    ss = s.add_subparsers(dest="action", required=True, parser_class=_Parser)
    o = ss.add_parser("offline")
    o.add_argument("--mods", required=True)
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_search_offline)

    s = sub.add_parser("select", help="on-line mapping selection for one channel pair")
    s.add_argument("--store", required=True)
    s.add_argument("--h1", required=True, help="AP 1 channel as re,im,re,im")
    s.add_argument("--h2", required=True, help="AP 2 channel as re,im,re,im")
    s.add_argument("--pool", choices=("nearest", "all", "free"), default="nearest")
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("simulate", help="Monte Carlo experiments")
    ss = s.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in ("ber", "mismap"):
        k = ss.add_parser(kind)
        k.add_argument("--config", required=True)
        k.add_argument("--out", required=True)
        k.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        for key in sim.CONFIG_KEYS:
            k.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, metavar="VALUE")
        k.set_defaults(func=cmd_simulate)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PncError, ContractViolation, InvalidChannelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        print(f"unexpected failure: {exc!r}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
