"""BER against SNR for several schemes and modulation pairs, one CSV per curve.

    python scripts/ber_sweep.py --out results/ber --trials 20000 \
        --curve qpsk,bpsk:pnc --curve qpsk,qpsk:pnc --curve qpsk,bpsk:comp-ideal
"""

import argparse
from pathlib import Path

from pnc_forge import sim


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--curve", action="append", required=True, help="mods:scheme, e.g. qpsk,bpsk:comp-quant(24)")
    ap.add_argument("--snr", default="0:36:3")
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/ber"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for curve in args.curve:
        mods, scheme = curve.split(":", 1)
        cfg = sim.make_config(sim.parse_overrides(
            {"mods": mods, "scheme": scheme, "snr_db": args.snr, "trials": str(args.trials), "seed": str(args.seed)}
        ))
        records = sim.run_ber(cfg)
        name = f"{mods.replace(',', '+')}_{scheme.replace('(', '').replace(')', '')}.csv"
        sim.emit_csv(records, args.out / name)
        cross = sim.crossing_snr(records)
        print(f"{curve}: BER 1e-3 at {'n/a' if cross is None else f'{cross:.2f} dB'} -> {args.out / name}")


if __name__ == "__main__":
    main()
