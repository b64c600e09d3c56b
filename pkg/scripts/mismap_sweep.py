"""Mis-mapping probability against SNR for a set of pilot lengths."""

import argparse
from pathlib import Path

from pnc_forge import sim


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mods", default="qpsk,bpsk")
    ap.add_argument("--snr", default="0:30:5")
    ap.add_argument("--pilots", default="1,2,5,10")
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--out", type=Path, default=Path("results/mismap"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for n_p in args.pilots.split(","):
        cfg = sim.make_config(sim.parse_overrides(
            {"mods": args.mods, "snr_db": args.snr, "pilot_len": n_p, "trials": str(args.trials)}
        ))
        records = sim.run_mismap(cfg)
        sim.emit_csv(records, args.out / f"pilot{n_p}.csv")
        row = " ".join(f"{r.snr_db:g}:{r.mismap_prob:.3f}" for r in records)
        print(f"pilot {n_p}: {row}")


if __name__ == "__main__":
    main()
