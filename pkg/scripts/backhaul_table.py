"""Backhaul bits per symbol for PNC and the CoMP baselines."""

import argparse

from pnc_forge import sim
from pnc_forge.errors import ConfigError
from pnc_forge.mapper import cached_store


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mods", action="append", default=None)
    ap.add_argument("--budgets", default="48,24,8")
    args = ap.parse_args()
    pairs = args.mods or ["qpsk,bpsk", "qpsk,qpsk", "qam16,qpsk", "qam16,qam16"]
    print("mods,scheme,bits_per_llr,backhaul_bits_per_symbol")
    for mods in pairs:
        tag = mods.replace(",", "+")
        m_s = cached_store(tuple(mods.split(","))).m_s
        print(f"{tag},pnc,,{m_s}")
        print(f"{tag},comp-ideal,,inf")
        for b in args.budgets.split(","):
            try:
                cfg = sim.make_config({"mods": tuple(mods.split(",")), "scheme": f"comp-quant({b})"})
            except ConfigError as exc:
                print(f"{tag},comp-quant({b}),,invalid: {exc.args[0].replace(',', ';')}")
                continue
            print(f"{tag},comp-quant({b}),{cfg.bits_per_llr},{cfg.n_aps * m_s * cfg.bits_per_llr}")


if __name__ == "__main__":
    main()
