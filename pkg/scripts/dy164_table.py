"""164Dy parameter table with both evaluation routes for the orbital integrals."""

import argparse

from fourwell import physparams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model-hopping", type=float, default=physparams.DY164_TABLE_HOPPING,
                    help="J/h (Hz) used for xi and Omega_max")
    ap.add_argument("--n", type=int, default=16)
    args = ap.parse_args()
    table = physparams.preset_dy164(model_hopping=args.model_hopping, total_n=args.n)
    print(physparams.table_text(table))
    d = table.derived
    print(f"J/h closed form {d.j:.10g} Hz, quadrature {d.j_quadrature:.10g} Hz")
    print(f"W closed form {d.w:.10g}, quadrature {d.w_quadrature:.10g}")
    bad = table.breaches()
    if bad:
        print("outside tolerance: " + ", ".join(r.name for r in bad))
    raise SystemExit(2 if bad else 0)


if __name__ == "__main__":
    main()
