"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 infeasible spectral efficiency.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

from .channel import build_channel_matrix, load_scenario
from .errors import ConfigError, InfeasibleConstraintError, InvalidParameterError, NotApplicableError
from .modulation import ModOrderCombo
from .montecarlo import SimConfig, simulate_ser
from .optimizer import asm_search, cr_asm_search
from .ser import average_ser, sigma_to_snr_db, snr_db_to_sigma
from .sweep import SCHEMES, SweepSpec, rows_to_csv, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

ADAPTIVE_CHOICES = ("ASM", "CR-ASM")


def _combo(text):
    try:
        return ModOrderCombo.parse(text)
    except InvalidParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _schemes(text):
    return tuple(s.strip().upper() for s in text.split(",") if s.strip())


def _sigma(args, peak):
    if args.sigma is not None:
        return args.sigma
    if args.snr_db is None:
        raise ConfigError("give either --sigma or --snr-db")
    return snr_db_to_sigma(args.snr_db, peak)


def _write_json(doc, path):
    text = json.dumps(doc, indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_channel(args):
    scenario = load_scenario(args.scenario)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        H = build_channel_matrix(scenario)
    g = H.gains
    print(f"H ({H.n_r} PD x {H.n_t} LED), scenario {scenario.name}")
    print("       " + "".join(f"{'LED' + str(j + 1):>14}" for j in range(H.n_t)))
    for i in range(H.n_r):
        print(f"PD{i + 1:<4} " + "".join(f"{g[i, j]:>14.6e}" for j in range(H.n_t)))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if args.json:
        doc = {"scenario": scenario.name, **H.to_dict(), "dark_columns": list(H.dark_columns)}
        _write_json(doc, args.json)
    return EXIT_OK


def cmd_theory(args):
    scenario = load_scenario(args.scenario)
    H = build_channel_matrix(scenario)
    sigma = _sigma(args, scenario.peak_intensity)
    b = average_ser(H, args.combo, scenario.peak_intensity, sigma)
    print(f"combo {args.combo}  sigma {sigma:.6e}  SNR {sigma_to_snr_db(sigma, scenario.peak_intensity):.2f} dB")
    for j, (e, w) in enumerate(zip(b.per_led, b.weights)):
        print(f"  LED{j + 1}: Pr={w:.4f}  P_a={e.p_a:.6e}  P_s={e.p_s:.6e}  P_e={e.p_e:.6e}")
    print(f"average SER {b.average:.6e}  (ln {b.log_average:.4f})")
    if args.json:
        _write_json(b.to_dict(), args.json)
    return EXIT_OK


def cmd_simulate(args):
    scenario = load_scenario(args.scenario)
    H = build_channel_matrix(scenario)
    peak = scenario.peak_intensity
    sigma = _sigma(args, peak)
    cfg = SimConfig(trials=args.trials, seed=args.seed, sigma=sigma,
                    early_stop_errors=args.early_stop_errors, batch_size=args.batch_size)
    res = simulate_ser(H, args.combo, peak, cfg, workers=args.workers)
    theory = average_ser(H, args.combo, peak, sigma).average
    print(f"combo {args.combo}  SNR {sigma_to_snr_db(sigma, peak):.2f} dB  trials {res.trials_run}")
    print(f"simulated SER {res.ser_estimate:.6e} +/- {res.std_error:.2e}   theory {theory:.6e}")
    print(f"spatial error rate {res.spatial_error_rate:.6e}  "
          f"signal error | spatial ok {res.signal_error_rate_given_spatial_correct:.6e}")
    if args.json:
        _write_json({"theory": theory, "sigma": sigma, **res.to_dict()}, args.json)
    return EXIT_OK


def cmd_optimize(args):
    scenario = load_scenario(args.scenario)
    H = build_channel_matrix(scenario)
    peak = scenario.peak_intensity
    sigma = _sigma(args, peak)
    search = asm_search if args.scheme == "ASM" else cr_asm_search
    report = search(H, H.n_t, args.m, peak, sigma, min_order=args.min_order, workers=args.workers)
    note = "  (SSK-equivalent)" if report.ssk_equivalent else ""
    print(f"{report.scheme} best combo {report.best_combo}{note}")
    print(f"SER {report.best_ser:.6e} (ln {report.best_log_ser:.4f}) at "
          f"SNR {sigma_to_snr_db(sigma, peak):.2f} dB")
    print(f"candidates evaluated {report.candidates_evaluated} of {report.candidates_total}")
    for rank, r in enumerate(report.ranked, 1):
        print(f"  {rank:>3}. {str(r.combo):<16} SER {r.ser:.6e}  ln {r.log_ser:10.4f}  V {r.variance:g}")
    if args.json:
        _write_json(report.to_dict(), args.json)
    return EXIT_OK


def _sweep_spec(args, schemes):
    return SweepSpec(
        scenario_path=args.scenario,
        snr_start_db=args.snr_start_db,
        snr_stop_db=args.snr_stop_db,
        snr_step_db=args.snr_step_db,
        schemes=schemes,
        spectral_efficiency=args.m,
        combo_override=args.combo_override,
        trials=args.trials,
        seed=args.seed,
        early_stop_errors=args.early_stop_errors,
        batch_size=args.batch_size,
        operating_snr_db=args.operating_snr_db,
        output_path=args.output_path,
    )


def cmd_sweep(args):
    spec = _sweep_spec(args, args.schemes)
    rows = run_sweep(spec, workers=args.workers)
    if not spec.output_path:
        sys.stdout.write(rows_to_csv(rows))
    else:
        print(f"wrote {len(rows)} rows to {spec.output_path}")
    return EXIT_OK


def cmd_compare(args):
    args.schemes = SCHEMES
    return cmd_sweep(args)


def _add_noise(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--sigma", type=float, help="noise standard deviation")
    g.add_argument("--snr-db", type=float, help="SNR = 10 log10(P^2 / sigma^2)")


def _add_sim(p, trials_default):
    p.add_argument("--trials", type=int, default=trials_default)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--early-stop-errors", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asmvlc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    scen_help = "scenario JSON path or a bundled name (scenario1..scenario4)"

    p = sub.add_parser("channel", help="print the channel matrix")
    p.add_argument("scenario", help=scen_help)
    p.add_argument("--json", help="write the matrix as JSON to this path ('-' for stdout)")
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("theory", help="closed-form SER for one combination")
    p.add_argument("scenario", help=scen_help)
    p.add_argument("--combo", type=_combo, required=True)
    _add_noise(p)
    p.add_argument("--json")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("simulate", help="Monte-Carlo SER for one combination")
    p.add_argument("scenario", help=scen_help)
    p.add_argument("--combo", type=_combo, required=True)
    _add_noise(p)
    _add_sim(p, 1_000_000)
    p.add_argument("--json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="choose per-LED orders for a spectral efficiency")
    p.add_argument("scenario", help=scen_help)
    p.add_argument("--m", type=float, required=True, help="spectral efficiency, bit/s/Hz")
    p.add_argument("--scheme", type=str.upper, choices=ADAPTIVE_CHOICES, default="ASM")
    p.add_argument("--min-order", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    _add_noise(p)
    p.add_argument("--json")
    p.set_defaults(func=cmd_optimize)

    for name, func in (("sweep", cmd_sweep), ("compare", cmd_compare)):
        p = sub.add_parser(name, help="SNR sweep to CSV" if name == "sweep"
                           else "sweep all four schemes")
        p.add_argument("scenario", help=scen_help)
        p.add_argument("--snr-start-db", type=float, required=True)
        p.add_argument("--snr-stop-db", type=float, required=True)
        p.add_argument("--snr-step-db", type=float, default=1.0)
        if name == "sweep":
            p.add_argument("--schemes", type=_schemes, default=SCHEMES,
                           help="comma-separated subset of ASM,CR-ASM,SMS,SSK")
        p.add_argument("--m", type=float, default=None, help="spectral efficiency, bit/s/Hz")
        p.add_argument("--combo-override", type=_combo, default=None)
        p.add_argument("--operating-snr-db", type=float, default=None,
                       help="fix adaptive combos at this SNR instead of per grid point")
        p.add_argument("--output-path", "-o", default=None)
        _add_sim(p, 0)
        p.set_defaults(func=func)
    return parser



def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleConstraintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, InvalidParameterError, NotApplicableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
