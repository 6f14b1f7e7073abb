"""Observation-log CSV I/O, run reports, and the command-line driver.

Log format: UTF-8, LF line endings, header `t_s,lat_deg,lon_deg,rssi_dbm`,
floats with up to 9 significant digits. `#`-prefixed lines carry metadata;
recognized keys are `# survey <id>`, `# cal d0=<m> p0=<dBm> n=<val>
sigma=<dB>`, and `# target <lat>,<lon>`.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field

from .cluster import Observation
from .errors import LocalizationError, LogFormatError, NoEstimateError
from .estimator import R_THRESH_ITERATION, Estimator, EstimatorConfig
from .geo import GeoPoint, haversine
from .pathloss import Calibration, fit_exponent
from .simulator import (SCENARIOS, evaluate, run_baseline_svd, run_estimator,
                        simulate_observations, sweep_ma_log)

CSV_HEADER = "t_s,lat_deg,lon_deg,rssi_dbm"
PROG = "uavloc"


@dataclass
class ObservationLog:
    rows: list
    survey_id: str | None = None
    cal: Calibration | None = None
    meta: dict = field(default_factory=dict)


@dataclass
class RunReport:
    """Everything one run produced, in JSON-ready form."""

    config: dict
    iterations: list
    best: dict | None = None
    baseline: dict | None = None

    def to_dict(self):
        return {"config": self.config, "iterations": self.iterations,
                "best": self.best, "baseline": self.baseline}

    @classmethod
    def from_dict(cls, d):
        return cls(config=d["config"], iterations=d["iterations"],
                   best=d.get("best"), baseline=d.get("baseline"))


def _fmt(v: float) -> str:
    return format(float(v), ".9g")


def serialize_log(log: ObservationLog) -> str:
    lines = []
    if log.survey_id is not None:
        lines.append(f"# survey {log.survey_id}")
    if log.cal is not None:
        c = log.cal
        lines.append(f"# cal d0={_fmt(c.d0)} p0={_fmt(c.p0_dbm)} "
                     f"n={_fmt(c.n)} sigma={_fmt(c.sigma_db)}")
    for key, value in log.meta.items():
        lines.append(f"# {key} {value}")
    lines.append(CSV_HEADER)
    for o in log.rows:
        lines.append(f"{_fmt(o.t)},{_fmt(o.pos.lat)},{_fmt(o.pos.lon)},{_fmt(o.rssi)}")
    return "\n".join(lines) + "\n"


def write_log(log: ObservationLog, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(serialize_log(log))


def _parse_cal_comment(body: str, lineno: int) -> Calibration:
    kv = {}
    for tok in body.split():
        if "=" not in tok:
            raise LogFormatError(f"bad calibration token {tok!r}", line=lineno)
        k, v = tok.split("=", 1)
        kv[k] = v
    try:
        return Calibration(d0=float(kv["d0"]), p0_dbm=float(kv["p0"]),
                           n=float(kv["n"]), sigma_db=float(kv.get("sigma", 0.0)))
    except (KeyError, ValueError) as e:
        raise LogFormatError(f"bad calibration metadata: {e}", line=lineno)


def parse_log(path: str) -> ObservationLog:
    """Strict parse: rejects NaN, out-of-range coordinates, non-monotone time."""
    log = ObservationLog(rows=[])
    saw_header = False
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                key, _, rest = body.partition(" ")
                if key == "survey":
                    log.survey_id = rest
                elif key == "cal":
                    log.cal = _parse_cal_comment(rest, lineno)
                elif key:
                    log.meta[key] = rest
                continue
            if not saw_header:
                if line != CSV_HEADER:
                    raise LogFormatError(f"expected header {CSV_HEADER!r}, got {line!r}",
                                         line=lineno)
                saw_header = True
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise LogFormatError(f"expected 4 fields, got {len(parts)}", line=lineno)
            try:
                t, lat, lon, rssi = (float(p) for p in parts)
            except ValueError:
                raise LogFormatError(f"non-numeric field in {line!r}", line=lineno)
            if any(not math.isfinite(v) for v in (t, lat, lon, rssi)):
                raise LogFormatError("non-finite value", line=lineno)
            if log.rows and t < log.rows[-1].t:
                raise LogFormatError(f"timestamp {t} precedes previous row", line=lineno)
            try:
                log.rows.append(Observation(t=t, pos=GeoPoint(lat, lon), rssi=rssi))
            except ValueError as e:
                raise LogFormatError(str(e), line=lineno)
    if not saw_header:
        raise LogFormatError("missing header line")
    if not log.rows:
        raise LogFormatError("log contains no observations")
    return log


def write_report(report: RunReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(report.to_dict(), f, indent=2)
        f.write("\n")


def read_report(path: str) -> RunReport:
    with open(path, "r", encoding="utf-8") as f:
        return RunReport.from_dict(json.load(f))


# ---------------------------------------------------------------- CLI


def _parse_latlon(text: str) -> GeoPoint:
    try:
        lat_s, lon_s = text.split(",")
        return GeoPoint(float(lat_s), float(lon_s))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected 'lat,lon': {e}")


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _r_thresh(text: str):
    if text == R_THRESH_ITERATION:
        return text
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integer or 'iteration', got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("r-thresh must be >= 0")
    return v


def _ma_list(text: str):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated meters, got {text!r}")


def _add_cal_flags(p):
    p.add_argument("--d0", type=_positive, help="calibration reference distance (m)")
    p.add_argument("--p0", type=float, help="calibration reference power (dBm)")
    p.add_argument("--n", type=float, help="path-loss exponent")
    p.add_argument("--sigma", type=float, help="shadowing std-dev (dB)")


def _resolve_cal(args, log: ObservationLog | None) -> Calibration:
    base = log.cal if log is not None else None
    d0 = args.d0 if args.d0 is not None else (base.d0 if base else None)
    p0 = args.p0 if args.p0 is not None else (base.p0_dbm if base else None)
    n = args.n if args.n is not None else (base.n if base else None)
    sigma = args.sigma if args.sigma is not None else (base.sigma_db if base else 0.0)
    if d0 is None or p0 is None or n is None:
        raise LocalizationError(
            "no calibration: log has no '# cal' line and --d0/--p0/--n not all given")
    return Calibration(d0=d0, p0_dbm=p0, n=n, sigma_db=sigma)


def _estimator_config(args, cal: Calibration) -> EstimatorConfig:
    return EstimatorConfig(
        ma=args.ma, cal=cal, batch_size=args.batch,
        min_dbm=args.min_rssi if args.min_rssi is not None else -math.inf,
        r_thresh=args.r_thresh, seed=args.seed)


def _iteration_record(r, truth: GeoPoint | None):
    rec = {"index": r.index, "n_obs": r.n_obs, "n_clusters_used": r.n_clusters_used,
           "status": r.status}
    if r.ok:
        rec.update({"estimate_lat": r.estimate.lat, "estimate_lon": r.estimate.lon,
                    "residual_rms": r.residual_rms, "condition": r.condition})
        if truth is not None:
            rec["error_m"] = evaluate(r.estimate, truth)
    else:
        rec["reason"] = r.reason
    return rec


def _cal_dict(cal: Calibration):
    return {"d0": cal.d0, "p0_dbm": cal.p0_dbm, "n": cal.n, "sigma_db": cal.sigma_db}


def cmd_simulate(args) -> int:
    sc = SCENARIOS[args.scenario](seed=args.seed,
                                  sigma_db=args.sigma if args.sigma is not None else 3.0)
    duration = args.duration if args.duration else sc.plan.path_length() / sc.plan.speed
    obs = simulate_observations(sc, duration)
    from .pathloss import calibration_from_tx
    cal = calibration_from_tx(sc.tx, d0=100.0, sigma_db=sc.sigma_db)
    log = ObservationLog(rows=obs, survey_id=f"{args.scenario} seed={args.seed}",
                         cal=cal,
                         meta={"target": f"{_fmt(sc.target.lat)},{_fmt(sc.target.lon)}"})
    write_log(log, args.out)
    print(f"wrote {len(obs)} observations to {args.out}")
    return 0


def cmd_estimate(args) -> int:
    log = parse_log(args.obs)
    cal = _resolve_cal(args, log)
    est = run_estimator(log.rows, _estimator_config(args, cal))
    truth = args.truth
    report = RunReport(
        config={"ma": args.ma, "batch_size": args.batch, "min_rssi": args.min_rssi,
                "r_thresh": args.r_thresh, "seed": args.seed, "cal": _cal_dict(cal)},
        iterations=[_iteration_record(r, truth) for r in est.history])
    status = 0
    try:
        estimate, best = est.best_estimate()
        report.best = {"index": best.index, "lat": estimate.lat, "lon": estimate.lon,
                       "residual_rms": best.residual_rms}
        if truth is not None:
            report.best["error_m"] = evaluate(estimate, truth)
    except NoEstimateError as e:
        print(f"{PROG}: error: {e}", file=sys.stderr)
        status = 1
    if args.out:
        write_report(report, args.out)
    if report.best is not None:
        line = f"best estimate: iteration {report.best['index']} " \
               f"({_fmt(report.best['lat'])}, {_fmt(report.best['lon'])})"
        if truth is not None:
            line += f" error {_fmt(report.best['error_m'])} m"
        print(line)
    return status


def cmd_baseline(args) -> int:
    log = parse_log(args.obs)
    cal = _resolve_cal(args, log)
    origin = log.rows[0].pos
    estimate = run_baseline_svd(log.rows, cal, origin)
    report = RunReport(config={"cal": _cal_dict(cal)}, iterations=[],
                       baseline={"lat": estimate.lat, "lon": estimate.lon})
    line = f"baseline estimate: ({_fmt(estimate.lat)}, {_fmt(estimate.lon)})"
    if args.truth is not None:
        report.baseline["error_m"] = evaluate(estimate, args.truth)
        line += f" error {_fmt(report.baseline['error_m'])} m"
    if args.out:
        write_report(report, args.out)
    print(line)
    return 0


def cmd_sweep_ma(args) -> int:
    log = parse_log(args.obs)
    cal = _resolve_cal(args, log)
    truth = args.truth
    if truth is None and "target" in log.meta:
        truth = _parse_latlon(log.meta["target"])
    if truth is None:
        raise LocalizationError("sweep-ma needs --truth (or a '# target' line in the log)")
    template = EstimatorConfig(
        ma=args.ma_values[0], cal=cal, batch_size=args.batch,
        min_dbm=args.min_rssi if args.min_rssi is not None else -math.inf,
        r_thresh=args.r_thresh, seed=args.seed)
    rows = sweep_ma_log(log.rows, truth, args.ma_values, template)
    lines = ["ma_m,error_m"]
    for ma, err in rows:
        lines.append(f"{_fmt(ma)},{_fmt(err) if err is not None else 'failed'}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_evaluate(args) -> int:
    print(_fmt(haversine(args.estimate, args.truth)))
    return 0


def cmd_calibrate(args) -> int:
    log = parse_log(args.obs)
    samples = [(haversine(o.pos, args.truth), o.rssi) for o in log.rows]
    samples = [(d, pr) for d, pr in samples if d > 0]
    cal = fit_exponent(samples, d0=args.d0 if args.d0 is not None else 100.0)
    line = (f"# cal d0={_fmt(cal.d0)} p0={_fmt(cal.p0_dbm)} "
            f"n={_fmt(cal.n)} sigma={_fmt(cal.sigma_db)}")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(line + "\n")
    print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG, description="Single-UAV RSSI localization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic observation log")
    p.add_argument("--scenario", choices=sorted(SCENARIOS), default="gtu-sim")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, help="shadowing std-dev (dB), default 3")
    p.add_argument("--duration", type=_positive, help="seconds (default: full survey)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="run the clustered iterative estimator")
    p.add_argument("--obs", required=True)
    p.add_argument("--ma", type=_positive, default=130.0)
    p.add_argument("--batch", type=int, default=50)
    p.add_argument("--min-rssi", type=float)
    p.add_argument("--r-thresh", type=_r_thresh, default=R_THRESH_ITERATION)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truth", type=_parse_latlon)
    p.add_argument("--out")
    _add_cal_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("baseline", help="plain SVD over all observations")
    p.add_argument("--obs", required=True)
    p.add_argument("--truth", type=_parse_latlon)
    p.add_argument("--out")
    _add_cal_flags(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("sweep-ma", help="best-estimate error per cluster granularity")
    p.add_argument("--obs", required=True)
    p.add_argument("--ma-values", type=_ma_list,
                   default=[50.0, 70.0, 90.0, 110.0, 130.0, 150.0, 170.0, 190.0])
    p.add_argument("--batch", type=int, default=50)
    p.add_argument("--min-rssi", type=float)
    p.add_argument("--r-thresh", type=_r_thresh, default=R_THRESH_ITERATION)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truth", type=_parse_latlon)
    p.add_argument("--out")
    _add_cal_flags(p)
    p.set_defaults(func=cmd_sweep_ma)

    p = sub.add_parser("evaluate", help="haversine distance between two points")
    p.add_argument("--estimate", type=_parse_latlon, required=True)
    p.add_argument("--truth", type=_parse_latlon, required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("calibrate", help="fit the path-loss exponent from a log")
    p.add_argument("--obs", required=True)
    p.add_argument("--truth", type=_parse_latlon, required=True,
                   help="known transmitter position")
    p.add_argument("--d0", type=_positive, help="reference distance (m), default 100")
    p.add_argument("--out")
    p.set_defaults(func=cmd_calibrate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LocalizationError, OSError, ValueError) as e:
        print(f"{PROG}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
