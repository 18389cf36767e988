"""Batch experiment driver.

Subcommands: analyze | trace | predict | compare | kernel | selftest.
Exit codes: 0 success, 2 config error, 3 reduction-hypothesis violation,
4 numeric failure.  All tabular outputs are CSV with 17-significant-digit
floats; two runs with the same config and seed are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .asymptotics import (NumericFailure, ScalingProbe, TracePrediction, compare_and_fit,
                          decay_probe, predict_toeplitz_leading, scaling_probe)
from .cache import Cache
from .config import ConfigError, ExperimentConfig, load_config
from .iotools import write_csv
from .reduction import (DegenerateSymmetryError, ReductionHypothesisError,
                        check_regular_and_free, component_invariants, f_bar_integral,
                        find_fixed_components)
from .selftest import FLIPPABLE_PINS, PINNED, run_selftest
from .toeplitz import trace_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_NUMERIC = 4


def _out_dir(cfg: ExperimentConfig, args) -> str:
    out = args.out or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    return out


def _effective_config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        doc = dict(cfg.raw)
        doc["sampling"] = dict(doc["sampling"], seed=args.seed)
        from .config import parse_config
        cfg = parse_config(doc)
    return cfg


def _write_run_record(out: str, cfg: ExperimentConfig | None, artifacts: list,
                      timings: dict) -> None:
    record = {
        "config_hash": cfg.config_hash() if cfg else None,
        "calibration": PINNED.to_dict(),
        "artifacts": sorted(artifacts),
        "versions": {
            "package": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "timings_seconds": timings,
    }
    with open(os.path.join(out, "run_record.json"), "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)


def _components_with_invariants(cfg: ExperimentConfig, cache: Cache):
    model, action, sym = cfg.model(), cfg.action(), cfg.symmetry()
    f = cfg.observable()
    comps = find_fixed_components(action, sym, model)
    done = []
    for rep in comps:
        rep = component_invariants(rep, sym, action, model)
        if rep.d_l > 0 and not (action.g == 0 and len(rep.support) == model.n_coords):
            key = {
                "purpose": "f_bar_integral",
                "config": cfg.subhash("model", "action", "symmetry", "observable"),
                "support": list(rep.support),
                "n_samples": cfg.n_samples,
                "seed": cfg.seed,
            }
            cached = cache.get_or_compute(key, lambda rep=rep: _fbar_payload(
                rep, f, action, model, cfg))
            rep = replace(rep, f_bar_integral=complex(cached["re"], cached["im"]),
                          f_bar_stderr=cached["stderr"])
        else:
            rep = f_bar_integral(rep, f, action, model, cfg.n_samples, cfg.seed)
        done.append(rep)
    return done


def _fbar_payload(rep, f, action, model, cfg):
    filled = f_bar_integral(rep, f, action, model, cfg.n_samples, cfg.seed)
    return {"re": filled.f_bar_integral.real, "im": filled.f_bar_integral.imag,
            "stderr": filled.f_bar_stderr}


def _prediction(cfg: ExperimentConfig, cache: Cache) -> TracePrediction:
    comps = _components_with_invariants(cfg, cache)
    return TracePrediction(tuple(comps), cfg.varpi)


def cmd_analyze(args) -> int:
    t0 = time.perf_counter()
    cfg = _effective_config(args)
    out = _out_dir(cfg, args)
    model, action, sym = cfg.model(), cfg.action(), cfg.symmetry()
    diagnostics = check_regular_and_free(action, model, n_samples=cfg.n_samples,
                                         seed=cfg.seed)
    lines = ["reduction diagnostics", "====================="]
    for name, val in sorted(vars(diagnostics).items()):
        lines.append(f"{name}: {val}")
    artifacts = ["reduction_report.txt"]
    if diagnostics.empty_locus:
        lines.append("")
        lines.append("empty zero locus: twisted operators vanish identically for k >= k0;")
        from .symmetry import vanishing_level
        k0 = vanishing_level(action, cfg.varpi)
        lines.append(f"k0 (weight-range bound for the configured isotype): {k0}")
    else:
        cache = Cache(os.path.join(out, "cache"))
        comps = _components_with_invariants(cfg, cache)
        rows = []
        for c in comps:
            chi = c.chi(cfg.varpi)
            rows.append([";".join(str(j) for j in c.support), c.d_l, c.codim,
                         c.stab_order,
                         c.c_l.real, c.c_l.imag, abs(c.c_l - c.c_l_exact),
                         c.h_l.real, c.h_l.imag, chi.real, chi.imag,
                         c.f_bar_integral.real, c.f_bar_integral.imag,
                         c.f_bar_stderr, int(c.suspected_nongeneric)])
        write_csv(os.path.join(out, "components.csv"),
                  ["support", "d_l", "codim", "stab_order", "c_l_re", "c_l_im",
                   "c_l_cross_check", "h_l_re", "h_l_im", "chi_re", "chi_im",
                   "f_bar_re", "f_bar_im", "f_bar_stderr", "suspected_nongeneric"],
                  rows)
        artifacts.append("components.csv")
        lines.append(f"fixed components: {len(comps)} (see components.csv)")
        if not (diagnostics.regular_value and diagnostics.free_action):
            _write_report(out, lines)
            print("\n".join(lines))
            raise ReductionHypothesisError("reduction hypotheses violated; see report")
    _write_report(out, lines)
    print("\n".join(lines))
    _write_run_record(out, cfg, artifacts, {"analyze": time.perf_counter() - t0})
    return EXIT_OK


def _write_report(out, lines):
    with open(os.path.join(out, "reduction_report.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_trace(args) -> int:
    t0 = time.perf_counter()
    cfg = _effective_config(args)
    out = _out_dir(cfg, args)
    series = trace_sweep(cfg.k_values(), cfg.varpi, cfg.observable(), cfg.symmetry(),
                         cfg.action(), cfg.model(), threads=args.threads)
    series.to_csv(os.path.join(out, "trace.csv"))
    nonzero = [r for r in series.records if r.dim_isotype > 0]
    print(f"trace sweep: {len(series.records)} levels, {len(nonzero)} with "
          f"nonempty isotype -> trace.csv")
    for k, err in series.failures:
        print(f"  level {k} failed: {err}", file=sys.stderr)
    _write_run_record(out, cfg, ["trace.csv"], {"trace": time.perf_counter() - t0})
    return EXIT_OK


def _is_plain_toeplitz(cfg: ExperimentConfig) -> bool:
    sym = cfg.symmetry()
    return (cfg.action().g == 0 and cfg.theta_A == 0.0
            and np.allclose(np.mod(sym.phi - sym.phi[0], 2 * math.pi), 0.0))


def _prediction_values(cfg: ExperimentConfig, cache: Cache, ks):
    if _is_plain_toeplitz(cfg):
        f = cfg.observable()
        model = cfg.model()
        return np.array([predict_toeplitz_leading(k, f, model) for k in ks],
                        dtype=complex), "toeplitz-leading"
    pred = _prediction(cfg, cache)
    return np.array([pred(k) for k in ks], dtype=complex), "fixed-component-sum"


def cmd_predict(args) -> int:
    t0 = time.perf_counter()
    cfg = _effective_config(args)
    out = _out_dir(cfg, args)
    cache = Cache(os.path.join(out, "cache"))
    ks = cfg.k_values()
    vals, method = _prediction_values(cfg, cache, ks)
    rows = [[k, v.real, v.imag, method] for k, v in zip(ks, vals)]
    write_csv(os.path.join(out, "predictions.csv"),
              ["k", "pred_re", "pred_im", "method"], rows)
    print(f"predictions: {len(ks)} levels via {method} -> predictions.csv")
    _write_run_record(out, cfg, ["predictions.csv"], {"predict": time.perf_counter() - t0})
    return EXIT_OK


def cmd_compare(args) -> int:
    t0 = time.perf_counter()
    cfg = _effective_config(args)
    out = _out_dir(cfg, args)
    cache = Cache(os.path.join(out, "cache"))
    series = trace_sweep(cfg.k_values(), cfg.varpi, cfg.observable(), cfg.symmetry(),
                         cfg.action(), cfg.model(), threads=args.threads)
    for k, err in series.failures:
        print(f"level {k} failed: {err}", file=sys.stderr)
    ks = [rec.k for rec in series.records]
    preds, method = _prediction_values(cfg, cache, ks)
    rows = []
    for rec, p in zip(series.records, preds):
        t = rec.trace
        ratio = abs(t) / abs(p) if p != 0 else math.inf
        phase = float(np.angle(t * np.conj(p))) if p != 0 else 0.0
        rows.append([rec.k, t.real, t.imag, complex(p).real, complex(p).imag,
                     ratio, phase])
    write_csv(os.path.join(out, "comparison.csv"),
              ["k", "trace_re", "trace_im", "pred_re", "pred_im", "abs_ratio",
               "phase_err"], rows)
    artifacts = ["comparison.csv"]
    usable = np.abs(preds) > 0
    summary = [f"comparison over {len(ks)} levels (prediction: {method})"]
    if np.any(usable):
        diffs = np.abs(series.traces - preds)
        summary.append(f"max |trace - prediction| = {diffs.max():.6e}")
        rel = np.abs(series.traces[usable] / preds[usable] - 1.0)
        summary.append(f"|trace/prediction - 1| at k={ks[-1]}: {rel[-1]:.6e}")
        fit = compare_and_fit(series, preds, cfg.fit_order)
        summary.append(fit.summary())
        with open(os.path.join(out, "fit_report.txt"), "w", encoding="utf-8") as fh:
            fh.write("\n".join(summary) + "\n")
        artifacts.append("fit_report.txt")
    print("\n".join(summary))
    _write_run_record(out, cfg, artifacts, {"compare": time.perf_counter() - t0})
    return EXIT_OK


def cmd_kernel(args) -> int:
    t0 = time.perf_counter()
    cfg = _effective_config(args)
    out = _out_dir(cfg, args)
    probe = cfg.kernel_probe
    if probe is None:
        raise ConfigError("kernel subcommand needs a kernel_probe config section")
    model, action = cfg.model(), cfg.action()
    ks = [int(k) for k in probe["k_values"]]
    if probe["type"] == "decay":
        x = _parse_point(probe.get("point"), model)
        y = _parse_point(probe.get("second_point"), model) if probe.get("second_point") else x
        res = decay_probe(x, y, cfg.varpi, action, model, ks)
        rows = [[int(k), float(v)] for k, v in zip(res.k_values, res.abs_values)]
        write_csv(os.path.join(out, "kernel_decay.csv"), ["k", "abs_kernel"], rows)
        print(f"decay probe: fitted log-log slope {res.slope:.3f}"
              + (" (values floored at 1e-300)" if res.floored else ""))
        artifacts = ["kernel_decay.csv"]
    else:
        x = _parse_point(probe.get("point"), model)
        w = _parse_vector(probe.get("displacement_w"), model)
        v = _parse_vector(probe.get("displacement_v"), model)
        rows_out = scaling_probe(ScalingProbe(x=x, w=w, v=v, k_values=tuple(ks)),
                                 cfg.varpi, action, model)
        rows = [[r.k, r.exact.real, r.exact.imag, r.predicted.real, r.predicted.imag,
                 r.abs_ratio, r.phase_err] for r in rows_out]
        write_csv(os.path.join(out, "kernel_scaling.csv"),
                  ["k", "exact_re", "exact_im", "pred_re", "pred_im", "abs_ratio",
                   "phase_err"], rows)
        print("scaling probe: " + ", ".join(
            f"k={r.k} ratio={r.abs_ratio:.4f}" for r in rows_out))
        artifacts = ["kernel_scaling.csv"]
    _write_run_record(out, cfg, artifacts, {"kernel": time.perf_counter() - t0})
    return EXIT_OK


def _parse_point(obj, model):
    if obj is None:
        raise ConfigError("kernel_probe requires a point")
    arr = np.asarray(obj, dtype=float)
    if arr.shape == (model.n_coords,):
        vec = arr.astype(complex)
    elif arr.shape == (model.n_coords, 2):
        vec = arr[:, 0] + 1j * arr[:, 1]
    else:
        raise ConfigError(f"point must be length {model.n_coords} (or pairs re/im)")
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        raise ConfigError("point must be nonzero")
    return vec / nrm


def _parse_vector(obj, model):
    if obj is None:
        return np.zeros(model.n_coords, complex)
    arr = np.asarray(obj, dtype=float)
    if arr.shape == (model.n_coords,):
        return arr.astype(complex)
    if arr.shape == (model.n_coords, 2):
        return arr[:, 0] + 1j * arr[:, 1]
    raise ConfigError(f"displacement must be length {model.n_coords} (or pairs re/im)")


def cmd_selftest(args) -> int:
    t0 = time.perf_counter()
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    results, record = run_selftest(flip_pin=args.debug_flip_pin)
    width = max(len(r.name) for r in results)
    failed = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name.ljust(width)}  {r.seconds:7.2f}s  {r.detail}")
        if not r.passed:
            failed.append(r.name)
    with open(os.path.join(out, "calibration_record.json"), "w", encoding="utf-8") as fh:
        json.dump(record.to_dict(), fh, indent=2, sort_keys=True)
    print(f"calibration record -> {os.path.join(out, 'calibration_record.json')}")
    print(f"selftest: {len(results) - len(failed)}/{len(results)} passed "
          f"in {time.perf_counter() - t0:.1f}s")
    if failed:
        print("failed invariants: " + ", ".join(failed))
        return EXIT_NUMERIC
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eqtoeplitz",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, config_required=True):
        if config_required:
            sp.add_argument("--config", required=True, help="path to the JSON config")
        sp.add_argument("--out", default=None, help="output directory override")
        sp.add_argument("--seed", type=int, default=None, help="seed override")
        sp.add_argument("--threads", type=int, default=1, help="worker threads")

    for name, fn in (("analyze", cmd_analyze), ("trace", cmd_trace),
                     ("predict", cmd_predict), ("compare", cmd_compare),
                     ("kernel", cmd_kernel)):
        sp = sub.add_parser(name)
        add_common(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("selftest")
    sp.add_argument("--out", default=None)
    sp.add_argument("--debug-flip-pin", choices=FLIPPABLE_PINS, default=None,
                    help="force one pinned convention wrong (negative control)")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ReductionHypothesisError as exc:
        print(f"reduction hypothesis violated: {exc}", file=sys.stderr)
        if getattr(exc, "witness", None) is not None:
            print(f"witness: {exc.witness}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (DegenerateSymmetryError, NumericFailure) as exc:
        print(f"numeric failure [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
