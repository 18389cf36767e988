"""Experiment configuration: a single versioned JSON document.

Unknown keys are rejected at every level; the sampling seed is mandatory so
no run is ever silently nondeterministic.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import ProjectiveModel
from .observables import Observable
from .symmetry import DiagonalSymmetry, TorusAction

SCHEMA_VERSION = 1

__all__ = ["ConfigError", "ExperimentConfig", "load_config"]


class ConfigError(ValueError):
    pass


def _require_keys(obj: dict, allowed: set, required: set, where: str):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


@dataclass(frozen=True)
class ExperimentConfig:
    d: int
    W: np.ndarray
    phi: np.ndarray
    theta_A: float
    u_terms: dict
    h_term: np.ndarray | None
    varpi: tuple
    k_min: int
    k_max: int
    k_step: int
    n_samples: int
    seed: int
    fit_order: int
    output_dir: str
    kernel_probe: dict | None = None
    raw: dict = field(default=None, repr=False)

    # ---- constructed objects -------------------------------------------
    def model(self) -> ProjectiveModel:
        return ProjectiveModel(self.d)

    def action(self) -> TorusAction:
        return TorusAction(self.W)

    def symmetry(self) -> DiagonalSymmetry:
        return DiagonalSymmetry(phi=self.phi, theta_A=self.theta_A)

    def observable(self) -> Observable:
        return Observable(u_terms=self.u_terms, h_term=self.h_term)

    def k_values(self) -> list:
        return list(range(self.k_min, self.k_max + 1, self.k_step))

    # ---- hashing --------------------------------------------------------
    def canonical(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def subhash(self, *sections: str) -> str:
        sub = {s: self.raw.get(s) for s in sections}
        return hashlib.sha256(
            json.dumps(sub, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _parse_h_term(obj, d):
    if obj is None:
        return None
    _require_keys(obj, {"re", "im"}, {"re"}, "observable.h_term")
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    h = re + 1j * im
    if h.shape != (d + 1, d + 1):
        raise ConfigError(f"observable.h_term: expected shape {(d + 1, d + 1)}, got {h.shape}")
    if np.max(np.abs(h - h.conj().T)) > 1e-12:
        raise ConfigError("observable.h_term: matrix must be Hermitian")
    return h


def parse_config(doc: dict) -> ExperimentConfig:
    _require_keys(doc, {"schema_version", "model", "action", "symmetry", "observable",
                        "isotype", "k_range", "sampling", "fit", "output_dir",
                        "kernel_probe"},
                  {"schema_version", "model", "action", "symmetry", "observable",
                   "isotype", "k_range", "sampling", "output_dir"}, "config")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {doc['schema_version']!r} "
                          f"(this build reads {SCHEMA_VERSION})")

    _require_keys(doc["model"], {"d"}, {"d"}, "model")
    d = doc["model"]["d"]
    if not isinstance(d, int) or d < 1:
        raise ConfigError("model.d must be a positive integer")

    _require_keys(doc["action"], {"W"}, {"W"}, "action")
    W_rows = doc["action"]["W"]
    if not isinstance(W_rows, list):
        raise ConfigError("action.W must be a list of integer rows")
    for row in W_rows:
        if not isinstance(row, list) or len(row) != d + 1:
            raise ConfigError(f"action.W rows must have length d+1 = {d + 1}")
        if not all(isinstance(x, int) for x in row):
            raise ConfigError("action.W entries must be integers")
    W = np.array(W_rows, dtype=np.int64).reshape(len(W_rows), d + 1)

    _require_keys(doc["symmetry"], {"phi", "theta_A"}, {"phi"}, "symmetry")
    phi = np.asarray(doc["symmetry"]["phi"], dtype=float)
    if phi.shape != (d + 1,):
        raise ConfigError(f"symmetry.phi must have length d+1 = {d + 1}")
    theta_A = float(doc["symmetry"].get("theta_A", 0.0))

    _require_keys(doc["observable"], {"u_terms", "h_term"}, set(), "observable")
    u_terms = {}
    for i, term in enumerate(doc["observable"].get("u_terms", [])):
        _require_keys(term, {"beta", "coef"}, {"beta", "coef"}, f"observable.u_terms[{i}]")
        beta = term["beta"]
        if len(beta) != d + 1 or not all(isinstance(b, int) and b >= 0 for b in beta):
            raise ConfigError(f"observable.u_terms[{i}].beta must be {d + 1} nonnegative ints")
        u_terms[tuple(beta)] = float(term["coef"])
    h_term = _parse_h_term(doc["observable"].get("h_term"), d)
    if not u_terms and h_term is None:
        raise ConfigError("observable must have at least one term")

    varpi = doc["isotype"]
    if not isinstance(varpi, list) or len(varpi) != len(W_rows) \
            or not all(isinstance(v, int) for v in varpi):
        raise ConfigError(f"isotype must be a list of {len(W_rows)} integers")

    _require_keys(doc["k_range"], {"min", "max", "step"}, {"min", "max"}, "k_range")
    k_min, k_max = doc["k_range"]["min"], doc["k_range"]["max"]
    k_step = doc["k_range"].get("step", 1)
    if not all(isinstance(x, int) for x in (k_min, k_max, k_step)) \
            or k_min < 0 or k_step < 1 or k_max < k_min:
        raise ConfigError("k_range must satisfy 0 <= min <= max, step >= 1")

    _require_keys(doc["sampling"], {"n_samples", "seed"}, {"n_samples", "seed"}, "sampling")
    n_samples, seed = doc["sampling"]["n_samples"], doc["sampling"]["seed"]
    if not isinstance(n_samples, int) or n_samples < 1:
        raise ConfigError("sampling.n_samples must be a positive integer")
    if not isinstance(seed, int):
        raise ConfigError("sampling.seed is mandatory and must be an integer")

    fit = doc.get("fit", {"order": 4})
    _require_keys(fit, {"order"}, {"order"}, "fit")
    fit_order = fit["order"]
    if not isinstance(fit_order, int) or fit_order < 1:
        raise ConfigError("fit.order must be a positive integer")

    out = doc["output_dir"]
    if not isinstance(out, str) or not out:
        raise ConfigError("output_dir must be a nonempty string")

    probe = doc.get("kernel_probe")
    if probe is not None:
        _require_keys(probe, {"type", "point", "second_point", "displacement_w",
                              "displacement_v", "k_values"},
                      {"type", "k_values"}, "kernel_probe")
        if probe["type"] not in ("decay", "scaling"):
            raise ConfigError("kernel_probe.type must be 'decay' or 'scaling'")

    return ExperimentConfig(
        d=d, W=W, phi=phi, theta_A=theta_A, u_terms=u_terms, h_term=h_term,
        varpi=tuple(varpi), k_min=k_min, k_max=k_max, k_step=k_step,
        n_samples=n_samples, seed=seed, fit_order=fit_order, output_dir=out,
        kernel_probe=probe, raw=doc)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return parse_config(doc)
