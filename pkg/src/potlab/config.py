"""Run configuration: JSON schema, validation, deterministic case seeds."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .checks import RESULT_IDS
from .errors import ConfigError
from .fields import make_grid

_TOP_KEYS = {"seed", "out_dir", "probe_mode", "refine", "jobs", "cases"}
_CASE_KEYS = {"id", "result", "n", "npts", "box", "count", "q", "l",
              "rhos", "eps", "phi_coeffs", "a_matrix", "npairs", "radius",
              "r_inner", "r_outer"}

# per-result required case keys beyond the grid
_REQUIRED = {
    "T1": {"q"},
    "T1_necessity": {"q", "rhos"},
    "T2": {"q"},
    "LEMMA_10x": {"q"},
    "P1": {"q"},
    "P2": set(),
    "T3_identity": set(),
    "T3i": set(),
    "T3ii_sharpness": {"rhos"},
    "T3iii": set(),
    "COROLLARY": set(),
    "CR_IDENTITY": set(),
    "CRE_IDENTITY": set(),
    "P4": set(),
    "T4": set(),
    "REMARK5": set(),
    "CONJ_PROBE": {"rhos", "a_matrix"},
}


@dataclass(frozen=True)
class CaseConfig:
    id: str
    result: str
    n: int
    npts: int
    box: float
    count: int = 1
    index: int = 0
    options: dict = field(default_factory=dict)

    def grid(self):
        return make_grid(self.n, self.box, self.npts)

    def rng_seed(self, global_seed: int):
        return np.random.SeedSequence([global_seed, self.index])


@dataclass(frozen=True)
class RunConfig:
    seed: int
    out_dir: str
    probe_mode: bool
    refine: bool
    jobs: int
    cases: tuple


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def parse_config(text: str, path: str = "<config>") -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    _require(isinstance(data, dict), f"{path}: top level must be an object")
    unknown = set(data) - _TOP_KEYS
    _require(not unknown, f"{path}: unknown keys {sorted(unknown)}")
    cases_raw = data.get("cases")
    _require(isinstance(cases_raw, list) and cases_raw,
             f"{path}: 'cases' must be a non-empty list")
    seen_ids = set()
    cases = []
    for idx, raw in enumerate(cases_raw):
        where = f"{path}: cases[{idx}]"
        _require(isinstance(raw, dict), f"{where} must be an object")
        unknown = set(raw) - _CASE_KEYS
        _require(not unknown, f"{where}: unknown keys {sorted(unknown)}")
        for key in ("id", "result", "n", "npts", "box"):
            _require(key in raw, f"{where}: missing required key '{key}'")
        result = raw["result"]
        _require(result in RESULT_IDS,
                 f"{where}: unknown result '{result}' (see --list)")
        missing = _REQUIRED[result] - set(raw)
        _require(not missing,
                 f"{where}: result {result} needs keys {sorted(missing)}")
        cid = raw["id"]
        _require(isinstance(cid, str) and cid, f"{where}: 'id' must be a string")
        _require(cid not in seen_ids, f"{where}: duplicate case id '{cid}'")
        seen_ids.add(cid)
        count = raw.get("count", 1)
        _require(isinstance(count, int) and count >= 1,
                 f"{where}: 'count' must be a positive integer")
        options = {k: raw[k] for k in raw
                   if k not in {"id", "result", "n", "npts", "box", "count"}}
        try:
            case = CaseConfig(cid, result, int(raw["n"]), int(raw["npts"]),
                              float(raw["box"]), count, idx, options)
            case.grid()  # validates grid parameters
            if data.get("refine"):
                make_grid(case.n, case.box, 2 * case.npts)
        except Exception as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        cases.append(case)
    seed = data.get("seed", 0)
    _require(isinstance(seed, int) and seed >= 0,
             f"{path}: 'seed' must be a nonnegative integer")
    jobs = data.get("jobs", 1)
    _require(isinstance(jobs, int) and jobs >= 1,
             f"{path}: 'jobs' must be a positive integer")
    return RunConfig(
        seed=seed,
        out_dir=str(data.get("out_dir", "out")),
        probe_mode=bool(data.get("probe_mode", False)),
        refine=bool(data.get("refine", False)),
        jobs=jobs,
        cases=tuple(cases),
    )


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), path)
