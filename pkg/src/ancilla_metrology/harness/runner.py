"""Single-point and sweep evaluation of a :class:`RunConfig`."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

from .. import pipeline, protocol
from ..errors import ConfigError
from ..protocol import (
    AncillaPrep,
    ProbePrep,
    ProtocolParams,
    Schedule,
    default_n2,
    optimal_omega_a,
    optimal_t1,
)
from .config import RunConfig

OUTPUT_COLUMNS = ("prob_plus", "prob_minus", "fq_plus_eff", "fq_minus_eff", "fq_total", "fc", "method_tag")
ALTERNATE_COLUMNS = ("fq_pure", "fq_sld", "fq_spectral")


@dataclass
class Resolved:
    params: ProtocolParams
    prep: ProbePrep
    ancilla: AncillaPrep
    schedule: Schedule
    inputs: Dict[str, Any]


@dataclass
class ResultRecord:
    inputs: Dict[str, Any]
    outputs: Dict[str, Any]
    wall_time: float = 0.0
    alternates: Dict[str, float] = field(default_factory=dict)


def resolve(config: RunConfig) -> Resolved:
    """Fill in ``auto`` values and build the circuit objects.

    ``omega_a`` defaults to the unitary-branch value at the optimal time for
    ``n1``, even when ``t1`` itself is set (and swept) explicitly; the probe
    frame is pinned to the same optimal time unless ``frame_t1`` is given.
    """
    c = config
    if c.g > 0:
        t_opt = optimal_t1(c.g, c.n1)
    elif c.t1 is None:
        raise ConfigError("with g = 0 the joint evolution time t1 must be given")
    else:
        t_opt = c.t1
    t1 = t_opt if c.t1 is None else c.t1
    n2 = default_n2(c.N) if c.n2 is None else c.n2
    if c.omega_a is not None:
        omega_a = c.omega_a
    elif c.g > 0:
        omega_a = optimal_omega_a(c.N, t_opt, n2)
    else:
        omega_a = 0.0
    frame_t1 = t_opt if c.frame_t1 is None else c.frame_t1

    params = ProtocolParams(c.N, c.omega_p, omega_a, c.g, t1, c.t2, c.theta)
    if c.probe == "polarized":
        prep = ProbePrep.polarized(c.probe_sign, frame_t1)
    elif c.probe == "superposed":
        prep = ProbePrep.superposed(c.a, c.b, c.phi, frame_t1)
    elif c.probe == "ghz_x":
        prep = ProbePrep.ghz_x(c.phi0)
    elif c.probe == "mixture":
        if c.weights is None:
            raise ConfigError("mixture probe needs weights")
        prep = ProbePrep.dicke_mixture(c.weights, frame_t1)
    else:
        prep = ProbePrep.thermal(c.beta, frame_t1)
    ancilla = AncillaPrep(c.ancilla, c.ancilla_polar, c.ancilla_azimuth)
    schedule = Schedule(c.schedule, c.dt if c.schedule != "synchronous" else 0.0)

    inputs = {
        "N": c.N, "g": c.g, "omega_p": c.omega_p, "omega_a": omega_a, "n1": c.n1, "n2": n2,
        "t1": t1, "t2": c.t2, "theta": c.theta, "probe": c.probe, "probe_sign": c.probe_sign,
        "a": c.a, "b": c.b, "phi": c.phi, "phi0": c.phi0, "beta": c.beta,
        "weights": c.weights, "frame_t1": frame_t1, "ancilla": c.ancilla,
        "ancilla_polar": c.ancilla_polar, "ancilla_azimuth": c.ancilla_azimuth,
        "schedule": c.schedule, "dt": schedule.dt, "method": c.method,
        "cfi_limit": c.cfi_limit,
    }
    return Resolved(params, prep, ancilla, schedule, inputs)


def evaluate(config: RunConfig, with_qfi: bool = True, with_cfi: bool = False) -> ResultRecord:
    start = time.perf_counter()
    r = resolve(config)
    outputs: Dict[str, Any] = dict.fromkeys(OUTPUT_COLUMNS)
    alternates: Dict[str, float] = {}
    if with_qfi:
        rep = pipeline.circuit_qfi(r.params, r.prep, r.ancilla, r.schedule, method=config.method)
        outputs.update(
            prob_plus=rep.prob_plus, prob_minus=rep.prob_minus,
            fq_plus_eff=rep.fq_plus_eff, fq_minus_eff=rep.fq_minus_eff,
            fq_total=rep.fq_total, method_tag=rep.method,
        )
        alternates = {f"fq_{k}": v for k, v in rep.alternates.items()}
    if with_cfi:
        outputs["fc"] = pipeline.circuit_cfi(r.params, r.prep, r.ancilla, r.schedule,
                                             strict=config.strict, limit=config.cfi_limit)
        if not with_qfi:
            probs = protocol.run(r.params, r.prep, r.ancilla, r.schedule).probabilities
            outputs.update(prob_plus=probs[0], prob_minus=probs[1], method_tag="jz-readout")
    return ResultRecord(r.inputs, outputs, time.perf_counter() - start, alternates)


def axis_values(config: RunConfig) -> List[Any]:
    """Grid of the sweep axis in increasing evaluation order."""
    if config.axis == "N":
        lo, hi = int(round(config.start)), int(round(config.stop))
        if config.points > abs(hi - lo) + 1:
            raise ConfigError(f"{config.points} points do not fit in N = {lo}..{hi}")
        grid = np.linspace(lo, hi, config.points, endpoint=config.endpoint)
        values = [int(round(v)) for v in grid]
        if len(set(values)) != len(values):
            raise ConfigError("N grid has repeated values; reduce points")
        return values
    return [float(v) for v in np.linspace(config.start, config.stop, config.points,
                                          endpoint=config.endpoint)]


def _point(args):
    config, value, with_qfi, with_cfi = args
    return evaluate(config.replace(**{config.axis: value}), with_qfi, with_cfi)


def sweep(config: RunConfig) -> List[ResultRecord]:
    """Evaluate every grid point; records come back in axis order for any ``jobs``."""
    if config.axis is None:
        raise ConfigError("sweep needs an axis")
    with_qfi = config.measure in ("qfi", "both")
    with_cfi = config.measure in ("cfi", "both")
    tasks = [(config, v, with_qfi, with_cfi) for v in axis_values(config)]
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(_point, tasks))
    return [_point(t) for t in tasks]


# ---------------------------------------------------------------------------
# output


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    if isinstance(value, tuple):
        return " ".join(f"{float(v):.12g}" for v in value)
    return str(value)


def _columns(records: Sequence[ResultRecord]):
    inputs = sorted(records[0].inputs, key=lambda k: (k.lower(), k))
    alternates = [c for c in ALTERNATE_COLUMNS if any(c in r.alternates for r in records)]
    return inputs, list(OUTPUT_COLUMNS) + alternates


def to_csv(records: Sequence[ResultRecord]) -> str:
    """Inputs in alphabetical order, then outputs; wall time is left out so
    identical runs give identical bytes."""
    if not records:
        return ""
    inputs, outputs = _columns(records)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(inputs + outputs)
    for r in records:
        merged = {**r.outputs, **r.alternates}
        w.writerow([format_cell(r.inputs[k]) for k in inputs]
                   + [format_cell(merged.get(k)) for k in outputs])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


def to_json(records: Sequence[ResultRecord]) -> str:
    rows = []
    for r in records:
        rows.append({
            "inputs": {k: _jsonable(v) for k, v in r.inputs.items()},
            "outputs": {k: _jsonable(v) for k, v in {**r.outputs, **r.alternates}.items()},
            "wall_time": r.wall_time,
        })
    return json.dumps(rows, indent=2, sort_keys=True) + "\n"


def render(records: Sequence[ResultRecord], fmt: str) -> str:
    return to_csv(records) if fmt == "csv" else to_json(records)
