"""
Figure datasets: QFI versus N, versus time or delay, and CFI versus theta.

Each builder returns ``(columns, rows, manifest)``.  Shared parameters:
``g = 1``, ``omega_P = 10 g``, ``t1 = pi/(2g)``, ancilla ``|+>`` and
``omega_A`` from the unitary-branch condition with the parity rule for
``n2``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from .. import analytic, pipeline
from ..errors import ConfigError
from ..protocol import ProbePrep, ProtocolParams, Schedule
from .runner import format_cell

G = 1.0
OMEGA_P = 10.0
FIG2_BETAS = (2.0, 1.0, 0.1)
FIG2_N = tuple(range(1, 151))
FIG3_N = (2, 10, 100)
FIG3_BETA = 1.0
FIG3_POINTS = 121
FIG4_N = 10
FIG4_BETAS = (0.1, 0.5, 1.0, 2.0, 10.0)
FIG4_POINTS = 180

FIG3_VARIANTS = {
    "fig3a": ("t1", "polarized"),
    "fig3b": ("t1", "thermal"),
    "fig3c": ("measurement_delay", "polarized"),
    "fig3d": ("measurement_delay", "thermal"),
    "fig3e": ("encoding_delay", "polarized"),
    "fig3f": ("encoding_delay", "thermal"),
}
FIGURES = ("fig2",) + tuple(FIG3_VARIANTS) + ("fig4",)


def _base(N: int, theta: float = 0.0) -> ProtocolParams:
    return ProtocolParams.optimized(N, g=G, omega_p=OMEGA_P, theta=theta)


def _prep(kind: str, frame_t1: float, beta: float = FIG3_BETA) -> ProbePrep:
    if kind == "polarized":
        return ProbePrep.polarized(1, frame_t1)
    return ProbePrep.thermal(beta, frame_t1)


def _common_manifest(Ns) -> Dict:
    t1 = _base(1).t1
    return {
        "g": G,
        "omega_p": OMEGA_P,
        "t1_opt": t1,
        "n1": 0,
        "ancilla": "plus",
        "n2_rule": "(9 - N) // 2 for odd N, (10 - N) // 2 for even N",
        "omega_a": {str(N): _base(N).omega_a for N in Ns},
        "probe_frame_t1": t1,
    }


# ---------------------------------------------------------------------------
# row evaluators (top level so they can run in worker processes)


def _fig2_row(task):
    N, beta = task
    p = _base(N)
    oracle = pipeline.circuit_qfi(p, ProbePrep.thermal(beta, p.t1), method="sld").fq_total
    return (N, beta, analytic.thermal_qfi_exact(N, beta),
            analytic.thermal_qfi_lower_bound(N, beta), oracle)


def _fig3_row(task):
    variant, kind, N, x = task
    base = _base(N)
    prep = _prep(kind, base.t1)
    if variant == "t1":
        rep = pipeline.circuit_qfi(base.replace(t1=x), prep)
    else:
        rep = pipeline.circuit_qfi(base, prep, schedule=Schedule(variant, x))
    return (x, N, rep.fq_total / N ** 2, rep.prob_plus)


def _fig4_row(task):
    beta, theta = task
    p = _base(FIG4_N, theta)
    prep = ProbePrep.thermal(beta, p.t1)
    fq = pipeline.circuit_qfi(p, prep).fq_total
    fc = pipeline.circuit_cfi(p, prep, strict=False)
    return (theta, beta, fc / FIG4_N ** 2, fq / FIG4_N ** 2)


def _map(fn, tasks, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [fn(t) for t in tasks]


# ---------------------------------------------------------------------------
# builders


def fig2(jobs: int = 1):
    tasks = [(N, beta) for beta in FIG2_BETAS for N in FIG2_N]
    rows = _map(_fig2_row, tasks, jobs)
    columns = ("N", "beta", "fq_exact", "fq_bound", "fq_sld_oracle")
    manifest = {
        "description": "QFI versus N for a thermal probe",
        "betas": list(FIG2_BETAS),
        "N_grid": f"{FIG2_N[0]}..{FIG2_N[-1]}",
        "N_grid_note": "chosen for this dataset",
        "fq_exact": "closed-form thermal sum",
        "fq_bound": "large-N lower bound (not meaningful for small N)",
        "fq_sld_oracle": "SLD QFI of the simulated circuit, finite-difference derivative",
        **_common_manifest(FIG2_N),
    }
    return columns, rows, manifest


def fig3(fig_id: str, jobs: int = 1):
    variant, kind = FIG3_VARIANTS[fig_id]
    grid = np.linspace(0.0, math.pi / G, FIG3_POINTS)
    tasks = [(variant, kind, N, float(x)) for N in FIG3_N for x in grid]
    rows = _map(_fig3_row, tasks, jobs)
    xname = "g_t1" if variant == "t1" else "g_dt"
    columns = (xname, "N", "fq_over_n2", "prob_plus")
    what = {
        "t1": "F_Q/N^2 versus the joint evolution time",
        "measurement_delay": "F_Q/N^2 versus the delay of the ancilla measurement after encoding",
        "encoding_delay": "F_Q/N^2 versus the delay of the encoding after the ancilla measurement",
    }[variant]
    manifest = {
        "description": what,
        "probe": kind,
        "beta": FIG3_BETA if kind == "thermal" else None,
        "grid": {"axis": xname, "start": 0.0, "stop": math.pi / G, "points": FIG3_POINTS},
        "N_values": list(FIG3_N),
        "note": "omega_A and the probe frame stay at their t1_opt values when t1 is swept",
        **_common_manifest(FIG3_N),
    }
    return columns, rows, manifest


def fig4(jobs: int = 1):
    grid = np.linspace(0.0, 2 * math.pi, FIG4_POINTS, endpoint=False)
    tasks = [(beta, float(t)) for beta in FIG4_BETAS for t in grid]
    rows = _map(_fig4_row, tasks, jobs)
    columns = ("theta", "beta", "fc_over_n2", "fq_over_n2")
    manifest = {
        "description": "CFI of a Jz readout versus theta for thermal probes, with the QFI",
        "N": FIG4_N,
        "betas": list(FIG4_BETAS),
        "grid": {"axis": "theta", "start": 0.0, "stop": 2 * math.pi, "points": FIG4_POINTS,
                 "endpoint": False},
        "readout": "Jz projective measurement of the probe, both ancilla outcomes recorded",
        **_common_manifest((FIG4_N,)),
    }
    return columns, rows, manifest


def build(fig_id: str, jobs: int = 1):
    if fig_id == "fig2":
        return fig2(jobs)
    if fig_id in FIG3_VARIANTS:
        return fig3(fig_id, jobs)
    if fig_id == "fig4":
        return fig4(jobs)
    raise ConfigError(f"unknown figure {fig_id!r}; choose from {', '.join(FIGURES)}")


def render(columns, rows, manifest, fig_id: str) -> Tuple[str, str]:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_cell(v) for v in row])
    meta = {"figure": fig_id, "columns": list(columns), "rows": len(rows), **manifest}
    return buf.getvalue(), json.dumps(meta, indent=2, sort_keys=True) + "\n"


def write(fig_id: str, out_dir, jobs: int = 1) -> List[Path]:
    """Write ``<fig_id>.csv`` and ``<fig_id>.manifest.json`` into ``out_dir``."""
    columns, rows, manifest = build(fig_id, jobs)
    text, meta = render(columns, rows, manifest, fig_id)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, meta_path = out / f"{fig_id}.csv", out / f"{fig_id}.manifest.json"
    csv_path.write_text(text)
    meta_path.write_text(meta)
    return [csv_path, meta_path]
