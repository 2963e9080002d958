"""
Acceptance checks shared by ``validate`` and the test-suite.

Every check returns a :class:`Check` with the worst measured residual.  An
``agree_tol`` override replaces the numerical-agreement tolerances (the
``1e-8``/``1e-6``/``1e-10`` ones), never the windows around quoted values.
Known tensions with reference values come back as ``WARN``.
"""
from __future__ import annotations

import math
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from .. import analytic, pipeline, protocol
from ..fisher import GeneratorSpec, qfi_spectral
from ..protocol import ProbePrep, ProtocolParams, Schedule
from . import figures

PASS, FAIL, WARN = "PASS", "FAIL", "WARN"


@dataclass
class Check:
    criterion: str
    name: str
    status: str
    measured: float
    target: Optional[float]
    residual: float
    tol: Optional[float]
    detail: str = ""

    def line(self) -> str:
        tol = "" if self.tol is None else f" tol={self.tol:.3g}"
        target = "" if self.target is None else f" target={self.target:.6g}"
        return (f"[{self.status}] {self.criterion} {self.name}: measured={self.measured:.10g}"
                f"{target} residual={self.residual:.3g}{tol} {self.detail}").rstrip()

    def as_dict(self) -> Dict:
        return asdict(self)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


def _worst(criterion, name, residuals, tol, measured=None, target=None, detail=""):
    worst = float(max(residuals)) if len(residuals) else 0.0
    return Check(criterion, name, _status(worst <= tol), worst if measured is None else measured,
                 target, worst, tol, detail)


# ---------------------------------------------------------------------------


def heisenberg_scaling(agree_tol=None) -> List[Check]:
    tol = agree_tol or 1e-8
    preps = {
        "|j,j>_opt": lambda t: ProbePrep.polarized(1, t),
        "|j,-j>_opt": lambda t: ProbePrep.polarized(-1, t),
        "0.6|j,j>+0.8|j,-j>": lambda t: ProbePrep.superposed(0.6, 0.8, 0.0, t),
    }
    out = []
    for label, make in preps.items():
        res = []
        for N in range(1, 61):
            p = ProtocolParams.optimized(N)
            res.append(_rel(pipeline.circuit_qfi(p, make(p.t1)).fq_total, N * N))
        out.append(_worst("C1", f"F_Q = N^2 for N=1..60, {label}", res, tol))
    return out


def branch_probabilities(agree_tol=None) -> List[Check]:
    tol = agree_tol or 1e-10
    thetas = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    out = []
    for N, label in ((2, "polarized"), (5, "polarized"), (10, "polarized"), (10, "thermal")):
        p0 = ProtocolParams.optimized(N)
        prep = ProbePrep.polarized(1, p0.t1) if label == "polarized" else ProbePrep.thermal(1.0, p0.t1)
        res = []
        for t in thetas:
            probs = protocol.run(p0.replace(theta=float(t)), prep, derivative=False).probabilities
            res.extend(abs(q - 0.5) for q in probs)
        out.append(_worst("C2", f"p(+-) = 1/2 over 50 thetas, N={N} {label}", res, tol))
    return out


def _oracle_thermal(N, beta):
    p = ProtocolParams.optimized(N)
    return pipeline.circuit_qfi(p, ProbePrep.thermal(beta, p.t1), method="sld").fq_total


def thermal_values(agree_tol=None) -> List[Check]:
    tol = agree_tol or 1e-6
    out = []
    for beta, target, window in ((2.0, 0.946, 0.005), (1.0, 0.82, 0.01)):
        exact = analytic.thermal_qfi_exact(10, beta)
        oracle = _oracle_thermal(10, beta)
        for name, value in (("closed form", exact), ("SLD oracle", oracle)):
            r = abs(value / 100 - target)
            out.append(Check("C3", f"F_Q/N^2 at N=10 beta={beta:g} ({name})", _status(r <= window),
                             value / 100, target, r, window))
        r = _rel(oracle, exact)
        out.append(Check("C3", f"closed form vs SLD oracle, N=10 beta={beta:g}", _status(r <= tol),
                         oracle / 100, exact / 100, r, tol))
    return out


def thermal_tensions() -> List[Check]:
    """Comparisons against quoted small-N / small-beta numbers; never FAIL."""
    out = []
    v = analytic.thermal_qfi_exact(2, 1.0) / 4
    o = _oracle_thermal(2, 1.0) / 4
    out.append(Check("C3w", "quoted F_Q/N^2 = 0.75 at N=2 beta=1", WARN, v, 0.75, abs(v - 0.75), None,
                     f"closed form {v:.6f}, SLD oracle {o:.6f}"))
    v = analytic.thermal_qfi_exact(10, 0.1) / 100
    o = _oracle_thermal(10, 0.1) / 100
    out.append(Check("C3w", "quoted beta=0.1 bound 0.415 at N=10", WARN, v, 0.415, abs(v - 0.415), None,
                     f"closed form {v:.6f}, SLD oracle {o:.6f}; 4<m^2>/N^2 = "
                     f"{analytic.thermal_mean_square(10, 0.1) / 100:.6f}"))
    return out


def thermal_bound(agree_tol=None) -> List[Check]:
    # the two sides tie to the last ulp once the tail term underflows
    tie = 1e-12
    worst, where = math.inf, None
    for N in range(10, 201, 10):
        for beta in (0.5, 1.0, 2.0):
            gap = (analytic.thermal_qfi_exact(N, beta) - analytic.thermal_qfi_lower_bound(N, beta)) / N ** 2
            if gap < worst:
                worst, where = gap, (N, beta)
    out = [Check("C4", "exact >= bound, N=10..200, beta in {0.5,1,2}", _status(worst >= -tie),
                 worst, 0.0, max(0.0, -worst), tie, f"smallest (exact-bound)/N^2 at N,beta={where}")]
    v = analytic.thermal_qfi_exact(50, 16.0) / 2500
    out.append(Check("C4", "exact -> N^2 at N=50 beta=16", _status(abs(v - 1) <= 1e-3), v, 1.0,
                     abs(v - 1), 1e-3))
    return out


def measurement_delay(agree_tol=None) -> List[Check]:
    tol = agree_tol or 1e-8
    out = []
    for N in (2, 10):
        p = ProtocolParams.optimized(N)
        prep = ProbePrep.polarized(1, p.t1)
        res = []
        for k in range(31):
            dt = 0.05 * k
            sim = pipeline.circuit_qfi(p, prep, schedule=Schedule("measurement_delay", dt)).fq_total
            ref = analytic.measurement_delay_qfi(N, dt, p.omega_a, p.t1, 0.0, p.g)
            res.append(_rel(sim, ref))
        out.append(_worst("C5", f"measurement delay vs closed form, N={N}, g dt=0..1.5", res, tol))
        sim0 = pipeline.circuit_qfi(p, prep, schedule=Schedule("measurement_delay", 0.0)).fq_total
        r = _rel(sim0, N * N)
        out.append(Check("C5", f"dt=0 gives N^2, N={N}", _status(r <= tol), sim0, N * N, r, tol))
    return out


def encoding_delay(agree_tol=None) -> List[Check]:
    tol = agree_tol or 1e-8
    out = []
    for N in (2, 10):
        p = ProtocolParams.optimized(N)
        prep = ProbePrep.polarized(1, p.t1)
        res = []
        for dt in np.linspace(0, math.pi, 61):
            sim = pipeline.circuit_qfi(p, prep, schedule=Schedule("encoding_delay", float(dt))).fq_total
            res.append(_rel(sim, analytic.encoding_delay_qfi(N, float(dt), p.g, p.omega_p)))
        out.append(_worst("C6", f"encoding delay vs closed form, N={N}, g dt in [0, pi]", res, tol))
        sim = pipeline.circuit_qfi(p, prep, schedule=Schedule("encoding_delay", math.pi)).fq_total
        r = _rel(sim, N * N)
        out.append(Check("C6", f"Heisenberg recovery at g dt = pi, N={N}", _status(r <= tol),
                         sim, N * N, r, tol))

    def gap(dt):
        return abs(analytic.encoding_delay_qfi_quadratic(10, dt, 1.0, 10.0)
                   - analytic.encoding_delay_qfi(10, dt, 1.0, 10.0))

    ratio = gap(0.01) / gap(0.005)
    out.append(Check("C6", "quadratic form error is O(dt^4) (ratio at dt, dt/2)",
                     _status(abs(ratio / 16 - 1) <= 0.1), ratio, 16.0, abs(ratio / 16 - 1), 0.1))
    return out


def cfi_saturation(agree_tol=None) -> List[Check]:
    tol = agree_tol or 1e-8
    res = []
    for N in (2, 5, 10):
        for t2 in (0.0, 0.7, 3.1):
            for theta in (0.3, 1.1):
                p = ProtocolParams.optimized(N, t2=t2, theta=theta)
                res.append(_rel(pipeline.circuit_cfi(p, ProbePrep.polarized(1, p.t1)), N * N))
    return [_worst("C7", "Jz-readout CFI = N^2, N in {2,5,10}, t2 in {0,0.7,3.1}", res, tol)]


def cfi_bound(agree_tol=None, fig4_rows=None) -> List[Check]:
    if fig4_rows is None:
        _, fig4_rows, _ = figures.fig4()
    rows = np.array(fig4_rows, dtype=float)
    excess = (rows[:, 2] - rows[:, 3]) * figures.FIG4_N ** 2
    out = [Check("C8", "CFI <= QFI + 1e-9 on the theta/beta grid", _status(excess.max() <= 1e-9),
                 float(excess.max()), 0.0, max(0.0, float(excess.max())), 1e-9)]
    at2 = rows[rows[:, 1] == 2.0]
    peak = float(at2[:, 2].max())
    theta_peak = float(at2[np.argmax(at2[:, 2]), 0])
    out.append(Check("C8", "max_theta CFI/N^2 at beta=2", _status(abs(peak - 0.946) <= 0.005),
                     peak, 0.946, abs(peak - 0.946), 0.005, f"at theta={theta_peak:.4g}"))
    return out


QUOTED_CFI_PEAKS = ((2.0, 0.946), (1.0, 0.818), (0.1, 0.415))


def cfi_parity_reading(fig4_rows=None) -> List[Check]:
    """Quoted max-over-theta CFI values next to two readings of the circuit.

    ``measured`` is the maximum on the fig4 grid (unitary-branch omega_A).
    The detail adds the maximum with omega_A = 5g exactly, where the branch
    maps are not unitary, and ``4<m^2>/N^2``, which that reading reaches.
    """
    N = figures.FIG4_N
    if fig4_rows is None:
        _, fig4_rows, _ = figures.fig4()
    rows = np.array(fig4_rows, dtype=float)
    grid = np.linspace(0, 2 * np.pi, figures.FIG4_POINTS, endpoint=False)
    base = ProtocolParams.optimized(N).replace(omega_a=5.0)
    out = []
    for beta, quoted in QUOTED_CFI_PEAKS:
        peak = float(rows[rows[:, 1] == beta][:, 2].max())
        prep = ProbePrep.thermal(beta, base.t1)
        alt = max(pipeline.circuit_cfi(base.replace(theta=float(t)), prep, strict=False, limit=True)
                  for t in grid) / N ** 2
        m2 = analytic.thermal_mean_square(N, beta) / N ** 2
        out.append(Check("C8w", f"max CFI/N^2 at beta={beta:g} against the quoted value", WARN, peak,
                         quoted, abs(peak - quoted), None,
                         f"omega_A = 5g gives {alt:.6f}; 4<m^2>/N^2 = {m2:.6f}"))
    return out


def general_t1(agree_tol=None, fig3a_rows=None) -> List[Check]:
    tol = agree_tol or 1e-6
    if fig3a_rows is None:
        _, fig3a_rows, _ = figures.fig3("fig3a")
    rows = np.array(fig3a_rows, dtype=float)
    out = []
    for N in (2, 10):
        sub = rows[rows[:, 1] == N]
        x, f = sub[:, 0], sub[:, 2]
        k = int(np.argmax(f))
        ok = abs(x[k] - math.pi / 2) < 1e-12 and abs(f[k] - 1) <= 1e-8
        out.append(Check("C9", f"global maximum N^2 at g t1 = pi/2, N={N}", _status(ok), f[k], 1.0,
                         abs(f[k] - 1), 1e-8, f"argmax g t1={x[k]:.6f}"))
        res = np.abs(f - f[::-1]) / np.maximum(np.maximum(np.abs(f), np.abs(f[::-1])), 1e-300)
        out.append(_worst("C9", f"F(t1) = F(pi/g - t1), N={N}", res, tol))
    return out


def oracle_equivalence(agree_tol=None, seed=20240611, count=20) -> List[Check]:
    tol = agree_tol or 1e-6
    rng = np.random.default_rng(seed)
    res = []
    for _ in range(count):
        N = int(rng.integers(1, 13))
        a = float(rng.uniform(0.05, 0.95))
        b = math.sqrt(1 - a * a)
        phi = float(rng.uniform(0, 2 * np.pi))
        theta = float(rng.uniform(0, 2 * np.pi))
        p = ProtocolParams.optimized(N, theta=theta)
        rep = pipeline.circuit_qfi(p, ProbePrep.superposed(a, b, phi, p.t1), method="all")
        vals = [rep.alternates["pure"], rep.alternates["sld"], rep.alternates["spectral"]]
        ref = max(abs(v) for v in vals)
        res.append((max(vals) - min(vals)) / ref)
    return [_worst("C10", f"pure / SLD / spectral agree on {count} random probes", res, tol)]


def no_ancilla(agree_tol=None) -> List[Check]:
    tol = agree_tol or 1e-8
    ghz, pol = [], []
    for N in (1, 2, 5, 10):
        p = ProtocolParams(N, omega_p=10.0, omega_a=5.0, g=0.0, t1=math.pi / 2)
        f_ghz = pipeline.circuit_qfi(p, ProbePrep.superposed(1 / math.sqrt(2), 1 / math.sqrt(2), 0.0, p.t1))
        f_pol = pipeline.circuit_qfi(p, ProbePrep.polarized(1, p.t1))
        ghz.append(_rel(f_ghz.fq_total, N * N))
        pol.append(abs(f_pol.fq_total) / N ** 2)
        # the spectral form with the free generator gives the same numbers
        w, v = protocol.probe_spectrum(ProbePrep.superposed(1 / math.sqrt(2), 1 / math.sqrt(2), 0.0, p.t1), p)
        ghz.append(_rel(qfi_spectral(w, v, GeneratorSpec.free(N, p.omega_p, p.t1)), N * N))
    return [_worst("C11", "g=0: J_phi GHZ probe gives N^2", ghz, tol),
            _worst("C11", "g=0: polarized probe gives 0", pol, tol)]


def determinism(jobs: int = 1) -> List[Check]:
    from . import cli

    with tempfile.TemporaryDirectory() as d:
        blobs = []
        for k in range(2):
            out = Path(d) / f"run{k}"
            code = cli.main(["figure", "fig2", "--out", str(out), "--jobs", str(jobs)])
            if code != 0:
                return [Check("C12", "figure fig2 twice, byte-identical", FAIL, code, 0, 1, None,
                              f"exit code {code}")]
            blobs.append(tuple(p.read_bytes() for p in sorted(out.iterdir())))
    same = blobs[0] == blobs[1]
    return [Check("C12", "figure fig2 twice, byte-identical", _status(same), float(same), 1.0,
                  0.0 if same else 1.0, None)]


CRITERIA: Dict[str, Callable[..., List[Check]]] = {
    "C1": heisenberg_scaling,
    "C2": branch_probabilities,
    "C3": thermal_values,
    "C4": thermal_bound,
    "C5": measurement_delay,
    "C6": encoding_delay,
    "C7": cfi_saturation,
    "C8": cfi_bound,
    "C9": general_t1,
    "C10": oracle_equivalence,
    "C11": no_ancilla,
}
WARNINGS: Dict[str, Callable[[], List[Check]]] = {
    "C3w": thermal_tensions,
    "C8w": cfi_parity_reading,
}


def run_all(agree_tol=None, jobs: int = 1, include_determinism: bool = True) -> List[Check]:
    _, fig4_rows, _ = figures.fig4(jobs)
    checks: List[Check] = []
    for key, fn in CRITERIA.items():
        checks.extend(fn(agree_tol, fig4_rows) if key == "C8" else fn(agree_tol))
        if key == "C8":
            checks.extend(cfi_parity_reading(fig4_rows))
        elif key + "w" in WARNINGS:
            checks.extend(WARNINGS[key + "w"]())
    if include_determinism:
        checks.extend(determinism(jobs))
    return checks
