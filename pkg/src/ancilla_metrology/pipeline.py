"""Fisher information of the simulated circuit by each available route."""
from __future__ import annotations

import logging
import math
from typing import Optional, Tuple

import numpy as np

from . import fisher, protocol
from .errors import ConfigError
from .fisher import FisherReport, GeneratorSpec
from .protocol import AncillaPrep, ProbePrep, ProtocolParams, Schedule

logger = logging.getLogger(__name__)

QFI_METHODS = ("pure", "sld", "spectral", "auto", "all")


def _run_at(params, prep, ancilla, schedule, theta, derivative=True):
    return protocol.run(params.replace(theta=theta), prep, ancilla, schedule, derivative)


def spectral_validity(
    params: ProtocolParams,
    prep: ProbePrep,
    ancilla: Optional[AncillaPrep] = None,
    schedule: Optional[Schedule] = None,
    tol: float = 1e-10,
) -> Tuple[bool, str]:
    """Whether the closed spectral formula applies to this circuit.

    It needs the synchronous schedule, an ancilla in ``|+>`` or ``|->``,
    ``g t1`` an odd multiple of ``pi/2`` and both effective branch maps
    proportional to unitaries.
    """
    ancilla = ancilla or AncillaPrep()
    schedule = schedule or Schedule()
    if schedule.variant != "synchronous":
        return False, "encoding and measurement are not synchronous"
    if ancilla.kind not in ("plus", "minus"):
        return False, "ancilla is not a sigma_x eigenstate"
    if abs(math.cos(params.g * params.t1)) > 1e-9:
        return False, "g t1 is not an odd multiple of pi/2"
    for s in protocol.SIGNS:
        mod2 = np.abs(protocol.branch_kraus(params, ancilla, s)) ** 2
        if np.ptp(mod2) > tol:
            return False, "effective branch map is not unitary (omega_A off the optimal set)"
    return True, "ok"


def spectral_total(params: ProtocolParams, prep: ProbePrep) -> float:
    weights, vectors = protocol.probe_spectrum(prep, params)
    gen = GeneratorSpec.measured(params.dim, params.omega_p, params.g, params.t1)
    return fisher.qfi_spectral(weights, vectors, gen)


def _pure_report(params, prep, ancilla, schedule, derivative="insertion") -> FisherReport:
    theta = params.theta
    if derivative == "insertion":
        result = _run_at(params, prep, ancilla, schedule, theta)
        if not result.branches[0].is_pure:
            raise ConfigError("pure-branch QFI needs a pure probe")
        return fisher.qfi_pure_branches(
            lambda t: [b.raw for b in result.branches],
            theta,
            derivative=lambda t: [b.raw_derivative for b in result.branches],
        )
    if not prep.is_pure:
        raise ConfigError("pure-branch QFI needs a pure probe")
    return fisher.qfi_pure_branches(
        lambda t: [b.raw for b in _run_at(params, prep, ancilla, schedule, t, False).branches],
        theta,
    )


def _raw_density(branch):
    return np.outer(branch.raw, branch.raw.conj()) if branch.is_pure else branch.raw


def _sld_report(params, prep, ancilla, schedule, derivative="fd") -> FisherReport:
    theta = params.theta
    result = _run_at(params, prep, ancilla, schedule, theta, derivative != "fd")
    live = [k for k, b in enumerate(result.branches) if not b.is_null]
    values = [0.0, 0.0]
    if derivative == "fd":
        def family(t):
            branches = _run_at(params, prep, ancilla, schedule, t, False).branches
            return np.stack([_raw_density(branches[k]) / branches[k].probability for k in live])

        rhos = family(theta)
        drhos = fisher.central_difference(family, theta)
        for k, rho, drho in zip(live, rhos, drhos):
            values[k] = result.branches[k].probability * fisher.sld_qfi(rho, drho)
    else:
        for k in live:
            branch = result.branches[k]
            raw = _raw_density(branch)
            if branch.is_pure:
                draw = np.outer(branch.raw_derivative, branch.raw.conj())
                draw = draw + draw.conj().T
            else:
                draw = branch.raw_derivative
            p, dp = branch.probability, branch.probability_derivative()
            values[k] = p * fisher.sld_qfi(branch.density(), draw / p - raw * dp / p ** 2)
    return FisherReport(
        theta=theta,
        prob_plus=result.branches[0].probability,
        prob_minus=result.branches[1].probability,
        fq_plus_eff=values[0],
        fq_minus_eff=values[1],
        fq_total=values[0] + values[1],
        method="sld-fd" if derivative == "fd" else "sld-insertion",
    )


def circuit_qfi(
    params: ProtocolParams,
    prep: ProbePrep,
    ancilla: Optional[AncillaPrep] = None,
    schedule: Optional[Schedule] = None,
    method: str = "auto",
    derivative: Optional[str] = None,
) -> FisherReport:
    """Total effective QFI of the circuit at ``params.theta``.

    ``method``:

    * ``pure`` -- branch-vector formula (exact derivative by default);
    * ``sld`` -- SLD oracle on branch density matrices (finite differences
      by default, ``derivative='insertion'`` for the exact derivative);
    * ``spectral`` -- closed spectral formula; raises outside its domain;
    * ``auto`` -- ``pure`` for pure probes, exact-derivative ``sld`` otherwise;
    * ``all`` -- every applicable route, the primary one in the main fields
      and the others in ``alternates``.
    """
    ancilla = ancilla or AncillaPrep()
    schedule = schedule or Schedule()
    if method not in QFI_METHODS:
        raise ConfigError(f"unknown QFI method {method!r}")
    if method == "pure":
        return _pure_report(params, prep, ancilla, schedule, derivative or "insertion")
    if method == "sld":
        return _sld_report(params, prep, ancilla, schedule, derivative or "fd")
    if method == "auto":
        if prep.is_pure:
            return _pure_report(params, prep, ancilla, schedule)
        return _sld_report(params, prep, ancilla, schedule, "insertion")
    if method == "spectral":
        ok, why = spectral_validity(params, prep, ancilla, schedule)
        if not ok:
            raise ConfigError(f"spectral formula not applicable: {why}")
        probs = _run_at(params, prep, ancilla, schedule, params.theta, False).probabilities
        total = spectral_total(params, prep)
        return FisherReport(params.theta, probs[0], probs[1], math.nan, math.nan, total, "spectral")

    # all
    sld = _sld_report(params, prep, ancilla, schedule, "fd")
    alternates = {"sld": sld.fq_total}
    primary = sld
    if prep.is_pure:
        primary = _pure_report(params, prep, ancilla, schedule)
        alternates["pure"] = primary.fq_total
    ok, why = spectral_validity(params, prep, ancilla, schedule)
    if ok:
        alternates["spectral"] = spectral_total(params, prep)
    else:
        logger.info("spectral formula out of its validity domain: %s", why)
        alternates["spectral"] = math.nan
    return FisherReport(
        theta=primary.theta,
        prob_plus=primary.prob_plus,
        prob_minus=primary.prob_minus,
        fq_plus_eff=primary.fq_plus_eff,
        fq_minus_eff=primary.fq_minus_eff,
        fq_total=primary.fq_total,
        method=primary.method,
        alternates=alternates,
    )


def jz_distribution_family(params, prep, ancilla=None, schedule=None, exact=True):
    """Jz-readout distribution over ``(m, sign)`` as a function of theta."""
    def evaluator(t):
        return protocol.outcome_distribution(_run_at(params, prep, ancilla, schedule, t, False))

    def derivative(t):
        return protocol.outcome_distribution_derivative(_run_at(params, prep, ancilla, schedule, t))

    return fisher.DistributionFamily(evaluator, derivative if exact else None)


def circuit_cfi(
    params: ProtocolParams,
    prep: ProbePrep,
    ancilla: Optional[AncillaPrep] = None,
    schedule: Optional[Schedule] = None,
    exact: bool = True,
    strict: bool = True,
    limit: bool = False,
) -> float:
    """CFI of the Jz projective readout of the probe, both signs recorded.

    ``limit`` resolves isolated 0/0 points by continuity, see :func:`fisher.cfi`.
    """
    family = jz_distribution_family(params, prep, ancilla, schedule, exact)
    return fisher.cfi(family, params.theta, strict=strict, limit=limit)
