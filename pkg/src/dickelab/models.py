"""Concrete open-system models: the effective driven-Dicke master equation
and the full atom+cavity model it is derived from, plus the cross-check
between the two.

Both Hamiltonians are written in the frame rotating at the laser
frequency, where they are time independent:

* Dicke:   H = -Delta J_+ J_-  - (Omega J_+ + conj(Omega) J_-) - delta J_z,
           one collapse channel J_- at rate gamma.
* Cavity:  H = -delta J_z - delta_c c^dag c
               + [ c^dag (conj(g) J_- + Omega_L) + h.c. ],
           one collapse channel c at rate kappa.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionCapError, NoConvergence
from .lindblad import (
    Liouvillian,
    SteadyStateOptions,
    build_liouvillian,
    expect,
    steady_state,
)
from .operators import (
    FockRep,
    OperatorMatrix,
    SpinRep,
    build_fock_operators,
    build_spin_operators,
    tensor,
)
from .parameters import CavityParams, EffectiveParams, map_cavity_to_effective

# Desk-scale dimension caps: the Dicke chain stays banded up to a few
# hundred atoms, the product space grows much faster.
DICKE_ATOM_CAP = 400
CAVITY_PRODUCT_CAP = 600


@dataclass(frozen=True)
class DickeModel:
    effective: EffectiveParams
    rep: SpinRep
    ops: dict
    liouvillian: Liouvillian


@dataclass(frozen=True)
class CavityModel:
    cavity: CavityParams
    spin_rep: SpinRep
    fock_rep: FockRep
    ops: dict
    liouvillian: Liouvillian


@dataclass(frozen=True)
class EliminationReport:
    """Full-model vs eliminated-model steady-state comparison.

    ``full`` and ``effective`` hold <J_z>, <J_->, <J_+J_-> per model;
    ``deviation_abs``/``deviation_rel`` the per-observable distances. The
    J_z deviation is measured relative to N/2, the others relative to the
    effective-model magnitude.
    """

    full: dict
    effective: dict
    deviation_abs: dict
    deviation_rel: dict
    fock_cutoff: int
    adiabaticity_ratio: float
    cutoff_converged: bool
    passed: bool


def build_dicke_model(e: EffectiveParams, atom_cap: int = DICKE_ATOM_CAP) -> DickeModel:
    """Driven-Dicke Liouvillian on the (N+1)-dimensional symmetric block."""
    if e.N > atom_cap:
        raise DimensionCapError(f"N = {e.N} exceeds the Dicke cap {atom_cap}")
    rep = SpinRep.for_atoms(e.N)
    ops = build_spin_operators(rep)

    H = -e.Delta * (ops["J_plus"] @ ops["J_minus"]) - (
        e.Omega * ops["J_plus"] + np.conj(e.Omega) * ops["J_minus"]
    )
    if e.delta != 0.0:
        H = H - e.delta * ops["J_z"]
    liouv = build_liouvillian(H, [(e.gamma, ops["J_minus"])])
    return DickeModel(effective=e, rep=rep, ops=ops, liouvillian=liouv)


def default_fock_cutoff(p: CavityParams) -> int:
    """Photon truncation from the empty-cavity amplitude estimate.

    Below threshold the intracavity field is nearly coherent and small
    (the collective dipole cancels most of the drive), so the atom-free
    amplitude is a conservative bound.
    """
    amp = abs(p.Omega_L) / math.hypot(p.delta_c, p.kappa / 2)
    return int(math.ceil(4.0 * (amp**2 + 1.0))) + 6


def build_cavity_model(p: CavityParams, cutoff: FockRep | int | None = None,
                       product_cap: int = CAVITY_PRODUCT_CAP) -> CavityModel:
    """Atom+cavity Liouvillian on the spin (slow) x Fock (fast) space."""
    if cutoff is None:
        cutoff = default_fock_cutoff(p)
    fock = cutoff if isinstance(cutoff, FockRep) else FockRep(cutoff=int(cutoff))
    spin = SpinRep.for_atoms(p.N)
    total = spin.dim * fock.dim
    if total > product_cap:
        raise DimensionCapError(
            f"product dimension {spin.dim}*{fock.dim} = {total} exceeds cap {product_cap}"
        )

    sops = build_spin_operators(spin)
    bops = build_fock_operators(fock)
    eye_s = OperatorMatrix.identity(spin.dim, basis="dicke")
    eye_f = OperatorMatrix.identity(fock.dim, basis="fock")

    lift = {
        "J_minus": tensor(sops["J_minus"], eye_f),
        "J_plus": tensor(sops["J_plus"], eye_f),
        "J_x": tensor(sops["J_x"], eye_f),
        "J_y": tensor(sops["J_y"], eye_f),
        "J_z": tensor(sops["J_z"], eye_f),
        "c": tensor(eye_s, bops["c"]),
        "c_dagger": tensor(eye_s, bops["c_dagger"]),
    }
    n_phot = lift["c_dagger"] @ lift["c"]
    lift["photon_number"] = n_phot

    H = (
        -p.delta_c * n_phot
        + np.conj(p.g) * (lift["c_dagger"] @ lift["J_minus"])
        + p.g * (lift["J_plus"] @ lift["c"])
        + p.Omega_L * lift["c_dagger"]
        + np.conj(p.Omega_L) * lift["c"]
    )
    if p.delta != 0.0:
        H = H - p.delta * lift["J_z"]
    liouv = build_liouvillian(H, [(p.kappa, lift["c"])])
    return CavityModel(cavity=p, spin_rep=spin, fock_rep=fock, ops=lift, liouvillian=liouv)


def _atomic_observables(rho, ops) -> dict:
    jpjm = ops["J_plus"] @ ops["J_minus"]
    return {
        "Jz": expect(rho, ops["J_z"]).real,
        "Jminus": expect(rho, ops["J_minus"]),
        "JpJm": expect(rho, jpjm).real,
    }


def _cavity_side_observables(p: CavityParams, cutoff, solve_opts) -> dict:
    model = build_cavity_model(p, cutoff)
    rho, _ = steady_state(model.liouvillian, solve_opts)
    obs = _atomic_observables(rho, model.ops)
    obs["photons"] = expect(rho, model.ops["photon_number"]).real
    return obs


def fock_cutoff_converged(p: CavityParams, cutoff: int, *, rtol: float = 1e-3,
                          solve_opts: SteadyStateOptions | None = None) -> bool:
    """Whether growing the photon truncation by five leaves the steady
    observables (inversion and photon number) within ``rtol``."""
    lo = _cavity_side_observables(p, cutoff, solve_opts)
    hi = _cavity_side_observables(p, cutoff + 5, solve_opts)
    scale_jz = max(abs(hi["Jz"]), p.N / 2 * 1e-3)
    scale_ph = max(abs(hi["photons"]), 1e-6)
    return (
        abs(hi["Jz"] - lo["Jz"]) <= rtol * scale_jz
        and abs(hi["photons"] - lo["photons"]) <= rtol * scale_ph
    )


def validate_elimination(
    p: CavityParams,
    cutoff: FockRep | int | None = None,
    *,
    min_adiabaticity: float = 5.0,
    solve_opts: SteadyStateOptions | None = None,
    jz_pass_fraction: float = 0.05,
) -> EliminationReport:
    """Compare the full atom+cavity steady state against the eliminated
    Dicke model built from the mapped parameters.

    The comparison is meaningful when the cavity damping outruns the
    collective dynamics; the ratio kappa/(sqrt(N)|g|) is reported and a
    value below ``min_adiabaticity`` only warns, since mapping the
    breakdown is itself useful.
    """
    ratio = p.adiabaticity_ratio
    if ratio < min_adiabaticity:
        warnings.warn(
            f"adiabaticity ratio {ratio:.3g} below {min_adiabaticity}; "
            "the eliminated model is not expected to be accurate",
            stacklevel=2,
        )
    base_cutoff = (cutoff.cutoff if isinstance(cutoff, FockRep) else cutoff)
    if base_cutoff is None:
        base_cutoff = default_fock_cutoff(p)

    e = map_cavity_to_effective(p)
    dicke = build_dicke_model(e)
    rho_eff, _ = steady_state(dicke.liouvillian, solve_opts)
    eff = _atomic_observables(rho_eff, dicke.ops)

    halfN = p.N / 2

    def deviations(full):
        dev_abs = {
            "Jz": abs(full["Jz"] - eff["Jz"]),
            "Jminus": abs(full["Jminus"] - eff["Jminus"]),
            "JpJm": abs(full["JpJm"] - eff["JpJm"]),
        }
        dev_rel = {
            "Jz": dev_abs["Jz"] / halfN,
            "Jminus": dev_abs["Jminus"] / max(abs(eff["Jminus"]), 1e-12),
            "JpJm": dev_abs["JpJm"] / max(abs(eff["JpJm"]), 1e-12),
        }
        return dev_abs, dev_rel

    full_lo = _cavity_side_observables(p, base_cutoff, solve_opts)
    dev_lo, _ = deviations(full_lo)
    full_hi = _cavity_side_observables(p, base_cutoff + 5, solve_opts)
    dev_hi, dev_rel_hi = deviations(full_hi)

    # changes far below the pass scale never count as non-convergence
    floor = 1e-4 * halfN
    converged = all(
        abs(dev_hi[k] - dev_lo[k]) <= 0.1 * max(dev_lo[k], floor) for k in dev_lo
    )
    if not converged:
        raise NoConvergence(
            f"Fock cutoff {base_cutoff} not converged: deviations moved from "
            f"{dev_lo} to {dev_hi} when the cutoff grew by 5"
        )

    passed = dev_rel_hi["Jz"] <= jz_pass_fraction
    return EliminationReport(
        full=full_hi,
        effective=eff,
        deviation_abs=dev_hi,
        deviation_rel=dev_rel_hi,
        fock_cutoff=base_cutoff + 5,
        adiabaticity_ratio=ratio,
        cutoff_converged=converged,
        passed=passed,
    )
