"""The acceptance property suite.

Nine oracle-backed checks covering the whole stack: classical
degeneration of formal powers, explicit-pair identities, the successor
chain, residual convergence of the generic construction, closed-form
cross-checks, the defining power properties, the integral theorems, the
wave-number bridge, and mode round trips.  Each check runs at desk scale
and reports pass/fail with measured numbers, so the suite doubles as the
CLI verification command and as the acceptance test module.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .fields import GridDomain
from .formal_powers import (FormalPowerSpec, formal_power, formal_power_batch,
                            formal_power_field)
from .hypernum import HyperbolicNumber
from .pseudoanalytic import Polyline, decompose, fg_derivative, fg_integral
from .zakharov_shabat import (Potential, W_to_modes, closed_form_power,
                              recombine_mode_residuals, spectral_solve,
                              vekua_zs_residual, zs_residual, zs_sequence)

H = HyperbolicNumber


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    limit_seconds: float
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] criterion {self.number} ({self.name}) "
                f"in {self.seconds:.2f}s: {self.details}")


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        result.seconds = time.perf_counter() - start
        return result

    return wrapper


def _hyper_power_grid(xx, tt, n):
    re = np.ones_like(xx)
    im = np.zeros_like(xx)
    for _ in range(n):
        re, im = re * xx + im * tt, re * tt + im * xx
    return re, im


@_timed
def criterion_1_classical_degeneration() -> CriterionResult:
    """Zero potential: generic powers equal plain powers on a 41 x 41 grid."""
    p = Potential.zero(x_range=(-0.5, 1.5))
    seq = zs_sequence(p, GridDomain(-0.5, 1.5, -0.5, 1.5, 3, 3))
    grid = GridDomain(0.1, 1.0, 0.1, 1.0, 41, 41)
    xx, tt = np.meshgrid(grid.x_nodes(), grid.t_nodes())
    worst = 0.0
    for n in range(6):
        spec = FormalPowerSpec(0, n, H(1, 0), H(0, 0))
        re, im = formal_power_batch(spec, seq, xx, tt, tol=1e-10)
        want_re, want_im = _hyper_power_grid(xx, tt, n)
        worst = max(worst, float(np.max(np.abs(re - want_re))),
                    float(np.max(np.abs(im - want_im))))
    return CriterionResult(1, "classical degeneration", worst <= 1e-8, 5.0,
                           details={"max_error": worst, "tolerance": 1e-8})


@_timed
def criterion_2_pair_identities() -> CriterionResult:
    """Algebraic identities of the explicit pair and its coefficients."""
    worst_id = 0.0
    worst_co = 0.0
    for p in (Potential.constant(1.0, x_range=(-2, 2)),
              Potential.sech(1, 1, x_range=(-2, 2))):
        seq = zs_sequence(p, GridDomain(-1, 1, -1, 1, 5, 5))
        pair = seq.pair(0)
        co = pair.coefficients()
        for x in np.linspace(-1.0, 1.0, 101):
            z = H(float(x), 0.31)
            Fv, Gv = pair.F(z), pair.G(z)
            worst_id = max(
                worst_id,
                abs((Fv.conj() * Gv).im - 1.0),
                abs(Fv * Fv + Gv * Gv - H(2, 0)),
                abs(Fv * Fv.conj() + Gv * Gv.conj()),
            )
            vals = co.at(z)
            want_b = H(0, -0.5 * p.s(z.re))
            worst_co = max(worst_co, abs(vals.A), abs(vals.B - want_b))
    ok = worst_id <= 1e-12 and worst_co <= 1e-12
    return CriterionResult(2, "pair identities", ok, 1.0,
                           details={"max_identity_error": worst_id,
                                    "max_coefficient_error": worst_co,
                                    "tolerance": 1e-12})


@_timed
def criterion_3_successor_period() -> CriterionResult:
    """The explicit sequence chains by succession and repeats with period 2."""
    p = Potential.sech(1, 1, x_range=(-2, 2))
    seq = zs_sequence(p, GridDomain(-1, 1, -1, 1, 5, 5))
    chain_ok = all(seq.check_successor(m, 1e-10) for m in range(4))
    gaps = [seq.coefficient_gap(m, m + 2) for m in (0, 1)]
    period_ok = max(gaps) <= 1e-12
    return CriterionResult(3, "successor chain and period", chain_ok and period_ok,
                           1.0, details={"successors_checked": 4,
                                         "max_period_gap": max(gaps),
                                         "tolerance": 1e-12})


@_timed
def criterion_4_residual_convergence() -> CriterionResult:
    """Finite-difference Vekua residuals of generic powers shrink at h^2."""
    p = Potential.sech(1, 1, x_range=(-2, 2))
    seq = zs_sequence(p, GridDomain(-1, 1, -1, 1, 5, 5))
    pts = [H(0.5, 0.6), H(-0.3, 0.45), H(0.65, -0.5),
           H(-0.6, -0.35), H(0.1, 0.8), H(0.72, 0.33)]
    steps = (4e-3, 2e-3, 1e-3)
    ratios = {}
    finest = {}
    ok = True
    for n in (1, 2):
        W = formal_power_field(FormalPowerSpec(0, n, H(1, 0), H(0.2, 0.1)),
                               seq, tol=1e-12)
        res = {h: max(abs(vekua_zs_residual(W, p, z, h=h)) for z in pts)
               for h in steps}
        pair_ratios = [res[steps[i]] / res[steps[i + 1]] for i in range(2)]
        ratios[n] = pair_ratios
        finest[n] = res[steps[-1]]
        ok = ok and all(3.5 <= r <= 4.5 for r in pair_ratios)
        ok = ok and finest[n] <= 5e-5
    return CriterionResult(4, "residual h^2 convergence", ok, 30.0,
                           details={"halving_ratios": ratios,
                                    "residual_at_1e-3": finest,
                                    "ratio_window": [3.5, 4.5],
                                    "tolerance": 5e-5})


@_timed
def criterion_5_closed_form_crosscheck() -> CriterionResult:
    """Published closed forms against the generic construction.

    Exponent 0 must match to rounding and exponent 1 to the quadrature
    budget.  The published exponent-2 expression is compared and its
    discrepancy reported; its correctness criterion is the residual check
    of criterion 4, not formula agreement.
    """
    grid = GridDomain(-0.9, 0.9, -0.9, 0.9, 21, 21)
    z0 = H(0.2, 0.1)
    a = H(1.0, 0.0)
    max0 = 0.0
    max1 = 0.0
    report2 = {}
    for p in (Potential.constant(1.0, x_range=(-2, 2)),
              Potential.sech(1, 1, x_range=(-2, 2))):
        seq = zs_sequence(p, GridDomain(-1, 1, -1, 1, 5, 5))
        xx, tt = np.meshgrid(grid.x_nodes(), grid.t_nodes())
        diffs2 = []
        for n in (0, 1, 2):
            spec = FormalPowerSpec(0, n, a, z0)
            re, im = formal_power_batch(spec, seq, xx, tt, tol=1e-10)
            for it in range(grid.nt):
                for ix in range(grid.nx):
                    z = H(float(xx[it, ix]), float(tt[it, ix]))
                    if n == 2 and abs(z.re - z0.re) < 1e-3:
                        continue  # published formula is 0/0 on the center line
                    closed = closed_form_power(p, n, a, z0, z)
                    diff = abs(H(re[it, ix], im[it, ix]) - closed)
                    if n == 0:
                        max0 = max(max0, diff)
                    elif n == 1:
                        max1 = max(max1, diff)
                    else:
                        diffs2.append(diff)
        report2[p.name] = {"max": float(np.max(diffs2)),
                           "mean": float(np.mean(diffs2))}
    ok = max0 <= 1e-12 and max1 <= 1e-6
    details = {
        "exponent0_max": float(max0),
        "exponent1_max": float(max1),
        "exponent2_discrepancy_report": report2,
        "note": ("published exponent-2 formula fails its classical limit; "
                 "binding check is the residual criterion"),
    }
    return CriterionResult(5, "closed-form cross-check", ok, 20.0,
                           details=details)


@_timed
def criterion_6_power_properties() -> CriterionResult:
    """Linearity, the differential relation, and the center asymptotics."""
    p = Potential.sech(1, 1, x_range=(-2, 2))
    seq = zs_sequence(p, GridDomain(-1, 1, -1, 1, 5, 5))
    z0 = H(0.2, 0.1)
    # (ii) linearity in the coefficient
    lin_worst = 0.0
    z = H(0.7, 0.8)
    for n in (1, 2, 3):
        full = formal_power(FormalPowerSpec(0, n, H(1.4, -0.6), z0), z, seq)
        unit = formal_power(FormalPowerSpec(0, n, H(1, 0), z0), z, seq)
        junit = formal_power(FormalPowerSpec(0, n, H(0, 1), z0), z, seq)
        lin_worst = max(lin_worst, abs(full - (1.4 * unit - 0.6 * junit)))
    # (iii) pair derivative lowers the exponent
    diff_worst = 0.0
    for n in (1, 2):
        W = formal_power_field(FormalPowerSpec(0, n, H(1, 0.3), z0), seq,
                               tol=1e-12)
        for zz in (H(0.55, 0.4), H(-0.35, 0.6)):
            got = fg_derivative(W, seq.pair(0), zz, h=1e-3)
            want = float(n) * formal_power(
                FormalPowerSpec(1, n - 1, H(1, 0.3), z0), zz, seq, tol=1e-12)
            diff_worst = max(diff_worst, abs(got - want))
    # (iv) normalized deviation from a (z - z0)^n shrinks a decade per decade
    directions = {1: (1.0, 0.0), 2: (math.cos(math.pi / 6), 0.5)}
    ratios = {}
    for n, d in directions.items():
        devs = []
        for r in (1e-1, 1e-2):
            zz = H(z0.re + r * d[0], z0.im + r * d[1])
            got = formal_power(FormalPowerSpec(0, n, H(1, 0), z0), zz, seq,
                               tol=1e-13)
            want_re, want_im = _hyper_power_grid(
                np.array([zz.re - z0.re]), np.array([zz.im - z0.im]), n)
            dev = abs(got - H(float(want_re[0]), float(want_im[0]))) / r ** n
            devs.append(dev)
        ratios[n] = devs[1] / devs[0]
    ok = (lin_worst <= 1e-10 and diff_worst <= 5e-5
          and all(r <= 0.1 for r in ratios.values()))
    return CriterionResult(6, "formal power properties", ok, 20.0,
                           details={"linearity_max": lin_worst,
                                    "differential_relation_max": diff_worst,
                                    "asymptotic_decay_ratios": ratios})


@_timed
def criterion_7_integral_theorems() -> CriterionResult:
    """Closed-loop integrals vanish and the antiderivative identity holds.

    The closed integral uses the predecessor pair (index -1): closed pair
    integrals vanish for integrands pseudoanalytic with respect to the
    integrating pair's successor.
    """
    p = Potential.sech(1, 1, x_range=(-2, 2))
    seq = zs_sequence(p, GridDomain(-1, 1, -1, 1, 5, 5))
    pair0 = seq.pair(0)
    a = H(1.0, 0.4)
    center = H(0.2, 0.1)
    Z1 = formal_power_field(FormalPowerSpec(0, 1, a, center), seq, tol=1e-11)
    loop = Polyline.rectangle(H(-0.5, -0.4), H(0.6, 0.7))
    closed_val = abs(fg_integral(Z1, loop, seq.pair(-1)))
    closed_ok = closed_val <= 1e-6 * loop.length()
    # antiderivative identity on random endpoint pairs
    wdot = formal_power_field(FormalPowerSpec(1, 0, a, center), seq)
    w_spec = FormalPowerSpec(0, 1, a, center)
    rng = np.random.default_rng(2024)
    anti_worst = 0.0
    for _ in range(10):
        za = H(*rng.uniform(-0.8, 0.8, 2))
        zb = H(*rng.uniform(-0.8, 0.8, 2))
        w_za = formal_power(w_spec, za, seq)
        w_zb = formal_power(w_spec, zb, seq)
        phi, psi = decompose(w_za, pair0, za)
        anti = fg_integral(wdot, Polyline.straight(za, zb), pair0)
        recon = anti + phi * pair0.F(zb) + psi * pair0.G(zb)
        anti_worst = max(anti_worst, abs(recon - w_zb))
    ok = closed_ok and anti_worst <= 1e-6
    return CriterionResult(7, "integral theorems", ok, 10.0,
                           details={"closed_loop_value": closed_val,
                                    "closed_loop_budget": float(1e-6 * loop.length()),
                                    "antiderivative_max": anti_worst,
                                    "pairs_tested": 10})


@_timed
def criterion_8_fourier_bridge() -> CriterionResult:
    """Wave-number solutions lift to time-domain mode solutions."""
    p = Potential.sech(1, 1, x_range=(-2, 2))
    worst_res = 0.0
    worst_drift = 0.0
    for k in (0.5, 1.0, 2.0):
        st = spectral_solve(p, k, (-2, 2), (1.0, 0.0), step=1e-3)
        worst_drift = max(worst_drift, st.drift_per_unit)
        modes = st.lift_modes()
        for x in (-1.2, -0.4, 0.3, 1.1):
            for t in (0.0, 0.8, 1.7):
                r1, r2 = zs_residual(modes, p, H(x, t), h=1e-3)
                worst_res = max(worst_res, abs(r1), abs(r2))
    ok = worst_res <= 1e-4 and worst_drift <= 1e-8
    return CriterionResult(8, "fourier bridge", ok, 5.0,
                           details={"max_mode_residual": worst_res,
                                    "residual_tolerance": 1e-4,
                                    "max_drift_per_unit_x": worst_drift,
                                    "drift_tolerance": 1e-8})


@_timed
def criterion_9_mode_round_trip() -> CriterionResult:
    """Mode translations invert exactly and the residual oracles recombine."""
    from .zakharov_shabat import ModeField, modes_to_W

    rng = np.random.default_rng(4242)
    dom = GridDomain(-1, 1, -1, 1, 13, 11)
    round_worst = 0.0
    for _ in range(5):
        plus = rng.uniform(-1, 1, (dom.nt, dom.nx))
        minus = rng.uniform(-1, 1, (dom.nt, dom.nx))
        modes = ModeField.from_grid(dom, plus, minus)
        back = W_to_modes(modes_to_W(modes))
        round_worst = max(round_worst,
                          float(np.max(np.abs(back.plus_samples - plus))),
                          float(np.max(np.abs(back.minus_samples - minus))))
    p = Potential.sech(1, 1, x_range=(-2, 2))
    seq = zs_sequence(p, GridDomain(-1, 1, -1, 1, 5, 5))
    W = formal_power_field(FormalPowerSpec(0, 1, H(1, 0.4), H(0.2, 0.1)), seq,
                           tol=1e-11)
    modes = W_to_modes(W)
    recomb_worst = 0.0
    for z in (H(0.5, 0.6), H(-0.3, 0.2), H(0.1, -0.5), H(0.66, 0.1)):
        r1, r2 = zs_residual(modes, p, z, h=1e-3)
        direct = vekua_zs_residual(W, p, z, h=1e-3)
        recomb_worst = max(recomb_worst,
                           abs(recombine_mode_residuals(r1, r2) - direct))
    ok = round_worst <= 1e-15 and recomb_worst <= 1e-12
    return CriterionResult(9, "mode round trip", ok, 2.0,
                           details={"round_trip_max": round_worst,
                                    "recombination_max": recomb_worst})


ALL_CRITERIA = (
    criterion_1_classical_degeneration,
    criterion_2_pair_identities,
    criterion_3_successor_period,
    criterion_4_residual_convergence,
    criterion_5_closed_form_crosscheck,
    criterion_6_power_properties,
    criterion_7_integral_theorems,
    criterion_8_fourier_bridge,
    criterion_9_mode_round_trip,
)


def run_all(echo=None) -> list:
    """Run every criterion, optionally printing one line per result."""
    results = []
    for fn in ALL_CRITERIA:
        result = fn()
        results.append(result)
        if echo is not None:
            echo(result.line())
    return results
