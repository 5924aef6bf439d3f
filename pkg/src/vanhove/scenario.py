"""Build, run and report a declarative decoherence scenario."""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ._validation import StateConditionError, VanHoveError
from .algebra import (VanHoveElement, classify_regularity, diagonal_observable,
                      hamiltonian, identity, is_symmetric, make_element)
from .config import ScenarioConfig, parse_config, parse_text
from .evolution import (DecayCurve, antidiagonal_values, asymptotic_expectation,
                        decay_curve, estimate_decoherence_time, evolve_state,
                        offdiagonal_values, refinement_check)
from .grid import SpectralGrid, product_grid
from .pointer import (PointerBasis, build_pointer_space, full_diagonal_check,
                      pointer_basis, spectral_resolution_residual, verify_gns_identity)
from .states import (VanHoveState, expectation, hermiticity_residual,
                     kernel_min_eigenvalue, make_state, positivity_probe, trace)
from .symbols import evaluate_kernel, evaluate_profile, tail_integrals

__all__ = [
    "ScenarioError",
    "Check",
    "RunSummary",
    "RunResult",
    "Scenario",
    "build_scenario",
    "run_scenario",
    "emit_outputs",
    "builtin_scenarios",
    "load_builtin",
    "resolve_config",
    "OUTPUT_ENV",
]

log = logging.getLogger(__name__)

OUTPUT_ENV = "VANHOVE_OUTPUT_DIR"
DECAY_COLUMNS = ("t", "re", "im", "abs", "abs_over_ref")


class ScenarioError(VanHoveError):
    """A module failed while running a scenario; message is tagged ``[module]``."""

    def __init__(self, module: str, message: str, condition: str | None = None):
        tag = f"[{module}]" + (f" condition {condition}" if condition else "")
        super().__init__(f"{tag}: {message}")
        self.module = module
        self.condition = condition


@dataclass(frozen=True)
class Scenario:
    config: ScenarioConfig
    grid: SpectralGrid
    state: VanHoveState
    observable: VanHoveElement
    tail_bound: float


def _tail_bound(config: ScenarioConfig, grid: SpectralGrid, diag_scale: float) -> float:
    st, ob = config.state, config.observable
    _, diag_tail = tail_integrals(st.diag, ob.diag, grid, diag_scale, 1.0)
    reg_tail = 0.0
    if st.reg.kind == "rank1" and ob.reg.kind == "rank1":
        inside, beyond = tail_integrals(st.reg.profile, ob.reg.profile, grid)
        # the pair integrand factorizes: (inside + beyond)^2 - inside^2
        reg_tail = abs(st.reg.scale * ob.reg.scale) * beyond * (2 * inside + beyond)
    return float(diag_tail + reg_tail)


def build_scenario(config: ScenarioConfig) -> Scenario:
    """Grid, validated state, observable and truncation tail bound."""
    try:
        grid = product_grid(config.axes)
    except VanHoveError as exc:
        raise ScenarioError("spectral_grid", str(exc)) from exc
    diag = evaluate_profile(config.state.diag, grid)
    scale = 1.0
    if config.state.normalize:
        total = float(np.dot(grid.weights, diag.real))
        if total <= 0:
            raise ScenarioError("states", "diagonal density integrates to zero", "6'")
        scale = 1.0 / total
    tol, eig_tol = config.analysis["tol"], config.analysis["eig_tol"]
    try:
        state = make_state(grid, diag * scale, evaluate_kernel(config.state.reg, grid),
                           tol=tol, eig_tol=eig_tol)
    except StateConditionError as exc:
        raise ScenarioError("states", str(exc), exc.condition) from exc
    observable = make_element(grid, evaluate_profile(config.observable.diag, grid),
                              evaluate_kernel(config.observable.reg, grid))
    return Scenario(config, grid, state, observable, _tail_bound(config, grid, scale))


@dataclass(frozen=True)
class Check:
    name: str
    module: str
    value: float
    tolerance: float
    passed: bool
    condition: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "module": self.module,
            "condition": self.condition,
            "value": _num(self.value),
            "tolerance": _num(self.tolerance),
            "passed": self.passed,
        }


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if np.isfinite(x) else None


@dataclass
class RunSummary:
    scenario: str
    normalization_residual: float
    hermiticity_residual: float
    kernel_min_eigenvalue: float
    min_probe_positivity: float
    decay_reference: float
    final_ratio: float | None
    decoherence_time: float | str | None
    fit_model: str | None
    fit_parameters: dict
    tail_bound: float
    refinement_delta: float | None
    pointer_identity_residual: float
    full_diagonal_residual: float
    spectral_resolution_residual: float
    oracle_difference: float
    asymptotic_expectation: float
    wstar_residual: float | None
    regularity: dict
    notes: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        out = {}
        for key, value in self.__dict__.items():
            if key == "checks":
                continue
            if isinstance(value, (float, np.floating)):
                value = _num(value)
            out[key] = value
        out["checks"] = [c.to_dict() for c in self.checks]
        out["passed"] = self.passed
        return out


@dataclass(frozen=True)
class RunResult:
    config: ScenarioConfig
    summary: RunSummary
    curve: DecayCurve
    basis: PointerBasis


def _relative(diff: float, scale: float) -> float:
    return diff / scale if scale > 0 else diff


def _refinement(config: ScenarioConfig, times: np.ndarray):
    """Rebuild at 2n and 4n energy nodes; compare expectations and in-band samples."""
    n = config.axes[0].n
    band = config.band
    in_band = times[times <= band * (1 + 1e-12)]
    levels = []
    for factor in (1, 2, 4):
        sc = build_scenario(config.with_energy_nodes(n * factor))
        values = [
            expectation(sc.state, sc.observable),
            asymptotic_expectation(sc.state, sc.observable),
            trace(sc.state),
            *offdiagonal_values(sc.state, sc.observable, in_band),
        ]
        levels.append(np.array(values, dtype=complex))
    scale = max(1.0, float(np.max(np.abs(levels[0]))))
    d1, d2, ok = refinement_check(*levels, order=config.axes[0].order,
                                  atol=config.analysis["refine_atol"] * scale)
    return float(d1.max()), float(d2.max()), bool(ok.all())


def run_scenario(config: ScenarioConfig, *, refine: bool | None = None,
                 seed: int | None = None) -> RunResult:
    """Run every analysis on one scenario and collect the checks."""
    an = config.analysis
    seed = config.seed if seed is None else seed
    refine = an["refine"] if refine is None else refine
    sc = build_scenario(config)
    grid, rho, a = sc.grid, sc.state, sc.observable
    checks: list[Check] = []
    notes: list[str] = []

    def check(name, module, value, tolerance, passed, condition=""):
        checks.append(Check(name, module, float(value), float(tolerance), bool(passed), condition))

    norm_res = abs(trace(rho) - 1.0)
    if config.state.normalize:
        check("normalization", "states", norm_res, an["tol"], norm_res <= an["tol"], "6'")
    herm = hermiticity_residual(rho.reg)
    check("hermiticity", "states", herm, an["tol"], herm <= an["tol"], "3'")
    lam = kernel_min_eigenvalue(grid, rho.reg) if rho.reg.any() else 0.0
    check("kernel_positivity", "states", lam, an["eig_tol"], lam >= -an["eig_tol"], "5'")
    probe = positivity_probe(rho, an["probe_trials"], seed, an["tol"])
    check("probe_positivity", "states", probe.minimum, an["tol"], probe.passed, "rho(b*b) >= 0")
    sym = is_symmetric(a, an["tol"])
    check("observable_symmetric", "kernel_algebra", 0.0 if sym else 1.0, 0.0, sym, "a* = a")

    times = config.times
    try:
        curve = decay_curve(rho, a, times, tail_bound=sc.tail_bound,
                            band_constant=config.time["band_constant"],
                            band_override=config.time["band_override"])
    except VanHoveError as exc:
        raise ScenarioError("evolution", str(exc)) from exc
    ref = curve.reference

    fast = antidiagonal_values(rho, a, times)
    oracle = float(np.max(np.abs(fast - curve.values)))
    oracle_rel = _relative(oracle, max(ref, float(curve.magnitudes.max())))
    check("oracle_equivalence", "evolution", oracle_rel, an["oracle_rtol"],
          oracle_rel <= an["oracle_rtol"])

    t_d, model, params = None, None, {}
    if ref == 0:
        t_d = "degenerate"
        notes.append("regular parts vanish at t=0: decay curve is identically zero")
        zero_curve = float(curve.magnitudes.max())
        check("degenerate_curve_zero", "evolution", zero_curve, 0.0, zero_curve == 0.0)
    else:
        est = estimate_decoherence_time(curve, an["threshold"], an["fit_models"])
        t_d = est.crossing_time if est.reached else "not reached"
        model, params = est.model, est.params
    final_ratio = curve.final_ratio if ref > 0 else None

    if an["decay_target"] is not None and ref > 0:
        check("decay", "evolution", final_ratio, an["decay_target"],
              final_ratio <= an["decay_target"])
    if an["expect_constant"]:
        dev = float(np.max(np.abs(curve.magnitudes - ref)))
        tol = an["constant_tol"] * max(1.0, ref)
        check("constant_offdiagonal", "evolution", dev, tol, dev <= tol,
              "phase vanishes where w = w'")
        notes.append("off-diagonal term sits on the energy atom: w = w' kills the phase, "
                     "so it does not decay")

    tr = [trace(evolve_state(rho, t)) for t in (times[-1], times[len(times) // 2])]
    tr_dev = max(abs(x - trace(rho)) for x in tr)
    check("trace_conservation", "evolution", tr_dev, 0.0, tr_dev == 0.0)
    h = hamiltonian(grid)
    e0 = expectation(rho, h)
    e_dev = max(abs(expectation(evolve_state(rho, t), h) - e0) for t in times)
    e_rel = _relative(e_dev, abs(e0))
    check("energy_conservation", "evolution", e_rel, an["residual_tol"],
          e_rel <= an["residual_tol"])

    asym = asymptotic_expectation(rho, a)
    wstar = None
    if ref > 0:
        late = expectation(evolve_state(rho, times[-1]), a)
        wstar = abs(late - asym) / ref
        if an["decay_target"] is not None:
            check("wstar_limit", "pointer_gns", wstar, an["decay_target"],
                  wstar <= an["decay_target"])

    null_tol = an["null_tol"]
    space = build_pointer_space(rho, null_tol=null_tol)
    basis = pointer_basis(space)
    a_hat = diagonal_observable(grid, a.diag)
    csco = [h] + [diagonal_observable(grid, grid.coordinate(k)) for k in range(1, grid.dim)]
    gns = max(verify_gns_identity(x, rho, space) for x in [identity(grid), a_hat, *csco])
    check("gns_identity", "pointer_gns", gns, an["residual_tol"], gns <= an["residual_tol"])
    off = 0.0
    for op in csco:
        mat = basis.operator_matrix(op)
        off = max(off, float(np.max(np.abs(mat - np.diag(np.diag(mat))), initial=0.0)))
    check("pointer_csco_diagonal", "pointer_gns", off, 0.0, off == 0.0)
    spec_res = max(spectral_resolution_residual(a_hat, op, basis) for op in csco)
    check("spectral_resolution", "pointer_gns", spec_res, an["residual_tol"],
          spec_res <= an["residual_tol"])
    full = full_diagonal_check(rho, a, space)
    check("full_diagonal", "pointer_gns", full, an["residual_tol"], full <= an["residual_tol"])

    refine_delta = None
    if refine:
        d1, d2, ok = _refinement(config, times)
        refine_delta = d1
        check("refinement", "spectral_grid", d2, an["refine_atol"], ok,
              f"observed order >= rule order {config.axes[0].order}")

    rho_reg = classify_regularity(make_element(grid, 0.0, rho.reg))
    a_reg = classify_regularity(a)
    regularity = {"state_regular_part": rho_reg.regular_part_flag,
                  "observable_regular_part": a_reg.regular_part_flag,
                  "observable_symbol": "suspect" if any(k[0] == "diag" for k in
                                                       a_reg.suspect_entries) else "regular"}

    summary = RunSummary(
        scenario=config.name,
        normalization_residual=norm_res,
        hermiticity_residual=herm,
        kernel_min_eigenvalue=lam,
        min_probe_positivity=probe.minimum,
        decay_reference=ref,
        final_ratio=final_ratio,
        decoherence_time=t_d,
        fit_model=model,
        fit_parameters=params,
        tail_bound=sc.tail_bound,
        refinement_delta=refine_delta,
        pointer_identity_residual=gns,
        full_diagonal_residual=full,
        spectral_resolution_residual=spec_res,
        oracle_difference=oracle_rel,
        asymptotic_expectation=float(asym.real),
        wstar_residual=wstar,
        regularity=regularity,
        notes=notes,
        checks=checks,
    )
    return RunResult(config, summary, curve, basis)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_decay_csv(curve: DecayCurve, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DECAY_COLUMNS)
        for t, v, r in zip(curve.times, curve.values, curve.ratios):
            writer.writerow([_fmt(t), _fmt(v.real), _fmt(v.imag), _fmt(abs(v)), _fmt(r)])


def write_pointer_csv(basis: PointerBasis, path: Path) -> None:
    dim = basis.coordinates.shape[1]
    header = ["omega", *[f"o{k}" for k in range(1, dim)], "sigma", "rho_hat"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for coords, s, r in zip(basis.coordinates, basis.sigma, basis.rho_hat):
            writer.writerow([*(_fmt(c) for c in coords), _fmt(s), _fmt(r)])


def _plots(curve: DecayCurve, out: Path, name: str) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []
    with matplotlib.rc_context({"svg.hashsalt": "vanhove", "svg.fonttype": "none"}):
        for scale in ("linear", "log"):
            fig, ax = plt.subplots(figsize=(6, 4))
            mags = curve.magnitudes
            if scale == "log":
                keep = mags > 0
                ax.semilogy(curve.times[keep], mags[keep])
            else:
                ax.plot(curve.times, mags)
            ax.set_xlabel("t")
            ax.set_ylabel("|rho_r(U_t(a_r))|")
            ax.set_title(f"{name} ({scale})")
            path = out / f"decay_{scale}.svg"
            fig.savefig(path, format="svg", metadata={"Date": None})
            plt.close(fig)
            paths.append(path)
    return paths


def emit_outputs(result: RunResult, out_dir, plot: bool | None = None) -> list[Path]:
    """Write decay.csv, pointer.csv, summary.json and optional SVG plots."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ScenarioError("scenario_cli", f"cannot create output directory {out}: {exc}")
    if not os.access(out, os.W_OK):
        raise ScenarioError("scenario_cli", f"output directory {out} is not writable")
    plot = result.config.output["plot"] if plot is None else plot
    paths = [out / "decay.csv", out / "pointer.csv", out / "summary.json"]
    write_decay_csv(result.curve, paths[0])
    write_pointer_csv(result.basis, paths[1])
    payload = {"summary": result.summary.to_dict(), "config": result.config.to_dict()}
    with open(paths[2], "w", newline="") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    if plot:
        paths += _plots(result.curve, out, result.config.name)
    return paths


def builtin_scenarios() -> dict[str, str]:
    """Built-in scenario names mapped to their one-line descriptions."""
    out = {}
    for entry in sorted(resources.files("vanhove.scenarios").iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".ini"):
            cfg = parse_text(entry.read_text(), name=entry.name[:-4])
            out[cfg.name] = cfg.description
    return out


def load_builtin(name: str) -> ScenarioConfig:
    entry = resources.files("vanhove.scenarios") / f"{name}.ini"
    if not entry.is_file():
        raise VanHoveError(f"no built-in scenario {name!r}; known: {sorted(builtin_scenarios())}")
    return parse_text(entry.read_text(), name=name)


def resolve_config(spec: str) -> ScenarioConfig:
    """A path to a config file, or the name of a built-in scenario."""
    path = Path(spec)
    if path.is_file():
        return parse_config(path)
    return load_builtin(spec)
