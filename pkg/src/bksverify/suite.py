"""Identity suite: a parallel map over verification jobs, merged deterministically.

Every job is pure given (config, job key): random draws come from a
generator seeded by hashing the key against the config seed, so the
thread count and completion order cannot change any number in the
report.  Failures are recorded per job and do not abort the run.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import pairing, quadrature
from .config import RunConfig
from .groups import GroupSpec, casimir, enumerate_irreps, group_spec, make_irrep
from .halfform import phi_flatness_residual, wedge_density, wedge_density_det
from .heat import (
    a_s,
    cst_forward,
    hl2_inner,
    hl2_inner_quadrature,
    l2_inner,
    make_function,
    random_band_limited,
)
from .pairing import PairingReport, PrequantumSection, QuantumSection


@dataclass(frozen=True)
class Job:
    key: str
    thunk: object


@dataclass(frozen=True)
class SuiteReport:
    """Config echo, keyed reports, summary counts, wall clock, version."""

    config: dict
    reports: list  # of (key, PairingReport), sorted by key
    summary: dict
    wall_clock: float
    version: str

    def to_jsonable(self, include_wall_clock: bool = True) -> dict:
        out = {
            "version": self.version,
            "config": self.config,
            "summary": self.summary,
            "reports": [
                {"key": key, **_report_jsonable(rep)} for key, rep in self.reports
            ],
        }
        if include_wall_clock:
            out["wall_clock_seconds"] = self.wall_clock
        return out


def _report_jsonable(rep: PairingReport) -> dict:
    return {
        "identity": rep.identity,
        "group": rep.group,
        "params": {k: rep.params[k] for k in sorted(rep.params)},
        "lhs": [float(np.real(rep.lhs)), float(np.imag(rep.lhs))],
        "rhs": [float(np.real(rep.rhs)), float(np.imag(rep.rhs))],
        "abs_residual": rep.abs_residual,
        "rel_residual": rep.rel_residual,
        "error_estimate": rep.error_estimate,
        "tolerance": rep.tolerance,
        "passed": rep.passed,
    }


def _job_seed(seed: int, key: str) -> int:
    ss = np.random.SeedSequence([seed, zlib.crc32(key.encode())])
    return int(ss.generate_state(1)[0])


def _tol(cfg: RunConfig, family: str, default: float) -> float:
    base = cfg.tolerance_overrides.get(family, default)
    return base * cfg.tolerance_scale


def _grid_value_near(values, target):
    return min(values, key=lambda v: abs(v - target))


def default_band_limit(group: GroupSpec) -> float:
    """Casimir cutoff for test functions: |k| <= 5, j <= 2, or su3 fundamentals."""
    if group.kind == "torus":
        label = (5,) + (0,) * (group.dim - 1)
    elif group.kind == "su2":
        label = (4,)
    else:
        label = (1, 0)
    return casimir(group, label) + 1e-9


def _fmt(x: float) -> str:
    return f"{x:g}"


# -- job bodies ----------------------------------------------------------


def _mk_report(identity, group, params, lhs, rhs, residual, error, tolerance,
               passed=None):
    scale = max(abs(lhs), abs(rhs), 1e-300)
    if passed is None:
        passed = bool(residual <= tolerance)
    return PairingReport(
        identity=identity,
        group=group.describe(),
        params=params,
        lhs=lhs,
        rhs=rhs,
        abs_residual=float(residual),
        rel_residual=float(residual / scale),
        error_estimate=float(error),
        tolerance=float(tolerance),
        passed=bool(passed),
    )


def _job_wedge(group, tol, seed, samples=100):
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_vals = (1.0, 1.0 + 0.0j)
    for _ in range(samples):
        Y = rng.standard_normal(group.dim)
        s = float(rng.uniform(0.25, 3.0))
        sp = float(rng.uniform(0.25, 3.0))
        direct = wedge_density(group, s, sp, Y)
        det = wedge_density_det(group, s, sp, Y)
        rel = abs(det - direct) / abs(direct)
        if rel > worst:
            worst, worst_vals = rel, (direct, det)
    return _mk_report(
        "wedge", group, {"samples": samples},
        worst_vals[1], worst_vals[0], worst, 0.0, tol,
    )


def _job_phi_flatness(group, tol, seed, samples=100, h=1e-4):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        Y = rng.standard_normal(group.dim)
        s = float(rng.uniform(0.25, 3.0))
        worst = max(worst, phi_flatness_residual(group, s, Y, h))
    return _mk_report(
        "phi-flatness", group, {"samples": samples, "h": h},
        worst, 0.0, worst, 0.0, tol,
    )


def _job_cst_analytic(group, hbar0, s, band, tol, seed):
    # the e^{hbar c_R} measure weight must stay inside float range even
    # though it cancels analytically against the transform factors
    band = min(band, 600.0 / (hbar0 * s))
    rng = np.random.default_rng(seed)
    f = random_band_limited(group, band, rng)
    fp = random_band_limited(group, band, rng)
    hbar = hbar0 * s
    lhs = hl2_inner(group, hbar0, s, cst_forward(hbar, f), cst_forward(hbar, fp))
    rhs = l2_inner(f, fp)
    scale = math.sqrt(abs(l2_inner(f, f)) * abs(l2_inner(fp, fp)))
    rel = abs(lhs - rhs) / scale
    return _mk_report(
        "cst-unitarity", group,
        {"route": "analytic", "hbar0": hbar0, "s": s, "band_limit": band},
        lhs, rhs, rel, 0.0, tol,
    )


def _job_cst_quadrature(group, hbar0, s, band, points, tol, seed):
    # restricted band: matrix-element growth e^{2 k beta} must stay well
    # inside float range over the full reach of the Hermite rule
    cap = casimir(group, (2,) + (0,) * (group.dim - 1)) if group.kind == "torus" \
        else casimir(group, (4,))
    band = min(band, cap + 1e-9)
    rng = np.random.default_rng(seed)
    f = random_band_limited(group, band, rng)
    fp = random_band_limited(group, band, rng)
    hbar = hbar0 * s
    F, Fp = cst_forward(hbar, f), cst_forward(hbar, fp)
    lhs, err = hl2_inner_quadrature(group, hbar0, s, F, Fp, points=points)
    rhs = hl2_inner(group, hbar0, s, F, Fp)
    scale = math.sqrt(abs(l2_inner(f, f)) * abs(l2_inner(fp, fp)))
    rel = abs(lhs - rhs) / scale
    return _mk_report(
        "cst-unitarity", group,
        {"route": "quadrature", "hbar0": hbar0, "s": s, "band_limit": band,
         "points": points},
        lhs, rhs, rel, abs(err) / scale, tol,
    )


def _job_pairing_random(group, hbar0, s, sp, band, n_pairs, factory, tol, seed):
    rng = np.random.default_rng(seed)
    amid = a_s(group, hbar0, 0.5 * (s + sp))
    worst = 0.0
    worst_vals = (0.0 + 0.0j, 0.0 + 0.0j)
    err_worst = 0.0
    for _ in range(n_pairs):
        f = random_band_limited(group, band, rng)
        fp = random_band_limited(group, band, rng)
        val, err = pairing.quantum_pair(
            QuantumSection(s=s, f=f, hbar0=hbar0),
            QuantumSection(s=sp, f=fp, hbar0=hbar0),
            factory,
        )
        target = amid * l2_inner(f, fp)
        scale = amid * math.sqrt(abs(l2_inner(f, f)) * abs(l2_inner(fp, fp)))
        rel = abs(val - target) / scale
        if rel > worst:
            worst, worst_vals, err_worst = rel, (val, target), err / scale
    return _mk_report(
        "pairing", group,
        {"hbar0": hbar0, "s": s, "s_prime": sp, "band_limit": band,
         "pairs": n_pairs},
        worst_vals[0], worst_vals[1], worst, err_worst, tol,
    )


def _job_pairing_orthogonal(group, hbar0, s, sp, band, factory, tol, seed):
    rng = np.random.default_rng(seed)
    f = random_band_limited(group, band, rng)
    fp = random_band_limited(group, band, rng)
    # blockwise Gram-Schmidt so <f, f_perp> = 0 at machine precision
    coeff = l2_inner(f, fp) / l2_inner(f, f)
    blocks = {
        label: fp.blocks[label] - coeff * f.blocks[label] for label in f.labels()
    }
    f_perp = make_function(group, blocks)
    val, err = pairing.quantum_pair(
        QuantumSection(s=s, f=f, hbar0=hbar0),
        QuantumSection(s=sp, f=f_perp, hbar0=hbar0),
        factory,
    )
    amid = a_s(group, hbar0, 0.5 * (s + sp))
    scale = amid * math.sqrt(abs(l2_inner(f, f)) * abs(l2_inner(f_perp, f_perp)))
    rel = abs(val) / scale
    return _mk_report(
        "pairing", group,
        {"hbar0": hbar0, "s": s, "s_prime": sp, "band_limit": band,
         "orthogonal": True},
        val, 0.0 + 0.0j, rel, err / scale, tol,
    )


def _factor_log(group, hbar0, s, sp, irrep):
    return -0.5 * (s - sp) * hbar0 * (irrep.casimir + group.rho_norm_sq)


def _job_bks_factor(group, hbar0, s, sp, irrep, factory, tol):
    # log-space comparison: at large (s - s') c_R the factor itself
    # leaves float range while the log residual stays well defined
    log_cross, e1 = pairing.char_gaussian_log(
        group, hbar0, s + sp, irrep, factory(s + sp, irrep)
    )
    log_norm, e2 = pairing.char_gaussian_log(
        group, hbar0, 2.0 * s, irrep, factory(2.0 * s, irrep)
    )
    log_num = log_cross - log_norm
    log_closed = _factor_log(group, hbar0, s, sp, irrep)
    rel = abs(math.expm1(log_num - log_closed))
    params = {"hbar0": hbar0, "s": s, "s_prime": sp, "irrep": str(irrep.label)}
    if abs(log_closed) <= 300.0:
        lhs, rhs = math.exp(log_num), math.exp(log_closed)
    else:
        lhs, rhs = log_num, log_closed
        params["scale"] = "log"
    return _mk_report("bks-factor", group, params, lhs, rhs, rel, e1 + e2, tol)


def _job_factorization(group, hbar0, cells, triples, irrep, tol):
    # value-space agreement is meaningful only while e^{arg} rounding
    # (rel error ~ |arg| eps) sits below the tolerance
    usable = [
        (s, sp) for s, sp in cells
        if abs(_factor_log(group, hbar0, s, sp, irrep)) <= 70.0
    ]
    if not usable:
        usable = [min(cells, key=lambda c: abs(c[0] - c[1]))]
    worst = 0.0
    lhs = rhs = 1.0
    for s, sp in usable:
        rep = pairing.verify_factorization(group, hbar0, s, sp, irrep, tol)
        if rep.abs_residual > worst:
            worst, lhs, rhs = rep.abs_residual, rep.lhs, rep.rhs
    comp_worst = 0.0
    for s1, s2, s3 in triples:
        two_step = _factor_log(group, hbar0, s1, s2, irrep) \
            + _factor_log(group, hbar0, s2, s3, irrep)
        one_step = _factor_log(group, hbar0, s1, s3, irrep)
        comp_worst = max(comp_worst, abs(math.expm1(two_step - one_step)))
    return _mk_report(
        "factorization", group,
        {"hbar0": hbar0, "irrep": str(irrep.label), "cells": len(usable),
         "composition_residual": comp_worst},
        lhs, rhs, max(worst, comp_worst), 0.0, tol,
    )


def _job_vertical_direct(group, hbar0, s, band, factory, tol, seed):
    rng = np.random.default_rng(seed)
    f = random_band_limited(group, band, rng)
    fp = random_band_limited(group, band, rng)
    val, err = pairing.vertical_pair(hbar0, s, f, fp, factory)
    target = a_s(group, hbar0, 0.5 * s) * l2_inner(f, fp)
    scale = a_s(group, hbar0, 0.5 * s) * math.sqrt(
        abs(l2_inner(f, f)) * abs(l2_inner(fp, fp))
    )
    rel = abs(val - target) / scale
    return _mk_report(
        "vertical-limit", group,
        {"route": "direct", "hbar0": hbar0, "s": s, "band_limit": band},
        val, target, rel, err / scale, tol,
    )


def _job_vertical_extrapolation(group, hbar0, s, band, factory, seed):
    # linear-in-s' Richardson from two small parameters; the tolerance
    # is three times the extrapolation's own error estimate
    rng = np.random.default_rng(seed)
    f = random_band_limited(group, band, rng)
    fp = random_band_limited(group, band, rng)
    target, _ = pairing.vertical_pair(hbar0, s, f, fp, factory)
    s1, s3 = 1e-2, 1e-3
    v1, _ = pairing.quantum_pair(
        QuantumSection(s=s, f=f, hbar0=hbar0),
        QuantumSection(s=s1, f=fp, hbar0=hbar0), factory,
    )
    v3, _ = pairing.quantum_pair(
        QuantumSection(s=s, f=f, hbar0=hbar0),
        QuantumSection(s=s3, f=fp, hbar0=hbar0), factory,
    )
    extrap = (s1 * v3 - s3 * v1) / (s1 - s3)
    est = abs(extrap - v3)
    resid = abs(extrap - target)
    # on tori the pairing is constant in s', so the extrapolation error
    # estimate is pure quadrature noise; a floor keeps the comparison
    # from pitting one rounding artifact against another
    floor = 1e-10 * max(abs(target), 1.0)
    return _mk_report(
        "vertical-limit", group,
        {"route": "extrapolation", "hbar0": hbar0, "s": s,
         "s_prime_nodes": [s1, s3], "band_limit": band},
        extrap, target, resid, est, max(3.0 * est, floor),
    )


def _job_continuity(group, hbar0, band, factory, tol_halving, tol_torus, seed):
    rng = np.random.default_rng(seed)
    f = random_band_limited(group, band, rng)
    s_list = (4e-3, 2e-3, 1e-3)
    rep = pairing.continuity_check(group, hbar0, f, s_list, factory)
    ratios = rep.params["ratios"]
    if group.kind == "torus":
        worst = max(abs(r - 1.0) for r in ratios)
        return _mk_report(
            "continuity", group,
            {"hbar0": hbar0, "s_list": list(s_list), "ratios": ratios},
            ratios[-1], 1.0, worst, rep.error_estimate, tol_torus,
        )
    gaps = [abs(r - 1.0) for r in ratios]
    halvings = [gaps[i] / gaps[i + 1] for i in range(len(gaps) - 1)]
    worst = max(abs(h - 2.0) for h in halvings)
    return _mk_report(
        "continuity", group,
        {"hbar0": hbar0, "s_list": list(s_list), "ratios": ratios,
         "halvings": halvings, "model_residual": rep.abs_residual},
        halvings[-1], 2.0, worst, rep.error_estimate, tol_halving,
    )


def _job_prequantum(group, tol, seed, mc_samples=200_000):
    s_from, s_to = 4.0, 1.0

    def amp(Y):
        return math.exp(-0.5 * float(np.dot(Y, Y)))

    sec = PrequantumSection(group=group, s=s_from, amplitude=amp)
    mapped = pairing.preq_map_apply(s_to, s_from, sec)
    moved = pairing.preq_parallel_transport(s_to, s_from, sec)
    if group.kind == "su3":
        quad = quadrature.algebra_montecarlo(group, mc_samples, seed)
    else:
        quad = quadrature.hermite_quadrature(group, 24, scale=1.0)
    n0, e0 = pairing.preq_norm_sq(sec, quad)
    n1, e1 = pairing.preq_norm_sq(mapped, quad)
    n2, _ = pairing.preq_norm_sq(moved, quad)
    ratio = math.sqrt(n1 / n0)
    contrast = abs(ratio - 1.0)
    # inverted check: the prequantum map must FAIL to preserve the norm
    # while parallel transport preserves it exactly
    drift = abs(n2 / n0 - 1.0)
    return _mk_report(
        "prequantum", group,
        {"s": s_to, "s_prime": s_from, "transport_drift": drift,
         "check": "norm ratio must differ from 1 beyond tolerance"},
        ratio, 1.0, contrast, (e0 + e1) / n0, tol,
        passed=(contrast > tol and drift <= 1e-10),
    )


# -- job list ------------------------------------------------------------


def build_jobs(cfg: RunConfig) -> list:
    """All jobs for the configured group and identity selection."""
    group = group_spec(cfg.group, n=cfg.torus_rank, normalization=cfg.normalization)
    kind = group.kind
    band = cfg.band_limit if cfg.band_limit is not None else default_band_limit(group)
    factory = pairing.default_char_factory(
        group, cfg.hbar0, backend=cfg.char_backend, samples=cfg.mc_samples,
        seed=cfg.seed, points_per_panel=cfg.points_per_panel, panels=cfg.panels,
    )
    s_pos = [s for s in cfg.s_grid if s > 0.0]
    sp_pos = [s for s in cfg.s_prime_grid if s > 0.0]
    s_mid = _grid_value_near(s_pos, 1.0)
    sp_mid = _grid_value_near(sp_pos, 0.5) if sp_pos else s_mid
    if kind == "su3":
        # cartan-reduced rules on the 2d torus are ~1s per integral, so
        # su3 runs one representative cell instead of the full grid
        cells = [(s_mid, sp_mid)]
        cells_with_zero = cells + [(s_mid, 0.0)]
    else:
        cells = [(s, sp) for s in s_pos for sp in sp_pos]
        cells_with_zero = [(s, sp) for s in s_pos for sp in cfg.s_prime_grid]
    triples = [(s_pos[0], s_mid, s_pos[-1])]
    band_irreps = [r for r in enumerate_irreps(group, band) if r.casimir > 0.0]
    if kind == "torus":
        spec_irreps = [
            make_irrep(group, (k,) + (0,) * (group.dim - 1)) for k in range(6)
        ]
    elif kind == "su2":
        spec_irreps = [make_irrep(group, (m,)) for m in range(6)]
    else:
        spec_irreps = [make_irrep(group, lab) for lab in ((0, 0), (1, 0), (1, 1))]

    jobs: list[Job] = []

    def add(key, thunk):
        jobs.append(Job(key=key, thunk=thunk))

    for family in cfg.identities:
        if family == "wedge":
            tol = _tol(cfg, family, 1e-8)
            key = f"wedge/{kind}"
            add(key, lambda g=group, t=tol, k=key: _job_wedge(g, t, _job_seed(cfg.seed, k)))
        elif family == "phi-flatness":
            tol = _tol(cfg, family, 1e-6)
            key = f"phi-flatness/{kind}"
            add(key, lambda g=group, t=tol, k=key: _job_phi_flatness(g, t, _job_seed(cfg.seed, k)))
        elif family == "cst-unitarity":
            tol_a = _tol(cfg, family, 1e-10)
            tol_q = _tol(cfg, family, 1e-4)
            for s in s_pos:
                key = f"cst-unitarity/{kind}/analytic/s={_fmt(s)}"
                add(key, lambda s=s, t=tol_a, k=key: _job_cst_analytic(
                    group, cfg.hbar0, s, band, t, _job_seed(cfg.seed, k)))
            if kind != "su3":
                # smallest s: the matrix-element tilt scales with
                # sqrt(hbar0 s) and sets the Hermite length needed
                s_q = min(s_pos)
                pts = cfg.hl2_points_torus if kind == "torus" else cfg.hl2_points_su2
                key = f"cst-unitarity/{kind}/quadrature/s={_fmt(s_q)}"
                add(key, lambda t=tol_q, k=key, p=pts, s=s_q: _job_cst_quadrature(
                    group, cfg.hbar0, s, band, p, t, _job_seed(cfg.seed, k)))
        elif family == "pairing":
            tol = _tol(cfg, family, 1e-6)
            tol_orth = _tol(cfg, family, 1e-8)
            for s, sp in cells:
                key = f"pairing/{kind}/random/s={_fmt(s)}:sp={_fmt(sp)}"
                add(key, lambda s=s, sp=sp, k=key, t=tol: _job_pairing_random(
                    group, cfg.hbar0, s, sp, band, cfg.pairs_per_cell, factory,
                    t, _job_seed(cfg.seed, k)))
                key = f"pairing/{kind}/orthogonal/s={_fmt(s)}:sp={_fmt(sp)}"
                add(key, lambda s=s, sp=sp, k=key, t=tol_orth:
                    _job_pairing_orthogonal(
                        group, cfg.hbar0, s, sp, band, factory, t,
                        _job_seed(cfg.seed, k)))
        elif family == "bks-factor":
            tol = _tol(cfg, family, 1e-10 if kind == "torus" else 1e-6)
            for irrep in band_irreps:
                for s, sp in cells:
                    key = (f"bks-factor/{kind}/{irrep.label}/"
                           f"s={_fmt(s)}:sp={_fmt(sp)}")
                    add(key, lambda s=s, sp=sp, r=irrep, t=tol: _job_bks_factor(
                        group, cfg.hbar0, s, sp, r, factory, t))
        elif family == "unitarity":
            tol = _tol(cfg, family, 1e-6)
            for irrep in spec_irreps:
                for s, sp in cells_with_zero:
                    key = (f"unitarity/{kind}/{irrep.label}/"
                           f"s={_fmt(s)}:sp={_fmt(sp)}")
                    add(key, lambda s=s, sp=sp, r=irrep, t=tol:
                        pairing.verify_unitarity(group, cfg.hbar0, s, sp, r,
                                                 factory, t))
        elif family == "factorization":
            tol = _tol(cfg, family, 1e-14)
            for irrep in spec_irreps:
                key = f"factorization/{kind}/{irrep.label}"
                add(key, lambda r=irrep, t=tol: _job_factorization(
                    group, cfg.hbar0, cells, triples, r, t))
        elif family == "vertical-limit":
            tol = _tol(cfg, family, 1e-6)
            key = f"vertical-limit/{kind}/direct"
            add(key, lambda t=tol, k=key: _job_vertical_direct(
                group, cfg.hbar0, s_mid, band, factory, t, _job_seed(cfg.seed, k)))
            key = f"vertical-limit/{kind}/extrapolation"
            add(key, lambda k=key: _job_vertical_extrapolation(
                group, cfg.hbar0, s_mid, band, factory, _job_seed(cfg.seed, k)))
        elif family == "continuity":
            tol_h = _tol(cfg, family, 0.2)
            tol_t = _tol(cfg, family, 1e-10)
            key = f"continuity/{kind}"
            add(key, lambda k=key, th=tol_h, tt=tol_t: _job_continuity(
                group, cfg.hbar0, band, factory, th, tt,
                _job_seed(cfg.seed, k)))
        elif family == "delta":
            if kind == "su3":
                continue
            tol = _tol(cfg, family, 1e-8 if kind == "torus" else 1e-3)
            one_labels = range(3)
            for m in one_labels:
                label = (m,) + (0,) * (group.dim - 1) if kind == "torus" else (m,)
                irrep = make_irrep(group, label)
                key = f"delta/{kind}/one/{irrep.label}"
                add(key, lambda r=irrep, t=tol: pairing.verify_delta_identity(
                    group, cfg.hbar0, 1.0, r, t))
            two_labels = range(2) if kind == "torus" else range(3)
            pts = cfg.delta_points_torus if kind == "torus" else cfg.delta_points_su2
            for m in two_labels:
                label = (m,) + (0,) * (group.dim - 1) if kind == "torus" else (m,)
                irrep = make_irrep(group, label)
                key = f"delta/{kind}/two/{irrep.label}"
                add(key, lambda r=irrep, t=tol, k=key, p=pts:
                    pairing.verify_delta_two(
                        group, cfg.hbar0, 1.0, 0.5, 0.3, r, tolerance=t,
                        seed=_job_seed(cfg.seed, k), t_alt=0.55, points=p))
        elif family == "prequantum":
            if kind == "torus":
                # phi is identically 1 on tori: there is no contrast to show
                continue
            tol = _tol(cfg, family, 1e-3)
            key = f"prequantum/{kind}"
            add(key, lambda t=tol, k=key: _job_prequantum(
                group, t, _job_seed(cfg.seed, k)))
    return jobs


# -- runner --------------------------------------------------------------


def _thread_count(cfg: RunConfig) -> int:
    env = os.environ.get("BKS_VERIFIER_THREADS", "").strip()
    if env:
        return max(1, int(env))
    if cfg.threads > 0:
        return cfg.threads
    return min(8, os.cpu_count() or 1)


def _error_report(key: str, cfg: RunConfig, exc: Exception) -> PairingReport:
    return PairingReport(
        identity=key.split("/", 1)[0],
        group=cfg.group,
        params={"error": f"{type(exc).__name__}: {exc}"},
        lhs=float("nan"),
        rhs=float("nan"),
        abs_residual=float("inf"),
        rel_residual=float("inf"),
        error_estimate=float("inf"),
        tolerance=0.0,
        passed=False,
    )


def run_suite(cfg: RunConfig) -> SuiteReport:
    """Run the configured identity checks; one report per job, never aborting."""
    t0 = time.perf_counter()
    jobs = build_jobs(cfg)

    def run_one(job: Job):
        try:
            return job.key, job.thunk()
        except Exception as exc:  # recorded, not raised
            return job.key, _error_report(job.key, cfg, exc)

    workers = _thread_count(cfg)
    if workers == 1 or len(jobs) <= 1:
        results = [run_one(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, jobs))
    results.sort(key=lambda pair: pair[0])
    passed = sum(1 for _, rep in results if rep.passed)
    errors = sum(1 for _, rep in results if "error" in rep.params)
    summary = {
        "total": len(results),
        "passed": passed,
        "failed": len(results) - passed,
        "errors": errors,
    }
    return SuiteReport(
        config=cfg.echo(),
        reports=results,
        summary=summary,
        wall_clock=time.perf_counter() - t0,
        version=__version__,
    )


# -- emitters ------------------------------------------------------------

_CSV_COLUMNS = (
    "key", "identity", "group", "params", "lhs_re", "lhs_im", "rhs_re",
    "rhs_im", "abs_residual", "rel_residual", "error_estimate", "tolerance",
    "passed",
)


def render_json(report: SuiteReport, include_wall_clock: bool = False) -> str:
    """Canonical JSON text; wall clock excluded by default so fixed
    config + seed reproduces the bytes exactly."""
    return json.dumps(report.to_jsonable(include_wall_clock), indent=2) + "\n"


def render_csv(report: SuiteReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_COLUMNS)
    for key, rep in report.reports:
        row = _report_jsonable(rep)
        writer.writerow([
            key, row["identity"], row["group"],
            json.dumps(row["params"], sort_keys=True),
            row["lhs"][0], row["lhs"][1], row["rhs"][0], row["rhs"][1],
            row["abs_residual"], row["rel_residual"], row["error_estimate"],
            row["tolerance"], row["passed"],
        ])
    return buf.getvalue()


def emit_table(report: SuiteReport, fmt: str, out_dir: str) -> list:
    """Write the report table and a wall-clock summary; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    table_path = os.path.join(out_dir, f"reports.{fmt}")
    text = render_json(report) if fmt == "json" else render_csv(report)
    with open(table_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    paths.append(table_path)
    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "version": report.version,
                "summary": report.summary,
                "wall_clock_seconds": report.wall_clock,
            },
            fh, indent=2,
        )
        fh.write("\n")
    paths.append(summary_path)
    return paths


def pairing_factor_rows(cfg: RunConfig) -> list:
    """Rows (irrep, s, s', numeric factor, closed factor, residual)."""
    group = group_spec(cfg.group, n=cfg.torus_rank, normalization=cfg.normalization)
    band = cfg.band_limit if cfg.band_limit is not None else default_band_limit(group)
    factory = pairing.default_char_factory(
        group, cfg.hbar0, backend=cfg.char_backend, samples=cfg.mc_samples,
        seed=cfg.seed, points_per_panel=cfg.points_per_panel, panels=cfg.panels,
    )
    s_pos = [s for s in cfg.s_grid if s > 0.0]
    sp_pos = [s for s in cfg.s_prime_grid if s > 0.0]
    if group.kind == "su3":
        cells = [(_grid_value_near(s_pos, 1.0), _grid_value_near(sp_pos, 0.5))]
    else:
        cells = [(s, sp) for s in s_pos for sp in sp_pos]
    rows = []
    for irrep in enumerate_irreps(group, band):
        if irrep.casimir <= 0.0:
            continue
        for s, sp in cells:
            # factor columns are emitted as plain floats, so parameter
            # cells whose factor leaves float range are omitted
            if abs(_factor_log(group, cfg.hbar0, s, sp, irrep)) > 300.0:
                continue
            numeric, _ = pairing.bks_factor_numeric(group, cfg.hbar0, s, sp,
                                                    irrep, factory)
            closed = pairing.bks_factor_closed(group, cfg.hbar0, s, sp, irrep)
            rows.append({
                "irrep": str(irrep.label),
                "s": s,
                "s_prime": sp,
                "numeric_factor": numeric,
                "closed_factor": closed,
                "residual": abs(numeric - closed) / closed,
            })
    return rows


def emit_factor_table(rows: list, fmt: str, out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"pairing-factors.{fmt}")
    with open(path, "w", encoding="utf-8") as fh:
        if fmt == "json":
            json.dump(rows, fh, indent=2)
            fh.write("\n")
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["irrep", "s", "s_prime", "numeric_factor", "closed_factor",
                 "residual"]
            )
            for row in rows:
                writer.writerow([
                    row["irrep"], row["s"], row["s_prime"],
                    row["numeric_factor"], row["closed_factor"],
                    row["residual"],
                ])
    return path
