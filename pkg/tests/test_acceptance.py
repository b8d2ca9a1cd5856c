"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one PASS/FAIL line (run pytest with -s to see them all) and
then asserts, so a red criterion is visible both ways.
"""

import json
import os
import time

import numpy as np
import pytest

from diraclab import build_clifford, random_field, weyl
from diraclab import boundary as bnd
from diraclab import dirac_ops as ops
from diraclab import solver, symbols
from diraclab.cli import main


def _report(num, name, ok, detail):
    print(f"ACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'} [{detail}]")


def test_criterion_1_clifford():
    t0 = time.perf_counter()
    worst_anti = worst_skew = 0.0
    for n in range(1, 11):
        rep = build_clifford(n)
        eye = np.eye(rep.s_dim)
        for j in range(n):
            for k in range(n):
                target = -2.0 * eye if j == k else 0.0
                worst_anti = max(
                    worst_anti,
                    np.abs(rep.gamma_minus[j] @ rep.gamma_plus[k]
                           + rep.gamma_minus[k] @ rep.gamma_plus[j] - target).max(),
                    np.abs(rep.gamma_plus[j] @ rep.gamma_minus[k]
                           + rep.gamma_plus[k] @ rep.gamma_minus[j] - target).max(),
                )
            worst_skew = max(
                worst_skew,
                np.abs(rep.gamma_plus[j].conj().T + rep.gamma_minus[j]).max(),
            )
    wall = time.perf_counter() - t0
    ok = worst_anti <= 1e-12 and worst_skew <= 1e-12 and wall < 5.0
    _report(1, "clifford n=1..10", ok,
            f"anti={worst_anti:.2e} skew={worst_skew:.2e} wall={wall:.2f}s")
    assert worst_anti <= 1e-12
    assert worst_skew <= 1e-12
    assert wall < 5.0


def test_criterion_2_weyl():
    t0 = time.perf_counter()
    worst_idem = worst_angle = 0.0
    dims_ok = True
    for k in (2, 3, 4, 5):
        for lam in ("21", "22", "311"):
            ws = weyl.weyl_space(k, lam)
            pn = np.linalg.norm(ws.projector)
            if pn > 0:
                worst_idem = max(
                    worst_idem,
                    np.linalg.norm(ws.projector @ ws.projector - ws.projector) / pn,
                )
            ym = weyl.young_symmetrizer(k, lam)
            yn = np.linalg.norm(ym)
            if yn > 0:
                worst_idem = max(worst_idem, np.linalg.norm(ym @ ym - ym) / yn)
            ybasis = weyl._image_basis(ym)
            dims_ok = dims_ok and ws.dim == weyl.weyl_dim(k, lam) == ybasis.shape[1]
            if ws.dim:
                worst_angle = max(
                    worst_angle, float(weyl.principal_angles(ws.basis, ybasis).max())
                )
    degenerate_ok = (
        weyl.weyl_space(2, "22").dim == 1 and weyl.weyl_space(2, "311").dim == 0
    )
    wall = time.perf_counter() - t0
    ok = (worst_idem <= 1e-10 and worst_angle <= 1e-8 and dims_ok
          and degenerate_ok and wall < 30.0)
    _report(2, "weyl k=2..5", ok,
            f"idem={worst_idem:.2e} angle={worst_angle:.2e} dims_ok={dims_ok} "
            f"wall={wall:.2f}s")
    assert worst_idem <= 1e-10
    assert worst_angle <= 1e-8
    assert dims_ok and degenerate_ok
    assert wall < 30.0


def test_criterion_3_complex_property():
    t0 = time.perf_counter()
    rngs = np.random.default_rng(3)
    worst_complex = worst_agree = 0.0
    for k in (2, 3, 4):
        for n in (2, 3):
            rep = build_clifford(n)
            for _ in range(25):
                f = random_field(rngs, k, n, "V0", rep, degree=4, nterms=6)
                worst_complex = max(
                    worst_complex,
                    ops.d1(ops.d0(f, rep), rep).norm() / max(f.norm(), 1e-300),
                )
                F = random_field(rngs, k, n, "V1", rep, degree=4, nterms=6)
                h = ops.d1(F, rep)
                hp = ops.d1_projector(F, rep)
                worst_agree = max(
                    worst_agree, (h - hp).norm() / max(h.norm(), 1e-300)
                )
                if k >= 3:
                    Fn = max(F.norm(), 1e-300)
                    worst_complex = max(
                        worst_complex,
                        ops.d2p(h, rep).norm() / Fn,
                        ops.d2pp(h, rep).norm() / Fn,
                    )
                    hr = random_field(rngs, k, n, "V2", rep, degree=2, nterms=4)
                    a, b = ops.d2p(hr, rep), ops.d2p_projector(hr, rep)
                    worst_agree = max(
                        worst_agree, (a - b).norm() / max(a.norm(), 1e-300)
                    )
                    c, d = ops.d2pp(hr, rep), ops.d2pp_projector(hr, rep)
                    worst_agree = max(
                        worst_agree, (c - d).norm() / max(c.norm(), 1e-300)
                    )
    wall = time.perf_counter() - t0
    ok = worst_complex <= 1e-9 and worst_agree <= 1e-10 and wall < 60.0
    _report(3, "complex property", ok,
            f"compose={worst_complex:.2e} agree={worst_agree:.2e} wall={wall:.2f}s")
    assert worst_complex <= 1e-9
    assert worst_agree <= 1e-10
    assert wall < 60.0


def test_criterion_4_ellipticity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst_kernel = worst_homog = worst_inter = 0.0
    ranks_ok = True
    eig_records = {}
    for k, n in ((3, 2), (3, 3), (2, 2), (2, 3)):
        rep = build_clifford(n)
        for i in range(100):
            while True:
                xi = rng.standard_normal(k * n)
                xi /= np.linalg.norm(xi)
                if np.linalg.norm(xi[:n]) >= 0.3:
                    break
            bundle = symbols.build_bundle(rep, k, xi)
            rpt = symbols.verify_exactness(bundle)
            ranks_ok = ranks_ok and rpt.ok
            if bundle.has_order5:
                worst_kernel = max(worst_kernel, symbols.kernel_identity_check(bundle, rep))
            scale = np.linalg.norm(bundle.sigma1) * np.linalg.norm(bundle.L1)
            worst_inter = max(
                worst_inter, symbols.intertwine_check(bundle) / max(scale, 1e-300)
            )
            bounds = symbols.hodge_eig_bounds(bundle)
            for name, (lo, hi) in bounds.items():
                if name == "L2" and not bundle.has_order5:
                    continue
                rec = eig_records.setdefault((k, n, name), [np.inf, -np.inf])
                rec[0] = min(rec[0], lo)
                rec[1] = max(rec[1], hi)
            if i < 3:
                double = symbols.build_bundle(rep, k, 2.0 * xi)
                for a, b in ((double.L0, bundle.L0), (double.L1, bundle.L1),
                             (double.L2, bundle.L2)):
                    if a.size:
                        worst_homog = max(
                            worst_homog,
                            np.abs(a - 16.0 * b).max() / max(np.abs(b).max(), 1e-300),
                        )
    pd_ok = all(rec[0] > 0 for rec in eig_records.values())
    wall = time.perf_counter() - t0
    ok = (ranks_ok and worst_kernel <= 1e-9 and pd_ok and worst_homog <= 1e-10
          and worst_inter <= 1e-10 and wall < 120.0)
    bounds_txt = "; ".join(
        f"{k}{n}:{name}=[{lo:.3g},{hi:.3g}]"
        for (k, n, name), (lo, hi) in sorted(eig_records.items())
    )
    _report(4, "ellipticity", ok,
            f"ranks_ok={ranks_ok} kernel={worst_kernel:.2e} homog={worst_homog:.2e} "
            f"inter={worst_inter:.2e} wall={wall:.2f}s eig {bounds_txt}")
    assert ranks_ok
    assert worst_kernel <= 1e-9
    assert pd_ok
    assert worst_homog <= 1e-10
    assert worst_inter <= 1e-10
    assert wall < 120.0


def test_criterion_5_solver():
    t0 = time.perf_counter()
    rep = build_clifford(2)
    u, phi, metrics = solver.recover_bump(rep, 2, 2, 32, radius=0.6)
    sweep = solver.resolution_sweep(rep, 2, 2, (16, 24, 32), radius=0.6)
    errs = [row["recovery_rel_l2"] for row in sweep]
    monotone = all(a > b for a, b in zip(errs, errs[1:]))
    wall = time.perf_counter() - t0
    ok = (metrics["recovery_rel_l2"] <= 1e-6
          and metrics["dirac_residual_rel_l2"] <= 1e-8
          and metrics["hartogs"]["ratio"] <= 1e-6
          and monotone and wall < 600.0)
    _report(5, "solver", ok,
            f"recovery={metrics['recovery_rel_l2']:.2e} "
            f"residual={metrics['dirac_residual_rel_l2']:.2e} "
            f"exterior={metrics['hartogs']['ratio']:.2e} "
            f"sweep={[f'{e:.3g}' for e in errs]} wall={wall:.2f}s")
    assert metrics["recovery_rel_l2"] <= 1e-6
    assert metrics["dirac_residual_rel_l2"] <= 1e-8
    assert metrics["hartogs"]["ratio"] <= 1e-6
    assert monotone
    assert wall < 600.0


@pytest.mark.skipif(
    not os.environ.get("DIRACLAB_EXTENDED"),
    reason="optional extended configuration (set DIRACLAB_EXTENDED=1)",
)
def test_criterion_5_extended_nongating():
    rep = build_clifford(2)
    u, phi, metrics = solver.recover_bump(rep, 3, 2, 12, radius=0.6)
    _report(5, "solver extended k=3", True,
            f"recovery={metrics['recovery_rel_l2']:.2e} (non-gating)")


def test_criterion_6_boundary():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst_tm = worst_pi1 = 0.0
    for k in (2, 3):
        for n in (2, 3):
            rep = build_clifford(n)
            tilt = np.zeros((k, n))
            tilt[0, 1] = 1.0
            tilt[1, 0] = 0.5
            charts = [bnd.flat_chart(k, n), bnd.tilted_chart(k, n, tilt)]
            basis = ops.monogenic_basis(rep, k, n, degree=3)
            for chart in charts:
                for f in basis:
                    rpt = bnd.restrict_and_test(f, chart, rep)
                    worst_tm = max(
                        worst_tm,
                        max(rpt["z_residual"], rpt["zt_residual"])
                        / max(rpt["input_norm"], 1e-300),
                    )
                for _ in range(20):
                    F = random_field(rng, k, n, "V0", rep, degree=3, nterms=5)
                    Fp = random_field(rng, k, n, "V0", rep, degree=3, nterms=5)
                    worst_pi1 = max(
                        worst_pi1,
                        bnd.pi1_kernel_check(chart, rep, F, Fp)
                        / max(F.norm() + Fp.norm(), 1e-300),
                    )
    wall = time.perf_counter() - t0
    ok = worst_tm <= 1e-10 and worst_pi1 <= 1e-10 and wall < 30.0
    _report(6, "boundary", ok,
            f"tangential={worst_tm:.2e} pi1={worst_pi1:.2e} wall={wall:.2f}s")
    assert worst_tm <= 1e-10
    assert worst_pi1 <= 1e-10
    assert wall < 30.0


def test_criterion_7_determinism(capsys):
    def run(argv):
        code = main(argv)
        out = capsys.readouterr().out
        report = json.loads(out)
        report.pop("timings")
        return code, json.dumps(report, sort_keys=True)

    verify_args = ["verify", "--scope", "ellipticity", "--k", "3", "--n", "2",
                   "--samples", "5", "--seed", "42"]
    code1, rep1 = run(verify_args)
    code2, rep2 = run(verify_args)
    solve_args = ["solve", "--k", "2", "--n", "2", "--N", "8"]
    code3, sol1 = run(solve_args)
    code4, sol2 = run(solve_args)
    ok = rep1 == rep2 and sol1 == sol2 and code1 == code2 == code3 == code4 == 0
    _report(7, "determinism", ok,
            f"verify identical={rep1 == rep2} solve identical={sol1 == sol2}")
    assert rep1 == rep2
    assert sol1 == sol2
