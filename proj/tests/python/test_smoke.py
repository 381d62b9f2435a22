"""Smoke tests for the ctmlab python module.

Runs standalone (python3 test_smoke.py) or under pytest.
"""

import math
import shutil
import tempfile

import ctmlab


def desk_grid():
    return ctmlab.Grid(32, 16, 6.25e5, 3.75e5, 0.0, -3.0e6)


def desk_plume():
    p = ctmlab.PlumeSpec()
    p.center_x = 1.0e7
    p.center_y = 2.0e6
    p.side_x = 2.5e6
    p.side_y = 1.875e6
    return p


def test_grid_and_field():
    g = desk_grid()
    assert g.ncells() == 512
    assert g.lx() == 2.0e7
    f = ctmlab.ScalarField(g, 1.5)
    assert f.at(3, 4) == 1.5
    f.set(3, 4, 2.5)
    assert f.at(3, 4) == 2.5
    assert len(f.values) == 512


def test_plume_and_transport():
    g = desk_grid()
    truth = ctmlab.make_plume(g, desk_plume())
    assert truth.min_value() == 1.0
    assert max(truth.values) == 2.0
    w = ctmlab.WindField.bickley_jet(g)
    final, log = ctmlab.integrate_forward(truth, w, 0.0, 6.0 * 3600.0)
    assert log.steps >= 1
    assert log.max_cfl <= 0.8 + 1e-12
    drift = abs(log.mass_final - log.mass_initial) / log.mass_initial
    assert drift <= 1e-9
    assert final.min_value() >= 0.0


def test_gradient_and_inversion():
    g = desk_grid()
    w = ctmlab.WindField.bickley_jet(g)
    model = ctmlab.ModelSpec()
    model.tf = 0.0  # zero window: pure quadratic identity problem
    res, truth = ctmlab.run_inversion(desk_plume(), 0.0, w, model, ctmlab.MinimizerSpec())
    assert ctmlab.rel_l2_error(res.c0_hat, truth, 1.0) <= 1e-8
    assert res.termination == ctmlab.Termination.grad_tol
    assert len(res.history) == res.iterations + 1


def test_diagnostics_closed_forms():
    assert ctmlab.loss_estimate(1.0, 2.0).percent == 50.0
    assert abs(ctmlab.loss_estimate(1.0, 3.0).percent - 100.0 / 1.5) < 1e-12
    p = desk_plume()
    assert ctmlab.broadening_estimate(p, 3.5e6, 0.0) == 1.0
    assert ctmlab.effective_diffusivity(9e-6, 1e6, 4e5).d_h == 3.6e6
    assert ctmlab.reconstructible_length_scale(10.0, 172800.0) == 1.728e6


def test_ftle_uniform_is_flat():
    g = desk_grid()
    w = ctmlab.WindField.uniform(g, 10.0)
    f = ctmlab.ftle_field(w, 0.0, 1.0e5)
    assert max(abs(v) for v in f.values) <= 1e-12


def test_config_and_twin():
    cfg = ctmlab.parse_config_text(
        "[grid]\nnx = 32\nny = 16\n[wind]\nkind = bickley_jet\n"
        "[plume]\ncenter_x = 1.0e7\ncenter_y = 2.0e6\nside_x = 2.5e6\nside_y = 1.875e6\n"
    )
    assert cfg.minimizer.max_iters == 60
    assert cfg.windows[0] == 900.0
    assert ctmlab.parse_duration("0.5h") == 1800.0

    out = tempfile.mkdtemp(prefix="ctmlab_smoke_")
    try:
        result = ctmlab.run_twin(cfg, 0.0, out)
        assert result.report.rel_l2_pct == 0.0
        assert result.report.area_ratio_measured == 1.0
        assert result.report.loss_est_pct == 0.0
        field, t = ctmlab.read_field_file(out + "/truth.field")
        assert t == 0.0
        assert max(field.values) == 2.0
    finally:
        shutil.rmtree(out)


def test_errors_map_to_python():
    try:
        ctmlab.parse_config_text("[grid]\nnx = -4\n")
    except ValueError:
        pass
    except RuntimeError:
        pass
    else:
        raise AssertionError("invalid config must raise")


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for t in tests:
        t()
        print(f"ok: {t.__name__}")
    print(f"all {len(tests)} python smoke tests passed")


if __name__ == "__main__":
    main()
