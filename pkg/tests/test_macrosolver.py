"""Tests for the homogenized macro solver."""

import numpy as np
import pytest

from tests.conftest import analytic_table
from thermo_homogenization.cellhomog import EffectiveCoefficients
from thermo_homogenization.errors import AdmissibilityError, ValidationError
from thermo_homogenization.fem import Assembler, generate_macro_mesh
from thermo_homogenization.macrosolver import (
    MacroConfig,
    MacroState,
    elasticity_load,
    elasticity_system,
    heat_content,
    mms_study,
    picard_threshold,
    run_macro,
    solve_elasticity,
    step_heat,
    uniform_euler,
    uniform_rk4,
    update_height,
)
from thermo_homogenization.macrosolver.steps import coefficient_fields
from thermo_homogenization.outputs import load_manifest, read_csv
from thermo_homogenization.params import PhysicalParams
from thermo_homogenization.tables import CoefficientTable, params_fingerprint
from thermo_homogenization.utils import calculate_sha256


@pytest.fixture
def mesh():
    return generate_macro_mesh(6)


@pytest.fixture
def asm(mesh):
    return Assembler(mesh)


def _frozen_state(mesh, params, h=0.0):
    state = MacroState.initial(mesh, params)
    state.h = np.full(mesh.n_nodes, h)
    return state


def _march(state, table, params, dt, steps, asm, lumped=False):
    """Implicit steps with h held fixed."""
    for _ in range(steps):
        state.theta = step_heat(state, table, params, dt, state.h, assembler=asm, lumped=lumped)
        state.t += dt
    return state


def _no_hole_table(params):
    nodes = [
        EffectiveCoefficients(
            h=h,
            phi=1.0,
            phi_gamma=0.0,
            K=params.K.copy(),
            C=params.stiffness_tensor(),
            H=np.zeros(2),
        )
        for h in (-0.01, 0.0, 0.01)
    ]
    return CoefficientTable(
        shape={"kind": "none"},
        params_fingerprint=params_fingerprint(params),
        mesh_resolution=0.0,
        grid=[-0.01, 0.0, 0.01],
        nodes=nodes,
    )


class TestUpdateHeight:
    """Tests for the nodal height rule."""

    def test_constant_velocity(self):
        h = np.zeros(4)
        for _ in range(5):
            h = update_height(h, np.full(4, 0.1), 0.1)
        assert np.allclose(h, 0.05, rtol=0.0, atol=1e-15)

    def test_zero_velocity(self):
        h = np.array([0.01, -0.02])
        assert np.array_equal(update_height(h, np.zeros(2), 0.5), h)

    def test_sign_follows_theta(self):
        h = update_height(np.zeros(3), np.array([-1.0, 0.0, 2.0]), 0.01)
        assert h[0] < 0.0
        assert h[1] == 0.0
        assert h[2] > 0.0


class TestStepHeat:
    """Tests for one implicit heat step."""

    def test_conservation_over_100_steps(self, mesh, asm, circle_table):
        params = PhysicalParams.from_dict({"latent_heat": 0.0, "theta0": [0.1, 1.0, 0.0, 0.0, 2.0]})
        state = _frozen_state(mesh, params, h=0.01)
        before = heat_content(asm, circle_table, params, state.theta, state.h)
        _march(state, circle_table, params, 1e-3, 100, asm)
        after = heat_content(asm, circle_table, params, state.theta, state.h)
        assert abs(after - before) <= 1e-9 * abs(before)
        assert np.ptp(state.theta) > 0.0

    def test_uniform_decay(self, mesh, asm, circle_table):
        params = PhysicalParams.from_dict({"theta0": 1.0})
        state = _frozen_state(mesh, params)
        dt = 1e-3
        _march(state, circle_table, params, dt, 10, asm)
        node = circle_table.interpolate(0.0)
        rate = params.latent_heat * node.phi_gamma / (params.heat_capacity * node.phi)
        assert np.allclose(state.theta, (1.0 + rate * dt) ** -10, rtol=1e-12, atol=0.0)
        assert np.allclose(state.theta, np.exp(-rate * 10 * dt), rtol=5e-5, atol=0.0)

    def test_manufactured_steady_state(self, mesh, asm, circle_table):
        theta_bar = 0.3
        node = circle_table.interpolate(0.0)
        g = node.phi_gamma * theta_bar / node.phi
        params = PhysicalParams.from_dict({"theta0": theta_bar, "g": g})
        state = _frozen_state(mesh, params)
        _march(state, circle_table, params, 1e-3, 5, asm)
        assert np.allclose(state.theta, theta_bar, rtol=0.0, atol=1e-10)

    def test_lumped_maximum_principle(self, mesh, asm, circle_table):
        params = PhysicalParams.from_dict({"theta0": [0.0, 1.0, -2.0, 0.0, 3.0]})
        state = _frozen_state(mesh, params, h=-0.01)
        bound = np.abs(state.theta).max()
        for _ in range(20):
            _march(state, circle_table, params, 1e-2, 1, asm, lumped=True)
            assert np.abs(state.theta).max() <= bound + 1e-8

    def test_table_range_enforced(self, mesh, asm, circle_table, params):
        state = _frozen_state(mesh, params)
        with pytest.raises(AdmissibilityError):
            step_heat(state, circle_table, params, 1e-3, np.full(mesh.n_nodes, 0.03), assembler=asm)


class TestElasticity:
    """Tests for the effective elasticity solve."""

    def test_zero_data(self, mesh, asm, circle_table, params):
        state = _frozen_state(mesh, params, h=0.005)
        u = solve_elasticity(state, circle_table, params, assembler=asm)
        assert u.shape == (mesh.n_nodes, 2)
        assert np.all(u == 0.0)

    def test_no_hole_reduces_to_classical(self, mesh, asm):
        params = PhysicalParams.from_dict({"theta0": 0.5})
        table = _no_hole_table(params)
        h = np.zeros(mesh.n_nodes)
        theta = np.full(mesh.n_nodes, 0.5)
        system = elasticity_system(asm, table, params, theta, h)
        reference = asm.elastic(params.stiffness_tensor())
        assert abs(system.matrix - reference).max() <= 1e-14
        expected = asm.stress_load(params.alpha * 0.5 * np.eye(2))
        assert np.allclose(system.rhs, expected, rtol=0.0, atol=1e-14)

    def test_thermal_load_linear_in_alpha(self, mesh, asm, circle_table, rng):
        theta = rng.uniform(-1.0, 1.0, mesh.n_nodes)
        fields = coefficient_fields(asm, circle_table, np.full(mesh.n_nodes, 0.002))
        single = elasticity_load(asm, fields, theta, PhysicalParams(alpha=1.5))
        double = elasticity_load(asm, fields, theta, PhysicalParams(alpha=3.0))
        assert np.allclose(double - 2.0 * single, 0.0, rtol=0.0, atol=1e-14)

    def test_boundary_held(self, mesh, asm, circle_table):
        params = PhysicalParams.from_dict({"theta0": [0.0, 1.0]})
        state = _frozen_state(mesh, params)
        u = solve_elasticity(state, circle_table, params, assembler=asm)
        assert np.all(u[mesh.outer_nodes] == 0.0)
        assert np.abs(u).max() > 0.0


class TestRunMacro:
    """Tests for the full time loop."""

    def test_zero_data(self, circle_table):
        run = run_macro(MacroConfig(nx=4, dt=1e-3, t_end=0.005), circle_table)
        assert run.success
        for state in run.states:
            assert np.all(state.theta == 0.0)
            assert np.all(state.h == 0.0)
            assert np.all(state.u == 0.0)
        assert all(row["picard_iters"] == 1 for row in run.series[1:])

    def test_uniform_reduction_matches_rk4(self, circle_table):
        params = PhysicalParams.from_dict({"theta0": 0.2, "g": 0.5})
        reference = uniform_rk4(circle_table, params, 5e-4, 0.05, substeps=100)
        theta_ref, h_ref = reference.at(0.05)
        errors = []
        for dt in (1e-3, 5e-4):
            config = MacroConfig(nx=4, dt=dt, t_end=0.05, params=params, output_every=1000)
            run = run_macro(config, circle_table)
            final = run.final
            assert final.t == pytest.approx(0.05)
            assert np.ptp(final.theta) <= 1e-12
            assert np.allclose(final.theta, theta_ref, rtol=1e-3, atol=0.0)
            assert np.allclose(final.h, h_ref, rtol=1e-3, atol=0.0)
            euler_theta, euler_h = uniform_euler(circle_table, params, dt, 0.05).at(0.05)
            assert np.allclose(final.theta, euler_theta, rtol=1e-9, atol=0.0)
            assert np.allclose(final.h, euler_h, rtol=1e-9, atol=0.0)
            errors.append(abs(final.theta[0] - theta_ref))
        assert 1.6 < errors[0] / errors[1] < 2.4

    def test_picard_increments_decrease(self, circle_table):
        params = PhysicalParams.from_dict({"theta0": [0.1, 0.2, -0.1]})
        run = run_macro(MacroConfig(nx=4, dt=1e-3, t_end=0.01, params=params), circle_table)
        assert 1e-3 < run.picard_threshold
        for increments in run.picard_history:
            assert all(b < a for a, b in zip(increments, increments[1:]))

    def test_band_violation_aborts_with_outputs(self, circle_table, tmp_path):
        params = PhysicalParams.from_dict({"theta0": 1.0})
        config = MacroConfig(nx=4, dt=0.01, t_end=0.1, params=params, output_dir=tmp_path)
        with pytest.raises(AdmissibilityError) as excinfo:
            run_macro(config, circle_table)
        details = excinfo.value.details
        assert details["t"] == pytest.approx(0.03)
        assert 0 <= details["node"] < 41
        series = read_csv(tmp_path / "series.csv")
        assert np.allclose(series["t"], [0.0, 0.01, 0.02])
        manifest = load_manifest(tmp_path)
        assert manifest["status"] == "aborted"
        assert manifest["error"]["error"] == "AdmissibilityError"
        assert len(manifest["outputs"]) == 3

    def test_outputs_written(self, circle_table, tmp_path):
        params = PhysicalParams.from_dict({"theta0": 0.1})
        config = MacroConfig(
            nx=3, dt=1e-3, t_end=0.005, params=params, output_every=2, output_dir=tmp_path
        )
        run = run_macro(config, circle_table)
        assert [s.step for s in run.states] == [0, 2, 4, 5]
        manifest = load_manifest(tmp_path)
        assert manifest["status"] == "completed"
        assert [entry["files"] for entry in manifest["outputs"]] == [
            ["fields_0000.csv"], ["fields_0001.csv"], ["fields_0002.csv"], ["fields_0003.csv"]
        ]
        for name, digest in manifest["files"].items():
            assert calculate_sha256(tmp_path / name) == digest
        header = (tmp_path / "fields_0003.csv").read_text().splitlines()[0]
        assert header == "node,x,y,theta,h,ux,uy"
        series = read_csv(tmp_path / "series.csv")
        assert len(series["t"]) == 6

    def test_rerun_is_byte_identical(self, circle_table, tmp_path):
        params = PhysicalParams.from_dict({"theta0": [0.1, 0.05]})
        for name in ("a", "b"):
            config = MacroConfig(
                nx=3, dt=1e-3, t_end=0.003, params=params, output_dir=tmp_path / name
            )
            run_macro(config, circle_table)
        for name in ("series.csv", "fields_0001.csv", "outputs.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_needs_a_table(self):
        with pytest.raises(ValidationError):
            run_macro(MacroConfig(nx=2, dt=1e-3, t_end=0.001))


class TestMacroConfig:
    """Tests for configuration checks."""

    def test_rejects_bad_step(self):
        with pytest.raises(ValidationError):
            MacroConfig(dt=0.0)
        with pytest.raises(ValidationError):
            MacroConfig(dt=0.003, t_end=0.01)
        with pytest.raises(ValidationError):
            MacroConfig(picard_tol=-1.0)

    def test_output_steps(self):
        assert MacroConfig(dt=0.1, t_end=0.5, output_every=2).output_steps() == [0, 2, 4, 5]

    def test_threshold_without_motion(self):
        assert picard_threshold(analytic_table(), 0.0) == float("inf")


class TestMMS:
    """Manufactured-solution convergence."""

    def test_second_order(self):
        result = mms_study(levels=(8, 16, 32))
        assert result.success
        assert min(result.orders) >= 1.9

    def test_with_reaction(self):
        result = mms_study(levels=(8, 16, 32), conductivity=2.0, reaction=3.0)
        assert min(result.orders) >= 1.9
