import json
import os
import shutil

import numpy as np
import pytest

from awilt.domains import Disc, ImagSegment, RealSegment, discretize, distance_to
from awilt.errors import PoleInsideDomainError
from awilt.methods import to_full
from awilt.tame import (PRESET_ROWS, AAAReport, BarycentricApproximant,
                        aaa_fit, barycentric_eval, build_presets, build_tame,
                        extract_poles, extract_residues, preset_entry,
                        preset_filename, preset_tame)


def _single_pole_approximant(pole=1.0):
    """r(z) = 1/(pole - z) in barycentric form with support {0}."""
    # denominator -1 + pole/z = (pole - z)/z vanishes exactly at the pole
    return BarycentricApproximant(support=np.array([0.0 + 0j]),
                                  values=np.array([1.0 / pole + 0j]),
                                  weights=np.array([-1.0 + 0j, pole + 0j]))


class TestBarycentricEval:
    def test_single_support_point(self):
        b = BarycentricApproximant(support=np.array([0.0 + 0j]),
                                   values=np.array([1.0 + 0j]),
                                   weights=np.array([1.0 + 0j, 1.0 + 0j]))
        # r(z) = (1/z) / (1 + 1/z) = 1/(z + 1)
        assert barycentric_eval(b, 1.0) == pytest.approx(0.5)
        assert abs(barycentric_eval(b, 1e8)) < 1.01e-8  # vanishes at infinity
        assert barycentric_eval(b, 0.0) == 1.0  # interpolation is exact

    def test_interpolation_near_support(self):
        b = _single_pole_approximant(2.0)
        z = 1e-9  # raw formula just off the support point
        want = 1.0 / (2.0 - z)
        assert abs(barycentric_eval(b, z) - want) < 1e-13

    def test_vectorized(self):
        b = _single_pole_approximant(3.0)
        zs = np.array([0.0, 1.0, 1.0j])
        out = barycentric_eval(b, zs)
        assert np.max(np.abs(out - 1.0 / (3.0 - zs))) < 1e-14


class TestAAAFit:
    def test_recovers_low_degree_rational(self):
        poles = np.array([5.0, 6.0, 7.0 + 2.0j, 7.0 - 2.0j])
        res = np.array([1.0, -2.0, 1.5 + 0.5j, 1.5 - 0.5j])

        def target(z):
            return complex(np.sum(res / (poles - z)))

        Z = discretize(Disc(complex(0.0), 2.0), 400)
        b, report = aaa_fit(target, Z, max_order=8, tol=1e-13)
        grid = discretize(Disc(complex(0.0), 2.0), 997).points
        err = np.abs(barycentric_eval(b, grid)
                     - np.array([target(z) for z in grid]))
        assert np.max(err) < 1e-12
        assert report.termination == "tolerance"

    @pytest.mark.parametrize("radius,order,eps_max", [
        (4.0, 10, 1e-11),
        (0.6, 6, 1e-12),
    ])
    def test_exp_fit_accuracy(self, radius, order, eps_max):
        Z = discretize(Disc(complex(-radius), radius), 1000)
        b, report = aaa_fit(np.exp, Z, max_order=order, tol=0.0)
        assert report.epsilon <= eps_max

    def test_residual_history_decreases(self):
        Z = discretize(Disc(complex(-2.0), 2.0), 600)
        _, report = aaa_fit(np.exp, Z, max_order=10, tol=0.0)
        res = report.residuals
        # greedy progress: each step improves, up to a small slack factor
        for a, b_ in zip(res, res[1:]):
            assert b_ <= 10.0 * a

    def test_conjugate_pairs_added_together(self):
        Z = discretize(Disc(complex(-2.0), 2.0), 600)
        b, report = aaa_fit(np.exp, Z, max_order=8, tol=0.0)
        sup = [complex(z) for z in report.support_order]
        k = 0
        while k < len(sup):
            if abs(sup[k].imag) > 1e-12:
                assert sup[k + 1] == sup[k].conjugate()
                k += 2
            else:
                k += 1

    def test_weights_conjugate_symmetric(self):
        Z = discretize(Disc(complex(-2.0), 2.0), 600)
        b, _ = aaa_fit(np.exp, Z, max_order=8, tol=0.0)
        assert b.weights[0].imag == 0.0
        pool = {complex(z): w for z, w in zip(b.support, b.weights[1:])}
        for z, w in pool.items():
            assert pool[z.conjugate()] == w.conjugate()

    def test_odd_budget_stops_before_splitting_pair(self):
        # an imaginary segment has a single real point, so budget 3 can
        # strand one slot when the next candidate is non-real
        Z = discretize(ImagSegment(4.0), 601)
        _, report = aaa_fit(np.exp, Z, max_order=3, tol=0.0)
        assert report.termination in ("no_room_for_pair", "max_order")

    def test_rejects_small_grid(self):
        Z = discretize(Disc(complex(0.0), 1.0), 10)
        with pytest.raises(ValueError):
            aaa_fit(np.exp, Z, max_order=10)

    def test_rejects_extended_loop(self):
        Z = discretize(Disc(complex(0.0), 1.0), 100)
        with pytest.raises(ValueError):
            aaa_fit(np.exp, Z, max_order=4, loop_precision="extended")


class TestExtractPoles:
    def test_single_pole(self):
        b = _single_pole_approximant(1.0)
        poles = extract_poles(b)
        assert len(poles) == 1
        assert poles[0] == pytest.approx(1.0, abs=1e-12)

    def test_imaginary_pair(self):
        # denominator u0 + u1/z + u2/(z-2) proportional to (z^2+1)/(z(z-2))
        b = BarycentricApproximant(
            support=np.array([0.0 + 0j, 2.0 + 0j]),
            values=np.array([1.0 + 0j, 1.0 + 0j]),
            weights=np.array([1.0 + 0j, -0.5 + 0j, 2.5 + 0j]))
        poles = np.sort_complex(extract_poles(b))
        assert np.max(np.abs(poles - np.array([-1j, 1j]))) < 1e-12
        # conjugate pairing is exact, not just close
        assert poles[0] == poles[1].conjugate()

    def test_u0_zero_rejected(self):
        b = BarycentricApproximant(support=np.array([0.0 + 0j]),
                                   values=np.array([1.0 + 0j]),
                                   weights=np.array([0.0 + 0j, 1.0 + 0j]))
        with pytest.raises(ValueError):
            extract_poles(b)


class TestExtractResidues:
    def test_single_pole_residue(self):
        b = _single_pole_approximant(2.0)  # r(z) = 1/(2 - z): residue 1
        w = extract_residues(b, np.array([2.0 + 0j]))
        assert w[0] == pytest.approx(1.0, abs=1e-12)

    def test_reconstruction_matches_fit(self):
        Z = discretize(Disc(complex(-1.0), 1.0), 800)
        b, _ = aaa_fit(np.exp, Z, max_order=8, tol=0.0)
        poles = extract_poles(b)
        w = extract_residues(b, poles)
        probe = discretize(Disc(complex(-1.0), 1.0), 2003).points
        r_bary = barycentric_eval(b, probe)
        r_pf = (w[None, :] / (poles[None, :] - probe[:, None])).sum(axis=1)
        scale = np.max(np.abs(r_bary))
        assert np.max(np.abs(r_bary - r_pf)) < 1e-9 * scale

    def test_duplicate_poles_rejected(self):
        b = _single_pole_approximant(2.0)
        with pytest.raises(ValueError):
            extract_residues(b, np.array([2.0 + 0j, 2.0 + 0j]))

    def test_pole_on_support_rejected(self):
        from awilt.errors import NumericalError
        b = _single_pole_approximant(2.0)
        with pytest.raises(NumericalError):
            extract_residues(b, np.array([0.0 + 0j]))


class TestBuildTame:
    def test_disc_method_quality(self):
        dom = Disc(complex(-4.0), 4.0)
        m, meta, report = build_tame(dom, 5)
        assert m.reduced
        assert meta.epsilon <= 1e-11
        assert meta.eta >= meta.epsilon
        full = to_full(m)
        for b in full.nodes:
            assert distance_to(dom, complex(b)) > 0.0

    def test_nodes_conjugate_exact(self):
        m, _, _ = build_tame(Disc(complex(-2.0), 2.0), 4)
        full = to_full(m)
        pool = dict(zip(full.nodes, full.weights))
        for b, w in pool.items():
            assert pool[b.conjugate()] == w.conjugate()

    def test_real_segment_gives_reduced(self):
        m, meta, _ = build_tame(RealSegment(5.0), 4)
        assert m.reduced
        assert meta.epsilon < 1e-10

    def test_invalid_target(self):
        with pytest.raises(ValueError):
            build_tame(Disc(complex(-1.0), 1.0), 0)

    def test_oversized_budget_survives_degeneracy(self):
        # asking for far more entries than the roundoff floor supports
        # must still return a valid method, not crash on u0 -> 0
        m, meta, _ = build_tame(Disc(complex(-0.5), 0.5), 12, count=600)
        assert meta.epsilon < 1e-12


class TestPresets:
    def test_rows_are_sorted(self):
        rs = [r for r, _ in PRESET_ROWS]
        ns = [n for _, n in PRESET_ROWS]
        assert rs == sorted(rs) and ns == sorted(ns)

    def test_selection_picks_smallest_covering(self):
        m, meta, r_max = preset_entry(1.0)
        assert r_max == 1.8
        assert m.n_entries == 4
        m2 = preset_tame(4.0)
        assert m2.n_entries == 5

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            preset_entry(50.0)
        with pytest.raises(ValueError):
            preset_entry(0.0)

    def test_metadata_present(self):
        for r_max, nprime in PRESET_ROWS:
            m, meta, _ = preset_entry(r_max)
            assert meta.epsilon is not None and meta.epsilon < 1e-9
            assert meta.max_abs_weight is not None
            assert meta.eta is not None
            assert meta.domain == Disc(complex(-r_max), r_max)

    def test_preset_dir_override(self, tmp_path, monkeypatch):
        import awilt
        src = os.path.join(os.path.dirname(awilt.__file__), "presets",
                           preset_filename(0.6, 3))
        dst = tmp_path / preset_filename(0.6, 3)
        with open(src) as fh:
            obj = json.load(fh)
        obj["name"] = "override-marker"
        dst.write_text(json.dumps(obj))
        monkeypatch.setenv("AW_PRESET_DIR", str(tmp_path))
        m, _, _ = preset_entry(0.5)
        assert m.name == "override-marker"

    def test_preset_dir_missing_file(self, tmp_path, monkeypatch):
        monkeypatch.setenv("AW_PRESET_DIR", str(tmp_path))
        with pytest.raises(OSError):
            preset_entry(0.5)
