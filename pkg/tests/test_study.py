import math

import numpy as np
import pytest

from bzdos import reference
from bzdos.study import (CSV_HEADER, ConfigError, ReferenceMissing, StudySpec, TargetUnreachable,
                         _largest_tol, _smallest_n, cost_rows_to_csv, cost_to_accuracy, diagnose,
                         evaluate, load_model, loglog_slope, optimal_eta_sweep,
                         read_reference_csv, reference_value, rows_to_csv, run_convergence)
from bzdos.wannier import ParseError, from_model, write_hr


class TestSpec:
    @pytest.mark.parametrize("kw", [
        {"method": "simpson"},
        {"system": "nope"},
        {"energies": ()},
        {"energies": (math.nan,)},
        {"method": "ptr"},
        {"method": "iai", "eta": -0.1},
        {"threads": 0},
        {"schedule": (50, 25)},
        {"schedule": (1, 4)},
        {"method": "iai", "eta": 0.1, "schedule": (1e-4, 1e-3)},
        {"hr": "/nonexistent/hr.dat"},
    ])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            StudySpec(**kw).validate()

    def test_valid(self):
        StudySpec(method="iai", eta=0.1, schedule=(1e-4, 1e-6)).validate()
        StudySpec(schedule=(25, 50, 100)).validate()


class TestReference:
    def test_analytic(self, chain):
        spec = StudySpec()
        assert reference_value(spec, 0.0, chain.exact_dos) == pytest.approx(1 / (2 * np.pi))

    def test_missing(self):
        with pytest.raises(ReferenceMissing):
            reference_value(StudySpec(reference=None), 0.0)
        with pytest.raises(ReferenceMissing):
            reference_value(StudySpec(), 0.0, None)

    def test_csv(self, tmp_path):
        path = tmp_path / "ref.csv"
        path.write_text("energy,value\n0.0,0.5\n1.0,0.25\n")
        assert read_reference_csv(path) == [(0.0, 0.5), (1.0, 0.25)]
        assert reference_value(StudySpec(reference=str(path)), 1.0) == 0.25
        with pytest.raises(ReferenceMissing):
            reference_value(StudySpec(reference=str(path)), 2.0)
        bad = tmp_path / "bad.csv"
        bad.write_text("e,v\n")
        with pytest.raises(ParseError):
            read_reference_csv(bad)
        bad.write_text("energy,value\n0.0,x\n")
        with pytest.raises(ParseError) as exc:
            read_reference_csv(bad)
        assert exc.value.line == 2


def test_load_model_from_hr(tmp_path):
    path = tmp_path / "chain_hr.dat"
    path.write_text(write_hr(from_model(reference.make_chain().model)))
    model, exact = load_model(StudySpec(hr=str(path), system=None, fermi=0.5))
    assert exact is None
    assert model.eigvals(np.array([[0.0]]))[0, 0] == pytest.approx(1.5)


@pytest.mark.parametrize("method,extra", [("ptr", {"eta": 0.1}), ("iai", {"eta": 0.1}),
                                          ("lt", {}), ("bcd", {})])
def test_evaluate_dispatch(chain, method, extra):
    est = evaluate(chain.model, StudySpec(method=method, n=64, **extra), 0.3)
    assert est.method == method and est.value > 0


class TestConvergence:
    def test_rows_and_csv(self):
        spec = StudySpec(method="bcd", schedule=(25, 50, 100), timing=False)
        rows = run_convergence(spec, 0.5)
        assert [r.n for r in rows] == [25, 50, 100]
        assert all(r.wall_time_s == 0.0 for r in rows)
        assert rows[-1].abs_error < rows[0].abs_error
        text = rows_to_csv(rows)
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert lines[1].startswith("25,25,0.0,")
        assert text == rows_to_csv(run_convergence(spec, 0.5))

    def test_iai_schedule_labels(self):
        spec = StudySpec(method="iai", eta=0.1, schedule=(1e-4, 1e-8))
        rows = run_convergence(spec, 0.0)
        assert [r.n for r in rows] == [1e-4, 1e-8]
        assert rows[1].nevals > rows[0].nevals

    def test_without_reference(self):
        rows = run_convergence(StudySpec(schedule=(25,), reference=None), 0.0)
        assert rows[0].abs_error is None
        assert rows_to_csv(rows).splitlines()[1].endswith(",,")
        with pytest.raises(ReferenceMissing):
            run_convergence(StudySpec(schedule=(25,), reference=None), 0.0, want_errors=True)

    def test_needs_schedule(self):
        with pytest.raises(ConfigError):
            run_convergence(StudySpec(), 0.0)

    def test_slope(self):
        x = np.array([10, 20, 40, 80])
        assert loglog_slope(x, 3 * x**-2.0) == pytest.approx(-2.0)


class TestEtaSweep:
    def test_best_eta_shrinks_with_budget(self):
        etas = [0.4, 0.2, 0.1, 0.05, 0.025]
        best, rows = optimal_eta_sweep(StudySpec(energies=(0.0,)), etas, [64, 256, 1024])
        assert len(rows) == 15
        assert best[1024][0] <= best[64][0]
        assert best[1024][1] < best[64][1]

    def test_budget_to_grid(self, graphene):
        _, rows = optimal_eta_sweep(StudySpec(system="graphene"), [0.1], [100, 1000])
        assert [r[2] for r in rows] == [10, 31]

    def test_invalid(self):
        with pytest.raises(ConfigError):
            optimal_eta_sweep(StudySpec(), [], [10])
        with pytest.raises(ConfigError):
            optimal_eta_sweep(StudySpec(), [0.1], [100, 10])


class TestCost:
    def test_search_finds_threshold(self):
        calls = []

        def run(n):
            calls.append(n)
            return None, 1.0 / n

        n, _, err = _smallest_n(run, 1 / 100)
        assert n == 100 and err == pytest.approx(0.01)
        assert len(set(calls)) == len(calls)  # cached

    def test_search_skips_isolated_dips(self):
        def run(n):
            return None, 0.0 if n == 64 else 1.0 / n

        n, _, _ = _smallest_n(run, 1 / 1000)
        assert n == 1000

    def test_unreachable(self):
        with pytest.raises(TargetUnreachable):
            _smallest_n(lambda n: (None, 1.0), 0.1, n_max=64)
        with pytest.raises(TargetUnreachable):
            _largest_tol(lambda t: (None, 1.0), 0.1)

    def test_largest_tol(self):
        tol, _, err = _largest_tol(lambda t: (None, 3 * t), 1e-6)
        assert err <= 1e-6 and tol > 1e-7

    def test_ptr_grows_like_inverse_eta(self):
        rows = cost_to_accuracy(StudySpec(method="ptr", energies=(0.0,)), 1e-6, [0.2, 0.1, 0.05])
        assert all(r.reached for r in rows)
        assert -loglog_slope([r.eta for r in rows], [r.nevals for r in rows]) == \
            pytest.approx(1.0, abs=0.25)
        text = cost_rows_to_csv(rows)
        assert text.splitlines()[0] == "eta,n,nevals,wall_time_s,value,abs_error,reached"

    def test_unreached_row(self):
        rows = cost_to_accuracy(StudySpec(method="ptr"), 1e-12, [0.001], n_max=16)
        assert not rows[0].reached and math.isnan(rows[0].value)

    def test_rejects_lt(self):
        with pytest.raises(ConfigError):
            cost_to_accuracy(StudySpec(method="lt"), 1e-6, [0.1])
        with pytest.raises(ConfigError):
            cost_to_accuracy(StudySpec(method="ptr"), 0.0, [0.1])


def test_diagnose_exit_codes():
    reports, code = diagnose(StudySpec(system="chain", energies=(0.5,), n=50))
    assert code == 0 and not reports[0.5].failed
    reports, code = diagnose(StudySpec(system="two-block", energies=(0.0,), n=50))
    assert code == 2 and reports[0.0].failed
