import numpy as np
import pytest

from mgprox import ExperimentSpec, RunRecord, TraceRow
from mgprox.io import (
    FileFormatError,
    parse_experiment_file,
    read_matrix,
    read_records_csv,
    read_trace_csv,
    read_vector,
    write_experiment_file,
    write_matrix,
    write_records_csv,
    write_trace_csv,
    write_vector,
)


class TestBinaryFormats:
    def test_vector_round_trip(self, tmp_path, rng):
        v = rng.standard_normal(17)
        path = tmp_path / "v.mlv"
        write_vector(path, v)
        assert np.array_equal(read_vector(path), v)

    def test_matrix_round_trip(self, tmp_path, rng):
        A = rng.standard_normal((5, 9))
        path = tmp_path / "a.mlm"
        write_matrix(path, A)
        assert np.array_equal(read_matrix(path), A)

    def test_magic_layout(self, tmp_path):
        path = tmp_path / "v.mlv"
        write_vector(path, np.array([1.5]))
        raw = path.read_bytes()
        assert raw[:6] == b"MLVEC1"
        assert int.from_bytes(raw[6:14], "little") == 1
        assert np.frombuffer(raw[14:], dtype="<f8")[0] == 1.5

    def test_truncated_vector_reports_offset(self, tmp_path):
        path = tmp_path / "v.mlv"
        write_vector(path, np.arange(4.0))
        path.write_bytes(path.read_bytes()[:-9])
        with pytest.raises(FileFormatError, match="byte offset"):
            read_vector(path)

    def test_truncated_matrix_reports_offset(self, tmp_path):
        path = tmp_path / "a.mlm"
        write_matrix(path, np.ones((3, 3)))
        path.write_bytes(path.read_bytes()[:20])
        with pytest.raises(FileFormatError, match="byte offset"):
            read_matrix(path)

    def test_kind_mismatch_rejected(self, tmp_path):
        vpath = tmp_path / "v.mlv"
        write_vector(vpath, np.ones(2))
        with pytest.raises(FileFormatError, match="vector file"):
            read_matrix(vpath)
        mpath = tmp_path / "a.mlm"
        write_matrix(mpath, np.ones((2, 2)))
        with pytest.raises(FileFormatError, match="matrix file"):
            read_vector(mpath)


class TestCsvFormats:
    def test_vector_one_value_per_line(self, tmp_path):
        path = tmp_path / "v.csv"
        path.write_text("1.5\n-2.25\n3.0\n")
        assert np.array_equal(read_vector(path), [1.5, -2.25, 3.0])

    def test_vector_single_comma_line(self, tmp_path):
        path = tmp_path / "v.csv"
        path.write_text("1.0, 2.0, 3.0\n")
        assert np.array_equal(read_vector(path), [1.0, 2.0, 3.0])

    def test_matrix_rows(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("1.0,2.0\n3.0,4.0\n")
        assert np.array_equal(read_matrix(path), [[1.0, 2.0], [3.0, 4.0]])

    def test_ragged_row_reports_line(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(FileFormatError, match="line 2"):
            read_matrix(path)

    def test_non_numeric_reports_line(self, tmp_path):
        path = tmp_path / "v.csv"
        path.write_text("1.0\nbogus\n")
        with pytest.raises(FileFormatError, match="line 2"):
            read_vector(path)

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "v.csv"
        path.write_text("# only a comment\n")
        with pytest.raises(FileFormatError):
            read_vector(path)


class TestTraceRecordsCsv:
    def test_trace_round_trip_lossless(self, tmp_path, rng):
        rows = [
            TraceRow(k, "coarse" if k % 3 == 0 else "grad",
                     float(rng.standard_normal()) * 10 ** int(rng.integers(-9, 9)),
                     abs(float(rng.standard_normal())), 1.0 + rng.uniform(),
                     rng.uniform(), rng.uniform(), float("nan"),
                     int(rng.integers(0, 10 ** 12)))
            for k in range(20)
        ]
        path = tmp_path / "trace.csv"
        write_trace_csv(rows, path)
        back = read_trace_csv(path)
        for a, b in zip(rows, back):
            assert a.k == b.k and a.step_kind == b.step_kind
            assert repr(a.F) == repr(b.F)
            assert repr(a.eta) == repr(b.eta)
            assert a.elapsed_ns == b.elapsed_ns

    def test_records_round_trip_lossless(self, tmp_path, rng):
        records = [
            RunRecord("abcd" * 4, "fista", rep, bool(rep % 2),
                      int(rng.integers(1, 10 ** 6)),
                      float(rng.standard_normal()),
                      abs(float(rng.standard_normal())) * 1e-7,
                      abs(float(rng.standard_normal())),
                      int(rng.integers(0, 100)),
                      float(rng.uniform(0, 100)))
            for rep in range(6)
        ]
        path = tmp_path / "records.csv"
        write_records_csv(records, path)
        back = read_records_csv(path)
        for a, b in zip(records, back):
            assert a.spec_hash == b.spec_hash
            assert a.converged == b.converged
            assert repr(a.objective) == repr(b.objective)
            assert repr(a.time_s) == repr(b.time_s)
            assert a.support_size == b.support_size

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("k,foo\n")
        with pytest.raises(FileFormatError):
            read_trace_csv(path)


class TestExperimentFiles:
    def test_parse_minimal(self, tmp_path):
        path = tmp_path / "spec.txt"
        path.write_text("m=40\nn=16\n")
        spec = parse_experiment_file(path)
        assert spec.m == 40 and spec.n == 16
        assert spec.solvers == ("fista",)

    def test_parse_full(self, tmp_path):
        path = tmp_path / "spec.txt"
        path.write_text(
            "# bench spec\n"
            "m=100\nn=64\nrho=0.9\nk_true=4\ncorruption=0.2\nnoise=0.01\n"
            "seed=7\nreps=4\nlam=1e-4\nsolvers=fista,magma\n"
            "eps=1e-7\nmax_iters=5000\n"
            "magma.kappa=0.7\nmagma.levels=3\n")
        spec = parse_experiment_file(path)
        assert spec.solvers == ("fista", "magma")
        assert spec.reps == 4
        assert spec.bucket  # corruption > 0
        cfg = spec.solver_config("magma")
        assert cfg.kappa == 0.7 and cfg.levels == 3 and cfg.eps == 1e-7
        cfg_f = spec.solver_config("fista")
        assert cfg_f.eps == 1e-7 and cfg_f.kappa == 0.8

    def test_round_trip(self, tmp_path):
        spec = ExperimentSpec(m=30, n=20, rho=0.5, k_true=3, corruption=0.1,
                              noise=0.02, seed=11, solvers=("ista", "agm"),
                              reps=2, lam=0.01,
                              config={"eps": 1e-8},
                              overrides={"agm": {"max_iters": 77}})
        path = tmp_path / "spec.txt"
        write_experiment_file(spec, path)
        back = parse_experiment_file(path)
        assert back == spec

    def test_unknown_key_reports_line(self, tmp_path):
        path = tmp_path / "spec.txt"
        path.write_text("m=10\nn=5\nwibble=3\n")
        with pytest.raises(FileFormatError, match="line 3"):
            parse_experiment_file(path)

    def test_missing_required_key(self, tmp_path):
        path = tmp_path / "spec.txt"
        path.write_text("m=10\n")
        with pytest.raises(FileFormatError, match="missing required key"):
            parse_experiment_file(path)

    def test_bad_value_reports_line(self, tmp_path):
        path = tmp_path / "spec.txt"
        path.write_text("m=10\nn=abc\n")
        with pytest.raises(FileFormatError, match="line 2"):
            parse_experiment_file(path)
