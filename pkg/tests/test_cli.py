import time

import numpy as np
import pytest

from lulu.checks import format_matrix, run_suite
from lulu.cli import CliConfig, UsageError, main, noise_image, noise_statistics
from lulu.connectivity import GridImage
from lulu.dpt import PRESETS, reconstruct
from lulu.io import PgmImage, encode_pgm, read_histogram, read_pgm, read_pulses, read_sidecar, write_pgm
from lulu.operators import apply_Ln

from conftest import C4, FIXTURES, spike, two_pulse


@pytest.fixture
def spike_pgm(tmp_path):
    path = tmp_path / "spike.pgm"
    write_pgm(spike(), path)
    return path


def _write(path, f: GridImage):
    write_pgm(f, path)
    return path


def test_filter_spike(spike_pgm, tmp_path, capsys):
    out = tmp_path / "out.pgm"
    assert main(["filter", str(spike_pgm), "--op", "ln", "-n", "1", "-o", str(out)]) == 0
    assert np.all(read_pgm(out).values == 0)
    assert "TV input 20 = output 0 + residual 20: preserved" in capsys.readouterr().out


def test_filter_unln_is_idempotent(tmp_path):
    src = FIXTURES / "blobs.pgm"
    once, twice = tmp_path / "1.pgm", tmp_path / "2.pgm"
    assert main(["filter", str(src), "--op", "unln", "-n", "3", "-o", str(once)]) == 0
    assert main(["filter", str(once), "--op", "unln", "-n", "3", "-o", str(twice)]) == 0
    assert once.read_bytes() == twice.read_bytes()


def test_filter_constant(tmp_path, capsys):
    src = tmp_path / "c.pgm"
    src.write_bytes(encode_pgm(PgmImage(3, 3, 255, np.full((3, 3), 0, dtype=np.int64))))
    out = tmp_path / "o.pgm"
    assert main(["filter", str(src), "--op", "lnun", "-n", "2", "-o", str(out)]) == 0
    assert out.read_bytes() == src.read_bytes()
    assert "TV input 0 = output 0 + residual 0" in capsys.readouterr().out


def test_filter_keeps_source_maxval(tmp_path):
    src = tmp_path / "deep.pgm"
    src.write_bytes(encode_pgm(PgmImage(2, 1, 1000, np.array([[999, 3]], dtype=np.int64))))
    out = tmp_path / "o.pgm"
    assert main(["filter", str(src), "--op", "un", "-n", "1", "-o", str(out)]) == 0
    assert out.read_bytes().startswith(b"P5\n2 1\n1000\n")


def test_decompose_spike(spike_pgm, tmp_path, capsys):
    assert main(["decompose", str(spike_pgm), "-o", str(tmp_path / "p.jsonl")]) == 0
    out = capsys.readouterr().out
    assert "size 1: 1" in out and "1 pulses" in out
    assert "FAIL" not in out


def test_decompose_zero_image(tmp_path, capsys):
    src = _write(tmp_path / "z.pgm", GridImage(np.zeros((4, 4), dtype=np.int64)))
    assert main(["decompose", str(src), "-o", str(tmp_path / "p.jsonl")]) == 0
    assert "0 pulses" in capsys.readouterr().out


def test_decompose_truncated_warns(tmp_path, capsys):
    src = FIXTURES / "gradient.pgm"
    dump = tmp_path / "p.jsonl"
    assert main(["decompose", str(src), "-o", str(dump), "--max-n", "2"]) == 0
    assert "stopped at n=2" in capsys.readouterr().err
    rebuilt = tmp_path / "r.pgm"
    assert main(["reconstruct", str(dump), "-o", str(rebuilt)]) == 0
    assert rebuilt.read_bytes() == src.read_bytes()


@pytest.mark.parametrize("name", ["spike", "two_pulse", "zeros", "checker", "rings", "blobs"])
@pytest.mark.parametrize("conn", ["4", "8"])
def test_pipeline_identity(tmp_path, name, conn):
    src = FIXTURES / f"{name}.pgm"
    dump, out = tmp_path / "p.jsonl", tmp_path / "r.pgm"
    assert main(["decompose", str(src), "-o", str(dump), "-c", conn]) == 0
    assert main(["reconstruct", str(dump), "-o", str(out)]) == 0
    assert out.read_bytes() == src.read_bytes()
    assert read_sidecar(out) is None


def test_reconstruct_min_size(tmp_path):
    src = _write(tmp_path / "two.pgm", two_pulse())
    dump, out = tmp_path / "p.jsonl", tmp_path / "r.pgm"
    main(["decompose", str(src), "-o", str(dump)])
    assert main(["reconstruct", str(dump), "-o", str(out), "--min-size", "2"]) == 0
    expect = np.zeros((4, 4), dtype=np.int64)
    expect[1, 1] = expect[1, 2] = 3
    assert np.array_equal(read_pgm(out).values, expect)


def test_reconstruct_sign_pos(tmp_path, capsys):
    v = np.full((5, 5), 50, dtype=np.int64)
    v[1, 1], v[3, 3] = 90, 10
    src = _write(tmp_path / "mixed.pgm", GridImage(v))
    dump, out = tmp_path / "p.jsonl", tmp_path / "r.pgm"
    main(["decompose", str(src), "-o", str(dump)])
    assert main(["reconstruct", str(dump), "-o", str(out), "--sign", "pos", "--no-include-residual"]) == 0
    got = read_pgm(out).values
    assert got[1, 1] == 90 and got[3, 3] == 50 and got[0, 0] == 50


def test_reconstruct_empty_selection_warns(tmp_path, capsys):
    src = _write(tmp_path / "two.pgm", two_pulse())
    dump, out = tmp_path / "p.jsonl", tmp_path / "r.pgm"
    main(["decompose", str(src), "-o", str(dump)])
    assert main(["reconstruct", str(dump), "-o", str(out), "--min-size", "50"]) == 0
    assert "no pulses selected" in capsys.readouterr().err
    assert np.all(read_pgm(out).values == 0)


def test_reconstruct_preset_offset(tmp_path, capsys):
    src = FIXTURES / "sea_like.pgm"
    dump, out = tmp_path / "p.jsonl", tmp_path / "r.pgm"
    main(["decompose", str(src), "-o", str(dump)])
    assert main(["reconstruct", str(dump), "-o", str(out), "--preset", "small-features"]) == 0
    expect = reconstruct(read_pulses(dump), PRESETS["small-features"]).values
    meta = read_sidecar(out)
    assert meta["offset"] == -expect.min() > 0
    assert np.array_equal(read_pgm(out).values - meta["offset"], expect)


def test_histogram_command(tmp_path, capsys):
    src = _write(tmp_path / "two.pgm", two_pulse())
    dump = tmp_path / "p.jsonl"
    main(["decompose", str(src), "-o", str(dump)])
    capsys.readouterr()
    assert main(["histogram", str(dump), "-o", str(tmp_path / "h.csv")]) == 0
    assert capsys.readouterr().out == "1,1\n2,1\n"
    assert read_histogram(tmp_path / "h.csv") == [(1, 1), (2, 1)]


def test_noise_sim_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["noise-sim", "--width", "30", "--height", "20", "--seed", "7", "--report", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "fraction with size <= 20" in capsys.readouterr().out
    assert np.array_equal(noise_image(5, 5, 3).values, noise_image(5, 5, 3).values)
    assert not np.array_equal(noise_image(5, 5, 3).values, noise_image(5, 5, 4).values)


def test_noise_sim_smoke_under_a_second(tmp_path):
    t = time.perf_counter()
    assert main(["noise-sim", "--width", "20", "--height", "20", "--seed", "1"]) == 0
    assert time.perf_counter() - t < 1.0


def test_noise_statistics():
    assert noise_statistics([(1, 8), (30, 1), (200, 1)]) == (0.8, 0.1)
    assert noise_statistics([]) == (0.0, 0.0)


def test_verify_fixture(capsys):
    assert main(["verify", str(FIXTURES / "rings.pgm")]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "semi-group table" in out


def test_verify_constant(tmp_path):
    src = tmp_path / "c.pgm"
    src.write_bytes(encode_pgm(PgmImage(4, 4, 255, np.full((4, 4), 9, dtype=np.int64))))
    assert main(["verify", str(src), "-n", "1", "2", "3"]) == 0


def test_corrupted_operator_is_pinpointed():
    def leaky_ln(f, n, conn):
        # pushes the last row above the input
        out = apply_Ln(f, n, conn)
        out.values[-1] = f.values[-1] + 1
        return out

    f = read_pgm(FIXTURES / "blobs.pgm")
    results = run_suite(f, C4, ns=(1,), ln=leaky_ln, dpt=False)
    failed = {r.check for r in results if not r.passed}
    assert "order L<=id<=U" in failed
    assert "L <= id fails" in next(r.detail for r in results if r.check == "order L<=id<=U")
    assert "semi-group table" in failed
    assert "FAIL" in format_matrix(results)


def test_exit_codes(tmp_path, capsys):
    assert main([]) == 1
    assert main(["filter", str(tmp_path / "missing.pgm"), "--op", "ln", "-n", "1", "-o", "x.pgm"]) == 1
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P7\n")
    assert main(["verify", str(bad)]) == 1
    assert main(["filter", str(bad), "--op", "xx", "-n", "1", "-o", "x.pgm"]) == 1
    assert main(["reconstruct", str(tmp_path / "none.jsonl"), "-o", "x.pgm"]) == 1
    src = _write(tmp_path / "two.pgm", two_pulse())
    main(["decompose", str(src), "-o", str(tmp_path / "p.jsonl")])
    assert main(["reconstruct", str(tmp_path / "p.jsonl"), "-o", str(tmp_path / "r.pgm"), "--min-size", "5",
                 "--max-size", "2"]) == 1
    assert "min-size <= max-size" in capsys.readouterr().err


def test_cli_config_validation():
    with pytest.raises(UsageError):
        CliConfig(min_size=4, max_size=1)
    with pytest.raises(UsageError):
        CliConfig(sign="sideways")
    with pytest.raises(UsageError):
        CliConfig(seed=-1)
    assert CliConfig(connectivity="8").conn.name == "8"
