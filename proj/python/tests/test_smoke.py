import numpy as np
import pytest

import ofdmshape as ofs


def test_shift_and_counts():
    assert ofs.cyclic_shift(4096, 1024, 511) == 1791
    assert ofs.symbolic_count("aic", data=10, cancel=2) == (80, 40)
    assert ofs.symbolic_count("ast_harmonic", data=10, beta=8, harmonics=4) == (368, 208)


def test_hermitian_pulse_has_real_spectrum():
    samples, offset = ofs.pulse(16, 4, 3, 5)
    assert len(samples) == 23 and offset == -11
    n = np.arange(23) + offset
    f = np.linspace(-0.5, 0.49, 37)
    direct = np.array([np.sum(np.asarray(samples) * np.exp(-2j * np.pi * x * n)) for x in f])
    assert np.max(np.abs(direct.imag)) < 1e-12
    lib = np.asarray(ofs.pulse_spectrum(16, 4, 3, 5, f.tolist()))
    assert np.allclose(lib, direct, atol=1e-12)


def test_aic_realness():
    args = (64, 16, 7, list(range(19, 30)), [17, 18], [(0, 16), (48, 63)])
    g_h, cert_h = ofs.solve_aic(*args, kind="hermitian")
    g_c, cert_c = ofs.solve_aic(*args, kind="conventional")
    assert g_h.shape == (2, 11)
    assert cert_h <= 1e-9
    assert cert_c > 1e-3
    assert np.allclose(np.abs(g_h), np.abs(g_c), rtol=1e-7)


def test_toy_scenario(tmp_path):
    res = ofs.execute("toy")
    assert res["pass"]
    assert len(res["methods"]) == 6
    for m in res["methods"]:
        assert m["diff_independent"] <= 1e-9
        assert m["certificate_hermitian"] <= 1e-9
    code, err = ofs.run_scenario("toy", str(tmp_path), methods=["aic_ast"])
    assert code == 0, err
    assert (tmp_path / "summary.txt").read_text().strip().endswith("overall: PASS")


def test_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text(ofs.builtin_scenario_text("toy") + "\ncolour = blue\n")
    assert any(d.startswith("error:") for d in ofs.validate(str(bad)))
    code, err = ofs.run_scenario(str(bad), str(tmp_path / "out"))
    assert code == 1 and "colour" in err
    with pytest.raises(ofs.InvalidConfig):
        ofs.symbolic_count("nope")


def test_waveform_length():
    x = ofs.baseline_waveform("toy", symbols=3)
    assert len(x) == 3 * 80 + 7
