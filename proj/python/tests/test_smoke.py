import numpy as np
import pytest

import procmat


def test_switch_is_valid_with_trace_16():
    w = procmat.build_switch()
    rep = procmat.check_validity(w)
    assert rep["verdict"] is True
    m = procmat.process_matrix(w)
    assert m.shape == (256, 256)
    assert abs(np.trace(m).real - 16.0) < 1e-12
    assert np.allclose(m, m.conj().T)


def test_bundled_switch_decomposition_verifies():
    bundle = procmat.build_switch(with_decomposition=True)
    assert procmat.verify_decomposition(bundle)["verdict"] is True


def test_example_is_not_qccc():
    w1 = procmat.build_example(1)
    v = procmat.membership(w1, "qccc")
    assert v["status"] == "Infeasible"
    assert v["note"] == "causally nonseparable"


def test_builtin_pattern_matches_example():
    w2 = procmat.apply_pattern(procmat.build_switch(), "w2")
    diff = procmat.process_matrix(w2) - procmat.process_matrix(procmat.build_example(2))
    assert np.abs(diff).max() <= 1e-12


def test_dephased_pipeline():
    w = procmat.apply_pattern(procmat.build_switch(), "dephase-all")
    qq = procmat.decompose(w, "dephased-all")
    assert procmat.verify_decomposition(qq)["verdict"] is True
    cc = procmat.decompose(qq, "qccc-from-qcqc")
    assert cc["decomposition"]["kind"] == "qccc"
    assert procmat.verify_decomposition(cc)["verdict"] is True
    assert procmat.membership(w, "qccc")["status"] == "Feasible"


def test_dump_system_lists_equalities():
    sys = procmat.dump_system(procmat.build_example(2), "qccc")
    assert sys["kind"] == "qccc"
    assert sys["equalities"][0]["name"] == "qccc.sum"


def test_cli_round_trip():
    code, out, _ = procmat.run_cli(["build-switch"])
    assert code == 0
    code, _, _ = procmat.run_cli(["validate", "--expect", "valid"], out)
    assert code == 0
    code, _, err = procmat.run_cli(["validate"], "{")
    assert code == 2
    assert "line 1" in err


def test_input_errors_raise():
    with pytest.raises(procmat.InputError):
        procmat.check_validity("[]")
    with pytest.raises(ValueError):
        procmat.membership(procmat.build_example(1), "qcxx")
