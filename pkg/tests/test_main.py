import stat

import pytest

from vermat import __version__
from vermat.container_service import container_service
from vermat.fplinalg import FieldMatrix, save_matrix_market, save_vector
from vermat.main import main
from vermat.schemas import ProtocolTag, RoleTag
from vermat.spmv_interactive import SpmvProof

TOY = ["--backend", "toy", "--modulus", "101", "--seed", "7"]


@pytest.fixture
def files(tmp_path):
    save_matrix_market(FieldMatrix.dense([[1, 2], [3, 4]], 101), tmp_path / "a.mtx")
    save_vector([1, 1], tmp_path / "x.txt")
    return tmp_path


def _keygen(files, protocol, *extra, out="keys"):
    args = ["keygen", "--protocol", protocol, "--out-dir", str(files / out), *extra]
    if "--length" not in extra:
        args += ["--matrix", str(files / "a.mtx")]
    return main(args + (TOY if "--modulus" not in extra else []))


def _compute(files, keys="keys", x="x.txt", out="proof.bin"):
    return main(["compute", "--ek", str(files / keys / "ek.bin"), "--x", str(files / x),
                 "--out", str(files / out)])


def _verify(files, *extra, keys="keys", x="x.txt", proof="proof.bin"):
    return main(["verify", "--vk", str(files / keys / "vk.bin"), "--x", str(files / x),
                 "--proof", str(files / proof), *extra])


def test_freivalds_pipeline(files, capsys):
    assert _keygen(files, "freivalds") == 0
    assert {p.name for p in (files / "keys").iterdir()} == {"ek.bin", "vk.bin"}
    assert _compute(files) == 0
    assert _verify(files) == 0
    assert capsys.readouterr().out == "3\n7\n"


def test_fiat_shamir_pipeline(files, capsys):
    assert _keygen(files, "freivalds", "--fiat-shamir") == 0
    assert _compute(files) == 0
    assert _verify(files) == 0
    assert capsys.readouterr().out == "3\n7\n"


def test_fg_pipeline(files, capsys):
    assert _keygen(files, "fg") == 0
    assert main(["probgen", "--key", str(files / "keys" / "trustee.bin"), "--x", str(files / "x.txt"),
                 "--out", str(files / "probgen.bin")]) == 0
    assert _compute(files) == 0
    assert _verify(files, "--probgen", str(files / "probgen.bin")) == 0
    assert capsys.readouterr().out == "3\n7\n"


def test_spmv_pipeline(files, capsys):
    assert _keygen(files, "spmv") == 0
    trustee = files / "keys" / "trustee.bin"
    assert stat.S_IMODE(trustee.stat().st_mode) == 0o600
    assert _compute(files) == 0
    assert main(["trustee", "--trustee", str(trustee), "--x", str(files / "x.txt"),
                 "--proof", str(files / "proof.bin"), "--out", str(files / "response.bin")]) == 0
    assert _verify(files, "--response", str(files / "response.bin")) == 0
    assert capsys.readouterr().out == "3\n7\n"


def test_pvmat_pipeline(files, capsys):
    assert _keygen(files, "pvmat") == 0
    assert not (files / "keys" / "trustee.bin").exists()
    assert main(["probgen", "--key", str(files / "keys" / "vk.bin"), "--x", str(files / "x.txt"),
                 "--out", str(files / "sigma.bin")]) == 0
    assert _compute(files) == 0
    assert _verify(files, "--probgen", str(files / "sigma.bin")) == 0
    assert capsys.readouterr().out == "3\n7\n"


@pytest.mark.parametrize("protocol,extra", [("rank1dp", []), ("gendp", ["--chunk-a", "0.5"])])
def test_dot_product_pipeline(files, capsys, protocol, extra):
    save_vector([1, 2, 3, 4, 5, 6], files / "y.txt")
    assert _keygen(files, protocol, "--length", "6", *extra) == 0
    assert _compute(files, x="y.txt") == 0
    assert _verify(files, x="y.txt") == 0
    printed = capsys.readouterr().out.strip()
    assert len(bytes.fromhex(printed)) == 9


def test_small_field_pipeline(files, capsys):
    save_matrix_market(FieldMatrix.dense([[1, 2], [3, 4]], 5), files / "a.mtx")
    assert _keygen(files, "smallfield", "--backend", "toy", "--modulus", "2503", "--data-modulus", "5") == 0
    assert _compute(files) == 0
    assert main(["trustee", "--trustee", str(files / "keys" / "trustee.bin"), "--x", str(files / "x.txt"),
                 "--proof", str(files / "proof.bin"), "--out", str(files / "response.bin")]) == 0
    assert _verify(files, "--response", str(files / "response.bin")) == 0
    assert capsys.readouterr().out == "3\n2\n"


def test_small_field_bound_violation(files, capsys):
    code = _keygen(files, "smallfield", "--backend", "toy", "--modulus", "101", "--data-modulus", "5")
    assert code == 3
    assert "m*n*p^4" in capsys.readouterr().err


def test_seeded_runs_are_byte_identical(files):
    assert _keygen(files, "pvmat", out="one") == 0
    assert _keygen(files, "pvmat", out="two") == 0
    assert (files / "one" / "ek.bin").read_bytes() == (files / "two" / "ek.bin").read_bytes()
    assert _compute(files, keys="one", out="p1.bin") == 0
    assert _compute(files, keys="two", out="p2.bin") == 0
    assert (files / "p1.bin").read_bytes() == (files / "p2.bin").read_bytes()


# ============================================================================
# FAILURES
# ============================================================================

def test_flipped_proof_is_rejected(files):
    assert _keygen(files, "freivalds") == 0
    assert _compute(files) == 0
    proof = files / "proof.bin"
    data = bytearray(proof.read_bytes())
    data[-40] ^= 0x01
    proof.write_bytes(bytes(data))
    assert _verify(files) == 1


def test_keys_from_another_run_are_rejected(files, capsys):
    save_matrix_market(FieldMatrix.dense([[1, 2], [3, 4]], 2503), files / "a.mtx")
    toy2503 = ["--backend", "toy", "--modulus", "2503"]
    assert _keygen(files, "pvmat", *toy2503, "--seed", "1", out="one") == 0
    assert _keygen(files, "pvmat", *toy2503, "--seed", "2", out="two") == 0
    assert _compute(files, keys="one") == 0
    assert _verify(files, keys="two") == 1
    assert "rejected" in capsys.readouterr().err


def test_fg_verify_with_another_input_is_a_parameter_error(files, capsys):
    save_vector([2, 1], files / "x2.txt")
    assert _keygen(files, "fg") == 0
    assert main(["probgen", "--key", str(files / "keys" / "trustee.bin"), "--x", str(files / "x.txt"),
                 "--out", str(files / "probgen.bin")]) == 0
    assert _compute(files) == 0
    assert _verify(files, "--probgen", str(files / "probgen.bin"), x="x2.txt") == 3
    assert capsys.readouterr().out == ""


def _spmv_response(files, x="x.txt", proof="proof.bin", out="response.bin"):
    return main(["trustee", "--trustee", str(files / "keys" / "trustee.bin"), "--x", str(files / x),
                 "--proof", str(files / proof), "--out", str(files / out)])


def test_spmv_response_for_another_proof_is_rejected(files, capsys):
    save_vector([2, 1], files / "x2.txt")
    assert _keygen(files, "spmv") == 0
    assert _compute(files) == 0
    assert _compute(files, x="x2.txt", out="proof2.bin") == 0
    assert _spmv_response(files) == 0
    assert _verify(files, "--response", str(files / "response.bin"), proof="proof2.bin") == 1
    assert _verify(files, "--response", str(files / "response.bin"), x="x2.txt") == 1
    captured = capsys.readouterr()
    assert captured.out == ""
    assert captured.err.count("rejected: response") == 2


def test_proof_element_in_the_wrong_group_is_rejected(files, capsys):
    assert _keygen(files, "spmv") == 0
    assert _compute(files) == 0
    assert _spmv_response(files) == 0
    _, suite, proof = container_service.load(files / "proof.bin", SpmvProof)
    container_service.save(files / "proof.bin", SpmvProof(y=proof.y, zeta=suite.g2),
                           ProtocolTag.SPMV, RoleTag.PROOF, suite)
    assert _verify(files, "--response", str(files / "response.bin")) == 1
    assert "rejected: group" in capsys.readouterr().err


def test_proof_for_another_protocol_is_malformed(files):
    assert _keygen(files, "freivalds", out="fr") == 0
    assert _keygen(files, "spmv", out="sp") == 0
    assert _compute(files, keys="fr") == 0
    assert main(["verify", "--vk", str(files / "sp" / "vk.bin"), "--x", str(files / "x.txt"),
                 "--proof", str(files / "proof.bin")]) == 2


def test_garbage_container_is_malformed(files):
    (files / "keys").mkdir()
    (files / "keys" / "ek.bin").write_bytes(b"not a container")
    assert _compute(files) == 2


def test_malformed_vector_file(files):
    assert _keygen(files, "freivalds") == 0
    (files / "x.txt").write_text("1\nbanana\n")
    assert _compute(files) == 2


def test_wrong_input_length_is_a_parameter_error(files):
    assert _keygen(files, "freivalds") == 0
    save_vector([1, 2, 3], files / "x.txt")
    assert _compute(files) == 3


def test_unknown_protocol(files):
    assert _keygen(files, "bogus") == 3


def test_missing_matrix(files):
    assert main(["keygen", "--protocol", "spmv", "--out-dir", str(files / "k"), *TOY]) == 3


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as e:
        main(["verify"])
    assert e.value.code == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    assert __version__ in capsys.readouterr().out


# ============================================================================
# BENCH
# ============================================================================

def test_bench_writes_csv(files):
    out = files / "bench.csv"
    assert main(["bench", "--protocols", "freivalds,spmv", "--sizes", "4,8", *TOY, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("protocol,m,n,phase,wall_ms")
    assert sum(1 for line in lines if line.startswith("spmv,")) == 2 * 5


def test_bench_to_stdout(capsys):
    assert main(["bench", "--protocols", "rank1dp", "--sizes", "4", *TOY]) == 0
    assert capsys.readouterr().out.count("rank1dp,") == 4


def test_bench_unknown_protocol():
    assert main(["bench", "--protocols", "nope", "--sizes", "4", *TOY]) == 3


def test_bench_bad_sizes():
    assert main(["bench", "--protocols", "spmv", "--sizes", "0", *TOY]) == 3
