import json

import numpy as np
import pytest

from convertible.cli import main
from convertible.storage import NodeStore


@pytest.fixture
def payload(tmp_path):
    def make(size: int, seed: int = 3):
        path = tmp_path / f"payload_{size}.bin"
        data = np.random.default_rng(seed).integers(0, 256, size, dtype=np.uint8)
        path.write_bytes(data.tobytes())
        return path

    return make


def _encode(src, out, n, k, *extra):
    return main(["encode", str(src), str(out), "--n", str(n), "--k", str(k), *map(str, extra)])


def _decoded(tmp_path, stripes) -> bytes:
    out = tmp_path / "decoded.bin"
    assert main(["decode", str(stripes), str(out)]) == 0
    return out.read_bytes()


def test_encode_decode_round_trip(tmp_path, payload):
    src = payload(1000)
    assert _encode(src, tmp_path / "s", 6, 4, "--chunk", 16) == 0
    assert main(["verify", str(tmp_path / "s")]) == 0
    assert _decoded(tmp_path, tmp_path / "s") == src.read_bytes()


def test_empty_file(tmp_path):
    src = tmp_path / "empty.bin"
    src.write_bytes(b"")
    assert _encode(src, tmp_path / "s", 6, 4) == 0
    assert NodeStore.open(tmp_path / "s").manifest.stripes == 0
    assert _decoded(tmp_path, tmp_path / "s") == b""


def test_tiny_file_fills_one_stripe(tmp_path):
    src = tmp_path / "tiny.bin"
    src.write_bytes(b"hello")
    assert _encode(src, tmp_path / "s", 6, 5) == 0
    assert len(list((tmp_path / "s").glob("*.dat"))) == 6
    assert _decoded(tmp_path, tmp_path / "s") == b"hello"


def test_convert_merge_side_example(tmp_path, payload):
    src = payload(240)
    assert _encode(src, tmp_path / "s", 6, 5, "--nf", 13, "--kf", 12, "--chunk", 4) == 0
    report_path = tmp_path / "report.json"
    plan_path = tmp_path / "plan.json"
    code = main([
        "convert", str(tmp_path / "s"), str(tmp_path / "c"), "--nf", "13", "--kf", "12",
        "--report-out", str(report_path), "--plan-out", str(plan_path),
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert (report["reads"], report["writes"], report["total"]) == (18, 5, 23)
    assert report["verdict"] == "optimal"
    assert report["symbols_read"] == 72
    assert report["batches"] == 1
    plan = json.loads(plan_path.read_text())
    assert len(plan["read_set"]) == 18
    assert "tree" in plan
    assert main(["verify", str(tmp_path / "c")]) == 0
    assert _decoded(tmp_path, tmp_path / "c") == src.read_bytes()


def test_convert_split_side_example(tmp_path, payload):
    src = payload(240)
    assert _encode(src, tmp_path / "s", 13, 12, "--nf", 6, "--kf", 5, "--chunk", 4) == 0
    report_path = tmp_path / "report.json"
    code = main([
        "convert", str(tmp_path / "s"), str(tmp_path / "c"), "--nf", "6", "--kf", "5",
        "--report-out", str(report_path),
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert (report["reads"], report["total"]) == (40, 52)
    assert main(["verify", str(tmp_path / "c")]) == 0
    assert _decoded(tmp_path, tmp_path / "c") == src.read_bytes()


def _convert_merge(tmp_path, payload):
    src = payload(240)
    assert _encode(src, tmp_path / "s", 7, 5, "--nf", 12, "--kf", 10, "--chunk", 4) == 0
    return main(["convert", str(tmp_path / "s"), str(tmp_path / "c"), "--nf", "12", "--kf", "10"])


def test_convert_rejects_a_truncated_node(tmp_path, payload, capsys):
    node = tmp_path / "s" / "s0_n5.dat"
    src = payload(240)
    assert _encode(src, tmp_path / "s", 7, 5, "--nf", 12, "--kf", 10, "--chunk", 4) == 0
    node.write_bytes(node.read_bytes()[:2])
    capsys.readouterr()
    code = main(["convert", str(tmp_path / "s"), str(tmp_path / "c"), "--nf", "12", "--kf", "10"])
    assert code == 1
    assert "stripe 0 node 5 holds 2 symbols" in capsys.readouterr().err
    assert not (tmp_path / "c" / "manifest.json").exists()


def test_convert_fails_when_reads_exceed_the_plan(tmp_path, payload, monkeypatch, capsys):
    original = NodeStore.read_node

    def overcounting(self, stripe, node):
        values = original(self, stripe, node)
        self.symbols_read += 1
        return values

    monkeypatch.setattr(NodeStore, "read_node", overcounting)
    capsys.readouterr()
    assert _convert_merge(tmp_path, payload) == 1
    assert "the plan predicts" in capsys.readouterr().err
    assert not (tmp_path / "c" / "manifest.json").exists()


@pytest.mark.slow
def test_one_mebibyte_round_trip(tmp_path, payload):
    src = payload(1 << 20)
    assert _encode(src, tmp_path / "s", 6, 5, "--nf", 13, "--kf", 12) == 0
    report_path = tmp_path / "report.json"
    code = main([
        "convert", str(tmp_path / "s"), str(tmp_path / "c"), "--nf", "13", "--kf", "12",
        "--report-out", str(report_path),
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["node_reads"] == report["batches"] * 18
    chunk = NodeStore.open(tmp_path / "s").manifest.chunk
    assert report["symbols_read"] == report["node_reads"] * chunk
    assert main(["verify", str(tmp_path / "c")]) == 0
    assert _decoded(tmp_path, tmp_path / "c") == src.read_bytes()


def test_incompatible_stripes_need_the_default_approach(tmp_path, payload, capsys):
    src = payload(200)
    assert _encode(src, tmp_path / "s", 7, 5, "--chunk", 4) == 0
    args = ["convert", str(tmp_path / "s"), str(tmp_path / "c"), "--nf", "12", "--kf", "10"]
    assert main(args) == 3
    assert "--allow-default" in capsys.readouterr().err
    report_path = tmp_path / "report.json"
    assert main([*args, "--allow-default", "--report-out", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert report["reads"] == 10
    assert report["verdict"] == "suboptimal"
    assert _decoded(tmp_path, tmp_path / "c") == src.read_bytes()


def test_converting_to_the_same_parameters_reads_nothing(tmp_path, payload):
    src = payload(100)
    assert _encode(src, tmp_path / "s", 6, 5, "--nf", 6, "--kf", 5, "--chunk", 4) == 0
    report_path = tmp_path / "report.json"
    args = ["convert", str(tmp_path / "s"), str(tmp_path / "c"), "--nf", "6", "--kf", "5"]
    assert main([*args, "--report-out", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert (report["reads"], report["writes"]) == (0, 0)
    assert _decoded(tmp_path, tmp_path / "c") == src.read_bytes()


def test_verify_names_the_corrupted_node(tmp_path, payload, capsys):
    src = payload(64)
    assert _encode(src, tmp_path / "s", 8, 4, "--chunk", 16) == 0
    node = tmp_path / "s" / "s0_n1.dat"
    data = bytearray(node.read_bytes())
    data[3] ^= 0x10
    node.write_bytes(bytes(data))
    capsys.readouterr()
    assert main(["verify", str(tmp_path / "s")]) == 1
    out = capsys.readouterr().out
    assert "FAIL stripe 0: node 1 corrupted" in out


def test_decode_tolerates_missing_nodes(tmp_path, payload):
    src = payload(300)
    assert _encode(src, tmp_path / "s", 6, 4, "--chunk", 8) == 0
    (tmp_path / "s" / "s0_n0.dat").unlink()
    (tmp_path / "s" / "s1_n2.dat").unlink()
    (tmp_path / "s" / "s1_n5.dat").unlink()
    assert main(["verify", str(tmp_path / "s")]) == 1
    assert _decoded(tmp_path, tmp_path / "s") == src.read_bytes()


def test_decode_fails_with_too_few_nodes(tmp_path, payload):
    src = payload(40)
    assert _encode(src, tmp_path / "s", 5, 4, "--chunk", 10) == 0
    (tmp_path / "s" / "s0_n0.dat").unlink()
    (tmp_path / "s" / "s0_n1.dat").unlink()
    assert main(["decode", str(tmp_path / "s"), str(tmp_path / "out.bin")]) == 1


def test_partial_batch_is_padded_with_zero_stripes(tmp_path, payload):
    src = payload(30)
    assert _encode(src, tmp_path / "s", 7, 5, "--nf", 12, "--kf", 10, "--chunk", 2) == 0
    assert NodeStore.open(tmp_path / "s").manifest.stripes == 3
    report_path = tmp_path / "report.json"
    code = main([
        "convert", str(tmp_path / "s"), str(tmp_path / "c"), "--nf", "12", "--kf", "10",
        "--report-out", str(report_path),
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert (report["batches"], report["pad_stripes"]) == (2, 1)
    assert report["node_reads"] == 8
    manifest = NodeStore.open(tmp_path / "c").manifest
    assert (manifest.stripes, manifest.pad_stripes) == (2, 1)
    assert main(["verify", str(tmp_path / "c")]) == 0
    assert _decoded(tmp_path, tmp_path / "c") == src.read_bytes()


def test_small_sweep(tmp_path):
    out = tmp_path / "results"
    args = ["sweep", "--max-k", "3", "--max-r", "2", "--max-m", "6", "--trials", "3"]
    assert main([*args, "--out", str(out)]) == 0
    assert (out / "sweep.csv").exists()
    assert (out / "savings.html").exists()


def test_figures(capsys):
    assert main(["figures"]) == 0
    out = capsys.readouterr().out
    assert "(6,5;13,12)" in out
    assert "total 23" in out
    assert "total 52" in out


@pytest.mark.parametrize("n,k", [(3, 5), (4, 4), (0, 0)])
def test_bad_parameters_exit_with_two(tmp_path, n, k):
    src = tmp_path / "x.bin"
    src.write_bytes(b"abc")
    assert _encode(src, tmp_path / "s", n, k) == 2


def test_missing_manifest_exits_with_two(tmp_path):
    assert main(["verify", str(tmp_path)]) == 2
