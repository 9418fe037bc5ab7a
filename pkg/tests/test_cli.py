import json

import pytest

from main import main
from src.schemas.config import RunConfig, default_threads
from src.utils.errors import PlotError, WPSError
from src.utils.lattice import build_weights
from src.utils.plot import polytope_scene, scene_to_csv, section_scene


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("WPSHMS_THREADS", raising=False)
    monkeypatch.delenv("WPSHMS_LOG_LEVEL", raising=False)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_category_3_2(capsys):
    code, out, _ = run(capsys, "category", "--weights", "3,2")
    assert code == 0
    payload = json.loads(out)
    assert [o["a"] for o in payload["objects"]] == [0, 1, 2, 3, 4]
    assert len([h for h in payload["homs"] if not h["identity"]]) == 6


def test_category_1_1_2_dims(capsys):
    code, out, _ = run(capsys, "category", "--weights", "1,1,2")
    assert code == 0
    homs = json.loads(out)["homs"]
    dims = {d: sum(1 for h in homs if h["a"] == 0 and h["b"] == d) for d in range(4)}
    assert dims == {0: 1, 1: 2, 2: 4, 3: 6}


def test_bad_weights_exit_2(capsys):
    code, out, err = run(capsys, "category", "--weights", "2,4")
    assert code == 2
    assert out == ""
    assert "gcd must be 1" in err


def test_category_output_is_byte_stable(tmp_path, capsys):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["category", "--weights", "1,1,2", "--out", str(first)]) == 0
    assert main(["category", "--weights", "1,1,2", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


@pytest.mark.parametrize("weights", ["3,2", "1,1"])
def test_verify_all(capsys, weights):
    code, out, err = run(capsys, "verify", "--weights", weights, "--suite", "all")
    assert code == 0, err
    reports = json.loads(out)
    assert {r["suite"] for r in reports} >= {"dims", "functor", "flow", "trees"}
    assert all(r["passed"] for r in reports)


def test_verify_functor_surface(capsys):
    code, out, _ = run(capsys, "verify", "--weights", "1,1,2", "--suite", "functor")
    assert code == 0
    [report] = json.loads(out)
    assert report["suite"] == "functor" and report["checked"] > 0


def test_info_formats(capsys):
    code, out, _ = run(capsys, "info", "--weights", "3,2", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert (data["scale"], data["R"]) == (12, 4)
    assert [c["local_group_order"] for c in data["charts"]] == [3, 2]

    code, out, _ = run(capsys, "info", "--weights", "3,2")
    assert code == 0
    assert "2q0...qn=12" in out


def test_info_rejects_svg(capsys):
    code, _, err = run(capsys, "info", "--weights", "3,2", "--format", "svg")
    assert code == 2
    assert "not available" in err


def test_plot_generators_svg(capsys):
    code, out, _ = run(capsys, "plot", "--weights", "1,1,2", "--dist", "3")
    assert code == 0
    assert out.startswith("<?xml")
    for label in ["(3,0,0)", "(2,1,0)", "(1,2,0)", "(1,0,1)", "(0,3,0)", "(0,1,1)"]:
        assert f">{label}</text>" in out


def test_plot_needs_small_dimension(capsys):
    code, _, err = run(capsys, "plot", "--weights", "1,2,3,4")
    assert code == 2
    assert "plots require n ≤ 2" in err


def test_plot_sections_and_png(capsys, tmp_path):
    code, out, _ = run(capsys, "plot", "--weights", "3,2", "--sections", "0..4")
    assert code == 0 and "<line" in out

    path = tmp_path / "p.png"
    code, _, _ = run(capsys, "plot", "--weights", "1,1,2", "--trees", "--format", "png", "--out", str(path))
    assert code == 0
    assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_plot_csv(capsys):
    code, out, _ = run(capsys, "plot", "--weights", "3,2", "--dist", "2", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "kind,label,x1,y1,x2,y2"
    assert any(line.startswith("dot,\"(0,1)\"") for line in lines)


def test_flow_trajectory_csv(capsys):
    code, out, _ = run(capsys, "flow", "--weights", "3,2", "--labels", "0,2", "--k", "0,1",
                       "--x0", "1", "--steps", "10")
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "t,x1"
    assert len(rows) == 12


def test_flow_tree_json(capsys):
    code, out, _ = run(capsys, "flow", "--weights", "3,2", "--labels", "0,2,5", "--k", "0,1", "--k", "1,0")
    assert code == 0
    tree = json.loads(out)
    assert tree["v_ac"] == pytest.approx([2.4])
    assert tree["area_error"] < 1e-9


def test_flow_label_mismatch(capsys):
    code, _, err = run(capsys, "flow", "--weights", "3,2", "--labels", "0,2,5", "--k", "0,1")
    assert code == 2
    assert "flow needs" in err


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("WPSHMS_THREADS", "3")
    assert default_threads() == 3
    assert RunConfig(weights=(3, 2)).threads == 3
    monkeypatch.setenv("WPSHMS_THREADS", "zero")
    with pytest.raises(WPSError):
        default_threads()


def test_scene_helpers():
    W = build_weights((3, 2))
    scene = polytope_scene(W, 0, dist=2)
    assert len(scene.segments) == 1
    assert [d.label for d in scene.dots] == ["(0,1)"]
    assert scene_to_csv(scene).count("\n") == 3
    with pytest.raises(PlotError):
        section_scene(build_weights((1, 1, 2)), 0, 2)


@pytest.mark.parametrize("weights, x0", [("3,2", "1,2"), ("1,1,2", "1")])
def test_flow_wrong_start_dimension(capsys, weights, x0):
    k = "0,1" if weights == "3,2" else "0,1,1"
    b = "2" if weights == "3,2" else "3"
    code, out, err = run(capsys, "flow", "--weights", weights, "--labels", f"0,{b}", "--k", k, "--x0", x0)
    assert code == 2
    assert out == ""
    assert "coordinates" in err


def test_flow_backward_labels(capsys):
    code, out, _ = run(capsys, "flow", "--weights", "3,2", "--labels", "5,0", "--k", "1,1",
                       "--x0", "1", "--steps", "5")
    assert code == 0
    assert out.splitlines()[0] == "t,x1"


def test_plot_negative_sections(capsys):
    code, out, _ = run(capsys, "plot", "--weights", "3,2", "--sections=-2..0", "--format", "csv")
    assert code == 0
    labels = {line.split(",")[1] for line in out.splitlines()[1:]}
    assert {"a=-2", "a=-1", "a=0"} <= labels
