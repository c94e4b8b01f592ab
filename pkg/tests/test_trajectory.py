import numpy as np
import pytest

from cellsim.errors import ScenarioError
from cellsim.trajectory import StepRecord, Trajectory, read_trajectory_csv


def _record(t, flags=()):
    base = 100.0 * t
    return StepRecord(
        t=t, mode="cc", current=1.5 - 0.01 * t, v=3.9 - 0.001 * t,
        temperature=298.0 + 0.1 * t, soc=1.0 - 0.0003 * t,
        ce_neg=base + np.array([1.0, 2.0, 3.0, 4.0]),
        ce_pos=base + np.array([5.0, 6.0, 7.0, 8.0]),
        css_neg=base + np.array([9.0, 10.0, 11.0, 12.0]),
        css_pos=base + np.array([13.0, 14.0, 15.0, 16.0]),
        cs_bulk_neg=base + np.array([17.0, 18.0, 19.0, 20.0]),
        cs_bulk_pos=base + np.array([21.0, 22.0, 23.0, 24.0]),
        jn_neg=1e-5 * np.array([1.0, 2.0, 3.0, 4.0]),
        jn_pos=-1e-5 * np.array([1.0, 2.0, 3.0, 4.0]),
        qe_neg=3.05e-3, qe_pos=2.95e-3, qh=0.25,
        u_ocp_neg=0.12, u_ocp_pos=3.95,
        flags=set(flags),
    )


def test_trajectory_column_views():
    traj = Trajectory([_record(1.0), _record(2.0)], name="demo")
    assert len(traj) == 2
    assert np.allclose(traj.t, [1.0, 2.0])
    assert traj.ce.shape == (2, 8)
    assert traj.jn.shape == (2, 8)
    # negative block first, positive second
    assert traj.ce[0, 0] == 101.0 and traj.ce[0, 4] == 105.0
    assert traj.jn[1, 7] == -4e-5


def test_csv_header_is_the_published_contract(tmp_path):
    traj = Trajectory([_record(1.0)])
    path = tmp_path / "t.csv"
    traj.to_csv(path)
    header = path.read_text().splitlines()[0].split(",")
    expected = ["t_s", "I_A", "V_V", "T_K", "SOC"]
    for block in ("ce", "css", "cs", "jn"):
        for side in ("n", "p"):
            expected += [f"{block}_{side}{i}" for i in range(1, 5)]
    expected += ["Qe_neg_mol", "Qe_pos_mol", "Qh_W", "flags"]
    assert header == expected
    assert len(header) == 41


def test_csv_roundtrip(tmp_path):
    traj = Trajectory([_record(1.0, flags={"cutoff", "css_clamped"}),
                       _record(2.0)])
    path = tmp_path / "t.csv"
    traj.to_csv(path)
    back = read_trajectory_csv(path)
    assert len(back) == 2
    for col in ("t", "current", "v", "temperature", "soc",
                "qe_neg", "qe_pos", "qh"):
        assert np.allclose(getattr(back, col), getattr(traj, col),
                           rtol=1e-9), col
    for col in ("ce", "css", "cs_bulk", "jn"):
        assert np.allclose(getattr(back, col), getattr(traj, col),
                           rtol=1e-9), col
    assert back.flags[0] == frozenset({"cutoff", "css_clamped"})
    assert back.flags[1] == frozenset()


def test_read_rejects_malformed_files(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ScenarioError):
        read_trajectory_csv(empty)
    headless = tmp_path / "no_rows.csv"
    headless.write_text(",".join(["c"] * 41) + "\n")
    with pytest.raises(ScenarioError):
        read_trajectory_csv(headless)
    narrow = tmp_path / "narrow.csv"
    narrow.write_text("t_s,I_A\n0,1\n")
    with pytest.raises(ScenarioError):
        read_trajectory_csv(narrow)
