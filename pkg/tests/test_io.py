import numpy as np
import pytest

from solitonlab.io import (
    TRAJECTORY_HEADER,
    TrajectoryWriter,
    fmt,
    read_trajectory_csv,
    sha256_file,
    write_json,
    write_table_csv,
    write_trajectory_csv,
)
from solitonlab.records import ObservableRecord, Trajectory


def sample_trajectory(n_t=3, L=5):
    rng = np.random.default_rng(0)
    traj = Trajectory(engine="test")
    for i in range(n_t):
        traj.append(
            ObservableRecord(
                t=0.5 * i,
                rho=rng.uniform(0, 1, L),
                rho_s=rng.uniform(0, 0.25, L),
                phase=rng.uniform(-np.pi, np.pi, L),
                entropy=rng.uniform(0, 1, L - 1),
                corr_nn=rng.uniform(-0.1, 0.1, L - 1),
                norm=1.0,
                energy=-3.0,
                total_sz=5.0,
            )
        )
    return traj


def test_header_contract(tmp_path):
    path = tmp_path / "t.csv"
    write_trajectory_csv(path, sample_trajectory())
    assert path.read_text().splitlines()[0] == "t,site,rho,rho_s,phase,entropy_bond,corr_nn"


def test_round_trip(tmp_path):
    traj = sample_trajectory()
    path = tmp_path / "t.csv"
    write_trajectory_csv(path, traj)
    times, fields = read_trajectory_csv(path)
    np.testing.assert_allclose(times, [0.0, 0.5, 1.0])
    for i, rec in enumerate(traj):
        np.testing.assert_array_equal(fields["rho"][i], rec.rho)
        np.testing.assert_array_equal(fields["phase"][i], rec.phase)
        np.testing.assert_array_equal(fields["entropy_bond"][i, :-1], rec.entropy)
        assert fields["entropy_bond"][i, -1] == 0.0


def test_streaming_writer_matches_batch(tmp_path):
    traj = sample_trajectory()
    batch = tmp_path / "batch.csv"
    stream = tmp_path / "stream.csv"
    write_trajectory_csv(batch, traj)
    with TrajectoryWriter(stream) as w:
        for rec in traj:
            w.write_record(rec)
    assert batch.read_bytes() == stream.read_bytes()


def test_append_mode_continues(tmp_path):
    traj = sample_trajectory(4)
    full = tmp_path / "full.csv"
    write_trajectory_csv(full, traj)
    part = tmp_path / "part.csv"
    with TrajectoryWriter(part) as w:
        for rec in traj.records[:2]:
            w.write_record(rec)
    with TrajectoryWriter(part, append=True) as w:
        for rec in traj.records[2:]:
            w.write_record(rec)
    assert full.read_bytes() == part.read_bytes()


def test_reader_rejects_foreign_files(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        read_trajectory_csv(bad)
    empty = tmp_path / "empty.csv"
    empty.write_text(",".join(TRAJECTORY_HEADER) + "\n")
    with pytest.raises(ValueError):
        read_trajectory_csv(empty)


def test_float_format_is_reversible():
    xs = [0.1, 1 / 3, np.pi, 1e-300, 123456.789012345678]
    for x in xs:
        assert float(fmt(x)) == x


def test_table_and_hash(tmp_path):
    rows = [{"a": 0.1, "b": "x"}, {"a": 2.0, "b": "y"}]
    path = tmp_path / "table.csv"
    write_table_csv(path, rows, ["a", "b"])
    h1 = sha256_file(path)
    write_table_csv(path, rows, ["a", "b"])
    assert sha256_file(path) == h1
    write_json(tmp_path / "meta.json", {"z": np.float64(1.5), "arr": np.arange(3)})
    import json

    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta == {"z": 1.5, "arr": [0, 1, 2]}
