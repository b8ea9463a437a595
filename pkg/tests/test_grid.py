import struct

import numpy as np
import pytest

from hopfion.errors import BadDims, FormatError, KindViolation
from hopfion.genmaps import gen_hopf_box
from hopfion.grid import (Box, Field, Torus, box, constant_field, make_lattice, read_field, sample,
                          shell_mask, torus, write_field)
from hopfion.quat import qexp_array


def test_spacing():
    assert make_lattice((16, 16, 16), Torus((1, 1, 1))).spacing == (1 / 16,) * 3
    assert make_lattice((17, 17, 17), Box(6.0)).spacing == (0.75,) * 3


def test_bad_dims():
    with pytest.raises(BadDims):
        make_lattice((4, 4, 4), Torus())
    with pytest.raises(BadDims):
        make_lattice(16, Box(-1.0))


def test_sample_constant_and_periodic():
    lat = torus(16, L=2 * np.pi)
    phi = sample(lat, lambda p: np.array([0.0, 1.0, 0.0, 0.0]), "S2")
    assert phi.kind == "S2"
    u = sample(lat, lambda p: qexp_array(np.stack([p[..., 0], 0 * p[..., 0], 0 * p[..., 0]], -1)), "S3")
    # the next vertex after the last one is the first one again
    step = qexp_array(np.array([lat.spacing[0], 0.0, 0.0]))
    nxt = np.array([np.cos(lat.axis(0)[-1] + lat.spacing[0]), np.sin(lat.axis(0)[-1] + lat.spacing[0]), 0, 0])
    assert np.allclose(nxt, u.values[0, 0, 0], atol=1e-12)
    assert np.allclose(np.linalg.norm(step), 1.0)


def test_sample_projects():
    u = sample(torus(8), lambda p: np.array([1.0, 1.0, 0.0, 0.0]), "S3")
    assert np.allclose(u.values[0, 0, 0], [2**-0.5, 2**-0.5, 0, 0])


def test_kind_violation():
    with pytest.raises(KindViolation):
        sample(torus(8), lambda p: np.array([0.5, 1.0, 0.0, 0.0]), "S2")
    with pytest.raises(KindViolation):
        Field(torus(8), np.zeros((8, 8, 8, 4)), "S3")


def test_round_trip(tmp_path):
    phi = gen_hopf_box(box(16, R=4.0))
    path = tmp_path / "h.qf3"
    write_field(phi, path)
    back = read_field(path)
    assert back == phi
    assert back.values.tobytes() == phi.values.tobytes()


def test_truncated_and_bad_tag(tmp_path):
    phi = constant_field(torus(8), (0, 1, 0, 0), "S2")
    path = tmp_path / "c.qf3"
    write_field(phi, path)
    data = path.read_bytes()
    (tmp_path / "short.qf3").write_bytes(data[:-8])
    with pytest.raises(FormatError):
        read_field(tmp_path / "short.qf3")
    bad = bytearray(data)
    bad[8] = 2  # domain tag byte after magic and version
    (tmp_path / "tag.qf3").write_bytes(bytes(bad))
    with pytest.raises(FormatError):
        read_field(tmp_path / "tag.qf3")
    (tmp_path / "magic.qf3").write_bytes(b"XXXX" + data[4:])
    with pytest.raises(FormatError):
        read_field(tmp_path / "magic.qf3")


def test_header_layout(tmp_path):
    phi = constant_field(torus((8, 9, 10)), (1, 0, 0, 0), "S3")
    path = tmp_path / "h.qf3"
    write_field(phi, path)
    head = struct.unpack_from("<4sIBBH3I", path.read_bytes())
    assert head[0] == b"QF3\x00" and head[5:] == (8, 9, 10)


def test_boundary_defect_and_shells():
    phi = gen_hopf_box(box(16, R=4.0))
    assert phi.boundary_defect() == 0.0
    m = shell_mask(phi.lattice, 2)
    assert m.sum() == 16**3 - 12**3
