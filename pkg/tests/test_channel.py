import numpy as np
import pytest
from hypothesis import given, strategies as st

from ratedist.channel import (ChannelFormatError, GaussianChannel, deterministic_channel,
                              format_channel, induced_joint, output_partition, parse_channel,
                              random_deterministic_channel, read_channel)
from ratedist.info import JointPmf, cond_entropy, entropy, mutual_info
from ratedist.partitions import SetPartition

D1_TEXT = """# four inputs
alphabet X 4
output Y det 0 1 1 2
output Z1 det 0 0 1 1
"""


def test_parse_deterministic():
    ch = parse_channel(D1_TEXT)
    assert ch.deterministic and ch.n_inputs == 4 and ch.K == 1
    assert ch.names == ("Y", "Z1")
    assert output_partition(ch, "Y") == SetPartition([0, 1, 1, 2])


def test_parse_stochastic():
    ch = parse_channel("alphabet X 2\noutput Y stoch 2\n0.9 0.1\n0.1 0.9\n")
    assert not ch.deterministic
    np.testing.assert_array_equal(ch.output("Y").table, [[0.9, 0.1], [0.1, 0.9]])


def test_stochastic_zero_one_rows_are_deterministic():
    ch = parse_channel("alphabet X 2\noutput Y stoch 2\n0 1\n1 0\n")
    assert ch.deterministic and ch.output("Y").det_map == (1, 0)


@pytest.mark.parametrize("text", [
    "alphabet X 2\noutput Y stoch 2\n0.9 0.09\n0.5 0.5\n",
    "alphabet X 2\noutput Y det 0\n",
    "output Y det 0 1\n",
    "alphabet X 2\noutput Y stoch 2\n-0.1 1.1\n0.5 0.5\n",
    "alphabet X 2\noutput Y wobble 0 1\n",
    "alphabet X 2\nfrobnicate\n",
    "",
    "alphabet X 2\noutput Y det 0 1\noutput Y det 0 0\n",
    "alphabet X 2\noutput Y stoch 2\n0.5 0.5\n",
    "gaussian 2 1\nK1\n1 0\n0 1\n",
])
def test_parse_errors(text):
    with pytest.raises(ChannelFormatError):
        parse_channel(text)


def test_parse_exact_decimals_and_fractions():
    ch = parse_channel("alphabet X 1\noutput Y stoch 3\n1/3 1/3 1/3\n")
    assert ch.output("Y").table[0, 0] == 1 / 3
    ch = parse_channel("alphabet X 1\noutput Y stoch 10\n" + " ".join(["0.1"] * 10) + "\n")
    assert ch.output("Y").size == 10


def test_joint_block():
    text = ("alphabet X 2\noutput Y det 0 1\noutput Z stoch 2\n0.5 0.5\n0.5 0.5\n"
            "joint\n0.5 0.5 0 0\n0 0 0.5 0.5\n")
    ch = parse_channel(text)
    assert ch.conditional().shape == (2, 2, 2)
    bad = text.replace("0.5 0.5 0 0", "0.25 0.75 0 0")
    with pytest.raises(ChannelFormatError):
        parse_channel(bad)


def test_gaussian_document():
    g = parse_channel("gaussian 2 10\nK1\n1 0.3\n0.3 1\nK2\n4 0\n0 2\n")
    assert isinstance(g, GaussianChannel)
    assert g.d == 2 and g.P == 10
    np.testing.assert_array_equal(g.K2, np.diag([4.0, 2.0]))


def test_format_roundtrip():
    ch = parse_channel(D1_TEXT)
    again = parse_channel(format_channel(ch))
    assert again.names == ch.names
    for a, b in zip(ch.outputs, again.outputs):
        np.testing.assert_array_equal(a.table, b.table)
    st_ch = parse_channel("alphabet X 2\noutput Y stoch 2\n0.9 0.1\n0.1 0.9\n")
    np.testing.assert_array_equal(parse_channel(format_channel(st_ch)).output("Y").table,
                                  st_ch.output("Y").table)


def test_read_channel_files():
    from pathlib import Path
    root = Path(__file__).resolve().parents[1] / "channels"
    for path in sorted(root.glob("*.chan")):
        read_channel(path)


def test_induced_joint_examples(d1):
    j = induced_joint(d1, JointPmf(np.full(4, 0.25), ["X"]))
    assert j.names == ("X", "Y", "Z")
    np.testing.assert_allclose(j.marginal(["Y"]).mass, [0.25, 0.5, 0.25])
    assert entropy(j, ["Y"]) == pytest.approx(1.5, abs=1e-15)

    pm = induced_joint(d1, JointPmf([0, 0, 1, 0], ["X"]))
    assert np.count_nonzero(pm.mass) == 1 and pm.mass[2, 1, 1] == 1.0

    ux = JointPmf(np.outer([0.3, 0.7], [0.1, 0.2, 0.3, 0.4]), ["U", "X"])
    assert mutual_info(induced_joint(d1, ux), "U", "Y") == pytest.approx(0, abs=1e-12)


def test_induced_joint_size_mismatch(d1):
    with pytest.raises(ValueError):
        induced_joint(d1, JointPmf([0.5, 0.5], ["X"]))


def test_output_partition_examples():
    ch = deterministic_channel(3, {"Y": (2, 2, 2), "Z": (4, 0, 1)})
    assert output_partition(ch, "Y") == SetPartition.single(3)
    assert output_partition(ch, "Z") == SetPartition.identity(3)
    bsc = parse_channel("alphabet X 2\noutput Y stoch 2\n0.9 0.1\n0.1 0.9\n")
    with pytest.raises(ValueError):
        output_partition(bsc, "Y")


@given(st.integers(0, 10**6), st.integers(1, 5), st.integers(1, 3))
def test_deterministic_outputs_have_zero_conditional_entropy(seed, nx, nu):
    r = np.random.default_rng(seed)
    ch = random_deterministic_channel(r, nx, 2)
    pux = r.dirichlet(np.ones(nu * nx)).reshape(nu, nx)
    j = induced_joint(ch, JointPmf(pux, ["U", "X"]))
    for name in ch.names:
        assert cond_entropy(j, [name], ["X"]) == pytest.approx(0, abs=1e-12)
    np.testing.assert_allclose(j.marginal(["U", "X"]).mass, pux, atol=1e-15)


@given(st.integers(0, 10**6))
def test_stochastic_joint_recovers_input_marginal(seed):
    r = np.random.default_rng(seed)
    t1 = r.dirichlet(np.ones(3), size=4)
    t2 = r.dirichlet(np.ones(2), size=4)
    text = "alphabet X 4\noutput Y stoch 3\n" + "\n".join(" ".join(map(repr, row)) for row in t1)
    text += "\noutput Z stoch 2\n" + "\n".join(" ".join(map(repr, row)) for row in t2) + "\n"
    try:
        ch = parse_channel(text)
    except ChannelFormatError:
        return  # float reprs can miss the 1e-12 row-sum check
    px = r.dirichlet(np.ones(4))
    j = induced_joint(ch, JointPmf(px, ["X"]))
    np.testing.assert_allclose(j.marginal(["X"]).mass, px, atol=1e-15)
