import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icrics.imagecore import (
    BlockLayout,
    BlockSet,
    Image,
    PGMError,
    encode_pgm,
    from_blocks,
    load_pgm,
    parse_pgm,
    save_pgm,
    to_blocks,
)


def test_parse_minimal_p5():
    img = parse_pgm(b"P5\n2 2\n255\n" + bytes([0, 255, 17, 34]))
    assert (img.width, img.height) == (2, 2)
    np.testing.assert_array_equal(img.data, [0, 255, 17, 34])


def test_parse_skips_comments():
    plain = parse_pgm(b"P5\n2 2\n255\n" + bytes([1, 2, 3, 4]))
    commented = parse_pgm(b"P5\n# made by hand\n2 # width\n# height next\n2\n255\n" + bytes([1, 2, 3, 4]))
    np.testing.assert_array_equal(plain.pixels, commented.pixels)


def test_payload_starting_with_whitespace_byte():
    # the single separator after maxval must not swallow a payload byte equal to '\n'
    img = parse_pgm(b"P5\n2 1\n255\n" + bytes([10, 32]))
    np.testing.assert_array_equal(img.data, [10, 32])


@pytest.mark.parametrize(
    "buf, field, msg",
    [
        (b"P5\n2 2\n65535\n" + bytes(8), "maxval", "unsupported maxval"),
        (b"P2\n2 2\n255\n0 0 0 0", "magic", "P5"),
        (b"P5\n2 2\n255\n" + bytes(3), "payload", "truncated"),
        (b"P5\nx 2\n255\n" + bytes(4), "width", "non-numeric"),
        (b"P5\n2 -2\n255\n" + bytes(4), "height", "non-numeric"),
        (b"P5\n2 2\n25a\n" + bytes(4), "maxval", "non-numeric"),
    ],
)
def test_parse_errors_name_the_field(buf, field, msg):
    with pytest.raises(PGMError, match=msg) as info:
        parse_pgm(buf)
    assert info.value.field == field


def test_save_rounds_and_clips(tmp_path):
    p = tmp_path / "a.pgm"
    save_pgm(Image.from_data(1, 1, [128.4]), p)
    assert p.read_bytes() == b"P5\n1 1\n255\n" + bytes([128])
    save_pgm(Image.from_data(1, 1, [300.0]), p)
    assert p.read_bytes()[-1] == 255
    save_pgm(Image.from_data(2, 1, [-4.0, 127.5]), p)
    assert list(p.read_bytes()[-2:]) == [0, 128]


def test_save_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        save_pgm(Image.from_data(1, 1, [0]), tmp_path / "missing" / "x.pgm")


@settings(max_examples=40, deadline=None)
@given(
    w=st.integers(1, 40),
    h=st.integers(1, 40),
    seed=st.integers(0, 2**32 - 1),
)
def test_pgm_round_trip_bytes(tmp_path_factory, w, h, seed):
    px = np.random.default_rng(seed).integers(0, 256, size=(h, w)).astype(float)
    p = tmp_path_factory.mktemp("rt") / "x.pgm"
    save_pgm(Image(px), p)
    back = load_pgm(p)
    np.testing.assert_array_equal(back.pixels, px)
    assert encode_pgm(back) == p.read_bytes()


def test_image_data_length_invariant():
    with pytest.raises(ValueError):
        Image.from_data(3, 2, np.zeros(5))


def test_exact_tiling():
    img = Image(np.arange(64 * 64, dtype=float).reshape(64, 64))
    bs = to_blocks(img, 32)
    assert bs.blocks.shape == (4, 1024)
    assert (bs.layout.blocks_x, bs.layout.blocks_y) == (2, 2)
    assert (bs.layout.padded_width, bs.layout.padded_height) == (64, 64)
    np.testing.assert_array_equal(bs.blocks[1], img.pixels[:32, 32:].ravel())
    np.testing.assert_array_equal(bs.blocks[2], img.pixels[32:, :32].ravel())


def test_single_block_is_flattened_image():
    img = Image(np.random.default_rng(0).uniform(0, 255, (32, 32)))
    bs = to_blocks(img, 32)
    assert bs.blocks.shape == (1, 1024)
    np.testing.assert_array_equal(bs.blocks[0], img.data)


def test_reflection_padding_33():
    px = np.random.default_rng(1).uniform(0, 255, (33, 33))
    bs = to_blocks(Image(px), 32)
    assert (bs.layout.padded_width, bs.layout.padded_height) == (64, 64)
    assert bs.blocks.shape[0] == 4
    # rebuild the padded raster by hand from the blocks
    full = bs.blocks.reshape(2, 2, 32, 32).transpose(0, 2, 1, 3).reshape(64, 64)
    np.testing.assert_array_equal(full[33, :33], px[31])
    np.testing.assert_array_equal(full[:33, 33], px[:, 31])
    # reflection about index 32: padded index 32 + k mirrors 32 - k
    for k in range(1, 32):
        np.testing.assert_array_equal(full[32 + k, :33], px[32 - k])


def test_edge_fallback_when_too_small():
    px = np.array([[5.0, 7.0]])
    bs = to_blocks(Image(px), 4)
    full = bs.blocks[0].reshape(4, 4)
    # width 2 needs pad 2 > 1 -> edge; height 1 needs pad 3 -> edge
    np.testing.assert_array_equal(full, [[5, 7, 7, 7]] * 4)


def test_from_blocks_rejects_inconsistent_layout():
    layout = BlockLayout.for_image(64, 64, 32)
    with pytest.raises(ValueError):
        from_blocks(BlockSet(layout, np.zeros((3, 1024))))


@pytest.mark.parametrize("B", [1, 8, 32])
@settings(max_examples=25, deadline=None)
@given(w=st.integers(1, 70), h=st.integers(1, 70), seed=st.integers(0, 1000))
def test_block_round_trip(B, w, h, seed):
    px = np.random.default_rng(seed).uniform(0, 255, (h, w))
    bs = to_blocks(Image(px), B)
    assert bs.blocks.shape == (math.ceil(w / B) * math.ceil(h / B), B * B)
    np.testing.assert_array_equal(from_blocks(bs).pixels, px)
