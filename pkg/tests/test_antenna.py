import math

import numpy as np
import pytest

from phykey.antenna import (
    AntennaProfile,
    calibrate_tx_power,
    gain,
    load_antenna_profile,
    omni_profile,
    save_antenna_profile,
    synthesize_rotated_beam,
)
from phykey.errors import CalibrationError, ProfileError
from phykey.geometry import LinkPathSet, Topology


def test_omni_profile_gain_is_one_everywhere():
    oa = omni_profile()
    for angle in (0.0, 17.3, 90.0, 255.5, 359.999):
        assert gain(oa, 0, angle) == 1.0


def test_single_mode_unit_csv_is_oa_equivalent(tmp_path):
    path = tmp_path / "oa.csv"
    path.write_text(
        "mode,angle_deg,gain_linear\n"
        + "\n".join(f"0,{a},1.0" for a in range(0, 360, 45))
        + "\n"
    )
    profile = load_antenna_profile(path)
    assert profile.kind == "OA"
    assert profile.mode_count == 1
    assert gain(profile, 0, 123.4) == 1.0


def test_midpoint_linear_interpolation():
    profile = AntennaProfile(
        modes=(5,), angles_deg=np.array([0.0, 10.0]), gains=np.array([[2.0, 4.0]])
    )
    assert gain(profile, 5, 5.0) == pytest.approx(3.0)


def test_interpolation_wraps_across_360():
    # entries at 350 and 0 only; query at 355 must match the unwrapped line
    profile = AntennaProfile(
        modes=(0,), angles_deg=np.array([0.0, 350.0]), gains=np.array([[1.0, 3.0]])
    )
    # unwrapped evaluation: segment from (350, 3.0) to (360, 1.0)
    expected = 3.0 + (355.0 - 350.0) / (360.0 - 350.0) * (1.0 - 3.0)
    assert gain(profile, 0, 355.0) == pytest.approx(expected)
    assert gain(profile, 0, -5.0) == pytest.approx(expected)  # same point mod 360


def test_gain_deterministic_and_continuous():
    profile = synthesize_rotated_beam(mode_count=8, front_to_back_db=12.0)
    samples = [gain(profile, 3, 77.7) for _ in range(5)]
    assert len(set(samples)) == 1
    # continuity across a table knot
    left = gain(profile, 3, 45.0 - 1e-9)
    right = gain(profile, 3, 45.0 + 1e-9)
    assert abs(left - right) < 1e-6


def test_synthesized_profile_is_circular_shift_of_mode_zero():
    profile = synthesize_rotated_beam(mode_count=360, front_to_back_db=20.0)
    assert profile.mode_count == 360
    base = profile.gains[0]
    for u in (1, 37, 180, 359):
        np.testing.assert_allclose(profile.gains[u], np.roll(base, u))


def test_synthesized_profile_front_to_back_span():
    profile = synthesize_rotated_beam(mode_count=4, front_to_back_db=20.0)
    row = profile.gains[0]
    assert row.max() == pytest.approx(1.0)
    assert row.min() == pytest.approx(10.0 ** (-20.0 / 20.0))


def test_profile_csv_roundtrip(tmp_path):
    profile = synthesize_rotated_beam(mode_count=6, front_to_back_db=9.0)
    path = tmp_path / "beam.csv"
    save_antenna_profile(profile, path)
    loaded = load_antenna_profile(path)
    np.testing.assert_allclose(loaded.gains, profile.gains, rtol=1e-10)
    np.testing.assert_allclose(loaded.angles_deg, profile.angles_deg)


def test_negative_gain_row_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("mode,angle_deg,gain_linear\n5,90,-0.1\n")
    with pytest.raises(ProfileError, match="line 2"):
        load_antenna_profile(path)


def test_malformed_row_reports_line_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("mode,angle_deg,gain_linear\n0,0,1.0\n0,ten,1.0\n")
    with pytest.raises(ProfileError, match="line 3"):
        load_antenna_profile(path)


def test_unknown_mode_rejected():
    with pytest.raises(ProfileError, match="unknown mode"):
        gain(omni_profile(), 7, 0.0)


TOP = Topology(alice=(0, 0), bob=(10, 0), mallory=(5, 5))


def test_calibrate_oa_inverts_rss_formula():
    # mean channel amplitude 1e-4 at threshold -75 dBm -> P_x = 5 dBm;
    # with sigma0 -> 0 the Rician mean collapses to the LoS amplitude
    p_x = calibrate_tx_power(omni_profile(), TOP, -75.0, 1e-4, 1e-12)
    assert p_x == pytest.approx(-75.0 - 20.0 * math.log10(1e-4), abs=1e-6)


def test_degenerate_ra_matches_oa_power():
    flat = AntennaProfile(
        modes=(0, 1, 2),
        angles_deg=np.array([0.0]),
        gains=np.ones((3, 1)),
    )
    p_flat = calibrate_tx_power(flat, TOP, -75.0, 1e-4, 2e-6)
    p_oa = calibrate_tx_power(omni_profile(), TOP, -75.0, 1e-4, 2e-6)
    assert p_flat == pytest.approx(p_oa, abs=1e-12)


def test_calibration_monotone_in_threshold():
    profile = synthesize_rotated_beam(mode_count=36, front_to_back_db=15.0)
    base = calibrate_tx_power(profile, TOP, -75.0, 1e-4, 2e-6)
    for delta in (0.5, 3.0, 11.0):
        raised = calibrate_tx_power(profile, TOP, -75.0 + delta, 1e-4, 2e-6)
        assert raised == pytest.approx(base + delta, abs=1e-9)


def test_zero_gain_mode_excluded_with_warning():
    gains = np.array([[1.0], [0.0]])
    profile = AntennaProfile(modes=(0, 1), angles_deg=np.array([0.0]), gains=gains)
    with pytest.warns(UserWarning, match="zero-gain"):
        p_x = calibrate_tx_power(profile, TOP, -75.0, 1e-4, 2e-6)
    assert math.isfinite(p_x)


def test_all_zero_modes_rejected():
    profile = AntennaProfile(
        modes=(0,), angles_deg=np.array([0.0]), gains=np.array([[0.0]])
    )
    with pytest.raises(CalibrationError):
        calibrate_tx_power(profile, TOP, -75.0, 1e-4, 2e-6)


def test_calibrate_with_explicit_paths():
    paths = LinkPathSet(angles_deg=(0.0, 90.0))
    p = calibrate_tx_power(omni_profile(), TOP, -75.0, 1e-4, 1e-12, paths)
    assert math.isfinite(p)
