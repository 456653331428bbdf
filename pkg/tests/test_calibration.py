import numpy as np
import pytest

from everkin.utils.calibration import (
    MOCAP_HEADER, MocapSample, dead_zone_arc, emit_mocap_csv, estimate_k,
    group_samples, parse_mocap_csv, pressure_length_independence,
    read_csv_table, simulate_pull_log, sweep_error_field)
from everkin.utils.errors import (
    InsufficientData, LengthMismatch, MultiMotorData, ParseError, SchemaError)
from everkin.utils.kinematics import CartesianPoint, MotorAngles, PolarPose
from everkin.utils.plant import PlantConfig, apply_sag

HEADER_LINE = ",".join(MOCAP_HEADER) + "\n"


def write_text(path, text):
    path.write_text(text)
    return str(path)


def test_mocap_csv_round_trip(tmp_path):
    samples = simulate_pull_log(motor = 1, noise_sigma = 0.3, seed = 4)
    path = str(tmp_path / "pull.csv")
    assert emit_mocap_csv(samples, path) == len(samples)
    assert parse_mocap_csv(path) == samples


def test_metadata_lines_are_skipped(tmp_path):
    path = write_text(tmp_path / "m.csv", "# rig=bench\n" + HEADER_LINE +
                      "0.0,0.6,0.0,0.0,10.0,0.0,0.0,8.0,0.6\n")
    meta, header, rows = read_csv_table(path, MOCAP_HEADER)
    assert meta == {"rig": "bench"}
    assert header == MOCAP_HEADER
    assert [lineno for lineno, _ in rows] == [3]


def test_bad_header(tmp_path):
    path = write_text(tmp_path / "m.csv", "time,x,y\n1,2,3\n")
    with pytest.raises(SchemaError):
        parse_mocap_csv(path)
    path = write_text(tmp_path / "e.csv", "")
    with pytest.raises(SchemaError):
        parse_mocap_csv(path)


def test_bad_rows_report_line(tmp_path):
    path = write_text(tmp_path / "m.csv", HEADER_LINE +
                      "0.0,0.6,0.0,0.0,10.0,0.0,0.0,8.0,0.6\n"
                      "0.1,0.6,abc,0.0,10.0,0.0,0.0,8.0,0.6\n")
    with pytest.raises(ParseError) as e:
        parse_mocap_csv(path)
    assert e.value.lineno == 3

    path = write_text(tmp_path / "t.csv", HEADER_LINE +
                      "1.0,0.6,0.0,0.0,10.0,0.0,0.0,8.0,0.6\n"
                      "0.5,0.6,0.0,0.0,10.0,0.0,0.0,8.0,0.6\n")
    with pytest.raises(ParseError) as e:
        parse_mocap_csv(path)
    assert e.value.lineno == 3

    path = write_text(tmp_path / "n.csv", HEADER_LINE +
                      "0.0,0.6,0.0,0.0,-10.0,0.0,0.0,8.0,0.6\n")
    with pytest.raises(ParseError):
        parse_mocap_csv(path)

    path = write_text(tmp_path / "f.csv", HEADER_LINE + "0.0,0.6\n")
    with pytest.raises(ParseError):
        parse_mocap_csv(path)


def test_empty_data_section(tmp_path):
    path = write_text(tmp_path / "m.csv", HEADER_LINE)
    samples = parse_mocap_csv(path)
    assert samples == []
    with pytest.raises(InsufficientData):
        estimate_k(samples)


def test_estimate_k_noiseless():
    fit = estimate_k(simulate_pull_log(k_true = 0.104))
    assert fit.k_hat == pytest.approx(0.104, abs = 1e-9)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.residual_max < 1e-9
    assert fit.n_samples == 20


def test_estimate_k_with_noise():
    fit = estimate_k(simulate_pull_log(k_true = 0.104, noise_sigma = 0.2, seed = 0))
    assert abs(fit.k_hat - 0.104) <= 0.005
    assert 0.99 < fit.r_squared <= 1.0


@pytest.mark.parametrize("motor", [0, 1, 2])
def test_estimate_k_any_motor(motor):
    fit = estimate_k(simulate_pull_log(k_true = 0.09, motor = motor))
    assert fit.k_hat == pytest.approx(0.09, abs = 1e-9)


def test_estimate_k_needs_distinct_angles():
    samples = simulate_pull_log(angles = [50.0, 50.0, 50.0])
    with pytest.raises(InsufficientData):
        estimate_k(samples)
    with pytest.raises(InsufficientData):
        estimate_k(samples[:1])


def test_estimate_k_rejects_multi_motor_samples():
    samples = simulate_pull_log()
    bad = MocapSample(samples[-1].time + 0.1, CartesianPoint(0.5, 0.1, 0.1),
                      MotorAngles(10, 20, 0), 8.0, 0.6)
    with pytest.raises(MultiMotorData):
        estimate_k(samples + [bad])


def test_independence_across_pressures():
    samples = []
    for i, pressure in enumerate((3.0, 6.0, 9.0)):
        samples += simulate_pull_log(pressure = pressure, noise_sigma = 0.2, seed = i,
                                     t0 = 10.0 * i)
    groups = group_samples(samples)
    assert list(groups) == [(3.0, 0.6), (6.0, 0.6), (9.0, 0.6)]
    report = pressure_length_independence(groups)
    assert len(report.fits) == 3
    assert not report.exceeded
    assert report.max_diff < 0.005
    assert report.pooled.n_samples == 60
    assert report.pooled.k_hat == pytest.approx(0.104, abs = 0.005)


def test_independence_flags_large_difference():
    samples = simulate_pull_log(k_true = 0.10, pressure = 3.0) + \
              simulate_pull_log(k_true = 0.12, pressure = 9.0, t0 = 10.0)
    report = pressure_length_independence(samples)
    assert report.max_diff == pytest.approx(0.02, abs = 1e-9)
    assert report.exceeded


def test_independence_needs_two_groups():
    with pytest.raises(InsufficientData):
        pressure_length_independence(simulate_pull_log())


def test_sweep_error_field():
    desired = [PolarPose(0.6, 10.4, t) for t in (0, 90, 180, 270)]
    field = sweep_error_field(desired, desired)
    assert field.errors == [(0, 0)] * 4
    assert field.mean_theta == 0

    measured = [PolarPose(0.6, 10.0, 355), PolarPose(0.6, 11.0, 80)]
    field = sweep_error_field(desired[:2], measured)
    assert field.errors[0] == pytest.approx((0.4, 5))
    assert field.errors[1] == pytest.approx((-0.6, 10))
    assert field.mean_theta == pytest.approx(7.5)
    assert field.mean_abs_alpha == pytest.approx(0.5)
    back = sweep_error_field(measured, desired[:2])
    assert back.errors[0] == pytest.approx((-0.4, -5))

    with pytest.raises(LengthMismatch):
        sweep_error_field(desired, measured)


def test_dead_zone_arc():
    thetas = list(np.arange(40.0, 330.0, 5.0))
    zone = dead_zone_arc(thetas)
    assert zone.start == 325
    assert zone.end == 40
    assert zone.width == pytest.approx(75)
    assert zone.width_below_seam == pytest.approx(35)

    assert dead_zone_arc(np.arange(0.0, 360.0, 5.0)) is None
    assert dead_zone_arc([10.0, 20.0]) is None


def test_sweep_error_field_under_sag():
    config = PlantConfig(gravity_sag_mag = 6.0, gravity_sag_dir = 270.0)
    desired = [PolarPose(0.6, 10.4, float(t)) for t in range(0, 360, 15)]
    measured = []
    for d in desired:
        a = apply_sag((d.alpha, d.theta), config)
        measured.append(PolarPose(d.R, a.alpha, a.theta))
    field = sweep_error_field(desired, measured)
    assert field.mean_abs_theta > 1.0
    assert field.mean_theta == pytest.approx(0.0, abs = 1e-9)
    for d, (_, e_theta) in zip(desired, field.errors):
        if d.theta in (90.0, 270.0):
            assert abs(e_theta) < 1e-6
        elif 90.0 < d.theta < 270.0:
            assert e_theta < 0
        else:
            assert e_theta > 0
    by_theta = dict(zip((d.theta for d in desired), field.errors))
    assert by_theta[0.0][1] == pytest.approx(-by_theta[180.0][1])


def test_independence_over_pressure_and_length():
    angles = list(np.linspace(20.0, 180.0, 34))
    samples = []
    seed = 0
    for length in (0.4, 0.8):
        for pressure in (3.0, 6.0, 9.0):
            samples += simulate_pull_log(angles = angles, pressure = pressure, length = length,
                                         noise_sigma = 0.2, seed = seed, t0 = 10.0 * seed)
            seed += 1
    assert len(samples) == 204
    report = pressure_length_independence(samples)
    assert list(report.fits) == [(3.0, 0.4), (6.0, 0.4), (9.0, 0.4),
                                 (3.0, 0.8), (6.0, 0.8), (9.0, 0.8)]
    assert not report.exceeded
    assert report.max_diff < 0.005
    assert report.pooled.n_samples == 204
    assert abs(report.pooled.k_hat - 0.104) <= 0.005
    assert report.pooled.r_squared > 0.99
    for fit in report.fits.values():
        assert abs(fit.k_hat - 0.104) <= 0.005


def test_mocap_log_must_be_utf8(tmp_path):
    path = tmp_path / "m.csv"
    path.write_bytes(HEADER_LINE.encode() +
                     b"0.0,0.6,0.0,0.0,10.0,0.0,0.0,8.0,0.6\n"
                     b"\xff\xfe,0.6,0.0,0.0,10.0,0.0,0.0,8.0,0.6\n")
    with pytest.raises(ParseError) as e:
        parse_mocap_csv(str(path))
    assert "UTF-8" in str(e.value)
