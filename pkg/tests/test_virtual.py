import numpy as np
import pytest

from wmavmd import (FaultEvent, InertialParams, InjectionSpec, Mode, NoiseSpec, ProfileSpec,
                    generate, inject, virtual_wheelset)
from wmavmd.errors import InputDomainError
from wmavmd.virtual import InertialReference
from wmavmd.vmd import vmd_all


def accel_trace():
    prof = ProfileSpec([(Mode.TRACTION, 30, 60)], 0.1, initial_speed_kmh=10)
    return generate(prof, NoiseSpec(sigma=0.0))


def test_inertial_tracks_constant_acceleration():
    tr = accel_trace()
    out = virtual_wheelset(tr, "inertial")
    np.testing.assert_allclose(out.velocities[:, -1], tr.base_speed, atol=1e-9)


def test_copy_of_consensus_keeps_vmd():
    tr = generate(ProfileSpec([(Mode.TRACTION, 10, 40)], 0.1), NoiseSpec(seed=1))
    ref = tr.velocities.min(axis=1)
    out = virtual_wheelset(tr, "reference", ref)
    assert np.array_equal(vmd_all(out.velocities)[:, :4], vmd_all(tr.velocities))


def test_reference_defaults_to_base_speed_and_validates():
    tr = accel_trace()
    out = virtual_wheelset(tr, "reference")
    assert out.p == 5 and np.array_equal(out.velocities[:, 4], tr.base_speed)
    with pytest.raises(InputDomainError):
        virtual_wheelset(tr, "reference", np.zeros(3))
    with pytest.raises(InputDomainError):
        virtual_wheelset(tr, "psychic")


def test_common_mode_fault_becomes_visible():
    tr = generate(ProfileSpec([(Mode.TRACTION, 20, 40)], 0.1), NoiseSpec(sigma=0.0))
    faulty, _ = inject(tr, InjectionSpec([FaultEvent((0, 1, 2, 3), "slip", 50, 5, 1.0)]))
    plain = vmd_all(faulty.velocities)
    aug = vmd_all(virtual_wheelset(faulty, "reference").velocities)
    assert np.all(plain == 0)
    assert np.allclose(aug[50:55, :4], 1.0)


def test_inertial_barely_moves_on_short_common_fault():
    tr = generate(ProfileSpec([(Mode.TRACTION, 20, 40)], 0.1), NoiseSpec(sigma=0.0))
    faulty, _ = inject(tr, InjectionSpec([FaultEvent((0, 1, 2, 3), "slip", 100, 5, 1.0)]))
    ref = virtual_wheelset(faulty, "inertial").velocities[:, 4]
    assert np.max(np.abs(ref[100:105] - tr.base_speed[100:105])) < 0.3


def test_acceleration_is_bounded_and_stops_reset():
    trk = InertialReference(0.1, InertialParams(max_accel_kmh_s=2.0))
    trk.update([0, 0], Mode.TRACTION)
    trk.update([10, 10], Mode.TRACTION)
    assert trk.accel == 2.0
    assert trk.update([0, 0], Mode.STOPPED) == 0.0 and trk.accel == 0.0
