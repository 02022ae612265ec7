import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atticsim.arm import (IK_TOL, JointLimitError, Unreachable, arm_fk,
                          arm_ik, reachable)
from atticsim.robot import ArmGeometry


@pytest.fixture
def arm():
    return ArmGeometry()


def _fk_oracle(arm, joints):
    """Independent FK via chained homogeneous transforms."""
    from atticsim import transforms

    q1, q2, q3, q4, q5 = joints
    T = transforms.transform(transforms.rot_z(q1), (0, 0, arm.base_height))
    T = T @ transforms.transform(transforms.rot_y(-q2))
    T = T @ transforms.transform(np.eye(3), (arm.upper_arm, 0, 0))
    T = T @ transforms.transform(transforms.rot_y(-q3))
    T = T @ transforms.transform(np.eye(3), (arm.forearm, 0, 0))
    T = T @ transforms.transform(transforms.rot_y(-q4))
    T = T @ transforms.transform(
        np.eye(3), (arm.wrist_to_flange + arm.gun_tip_offset, 0, 0))
    tip = T[:3, 3]
    approach = T[:3, :3] @ np.array([1.0, 0.0, 0.0])
    return tip, approach


def test_fk_matches_transform_chain_oracle(arm):
    rng = np.random.default_rng(42)
    for _ in range(500):
        joints = [rng.uniform(lo * 0.95, hi * 0.95)
                  for lo, hi in arm.joint_limits]
        pos, app = arm_fk(arm, joints)
        pos_o, app_o = _fk_oracle(arm, joints)
        assert np.allclose(pos, pos_o, atol=1e-12)
        assert np.allclose(app, app_o, atol=1e-12)


def test_fk_zero_pose(arm):
    pos, app = arm_fk(arm, [0.0] * 5)
    assert np.allclose(pos, [arm.reach, 0.0, arm.base_height])
    assert np.allclose(app, [1.0, 0.0, 0.0])


def test_fk_rejects_bad_input(arm):
    with pytest.raises(ValueError, match="5 joint"):
        arm_fk(arm, [0.0, 0.0, 0.0])
    with pytest.raises(JointLimitError):
        arm_fk(arm, [0.0, 2.0, 0.0, 0.0, 0.0])


def test_ik_round_trip_bulk(arm):
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(2000):
        joints = [rng.uniform(lo * 0.9, hi * 0.9) for lo, hi in arm.joint_limits]
        joints[4] = 0.0  # roll does not move the tip
        pos, app = arm_fk(arm, joints)
        try:
            sol, achieved = arm_ik(arm, pos, app)
        except (Unreachable, JointLimitError):
            continue
        pos2, app2 = arm_fk(arm, sol)
        assert np.linalg.norm(pos2 - pos) < 1e-6
        # the achieved approach is what FK reproduces
        assert np.allclose(app2, achieved, atol=1e-9)
        checked += 1
    assert checked > 1500


def test_ik_requires_unit_approach(arm):
    with pytest.raises(ValueError, match="unit"):
        arm_ik(arm, [0.4, 0.0, 0.2], [0.0, 0.0, -2.0])


def test_ik_rejects_outside_annulus(arm):
    # tip straight down: wrist center sits 0.20 m above the tip
    with pytest.raises(Unreachable, match="annulus"):
        arm_ik(arm, [0.9, 0.0, 0.0], [0.0, 0.0, -1.0])
    assert not reachable(arm, [0.9, 0.0, 0.0])
    assert reachable(arm, [0.35, 0.0, 0.0], (0.0, 0.0, -1.0))


def test_ik_no_false_accepts_against_workspace_oracle(arm):
    """Every IK acceptance must be realizable; every point FK can produce
    from in-limit joints (tool-down) must be accepted."""
    rng = np.random.default_rng(11)
    a2, a3 = arm.upper_arm, arm.forearm
    l4 = arm.wrist_to_flange + arm.gun_tip_offset
    for _ in range(500):
        target = rng.uniform([-0.9, -0.9, -0.6], [0.9, 0.9, 0.9])
        try:
            sol, achieved = arm_ik(arm, target, (0.0, 0.0, -1.0))
            ok = True
        except (Unreachable, JointLimitError):
            ok = False
        if ok:
            pos, _ = arm_fk(arm, sol)
            assert np.linalg.norm(pos - target) < 1e-6
        else:
            # oracle: for a straight-down approach in the target's vertical
            # plane, the wrist center is fixed; reject only if it leaves the
            # elbow annulus or no elbow branch satisfies the joint limits
            r_w = math.hypot(target[0], target[1])
            z_w = target[2] - arm.base_height + l4
            d = math.hypot(r_w, z_w)
            inside = abs(a2 - a3) - 1e-9 <= d <= a2 + a3 + 1e-9
            if inside:
                feasible = False
                cos_e = (d * d - a2 * a2 - a3 * a3) / (2 * a2 * a3)
                cos_e = min(max(cos_e, -1.0), 1.0)
                for q3 in (-math.acos(cos_e), math.acos(cos_e)):
                    q2 = math.atan2(z_w, r_w) - math.atan2(
                        a3 * math.sin(q3), a2 + a3 * math.cos(q3))
                    q4 = -math.pi / 2.0 - q2 - q3
                    q4 = math.atan2(math.sin(q4), math.cos(q4))
                    lims = arm.joint_limits
                    if (lims[1][0] <= q2 <= lims[1][1]
                            and lims[2][0] <= q3 <= lims[2][1]
                            and lims[3][0] <= q4 <= lims[3][1]):
                        feasible = True
                assert not feasible, f"IK rejected reachable target {target}"


@settings(max_examples=100, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5),
       st.floats(-1.5, 1.5))
def test_fk_ik_property_round_trip(q1, q2, q3, q4):
    arm = ArmGeometry()
    joints = [q1, q2, q3, q4, 0.0]
    try:
        pos, app = arm_fk(arm, joints)
    except JointLimitError:
        return
    try:
        sol, _ = arm_ik(arm, pos, app)
    except (Unreachable, JointLimitError):
        return
    pos2, _ = arm_fk(arm, sol)
    assert np.linalg.norm(pos2 - pos) < IK_TOL
