// SPDX-License-Identifier: Apache-2.0

#include <numbers>

#include <gtest/gtest.h>

#include "handbooster/errors.hpp"
#include "handbooster/skinning.hpp"
#include "test_util.hpp"

namespace handbooster {
namespace {

const ToyRig& toy() {
    static const ToyRig t = make_toy_rig();
    return t;
}

HandPose random_pose(Rng& rng) {
    std::vector<double> curls(15);
    for (auto& c : curls) c = uniform(rng, 0.0, 30.0);
    HandPose p = flexion_pose(toy(), curls);
    p.global_orient = testing_util::random_rotation(rng);
    p.root_translation = Eigen::Vector3d(uniform(rng, -100, 100), uniform(rng, -100, 100), uniform(rng, 200, 600));
    return p;
}

TEST(ToyRigTest, Structure) {
    const Rig& rig = toy().rig;
    EXPECT_EQ(rig.articulated_count(), 15u);
    EXPECT_NO_THROW(rig.validate());
    EXPECT_TRUE(is_watertight(rig.template_mesh));
    EXPECT_EQ(rig.joint_rest[0], Eigen::Vector3d::Zero());
}

TEST(PoseMesh, IdentityPoseReproducesTemplate) {
    const Rig& rig = toy().rig;
    const MeshGeometry m = pose_mesh(rig, HandPose::neutral(15));
    ASSERT_EQ(m.vertex_count(), rig.template_mesh.vertex_count());
    for (std::size_t v = 0; v < m.vertex_count(); ++v) EXPECT_EQ(m.vertices[v], rig.template_mesh.vertices[v]);
    EXPECT_EQ(m.faces, rig.template_mesh.faces);
}

TEST(PoseMesh, GlobalRotationAboutZ) {
    const Rig& rig = toy().rig;
    HandPose p = HandPose::neutral(15);
    p.global_orient = Quaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), std::numbers::pi / 2);
    const MeshGeometry m = pose_mesh(rig, p);
    const Eigen::Matrix3d Rz = Eigen::AngleAxisd(std::numbers::pi / 2, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        ASSERT_LT((m.vertices[v] - Rz * rig.template_mesh.vertices[v]).norm(), 1e-5);
    }
}

TEST(PoseMesh, SingleJointBendIsRigidForFullyWeightedVertices) {
    const ToyRig& t = toy();
    const int joint = 5;  // index finger PIP (articulated index 4)
    std::vector<double> curls(15, 0.0);
    curls[joint - 1] = 30.0;
    const MeshGeometry m = pose_mesh(t.rig, flexion_pose(t, curls));
    const Eigen::Matrix3d R =
        Eigen::AngleAxisd(30.0 * std::numbers::pi / 180.0, t.flex_axes[joint - 1]).toRotationMatrix();
    const Eigen::Vector3d c = t.rig.joint_rest[joint];
    int checked = 0;
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        if (t.rig.weights(static_cast<Eigen::Index>(v), joint) != 1.0) continue;
        const Eigen::Vector3d expected = R * (t.rig.template_mesh.vertices[v] - c) + c;
        ASSERT_LT((m.vertices[v] - expected).norm(), 1e-5);
        ++checked;
    }
    EXPECT_GT(checked, 0);
}

TEST(PoseMesh, RejectsJointCountMismatch) {
    EXPECT_THROW(pose_mesh(toy().rig, HandPose::neutral(14)), InvalidInput);
    EXPECT_THROW(joint_positions(toy().rig, HandPose::neutral(16)), InvalidInput);
}

TEST(PoseMesh, RigidInvariance) {
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        HandPose p = random_pose(rng);
        const Quaternion R = testing_util::random_rotation(rng);
        const MeshGeometry base = pose_mesh(toy().rig, p);
        HandPose q = p;
        q.global_orient = R * p.global_orient;
        q.root_translation = R.rotate(p.root_translation);
        const MeshGeometry moved = pose_mesh(toy().rig, q);
        for (std::size_t v = 0; v < base.vertex_count(); ++v) {
            ASSERT_LT((moved.vertices[v] - R.rotate(base.vertices[v])).norm(), 1e-5);
        }
    }
}

TEST(JointPositions, RestAndTranslation) {
    const Rig& rig = toy().rig;
    const auto rest = joint_positions(rig, HandPose::neutral(15));
    for (std::size_t j = 0; j < rest.size(); ++j) EXPECT_EQ(rest[j], rig.joint_rest[j]);
    HandPose p = HandPose::neutral(15);
    p.root_translation = {12, -3, 400};
    const auto moved = joint_positions(rig, p);
    EXPECT_LT((moved[0] - p.root_translation).norm(), 1e-12);
    for (std::size_t j = 0; j < rest.size(); ++j) EXPECT_LT((moved[j] - (rig.joint_rest[j] + p.root_translation)).norm(), 1e-12);
}

TEST(JointPositions, BoneLengthsPreserved) {
    Rng rng(5);
    const Rig& rig = toy().rig;
    for (int i = 0; i < 100; ++i) {
        const auto J = joint_positions(rig, random_pose(rng));
        for (std::size_t j = 1; j < J.size(); ++j) {
            const double rest = (rig.joint_rest[j] - rig.joint_rest[rig.parent[j]]).norm();
            ASSERT_NEAR((J[j] - J[rig.parent[j]]).norm(), rest, 1e-5);
        }
    }
}

TEST(RigValidate, RejectsBadStructures) {
    Rig rig = toy().rig;
    rig.weights(0, 0) = 0.5;
    EXPECT_THROW(rig.validate(), InvalidInput);
    rig = toy().rig;
    rig.parent[3] = -1;
    EXPECT_THROW(rig.validate(), InvalidInput);
    rig = toy().rig;
    rig.parent[2] = 3;
    rig.parent[3] = 2;
    EXPECT_THROW(rig.validate(), InvalidInput);
}

TEST(RigAsset, RoundTripThroughJson) {
    const Rig& rig = toy().rig;
    const Rig back = parse_rig(format_rig(rig));
    ASSERT_EQ(back.template_mesh.vertex_count(), rig.template_mesh.vertex_count());
    EXPECT_EQ(back.template_mesh.faces, rig.template_mesh.faces);
    EXPECT_EQ(back.parent, rig.parent);
    EXPECT_EQ(back.joint_names, rig.joint_names);
    for (std::size_t v = 0; v < rig.template_mesh.vertex_count(); ++v) {
        ASSERT_LT((back.template_mesh.vertices[v] - rig.template_mesh.vertices[v]).norm(), 1e-4);
    }
    EXPECT_LT((back.weights - rig.weights).cwiseAbs().maxCoeff(), 1e-7);
    // float32 storage is stable on a second trip
    EXPECT_EQ(format_rig(back), format_rig(parse_rig(format_rig(back))));
}

TEST(RigAsset, RejectsMalformed) {
    EXPECT_THROW(parse_rig("{"), DataError);
    EXPECT_THROW(parse_rig(R"({"format":"other","version":1})"), DataError);
}

}  // namespace
}  // namespace handbooster
