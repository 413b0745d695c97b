#pragma once

#include <optional>
#include <vector>

#include "fishtank/types.hpp"
#include "fishtank/world.hpp"

namespace fishtank {

struct Vec3 {
    float x = 0, y = 0, z = 0;
};

struct Tri {
    Vec3 a, b, c;
    Rgb color;
};

// Immutable snapshot handed to the rasterizer. `fish` indices line up with
// WorldState fish indices so a viewer can be excluded by identity.
struct SceneGraph {
    std::vector<Tri> static_geometry;  // floor and walls, all white
    struct FishInstance {
        FishBody body;
        AgentPose pose;
        float phase = 0;
    };
    std::vector<FishInstance> fish;
};

// Tail yaw in degrees for an animation phase: 20 * sin(phase).
float tail_yaw_degrees(float phase);

// Triangles of one fish at a pose. The tail hinges about the vertical axis
// by tail_yaw_degrees(phase); the body origin never moves with phase.
void append_fish_mesh(std::vector<Tri>& out, const FishBody& body, const AgentPose& pose, float phase);

// White floor/wall geometry for an arena.
std::vector<Tri> arena_geometry(const Arena& arena);

// Eye sits at the head tip, kEyeHeight above the floor.
Vec3 eye_position(const AgentPose& pose);

struct PixelHit {
    float u = 0, v = 0, depth = 0;
};

// Continuous pixel coordinates of a world point seen from `viewer`, or empty
// when the point is behind the near plane or outside the 140-degree frustum.
// Pixel centers sit at half-integer coordinates; the image border is u or v
// exactly 0 or 64.
std::optional<PixelHit> project_point(const CameraModel& cam, const AgentPose& viewer, Vec3 world);

// Rasterizes the scene from fish[viewer_index]'s eye. The viewer's own body
// contributes no pixels. Pure function of its arguments.
Observation render_view(const SceneGraph& scene, int viewer_index, const CameraModel& cam);

// Same, with a free camera pose (no self-exclusion unless exclude_fish >= 0).
Observation render_view_from(const SceneGraph& scene, const AgentPose& eye, const CameraModel& cam,
                             int exclude_fish = -1);

SceneGraph scene_from_world(const WorldState& world, const std::vector<Tri>& arena_tris);

// Convenience: arena geometry is rebuilt per call; hot paths should cache it.
Observation agent_view(const WorldState& world, int fish_index);

uint64_t observation_hash(const Observation& obs);

}  // namespace fishtank
