#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "fishtank/tensor.hpp"
#include "fishtank/util.hpp"

namespace fishtank {

enum class Pigment : uint8_t { Orange = 0, Blue = 1 };

inline const char* pigment_name(Pigment p) { return p == Pigment::Orange ? "orange" : "blue"; }
inline Pigment other_pigment(Pigment p) { return p == Pigment::Orange ? Pigment::Blue : Pigment::Orange; }

struct Rgb {
    float r = 1, g = 1, b = 1;
};

// Pigment colors are flat (no lighting). Channel separation >= 0.3 everywhere
// so the two groups stay distinguishable at the CNN input.
inline Rgb pigment_color(Pigment p) {
    return p == Pigment::Orange ? Rgb{1.0f, 0.65f, 0.1f} : Rgb{0.1f, 0.3f, 1.0f};
}

// Planar position on the swim plane plus heading. Heading is degrees in
// [0, 360), 0 points along +z and positive headings turn left
// (counter-clockwise seen from above with x right / z up).
struct AgentPose {
    float x = 0;
    float z = 0;
    float heading = 0;
};

inline float normalize_heading(float deg) {
    float h = std::fmod(deg, 360.0f);
    if (h < 0) h += 360.0f;
    return h;
}

// Forward unit vector of a heading, (x, z).
inline std::pair<float, float> heading_forward(float heading_deg) {
    float r = static_cast<float>(deg_to_rad(heading_deg));
    return {-std::sin(r), std::cos(r)};
}

// Heading that points from `from` towards `to`.
inline float heading_towards(float from_x, float from_z, float to_x, float to_z) {
    float dx = to_x - from_x;
    float dz = to_z - from_z;
    return normalize_heading(static_cast<float>(rad_to_deg(std::atan2(-dx, dz))));
}

struct FishBody {
    static constexpr float kLength = 1.2f;
    static constexpr float kHeight = 0.7f;
    static constexpr float kWidth = 0.3f;
    static constexpr float kHalfLength = kLength / 2;

    Pigment pigment = Pigment::Orange;
};

struct CameraModel {
    static constexpr float kFovDegrees = 140.0f;  // horizontal; square frustum
    static constexpr int kImageSize = 64;
    static constexpr float kEyeHeight = 0.35f;  // fish mid-height above the floor
    static constexpr float kNearPlane = 0.01f;
};

// Rendered egocentric frame: planar float tensor [3,64,64], values in [0,1].
using Observation = Tensor;

struct Arena {
    enum class Kind : uint8_t { Cup, Tank };
    Kind kind = Kind::Cup;
    float radius = 5.0f;   // cup
    float length = 30.0f;  // tank x extent
    float width = 10.0f;   // tank z extent

    static Arena cup(float r) {
        Arena a;
        a.kind = Kind::Cup;
        a.radius = r;
        return a;
    }
    static Arena tank(float l, float w) {
        Arena a;
        a.kind = Kind::Tank;
        a.length = l;
        a.width = w;
        return a;
    }
};

}  // namespace fishtank
