#include "fishtank/render.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace fishtank {

namespace {

constexpr float kTailAmplitudeDeg = 20.0f;

// Body ellipsoid semi-axes and placement. The ellipsoid spans local
// z in [-0.3, 0.6]; the hinged tail fills [-0.6, -0.28], so the whole fish
// spans exactly kLength with the pose at its middle.
constexpr float kBodySemiX = FishBody::kWidth / 2;    // 0.15
constexpr float kBodySemiY = FishBody::kHeight / 2;   // 0.35
constexpr float kBodySemiZ = 0.45f;
constexpr float kBodyCenterZ = 0.15f;
constexpr float kTailHingeZ = -0.28f;
constexpr float kTailTipZ = -FishBody::kHalfLength;   // -0.6
constexpr float kTailHalfHeight = 0.15f;
constexpr float kMidY = FishBody::kHeight / 2;        // 0.35, also the eye height
constexpr float kHeadTipZ = kBodyCenterZ + kBodySemiZ;  // 0.6

constexpr int kStacks = 5;
constexpr int kSlices = 8;
constexpr float kWallHeight = 1.5f;
constexpr int kCupSegments = 24;

struct Basis {
    Vec3 eye, right, up, fwd;
};

Basis camera_basis(const AgentPose& pose) {
    auto [fx, fz] = heading_forward(pose.heading);
    Basis b;
    b.eye = eye_position(pose);
    b.fwd = {fx, 0, fz};
    b.up = {0, 1, 0};
    b.right = {fz, 0, -fx};  // up x fwd
    return b;
}

inline Vec3 to_camera(const Basis& b, Vec3 p) {
    float dx = p.x - b.eye.x, dy = p.y - b.eye.y, dz = p.z - b.eye.z;
    return {dx * b.right.x + dy * b.right.y + dz * b.right.z,
            dx * b.up.x + dy * b.up.y + dz * b.up.z,
            dx * b.fwd.x + dy * b.fwd.y + dz * b.fwd.z};
}

// Rotation about +y consistent with heading: local +z maps to heading_forward.
inline Vec3 rotate_y_deg(Vec3 v, float deg) {
    float r = static_cast<float>(deg_to_rad(deg));
    float c = std::cos(r), s = std::sin(r);
    return {v.x * c - v.z * s, v.y, v.x * s + v.z * c};
}

inline Vec3 local_to_world(const AgentPose& pose, Vec3 local) {
    Vec3 r = rotate_y_deg(local, pose.heading);
    return {pose.x + r.x, r.y, pose.z + r.z};
}

struct ScreenVert {
    float u, v, invz;
};

inline float edge(const ScreenVert& a, const ScreenVert& b, float pu, float pv) {
    return (pu - a.u) * (b.v - a.v) - (pv - a.v) * (b.u - a.u);
}

class Raster {
  public:
    explicit Raster(const Basis& basis)
        : basis_(basis), tan_half_(std::tan(static_cast<float>(deg_to_rad(CameraModel::kFovDegrees / 2)))) {
        color_.assign(3 * kN * kN, 1.0f);  // white background
        depth_.assign(kN * kN, std::numeric_limits<float>::infinity());
    }

    void draw(const Tri& t) {
        std::array<Vec3, 3> cam = {to_camera(basis_, t.a), to_camera(basis_, t.b), to_camera(basis_, t.c)};
        // Clip against the near plane; a triangle yields at most 4 vertices.
        std::array<Vec3, 4> poly;
        int n = 0;
        for (int i = 0; i < 3; ++i) {
            const Vec3& cur = cam[i];
            const Vec3& nxt = cam[(i + 1) % 3];
            bool cin = cur.z >= CameraModel::kNearPlane;
            bool nin = nxt.z >= CameraModel::kNearPlane;
            if (cin) poly[n++] = cur;
            if (cin != nin) {
                float s = (CameraModel::kNearPlane - cur.z) / (nxt.z - cur.z);
                poly[n++] = {cur.x + s * (nxt.x - cur.x), cur.y + s * (nxt.y - cur.y), CameraModel::kNearPlane};
            }
        }
        for (int i = 2; i < n; ++i) fill(poly[0], poly[i - 1], poly[i], t.color);
    }

    Observation take() {
        Observation obs({3, kN, kN});
        obs.data = std::move(color_);
        return obs;
    }

  private:
    static constexpr int kN = CameraModel::kImageSize;

    ScreenVert project(const Vec3& c) const {
        float invz = 1.0f / c.z;
        float half = kN / 2.0f;
        return {half * (1.0f + c.x * invz / tan_half_), half * (1.0f - c.y * invz / tan_half_), invz};
    }

    void fill(const Vec3& a, const Vec3& b, const Vec3& c, Rgb col) {
        ScreenVert v0 = project(a), v1 = project(b), v2 = project(c);
        float area = edge(v0, v1, v2.u, v2.v);
        if (area == 0) return;
        float sign = area > 0 ? 1.0f : -1.0f;
        float inv_area = 1.0f / area;

        float min_u = std::min({v0.u, v1.u, v2.u});
        float max_u = std::max({v0.u, v1.u, v2.u});
        float min_v = std::min({v0.v, v1.v, v2.v});
        float max_v = std::max({v0.v, v1.v, v2.v});
        int x0 = std::max(0, static_cast<int>(std::floor(min_u - 0.5f)));
        int x1 = std::min(kN - 1, static_cast<int>(std::ceil(max_u - 0.5f)));
        int y0 = std::max(0, static_cast<int>(std::floor(min_v - 0.5f)));
        int y1 = std::min(kN - 1, static_cast<int>(std::ceil(max_v - 0.5f)));

        for (int py = y0; py <= y1; ++py) {
            float pv = py + 0.5f;
            for (int px = x0; px <= x1; ++px) {
                float pu = px + 0.5f;
                float w0 = edge(v1, v2, pu, pv) * sign;
                float w1 = edge(v2, v0, pu, pv) * sign;
                float w2 = edge(v0, v1, pu, pv) * sign;
                if (w0 < 0 || w1 < 0 || w2 < 0) continue;
                float invz = (w0 * v0.invz + w1 * v1.invz + w2 * v2.invz) * inv_area * sign;
                float z = 1.0f / invz;
                size_t pix = static_cast<size_t>(py) * kN + px;
                if (z < depth_[pix]) {
                    depth_[pix] = z;
                    color_[pix] = col.r;
                    color_[kN * kN + pix] = col.g;
                    color_[2 * kN * kN + pix] = col.b;
                }
            }
        }
    }

    Basis basis_;
    float tan_half_;
    std::vector<float> color_;
    std::vector<float> depth_;
};

}  // namespace

float tail_yaw_degrees(float phase) { return kTailAmplitudeDeg * std::sin(phase); }

Vec3 eye_position(const AgentPose& pose) {
    Vec3 local{0, CameraModel::kEyeHeight, kHeadTipZ};
    Vec3 w = local_to_world(pose, local);
    return w;
}

void append_fish_mesh(std::vector<Tri>& out, const FishBody& body, const AgentPose& pose, float phase) {
    Rgb col = pigment_color(body.pigment);

    // Ellipsoid body: kStacks bands of kSlices quads, degenerate at the poles.
    auto vert = [&](int stack, int slice) -> Vec3 {
        double alpha = -kPi / 2 + kPi * stack / kStacks;
        double phi = 2 * kPi * slice / kSlices;
        Vec3 local{static_cast<float>(kBodySemiX * std::cos(alpha) * std::cos(phi)),
                   static_cast<float>(kMidY + kBodySemiY * std::cos(alpha) * std::sin(phi)),
                   static_cast<float>(kBodyCenterZ + kBodySemiZ * std::sin(alpha))};
        return local_to_world(pose, local);
    };
    for (int st = 0; st < kStacks; ++st) {
        for (int sl = 0; sl < kSlices; ++sl) {
            Vec3 p00 = vert(st, sl), p01 = vert(st, sl + 1);
            Vec3 p10 = vert(st + 1, sl), p11 = vert(st + 1, sl + 1);
            if (st > 0) out.push_back({p00, p01, p10, col});
            if (st < kStacks - 1) out.push_back({p01, p11, p10, col});
        }
    }

    // Hinged triangular tail in the vertical plane; yaw swings the tip.
    float yaw = tail_yaw_degrees(phase);
    Vec3 tip_local{0, kMidY, kTailTipZ};
    Vec3 rel{tip_local.x, 0, kTailTipZ - kTailHingeZ};
    Vec3 swung = rotate_y_deg(rel, yaw);
    Vec3 tip{swung.x, kMidY, kTailHingeZ + swung.z};
    Vec3 root_top{0, kMidY + kTailHalfHeight, kTailHingeZ};
    Vec3 root_bot{0, kMidY - kTailHalfHeight, kTailHingeZ};
    out.push_back({local_to_world(pose, root_top), local_to_world(pose, root_bot), local_to_world(pose, tip), col});
}

std::vector<Tri> arena_geometry(const Arena& arena) {
    std::vector<Tri> tris;
    Rgb white{1, 1, 1};
    if (arena.kind == Arena::Kind::Cup) {
        float r = arena.radius;
        Vec3 center{0, 0, 0};
        for (int i = 0; i < kCupSegments; ++i) {
            double a0 = 2 * kPi * i / kCupSegments;
            double a1 = 2 * kPi * (i + 1) / kCupSegments;
            Vec3 p0{static_cast<float>(r * std::cos(a0)), 0, static_cast<float>(r * std::sin(a0))};
            Vec3 p1{static_cast<float>(r * std::cos(a1)), 0, static_cast<float>(r * std::sin(a1))};
            tris.push_back({center, p0, p1, white});
            Vec3 q0 = p0, q1 = p1;
            q0.y = q1.y = kWallHeight;
            tris.push_back({p0, p1, q0, white});
            tris.push_back({q0, p1, q1, white});
        }
    } else {
        float hx = arena.length / 2, hz = arena.width / 2;
        Vec3 f00{-hx, 0, -hz}, f01{-hx, 0, hz}, f10{hx, 0, -hz}, f11{hx, 0, hz};
        tris.push_back({f00, f01, f10, white});
        tris.push_back({f10, f01, f11, white});
        auto wall = [&](Vec3 a, Vec3 b) {
            Vec3 at = a, bt = b;
            at.y = bt.y = kWallHeight;
            tris.push_back({a, b, at, white});
            tris.push_back({at, b, bt, white});
        };
        wall(f00, f01);
        wall(f01, f11);
        wall(f11, f10);
        wall(f10, f00);
    }
    return tris;
}

std::optional<PixelHit> project_point(const CameraModel& cam, const AgentPose& viewer, Vec3 world) {
    (void)cam;
    Basis b = camera_basis(viewer);
    Vec3 c = to_camera(b, world);
    if (c.z < CameraModel::kNearPlane) return std::nullopt;
    float t = std::tan(static_cast<float>(deg_to_rad(CameraModel::kFovDegrees / 2)));
    if (std::abs(c.x) > c.z * t || std::abs(c.y) > c.z * t) return std::nullopt;
    float half = CameraModel::kImageSize / 2.0f;
    return PixelHit{half * (1.0f + c.x / (c.z * t)), half * (1.0f - c.y / (c.z * t)), c.z};
}

Observation render_view_from(const SceneGraph& scene, const AgentPose& eye, const CameraModel& cam,
                             int exclude_fish) {
    (void)cam;
    Raster raster(camera_basis(eye));
    for (const Tri& t : scene.static_geometry) raster.draw(t);
    std::vector<Tri> scratch;
    for (size_t i = 0; i < scene.fish.size(); ++i) {
        if (static_cast<int>(i) == exclude_fish) continue;
        scratch.clear();
        append_fish_mesh(scratch, scene.fish[i].body, scene.fish[i].pose, scene.fish[i].phase);
        for (const Tri& t : scratch) raster.draw(t);
    }
    return raster.take();
}

Observation render_view(const SceneGraph& scene, int viewer_index, const CameraModel& cam) {
    if (viewer_index < 0 || viewer_index >= static_cast<int>(scene.fish.size()))
        throw ContractError("render_view: viewer must be a fish in the scene");
    return render_view_from(scene, scene.fish[viewer_index].pose, cam, viewer_index);
}

SceneGraph scene_from_world(const WorldState& world, const std::vector<Tri>& arena_tris) {
    SceneGraph scene;
    scene.static_geometry = arena_tris;
    scene.fish.reserve(world.fish.size());
    for (const auto& f : world.fish) scene.fish.push_back({f.body, f.pose, f.phase});
    return scene;
}

Observation agent_view(const WorldState& world, int fish_index) {
    SceneGraph scene = scene_from_world(world, arena_geometry(world.arena));
    return render_view(scene, fish_index, CameraModel{});
}

uint64_t observation_hash(const Observation& obs) {
    return fnv1a(obs.data.data(), obs.data.size() * sizeof(float));
}

}  // namespace fishtank
