#include "fishtank/world.hpp"

#include <cmath>

namespace fishtank {

AgentPose apply_action(const AgentPose& pose, ActionPair action, const WorldConfig& cfg) {
    AgentPose out = pose;
    switch (action.turn) {
        case TurnAction::Left: out.heading = normalize_heading(out.heading + cfg.turn_degrees); break;
        case TurnAction::Right: out.heading = normalize_heading(out.heading - cfg.turn_degrees); break;
        case TurnAction::None: break;
    }
    if (action.move == MoveAction::Forward) {
        auto [fx, fz] = heading_forward(out.heading);
        out.x += cfg.forward_speed * fx;
        out.z += cfg.forward_speed * fz;
    }
    return out;
}

AgentPose clamp_to_arena(const AgentPose& pose, const Arena& arena) {
    AgentPose out = pose;
    const float inset = FishBody::kHalfLength;
    if (arena.kind == Arena::Kind::Cup) {
        float limit = arena.radius - inset;
        float r = std::sqrt(out.x * out.x + out.z * out.z);
        if (r > limit && r > 0) {
            float s = limit / r;
            out.x *= s;
            out.z *= s;
        }
    } else {
        float lx = arena.length / 2 - inset;
        float lz = arena.width / 2 - inset;
        out.x = std::min(lx, std::max(-lx, out.x));
        out.z = std::min(lz, std::max(-lz, out.z));
    }
    return out;
}

void step_world(WorldState& world, const std::vector<IndexedAction>& actions) {
    if (static_cast<int>(actions.size()) != world.policy_fish_count())
        throw ContractError("step_world: one action per policy-controlled fish required");

    // All moves derive from the pre-step snapshot; each action touches only
    // its own fish, so the order of `actions` cannot matter.
    std::vector<uint8_t> acted(world.fish.size(), 0);
    for (const auto& ia : actions) {
        if (ia.fish < 0 || ia.fish >= static_cast<int>(world.fish.size()))
            throw ContractError("step_world: action for unknown fish");
        auto& f = world.fish[ia.fish];
        if (f.scripted) throw ContractError("step_world: action addressed to a scripted fish");
        if (acted[ia.fish]) throw ContractError("step_world: duplicate action for fish");
        acted[ia.fish] = 1;
        f.pose = clamp_to_arena(apply_action(f.pose, ia.action, world.cfg), world.arena);
    }
    for (auto& f : world.fish) f.phase += world.cfg.phase_step;
    ++world.step_count;
    world.episode_done = world.step_count >= world.cfg.episode_steps;
}

void reset_episode(WorldState& world, RngStream& rng, float spawn_offset) {
    world.step_count = 0;
    world.episode_done = false;
    int policy_n = world.policy_fish_count();
    int slot = 0;
    for (auto& f : world.fish) {
        if (f.scripted) continue;
        float ox = 0, oz = 0;
        if (policy_n > 1) {
            double ang = deg_to_rad(360.0 * slot / policy_n);
            ox = static_cast<float>(spawn_offset * std::cos(ang));
            oz = static_cast<float>(spawn_offset * std::sin(ang));
        }
        f.pose.x = ox;
        f.pose.z = oz;
        f.pose.heading = static_cast<float>(rng.uniform(0.0, 360.0));
        ++slot;
    }
}

}  // namespace fishtank
