#pragma once

#include <vector>

#include "fishtank/rng.hpp"
#include "fishtank/types.hpp"

namespace fishtank {

enum class MoveAction : uint8_t { Forward = 0, Stay = 1 };
enum class TurnAction : uint8_t { Left = 0, Right = 1, None = 2 };

struct ActionPair {
    MoveAction move = MoveAction::Stay;
    TurnAction turn = TurnAction::None;
};

constexpr int kNumActions = 6;

inline int action_index(ActionPair a) {
    return static_cast<int>(a.move) * 3 + static_cast<int>(a.turn);
}
inline ActionPair action_from_index(int i) {
    if (i < 0 || i >= kNumActions) throw ContractError("action index out of range");
    return ActionPair{static_cast<MoveAction>(i / 3), static_cast<TurnAction>(i % 3)};
}

// Step kinematics. Forward speed and phase step are design constants exposed
// through the config; turn granularity is the paper's ~2 degrees made exact.
struct WorldConfig {
    float forward_speed = 0.05f;
    float turn_degrees = 2.0f;
    float phase_step = 0.4f;
    int episode_steps = 1000;
};

struct WorldFish {
    FishBody body;
    AgentPose pose;
    float phase = 0;
    bool scripted = false;  // shoal members: hold position, animate only
};

struct WorldState {
    Arena arena;
    WorldConfig cfg;
    std::vector<WorldFish> fish;
    int step_count = 0;
    bool episode_done = false;

    int policy_fish_count() const {
        int n = 0;
        for (const auto& f : fish) n += f.scripted ? 0 : 1;
        return n;
    }
};

struct IndexedAction {
    int fish = 0;
    ActionPair action;
};

// Turn is applied before the forward step; Stay leaves position unchanged.
AgentPose apply_action(const AgentPose& pose, ActionPair action, const WorldConfig& cfg);

// Slide clamp: position projected back inside, heading untouched. The arena
// is inset by the fish half-length.
AgentPose clamp_to_arena(const AgentPose& pose, const Arena& arena);

// Advances every fish simultaneously from the pre-step snapshot, clamps,
// advances animation phases and the step counter. Exactly one action per
// policy-controlled fish is required.
void step_world(WorldState& world, const std::vector<IndexedAction>& actions);

// Re-spawns policy fish for a new episode: single fish exactly at the arena
// center, groups on a ring of `spawn_offset` around it; headings i.i.d.
// uniform. Scripted fish are left in place.
void reset_episode(WorldState& world, RngStream& rng, float spawn_offset);

}  // namespace fishtank
