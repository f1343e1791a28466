#pragma once

#include "budgeted/arm_model.hpp"

#include <concepts>
#include <memory>
#include <string>
#include <vector>

namespace budgeted {

using ArmPtr = std::shared_ptr<const ArmDag>;
using ArmSet = std::vector<ArmPtr>;

inline ArmSet share_arms(std::vector<ArmDag> arms) {
    ArmSet out;
    for (auto& a : arms) out.push_back(std::make_shared<const ArmDag>(std::move(a)));
    return out;
}

/**
 * Joint state of all arms.
 *
 * `remaining_budget` is the exploration budget left (budgeted mode) or the
 * number of plays left (horizon mode); `step` counts the actions taken so far.
 */
struct SystemState {
    std::vector<NodeId> arm_states;
    int remaining_budget = 0;
    int step = 0;

    bool operator==(const SystemState&) const = default;
};

inline SystemState initial_state(const ArmSet& arms, int budget) {
    SystemState s;
    for (const auto& a : arms) s.arm_states.push_back(a->root());
    s.remaining_budget = budget;
    return s;
}

/**
 * Explore(i) spends one unit of budget on arm i; Exploit(i) picks arm i as
 * the winner and ends a budgeted episode; Abandon ends it with nothing.
 * In horizon mode both Explore(i) and Exploit(i) mean "play arm i".
 */
struct Action {
    enum class Kind { explore, exploit, abandon };
    Kind kind = Kind::abandon;
    std::size_t arm = 0;

    static Action explore(std::size_t i) { return {Kind::explore, i}; }
    static Action exploit(std::size_t i) { return {Kind::exploit, i}; }
    static Action abandon() { return {Kind::abandon, 0}; }

    bool operator==(const Action&) const = default;
};

inline std::string to_string(const Action& a) {
    switch (a.kind) {
        case Action::Kind::explore: return "Explore(" + std::to_string(a.arm) + ")";
        case Action::Kind::exploit: return "Exploit(" + std::to_string(a.arm) + ")";
        case Action::Kind::abandon: return "Abandon";
    }
    return "?";
}

enum class Mode { budgeted, horizon };

/// A decision rule. Copies carry their own per-episode memory.
template <class S>
concept Strategy = std::copy_constructible<S> && requires(S s, const SystemState& state) {
    { s.act(state) } -> std::same_as<Action>;
};

}  // namespace budgeted
