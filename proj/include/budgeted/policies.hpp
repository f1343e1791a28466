#pragma once

#include "budgeted/gittins.hpp"
#include "budgeted/profit_curve.hpp"
#include "budgeted/system.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace budgeted {

/// Ratio indices (and optionally ratio policies) of every state of every arm, for one frozen h.
class RatioTable {
public:
    RatioTable(const ArmSet& arms, int h, bool with_policies = false) : h_(h) {
        if (h < 1) throw std::invalid_argument("RatioTable: h must be >= 1");
        for (const auto& arm : arms) {
            CurveMap curves = compute_all_curves(*arm, h);
            std::vector<Rational> r(arm->size());
            for (const auto& [u, c] : curves) r[u] = ratio_index(c);
            index_.push_back(std::move(r));
            if (with_policies) {
                std::vector<SingleArmPolicy> p(arm->size());
                for (NodeId u = 0; u < arm->size(); ++u) p[u] = extract_ratio_policy(*arm, curves, u);
                policies_.push_back(std::move(p));
            }
        }
    }

    int horizon() const { return h_; }
    const Rational& index(std::size_t arm, NodeId u) const { return index_.at(arm).at(u); }
    const SingleArmPolicy& policy(std::size_t arm, NodeId u) const {
        if (policies_.empty()) throw std::logic_error("RatioTable built without policies");
        return policies_.at(arm).at(u);
    }

private:
    int h_;
    std::vector<std::vector<Rational>> index_;
    std::vector<std::vector<SingleArmPolicy>> policies_;
};

/// Gittins indices of every state of every arm for one discount factor.
class GittinsTable {
public:
    GittinsTable(const ArmSet& arms, double theta, double tolerance = 1e-9) : theta_(theta) {
        for (const auto& arm : arms) index_.push_back(gittins_indices_all(*arm, theta, tolerance));
    }
    double theta() const { return theta_; }
    double index(std::size_t arm, NodeId u) const { return index_.at(arm).at(u); }

private:
    double theta_;
    std::vector<std::vector<double>> index_;
};

namespace detail {

// Lowest arm index among the maximizers of key(i).
template <class Key>
std::size_t argmax_arm(std::size_t n, Key&& key) {
    std::size_t best = 0;
    auto best_key = key(0);
    for (std::size_t i = 1; i < n; ++i) {
        auto k = key(i);
        if (k > best_key) {
            best = i;
            best_key = std::move(k);
        }
    }
    return best;
}

}  // namespace detail

inline std::size_t argmax_zeta(const ArmSet& arms, const SystemState& s) {
    return detail::argmax_arm(arms.size(), [&](std::size_t i) { return arms[i]->zeta(s.arm_states[i]); });
}

inline std::size_t argmax_ratio(const RatioTable& t, const SystemState& s) {
    return detail::argmax_arm(s.arm_states.size(), [&](std::size_t i) { return t.index(i, s.arm_states[i]); });
}

inline std::size_t argmax_gittins(const GittinsTable& t, const SystemState& s) {
    return detail::argmax_arm(s.arm_states.size(), [&](std::size_t i) { return t.index(i, s.arm_states[i]); });
}

class ExploitBest {
public:
    explicit ExploitBest(ArmSet arms) : arms_(std::move(arms)) {}
    Action act(const SystemState& s) const { return Action::exploit(argmax_zeta(arms_, s)); }

private:
    ArmSet arms_;
};

/// Explores the arm of highest ratio index (table frozen at the initial h); exploits the best zeta once the budget is spent.
class GreedyRatio {
public:
    GreedyRatio(ArmSet arms, int h) : arms_(std::move(arms)) {
        if (h >= 1) table_ = std::make_shared<const RatioTable>(arms_, h);
    }
    Action act(const SystemState& s) const {
        if (s.remaining_budget > 0 && table_) return Action::explore(argmax_ratio(*table_, s));
        return Action::exploit(argmax_zeta(arms_, s));
    }

private:
    ArmSet arms_;
    std::shared_ptr<const RatioTable> table_;
};

/**
 * Commits to the ratio policy of the best-index arm and follows it until it
 * exploits or abandons; on abandon it commits again. With no budget left it
 * exploits the arm of highest ratio index.
 */
class Persistent {
public:
    Persistent(ArmSet arms, int h) : arms_(std::move(arms)) {
        if (h >= 1) table_ = std::make_shared<const RatioTable>(arms_, h, true);
    }
    Action act(const SystemState& s) {
        if (!table_) return Action::exploit(argmax_zeta(arms_, s));
        if (s.remaining_budget <= 0) {
            committed_.reset();
            return Action::exploit(argmax_ratio(*table_, s));
        }
        for (int attempt = 0; attempt < 2; ++attempt) {
            if (!committed_) {
                const std::size_t i = argmax_ratio(*table_, s);
                committed_ = i;
                policy_ = &table_->policy(i, s.arm_states[i]);
            }
            const std::size_t i = *committed_;
            switch (policy_->at(s.arm_states[i])) {
                case Label::explore: return Action::explore(i);
                case Label::exploit: committed_.reset(); return Action::exploit(i);
                case Label::abandon: committed_.reset(); break;
            }
        }
        throw std::logic_error("Persistent: fresh ratio policy abandons its start state");
    }

    std::optional<std::size_t> committed_arm() const { return committed_; }

private:
    ArmSet arms_;
    std::shared_ptr<const RatioTable> table_;
    std::optional<std::size_t> committed_;
    const SingleArmPolicy* policy_ = nullptr;
};

/// Explores by Gittins index at theta = 1 - 1/h. At h = 1 the index degenerates to zeta.
class GittinsGreedy {
public:
    GittinsGreedy(ArmSet arms, int h, double tolerance = 1e-9) : arms_(std::move(arms)) {
        if (h >= 2) table_ = std::make_shared<const GittinsTable>(arms_, 1.0 - 1.0 / h, tolerance);
    }
    Action act(const SystemState& s) const {
        if (s.remaining_budget <= 0) return Action::exploit(argmax_zeta(arms_, s));
        return Action::explore(table_ ? argmax_gittins(*table_, s) : argmax_zeta(arms_, s));
    }

private:
    ArmSet arms_;
    std::shared_ptr<const GittinsTable> table_;
};

/**
 * Horizon-h play: the first floor(h/2) steps follow the ratio index computed
 * at budget floor(h/2), the rest play the arm of highest zeta. Uses the
 * `step` counter of the state. First-half plays are reported as Explore,
 * second-half plays as Exploit; in horizon mode both mean "play".
 */
class RatioSwitch {
public:
    RatioSwitch(ArmSet arms, int h) : arms_(std::move(arms)), half_(h / 2) {
        if (half_ >= 1) table_ = std::make_shared<const RatioTable>(arms_, half_);
    }
    Action act(const SystemState& s) const {
        if (s.step < half_) return Action::explore(argmax_ratio(*table_, s));
        return Action::exploit(argmax_zeta(arms_, s));
    }

private:
    ArmSet arms_;
    int half_;
    std::shared_ptr<const RatioTable> table_;
};

/// Like RatioSwitch with the Gittins index at theta = 1 - 1/floor(h/2); for h <= 3 it plays the best zeta throughout.
class GittinsSwitch {
public:
    GittinsSwitch(ArmSet arms, int h, double tolerance = 1e-9) : arms_(std::move(arms)), half_(h / 2) {
        if (half_ >= 2) table_ = std::make_shared<const GittinsTable>(arms_, 1.0 - 1.0 / half_, tolerance);
    }
    Action act(const SystemState& s) const {
        if (table_ && s.step < half_) return Action::explore(argmax_gittins(*table_, s));
        return Action::exploit(argmax_zeta(arms_, s));
    }

private:
    ArmSet arms_;
    int half_;
    std::shared_ptr<const GittinsTable> table_;
};

struct ScaleBlock {
    int k;           ///< block number; the block spans steps [2^k - 1, 2^(k+1) - 1)
    int local_step;  ///< step within the block
};

inline ScaleBlock scale_block(int t) {
    int k = 0;
    while ((2L << k) - 1 <= t) ++k;
    return {k, t - ((1 << k) - 1)};
}

/**
 * Runs Switch(1), Switch(2), Switch(4), ... back to back, each started from
 * the state reached at the end of the previous block. Tables are built for
 * the blocks needed to cover `max_steps` steps.
 */
template <class Switch>
class ScaleOf {
public:
    ScaleOf(const ArmSet& arms, int max_steps) : arms_(arms) {
        const int blocks = scale_block(std::max(0, max_steps - 1)).k + 1;
        auto parts = std::make_shared<std::vector<Switch>>();
        for (int k = 0; k < blocks; ++k) parts->emplace_back(arms, 1 << k);
        blocks_ = std::move(parts);
    }
    Action act(const SystemState& s) const {
        const ScaleBlock b = scale_block(s.step);
        if (b.k >= static_cast<int>(blocks_->size())) throw std::out_of_range("scale strategy: step beyond prepared blocks");
        SystemState local = s;
        local.step = b.local_step;
        return (*blocks_)[b.k].act(local);
    }

private:
    ArmSet arms_;
    std::shared_ptr<const std::vector<Switch>> blocks_;
};

using RatioScale = ScaleOf<RatioSwitch>;
using GittinsScale = ScaleOf<GittinsSwitch>;

/// Copyable type-erased strategy; copies clone the per-episode memory.
class AnyStrategy {
public:
    template <Strategy S>
    AnyStrategy(S s) : impl_(std::make_unique<Model<S>>(std::move(s))) {}
    AnyStrategy(const AnyStrategy& o) : impl_(o.impl_->clone()) {}
    AnyStrategy(AnyStrategy&&) noexcept = default;
    AnyStrategy& operator=(const AnyStrategy& o) {
        impl_ = o.impl_->clone();
        return *this;
    }
    AnyStrategy& operator=(AnyStrategy&&) noexcept = default;

    Action act(const SystemState& s) { return impl_->act(s); }

private:
    struct Concept {
        virtual ~Concept() = default;
        virtual Action act(const SystemState&) = 0;
        virtual std::unique_ptr<Concept> clone() const = 0;
    };
    template <class S>
    struct Model final : Concept {
        explicit Model(S s) : s(std::move(s)) {}
        Action act(const SystemState& st) override { return s.act(st); }
        std::unique_ptr<Concept> clone() const override { return std::make_unique<Model>(s); }
        S s;
    };
    std::unique_ptr<Concept> impl_;
};

enum class StrategyKind {
    greedy_ratio,
    persistent,
    gittins_greedy,
    exploit_best,
    ratio_switch,
    gittins_switch,
    ratio_scale,
    gittins_scale
};

inline const std::vector<std::pair<StrategyKind, std::string>>& strategy_names() {
    static const std::vector<std::pair<StrategyKind, std::string>> names{
        {StrategyKind::greedy_ratio, "greedy"},         {StrategyKind::persistent, "persistent"},
        {StrategyKind::gittins_greedy, "gittins_greedy"}, {StrategyKind::exploit_best, "exploit_best"},
        {StrategyKind::ratio_switch, "ratio_switch"},   {StrategyKind::gittins_switch, "gittins_switch"},
        {StrategyKind::ratio_scale, "ratio_scale"},     {StrategyKind::gittins_scale, "gittins_scale"}};
    return names;
}

inline std::string strategy_name(StrategyKind k) {
    for (const auto& [kind, name] : strategy_names())
        if (kind == k) return name;
    return "?";
}

inline StrategyKind parse_strategy_kind(const std::string& name) {
    for (const auto& [kind, n] : strategy_names())
        if (n == name) return kind;
    throw std::invalid_argument("unknown strategy \"" + name + "\"");
}

/// Builds a strategy for budget or horizon h; `h` also bounds the steps prepared by the scale strategies.
inline AnyStrategy make_strategy(StrategyKind kind, const ArmSet& arms, int h) {
    switch (kind) {
        case StrategyKind::greedy_ratio: return GreedyRatio(arms, h);
        case StrategyKind::persistent: return Persistent(arms, h);
        case StrategyKind::gittins_greedy: return GittinsGreedy(arms, h);
        case StrategyKind::exploit_best: return ExploitBest(arms);
        case StrategyKind::ratio_switch: return RatioSwitch(arms, h);
        case StrategyKind::gittins_switch: return GittinsSwitch(arms, h);
        case StrategyKind::ratio_scale: return RatioScale(arms, h);
        case StrategyKind::gittins_scale: return GittinsScale(arms, h);
    }
    throw std::invalid_argument("unknown strategy kind");
}

}  // namespace budgeted
