#pragma once

#include "budgeted/arm_io.hpp"
#include "budgeted/system.hpp"

#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace budgeted {

/// Nonincreasing weights Lambda_0 = 1 >= Lambda_1 >= ... applied to per-step rewards.
class DiscountSequence {
public:
    enum class Kind { geometric, horizon, explicit_list };

    static DiscountSequence geometric(double theta) {
        if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("geometric discount: theta must lie in (0,1)");
        DiscountSequence d(Kind::geometric);
        d.theta_ = theta;
        return d;
    }
    static DiscountSequence horizon(int h) {
        if (h < 0) throw std::invalid_argument("horizon discount: h must be nonnegative");
        DiscountSequence d(Kind::horizon);
        d.h_ = h;
        return d;
    }
    /// Values beyond the list are 0; the list must start at 1, never increase and end in 0.
    static DiscountSequence explicit_values(std::vector<double> values) {
        if (values.empty() || values.front() != 1.0) throw std::invalid_argument("explicit discount: first weight must be 1");
        for (std::size_t t = 1; t < values.size(); ++t)
            if (values[t] > values[t - 1]) throw std::invalid_argument("explicit discount: weights increase at t=" + std::to_string(t));
        if (values.back() != 0.0) throw std::invalid_argument("explicit discount: list must end in 0");
        if (values.back() < 0.0) throw std::invalid_argument("explicit discount: negative weight");
        DiscountSequence d(Kind::explicit_list);
        d.values_ = std::move(values);
        return d;
    }

    Kind kind() const { return kind_; }
    double theta() const { return theta_; }

    double at(std::size_t t) const {
        switch (kind_) {
            case Kind::geometric: return std::pow(theta_, static_cast<double>(t));
            case Kind::horizon: return t < static_cast<std::size_t>(h_) ? 1.0 : 0.0;
            case Kind::explicit_list: return t < values_.size() ? values_[t] : 0.0;
        }
        return 0.0;
    }

private:
    explicit DiscountSequence(Kind k) : kind_(k) {}
    Kind kind_;
    double theta_ = 0.0;
    int h_ = 0;
    std::vector<double> values_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of trial i: a fixed function of (seed, i), independent of scheduling.
inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) { return splitmix64(splitmix64(seed) ^ trial); }

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Index of the edge of u selected by the uniform draw x; zero-probability edges are never selected.
inline std::size_t sample_edge(const ArmDag& dag, NodeId u, double x) {
    const auto& edges = dag.node(u).edges;
    double acc = 0.0;
    std::size_t last = edges.size();
    for (std::size_t k = 0; k < edges.size(); ++k) {
        if (edges[k].p == 0) continue;
        last = k;
        acc += to_double(edges[k].p);
        if (x < acc) return k;
    }
    if (last == edges.size()) throw std::logic_error("sample_edge: no live edge at " + dag.node(u).id);
    return last;
}

/**
 * Reward of one play of u that moves along edge `edge` (nullopt for a leaf).
 * Arms whose edges carry success/failure outcomes pay 1 or 0; every other play
 * pays zeta(u).
 */
inline double reward_realization(const ArmDag& dag, NodeId u, std::optional<std::size_t> edge) {
    if (edge) {
        const Outcome o = dag.node(u).edges.at(*edge).outcome;
        if (o == Outcome::success) return 1.0;
        if (o == Outcome::failure) return 0.0;
    }
    return to_double(dag.zeta(u));
}

struct TraceStep {
    int t;
    Action action;
    NodeId node;
    NodeId next_node;
    double reward;
};

struct EpisodeTrace {
    std::uint64_t seed = 0;
    std::vector<TraceStep> steps;
    double profit = 0.0;  ///< budgeted: zeta of the exploited state; otherwise the weighted reward sum
};

struct EvalMode {
    Mode mode = Mode::budgeted;
    int h = 0;
};

namespace detail {

// Source of uniform draws: a trial RNG, or per-arm tapes indexed by how often the arm was moved.
struct DrawSource {
    std::mt19937_64* rng = nullptr;
    const std::vector<std::vector<double>>* tape = nullptr;
    std::vector<std::size_t> used;

    double next(std::size_t arm) {
        if (rng) return uniform01(*rng);
        if (used.size() <= arm) used.resize(arm + 1);
        const auto& row = tape->at(arm);
        if (used[arm] >= row.size()) throw std::out_of_range("outcome tape exhausted for arm " + std::to_string(arm));
        return row[used[arm]++];
    }
};

// Moves arm a.arm one step, returning the realized reward.
inline double advance(const ArmSet& arms, SystemState& s, std::size_t arm, DrawSource& draws, EpisodeTrace* trace,
                      const Action& a) {
    const ArmDag& dag = *arms.at(arm);
    const NodeId u = s.arm_states[arm];
    std::optional<std::size_t> edge;
    if (!dag.is_leaf(u)) edge = sample_edge(dag, u, draws.next(arm));
    const NodeId v = edge ? dag.node(u).edges[*edge].to : u;
    const double r = reward_realization(dag, u, edge);
    if (trace) trace->steps.push_back({s.step, a, u, v, r});
    s.arm_states[arm] = v;
    --s.remaining_budget;
    ++s.step;
    return r;
}

template <Strategy S>
double run_episode(S strategy, const ArmSet& arms, const EvalMode& m, const DiscountSequence* weights, DrawSource draws,
                   EpisodeTrace* trace) {
    SystemState s = initial_state(arms, m.h);
    if (m.mode == Mode::budgeted) {
        for (;;) {
            const Action a = strategy.act(s);
            if (a.kind == Action::Kind::abandon) return 0.0;
            if (a.arm >= arms.size()) throw std::logic_error("strategy chose an arm out of range");
            if (a.kind == Action::Kind::exploit) {
                const double p = to_double(arms[a.arm]->zeta(s.arm_states[a.arm]));
                if (trace) trace->steps.push_back({s.step, a, s.arm_states[a.arm], s.arm_states[a.arm], p});
                return p;
            }
            if (s.remaining_budget <= 0) throw std::logic_error("strategy explored with no budget left");
            advance(arms, s, a.arm, draws, trace, a);
        }
    }
    double total = 0.0;
    for (int t = 0; t < m.h; ++t) {
        const Action a = strategy.act(s);
        if (a.kind == Action::Kind::abandon) break;
        if (a.arm >= arms.size()) throw std::logic_error("strategy chose an arm out of range");
        const double r = advance(arms, s, a.arm, draws, trace, a);
        total += (weights ? weights->at(static_cast<std::size_t>(t)) : 1.0) * r;
    }
    return total;
}

template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& body) {
    const std::size_t w = std::min<std::size_t>(std::max(1u, workers), n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < w; ++k)
        pool.emplace_back([&, k] {
            try {
                for (std::size_t i = k; i < n; i += w) body(i);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

struct SimulationResult {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t trials = 0;
    std::vector<EpisodeTrace> traces;  ///< filled only on request
    double tail_bound = 0.0;           ///< discounted runs: bound on the weight left past the evaluation horizon

    double standard_error() const { return stderr_; }
};

namespace detail {

template <Strategy S>
SimulationResult monte_carlo(const S& strategy, const ArmSet& arms, const EvalMode& m, const DiscountSequence* weights,
                             std::size_t trials, std::uint64_t seed, unsigned workers, bool keep_traces) {
    if (trials < 1) throw std::invalid_argument("simulate: trials must be >= 1");
    std::vector<double> values(trials);
    std::vector<EpisodeTrace> traces(keep_traces ? trials : 0);
    parallel_for(trials, workers, [&](std::size_t i) {
        const std::uint64_t ts = trial_seed(seed, i);
        std::mt19937_64 rng(ts);
        DrawSource draws;
        draws.rng = &rng;
        EpisodeTrace* tr = keep_traces ? &traces[i] : nullptr;
        values[i] = run_episode(strategy, arms, m, weights, draws, tr);
        if (tr) {
            tr->seed = ts;
            tr->profit = values[i];
        }
    });
    SimulationResult out;
    out.trials = trials;
    // Summing offsets from the first value keeps a constant sample exact.
    const double pivot = values.front();
    double offset = 0.0;
    for (double v : values) offset += v - pivot;
    out.mean = pivot + offset / static_cast<double>(trials);
    if (trials > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.stderr_ = std::sqrt(ss / static_cast<double>(trials - 1) / static_cast<double>(trials));
    }
    out.traces = std::move(traces);
    return out;
}

}  // namespace detail

/**
 * Monte Carlo estimate of a strategy's value. Trial i draws from an RNG
 * seeded by trial_seed(seed, i) and the per-trial values are summed in trial
 * order, so the result does not depend on `workers`.
 */
template <Strategy S>
SimulationResult simulate(const S& strategy, const ArmSet& arms, const EvalMode& m, std::size_t trials,
                          std::uint64_t seed, unsigned workers = 1, bool keep_traces = false) {
    return detail::monte_carlo(strategy, arms, m, nullptr, trials, seed, workers, keep_traces);
}

inline double max_zeta(const ArmSet& arms) {
    double best = 0.0;
    for (const auto& a : arms)
        for (const auto& n : a->nodes()) best = std::max(best, to_double(n.zeta));
    return best;
}

/// Estimate of sum_{t < eval_horizon} Lambda_t r(t).
template <Strategy S>
SimulationResult discounted_value(const S& strategy, const ArmSet& arms, const DiscountSequence& weights,
                                  int eval_horizon, std::size_t trials, std::uint64_t seed, unsigned workers = 1,
                                  bool keep_traces = false) {
    if (eval_horizon < 0) throw std::invalid_argument("discounted_value: negative evaluation horizon");
    double tail = 0.0;
    if (weights.kind() == DiscountSequence::Kind::geometric) {
        tail = weights.at(static_cast<std::size_t>(eval_horizon)) * max_zeta(arms) / (1.0 - weights.theta());
    } else if (weights.at(static_cast<std::size_t>(eval_horizon)) > 0.0) {
        throw std::invalid_argument("discounted_value: evaluation horizon does not cover the discount sequence");
    }
    SimulationResult out = detail::monte_carlo(strategy, arms, {Mode::horizon, eval_horizon}, &weights, trials, seed,
                                               workers, keep_traces);
    out.tail_bound = tail;
    return out;
}

/// Per-arm sequences of uniforms; the k-th move of arm i consumes tape[i][k].
using OutcomeTape = std::vector<std::vector<double>>;

inline OutcomeTape make_tape(std::size_t arms, int length, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    OutcomeTape tape(arms);
    for (auto& row : tape)
        for (int k = 0; k < length; ++k) row.push_back(uniform01(rng));
    return tape;
}

/// One episode driven by an outcome tape instead of a trial RNG.
template <Strategy S>
EpisodeTrace run_on_tape(const S& strategy, const ArmSet& arms, const EvalMode& m, const OutcomeTape& tape) {
    EpisodeTrace trace;
    detail::DrawSource draws;
    draws.tape = &tape;
    trace.profit = detail::run_episode(strategy, arms, m, nullptr, draws, &trace);
    return trace;
}

/// Arms explored during a budgeted episode, in order.
inline std::vector<std::size_t> explored_arms(const EpisodeTrace& trace) {
    std::vector<std::size_t> out;
    for (const auto& s : trace.steps)
        if (s.action.kind == Action::Kind::explore) out.push_back(s.action.arm);
    return out;
}

inline json trace_to_json(const ArmSet& arms, const EpisodeTrace& trace) {
    json steps = json::array();
    for (const auto& s : trace.steps) {
        const ArmDag& dag = *arms.at(s.action.arm);
        steps.push_back({{"t", s.t},
                         {"arm", s.action.arm},
                         {"node_id", dag.node(s.node).id},
                         {"next_node_id", dag.node(s.next_node).id},
                         {"reward", s.reward}});
    }
    return {{"seed", trace.seed}, {"steps", std::move(steps)}, {"profit", trace.profit}};
}

}  // namespace budgeted
