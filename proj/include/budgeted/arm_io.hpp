#pragma once

#include "budgeted/arm_model.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace budgeted {

using json = nlohmann::json;

/// Malformed input; `location()` is "line L, column C" or a field path such as "nodes[2].zeta".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& location, const std::string& what)
        : std::runtime_error(location + ": " + what), location_(location) {}
    const std::string& location() const { return location_; }

private:
    std::string location_;
};

namespace detail {

// DOM builder that keeps floating-point literals as their source text, so that
// decimal rationals such as 0.1 convert exactly.
class ExactNumberSax {
public:
    bool null() { return put(json(nullptr)); }
    bool boolean(bool v) { return put(json(v)); }
    bool number_integer(json::number_integer_t v) { return put(json(v)); }
    bool number_unsigned(json::number_unsigned_t v) { return put(json(v)); }
    bool number_float(json::number_float_t, const json::string_t& text) { return put(json(text)); }
    bool string(json::string_t& v) { return put(json(v)); }
    bool binary(json::binary_t& v) { return put(json(v)); }
    bool start_object(std::size_t) {
        stack_.push_back(json::object());
        keys_.emplace_back();
        return true;
    }
    bool key(json::string_t& k) {
        keys_.back() = k;
        return true;
    }
    bool end_object() { return close(); }
    bool start_array(std::size_t) {
        stack_.push_back(json::array());
        keys_.emplace_back();
        return true;
    }
    bool end_array() { return close(); }
    bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& ex) {
        error_position_ = position;
        error_message_ = ex.what();
        return false;
    }

    json result;
    std::size_t error_position_ = 0;
    std::string error_message_;

private:
    bool put(json v) {
        if (stack_.empty()) {
            result = std::move(v);
        } else if (stack_.back().is_array()) {
            stack_.back().push_back(std::move(v));
        } else {
            stack_.back()[keys_.back()] = std::move(v);
        }
        return true;
    }
    bool close() {
        json done = std::move(stack_.back());
        stack_.pop_back();
        keys_.pop_back();
        return put(std::move(done));
    }

    std::vector<json> stack_;
    std::vector<std::string> keys_;
};

inline std::string line_column(const std::string& text, std::size_t position) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < position && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace detail

/// Parses JSON text; floating literals are kept as strings for exact conversion.
inline json parse_json_exact(const std::string& text) {
    detail::ExactNumberSax sax;
    if (!json::sax_parse(text, &sax))
        throw ParseError(detail::line_column(text, sax.error_position_), sax.error_message_);
    return std::move(sax.result);
}

/// Rational field: "num/den" string, decimal string or literal, or integer.
inline Rational rational_field(const json& v, const std::string& where) {
    try {
        if (v.is_string()) return parse_rational(v.get<std::string>());
        if (v.is_number_integer()) return Rational(mpz_class(v.dump(), 10));
    } catch (const std::invalid_argument& e) {
        throw ParseError(where, e.what());
    }
    throw ParseError(where, "expected a rational (\"num/den\" or decimal), got " + v.dump());
}

inline long integer_field(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ParseError(where, "expected an integer, got " + v.dump());
    return v.get<long>();
}

inline const json& required(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where.empty() ? key : where + "." + key, "missing field");
    return *it;
}

inline std::string id_field(const json& v, const std::string& where) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return v.dump();
    throw ParseError(where, "expected a node id (string or integer)");
}

/// Builds an arm from the arm-spec object (explicit nodes or the beta_bernoulli shorthand).
inline ArmDag arm_from_json(const json& spec, const std::string& where = "") {
    auto field = [&](const std::string& f) { return where.empty() ? f : where + "." + f; };
    if (!spec.is_object()) throw ParseError(where.empty() ? "<root>" : where, "arm spec must be an object");

    if (spec.contains("beta_bernoulli")) {
        const json& ab = spec["beta_bernoulli"];
        if (!ab.is_array() || ab.size() != 2) throw ParseError(field("beta_bernoulli"), "expected [alpha, beta]");
        const long a = integer_field(ab[0], field("beta_bernoulli[0]"));
        const long b = integer_field(ab[1], field("beta_bernoulli[1]"));
        const long d = integer_field(required(spec, "depth", where), field("depth"));
        if (a <= 0 || b <= 0) throw ParseError(field("beta_bernoulli"), "alpha and beta must be positive");
        if (d < 0) throw ParseError(field("depth"), "depth must be nonnegative");
        return beta_bernoulli_arm(a, b, static_cast<int>(d));
    }

    const json& jnodes = required(spec, "nodes", where);
    if (!jnodes.is_array() || jnodes.empty()) throw ParseError(field("nodes"), "expected a nonempty array");

    std::unordered_map<std::string, NodeId> index;
    for (std::size_t i = 0; i < jnodes.size(); ++i) {
        const std::string w = field("nodes[" + std::to_string(i) + "]");
        std::string id = id_field(required(jnodes[i], "id", w), w + ".id");
        if (!index.emplace(id, i).second) throw ParseError(w + ".id", "duplicate node id " + id);
    }

    std::vector<ArmNode> nodes(jnodes.size());
    int max_layer = 0;
    for (std::size_t i = 0; i < jnodes.size(); ++i) {
        const json& jn = jnodes[i];
        const std::string w = field("nodes[" + std::to_string(i) + "]");
        ArmNode& n = nodes[i];
        n.id = id_field(jn["id"], w + ".id");
        n.layer = static_cast<int>(integer_field(required(jn, "layer", w), w + ".layer"));
        n.zeta = rational_field(required(jn, "zeta", w), w + ".zeta");
        max_layer = std::max(max_layer, n.layer);
        if (auto it = jn.find("edges"); it != jn.end()) {
            if (!it->is_array()) throw ParseError(w + ".edges", "expected an array");
            for (std::size_t k = 0; k < it->size(); ++k) {
                const json& je = (*it)[k];
                const std::string we = w + ".edges[" + std::to_string(k) + "]";
                const std::string to = id_field(required(je, "to", we), we + ".to");
                auto target = index.find(to);
                if (target == index.end()) throw ParseError(we + ".to", "unknown node id " + to);
                ArmEdge e{target->second, rational_field(required(je, "p", we), we + ".p"), Outcome::none};
                if (auto o = je.find("outcome"); o != je.end()) {
                    if (*o == "success")
                        e.outcome = Outcome::success;
                    else if (*o == "failure")
                        e.outcome = Outcome::failure;
                    else
                        throw ParseError(we + ".outcome", "expected \"success\" or \"failure\"");
                }
                n.edges.push_back(std::move(e));
            }
        }
    }

    const std::string root = id_field(required(spec, "root", where), field("root"));
    auto r = index.find(root);
    if (r == index.end()) throw ParseError(field("root"), "unknown node id " + root);
    int depth = max_layer;
    if (spec.contains("depth_bound")) depth = static_cast<int>(integer_field(spec["depth_bound"], field("depth_bound")));
    if (depth < 0) throw ParseError(field("depth_bound"), "must be nonnegative");
    return ArmDag(std::move(nodes), r->second, depth);
}

inline ArmDag parse_arm(const std::string& text) { return arm_from_json(parse_json_exact(text)); }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Loads an arm-spec file. Invariant violations are not checked here; run validate().
inline ArmDag load_arm(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return parse_arm(text);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.location(), std::string(e.what()).substr(e.location().size() + 2));
    }
}

inline json arm_to_json(const ArmDag& dag) {
    json jnodes = json::array();
    for (const auto& n : dag.nodes()) {
        json edges = json::array();
        for (const auto& e : n.edges) {
            json je{{"to", dag.node(e.to).id}, {"p", to_string(e.p)}};
            if (e.outcome != Outcome::none) je["outcome"] = e.outcome == Outcome::success ? "success" : "failure";
            edges.push_back(std::move(je));
        }
        jnodes.push_back({{"id", n.id}, {"layer", n.layer}, {"zeta", to_string(n.zeta)}, {"edges", std::move(edges)}});
    }
    return {{"root", dag.node(dag.root()).id}, {"depth_bound", dag.depth_bound()}, {"nodes", std::move(jnodes)}};
}

inline void serialize_arm(const ArmDag& dag, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << arm_to_json(dag).dump(2) << '\n';
}

}  // namespace budgeted
