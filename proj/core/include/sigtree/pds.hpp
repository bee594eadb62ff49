// pds.hpp -- pushdown systems, regular configuration sets, post*/pre* saturation
#ifndef SIGTREE_PDS_HPP
#define SIGTREE_PDS_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace sigtree {

struct ControlPoint {
    uint32_t index = 0;
    friend auto operator<=>(const ControlPoint&, const ControlPoint&) = default;
};

struct StackSym {
    uint32_t index = 0;
    friend auto operator<=>(const StackSym&, const StackSym&) = default;
};

enum class SymKind : uint8_t { Literal, ReturnAddress, TopUnknown };

// A transition rule <from, top> -> <to, push>; push words are kept at
// length <= 2, longer words are split at ingestion (see Pds::add_rule).
struct PdsRule {
    ControlPoint from;
    StackSym top;
    ControlPoint to;
    std::vector<StackSym> push;
};

// Configuration <point, stack>; stack front is the top symbol, epsilon is
// the empty vector.
struct Config {
    ControlPoint point;
    std::vector<StackSym> stack;
    friend auto operator<=>(const Config&, const Config&) = default;
};

// Pushdown system with interned control points and stack symbols. Symbol
// identity is (kind, text); numbering follows interning order, which makes
// serialization and saturation output deterministic.
class Pds {
public:
    ControlPoint intern_point(std::string_view name);
    std::optional<ControlPoint> find_point(std::string_view name) const;

    StackSym intern_literal(std::string_view text);
    StackSym intern_return(ControlPoint target);
    StackSym top_unknown();  // the distinguished unknown symbol
    std::optional<StackSym> find_top_unknown() const;

    // Splits push words longer than 2 into a chain through fresh control
    // points named after the rule, so stored rules always satisfy the
    // |push| <= 2 saturation precondition.
    void add_rule(ControlPoint from, StackSym top, ControlPoint to,
                  std::vector<StackSym> push);

    size_t point_count() const { return point_names_.size(); }
    size_t symbol_count() const { return symbols_.size(); }
    const std::vector<PdsRule>& rules() const { return rules_; }

    const std::string& point_name(ControlPoint p) const;
    const std::string& symbol_text(StackSym s) const;
    SymKind symbol_kind(StackSym s) const;
    // target control point of a return-address symbol
    ControlPoint return_target(StackSym s) const;
    std::string symbol_display(StackSym s) const;

    // one sorted line per rule
    std::string dump() const;

private:
    struct SymbolInfo {
        SymKind kind;
        std::string text;       // literal text or target point name
        uint32_t target = 0;    // ReturnAddress only
    };

    std::vector<std::string> point_names_;
    std::map<std::string, uint32_t, std::less<>> point_index_;
    std::vector<SymbolInfo> symbols_;
    std::map<std::pair<int, std::string>, uint32_t> symbol_index_;
    std::vector<PdsRule> rules_;
};

std::string render_config(const Pds& pds, const Config& c);

// Finite automaton over the stack alphabet; the first point_count() states
// are the control points of the owning Pds, extra states are appended.
class MultiAutomaton {
public:
    using State = uint32_t;

    explicit MultiAutomaton(const Pds& pds);

    State add_state();
    void add_transition(State from, StackSym sym, State to);
    void mark_final(State s);

    size_t state_count() const { return state_count_; }
    size_t initial_count() const { return initial_count_; }
    const std::set<std::tuple<State, StackSym, State>>& transitions() const {
        return transitions_;
    }
    const std::set<State>& finals() const { return finals_; }

    // true iff a path labeled c.stack leads from c.point to a final state;
    // throws std::out_of_range for a control point unknown to this
    // automaton (a malformed query, not a rejection)
    bool accepts(const Config& c) const;

    // all distinct words of exactly `len` symbols readable from p, paired
    // with their end states; sorted
    std::vector<std::pair<std::vector<StackSym>, State>> words_from(ControlPoint p,
                                                                    size_t len) const;

    // states from which some final state is reachable (including finals)
    std::set<State> coaccessible() const;

    // seed accepting exactly the given configurations (fresh chain per config)
    static MultiAutomaton accepting(const Pds& pds, std::span<const Config> configs);
    // seed accepting { <point, prefix . pad^j> | j >= 0 }
    static MultiAutomaton accepting_padded(const Pds& pds, ControlPoint point,
                                           std::span<const StackSym> prefix, StackSym pad);

    std::string dump(const Pds& pds) const;

    friend bool operator==(const MultiAutomaton& a, const MultiAutomaton& b) {
        return a.initial_count_ == b.initial_count_ && a.state_count_ == b.state_count_ &&
               a.transitions_ == b.transitions_ && a.finals_ == b.finals_;
    }

private:
    size_t initial_count_;
    size_t state_count_;
    std::set<std::tuple<State, StackSym, State>> transitions_;
    std::set<State> finals_;
};

// Forward reachability: returns an automaton accepting exactly
// post*(Conf(seed)). The seed must have no transitions into initial
// states (fresh-chain seeds built by accepting()/accepting_padded()
// satisfy this); violations throw std::invalid_argument.
MultiAutomaton post_star(const Pds& pds, const MultiAutomaton& seed);

// Backward reachability: accepts { c | exists c' in Conf(seed), c => c' }.
MultiAutomaton pre_star(const Pds& pds, const MultiAutomaton& seed);

}  // namespace sigtree

#endif
