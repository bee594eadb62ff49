#include "sigtree/pds.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <stdexcept>

namespace sigtree {

ControlPoint Pds::intern_point(std::string_view name) {
    if (auto it = point_index_.find(name); it != point_index_.end())
        return ControlPoint{it->second};
    uint32_t idx = uint32_t(point_names_.size());
    point_names_.emplace_back(name);
    point_index_.emplace(std::string(name), idx);
    return ControlPoint{idx};
}

std::optional<ControlPoint> Pds::find_point(std::string_view name) const {
    if (auto it = point_index_.find(name); it != point_index_.end())
        return ControlPoint{it->second};
    return std::nullopt;
}

StackSym Pds::intern_literal(std::string_view text) {
    auto key = std::make_pair(int(SymKind::Literal), std::string(text));
    if (auto it = symbol_index_.find(key); it != symbol_index_.end())
        return StackSym{it->second};
    uint32_t idx = uint32_t(symbols_.size());
    symbols_.push_back({SymKind::Literal, std::string(text), 0});
    symbol_index_.emplace(std::move(key), idx);
    return StackSym{idx};
}

StackSym Pds::intern_return(ControlPoint target) {
    auto key = std::make_pair(int(SymKind::ReturnAddress), point_name(target));
    if (auto it = symbol_index_.find(key); it != symbol_index_.end())
        return StackSym{it->second};
    uint32_t idx = uint32_t(symbols_.size());
    symbols_.push_back({SymKind::ReturnAddress, point_name(target), target.index});
    symbol_index_.emplace(std::move(key), idx);
    return StackSym{idx};
}

StackSym Pds::top_unknown() {
    auto key = std::make_pair(int(SymKind::TopUnknown), std::string());
    if (auto it = symbol_index_.find(key); it != symbol_index_.end())
        return StackSym{it->second};
    uint32_t idx = uint32_t(symbols_.size());
    symbols_.push_back({SymKind::TopUnknown, "", 0});
    symbol_index_.emplace(std::move(key), idx);
    return StackSym{idx};
}

std::optional<StackSym> Pds::find_top_unknown() const {
    auto key = std::make_pair(int(SymKind::TopUnknown), std::string());
    if (auto it = symbol_index_.find(key); it != symbol_index_.end())
        return StackSym{it->second};
    return std::nullopt;
}

void Pds::add_rule(ControlPoint from, StackSym top, ControlPoint to,
                   std::vector<StackSym> push) {
    if (from.index >= point_names_.size() || to.index >= point_names_.size() ||
        top.index >= symbols_.size())
        throw std::out_of_range("rule references undeclared point or symbol");
    if (push.size() <= 2) {
        rules_.push_back({from, top, to, std::move(push)});
        return;
    }
    // split <from,top> -> <to, s1..sn> (s1 on top) into a push-2 chain that
    // lays down the deepest pair first:
    //   <from,top> -> <q, s[n-2] s[n-1]>, <q, s[n-2]> -> <q', s[n-3] s[n-2]>, ...
    std::string base = "#push" + std::to_string(rules_.size());
    ControlPoint at = from;
    StackSym match = top;
    for (size_t i = push.size() - 2; i >= 1; --i) {
        ControlPoint fresh = intern_point(base + "." + std::to_string(i));
        rules_.push_back({at, match, fresh, {push[i], push[i + 1]}});
        at = fresh;
        match = push[i];
    }
    rules_.push_back({at, match, to, {push[0], push[1]}});
}

const std::string& Pds::point_name(ControlPoint p) const {
    return point_names_.at(p.index);
}

const std::string& Pds::symbol_text(StackSym s) const { return symbols_.at(s.index).text; }

SymKind Pds::symbol_kind(StackSym s) const { return symbols_.at(s.index).kind; }

ControlPoint Pds::return_target(StackSym s) const {
    const SymbolInfo& info = symbols_.at(s.index);
    if (info.kind != SymKind::ReturnAddress)
        throw std::logic_error("symbol is not a return address");
    return ControlPoint{info.target};
}

std::string Pds::symbol_display(StackSym s) const {
    const SymbolInfo& info = symbols_.at(s.index);
    switch (info.kind) {
        case SymKind::Literal: return info.text;
        case SymKind::ReturnAddress: return "<ret:" + info.text + ">";
        case SymKind::TopUnknown: return "<top>";
    }
    return "?";
}

std::string Pds::dump() const {
    std::vector<std::string> lines;
    for (const PdsRule& r : rules_) {
        std::ostringstream line;
        line << "<" << point_name(r.from) << ", " << symbol_display(r.top) << "> -> <"
             << point_name(r.to) << ",";
        if (r.push.empty()) line << " eps";
        for (StackSym s : r.push) line << " " << symbol_display(s);
        line << ">";
        lines.push_back(line.str());
    }
    std::sort(lines.begin(), lines.end());
    std::ostringstream out;
    for (const std::string& l : lines) out << l << "\n";
    return out.str();
}

std::string render_config(const Pds& pds, const Config& c) {
    std::ostringstream out;
    out << "<" << pds.point_name(c.point) << ",";
    if (c.stack.empty()) out << " eps";
    for (StackSym s : c.stack) out << " " << pds.symbol_display(s);
    out << ">";
    return out.str();
}

MultiAutomaton::MultiAutomaton(const Pds& pds)
    : initial_count_(pds.point_count()), state_count_(pds.point_count()) {}

MultiAutomaton::State MultiAutomaton::add_state() {
    return State(state_count_++);
}

void MultiAutomaton::add_transition(State from, StackSym sym, State to) {
    if (from >= state_count_ || to >= state_count_)
        throw std::out_of_range("transition references undeclared state");
    transitions_.insert({from, sym, to});
}

void MultiAutomaton::mark_final(State s) {
    if (s >= state_count_) throw std::out_of_range("final state undeclared");
    finals_.insert(s);
}

bool MultiAutomaton::accepts(const Config& c) const {
    if (c.point.index >= initial_count_)
        throw std::out_of_range("configuration control point unknown to automaton");
    std::set<State> frontier{c.point.index};
    for (StackSym sym : c.stack) {
        std::set<State> next;
        for (State q : frontier) {
            auto lo = transitions_.lower_bound({q, sym, 0});
            for (auto it = lo; it != transitions_.end(); ++it) {
                const auto& [from, s, to] = *it;
                if (from != q || s != sym) break;
                next.insert(to);
            }
        }
        frontier = std::move(next);
        if (frontier.empty()) return false;
    }
    for (State q : frontier)
        if (finals_.count(q)) return true;
    return false;
}

std::vector<std::pair<std::vector<StackSym>, MultiAutomaton::State>>
MultiAutomaton::words_from(ControlPoint p, size_t len) const {
    if (p.index >= initial_count_)
        throw std::out_of_range("control point unknown to automaton");
    std::set<std::pair<std::vector<StackSym>, State>> acc;
    std::vector<StackSym> word;
    auto walk = [&](auto&& self, State at, size_t left) -> void {
        if (left == 0) {
            acc.insert({word, at});
            return;
        }
        auto lo = transitions_.lower_bound({at, StackSym{0}, 0});
        for (auto it = lo; it != transitions_.end(); ++it) {
            const auto& [from, s, to] = *it;
            if (from != at) break;
            word.push_back(s);
            self(self, to, left - 1);
            word.pop_back();
        }
    };
    walk(walk, p.index, len);
    return {acc.begin(), acc.end()};
}

std::set<MultiAutomaton::State> MultiAutomaton::coaccessible() const {
    std::map<State, std::vector<State>> rev;
    for (const auto& [from, s, to] : transitions_) rev[to].push_back(from);
    std::set<State> seen(finals_);
    std::vector<State> work(finals_.begin(), finals_.end());
    while (!work.empty()) {
        State q = work.back();
        work.pop_back();
        for (State pre : rev[q])
            if (seen.insert(pre).second) work.push_back(pre);
    }
    return seen;
}

MultiAutomaton MultiAutomaton::accepting(const Pds& pds, std::span<const Config> configs) {
    MultiAutomaton ma(pds);
    for (const Config& c : configs) {
        if (c.point.index >= pds.point_count())
            throw std::out_of_range("seed configuration point not in pds");
        if (c.stack.empty()) {
            ma.mark_final(c.point.index);
            continue;
        }
        State at = c.point.index;
        for (StackSym sym : c.stack) {
            State next = ma.add_state();
            ma.add_transition(at, sym, next);
            at = next;
        }
        ma.mark_final(at);
    }
    return ma;
}

MultiAutomaton MultiAutomaton::accepting_padded(const Pds& pds, ControlPoint point,
                                                std::span<const StackSym> prefix,
                                                StackSym pad) {
    MultiAutomaton ma(pds);
    State at = point.index;
    for (StackSym sym : prefix) {
        State next = ma.add_state();
        ma.add_transition(at, sym, next);
        at = next;
    }
    ma.mark_final(at);
    State sink = ma.add_state();
    ma.add_transition(at, pad, sink);
    ma.add_transition(sink, pad, sink);
    ma.mark_final(sink);
    return ma;
}

std::string MultiAutomaton::dump(const Pds& pds) const {
    auto state_name = [&](State q) {
        if (q < initial_count_) return pds.point_name(ControlPoint{q});
        return "s" + std::to_string(q);
    };
    std::vector<std::string> lines;
    for (const auto& [from, s, to] : transitions_)
        lines.push_back(state_name(from) + " -" + pds.symbol_display(s) + "-> " +
                        state_name(to));
    std::sort(lines.begin(), lines.end());
    std::ostringstream out;
    for (const std::string& l : lines) out << l << "\n";
    out << "finals:";
    for (State q : finals_) out << " " << state_name(q);
    out << "\n";
    return out.str();
}

namespace {

void check_normalized(const Pds& pds) {
    for (const PdsRule& r : pds.rules())
        if (r.push.size() > 2)
            throw std::invalid_argument("pds has un-normalized rules (push length > 2)");
}

void check_seed(const MultiAutomaton& seed) {
    for (const auto& [from, s, to] : seed.transitions())
        if (to < seed.initial_count())
            throw std::invalid_argument("seed automaton has transitions into initial states");
}

}  // namespace

MultiAutomaton post_star(const Pds& pds, const MultiAutomaton& seed) {
    check_normalized(pds);
    check_seed(seed);
    MultiAutomaton ma = seed;

    // one auxiliary state per distinct (to, first-pushed) of push-2 rules,
    // allocated up front in rule order so numbering is deterministic
    std::map<std::pair<uint32_t, uint32_t>, MultiAutomaton::State> aux;
    for (const PdsRule& r : pds.rules()) {
        if (r.push.size() != 2) continue;
        auto key = std::make_pair(r.to.index, r.push[0].index);
        if (!aux.count(key)) aux.emplace(key, ma.add_state());
    }

    // saturate: pop rules record eps-pairs (p', q) meaning p' accepts
    // whatever q accepts; pairs are folded into direct transitions and
    // final marks inside the same fixpoint
    std::set<std::pair<MultiAutomaton::State, MultiAutomaton::State>> eps;
    std::set<std::tuple<MultiAutomaton::State, StackSym, MultiAutomaton::State>> trans(
        ma.transitions());
    std::set<MultiAutomaton::State> finals(ma.finals());

    bool changed = true;
    while (changed) {
        changed = false;
        auto insert_trans = [&](MultiAutomaton::State f, StackSym s,
                                MultiAutomaton::State t) {
            if (trans.insert({f, s, t}).second) changed = true;
        };
        for (const PdsRule& r : pds.rules()) {
            std::vector<MultiAutomaton::State> targets;
            auto lo = trans.lower_bound({r.from.index, r.top, 0});
            for (auto it = lo; it != trans.end(); ++it) {
                const auto& [from, s, to] = *it;
                if (from != r.from.index || s != r.top) break;
                targets.push_back(to);
            }
            for (MultiAutomaton::State q : targets) {
                switch (r.push.size()) {
                    case 0:
                        if (eps.insert({r.to.index, q}).second) changed = true;
                        break;
                    case 1:
                        insert_trans(r.to.index, r.push[0], q);
                        break;
                    case 2: {
                        auto mid = aux.at({r.to.index, r.push[0].index});
                        insert_trans(r.to.index, r.push[0], mid);
                        insert_trans(mid, r.push[1], q);
                        break;
                    }
                }
            }
        }
        for (const auto& [x, q] : eps) {
            if (finals.count(q) && finals.insert(x).second) changed = true;
            std::vector<std::pair<StackSym, MultiAutomaton::State>> outs;
            auto lo = trans.lower_bound({q, StackSym{0}, 0});
            for (auto it = lo; it != trans.end(); ++it) {
                const auto& [from, s, to] = *it;
                if (from != q) break;
                outs.emplace_back(s, to);
            }
            for (const auto& [s, to] : outs) insert_trans(x, s, to);
        }
    }

    for (const auto& [f, s, t] : trans) ma.add_transition(f, s, t);
    for (MultiAutomaton::State q : finals) ma.mark_final(q);
    return ma;
}

MultiAutomaton pre_star(const Pds& pds, const MultiAutomaton& seed) {
    check_normalized(pds);
    MultiAutomaton ma = seed;
    std::set<std::tuple<MultiAutomaton::State, StackSym, MultiAutomaton::State>> trans(
        ma.transitions());

    auto step = [&](MultiAutomaton::State at, StackSym s,
                    std::vector<MultiAutomaton::State>& out) {
        auto lo = trans.lower_bound({at, s, 0});
        for (auto it = lo; it != trans.end(); ++it) {
            const auto& [from, sym, to] = *it;
            if (from != at || sym != s) break;
            out.push_back(to);
        }
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (const PdsRule& r : pds.rules()) {
            std::vector<MultiAutomaton::State> ends;
            if (r.push.empty()) {
                ends.push_back(r.to.index);
            } else if (r.push.size() == 1) {
                step(r.to.index, r.push[0], ends);
            } else {
                std::vector<MultiAutomaton::State> mids;
                step(r.to.index, r.push[0], mids);
                for (auto mid : mids) step(mid, r.push[1], ends);
            }
            for (auto q : ends)
                if (trans.insert({r.from.index, r.top, q}).second) changed = true;
        }
    }

    for (const auto& [f, s, t] : trans) ma.add_transition(f, s, t);
    return ma;
}

}  // namespace sigtree
