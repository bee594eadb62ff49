#include "sigtree/extract.hpp"

#include <algorithm>
#include <cctype>

namespace sigtree {

TrimmedConfigs trim(const MultiAutomaton& ma, const Pds& pds, const ApiTable& api) {
    TrimmedConfigs out;
    std::set<MultiAutomaton::State> live = ma.coaccessible();
    for (const auto& [point, entry] : api.entries()) {
        auto words = ma.words_from(point, size_t(entry.arity) + 1);
        for (const auto& [word, end] : words)
            if (live.count(end)) out.configs.push_back(Config{point, word});
    }
    std::sort(out.configs.begin(), out.configs.end());
    out.configs.erase(std::unique(out.configs.begin(), out.configs.end()),
                      out.configs.end());
    return out;
}

namespace {

bool numeric_literal(const Pds& pds, StackSym s) {
    if (pds.symbol_kind(s) != SymKind::Literal) return false;
    const std::string& text = pds.symbol_text(s);
    if (text.empty()) return false;
    for (char c : text)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace

bool values_flow(const Pds& pds, StackSym origin_value, StackSym dest_value,
                 ValueMatching matching) {
    SymKind ok = pds.symbol_kind(origin_value);
    SymKind dk = pds.symbol_kind(dest_value);
    if (ok == SymKind::ReturnAddress || dk == SymKind::ReturnAddress) return false;
    if (ok == SymKind::Literal && dk == SymKind::Literal)
        return origin_value == dest_value;
    // at least one side is the unknown symbol
    return matching == ValueMatching::Permissive;
}

namespace {

struct Extraction {
    const ProgramModel& model;
    const ExtractionConfig& cfg;
    size_t nodes_built = 0;
    // reachable trimmed configurations per origin; extraction replays
    // post* per configuration, which is pure and worth caching
    std::map<Config, TrimmedConfigs> reach_cache;
    std::map<std::pair<Config, int>, Scdt> tree_cache;

    Pds& pds() { return const_cast<Pds&>(model.pds); }

    const TrimmedConfigs& reachable_from(const Config& c) {
        auto it = reach_cache.find(c);
        if (it != reach_cache.end()) return it->second;
        StackSym pad = const_cast<Pds&>(model.pds).top_unknown();
        MultiAutomaton seed =
            MultiAutomaton::accepting_padded(model.pds, c.point, c.stack, pad);
        MultiAutomaton reach = post_star(model.pds, seed);
        return reach_cache.emplace(c, trim(reach, model.pds, model.api)).first->second;
    }

    void charge(size_t nodes) {
        nodes_built += nodes;
        if (nodes_built > cfg.node_cap)
            throw CapExceeded("tree extraction exceeded node cap");
    }

    Scdt build(const Config& origin, int height) {
        auto key = std::make_pair(origin, height);
        if (auto it = tree_cache.find(key); it != tree_cache.end()) return it->second;

        const ApiTable::Entry& entry = model.api.at(origin.point);
        Scdt tree(entry.name);
        charge(1);
        // parameter leaves: w[n] sits just below the return address
        for (int n = 1; n <= entry.arity; ++n) {
            StackSym value = origin.stack.at(size_t(n));
            if (!numeric_literal(model.pds, value)) continue;
            tree = insert_subtree(Color::param(n), Scdt(model.pds.symbol_text(value)),
                                  tree);
            charge(1);
        }
        if (height > 0) {
            for (const Config& dest : reachable_from(origin).configs) {
                if (dest == origin) continue;
                const ApiTable::Entry& dentry = model.api.at(dest.point);
                for (int n = 1; n <= entry.arity; ++n) {
                    if (!model.api.param_type(origin.point, n).can_out) continue;
                    for (int m = 1; m <= dentry.arity; ++m) {
                        if (!model.api.param_type(dest.point, m).can_in) continue;
                        if (!values_flow(model.pds, origin.stack.at(size_t(n)),
                                         dest.stack.at(size_t(m)), cfg.matching))
                            continue;
                        tree = insert_subtree(Color::flow(n, m), build(dest, height - 1),
                                              tree);
                    }
                }
            }
        }
        tree_cache.emplace(std::move(key), tree);
        return tree;
    }
};

}  // namespace

Scdt build_scdt(const Config& origin, int height, const ProgramModel& model,
                const ExtractionConfig& cfg) {
    Extraction ex{model, cfg};
    return ex.build(origin, height);
}

std::set<Scdt> extract_scdts(const ProgramModel& model, const ExtractionConfig& cfg) {
    Extraction ex{model, cfg};
    std::set<Scdt> out;
    const TrimmedConfigs& origins = ex.reachable_from(model.entry);
    for (const Config& origin : origins.configs)
        out.insert(ex.build(origin, cfg.height));
    return out;
}

}  // namespace sigtree
