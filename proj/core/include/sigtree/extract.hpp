// extract.hpp -- trim operator and system call dependency tree extraction
#ifndef SIGTREE_EXTRACT_HPP
#define SIGTREE_EXTRACT_HPP

#include <map>
#include <set>
#include <vector>

#include "sigtree/frontend.hpp"
#include "sigtree/pds.hpp"
#include "sigtree/trees.hpp"

namespace sigtree {

// Value matching policy for the flow predicate. Strict requires two equal
// precisely-known symbols (learning side); permissive also accepts a flow
// when either value is the unknown symbol (detection side).
enum class ValueMatching { Strict, Permissive };

struct ExtractionConfig {
    int height = 2;                              // maximum flow depth
    ValueMatching matching = ValueMatching::Strict;
    size_t node_cap = 10000;                     // per-extraction tree node budget
};

// Configurations at API entry points with exactly arity+1 stack symbols
// (return address plus the parameters).
struct TrimmedConfigs {
    std::vector<Config> configs;  // sorted, deduplicated
};

// Keeps the configurations <p, w> with p an API entry point and
// |w| = arity(p)+1 such that <p, w w'> is accepted for some suffix w'.
TrimmedConfigs trim(const MultiAutomaton& ma, const Pds& pds, const ApiTable& api);

// Flow predicate on parameter values: true when the value written at the
// origin can be the value read at the destination under the policy.
// Return-address symbols never carry data flows.
bool values_flow(const Pds& pds, StackSym origin_value, StackSym dest_value,
                 ValueMatching matching);

// One canonical tree per trimmed origin configuration of the model,
// deduplicated. All reachability queries pad the stack below the known
// prefix with the unknown symbol, modeling the unknown caller stack.
std::set<Scdt> extract_scdts(const ProgramModel& model, const ExtractionConfig& cfg);

// Builds the tree rooted at the origin's API: numeric parameter values
// become Param(n) leaves at every level; when height > 0, every data flow
// to another trimmed configuration adds a Flow(n,m) child built at
// height-1. Throws CapExceeded past cfg.node_cap.
Scdt build_scdt(const Config& origin, int height, const ProgramModel& model,
                const ExtractionConfig& cfg);

}  // namespace sigtree

#endif
