// trees.hpp -- canonical edge-labeled terms (system call dependency trees)
#ifndef SIGTREE_TREES_HPP
#define SIGTREE_TREES_HPP

#include <compare>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sigtree {

// Edge label: either a parameter position or a data flow n>m between
// parameter positions of two calls. Param sorts before Flow; within a
// kind the indices decide. Indices are 1-based.
struct Color {
    enum Kind : uint8_t { Param = 0, Flow = 1 };

    Kind kind = Param;
    int n = 1;
    int m = 0;  // only meaningful for Flow

    static Color param(int n) { return Color{Param, n, 0}; }
    static Color flow(int n, int m) { return Color{Flow, n, m}; }

    friend auto operator<=>(const Color&, const Color&) = default;
};

// Edge labeled tree over (symbols, colors). Nodes carry a symbol (an API
// name or a literal value); every child edge carries a Color. A tree is in
// canonical form when every children list is strictly ascending by
// (Color, subtree) under the term order, recursively. Most operations
// below require canonical inputs; canonicalize() establishes the form.
struct Scdt {
    std::string root;
    std::vector<std::pair<Color, Scdt>> children;

    Scdt() = default;
    explicit Scdt(std::string symbol) : root(std::move(symbol)) {}
    Scdt(std::string symbol, std::vector<std::pair<Color, Scdt>> kids)
        : root(std::move(symbol)), children(std::move(kids)) {}

    bool leaf() const { return children.empty(); }
    size_t node_count() const;
};

enum class Ordering { LT, EQ, GT };

// Total term order: root symbols lexicographically, then children lists
// lexicographically by (Color, subtree); a shorter children list precedes
// on tie.
Ordering order(const Scdt& a, const Scdt& b);

bool operator==(const Scdt& a, const Scdt& b);
bool operator<(const Scdt& a, const Scdt& b);

bool is_canonical(const Scdt& t);

// Sorts children recursively and drops duplicate (Color, subtree) pairs.
Scdt canonicalize(const Scdt& raw);

// Adds c(t) as a child of into's root, keeping the canonical form; a child
// equal to c(t) is overwritten (no duplicates).
Scdt insert_subtree(const Color& c, const Scdt& t, const Scdt& into);

// Exact-node containment: some node of hay equals t.
bool subtree_of(const Scdt& t, const Scdt& hay);

// Embedded containment used by mining and detection: pattern matches at a
// node when the roots agree and the pattern's colored children map
// injectively to distinct children of the node (equal color, recursive
// embed); the node may have arbitrary extra children and the match may
// anchor anywhere in hay.
bool embedded_in(const Scdt& pattern, const Scdt& hay);

struct CapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All embedded subtree patterns of t: pick a node, keep any subset of its
// children, reduce the kept children recursively. Throws CapExceeded when
// the pattern count passes `cap`.
std::set<Scdt> enumerate_subtrees(const Scdt& t, size_t cap = 1000000);

// Samples one tree that contains t embedded: sprinkles up to `budget`
// extra colored children over the nodes of t and wraps the result in a
// random environment. Deterministic for a fixed seed; budget 0 returns t.
Scdt omega_sample(const Scdt& t, uint64_t seed, size_t budget);

// Textual form: Root(color(child),...), Param(n) rendered as "n" and
// Flow(n,m) as "n>m", e.g. GetModuleFileName(1(0),2>1(CopyFile)).
std::string render(const Scdt& t);

struct TreeFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses the render() form; rejects trailing garbage.
Scdt parse_tree(std::string_view text);

}  // namespace sigtree

#endif
