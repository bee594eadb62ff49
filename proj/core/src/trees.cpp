#include "sigtree/trees.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <random>
#include <sstream>

namespace sigtree {

size_t Scdt::node_count() const {
    size_t n = 1;
    for (const auto& [c, sub] : children) n += sub.node_count();
    return n;
}

namespace {

Ordering cmp_color(const Color& a, const Color& b) {
    if (a < b) return Ordering::LT;
    if (b < a) return Ordering::GT;
    return Ordering::EQ;
}

}  // namespace

Ordering order(const Scdt& a, const Scdt& b) {
    if (int c = a.root.compare(b.root); c != 0)
        return c < 0 ? Ordering::LT : Ordering::GT;
    size_t n = std::min(a.children.size(), b.children.size());
    for (size_t i = 0; i < n; ++i) {
        Ordering c = cmp_color(a.children[i].first, b.children[i].first);
        if (c != Ordering::EQ) return c;
        c = order(a.children[i].second, b.children[i].second);
        if (c != Ordering::EQ) return c;
    }
    if (a.children.size() != b.children.size())
        return a.children.size() < b.children.size() ? Ordering::LT : Ordering::GT;
    return Ordering::EQ;
}

bool operator==(const Scdt& a, const Scdt& b) { return order(a, b) == Ordering::EQ; }
bool operator<(const Scdt& a, const Scdt& b) { return order(a, b) == Ordering::LT; }

namespace {

bool child_less(const std::pair<Color, Scdt>& a, const std::pair<Color, Scdt>& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
}

bool child_eq(const std::pair<Color, Scdt>& a, const std::pair<Color, Scdt>& b) {
    return a.first == b.first && a.second == b.second;
}

}  // namespace

bool is_canonical(const Scdt& t) {
    for (size_t i = 0; i < t.children.size(); ++i) {
        if (i > 0 && !child_less(t.children[i - 1], t.children[i])) return false;
        if (!is_canonical(t.children[i].second)) return false;
    }
    return true;
}

Scdt canonicalize(const Scdt& raw) {
    Scdt out(raw.root);
    out.children.reserve(raw.children.size());
    for (const auto& [c, sub] : raw.children)
        out.children.emplace_back(c, canonicalize(sub));
    std::sort(out.children.begin(), out.children.end(), child_less);
    out.children.erase(
        std::unique(out.children.begin(), out.children.end(), child_eq),
        out.children.end());
    return out;
}

Scdt insert_subtree(const Color& c, const Scdt& t, const Scdt& into) {
    Scdt out = into;
    std::pair<Color, Scdt> entry{c, t};
    auto pos = std::lower_bound(out.children.begin(), out.children.end(), entry, child_less);
    if (pos != out.children.end() && child_eq(*pos, entry)) return out;  // overwrite
    out.children.insert(pos, std::move(entry));
    return out;
}

bool subtree_of(const Scdt& t, const Scdt& hay) {
    if (t == hay) return true;
    for (const auto& [c, sub] : hay.children)
        if (subtree_of(t, sub)) return true;
    return false;
}

namespace {

bool embeds_at(const Scdt& pattern, const Scdt& node);

// Injective matching of pattern children into node children. Colors must
// match exactly, so the matching decomposes per color group; within a
// group an augmenting-path search decides feasibility. Order-preserving
// subsequence matching is not enough here: two same-colored pattern
// children can embed only crosswise into two same-colored node children.
bool match_children(const std::vector<std::pair<Color, Scdt>>& want,
                    const std::vector<std::pair<Color, Scdt>>& have) {
    if (want.empty()) return true;
    size_t wi = 0;
    while (wi < want.size()) {
        const Color color = want[wi].first;
        size_t wj = wi;
        while (wj < want.size() && want[wj].first == color) ++wj;
        std::vector<const Scdt*> group_have;
        for (const auto& [c, sub] : have)
            if (c == color) group_have.push_back(&sub);
        const size_t nw = wj - wi;
        if (group_have.size() < nw) return false;
        // adjacency: pattern child i may map to node child j
        std::vector<std::vector<char>> ok(nw, std::vector<char>(group_have.size(), 0));
        for (size_t i = 0; i < nw; ++i)
            for (size_t j = 0; j < group_have.size(); ++j)
                ok[i][j] = embeds_at(want[wi + i].second, *group_have[j]);
        std::vector<int> owner(group_have.size(), -1);
        std::function<bool(size_t, std::vector<char>&)> augment =
            [&](size_t i, std::vector<char>& seen) {
                for (size_t j = 0; j < group_have.size(); ++j) {
                    if (!ok[i][j] || seen[j]) continue;
                    seen[j] = 1;
                    if (owner[j] < 0 || augment(size_t(owner[j]), seen)) {
                        owner[j] = int(i);
                        return true;
                    }
                }
                return false;
            };
        for (size_t i = 0; i < nw; ++i) {
            std::vector<char> seen(group_have.size(), 0);
            if (!augment(i, seen)) return false;
        }
        wi = wj;
    }
    return true;
}

bool embeds_at(const Scdt& pattern, const Scdt& node) {
    if (pattern.root != node.root) return false;
    return match_children(pattern.children, node.children);
}

}  // namespace

bool embedded_in(const Scdt& pattern, const Scdt& hay) {
    if (embeds_at(pattern, hay)) return true;
    for (const auto& [c, sub] : hay.children)
        if (embedded_in(pattern, sub)) return true;
    return false;
}

namespace {

// Patterns anchored at this node: root plus any subset of children with
// recursively reduced subtrees.
void patterns_at(const Scdt& node, std::set<Scdt>& out, size_t cap) {
    std::vector<Scdt> acc;
    acc.emplace_back(node.root);
    for (const auto& [c, sub] : node.children) {
        std::set<Scdt> sub_patterns;
        patterns_at(sub, sub_patterns, cap);
        std::vector<Scdt> next;
        for (const Scdt& base : acc) {
            next.push_back(base);  // omit the edge
            for (const Scdt& reduced : sub_patterns) {
                next.push_back(insert_subtree(c, reduced, base));
                if (next.size() + acc.size() > cap)
                    throw CapExceeded("subtree enumeration exceeded cap");
            }
        }
        acc = std::move(next);
    }
    for (Scdt& t : acc) out.insert(std::move(t));
    if (out.size() > cap) throw CapExceeded("subtree enumeration exceeded cap");
}

}  // namespace

std::set<Scdt> enumerate_subtrees(const Scdt& t, size_t cap) {
    // walk every node; patterns_at() already recurses, but anchored
    // reductions keep the anchor's root, so anchor at each node explicitly
    std::set<Scdt> out;
    std::function<void(const Scdt&)> walk = [&](const Scdt& node) {
        patterns_at(node, out, cap);
        if (out.size() > cap) throw CapExceeded("subtree enumeration exceeded cap");
        for (const auto& [c, sub] : node.children) walk(sub);
    };
    walk(t);
    return out;
}

namespace {

uint64_t draw(std::mt19937_64& rng, uint64_t bound) {
    return bound == 0 ? 0 : rng() % bound;
}

// small pools used when decorating trees; mixed with symbols of the
// original tree so collisions with the pattern alphabet actually happen
void collect_symbols(const Scdt& t, std::vector<std::string>& out) {
    out.push_back(t.root);
    for (const auto& [c, sub] : t.children) collect_symbols(sub, out);
}

void collect_colors(const Scdt& t, std::vector<Color>& out) {
    for (const auto& [c, sub] : t.children) {
        out.push_back(c);
        collect_colors(sub, out);
    }
}

Scdt random_decorated(const Scdt& t, std::mt19937_64& rng,
                      const std::vector<std::string>& symbols,
                      const std::vector<Color>& colors, size_t& budget) {
    Scdt out(t.root);
    for (const auto& [c, sub] : t.children)
        out = insert_subtree(c, random_decorated(sub, rng, symbols, colors, budget), out);
    // extra siblings / children under leaves
    while (budget > 0 && draw(rng, 3) == 0) {
        --budget;
        Color c = colors[draw(rng, colors.size())];
        Scdt extra(symbols[draw(rng, symbols.size())]);
        if (budget > 0 && draw(rng, 4) == 0) {
            --budget;
            extra = insert_subtree(colors[draw(rng, colors.size())],
                                   Scdt(symbols[draw(rng, symbols.size())]), extra);
        }
        out = insert_subtree(c, extra, out);
    }
    return out;
}

}  // namespace

Scdt omega_sample(const Scdt& t, uint64_t seed, size_t budget) {
    std::mt19937_64 rng(seed);
    std::vector<std::string> symbols;
    collect_symbols(t, symbols);
    symbols.push_back("Z0");
    symbols.push_back("Z1");
    std::vector<Color> colors;
    collect_colors(t, colors);
    colors.push_back(Color::param(1));
    colors.push_back(Color::flow(1, 1));

    size_t left = budget;
    Scdt sample = random_decorated(t, rng, symbols, colors, left);
    // wrap in an environment: a chain of fresh ancestors with random siblings
    while (left > 0 && draw(rng, 2) == 0) {
        --left;
        Scdt parent(symbols[draw(rng, symbols.size())]);
        parent = insert_subtree(colors[draw(rng, colors.size())], sample, parent);
        while (left > 0 && draw(rng, 3) == 0) {
            --left;
            parent = insert_subtree(colors[draw(rng, colors.size())],
                                    Scdt(symbols[draw(rng, symbols.size())]), parent);
        }
        sample = parent;
    }
    return sample;
}

std::string render(const Scdt& t) {
    std::ostringstream out;
    std::function<void(const Scdt&)> emit = [&](const Scdt& node) {
        out << node.root;
        if (node.children.empty()) return;
        out << '(';
        bool first = true;
        for (const auto& [c, sub] : node.children) {
            if (!first) out << ',';
            first = false;
            if (c.kind == Color::Param)
                out << c.n;
            else
                out << c.n << '>' << c.m;
            out << '(';
            emit(sub);
            out << ')';
        }
        out << ')';
    };
    emit(t);
    return out.str();
}

namespace {

struct TreeParser {
    std::string_view text;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw TreeFormatError(what + " at offset " + std::to_string(pos));
    }

    char peek() const { return pos < text.size() ? text[pos] : '\0'; }

    bool symbol_char(char c) const {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
               c == '-' || c == '@' || c == ':' || c == '<' || c == '[' || c == ']';
    }

    std::string symbol() {
        size_t start = pos;
        while (pos < text.size() && symbol_char(text[pos])) ++pos;
        if (pos == start) fail("expected symbol");
        return std::string(text.substr(start, pos - start));
    }

    int integer() {
        size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) fail("expected color index");
        if (pos - start > 6) fail("color index too large");
        return std::stoi(std::string(text.substr(start, pos - start)));
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos;
    }

    Scdt tree() {
        Scdt node(symbol());
        if (peek() == '(') {
            ++pos;
            while (true) {
                int n = integer();
                Color c = Color::param(n);
                if (peek() == '>') {
                    ++pos;
                    c = Color::flow(n, integer());
                }
                expect('(');
                node.children.emplace_back(c, tree());
                expect(')');
                if (peek() == ',') {
                    ++pos;
                    continue;
                }
                break;
            }
            expect(')');
        }
        return node;
    }
};

}  // namespace

Scdt parse_tree(std::string_view text) {
    TreeParser p{text};
    Scdt t = p.tree();
    if (p.pos != text.size()) p.fail("trailing characters");
    return t;
}

}  // namespace sigtree
