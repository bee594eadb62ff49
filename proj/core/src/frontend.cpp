#include "sigtree/frontend.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

namespace sigtree {

namespace {

struct Token {
    std::string text;
    int col;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        if (line[i] == '#') break;  // comment
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
               line[i] != '#')
            ++i;
        out.push_back({std::string(line.substr(start, i - start)), int(start) + 1});
    }
    return out;
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.' && c != '-')
            return false;
    return true;
}

bool is_register(const std::string& s, const FrontendOptions& opts) {
    return std::find(opts.registers.begin(), opts.registers.end(), s) !=
           opts.registers.end();
}

std::vector<ParamType> parse_types(const std::string& file, int line, int col,
                                   const std::string& spec, int arity) {
    std::vector<ParamType> out;
    std::stringstream items(spec);
    std::string item;
    while (std::getline(items, item, ',')) {
        ParamType t;
        std::stringstream parts(item);
        std::string part;
        while (std::getline(parts, part, '|')) {
            if (part == "in")
                t.can_in = true;
            else if (part == "out")
                t.can_out = true;
            else
                throw ParseError(file, line, col, "bad parameter type '" + part + "'");
        }
        if (!t.can_in && !t.can_out)
            throw ParseError(file, line, col, "empty parameter type set");
        out.push_back(t);
    }
    if (int(out.size()) != arity)
        throw ParseError(file, line, col,
                         "types list has " + std::to_string(out.size()) +
                             " entries, arity is " + std::to_string(arity));
    return out;
}

}  // namespace

Program parse_source(std::string_view text, std::string source_name,
                     const FrontendOptions& opts) {
    Program prog;
    prog.source_name = std::move(source_name);
    const std::string& file = prog.source_name;

    std::map<std::string, int> labels;     // label -> line, for duplicates
    std::map<std::string, int> api_names;  // name -> line

    std::istringstream lines{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(lines, raw)) {
        ++lineno;
        std::vector<Token> toks = tokenize(raw);
        if (toks.empty()) continue;

        if (toks[0].text == ".api") {
            if (toks.size() < 3)
                throw ParseError(file, lineno, toks[0].col, ".api needs a name and arity");
            ApiDecl decl;
            decl.line = lineno;
            decl.name = toks[1].text;
            if (!valid_name(decl.name))
                throw ParseError(file, lineno, toks[1].col, "bad API name");
            if (api_names.count(decl.name))
                throw ParseError(file, lineno, toks[1].col,
                                 "API '" + decl.name + "' already declared on line " +
                                     std::to_string(api_names[decl.name]));
            if (toks[2].text.rfind("arity=", 0) != 0)
                throw ParseError(file, lineno, toks[2].col, "expected arity=<n>");
            try {
                decl.arity = std::stoi(toks[2].text.substr(6));
            } catch (const std::exception&) {
                throw ParseError(file, lineno, toks[2].col, "bad arity");
            }
            if (decl.arity < 0 || decl.arity > 32)
                throw ParseError(file, lineno, toks[2].col, "arity out of range");
            size_t next = 3;
            if (decl.arity > 0) {
                if (toks.size() < 4 || toks[3].text.rfind("types=", 0) != 0)
                    throw ParseError(file, lineno, toks.back().col, "expected types=...");
                decl.params =
                    parse_types(file, lineno, toks[3].col, toks[3].text.substr(6), decl.arity);
                next = 4;
            }
            if (toks.size() > next)
                throw ParseError(file, lineno, toks[next].col, "trailing tokens");
            api_names[decl.name] = lineno;
            prog.apis.push_back(std::move(decl));
            continue;
        }

        if (toks[0].text == ".entry") {
            if (toks.size() != 2)
                throw ParseError(file, lineno, toks[0].col, ".entry needs one label");
            if (!prog.entry_label.empty())
                throw ParseError(file, lineno, toks[0].col, "duplicate .entry");
            prog.entry_label = toks[1].text;
            continue;
        }

        // instruction line: "label: opcode operands..."
        if (toks[0].text.size() < 2 || toks[0].text.back() != ':')
            throw ParseError(file, lineno, toks[0].col, "expected 'label:'");
        Instruction ins;
        ins.line = lineno;
        ins.label = toks[0].text.substr(0, toks[0].text.size() - 1);
        if (!valid_name(ins.label))
            throw ParseError(file, lineno, toks[0].col, "bad label");
        if (labels.count(ins.label))
            throw ParseError(file, lineno, toks[0].col,
                             "duplicate label '" + ins.label + "' (first on line " +
                                 std::to_string(labels[ins.label]) + ")");
        labels[ins.label] = lineno;
        if (toks.size() < 2)
            throw ParseError(file, lineno, toks[0].col, "label without instruction");

        const std::string& op = toks[1].text;
        auto need = [&](size_t operands) {
            if (toks.size() != 2 + operands)
                throw ParseError(file, lineno, toks.back().col,
                                 op + " takes " + std::to_string(operands) + " operand(s)");
        };
        if (op == "push") {
            need(1);
            if (!valid_name(toks[2].text))
                throw ParseError(file, lineno, toks[2].col, "bad operand");
            ins.op = is_register(toks[2].text, opts) ? Opcode::PushReg : Opcode::PushValue;
            ins.a = toks[2].text;
        } else if (op == "mov") {
            need(2);
            if (!is_register(toks[2].text, opts))
                throw ParseError(file, lineno, toks[2].col,
                                 "'" + toks[2].text + "' is not in the register file");
            if (is_register(toks[3].text, opts) || !valid_name(toks[3].text))
                throw ParseError(file, lineno, toks[3].col, "mov source must be a literal");
            ins.op = Opcode::MovRegValue;
            ins.a = toks[2].text;
            ins.b = toks[3].text;
        } else if (op == "pop") {
            need(1);
            if (!is_register(toks[2].text, opts))
                throw ParseError(file, lineno, toks[2].col,
                                 "'" + toks[2].text + "' is not in the register file");
            ins.op = Opcode::PopReg;
            ins.a = toks[2].text;
        } else if (op == "call") {
            need(1);
            if (!valid_name(toks[2].text))
                throw ParseError(file, lineno, toks[2].col, "bad call target");
            ins.op = Opcode::CallApi;  // fixed up after labels are known
            ins.a = toks[2].text;
        } else if (op == "jmp") {
            need(1);
            ins.op = Opcode::Jmp;
            ins.a = toks[2].text;
        } else if (op == "ret") {
            need(0);
            ins.op = Opcode::Ret;
        } else if (op == "halt") {
            need(0);
            ins.op = Opcode::Halt;
        } else {
            throw ParseError(file, lineno, toks[1].col, "unknown opcode '" + op + "'");
        }
        prog.instructions.push_back(std::move(ins));
    }

    if (prog.entry_label.empty())
        throw ParseError(file, lineno, 1, "missing .entry");
    if (!labels.count(prog.entry_label))
        throw ParseError(file, lineno, 1,
                         "entry label '" + prog.entry_label + "' is not defined");
    for (const ApiDecl& decl : prog.apis)
        if (labels.count(decl.name))
            throw ParseError(file, decl.line, 1,
                             "API '" + decl.name + "' shadowed by a label");

    // resolve call/jmp targets
    for (Instruction& ins : prog.instructions) {
        if (ins.op == Opcode::CallApi) {
            if (api_names.count(ins.a)) continue;
            if (labels.count(ins.a)) {
                ins.op = Opcode::CallLabel;
                continue;
            }
            throw ParseError(file, ins.line, 1,
                             "call target '" + ins.a +
                                 "' is neither a declared API nor a label");
        }
        if (ins.op == Opcode::Jmp && !labels.count(ins.a))
            throw ParseError(file, ins.line, 1, "jmp target '" + ins.a + "' is not defined");
    }
    return prog;
}

std::string emit_source(const Program& prog) {
    std::ostringstream out;
    for (const ApiDecl& decl : prog.apis) {
        out << ".api " << decl.name << " arity=" << decl.arity;
        if (decl.arity > 0) {
            out << " types=";
            for (size_t i = 0; i < decl.params.size(); ++i) {
                if (i) out << ',';
                if (decl.params[i].can_in) out << "in";
                if (decl.params[i].can_in && decl.params[i].can_out) out << '|';
                if (decl.params[i].can_out) out << "out";
            }
        }
        out << "\n";
    }
    out << ".entry " << prog.entry_label << "\n";
    for (const Instruction& ins : prog.instructions) {
        out << ins.label << ": ";
        switch (ins.op) {
            case Opcode::PushValue:
            case Opcode::PushReg: out << "push " << ins.a; break;
            case Opcode::MovRegValue: out << "mov " << ins.a << " " << ins.b; break;
            case Opcode::PopReg: out << "pop " << ins.a; break;
            case Opcode::CallApi:
            case Opcode::CallLabel: out << "call " << ins.a; break;
            case Opcode::Jmp: out << "jmp " << ins.a; break;
            case Opcode::Ret: out << "ret"; break;
            case Opcode::Halt: out << "halt"; break;
        }
        out << "\n";
    }
    return out.str();
}

size_t control_state_bound(const Program& prog, const FrontendOptions& opts) {
    std::set<std::string> literals;
    for (const Instruction& ins : prog.instructions) {
        if (ins.op == Opcode::PushValue) literals.insert(ins.a);
        if (ins.op == Opcode::MovRegValue) literals.insert(ins.b);
    }
    size_t bound = prog.instructions.size() + 1;  // labels plus the end point
    size_t per_reg = literals.size() + 1;
    for (size_t i = 0; i < opts.registers.size(); ++i) {
        if (bound > size_t(1) << 40) break;  // saturate, bound only used as a check
        bound *= per_reg;
    }
    return bound;
}

namespace {

// register valuation: reg -> literal; absent means unknown
using Valuation = std::map<std::string, std::string>;

std::string valuation_suffix(const Valuation& v) {
    if (v.empty()) return "";
    std::ostringstream out;
    out << "{";
    bool first = true;
    for (const auto& [reg, val] : v) {
        if (!first) out << ",";
        first = false;
        out << reg << "=" << val;
    }
    out << "}";
    return out.str();
}

constexpr const char* kEndLabel = "<end>";

struct ModelBuilder {
    const Program& prog;
    const FrontendOptions& opts;
    Pds pds;
    ApiTable api;

    std::map<std::string, size_t> label_index;          // label -> instruction index
    std::map<std::string, const ApiDecl*> api_decls;
    std::vector<StackSym> alphabet;                      // the full, fixed gamma
    std::map<uint32_t, std::string> return_label;        // return sym -> label text

    std::set<std::pair<size_t, Valuation>> seen;
    std::deque<std::pair<size_t, Valuation>> work;
    std::set<std::pair<uint32_t, uint32_t>> cleanup_done;  // (api point, ret sym)

    ModelBuilder(const Program& p, const FrontendOptions& o) : prog(p), opts(o) {}

    ControlPoint state_point(const std::string& label, const Valuation& v) {
        return pds.intern_point(label + valuation_suffix(v));
    }

    std::string successor_label(size_t index) {
        return index + 1 < prog.instructions.size() ? prog.instructions[index + 1].label
                                                    : kEndLabel;
    }

    void enqueue(size_t index, const Valuation& v) {
        if (seen.insert({index, v}).second) work.push_back({index, v});
    }

    void enqueue_label(const std::string& label, const Valuation& v) {
        if (label == kEndLabel) return;
        enqueue(label_index.at(label), v);
    }

    void build_alphabet() {
        // the unknown symbol first, then literals and return addresses in
        // instruction order; a fixed gamma keeps the wildcard rule schemas
        // and therefore the whole model deterministic
        alphabet.push_back(pds.top_unknown());
        for (const Instruction& ins : prog.instructions) {
            if (ins.op == Opcode::PushValue)
                alphabet.push_back(pds.intern_literal(ins.a));
            else if (ins.op == Opcode::MovRegValue)
                alphabet.push_back(pds.intern_literal(ins.b));
        }
        for (size_t i = 0; i < prog.instructions.size(); ++i) {
            const Instruction& ins = prog.instructions[i];
            if (ins.op != Opcode::CallApi && ins.op != Opcode::CallLabel) continue;
            std::string target = successor_label(i);
            ControlPoint tp = pds.intern_point(target);
            StackSym r = pds.intern_return(tp);
            return_label[r.index] = target;
            alphabet.push_back(r);
        }
        std::sort(alphabet.begin(), alphabet.end());
        alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
    }

    void emit_cleanup(ControlPoint api_point, StackSym ret, int arity,
                      const std::string& cont_label, const Valuation& v) {
        if (!cleanup_done.insert({api_point.index, ret.index}).second) return;
        // pop the return address, then one rule set per remaining parameter
        ControlPoint cont = state_point(cont_label, v);
        ControlPoint at = api_point;
        StackSym only_ret = ret;
        if (arity == 0) {
            pds.add_rule(api_point, ret, cont, {});
            return;
        }
        ControlPoint next = pds.intern_point(cont_label + valuation_suffix(v) + "#pop" +
                                             std::to_string(arity));
        pds.add_rule(api_point, only_ret, next, {});
        at = next;
        for (int k = arity; k >= 1; --k) {
            ControlPoint after =
                k == 1 ? cont
                       : pds.intern_point(cont_label + valuation_suffix(v) + "#pop" +
                                          std::to_string(k - 1));
            for (StackSym g : alphabet) pds.add_rule(at, g, after, {});
            at = after;
        }
    }

    void translate(size_t index, const Valuation& v) {
        const Instruction& ins = prog.instructions[index];
        ControlPoint cur = state_point(ins.label, v);
        switch (ins.op) {
            case Opcode::PushValue: {
                StackSym s = pds.intern_literal(ins.a);
                ControlPoint next = state_point(successor_label(index), v);
                for (StackSym g : alphabet) pds.add_rule(cur, g, next, {s, g});
                enqueue_label(successor_label(index), v);
                break;
            }
            case Opcode::PushReg: {
                auto it = v.find(ins.a);
                StackSym s = it != v.end() ? pds.intern_literal(it->second)
                                           : pds.top_unknown();
                ControlPoint next = state_point(successor_label(index), v);
                for (StackSym g : alphabet) pds.add_rule(cur, g, next, {s, g});
                enqueue_label(successor_label(index), v);
                break;
            }
            case Opcode::MovRegValue: {
                Valuation v2 = v;
                v2[ins.a] = ins.b;
                ControlPoint next = state_point(successor_label(index), v2);
                for (StackSym g : alphabet) pds.add_rule(cur, g, next, {g});
                enqueue_label(successor_label(index), v2);
                break;
            }
            case Opcode::PopReg: {
                Valuation v2 = v;
                v2.erase(ins.a);  // popped values are not tracked
                ControlPoint next = state_point(successor_label(index), v2);
                for (StackSym g : alphabet) pds.add_rule(cur, g, next, {});
                enqueue_label(successor_label(index), v2);
                break;
            }
            case Opcode::CallApi: {
                const ApiDecl* decl = api_decls.at(ins.a);
                ControlPoint entry = state_point(decl->name, v);
                if (!api.contains(entry))
                    api.add(entry, {decl->name, decl->arity, decl->params});
                std::string cont = successor_label(index);
                StackSym ret = pds.intern_return(pds.intern_point(cont));
                for (StackSym g : alphabet) pds.add_rule(cur, g, entry, {ret, g});
                emit_cleanup(entry, ret, decl->arity, cont, v);
                enqueue_label(cont, v);
                break;
            }
            case Opcode::CallLabel: {
                std::string cont = successor_label(index);
                StackSym ret = pds.intern_return(pds.intern_point(cont));
                ControlPoint target = state_point(ins.a, v);
                for (StackSym g : alphabet) pds.add_rule(cur, g, target, {ret, g});
                enqueue_label(ins.a, v);
                break;
            }
            case Opcode::Jmp: {
                ControlPoint target = state_point(ins.a, v);
                for (StackSym g : alphabet) pds.add_rule(cur, g, target, {g});
                enqueue_label(ins.a, v);
                break;
            }
            case Opcode::Ret: {
                // pop whatever return address is on top and resume there,
                // keeping the callee's register valuation
                for (const auto& [sym_index, label] : return_label) {
                    if (label == kEndLabel) continue;
                    ControlPoint target = state_point(label, v);
                    pds.add_rule(cur, StackSym{sym_index}, target, {});
                    enqueue_label(label, v);
                }
                break;
            }
            case Opcode::Halt: break;
        }
    }

    ProgramModel run() {
        for (size_t i = 0; i < prog.instructions.size(); ++i)
            label_index[prog.instructions[i].label] = i;
        for (const ApiDecl& d : prog.apis) api_decls[d.name] = &d;

        build_alphabet();

        size_t entry_index = label_index.at(prog.entry_label);
        Valuation entry_val;  // registers unknown at entry
        ControlPoint entry_point = state_point(prog.entry_label, entry_val);
        enqueue(entry_index, entry_val);
        while (!work.empty()) {
            auto [index, v] = work.front();
            work.pop_front();
            translate(index, v);
        }

        if (seen.size() > control_state_bound(prog, opts))
            throw std::logic_error("control state exploration exceeded its bound");

        ProgramModel model;
        model.pds = std::move(pds);
        model.api = std::move(api);
        model.entry = Config{entry_point, {}};
        model.source_name = prog.source_name;
        model.program = prog;
        return model;
    }
};

}  // namespace

ProgramModel build_model(const Program& program, const FrontendOptions& opts) {
    ModelBuilder builder(program, opts);
    return builder.run();
}

ProgramModel parse_program(std::string_view text, std::string source_name,
                           const FrontendOptions& opts) {
    Program prog = parse_source(text, std::move(source_name), opts);
    return build_model(prog, opts);
}

}  // namespace sigtree
