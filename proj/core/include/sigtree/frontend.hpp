// frontend.hpp -- .tasm parser and the deterministic program-model builder
// standing in for the external modeling oracle: it produces a Pds, the API
// table (entry points, names, arities, in/out parameter types) and the
// entry configuration.
#ifndef SIGTREE_FRONTEND_HPP
#define SIGTREE_FRONTEND_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sigtree/pds.hpp"

namespace sigtree {

// Per-parameter type set; at least one of in/out holds. "out" marks a
// parameter the call writes through, "in" one it only reads.
struct ParamType {
    bool can_in = false;
    bool can_out = false;
};

struct ApiDecl {
    std::string name;
    int arity = 0;
    std::vector<ParamType> params;  // size == arity
    int line = 0;
};

enum class Opcode {
    PushValue,   // push <literal>
    PushReg,     // push <reg>
    MovRegValue, // mov <reg> <literal>
    PopReg,      // pop <reg>
    CallApi,     // call <declared api>
    CallLabel,   // call <label>
    Jmp,         // jmp <label>
    Ret,
    Halt,
};

struct Instruction {
    std::string label;
    Opcode op = Opcode::Halt;
    std::string a;  // first operand
    std::string b;  // second operand
    int line = 0;
};

// Parsed source; kept verbatim enough that emit_source() round-trips.
struct Program {
    std::string source_name;
    std::vector<ApiDecl> apis;
    std::string entry_label;
    std::vector<Instruction> instructions;
};

struct ParseError : std::runtime_error {
    ParseError(std::string file, int line, int col, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ":" +
                             std::to_string(col) + ": " + what),
          file(std::move(file)), line(line), col(col) {}
    std::string file;
    int line;
    int col;
};

// API entry points of the model and their metadata. One entry per
// (declared function, register valuation reaching the call).
class ApiTable {
public:
    struct Entry {
        std::string name;
        int arity = 0;
        std::vector<ParamType> params;
    };

    void add(ControlPoint p, Entry e) { entries_.emplace(p, std::move(e)); }
    bool contains(ControlPoint p) const { return entries_.count(p) != 0; }
    const Entry& at(ControlPoint p) const { return entries_.at(p); }
    const std::string& name(ControlPoint p) const { return entries_.at(p).name; }
    int arity(ControlPoint p) const { return entries_.at(p).arity; }
    // type set of the n-th parameter, 1-based
    const ParamType& param_type(ControlPoint p, int n) const {
        return entries_.at(p).params.at(size_t(n) - 1);
    }
    const std::map<ControlPoint, Entry>& entries() const { return entries_; }

private:
    std::map<ControlPoint, Entry> entries_;
};

struct ProgramModel {
    Pds pds;
    ApiTable api;
    Config entry;  // entry control point with empty stack
    std::string source_name;
    Program program;
};

struct FrontendOptions {
    // fixed register file; more registers in the source is an error
    std::vector<std::string> registers = {"eax", "ebx", "ecx", "edx"};
};

Program parse_source(std::string_view text, std::string source_name,
                     const FrontendOptions& opts = {});
std::string emit_source(const Program& program);

// Translates the program into a pushdown system. Control points are
// (label, register valuation) pairs; a register holds a literal only when
// the last assignment on every path was `mov reg literal`, otherwise the
// unknown symbol. The stack alphabet is the program's literals plus one
// return-address symbol per call successor plus the unknown symbol.
ProgramModel build_model(const Program& program, const FrontendOptions& opts = {});

ProgramModel parse_program(std::string_view text, std::string source_name,
                           const FrontendOptions& opts = {});

// upper bound |labels| * (|literals|+1)^|registers| on reachable control
// states; build_model() checks it
size_t control_state_bound(const Program& program, const FrontendOptions& opts = {});

}  // namespace sigtree

#endif
