#include "qcp/isa.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

namespace qcp {

namespace {

constexpr std::array<std::string_view, 11> kGateNames = {"NOP", "X",  "Y",  "Z",    "H",   "RX",
                                                         "RY",  "RZ", "CNOT", "CZ", "MEAS"};
constexpr std::array<std::string_view, 10> kClassicalNames = {"LDI", "MOV", "ADD", "SUB", "AND",
                                                              "OR",  "CMP", "BR",  "JMP", "FMR"};
constexpr std::array<std::string_view, 6> kCondNames = {"EQ", "NE", "LT", "GE", "GT", "LE"};

std::string upper(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

}  // namespace

std::string_view gate_name(Gate g) { return kGateNames[static_cast<std::size_t>(g)]; }

std::optional<Gate> gate_from_name(std::string_view name)
{
    const auto u = upper(name);
    for (std::size_t i = 0; i < kGateNames.size(); ++i)
        if (kGateNames[i] == u) return static_cast<Gate>(i);
    return std::nullopt;
}

std::string_view classical_name(ClassicalOp op) { return kClassicalNames[static_cast<std::size_t>(op)]; }

std::string_view cond_name(Cond c) { return kCondNames[static_cast<std::size_t>(c)]; }

int gate_arity(Gate g)
{
    switch (g) {
    case Gate::NOP:
        return 0;
    case Gate::CNOT:
    case Gate::CZ:
        return 2;
    default:
        return 1;
    }
}

bool is_rotation(Gate g) { return g == Gate::RX || g == Gate::RY || g == Gate::RZ; }
bool is_two_qubit(Gate g) { return g == Gate::CNOT || g == Gate::CZ; }

bool is_mrce_operation(Gate g)
{
    return g == Gate::NOP || g == Gate::X || g == Gate::Y || g == Gate::Z || g == Gate::H;
}

std::uint16_t quantize_angle(double radians)
{
    const double turns = radians / (2.0 * std::numbers::pi);
    auto steps = static_cast<long long>(std::llround(turns * kAngleSteps));
    steps %= kAngleSteps;
    if (steps < 0) steps += kAngleSteps;
    return static_cast<std::uint16_t>(steps);
}

double Instruction::angle_radians() const
{
    return static_cast<double>(angle) * 2.0 * std::numbers::pi / kAngleSteps;
}

Instruction Instruction::quantum(std::uint32_t label, Gate g, std::span<const int> qs)
{
    Instruction i;
    i.kind = InstrKind::Quantum;
    i.timing_label = label;
    i.gate = g;
    i.qubit_count = static_cast<std::uint8_t>(std::min<std::size_t>(qs.size(), 2));
    for (std::size_t k = 0; k < i.qubit_count; ++k) i.qubits[k] = static_cast<std::uint8_t>(qs[k]);
    return i;
}

Instruction Instruction::quantum(std::uint32_t label, Gate g, std::initializer_list<int> qs)
{
    return quantum(label, g, std::span<const int>(qs.begin(), qs.size()));
}

Instruction Instruction::rotation(std::uint32_t label, Gate g, int q, double radians)
{
    auto i = quantum(label, g, {q});
    i.angle = quantize_angle(radians);
    return i;
}

Instruction Instruction::measure(std::uint32_t label, int q, int result_reg)
{
    auto i = quantum(label, Gate::MEAS, {q});
    i.result_reg = static_cast<std::int16_t>(result_reg);
    return i;
}

namespace {

Instruction classical(ClassicalOp op)
{
    Instruction i;
    i.kind = InstrKind::Classical;
    i.op = op;
    return i;
}

}  // namespace

Instruction Instruction::ldi(int rd, std::int32_t imm)
{
    auto i = classical(ClassicalOp::LDI);
    i.rd = static_cast<std::uint8_t>(rd);
    i.imm = imm;
    return i;
}

Instruction Instruction::alu(ClassicalOp op, int rd, int rs1, int rs2)
{
    auto i = classical(op);
    i.rd = static_cast<std::uint8_t>(rd);
    i.rs1 = static_cast<std::uint8_t>(rs1);
    if (op != ClassicalOp::MOV) i.rs2 = static_cast<std::uint8_t>(rs2);
    return i;
}

Instruction Instruction::cmp(int rs1, int rs2)
{
    auto i = classical(ClassicalOp::CMP);
    i.rs1 = static_cast<std::uint8_t>(rs1);
    i.rs2 = static_cast<std::uint8_t>(rs2);
    return i;
}

Instruction Instruction::br(Cond c, std::uint32_t target)
{
    auto i = classical(ClassicalOp::BR);
    i.cond = c;
    i.target = target;
    return i;
}

Instruction Instruction::jmp(std::uint32_t target)
{
    auto i = classical(ClassicalOp::JMP);
    i.target = target;
    return i;
}

Instruction Instruction::fmr(int rd, int result_reg)
{
    auto i = classical(ClassicalOp::FMR);
    i.rd = static_cast<std::uint8_t>(rd);
    i.result_reg = static_cast<std::int16_t>(result_reg);
    return i;
}

Instruction Instruction::mrce(int result_reg, int target_qubit, Gate op0, Gate op1)
{
    Instruction i;
    i.kind = InstrKind::Mrce;
    i.result_reg = static_cast<std::int16_t>(result_reg);
    i.qubits[0] = static_cast<std::uint8_t>(target_qubit);
    i.qubit_count = 1;
    i.op_if_0 = op0;
    i.op_if_1 = op1;
    return i;
}

Instruction Instruction::end()
{
    Instruction i;
    i.kind = InstrKind::EndBlock;
    return i;
}

bool Program::uses_priorities() const
{
    return std::any_of(blocks.begin(), blocks.end(), [](const auto& b) { return b.priority.has_value(); });
}

std::size_t Program::quantum_count() const
{
    return static_cast<std::size_t>(
        std::count_if(instructions.begin(), instructions.end(), [](const auto& i) { return i.is_quantum(); }));
}

std::size_t Program::classical_count() const { return instructions.size() - quantum_count(); }

// ---------------------------------------------------------------------------
// Text grammar

namespace {

struct Line {
    std::uint32_t number;
    std::vector<std::string> tokens;
};

std::vector<std::string> tokenize(std::string_view s)
{
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
    };
    for (std::size_t k = 0; k < s.size(); ++k) {
        const char c = s[k];
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else if (c == '-' && k + 1 < s.size() && s[k + 1] == '>') {
            flush();
            out.emplace_back("->");
            ++k;
        } else {
            cur.push_back(c);
        }
    }
    flush();
    return out;
}

template <typename T>
std::optional<T> to_int(std::string_view s)
{
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

bool is_identifier(std::string_view s)
{
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '.'; });
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Program run()
    {
        split_lines();
        collect_labels();
        for (const auto& line : lines_) parse_line(line);
        resolve_targets();
        if (!saw_qubits_) {
            std::uint32_t hi = 0;
            for (const auto& i : program_.instructions)
                for (auto q : i.targets()) hi = std::max<std::uint32_t>(hi, q + 1u);
            program_.qubit_count = hi;
        }
        return std::move(program_);
    }

private:
    struct PendingTarget {
        std::size_t index;
        std::string label;
        std::uint32_t line;
    };

    [[noreturn]] void fail(std::uint32_t line, const std::string& msg) const { throw ParseError(line, msg); }

    void split_lines()
    {
        std::uint32_t number = 0;
        std::size_t pos = 0;
        while (pos <= text_.size()) {
            auto nl = text_.find('\n', pos);
            if (nl == std::string_view::npos) nl = text_.size();
            ++number;
            auto raw = text_.substr(pos, nl - pos);
            if (auto h = raw.find('#'); h != std::string_view::npos) raw = raw.substr(0, h);
            auto toks = tokenize(raw);
            if (!toks.empty()) lines_.push_back({number, std::move(toks)});
            pos = nl + 1;
        }
    }

    // Labels ("name:") may share a line with an instruction; their address is
    // the index of the next instruction.
    void collect_labels()
    {
        std::uint32_t pc = 0;
        for (auto& line : lines_) {
            while (!line.tokens.empty() && line.tokens.front().size() > 1 && line.tokens.front().back() == ':') {
                auto name = line.tokens.front().substr(0, line.tokens.front().size() - 1);
                if (!is_identifier(name)) fail(line.number, "bad label '" + name + "'");
                if (!labels_.emplace(name, pc).second) fail(line.number, "duplicate label '" + name + "'");
                line.tokens.erase(line.tokens.begin());
            }
            if (!line.tokens.empty() && line.tokens.front()[0] != '.') ++pc;
        }
    }

    void parse_line(const Line& line)
    {
        if (line.tokens.empty()) return;
        const auto& head = line.tokens.front();
        if (head[0] == '.') {
            parse_directive(line);
            return;
        }
        Instruction ins;
        if (to_int<std::uint32_t>(head)) {
            ins = parse_quantum(line);
        } else {
            ins = parse_untimed(line);
        }
        program_.instructions.push_back(ins);
        program_.instruction_lines.push_back(line.number);
    }

    int reg(const Line& line, const std::string& tok, const char* prefix, int limit) const
    {
        const std::string_view p(prefix);
        std::string_view s(tok);
        bool ok = false;
        if (p == "q") {
            ok = s.size() > 1 && (s[0] == 'q' || s[0] == 'Q');
            s.remove_prefix(1);
        } else if (p == "r") {
            ok = s.size() > 1 && (s[0] == 'r' || s[0] == 'R');
            s.remove_prefix(1);
        } else {  // result register: r<n> or qr<n>
            if (s.size() > 2 && (s[0] == 'q' || s[0] == 'Q') && (s[1] == 'r' || s[1] == 'R')) {
                ok = true;
                s.remove_prefix(2);
            } else if (s.size() > 1 && (s[0] == 'r' || s[0] == 'R')) {
                ok = true;
                s.remove_prefix(1);
            }
        }
        auto v = ok ? to_int<int>(s) : std::nullopt;
        if (!v) fail(line.number, "expected " + std::string(p == "qr" ? "result register" : p == "q" ? "qubit" : "register") + ", got '" + tok + "'");
        if (*v < 0 || *v >= limit)
            fail(line.number, "operand '" + tok + "' out of range");
        return *v;
    }

    void expect_count(const Line& line, std::size_t n, const std::string& mnemonic) const
    {
        if (line.tokens.size() != n) fail(line.number, "wrong operand count for " + mnemonic);
    }

    Instruction parse_quantum(const Line& line)
    {
        const auto label = *to_int<std::uint32_t>(line.tokens[0]);
        if (line.tokens.size() < 2) fail(line.number, "missing mnemonic after timing label");
        const auto& mnem = line.tokens[1];
        auto g = gate_from_name(mnem);
        if (!g || *g == Gate::NOP) fail(line.number, "unknown mnemonic '" + mnem + "'");
        switch (*g) {
        case Gate::CNOT:
        case Gate::CZ: {
            expect_count(line, 4, mnem);
            const int a = reg(line, line.tokens[2], "q", kMaxQubits);
            const int b = reg(line, line.tokens[3], "q", kMaxQubits);
            if (a == b) fail(line.number, mnem + " needs two distinct qubits");
            return Instruction::quantum(label, *g, {a, b});
        }
        case Gate::RX:
        case Gate::RY:
        case Gate::RZ: {
            expect_count(line, 4, mnem);
            const int q = reg(line, line.tokens[2], "q", kMaxQubits);
            const auto& a = line.tokens[3];
            double rad = 0;
            try {
                std::size_t used = 0;
                rad = std::stod(a, &used);
                if (used != a.size()) throw std::invalid_argument(a);
            } catch (const std::exception&) {
                fail(line.number, "bad angle '" + a + "'");
            }
            return Instruction::rotation(label, *g, q, rad);
        }
        case Gate::MEAS: {
            expect_count(line, 5, mnem);
            const int q = reg(line, line.tokens[2], "q", kMaxQubits);
            if (line.tokens[3] != "->") fail(line.number, "MEAS expects '-> r<n>'");
            const int r = reg(line, line.tokens[4], "qr", kResultRegisters);
            return Instruction::measure(label, q, r);
        }
        default: {
            expect_count(line, 3, mnem);
            const int q = reg(line, line.tokens[2], "q", kMaxQubits);
            return Instruction::quantum(label, *g, {q});
        }
        }
    }

    std::uint32_t target(const Line& line, const std::string& tok)
    {
        if (auto n = to_int<std::uint32_t>(tok)) return *n;
        if (!is_identifier(tok)) fail(line.number, "bad branch target '" + tok + "'");
        pending_.push_back({program_.instructions.size(), tok, line.number});
        return 0;
    }

    Instruction parse_untimed(const Line& line)
    {
        const auto& t = line.tokens;
        auto mnem = upper(t[0]);
        if (mnem == "END") {
            expect_count(line, 1, mnem);
            return Instruction::end();
        }
        if (mnem == "MRCE") {
            expect_count(line, 5, mnem);
            const int r = reg(line, t[1], "qr", kResultRegisters);
            const int q = reg(line, t[2], "q", kMaxQubits);
            auto op0 = gate_from_name(t[3]);
            auto op1 = gate_from_name(t[4]);
            if (!op0 || !is_mrce_operation(*op0)) fail(line.number, "MRCE operation '" + t[3] + "' not allowed");
            if (!op1 || !is_mrce_operation(*op1)) fail(line.number, "MRCE operation '" + t[4] + "' not allowed");
            return Instruction::mrce(r, q, *op0, *op1);
        }
        if (mnem.rfind("BR.", 0) == 0) {
            expect_count(line, 2, mnem);
            auto c = mnem.substr(3);
            for (std::size_t k = 0; k < kCondNames.size(); ++k)
                if (kCondNames[k] == c) return Instruction::br(static_cast<Cond>(k), target(line, t[1]));
            fail(line.number, "unknown branch condition '" + c + "'");
        }
        if (mnem == "JMP") {
            expect_count(line, 2, mnem);
            return Instruction::jmp(target(line, t[1]));
        }
        if (mnem == "LDI") {
            expect_count(line, 3, mnem);
            auto imm = to_int<std::int32_t>(t[2]);
            if (!imm) fail(line.number, "bad immediate '" + t[2] + "'");
            return Instruction::ldi(reg(line, t[1], "r", kGpRegisters), *imm);
        }
        if (mnem == "MOV") {
            expect_count(line, 3, mnem);
            return Instruction::alu(ClassicalOp::MOV, reg(line, t[1], "r", kGpRegisters),
                                    reg(line, t[2], "r", kGpRegisters));
        }
        if (mnem == "CMP") {
            expect_count(line, 3, mnem);
            return Instruction::cmp(reg(line, t[1], "r", kGpRegisters), reg(line, t[2], "r", kGpRegisters));
        }
        if (mnem == "FMR") {
            expect_count(line, 3, mnem);
            return Instruction::fmr(reg(line, t[1], "r", kGpRegisters), reg(line, t[2], "qr", kResultRegisters));
        }
        for (auto op : {ClassicalOp::ADD, ClassicalOp::SUB, ClassicalOp::AND, ClassicalOp::OR}) {
            if (mnem == classical_name(op)) {
                expect_count(line, 4, mnem);
                return Instruction::alu(op, reg(line, t[1], "r", kGpRegisters), reg(line, t[2], "r", kGpRegisters),
                                        reg(line, t[3], "r", kGpRegisters));
            }
        }
        if (gate_from_name(mnem)) fail(line.number, "quantum instruction '" + t[0] + "' needs a timing label");
        fail(line.number, "unknown mnemonic '" + t[0] + "'");
    }

    std::uint32_t key_value(const Line& line, const std::string& tok, const std::string& key) const
    {
        if (tok.rfind(key + "=", 0) != 0) fail(line.number, "expected " + key + "=<value>");
        auto v = to_int<std::uint32_t>(std::string_view(tok).substr(key.size() + 1));
        if (!v) fail(line.number, "bad value in '" + tok + "'");
        return *v;
    }

    void parse_directive(const Line& line)
    {
        const auto& t = line.tokens;
        if (t[0] == ".qubits") {
            expect_count(line, 2, t[0]);
            auto n = to_int<std::uint32_t>(t[1]);
            if (!n || *n > kMaxQubits) fail(line.number, "bad qubit count");
            program_.qubit_count = *n;
            saw_qubits_ = true;
            return;
        }
        if (t[0] != ".block") fail(line.number, "unknown directive '" + t[0] + "'");
        if (t.size() < 5) fail(line.number, ".block expects name start= end= deps=|prio=");
        BlockDirective b;
        b.name = t[1];
        if (!is_identifier(b.name)) fail(line.number, "bad block name '" + b.name + "'");
        b.pc_start = key_value(line, t[2], "start");
        b.pc_end = key_value(line, t[3], "end");
        const auto& dep = t[4];
        bool prio_style = false;
        if (dep.rfind("prio=", 0) == 0) {
            if (t.size() != 5) fail(line.number, "trailing tokens after prio=");
            b.priority = key_value(line, dep, "prio");
            prio_style = true;
        } else if (dep.rfind("deps=", 0) == 0) {
            // deps=a,b was split on the comma: first name is glued to "deps="
            std::vector<std::string> names;
            auto first = dep.substr(5);
            if (!first.empty()) names.push_back(first);
            for (std::size_t k = 5; k < t.size(); ++k) names.push_back(t[k]);
            if (names.empty()) fail(line.number, "deps= needs names or 'none'");
            if (!(names.size() == 1 && names[0] == "none")) {
                for (auto& n : names)
                    if (!is_identifier(n) || n == "none") fail(line.number, "bad dependency name '" + n + "'");
                b.deps = std::move(names);
            }
        } else {
            fail(line.number, "expected deps= or prio=");
        }
        if (style_ && *style_ != prio_style) fail(line.number, "mixed deps/prio styles in one program");
        style_ = prio_style;
        program_.blocks.push_back(std::move(b));
        program_.block_lines.push_back(line.number);
    }

    void resolve_targets()
    {
        for (const auto& p : pending_) {
            auto it = labels_.find(p.label);
            if (it == labels_.end()) fail(p.line, "dangling branch target '" + p.label + "'");
            program_.instructions[p.index].target = it->second;
        }
        for (std::size_t k = 0; k < program_.instructions.size(); ++k) {
            const auto& i = program_.instructions[k];
            if (i.is_branch() && i.target >= program_.instructions.size())
                fail(program_.instruction_lines[k], "dangling branch target " + std::to_string(i.target));
        }
    }

    std::string_view text_;
    std::vector<Line> lines_;
    std::map<std::string, std::uint32_t> labels_;
    std::vector<PendingTarget> pending_;
    std::optional<bool> style_;
    bool saw_qubits_ = false;
    Program program_;
};

std::string format_angle(std::uint16_t steps)
{
    const double rad = static_cast<double>(steps) * 2.0 * std::numbers::pi / kAngleSteps;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", rad);
    return buf;
}

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).run(); }

std::string print_instruction(const Instruction& i)
{
    std::ostringstream os;
    auto q = [&](int k) { return "q" + std::to_string(i.qubits[k]); };
    auto r = [](int n) { return "r" + std::to_string(n); };
    switch (i.kind) {
    case InstrKind::EndBlock:
        return "END";
    case InstrKind::Mrce:
        os << "MRCE " << r(i.result_reg) << ", " << q(0) << ", " << gate_name(i.op_if_0) << ", "
           << gate_name(i.op_if_1);
        return os.str();
    case InstrKind::Quantum:
        os << i.timing_label << ' ' << gate_name(i.gate) << ' ' << q(0);
        if (is_two_qubit(i.gate)) os << ", " << q(1);
        if (is_rotation(i.gate)) os << ", " << format_angle(i.angle);
        if (i.gate == Gate::MEAS) os << " -> " << r(i.result_reg);
        return os.str();
    case InstrKind::Classical:
        break;
    }
    switch (i.op) {
    case ClassicalOp::LDI:
        os << "LDI " << r(i.rd) << ", " << i.imm;
        break;
    case ClassicalOp::MOV:
        os << "MOV " << r(i.rd) << ", " << r(i.rs1);
        break;
    case ClassicalOp::CMP:
        os << "CMP " << r(i.rs1) << ", " << r(i.rs2);
        break;
    case ClassicalOp::BR:
        os << "BR." << cond_name(i.cond) << ' ' << i.target;
        break;
    case ClassicalOp::JMP:
        os << "JMP " << i.target;
        break;
    case ClassicalOp::FMR:
        os << "FMR " << r(i.rd) << ", " << r(i.result_reg);
        break;
    default:
        os << classical_name(i.op) << ' ' << r(i.rd) << ", " << r(i.rs1) << ", " << r(i.rs2);
        break;
    }
    return os.str();
}

std::string print_program(const Program& p)
{
    std::ostringstream os;
    os << ".qubits " << p.qubit_count << '\n';
    for (const auto& b : p.blocks) {
        os << ".block " << b.name << " start=" << b.pc_start << " end=" << b.pc_end << ' ';
        if (b.priority) {
            os << "prio=" << *b.priority;
        } else if (b.deps.empty()) {
            os << "deps=none";
        } else {
            os << "deps=";
            for (std::size_t k = 0; k < b.deps.size(); ++k) os << (k ? "," : "") << b.deps[k];
        }
        os << '\n';
    }
    for (const auto& i : p.instructions) os << print_instruction(i) << '\n';
    return os.str();
}

}  // namespace qcp
