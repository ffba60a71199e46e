#include "decpomdp/lp_format.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace decpomdp {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// terms written as "c name", joined by " + " / " - ", wrapped onto
// continuation lines
void write_terms(std::ostream& out, const std::vector<std::pair<int, double>>& coeffs,
                 const MixedIntegerProgram& prog, std::size_t indent) {
    std::size_t col = indent;
    bool first = true;
    for (auto [j, c] : coeffs) {
        std::string term;
        if (first) {
            term = (c < 0 ? "- " : "") + num(std::abs(c)) + " " + prog.vars[j].label;
            first = false;
        } else {
            term = std::string(c < 0 ? "- " : "+ ") + num(std::abs(c)) + " " + prog.vars[j].label;
        }
        if (col + term.size() + 1 > 200) {
            out << "\n   ";
            col = 3;
        } else if (col > indent) {
            out << ' ';
        }
        out << term;
        col += term.size() + 1;
    }
    if (first) out << "0 " << (prog.vars.empty() ? "x" : prog.vars[0].label);
}

}  // namespace

void write_lp_file(const MixedIntegerProgram& prog, std::ostream& out) {
    out << "\\ " << (prog.name.empty() ? "program" : prog.name) << "\n";
    out << (prog.sense == Sense::maximize ? "Maximize" : "Minimize") << "\n obj: ";
    write_terms(out, prog.objective, prog, 6);
    out << "\nSubject To\n";
    for (const auto& row : prog.rows) {
        out << ' ' << row.label << ": ";
        write_terms(out, row.coeffs, prog, row.label.size() + 3);
        switch (row.rel) {
            case Relation::less_equal: out << " <= "; break;
            case Relation::equal: out << " = "; break;
            case Relation::greater_equal: out << " >= "; break;
        }
        out << num(row.rhs) << "\n";
    }
    out << "Bounds\n";
    for (const auto& v : prog.vars) {
        if (v.lower <= -kInf && v.upper >= kInf)
            out << ' ' << v.label << " free\n";
        else if (v.upper >= kInf)
            out << ' ' << v.label << " >= " << num(v.lower) << "\n";
        else if (v.lower <= -kInf)
            out << ' ' << v.label << " <= " << num(v.upper) << "\n";
        else
            out << ' ' << num(v.lower) << " <= " << v.label << " <= " << num(v.upper) << "\n";
    }
    bool any_bin = false;
    for (const auto& v : prog.vars) any_bin |= v.kind == VarKind::binary;
    if (any_bin) {
        out << "Binaries\n";
        std::size_t col = 0;
        for (const auto& v : prog.vars) {
            if (v.kind != VarKind::binary) continue;
            if (col == 0)
                out << ' ';
            else if (col + v.label.size() + 1 > 200) {
                out << "\n ";
                col = 0;
            } else {
                out << ' ';
            }
            out << v.label;
            col += v.label.size() + 1;
        }
        out << "\n";
    }
    out << "End\n";
}

void write_lp_file(const MixedIntegerProgram& prog, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    write_lp_file(prog, f);
}

std::string to_lp_string(const MixedIntegerProgram& prog) {
    std::ostringstream ss;
    write_lp_file(prog, ss);
    return ss.str();
}

VarMeta meta_from_label(const std::string& label) {
    VarMeta m;
    if (label.empty()) return m;
    char role = label[0];
    if (role != 'x' && role != 'z' && role != 'w' && role != 'y' && role != 'b') return m;
    std::vector<long> idx;
    std::size_t p = 1;
    while (p < label.size() && label[p] == '[') {
        std::size_t q = label.find(']', p);
        if (q == std::string::npos) return m;
        idx.push_back(std::strtol(label.substr(p + 1, q - p - 1).c_str(), nullptr, 10));
        p = q + 1;
    }
    if (role == 'z' && idx.size() == 1) {
        m.role = 'z';
        m.id = idx[0];
    } else if (idx.size() == 2) {
        m.role = role;
        m.agent = static_cast<int>(idx[0]);
        m.id = idx[1];
    }
    return m;
}

namespace {

struct Tokens {
    std::vector<std::string> tok;
    std::size_t pos = 0;
    bool done() const { return pos >= tok.size(); }
    const std::string& peek() const { return tok[pos]; }
    std::string take() { return tok[pos++]; }
};

bool is_number(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    return i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.');
}

bool is_section(const std::string& lower, const char* what) { return lower == what; }

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

MixedIntegerProgram parse_lp_file(std::istream& in) {
    // tokenize, dropping comment lines; keep section markers as tokens
    Tokens ts;
    std::string line;
    std::string name = "program";
    bool first_comment = true;
    while (std::getline(in, line)) {
        std::size_t c = line.find('\\');
        if (c != std::string::npos) {
            if (first_comment && c == 0) {
                std::string n = line.substr(1);
                std::size_t b = n.find_first_not_of(" \t");
                if (b != std::string::npos) name = n.substr(b);
                first_comment = false;
            }
            line = line.substr(0, c);
        }
        std::istringstream ls(line);
        std::string t;
        while (ls >> t) ts.tok.push_back(t);
    }

    MixedIntegerProgram prog;
    prog.name = name;

    enum Section { none, objective, rows, bounds, binaries, end };
    auto section_of = [&](const std::string& t, Section& out_sec) {
        std::string lo = lower(t);
        if (is_section(lo, "maximize") || is_section(lo, "maximise")) {
            prog.sense = Sense::maximize;
            out_sec = objective;
            return true;
        }
        if (is_section(lo, "minimize") || is_section(lo, "minimise")) {
            prog.sense = Sense::minimize;
            out_sec = objective;
            return true;
        }
        if (is_section(lo, "subject")) return false;  // handled with the next token
        if (is_section(lo, "st") || is_section(lo, "s.t.")) {
            out_sec = rows;
            return true;
        }
        if (is_section(lo, "bounds")) {
            out_sec = bounds;
            return true;
        }
        if (is_section(lo, "binaries") || is_section(lo, "binary") || is_section(lo, "bin")) {
            out_sec = binaries;
            return true;
        }
        if (is_section(lo, "end")) {
            out_sec = end;
            return true;
        }
        return false;
    };

    // two passes: discover the full variable list from Bounds/Binaries tokens
    // first (the writer lists every variable there in program order), then
    // parse the algebra
    std::unordered_map<std::string, int> var_of;
    {
        Section s = none;
        for (std::size_t i = 0; i < ts.tok.size(); ++i) {
            const std::string& t = ts.tok[i];
            std::string lo = lower(t);
            if (lo == "subject" && i + 1 < ts.tok.size() && lower(ts.tok[i + 1]) == "to") {
                s = rows;
                ++i;
                continue;
            }
            Section ns;
            if (section_of(t, ns)) {
                s = ns;
                continue;
            }
            if (s != bounds && s != binaries) continue;
            if (is_number(t) || t == "<=" || t == ">=" || t == "=" || lo == "free") continue;
            if (!var_of.count(t)) {
                var_of.emplace(t, static_cast<int>(prog.vars.size()));
                prog.add_variable(t, 0.0, kInf, VarKind::continuous, meta_from_label(t));
            }
        }
    }
    auto var_index = [&](const std::string& t) {
        auto it = var_of.find(t);
        if (it != var_of.end()) return it->second;
        int j = prog.add_variable(t, 0.0, kInf, VarKind::continuous, meta_from_label(t));
        var_of.emplace(t, j);
        return j;
    };

    // reads "c1 v1 + c2 v2 - v3 ..." until a relation or section token
    auto parse_terms = [&](std::size_t& i, std::vector<std::pair<int, double>>& coeffs) {
        double sign = 1.0;
        bool have_coeff = false;
        double coeff = 1.0;
        while (i < ts.tok.size()) {
            const std::string& t = ts.tok[i];
            if (t == "+" ) {
                sign = 1.0;
                ++i;
                continue;
            }
            if (t == "-") {
                sign = -sign;
                ++i;
                continue;
            }
            if (t == "<=" || t == ">=" || t == "=") break;
            Section ns;
            std::string lo = lower(t);
            if (lo == "subject" || section_of(t, ns)) break;
            if (t.size() > 1 && t.back() == ':') break;  // next row label
            if (is_number(t)) {
                coeff = std::strtod(t.c_str(), nullptr);
                have_coeff = true;
                ++i;
                continue;
            }
            coeffs.emplace_back(var_index(t), sign * (have_coeff ? coeff : 1.0));
            sign = 1.0;
            coeff = 1.0;
            have_coeff = false;
            ++i;
        }
    };

    Section s = none;
    std::size_t i = 0;
    while (i < ts.tok.size()) {
        const std::string& t = ts.tok[i];
        std::string lo = lower(t);
        if (lo == "subject" && i + 1 < ts.tok.size() && lower(ts.tok[i + 1]) == "to") {
            s = rows;
            i += 2;
            continue;
        }
        Section ns;
        if (section_of(t, ns)) {
            s = ns;
            ++i;
            continue;
        }
        switch (s) {
            case objective: {
                if (t.size() > 1 && t.back() == ':') ++i;  // "obj:"
                std::vector<std::pair<int, double>> coeffs;
                parse_terms(i, coeffs);
                prog.objective = std::move(coeffs);
                break;
            }
            case rows: {
                ConstraintRow row;
                if (t.size() > 1 && t.back() == ':') {
                    row.label = t.substr(0, t.size() - 1);
                    ++i;
                } else {
                    row.label = "c" + std::to_string(prog.rows.size());
                }
                parse_terms(i, row.coeffs);
                if (i >= ts.tok.size()) throw std::runtime_error("row " + row.label + " truncated");
                std::string rel = ts.tok[i++];
                if (rel == "<=")
                    row.rel = Relation::less_equal;
                else if (rel == ">=")
                    row.rel = Relation::greater_equal;
                else if (rel == "=")
                    row.rel = Relation::equal;
                else
                    throw std::runtime_error("row " + row.label + ": expected a relation, got " +
                                             rel);
                if (i >= ts.tok.size() || !is_number(ts.tok[i]))
                    throw std::runtime_error("row " + row.label + ": missing right-hand side");
                row.rhs = std::strtod(ts.tok[i++].c_str(), nullptr);
                prog.add_row(std::move(row));
                break;
            }
            case bounds: {
                // forms: "l <= v <= u", "v <= u", "v >= l", "v free"
                if (is_number(t)) {
                    double lo_v = std::strtod(ts.tok[i].c_str(), nullptr);
                    if (i + 4 >= ts.tok.size() || ts.tok[i + 1] != "<=")
                        throw std::runtime_error("malformed bound around " + t);
                    int j = var_index(ts.tok[i + 2]);
                    if (ts.tok[i + 3] != "<=" || !is_number(ts.tok[i + 4]))
                        throw std::runtime_error("malformed bound around " + t);
                    prog.vars[j].lower = lo_v;
                    prog.vars[j].upper = std::strtod(ts.tok[i + 4].c_str(), nullptr);
                    i += 5;
                } else {
                    int j = var_index(t);
                    if (i + 1 < ts.tok.size() && lower(ts.tok[i + 1]) == "free") {
                        prog.vars[j].lower = -kInf;
                        prog.vars[j].upper = kInf;
                        prog.vars[j].kind = VarKind::free_var;
                        i += 2;
                    } else if (i + 2 < ts.tok.size() &&
                               (ts.tok[i + 1] == "<=" || ts.tok[i + 1] == ">=") &&
                               is_number(ts.tok[i + 2])) {
                        double v = std::strtod(ts.tok[i + 2].c_str(), nullptr);
                        if (ts.tok[i + 1] == "<=") {
                            prog.vars[j].upper = v;
                            prog.vars[j].lower = 0.0;
                        } else {
                            prog.vars[j].lower = v;
                        }
                        i += 3;
                    } else {
                        throw std::runtime_error("malformed bound around " + t);
                    }
                }
                break;
            }
            case binaries: {
                int j = var_index(t);
                prog.vars[j].kind = VarKind::binary;
                prog.vars[j].lower = 0.0;
                prog.vars[j].upper = 1.0;
                ++i;
                break;
            }
            default: throw std::runtime_error("unexpected token before any section: " + t);
        }
    }
    return prog;
}

MixedIntegerProgram parse_lp_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return parse_lp_file(f);
}

MixedIntegerProgram parse_lp_string(const std::string& text) {
    std::istringstream ss(text);
    return parse_lp_file(ss);
}

}  // namespace decpomdp
