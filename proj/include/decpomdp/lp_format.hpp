#pragma once

#include <iosfwd>
#include <string>

#include "decpomdp/program.hpp"

namespace decpomdp {

/// Writes the program in LP text format (Maximize / Subject To / Bounds /
/// Binaries / End) with 12 significant digits. Every variable appears in the
/// Bounds section, in program order, so a re-parse reproduces the exact
/// variable and constraint structure.
void write_lp_file(const MixedIntegerProgram& prog, std::ostream& out);
void write_lp_file(const MixedIntegerProgram& prog, const std::string& path);
std::string to_lp_string(const MixedIntegerProgram& prog);

MixedIntegerProgram parse_lp_file(std::istream& in);
MixedIntegerProgram parse_lp_file(const std::string& path);
MixedIntegerProgram parse_lp_string(const std::string& text);

/// Reconstructs the metadata of a variable from its label
/// (x[i][h], z[j], w[i][h], y[i][phi], b[i][h]).
VarMeta meta_from_label(const std::string& label);

}  // namespace decpomdp
