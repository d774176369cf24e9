#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lp.hpp"

// Plain-text LP interchange: writes models in the widely understood CPLEX LP
// format (variables named x0..x{n-1}, constraints c0..c{m-1}) and reads back
// "name value" solution listings, so instances too big for the built-in
// solver can run through an external one and return.

namespace depround {

namespace detail {

inline std::string format_coeff(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Appends one linear expression, wrapping lines around 100 columns.
inline void append_terms(std::string& out, const std::vector<std::pair<int, double>>& terms) {
  bool first = true;
  std::size_t line_len = out.size() - (out.rfind('\n') + 1);
  for (const auto& [j, a] : terms) {
    if (a == 0.0) continue;
    std::string piece;
    if (first) {
      piece = (a < 0.0 ? "- " : "") + format_coeff(std::abs(a)) + " x" + std::to_string(j);
      first = false;
    } else {
      piece = (a < 0.0 ? " - " : " + ") + format_coeff(std::abs(a)) + " x" + std::to_string(j);
    }
    if (line_len + piece.size() > 100) {
      out += "\n   ";
      line_len = 3;
      if (piece[0] == ' ') piece.erase(0, 1);
    }
    out += piece;
    line_len += piece.size();
  }
  if (first) out += "0 x0";  // empty expression placeholder
}

}  // namespace detail

inline std::string write_lp_string(const LpModel& model,
                                   const std::vector<int>& integer_vars = {}) {
  model.validate();
  std::string out;
  out += model.sense == Sense::maximize ? "Maximize\n" : "Minimize\n";
  out += " obj: ";
  {
    std::vector<std::pair<int, double>> obj_terms;
    for (int j = 0; j < model.num_vars(); ++j)
      if (model.objective[j] != 0.0) obj_terms.emplace_back(j, model.objective[j]);
    detail::append_terms(out, obj_terms);
  }
  out += "\nSubject To\n";
  for (std::size_t r = 0; r < model.rows.size(); ++r) {
    const auto& row = model.rows[r];
    out += " c" + std::to_string(r) + ": ";
    detail::append_terms(out, row.terms);
    switch (row.type) {
      case RowType::le: out += " <= "; break;
      case RowType::ge: out += " >= "; break;
      case RowType::eq: out += " = "; break;
    }
    out += detail::format_coeff(row.rhs);
    out += "\n";
  }
  out += "Bounds\n";
  for (int j = 0; j < model.num_vars(); ++j) {
    const double lo = model.lower[j], hi = model.upper[j];
    const std::string name = "x" + std::to_string(j);
    if (lo == 0.0 && hi == kInf) continue;  // the format's default range
    if (lo == hi) {
      out += " " + name + " = " + detail::format_coeff(lo) + "\n";
    } else if (hi == kInf) {
      out += " " + name + " >= " + detail::format_coeff(lo) + "\n";
    } else if (lo == 0.0) {
      out += " " + name + " <= " + detail::format_coeff(hi) + "\n";
    } else {
      out += " " + detail::format_coeff(lo) + " <= " + name + " <= " +
             detail::format_coeff(hi) + "\n";
    }
  }
  if (!integer_vars.empty()) {
    out += "General\n";
    std::size_t line_len = 0;
    for (int j : integer_vars) {
      if (j < 0 || j >= model.num_vars())
        throw std::invalid_argument("integer variable index out of range");
      const std::string name = " x" + std::to_string(j);
      if (line_len + name.size() > 100) {
        out += "\n";
        line_len = 0;
      }
      out += name;
      line_len += name.size();
    }
    out += "\n";
  }
  out += "End\n";
  return out;
}

inline void write_lp_file(const LpModel& model, const std::string& path,
                          const std::vector<int>& integer_vars = {}) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << write_lp_string(model, integer_vars);
  if (!f) throw std::runtime_error("write to " + path + " failed");
}

// Parses a solution listing with one "x<idx> <value>" pair per line. Blank
// lines and lines starting with '#' or '\' are skipped; unlisted variables
// default to zero; any unknown name is an error naming the offending line.
inline std::vector<double> read_solution_string(const std::string& text, int num_vars) {
  std::vector<double> x(num_vars, 0.0);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name)) continue;
    if (name[0] == '#' || name[0] == '\\') continue;
    double value = 0.0;
    if (!(ls >> value))
      throw std::runtime_error("line " + std::to_string(line_no) + ": missing value");
    if (name.size() < 2 || name[0] != 'x')
      throw std::runtime_error("line " + std::to_string(line_no) + ": unknown variable '" +
                               name + "'");
    int idx = -1;
    const auto [p, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
    if (ec != std::errc{} || p != name.data() + name.size() || idx < 0 || idx >= num_vars)
      throw std::runtime_error("line " + std::to_string(line_no) + ": unknown variable '" +
                               name + "'");
    x[idx] = value;
  }
  return x;
}

inline std::vector<double> read_solution_file(const std::string& path, int num_vars) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return read_solution_string(buf.str(), num_vars);
}

}  // namespace depround
