#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "semiconj/config.hpp"
#include "semiconj/errors.hpp"
#include "semiconj/grid_function.hpp"
#include "semiconj/int_matrix.hpp"
#include "semiconj/presets.hpp"
#include "semiconj/torus_map.hpp"

namespace semiconj {

/// Writes a text file through a temp file and rename, so readers never see a
/// partial file.
inline void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) fail(errc::io_error, "cannot open '" + tmp + "' for writing");
    os << content;
    if (!os) fail(errc::io_error, "failed writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(errc::io_error, "cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

inline void atomic_save_grid(const std::string& path, const GridFunction& g) {
  const std::string tmp = path + ".tmp";
  g.save(tmp);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(errc::io_error, "cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_double(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(errc::parse_error, "bad number '" + s + "' in " + ctx);
  }
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& ctx) {
  std::vector<int> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      fail(errc::parse_error, "bad integer '" + tok + "' in " + ctx);
    }
  }
  return out;
}

/// Parses "amp, f1 f2 ... fn, phase; amp, ..., phase" into one BumpSpec per
/// output component.
inline std::vector<BumpSpec> parse_bumps(const std::string& text, int n) {
  std::vector<BumpSpec> comps;
  std::stringstream ss(text);
  std::string term;
  while (std::getline(ss, term, ';')) {
    term = trim(term);
    if (term.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ts(term);
    std::string f;
    while (std::getline(ts, f, ',')) fields.push_back(trim(f));
    if (fields.size() != 3)
      fail(errc::parse_error, "bump term '" + term + "' must be amp, freq-vector, phase");
    BumpSpec b;
    b.amp = parse_double(fields[0], "bump amplitude");
    b.freq = parse_int_list(fields[1], "bump frequency");
    b.phase = parse_double(fields[2], "bump phase");
    if (static_cast<int>(b.freq.size()) != n)
      fail(errc::parse_error, "bump frequency vector in '" + term + "' must have " +
                                  std::to_string(n) + " entries");
    comps.push_back(std::move(b));
  }
  if (static_cast<int>(comps.size()) != n)
    fail(errc::parse_error, "bump line must list exactly one term per component (" +
                                std::to_string(n) + " expected, " +
                                std::to_string(comps.size()) + " given)");
  return comps;
}

}  // namespace detail

/// Loads the action text format:
///
///   [action]
///   n = 2
///
///   [generator a]
///   matrix = 1,2;0,1
///   bump = 0.01, 0 1, 0.13; 0.008, 1 0, 0.37
///
///   [generator b]
///   matrix = 1,0;2,1
///   delta = b_delta.scgf
///
/// '#' starts a comment. A generator with neither bump nor delta is
/// unperturbed. Bumps are sampled at resolution res (0 = the default for n);
/// delta paths are resolved relative to the file.
inline ActionSpec load_action(const std::string& path, int res = 0) {
  std::ifstream is(path);
  if (!is) fail(errc::io_error, "cannot open action file '" + path + "'");
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();

  ActionSpec action;
  action.n = 0;
  struct PendingGen {
    std::string name;
    std::string matrix;
    std::string bump;
    std::string delta;
    int line = 0;
  };
  std::vector<PendingGen> pending;
  bool in_action = false;
  int line_no = 0;
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(errc::parse_error, path + ":" + std::to_string(line_no) + ": unterminated section");
      const std::string head = detail::trim(line.substr(1, line.size() - 2));
      if (head == "action") {
        in_action = true;
      } else if (head.rfind("generator", 0) == 0) {
        in_action = false;
        const std::string name = detail::trim(head.substr(9));
        if (name.empty())
          fail(errc::parse_error,
               path + ":" + std::to_string(line_no) + ": generator section needs a name");
        pending.push_back(PendingGen{name, "", "", "", line_no});
      } else {
        fail(errc::parse_error,
             path + ":" + std::to_string(line_no) + ": unknown section '" + head + "'");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(errc::parse_error, path + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (in_action) {
      if (key == "n") {
        try {
          action.n = std::stoi(value);
        } catch (const std::exception&) {
          fail(errc::parse_error, path + ":" + std::to_string(line_no) + ": bad dimension");
        }
      } else {
        fail(errc::parse_error,
             path + ":" + std::to_string(line_no) + ": unknown action key '" + key + "'");
      }
    } else {
      if (pending.empty())
        fail(errc::parse_error,
             path + ":" + std::to_string(line_no) + ": key outside of any section");
      PendingGen& g = pending.back();
      if (key == "matrix")
        g.matrix = value;
      else if (key == "bump")
        g.bump = value;
      else if (key == "delta")
        g.delta = value;
      else
        fail(errc::parse_error,
             path + ":" + std::to_string(line_no) + ": unknown generator key '" + key + "'");
    }
  }
  if (action.n < 1) fail(errc::parse_error, path + ": missing [action] section with n");
  if (pending.empty()) fail(errc::parse_error, path + ": no generator sections");
  const int r = res > 0 ? res : default_resolution(action.n);
  for (const auto& g : pending) {
    if (g.matrix.empty())
      fail(errc::parse_error, path + ": generator '" + g.name + "' has no matrix");
    IntMatrix A = parse_matrix(g.matrix);
    if (A.n() != action.n)
      fail(errc::parse_error, path + ": generator '" + g.name + "' matrix has wrong dimension");
    if (!g.bump.empty() && !g.delta.empty())
      fail(errc::parse_error,
           path + ": generator '" + g.name + "' has both bump and delta lines");
    if (!g.bump.empty()) {
      action.generators.push_back(
          {g.name, TorusMap(A, delta_from_bumps(action.n, r, detail::parse_bumps(g.bump,
                                                                                 action.n)))});
    } else if (!g.delta.empty()) {
      const std::filesystem::path p = std::filesystem::path(g.delta).is_absolute()
                                          ? std::filesystem::path(g.delta)
                                          : dir / g.delta;
      GridFunction delta = GridFunction::load(p.string());
      if (delta.dim() != action.n || delta.codim() != action.n)
        fail(errc::parse_error,
             path + ": delta grid for '" + g.name + "' has mismatched dimensions");
      action.generators.push_back({g.name, TorusMap(A, std::move(delta))});
    } else {
      action.generators.push_back({g.name, TorusMap::linear(A)});
    }
  }
  action.validate();
  return action;
}

/// Writes an action back to the text format. Nontrivial displacement fields
/// are stored bit-exactly as SCGF files "<stem>_<generator>.scgf" next to the
/// action file.
inline void save_action(const ActionSpec& action, const std::string& path) {
  const std::filesystem::path p(path);
  const std::filesystem::path dir = p.parent_path();
  const std::string stem = p.stem().string();
  std::ostringstream os;
  os << "[action]\n";
  os << "n = " << action.n << "\n";
  for (const auto& g : action.generators) {
    os << "\n[generator " << g.name << "]\n";
    os << "matrix = " << g.map.matrix().to_string() << "\n";
    const GridFunction& d = g.map.delta();
    if (d.node_count() > 1 || d.sup_norm() > 0.0) {
      const std::string fname = stem + "_" + g.name + ".scgf";
      atomic_save_grid((dir / fname).string(), d);
      os << "delta = " << fname << "\n";
    }
  }
  atomic_write_text(path, os.str());
}

}  // namespace semiconj
