#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mts/error.hpp"
#include "mts/field.hpp"
#include "mts/scheme.hpp"
#include "mts/structure.hpp"

namespace mts {

// Text form:
//   mts-scheme v1
//   q 7
//   n_rows 3
//   structure 3 3,2
//   security weak          (optional)
//   S 1 1 : 1,2,4
//   P 1 : 1,1,1;0,1,2
// One line per variable in canonical order. A column is its entries top to
// bottom separated by ','; columns are separated by ';'. Zero-width blocks
// leave the list empty.
struct SchemeFile {
  LinearScheme scheme;
  std::optional<Security> security;
};

namespace detail {

inline std::string format_block(const MatrixFq& b) {
  std::string out;
  for (std::size_t c = 0; c < b.cols(); ++c) {
    if (c > 0) out += ";";
    for (std::size_t r = 0; r < b.rows(); ++r) {
      if (r > 0) out += ",";
      out += std::to_string(b(r, c));
    }
  }
  return out;
}

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::string t = trim(text);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    throw Error("malformed " + what + ": '" + text + "'");
  }
  try {
    return std::stoull(t);
  } catch (const std::exception&) {
    throw Error("malformed " + what + ": '" + text + "'");
  }
}

inline MatrixFq parse_block(const std::string& text, Prime q, std::size_t rows) {
  std::string t = trim(text);
  if (t.empty()) return MatrixFq(q, rows, 0);
  std::vector<std::string> cols = split(t, ';');
  MatrixFq m(q, rows, cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    std::vector<std::string> entries = split(trim(cols[c]), ',');
    if (entries.size() != rows) throw Error("column length does not match n_rows");
    for (std::size_t r = 0; r < rows; ++r) {
      std::uint64_t v = parse_u64(entries[r], "matrix entry");
      if (v >= q.value()) throw Error("matrix entry out of range");
      m(r, c) = v;
    }
  }
  return m;
}

}  // namespace detail

inline std::string serialize(const LinearScheme& scheme, std::optional<Security> security = std::nullopt) {
  const StructurePair& s = scheme.structure();
  std::ostringstream out;
  out << "mts-scheme v1\n";
  out << "q " << scheme.modulus().value() << "\n";
  out << "n_rows " << scheme.n_rows() << "\n";
  out << "structure " << s.n << " " << format_access_array(s.array) << "\n";
  if (security) out << "security " << to_string(*security) << "\n";
  for (std::size_t i = 0; i < scheme.n_variables(); ++i) {
    VariableId v = variable_at(s, i);
    if (v.is_secret()) {
      out << "S " << v.a << " " << v.b << " :";
    } else {
      out << "P " << v.a << " :";
    }
    std::string cols = detail::format_block(scheme.block(i));
    if (!cols.empty()) out << " " << cols;
    out << "\n";
  }
  return out.str();
}

inline SchemeFile parse_scheme(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next = [&]() -> std::optional<std::string> {
    while (std::getline(in, line)) {
      std::string t = detail::trim(line);
      if (!t.empty() && t[0] != '#') return t;
    }
    return std::nullopt;
  };
  auto keyed = [&](const std::string& key) {
    auto l = next();
    if (!l || l->rfind(key + " ", 0) != 0) throw Error("scheme file: expected '" + key + "'");
    return detail::trim(l->substr(key.size() + 1));
  };

  auto header = next();
  if (!header || *header != "mts-scheme v1") throw Error("scheme file: bad header");
  Prime q(detail::parse_u64(keyed("q"), "q"));
  std::size_t rows = detail::parse_u64(keyed("n_rows"), "n_rows");
  std::string st = keyed("structure");
  std::size_t sp = st.find(' ');
  if (sp == std::string::npos) throw Error("scheme file: malformed structure");
  StructurePair s{static_cast<int>(detail::parse_u64(st.substr(0, sp), "participant count")),
                  parse_access_array(detail::trim(st.substr(sp + 1)))};
  validate(s);

  std::optional<Security> security;
  std::vector<MatrixFq> blocks;
  std::size_t idx = 0;
  while (auto l = next()) {
    if (l->rfind("security ", 0) == 0 && idx == 0 && !security) {
      security = parse_security(detail::trim(l->substr(9)));
      continue;
    }
    std::size_t colon = l->find(':');
    if (colon == std::string::npos) throw Error("scheme file: missing ':' in '" + *l + "'");
    std::istringstream head(l->substr(0, colon));
    std::string kind;
    head >> kind;
    VariableId v;
    if (kind == "S") {
      int k = 0, j = 0;
      if (!(head >> k >> j)) throw Error("scheme file: malformed secret label");
      v = VariableId::secret(k, j);
    } else if (kind == "P") {
      int i = 0;
      if (!(head >> i)) throw Error("scheme file: malformed share label");
      v = VariableId::share(i);
    } else {
      throw Error("scheme file: unknown line '" + *l + "'");
    }
    if (idx >= n_variables(s) || !(variable_at(s, idx) == v)) {
      throw Error("scheme file: variables out of canonical order at " + to_string(v));
    }
    blocks.push_back(detail::parse_block(l->substr(colon + 1), q, rows));
    ++idx;
  }
  if (idx != n_variables(s)) throw Error("scheme file: missing variables");
  return SchemeFile{LinearScheme(s, q, rows, std::move(blocks)), security};
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Identifies the generator matrix and structure; the security line is ignored.
inline std::uint64_t fingerprint(const LinearScheme& scheme) { return fnv1a(serialize(scheme)); }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("cannot write " + path);
}

}  // namespace mts
