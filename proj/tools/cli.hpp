#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mts/mts.hpp"

namespace mts::cli {

inline constexpr int kOk = 0;
inline constexpr int kFailed = 1;
inline constexpr int kUsage = 2;

namespace detail {

using mts::detail::split;
using mts::detail::trim;

// "1,3" -> bit mask with bit i-1 for participant i.
inline std::uint32_t parse_participants(const std::string& text, int n) {
  std::uint32_t m = 0;
  for (const std::string& item : split(text, ',')) {
    std::uint64_t i = mts::detail::parse_u64(item, "participant");
    if (i < 1 || static_cast<int>(i) > n) throw Error("participant out of range: " + trim(item));
    m |= 1u << (i - 1);
  }
  return m;
}

// "S1.2" or "P3".
inline VariableId parse_variable(const std::string& text) {
  std::string t = trim(text);
  if (t.size() >= 2 && t[0] == 'P') {
    return VariableId::share(static_cast<int>(mts::detail::parse_u64(t.substr(1), "variable")));
  }
  std::size_t dot = t.find('.');
  if (t.size() >= 4 && t[0] == 'S' && dot != std::string::npos) {
    int k = static_cast<int>(mts::detail::parse_u64(t.substr(1, dot - 1), "variable"));
    int j = static_cast<int>(mts::detail::parse_u64(t.substr(dot + 1), "variable"));
    return VariableId::secret(k, j);
  }
  throw Error("malformed variable name: " + text);
}

// Secrets separated by ';', elements of one secret by ','.
inline SecretAssignment parse_secrets(const std::string& text, const LinearScheme& scheme) {
  const std::size_t n = static_cast<std::size_t>(scheme.structure().array.total());
  std::vector<std::string> parts = split(text, ';');
  if (parts.size() != n) {
    throw Error("expected " + std::to_string(n) + " secrets separated by ';', got " + std::to_string(parts.size()));
  }
  SecretAssignment out;
  for (const std::string& p : parts) {
    std::vector<Element> v;
    if (!trim(p).empty()) {
      for (const std::string& e : split(trim(p), ',')) v.push_back(mts::detail::parse_u64(e, "secret value"));
    }
    out.push_back(std::move(v));
  }
  return out;
}

inline std::string join(const std::vector<Element>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

inline std::string list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return "(" + out + ")";
}

inline StructurePair structure_from(int n, const std::string& t) {
  return validate(StructurePair{n, parse_access_array(t)});
}

inline std::string ratio_value(const std::optional<Rational>& v) { return v ? to_string(*v) : "none"; }

}  // namespace detail

struct Options {
  std::string format = "text";
  bool records() const { return format == "records"; }
};

inline int cmd_structure(const Options& o, int n, const std::string& t, std::ostream& out) {
  StructurePair s = detail::structure_from(n, t);
  const AccessArray& arr = s.array;
  if (o.records()) {
    out << "structure n=" << s.n << " array=" << format_access_array(arr) << " subarrays=" << arr.K()
        << " secrets=" << arr.total() << " variables=" << n_variables(s) << "\n";
    for (int k = 1; k <= arr.K(); ++k)
      out << "subarray k=" << k << " t=" << arr.threshold(k) << " m=" << arr.count(k) << "\n";
  } else {
    out << "structure " << to_string(s) << "\n";
    out << "participants " << s.n << ", secrets " << arr.total() << ", variables " << n_variables(s) << "\n";
    for (int k = 1; k <= arr.K(); ++k)
      out << "  sub-array " << k << ": threshold " << arr.threshold(k) << ", " << arr.count(k) << " secret(s)\n";
    out << "optimal ratios:\n";
  }
  for (Security sec : {Security::kStrong, Security::kWeak}) {
    for (Ratio r : all_ratios()) {
      OptimalValue v = optimal_ratio(s, {r, sec});
      if (o.records()) {
        out << "optimal ratio=" << to_string(r) << " security=" << to_string(sec);
        if (v.known) {
          out << " value=" << to_string(v.value) << "\n";
        } else {
          out << " lower=" << to_string(v.lower) << " upper=" << to_string(v.upper) << "\n";
        }
      } else {
        out << "  " << to_string(sec) << " " << to_string(r) << ": ";
        if (v.known) {
          out << to_string(v.value) << "\n";
        } else {
          out << "open, between " << to_string(v.lower) << " and " << to_string(v.upper) << "\n";
        }
      }
    }
  }
  return kOk;
}

inline int cmd_build(const Options& o, int n, const std::string& t, const std::string& ratio,
                     const std::string& security, const std::string& path, std::ostream& out) {
  StructurePair s = detail::structure_from(n, t);
  RatioKind kind{parse_ratio(ratio), parse_security(security)};
  LinearScheme scheme = build_optimal(s, kind);
  write_file(path, serialize(scheme, kind.security));
  std::string label = scheme.recipe() ? scheme.recipe()->label : "";
  if (o.records()) {
    out << "scheme file=" << path << " q=" << scheme.modulus().value() << " rows=" << scheme.n_rows()
        << " layout=" << label << "\n";
  } else {
    out << "wrote " << path << ": " << to_string(s) << " over F_" << scheme.modulus().value() << ", "
        << scheme.n_rows() << " rows (" << label << ")\n";
  }
  return kOk;
}

inline Security security_for(const SchemeFile& f, const std::string& flag) {
  if (!flag.empty()) return parse_security(flag);
  return f.security.value_or(Security::kWeak);
}

inline int cmd_verify(const Options& o, const std::string& path, const std::string& security, std::ostream& out) {
  SchemeFile f = parse_scheme(read_file(path));
  Security sec = security_for(f, security);
  VerificationReport rep = check_conditions(f.scheme, sec);
  const std::pair<const char*, const CheckResult*> rows[] = {
      {"independence", &rep.independence}, {"decodable", &rep.decodable}, {"secure", &rep.secure}};
  if (o.records()) {
    out << "verify security=" << to_string(sec) << " result=" << (rep.ok() ? "pass" : "fail") << "\n";
    for (const auto& [name, r] : rows) {
      out << "check condition=" << name << " result=" << (r->pass ? "pass" : "fail") << " checks=" << r->checks;
      if (!r->pass) out << " witness=" << r->witness;
      out << "\n";
    }
  } else {
    out << to_string(f.scheme.structure()) << " " << to_string(sec) << " security\n";
    for (const auto& [name, r] : rows) {
      out << "  " << name << ": " << (r->pass ? "pass" : "FAIL") << " (" << r->checks << " checks)";
      if (!r->pass) out << "\n    witness: " << r->witness;
      out << "\n";
    }
    out << (rep.ok() ? "valid" : "INVALID") << "\n";
  }
  return rep.ok() ? kOk : kFailed;
}

inline int cmd_ratios(const Options& o, const std::string& path, std::ostream& out) {
  SchemeFile f = parse_scheme(read_file(path));
  RatioReport rep = ratios(f.scheme);
  const StructurePair& s = f.scheme.structure();
  if (o.records()) {
    for (std::size_t i = 0; i < n_variables(s); ++i)
      out << "length var=" << to_string(variable_at(s, i)) << " value=" << f.scheme.width(i) << "\n";
    out << "rank set=shares value=" << rep.all_shares << "\n";
    out << "rank set=secrets value=" << rep.all_secrets << "\n";
    for (Ratio r : all_ratios()) out << "ratio name=" << to_string(r) << " value=" << detail::ratio_value(rep.value(r)) << "\n";
  } else {
    out << to_string(s) << " over F_" << f.scheme.modulus().value() << "\n";
    out << "  secret lengths:";
    for (std::size_t w : rep.secret_lengths) out << " " << w;
    out << "\n  share lengths:";
    for (std::size_t w : rep.share_lengths) out << " " << w;
    out << "\n";
    for (Ratio r : all_ratios()) out << "  " << to_string(r) << " = " << detail::ratio_value(rep.value(r)) << "\n";
  }
  return kOk;
}

inline int cmd_audit(const Options& o, const std::string& path, const std::string& security, bool all_orders,
                     std::size_t max_instances, std::ostream& out) {
  SchemeFile f = parse_scheme(read_file(path));
  Security sec = security_for(f, security);
  AuditOptions opt;
  opt.all_orders = all_orders;
  opt.max_instances = max_instances;
  std::vector<BoundCheck> checks = audit_bounds(f.scheme, sec, opt);
  std::size_t bad = 0, tight = 0;
  for (const BoundCheck& b : checks) {
    bad += !b.holds;
    tight += b.tight;
  }
  if (o.records()) {
    for (const BoundCheck& b : checks) {
      out << "bound id=" << b.id << " k=" << b.k << " j=" << detail::list(b.secrets)
          << " shares=" << detail::list(b.shares) << " lhs=" << to_string(b.lhs) << " rhs=" << to_string(b.rhs)
          << " holds=" << b.holds << " tight=" << b.tight;
      if (!b.note.empty()) out << " note=" << b.note;
      out << "\n";
    }
    out << "audit checks=" << checks.size() << " tight=" << tight << " violations=" << bad << "\n";
  } else {
    out << to_string(f.scheme.structure()) << " " << to_string(sec) << " security: " << checks.size()
        << " bound instances, " << tight << " tight, " << bad << " violated\n";
    for (const BoundCheck& b : checks) {
      if (b.holds) continue;
      out << "  VIOLATED " << describe(b) << ": " << to_string(b.lhs) << " > " << to_string(b.rhs) << "\n";
    }
  }
  return bad == 0 ? kOk : kFailed;
}

inline int cmd_lp(const Options& o, int n, const std::string& t, const std::string& ratio, const std::string& security,
                  bool dump_rows, std::ostream& out) {
  StructurePair s = detail::structure_from(n, t);
  RatioKind kind{parse_ratio(ratio), parse_security(security)};
  if (dump_rows) out << dump(cone_system(s, kind.security));
  Rational v = lower_bound_ratio(s, kind);
  if (o.records()) {
    out << "lp ratio=" << to_string(kind.ratio) << " security=" << to_string(kind.security)
        << " value=" << to_string(v) << "\n";
  } else {
    out << to_string(s) << " " << to_string(kind) << " lower bound: " << to_string(v) << "\n";
  }
  return kOk;
}

inline int cmd_deal(const Options& o, const std::string& path, const std::string& secrets, std::uint64_t seed,
                    const std::string& bundle_path, std::ostream& out) {
  SchemeFile f = parse_scheme(read_file(path));
  ShareBundle b = deal(f.scheme, detail::parse_secrets(secrets, f.scheme), seed);
  std::string text = serialize(b);
  if (bundle_path.empty()) {
    out << text;
    return kOk;
  }
  write_file(bundle_path, text);
  if (o.records()) {
    out << "bundle file=" << bundle_path << " shares=" << b.shares.size() << "\n";
  } else {
    out << "wrote " << b.shares.size() << " shares to " << bundle_path << "\n";
  }
  return kOk;
}

inline int cmd_reconstruct(const Options& o, const std::string& path, const std::string& bundle_path, int k,
                           const std::string& participants, std::ostream& out) {
  SchemeFile f = parse_scheme(read_file(path));
  ShareBundle b = parse_bundle(read_file(bundle_path));
  if (!participants.empty()) {
    std::uint32_t keep = detail::parse_participants(participants, f.scheme.structure().n);
    std::erase_if(b.shares, [&](const auto& e) { return !(keep & (1u << (e.first - 1))); });
  }
  auto secrets = reconstruct(f.scheme, b, k);
  for (const auto& [v, value] : secrets) {
    if (o.records()) {
      out << "secret var=" << to_string(v) << " value=" << detail::join(value) << "\n";
    } else {
      out << to_string(v) << " = (" << detail::join(value) << ")\n";
    }
  }
  return kOk;
}

inline int cmd_census(const Options& o, const std::string& path, const std::string& participants,
                      const std::string& target, std::ostream& out) {
  SchemeFile f = parse_scheme(read_file(path));
  const StructurePair& s = f.scheme.structure();
  std::uint32_t a = participants.empty() ? 0 : detail::parse_participants(participants, s.n);
  VarMask t = 0;
  for (const std::string& item : detail::split(target, ',')) {
    VariableId v = detail::parse_variable(item);
    if (!v.is_secret()) throw Error("census target must name secrets");
    t |= bit(index_of(s, v));
  }
  CensusTable table = leakage_census(f.scheme, a, t);
  bool ok = table.independent();
  if (o.records()) {
    out << "census participants=" << mts::detail::participants_str(a) << " target=" << describe_mask(s, t)
        << " codewords=" << table.codewords << " independent=" << ok << "\n";
    for (const auto& [sc, row] : table.joint)
      for (const auto& [tc, n] : row)
        out << "count shares=" << detail::join(table.decode(sc, table.share_width))
            << " target=" << detail::join(table.decode(tc, table.target_width)) << " n=" << n << "\n";
  } else {
    out << "census over " << table.codewords << " codewords, shares " << mts::detail::participants_str(a)
        << ", target " << describe_mask(s, t) << "\n";
    out << "  " << table.joint.size() << " share values, " << table.target_marginal().size() << " target values\n";
    out << (ok ? "  target is independent of the shares\n" : "  LEAK: target depends on the shares\n");
  }
  return ok ? kOk : kFailed;
}

// Runs one command line (without the program name). Returns the exit status.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple-threshold secret sharing toolkit"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "records"}));

  int n = 0;
  std::string t, ratio, security, file, out_path, secrets, participants, target, bundle;
  std::uint64_t seed = 0;
  int k = 1;
  bool all_orders = false, dump_rows = false;
  std::size_t max_instances = AuditOptions{}.max_instances;
  const auto ratios_set = CLI::IsMember({"sigma", "sigma-avg", "tau", "tau-avg"});
  const auto security_set = CLI::IsMember({"strong", "weak"});

  auto add_structure = [&](CLI::App* c) {
    c->add_option("--n", n, "Number of participants")->required();
    c->add_option("--t", t, "Thresholds, non-increasing, comma separated")->required();
  };
  auto add_kind = [&](CLI::App* c) {
    c->add_option("--ratio", ratio, "sigma | sigma-avg | tau | tau-avg")->required()->check(ratios_set);
    c->add_option("--security", security, "strong | weak")->required()->check(security_set);
  };

  CLI::App* c_structure = app.add_subcommand("structure", "Describe a structure and its optimal ratios");
  add_structure(c_structure);

  CLI::App* c_build = app.add_subcommand("build", "Build an optimal scheme and write it to a file");
  add_structure(c_build);
  add_kind(c_build);
  c_build->add_option("--out", out_path, "Scheme file to write")->required();

  CLI::App* c_verify = app.add_subcommand("verify", "Check the decodability and security conditions");
  c_verify->add_option("scheme", file)->required();
  c_verify->add_option("--security", security, "Override the file's security level")->check(security_set);

  CLI::App* c_ratios = app.add_subcommand("ratios", "Print share lengths and the four ratios");
  c_ratios->add_option("scheme", file)->required();

  CLI::App* c_audit = app.add_subcommand("audit", "Evaluate the converse bounds on a scheme");
  c_audit->add_option("scheme", file)->required();
  c_audit->add_option("--security", security, "Override the file's security level")->check(security_set);
  c_audit->add_flag("--all-orders", all_orders, "Sweep every secret and share role assignment");
  c_audit->add_option("--max-instances", max_instances, "Cap on instances per bound");

  CLI::App* c_lp = app.add_subcommand("lp", "Exact LP lower bound over the Shannon cone");
  add_structure(c_lp);
  add_kind(c_lp);
  c_lp->add_flag("--dump", dump_rows, "Print the constraint rows first");

  CLI::App* c_deal = app.add_subcommand("deal", "Deal shares for given secrets");
  c_deal->add_option("scheme", file)->required();
  c_deal->add_option("--secrets", secrets, "Secrets in canonical order, ';' between secrets, ',' within")->required();
  c_deal->add_option("--seed", seed, "Random seed");
  c_deal->add_option("--out", out_path, "Share file to write (default: stdout)");

  CLI::App* c_reconstruct = app.add_subcommand("reconstruct", "Recover secrets from shares");
  c_reconstruct->add_option("scheme", file)->required();
  c_reconstruct->add_option("shares", bundle)->required();
  c_reconstruct->add_option("--k", k, "Recover sub-arrays k..K");
  c_reconstruct->add_option("--participants", participants, "Use only these participants");

  CLI::App* c_census = app.add_subcommand("census", "Enumerate codewords and test a secret for leakage");
  c_census->add_option("scheme", file)->required();
  c_census->add_option("--participants", participants, "Share holders, comma separated")->required();
  c_census->add_option("--target", target, "Secrets, e.g. S1.1,S1.2")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (c_structure->parsed()) return cmd_structure(o, n, t, out);
    if (c_build->parsed()) return cmd_build(o, n, t, ratio, security, out_path, out);
    if (c_verify->parsed()) return cmd_verify(o, file, security, out);
    if (c_ratios->parsed()) return cmd_ratios(o, file, out);
    if (c_audit->parsed()) return cmd_audit(o, file, security, all_orders, max_instances, out);
    if (c_lp->parsed()) return cmd_lp(o, n, t, ratio, security, dump_rows, out);
    if (c_deal->parsed()) return cmd_deal(o, file, secrets, seed, out_path, out);
    if (c_reconstruct->parsed()) return cmd_reconstruct(o, file, bundle, k, participants, out);
    if (c_census->parsed()) return cmd_census(o, file, participants, target, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace mts::cli
