// SPDX-License-Identifier: Apache-2.0
#include "avf/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "avf/experiments.hpp"

namespace avf {
namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model", {"potential", "coeffs", "m", "d", "v", "sigma", "x0", "c0"}},
      {"integrator", {"scheme", "newton_tol", "newton_max_iter", "quadrature_nodes", "taming"}},
      {"experiment",
       {"kind", "T", "h_list", "h_ref", "samples", "seed", "beta", "bandwidth_rule",
        "grid_nodes", "fd_pairs", "fd_eps", "bootstrap"}},
      {"output", {"directory", "formats"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> plain_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

class Parser {
 public:
  explicit Parser(std::vector<ConfigIssue>& issues) : issues_(issues) {}

  void error(int line, std::string msg) { issues_.push_back({line, std::move(msg)}); }

  std::optional<double> number(const Entry& e, std::string_view key) {
    auto v = parse_number(e.value);
    if (!v) error(e.line, "'" + std::string(key) + "': expected a number, got '" + e.value + "'");
    return v;
  }

  std::optional<long long> integer(const Entry& e, std::string_view key) {
    long long v = 0;
    const std::string s = trim(e.value);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      error(e.line, "'" + std::string(key) + "': expected an integer, got '" + e.value + "'");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::vector<double>> numbers(const Entry& e, std::string_view key) {
    std::vector<double> out;
    for (const auto& item : split(e.value, ',')) {
      auto v = parse_number(item);
      if (!v) {
        error(e.line, "'" + std::string(key) + "': expected a comma list of numbers, got '" +
                          item + "'");
        return std::nullopt;
      }
      out.push_back(*v);
    }
    return out;
  }

 private:
  std::vector<ConfigIssue>& issues_;
};

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "\n";
    if (issues[i].line > 0) os << "line " << issues[i].line << ": ";
    os << issues[i].message;
  }
  return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> list)
    : std::runtime_error(join_issues(list)), issues(std::move(list)) {}

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::simulate: return "simulate";
    case ExperimentKind::converge_strong: return "converge-strong";
    case ExperimentKind::converge_density: return "converge-density";
    case ExperimentKind::malliavin_diagnose: return "malliavin-diagnose";
    case ExperimentKind::energy_check: return "energy-check";
    case ExperimentKind::expmoment_check: return "expmoment-check";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
  for (auto k : {ExperimentKind::simulate, ExperimentKind::converge_strong,
                 ExperimentKind::converge_density, ExperimentKind::malliavin_diagnose,
                 ExperimentKind::energy_check, ExperimentKind::expmoment_check}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::optional<double> parse_number(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  double factor = 1.0;
  std::string_view rest = s;
  if (const auto star = rest.find('*'); star != std::string_view::npos) {
    auto f = plain_double(trim(rest.substr(0, star)));
    if (!f) return std::nullopt;
    factor = *f;
    rest = rest.substr(star + 1);
  }
  const std::string body = trim(rest);
  if (const auto caret = body.find('^'); caret != std::string::npos) {
    auto base = plain_double(trim(std::string_view(body).substr(0, caret)));
    auto expo = plain_double(trim(std::string_view(body).substr(caret + 1)));
    if (!base || !expo) return std::nullopt;
    return factor * std::pow(*base, *expo);
  }
  auto v = plain_double(body);
  if (!v) return std::nullopt;
  return factor * *v;
}

std::string git_blob_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

RunConfig parse_config(std::string_view text) {
  std::vector<ConfigIssue> issues;
  Parser p(issues);
  std::map<std::string, Section> sections;
  std::map<std::string, int> section_lines;

  {
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t eol = text.find('\n', pos);
      std::string_view raw = text.substr(pos, eol == text.npos ? text.npos : eol - pos);
      pos = eol == text.npos ? text.size() + 1 : eol + 1;
      ++line_no;
      if (const auto c = raw.find_first_of("#;"); c != raw.npos) raw = raw.substr(0, c);
      const std::string line = trim(raw);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          p.error(line_no, "malformed section header '" + line + "'");
          continue;
        }
        current = trim(std::string_view(line).substr(1, line.size() - 2));
        if (!allowed_keys().contains(current)) {
          p.error(line_no, "unknown section [" + current + "]");
        } else if (section_lines.contains(current)) {
          p.error(line_no, "duplicate section [" + current + "]");
        } else {
          section_lines[current] = line_no;
          sections[current];
        }
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        p.error(line_no, "expected 'key = value', got '" + line + "'");
        continue;
      }
      const std::string key = trim(std::string_view(line).substr(0, eq));
      const std::string value = trim(std::string_view(line).substr(eq + 1));
      if (current.empty()) {
        p.error(line_no, "key '" + key + "' outside of any section");
        continue;
      }
      const auto& allowed = allowed_keys().find(current);
      if (allowed == allowed_keys().end()) continue;  // already reported
      if (!allowed->second.contains(key)) {
        p.error(line_no, "unknown key '" + key + "' in [" + current + "]");
        continue;
      }
      auto& sec = sections[current];
      if (sec.contains(key)) {
        p.error(line_no, "duplicate key '" + key + "'");
        continue;
      }
      sec[key] = {value, line_no};
    }
  }

  if (!sections.contains("model")) {
    p.error(0, "missing [model]");
    throw ConfigError(std::move(issues));
  }

  RunConfig cfg;
  cfg.source = std::string(text);
  const Section& model_sec = sections["model"];
  const Section& integ = sections["integrator"];
  const Section& exp = sections["experiment"];
  const Section& outp = sections["output"];
  auto find = [](const Section& s, const char* key) -> const Entry* {
    const auto it = s.find(key);
    return it == s.end() ? nullptr : &it->second;
  };

  // [model]
  bool model_ok = true;
  std::optional<Potential> potential;
  int m = 0;
  if (const Entry* e = find(model_sec, "m")) {
    if (auto v = p.integer(*e, "m")) m = static_cast<int>(*v);
    else model_ok = false;
  }
  const Entry* pot = find(model_sec, "potential");
  const Entry* coeffs = find(model_sec, "coeffs");
  if (!pot) {
    p.error(section_lines["model"], "[model] requires 'potential'");
    model_ok = false;
  } else if (pot->value == "custom") {
    if (!coeffs) {
      p.error(pot->line, "custom potential requires 'coeffs'");
      model_ok = false;
    } else {
      std::vector<Monomial> terms;
      for (const auto& item : split(coeffs->value, ',')) {
        const auto parts = split(item, ':');
        Monomial mono;
        auto c = parse_number(parts.front());
        bool ok = c.has_value() && parts.size() >= 2;
        for (std::size_t k = 1; ok && k < parts.size(); ++k) {
          int e = 0;
          const auto [ptr, ec] =
              std::from_chars(parts[k].data(), parts[k].data() + parts[k].size(), e);
          ok = ec == std::errc{} && ptr == parts[k].data() + parts[k].size();
          mono.exponents.push_back(e);
        }
        if (!ok) {
          p.error(coeffs->line, "coefficient entry '" + item + "' is not 'coef:e1:...:em'");
          model_ok = false;
          break;
        }
        mono.coeff = *c;
        terms.push_back(std::move(mono));
      }
      if (model_ok) {
        const int dim = static_cast<int>(terms.front().exponents.size());
        if (m == 0) m = dim;
        try {
          potential = custom_potential(m, std::move(terms));
        } catch (const std::invalid_argument& ex) {
          p.error(coeffs->line, ex.what());
          model_ok = false;
        }
      }
    }
  } else {
    if (coeffs) p.error(coeffs->line, "'coeffs' is only valid with potential = custom");
    try {
      potential = builtin_potential(pot->value, m == 0 ? 1 : m);
      if (m != 0 && potential->dimension() != m) {
        p.error(pot->line, "potential '" + pot->value + "' has dimension " +
                               std::to_string(potential->dimension()) + " but m = " +
                               std::to_string(m));
        model_ok = false;
      }
      m = potential->dimension();
    } catch (const std::invalid_argument& ex) {
      p.error(pot->line, ex.what());
      model_ok = false;
    }
  }
  if (potential) {
    if (const Entry* e = find(model_sec, "c0")) {
      if (auto v = p.number(*e, "c0")) potential = potential->with_lower_offset(*v);
    }
  }

  double v = 0.0;
  if (const Entry* e = find(model_sec, "v")) {
    if (auto val = p.number(*e, "v")) {
      v = *val;
      if (!(v > 0.0)) {
        p.error(e->line, "friction v must be positive");
        model_ok = false;
      }
    } else {
      model_ok = false;
    }
  } else {
    p.error(section_lines["model"], "[model] requires 'v'");
    model_ok = false;
  }

  std::vector<double> sigma, x0;
  if (const Entry* e = find(model_sec, "sigma")) {
    if (auto vals = p.numbers(*e, "sigma")) sigma = *vals;
    else model_ok = false;
  } else {
    p.error(section_lines["model"], "[model] requires 'sigma'");
    model_ok = false;
  }
  if (const Entry* e = find(model_sec, "x0")) {
    if (auto vals = p.numbers(*e, "x0")) x0 = *vals;
    else model_ok = false;
  } else {
    p.error(section_lines["model"], "[model] requires 'x0'");
    model_ok = false;
  }

  if (model_ok && potential) {
    int d = 0;
    if (const Entry* e = find(model_sec, "d")) {
      if (auto val = p.integer(*e, "d")) d = static_cast<int>(*val);
    } else if (m > 0 && sigma.size() % m == 0) {
      d = static_cast<int>(sigma.size()) / m;
    }
    const int sigma_line = find(model_sec, "sigma")->line;
    if (d < 1 || d > kMaxNoiseDim || sigma.size() != static_cast<std::size_t>(m) * d) {
      p.error(sigma_line, "sigma must have m*d = " + std::to_string(m) + "*" +
                              std::to_string(d) + " entries, got " +
                              std::to_string(sigma.size()));
      model_ok = false;
    }
    if (x0.size() != static_cast<std::size_t>(2 * m)) {
      p.error(find(model_sec, "x0")->line,
              "x0 must have 2m = " + std::to_string(2 * m) + " entries (p then q)");
      model_ok = false;
    }
    if (model_ok) {
      LangevinModel model{.m = m, .d = d, .friction = v, .sigma = NoiseMat(m, d),
                          .potential = *potential, .x0 = {}};
      for (int i = 0; i < m; ++i)
        for (int k = 0; k < d; ++k) model.sigma(i, k) = sigma[static_cast<std::size_t>(i) * d + k];
      model.x0.p = Vec(m);
      model.x0.q = Vec(m);
      for (int i = 0; i < m; ++i) {
        model.x0.p[i] = x0[i];
        model.x0.q[i] = x0[m + i];
      }
      try {
        model.validate();
        cfg.model = std::move(model);
      } catch (const std::invalid_argument& ex) {
        p.error(section_lines["model"], ex.what());
        model_ok = false;
      }
    }
  }

  // [integrator]
  if (const Entry* e = find(integ, "scheme")) {
    try {
      cfg.scheme = parse_scheme(e->value);
    } catch (const std::invalid_argument& ex) {
      p.error(e->line, ex.what());
    }
  }
  if (const Entry* e = find(integ, "newton_tol")) {
    if (auto val = p.number(*e, "newton_tol")) {
      if (!(*val > 0.0)) p.error(e->line, "newton_tol must be positive");
      cfg.solver.newton_tol = *val;
    }
  }
  if (const Entry* e = find(integ, "newton_max_iter")) {
    if (auto val = p.integer(*e, "newton_max_iter")) {
      if (*val < 1) p.error(e->line, "newton_max_iter must be >= 1");
      cfg.solver.newton_max_iter = static_cast<int>(*val);
    }
  }
  if (const Entry* e = find(integ, "quadrature_nodes")) {
    if (auto val = p.integer(*e, "quadrature_nodes")) {
      if (*val < 1 || *val > 64) p.error(e->line, "quadrature_nodes must be in [1, 64]");
      cfg.solver.quadrature_nodes = static_cast<int>(*val);
    }
  }
  if (const Entry* e = find(integ, "taming")) {
    try {
      cfg.solver.taming = parse_taming(e->value);
    } catch (const std::invalid_argument& ex) {
      p.error(e->line, ex.what());
    }
  }

  // [experiment]
  ExperimentSection& ex = cfg.experiment;
  if (const Entry* e = find(exp, "kind")) {
    ex.kind = parse_experiment_kind(e->value);
    if (!ex.kind) p.error(e->line, "unknown experiment kind '" + e->value + "'");
  }
  if (const Entry* e = find(exp, "T")) {
    if (auto val = p.number(*e, "T")) {
      if (!(*val > 0.0)) p.error(e->line, "T must be positive");
      ex.T = *val;
    }
  }
  if (const Entry* e = find(exp, "h_ref")) {
    if (auto val = p.number(*e, "h_ref")) {
      if (!(*val > 0.0)) p.error(e->line, "h_ref must be positive");
      ex.h_ref = *val;
    }
  }
  if (const Entry* e = find(exp, "h_list")) {
    if (auto vals = p.numbers(*e, "h_list")) ex.h_list = *vals;
  }
  if (const Entry* e = find(exp, "samples")) {
    if (auto val = p.integer(*e, "samples")) {
      if (*val < 1) p.error(e->line, "samples must be >= 1");
      ex.samples = static_cast<std::size_t>(std::max(1LL, *val));
    }
  }
  if (const Entry* e = find(exp, "seed")) {
    std::uint64_t s = 0;
    const auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), s);
    if (ec != std::errc{} || ptr != e->value.data() + e->value.size() || e->value.empty())
      p.error(e->line, "seed must be an unsigned 64-bit integer");
    ex.seed = s;
  }
  if (const Entry* e = find(exp, "beta")) {
    if (auto val = p.number(*e, "beta")) ex.beta = *val;
  }
  if (const Entry* e = find(exp, "bandwidth_rule")) {
    // "h" or "<c>*h"
    std::string rule = e->value;
    rule.erase(std::remove_if(rule.begin(), rule.end(), ::isspace), rule.end());
    bool ok = false;
    if (rule == "h") {
      ex.bandwidth_scale = 1.0;
      ok = true;
    } else if (rule.size() > 2 && rule.ends_with("*h")) {
      if (auto c = parse_number(rule.substr(0, rule.size() - 2)); c && *c > 0.0) {
        ex.bandwidth_scale = *c;
        ok = true;
      }
    }
    if (!ok) p.error(e->line, "bandwidth_rule must be 'h' or '<c>*h' with c > 0");
  }
  if (const Entry* e = find(exp, "grid_nodes")) {
    if (auto val = p.integer(*e, "grid_nodes")) {
      if (*val != 0 && *val < 2) p.error(e->line, "grid_nodes must be 0 (auto) or >= 2");
      ex.grid_nodes = static_cast<int>(*val);
    }
  }
  if (const Entry* e = find(exp, "fd_pairs")) {
    if (auto val = p.integer(*e, "fd_pairs")) {
      if (*val < 0) p.error(e->line, "fd_pairs must be >= 0");
      ex.fd_pairs = static_cast<std::size_t>(std::max(0LL, *val));
    }
  }
  if (const Entry* e = find(exp, "fd_eps")) {
    if (auto val = p.number(*e, "fd_eps")) {
      if (!(*val > 0.0)) p.error(e->line, "fd_eps must be positive");
      ex.fd_eps = *val;
    }
  }
  if (const Entry* e = find(exp, "bootstrap")) {
    if (auto val = p.integer(*e, "bootstrap")) {
      if (*val < 0) p.error(e->line, "bootstrap must be >= 0");
      ex.bootstrap = static_cast<std::size_t>(std::max(0LL, *val));
    }
  }

  // Cross-field constraints.
  const int h_line = find(exp, "h_list") ? find(exp, "h_list")->line : 0;
  const int h_ref_line = find(exp, "h_ref") ? find(exp, "h_ref")->line : h_line;
  if (ex.h_ref > 0.0 && ex.T > 0.0) {
    const double fine = ex.T / ex.h_ref;
    if (fine < 0.5 || std::abs(fine - std::round(fine)) > 1e-9 * fine)
      p.error(h_ref_line, "h_ref does not divide T");
  }
  for (double h : ex.h_list) {
    std::ostringstream os;
    os << "h = " << h;
    if (!(h > 0.0)) {
      p.error(h_line, os.str() + " must be positive");
      continue;
    }
    if (ex.h_ref > 0.0 && !is_power_of_two_multiple(h, ex.h_ref))
      p.error(h_line, os.str() + " is not a power-of-two multiple of h_ref");
    if (ex.T > 0.0) {
      const double steps = ex.T / h;
      if (steps < 0.5 || std::abs(steps - std::round(steps)) > 1e-9 * steps)
        p.error(h_line, os.str() + " does not divide T");
    }
  }
  if (model_ok) {
    for (double h : ex.h_list) {
      if (!(h > 0.0)) continue;
      try {
        AvfConfig check(cfg.model, h, cfg.solver);
      } catch (const SolvabilityError& err) {
        p.error(h_line, std::string("solvability: ") + err.what());
      } catch (const std::invalid_argument& err) {
        p.error(find(integ, "quadrature_nodes") ? find(integ, "quadrature_nodes")->line : 0,
                err.what());
      }
    }
    if (ex.beta) {
      const double lo = min_admissible_beta(cfg.model);
      if (!(*ex.beta >= lo)) {
        std::ostringstream os;
        os << "beta = " << *ex.beta << " is below the admissible minimum " << lo;
        p.error(find(exp, "beta")->line, os.str());
      }
    }
  }

  // [output]
  if (const Entry* e = find(outp, "directory")) cfg.output.directory = e->value;
  if (const Entry* e = find(outp, "formats")) {
    cfg.output.csv = cfg.output.json = false;
    for (const auto& f : split(e->value, ',')) {
      if (f == "csv") cfg.output.csv = true;
      else if (f == "json") cfg.output.json = true;
      else p.error(e->line, "unknown output format '" + f + "'");
    }
  }

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({{0, "cannot open config file '" + path + "'"}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace avf
