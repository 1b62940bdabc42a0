#pragma once

// Trial CSV, posterior draws CSV and summary JSON.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bdlmar/core_types.hpp"
#include "bdlmar/posterior.hpp"

namespace bdlmar {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  out.push_back(field);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

/// Shortest decimal form that round-trips a double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace detail

/// Reads `day,treatment,outcome`. Days must be consecutive integers; an empty
/// outcome is missing. Errors name the source and line.
inline TrialData read_trial_csv(std::istream& in, const std::string& source = "<input>") {
  auto fail = [&](long line, const std::string& what) {
    throw DataError(source + ":" + std::to_string(line) + ": " + what);
  };
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) fail(1, "empty file");
  ++lineno;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  {
    auto header = detail::split_csv_line(line);
    for (auto& h : header) h = detail::trim(h);
    if (header != std::vector<std::string>{"day", "treatment", "outcome"})
      fail(lineno, "expected header 'day,treatment,outcome'");
  }
  TrialData d;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty() || line == "\r") continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != 3) fail(lineno, "expected 3 fields, found " + std::to_string(f.size()));
    for (auto& s : f) s = detail::trim(s);
    long day = 0;
    if (!detail::parse_number(f[0], day)) fail(lineno, "day '" + f[0] + "' is not an integer");
    if (!d.days.empty() && day != d.days.back() + 1)
      fail(lineno, "day " + std::to_string(day) + " does not follow day " + std::to_string(d.days.back()) +
                       " (days must be consecutive)");
    int x = 0;
    if (!detail::parse_number(f[1], x) || (x != 0 && x != 1)) fail(lineno, "treatment '" + f[1] + "' is not 0 or 1");
    double y = kMissing;
    if (!f[2].empty()) {
      if (!detail::parse_number(f[2], y) || !std::isfinite(y)) fail(lineno, "outcome '" + f[2] + "' is not a finite number");
    }
    d.days.push_back(day);
    d.treatment.push_back(x);
    d.outcome.push_back(y);
  }
  if (d.size() < 2) fail(lineno, "a trial needs at least 2 days");
  return d;
}

inline TrialData read_trial_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return read_trial_csv(in, path);
}

inline void write_trial_csv(std::ostream& os, const TrialData& d) {
  os << "day,treatment,outcome\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    const long day = d.days.empty() ? static_cast<long>(i + 1) : d.days[i];
    os << day << ',' << d.treatment[i] << ',';
    if (!is_missing(d.outcome[i])) os << detail::format_double(d.outcome[i]);
    os << '\n';
  }
}

/// Columns: chain, iter, mu, beta0..betaL, sigma2, phi1..phip, then gamma1,
/// gamma2 when the method samples gamma. `iter` counts stored draws from 1.
inline void write_draws_csv(std::ostream& os, const std::vector<PosteriorDraws>& chains) {
  if (chains.empty()) return;
  const auto& f = chains.front();
  os << "chain,iter,mu";
  for (int l = 0; l <= f.lag; ++l) os << ",beta" << l;
  os << ",sigma2";
  for (int j = 1; j <= f.ar; ++j) os << ",phi" << j;
  if (f.has_gamma) os << ",gamma1,gamma2";
  os << '\n';
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const auto& d = chains[c];
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
      os << c << ',' << r + 1 << ',' << detail::format_double(d.mu(r));
      for (int l = 0; l <= d.lag; ++l) os << ',' << detail::format_double(d.beta(r, l));
      os << ',' << detail::format_double(d.sigma2(r));
      for (int j = 0; j < d.ar; ++j) os << ',' << detail::format_double(d.phi(r, j));
      if (d.has_gamma) os << ',' << detail::format_double(d.gamma(r, 0)) << ',' << detail::format_double(d.gamma(r, 1));
      os << '\n';
    }
  }
}

/// Inverse of write_draws_csv. Counters (acceptance, phi rejections) are not
/// stored in the file and come back as zero.
inline std::vector<PosteriorDraws> read_draws_csv(std::istream& in, const std::string& source = "<draws>") {
  auto fail = [&](long line, const std::string& what) {
    throw DataError(source + ":" + std::to_string(line) + ": " + what);
  };
  std::string line;
  if (!std::getline(in, line)) fail(1, "empty draws file");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 5 || header[0] != "chain" || header[1] != "iter" || header[2] != "mu")
    fail(1, "expected header starting 'chain,iter,mu'");
  int lag = -1, ar = 0;
  bool has_gamma = false;
  for (const auto& h : header) {
    if (h.rfind("beta", 0) == 0) ++lag;
    else if (h.rfind("phi", 0) == 0) ++ar;
    else if (h == "gamma1") has_gamma = true;
  }
  if (lag < 0) fail(1, "no beta columns");
  const std::size_t width = header.size();

  std::map<long, std::vector<std::vector<double>>> rows;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != width) fail(lineno, "expected " + std::to_string(width) + " fields");
    long chain = 0;
    if (!detail::parse_number(f[0], chain) || chain < 0) fail(lineno, "bad chain index");
    std::vector<double> v(width - 2);
    for (std::size_t k = 2; k < width; ++k)
      if (!detail::parse_number(f[k], v[k - 2])) fail(lineno, "bad number '" + f[k] + "'");
    rows[chain].push_back(std::move(v));
  }
  if (rows.empty()) fail(lineno, "no draws");

  std::vector<PosteriorDraws> out;
  for (auto& [chain, vals] : rows) {
    PosteriorDraws d;
    d.lag = lag;
    d.ar = ar;
    d.has_gamma = has_gamma;
    d.resize(static_cast<Eigen::Index>(vals.size()));
    d.gamma.setZero();
    bool any_gamma2 = false;
    for (std::size_t r = 0; r < vals.size(); ++r) {
      const auto& v = vals[r];
      std::size_t k = 0;
      const auto i = static_cast<Eigen::Index>(r);
      d.mu(i) = v[k++];
      for (int l = 0; l <= lag; ++l) d.beta(i, l) = v[k++];
      d.sigma2(i) = v[k++];
      for (int j = 0; j < ar; ++j) d.phi(i, j) = v[k++];
      if (has_gamma) {
        d.gamma(i, 0) = v[k++];
        d.gamma(i, 1) = v[k++];
        any_gamma2 = any_gamma2 || d.gamma(i, 1) != 0.0;
      }
    }
    d.penalty = (has_gamma && !any_gamma2) ? PenaltyKind::Ridge : PenaltyKind::FusedRidge;
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<PosteriorDraws> read_draws_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open draws file '" + path + "'");
  return read_draws_csv(in, path);
}

inline Json to_json(const ParameterSummary& p) {
  Json j;
  j["name"] = p.name;
  j["mean"] = p.mean;
  j["lower"] = p.lower;
  j["upper"] = p.upper;
  j["psrf"] = p.psrf ? Json(*p.psrf) : Json(nullptr);
  return j;
}

inline Json to_json(const FitDiagnostics& d) {
  Json j;
  if (d.ljung_box) {
    j["ljung_box"] = {{"q", d.ljung_box->q}, {"lags", d.ljung_box->h}, {"df", d.ljung_box->df},
                      {"p_value", d.ljung_box->p_value}};
  } else {
    j["ljung_box"] = nullptr;
  }
  j["acceptance_rate"] = d.acceptance_rate ? Json(*d.acceptance_rate) : Json(nullptr);
  j["phi_rejections"] = d.phi_rejections;
  j["phi_retentions"] = d.phi_retentions;
  j["converged"] = d.converged;
  j["warnings"] = d.warnings;
  return j;
}

inline Json to_json(const FitSummary& s) {
  Json j;
  j["method"] = s.method;
  j["lag"] = s.lag;
  j["ar"] = s.ar;
  j["ci_level"] = s.ci_level;
  j["chains"] = s.chains;
  j["draws"] = s.draws;
  j["effects"] = {{"immediate", to_json(s.immediate)}, {"carryover", to_json(s.carryover)}, {"total", to_json(s.total)}};
  Json params = Json::array();
  for (const auto& p : s.parameters) params.push_back(to_json(p));
  j["parameters"] = std::move(params);
  j["diagnostics"] = to_json(s.diagnostics);
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace bdlmar
