// Copyright 2026 the cct authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cct/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace cct {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string cell_index(int i, int j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

// Uniform helpers on top of the standard engine. std::uniform_*_distribution
// is implementation-defined, so conversions are done by hand to keep
// generated instances identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double next_double() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {  // [lo, hi]
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[next_int(0, static_cast<std::int64_t>(i) - 1)]);
  }

 private:
  std::mt19937_64 engine_;
};

// Splits `total` units into `count` positive parts, deterministically from
// the weights: floor of the proportional share, leftovers to the largest
// remainders (ties to the lowest index).
std::vector<std::int64_t> split_units(std::int64_t total, int count, Rng& rng) {
  std::vector<double> weights(count);
  double wsum = 0.0;
  for (auto& w : weights) {
    w = rng.next_double() + 1e-3;
    wsum += w;
  }
  const std::int64_t spread = total - count;  // one unit reserved per part
  std::vector<std::int64_t> units(count);
  std::vector<std::pair<double, int>> remainders(count);
  std::int64_t assigned = 0;
  for (int i = 0; i < count; ++i) {
    const double share = weights[i] / wsum * static_cast<double>(spread);
    units[i] = static_cast<std::int64_t>(std::floor(share));
    assigned += units[i];
    remainders[i] = {share - std::floor(share), i};
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::int64_t k = 0; k < spread - assigned; ++k) units[remainders[k].second] += 1;
  for (auto& u : units) u += 1;
  return units;
}

bool is_integer_token(const std::string& tok) {
  return tok.find_first_of(".eE") == std::string::npos;
}

// Converts a mass value from a file into exact units. Integers are already
// units; reals are masses and must be multiples of 1/denom.
std::int64_t mass_to_units(double value, bool integral, std::int64_t denom,
                           const std::string& field, const std::string& index,
                           std::vector<Violation>& violations) {
  if (integral) return static_cast<std::int64_t>(std::llround(value));
  const double scaled = value * static_cast<double>(denom);
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-9 * std::max(1.0, std::abs(scaled))) {
    violations.push_back({field, index, "not an integer multiple of 1/denom"});
  }
  return static_cast<std::int64_t>(rounded);
}

void throw_if_invalid(TransportInstance& inst, std::vector<Violation> convert_violations) {
  ValidationReport report = validate(inst);
  report.violations.insert(report.violations.begin(), convert_violations.begin(),
                           convert_violations.end());
  report.ok = report.violations.empty();
  if (!report.ok) {
    std::ostringstream msg;
    msg << "invalid instance (" << report.violations.size() << " violation(s)):";
    for (const auto& v : report.violations)
      msg << "\n  " << v.field << " " << v.index << ": " << v.description;
    throw ValidationError(msg.str(), std::move(report));
  }
}

TransportInstance parse_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("instance JSON: ") + e.what());
  }
  try {
    const int m = doc.at("m").get<int>();
    const int n = doc.at("n").get<int>();
    const std::int64_t denom = doc.at("denom").get<std::int64_t>();
    if (m < 1 || n < 1 || denom < 1)
      throw ParseError("instance JSON: m, n, denom must be positive");

    std::vector<Violation> violations;
    auto read_masses = [&](const char* key, std::vector<std::int64_t>& out) {
      const auto& arr = doc.at(key);
      if (!arr.is_array()) throw ParseError(std::string("instance JSON: ") + key + " must be an array");
      int i = 0;
      for (const auto& e : arr) {
        out.push_back(mass_to_units(e.get<double>(), e.is_number_integer(), denom, key,
                                    std::to_string(i), violations));
        ++i;
      }
    };

    TransportInstance raw;
    raw.m = m;
    raw.n = n;
    raw.denom = denom;
    read_masses("f", raw.f_units);
    read_masses("g", raw.g_units);

    const auto& hb = doc.at("hbar");
    const auto& co = doc.at("cost");
    if (!hb.is_array() || !co.is_array())
      throw ParseError("instance JSON: hbar and cost must be arrays of rows");
    if (static_cast<int>(hb.size()) != m || static_cast<int>(co.size()) != m)
      throw ParseError("instance JSON: hbar/cost row count does not match m");
    raw.hbar_units = IntMatrix(m, n);
    raw.cost = Matrix(m, n);
    for (int i = 0; i < m; ++i) {
      const auto& hrow = hb.at(i);
      const auto& crow = co.at(i);
      if (static_cast<int>(hrow.size()) != n || static_cast<int>(crow.size()) != n)
        throw ParseError("instance JSON: hbar/cost column count does not match n");
      for (int j = 0; j < n; ++j) {
        const auto& e = hrow.at(j);
        raw.hbar_units(i, j) = mass_to_units(e.get<double>(), e.is_number_integer(), denom,
                                             "hbar", cell_index(i, j), violations);
        raw.cost(i, j) = crow.at(j).get<double>();
      }
    }

    TransportInstance inst = TransportInstance::make(m, n, denom, std::move(raw.f_units),
                                                     std::move(raw.g_units),
                                                     std::move(raw.hbar_units), std::move(raw.cost));
    throw_if_invalid(inst, std::move(violations));
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("instance JSON: ") + e.what());
  }
}

class TokenStream {
 public:
  explicit TokenStream(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      for (auto& ch : line)
        if (ch == ',' || ch == ';') ch = ' ';
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens_.push_back(tok);
    }
  }

  std::string next(const char* what) {
    if (pos_ >= tokens_.size()) throw ParseError(std::string("instance text: expected ") + what);
    return tokens_[pos_++];
  }

  void expect(const char* keyword) {
    const std::string tok = next(keyword);
    if (tok != keyword)
      throw ParseError(std::string("instance text: expected keyword '") + keyword + "', got '" +
                       tok + "'");
  }

  bool done() const { return pos_ >= tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

double parse_number(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("instance text: bad ") + what + " value '" + tok + "'");
  }
}

TransportInstance parse_text(const std::string& text) {
  TokenStream ts(text);
  ts.expect("m");
  const int m = static_cast<int>(parse_number(ts.next("m"), "m"));
  ts.expect("n");
  const int n = static_cast<int>(parse_number(ts.next("n"), "n"));
  ts.expect("denom");
  const std::int64_t denom = static_cast<std::int64_t>(parse_number(ts.next("denom"), "denom"));
  if (m < 1 || n < 1 || denom < 1) throw ParseError("instance text: m, n, denom must be positive");

  std::vector<Violation> violations;
  auto read_mass = [&](const char* field, const std::string& index) {
    const std::string tok = ts.next(field);
    return mass_to_units(parse_number(tok, field), is_integer_token(tok), denom, field, index,
                         violations);
  };

  std::vector<std::int64_t> f_units, g_units;
  ts.expect("f");
  for (int i = 0; i < m; ++i) f_units.push_back(read_mass("f", std::to_string(i)));
  ts.expect("g");
  for (int j = 0; j < n; ++j) g_units.push_back(read_mass("g", std::to_string(j)));

  IntMatrix hbar_units(m, n);
  ts.expect("hbar");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) hbar_units(i, j) = read_mass("hbar", cell_index(i, j));

  Matrix cost(m, n);
  ts.expect("cost");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) cost(i, j) = parse_number(ts.next("cost"), "cost");

  if (!ts.done()) throw ParseError("instance text: trailing tokens after cost matrix");

  TransportInstance inst = TransportInstance::make(m, n, denom, std::move(f_units),
                                                   std::move(g_units), std::move(hbar_units),
                                                   std::move(cost));
  throw_if_invalid(inst, std::move(violations));
  return inst;
}

}  // namespace

TransportInstance TransportInstance::make(int m, int n, std::int64_t denom,
                                          std::vector<std::int64_t> f_units,
                                          std::vector<std::int64_t> g_units,
                                          IntMatrix hbar_units, Matrix cost) {
  TransportInstance inst;
  inst.m = m;
  inst.n = n;
  inst.denom = denom;
  inst.f_units = std::move(f_units);
  inst.g_units = std::move(g_units);
  inst.hbar_units = std::move(hbar_units);
  inst.cost = std::move(cost);

  const double d = static_cast<double>(denom);
  inst.f.reserve(inst.f_units.size());
  for (auto u : inst.f_units) inst.f.push_back(static_cast<double>(u) / d);
  inst.g.reserve(inst.g_units.size());
  for (auto u : inst.g_units) inst.g.push_back(static_cast<double>(u) / d);
  inst.hbar = Matrix(inst.hbar_units.rows(), inst.hbar_units.cols());
  for (int i = 0; i < inst.hbar_units.rows(); ++i)
    for (int j = 0; j < inst.hbar_units.cols(); ++j)
      inst.hbar(i, j) = static_cast<double>(inst.hbar_units(i, j)) / d;
  return inst;
}

ValidationReport validate(const TransportInstance& inst) {
  ValidationReport report;
  auto add = [&](std::string field, std::string index, std::string description) {
    report.violations.push_back({std::move(field), std::move(index), std::move(description)});
  };

  if (inst.m < 1) add("m", "", "must be >= 1");
  if (inst.n < 1) add("n", "", "must be >= 1");
  if (inst.denom < 1) add("denom", "", "must be >= 1");

  auto check_masses = [&](const char* field, const std::vector<std::int64_t>& units,
                          int expected) {
    if (static_cast<int>(units.size()) != expected) {
      add(field, "", "length " + std::to_string(units.size()) + ", expected " +
                         std::to_string(expected));
      return;
    }
    std::int64_t sum = 0;
    for (int i = 0; i < expected; ++i) {
      if (units[i] < 0)
        add(field, std::to_string(i), "negative mass");
      sum += units[i];
    }
    if (sum != inst.denom)
      add(field, "", std::string("sum(") + field + ") != 1 (got " + std::to_string(sum) +
                         "/" + std::to_string(inst.denom) + " units)");
  };
  check_masses("f", inst.f_units, inst.m);
  check_masses("g", inst.g_units, inst.n);

  if (inst.hbar_units.rows() != inst.m || inst.hbar_units.cols() != inst.n) {
    add("hbar", "", "shape mismatch");
  } else {
    for (int i = 0; i < inst.m; ++i)
      for (int j = 0; j < inst.n; ++j)
        if (inst.hbar_units(i, j) < 0) add("hbar", cell_index(i, j), "negative capacity");
  }

  if (inst.cost.rows() != inst.m || inst.cost.cols() != inst.n) {
    add("cost", "", "shape mismatch");
  } else {
    for (int i = 0; i < inst.m; ++i)
      for (int j = 0; j < inst.n; ++j)
        if (!std::isfinite(inst.cost(i, j))) add("cost", cell_index(i, j), "non-finite cost");
  }

  report.ok = report.violations.empty();
  return report;
}

TransportInstance parse_and_validate(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ParseError("instance file is empty");
  if (text[first] == '{') return parse_json(text);
  return parse_text(text);
}

TransportInstance load_and_validate(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read instance file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_and_validate(buf.str());
}

std::string to_json(const TransportInstance& inst) {
  ordered_json doc;
  doc["m"] = inst.m;
  doc["n"] = inst.n;
  doc["denom"] = inst.denom;
  doc["f"] = inst.f_units;
  doc["g"] = inst.g_units;
  auto rows_of = [&](const auto& mat, auto cast) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < mat.rows(); ++i) {
      ordered_json row = ordered_json::array();
      for (int j = 0; j < mat.cols(); ++j) row.push_back(cast(mat(i, j)));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  doc["hbar"] = rows_of(inst.hbar_units, [](std::int64_t v) { return v; });
  doc["cost"] = rows_of(inst.cost, [](double v) { return v; });
  return doc.dump(2) + "\n";
}

void save(const TransportInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write instance file: " + path.string());
  out << to_json(inst);
}

std::pair<TransportInstance, Coupling> gen_random_with_witness(std::uint64_t seed, int m, int n,
                                                               double slack) {
  if (m < 1 || n < 1) throw DimensionError("gen_random: m and n must be >= 1");
  if (!(slack > 0.0) || slack > 1.0)
    throw DimensionError("gen_random: slack must lie in (0, 1]");

  Rng rng(seed);
  const std::int64_t denom =
      static_cast<std::int64_t>(m) * static_cast<std::int64_t>(n) * 1000;

  std::vector<std::int64_t> f_units = split_units(denom, m, rng);
  std::vector<std::int64_t> g_units = split_units(denom, n, rng);

  // Hidden feasible coupling: northwest-corner fill over randomly permuted
  // rows and columns, so the support pattern varies with the seed.
  std::vector<int> row_order(m), col_order(n);
  std::iota(row_order.begin(), row_order.end(), 0);
  std::iota(col_order.begin(), col_order.end(), 0);
  rng.shuffle(row_order);
  rng.shuffle(col_order);

  IntMatrix witness_units(m, n, 0);
  {
    std::vector<std::int64_t> rem_f = f_units, rem_g = g_units;
    int a = 0, b = 0;
    while (a < m && b < n) {
      const int i = row_order[a];
      const int j = col_order[b];
      const std::int64_t q = std::min(rem_f[i], rem_g[j]);
      witness_units(i, j) += q;
      rem_f[i] -= q;
      rem_g[j] -= q;
      if (rem_f[i] == 0) ++a;
      if (rem_g[j] == 0) ++b;
    }
  }

  // hbar >= witness/slack guarantees feasibility with margin; a small random
  // background capacity keeps off-support cells usable.
  const std::int64_t extra_max =
      std::max<std::int64_t>(1, denom / (4 * static_cast<std::int64_t>(m) * n));
  IntMatrix hbar_units(m, n);
  Matrix cost(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto needed = static_cast<std::int64_t>(
          std::ceil(static_cast<long double>(witness_units(i, j)) / slack));
      hbar_units(i, j) = needed + rng.next_int(0, extra_max);
      cost(i, j) = rng.next_double();
    }
  }

  TransportInstance inst = TransportInstance::make(m, n, denom, std::move(f_units),
                                                   std::move(g_units), std::move(hbar_units),
                                                   std::move(cost));
  Coupling witness(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      witness(i, j) = static_cast<double>(witness_units(i, j)) / static_cast<double>(denom);
  return {std::move(inst), std::move(witness)};
}

TransportInstance gen_random(std::uint64_t seed, int m, int n, double slack) {
  return gen_random_with_witness(seed, m, n, slack).first;
}

bool within_box(const TransportInstance& inst, const Coupling& h, double tol) {
  if (h.rows() != inst.m || h.cols() != inst.n)
    throw DimensionError("within_box: coupling shape does not match instance");
  for (int i = 0; i < inst.m; ++i)
    for (int j = 0; j < inst.n; ++j)
      if (h(i, j) < -tol || h(i, j) > inst.hbar(i, j) + tol) return false;
  return true;
}

}  // namespace cct
