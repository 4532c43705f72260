#include "bmc/simulate.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "bmc/csv.hpp"

namespace bmc {

namespace {

constexpr std::uint64_t kTaggedBranchSalt = 0x7a6b5c4d3e2f1001ULL;

}  // namespace

RootLaw RootLaw::uniform(double a, double b) {
  if (!(a < b)) throw std::invalid_argument("uniform root law needs a < b");
  return RootLaw(Uniform{a, b});
}

RootLaw RootLaw::point(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("point root law needs a finite value");
  return RootLaw(Point{x});
}

RootLaw RootLaw::empirical(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empirical root law needs at least one value");
  return RootLaw(Empirical{std::move(values)});
}

RootLaw RootLaw::empirical_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open root-law file " + path);
  std::vector<double> values;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto field = csv::split(line).back();
    try {
      values.push_back(csv::parse_double(field));
    } catch (const csv::ParseError&) {
      if (!first) throw;
    }
    first = false;
  }
  return empirical(std::move(values));
}

RootLaw RootLaw::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "uniform") {
    const auto parts = csv::split(rest, ':');
    if (parts.size() != 2) throw std::invalid_argument("root law 'uniform:a:b' expected");
    return uniform(csv::parse_double(parts[0]), csv::parse_double(parts[1]));
  }
  if (kind == "point") return point(csv::parse_double(rest));
  if (kind == "empirical") return empirical_file(rest);
  throw std::invalid_argument("unknown root law '" + spec + "'");
}

double RootLaw::sample(Rng& rng) const {
  return std::visit(
      [&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          return law.a + (law.b - law.a) * rng.uniform();
        } else if constexpr (std::is_same_v<T, Point>) {
          return law.x;
        } else {
          const auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(law.values.size()));
          return law.values[std::min(k, law.values.size() - 1)];
        }
      },
      law_);
}

std::string RootLaw::describe() const {
  std::ostringstream s;
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          s << "uniform:" << law.a << ':' << law.b;
        } else if constexpr (std::is_same_v<T, Point>) {
          s << "point:" << law.x;
        } else {
          s << "empirical(" << law.values.size() << " values)";
        }
      },
      law_);
  return s.str();
}

void RootLaw::check_support(const Interval& support) const {
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          if (law.a < support.lo || law.b > support.hi)
            throw std::invalid_argument("root law " + describe() + " leaves the kernel support");
        } else if constexpr (std::is_same_v<T, Point>) {
          if (!support.contains_open(law.x))
            throw std::invalid_argument("root law " + describe() + " leaves the kernel support");
        } else {
          for (double v : law.values)
            if (!support.contains_open(v))
              throw std::invalid_argument("empirical root value outside the kernel support");
        }
      },
      law_);
}

TreeSample simulate_tree(const TransitionKernel& kernel, const RootLaw& root_law, int n,
                         std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("generation count must be non-negative");
  std::vector<double> traits(tree_size(n));
  Rng root_rng(seed, 0);
  traits[0] = root_law.sample(root_rng);
  const std::uint64_t parents = tree_size(n) - generation_size(n);  // |T_{n-1}|
  for (std::uint64_t u = 0; u < parents; ++u) {
    Rng rng(seed, u + 1);
    try {
      const auto [y, z] = kernel.sample_pair(traits[u], rng);
      traits[2 * u + 1] = y;
      traits[2 * u + 2] = z;
    } catch (const std::exception& e) {
      throw SimulationError("sampling offspring of node " + std::to_string(u) + ": " + e.what(), u);
    }
  }
  return TreeSample(n, std::move(traits));
}

std::vector<double> tagged_branch(const TransitionKernel& kernel, double x0, std::size_t m,
                                  std::uint64_t seed) {
  std::vector<double> path;
  path.reserve(m + 1);
  path.push_back(x0);
  const std::uint64_t key = seed ^ kTaggedBranchSalt;
  for (std::size_t k = 0; k < m; ++k) {
    Rng rng(key, k);
    try {
      const auto [y, z] = kernel.sample_pair(path.back(), rng);
      path.push_back(rng.coin() ? z : y);
    } catch (const std::exception& e) {
      throw SimulationError("tagged branch step " + std::to_string(k) + ": " + e.what(), k);
    }
  }
  return path;
}

std::vector<AutocorrPoint> sample_autocorr(std::span<const double> series, int max_lag) {
  if (max_lag < 0) throw std::invalid_argument("max_lag must be non-negative");
  if (static_cast<std::size_t>(max_lag) >= series.size()) {
    throw std::invalid_argument("max_lag " + std::to_string(max_lag) + " must be below the series length " +
                                std::to_string(series.size()));
  }
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());
  double c0 = 0.0;
  for (double v : series) c0 += (v - mean) * (v - mean);
  std::vector<AutocorrPoint> out;
  out.reserve(static_cast<std::size_t>(max_lag) + 1);
  out.push_back({0, 1.0});
  for (int h = 1; h <= max_lag; ++h) {
    double ch = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(h) < series.size(); ++t) {
      ch += (series[t] - mean) * (series[t + static_cast<std::size_t>(h)] - mean);
    }
    out.push_back({h, c0 > 0.0 ? ch / c0 : 0.0});
  }
  return out;
}

std::vector<AutocorrPoint> generation_autocorr(const TreeSample& tree, int max_lag) {
  if (tree.generations() < 2) throw std::invalid_argument("autocorrelation needs a tree with n >= 2");
  std::vector<double> series;
  for (auto u : iter_generation(tree.generations() - 1)) series.push_back(tree[children(u).first]);
  return sample_autocorr(series, max_lag);
}

}  // namespace bmc
