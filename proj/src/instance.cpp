#include "upmclp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace upmclp {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::uniform01_open_low() {
  return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
}

std::int64_t SplitMix64::uniform_int(std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(next() % span);
}

int facilities_for(PRule rule, int n) {
  switch (rule) {
    case PRule::One: return 1;
    case PRule::NOver10: return std::max(1, static_cast<int>(std::lround(n / 10.0)));
    case PRule::NOver20: return std::max(1, static_cast<int>(std::lround(n / 20.0)));
  }
  return 1;
}

std::pair<Instance, NormalizationLog> normalize(const Instance& inst) {
  NormalizationLog log;
  std::vector<Edge> kept;
  kept.reserve(inst.net.edge_count());
  for (int e = 0; e < inst.net.edge_count(); ++e) {
    Edge ed = inst.net.edge(e);
    if (ed.unit_cost * ed.max_reduction > inst.B + 1e-12) {
      const double capped = inst.B / ed.unit_cost;  // unit_cost > 0 here
      log.events.push_back({NormalizationEvent::Kind::CappedReduction, e, ed.max_reduction, capped});
      ed.max_reduction = capped;
    }
    if (ed.length - ed.max_reduction > inst.R + 1e-12) {
      log.events.push_back({NormalizationEvent::Kind::RemovedEdge, e, ed.length, 0.0});
      continue;
    }
    kept.push_back(ed);
  }
  Instance out{Network(inst.net.node_count(), std::move(kept)), inst.demands, inst.p, inst.R,
               inst.B};
  return {std::move(out), std::move(log)};
}

bool is_normalized(const Instance& inst) {
  for (const Edge& ed : inst.net.edges()) {
    if (ed.unit_cost * ed.max_reduction > inst.B + 1e-9) return false;
    if (ed.length - ed.max_reduction > inst.R + 1e-9) return false;
  }
  return true;
}

double compute_bmax(const Instance& inst) {
  std::vector<double> products;
  products.reserve(inst.net.edge_count());
  for (const Edge& ed : inst.net.edges()) products.push_back(ed.unit_cost * ed.max_reduction);
  std::sort(products.begin(), products.end(), std::greater<>());
  const int take = std::min<int>(inst.net.node_count() - inst.p, static_cast<int>(products.size()));
  double sum = 0.0;
  for (int t = 0; t < take; ++t) sum += products[t];
  return sum;
}

namespace {

// Exact plain-MCLP value by facility-set enumeration, bitmask coverage.
double mclp_value_enumeration(const Instance& inst, double R) {
  const int n = inst.net.node_count();
  if (n > 64) throw std::invalid_argument("built-in MCLP enumeration supports n <= 64");
  const DistanceMatrix d = shortest_distances(inst.net, false);
  std::vector<std::uint64_t> cover(n, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (d(i, j) <= R + kDistTol) cover[j] |= 1ULL << i;
  const int p = std::min(inst.p, n);
  std::vector<int> pick(p);
  for (int t = 0; t < p; ++t) pick[t] = t;
  double best = -1.0;
  while (true) {
    std::uint64_t mask = 0;
    for (int t = 0; t < p; ++t) mask |= cover[pick[t]];
    double val = 0.0;
    std::uint64_t m = mask;
    while (m) {
      const int i = __builtin_ctzll(m);
      val += inst.demands[i];
      m &= m - 1;
    }
    if (val > best) best = val;
    int t = p - 1;
    while (t >= 0 && pick[t] == n - p + t) --t;
    if (t < 0) break;
    ++pick[t];
    for (int s = t + 1; s < p; ++s) pick[s] = pick[s - 1] + 1;
  }
  return best;
}

}  // namespace

std::pair<double, bool> calibrate_radius(const Instance& inst, double coverage_target,
                                         const MclpValueFn& mclp) {
  const MclpValueFn solver = mclp ? mclp : MclpValueFn(&mclp_value_enumeration);
  double total = 0.0;
  for (double w : inst.demands) total += w;
  const double target = coverage_target * total - 1e-9;

  const DistanceMatrix d = shortest_distances(inst.net, false);
  std::vector<double> candidates;
  const int n = inst.net.node_count();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (d.reachable(i, j)) candidates.push_back(d(i, j));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.empty()) {
    const double v = solver(inst, 0.0);
    return {0.0, v < target};
  }
  if (solver(inst, candidates.back()) < target) return {candidates.back(), true};
  // coverage is nondecreasing in R; find the first candidate reaching target
  std::size_t lo = 0, hi = candidates.size() - 1;
  if (solver(inst, candidates[0]) >= target) return {candidates[0], false};
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (solver(inst, candidates[mid]) >= target) hi = mid;
    else lo = mid;
  }
  return {candidates[hi], false};
}

Instance generate_geometric(const GeneratorConfig& cfg, const MclpValueFn& mclp) {
  if (cfg.n < 2) throw std::invalid_argument("generate_geometric: need n >= 2");
  SplitMix64 rng(cfg.seed);
  const int n = cfg.n;
  // draw order: coordinates, demands, unit costs, reductions
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = 30.0 * rng.uniform01();
    ys[i] = 30.0 * rng.uniform01();
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = static_cast<double>(rng.uniform_int(1, 100));
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dx = xs[i] - xs[j], dy = ys[i] - ys[j];
      edges.push_back({i, j, std::hypot(dx, dy), 0.0, 0.0});
    }
  for (Edge& e : edges) e.unit_cost = static_cast<double>(rng.uniform_int(1, 3));
  for (Edge& e : edges) {
    e.max_reduction = 0.3 * e.length * rng.uniform01_open_low();
    e.length += e.max_reduction;
  }
  Instance inst{Network(n, std::move(edges)), std::move(w), facilities_for(cfg.p_rule, n), 1.0,
                0.0};
  inst.R = calibrate_radius(inst, cfg.coverage_target, mclp).first;
  inst.B = cfg.budget_fraction * compute_bmax(inst);
  return inst;
}

namespace {

[[noreturn]] void parse_fail(int lineno, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(lineno) + ": " + what);
}

// next non-comment, non-empty line
bool next_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

Instance read_orlibrary(std::istream& in, const GeneratorConfig& cfg, const MclpValueFn& mclp) {
  std::string line;
  int lineno = 0;
  if (!next_line(in, line, lineno)) parse_fail(lineno, "missing header");
  int n = 0, m = 0, file_p = 0;
  {
    std::istringstream ls(line);
    if (!(ls >> n >> m >> file_p) || n < 1 || m < 0) parse_fail(lineno, "malformed header, expected 'n m p'");
  }
  std::vector<Edge> edges;
  edges.reserve(m);
  std::set<std::pair<int, int>> seen;
  for (int e = 0; e < m; ++e) {
    if (!next_line(in, line, lineno)) parse_fail(lineno, "unexpected end of file in edge list");
    std::istringstream ls(line);
    int i = 0, j = 0;
    double cost = 0.0;
    if (!(ls >> i >> j >> cost)) parse_fail(lineno, "malformed edge line, expected 'i j cost'");
    if (i < 1 || i > n || j < 1 || j > n) parse_fail(lineno, "node index out of range");
    if (i == j) parse_fail(lineno, "self-loop");
    if (!(cost > 0)) parse_fail(lineno, "edge length must be positive");
    if (!seen.insert(std::minmax(i, j)).second) parse_fail(lineno, "duplicate edge");
    edges.push_back({i - 1, j - 1, cost, 0.0, 0.0});
  }
  SplitMix64 rng(cfg.seed);
  // draw order: demands, per-edge unit costs, per-edge reductions
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = static_cast<double>(rng.uniform_int(1, 100));
  for (Edge& e : edges) e.unit_cost = static_cast<double>(rng.uniform_int(1, 3));
  for (Edge& e : edges) {
    e.max_reduction = 0.3 * e.length * rng.uniform01_open_low();
    e.length += e.max_reduction;
  }
  Instance inst{Network(n, std::move(edges)), std::move(w), facilities_for(cfg.p_rule, n), 1.0,
                0.0};
  inst.R = calibrate_radius(inst, cfg.coverage_target, mclp).first;
  inst.B = cfg.budget_fraction * compute_bmax(inst);
  return inst;
}

Instance read_instance(std::istream& in) {
  std::string line;
  int lineno = 0;
  const auto expect_tag = [&](const char* tag) -> std::istringstream {
    if (!next_line(in, line, lineno)) parse_fail(lineno, std::string("expected ") + tag);
    std::istringstream ls(line);
    std::string got;
    ls >> got;
    if (got != tag) parse_fail(lineno, std::string("expected ") + tag + ", got '" + got + "'");
    return ls;
  };
  {
    auto ls = expect_tag("UPMCLP");
    int version = 0;
    if (!(ls >> version) || version != 1) parse_fail(lineno, "unsupported format version");
  }
  int n = 0;
  {
    auto ls = expect_tag("NODES");
    if (!(ls >> n) || n < 1) parse_fail(lineno, "bad node count");
  }
  std::vector<double> w(n);
  {
    auto ls = expect_tag("WEIGHTS");
    for (int i = 0; i < n; ++i)
      if (!(ls >> w[i]) || w[i] < 0) parse_fail(lineno, "bad weight list");
  }
  int m = 0;
  {
    auto ls = expect_tag("EDGES");
    if (!(ls >> m) || m < 0) parse_fail(lineno, "bad edge count");
  }
  std::vector<Edge> edges;
  edges.reserve(m);
  for (int e = 0; e < m; ++e) {
    if (!next_line(in, line, lineno)) parse_fail(lineno, "unexpected end of file in edge list");
    std::istringstream ls(line);
    int k = 0, q = 0;
    double len = 0, u = 0, c = 0;
    if (!(ls >> k >> q >> len >> u >> c)) parse_fail(lineno, "malformed edge line");
    if (k < 1 || k > n || q < 1 || q > n) parse_fail(lineno, "node index out of range");
    edges.push_back({k - 1, q - 1, len, u, c});
  }
  Instance inst{Network(n, std::move(edges)), std::move(w), 1, 0.0, 0.0};
  {
    auto ls = expect_tag("PARAMS");
    if (!(ls >> inst.p >> inst.R >> inst.B)) parse_fail(lineno, "malformed PARAMS line");
    if (inst.p < 1 || inst.p > n) parse_fail(lineno, "p out of range");
    if (!(inst.R > 0) || inst.B < 0) parse_fail(lineno, "bad R or B");
  }
  return inst;
}

void write_instance(std::ostream& out, const Instance& inst) {
  const auto g = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
  };
  out << "UPMCLP 1\n";
  out << "NODES " << inst.net.node_count() << "\n";
  out << "WEIGHTS";
  for (double w : inst.demands) out << ' ' << g(w);
  out << "\nEDGES " << inst.net.edge_count() << "\n";
  for (const Edge& e : inst.net.edges())
    out << e.k + 1 << ' ' << e.q + 1 << ' ' << g(e.length) << ' ' << g(e.max_reduction) << ' '
        << g(e.unit_cost) << "\n";
  out << "PARAMS " << inst.p << ' ' << g(inst.R) << ' ' << g(inst.B) << "\n";
}

}  // namespace upmclp
