#include <random>
#include <sstream>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "upmclp/instance.hpp"
#include "upmclp/oracle.hpp"

using namespace upmclp;
using testing_oracles::six_node_instance;

TEST_CASE("normalize removes edges that can never fit the radius") {
  Instance inst{Network(2, {{0, 1, 10.0, 1.0, 1.0}}), {1.0, 1.0}, 1, 5.0, 100.0};
  const auto [out, log] = normalize(inst);
  CHECK(out.net.edge_count() == 0);
  REQUIRE(log.events.size() == 1);
  CHECK(log.events[0].kind == NormalizationEvent::Kind::RemovedEdge);
}

TEST_CASE("normalize caps reductions the budget cannot buy") {
  Instance inst{Network(2, {{0, 1, 4.0, 3.0, 2.0}}), {1.0, 1.0}, 1, 100.0, 2.0};
  const auto [out, log] = normalize(inst);
  REQUIRE(out.net.edge_count() == 1);
  CHECK(out.net.edge(0).max_reduction == doctest::Approx(1.0));  // B / c
  REQUIRE(log.events.size() == 1);
  CHECK(log.events[0].kind == NormalizationEvent::Kind::CappedReduction);
}

TEST_CASE("the six-node example is already normalized") {
  const Instance inst = six_node_instance();
  const auto [out, log] = normalize(inst);
  CHECK(!log.changed());
  CHECK(out.net.edge_count() == 5);
  CHECK(is_normalized(inst));
}

TEST_CASE("normalize is idempotent and preserves the optimum") {
  std::mt19937_64 seeds(3);
  for (int trial = 0; trial < 12; ++trial) {
    GeneratorConfig cfg;
    cfg.n = 5 + static_cast<int>(seeds() % 3);
    cfg.seed = seeds();
    cfg.budget_fraction = 0.05;
    Instance inst = generate_geometric(cfg);
    // perturb so normalization has something to do
    std::vector<Edge> edges = inst.net.edges();
    for (std::size_t e = 0; e < edges.size(); e += 2) edges[e].max_reduction *= 8.0;
    for (std::size_t e = 0; e < edges.size(); ++e)
      edges[e].max_reduction = std::min(edges[e].max_reduction, 0.99 * edges[e].length);
    inst.net = Network(inst.net.node_count(), std::move(edges));
    inst.R *= 0.6;

    const auto [once, log1] = normalize(inst);
    const auto [twice, log2] = normalize(once);
    CHECK(!log2.changed());
    CHECK(once.net.edge_count() == twice.net.edge_count());

    const UpMclpSolution before = solve_upmclp_exact(inst);
    const UpMclpSolution after = solve_upmclp_exact(once);
    CHECK(before.objective == doctest::Approx(after.objective).epsilon(1e-9));
  }
}

TEST_CASE("bmax on the six-node example") {
  CHECK(compute_bmax(six_node_instance()) == doctest::Approx(0.75));
}

TEST_CASE("bmax edge cases") {
  SUBCASE("all reductions zero") {
    Instance inst{Network(3, {{0, 1, 1.0, 0.0, 2.0}, {1, 2, 1.0, 0.0, 1.0}}),
                  {1, 1, 1}, 1, 1.0, 1.0};
    CHECK(compute_bmax(inst) == 0.0);
  }
  SUBCASE("fewer edges than the n-p quota") {
    Instance inst{Network(4, {{0, 1, 2.0, 1.0, 3.0}}), {1, 1, 1, 1}, 1, 2.0, 10.0};
    CHECK(compute_bmax(inst) == doctest::Approx(3.0));
  }
  SUBCASE("invariant under edge reordering") {
    std::vector<Edge> edges = {{0, 1, 2.0, 1.0, 3.0}, {1, 2, 3.0, 0.5, 1.0}, {0, 2, 4.0, 2.0, 2.0}};
    Instance a{Network(3, edges), {1, 1, 1}, 1, 5.0, 10.0};
    std::swap(edges[0], edges[2]);
    Instance b{Network(3, edges), {1, 1, 1}, 1, 5.0, 10.0};
    CHECK(compute_bmax(a) == doctest::Approx(compute_bmax(b)));
  }
}

TEST_CASE("generator determinism and edge counts") {
  GeneratorConfig cfg;
  cfg.n = 30;
  cfg.seed = 42;
  const Instance a = generate_geometric(cfg);
  CHECK(a.net.edge_count() == 435);
  const Instance b = generate_geometric(cfg);
  std::ostringstream sa, sb;
  write_instance(sa, a);
  write_instance(sb, b);
  CHECK(sa.str() == sb.str());

  cfg.n = 40;
  CHECK(generate_geometric(cfg).net.edge_count() == 780);

  cfg.n = 1;
  CHECK_THROWS(generate_geometric(cfg));
}

TEST_CASE("generated instances satisfy both standing assumptions") {
  std::mt19937_64 seeds(77);
  for (int trial = 0; trial < 8; ++trial) {
    GeneratorConfig cfg;
    cfg.n = 6 + static_cast<int>(seeds() % 5);
    cfg.seed = seeds();
    cfg.budget_fraction = 0.05;
    const Instance inst = generate_geometric(cfg);
    const auto [norm, log] = normalize(inst);
    const auto [norm2, log2] = normalize(norm);
    CHECK(!log2.changed());
    CHECK(is_normalized(norm));
  }
}

TEST_CASE("calibrate radius") {
  SUBCASE("star graph with p=1 and full coverage") {
    std::vector<Edge> edges;
    for (int leaf = 1; leaf <= 4; ++leaf) edges.push_back({0, leaf, 1.0 + leaf, 0.0, 0.0});
    Instance inst{Network(5, std::move(edges)), {1, 1, 1, 1, 1}, 1, 1.0, 0.0};
    const auto [R, warn] = calibrate_radius(inst, 1.0, {});
    CHECK(!warn);
    CHECK(R == doctest::Approx(5.0));  // the longest spoke
  }
  SUBCASE("p = n returns the smallest candidate") {
    Instance inst{Network(3, {{0, 1, 2.0, 0.0, 0.0}, {1, 2, 3.0, 0.0, 0.0}}),
                  {1, 1, 1}, 3, 1.0, 0.0};
    const auto [R, warn] = calibrate_radius(inst, 1.0, {});
    CHECK(!warn);
    CHECK(R == doctest::Approx(2.0));
  }
  SUBCASE("returned radius meets the target and the next smaller one misses it") {
    std::mt19937_64 seeds(5);
    for (int trial = 0; trial < 10; ++trial) {
      GeneratorConfig cfg;
      cfg.n = 10;
      cfg.seed = seeds();
      const Instance inst = generate_geometric(cfg);
      double total = 0.0;
      for (double w : inst.demands) total += w;
      const auto mclp = [&](const Instance& in, double R) {
        return solve_mclp_exact({in.net, in.demands, in.p, R, 0.0}).first;
      };
      const auto [R, warn] = calibrate_radius(inst, 0.6, {});
      CHECK(!warn);
      CHECK(mclp(inst, R) >= 0.6 * total - 1e-9);
      CHECK(mclp(inst, R - 1e-7) < 0.6 * total - 1e-9);
    }
  }
  SUBCASE("unreachable target flags a warning") {
    // two far components, p = 1, so full coverage is impossible
    Instance inst{Network(4, {{0, 1, 1.0, 0.0, 0.0}, {2, 3, 1.0, 0.0, 0.0}}),
                  {1, 1, 1, 1}, 1, 1.0, 0.0};
    const auto [R, warn] = calibrate_radius(inst, 1.0, {});
    CHECK(warn);
    CHECK(R == doctest::Approx(1.0));  // largest finite distance
  }
}

TEST_CASE("or-library reader") {
  GeneratorConfig cfg;
  cfg.seed = 9;
  SUBCASE("direct parse") {
    std::istringstream in("3 2 1\n1 2 5\n2 3 7\n");
    const Instance inst = read_orlibrary(in, cfg);
    CHECK(inst.net.node_count() == 3);
    CHECK(inst.net.edge_count() == 2);
    CHECK(inst.p == 1);  // from the p rule, not the header
  }
  SUBCASE("self-loop is rejected with its line number") {
    std::istringstream in("3 2 1\n1 1 4\n2 3 7\n");
    try {
      read_orlibrary(in, cfg);
      FAIL("expected a parse error");
    } catch (const std::exception& ex) {
      CHECK(std::string(ex.what()).find("line 2") != std::string::npos);
      CHECK(std::string(ex.what()).find("self-loop") != std::string::npos);
    }
  }
  SUBCASE("malformed header") {
    std::istringstream in("x y z\n");
    CHECK_THROWS(read_orlibrary(in, cfg));
  }
  SUBCASE("duplicate edge") {
    std::istringstream in("3 2 1\n1 2 5\n2 1 7\n");
    CHECK_THROWS(read_orlibrary(in, cfg));
  }
  SUBCASE("node index out of range") {
    std::istringstream in("3 2 1\n1 9 5\n2 3 7\n");
    CHECK_THROWS(read_orlibrary(in, cfg));
  }
}

TEST_CASE("a pmed-scale sparse file parses and round-trips") {
  // synthetic 100-node file with 195 edges, the usual sparse shape
  std::mt19937_64 rng(55);
  std::ostringstream text;
  text << "100 195 5\n";
  std::set<std::pair<int, int>> used;
  int written = 0;
  while (written < 195) {
    const int i = 1 + static_cast<int>(rng() % 100);
    const int j = 1 + static_cast<int>(rng() % 100);
    if (i == j || !used.insert(std::minmax(i, j)).second) continue;
    text << i << ' ' << j << ' ' << 1 + static_cast<int>(rng() % 60) << "\n";
    ++written;
  }
  GeneratorConfig cfg;
  cfg.seed = 31;
  cfg.p_rule = PRule::One;
  // at p = 1 the exact calibrator is a plain argmax over facility nodes
  const MclpValueFn best_single = [](const Instance& in2, double R) {
    const DistanceMatrix d = shortest_distances(in2.net, false);
    double best = 0.0;
    for (int j = 0; j < in2.net.node_count(); ++j) {
      double v = 0.0;
      for (int i = 0; i < in2.net.node_count(); ++i)
        if (d(i, j) <= R + kDistTol) v += in2.demands[i];
      best = std::max(best, v);
    }
    return best;
  };
  std::istringstream in(text.str());
  const Instance inst = read_orlibrary(in, cfg, best_single);
  CHECK(inst.net.node_count() == 100);
  CHECK(inst.net.edge_count() == 195);
  CHECK(inst.p == 1);
  CHECK(inst.B >= 0.0);

  std::ostringstream first;
  write_instance(first, inst);
  std::istringstream back(first.str());
  std::ostringstream second;
  write_instance(second, read_instance(back));
  CHECK(first.str() == second.str());
}

TEST_CASE("canonical file format round-trips bit-exactly") {
  std::mt19937_64 seeds(123);
  for (int trial = 0; trial < 6; ++trial) {
    GeneratorConfig cfg;
    cfg.n = 5 + static_cast<int>(seeds() % 6);
    cfg.seed = seeds();
    const Instance inst = generate_geometric(cfg);
    std::ostringstream first;
    write_instance(first, inst);
    std::istringstream back(first.str());
    const Instance again = read_instance(back);
    std::ostringstream second;
    write_instance(second, again);
    CHECK(first.str() == second.str());
  }
}

TEST_CASE("canonical reader accepts comments and reports bad lines") {
  std::istringstream good(
      "# demo\nUPMCLP 1\nNODES 2\nWEIGHTS 1 2\nEDGES 1\n1 2 5 1 2\nPARAMS 1 3 4\n");
  const Instance inst = read_instance(good);
  CHECK(inst.net.edge_count() == 1);
  CHECK(inst.R == doctest::Approx(3.0));

  std::istringstream bad("UPMCLP 2\n");
  CHECK_THROWS(read_instance(bad));
}

TEST_CASE("facilities_for rounds to the nearest integer with a floor of one") {
  CHECK(facilities_for(PRule::One, 100) == 1);
  CHECK(facilities_for(PRule::NOver10, 26) == 3);
  CHECK(facilities_for(PRule::NOver20, 26) == 1);
  CHECK(facilities_for(PRule::NOver20, 5) == 1);
  CHECK(facilities_for(PRule::NOver10, 100) == 10);
}
