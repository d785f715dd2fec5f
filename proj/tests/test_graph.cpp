#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gdn/graph.hpp"
#include "gdn/rng.hpp"

using namespace gdn;

namespace {

Matrix zeros(NodeId n, std::size_t d) {
  return Matrix(static_cast<std::size_t>(n), d);
}

Matrix random_features(NodeId n, std::size_t d, Rng& rng) {
  Matrix m(static_cast<std::size_t>(n), d);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

// Dense copy of the CSR operator, for the independent product oracle.
Matrix dense_of(const NormalizedAdjacency& s) {
  const auto n = static_cast<std::size_t>(s.num_nodes);
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t e = s.row_ptr[i]; e < s.row_ptr[i + 1]; ++e)
      d(i, static_cast<std::size_t>(s.col[e])) = s.val[e];
  return d;
}

}  // namespace

TEST_CASE("build canonicalizes, deduplicates, and drops self-loops") {
  BuildStats stats;
  const std::vector<Edge> edges = {{0, 1}, {1, 0}, {2, 2}, {1, 2}, {1, 2}};
  const AttributedGraph g = AttributedGraph::build(3, edges, zeros(3, 2),
                                                   &stats);
  CHECK(g.num_nodes() == 3);
  CHECK(g.num_edges() == 2);
  CHECK(stats.duplicate_edges == 2);  // {1,0} dup of {0,1}; {1,2} repeated
  CHECK(stats.self_loops == 1);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 0));
  CHECK(g.has_edge(1, 2));
  CHECK(!g.has_edge(0, 2));
  CHECK(!g.has_edge(2, 2));
  CHECK(g.degree(1) == 2);
  CHECK(g.degree(0) == 1);

  const auto nb = g.neighbors(1);
  REQUIRE(nb.size() == 2);
  CHECK(nb[0] == 0);
  CHECK(nb[1] == 2);

  const std::vector<Edge> canon = g.edge_list();
  REQUIRE(canon.size() == 2);
  CHECK(canon[0].u == 0);
  CHECK(canon[0].v == 1);
  CHECK(canon[1].u == 1);
  CHECK(canon[1].v == 2);
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("build rejects bad input") {
  CHECK_THROWS_AS(AttributedGraph::build(2, {{0, 2}}, zeros(2, 1)),
                  std::out_of_range);
  CHECK_THROWS_AS(AttributedGraph::build(2, {{0, -1}}, zeros(2, 1)),
                  std::out_of_range);
  CHECK_THROWS_AS(AttributedGraph::build(3, {}, zeros(2, 1)),
                  std::invalid_argument);
  Matrix bad = zeros(2, 1);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(AttributedGraph::build(2, {}, bad), std::invalid_argument);
}

TEST_CASE("isolated nodes have empty neighborhoods") {
  const AttributedGraph g = AttributedGraph::build(4, {{1, 2}}, zeros(4, 1));
  CHECK(g.neighbors(0).empty());
  CHECK(g.neighbors(3).empty());
  CHECK(g.degree(0) == 0);
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("normalization of a single isolated node is the identity") {
  const AttributedGraph g = AttributedGraph::build(1, {}, zeros(1, 1));
  const NormalizedAdjacency s = normalize_adjacency(g);
  REQUIRE(s.col.size() == 1);
  CHECK(s.col[0] == 0);
  CHECK(s.val[0] == 1.0);  // deg 0, self-loop weight 1/sqrt(1)^2
}

TEST_CASE("normalization of a single edge gives all entries one half") {
  const AttributedGraph g = AttributedGraph::build(2, {{0, 1}}, zeros(2, 1));
  const NormalizedAdjacency s = normalize_adjacency(g);
  REQUIRE(s.col.size() == 4);
  for (double v : s.val) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("normalization of a 3-node star matches the hand computation") {
  // Center 0 has degree 2, leaves have degree 1; with self-loops the scaled
  // degrees are 3 and 2.
  const AttributedGraph g =
      AttributedGraph::build(3, {{0, 1}, {0, 2}}, zeros(3, 1));
  const NormalizedAdjacency s = normalize_adjacency(g);
  const Matrix d = dense_of(s);
  const double inv6 = 1.0 / std::sqrt(6.0);
  CHECK(d(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(d(0, 1) == doctest::Approx(inv6).epsilon(1e-12));
  CHECK(d(0, 2) == doctest::Approx(inv6).epsilon(1e-12));
  CHECK(d(1, 0) == doctest::Approx(inv6).epsilon(1e-12));
  CHECK(d(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d(1, 2) == 0.0);
  CHECK(d(2, 2) == doctest::Approx(0.5).epsilon(1e-12));

  // CSR layout: the diagonal sits in sorted column position.
  const std::vector<std::size_t> row_ptr = {0, 3, 5, 7};
  CHECK(s.row_ptr == row_ptr);
  const std::vector<NodeId> col = {0, 1, 2, 0, 1, 0, 2};
  CHECK(s.col == col);
}

TEST_CASE("the normalized operator is symmetric with positive entries") {
  Rng rng(11);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < 20; ++u)
    for (NodeId v = u + 1; v < 20; ++v)
      if (rng.uniform() < 0.2) edges.push_back({u, v});
  const AttributedGraph g = AttributedGraph::build(20, edges, zeros(20, 1));
  const NormalizedAdjacency s = normalize_adjacency(g);
  const Matrix d = dense_of(s);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(d(i, i) > 0.0);  // self-loop always present
    for (std::size_t j = 0; j < 20; ++j) {
      CHECK(d(i, j) == d(j, i));
      CHECK(d(i, j) >= 0.0);
      CHECK(d(i, j) <= 1.0);
    }
  }
}

TEST_CASE("spmm equals the dense product oracle") {
  Rng rng(42);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < 10; ++u)
    for (NodeId v = u + 1; v < 10; ++v)
      if (rng.uniform() < 0.3) edges.push_back({u, v});
  const AttributedGraph g =
      AttributedGraph::build(10, edges, random_features(10, 4, rng));
  const NormalizedAdjacency s = normalize_adjacency(g);

  const Matrix x = random_features(10, 4, rng);
  const Matrix got = spmm(s, x);

  // Oracle: dense S, plain row-by-row dot products in ascending column
  // order. Terms match the CSR walk exactly, so the sums agree bitwise.
  const Matrix sd = dense_of(s);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 10; ++k) acc += sd(i, k) * x(k, j);
      CHECK(got(i, j) == acc);
    }
}

TEST_CASE("spmm on the identity fragment returns the input") {
  const AttributedGraph g = AttributedGraph::build(1, {}, zeros(1, 3));
  const NormalizedAdjacency s = normalize_adjacency(g);
  Matrix m(1, 3);
  m(0, 0) = 2.0;
  m(0, 1) = -1.0;
  m(0, 2) = 0.25;
  CHECK(spmm(s, m) == m);
}

TEST_CASE("propagate applies S exactly K times") {
  Rng rng(7);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < 12; ++u)
    for (NodeId v = u + 1; v < 12; ++v)
      if (rng.uniform() < 0.25) edges.push_back({u, v});
  const AttributedGraph g =
      AttributedGraph::build(12, edges, random_features(12, 3, rng));
  const NormalizedAdjacency s = normalize_adjacency(g);
  const Matrix& x = g.features();

  const PropagatedFeatures k0 = propagate(s, x, 0);
  CHECK(k0.degree == 0);
  CHECK(k0.values == x);

  const PropagatedFeatures k2 = propagate(s, x, 2);
  CHECK(k2.degree == 2);
  CHECK(k2.values == spmm(s, spmm(s, x)));

  CHECK_THROWS_AS(propagate(s, x, -1), std::invalid_argument);
}

TEST_CASE("propagating a lone node leaves its attributes untouched") {
  Matrix x(1, 2);
  x(0, 0) = 2.0;
  x(0, 1) = -1.0;
  const AttributedGraph g = AttributedGraph::build(1, {}, x);
  const NormalizedAdjacency s = normalize_adjacency(g);
  const PropagatedFeatures out = propagate(s, g.features(), 5);
  CHECK(out.values == x);
}

TEST_CASE("one propagation step averages a single edge pair") {
  Matrix x(2, 1);
  x(0, 0) = 1.0;
  x(1, 0) = 0.0;
  const AttributedGraph g = AttributedGraph::build(2, {{0, 1}}, x);
  const PropagatedFeatures out =
      propagate(normalize_adjacency(g), g.features(), 1);
  CHECK(out.values(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out.values(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("matmul multiplies like the schoolbook formula") {
  Matrix a(2, 3);
  Matrix b(3, 2);
  double v = 1.0;
  for (double& e : a.data()) e = v++;
  for (double& e : b.data()) e = v++;
  const Matrix c = matmul(a, b);
  REQUIRE(c.rows() == 2);
  REQUIRE(c.cols() == 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 3; ++k) acc += a(i, k) * b(k, j);
      CHECK(c(i, j) == acc);
    }
  CHECK_THROWS_AS(matmul(a, a), std::invalid_argument);
}
