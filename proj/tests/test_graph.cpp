#include <doctest.h>

#include <cmath>
#include <set>

#include "gsp/error.hpp"
#include "gsp/graph.hpp"
#include "gsp/kernels.hpp"
#include "support.hpp"

using namespace gsp;

namespace {

PixelGraph unit_path(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
  return PixelGraph(n, e);
}

// Random graph with no triangles: edges only between the two sides of a
// random bipartition.
PixelGraph random_bipartite(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> side(n);
  for (auto& s : side) s = u(rng) < 0.5;
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (side[i] != side[j] && u(rng) < 0.4) e.push_back({i, j, 0.2 + u(rng)});
  return PixelGraph(n, e);
}

}  // namespace

TEST_CASE("grid weights follow the Gaussian kernel") {
  const ImagePlane flat(2, 1, 1, 0.5);
  const PixelGraph g = build_grid_graph(flat, {1.0, 0.1, 4, false});
  REQUIRE(g.edges().size() == 1);
  CHECK(g.edges()[0].w == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  const ImagePlane img = testing::random_image(6, 5, 3, 3);
  const GridWeightParams p{1.5, 0.3, 8, false};
  const PixelGraph g8 = build_grid_graph(img, p);
  for (const Edge& e : g8.edges()) {
    const double dx = double(e.i % 6) - double(e.j % 6);
    const double dy = double(e.i / 6) - double(e.j / 6);
    double photo = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = img.pixel(e.i)[c] - img.pixel(e.j)[c];
      photo += d * d;
    }
    const double expect =
        std::exp(-(dx * dx + dy * dy) / (1.5 * 1.5)) * std::exp(-photo / (0.3 * 0.3));
    CHECK(e.w == doctest::Approx(expect).epsilon(1e-12));
    CHECK(e.w > 0.0);
    CHECK(e.w <= 1.0);
  }
  // 8-connected 6x5 grid: horizontal 5*5, vertical 6*4, diagonals 2*5*4.
  CHECK(g8.edges().size() == 25 + 24 + 40);
}

TEST_CASE("equal neighbours have photometric factor one") {
  const ImagePlane img(3, 3, 1, 0.25);
  const PixelGraph g = build_grid_graph(img, {2.0, 0.05, 8, false});
  for (const Edge& e : g.edges()) {
    const double geo = (e.j - e.i == 1 || e.j - e.i == 3) ? 1.0 : 2.0;
    CHECK(e.w == doctest::Approx(std::exp(-geo / 4.0)).epsilon(1e-14));
  }
}

TEST_CASE("degenerate grid inputs") {
  const PixelGraph one = build_grid_graph(ImagePlane(1, 1, 1, 0.3), {});
  CHECK(one.node_count() == 1);
  CHECK(one.edges().empty());
  CHECK_THROWS_AS(build_grid_graph(ImagePlane(), {}), Error);
  CHECK_THROWS_AS(build_grid_graph(ImagePlane(2, 2), {0.0, 0.1, 4, false}), Error);
  CHECK_THROWS_AS(build_grid_graph(ImagePlane(2, 2), {1.0, 0.1, 6, false}), Error);
}

TEST_CASE("image samples are validated") {
  CHECK_THROWS_AS(ImagePlane(1, 1, 1, std::vector<double>{1.5}), Error);
  CHECK_THROWS_AS(ImagePlane(1, 1, 1, std::vector<double>{NAN}), Error);
  CHECK_THROWS_AS(ImagePlane(2, 1, 1, std::vector<double>{0.5}), Error);
}

TEST_CASE("pixel graph rejects malformed edges") {
  CHECK_THROWS_AS(PixelGraph(2, {{1, 0, 1.0}}), Error);
  CHECK_THROWS_AS(PixelGraph(2, {{0, 2, 1.0}}), Error);
  CHECK_THROWS_AS(PixelGraph(2, {{0, 1, 0.0}}), Error);
  CHECK_THROWS_AS(PixelGraph(3, {{0, 1, 1.0}, {0, 1, 2.0}}), Error);
}

TEST_CASE("nonlocal graph") {
  SUBCASE("constant image gives unit weights") {
    const PixelGraph g = build_nonlocal_graph(ImagePlane(5, 5, 1, 0.4), {1, 2, 3, 0.1});
    CHECK(!g.edges().empty());
    for (const Edge& e : g.edges()) CHECK(e.w == 1.0);
  }
  SUBCASE("k = 0 gives no edges") {
    CHECK(build_nonlocal_graph(testing::random_image(5, 5, 1), {1, 2, 0, 0.1}).edges().empty());
  }
  SUBCASE("k above the window population is capped") {
    const PixelGraph g = build_nonlocal_graph(testing::random_image(3, 3, 2), {0, 1, 100, 1.0});
    // Every pair within Chebyshev distance 1 is connected.
    std::size_t expect = 0;
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = i + 1; j < 9; ++j)
        if (std::abs(int(i % 3) - int(j % 3)) <= 1 && std::abs(int(i / 3) - int(j / 3)) <= 1)
          ++expect;
    CHECK(g.edges().size() == expect);
  }
  SUBCASE("an exact repeated patch is the top neighbour") {
    // Row: the patch around index 2 is repeated around index 7.
    const std::vector<double> row{0.9, 0.1, 0.5, 0.8, 0.3, 0.0, 0.1, 0.5, 0.8, 0.6};
    const ImagePlane img(10, 1, 1, row);
    const PixelGraph g = build_nonlocal_graph(img, {1, 6, 1, 0.2});
    bool found = false;
    for (const Edge& e : g.edges())
      if (e.i == 2 && e.j == 7) found = e.w == 1.0;
    CHECK(found);
  }
}

TEST_CASE("degree vectors") {
  CHECK(degree_vector(unit_path(2)) == std::vector<double>{1, 1});
  CHECK(degree_vector(PixelGraph(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}})) ==
        std::vector<double>{2, 2, 2});
  CHECK(degree_vector(PixelGraph(3, {{0, 1, 0.5}, {1, 2, 2}})) ==
        std::vector<double>{0.5, 2.5, 2});
  CHECK(degree_vector(PixelGraph(2, {{0, 1, 1}}, {0.5, 0.0})) == std::vector<double>{1.5, 1});
}

TEST_CASE("combinatorial laplacian of small paths") {
  const SparseSymOperator l = variation_operator(unit_path(2), OperatorKind::Combinatorial);
  CHECK(l.to_dense() == std::vector<double>{1, -1, -1, 1});
  const SparseSymOperator b = variation_operator(unit_path(2), OperatorKind::BiLaplacian);
  CHECK(b.to_dense() == std::vector<double>{2, -2, -2, 2});
}

TEST_CASE("laplacian row sums vanish and annihilate constants") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PixelGraph g = testing::random_connected_graph(15, 0.3, seed);
    const SparseSymOperator l = variation_operator(g, OperatorKind::Combinatorial);
    for (double s : l.row_sums()) CHECK(std::abs(s) <= 1e-12);
    const std::vector<double> ones(15, 1.0);
    for (double v : l.apply(ones)) CHECK(std::abs(v) <= 1e-12);
    // Exact symmetry of the assembled adjacency.
    const std::vector<double> w = adjacency_operator(g).to_dense();
    for (std::size_t i = 0; i < 15; ++i)
      for (std::size_t j = 0; j < 15; ++j) CHECK(w[i * 15 + j] == w[j * 15 + i]);
  }
}

TEST_CASE("normalized variants") {
  const PixelGraph g = testing::random_connected_graph(8, 0.4, 11);
  const std::vector<double> d = degree_vector(g);
  const std::vector<double> l = variation_operator(g, OperatorKind::Combinatorial).to_dense();
  const std::vector<double> ln = variation_operator(g, OperatorKind::SymmetricNormalized).to_dense();
  const SparseSymOperator rw = variation_operator(g, OperatorKind::RandomWalk);
  CHECK(!rw.symmetric());
  const std::vector<double> lr = rw.to_dense();
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      CHECK(ln[i * 8 + j] == doctest::Approx(l[i * 8 + j] / std::sqrt(d[i] * d[j])).epsilon(1e-12));
      CHECK(lr[i * 8 + j] == doctest::Approx(l[i * 8 + j] / d[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("generalized laplacian adds self-loops") {
  const PixelGraph g(3, {{0, 1, 1.0}, {1, 2, 0.5}}, {0.25, 0.0, 2.0});
  const std::vector<double> lg = variation_operator(g, OperatorKind::Generalized).to_dense();
  const std::vector<double> l = variation_operator(g, OperatorKind::Combinatorial).to_dense();
  CHECK(l == std::vector<double>{1, -1, 0, -1, 1.5, -0.5, 0, -0.5, 0.5});
  CHECK(lg == std::vector<double>{1.25, -1, 0, -1, 1.5, -0.5, 0, -0.5, 2.5});
}

TEST_CASE("isolated node is rejected by normalized kinds") {
  const PixelGraph g(3, {{0, 1, 1.0}});
  try {
    variation_operator(g, OperatorKind::SymmetricNormalized);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateDegree);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  CHECK_THROWS_AS(variation_operator(g, OperatorKind::RandomWalk), Error);
}

TEST_CASE("bilaplacian is the square of the laplacian") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 5 + seed % 16;
    const PixelGraph g = testing::random_connected_graph(n, 0.3, 100 + seed);
    const std::vector<double> l = variation_operator(g, OperatorKind::Combinatorial).to_dense();
    const std::vector<double> b = variation_operator(g, OperatorKind::BiLaplacian).to_dense();
    CHECK(testing::max_abs_diff(b, testing::dense_matmul(l, l, n)) <= 1e-12);
  }
}

TEST_CASE("bilaplacian entry formulas on triangle-free graphs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 6 + seed % 10;
    const PixelGraph g = random_bipartite(n, 500 + seed);
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (const Edge& e : g.edges()) w[e.i][e.j] = w[e.j][e.i] = e.w;
    const std::vector<double> b = variation_operator(g, OperatorKind::BiLaplacian).to_dense();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        double expect = 0.0;
        if (k == i) {
          double sq = 0.0, sum = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            sq += w[i][j] * w[i][j];
            sum += w[i][j];
          }
          expect = sq + sum * sum;
        } else if (w[i][k] > 0.0) {
          for (std::size_t m = 0; m < n; ++m) expect -= w[i][k] * w[k][m] + w[i][k] * w[i][m];
        } else {
          for (std::size_t j = 0; j < n; ++j) expect += w[i][j] * w[j][k];
        }
        CHECK(std::abs(b[i * n + k] - expect) <= 1e-12);
      }
    }
  }
}

TEST_CASE("sinkhorn scaling") {
  SUBCASE("already doubly stochastic") {
    const SparseSymOperator w(2, {{0, 0, 0.5}, {0, 1, 0.5}, {1, 0, 0.5}, {1, 1, 0.5}},
                              OperatorKind::Adjacency, true);
    const SinkhornResult r = sinkhorn_scale(w, 100, 1e-12);
    CHECK(r.converged);
    for (double c : r.scaling) CHECK(c == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(testing::max_abs_diff(r.doubly_stochastic.to_dense(), w.to_dense()) <= 1e-14);
  }
  SUBCASE("permutation") {
    const SparseSymOperator w(2, {{0, 1, 1.0}, {1, 0, 1.0}}, OperatorKind::Adjacency, true);
    const SinkhornResult r = sinkhorn_scale(w, 100, 1e-12);
    CHECK(r.doubly_stochastic.to_dense() == w.to_dense());
  }
  SUBCASE("two by two converges within 100 iterations") {
    const SparseSymOperator w(2, {{0, 0, 1}, {0, 1, 2}, {1, 0, 2}, {1, 1, 1}},
                              OperatorKind::Adjacency, true);
    const SinkhornResult r = sinkhorn_scale(w, 100, 1e-8);
    CHECK(r.converged);
    CHECK(r.iterations <= 100);
    for (double s : r.doubly_stochastic.row_sums()) CHECK(std::abs(s - 1.0) <= 1e-8);
  }
  SUBCASE("random graphs: symmetric output and monotone residual") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const PixelGraph g0 = testing::random_connected_graph(12, 0.3, 40 + seed);
      const PixelGraph g(12, g0.edges(), std::vector<double>(12, 1.0));
      const SinkhornResult r = sinkhorn_scale(adjacency_operator(g), 2000, 1e-12);
      CHECK(r.converged);
      CHECK(r.doubly_stochastic.symmetric());
      for (double s : r.doubly_stochastic.row_sums()) CHECK(std::abs(s - 1.0) <= 1e-12);
      for (std::size_t k = 1; k < r.residual_history.size(); ++k)
        CHECK(r.residual_history[k] <= r.residual_history[k - 1] + 1e-15);
    }
  }
  SUBCASE("zero row is not scalable") {
    const SparseSymOperator w(3, {{0, 1, 1.0}, {1, 0, 1.0}}, OperatorKind::Adjacency, true);
    try {
      sinkhorn_scale(w, 100, 1e-10);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonScalable);
    }
  }
}

TEST_CASE("connected components and induced subgraphs") {
  const PixelGraph g(6, {{0, 3, 1.0}, {1, 2, 1.0}, {3, 5, 1.0}});
  CHECK(connected_components(g) == std::vector<std::size_t>{0, 1, 1, 0, 2, 0});
  const std::vector<std::size_t> nodes{5, 3, 0};
  const PixelGraph sub = g.induced(nodes);
  CHECK(sub.node_count() == 3);
  CHECK(sub.edges().size() == 2);
}

TEST_CASE("parallel kernels match the serial reference exactly") {
  const ImagePlane img = testing::random_image(70, 65, 9, 2);
  const GridWeightParams p{1.2, 0.2, 8, false};
  const PixelGraph g = build_grid_graph(img, p);
  std::vector<Edge> a = g.edges();
  std::vector<Edge> b = g.edges();
  kernels::grid_edge_weights(img, p, a);
  kernels::serial::grid_edge_weights(img, p, b);
  CHECK(a == b);

  const SparseSymOperator l = variation_operator(g, OperatorKind::Combinatorial);
  const std::vector<double> x = testing::random_vector(l.dimension(), 4);
  std::vector<double> y1(x.size()), y2(x.size());
  kernels::spmv(l, x, y1);
  kernels::serial::spmv(l, x, y2);
  CHECK(y1 == y2);

  ImagePlane o1, o2;
  kernels::bilateral(img, {1.0, 0.2, 8, true}, 2, o1);
  kernels::serial::bilateral(img, {1.0, 0.2, 8, true}, 2, o2);
  CHECK(std::equal(o1.samples().begin(), o1.samples().end(), o2.samples().begin()));

  ImagePlane d1 = img, d2 = img;
  kernels::dt_rows({d1.samples().data(), 65, 70, 2, 140, 2}, 1.0, 5.0, 3.0);
  kernels::serial::dt_rows({d2.samples().data(), 65, 70, 2, 140, 2}, 1.0, 5.0, 3.0);
  CHECK(std::equal(d1.samples().begin(), d1.samples().end(), d2.samples().begin()));
}
