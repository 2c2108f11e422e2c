#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fiberparc/coarsening.hpp"
#include "fiberparc/eigensolver.hpp"
#include "fiberparc/path_graph.hpp"

using namespace fiberparc;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

PathGraph random_weighted_chain(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(0.2, 3.0);
  std::vector<GraphEdge> edges;
  for (int i = 0; i + 1 < n; ++i) {
    edges.push_back({i, i + 1, w(rng)});
  }
  return make_graph(n, std::move(edges));
}

}  // namespace

TEST_CASE("path graphs have chain edges and matching degrees") {
  const PathGraph g1 = build_path_graph(1);
  CHECK(g1.num_nodes == 1);
  CHECK(g1.edges.empty());
  CHECK(g1.degrees[0] == 0.0);

  const PathGraph g3 = build_path_graph(3);
  REQUIRE(g3.edges.size() == 2);
  CHECK(g3.edges[0].a == 0);
  CHECK(g3.edges[0].b == 1);
  CHECK(g3.edges[0].w == 1.0);
  CHECK(g3.degrees[0] == 1.0);
  CHECK(g3.degrees[1] == 2.0);
  CHECK(g3.degrees[2] == 1.0);

  const PathGraph g100 = build_path_graph(100);
  CHECK(g100.edges.size() == 99);
  CHECK(g100.total_edge_weight() == 99.0);

  CHECK_THROWS_AS(build_path_graph(0), std::invalid_argument);
}

TEST_CASE("normalized Laplacian matches hand values on tiny chains") {
  const Eigen::MatrixXd l2 = normalized_laplacian(build_path_graph(2));
  CHECK(l2(0, 0) == doctest::Approx(1.0));
  CHECK(l2(1, 1) == doctest::Approx(1.0));
  CHECK(l2(0, 1) == doctest::Approx(-1.0));
  CHECK(l2(1, 0) == doctest::Approx(-1.0));

  const Eigen::MatrixXd l3 = normalized_laplacian(build_path_graph(3));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(l3(0, 0) == doctest::Approx(1.0));
  CHECK(l3(0, 1) == doctest::Approx(-s));
  CHECK(l3(1, 2) == doctest::Approx(-s));
  CHECK(l3(0, 2) == 0.0);
  CHECK(max_abs(l3 - l3.transpose()) == 0.0);
}

TEST_CASE("isolated nodes contribute zero rows and columns") {
  const PathGraph g = make_graph(5, {{0, 1, 1.0}, {1, 2, 1.0}});
  const Eigen::MatrixXd l = normalized_laplacian(g);
  CHECK(l.row(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(l.col(4).cwiseAbs().maxCoeff() == 0.0);

  // One zero eigenvalue per connected component: the 3-chain plus two
  // isolated nodes gives multiplicity 3.
  const SpectralBasis b = eigendecompose(l);
  int zeros = 0;
  for (int i = 0; i < b.eigenvalues.size(); ++i) {
    if (std::abs(b.eigenvalues[i]) <= 1e-8) ++zeros;
  }
  CHECK(zeros == 3);
}

TEST_CASE("2-chain eigenpairs match the closed form") {
  const SpectralBasis b = eigendecompose(normalized_laplacian(build_path_graph(2)));
  REQUIRE(b.eigenvalues.size() == 2);
  CHECK(std::abs(b.eigenvalues[0] - 0.0) <= 1e-10);
  CHECK(std::abs(b.eigenvalues[1] - 2.0) <= 1e-10);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(b.eigenvectors(0, 0) == doctest::Approx(s));
  CHECK(b.eigenvectors(1, 0) == doctest::Approx(s));
  CHECK(b.eigenvectors(0, 1) == doctest::Approx(s));
  CHECK(b.eigenvectors(1, 1) == doctest::Approx(-s));
}

TEST_CASE("3-chain eigenvalues are 0, 1, 2 with the degree-weighted null vector") {
  const SpectralBasis b = eigendecompose(normalized_laplacian(build_path_graph(3)));
  REQUIRE(b.eigenvalues.size() == 3);
  CHECK(std::abs(b.eigenvalues[0] - 0.0) <= 1e-10);
  CHECK(std::abs(b.eigenvalues[1] - 1.0) <= 1e-10);
  CHECK(std::abs(b.eigenvalues[2] - 2.0) <= 1e-10);

  // Null vector is proportional to sqrt(degree): (1, sqrt 2, 1) normalized.
  CHECK(b.eigenvectors(0, 0) == doctest::Approx(0.5));
  CHECK(b.eigenvectors(1, 0) == doctest::Approx(std::sqrt(2.0) / 2.0));
  CHECK(b.eigenvectors(2, 0) == doctest::Approx(0.5));
}

TEST_CASE("eigendecomposition agrees with a dense symmetric solver on all small chains") {
  for (int n = 2; n <= 16; ++n) {
    const Eigen::MatrixXd l = normalized_laplacian(build_path_graph(n));
    const SpectralBasis mine = eigendecompose(l);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(l);
    REQUIRE(ref.info() == Eigen::Success);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(mine.eigenvalues[i] - ref.eigenvalues()[i]) <= 1e-8);
    }

    // Basis-independent checks: reconstruction and orthonormality.
    const Eigen::MatrixXd recon =
        mine.eigenvectors * mine.eigenvalues.asDiagonal() * mine.eigenvectors.transpose();
    CHECK(max_abs(recon - l) <= 1e-8);
    const Eigen::MatrixXd gram = mine.eigenvectors.transpose() * mine.eigenvectors;
    CHECK(max_abs(gram - Eigen::MatrixXd::Identity(n, n)) <= 1e-10);
  }
}

TEST_CASE("eigendecomposition agrees with the dense solver on weighted chains") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const int n = 7 + static_cast<int>(seed);
    const Eigen::MatrixXd l = normalized_laplacian(random_weighted_chain(n, seed));
    const SpectralBasis mine = eigendecompose(l);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(l);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(mine.eigenvalues[i] - ref.eigenvalues()[i]) <= 1e-8);
    }
    const Eigen::MatrixXd recon =
        mine.eigenvectors * mine.eigenvalues.asDiagonal() * mine.eigenvectors.transpose();
    CHECK(max_abs(recon - l) <= 1e-8);
  }
}

TEST_CASE("100-node spectrum lies in [0,2] with a simple zero and fixed signs") {
  const SpectralBasis b = eigendecompose(normalized_laplacian(build_path_graph(100)));
  REQUIRE(b.eigenvalues.size() == 100);
  int zeros = 0;
  for (int i = 0; i < 100; ++i) {
    CHECK(b.eigenvalues[i] >= -1e-10);
    CHECK(b.eigenvalues[i] <= 2.0 + 1e-10);
    if (std::abs(b.eigenvalues[i]) <= 1e-8) ++zeros;
    if (i > 0) CHECK(b.eigenvalues[i] >= b.eigenvalues[i - 1]);
  }
  CHECK(zeros == 1);

  // Sign convention: the largest-magnitude component of every eigenvector is
  // positive, ties resolved to the lowest index.
  for (int c = 0; c < 100; ++c) {
    int best = 0;
    for (int r = 1; r < 100; ++r) {
      if (std::abs(b.eigenvectors(r, c)) > std::abs(b.eigenvectors(best, c))) best = r;
    }
    CHECK(b.eigenvectors(best, c) > 0.0);
  }
}

TEST_CASE("the Laplacian quadratic form is nonnegative") {
  const Eigen::MatrixXd l = normalized_laplacian(build_path_graph(50));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd x(50);
    for (int i = 0; i < 50; ++i) x[i] = gauss(rng);
    CHECK(x.dot(l * x) >= -1e-10);
  }
}

TEST_CASE("eigendecompose rejects invalid input") {
  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(3, 3);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(eigendecompose(asym), std::invalid_argument);

  // A star is connected but not a path: the hub has three neighbors.
  const PathGraph star = make_graph(4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}});
  CHECK_THROWS_AS(eigendecompose(normalized_laplacian(star)), std::invalid_argument);
}

TEST_CASE("tridiagonal QL recovers a hand-checkable 2x2 spectrum") {
  Eigen::VectorXd d(2), e(2);
  d << 0.0, 0.0;
  e << -1.0, 0.0;
  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(2, 2);
  detail::ql_implicit_shift(d, e, z);
  const double lo = std::min(d[0], d[1]);
  const double hi = std::max(d[0], d[1]);
  CHECK(lo == doctest::Approx(-1.0));
  CHECK(hi == doctest::Approx(1.0));
  CHECK(max_abs(z.transpose() * z - Eigen::MatrixXd::Identity(2, 2)) <= 1e-12);
}

TEST_CASE("coarsening a 3-chain pairs the first two nodes and pads one fake") {
  const CoarseningHierarchy h = graclus_coarsen(build_path_graph(3), 2);
  REQUIRE(h.num_levels() == 2);
  CHECK(h.num_input_nodes == 3);
  CHECK(h.padded_length == 4);

  REQUIRE(h.matchings.size() == 1);
  REQUIRE(h.matchings[0].size() == 2);
  CHECK(h.matchings[0][0].a == 0);
  CHECK(h.matchings[0][0].b == 1);
  CHECK(h.matchings[0][1].a == 2);
  CHECK(h.matchings[0][1].b == -1);

  REQUIRE(h.input_permutation.size() == 4);
  CHECK(h.input_permutation[0] == 0);
  CHECK(h.input_permutation[1] == 1);
  CHECK(h.input_permutation[2] == 2);
  CHECK(h.input_permutation[3] == -1);

  CHECK(h.levels[0].real_mask == std::vector<bool>{true, true, true, false});
  CHECK(h.levels[0].parent_of == std::vector<int>{0, 0, 1, 1});
  CHECK(h.levels[1].real_mask == std::vector<bool>{true, true});
  CHECK(h.levels[1].parent_of.empty());

  // The merged pair and the singleton stay adjacent with the crossing weight.
  REQUIRE(h.levels[1].graph.edges.size() == 1);
  CHECK(h.levels[1].graph.edges[0].a == 0);
  CHECK(h.levels[1].graph.edges[0].b == 1);
  CHECK(h.levels[1].graph.edges[0].w == doctest::Approx(1.0));
}

TEST_CASE("coarsening a 4-chain needs no fakes") {
  const CoarseningHierarchy h = graclus_coarsen(build_path_graph(4), 2);
  CHECK(h.padded_length == 4);
  REQUIRE(h.matchings[0].size() == 2);
  CHECK(h.matchings[0][0].a == 0);
  CHECK(h.matchings[0][0].b == 1);
  CHECK(h.matchings[0][1].a == 2);
  CHECK(h.matchings[0][1].b == 3);
  CHECK(h.input_permutation == std::vector<int>{0, 1, 2, 3});
  CHECK(h.levels[1].graph.num_nodes == 2);
  REQUIRE(h.levels[1].graph.edges.size() == 1);
  CHECK(h.levels[1].graph.edges[0].w == doctest::Approx(1.0));
}

TEST_CASE("a 100-node 3-level hierarchy pads to 104/52/26") {
  const CoarseningHierarchy h = graclus_coarsen(build_path_graph(100), 3);
  REQUIRE(h.num_levels() == 3);
  CHECK(h.padded_length == 104);
  CHECK(h.levels[0].graph.num_nodes == 104);
  CHECK(h.levels[1].graph.num_nodes == 52);
  CHECK(h.levels[2].graph.num_nodes == 26);

  const auto count_real = [](const std::vector<bool>& mask) {
    int n = 0;
    for (bool b : mask) n += b ? 1 : 0;
    return n;
  };
  CHECK(count_real(h.levels[0].real_mask) == 100);
  CHECK(count_real(h.levels[1].real_mask) == 50);
  CHECK(count_real(h.levels[2].real_mask) == 25);

  // Real slots enumerate the input exactly once; for a chain the layout is
  // the identity with fakes at the tail.
  for (int i = 0; i < 100; ++i) {
    CHECK(h.input_permutation[i] == i);
    CHECK(h.slot_of_input[i] == i);
  }
  for (int i = 100; i < 104; ++i) {
    CHECK(h.input_permutation[i] == -1);
  }

  // Stride-2 parent layout and consistent sizes at every level.
  for (int l = 0; l + 1 < h.num_levels(); ++l) {
    CHECK(h.levels[l].graph.num_nodes == 2 * h.levels[l + 1].graph.num_nodes);
    for (int s = 0; s < h.levels[l].graph.num_nodes; ++s) {
      CHECK(h.levels[l].parent_of[s] == s / 2);
    }
  }

  // Every level carries a valid basis of its padded Laplacian.
  for (int l = 0; l < h.num_levels(); ++l) {
    const auto& level = h.levels[l];
    const int sz = level.graph.num_nodes;
    REQUIRE(level.basis.eigenvalues.size() == sz);
    int zeros = 0;
    int fakes = 0;
    for (int i = 0; i < sz; ++i) {
      CHECK(level.basis.eigenvalues[i] >= -1e-10);
      CHECK(level.basis.eigenvalues[i] <= 2.0 + 1e-10);
      if (std::abs(level.basis.eigenvalues[i]) <= 1e-8) ++zeros;
      if (!level.real_mask[i]) ++fakes;
    }
    CHECK(zeros == 1 + fakes);
    const Eigen::MatrixXd gram = level.basis.eigenvectors.transpose() * level.basis.eigenvectors;
    CHECK(max_abs(gram - Eigen::MatrixXd::Identity(sz, sz)) <= 1e-10);
  }
}

TEST_CASE("coarse edge weights conserve uncollapsed fine weight") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const int n = 5 + static_cast<int>(seed);
    const PathGraph fine = random_weighted_chain(n, seed + 100);
    const CoarseningHierarchy h = graclus_coarsen(fine, 2);

    double collapsed = 0.0;
    for (const MatchedPair& p : h.matchings[0]) {
      if (p.b < 0) continue;
      for (const GraphEdge& e : fine.edges) {
        if ((e.a == p.a && e.b == p.b) || (e.a == p.b && e.b == p.a)) collapsed += e.w;
      }
    }
    CHECK(h.levels[1].graph.total_edge_weight() ==
          doctest::Approx(fine.total_edge_weight() - collapsed).epsilon(1e-12));
  }
}

TEST_CASE("signals permute into padded layout and back") {
  const CoarseningHierarchy h = graclus_coarsen(build_path_graph(10), 3);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd x(10, 3);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 3; ++c) x(r, c) = gauss(rng);

  const Eigen::MatrixXd padded = permute_signal(h, x);
  REQUIRE(padded.rows() == h.padded_length);
  for (int s = 0; s < h.padded_length; ++s) {
    if (h.input_permutation[s] < 0) {
      CHECK(padded.row(s).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  const Eigen::MatrixXd back = unpermute_signal(h, padded);
  CHECK(max_abs(back - x) == 0.0);

  Eigen::MatrixXd wrong(9, 3);
  wrong.setZero();
  CHECK_THROWS_AS(permute_signal(h, wrong), std::invalid_argument);
}

TEST_CASE("the reversal permutation is an involution that flips node order") {
  const CoarseningHierarchy h = graclus_coarsen(build_path_graph(100), 3);
  const std::vector<int> rev = reversal_permutation(h);
  REQUIRE(static_cast<int>(rev.size()) == h.padded_length);
  for (int s = 0; s < h.padded_length; ++s) {
    CHECK(rev[static_cast<std::size_t>(rev[s])] == s);
    if (h.input_permutation[s] < 0) CHECK(rev[s] == s);
  }

  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd x(100, 3);
  for (int r = 0; r < 100; ++r)
    for (int c = 0; c < 3; ++c) x(r, c) = gauss(rng);

  const Eigen::MatrixXd padded = permute_signal(h, x);
  Eigen::MatrixXd reversed(padded.rows(), padded.cols());
  for (int s = 0; s < padded.rows(); ++s) {
    reversed.row(s) = padded.row(rev[s]);
  }
  const Eigen::MatrixXd back = unpermute_signal(h, reversed);
  CHECK(max_abs(back - x.colwise().reverse()) == 0.0);
}
