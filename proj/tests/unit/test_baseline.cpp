#include <doctest.h>

#include "support/fixtures.hpp"
#include "unilift/baseline/density_cluster.hpp"
#include "unilift/core/error.hpp"

using namespace unilift;

namespace {

// Core points form components, numbered by their smallest core index; a border point
// joins the earliest-numbered component with a core point within eps.
std::vector<int> reference_dbscan(const std::vector<double>& x, int dim, double eps, int min_pts) {
  const int n = static_cast<int>(x.size()) / dim;
  auto close = [&](int i, int j) {
    double d2 = 0.0;
    for (int c = 0; c < dim; ++c) d2 += (x[i * dim + c] - x[j * dim + c]) * (x[i * dim + c] - x[j * dim + c]);
    return d2 <= eps * eps;
  };
  std::vector<bool> core(n);
  for (int i = 0; i < n; ++i) {
    int count = 0;
    for (int j = 0; j < n; ++j) count += close(i, j);
    core[i] = count >= min_pts;
  }
  std::vector<int> label(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    if (!core[i] || label[i] >= 0) continue;
    std::vector<int> stack{i};
    label[i] = next;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (int b = 0; b < n; ++b) {
        if (core[b] && label[b] < 0 && close(a, b)) {
          label[b] = next;
          stack.push_back(b);
        }
      }
    }
    ++next;
  }
  for (int i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = -1;
    for (int j = 0; j < n; ++j) {
      if (core[j] && close(i, j) && (best < 0 || label[j] < best)) best = label[j];
    }
    label[i] = best;
  }
  return label;
}

EmbeddingMap sigmoid_map(const std::vector<std::vector<double>>& sig) {
  const int dim = static_cast<int>(sig[0].size());
  EmbeddingMap m(static_cast<int>(sig.size()), 1, dim);
  for (std::size_t p = 0; p < sig.size(); ++p) {
    for (int k = 0; k < dim; ++k) m.values[p * dim + k] = std::log(sig[p][k] / (1.0 - sig[p][k]));
  }
  std::fill(m.coverage.begin(), m.coverage.end(), 1.0);
  return m;
}

}  // namespace

TEST_CASE("two separated blobs give their means") {
  std::vector<double> x;
  const double offsets[5][2] = {{0, 0}, {0.01, 0}, {-0.01, 0}, {0, 0.01}, {0, -0.01}};
  for (const auto& o : offsets) x.insert(x.end(), {0.2 + o[0], 0.2 + o[1]});
  for (const auto& o : offsets) x.insert(x.end(), {0.8 + o[0], 0.7 + o[1]});
  const auto model = baseline::fit_density_clusters(x, 2, 0.05, 3);
  REQUIRE(model.centroids.size() == 2);
  CHECK(std::abs(model.centroids[0][0] - 0.2) < 1e-6);
  CHECK(std::abs(model.centroids[0][1] - 0.2) < 1e-6);
  CHECK(std::abs(model.centroids[1][0] - 0.8) < 1e-6);
  CHECK(std::abs(model.centroids[1][1] - 0.7) < 1e-6);
}

TEST_CASE("identical points form one cluster at that point") {
  std::vector<double> x;
  for (int i = 0; i < 10; ++i) x.insert(x.end(), {0.3, 0.6, 0.1});
  const auto model = baseline::fit_density_clusters(x, 3, 0.01, 4);
  REQUIRE(model.centroids.size() == 1);
  CHECK(model.centroids[0] == std::vector<double>{0.3, 0.6, 0.1});
}

TEST_CASE("density clustering agrees with the pairwise reference") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 1 + trial % 3;
    std::vector<double> x(200 * dim);
    for (auto& v : x) v = uniform_unit(rng);
    const double eps = 0.05 + 0.05 * (trial % 4);
    const int min_pts = 3 + trial % 5;
    const auto got = baseline::dbscan(x, dim, eps, min_pts);
    CHECK(got.labels == reference_dbscan(x, dim, eps, min_pts));
  }
}

TEST_CASE("no dense region is a numerical failure") {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  try {
    baseline::fit_density_clusters(x, 1, 0.1, 2);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Numerical);
  }
}

TEST_CASE("a single centroid labels every covered pixel") {
  baseline::ClusterModel model{2, {{0.5, 0.5}}, 0.1};
  EmbeddingMap map = sigmoid_map({{0.1, 0.9}, {0.7, 0.2}, {0.5, 0.5}});
  map.coverage[1] = 0.2;
  const auto labels = baseline::assign_labels(map, model);
  CHECK(labels.labels == std::vector<Label>{1, 0, 1});
}

TEST_CASE("equidistant pixel goes to the lower centroid") {
  baseline::ClusterModel model{1, {{0.25}, {0.75}}, 0.1};
  const auto labels = baseline::assign_labels(sigmoid_map({{0.5}}), model);
  CHECK(labels.labels[0] == 1);
}

TEST_CASE("assignment equals a direct nearest-centroid search") {
  Rng rng(8);
  baseline::ClusterModel model;
  model.dim = 3;
  for (int c = 0; c < 5; ++c) model.centroids.push_back({uniform_unit(rng), uniform_unit(rng), uniform_unit(rng)});
  std::vector<std::vector<double>> sig;
  for (int p = 0; p < 300; ++p) {
    const auto& c = model.centroids[uniform_index(rng, 5)];
    sig.push_back({std::clamp(c[0] + 0.1 * standard_normal(rng), 0.01, 0.99),
                   std::clamp(c[1] + 0.1 * standard_normal(rng), 0.01, 0.99),
                   std::clamp(c[2] + 0.1 * standard_normal(rng), 0.01, 0.99)});
  }
  const EmbeddingMap map = sigmoid_map(sig);
  const auto labels = baseline::assign_labels(map, model);
  for (std::size_t p = 0; p < sig.size(); ++p) {
    double best = 1e300;
    Label want = 0;
    for (std::size_t c = 0; c < 5; ++c) {
      double d2 = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double s = sigmoid(map.values[p * 3 + k]);
        d2 += (s - model.centroids[c][k]) * (s - model.centroids[c][k]);
      }
      if (d2 < best) {
        best = d2;
        want = static_cast<Label>(c + 1);
      }
    }
    CHECK(labels.labels[p] == want);
  }
}

TEST_CASE("sampling keeps only covered pixels") {
  EmbeddingMap map = sigmoid_map({{0.2}, {0.4}, {0.6}, {0.8}});
  map.coverage = {1.0, 0.1, 1.0, 1.0};
  const auto all = baseline::sample_sigmoid_embeddings({map}, 10);
  REQUIRE(all.size() == 3);
  CHECK(all[1] == doctest::Approx(0.6));
  CHECK(baseline::sample_sigmoid_embeddings({map}, 2).size() == 2);
}
