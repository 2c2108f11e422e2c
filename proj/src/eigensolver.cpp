#include "fiberparc/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fiberparc {

namespace detail {

// Implicit-shift QL with eigenvector accumulation, after the classic
// tql2/tqli routines (Bowdler, Martin, Reinsch, Wilkinson; EISPACK).
void ql_implicit_shift(Eigen::VectorXd& d, Eigen::VectorXd& e, Eigen::MatrixXd& z) {
  const int n = static_cast<int>(d.size());
  if (n <= 1) {
    return;
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  e[n - 1] = 0.0;

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) {
          break;
        }
      }
      if (m != l) {
        if (iter++ == 30) {
          throw std::runtime_error("ql_implicit_shift: no convergence within 30 sweeps");
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            // Deflate without finishing the sweep.
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < z.rows(); ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (r == 0.0 && i >= l) {
          continue;
        }
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace detail

namespace {

// Orders a path component by walking from its lower-indexed endpoint.
std::vector<int> order_as_path(const std::vector<int>& nodes,
                               const std::vector<std::vector<int>>& adjacency) {
  if (nodes.size() == 1) {
    return nodes;
  }
  std::vector<int> endpoints;
  for (int v : nodes) {
    const std::size_t deg = adjacency[v].size();
    if (deg > 2) {
      throw std::invalid_argument("eigendecompose: component is not a path (node degree > 2)");
    }
    if (deg == 1) {
      endpoints.push_back(v);
    }
  }
  if (endpoints.size() != 2) {
    throw std::invalid_argument("eigendecompose: component is not a path");
  }

  std::vector<int> order;
  order.reserve(nodes.size());
  int prev = -1;
  int cur = std::min(endpoints[0], endpoints[1]);
  order.push_back(cur);
  while (order.size() < nodes.size()) {
    int next = -1;
    for (int nb : adjacency[cur]) {
      if (nb != prev) {
        next = nb;
        break;
      }
    }
    if (next < 0) {
      throw std::invalid_argument("eigendecompose: component is not a path");
    }
    order.push_back(next);
    prev = cur;
    cur = next;
  }
  return order;
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  int best = 0;
  double best_mag = std::abs(v[0]);
  for (int i = 1; i < v.size(); ++i) {
    const double mag = std::abs(v[i]);
    if (mag > best_mag) {
      best_mag = mag;
      best = i;
    }
  }
  if (v[best] < 0.0) {
    v = -v;
  }
}

}  // namespace

SpectralBasis eigendecompose(const Eigen::MatrixXd& laplacian) {
  const int n = static_cast<int>(laplacian.rows());
  if (n < 1 || laplacian.cols() != n) {
    throw std::invalid_argument("eigendecompose: matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, laplacian.cwiseAbs().maxCoeff());
  if ((laplacian - laplacian.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("eigendecompose: matrix is not symmetric");
  }

  std::vector<std::vector<int>> adjacency(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (laplacian(i, j) != 0.0) {
        adjacency[i].push_back(j);
        adjacency[j].push_back(i);
      }
    }
  }

  // Connected components in order of their smallest node.
  std::vector<int> component(n, -1);
  std::vector<std::vector<int>> components;
  for (int start = 0; start < n; ++start) {
    if (component[start] >= 0) {
      continue;
    }
    const int id = static_cast<int>(components.size());
    std::vector<int> stack{start};
    std::vector<int> members;
    component[start] = id;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      members.push_back(v);
      for (int nb : adjacency[v]) {
        if (component[nb] < 0) {
          component[nb] = id;
          stack.push_back(nb);
        }
      }
    }
    std::sort(members.begin(), members.end());
    components.push_back(std::move(members));
  }

  std::vector<double> values;
  values.reserve(n);
  Eigen::MatrixXd vectors = Eigen::MatrixXd::Zero(n, n);
  int col = 0;

  for (const auto& nodes : components) {
    const int m = static_cast<int>(nodes.size());
    if (m == 1) {
      values.push_back(laplacian(nodes[0], nodes[0]));
      vectors(nodes[0], col) = 1.0;
      ++col;
      continue;
    }
    const std::vector<int> order = order_as_path(nodes, adjacency);
    Eigen::VectorXd d(m);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, m);
    for (int j = 0; j < m; ++j) {
      d[j] = laplacian(order[j], order[j]);
      if (j + 1 < m) {
        e[j] = laplacian(order[j], order[j + 1]);
      }
      z(order[j], j) = 1.0;
    }
    detail::ql_implicit_shift(d, e, z);
    for (int j = 0; j < m; ++j) {
      values.push_back(d[j]);
      vectors.col(col) = z.col(j);
      ++col;
    }
  }

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](int a, int b) { return values[a] < values[b]; });

  SpectralBasis basis;
  basis.eigenvalues.resize(n);
  basis.eigenvectors.resize(n, n);
  for (int j = 0; j < n; ++j) {
    basis.eigenvalues[j] = values[perm[j]];
    basis.eigenvectors.col(j) = vectors.col(perm[j]);
    fix_sign(basis.eigenvectors.col(j));
  }
  return basis;
}

}  // namespace fiberparc
